//! The bundled dynamic algorithm programs.

pub const SSSP: &str = include_str!("../programs/sssp.sp");
pub const PR: &str = include_str!("../programs/pr.sp");
pub const TC: &str = include_str!("../programs/tc.sp");

/// `(name, source)` for every bundled program.
pub const ALL: [(&str, &str); 3] = [("sssp", SSSP), ("pr", PR), ("tc", TC)];

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
