//! Lowering decisions recorded while emitting, and the audit that checks
//! them against the emitted text.

use std::collections::BTreeMap;
use std::fmt;

use graphdyn_dsl::ast::StmtId;
use graphdyn_dsl::AccessSummary;

/// How a contended write is made safe in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomicLowering {
    /// Built-in atomic store.
    Store,
    /// Atomic read-modify-write helper for `+=`/`-=` on a property cell.
    FetchOp,
    /// Inline compare-exchange retry loop for `Min`/`Max`.
    RetryLoop,
    /// Accumulation into a variable listed in the loop's reduction clause.
    ReductionClause,
    /// Named critical section, for values too wide for the atomic builtins.
    Critical,
}

impl fmt::Display for AtomicLowering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomicLowering::Store => "atomic store",
            AtomicLowering::FetchOp => "atomic fetch-op",
            AtomicLowering::RetryLoop => "compare-exchange retry loop",
            AtomicLowering::ReductionClause => "reduction clause",
            AtomicLowering::Critical => "critical section",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicSite {
    pub function: String,
    pub line: u32,
    pub lowering: AtomicLowering,
    /// The written location as it appears in the output.
    pub target: String,
}

/// One loop that opens a parallel region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopPlan {
    pub function: String,
    pub line: u32,
    /// Source construct: `ForAll`, `OnAdd` or `OnDelete`.
    pub construct: &'static str,
    pub pragma: String,
    pub reductions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmitPlan {
    pub file_name: String,
    pub loops: Vec<LoopPlan>,
    pub atomics: BTreeMap<StmtId, AtomicSite>,
    /// Host/device transfers. Always empty for the shared-memory backend.
    pub transfers: Vec<String>,
}

impl EmitPlan {
    /// Flagged statements that received no atomic lowering, in id order.
    pub fn uncovered(&self, access: &AccessSummary) -> Vec<StmtId> {
        let mut out: Vec<StmtId> = access
            .flagged
            .keys()
            .filter(|id| !self.atomics.contains_key(id))
            .copied()
            .collect();
        out.sort();
        out
    }

    /// Checks that every recorded site shows up in `source` as the atomic
    /// construct it was lowered to. Returns one message per missing site.
    pub fn audit(&self, source: &str) -> Vec<String> {
        let lines: Vec<&str> = source.lines().collect();
        let mut problems = Vec::new();
        for site in self.atomics.values() {
            let ok = match site.lowering {
                AtomicLowering::ReductionClause => lines.iter().any(|l| {
                    l.trim_start().starts_with("#pragma omp parallel for")
                        && reduction_list(l).iter().any(|v| *v == site.target)
                }),
                lowering => {
                    let tag = format!("// line {}", site.line);
                    let needle = match lowering {
                        AtomicLowering::Store => "rt::atomic_store(",
                        AtomicLowering::FetchOp => "rt::atomic_",
                        AtomicLowering::RetryLoop => "__atomic_compare_exchange(",
                        _ => "#pragma omp critical",
                    };
                    lines
                        .iter()
                        .any(|l| l.contains(needle) && l.trim_end().ends_with(&tag))
                }
            };
            if !ok {
                problems.push(format!(
                    "{} at line {} in {} has no {} in the output",
                    site.target, site.line, site.function, site.lowering
                ));
            }
        }
        problems
    }
}

fn reduction_list(pragma: &str) -> Vec<&str> {
    let Some(start) = pragma.find("reduction(+:") else {
        return Vec::new();
    };
    let rest = &pragma[start + "reduction(+:".len()..];
    let end = rest.find(')').unwrap_or(rest.len());
    rest[..end].split(',').map(str::trim).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_lists_are_parsed() {
        let p = "  #pragma omp parallel for schedule(static) reduction(+: a, b_2)";
        assert_eq!(reduction_list(p), vec!["a", "b_2"]);
        assert!(reduction_list("#pragma omp parallel for").is_empty());
    }

    #[test]
    fn audit_reports_missing_sites() {
        let mut plan = EmitPlan::default();
        plan.atomics.insert(
            StmtId(3),
            AtomicSite {
                function: "f".into(),
                line: 7,
                lowering: AtomicLowering::Store,
                target: "flag.at(v)".into(),
            },
        );
        assert!(plan.audit("rt::atomic_store(&flag.at(v), true);  // line 7\n").is_empty());
        assert_eq!(plan.audit("flag.at(v) = true;  // line 7\n").len(), 1);
    }
}
