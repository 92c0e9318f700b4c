//! Emits OpenMP C++ from checked graph DSL programs.
//!
//! The output is a single translation unit that includes the bundled
//! runtime header [`RUNTIME_HEADER`]. Every statement the access analysis
//! flagged is lowered to an atomic construct; [`EmitPlan`] records which.

mod omp;
pub mod plan;
pub mod smoke;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use graphdyn_dsl::{Compiled, Diagnostic, Diagnostics, Phase, Span};

pub use plan::{AtomicLowering, AtomicSite, EmitPlan, LoopPlan};
pub use smoke::{compile_smoke, find_toolchain, SmokeReport, SmokeStatus};

pub const HEADER_NAME: &str = "graphdyn_rt.h";
pub const RUNTIME_HEADER: &str = include_str!("../assets/graphdyn_rt.h");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    OpenMp,
    Mpi,
    Cuda,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "omp" | "openmp" => Ok(Backend::OpenMp),
            "mpi" => Ok(Backend::Mpi),
            "cuda" => Ok(Backend::Cuda),
            _ => Err(format!("unknown backend `{s}` (expected omp, mpi or cuda)")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::OpenMp => "omp",
            Backend::Mpi => "mpi",
            Backend::Cuda => "cuda",
        })
    }
}

/// OpenMP loop schedule for parallel regions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Schedule {
    #[default]
    Dynamic,
    Static,
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(Schedule::Dynamic),
            "static" => Ok(Schedule::Static),
            _ => Err(format!("unknown schedule `{s}` (expected dynamic or static)")),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Dynamic => "dynamic",
            Schedule::Static => "static",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EmitOptions {
    /// Program name; the output is `<name>_omp.cc`.
    pub name: String,
    pub schedule: Schedule,
}

impl EmitOptions {
    pub fn new(name: impl Into<String>) -> Self {
        EmitOptions {
            name: name.into(),
            schedule: Schedule::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Emitted {
    pub file_name: String,
    pub source: String,
    pub plan: EmitPlan,
}

pub fn emit(backend: Backend, program: &Compiled, opts: &EmitOptions) -> Result<Emitted, Diagnostics> {
    match backend {
        Backend::OpenMp => emit_openmp(program, opts),
        other => Err(Diagnostics(vec![Diagnostic::new(
            Phase::Codegen,
            Span::default(),
            format!("the {other} backend is not available in this build"),
        )])),
    }
}

pub fn emit_openmp(program: &Compiled, opts: &EmitOptions) -> Result<Emitted, Diagnostics> {
    omp::Emitter::new(program, opts).run()
}

/// Writes the translation unit and the runtime header into `dir`. Returns
/// the path of the `.cc` file.
pub fn write_output(dir: &Path, emitted: &Emitted) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let cc = dir.join(&emitted.file_name);
    std::fs::write(&cc, &emitted.source)?;
    std::fs::write(dir.join(HEADER_NAME), RUNTIME_HEADER)?;
    Ok(cc)
}
