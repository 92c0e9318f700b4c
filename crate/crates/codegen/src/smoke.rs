//! Compiles emitted code with the host C++ toolchain, when there is one.

use std::path::{Path, PathBuf};
use std::process::Command;

use crate::{HEADER_NAME, RUNTIME_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmokeStatus {
    Passed,
    Failed,
    /// No C++ compiler was found.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct SmokeReport {
    pub status: SmokeStatus,
    pub compiler: Option<PathBuf>,
    pub binary: Option<PathBuf>,
    /// Compiler output, or the reason the compile was skipped.
    pub log: String,
}

/// `$CXX` if set, else the first of `c++`, `g++`, `clang++` on `PATH`.
pub fn find_toolchain() -> Option<PathBuf> {
    if let Some(cxx) = std::env::var_os("CXX").filter(|s| !s.is_empty()) {
        return Some(PathBuf::from(cxx));
    }
    let path = std::env::var_os("PATH")?;
    for name in ["c++", "g++", "clang++"] {
        for dir in std::env::split_paths(&path) {
            let p = dir.join(name);
            if p.is_file() {
                return Some(p);
            }
        }
    }
    None
}

/// Writes `source` and the runtime header into `work_dir` and compiles
/// them with `-std=c++17 -O2 -fopenmp`. If OpenMP is unavailable the
/// compile is retried without it, which yields a sequential binary.
pub fn compile_smoke(
    source: &str,
    file_name: &str,
    work_dir: &Path,
    toolchain: Option<&Path>,
) -> SmokeReport {
    let compiler = match toolchain.map(Path::to_path_buf).or_else(find_toolchain) {
        Some(c) => c,
        None => {
            return SmokeReport {
                status: SmokeStatus::Skipped,
                compiler: None,
                binary: None,
                log: "no C++ compiler found; set CXX to enable the compile check".into(),
            }
        }
    };
    let failed = |log: String| SmokeReport {
        status: SmokeStatus::Failed,
        compiler: Some(compiler.clone()),
        binary: None,
        log,
    };
    if let Err(e) = std::fs::create_dir_all(work_dir)
        .and_then(|_| std::fs::write(work_dir.join(file_name), source))
        .and_then(|_| std::fs::write(work_dir.join(HEADER_NAME), RUNTIME_HEADER))
    {
        return failed(format!("cannot write sources: {e}"));
    }
    let stem = Path::new(file_name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".into());
    let binary = work_dir.join(stem);
    let mut log = String::new();
    for openmp in [true, false] {
        let mut cmd = Command::new(&compiler);
        cmd.arg("-std=c++17").arg("-O2");
        if openmp {
            cmd.arg("-fopenmp");
        }
        cmd.arg("-o").arg(&binary).arg(work_dir.join(file_name));
        match cmd.output() {
            Ok(out) if out.status.success() => {
                log.push_str(&String::from_utf8_lossy(&out.stderr));
                return SmokeReport {
                    status: SmokeStatus::Passed,
                    compiler: Some(compiler.clone()),
                    binary: Some(binary),
                    log,
                };
            }
            Ok(out) => {
                log.push_str(&String::from_utf8_lossy(&out.stderr));
            }
            Err(e) => return failed(format!("cannot run {}: {e}", compiler.display())),
        }
    }
    failed(log)
}
