//! One-shot driver for an external SMT-LIB 2 solver process.

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};

use super::encode::SmtDocument;

/// Environment variable holding the default solver command template.
pub const SOLVER_ENV: &str = "RDBOUND_SOLVER";

/// Used when neither a flag nor [`SOLVER_ENV`] names a solver.
pub const DEFAULT_SOLVER: &str = "z3 -in";

/// Placeholder replaced by the path of a temporary script file. Without it
/// the script is written to the solver's standard input.
pub const FILE_PLACEHOLDER: &str = "{file}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Option<Duration>,
}

impl SolverConfig {
    /// Parses a whitespace-separated command template such as `z3 -in` or
    /// `yices-smt2 {file}`.
    pub fn from_template(template: &str, timeout: Option<Duration>) -> Result<Self> {
        let mut parts = template.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty solver command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
            timeout,
        })
    }

    /// The template from [`SOLVER_ENV`], else [`DEFAULT_SOLVER`].
    pub fn from_env(timeout: Option<Duration>) -> Result<Self> {
        let t = std::env::var(SOLVER_ENV).unwrap_or_else(|_| DEFAULT_SOLVER.to_string());
        Self::from_template(&t, timeout)
    }

    fn uses_file(&self) -> bool {
        self.args.iter().any(|a| a.contains(FILE_PLACEHOLDER))
    }

    pub fn template(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    SolverError,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverStatus::Sat => "sat",
            SolverStatus::Unsat => "unsat",
            SolverStatus::Unknown => "unknown",
            SolverStatus::Timeout => "timeout",
            SolverStatus::SolverError => "solver-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverVerdict {
    pub status: SolverStatus,
    pub elapsed: Duration,
    /// First response token, or a diagnostic when there was none.
    pub raw: String,
    /// Everything the solver printed after the first token.
    #[serde(skip)]
    pub rest: String,
}

impl SolverVerdict {
    fn error(elapsed: Duration, raw: impl Into<String>) -> Self {
        Self {
            status: SolverStatus::SolverError,
            elapsed,
            raw: raw.into(),
            rest: String::new(),
        }
    }
}

/// Splits solver output into its first token and the remainder, skipping
/// `;` comments.
fn first_token(out: &str) -> Option<(&str, &str)> {
    let mut offset = 0;
    for line in out.split_inclusive('\n') {
        let body = line.split(';').next().unwrap_or("");
        if let Some(tok) = body.split_whitespace().next() {
            let start = offset + body.find(tok).unwrap();
            let tok = if tok.starts_with('(') { "(" } else { tok };
            return Some((tok, &out[start + tok.len()..]));
        }
        offset += line.len();
    }
    None
}

fn wait_with_deadline(child: &mut Child, deadline: Option<Instant>) -> std::io::Result<Option<std::process::ExitStatus>> {
    let mut pause = Duration::from_micros(200);
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Some(status));
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            kill_tree(child);
            let _ = child.wait();
            return Ok(None);
        }
        thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(10));
    }
}

/// Kills the solver and anything it spawned; the child leads its own
/// process group.
#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // SAFETY: signalling a process group id we created; no memory is touched.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

/// Runs one script through a fresh solver process.
pub fn run_script(script: &str, cfg: &SolverConfig) -> SolverVerdict {
    let start = Instant::now();
    let deadline = cfg.timeout.map(|t| start + t);

    let mut tmp = None;
    let mut cmd = Command::new(&cfg.program);
    if cfg.uses_file() {
        let file = match tempfile::Builder::new().suffix(".smt2").tempfile() {
            Ok(mut f) => match f.write_all(script.as_bytes()) {
                Ok(()) => f,
                Err(e) => return SolverVerdict::error(start.elapsed(), format!("writing script: {e}")),
            },
            Err(e) => return SolverVerdict::error(start.elapsed(), format!("creating script file: {e}")),
        };
        let path = file.path().display().to_string();
        cmd.args(cfg.args.iter().map(|a| a.replace(FILE_PLACEHOLDER, &path)));
        cmd.stdin(Stdio::null());
        tmp = Some(file);
    } else {
        cmd.args(&cfg.args);
        cmd.stdin(Stdio::piped());
    }
    cmd.stdout(Stdio::piped()).stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }

    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => return SolverVerdict::error(start.elapsed(), format!("cannot start {}: {e}", cfg.program)),
    };

    let writer = child.stdin.take().map(|mut stdin| {
        let script = script.to_string();
        // A solver that exits early closes the pipe; that is reported via
        // its output, not here.
        thread::spawn(move || {
            let _ = stdin.write_all(script.as_bytes());
        })
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let status = wait_with_deadline(&mut child, deadline);
    let elapsed = start.elapsed();
    if let Some(w) = writer {
        let _ = w.join();
    }
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    drop(tmp);

    let status = match status {
        Ok(Some(s)) => s,
        Ok(None) => {
            return SolverVerdict {
                status: SolverStatus::Timeout,
                elapsed,
                raw: String::new(),
                rest: String::new(),
            }
        }
        Err(e) => return SolverVerdict::error(elapsed, format!("waiting for solver: {e}")),
    };

    match first_token(&out) {
        Some((tok, rest)) => {
            let st = match tok {
                "sat" => SolverStatus::Sat,
                "unsat" => SolverStatus::Unsat,
                "unknown" => SolverStatus::Unknown,
                _ => SolverStatus::SolverError,
            };
            let raw = if st == SolverStatus::SolverError {
                out.trim().lines().next().unwrap_or(tok).to_string()
            } else {
                tok.to_string()
            };
            SolverVerdict {
                status: st,
                elapsed,
                raw,
                rest: rest.to_string(),
            }
        }
        None => {
            let why = if status.success() {
                "solver produced no output".to_string()
            } else {
                format!("solver exited with {status}: {}", err.trim())
            };
            SolverVerdict::error(elapsed, why)
        }
    }
}

pub fn run_solver(doc: &SmtDocument, cfg: &SolverConfig) -> SolverVerdict {
    run_script(doc.text(), cfg)
}
