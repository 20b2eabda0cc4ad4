//! Running an external prover under a time limit and classifying its output.

use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Extra wall-clock time granted before a prover is killed.
const WALL_GRACE: Duration = Duration::from_secs(1);
const POLL: Duration = Duration::from_millis(10);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Proof,
    Model,
    Timeout,
    Error,
    Skipped,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Proof => "proof",
            Outcome::Model => "model",
            Outcome::Timeout => "timeout",
            Outcome::Error => "error",
            Outcome::Skipped => "skipped",
        }
    }
}

/// Output patterns deciding the outcome, tried in the order proof, model,
/// timeout. Output matching none of them is an error.
#[derive(Clone, Debug)]
pub struct OutcomePatterns {
    pub proof: Regex,
    pub model: Regex,
    pub timeout: Regex,
}

impl Default for OutcomePatterns {
    fn default() -> Self {
        OutcomePatterns {
            proof: Regex::new(r"SZS status (Theorem|Unsatisfiable|ContradictoryAxioms)\b").unwrap(),
            model: Regex::new(r"SZS status (CounterSatisfiable|Satisfiable)\b").unwrap(),
            timeout: Regex::new(r"SZS status (Timeout|TimeOut|ResourceOut)\b").unwrap(),
        }
    }
}

impl OutcomePatterns {
    pub fn new(proof: &str, model: &str, timeout: &str) -> Result<Self> {
        let re = |s: &str| Regex::new(s).map_err(|e| Error::InvalidConfig(format!("bad pattern `{s}`: {e}")));
        Ok(OutcomePatterns {
            proof: re(proof)?,
            model: re(model)?,
            timeout: re(timeout)?,
        })
    }

    pub fn classify(&self, output: &str) -> Outcome {
        if self.proof.is_match(output) {
            Outcome::Proof
        } else if self.model.is_match(output) {
            Outcome::Model
        } else if self.timeout.is_match(output) {
            Outcome::Timeout
        } else {
            Outcome::Error
        }
    }
}

/// A prover command template such as `eprover --cpu-limit={timeout} {input}`.
#[derive(Clone, Debug)]
pub struct ProverConfig {
    pub command: String,
    /// CPU-time limit in seconds.
    pub timeout_secs: u64,
    pub patterns: OutcomePatterns,
}

impl ProverConfig {
    pub fn new(command: impl Into<String>, timeout_secs: u64) -> Result<Self> {
        let cfg = ProverConfig {
            command: command.into(),
            timeout_secs,
            patterns: OutcomePatterns::default(),
        };
        cfg.argv(Path::new("x"))?;
        Ok(cfg)
    }

    fn argv(&self, input: &Path) -> Result<Vec<String>> {
        let parts = shlex::split(&self.command)
            .filter(|p| !p.is_empty())
            .ok_or_else(|| Error::InvalidConfig(format!("cannot parse prover command `{}`", self.command)))?;
        let input = input.to_string_lossy();
        let timeout = self.timeout_secs.to_string();
        Ok(parts
            .into_iter()
            .map(|p| p.replace("{input}", &input).replace("{timeout}", &timeout))
            .collect())
    }
}

#[derive(Clone, Debug)]
pub struct ProverRun {
    pub outcome: Outcome,
    pub wall_secs: f64,
    pub cpu_secs: Option<f64>,
    pub output: String,
}

fn read_all(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn tv_secs(tv: libc::timeval) -> f64 {
    tv.tv_sec as f64 + tv.tv_usec as f64 / 1e6
}

/// Runs the prover on `input`. The process gets an RLIMIT_CPU of the
/// configured timeout and is killed, with its process group, once the wall
/// clock passes the timeout plus a short grace period.
pub fn run_prover(config: &ProverConfig, input: &Path) -> Result<ProverRun> {
    let argv = config.argv(input)?;
    let cpu_limit = config.timeout_secs.max(1) as libc::rlim_t;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    // SAFETY: setrlimit is async-signal-safe and touches no shared state.
    unsafe {
        cmd.pre_exec(move || {
            let lim = libc::rlimit {
                rlim_cur: cpu_limit,
                rlim_max: cpu_limit + 1,
            };
            libc::setrlimit(libc::RLIMIT_CPU, &lim);
            Ok(())
        });
    }

    let start = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::ProverNotFound(argv[0].clone()))
        }
        Err(e) => return Err(e.into()),
    };
    let pid = child.id() as libc::pid_t;
    let stdout = read_all(child.stdout.take().expect("piped stdout"));
    let stderr = read_all(child.stderr.take().expect("piped stderr"));

    let deadline = Duration::from_secs(config.timeout_secs) + WALL_GRACE;
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let mut killed = false;
    loop {
        // SAFETY: pid is our own unreaped child; the out-pointers are valid.
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if r == pid {
            break;
        }
        if r < 0 {
            let err = std::io::Error::last_os_error();
            if err.kind() == std::io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err.into());
        }
        if !killed && start.elapsed() >= deadline {
            // SAFETY: signalling our own process group.
            unsafe { libc::kill(-pid, libc::SIGKILL) };
            killed = true;
        }
        thread::sleep(POLL);
    }
    // Stragglers in the group would keep the pipes open.
    // SAFETY: as above; ESRCH when the group is already gone is fine.
    unsafe { libc::kill(-pid, libc::SIGKILL) };
    let wall_secs = start.elapsed().as_secs_f64();

    let mut output = stdout.join().unwrap_or_default();
    output.push_str(&stderr.join().unwrap_or_default());
    drop(child);

    let cpu_killed = libc::WIFSIGNALED(status)
        && matches!(libc::WTERMSIG(status), libc::SIGXCPU | libc::SIGKILL);
    let outcome = if killed || cpu_killed {
        Outcome::Timeout
    } else {
        config.patterns.classify(&output)
    };
    if outcome == Outcome::Error {
        log::debug!("unclassifiable prover output for {}", input.display());
    }
    Ok(ProverRun {
        outcome,
        wall_secs,
        cpu_secs: Some(tv_secs(usage.ru_utime) + tv_secs(usage.ru_stime)),
        output,
    })
}
