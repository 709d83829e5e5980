//! Command-line front end: reads JSON instances, runs one pipeline and
//! writes a report `{"command": ..., "pass": ..., "details": ...}`.
//!
//! Exit status is 0 when the check passes, 1 when it fails and 2 when the
//! input cannot be used.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qoper::bethe::{limit_flow, nondegenerate_check, solve_newton, xxz_residual, BetheProblem, BetheRoots, LimitParams, Solution};
use qoper::reconstruct::correspondence_check;
use qoper::selftest::run_all;
use qoper::special::{ktheory_relation, KTheoryInstance};
use qoper::{Error, QFrame, ToleranceConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_SCHEDULE: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Parser)]
#[command(name = "qoper", version, about = "Bethe equations, QQ-systems and q-oper reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Pass threshold: Bethe residual for solve/verify, relation residual for ktheory.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random Newton starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random Newton starts.
    #[arg(long, global = true, default_value_t = 32)]
    pub starts: usize,
    /// Half-width of the q-lattice search window.
    #[arg(long, global = true)]
    pub window: Option<i32>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a Bethe problem.
    Solve { problem: String },
    /// Residuals and nondegeneracy of given roots.
    Verify { problem: String, roots: String },
    /// Full correspondence certificate for given roots.
    Reconstruct { problem: String, roots: String },
    /// Convergence table along the XXZ → XXX → Gaudin degenerations.
    Limits { input: String },
    /// Determinantal K-theory relation for an instance.
    Ktheory { input: String },
    /// Run the built-in fixtures.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Verify { .. } => "verify",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Limits { .. } => "limits",
            Command::Ktheory { .. } => "ktheory",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    pass: bool,
    details: Value,
}

/// Limits input: the parameters plus optional schedules.
#[derive(Deserialize)]
struct LimitsFile {
    #[serde(flatten)]
    params: LimitParams,
    #[serde(default)]
    radii: Option<Vec<f64>>,
    #[serde(default)]
    epsilons: Option<Vec<f64>>,
}

enum Outcome {
    Done { pass: bool, details: Value },
    Input(String),
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_)
            | Error::BadIndices(_)
            | Error::BadShape(_)
            | Error::DegenerateTwist(_)
            | Error::DegenerateTwists(_)
            | Error::BadDegrees(_)
            | Error::ZeroInput
            | Error::ZeroPolynomial
    )
}

fn failure(e: Error) -> Outcome {
    if is_input_error(&e) {
        return Outcome::Input(e.to_string());
    }
    let mut details = json!({ "error": e.to_string() });
    if let Error::NoConvergence { best } = &e {
        details["best"] = json!({ "u": best.0.u, "residuals": best.1 });
    }
    Outcome::Done { pass: false, details }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String, String> {
        if path == "-" {
            if self.stdin_used {
                return Err("standard input can be read only once".into());
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
            Ok(s)
        } else {
            fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
        }
    }
}

fn load_problem(io: &mut Io, path: &str, cli: &Cli) -> Result<BetheProblem, String> {
    let p = BetheProblem::from_json_str(&io.read(path)?).map_err(|e| format!("{path}: {e}"))?;
    let mut tol = p.frame.tol;
    if let Some(t) = cli.tol {
        tol.newton_conv = t;
    }
    if tol == p.frame.tol && cli.window.is_none() {
        return Ok(p);
    }
    let frame = QFrame::new(p.frame.sqrt_q(), tol, cli.window.unwrap_or(p.frame.lattice_window)).map_err(|e| e.to_string())?;
    Ok(BetheProblem { frame, ..p })
}

fn load_roots(io: &mut Io, path: &str, p: &BetheProblem) -> Result<BetheRoots, String> {
    let roots: BetheRoots = serde_json::from_str(&io.read(path)?).map_err(|e| format!("{path}: {e}"))?;
    if roots.u.iter().map(|l| l.len()).ne(p.r.iter().copied()) {
        return Err(format!("{path}: /u: root counts differ from /r of the problem"));
    }
    Ok(roots)
}

fn validate_flags(cli: &Cli) -> Result<(), String> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err("--tol must be positive".into());
        }
        ToleranceConfig { newton_conv: t, ..Default::default() }.validate().map_err(|e| e.to_string())?;
    }
    if cli.starts == 0 {
        return Err("--starts must be positive".into());
    }
    if cli.window.is_some_and(|w| w < 1) {
        return Err("--window must be positive".into());
    }
    Ok(())
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<Outcome, String> {
    validate_flags(cli)?;
    Ok(match &cli.command {
        Command::Solve { problem } => {
            let p = load_problem(io, problem, cli)?;
            match solve_newton(&p, None, cli.seed, cli.starts) {
                Ok((mut roots, rep)) => {
                    roots.canonicalize();
                    let rep = xxz_residual(&p, &roots).unwrap_or(rep);
                    let sol = Solution { u: roots.u, residual_max: rep.max_abs, converged: rep.converged };
                    Outcome::Done { pass: sol.converged, details: json!(sol) }
                }
                Err(e) => failure(e),
            }
        }
        Command::Verify { problem, roots } => {
            let p = load_problem(io, problem, cli)?;
            let u = load_roots(io, roots, &p)?;
            match (xxz_residual(&p, &u), nondegenerate_check(&p, &u)) {
                (Ok(res), Ok(nd)) => {
                    Outcome::Done { pass: res.converged && nd.ok, details: json!({ "residual": res, "nondegeneracy": nd }) }
                }
                (Err(e), _) | (_, Err(e)) => failure(e),
            }
        }
        Command::Reconstruct { problem, roots } => {
            let p = load_problem(io, problem, cli)?;
            let u = load_roots(io, roots, &p)?;
            match correspondence_check(&p, &u) {
                Ok(cert) => Outcome::Done { pass: cert.pass, details: json!(cert) },
                Err(e) => failure(e),
            }
        }
        Command::Limits { input } => {
            let f: LimitsFile = serde_json::from_str(&io.read(input)?).map_err(|e| format!("{input}: {e}"))?;
            let radii = f.radii.unwrap_or(DEFAULT_SCHEDULE.to_vec());
            let eps = f.epsilons.unwrap_or(DEFAULT_SCHEDULE.to_vec());
            if radii.len() < 2 || eps.len() < 2 {
                return Err(format!("{input}: /radii and /epsilons need at least two entries"));
            }
            match limit_flow(&f.params, &radii, &eps) {
                // both deviations must shrink at least linearly
                Ok(rep) => Outcome::Done { pass: rep.xxz_order >= 0.8 && rep.gaudin_order >= 0.8, details: json!(rep) },
                Err(e) => failure(e),
            }
        }
        Command::Ktheory { input } => {
            let inst = KTheoryInstance::from_json_str(&io.read(input)?).map_err(|e| format!("{input}: {e}"))?;
            let tol = cli.tol.unwrap_or(1e-9);
            match ktheory_relation(&inst, None) {
                Ok(rep) => Outcome::Done {
                    pass: rep.max_coefficient_residual <= tol && rep.sample_residual <= tol,
                    details: json!(rep),
                },
                Err(e) => failure(e),
            }
        }
        Command::Selftest => {
            let results = run_all();
            Outcome::Done { pass: results.iter().all(|r| r.pass), details: json!(results) }
        }
    })
}

/// Parse `args` (program name first), run, write the report and return the
/// exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    let mut io = Io { stdin, stdin_used: false };
    let (pass, details, code) = match dispatch(&cli, &mut io) {
        Ok(Outcome::Done { pass, details }) => (pass, details, if pass { EXIT_PASS } else { EXIT_FAIL }),
        Ok(Outcome::Input(msg)) | Err(msg) => {
            let _ = writeln!(stderr, "input error: {msg}");
            (false, json!({ "error": msg }), EXIT_INPUT)
        }
    };
    let report = Report { command: cli.command.name(), pass, details };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let written = match &cli.out {
        Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "output error: {e}");
        return EXIT_INPUT;
    }
    code
}
