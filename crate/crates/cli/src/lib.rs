//! `charwave` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 configuration, 3 validation (geometry
//! or matching conditions), 4 verification failure, 5 runtime failure
//! (numerics or I/O).

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use charwave::solution::fmt_f64;
use charwave::{
    validate_problem, verify, BreakLine, Partition, ProblemSpec, Solution, SolveOptions, ValidationReport,
    VerificationReport, VerifyOptions,
};
use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use config::{Grid, LoadedConfig, ProblemBlock, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Runtime(_) => 5,
        }
    }
}

impl From<charwave::Error> for CliError {
    fn from(e: charwave::Error) -> Self {
        use charwave::Error as E;
        match e {
            E::Parse { .. } | E::InvalidParameter(_) => CliError::Config(e.to_string()),
            E::SlopeViolation { .. }
            | E::Intersection { .. }
            | E::BoundaryOrigin(_)
            | E::MatchingFailed { .. }
            | E::PartitionStall { .. }
            | E::Precondition(_)
            | E::NoBracket { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Break ladders as CSV.
    Partition,
    /// Pre-solve checks and matching residuals as JSON.
    Check,
    /// Sampled solution field as CSV.
    Solve,
    /// Break-line polylines as JSON.
    Diagram,
    /// Verification report as JSON.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Partition => "partition",
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Diagram => "diagram",
            Command::Verify => "verify",
        }
    }
}

fn parse_grid(text: &str) -> Result<Grid, String> {
    let (nt, nx) = text.split_once(['x', 'X']).ok_or("expected NTxNX, e.g. 101x101")?;
    let nt: usize = nt.trim().parse().map_err(|e| format!("NT: {e}"))?;
    let nx: usize = nx.trim().parse().map_err(|e| format!("NX: {e}"))?;
    if nt < 2 || nx < 2 {
        return Err("grid must be at least 2x2".into());
    }
    Ok(Grid { nt, nx })
}

/// Wave equation in a curvilinear half-strip with an impact velocity jump.
#[derive(Debug, Parser)]
#[command(name = "charwave", version)]
pub struct Cli {
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Build the smooth part even if the matching conditions fail.
    #[arg(long)]
    pub force: bool,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sampling grid as NTxNX (overrides the configuration).
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    /// Seed for random sample points (overrides the configuration).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Written at the top of every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub command: &'static str,
    pub config_sha256: String,
}

impl Provenance {
    fn comment(&self) -> Vec<String> {
        vec![format!("{} {} config_sha256={}", self.tool, self.command, self.config_sha256)]
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

struct Context {
    loaded: LoadedConfig,
    out_dir: PathBuf,
    grid: Grid,
    seed: u64,
    force: bool,
    provenance: Provenance,
}

impl Context {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir).map_err(|e| io_error(&self.out_dir, e))?;
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, body: T) -> Result<PathBuf, CliError> {
        let doc = Document {
            provenance: &self.provenance,
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn spec(&self) -> Result<ProblemSpec, CliError> {
        Ok(ProblemSpec::new(&self.loaded.config.definition()?)?)
    }

    fn solution(&self) -> Result<Solution, CliError> {
        let options = SolveOptions {
            force: self.force,
            ..SolveOptions::default()
        };
        Ok(Solution::build(&self.spec()?, options)?)
    }
}

fn partition_csv(p: &Partition, comment: &[String]) -> String {
    let mut s = String::new();
    for c in comment {
        s += &format!("# {c}\n");
    }
    s += "index,r,l,left_break,right_break\n";
    for k in 0..p.len() {
        s += &format!(
            "{k},{},{},{},{}\n",
            fmt_f64(p.r[k]),
            fmt_f64(p.lseq[k]),
            fmt_f64(p.left_breaks[k]),
            fmt_f64(p.right_breaks[k])
        );
    }
    s
}

#[derive(Serialize)]
struct Diagram<'a> {
    a: f64,
    l: f64,
    horizon: f64,
    /// `(t, γ(t))` samples.
    boundary: Vec<(f64, f64)>,
    partition: &'a Partition,
    lines: Vec<BreakLine>,
}

#[derive(Serialize)]
struct CheckBody<'a> {
    report: &'a ValidationReport,
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    options: &'a VerifyOptions,
    report: &'a VerificationReport,
}

fn execute(cmd: Command, ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let say = |out: &mut dyn Write, msg: String| writeln!(out, "{msg}").map_err(|e| CliError::Runtime(e.to_string()));
    match cmd {
        Command::Partition => {
            let spec = ctx.spec()?;
            let p = Partition::build(&spec.boundary, spec.l(), spec.horizon())?;
            let path = ctx.write("partition.csv", partition_csv(&p, &ctx.provenance.comment()).as_bytes())?;
            say(out, format!("wrote {} ({} breaks)", path.display(), p.len()))
        }
        Command::Check => {
            let report = validate_problem(&ctx.loaded.config.definition()?)?;
            let path = ctx.write_json("check.json", CheckBody { report: &report })?;
            if let Some(m) = &report.matching {
                say(
                    out,
                    format!(
                        "res25 = {:e}, res26 = {:e}, res27 = {:e}, res28 = {:e} (tolerance {:e})",
                        m.res25, m.res26, m.res27, m.res28, m.tolerance
                    ),
                )?;
            }
            say(out, format!("wrote {}", path.display()))?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                Err(CliError::Validation(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Solve => {
            let sol = ctx.solution()?;
            let field = sol.sample_grid(ctx.grid.nt, ctx.grid.nx)?;
            let mut bytes = Vec::new();
            field
                .write_csv(&mut bytes, &ctx.provenance.comment())
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let path = ctx.write("solution.csv", &bytes)?;
            say(out, format!("wrote {} ({}x{} grid)", path.display(), ctx.grid.nt, ctx.grid.nx))
        }
        Command::Diagram => {
            let spec = ctx.spec()?;
            let p = Partition::build(&spec.boundary, spec.l(), spec.horizon())?;
            let n = 200;
            let boundary = (0..=n)
                .map(|k| {
                    let t = spec.horizon() * k as f64 / n as f64;
                    Ok((t, spec.boundary.gamma(t)?))
                })
                .collect::<charwave::Result<Vec<_>>>()?;
            let diagram = Diagram {
                a: spec.a(),
                l: spec.l(),
                horizon: spec.horizon(),
                boundary,
                lines: p.break_lines(&spec.boundary)?,
                partition: &p,
            };
            let path = ctx.write_json("diagram.json", diagram)?;
            say(out, format!("wrote {}", path.display()))
        }
        Command::Verify => {
            let sol = ctx.solution()?;
            let options = VerifyOptions {
                seed: ctx.seed,
                ..VerifyOptions::default()
            };
            let report = verify(&sol, &options)?;
            let path = ctx.write_json(
                "verification.json",
                VerifyBody {
                    options: &options,
                    report: &report,
                },
            )?;
            for c in &report.checks {
                say(
                    out,
                    format!(
                        "{:4} {:28} {:10.3e} (tol {:.0e})",
                        if c.passed { "ok" } else { "FAIL" },
                        c.name,
                        c.max_residual,
                        c.tolerance
                    ),
                )?;
            }
            say(out, format!("wrote {}", path.display()))?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::Verification(failed.join(", ")))
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    CliError::Usage(String::new()).exit_code()
                }
            };
        }
    };
    match run_cli(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "charwave: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = config::load(&cli.config)?;
    let cfg = &loaded.config;
    let ctx = Context {
        out_dir: cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("charwave-out")),
        grid: cli.grid.unwrap_or(cfg.grid),
        seed: cli.seed.unwrap_or(cfg.seed),
        force: cli.force,
        provenance: Provenance {
            tool: format!("charwave {VERSION}"),
            command: cli.command.name(),
            config_sha256: loaded.sha256.clone(),
        },
        loaded,
    };
    execute(cli.command, &ctx, stdout)
}
