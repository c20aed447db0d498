//! Command-line front end: `branch`, `critical`, `verify` and `gamma-table`.
//!
//! Configuration comes from an optional TOML file, with flags taking
//! precedence. Exit codes: 0 on success, 1 on computational or check
//! failure, 2 on usage or configuration errors. Errors are reported as a
//! JSON object on stderr.

pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::gelfand;
use crate::operator1d::FracOperator;
use crate::specfun;
use config::{ConfigError, RunConfig, TableFormat};
use output::{csv_preamble, sci, to_json, write_atomic, Sci};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const BRANCH_COLUMNS: &str = "lambda,sup_u,energy,hs_norm_sq,mu1,pohozaev_rel_residual,iterations";

#[derive(Debug, Parser)]
#[command(name = "fracgelfand", version, about = "Fractional Gelfand problem on (-1, 1)")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides FRACGELFAND_OUT_DIR and the config file).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// March along the minimal branch and bracket the extremal parameter.
    Branch(BranchArgs),
    /// Critical orders s* for dimensions, or critical dimensions for orders.
    Critical(CriticalArgs),
    /// Run the oracle suite and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate λ0, the Hardy constant and the verdict over an (n, s) grid.
    GammaTable(GammaTableArgs),
}

#[derive(Debug, Args, Default)]
pub struct ProblemArgs {
    /// Fractional order in (0, 1).
    #[arg(short, long)]
    pub s: Option<f64>,
    /// Number of interior grid points, in [8, 4096].
    #[arg(short = 'N', long = "n-points")]
    pub n_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// exp, power or constant.
    #[arg(long)]
    pub nonlinearity: Option<String>,
    /// Exponent for the power nonlinearity.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub max_points: Option<usize>,
    #[arg(long)]
    pub lambda_step: Option<f64>,
    /// Iteration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub sup_cap: Option<f64>,
    /// Width of the λ* bracket.
    #[arg(long)]
    pub tol_lambda: Option<f64>,
    /// Branch CSV path (default: <out-dir>/branch.csv).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Summary JSON path (default: <out-dir>/branch_summary.json).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Dimensions for critical_s. Giving only one of the two lists drops the other.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    /// Orders for critical_dimension.
    #[arg(long, value_delimiter = ',')]
    pub s_list: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Run only the named check; repeatable.
    #[arg(long)]
    pub only: Vec<String>,
    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scales the normalizing constant of the operator under test.
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub fault_cns_scale: f64,
}

#[derive(Debug, Args)]
pub struct GammaTableArgs {
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub s_list: Option<Vec<f64>>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Compute(Error),
    Io(PathBuf, std::io::Error),
    ChecksFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }

    fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            message: String,
        }
        let payload = match self {
            CliError::Config(e) => Payload {
                error: "config",
                field: Some(&e.field),
                message: e.message.clone(),
            },
            CliError::Compute(e) => Payload {
                error: "computation",
                field: None,
                message: e.to_string(),
            },
            CliError::Io(path, e) => Payload {
                error: "io",
                field: None,
                message: format!("{}: {e}", path.display()),
            },
            CliError::ChecksFailed(n) => Payload {
                error: "checks",
                field: None,
                message: format!("{n} check(s) failed"),
            },
        };
        serde_json::to_string(&payload).expect("error serializes")
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(path) => Ok(RunConfig::from_file(path)?),
        None => Ok(RunConfig::default()),
    }
}

fn apply_problem(cfg: &mut RunConfig, p: &ProblemArgs) {
    if let Some(s) = p.s {
        cfg.s = s;
    }
    if let Some(n) = p.n_points {
        cfg.n_points = n;
    }
}

fn resolve(dir: &Path, explicit: Option<&PathBuf>, configured: Option<&PathBuf>, default: &str) -> PathBuf {
    match explicit.or(configured) {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => dir.join(p),
        None => dir.join(default),
    }
}

fn emit(path: Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(&p, text).map_err(|e| CliError::Io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Branch(args) => {
            apply_problem(&mut cfg, &args.problem);
            if let Some(name) = &args.nonlinearity {
                cfg.nonlinearity.name = name.clone();
            }
            if args.p.is_some() {
                cfg.nonlinearity.p = args.p;
            }
            if let Some(m) = args.max_points {
                cfg.branch.max_points = m;
            }
            if let Some(step) = args.lambda_step {
                cfg.branch.lambda_step = step;
            }
            if let Some(tol) = args.tol {
                cfg.tolerances.iteration = tol;
            }
            if args.sup_cap.is_some() {
                cfg.tolerances.sup_cap = args.sup_cap;
            }
            if let Some(tol) = args.tol_lambda {
                cfg.tolerances.lambda_bracket = tol;
            }
            cfg.validate()?;
            let dir = cfg.output_dir(cli.out_dir.as_deref());
            let csv = resolve(&dir, args.csv.as_ref(), cfg.output.csv.as_ref(), "branch.csv");
            let summary = resolve(
                &dir,
                args.summary.as_ref(),
                cfg.output.summary.as_ref(),
                "branch_summary.json",
            );
            cmd_branch(&cfg, &csv, &summary)
        }
        Command::Critical(args) => {
            if args.n_list.is_some() || args.s_list.is_some() {
                cfg.critical.n_list = args.n_list.clone().unwrap_or_default();
                cfg.critical.s_list = args.s_list.clone().unwrap_or_default();
            }
            if let Some(fmt) = args.format {
                cfg.critical.format = fmt;
            }
            cfg.validate()?;
            let out = output_path(cli, &cfg, args.out.as_ref(), cfg.output.table.as_ref());
            emit(out, &cmd_critical(&cfg)?)
        }
        Command::Verify(args) => {
            apply_problem(&mut cfg, &args.problem);
            if !args.only.is_empty() {
                cfg.verify.only = args.only.clone();
            }
            cfg.validate()?;
            if let Some(bad) = cfg
                .verify
                .only
                .iter()
                .find(|o| !verify::CHECK_NAMES.contains(&o.as_str()))
            {
                return Err(ConfigError::new(
                    "only",
                    format!("unknown check `{bad}`; known: {}", verify::CHECK_NAMES.join(", ")),
                )
                .into());
            }
            if !(args.fault_cns_scale > 0.0 && args.fault_cns_scale.is_finite()) {
                return Err(ConfigError::new("fault_cns_scale", "must be positive").into());
            }
            let report = verify::run_suite(&cfg, &cfg.verify.only, args.fault_cns_scale)?;
            let out = output_path(cli, &cfg, args.out.as_ref(), cfg.output.report.as_ref());
            emit(out, &to_json(&report))?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::ChecksFailed(report.failed))
            }
        }
        Command::GammaTable(args) => {
            if let Some(n) = &args.n_list {
                cfg.gamma_table.n_list = n.clone();
            }
            if let Some(s) = &args.s_list {
                cfg.gamma_table.s_list = s.clone();
            }
            cfg.validate()?;
            let out = output_path(cli, &cfg, args.out.as_ref(), cfg.output.table.as_ref());
            emit(out, &cmd_gamma_table(&cfg)?)
        }
    }
}

/// Explicit paths resolve against the output directory; without one the
/// result goes to stdout.
fn output_path(cli: &Cli, cfg: &RunConfig, flag: Option<&PathBuf>, configured: Option<&PathBuf>) -> Option<PathBuf> {
    let chosen = flag.or(configured)?;
    if chosen.is_absolute() {
        return Some(chosen.clone());
    }
    Some(cfg.output_dir(cli.out_dir.as_deref()).join(chosen))
}

#[derive(Serialize)]
struct Bracket {
    lo: Sci,
    hi: Sci,
}

#[derive(Serialize)]
struct BranchSummary<'a> {
    version: &'static str,
    config_sha256: String,
    s: Sci,
    #[serde(rename = "N")]
    n_points: usize,
    nonlinearity: &'a str,
    points: usize,
    /// Last converged and first diverged `λ` seen while marching.
    branch_bracket: Option<Bracket>,
    /// Bisection bracket of `λ*`.
    lambda_star: Option<Bracket>,
    lambda_star_note: Option<String>,
}

fn cmd_branch(cfg: &RunConfig, csv_path: &Path, summary_path: &Path) -> Result<(), CliError> {
    let f = cfg.nonlinearity()?;
    let op = FracOperator::assemble(cfg.s, cfg.n_points)?;
    let branch = gelfand::compute_branch(&op, &f, &cfg.branch_options(&f))?;
    let (lambda_star, note) =
        match gelfand::estimate_lambda_star(&op, &f, cfg.tolerances.lambda_bracket, &cfg.iteration_options(&f)) {
            Ok((lo, hi)) => (
                Some(Bracket {
                    lo: Sci(lo),
                    hi: Sci(hi),
                }),
                None,
            ),
            Err(Error::BracketNotFound(limit)) => (None, Some(format!("no divergence up to lambda = {}", sci(limit)))),
            Err(e) => return Err(e.into()),
        };
    let hash = cfg.hash();
    let mut csv = csv_preamble(&hash, cfg.s, cfg.n_points);
    csv.push_str(&format!("# nonlinearity: {}\n", f.name()));
    csv.push_str(BRANCH_COLUMNS);
    csv.push('\n');
    for p in &branch.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sci(p.lambda),
            sci(p.sup_u),
            sci(p.energy),
            sci(p.hs_norm_sq),
            sci(p.mu1),
            sci(p.pohozaev_residual),
            p.iterations
        ));
    }
    let summary = BranchSummary {
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hash,
        s: Sci(cfg.s),
        n_points: cfg.n_points,
        nonlinearity: f.name(),
        points: branch.points.len(),
        branch_bracket: branch.lambda_star_bracket.map(|(lo, hi)| Bracket {
            lo: Sci(lo),
            hi: Sci(hi),
        }),
        lambda_star,
        lambda_star_note: note,
    };
    let summary_text = to_json(&summary);
    write_atomic(csv_path, &csv).map_err(|e| CliError::Io(csv_path.to_path_buf(), e))?;
    write_atomic(summary_path, &summary_text).map_err(|e| CliError::Io(summary_path.to_path_buf(), e))?;
    print!("{summary_text}");
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum Cell {
    Number(Sci),
    Integer(u32),
    Text(&'static str),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Number(x) => sci(x.0),
            Cell::Integer(n) => n.to_string(),
            Cell::Text(t) => (*t).to_string(),
        }
    }
}

#[derive(Serialize)]
struct CriticalRow {
    quantity: &'static str,
    input: Cell,
    value: Cell,
}

#[derive(Serialize)]
struct CriticalTable {
    version: &'static str,
    config_sha256: String,
    rows: Vec<CriticalRow>,
}

/// `"none"` when the singular solution is unstable for every order,
/// `"all"` when it is semistable for every order.
fn critical_s_cell(n: u32) -> Result<Cell, Error> {
    if let Some(root) = specfun::critical_s(n) {
        return Ok(Cell::Number(Sci(root)));
    }
    let probe = 0.5 * (0.5 * n as f64).min(1.0);
    Ok(if specfun::semistable_singular(n, probe)?.semistable {
        Cell::Text("all")
    } else {
        Cell::Text("none")
    })
}

fn cmd_critical(cfg: &RunConfig) -> Result<String, CliError> {
    let c = &cfg.critical;
    if c.n_list.is_empty() && c.s_list.is_empty() {
        return Err(ConfigError::new("n_list", "n-list and s-list are both empty").into());
    }
    let mut rows = Vec::new();
    for &n in &c.n_list {
        rows.push(CriticalRow {
            quantity: "critical_s",
            input: Cell::Integer(n),
            value: critical_s_cell(n)?,
        });
    }
    for &s in &c.s_list {
        let value = match specfun::critical_dimension(s) {
            Ok(n) => Cell::Number(Sci(n)),
            Err(Error::NoRootInBracket { .. }) => Cell::Text("none"),
            Err(e) => return Err(e.into()),
        };
        rows.push(CriticalRow {
            quantity: "critical_dimension",
            input: Cell::Number(Sci(s)),
            value,
        });
    }
    let hash = cfg.hash();
    Ok(match c.format {
        TableFormat::Json => to_json(&CriticalTable {
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: hash,
            rows,
        }),
        TableFormat::Csv => {
            let mut out = csv_preamble(&hash, cfg.s, cfg.n_points);
            out.push_str("quantity,input,value\n");
            for r in &rows {
                out.push_str(&format!("{},{},{}\n", r.quantity, r.input.csv(), r.value.csv()));
            }
            out
        }
    })
}

fn cmd_gamma_table(cfg: &RunConfig) -> Result<String, CliError> {
    let g = &cfg.gamma_table;
    if g.n_list.is_empty() || g.s_list.is_empty() {
        return Err(ConfigError::new("gamma_table", "n-list and s-list must be nonempty").into());
    }
    let mut out = csv_preamble(&cfg.hash(), cfg.s, cfg.n_points);
    out.push_str("n,s,lambda0,hardy,semistable,margin\n");
    for &n in &g.n_list {
        for &s in &g.s_list {
            match specfun::semistable_singular(n, s) {
                Ok(r) => out.push_str(&format!(
                    "{n},{},{},{},{},{}\n",
                    sci(s),
                    sci(r.lambda0),
                    sci(r.hardy),
                    r.semistable,
                    sci(r.margin)
                )),
                Err(Error::DimensionTooSmall { .. }) => {
                    out.push_str(&format!("{n},{},undefined,undefined,undefined,undefined\n", sci(s)))
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}
