//! Command-line front end (`qcrb`).
//!
//! Exit codes: 0 success, 1 usage error, 2 bound violations found,
//! 3 solver non-convergence (more than 5% of rows quarantined, or the single
//! `compute` solve failed to converge).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, fmt_sig17, BoundsReport, CostRanks, SweepConfig, VerifyConfig};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::model::{self, CostMatrix, QuantumStatisticalModel};
use crate::sdp::SolverOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qcrb", version, about = "Helstrom, Holevo and RLD Cramér-Rao bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute C_S, C_H and C_R for one model.
    Compute(ComputeArgs),
    /// Evaluate bounds over a seeded random ensemble.
    Sweep(SweepArgs),
    /// Run the built-in check suite; exit 0 iff nothing is violated.
    Verify(VerifyArgs),
    /// Write a builtin or random model as JSON.
    ExportModel(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub eps_abs: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps_rel: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub penalty: f64,
    /// Keep the ADMM penalty fixed.
    #[arg(long)]
    pub no_adaptive: bool,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iter: self.max_iter,
            penalty: self.penalty,
            adaptive: !self.no_adaptive,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Model JSON file.
    #[arg(long, conflicts_with_all = ["builtin", "random"])]
    pub model: Option<PathBuf>,
    /// Builtin model name (maximally_mixed_qubit, qubit_xy, diag_classical).
    #[arg(long, conflicts_with = "random")]
    pub builtin: Option<String>,
    /// Builtin parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<f64>,
    /// Random model `d,n` drawn with --seed.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub random: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// `identity`, `rank:k:seed`, `scalar:v1,v2,...` or a JSON matrix file.
    #[arg(long)]
    pub cost: Option<String>,
    #[arg(long, env = "QCRB_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, env = "QCRB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// `full` or a comma-separated list of ranks.
    #[arg(long, default_value = "full")]
    pub cost_ranks: String,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, env = "QCRB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Rows of the full-rank sweep.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: ModelSource,
    #[arg(long, env = "QCRB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Optional cost to embed, same syntax as `compute --cost`.
    #[arg(long)]
    pub cost: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(stderr, "ERROR:usage:{}", first.trim_start_matches("error: "));
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "ERROR:{}:{}", e.category(), e);
            EXIT_USAGE
        }
    }
}

fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Compute(a) => compute(a, stdout),
        Command::Sweep(a) => sweep(a, stdout),
        Command::Verify(a) => verify(a, stdout),
        Command::ExportModel(a) => export(a, stdout),
    }
}

fn emit(text: &str, output: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_source(src: &ModelSource, seed: u64) -> Result<(QuantumStatisticalModel, Option<CostMatrix>)> {
    match (&src.model, &src.builtin, &src.random) {
        (Some(path), None, None) => {
            let text = std::fs::read_to_string(path)?;
            let file: model::ModelFile =
                serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
            let has_cost = file.cost.is_some();
            let (m, cost) = file.into_model()?;
            Ok((m, has_cost.then_some(cost)))
        }
        (None, Some(name), None) => Ok((model::builtin_model(name, &src.params)?, None)),
        (None, None, Some(dn)) => {
            if dn.len() != 2 {
                return Err(Error::InvalidArgument("--random expects d,n".into()));
            }
            Ok((model::random_model(dn[0], dn[1], seed, 1e-3)?, None))
        }
        _ => Err(Error::InvalidArgument(
            "exactly one of --model, --builtin, --random is required".into(),
        )),
    }
}

/// Parses a cost specification for an `n`-parameter model.
pub fn parse_cost(spec: &str, n: usize) -> Result<CostMatrix> {
    if spec == "identity" {
        return Ok(CostMatrix::identity(n));
    }
    if let Some(rest) = spec.strip_prefix("rank:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidArgument(format!("bad cost `{spec}`, expected rank:k:seed")));
        }
        let k = parts[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad rank in `{spec}`")))?;
        let seed = parts[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad seed in `{spec}`")))?;
        return model::random_cost(n, k, seed);
    }
    if let Some(rest) = spec.strip_prefix("scalar:") {
        let dbeta = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad scalar cost `{spec}`")))?;
        if dbeta.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "scalar cost has {} entries for {n} parameters",
                dbeta.len()
            )));
        }
        return model::scalar_cost(&dbeta);
    }
    let text = std::fs::read_to_string(spec)?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("cost file must hold a {n}x{n} matrix")));
    }
    CostMatrix::new(RMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Plain-text rendering of one report.
pub fn render_report_text(r: &BoundsReport) -> String {
    let ok = |b: bool| if b { "OK" } else { "VIOLATED" };
    let c_r = r.c_r.map(|v| format!("{v:.10}")).unwrap_or_else(|| "n/a".into());
    let lower = r.c_r.map_or(r.c_s, |v| v.max(r.c_s));
    let mut out = String::new();
    out.push_str(&format!("model: {} (d={}, n={}, cost rank {})\n", r.model_label, r.d, r.n, r.prop_rank));
    out.push_str(&format!("C_S = {:.10}\n", r.c_s));
    out.push_str(&format!("C_H = {:.10}\n", r.c_h));
    out.push_str(&format!("C_R = {c_r}\n"));
    out.push_str(&format!("ratio C_H/C_S = {:.10}\n", r.ratio));
    out.push_str(&format!(
        "max{{C_S, C_R}} <= C_H <= 3*C_S: {:.10} <= {:.10} <= {:.10}\n",
        lower,
        r.c_h,
        3.0 * r.c_s
    ));
    out.push_str(&format!("theorem1 {}\n", ok(r.theorem1_ok)));
    out.push_str(&format!("sandwich {}\n", ok(r.sandwich_ok)));
    let prop = match r.prop_rank {
        1 => "rank-one C_H = C_S",
        2 => "rank-two C_H <= 2*C_S",
        _ => "no rank refinement",
    };
    out.push_str(&format!("rank check ({prop}) {}\n", ok(r.prop_ok)));
    out.push_str(&format!("C_H <= objective at X^S ({:.10}) {}\n", r.objective_at_helstrom, ok(r.intermediate_ok)));
    out.push_str(&format!(
        "solver: {} after {} iterations, certificate gap {:e}, feasibility residual {:e}\n",
        r.solver_status, r.solver_iterations, r.certificate_gap, r.feasibility_residual
    ));
    out
}

fn compute(a: &ComputeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (m, file_cost) = load_source(&a.source, a.seed)?;
    let g = match (&a.cost, file_cost) {
        (Some(spec), _) => parse_cost(spec, m.n_params)?,
        (None, Some(c)) => c,
        (None, None) => CostMatrix::identity(m.n_params),
    };
    let report = analysis::bounds_report(&m, &g, &a.solver.options(), None)?;
    let text = match a.format {
        Format::Text => render_report_text(&report),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        Format::Csv => format!("{}\n{}\n", BoundsReport::csv_header(), report.csv_row()),
    };
    emit(&text, &a.output, stdout)?;
    Ok(if !report.converged() {
        EXIT_NON_CONVERGENCE
    } else if !report.all_ok() {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    })
}

fn parse_ranks(spec: &str) -> Result<CostRanks> {
    if spec == "full" {
        return Ok(CostRanks::Full);
    }
    spec.split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(CostRanks::Ranks)
        .map_err(|_| Error::InvalidArgument(format!("bad --cost-ranks `{spec}`")))
}

fn sweep_text(s: &analysis::SweepSummary) -> String {
    let mut out = String::new();
    for r in &s.rows {
        out.push_str(&format!(
            "{} rank={} C_S={} C_H={} ratio={} {}{}\n",
            r.model_label,
            r.prop_rank,
            fmt_sig17(r.c_s),
            fmt_sig17(r.c_h),
            fmt_sig17(r.ratio),
            r.solver_status,
            if r.all_ok() { "" } else { " VIOLATION" }
        ));
    }
    out.push_str(&format!(
        "rows={} non_converged={} violations={} max_ratio={} above_2={}\n",
        s.rows.len(),
        s.non_converged,
        s.violations,
        fmt_sig17(s.max_ratio),
        s.above_two
    ));
    out
}

fn sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = SweepConfig::new(a.dims.clone(), a.ns.clone(), a.count, a.seed, parse_ranks(&a.cost_ranks)?);
    cfg.opts = a.solver.options();
    cfg.jobs = a.jobs;
    let summary = analysis::sweep(&cfg)?;
    let text = match a.format {
        Format::Csv => summary.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&summary)?;
            s.push('\n');
            s
        }
        Format::Text => sweep_text(&summary),
    };
    emit(&text, &a.output, stdout)?;
    Ok(if summary.quarantined_fraction() > analysis::QUARANTINE_LIMIT {
        EXIT_NON_CONVERGENCE
    } else if summary.violations > 0 {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    })
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = VerifyConfig::new(a.seed, a.count);
    cfg.opts = a.solver.options();
    cfg.jobs = a.jobs;
    let report = analysis::verify(&cfg)?;
    let text = match a.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        Format::Csv => report.theorem1.to_csv(),
        Format::Text => report.render_text(),
    };
    emit(&text, &a.output, stdout)?;
    Ok(if report.excessive_non_convergence() {
        EXIT_NON_CONVERGENCE
    } else if report.violations() > 0 {
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    })
}

fn export(a: &ExportArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (m, file_cost) = load_source(&a.source, a.seed)?;
    let cost = match &a.cost {
        Some(spec) => Some(parse_cost(spec, m.n_params)?),
        None => file_cost,
    };
    let mut text = model::model_to_json(&m, cost.as_ref());
    text.push('\n');
    emit(&text, &a.output, stdout)?;
    Ok(EXIT_OK)
}
