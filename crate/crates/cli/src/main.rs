use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use collider_lab::bias::bias_ratio;
use collider_lab::monte_carlo::{estimate_both, SimConfig};
use collider_lab::scenario::Assignments;
use collider_lab::sem::{engine_bias, LinearSem};
use collider_lab::sweep::{
    emit_csv, figure_catalog, find_figure, format_number, region_stats, run_sweep, write_figures, Axis, GridSpec,
    Predicate, SweepTable,
};
use collider_lab::{closed_form_bias_with, BinaryFormula, Error, Estimator, Execution, Param, Scenario, Structure};

const THREADS_VAR: &str = "COLLIDER_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "collider-lab",
    version,
    about = "Biases of adjusted and unadjusted estimators under collider structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form biases of both estimators.
    Bias {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also evaluate with the covariance engine.
        #[arg(long, value_enum)]
        engine: Option<Engine>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// |adjusted bias| / |unadjusted bias|.
    Ratio {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Simulated biases with standard errors.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fit without an intercept.
        #[arg(long)]
        no_intercept: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluates a parameter grid and writes one CSV row per point.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Adds a 0/1 `predicate` column.
        #[arg(long)]
        predicate: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fraction of feasible grid points satisfying a predicate.
    Region {
        #[command(flatten)]
        grid: GridArgs,
        /// adjusted_smaller, abs_below(t) or below_min_frac(f); defaults to
        /// the figure's own predicate.
        #[arg(long)]
        predicate: Option<String>,
        /// Also write the grid as CSV.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Writes every figure dataset and `stats.csv` into a directory.
    Figures {
        #[arg(long, short)]
        output: PathBuf,
        /// Grid points per axis.
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
    },
    /// Validates a `.sem` model and prints its implied covariance.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file of `key = value` lines.
    file: Option<PathBuf>,
    /// Inline `key=value` assignment; overrides the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Use the binary M-structure formula with the extra rho factor in the
    /// adjusted denominator.
    #[arg(long = "paper-literal")]
    stray_rho: bool,
}

impl ScenarioArgs {
    fn formula(&self) -> BinaryFormula {
        if self.stray_rho {
            BinaryFormula::StrayRho
        } else {
            BinaryFormula::Corrected
        }
    }

    fn load(&self) -> Result<Scenario> {
        let mut assignments = match &self.file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                Assignments::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Assignments::default(),
        };
        for set in &self.sets {
            let (k, v) = split_assignment(set)?;
            assignments.set(k, v)?;
        }
        let scenario = assignments.build()?;
        let report = scenario.validated()?;
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        Ok(scenario)
    }
}

#[derive(Args)]
struct GridArgs {
    /// A figure dataset id such as fig5b.
    #[arg(long, conflicts_with_all = ["structure", "axes", "binds"])]
    figure: Option<String>,
    /// Points per axis for figure grids.
    #[arg(long, default_value_t = 1000)]
    resolution: usize,
    #[arg(long)]
    structure: Option<String>,
    /// Axis as `name:lo:hi:points`.
    #[arg(long = "axis", value_name = "NAME:LO:HI:POINTS")]
    axes: Vec<String>,
    /// Parameter binding `param=value`, `param=axis` or `param=k*axis`.
    #[arg(long = "bind", value_name = "PARAM=EXPR")]
    binds: Vec<String>,
    #[arg(long = "paper-literal")]
    stray_rho: bool,
}

impl GridArgs {
    /// The grid and, for figures, its own predicate.
    fn build(&self) -> Result<(GridSpec, Option<Predicate>)> {
        let formula = if self.stray_rho {
            BinaryFormula::StrayRho
        } else {
            BinaryFormula::Corrected
        };
        if let Some(id) = &self.figure {
            let fig = find_figure(id, self.resolution).ok_or_else(|| {
                let ids: Vec<&str> = figure_catalog(2).iter().map(|f| f.id).collect();
                Error::Domain(format!("unknown figure `{id}` (known: {})", ids.join(", ")))
            })?;
            return Ok((fig.grid.with_formula(formula), Some(fig.predicate)));
        }
        let structure: Structure = self
            .structure
            .as_deref()
            .ok_or_else(|| Error::Domain("either --figure or --structure is required".into()))?
            .parse()?;
        let axes = self
            .axes
            .iter()
            .map(|a| Axis::parse(a))
            .collect::<Result<Vec<_>, _>>()?;
        let mut grid = GridSpec::new(structure, axes).with_formula(formula);
        for b in &self.binds {
            let (k, v) = split_assignment(b)?;
            let param: Param = k.parse()?;
            grid = grid.bind_text(param, v)?;
        }
        Ok((grid, None))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Sem,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    JsonLines,
}

fn split_assignment(s: &str) -> Result<(&str, &str)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("expected KEY=VALUE, got `{s}`"),
    })?;
    Ok((k.trim(), v.trim()))
}

/// Rows of string fields rendered as aligned text, CSV or JSON lines.
struct Records {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Records {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.header.join(","))?;
                for r in &self.rows {
                    writeln!(out, "{}", r.join(","))?;
                }
            }
            Format::JsonLines => {
                for r in &self.rows {
                    writeln!(out, "{}", json_line(&self.header, r))?;
                }
            }
            Format::Text => {
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|i| {
                        self.rows
                            .iter()
                            .map(|r| r[i].len())
                            .chain([self.header[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |fields: &[String]| {
                    fields
                        .iter()
                        .zip(&widths)
                        .map(|(f, w)| format!("{f:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                writeln!(out, "{}", line(&self.header))?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r))?;
                }
            }
        }
        Ok(())
    }
}

/// One JSON object keyed by `header`; numeric fields become numbers and
/// empty fields become null.
fn json_line(header: &[String], fields: &[String]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = header
        .iter()
        .zip(fields)
        .map(|(k, v)| {
            let value = if v.is_empty() {
                serde_json::Value::Null
            } else {
                v.parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                    .map_or_else(|| serde_json::Value::String(v.clone()), serde_json::Value::Number)
            };
            (k.clone(), value)
        })
        .collect();
    serde_json::Value::Object(map).to_string()
}

fn cmd_bias(args: &ScenarioArgs, engine: Option<Engine>, format: Format) -> Result<()> {
    let scenario = args.load()?;
    let mut rec = Records::new(&["structure", "estimator", "method", "bias"]);
    for est in Estimator::BOTH {
        let mut results = vec![closed_form_bias_with(&scenario, est, args.formula())?];
        if engine.is_some() {
            results.push(engine_bias(&scenario, est)?);
        }
        for r in results {
            rec.push(vec![
                scenario.structure().name().into(),
                est.name().into(),
                r.method.name().into(),
                format_number(r.value),
            ]);
        }
    }
    if let Some(Engine::Sem) = engine {
        let gap = Estimator::BOTH
            .into_iter()
            .map(|e| -> Result<f64> {
                Ok(
                    (closed_form_bias_with(&scenario, e, args.formula())?.value - engine_bias(&scenario, e)?.value)
                        .abs(),
                )
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if format == Format::Text {
            rec.render(format, &mut io::stdout().lock())?;
            println!("max |closed_form - sem_engine| = {}", format_number(gap));
            return Ok(());
        }
    }
    rec.render(format, &mut io::stdout().lock())?;
    Ok(())
}

fn cmd_ratio(args: &ScenarioArgs, format: Format) -> Result<()> {
    let scenario = args.load()?;
    let ratio = bias_ratio(&scenario, args.formula())?;
    let mut rec = Records::new(&["structure", "ratio"]);
    rec.push(vec![scenario.structure().name().into(), format_number(ratio)]);
    if format == Format::Text {
        println!("{}", format_number(ratio));
    } else {
        rec.render(format, &mut io::stdout().lock())?;
    }
    Ok(())
}

fn cmd_simulate(args: &ScenarioArgs, n: usize, seed: u64, no_intercept: bool, format: Format) -> Result<()> {
    let scenario = args.load()?;
    let config = SimConfig {
        include_intercept: !no_intercept,
        ..SimConfig::new(n, seed)
    };
    let mut rec = Records::new(&["estimator", "bias_estimate", "std_error", "n_samples", "seed"]);
    for r in estimate_both(&scenario, &config)? {
        rec.push(vec![
            r.estimator.name().into(),
            format_number(r.bias_estimate),
            format_number(r.std_error),
            r.n_samples.to_string(),
            r.seed.to_string(),
        ]);
    }
    rec.render(format, &mut io::stdout().lock())?;
    Ok(())
}

fn write_table(table: &SweepTable, predicate: Option<Predicate>, output: Option<&Path>, format: Format) -> Result<()> {
    match (format, output) {
        (Format::JsonLines, _) => {
            let header = table.header(predicate);
            let mut text = String::new();
            for i in 0..table.rows.len() {
                text.push_str(&json_line(&header, &table.fields(i, predicate)));
                text.push('\n');
            }
            match output {
                Some(path) => fs::write(path, text).map_err(|e| Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                })?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
        (_, Some(path)) => {
            emit_csv(table, path, predicate)?;
        }
        (_, None) => {
            table.write_csv(io::BufWriter::new(io::stdout().lock()), predicate)?;
        }
    }
    Ok(())
}

fn cmd_sweep(grid: &GridArgs, predicate: Option<&str>, output: Option<&Path>, format: Format) -> Result<()> {
    let (spec, _) = grid.build()?;
    let predicate = predicate.map(Predicate::parse).transpose()?;
    let table = run_sweep(&spec)?;
    write_table(&table, predicate, output, format)
}

fn cmd_region(grid: &GridArgs, predicate: Option<&str>, output: Option<&Path>, format: Format) -> Result<()> {
    let (spec, own) = grid.build()?;
    let predicate = match predicate {
        Some(p) => Predicate::parse(p)?,
        None => own.ok_or_else(|| Error::Domain("--predicate is required for custom grids".into()))?,
    };
    let table = run_sweep(&spec)?;
    let stats = region_stats(&table, predicate)?;
    if let Some(path) = output {
        emit_csv(&table, path, Some(predicate))?;
    }
    let mut rec = Records::new(&["predicate", "fraction", "label", "satisfied", "feasible", "total"]);
    rec.push(vec![
        predicate.name(),
        format_number(stats.fraction()),
        stats.label(),
        stats.satisfied.to_string(),
        stats.feasible.to_string(),
        stats.total.to_string(),
    ]);
    rec.render(format, &mut io::stdout().lock())?;
    Ok(())
}

fn cmd_figures(output: &Path, resolution: usize) -> Result<()> {
    let (files, stats) = write_figures(output, resolution, Execution::Parallel)?;
    for s in &stats {
        println!("{:<6} {:<24} {}", s.id, s.predicate.name(), s.stats.label());
    }
    println!("wrote {} files to {}", files.len(), output.display());
    Ok(())
}

fn cmd_parse(path: &Path, format: Format) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let sem = LinearSem::parse(&text).with_context(|| format!("in {}", path.display()))?;
    let cov = sem.implied_covariance()?;
    let mut header = vec![""];
    header.extend(cov.names().iter().map(String::as_str));
    let mut rec = Records::new(&header);
    for (i, name) in cov.names().iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend((0..cov.dim()).map(|j| format_number(cov.at(i, j))));
        rec.push(row);
    }
    if format == Format::JsonLines {
        rec.header[0] = "variable".into();
    }
    rec.render(format, &mut io::stdout().lock())?;
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("{THREADS_VAR} must be a non-negative integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| anyhow::anyhow!("cannot size the thread pool: {e}"))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Bias {
            scenario,
            engine,
            format,
        } => cmd_bias(scenario, *engine, *format),
        Command::Ratio { scenario, format } => cmd_ratio(scenario, *format),
        Command::Simulate {
            scenario,
            n,
            seed,
            no_intercept,
            format,
        } => cmd_simulate(scenario, *n, *seed, *no_intercept, *format),
        Command::Sweep {
            grid,
            predicate,
            output,
            format,
        } => cmd_sweep(grid, predicate.as_deref(), output.as_deref(), *format),
        Command::Region {
            grid,
            predicate,
            output,
            format,
        } => cmd_region(grid, predicate.as_deref(), output.as_deref(), *format),
        Command::Figures { output, resolution } => {
            if *resolution < 2 {
                bail!(Error::Domain("--resolution must be at least 2".into()));
            }
            cmd_figures(output, *resolution)
        }
        Command::Parse { file, format } => cmd_parse(file, *format),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) {
        return match e {
            Error::UndefinedEstimator(_) | Error::UndefinedRatio(_) | Error::EmptyRegion | Error::Simulation(_) => 3,
            Error::Io { .. } => 4,
            _ => 2,
        };
    }
    if err.chain().any(|c| c.downcast_ref::<io::Error>().is_some()) {
        return 4;
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
