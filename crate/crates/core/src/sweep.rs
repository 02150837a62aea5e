//! Parameter grids over the closed forms.
//!
//! A [`GridSpec`] ties every parameter of a structure either to a fixed value
//! or to a multiple of one of the grid axes. [`run_sweep`] evaluates both
//! estimators at every grid point in row-major order (the first axis varies
//! slowest). Cells that break a feasibility rule keep their coordinates but
//! carry no bias values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bias::{closed_form_bias_with, BinaryFormula, Estimator};
use crate::error::{ensure_finite, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::scenario::{symmetric_butterfly_domain, Param, Scenario, Structure};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, points: usize) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
            points,
        }
    }

    /// Symmetric axis `[-half, half]`.
    pub fn symmetric(name: impl Into<String>, half: f64, points: usize) -> Self {
        Self::new(name, -half, half, points)
    }

    /// Coordinate of point `i`, rounded to the 12 significant digits used in
    /// CSV output so that emitted coordinates reproduce the evaluated point.
    pub fn value(&self, i: usize) -> f64 {
        // measured from the nearer end, so symmetric axes are exactly symmetric
        let last = self.points - 1;
        let span = self.hi - self.lo;
        let v = if 2 * i <= last {
            self.lo + span * i as f64 / last as f64
        } else {
            self.hi - span * (last - i) as f64 / last as f64
        };
        format_number(v).parse().unwrap_or(v)
    }

    /// Parses `name:lo:hi:points`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [name, lo, hi, points] = parts[..] else {
            return Err(Error::parse(
                0,
                format!("axis `{text}` is not of the form name:lo:hi:points"),
            ));
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(0, format!("axis `{text}`: `{s}` is not a number")))
        };
        let points = points
            .parse::<usize>()
            .map_err(|_| Error::parse(0, format!("axis `{text}`: `{points}` is not a point count")))?;
        Ok(Self::new(name, num(lo)?, num(hi)?, points))
    }
}

/// How one parameter is set at each grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binding {
    /// `scale × axis value`.
    Axis {
        index: usize,
        scale: f64,
    },
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub structure: Structure,
    pub axes: Vec<Axis>,
    pub bindings: BTreeMap<Param, Binding>,
    pub formula: BinaryFormula,
}

impl GridSpec {
    pub fn new(structure: Structure, axes: Vec<Axis>) -> Self {
        Self {
            structure,
            axes,
            bindings: BTreeMap::new(),
            formula: BinaryFormula::Corrected,
        }
    }

    /// Ties each of `params` to `scale × axis`.
    pub fn tie(mut self, axis: usize, scale: f64, params: &[Param]) -> Self {
        for &p in params {
            self.bindings.insert(p, Binding::Axis { index: axis, scale });
        }
        self
    }

    pub fn fix(mut self, param: Param, value: f64) -> Self {
        self.bindings.insert(param, Binding::Fixed(value));
        self
    }

    pub fn with_formula(mut self, formula: BinaryFormula) -> Self {
        self.formula = formula;
        self
    }

    /// Binds a parameter from text: a number, an axis name, or
    /// `number*axis`.
    pub fn bind_text(mut self, param: Param, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Ok(v) = text.parse::<f64>() {
            return Ok(self.fix(param, v));
        }
        let (scale, axis) = match text.split_once('*') {
            Some((s, a)) => {
                let s = s.trim();
                let scale = s
                    .parse::<f64>()
                    .map_err(|_| Error::parse(0, format!("`{text}`: `{s}` is not a number")))?;
                (scale, a.trim())
            }
            None => (1.0, text),
        };
        let index = self
            .axes
            .iter()
            .position(|a| a.name == axis)
            .ok_or_else(|| Error::parse(0, format!("`{text}` refers to no axis named `{axis}`")))?;
        self.bindings.insert(param, Binding::Axis { index, scale });
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        for axis in &self.axes {
            if axis.points < 2 {
                return Err(Error::Domain(format!(
                    "axis `{}` needs at least 2 points, got {}",
                    axis.name, axis.points
                )));
            }
            ensure_finite("axis bound", axis.lo)?;
            ensure_finite("axis bound", axis.hi)?;
            if axis.lo > axis.hi {
                return Err(Error::Domain(format!("axis `{}` has lo > hi", axis.name)));
            }
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Domain(format!("duplicate axis `{}`", a.name)));
            }
        }
        let wanted = self.structure.params();
        let missing: Vec<String> = wanted
            .iter()
            .filter(|p| !self.bindings.contains_key(p))
            .map(|p| p.name().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys {
                structure: self.structure.name().to_string(),
                keys: missing,
            });
        }
        for (p, b) in &self.bindings {
            if !wanted.contains(p) {
                return Err(Error::Domain(format!(
                    "`{}` is not a parameter of {}",
                    p.name(),
                    self.structure.name()
                )));
            }
            match *b {
                Binding::Axis { index, scale } => {
                    if index >= self.axes.len() {
                        return Err(Error::Domain(format!("`{}` is bound to a missing axis", p.name())));
                    }
                    ensure_finite("axis scale", scale)?;
                }
                Binding::Fixed(v) => ensure_finite(p.name(), v)?,
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of row `row`.
    pub fn point(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        let mut rest = row;
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = axis.value(rest % axis.points);
            rest /= axis.points;
        }
        out
    }

    /// Scenario at row `row`.
    pub fn scenario_at(&self, row: usize) -> Result<Scenario> {
        let point = self.point(row);
        let values: BTreeMap<Param, f64> = self
            .bindings
            .iter()
            .map(|(&p, b)| {
                let v = match *b {
                    Binding::Axis { index, scale } => scale * point[index],
                    Binding::Fixed(v) => v,
                };
                (p, v)
            })
            .collect();
        Scenario::from_params(self.structure, &values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub feasible: bool,
    pub warning: bool,
    /// First violated constraint of an infeasible cell.
    pub violation: Option<&'static str>,
    pub bias_unadj: Option<f64>,
    pub bias_adj: Option<f64>,
    pub ratio: Option<f64>,
}

impl SweepRow {
    fn infeasible(reason: &'static str, warning: bool) -> Self {
        Self {
            feasible: false,
            warning,
            violation: Some(reason),
            bias_unadj: None,
            bias_adj: None,
            ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub grid: GridSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn feasible_count(&self) -> usize {
        self.rows.iter().filter(|r| r.feasible).count()
    }
}

fn evaluate(grid: &GridSpec, row: usize) -> SweepRow {
    let scenario = match grid.scenario_at(row) {
        Ok(s) => s,
        Err(_) => return SweepRow::infeasible("parameter out of range", false),
    };
    let report = match scenario.validate() {
        Ok(r) => r,
        Err(_) => return SweepRow::infeasible("parameter out of range", false),
    };
    let warning = report.has_warnings();
    if let Some(v) = report.violations.first() {
        return SweepRow::infeasible(v.constraint, warning);
    }
    let unadj = closed_form_bias_with(&scenario, Estimator::Unadjusted, grid.formula);
    let adj = closed_form_bias_with(&scenario, Estimator::Adjusted, grid.formula);
    match (unadj, adj) {
        (Ok(u), Ok(a)) => SweepRow {
            feasible: true,
            warning,
            violation: None,
            bias_unadj: Some(u.value),
            bias_adj: Some(a.value),
            ratio: (u.value != 0.0).then(|| a.value.abs() / u.value.abs()),
        },
        _ => SweepRow::infeasible("estimator undefined", warning),
    }
}

/// Evaluates the closed forms on every grid point.
pub fn run_sweep(grid: &GridSpec) -> Result<SweepTable> {
    run_sweep_with(grid, Execution::Parallel)
}

pub fn run_sweep_with(grid: &GridSpec, exec: Execution) -> Result<SweepTable> {
    grid.check()?;
    let rows = map_indexed(grid.len(), exec, |i| evaluate(grid, i));
    Ok(SweepTable {
        grid: grid.clone(),
        rows,
    })
}

/// Shading rule evaluated on feasible cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    /// `|Bias_adj| < |Bias_unadj|`; ties do not count.
    AdjustedSmaller,
    /// `|Bias_adj| < threshold`.
    AbsBelow(f64),
    /// `|Bias_adj| < frac × min(|a|, |b|, |c|, |d|)`.
    BelowMinFrac(f64),
}

impl Predicate {
    pub fn name(&self) -> String {
        match self {
            Predicate::AdjustedSmaller => "adjusted_smaller".into(),
            Predicate::AbsBelow(t) => format!("abs_below({})", format_number(*t)),
            Predicate::BelowMinFrac(f) => format!("below_min_frac({})", format_number(*f)),
        }
    }

    /// Parses `adjusted_smaller`, `abs_below(t)` or `below_min_frac(f)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "adjusted_smaller" {
            return Ok(Predicate::AdjustedSmaller);
        }
        let arg = |prefix: &str| -> Option<Result<f64>> {
            let inner = text.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(parse_fraction(inner.trim()))
        };
        if let Some(v) = arg("abs_below") {
            return Ok(Predicate::AbsBelow(v?));
        }
        if let Some(v) = arg("below_min_frac") {
            return Ok(Predicate::BelowMinFrac(v?));
        }
        Err(Error::parse(0, format!("unknown predicate `{text}`")))
    }

    /// `None` for infeasible rows.
    pub fn holds(&self, table: &SweepTable, row: usize) -> Option<bool> {
        let r = &table.rows[row];
        let adj = r.bias_adj?.abs();
        let unadj = r.bias_unadj?.abs();
        Some(match *self {
            Predicate::AdjustedSmaller => adj < unadj,
            Predicate::AbsBelow(t) => adj < t,
            Predicate::BelowMinFrac(f) => {
                let s = table.grid.scenario_at(row).ok()?;
                let min = [Param::A, Param::B, Param::C, Param::D]
                    .iter()
                    .filter_map(|&p| s.get(p))
                    .map(f64::abs)
                    .fold(f64::INFINITY, f64::min);
                adj < f * min
            }
        })
    }
}

fn parse_fraction(s: &str) -> Result<f64> {
    let bad = || Error::parse(0, format!("`{s}` is not a number"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            Ok(n / d)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub satisfied: usize,
    pub feasible: usize,
    pub total: usize,
}

impl RegionStats {
    pub fn fraction(&self) -> f64 {
        self.satisfied as f64 / self.feasible as f64
    }

    /// Percentage with one decimal, e.g. `71.5%`.
    pub fn label(&self) -> String {
        format!("{:.1}%", 100.0 * self.fraction())
    }
}

/// Counts of feasible cells and of those satisfying `predicate`.
pub fn region_stats(table: &SweepTable, predicate: Predicate) -> Result<RegionStats> {
    let mut stats = RegionStats {
        satisfied: 0,
        feasible: 0,
        total: table.rows.len(),
    };
    for i in 0..table.rows.len() {
        if let Some(ok) = predicate.holds(table, i) {
            stats.feasible += 1;
            stats.satisfied += usize::from(ok);
        }
    }
    if stats.feasible == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(stats)
}

/// Fraction of feasible cells where `predicate` holds.
pub fn region_fraction(grid: &GridSpec, predicate: Predicate) -> Result<f64> {
    Ok(region_stats(&run_sweep(grid)?, predicate)?.fraction())
}

/// `%g`-style rendering with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

impl SweepTable {
    /// Column names: the axes, then `feasible, warning, bias_unadj,
    /// bias_adj, ratio` and, with a predicate, `predicate`.
    pub fn header(&self, predicate: Option<Predicate>) -> Vec<String> {
        let mut h: Vec<String> = self.grid.axes.iter().map(|a| a.name.clone()).collect();
        h.extend(
            ["feasible", "warning", "bias_unadj", "bias_adj", "ratio"]
                .iter()
                .map(|s| s.to_string()),
        );
        if predicate.is_some() {
            h.push("predicate".into());
        }
        h
    }

    /// Formatted fields of row `i`, matching [`SweepTable::header`]. Empty
    /// strings stand for missing values.
    pub fn fields(&self, i: usize, predicate: Option<Predicate>) -> Vec<String> {
        let r = &self.rows[i];
        let mut f: Vec<String> = self.grid.point(i).into_iter().map(format_number).collect();
        f.push(u8::from(r.feasible).to_string());
        f.push(u8::from(r.warning).to_string());
        f.push(opt(r.bias_unadj));
        f.push(opt(r.bias_adj));
        f.push(opt(r.ratio));
        if let Some(p) = predicate {
            f.push(p.holds(self, i).map(|b| u8::from(b).to_string()).unwrap_or_default());
        }
        f
    }

    /// Writes the table as CSV and returns the number of bytes written.
    pub fn write_csv<W: Write>(&self, mut out: W, predicate: Option<Predicate>) -> std::io::Result<usize> {
        let mut buf = String::new();
        let mut written = 0;
        buf.push_str(&self.header(predicate).join(","));
        buf.push('\n');
        for i in 0..self.rows.len() {
            buf.push_str(&self.fields(i, predicate).join(","));
            buf.push('\n');
            if buf.len() > 1 << 16 {
                out.write_all(buf.as_bytes())?;
                written += buf.len();
                buf.clear();
            }
        }
        out.write_all(buf.as_bytes())?;
        out.flush()?;
        Ok(written + buf.len())
    }
}

/// Writes `table` to `path` as CSV and returns the byte count.
pub fn emit_csv(table: &SweepTable, path: &Path, predicate: Option<Predicate>) -> Result<usize> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    table
        .write_csv(std::io::BufWriter::new(file), predicate)
        .map_err(|e| Error::io(path, e))
}

/// A reproducible figure dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub id: &'static str,
    pub description: &'static str,
    pub grid: GridSpec,
    pub predicate: Predicate,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// All figure datasets with `points` grid points per axis.
pub fn figure_catalog(points: usize) -> Vec<Figure> {
    use Param::*;
    let two_over_sqrt5 = 2.0 / 5f64.sqrt();
    let (blo, bhi) = symmetric_butterfly_domain();
    let m_line = |rho: f64| {
        GridSpec::new(Structure::M, vec![Axis::symmetric("a", SQRT_HALF, points)])
            .tie(0, 1.0, &[A, B, C, D])
            .fix(Rho, rho)
    };
    let binary_m_line = |rho: f64| {
        GridSpec::new(Structure::BinaryM, vec![Axis::symmetric("a", SQRT_HALF, points)])
            .tie(0, 1.0, &[A, B, C, D])
            .fix(Rho, rho)
            .fix(Alpha, 0.0)
    };
    let butterfly_plane = |structure: Structure| {
        let g = GridSpec::new(
            structure,
            vec![
                Axis::symmetric("a", SQRT_HALF, points),
                Axis::symmetric("e", 1.0, points),
            ],
        )
        .tie(0, 1.0, &[A, B, C, D])
        .tie(1, 1.0, &[E, F]);
        if structure.is_binary() {
            g.fix(Alpha, 0.0)
        } else {
            g
        }
    };
    let butterfly_line = |structure: Structure| {
        let g = GridSpec::new(structure, vec![Axis::new("a", blo, bhi, points)]).tie(0, 1.0, &[A, B, C, D, E, F]);
        if structure.is_binary() {
            g.fix(Alpha, 0.0)
        } else {
            g
        }
    };
    let abs_below = Predicate::AbsBelow(0.01);
    vec![
        Figure {
            id: "fig2a",
            description: "M-structure, a=b=c=d, rho=0",
            grid: m_line(0.0),
            predicate: abs_below,
        },
        Figure {
            id: "fig2b",
            description: "M-structure, a=b=2c=2d, rho=0",
            grid: GridSpec::new(Structure::M, vec![Axis::symmetric("a", two_over_sqrt5, points)])
                .tie(0, 1.0, &[A, B])
                .tie(0, 0.5, &[C, D])
                .fix(Rho, 0.0),
            predicate: abs_below,
        },
        Figure {
            id: "fig2c",
            description: "M-structure, 2a=2b=c=d, rho=0",
            grid: GridSpec::new(Structure::M, vec![Axis::symmetric("c", two_over_sqrt5, points)])
                .tie(0, 0.5, &[A, B])
                .tie(0, 1.0, &[C, D])
                .fix(Rho, 0.0),
            predicate: abs_below,
        },
        Figure {
            id: "fig3a",
            description: "M-structure, a=b, c=d, rho=0",
            grid: GridSpec::new(
                Structure::M,
                vec![Axis::symmetric("a", 1.0, points), Axis::symmetric("c", 1.0, points)],
            )
            .tie(0, 1.0, &[A, B])
            .tie(1, 1.0, &[C, D])
            .fix(Rho, 0.0),
            predicate: Predicate::BelowMinFrac(0.05),
        },
        Figure {
            id: "fig3b",
            description: "M-structure, a=b=c=d against rho",
            grid: GridSpec::new(
                Structure::M,
                vec![
                    Axis::symmetric("rho", 1.0, points),
                    Axis::symmetric("a", SQRT_HALF, points),
                ],
            )
            .tie(1, 1.0, &[A, B, C, D])
            .tie(0, 1.0, &[Rho]),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig4a",
            description: "M-structure, a=b=c=d, rho=0.1",
            grid: m_line(0.1),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig4b",
            description: "M-structure, a=b=c=d, rho=0.2",
            grid: m_line(0.2),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig4c",
            description: "M-structure, a=b=c=d, rho=0.4",
            grid: m_line(0.4),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig5a",
            description: "butterfly, a=b=c=d=e=f",
            grid: butterfly_line(Structure::Butterfly),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig5b",
            description: "butterfly, a=b=c=d and e=f",
            grid: butterfly_plane(Structure::Butterfly),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig6a",
            description: "binary M-structure, a=b=c=d, rho=0.1, alpha=0",
            grid: binary_m_line(0.1),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig6b",
            description: "binary M-structure, a=b=c=d, rho=0.2, alpha=0",
            grid: binary_m_line(0.2),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig6c",
            description: "binary M-structure, a=b=c=d, rho=0.4, alpha=0",
            grid: binary_m_line(0.4),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig7b",
            description: "M-structure with W->T, a=b=c=d=g, rho=0",
            grid: GridSpec::new(Structure::WtoT, vec![Axis::symmetric("a", SQRT_HALF, points)])
                .tie(0, 1.0, &[A, B, C, D, G])
                .fix(Rho, 0.0),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig8a",
            description: "binary butterfly, a=b=c=d=e=f, alpha=0",
            grid: butterfly_line(Structure::BinaryButterfly),
            predicate: Predicate::AdjustedSmaller,
        },
        Figure {
            id: "fig8b",
            description: "binary butterfly, a=b=c=d and e=f, alpha=0",
            grid: butterfly_plane(Structure::BinaryButterfly),
            predicate: Predicate::AdjustedSmaller,
        },
    ]
}

pub fn find_figure(id: &str, points: usize) -> Option<Figure> {
    figure_catalog(points).into_iter().find(|f| f.id == id)
}

/// Summary line of one figure dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureStats {
    pub id: &'static str,
    pub predicate: Predicate,
    pub stats: RegionStats,
}

/// Writes every figure dataset plus `stats.csv` into `dir`. Returns the
/// files written and the per-figure stats.
pub fn write_figures(dir: &Path, points: usize, exec: Execution) -> Result<(Vec<PathBuf>, Vec<FigureStats>)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut all = Vec::new();
    for fig in figure_catalog(points) {
        let table = run_sweep_with(&fig.grid, exec)?;
        let path = dir.join(format!("{}.csv", fig.id));
        emit_csv(&table, &path, Some(fig.predicate))?;
        files.push(path);
        all.push(FigureStats {
            id: fig.id,
            predicate: fig.predicate,
            stats: region_stats(&table, fig.predicate)?,
        });
    }
    let path = dir.join("stats.csv");
    fs::write(&path, stats_csv(&all)).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok((files, all))
}

/// `figure,predicate,fraction,label,satisfied,feasible,total` rows.
pub fn stats_csv(stats: &[FigureStats]) -> String {
    let mut s = String::from("figure,predicate,fraction,label,satisfied,feasible,total\n");
    for f in stats {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            f.id,
            f.predicate.name(),
            format_number(f.stats.fraction()),
            f.stats.label(),
            f.stats.satisfied,
            f.stats.feasible,
            f.stats.total
        );
    }
    s
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::bias::closed_form_bias;
    use crate::scenario::MScenario;
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0016), "-0.0016");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.056), "0.056");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0 * 1e-7), "6.66666666667e-08");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1.5e13), "1.5e+13");
        assert_eq!(format_number(-0.707106781187), "-0.707106781187");
    }

    proptest! {
        #[test]
        fn number_format_round_trips(x in -1e6f64..1e6, k in -12i32..3) {
            let v = x * 10f64.powi(k);
            let s = format_number(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(format_number(back), s);
            if v != 0.0 {
                prop_assert!(((back - v) / v).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::new("a", -0.5, 0.5, 11);
        assert_eq!(a.value(0), -0.5);
        assert_eq!(a.value(10), 0.5);
        assert!((a.value(5)).abs() < 1e-16);
        assert_eq!(Axis::parse("e:-1:1:5").unwrap(), Axis::new("e", -1.0, 1.0, 5));
        assert!(Axis::parse("e:-1:1").is_err());
    }

    #[test]
    fn row_major_order() {
        let g = GridSpec::new(
            Structure::Butterfly,
            vec![Axis::new("a", 0.0, 0.2, 2), Axis::new("e", 0.0, 0.3, 3)],
        );
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, 0.15]);
        assert_eq!(g.point(3), vec![0.2, 0.0]);
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn single_point_grid_matches_direct_call() {
        let g = GridSpec::new(Structure::M, vec![])
            .fix(Param::A, 0.2)
            .fix(Param::B, 0.2)
            .fix(Param::C, 0.2)
            .fix(Param::D, 0.2)
            .fix(Param::Rho, 0.0);
        let t = run_sweep(&g).unwrap();
        assert_eq!(t.rows.len(), 1);
        let adj = t.rows[0].bias_adj.unwrap();
        assert_eq!((adj * 1e4).round() / 1e4, -0.0016);
        assert_eq!(t.rows[0].ratio, None);
    }

    #[test]
    fn symmetric_in_a_when_rho_zero() {
        let g = GridSpec::new(Structure::M, vec![Axis::symmetric("a", 0.7071, 101)])
            .tie(0, 1.0, &[Param::A, Param::B, Param::C, Param::D])
            .fix(Param::Rho, 0.0);
        let t = run_sweep(&g).unwrap();
        for i in 0..101 {
            assert_eq!(t.rows[i].bias_adj, t.rows[100 - i].bias_adj);
            assert_eq!(t.rows[i].bias_unadj, Some(0.0));
        }
    }

    #[test]
    fn infeasible_rows_have_no_values() {
        let g = GridSpec::new(Structure::M, vec![Axis::symmetric("a", 1.0, 21)])
            .tie(0, 1.0, &[Param::A, Param::B, Param::C, Param::D])
            .fix(Param::Rho, 0.0);
        let t = run_sweep(&g).unwrap();
        let bad = &t.rows[0];
        assert!(!bad.feasible);
        assert_eq!(bad.violation, Some("b^2 + c^2 <= 1"));
        assert_eq!((bad.bias_adj, bad.bias_unadj, bad.ratio), (None, None, None));
        assert!(t.rows[10].feasible);
    }

    #[test]
    fn sweep_values_equal_direct_calls() {
        let fig = find_figure("fig4b", 41).unwrap();
        let t = run_sweep(&fig.grid).unwrap();
        for (i, row) in t.rows.iter().enumerate() {
            if let Some(adj) = row.bias_adj {
                let s = fig.grid.scenario_at(i).unwrap();
                assert_eq!(adj, closed_form_bias(&s, Estimator::Adjusted).unwrap().value);
            }
        }
        let s = fig.grid.scenario_at(0).unwrap();
        assert_eq!(s, MScenario::uniform(-0.707106781187, 0.2).into());
    }

    #[test]
    fn grid_checks() {
        let g = GridSpec::new(Structure::M, vec![Axis::new("a", 0.0, 1.0, 1)]);
        assert!(matches!(run_sweep(&g), Err(Error::Domain(_))));
        let g = GridSpec::new(Structure::M, vec![Axis::new("a", 0.0, 1.0, 3)]).tie(0, 1.0, &[Param::A]);
        assert!(matches!(run_sweep(&g), Err(Error::MissingKeys { .. })));
        let g = GridSpec::new(Structure::M, vec![Axis::new("a", 0.0, f64::NAN, 3)]);
        assert!(run_sweep(&g).is_err());
        let g = find_figure("fig2a", 5).unwrap().grid.fix(Param::E, 0.1);
        assert!(run_sweep(&g).is_err());
    }

    #[test]
    fn bind_text_forms() {
        let g = GridSpec::new(Structure::M, vec![Axis::new("t", 0.0, 0.4, 3)])
            .bind_text(Param::A, "t")
            .unwrap()
            .bind_text(Param::B, "t")
            .unwrap()
            .bind_text(Param::C, "0.5*t")
            .unwrap()
            .bind_text(Param::D, "0.5 * t")
            .unwrap()
            .bind_text(Param::Rho, "0")
            .unwrap();
        let s = g.scenario_at(2).unwrap();
        assert_eq!(s, MScenario::new(0.4, 0.4, 0.2, 0.2, 0.0).into());
        assert!(g.clone().bind_text(Param::A, "u").is_err());
    }

    #[test]
    fn predicates() {
        assert_eq!(
            Predicate::parse("adjusted_smaller").unwrap(),
            Predicate::AdjustedSmaller
        );
        assert_eq!(Predicate::parse("abs_below(0.01)").unwrap(), Predicate::AbsBelow(0.01));
        assert_eq!(
            Predicate::parse("below_min_frac(1/20)").unwrap(),
            Predicate::BelowMinFrac(0.05)
        );
        assert!(Predicate::parse("smaller").is_err());
        let fig = find_figure("fig2a", 51).unwrap();
        let t = run_sweep(&fig.grid).unwrap();
        let all = region_stats(&t, Predicate::AbsBelow(1e300)).unwrap();
        assert_eq!(all.fraction(), 1.0);
        // rho = 0: unadjusted bias is zero, so adjustment never strictly wins
        assert_eq!(region_stats(&t, Predicate::AdjustedSmaller).unwrap().satisfied, 0);
    }

    #[test]
    fn empty_region() {
        let g = GridSpec::new(Structure::M, vec![Axis::new("a", 0.9, 1.0, 3)])
            .tie(0, 1.0, &[Param::A, Param::B, Param::C, Param::D])
            .fix(Param::Rho, 0.0);
        assert!(matches!(
            region_fraction(&g, Predicate::AdjustedSmaller),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn csv_layout() {
        let g = GridSpec::new(Structure::M, vec![Axis::new("a", 0.1, 0.3, 3)])
            .tie(0, 1.0, &[Param::A, Param::B, Param::C, Param::D])
            .fix(Param::Rho, 0.2);
        let t = run_sweep(&g).unwrap();
        let mut buf = Vec::new();
        let n = t.write_csv(&mut buf, None).unwrap();
        assert_eq!(n, buf.len());
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "a,feasible,warning,bias_unadj,bias_adj,ratio");
        assert!(lines[2].starts_with("0.2,1,"));

        let empty = SweepTable {
            grid: g.clone(),
            rows: vec![],
        };
        let mut buf = Vec::new();
        empty.write_csv(&mut buf, Some(Predicate::AdjustedSmaller)).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,feasible,warning,bias_unadj,bias_adj,ratio,predicate\n"
        );
    }

    #[test]
    fn catalog_is_complete_and_valid() {
        let ids: Vec<&str> = figure_catalog(3).iter().map(|f| f.id).collect();
        assert_eq!(
            ids,
            [
                "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig5a", "fig5b", "fig6a",
                "fig6b", "fig6c", "fig7b", "fig8a", "fig8b"
            ]
        );
        for f in figure_catalog(3) {
            f.grid.check().unwrap();
        }
    }

    #[test]
    fn parallel_and_sequential_sweeps_agree() {
        let g = find_figure("fig5b", 60).unwrap().grid;
        assert_eq!(
            run_sweep_with(&g, Execution::Parallel).unwrap(),
            run_sweep_with(&g, Execution::Sequential).unwrap()
        );
    }
}
