//! General acyclic linear SEM engine.
//!
//! A [`LinearSem`] is a weighted DAG over named variables with one exogenous
//! noise per variable. The implied covariance is obtained by writing every
//! variable as a linear combination of the noises in topological order, so
//! no matrix inversion is involved. [`ols_coefficient`] then extracts any
//! population least-squares coefficient from the covariance, and
//! [`binary_link`] turns a unit-variance latent variable into its
//! dichotomized counterpart.
//!
//! # `.sem` format
//!
//! ```text
//! # M-structure with correlated hidden causes
//! var U
//! var W
//! var M
//! var T
//! var Y
//! edge U M 0.2
//! edge W M 0.2
//! edge U T 0.2
//! edge W Y 0.2
//! noisecorr U W 0.2
//! standardize on        # on | as-written | off
//! threshold T 0.0       # optional: dichotomize T at alpha
//! ```

use std::fmt;

use crate::bias::{BiasResult, Estimator, Method};
use crate::error::{ensure_finite, Error, Result};
use crate::kernel::{cdf_unchecked, check_alpha, pdf_unchecked};
use crate::linalg;
use crate::scenario::{BinaryButterflyScenario, BinaryMScenario, ButterflyScenario, MScenario, Scenario, WtoTScenario};

const PSD_TOL: f64 = 1e-10;
const LOADING_EPS: f64 = 1e-12;

/// How the noise loading of a node with parents is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Standardize {
    /// Loading chosen so that the node has variance exactly one.
    #[default]
    On,
    /// Loading `√(1 − Σ coef²)`: the textbook convention that ignores
    /// covariance among parents.
    AsWritten,
    /// Every noise enters with loading one.
    Off,
}

impl Standardize {
    fn keyword(self) -> &'static str {
        match self {
            Standardize::On => "on",
            Standardize::AsWritten => "as-written",
            Standardize::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSem {
    names: Vec<String>,
    edges: Vec<Edge>,
    noise_corr: Vec<(usize, usize, f64)>,
    standardize: Standardize,
    thresholds: Vec<(usize, f64)>,
}

impl LinearSem {
    pub fn new(
        names: Vec<String>,
        edges: Vec<Edge>,
        noise_corr: Vec<(usize, usize, f64)>,
        standardize: Standardize,
    ) -> Result<Self> {
        let sem = LinearSem {
            names,
            edges,
            noise_corr,
            standardize,
            thresholds: Vec::new(),
        };
        sem.check()?;
        Ok(sem)
    }

    /// Convenience constructor from name-based edges.
    pub fn from_names(
        names: &[&str],
        edges: &[(&str, &str, f64)],
        noise_corr: &[(&str, &str, f64)],
        standardize: Standardize,
    ) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let idx = |n: &str| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::parse(0, format!("unknown variable `{n}`")))
        };
        let edges = edges
            .iter()
            .map(|&(s, t, coef)| {
                Ok(Edge {
                    source: idx(s)?,
                    target: idx(t)?,
                    coef,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let noise_corr = noise_corr
            .iter()
            .map(|&(a, b, r)| Ok((idx(a)?, idx(b)?, r)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, edges, noise_corr, standardize)
    }

    /// Marks `name` as a latent variable observed only through `1{name ≥ alpha}`.
    pub fn with_threshold(mut self, name: &str, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::parse(0, format!("unknown variable `{name}`")))?;
        self.thresholds.retain(|&(j, _)| j != i);
        self.thresholds.push((i, alpha));
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn noise_correlations(&self) -> &[(usize, usize, f64)] {
        &self.noise_corr
    }

    pub fn standardize(&self) -> Standardize {
        self.standardize
    }

    /// `(variable index, alpha)` for each dichotomized variable.
    pub fn thresholds(&self) -> &[(usize, f64)] {
        &self.thresholds
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check(&self) -> Result<()> {
        let n = self.names.len();
        for (i, name) in self.names.iter().enumerate() {
            if self.names[..i].contains(name) {
                return Err(Error::parse(0, format!("variable `{name}` declared twice")));
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return Err(Error::parse(0, "edge refers to an unknown variable"));
            }
            ensure_finite("edge coefficient", e.coef)?;
            if e.source == e.target {
                return Err(Error::parse(0, format!("self-loop on `{}`", self.names[e.source])));
            }
            if self.edges[..k]
                .iter()
                .any(|o| o.source == e.source && o.target == e.target)
            {
                return Err(Error::parse(
                    0,
                    format!("duplicate edge {} -> {}", self.names[e.source], self.names[e.target]),
                ));
            }
            if self.standardize != Standardize::Off && e.coef.abs() > 1.0 {
                return Err(Error::parse(
                    0,
                    format!("coefficient {} outside [-1, 1] under standardization", e.coef),
                ));
            }
        }
        if self.topological_order().is_none() {
            return Err(Error::parse(0, "cycle detected"));
        }
        for (k, &(a, b, r)) in self.noise_corr.iter().enumerate() {
            if a >= n || b >= n || a == b {
                return Err(Error::parse(0, "noise correlation needs two distinct variables"));
            }
            ensure_finite("noise correlation", r)?;
            if r.abs() > 1.0 {
                return Err(Error::parse(0, format!("noise correlation {r} outside [-1, 1]")));
            }
            if self.noise_corr[..k]
                .iter()
                .any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
            {
                return Err(Error::parse(0, "duplicate noise correlation"));
            }
        }
        if !linalg::is_psd(&self.noise_covariance(), n, PSD_TOL) {
            return Err(Error::parse(
                0,
                "noise correlation matrix is not positive semi-definite",
            ));
        }
        Ok(())
    }

    fn noise_covariance(&self) -> Vec<f64> {
        let n = self.names.len();
        let mut omega = vec![0.0; n * n];
        for i in 0..n {
            omega[i * n + i] = 1.0;
        }
        for &(a, b, r) in &self.noise_corr {
            omega[a * n + b] = r;
            omega[b * n + a] = r;
        }
        omega
    }

    /// Kahn's algorithm, ties broken by declaration order.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.names.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[e.target] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        while order.len() < n {
            let next = (0..n).find(|&i| !done[i] && indegree[i] == 0)?;
            done[next] = true;
            order.push(next);
            for e in self.edges.iter().filter(|e| e.source == next) {
                indegree[e.target] -= 1;
            }
        }
        Some(order)
    }

    /// Reduced form: row `v` holds the weights of every noise in variable `v`.
    fn reduced_form(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.names.len();
        let omega = self.noise_covariance();
        let order = self.topological_order().expect("checked acyclic");
        let mut rows = vec![vec![0.0; n]; n];
        for &v in &order {
            let mut s = vec![0.0; n];
            let mut sum_sq = 0.0;
            let mut has_parents = false;
            for e in self.edges.iter().filter(|e| e.target == v) {
                has_parents = true;
                sum_sq += e.coef * e.coef;
                for (acc, w) in s.iter_mut().zip(&rows[e.source]) {
                    *acc += e.coef * w;
                }
            }
            let loading = if !has_parents {
                1.0
            } else {
                match self.standardize {
                    Standardize::Off => 1.0,
                    Standardize::AsWritten => {
                        let rest = 1.0 - sum_sq;
                        if rest < -LOADING_EPS {
                            return Err(Error::NotRealizable {
                                node: self.names[v].clone(),
                                explained: sum_sq,
                            });
                        }
                        rest.max(0.0).sqrt()
                    }
                    Standardize::On => {
                        // Var(s + ℓ ε_v) = s'Ωs + 2ℓ s'Ω e_v + ℓ² = 1
                        let omega_s: Vec<f64> = (0..n).map(|i| (0..n).map(|j| omega[i * n + j] * s[j]).sum()).collect();
                        let explained: f64 = s.iter().zip(&omega_s).map(|(a, b)| a * b).sum();
                        let k = omega_s[v];
                        let disc = k * k + 1.0 - explained;
                        let ell = -k + disc.max(0.0).sqrt();
                        if disc < -LOADING_EPS || ell < -LOADING_EPS {
                            return Err(Error::NotRealizable {
                                node: self.names[v].clone(),
                                explained,
                            });
                        }
                        ell.max(0.0)
                    }
                }
            };
            s[v] += loading;
            rows[v] = s;
        }
        Ok(rows)
    }

    /// Implied covariance of all variables (latent scale for thresholded ones).
    pub fn implied_covariance(&self) -> Result<CovMatrix> {
        let n = self.names.len();
        let omega = self.noise_covariance();
        let rows = self.reduced_form()?;
        let omega_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| (0..n).map(|i| (0..n).map(|j| omega[i * n + j] * r[j]).sum()).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rows[i].iter().zip(&omega_rows[j]).map(|(a, b)| a * b).sum();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        CovMatrix::new(self.names.clone(), data)
    }

    /// Parses the `.sem` DSL.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut edges: Vec<(Edge, usize)> = Vec::new();
        let mut corr: Vec<(usize, usize, f64)> = Vec::new();
        let mut thresholds: Vec<(usize, f64)> = Vec::new();
        let mut standardize = Standardize::On;

        let lookup = |names: &[String], name: &str, line: usize| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::parse(line, format!("unknown variable `{name}`")))
        };
        let number = |tok: &str, line: usize| -> Result<f64> {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(line, format!("expected a number, got `{tok}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(line, format!("non-finite number `{tok}`")));
            }
            Ok(v)
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            let Some((&head, args)) = toks.split_first() else {
                continue;
            };
            let arity = |k: usize| {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(Error::parse(
                        line,
                        format!("`{head}` takes {k} argument(s), got {}", args.len()),
                    ))
                }
            };
            match head {
                "var" => {
                    arity(1)?;
                    if names.iter().any(|n| n == args[0]) {
                        return Err(Error::parse(line, format!("variable `{}` declared twice", args[0])));
                    }
                    names.push(args[0].to_string());
                }
                "edge" => {
                    arity(3)?;
                    let source = lookup(&names, args[0], line)?;
                    let target = lookup(&names, args[1], line)?;
                    let coef = number(args[2], line)?;
                    if source == target {
                        return Err(Error::parse(line, format!("self-loop on `{}`", args[0])));
                    }
                    if edges.iter().any(|(e, _)| e.source == source && e.target == target) {
                        return Err(Error::parse(line, format!("duplicate edge {} -> {}", args[0], args[1])));
                    }
                    if reaches(&edges, target, source) {
                        return Err(Error::parse(
                            line,
                            format!("edge {} -> {} creates a cycle", args[0], args[1]),
                        ));
                    }
                    edges.push((Edge { source, target, coef }, line));
                }
                "noisecorr" => {
                    arity(3)?;
                    let a = lookup(&names, args[0], line)?;
                    let b = lookup(&names, args[1], line)?;
                    let r = number(args[2], line)?;
                    if a == b {
                        return Err(Error::parse(line, "noisecorr needs two distinct variables"));
                    }
                    if r.abs() > 1.0 {
                        return Err(Error::parse(line, format!("noise correlation {r} outside [-1, 1]")));
                    }
                    if corr.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                        return Err(Error::parse(line, "duplicate noisecorr"));
                    }
                    corr.push((a, b, r));
                }
                "standardize" => {
                    arity(1)?;
                    standardize = match args[0] {
                        "on" => Standardize::On,
                        "off" => Standardize::Off,
                        "as-written" => Standardize::AsWritten,
                        other => {
                            return Err(Error::parse(
                                line,
                                format!("expected on, off or as-written, got `{other}`"),
                            ))
                        }
                    };
                }
                "threshold" => {
                    arity(2)?;
                    let v = lookup(&names, args[0], line)?;
                    let alpha = number(args[1], line)?;
                    check_alpha(alpha).map_err(|e| Error::parse(line, e.to_string()))?;
                    thresholds.retain(|&(j, _)| j != v);
                    thresholds.push((v, alpha));
                }
                other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
            }
        }

        if standardize != Standardize::Off {
            if let Some((e, line)) = edges.iter().find(|(e, _)| e.coef.abs() > 1.0) {
                return Err(Error::parse(
                    *line,
                    format!("coefficient {} outside [-1, 1] under standardization", e.coef),
                ));
            }
        }
        let mut sem = LinearSem::new(names, edges.into_iter().map(|(e, _)| e).collect(), corr, standardize)?;
        sem.thresholds = thresholds;
        Ok(sem)
    }
}

/// Whether `to` is reachable from `from` along the given edges.
fn reaches(edges: &[(Edge, usize)], from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for (e, _) in edges.iter().filter(|(e, _)| e.source == v) {
            if !seen.contains(&e.target) {
                seen.push(e.target);
                stack.push(e.target);
            }
        }
    }
    false
}

impl fmt::Display for LinearSem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in &self.names {
            writeln!(f, "var {name}")?;
        }
        for e in &self.edges {
            writeln!(f, "edge {} {} {}", self.names[e.source], self.names[e.target], e.coef)?;
        }
        for &(a, b, r) in &self.noise_corr {
            writeln!(f, "noisecorr {} {} {}", self.names[a], self.names[b], r)?;
        }
        writeln!(f, "standardize {}", self.standardize.keyword())?;
        for &(v, alpha) in &self.thresholds {
            writeln!(f, "threshold {} {}", self.names[v], alpha)?;
        }
        Ok(())
    }
}

/// Named symmetric covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    names: Vec<String>,
    data: Vec<f64>,
}

impl CovMatrix {
    /// `data` is row-major; it must be square and symmetric.
    pub fn new(names: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if data.len() != n * n {
            return Err(Error::Domain(format!(
                "covariance data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in 0..i {
                let (x, y) = (data[i * n + j], data[j * n + i]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::Domain(format!(
                        "covariance is not symmetric at ({}, {})",
                        names[i], names[j]
                    )));
                }
            }
        }
        Ok(Self { names, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Domain(format!("no variable `{name}` in covariance")))
    }

    pub fn get(&self, a: &str, b: &str) -> Result<f64> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Ok(self.at(i, j))
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    pub fn variance(&self, name: &str) -> Result<f64> {
        self.get(name, name)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        linalg::is_psd(&self.data, self.dim(), tol)
    }
}

/// Population least-squares coefficient of `treatment` when `outcome` is
/// regressed on `treatment` and `controls` (plus an intercept).
pub fn ols_coefficient(cov: &CovMatrix, outcome: &str, treatment: &str, controls: &[&str]) -> Result<f64> {
    let regressors: Vec<usize> = std::iter::once(treatment)
        .chain(controls.iter().copied())
        .map(|n| cov.index_of(n))
        .collect::<Result<_>>()?;
    let y = cov.index_of(outcome)?;
    let k = regressors.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (a, &i) in regressors.iter().enumerate() {
        rhs[a] = cov.at(i, y);
        for (b, &j) in regressors.iter().enumerate() {
            gram[a * k + b] = cov.at(i, j);
        }
    }
    let beta = linalg::solve_spd(&gram, k, &rhs).ok_or_else(|| {
        Error::UndefinedEstimator(format!(
            "Gram block over {{{}}} is singular",
            std::iter::once(treatment)
                .chain(controls.iter().copied())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })?;
    Ok(beta[0])
}

/// Coefficient of `treatment` when `outcome` is regressed on `treatment` and
/// one `control`, in closed form:
/// `{Cov(Y,T)Var(M) − Cov(Y,M)Cov(M,T)} / {Var(T)Var(M) − Cov(M,T)²}`.
pub fn two_regressor_coefficient(cov: &CovMatrix, outcome: &str, treatment: &str, control: &str) -> Result<f64> {
    let g = |a: &str, b: &str| cov.get(a, b);
    let den = g(treatment, treatment)? * g(control, control)? - g(control, treatment)?.powi(2);
    if den <= 0.0 {
        return Err(Error::UndefinedEstimator(format!(
            "{treatment} and {control} are collinear"
        )));
    }
    Ok((g(outcome, treatment)? * g(control, control)? - g(outcome, control)? * g(control, treatment)?) / den)
}

/// Second moments involving `T = 1{T* ≥ α}` for a unit-variance latent `T*`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLink {
    pub latent: String,
    pub alpha: f64,
    /// `Var(T) = Φ(α)Φ(−α)`.
    pub variance: f64,
    /// `(V, Cov(V, T))` for every other variable `V`.
    pub covariances: Vec<(String, f64)>,
}

/// Applies `Cov(V, T) = Φ(α)Φ(−α)·η(α)·Cov(V, T*)`, which simplifies to
/// `φ(α)·Cov(V, T*)`.
pub fn binary_link(cov: &CovMatrix, latent: &str, alpha: f64) -> Result<BinaryLink> {
    check_alpha(alpha)?;
    let t = cov.index_of(latent)?;
    let var = cov.at(t, t);
    if (var - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "latent `{latent}` must have unit variance, has {var}"
        )));
    }
    let p_q = cdf_unchecked(alpha) * cdf_unchecked(-alpha);
    let scale = pdf_unchecked(alpha);
    let covariances = cov
        .names()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .map(|(i, name)| (name.clone(), scale * cov.at(i, t)))
        .collect();
    Ok(BinaryLink {
        latent: latent.to_string(),
        alpha,
        variance: p_q,
        covariances,
    })
}

impl BinaryLink {
    /// Covariance matrix with the latent row/column replaced by the
    /// dichotomized variable, renamed to `binary_name`.
    pub fn dichotomized(&self, cov: &CovMatrix, binary_name: &str) -> Result<CovMatrix> {
        let t = cov.index_of(&self.latent)?;
        let n = cov.dim();
        let mut names = cov.names().to_vec();
        names[t] = binary_name.to_string();
        let mut data = cov.data.clone();
        data[t * n + t] = self.variance;
        for (name, c) in &self.covariances {
            let i = cov.index_of(name)?;
            data[i * n + t] = *c;
            data[t * n + i] = *c;
        }
        CovMatrix::new(names, data)
    }
}

/// Name of the latent treatment in binary catalog SEMs.
pub const LATENT_TREATMENT: &str = "T*";

/// SEM encoding a catalog scenario, with unit-variance noise loadings.
pub fn build_scenario_sem(scenario: &Scenario) -> Result<LinearSem> {
    scenario.validated()?;
    const NAMES: [&str; 5] = ["U", "W", "M", "T", "Y"];
    const BINARY_NAMES: [&str; 5] = ["U", "W", "M", LATENT_TREATMENT, "Y"];
    let (t, names) = if scenario.structure().is_binary() {
        (LATENT_TREATMENT, &BINARY_NAMES)
    } else {
        ("T", &NAMES)
    };
    let m_edges = |s: &MScenario| vec![("U", "M", s.b), ("W", "M", s.c), ("U", t, s.a), ("W", "Y", s.d)];
    let bf_edges = |s: &ButterflyScenario| {
        vec![
            ("U", "M", s.b),
            ("W", "M", s.c),
            ("U", t, s.a),
            ("M", t, s.e),
            ("W", "Y", s.d),
            ("M", "Y", s.f),
        ]
    };
    let (edges, corr, alpha) = match scenario {
        Scenario::M(s) => (m_edges(s), vec![("U", "W", s.rho)], None),
        Scenario::BinaryM(BinaryMScenario { base, alpha }) => (m_edges(base), vec![("U", "W", base.rho)], Some(*alpha)),
        Scenario::Butterfly(s) => (bf_edges(s), vec![], None),
        Scenario::BinaryButterfly(BinaryButterflyScenario { base, alpha }) => (bf_edges(base), vec![], Some(*alpha)),
        Scenario::WtoT(s @ WtoTScenario { .. }) => (
            vec![
                ("U", "M", s.b),
                ("W", "M", s.c),
                ("U", t, s.a),
                ("W", t, s.g),
                ("W", "Y", s.d),
            ],
            vec![("U", "W", s.rho)],
            None,
        ),
    };
    let sem = LinearSem::from_names(names, &edges, &corr, Standardize::On)?;
    match alpha {
        Some(alpha) => sem.with_threshold(t, alpha),
        None => Ok(sem),
    }
}

/// Bias of `estimator` derived from the scenario's SEM: implied covariance,
/// optional dichotomization, then a least-squares solve.
pub fn engine_bias(scenario: &Scenario, estimator: Estimator) -> Result<BiasResult> {
    let sem = build_scenario_sem(scenario)?;
    let mut cov = sem.implied_covariance()?;
    if let Some(&(_, alpha)) = sem.thresholds().first() {
        let link = binary_link(&cov, LATENT_TREATMENT, alpha)?;
        cov = link.dichotomized(&cov, "T")?;
    }
    let controls: &[&str] = match estimator {
        Estimator::Unadjusted => &[],
        Estimator::Adjusted => &["M"],
    };
    let value = ols_coefficient(&cov, "Y", "T", controls)?;
    Ok(BiasResult {
        estimator,
        value,
        scenario: *scenario,
        method: Method::SemEngine,
    })
}
