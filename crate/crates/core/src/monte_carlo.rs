//! Finite-sample simulation oracle.
//!
//! Rows are drawn from a scenario's generating equations with Gaussian
//! noises, least squares is fitted on sufficient statistics, and the fitted
//! `T` coefficient is reported with its conventional standard error. Work is
//! split into fixed-size chunks, each with its own random stream, and the
//! chunk statistics are combined in chunk order, so results are bitwise
//! identical for any thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bias::Estimator;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::kernel::check_alpha;
use crate::linalg;
use crate::rng;
use crate::scenario::{BinaryButterflyScenario, BinaryMScenario, LoadingConvention, Loadings, Scenario};

pub const MIN_SAMPLES: usize = 100;
const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorLaw {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub error_law: ErrorLaw,
    pub include_intercept: bool,
    pub loadings: LoadingConvention,
    pub execution: Execution,
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            error_law: ErrorLaw::Gaussian,
            include_intercept: true,
            loadings: LoadingConvention::UnitVariance,
            execution: Execution::Parallel,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "n_samples must be at least {MIN_SAMPLES}, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub estimator: Estimator,
    pub bias_estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// One simulated unit. `t_latent` equals `t` for continuous treatments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub u: f64,
    pub w: f64,
    pub m: f64,
    pub t_latent: f64,
    pub t: f64,
    pub y: f64,
}

impl Row {
    const DIM: usize = 6;

    fn values(&self) -> [f64; Self::DIM] {
        [self.u, self.w, self.m, self.t_latent, self.t, self.y]
    }
}

/// Column positions in [`Row::values`].
const COL_M: usize = 2;
const COL_T: usize = 4;
const COL_Y: usize = 5;

/// Structural coefficients in a common layout:
/// `M = bU + cW`, `T* = aU + eM + gW`, `Y = dW + fM`, `corr(U, W) = ρ`.
#[derive(Debug, Clone, Copy)]
struct Generator {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    g: f64,
    rho: f64,
    rho_c: f64,
    alpha: Option<f64>,
    load: Loadings,
}

impl Generator {
    fn new(scenario: &Scenario, convention: LoadingConvention) -> Result<Self> {
        scenario.validated()?;
        let load = scenario.loadings(convention)?;
        let zero = Generator {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 0.0,
            f: 0.0,
            g: 0.0,
            rho: 0.0,
            rho_c: 1.0,
            alpha: None,
            load,
        };
        let mut gen = match *scenario {
            Scenario::M(s) | Scenario::BinaryM(BinaryMScenario { base: s, .. }) => Generator {
                a: s.a,
                b: s.b,
                c: s.c,
                d: s.d,
                rho: s.rho,
                ..zero
            },
            Scenario::Butterfly(s) | Scenario::BinaryButterfly(BinaryButterflyScenario { base: s, .. }) => Generator {
                a: s.a,
                b: s.b,
                c: s.c,
                d: s.d,
                e: s.e,
                f: s.f,
                ..zero
            },
            Scenario::WtoT(s) => Generator {
                a: s.a,
                b: s.b,
                c: s.c,
                d: s.d,
                g: s.g,
                rho: s.rho,
                ..zero
            },
        };
        gen.rho_c = (1.0 - gen.rho * gen.rho).max(0.0).sqrt();
        gen.alpha = match *scenario {
            Scenario::BinaryM(BinaryMScenario { alpha, .. })
            | Scenario::BinaryButterfly(BinaryButterflyScenario { alpha, .. }) => Some(alpha),
            _ => None,
        };
        Ok(gen)
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> Row {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let em: f64 = rng.sample(StandardNormal);
        let et: f64 = rng.sample(StandardNormal);
        let ey: f64 = rng.sample(StandardNormal);
        let u = z1;
        let w = self.rho * z1 + self.rho_c * z2;
        let m = self.b * u + self.c * w + self.load.m * em;
        let t_latent = self.a * u + self.e * m + self.g * w + self.load.t * et;
        let y = self.d * w + self.f * m + self.load.y * ey;
        let t = match self.alpha {
            Some(alpha) => {
                if t_latent >= alpha {
                    1.0
                } else {
                    0.0
                }
            }
            None => t_latent,
        };
        Row {
            u,
            w,
            m,
            t_latent,
            t,
            y,
        }
    }
}

/// Draws `config.n_samples` rows. Deterministic in `config.seed`.
pub fn draw_dataset(scenario: &Scenario, config: &SimConfig) -> Result<Vec<Row>> {
    config.check()?;
    let gen = Generator::new(scenario, config.loadings)?;
    let chunks: Vec<(u64, usize)> = rng::chunks(config.n_samples).collect();
    let parts = map_indexed(chunks.len(), config.execution, |i| {
        let (index, rows) = chunks[i];
        let mut r = rng::stream(config.seed, 0, index);
        (0..rows).map(|_| gen.draw(&mut r)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Sums, cross products and squared cross products over the row columns.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    sum: [f64; Row::DIM],
    cross: [[f64; Row::DIM]; Row::DIM],
    quad: [[f64; Row::DIM]; Row::DIM],
}

impl Moments {
    fn zero() -> Self {
        Self {
            n: 0.0,
            sum: [0.0; Row::DIM],
            cross: [[0.0; Row::DIM]; Row::DIM],
            quad: [[0.0; Row::DIM]; Row::DIM],
        }
    }

    #[inline]
    fn push(&mut self, row: &Row) {
        let v = row.values();
        self.n += 1.0;
        for i in 0..Row::DIM {
            self.sum[i] += v[i];
            for j in i..Row::DIM {
                let p = v[i] * v[j];
                self.cross[i][j] += p;
                self.quad[i][j] += p * p;
            }
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        self.n += other.n;
        for i in 0..Row::DIM {
            self.sum[i] += other.sum[i];
            for j in i..Row::DIM {
                self.cross[i][j] += other.cross[i][j];
                self.quad[i][j] += other.quad[i][j];
            }
        }
        self
    }

    fn raw(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.cross[i][j]
    }

    /// Scatter entry, centered when an intercept is fitted.
    fn scatter(&self, i: usize, j: usize, centered: bool) -> f64 {
        if centered {
            self.raw(i, j) - self.sum[i] * self.sum[j] / self.n
        } else {
            self.raw(i, j)
        }
    }
}

fn simulate_moments(gen: &Generator, config: &SimConfig, attempt: u32) -> Moments {
    let chunks: Vec<(u64, usize)> = rng::chunks(config.n_samples).collect();
    let parts = map_indexed(chunks.len(), config.execution, |i| {
        let (index, rows) = chunks[i];
        let mut r = rng::stream(config.seed, attempt, index);
        let mut m = Moments::zero();
        for _ in 0..rows {
            m.push(&gen.draw(&mut r));
        }
        m
    });
    parts.iter().fold(Moments::zero(), |acc, m| acc.merge(m))
}

/// Least squares of `Y` on `T` (and `M`) from the moment sums; `None` if the
/// design is singular.
fn fit(m: &Moments, estimator: Estimator, intercept: bool) -> Option<(f64, f64)> {
    let regressors: &[usize] = match estimator {
        Estimator::Unadjusted => &[COL_T],
        Estimator::Adjusted => &[COL_T, COL_M],
    };
    let k = regressors.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (a, &i) in regressors.iter().enumerate() {
        rhs[a] = m.scatter(i, COL_Y, intercept);
        for (b, &j) in regressors.iter().enumerate() {
            gram[a * k + b] = m.scatter(i, j, intercept);
        }
    }
    let beta = linalg::solve_spd(&gram, k, &rhs)?;
    let inv = linalg::inverse_diagonal(&gram, k)?;
    let rss = m.scatter(COL_Y, COL_Y, intercept) - beta.iter().zip(&rhs).map(|(b, r)| b * r).sum::<f64>();
    let df = m.n - k as f64 - if intercept { 1.0 } else { 0.0 };
    let sigma2 = (rss / df).max(0.0);
    Some((beta[0], (sigma2 * inv[0]).sqrt()))
}

/// Simulated bias of one estimator.
pub fn estimate_bias(scenario: &Scenario, estimator: Estimator, config: &SimConfig) -> Result<SimResult> {
    let [u, a] = estimate_both(scenario, config)?;
    Ok(match estimator {
        Estimator::Unadjusted => u,
        Estimator::Adjusted => a,
    })
}

/// Simulated biases of both estimators from a single set of draws,
/// `[unadjusted, adjusted]`.
pub fn estimate_both(scenario: &Scenario, config: &SimConfig) -> Result<[SimResult; 2]> {
    config.check()?;
    let gen = Generator::new(scenario, config.loadings)?;
    for attempt in 0..=MAX_RETRIES {
        let m = simulate_moments(&gen, config, attempt);
        let fits = (
            fit(&m, Estimator::Unadjusted, config.include_intercept),
            fit(&m, Estimator::Adjusted, config.include_intercept),
        );
        if let (Some(u), Some(a)) = fits {
            let result = |estimator, (bias_estimate, std_error): (f64, f64)| SimResult {
                estimator,
                bias_estimate,
                std_error,
                n_samples: config.n_samples,
                seed: config.seed,
            };
            return Ok([result(Estimator::Unadjusted, u), result(Estimator::Adjusted, a)]);
        }
    }
    Err(Error::Simulation(format!(
        "singular design after {} attempts (n = {})",
        MAX_RETRIES + 1,
        config.n_samples
    )))
}

/// Sample covariance of `(U, W, M, T*, Y)` with a standard error per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    pub names: [&'static str; 5],
    pub cov: [[f64; 5]; 5],
    pub std_error: [[f64; 5]; 5],
}

/// Sample covariance of the simulated variables (latent treatment scale).
pub fn sample_covariance(scenario: &Scenario, config: &SimConfig) -> Result<SampleCovariance> {
    config.check()?;
    let gen = Generator::new(scenario, config.loadings)?;
    let m = simulate_moments(&gen, config, 0);
    // U, W, M, T*, Y
    const COLS: [usize; 5] = [0, 1, 2, 3, 5];
    let t_name = if scenario.structure().is_binary() { "T*" } else { "T" };
    let mut cov = [[0.0; 5]; 5];
    let mut se = [[0.0; 5]; 5];
    for (a, &i) in COLS.iter().enumerate() {
        for (b, &j) in COLS.iter().enumerate() {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            let n = m.n;
            let c = m.scatter(i, j, true) / (n - 1.0);
            let mean_prod = m.cross[lo][hi] / n;
            let var_prod = (m.quad[lo][hi] / n - mean_prod * mean_prod).max(0.0);
            cov[a][b] = c;
            se[a][b] = (var_prod / n).sqrt();
        }
    }
    Ok(SampleCovariance {
        names: ["U", "W", "M", t_name, "Y"],
        cov,
        std_error: se,
    })
}

/// A simulated scalar with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct SplitSums {
    n: [f64; 2],
    sum: [f64; 2],
    sum_sq: [f64; 2],
    x2b: f64,
}

fn bivariate_sums(r: f64, z: f64, n: usize, seed: u64, exec: Execution) -> Result<SplitSums> {
    if !(r.is_finite() && r.abs() <= 1.0) {
        return Err(Error::Domain(format!("correlation must satisfy |r| <= 1, got {r}")));
    }
    check_alpha(z)?;
    if n < MIN_SAMPLES {
        return Err(Error::Domain(format!("n must be at least {MIN_SAMPLES}")));
    }
    let rc = (1.0 - r * r).sqrt();
    let chunks: Vec<(u64, usize)> = rng::chunks(n).collect();
    let parts = map_indexed(chunks.len(), exec, |i| {
        let (index, rows) = chunks[i];
        let mut g = rng::stream(seed, 0, index);
        let mut s = SplitSums::default();
        for _ in 0..rows {
            let x2: f64 = g.sample(StandardNormal);
            let zz: f64 = g.sample(StandardNormal);
            let x1 = r * x2 + rc * zz;
            let k = usize::from(x2 >= z);
            s.n[k] += 1.0;
            s.sum[k] += x1;
            s.sum_sq[k] += x1 * x1;
            if k == 1 {
                s.x2b += x1 * x1;
            }
        }
        s
    });
    Ok(parts.iter().fold(SplitSums::default(), |mut acc, s| {
        for k in 0..2 {
            acc.n[k] += s.n[k];
            acc.sum[k] += s.sum[k];
            acc.sum_sq[k] += s.sum_sq[k];
        }
        acc.x2b += s.x2b;
        acc
    }))
}

/// Simulated `E(X₁ | X₂ ≥ z) − E(X₁ | X₂ < z)` for a standard bivariate
/// normal pair with correlation `r`.
pub fn simulate_truncated_diff(r: f64, z: f64, n: usize, seed: u64, exec: Execution) -> Result<Estimate> {
    let s = bivariate_sums(r, z, n, seed, exec)?;
    if s.n[0] < 2.0 || s.n[1] < 2.0 {
        return Err(Error::Simulation("one side of the threshold is (nearly) empty".into()));
    }
    let mean = |k: usize| s.sum[k] / s.n[k];
    let var = |k: usize| (s.sum_sq[k] - s.n[k] * mean(k) * mean(k)) / (s.n[k] - 1.0);
    Ok(Estimate {
        value: mean(1) - mean(0),
        std_error: (var(1) / s.n[1] + var(0) / s.n[0]).sqrt(),
        n,
    })
}

/// Simulated `Cov(X₁, B)` with `B = 1{X₂ ≥ z}`.
pub fn simulate_bernoulli_cov(r: f64, z: f64, n: usize, seed: u64, exec: Execution) -> Result<Estimate> {
    let s = bivariate_sums(r, z, n, seed, exec)?;
    let nn = s.n[0] + s.n[1];
    let mx = (s.sum[0] + s.sum[1]) / nn;
    let mb = s.n[1] / nn;
    let mxb = s.sum[1] / nn;
    let cov = mxb - mx * mb;
    // Var{(X − μx)(B − μb)} with B² = B
    let ex2 = (s.sum_sq[0] + s.sum_sq[1]) / nn;
    let ex2b = s.x2b / nn;
    let centered_x2b = ex2b - 2.0 * mx * mxb + mx * mx * mb;
    let centered_x2 = ex2 - mx * mx;
    let second = (1.0 - 2.0 * mb) * centered_x2b + mb * mb * centered_x2;
    Ok(Estimate {
        value: cov,
        std_error: ((second - cov * cov).max(0.0) / nn).sqrt(),
        n,
    })
}
