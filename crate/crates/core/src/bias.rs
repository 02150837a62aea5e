//! Closed-form asymptotic biases.
//!
//! The causal effect of `T` on `Y` is zero in every catalog structure, so the
//! probability limit of each estimator is its bias. "Unadjusted" regresses `Y`
//! on `T`; "adjusted" regresses `Y` on `(T, M)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{eta_unchecked, pdf_unchecked};
use crate::scenario::{BinaryButterflyScenario, BinaryMScenario, ButterflyScenario, MScenario, Scenario, WtoTScenario};
use crate::sem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Unadjusted,
    Adjusted,
}

impl Estimator {
    pub const BOTH: [Estimator; 2] = [Estimator::Unadjusted, Estimator::Adjusted];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Unadjusted => "unadjusted",
            Estimator::Adjusted => "adjusted",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    SemEngine,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SemEngine => "sem_engine",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which version of the binary M-structure adjusted formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinaryFormula {
    /// Denominator `1 − (ab + acρ)² φ(α) η(α)`.
    #[default]
    Corrected,
    /// Denominator `ρ {1 − (ab + acρ)² φ(α) η(α)}`. Kept for auditing; it
    /// disagrees with simulation.
    StrayRho,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasResult {
    pub estimator: Estimator,
    pub value: f64,
    pub scenario: Scenario,
    pub method: Method,
}

impl BiasResult {
    fn closed(scenario: Scenario, estimator: Estimator, value: f64) -> Self {
        Self {
            estimator,
            value,
            scenario,
            method: Method::ClosedForm,
        }
    }
}

fn positive_denominator(den: f64, what: &str) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(den)
    } else {
        Err(Error::UndefinedEstimator(format!("{what} denominator is {den}")))
    }
}

/// `ad·ρ` and `{adρ(1−b²−c²−bcρ) − abcd} / {1 − (ab+acρ)²}`.
pub fn m_bias(s: &MScenario, estimator: Estimator) -> Result<BiasResult> {
    let scenario = Scenario::M(*s);
    scenario.validated()?;
    let MScenario { a, b, c, d, rho } = *s;
    let value = match estimator {
        Estimator::Unadjusted => a * d * rho,
        Estimator::Adjusted => {
            let den = positive_denominator(1.0 - s.cov_tm().powi(2), "1 - (ab + ac*rho)^2")?;
            (a * d * rho * (1.0 - b * b - c * c - b * c * rho) - a * b * c * d) / den
        }
    };
    Ok(BiasResult::closed(scenario, estimator, value))
}

/// `|Bias_adj / Bias_unadj|` for the M-structure, in the form that does not
/// involve `d`.
pub fn m_bias_ratio(s: &MScenario) -> Result<f64> {
    Scenario::M(*s).validated()?;
    let MScenario { b, c, rho, .. } = *s;
    if rho == 0.0 {
        return Err(Error::UndefinedRatio("rho = 0 makes the unadjusted bias zero".into()));
    }
    let den = positive_denominator(1.0 - s.cov_tm().powi(2), "1 - (ab + ac*rho)^2")?;
    Ok(((rho * (1.0 - b * b - c * c - b * c * rho) - b * c) / (rho * den)).abs())
}

/// `abf + cde + ef` and `−abcd / {1 − (ab+e)²}`.
pub fn butterfly_bias(s: &ButterflyScenario, estimator: Estimator) -> Result<BiasResult> {
    let scenario = Scenario::Butterfly(*s);
    scenario.validated()?;
    let ButterflyScenario { a, b, c, d, e, f } = *s;
    let value = match estimator {
        Estimator::Unadjusted => a * b * f + c * d * e + e * f,
        Estimator::Adjusted => {
            let den = positive_denominator(1.0 - s.cov_tm().powi(2), "1 - (ab + e)^2")?;
            -a * b * c * d / den
        }
    };
    Ok(BiasResult::closed(scenario, estimator, value))
}

/// Binary-treatment M-structure: `adρη(α)` and
/// `adη(α){ρ(1−b²−c²−bcρ) − bc} / {1 − (ab+acρ)²φ(α)η(α)}`.
pub fn binary_m_bias(s: &BinaryMScenario, estimator: Estimator, formula: BinaryFormula) -> Result<BiasResult> {
    let scenario = Scenario::BinaryM(*s);
    scenario.validated()?;
    let MScenario { a, b, c, d, rho } = s.base;
    let eta = eta_unchecked(s.alpha);
    let value = match estimator {
        Estimator::Unadjusted => a * d * rho * eta,
        Estimator::Adjusted => {
            let shrink = pdf_unchecked(s.alpha) * eta;
            let den = positive_denominator(
                1.0 - s.base.cov_tm().powi(2) * shrink,
                "1 - (ab + ac*rho)^2 phi(alpha) eta(alpha)",
            )?;
            let num = a * d * eta * (rho * (1.0 - b * b - c * c - b * c * rho) - b * c);
            match formula {
                BinaryFormula::Corrected => num / den,
                BinaryFormula::StrayRho => {
                    if rho == 0.0 {
                        return Err(Error::UndefinedEstimator(
                            "literal binary-M formula divides by rho = 0".into(),
                        ));
                    }
                    num / (rho * den)
                }
            }
        }
    };
    Ok(BiasResult::closed(scenario, estimator, value))
}

/// Binary-treatment butterfly: `(cde + abf + ef)η(α)` and
/// `−abcd·η(α) / {1 − (ab+e)²φ(α)η(α)}`.
pub fn binary_butterfly_bias(s: &BinaryButterflyScenario, estimator: Estimator) -> Result<BiasResult> {
    let scenario = Scenario::BinaryButterfly(*s);
    scenario.validated()?;
    let ButterflyScenario { a, b, c, d, e, f } = s.base;
    let eta = eta_unchecked(s.alpha);
    let value = match estimator {
        Estimator::Unadjusted => (c * d * e + a * b * f + e * f) * eta,
        Estimator::Adjusted => {
            let shrink = pdf_unchecked(s.alpha) * eta;
            let den = positive_denominator(
                1.0 - s.base.cov_tm().powi(2) * shrink,
                "1 - (ab + e)^2 phi(alpha) eta(alpha)",
            )?;
            -a * b * c * d * eta / den
        }
    };
    Ok(BiasResult::closed(scenario, estimator, value))
}

/// M-structure with an extra `W → T` arrow: `adρ + dg`, and for `ρ = 0`
/// `{dg − cd(ab+cg)} / {1 − (ab+cg)²}`. With `ρ ≠ 0` the adjusted bias is
/// derived by the SEM engine and labelled accordingly.
pub fn w_to_t_bias(s: &WtoTScenario, estimator: Estimator) -> Result<BiasResult> {
    let scenario = Scenario::WtoT(*s);
    scenario.validated()?;
    let WtoTScenario { a, b, c, d, g, rho } = *s;
    match estimator {
        Estimator::Unadjusted => Ok(BiasResult::closed(scenario, estimator, a * d * rho + d * g)),
        Estimator::Adjusted if rho == 0.0 => {
            let k = a * b + c * g;
            let den = positive_denominator(1.0 - k * k, "1 - (ab + cg)^2")?;
            Ok(BiasResult::closed(scenario, estimator, (d * g - c * d * k) / den))
        }
        Estimator::Adjusted => sem::engine_bias(&scenario, estimator),
    }
}

/// Dispatches to the structure's closed form.
pub fn closed_form_bias(s: &Scenario, estimator: Estimator) -> Result<BiasResult> {
    closed_form_bias_with(s, estimator, BinaryFormula::Corrected)
}

pub fn closed_form_bias_with(s: &Scenario, estimator: Estimator, formula: BinaryFormula) -> Result<BiasResult> {
    match s {
        Scenario::M(m) => m_bias(m, estimator),
        Scenario::Butterfly(b) => butterfly_bias(b, estimator),
        Scenario::BinaryM(m) => binary_m_bias(m, estimator, formula),
        Scenario::BinaryButterfly(b) => binary_butterfly_bias(b, estimator),
        Scenario::WtoT(w) => w_to_t_bias(w, estimator),
    }
}

/// `|Bias_adj| / |Bias_unadj|` for any structure.
pub fn bias_ratio(s: &Scenario, formula: BinaryFormula) -> Result<f64> {
    let unadj = closed_form_bias_with(s, Estimator::Unadjusted, formula)?.value;
    let adj = closed_form_bias_with(s, Estimator::Adjusted, formula)?.value;
    if unadj == 0.0 {
        return Err(Error::UndefinedRatio("the unadjusted bias is zero".into()));
    }
    Ok(adj.abs() / unadj.abs())
}
