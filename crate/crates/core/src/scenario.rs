//! Parameter records for the five catalog structures and their feasibility
//! rules.
//!
//! All coefficients are correlations on the standardized scale. The
//! structures are
//!
//! * `m`: `M = bU + cW + ·ε_M`, `T = aU + ·ε_T`, `Y = dW + ·ε_Y`, `corr(U, W) = ρ`;
//! * `butterfly`: the M-structure with `ρ = 0` plus `M → T` (`e`) and `M → Y` (`f`);
//! * `binary_m`, `binary_butterfly`: the same with `T = 1{T* ≥ α}`;
//! * `w_to_t`: the M-structure plus `W → T` (`g`).
//!
//! Feasibility follows the standard restriction set: each sum of squared
//! incoming coefficients is at most one, and the adjusted estimator's
//! denominator is nonzero. Cross terms such as `2bcρ` make the textbook noise
//! loadings `√(1 − b² − c²)` miss unit variance; those cases are reported as
//! warnings, and [`Scenario::loadings`] supplies the loading that does restore
//! unit variance.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{ensure_finite, Error, Result};
use crate::kernel::ALPHA_LIMIT;

/// Tolerance used when a squared loading comes out marginally negative
/// from rounding.
const LOADING_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    M,
    Butterfly,
    BinaryM,
    BinaryButterfly,
    WtoT,
}

impl Structure {
    pub const ALL: [Structure; 5] = [
        Structure::M,
        Structure::Butterfly,
        Structure::BinaryM,
        Structure::BinaryButterfly,
        Structure::WtoT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::M => "m",
            Structure::Butterfly => "butterfly",
            Structure::BinaryM => "binary_m",
            Structure::BinaryButterfly => "binary_butterfly",
            Structure::WtoT => "w_to_t",
        }
    }

    pub fn params(self) -> &'static [Param] {
        use Param::*;
        match self {
            Structure::M => &[A, B, C, D, Rho],
            Structure::Butterfly => &[A, B, C, D, E, F],
            Structure::BinaryM => &[A, B, C, D, Rho, Alpha],
            Structure::BinaryButterfly => &[A, B, C, D, E, F, Alpha],
            Structure::WtoT => &[A, B, C, D, G, Rho],
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Structure::BinaryM | Structure::BinaryButterfly)
    }
}

impl std::str::FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::parse(
                0,
                format!("unknown structure `{s}` (expected m, butterfly, binary_m, binary_butterfly or w_to_t)"),
            )
        })
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Named scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    Rho,
    Alpha,
}

impl Param {
    pub const ALL: [Param; 9] = [
        Param::A,
        Param::B,
        Param::C,
        Param::D,
        Param::E,
        Param::F,
        Param::G,
        Param::Rho,
        Param::Alpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::B => "b",
            Param::C => "c",
            Param::D => "d",
            Param::E => "e",
            Param::F => "f",
            Param::G => "g",
            Param::Rho => "rho",
            Param::Alpha => "alpha",
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::parse(0, format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MScenario {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyScenario {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryMScenario {
    pub base: MScenario,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryButterflyScenario {
    pub base: ButterflyScenario,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtoTScenario {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub g: f64,
    pub rho: f64,
}

impl MScenario {
    pub fn new(a: f64, b: f64, c: f64, d: f64, rho: f64) -> Self {
        Self { a, b, c, d, rho }
    }

    /// All four path coefficients equal to `x`.
    pub fn uniform(x: f64, rho: f64) -> Self {
        Self::new(x, x, x, x, rho)
    }

    /// `Cov(T, M) = ab + acρ`.
    pub fn cov_tm(&self) -> f64 {
        self.a * self.b + self.a * self.c * self.rho
    }
}

impl ButterflyScenario {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self { a, b, c, d, e, f }
    }

    pub fn uniform(x: f64) -> Self {
        Self::new(x, x, x, x, x, x)
    }

    /// `Cov(T, M) = ab + e`.
    pub fn cov_tm(&self) -> f64 {
        self.a * self.b + self.e
    }
}

impl WtoTScenario {
    pub fn new(a: f64, b: f64, c: f64, d: f64, g: f64, rho: f64) -> Self {
        Self { a, b, c, d, g, rho }
    }

    /// `Cov(T, M)` with `T = aU + gW` and `M = bU + cW`.
    pub fn cov_tm(&self) -> f64 {
        self.a * self.b + self.g * self.c + self.rho * (self.a * self.c + self.g * self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    M(MScenario),
    Butterfly(ButterflyScenario),
    BinaryM(BinaryMScenario),
    BinaryButterfly(BinaryButterflyScenario),
    WtoT(WtoTScenario),
}

impl From<MScenario> for Scenario {
    fn from(s: MScenario) -> Self {
        Scenario::M(s)
    }
}

impl From<ButterflyScenario> for Scenario {
    fn from(s: ButterflyScenario) -> Self {
        Scenario::Butterfly(s)
    }
}

impl From<BinaryMScenario> for Scenario {
    fn from(s: BinaryMScenario) -> Self {
        Scenario::BinaryM(s)
    }
}

impl From<BinaryButterflyScenario> for Scenario {
    fn from(s: BinaryButterflyScenario) -> Self {
        Scenario::BinaryButterfly(s)
    }
}

impl From<WtoTScenario> for Scenario {
    fn from(s: WtoTScenario) -> Self {
        Scenario::WtoT(s)
    }
}

/// How the noise loading of each endogenous node is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadingConvention {
    /// Loading makes the node's variance exactly one, cross terms included.
    #[default]
    UnitVariance,
    /// Loading is `√(1 − Σ coef²)`, ignoring covariance between parents.
    AsWritten,
}

/// Noise loadings of the three endogenous nodes (`T` is the latent `T*` in
/// binary structures).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loadings {
    pub m: f64,
    pub t: f64,
    pub y: f64,
}

/// Squared incoming-path contributions `(cross-free part, cross term)` for
/// M, T and Y.
struct Explained {
    m: (f64, f64),
    t: (f64, f64),
    y: (f64, f64),
}

impl Scenario {
    pub fn structure(&self) -> Structure {
        match self {
            Scenario::M(_) => Structure::M,
            Scenario::Butterfly(_) => Structure::Butterfly,
            Scenario::BinaryM(_) => Structure::BinaryM,
            Scenario::BinaryButterfly(_) => Structure::BinaryButterfly,
            Scenario::WtoT(_) => Structure::WtoT,
        }
    }

    /// Value of `p`, or `None` when the structure has no such parameter.
    pub fn get(&self, p: Param) -> Option<f64> {
        use Param::*;
        match (self, p) {
            (Scenario::M(s), _) | (Scenario::BinaryM(BinaryMScenario { base: s, .. }), _) if p != Alpha => match p {
                A => Some(s.a),
                B => Some(s.b),
                C => Some(s.c),
                D => Some(s.d),
                Rho => Some(s.rho),
                _ => None,
            },
            (Scenario::Butterfly(s), _) | (Scenario::BinaryButterfly(BinaryButterflyScenario { base: s, .. }), _)
                if p != Alpha =>
            {
                match p {
                    A => Some(s.a),
                    B => Some(s.b),
                    C => Some(s.c),
                    D => Some(s.d),
                    E => Some(s.e),
                    F => Some(s.f),
                    _ => None,
                }
            }
            (Scenario::BinaryM(s), Alpha) => Some(s.alpha),
            (Scenario::BinaryButterfly(s), Alpha) => Some(s.alpha),
            (Scenario::WtoT(s), _) => match p {
                A => Some(s.a),
                B => Some(s.b),
                C => Some(s.c),
                D => Some(s.d),
                G => Some(s.g),
                Rho => Some(s.rho),
                _ => None,
            },
            _ => None,
        }
    }

    /// Builds a scenario from a full parameter assignment.
    pub fn from_params(structure: Structure, values: &BTreeMap<Param, f64>) -> Result<Self> {
        let missing: Vec<String> = structure
            .params()
            .iter()
            .filter(|p| !values.contains_key(p))
            .map(|p| p.name().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys {
                structure: structure.name().to_string(),
                keys: missing,
            });
        }
        if let Some(extra) = values.keys().find(|p| !structure.params().contains(p)) {
            return Err(Error::parse(
                0,
                format!("unknown key `{}` for structure `{structure}`", extra.name()),
            ));
        }
        let v = |p: Param| values[&p];
        use Param::*;
        Ok(match structure {
            Structure::M => MScenario::new(v(A), v(B), v(C), v(D), v(Rho)).into(),
            Structure::Butterfly => ButterflyScenario::new(v(A), v(B), v(C), v(D), v(E), v(F)).into(),
            Structure::BinaryM => BinaryMScenario {
                base: MScenario::new(v(A), v(B), v(C), v(D), v(Rho)),
                alpha: v(Alpha),
            }
            .into(),
            Structure::BinaryButterfly => BinaryButterflyScenario {
                base: ButterflyScenario::new(v(A), v(B), v(C), v(D), v(E), v(F)),
                alpha: v(Alpha),
            }
            .into(),
            Structure::WtoT => WtoTScenario::new(v(A), v(B), v(C), v(D), v(G), v(Rho)).into(),
        })
    }

    pub fn params(&self) -> BTreeMap<Param, f64> {
        self.structure()
            .params()
            .iter()
            .map(|&p| (p, self.get(p).expect("structure parameter")))
            .collect()
    }

    /// Multiplies every coefficient and `ρ` by `t`; `α` is left alone.
    pub fn scaled(&self, t: f64) -> Self {
        let mut values = self.params();
        for (p, v) in values.iter_mut() {
            if *p != Param::Alpha {
                *v *= t;
            }
        }
        Scenario::from_params(self.structure(), &values).expect("same parameter set")
    }

    /// Scenario in the line-oriented text format accepted by
    /// [`Assignments::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("structure = {}\n", self.structure());
        for (p, v) in self.params() {
            out.push_str(&format!("{} = {}\n", p.name(), v));
        }
        out
    }

    fn explained(&self) -> Explained {
        match *self {
            Scenario::M(s) | Scenario::BinaryM(BinaryMScenario { base: s, .. }) => Explained {
                m: (s.b * s.b + s.c * s.c, 2.0 * s.b * s.c * s.rho),
                t: (s.a * s.a, 0.0),
                y: (s.d * s.d, 0.0),
            },
            Scenario::Butterfly(s) | Scenario::BinaryButterfly(BinaryButterflyScenario { base: s, .. }) => {
                Explained {
                    m: (s.b * s.b + s.c * s.c, 0.0),
                    // Cov(U, M) = b, Cov(W, M) = c
                    t: (s.a * s.a + s.e * s.e, 2.0 * s.a * s.b * s.e),
                    y: (s.d * s.d + s.f * s.f, 2.0 * s.c * s.d * s.f),
                }
            }
            Scenario::WtoT(s) => Explained {
                m: (s.b * s.b + s.c * s.c, 2.0 * s.b * s.c * s.rho),
                t: (s.a * s.a + s.g * s.g, 2.0 * s.a * s.g * s.rho),
                y: (s.d * s.d, 0.0),
            },
        }
    }

    /// Noise loadings under `convention`. Fails with [`Error::NotRealizable`]
    /// when a node would need a negative noise variance.
    pub fn loadings(&self, convention: LoadingConvention) -> Result<Loadings> {
        let ex = self.explained();
        let t_name = if self.structure().is_binary() { "T*" } else { "T" };
        let one = |node: &str, (plain, cross): (f64, f64)| -> Result<f64> {
            let explained = match convention {
                LoadingConvention::UnitVariance => plain + cross,
                LoadingConvention::AsWritten => plain,
            };
            let rest = 1.0 - explained;
            if rest < -LOADING_EPS || !rest.is_finite() {
                return Err(Error::NotRealizable {
                    node: node.to_string(),
                    explained,
                });
            }
            Ok(rest.max(0.0).sqrt())
        };
        Ok(Loadings {
            m: one("M", ex.m)?,
            t: one(t_name, ex.t)?,
            y: one("Y", ex.y)?,
        })
    }

    /// Checks the scenario against the feasibility rules.
    ///
    /// Violations make the adjusted or unadjusted estimator meaningless;
    /// warnings flag scenarios where the textbook loadings would not give
    /// unit variances.
    pub fn validate(&self) -> Result<ValidationReport> {
        for (p, v) in self.params() {
            ensure_finite(p.name(), v)?;
        }
        let mut r = ValidationReport::default();
        let sq = |x: f64| x * x;
        match *self {
            Scenario::M(s) | Scenario::BinaryM(BinaryMScenario { base: s, .. }) => {
                r.at_most("a^2 <= 1", sq(s.a), 1.0);
                r.at_most("d^2 <= 1", sq(s.d), 1.0);
                r.at_most("|rho| <= 1", s.rho.abs(), 1.0);
                r.at_most("b^2 + c^2 <= 1", sq(s.b) + sq(s.c), 1.0);
                r.below("|ab + ac*rho| < 1", s.cov_tm().abs(), 1.0);
            }
            Scenario::Butterfly(s) | Scenario::BinaryButterfly(BinaryButterflyScenario { base: s, .. }) => {
                r.at_most("b^2 + c^2 <= 1", sq(s.b) + sq(s.c), 1.0);
                r.at_most("a^2 + e^2 <= 1", sq(s.a) + sq(s.e), 1.0);
                r.at_most("d^2 + f^2 <= 1", sq(s.d) + sq(s.f), 1.0);
                r.below("|ab + e| < 1", s.cov_tm().abs(), 1.0);
            }
            Scenario::WtoT(s) => {
                r.at_most("a^2 + g^2 <= 1", sq(s.a) + sq(s.g), 1.0);
                r.at_most("b^2 + c^2 <= 1", sq(s.b) + sq(s.c), 1.0);
                r.at_most("d^2 <= 1", sq(s.d), 1.0);
                r.at_most("|rho| <= 1", s.rho.abs(), 1.0);
                r.below("|Cov(T, M)| < 1", s.cov_tm().abs(), 1.0);
            }
        }
        if let Scenario::BinaryM(BinaryMScenario { alpha, .. })
        | Scenario::BinaryButterfly(BinaryButterflyScenario { alpha, .. }) = *self
        {
            r.at_most("|alpha| <= 8", alpha.abs(), ALPHA_LIMIT);
        }
        if r.violations.is_empty() {
            self.loading_warnings(&mut r);
        }
        Ok(r)
    }

    fn loading_warnings(&self, r: &mut ValidationReport) {
        let ex = self.explained();
        let t_name = if self.structure().is_binary() { "T*" } else { "T" };
        for (node, (plain, cross)) in [("M", ex.m), (t_name, ex.t), ("Y", ex.y)] {
            if cross == 0.0 {
                continue;
            }
            r.warnings.push(format!(
                "loading sqrt(1 - {plain:.6}) gives Var({node}) = {:.6}; unit-variance loading uses explained variance {:.6}",
                1.0 + cross,
                plain + cross
            ));
            if plain + cross > 1.0 + LOADING_EPS {
                r.warnings.push(format!(
                    "{node} is not realizable with unit variance (explained variance {:.6} > 1); closed forms only",
                    plain + cross
                ));
            }
        }
    }

    /// Validates and turns any violation into [`Error::Invalid`].
    pub fn validated(&self) -> Result<ValidationReport> {
        let report = self.validate()?;
        if report.is_valid() {
            Ok(report)
        } else {
            Err(Error::Invalid(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: &'static str,
    /// Amount by which the constrained quantity overshoots its bound
    /// (zero for a strict bound hit exactly).
    pub margin: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }

    fn at_most(&mut self, constraint: &'static str, lhs: f64, bound: f64) {
        if lhs > bound {
            self.violations.push(Violation {
                constraint,
                margin: lhs - bound,
            });
        }
    }

    fn below(&mut self, constraint: &'static str, lhs: f64, bound: f64) {
        if lhs >= bound {
            self.violations.push(Violation {
                constraint,
                margin: lhs - bound,
            });
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} violated by {:.6}", v.constraint, v.margin))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Feasible interval of the common coefficient when all six butterfly
/// coefficients are equal: `(−√2/2, (√5 − 1)/2)`.
pub fn symmetric_butterfly_domain() -> (f64, f64) {
    (-std::f64::consts::FRAC_1_SQRT_2, (5f64.sqrt() - 1.0) / 2.0)
}

/// Key/value assignments read from a scenario file, before they are turned
/// into a [`Scenario`]. Later assignments override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Assignments {
    structure: Option<Structure>,
    values: BTreeMap<Param, f64>,
}

impl Assignments {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Assignments::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected `key = value`, got `{line}`")))?;
            out.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Parse { line: 0, message } => Error::Parse { line: idx + 1, message },
                other => other,
            })?;
        }
        Ok(out)
    }

    /// Applies one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "structure" {
            self.structure = Some(value.parse()?);
            return Ok(());
        }
        let param: Param = key.parse()?;
        let v: f64 = value
            .parse()
            .map_err(|_| Error::parse(0, format!("value of `{key}` is not a number: `{value}`")))?;
        self.values.insert(param, v);
        Ok(())
    }

    pub fn build(&self) -> Result<Scenario> {
        let structure = self
            .structure
            .ok_or_else(|| Error::parse(0, "missing `structure = ...` directive"))?;
        Scenario::from_params(structure, &self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_m_is_valid() {
        let r = Scenario::from(MScenario::uniform(0.2, 0.0)).validate().unwrap();
        assert!(r.is_valid());
        assert!(!r.has_warnings());
    }

    #[test]
    fn butterfly_all_07_violates_denominator_only() {
        let r = Scenario::from(ButterflyScenario::uniform(0.7)).validate().unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].constraint, "|ab + e| < 1");
        assert!((r.violations[0].margin - 0.19).abs() < 1e-12);
    }

    #[test]
    fn large_m_violates_loading() {
        let r = Scenario::from(MScenario::uniform(0.8, 0.0)).validate().unwrap();
        assert!(!r.is_valid());
        let v = r.violations.iter().find(|v| v.constraint == "b^2 + c^2 <= 1").unwrap();
        assert!((v.margin - 0.28).abs() < 1e-12);
    }

    #[test]
    fn rho_out_of_range_is_named() {
        let r = Scenario::from(MScenario::new(0.2, 0.2, 0.2, 0.2, 1.5))
            .validate()
            .unwrap();
        assert!(r.violations.iter().any(|v| v.constraint == "|rho| <= 1"));
        assert!(r.to_string().contains("|rho| <= 1"));
    }

    #[test]
    fn non_finite_is_domain_error() {
        let s = Scenario::from(MScenario::new(f64::NAN, 0.2, 0.2, 0.2, 0.0));
        assert!(matches!(s.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn correlated_parents_warn_but_pass() {
        let s = Scenario::from(MScenario::new(0.3, 0.4, 0.5, 0.3, 0.2));
        let r = s.validate().unwrap();
        assert!(r.is_valid());
        assert!(r.warnings[0].contains("Var(M) = 1.080000"));
        let lw = s.loadings(LoadingConvention::AsWritten).unwrap();
        let lu = s.loadings(LoadingConvention::UnitVariance).unwrap();
        assert!((lw.m - (1.0f64 - 0.41).sqrt()).abs() < 1e-15);
        assert!((lu.m - (1.0f64 - 0.49).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unrealizable_is_warning_and_loading_error() {
        let s = Scenario::from(ButterflyScenario::uniform(0.6));
        let r = s.validate().unwrap();
        assert!(r.is_valid());
        assert!(r.warnings.iter().any(|w| w.contains("not realizable")));
        assert!(matches!(
            s.loadings(LoadingConvention::UnitVariance),
            Err(Error::NotRealizable { .. })
        ));
        assert!(s.loadings(LoadingConvention::AsWritten).is_ok());
    }

    #[test]
    fn alpha_limit() {
        let s = Scenario::from(BinaryMScenario {
            base: MScenario::uniform(0.2, 0.0),
            alpha: 9.0,
        });
        let r = s.validate().unwrap();
        assert_eq!(r.violations[0].constraint, "|alpha| <= 8");
    }

    #[test]
    fn symmetric_domain_endpoints() {
        let (lo, hi) = symmetric_butterfly_domain();
        assert_eq!(lo, -(2f64.sqrt()) / 2.0);
        assert_eq!(hi, (-1.0 + 5f64.sqrt()) / 2.0);
        assert!(Scenario::from(ButterflyScenario::uniform(0.0))
            .validate()
            .unwrap()
            .is_valid());
        // just inside / outside each end
        let ok = |x: f64| {
            Scenario::from(ButterflyScenario::uniform(x))
                .validate()
                .unwrap()
                .is_valid()
        };
        assert!(ok(lo + 1e-9) && ok(hi - 1e-9));
        assert!(!ok(lo - 1e-9) && !ok(hi + 1e-9));
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let text = "# pure M\nstructure = m\na = 0.2\nb = 0.2 # inline\nc = 0.2\nd = 0.2\nrho = 0\n";
        let s = Assignments::parse(text).unwrap().build().unwrap();
        assert_eq!(s, MScenario::uniform(0.2, 0.0).into());
        assert_eq!(Assignments::parse(&s.to_text()).unwrap().build().unwrap(), s);

        let err = Assignments::parse("structure = m\nzeta = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = Assignments::parse("structure = butterfly\na = 0.1\n")
            .unwrap()
            .build()
            .unwrap_err();
        match err {
            Error::MissingKeys { keys, .. } => assert_eq!(keys, ["b", "c", "d", "e", "f"]),
            other => panic!("{other}"),
        }

        let err = Assignments::parse("structure = m\na=0.1\nb=0\nc=0\nd=0\nrho=0\ne=0.1\n")
            .unwrap()
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("unknown key `e`"));
    }

    fn any_scenario() -> impl Strategy<Value = Scenario> {
        let coef = || -1.0f64..1.0;
        prop_oneof![
            (coef(), coef(), coef(), coef(), coef())
                .prop_map(|(a, b, c, d, rho)| MScenario::new(a, b, c, d, rho).into()),
            (coef(), coef(), coef(), coef(), coef(), coef())
                .prop_map(|(a, b, c, d, e, f)| ButterflyScenario::new(a, b, c, d, e, f).into()),
            (coef(), coef(), coef(), coef(), coef(), -3.0f64..3.0).prop_map(|(a, b, c, d, rho, alpha)| {
                BinaryMScenario {
                    base: MScenario::new(a, b, c, d, rho),
                    alpha,
                }
                .into()
            }),
            (coef(), coef(), coef(), coef(), coef(), coef(), -3.0f64..3.0).prop_map(|(a, b, c, d, e, f, alpha)| {
                BinaryButterflyScenario {
                    base: ButterflyScenario::new(a, b, c, d, e, f),
                    alpha,
                }
                .into()
            }),
            (coef(), coef(), coef(), coef(), coef(), coef())
                .prop_map(|(a, b, c, d, g, rho)| WtoTScenario::new(a, b, c, d, g, rho).into()),
        ]
    }

    proptest! {
        #[test]
        fn validity_is_monotone_under_shrinkage(s in any_scenario(), t in 0.0f64..=1.0) {
            if s.validate().unwrap().is_valid() {
                prop_assert!(s.scaled(t).validate().unwrap().is_valid());
            }
        }

        #[test]
        fn realizability_is_monotone_under_shrinkage(s in any_scenario(), t in 0.0f64..=1.0) {
            if s.validate().unwrap().is_valid() && s.loadings(LoadingConvention::UnitVariance).is_ok() {
                prop_assert!(s.scaled(t).loadings(LoadingConvention::UnitVariance).is_ok());
            }
        }
    }
}
