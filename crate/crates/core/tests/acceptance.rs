//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use collider_lab::bias::{bias_ratio, binary_m_bias, m_bias_ratio};
use collider_lab::kernel::{bernoulli_covariance, eta, std_normal_pdf, truncated_normal_diff};
use collider_lab::monte_carlo::{estimate_both, simulate_bernoulli_cov, simulate_truncated_diff, SimConfig};
use collider_lab::scenario::{symmetric_butterfly_domain, LoadingConvention};
use collider_lab::sem::{engine_bias, ols_coefficient, two_regressor_coefficient, CovMatrix};
use collider_lab::sweep::{figure_catalog, region_stats, run_sweep, Axis, GridSpec};
use collider_lab::{
    closed_form_bias, closed_form_bias_with, BinaryButterflyScenario, BinaryFormula, BinaryMScenario,
    ButterflyScenario, Estimator, Execution, MScenario, Param, Scenario, Structure, WtoTScenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn round(x: f64, places: i32) -> f64 {
    let k = 10f64.powi(places);
    (x * k).round() / k
}

fn cf(s: &Scenario, e: Estimator) -> Result<f64, String> {
    closed_form_bias(s, e).map(|r| r.value).map_err(|e| e.to_string())
}

fn engine(s: &Scenario, e: Estimator) -> Result<f64, String> {
    engine_bias(s, e).map(|r| r.value).map_err(|e| e.to_string())
}

/// Closed form, covariance engine and simulation must agree on `s`.
fn three_way(s: &Scenario, n: usize, seed: u64) -> Result<(), String> {
    let sims = estimate_both(s, &SimConfig::new(n, seed)).map_err(|e| e.to_string())?;
    for (est, sim) in Estimator::BOTH.into_iter().zip(sims) {
        let c = cf(s, est)?;
        let g = engine(s, est)?;
        ensure((c - g).abs() <= 1e-10, || {
            format!("{}: engine {g} vs closed form {c}", est.name())
        })?;
        let z = (sim.bias_estimate - c) / sim.std_error;
        ensure(z.abs() <= 3.0, || {
            format!(
                "{}: simulated {} (se {}) vs closed form {c}, z = {z:.2}",
                est.name(),
                sim.bias_estimate,
                sim.std_error
            )
        })?;
    }
    Ok(())
}

fn pure_m_bias_values() -> Check {
    let start = Instant::now();
    for (x, expected) in [(0.2, -0.0016), (0.3, -0.0082)] {
        let s: Scenario = MScenario::uniform(x, 0.0).into();
        let v = cf(&s, Estimator::Adjusted)?;
        ensure(round(v, 4) == expected, || format!("a = {x}: adjusted bias {v}"))?;
        three_way(&s, 1_000_000, 2024)?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("-0.0016 and -0.0082 in {:.2?}", elapsed))
}

fn ratio_value() -> Check {
    let mut values = Vec::new();
    for d in [0.5, 0.1, 0.3, 0.6] {
        let s = MScenario::new(0.2, 0.2, 0.2, d, 0.2);
        let r = m_bias_ratio(&s).map_err(|e| e.to_string())?;
        let q = bias_ratio(&s.into(), BinaryFormula::Corrected).map_err(|e| e.to_string())?;
        let scen: Scenario = s.into();
        let g = engine(&scen, Estimator::Adjusted)?.abs() / engine(&scen, Estimator::Unadjusted)?.abs();
        ensure(round(r, 3) == 0.714, || format!("d = {d}: ratio {r}"))?;
        ensure((r - q).abs() <= 1e-12 && (r - g).abs() <= 1e-10, || {
            format!("d = {d}: ratio {r}, bias quotient {q}, engine quotient {g}")
        })?;
        values.push(q);
    }
    let spread = values.iter().fold(0.0f64, |m, v| m.max((v - values[0]).abs()));
    ensure(spread <= 1e-12, || format!("ratio depends on d (spread {spread})"))?;
    Ok(format!("{:.6}, d-free to {spread:.1e}", values[0]))
}

fn butterfly_values() -> Check {
    let s: Scenario = ButterflyScenario::uniform(0.2).into();
    let u = cf(&s, Estimator::Unadjusted)?;
    let a = cf(&s, Estimator::Adjusted)?;
    ensure(round(u, 3) == 0.056, || format!("unadjusted {u}"))?;
    ensure(round(a, 4) == -0.0017, || format!("adjusted {a}"))?;
    three_way(&s, 1_000_000, 7)?;
    Ok(format!("unadjusted {u:.4}, adjusted {a:.5}"))
}

fn region_fractions() -> Check {
    let start = Instant::now();
    let targets = [("fig5b", 0.712), ("fig8b", 0.744), ("fig5a", 0.749)];
    let mut report = Vec::new();
    for (id, target) in targets {
        let mut fractions = Vec::new();
        for points in [1000, 500] {
            let fig = figure_catalog(points).into_iter().find(|f| f.id == id).unwrap();
            let table = run_sweep(&fig.grid).map_err(|e| e.to_string())?;
            let stats = region_stats(&table, fig.predicate).map_err(|e| e.to_string())?;
            fractions.push(stats.fraction());
        }
        let (fine, coarse) = (fractions[0], fractions[1]);
        ensure((fine - target).abs() <= 0.02, || format!("{id}: {fine:.4} vs {target}"))?;
        ensure((fine - coarse).abs() <= 0.01, || {
            format!("{id}: 1000 vs 500 points: {fine:.4} vs {coarse:.4}")
        })?;
        report.push(format!("{id} {:.1}%", 100.0 * fine));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {:.2?}", report.join(", "), elapsed))
}

fn binary_formula_resolution() -> Check {
    let base = |x: f64, rho: f64| MScenario::uniform(x, rho);
    let cases = [
        (base(0.4, -0.4), 0.0),
        (base(0.4, -0.3), 0.0),
        (base(0.4, -0.2), 0.0),
        (base(0.4, -0.1), 0.0),
        (base(0.4, 0.1), 0.0),
        (base(0.4, 0.2), 0.0),
        (base(0.4, 0.3), 0.0),
        (base(0.4, 0.4), 0.0),
        (MScenario::new(0.5, 0.3, 0.4, 0.6, 0.2), 0.5),
        (MScenario::new(0.3, 0.5, 0.3, 0.5, -0.3), -0.7),
    ];
    let mut worst_literal = 0.0f64;
    for (i, (m, alpha)) in cases.into_iter().enumerate() {
        let s = BinaryMScenario { base: m, alpha };
        let scen: Scenario = s.into();
        let sims = estimate_both(&scen, &SimConfig::new(10_000_000, 100 + i as u64)).map_err(|e| e.to_string())?;
        for (est, sim) in Estimator::BOTH.into_iter().zip(sims) {
            let v = binary_m_bias(&s, est, BinaryFormula::Corrected)
                .map_err(|e| e.to_string())?
                .value;
            let z = (sim.bias_estimate - v) / sim.std_error;
            ensure(z.abs() <= 3.0, || format!("case {i} {}: z = {z:.2}", est.name()))?;
        }
        let literal = binary_m_bias(&s, Estimator::Adjusted, BinaryFormula::StrayRho)
            .map_err(|e| e.to_string())?
            .value;
        let z = ((sims[1].bias_estimate - literal) / sims[1].std_error).abs();
        worst_literal = worst_literal.max(z);
    }
    ensure(worst_literal > 3.0, || {
        format!("stray-rho variant was not rejected (max |z| = {worst_literal:.2})")
    })?;

    for (m, alpha) in [
        (MScenario::new(0.3, 0.4, 0.5, 0.6, 0.0), 0.0),
        (MScenario::new(-0.2, 0.7, 0.1, 0.9, 0.0), 1.3),
        (MScenario::new(0.6, -0.5, 0.4, -0.3, 0.0), -2.0),
    ] {
        let s = BinaryMScenario { base: m, alpha };
        let v = binary_m_bias(&s, Estimator::Adjusted, BinaryFormula::Corrected)
            .map_err(|e| e.to_string())?
            .value;
        let (a, b, c, d) = (m.a, m.b, m.c, m.d);
        let h = eta(alpha).unwrap();
        let special = -a * b * c * d * h / (1.0 - (a * b).powi(2) * std_normal_pdf(alpha).unwrap() * h);
        ensure((v - special).abs() <= 4.0 * f64::EPSILON * special.abs(), || {
            format!("rho = 0 limit {v} vs special case {special}")
        })?;
    }
    Ok(format!(
        "10 scenarios within 3 SE; stray-rho variant max |z| = {worst_literal:.1}"
    ))
}

fn normal_identities() -> Check {
    let pairs = [(0.5, 0.0), (-0.3, 0.7), (0.8, -1.2), (0.2, 1.5), (-0.9, -0.4)];
    for (i, (r, z)) in pairs.into_iter().enumerate() {
        let exact = truncated_normal_diff(r, z).map_err(|e| e.to_string())?;
        let sim = simulate_truncated_diff(r, z, 10_000_000, 500 + i as u64, Execution::Parallel)
            .map_err(|e| e.to_string())?;
        let zs = (sim.value - exact) / sim.std_error;
        ensure(zs.abs() <= 3.0, || {
            format!("truncated difference at ({r}, {z}): z = {zs:.2}")
        })?;

        let exact = bernoulli_covariance(r, z).map_err(|e| e.to_string())?;
        let sim =
            simulate_bernoulli_cov(r, z, 10_000_000, 600 + i as u64, Execution::Parallel).map_err(|e| e.to_string())?;
        let zs = (sim.value - exact) / sim.std_error;
        ensure(zs.abs() <= 3.0, || {
            format!("Bernoulli covariance at ({r}, {z}): z = {zs:.2}")
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    let mut worst = 0.0f64;
    while checked < 10_000 {
        let f: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut data = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                data[i * 3 + j] = (0..4).map(|k| f[i * 4 + k] * f[j * 4 + k]).sum();
            }
        }
        let cov = CovMatrix::new(vec!["Y".into(), "T".into(), "M".into()], data.clone()).unwrap();
        let (vt, vm, tm) = (data[4], data[8], data[5]);
        if vt * vm - tm * tm <= 1e-3 * vt * vm {
            continue;
        }
        let closed = two_regressor_coefficient(&cov, "Y", "T", "M").map_err(|e| e.to_string())?;
        let solved = ols_coefficient(&cov, "Y", "T", &["M"]).map_err(|e| e.to_string())?;
        worst = worst.max((closed - solved).abs() / closed.abs().max(1.0));
        checked += 1;
    }
    ensure(worst <= 1e-12, || format!("two-regressor formula off by {worst:e}"))?;

    let (lo, hi) = symmetric_butterfly_domain();
    ensure(lo == -(2f64.sqrt() / 2.0) && hi == (-1.0 + 5f64.sqrt()) / 2.0, || {
        format!("domain ({lo}, {hi})")
    })?;
    let valid = |x: f64| {
        Scenario::from(ButterflyScenario::uniform(x))
            .validate()
            .unwrap()
            .is_valid()
    };
    ensure(valid(lo + 1e-9) && !valid(lo - 1e-9), || {
        "lower endpoint is not the boundary".into()
    })?;
    ensure(valid(hi - 1e-9) && !valid(hi + 1e-9), || {
        "upper endpoint is not the boundary".into()
    })?;
    Ok(format!(
        "5 (r, z) pairs, {checked} covariances (max rel. gap {worst:.1e}), exact endpoints"
    ))
}

fn sensitivity_claims() -> Check {
    let fig = figure_catalog(1000).into_iter().find(|f| f.id == "fig7b").unwrap();
    let table = run_sweep(&fig.grid).map_err(|e| e.to_string())?;
    let mut feasible = 0;
    for (i, row) in table.rows.iter().enumerate() {
        if let (Some(u), Some(a)) = (row.bias_unadj, row.bias_adj) {
            feasible += 1;
            ensure(a.abs() <= u.abs(), || {
                format!("W->T line, a = {}: |{a}| > |{u}|", fig.grid.point(i)[0])
            })?;
        }
    }
    ensure(feasible > 0, || "no feasible point on the W->T line".into())?;

    let mut ratios = 0;
    for zero in [Param::B, Param::C] {
        let free = if zero == Param::B { Param::C } else { Param::B };
        let grid = GridSpec::new(
            Structure::M,
            vec![
                Axis::symmetric("a", 1.0, 101),
                Axis::symmetric(free.name(), 1.0, 101),
                Axis::symmetric("rho", 1.0, 100),
            ],
        )
        .tie(0, 1.0, &[Param::A])
        .tie(1, 1.0, &[free])
        .tie(2, 1.0, &[Param::Rho])
        .fix(zero, 0.0)
        .fix(Param::D, 0.5);
        let table = run_sweep(&grid).map_err(|e| e.to_string())?;
        for (i, row) in table.rows.iter().enumerate() {
            if let Some(r) = row.ratio {
                ratios += 1;
                ensure(r <= 1.0 + 1e-12, || {
                    format!("{} = 0, point {:?}: ratio {r}", zero.name(), grid.point(i))
                })?;
            }
        }
    }
    Ok(format!(
        "{feasible} points on the W->T line, {ratios} ratios with b = 0 or c = 0"
    ))
}

fn random_scenario(structure: Structure, rng: &mut ChaCha8Rng) -> Scenario {
    let mut u = || rng.random_range(-0.9..0.9);
    let m = MScenario::new(u(), u(), u(), u(), u());
    let b = ButterflyScenario::new(u(), u(), u(), u(), u(), u());
    match structure {
        Structure::M => m.into(),
        Structure::Butterfly => b.into(),
        Structure::BinaryM => BinaryMScenario {
            base: m,
            alpha: 2.0 * u(),
        }
        .into(),
        Structure::BinaryButterfly => BinaryButterflyScenario {
            base: b,
            alpha: 2.0 * u(),
        }
        .into(),
        Structure::WtoT => WtoTScenario::new(u(), u(), u(), u(), u(), u()).into(),
    }
}

fn well_conditioned(s: &Scenario) -> bool {
    let Ok(report) = s.validate() else { return false };
    if !report.is_valid() || s.loadings(LoadingConvention::UnitVariance).is_err() {
        return false;
    }
    let (cov_tm, alpha) = match *s {
        Scenario::M(m) => (m.cov_tm(), None),
        Scenario::Butterfly(b) => (b.cov_tm(), None),
        Scenario::BinaryM(m) => (m.base.cov_tm(), Some(m.alpha)),
        Scenario::BinaryButterfly(b) => (b.base.cov_tm(), Some(b.alpha)),
        Scenario::WtoT(w) => (w.cov_tm(), None),
    };
    let shrink = alpha.map_or(1.0, |a| std_normal_pdf(a).unwrap() * eta(a).unwrap());
    1.0 - cov_tm * cov_tm * shrink > 0.05
}

fn cross_engine() -> Check {
    let catalog: [Scenario; 5] = [
        MScenario::new(0.3, 0.4, 0.5, 0.6, 0.2).into(),
        ButterflyScenario::uniform(0.2).into(),
        BinaryMScenario {
            base: MScenario::uniform(0.3, 0.2),
            alpha: 0.0,
        }
        .into(),
        BinaryButterflyScenario {
            base: ButterflyScenario::uniform(0.2),
            alpha: 0.5,
        }
        .into(),
        WtoTScenario::new(0.3, 0.3, 0.3, 0.3, 0.3, 0.0).into(),
    ];
    let mut worst = 0.0f64;
    let mut compare = |s: &Scenario| -> Result<(), String> {
        for est in Estimator::BOTH {
            let c = closed_form_bias_with(s, est, BinaryFormula::Corrected)
                .map_err(|e| e.to_string())?
                .value;
            let g = engine(s, est)?;
            worst = worst.max((c - g).abs());
            ensure((c - g).abs() <= 1e-10, || {
                format!("{s:?} {}: closed form {c}, engine {g}", est.name())
            })?;
        }
        Ok(())
    };
    for s in &catalog {
        compare(s)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let structures = [
        Structure::M,
        Structure::Butterfly,
        Structure::BinaryM,
        Structure::BinaryButterfly,
        Structure::WtoT,
    ];
    for structure in structures {
        let mut accepted = 0;
        while accepted < 10_000 {
            let s = random_scenario(structure, &mut rng);
            if well_conditioned(&s) {
                compare(&s)?;
                accepted += 1;
            }
        }
    }
    Ok(format!(
        "5 catalog scenarios and 5 x 10^4 random draws, max gap {worst:.1e}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("pure M-bias point values", pure_m_bias_values),
        ("ratio value 0.714, free of d", ratio_value),
        ("butterfly point values", butterfly_values),
        ("captioned region fractions", region_fractions),
        ("binary M formula resolution", binary_formula_resolution),
        ("normal-theory identities", normal_identities),
        ("sensitivity claims (W->T line, b = 0 or c = 0)", sensitivity_claims),
        ("cross-engine equivalence", cross_engine),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({:.2?})", i + 1, start.elapsed()),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{}] {name}: {reason}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
