//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{Matrix2, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superres_core::azimuth::{axis_distance, centered_angle, gaussian_enhancement_ratio, optimal_azimuth};
use superres_core::direct::mle::rayleigh_curse_experiment;
use superres_core::direct::{
    cfim_numeric, cfim_smallr, precision_r_direct, precision_r_direct_numeric, resolve_prefactor, smallr_coeffs, CfimOptions,
    IntensityField,
};
use superres_core::oracle::{self, OracleOptions, PhaseModulated};
use superres_core::psf::{discretize_gaussian, make_gaussian};
use superres_core::qfim::{self, precision_alpha_smallr, quantum_limits};
use superres_core::scan::{distance_limit_axes, scan_distance_limit};
use superres_core::verify::{grid_vs_analytic, max_relative_difference, oracle_scene_grid, relative_difference, ABSOLUTE_FLOOR};
use superres_core::{GaussianPsf, Psf, Result, SceneParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn default_psf() -> Psf {
    make_gaussian(1.0, 1.4, 0.4).unwrap()
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> GaussianPsf {
    GaussianPsf::new(rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(-0.9..0.9)).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn log_range(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn oracle_opts() -> OracleOptions {
    OracleOptions::default()
}

fn qfim_equivalence() -> Result<Outcome> {
    let psf = default_psf();
    let mut worst = 0.0f64;
    for scene in oracle_scene_grid() {
        let closed = quantum_limits(&psf, &scene)?.qfim;
        let orc = oracle::qfim_oracle(&psf, &scene, &oracle_opts())?;
        worst = worst.max(max_relative_difference(&orc.fisher, &closed));
    }
    Ok(outcome(worst <= 1e-6, format!("27 scenes, max entrywise rel err {worst:.2e} (tol 1e-6)")))
}

fn eigenvalues() -> Result<Outcome> {
    let psf = default_psf();
    let mut worst = 0.0f64;
    for scene in oracle_scene_grid() {
        let delta = quantum_limits(&psf, &scene)?.geom.delta;
        let es = qfim::eigensystem(delta, scene.epsilon)?;
        let ev = oracle::subspace_eigenvalues(&psf, &scene, &oracle_opts())?;
        worst = worst.max((ev[0] - es.lambda2).abs()).max((ev[1] - es.lambda1).abs());
    }
    let ev = oracle::subspace_eigenvalues(&psf, &SceneParams::new(0.0, 0.3, 0.4, 1.0), &oracle_opts())?;
    let r0 = (ev[0] - 1.0).abs().max(ev[1..].iter().fold(0.0f64, |m, v| m.max(v.abs())));
    Ok(outcome(
        worst <= 1e-10 && r0 <= 1e-12,
        format!("grid max abs err {worst:.2e} (tol 1e-10); r=0 spectrum err {r0:.2e} (tol 1e-12)"),
    ))
}

fn distance_limit() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let psf = Psf::Gaussian(random_gaussian(&mut rng));
        let scene = SceneParams::new(1e-4, rng.random_range(0.0..PI), rng.random_range(0.0..0.9), 1.0);
        let lim = quantum_limits(&psf, &scene)?;
        worst = worst.max(relative_difference(lim.h_r.value, lim.h_r_limit));
    }
    Ok(outcome(worst <= 1e-4, format!("20 random PSFs at r=1e-4, max rel err {worst:.2e} (tol 1e-4)")))
}

fn scan_structure() -> Result<Outcome> {
    let t = Instant::now();
    let psf = default_psf();
    let (alphas, eps) = distance_limit_axes();
    let grid = scan_distance_limit(&psf.base_moments()?, &alphas, &eps, 1.0)?;
    let elapsed = t.elapsed().as_secs_f64();
    let (i, j) = grid.argmax();
    let expected = optimal_azimuth(&psf.base_moments()?, 0.0, 1.0)?.alpha_opt;
    let step = alphas[1] - alphas[0];
    let alpha_ok = axis_distance(alphas[i], expected) <= step;
    let mid = eps.len() / 2;
    let monotone = (0..alphas.len()).all(|a| {
        (mid..eps.len() - 1).all(|e| grid.get(a, e + 1) < grid.get(a, e))
            && (1..=mid).all(|e| grid.get(a, e - 1) < grid.get(a, e))
    });
    Ok(outcome(
        eps[j].abs() < 1e-12 && alpha_ok && monotone && elapsed < 10.0,
        format!(
            "argmax at alpha={:.4} (expected {:.4}, step {step:.4}), eps={:.2}; strictly decreasing in |eps|: {monotone}; {elapsed:.3} s",
            alphas[i],
            centered_angle(expected),
            eps[j]
        ),
    ))
}

fn minor_axis() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut angle, mut xi_err, mut iso_err) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let mut g = random_gaussian(&mut rng);
        if k % 5 == 0 {
            g = GaussianPsf::new(g.sigma1(), g.sigma2(), 0.0)?;
        }
        let [sxx, sxy, syy] = g.covariance();
        let eig = SymmetricEigen::new(Matrix2::new(sxx, sxy, sxy, syy));
        let m = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
        let v = eig.eigenvectors.column(m);
        let minor = v[1].atan2(v[0]);
        let ext = optimal_azimuth(&Psf::Gaussian(g).base_moments()?, 0.0, 1.0)?;
        angle = angle.max(axis_distance(ext.alpha_opt, minor));
        xi_err = xi_err.max(relative_difference(ext.xi, gaussian_enhancement_ratio(&g)));
        if g.beta() == 0.0 {
            let (a, b) = (g.sigma1().powi(2), g.sigma2().powi(2));
            iso_err = iso_err.max(relative_difference(ext.xi, a.max(b) / a.min(b)));
        }
    }
    Ok(outcome(
        angle <= 1e-8 && xi_err <= 1e-10 && iso_err <= 1e-12,
        format!("50 PSFs: axis err {angle:.2e} rad (tol 1e-8), xi rel err {xi_err:.2e} (tol 1e-10), beta=0 xi err {iso_err:.2e} (tol 1e-12)"),
    ))
}

fn azimuth_decay() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rs = log_range(1e-3, 1e-2, 6);
    let (mut slope_err, mut floor_ratio, mut with_w, mut without_w) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let psf = Psf::Gaussian(random_gaussian(&mut rng));
        let (a, e) = (rng.random_range(0.0..PI), rng.random_range(0.2..0.9));
        let h = |r: f64| quantum_limits(&psf, &SceneParams::new(r, a, e, 1.0)).map(|l| l.h_alpha.value);
        let hs = rs.iter().map(|&r| h(r)).collect::<Result<Vec<_>>>()?;
        slope_err = slope_err.max((loglog_slope(&rs, &hs) - 2.0).abs());
        floor_ratio = floor_ratio.max(h(1e-6)? / h(1.0)?);
        let lead = precision_alpha_smallr(&psf.base_moments()?, 1e-3, a, e, 1.0);
        with_w = with_w.max(relative_difference(hs[0], lead));
        without_w = without_w.max(relative_difference(hs[0], lead / (1.0 - e * e)));
    }
    let form = if with_w < without_w { "with (1-eps^2)" } else { "without (1-eps^2)" };
    Ok(outcome(
        slope_err <= 0.01 && floor_ratio < 1e-10 && with_w.min(without_w) < 1e-4,
        format!(
            "10 scenes: max |slope-2| {slope_err:.2e}; H(1e-6)/H(1) {floor_ratio:.2e}; leading form {form} (rel err {:.2e} vs {:.2e})",
            with_w.min(without_w),
            with_w.max(without_w)
        ),
    ))
}

fn direct_curse() -> Result<Outcome> {
    let psf = make_gaussian(1.0, 1.0, 0.0)?;
    let field = IntensityField::new(&psf)?;
    let k = smallr_coeffs(&field)?;
    let opts = CfimOptions::default();
    let (a, e) = (0.3, 0.2);
    let rs = log_range(1e-3, 1e-2, 4);
    let hs = rs
        .iter()
        .map(|&r| precision_r_direct_numeric(&SceneParams::new(r, a, e, 1.0), &field, &opts))
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(&rs, &hs);
    let mut worst = 0.0f64;
    let mut matched = Vec::new();
    for &r in &rs {
        let res = resolve_prefactor(&SceneParams::new(r, a, e, 1.0), &field, &k, &opts)?;
        worst = worst.max(res.relative_error);
        matched.push(res.matched);
    }
    let sixteenth = matched.iter().all(|&m| m == 1.0 / 16.0);
    Ok(outcome(
        (slope - 2.0).abs() <= 0.01 && worst <= 0.01 && sixteenth,
        format!(
            "Gaussian(1,1,0): slope {slope:.4}; prefactor {} wins at every r, max rel err {worst:.2e} (tol 1e-2)",
            if sixteenth { "1/16" } else { "mixed" }
        ),
    ))
}

fn smallr_error(r: f64, field: &IntensityField) -> Result<f64> {
    let scene = SceneParams::new(r, 0.3, 0.2, 1.0);
    let numeric = cfim_numeric(&scene, field, &CfimOptions::default())?;
    let small = cfim_smallr(&scene, &smallr_coeffs(field)?);
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let (n, s) = (numeric.get(i, j), small.get(i, j));
            if n.abs() > ABSOLUTE_FLOOR {
                worst = worst.max(relative_difference(s, n));
            }
        }
    }
    Ok(worst)
}

fn smallr_expansion() -> Result<Outcome> {
    let field = IntensityField::new(&make_gaussian(1.0, 1.0, 0.0)?)?;
    let (e1, e2) = (smallr_error(0.1, &field)?, smallr_error(0.05, &field)?);
    let ratio = e1 / e2;
    Ok(outcome(
        (ratio - 4.0).abs() <= 0.5,
        format!("max rel err {e1:.3e} at r=0.1, {e2:.3e} at r=0.05; ratio {ratio:.3} (target 4 +/- 0.5)"),
    ))
}

fn rotation_invariance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = random_gaussian(&mut rng);
        let scene = SceneParams::new(rng.random_range(0.05..2.0), rng.random_range(0.0..PI), rng.random_range(-0.9..0.9), 1.0)
            .with_centroid(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let theta = rng.random_range(-PI..PI);
        let h = quantum_limits(&Psf::Gaussian(g), &scene)?.h_r.value;
        let (s, c) = theta.sin_cos();
        let rotated = SceneParams { alpha: scene.alpha + theta, ..scene }
            .with_centroid(c * scene.centroid_x - s * scene.centroid_y, s * scene.centroid_x + c * scene.centroid_y);
        let hr = quantum_limits(&Psf::Gaussian(g.rotated(theta)), &rotated)?.h_r.value;
        worst = worst.max(relative_difference(hr, h));
    }
    Ok(outcome(worst <= 1e-9, format!("20 random triples, max rel err {worst:.2e} (tol 1e-9)")))
}

fn sld_saturability() -> Result<Outcome> {
    let psf = default_psf();
    let mut worst = 0.0f64;
    for scene in oracle_scene_grid() {
        worst = worst.max(qfim::sld_residual(&psf, &scene, &oracle_opts())?);
    }
    let control = PhaseModulated { psf, strength: 0.5 };
    let neg = qfim::sld_residual(&control, &SceneParams::new(0.5, 1.0, 0.3, 1.0), &oracle_opts())?;
    Ok(outcome(
        worst < 1e-8 && neg > 1e-3,
        format!("real PSF max residual {worst:.2e} (tol 1e-8); odd-phase control {neg:.3e} (bound 1e-3)"),
    ))
}

fn monte_carlo() -> Result<Outcome> {
    let t = Instant::now();
    let psf = make_gaussian(1.0, 1.0, 0.0)?;
    let table = rayleigh_curse_experiment(&psf, 0.0, 0.0, &[0.2, 2.0], 100_000, 200, 2024)?;
    let elapsed = t.elapsed().as_secs_f64();
    let (near, far) = (&table.rows[0], &table.rows[1]);
    let attain = far.empirical_var / far.crb_var;
    let curse = near.empirical_var / far.empirical_var;
    Ok(outcome(
        (0.85..=1.15).contains(&attain) && curse >= 3.0 && elapsed < 300.0,
        format!(
            "r=2: var/CRB {attain:.3} ({}/{} converged); var(0.2)/var(2) {curse:.1}; {elapsed:.1} s",
            far.converged, far.trials
        ),
    ))
}

fn grid_backend() -> Result<Outcome> {
    let g = GaussianPsf::new(1.0, 1.4, 0.4)?;
    let exact = Psf::Gaussian(g);
    let grid = Psf::from(discretize_gaussian(&g, 512)?);
    let quantum = grid_vs_analytic(&grid, &g, 1e-5, &oracle_scene_grid())?;
    let mut worst = quantum.measured;
    let rel = |a: f64, b: f64| if b.abs() < ABSOLUTE_FLOOR { (a - b).abs() } else { relative_difference(a, b) };

    for scene in oracle_scene_grid() {
        let (mg, me) = (grid.geometry_moments(scene.r, scene.alpha)?, exact.geometry_moments(scene.r, scene.alpha)?);
        worst = worst.max(rel(mg.kappa_r, me.kappa_r)).max(rel(mg.kappa_r_perp, me.kappa_r_perp));
        let (lg, le) = (quantum_limits(&grid, &scene)?, quantum_limits(&exact, &scene)?);
        worst = worst.max(rel(lg.h_alpha_smallr, le.h_alpha_smallr));
    }
    let (eg, ee) = (
        optimal_azimuth(&grid.base_moments()?, 0.3, 1.0)?,
        optimal_azimuth(&exact.base_moments()?, 0.3, 1.0)?,
    );
    worst = worst
        .max(axis_distance(eg.alpha_opt, ee.alpha_opt))
        .max(axis_distance(eg.alpha_wor, ee.alpha_wor))
        .max(rel(eg.h_opt, ee.h_opt))
        .max(rel(eg.h_wor, ee.h_wor))
        .max(rel(eg.xi, ee.xi));

    let (fg, fe) = (IntensityField::new(&grid)?, IntensityField::new(&exact)?);
    let (kg, ke) = (smallr_coeffs(&fg)?, smallr_coeffs(&fe)?);
    let opts = CfimOptions::default();
    for scene in [SceneParams::new(0.05, 0.5, 0.3, 1.0), SceneParams::new(0.5, 1.2, 0.0, 1.0)] {
        worst = worst
            .max(rel(precision_r_direct_numeric(&scene, &fg, &opts)?, precision_r_direct_numeric(&scene, &fe, &opts)?))
            .max(rel(precision_r_direct(&scene, &kg)?.h_r_direct, precision_r_direct(&scene, &ke)?.h_r_direct));
    }
    Ok(outcome(worst <= 1e-5, format!("512^2 sampled Gaussian, max rel err {worst:.2e} over all outputs (tol 1e-5)")))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 12] = [
    ("QFIM oracle equivalence", qfim_equivalence),
    ("eigenvalue reproduction", eigenvalues),
    ("distance-limit formula", distance_limit),
    ("distance-limit scan structure", scan_structure),
    ("minor-axis optimality", minor_axis),
    ("azimuth quadratic decay", azimuth_decay),
    ("classical Rayleigh curse", direct_curse),
    ("small-r CFIM expansion", smallr_expansion),
    ("coordinate invariance", rotation_invariance),
    ("SLD saturability", sld_saturability),
    ("Monte Carlo CRB attainment", monte_carlo),
    ("grid vs analytic backend", grid_backend),
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run) in CRITERIA.iter() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failures += usize::from(!o.passed);
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} ({:.1} s)", o.detail, t.elapsed().as_secs_f64());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
