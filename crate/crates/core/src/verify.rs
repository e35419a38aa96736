//! Named verification checks comparing closed forms with independent numerics.

use crate::error::Result;
use crate::exec;
use crate::fisher::FisherMatrix;
use crate::oracle::{self, OracleOptions, PhaseModulated};
use crate::psf::{make_gaussian, GaussianPsf, Psf};
use crate::qfim::{self, quantum_limits};
use crate::scene::SceneParams;

/// Entries smaller than this are compared absolutely.
pub const ABSOLUTE_FLOOR: f64 = 1e-10;

/// One named check with its measured residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Upper bound, or lower bound when `lower_bound` is set.
    pub threshold: f64,
    pub lower_bound: bool,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, tol: f64) -> Self {
        Self { name: name.into(), measured, threshold: tol, lower_bound: false, passed: measured <= tol }
    }

    fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, threshold: bound, lower_bound: true, passed: measured >= bound }
    }

    /// `PASS name measured=... tol<=...` style line.
    pub fn line(&self) -> String {
        format!(
            "{} {} measured={:.3e} {}{:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            if self.lower_bound { "bound>=" } else { "tol<=" },
            self.threshold
        )
    }
}

/// Largest entrywise relative difference; entries below [`ABSOLUTE_FLOOR`] compared absolutely.
pub fn max_relative_difference(a: &FisherMatrix, b: &FisherMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let (x, y) = (a.get(i, j), b.get(i, j));
            let d = (x - y).abs();
            worst = worst.max(if y.abs() < ABSOLUTE_FLOOR { d } else { d / y.abs() });
        }
    }
    worst
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// The 3×3×3 grid `r ∈ {0.1, 0.5, 1.5}`, `α ∈ {0, 0.5, 1.2}`, `ε ∈ {0, 0.3, 0.7}`.
pub fn oracle_scene_grid() -> Vec<SceneParams> {
    let mut v = Vec::with_capacity(27);
    for r in [0.1, 0.5, 1.5] {
        for a in [0.0, 0.5, 1.2] {
            for e in [0.0, 0.3, 0.7] {
                v.push(SceneParams::new(r, a, e, 1.0));
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every upper-bound tolerance.
    pub tolerance_scale: f64,
    pub oracle: OracleOptions,
    pub scenes: Vec<SceneParams>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance_scale: 1.0, oracle: OracleOptions::default(), scenes: oracle_scene_grid() }
    }
}

/// Tolerances of one suite before scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteTolerances {
    pub qfim: f64,
    pub eigenvalues: f64,
    pub norms: f64,
    pub invariance: f64,
    pub routes: f64,
}

pub const GAUSSIAN_TOLERANCES: SuiteTolerances =
    SuiteTolerances { qfim: 1e-6, eigenvalues: 1e-10, norms: 1e-8, invariance: 1e-9, routes: 1e-9 };

/// Quadrature-backed grid PSFs: agreement limited by sampling.
pub const GRID_TOLERANCES: SuiteTolerances =
    SuiteTolerances { qfim: 1e-5, eigenvalues: 1e-5, norms: 1e-5, invariance: 1e-5, routes: 1e-9 };

const SLD_TOL: f64 = 1e-8;
const NEGATIVE_CONTROL_BOUND: f64 = 1e-3;
const LIMIT_TOL: f64 = 1e-4;

/// Runs the oracle suite for `psf` with the given tolerances.
pub fn run_suite(psf: &Psf, tol: &SuiteTolerances, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let s = opts.tolerance_scale;
    let o = &opts.oracle;
    let per_scene = exec::map_indexed(opts.scenes.len(), |k| -> Result<[f64; 5]> {
        let scene = &opts.scenes[k];
        let lim = quantum_limits(psf, scene)?;
        let orc = oracle::qfim_oracle(psf, scene, o)?;
        let q_err = max_relative_difference(&orc.fisher, &lim.qfim);
        let es = qfim::eigensystem(lim.geom.delta, scene.epsilon)?;
        let ev_err = (orc.eigenvalues[0] - es.lambda2).abs().max((orc.eigenvalues[1] - es.lambda1).abs());
        let sub = oracle::build_subspace(psf, scene, o)?;
        let norm_err = oracle::eigenstate_check(&sub, scene)?
            .map_or(0.0, |c| c.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max));
        let sld = qfim::sld_residual(psf, scene, o)?;
        let routes = match lim.h_r.inverse {
            Some(h) => relative_difference(h, lim.h_r.closed_form),
            None => 0.0,
        };
        let routes_a = match lim.h_alpha.inverse {
            Some(h) => relative_difference(h, lim.h_alpha.closed_form),
            None => 0.0,
        };
        Ok([q_err, ev_err, norm_err, sld, routes.max(routes_a)])
    });
    let mut worst = [0.0f64; 5];
    for row in per_scene {
        for (w, v) in worst.iter_mut().zip(row?) {
            *w = w.max(v);
        }
    }
    let mut checks = vec![
        Check::at_most("qfim_vs_oracle", worst[0], tol.qfim * s),
        Check::at_most("eigenvalues_vs_closed_form", worst[1], tol.eigenvalues * s),
        Check::at_most("eigenstate_normalisation", worst[2], tol.norms * s),
        Check::at_most("sld_compatibility", worst[3], SLD_TOL * s),
        Check::at_most("inverse_vs_closed_form", worst[4], tol.routes * s),
    ];

    let coincident = oracle::subspace_eigenvalues(psf, &SceneParams::new(0.0, 0.3, 0.4, 1.0), o)?;
    let r0 = (coincident[0] - 1.0).abs().max(coincident[1..].iter().map(|v| v.abs()).fold(0.0, f64::max));
    checks.push(Check::at_most("coincident_eigenvalues", r0, 1e-12 * s));

    let control = PhaseModulated { psf: psf.clone(), strength: 0.5 };
    let neg = qfim::sld_residual(&control, &SceneParams::new(0.5, 1.0, 0.3, 1.0), o)?;
    checks.push(Check::at_least("sld_negative_control", neg, NEGATIVE_CONTROL_BOUND));

    let base = psf.base_moments()?;
    let mut inv = 0.0f64;
    for (theta, scene) in [(0.7, SceneParams::new(0.8, 0.3, 0.2, 1.0)), (-1.9, SceneParams::new(0.2, 1.1, 0.6, 1.0))] {
        let h = quantum_limits(psf, &scene)?.h_r.value;
        let rotated = psf.rotate(theta)?;
        let hr = quantum_limits(&rotated, &SceneParams { alpha: scene.alpha + theta, ..scene })?.h_r.value;
        inv = inv.max(relative_difference(hr, h));
    }
    checks.push(Check::at_most("coordinate_invariance", inv, tol.invariance * s));

    let mut lim_err = 0.0f64;
    let mut alpha_err = 0.0f64;
    for (a, e) in [(0.0, 0.0), (0.9, 0.5), (2.3, 0.8)] {
        let small = quantum_limits(psf, &SceneParams::new(1e-4, a, e, 1.0))?;
        lim_err = lim_err.max(relative_difference(small.h_r.value, small.h_r_limit));
        let small = quantum_limits(psf, &SceneParams::new(1e-3, a, e, 1.0))?;
        alpha_err = alpha_err.max(relative_difference(
            small.h_alpha.value,
            qfim::precision_alpha_smallr(&base, 1e-3, a, e, 1.0),
        ));
    }
    checks.push(Check::at_most("distance_small_r_limit", lim_err, LIMIT_TOL * s));
    checks.push(Check::at_most("azimuth_small_r_limit", alpha_err, LIMIT_TOL * s));
    Ok(checks)
}

/// Moments and precisions of a grid PSF against the Gaussian it samples.
pub fn grid_vs_analytic(grid: &Psf, reference: &GaussianPsf, tol: f64, scenes: &[SceneParams]) -> Result<Check> {
    let exact = Psf::Gaussian(*reference);
    let (bg, be) = (grid.base_moments()?, exact.base_moments()?);
    let mut worst = [
        relative_difference(bg.kappa_x, be.kappa_x),
        relative_difference(bg.kappa_y, be.kappa_y),
        relative_difference(bg.eta, be.eta),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    for scene in scenes {
        let (lg, le) = (quantum_limits(grid, scene)?, quantum_limits(&exact, scene)?);
        let pairs = [
            (lg.geom.delta, le.geom.delta),
            (lg.geom.gamma_x, le.geom.gamma_x),
            (lg.geom.gamma_y, le.geom.gamma_y),
            (lg.h_r.value, le.h_r.value),
            (lg.h_alpha.value, le.h_alpha.value),
            (lg.h_r_limit, le.h_r_limit),
        ];
        for (a, b) in pairs {
            let d = if b.abs() < ABSOLUTE_FLOOR { (a - b).abs() } else { relative_difference(a, b) };
            worst = worst.max(d);
        }
    }
    Ok(Check::at_most("grid_vs_analytic", worst, tol))
}

/// Default Gaussian `(σ₁, σ₂, β) = (1, 1.4, 0.4)` used by the built-in suites.
pub fn default_gaussian() -> GaussianPsf {
    match make_gaussian(1.0, 1.4, 0.4) {
        Ok(Psf::Gaussian(g)) => g,
        _ => unreachable!("fixed parameters are valid"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            oracle: OracleOptions { resolution: 256, ..Default::default() },
            scenes: vec![SceneParams::new(0.5, 1.2, 0.3, 1.0)],
            ..Default::default()
        }
    }

    #[test]
    fn gaussian_suite_passes() {
        let checks = run_suite(&Psf::Gaussian(default_gaussian()), &GAUSSIAN_TOLERANCES, &quick()).unwrap();
        for c in &checks {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn zero_scale_fails() {
        let opts = VerifyOptions { tolerance_scale: 0.0, ..quick() };
        let checks = run_suite(&Psf::Gaussian(default_gaussian()), &GAUSSIAN_TOLERANCES, &opts).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
    }

    #[test]
    fn grid_count() {
        assert_eq!(oracle_scene_grid().len(), 27);
    }
}
