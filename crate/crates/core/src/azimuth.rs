//! Optimisation of the small-separation distance limit over the azimuth.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::exec;
use crate::psf::{BaseMoments, GaussianPsf};
use crate::qfim::precision_r_limit;

/// Reduces an angle to `[0, π)`.
pub fn reduce_angle(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// Reduces an angle to `(−π/2, π/2]`.
pub fn centered_angle(alpha: f64) -> f64 {
    let a = reduce_angle(alpha);
    if a > FRAC_PI_2 {
        a - PI
    } else {
        a
    }
}

/// Distance between two axis orientations, modulo π.
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    d.min(PI - d)
}

/// Best and worst azimuths of the small-separation distance limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthExtrema {
    /// In `[0, π)`.
    pub alpha_opt: f64,
    /// In `[0, π)`.
    pub alpha_wor: f64,
    pub h_opt: f64,
    pub h_wor: f64,
    pub xi: f64,
    /// Circularly symmetric moments: every azimuth is equivalent.
    pub circular: bool,
}

fn check_base(base: &BaseMoments) -> Result<()> {
    if !(base.kappa_x > 0.0 && base.kappa_y > 0.0) {
        return Err(Error::domain("kappa_x and kappa_y must be positive"));
    }
    if base.det() <= 0.0 {
        return Err(Error::domain("momentum second-moment matrix must be positive definite"));
    }
    Ok(())
}

/// Closed-form optimal and worst azimuths and the corresponding limits.
pub fn optimal_azimuth(base: &BaseMoments, epsilon: f64, n_total: f64) -> Result<AzimuthExtrema> {
    check_base(base)?;
    let BaseMoments { kappa_x: kx, kappa_y: ky, eta } = *base;
    let split = base.splitting();
    let circular = eta == 0.0 && kx == ky;
    let (alpha_opt, alpha_wor) = if eta != 0.0 {
        let a = ((ky - kx + split) / (2.0 * eta)).atan();
        let b = ((ky - kx - split) / (2.0 * eta)).atan();
        // The larger limit sits where κ_r⊥ is smallest.
        if base.kappa_r_perp(a) <= base.kappa_r_perp(b) {
            (a, b)
        } else {
            (b, a)
        }
    } else if kx >= ky {
        (0.0, FRAC_PI_2)
    } else {
        (FRAC_PI_2, 0.0)
    };
    let scale = 0.5 * n_total * (1.0 - epsilon * epsilon);
    let (h_opt, h_wor) = (scale * (base.trace() + split), scale * (base.trace() - split));
    Ok(AzimuthExtrema {
        alpha_opt: reduce_angle(alpha_opt),
        alpha_wor: reduce_angle(alpha_wor),
        h_opt,
        h_wor,
        xi: if circular { 1.0 } else { enhancement_ratio(base)? },
        circular,
    })
}

/// `ξ = (κ_x + κ_y + s)/(κ_x + κ_y − s)` with `s = √(4η² + (κ_y − κ_x)²)`.
pub fn enhancement_ratio(base: &BaseMoments) -> Result<f64> {
    check_base(base)?;
    let (t, s) = (base.trace(), base.splitting());
    Ok((t + s) / (t - s))
}

/// `ℜ = √((σ₂² − σ₁²)² + 4β²σ₁²σ₂²)`.
pub fn gaussian_r_factor(g: &GaussianPsf) -> f64 {
    let (s1, s2, b) = (g.sigma1(), g.sigma2(), g.beta());
    ((s2 * s2 - s1 * s1).powi(2) + 4.0 * b * b * s1 * s1 * s2 * s2).sqrt()
}

/// Gaussian enhancement ratio `(σ₁² + σ₂² + ℜ)/(σ₁² + σ₂² − ℜ)`.
pub fn gaussian_enhancement_ratio(g: &GaussianPsf) -> f64 {
    let t = g.sigma1().powi(2) + g.sigma2().powi(2);
    let rf = gaussian_r_factor(g);
    (t + rf) / (t - rf)
}

/// Orientations of the principal axes of a Gaussian PSF, both in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianAxes {
    /// Major axis (largest spatial variance).
    pub phi_plus: f64,
    /// Minor axis.
    pub phi_minus: f64,
    /// `σ₁ = σ₂`, `β = 0`: axes undefined, reported as `(π/2, 0)`.
    pub isotropic: bool,
}

/// `Φ± = atan((σ₂² − σ₁² ± ℜ)/(2βσ₁σ₂))`, with the `β = 0` limits taken explicitly.
pub fn gaussian_axes(g: &GaussianPsf) -> GaussianAxes {
    let (s1, s2, b) = (g.sigma1(), g.sigma2(), g.beta());
    let diff = s2 * s2 - s1 * s1;
    let rf = gaussian_r_factor(g);
    if b == 0.0 {
        let (phi_plus, phi_minus) = if diff >= 0.0 { (FRAC_PI_2, 0.0) } else { (0.0, FRAC_PI_2) };
        return GaussianAxes { phi_plus, phi_minus, isotropic: diff == 0.0 };
    }
    let den = 2.0 * b * s1 * s2;
    GaussianAxes {
        phi_plus: reduce_angle(((diff + rf) / den).atan()),
        phi_minus: reduce_angle(((diff - rf) / den).atan()),
        isotropic: false,
    }
}

/// The small-separation limit sampled at `α = kπ/n`, `k = 0..=n`.
///
/// The closing point `α = π` is included so the periodicity can be checked.
pub fn scan_alpha(base: &BaseMoments, epsilon: f64, n_total: f64, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if n_points < 8 {
        return Err(Error::domain(format!("scan needs at least 8 points, got {n_points}")));
    }
    check_base(base)?;
    let step = PI / n_points as f64;
    exec::map_indexed(n_points + 1, |k| {
        let a = k as f64 * step;
        precision_r_limit(base, a, epsilon, n_total).map(|h| (a, h))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::Psf;
    use approx::assert_relative_eq;

    fn moments(s1: f64, s2: f64, b: f64) -> BaseMoments {
        Psf::Gaussian(GaussianPsf::new(s1, s2, b).unwrap()).base_moments().unwrap()
    }

    #[test]
    fn fig3_extrema() {
        let base = moments(1.0, 1.4, 0.4);
        let ex = optimal_azimuth(&base, 0.0, 1.0).unwrap();
        assert_relative_eq!(centered_angle(ex.alpha_opt), -0.431085, epsilon = 1e-6);
        assert_relative_eq!(ex.h_opt, 0.3367292, max_relative = 1e-6);
        assert_relative_eq!(ex.xi, 2.986873, max_relative = 1e-6);
        assert_relative_eq!(axis_distance(ex.alpha_opt, ex.alpha_wor), FRAC_PI_2, epsilon = 1e-12);
        let lim = precision_r_limit(&base, ex.alpha_opt, 0.0, 1.0).unwrap();
        assert_relative_eq!(lim, ex.h_opt, max_relative = 1e-12);
    }

    #[test]
    fn reflection_symmetric_case_split() {
        let ex = optimal_azimuth(&moments(1.0, 2.0, 0.0), 0.5, 4.0).unwrap();
        assert_eq!(ex.alpha_opt, 0.0);
        assert_relative_eq!(ex.h_opt, 4.0 * 0.75 * 0.25, max_relative = 1e-14);
        let ex = optimal_azimuth(&moments(2.0, 1.0, 0.0), 0.0, 1.0).unwrap();
        assert_eq!(ex.alpha_opt, FRAC_PI_2);
        assert_relative_eq!(ex.xi, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn circular_flagged() {
        let ex = optimal_azimuth(&moments(1.3, 1.3, 0.0), 0.0, 1.0).unwrap();
        assert!(ex.circular);
        assert_eq!(ex.xi, 1.0);
    }

    #[test]
    fn axes_of_fig3_psf() {
        let g = GaussianPsf::new(1.0, 1.4, 0.4).unwrap();
        let axes = gaussian_axes(&g);
        let ex = optimal_azimuth(&moments(1.0, 1.4, 0.4), 0.0, 1.0).unwrap();
        assert!(axis_distance(axes.phi_minus, ex.alpha_opt) < 1e-10);
        assert!(axis_distance(axes.phi_plus, ex.alpha_wor) < 1e-10);
        assert_relative_eq!(gaussian_enhancement_ratio(&g), ex.xi, max_relative = 1e-12);
    }

    #[test]
    fn unrotated_axes_follow_formula_limit() {
        let axes = gaussian_axes(&GaussianPsf::new(1.0, 1.4, 0.0).unwrap());
        assert_eq!((axes.phi_plus, axes.phi_minus), (FRAC_PI_2, 0.0));
        let near = gaussian_axes(&GaussianPsf::new(1.0, 1.4, 1e-9).unwrap());
        assert!(axis_distance(near.phi_plus, FRAC_PI_2) < 1e-8);
        assert!(axis_distance(near.phi_minus, 0.0) < 1e-8);
        assert!(gaussian_axes(&GaussianPsf::new(1.0, 1.0, 0.0).unwrap()).isotropic);
    }

    #[test]
    fn scan_agrees_with_closed_form() {
        let base = moments(1.0, 1.4, 0.4);
        let n = 360;
        let curve = scan_alpha(&base, 0.0, 1.0, n).unwrap();
        assert_relative_eq!(curve[0].1, curve[n].1, max_relative = 1e-12);
        let best = curve.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let ex = optimal_azimuth(&base, 0.0, 1.0).unwrap();
        assert!(axis_distance(best.0, ex.alpha_opt) < PI / n as f64);
        assert!(scan_alpha(&base, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn stationary_at_extrema() {
        let base = moments(0.8, 1.7, -0.3);
        let ex = optimal_azimuth(&base, 0.2, 1.0).unwrap();
        let h = 1e-5;
        for a in [ex.alpha_opt, ex.alpha_wor] {
            let f = |x: f64| precision_r_limit(&base, x, 0.2, 1.0).unwrap();
            assert!(((f(a + h) - f(a - h)) / (2.0 * h)).abs() < 1e-6);
        }
    }
}
