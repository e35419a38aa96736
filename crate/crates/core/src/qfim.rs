//! Closed-form quantum Fisher information and the distance/azimuth limits.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::fisher::{FisherKind, FisherMatrix, ILL_CONDITIONED};
use crate::psf::{BaseMoments, GeometryMoments, Psf};
use crate::scene::{SceneParams, AZIMUTH, DISTANCE};

/// Spectrum of the single-photon state restricted to its two-dimensional support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Normalisation constants of the eigenstates; `None` when `δ = 0` or `ε = 1`.
    pub q_norm1: Option<f64>,
    pub q_norm2: Option<f64>,
    pub delta: f64,
    pub epsilon: f64,
}

impl EigenSystem {
    /// Coefficients `c₁, c₂` such that `|λₖ⟩ ∝ ψ₁ + cₖ ψ₂`.
    pub fn coefficients(&self) -> Option<[f64; 2]> {
        self.q_norm1?;
        let root = radicand(self.delta, self.epsilon).sqrt();
        let scale = self.delta * (1.0 - self.epsilon);
        Some([-(root - self.epsilon) / scale, (root + self.epsilon) / scale])
    }

    /// Squared norms of `ψ₁ + cₖ ψ₂` computed directly from the overlap.
    pub fn direct_norms(&self) -> Option<[f64; 2]> {
        let c = self.coefficients()?;
        Some(c.map(|ck| 1.0 + ck * ck + 2.0 * ck * self.delta))
    }
}

fn radicand(delta: f64, epsilon: f64) -> f64 {
    epsilon * epsilon + delta * delta * (1.0 - epsilon * epsilon)
}

/// Eigenvalues `λ₁,₂ = (1 ∓ √(ε² + δ²(1 − ε²)))/2` and eigenstate normalisations.
pub fn eigensystem(delta: f64, epsilon: f64) -> Result<EigenSystem> {
    if !(delta.is_finite() && delta.abs() <= 1.0) {
        return Err(Error::domain(format!("|delta| must be <= 1, got {delta}")));
    }
    if !(epsilon.is_finite() && epsilon.abs() <= 1.0) {
        return Err(Error::domain(format!("|epsilon| must be <= 1, got {epsilon}")));
    }
    let root = radicand(delta, epsilon).sqrt().min(1.0);
    let (q_norm1, q_norm2) = if delta == 0.0 || epsilon == 1.0 {
        (None, None)
    } else {
        let d2 = delta * delta;
        let one_m = 1.0 - epsilon;
        let q = |sign: f64| {
            let den = root + sign * (d2 * one_m + epsilon);
            (1.0 - d2) * (1.0 + d2 * (1.0 - d2) * one_m * one_m / (den * den))
        };
        (Some(q(1.0)), Some(q(-1.0)))
    };
    Ok(EigenSystem {
        lambda1: 0.5 * (1.0 - root),
        lambda2: 0.5 * (1.0 + root),
        q_norm1,
        q_norm2,
        delta,
        epsilon,
    })
}

/// Assembles the per-photon quantum Fisher information matrix.
pub fn build_qfim(base: &BaseMoments, geom: &GeometryMoments, scene: &SceneParams) -> Result<FisherMatrix> {
    scene.validate()?;
    if geom.r != scene.r || geom.alpha != scene.alpha {
        return Err(Error::domain(format!(
            "moments computed for (r, alpha) = ({}, {}) but scene has ({}, {})",
            geom.r, geom.alpha, scene.r, scene.alpha
        )));
    }
    let BaseMoments { kappa_x: kx, kappa_y: ky, eta } = *base;
    let (gx, gy, r, e) = (geom.gamma_x, geom.gamma_y, geom.r, scene.epsilon);
    let (s, c) = geom.alpha.sin_cos();
    let (s2, c2) = (2.0 * geom.alpha).sin_cos();
    let w = 1.0 - e * e;

    let q11 = 4.0 * kx - 4.0 * w * gx * gx;
    let q12 = 4.0 * eta - 4.0 * w * gx * gy;
    let q13 = 2.0 * e * (eta * s + c * kx);
    let q14 = 2.0 * r * e * (eta * c - s * kx);
    let q22 = 4.0 * ky - 4.0 * w * gy * gy;
    let q23 = 2.0 * e * (eta * c + s * ky);
    let q24 = 2.0 * r * e * (c * ky - eta * s);
    let q33 = geom.kappa_r;
    let q34 = 0.5 * r * (2.0 * eta * c2 - s2 * kx + s2 * ky);
    let q44 = r * r * geom.kappa_r_perp;

    #[rustfmt::skip]
    let m = Matrix4::new(
        q11, q12, q13, q14,
        q12, q22, q23, q24,
        q13, q23, q33, q34,
        q14, q24, q34, q44,
    );
    Ok(FisherMatrix::new(m, FisherKind::Quantum))
}

/// `N/(Q⁻¹)₃₃` by matrix inversion. Fails when the matrix is singular (e.g. `r = 0`).
pub fn precision_r(qfim: &FisherMatrix, n_total: f64) -> Result<f64> {
    Ok(qfim.precision(DISTANCE, n_total)?.0)
}

/// `N/(Q⁻¹)₄₄` by matrix inversion.
pub fn precision_alpha(qfim: &FisherMatrix, n_total: f64) -> Result<f64> {
    Ok(qfim.precision(AZIMUTH, n_total)?.0)
}

/// The bracket `κ_xκ_y − η² + 2ηγ_xγ_y − κ_xγ_y² − κ_yγ_x²` shared by both limits.
fn reduced_det(base: &BaseMoments, geom: &GeometryMoments) -> f64 {
    let (gx, gy) = (geom.gamma_x, geom.gamma_y);
    base.det() + 2.0 * base.eta * gx * gy - base.kappa_x * gy * gy - base.kappa_y * gx * gx
}

/// Explicit numerator/denominator form of `H_r`; finite at `r = 0`.
pub fn precision_r_closed(base: &BaseMoments, geom: &GeometryMoments, epsilon: f64, n_total: f64) -> f64 {
    let BaseMoments { kappa_x: kx, kappa_y: ky, eta } = *base;
    let (gx, gy) = (geom.gamma_x, geom.gamma_y);
    let (s, c) = geom.alpha.sin_cos();
    let e2 = epsilon * epsilon;
    let det = base.det();
    let krp = geom.kappa_r_perp;
    let num = n_total * (1.0 - e2) * det * reduced_det(base, geom);
    let den = det * krp
        + gx * gx * (e2 * (eta * s - ky * c).powi(2) - krp * ky)
        + gx * gy * (e2 * det * (2.0 * geom.alpha).sin() + 2.0 * eta * krp * (1.0 - e2))
        + gy * gy * (e2 * (eta * c - kx * s).powi(2) - krp * kx);
    num / den
}

/// Explicit numerator/denominator form of `H_α`; zero at `r = 0`.
pub fn precision_alpha_closed(base: &BaseMoments, geom: &GeometryMoments, epsilon: f64, n_total: f64) -> f64 {
    let BaseMoments { kappa_x: kx, kappa_y: ky, eta } = *base;
    let (gx, gy) = (geom.gamma_x, geom.gamma_y);
    let (s, c) = geom.alpha.sin_cos();
    let e2 = epsilon * epsilon;
    let rd = reduced_det(base, geom);
    let num = geom.r * geom.r * n_total * (1.0 - e2) * base.det() * rd;
    let cross = gy * (eta * s + c * kx) - gx * (eta * c + s * ky);
    let den = e2 * cross * cross + geom.kappa_r * rd;
    num / den
}

/// Small-separation distance limit `N(1 − ε²)(κ_xκ_y − η²)/κ_r⊥`.
pub fn precision_r_limit(base: &BaseMoments, alpha: f64, epsilon: f64, n_total: f64) -> Result<f64> {
    let krp = base.kappa_r_perp(alpha);
    if krp <= 0.0 {
        return Err(Error::domain(format!("kappa_r_perp must be positive, got {krp}")));
    }
    Ok(n_total * (1.0 - epsilon * epsilon) * base.det() / krp)
}

/// Leading small-`r` term of `H_α`: `r²N(1 − ε²)(κ_xκ_y − η²)/κ_r`.
pub fn precision_alpha_smallr(base: &BaseMoments, r: f64, alpha: f64, epsilon: f64, n_total: f64) -> f64 {
    r * r * n_total * (1.0 - epsilon * epsilon) * base.det() / base.kappa_r(alpha)
}

/// Saturability residual `max |Im Tr(ρ Lᵢ Lⱼ)|`, evaluated in the Gram subspace.
pub fn sld_residual<A: crate::oracle::StateAmplitude>(
    amp: &A,
    scene: &SceneParams,
    opts: &crate::oracle::OracleOptions,
) -> Result<f64> {
    Ok(crate::oracle::sld_matrices(amp, scene, opts)?.compatibility_residual())
}

/// A precision limit together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    /// Reported value: the inversion result when it is reliable, else the closed form.
    pub value: f64,
    pub closed_form: f64,
    /// `N/(Q⁻¹)ₖₖ`; `None` when the four-parameter inverse does not exist.
    pub inverse: Option<f64>,
    pub condition: Option<f64>,
    /// Set at `r = 0` where the azimuth is unidentifiable.
    pub degenerate: bool,
}

impl Precision {
    pub fn variance(&self) -> f64 {
        1.0 / self.value
    }

    fn combine(closed_form: f64, qfim: &FisherMatrix, k: usize, n_total: f64, degenerate: bool) -> Self {
        if degenerate {
            return Self { value: closed_form, closed_form, inverse: None, condition: None, degenerate };
        }
        match qfim.precision(k, n_total) {
            Ok((h, cond)) if cond <= ILL_CONDITIONED => Self {
                value: h,
                closed_form,
                inverse: Some(h),
                condition: Some(cond),
                degenerate,
            },
            Ok((h, cond)) => Self {
                value: closed_form,
                closed_form,
                inverse: Some(h),
                condition: Some(cond),
                degenerate,
            },
            Err(_) => Self { value: closed_form, closed_form, inverse: None, condition: None, degenerate },
        }
    }
}

/// Moments, matrix and both precision limits for one scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumLimits {
    pub base: BaseMoments,
    pub geom: GeometryMoments,
    pub qfim: FisherMatrix,
    pub h_r: Precision,
    pub h_alpha: Precision,
    pub h_r_limit: f64,
    pub h_alpha_smallr: f64,
}

/// Computes both quantum limits from precomputed moments.
pub fn quantum_limits_from_moments(base: &BaseMoments, geom: &GeometryMoments, scene: &SceneParams) -> Result<QuantumLimits> {
    scene.validate_for_precision()?;
    let qfim = build_qfim(base, geom, scene)?;
    let degenerate = scene.r == 0.0;
    let (e, n) = (scene.epsilon, scene.n_total);
    let h_r = Precision::combine(precision_r_closed(base, geom, e, n), &qfim, DISTANCE, n, degenerate);
    let h_alpha = Precision::combine(precision_alpha_closed(base, geom, e, n), &qfim, AZIMUTH, n, degenerate);
    Ok(QuantumLimits {
        base: *base,
        geom: *geom,
        qfim,
        h_r,
        h_alpha,
        h_r_limit: precision_r_limit(base, scene.alpha, e, n)?,
        h_alpha_smallr: precision_alpha_smallr(base, scene.r, scene.alpha, e, n),
    })
}

/// Computes both quantum limits for `psf` and `scene`.
pub fn quantum_limits(psf: &Psf, scene: &SceneParams) -> Result<QuantumLimits> {
    scene.validate_for_precision()?;
    let base = psf.base_moments()?;
    let geom = crate::psf::geometry_moments(psf, scene.r, scene.alpha, &base)?;
    quantum_limits_from_moments(&base, &geom, scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::make_gaussian;
    use approx::assert_relative_eq;

    fn fig3() -> Psf {
        make_gaussian(1.0, 1.4, 0.4).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let es = eigensystem(1.0, 0.3).unwrap();
        assert_relative_eq!(es.lambda1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(es.lambda2, 1.0, epsilon = 1e-15);
        let es = eigensystem(0.6, 0.0).unwrap();
        assert_relative_eq!(es.lambda1, 0.2, epsilon = 1e-15);
        assert_relative_eq!(es.lambda2, 0.8, epsilon = 1e-15);
        let es = eigensystem(0.5, 0.4).unwrap();
        assert_relative_eq!(es.lambda1, 0.195862, epsilon = 1e-6);
        assert!(eigensystem(1.5, 0.0).is_err());
    }

    #[test]
    fn eigenstate_normalisation_matches_direct_norm() {
        for (d, e) in [(0.5, 0.4), (0.8, -0.3), (0.3, 0.0), (0.9, 0.7)] {
            let es = eigensystem(d, e).unwrap();
            let [n1, n2] = es.direct_norms().unwrap();
            assert_relative_eq!(es.q_norm1.unwrap(), n1, max_relative = 1e-12);
            assert_relative_eq!(es.q_norm2.unwrap(), n2, max_relative = 1e-12);
        }
    }

    #[test]
    fn eigenstates_flagged_when_undefined() {
        let es = eigensystem(0.0, 0.2).unwrap();
        assert!(es.q_norm1.is_none() && es.coefficients().is_none());
        assert_relative_eq!(es.lambda1, 0.4, epsilon = 1e-15);
        assert!(eigensystem(0.5, 1.0).unwrap().q_norm2.is_none());
    }

    #[test]
    fn coincident_sources_zero_azimuth_row() {
        let p = fig3();
        let scene = SceneParams::new(0.0, 0.7, 0.3, 1.0);
        let b = p.base_moments().unwrap();
        let g = p.geometry_moments(0.0, 0.7).unwrap();
        let q = build_qfim(&b, &g, &scene).unwrap();
        for k in 0..3 {
            assert_eq!(q.get(k, 3), 0.0);
        }
        assert_eq!(q.get(3, 3), 0.0);
    }

    #[test]
    fn balanced_coincident_block_structure() {
        let p = fig3();
        let b = p.base_moments().unwrap();
        let g = p.geometry_moments(0.0, 0.4).unwrap();
        let q = build_qfim(&b, &g, &SceneParams::new(0.0, 0.4, 0.0, 1.0)).unwrap();
        assert_eq!((q.get(0, 2), q.get(1, 2)), (0.0, 0.0));
        assert_eq!(q.get(0, 0), 4.0 * b.kappa_x);
        assert_eq!(q.get(1, 1), 4.0 * b.kappa_y);
        assert_eq!(q.get(0, 1), 4.0 * b.eta);
        assert_eq!(q.get(2, 2), b.kappa_r(0.4));
    }

    #[test]
    fn mismatched_moments_rejected() {
        let p = fig3();
        let b = p.base_moments().unwrap();
        let g = p.geometry_moments(0.5, 0.4).unwrap();
        assert!(build_qfim(&b, &g, &SceneParams::new(0.3, 0.4, 0.0, 1.0)).is_err());
    }

    #[test]
    fn inversion_matches_closed_form() {
        let p = fig3();
        for (r, a, e) in [(0.5, 0.5, 0.4), (1.5, 1.2, 0.7), (0.1, 2.5, 0.0)] {
            let lim = quantum_limits(&p, &SceneParams::new(r, a, e, 100.0)).unwrap();
            assert_relative_eq!(lim.h_r.inverse.unwrap(), lim.h_r.closed_form, max_relative = 1e-9);
            assert_relative_eq!(lim.h_alpha.inverse.unwrap(), lim.h_alpha.closed_form, max_relative = 1e-9);
        }
    }

    #[test]
    fn isotropic_limit() {
        let p = make_gaussian(2.0, 2.0, 0.0).unwrap();
        let lim = quantum_limits(&p, &SceneParams::new(1e-5, 0.3, 0.0, 1.0)).unwrap();
        assert_relative_eq!(lim.h_r.value, 1.0 / 16.0, max_relative = 1e-8);
        assert_relative_eq!(lim.h_r_limit, 1.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn fig3_optimal_value() {
        let b = fig3().base_moments().unwrap();
        let h = precision_r_limit(&b, -0.431085, 0.0, 1.0).unwrap();
        assert_relative_eq!(h, 0.3367292, max_relative = 1e-6);
        assert_relative_eq!(precision_r_limit(&b, 0.0, 0.0, 1.0).unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn zero_separation_is_degenerate() {
        let lim = quantum_limits(&fig3(), &SceneParams::new(0.0, 0.3, 0.2, 5.0)).unwrap();
        assert!(lim.h_r.degenerate && lim.h_alpha.degenerate);
        assert!(lim.h_r.inverse.is_none());
        assert_relative_eq!(lim.h_r.value, lim.h_r_limit, max_relative = 1e-14);
        assert_eq!(lim.h_alpha.value, 0.0);
        assert!(precision_r(&lim.qfim, 5.0).is_err());
    }

    #[test]
    fn dark_source_rejected() {
        assert!(quantum_limits(&fig3(), &SceneParams::new(0.3, 0.3, 1.0, 5.0)).is_err());
    }

    #[test]
    fn azimuth_leading_term_carries_imbalance_factor() {
        let p = fig3();
        let b = p.base_moments().unwrap();
        for (a, e) in [(0.3, 0.5), (1.1, 0.8)] {
            let r = 1e-3;
            let lim = quantum_limits(&p, &SceneParams::new(r, a, e, 1.0)).unwrap();
            let lead = precision_alpha_smallr(&b, r, a, e, 1.0);
            assert_relative_eq!(lim.h_alpha.value, lead, max_relative = 1e-4);
        }
    }
}
