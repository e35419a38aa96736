//! Classical Fisher information of ideal continuum direct imaging.
//!
//! A detected photon lands at `f` with density
//! `p(f) = (1 − ε)/2 Λ(f − s₁) + (1 + ε)/2 Λ(f − s₂)` where `Λ = ψ²`.

mod coeffs;
mod field;
pub mod mle;

pub use coeffs::{smallr_coeffs, SmallRCoeffs, COEFF_CONVERGENCE_TOL, SUPPORT_CUTOFF};
pub use field::IntensityField;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::exec;
use crate::fisher::{FisherKind, FisherMatrix};
use crate::quad::QuadGrid;
use crate::scene::{SceneParams, DISTANCE};

/// Densities below this are excluded from the Fisher integrand and clipped in likelihoods.
pub const PDF_FLOOR: f64 = 1e-300;

/// Resolved prefactor of the small-separation direct-imaging precision.
pub const DIRECT_PREFACTOR: f64 = 1.0 / 16.0;

/// Single-photon position density.
pub fn photon_pdf(scene: &SceneParams, field: &IntensityField, x: f64, y: f64) -> f64 {
    let [s1, s2] = scene.sources();
    let [w1, w2] = scene.weights();
    w1 * field.value(x - s1[0], y - s1[1]) + w2 * field.value(x - s2[0], y - s2[1])
}

/// Density and its derivatives with respect to `(X̄, Ȳ, r, α)`.
#[inline]
pub(crate) fn pdf_with_gradient(scene: &SceneParams, field: &IntensityField, x: f64, y: f64) -> (f64, [f64; 4]) {
    let [s1, s2] = scene.sources();
    let [w1, w2] = scene.weights();
    let (sa, ca) = scene.alpha.sin_cos();
    let hr = 0.5 * scene.r;
    let (l1, [l1x, l1y]) = field.value_gradient(x - s1[0], y - s1[1]);
    let (l2, [l2x, l2y]) = field.value_gradient(x - s2[0], y - s2[1]);
    let p = w1 * l1 + w2 * l2;
    // ∂Λ(f − s)/∂s = −∇Λ; s₁ = c − (r/2)(cos α, sin α), s₂ = c + (r/2)(cos α, sin α).
    let d_cx = -(w1 * l1x + w2 * l2x);
    let d_cy = -(w1 * l1y + w2 * l2y);
    let d_r = 0.5 * (w1 * (l1x * ca + l1y * sa) - w2 * (l2x * ca + l2y * sa));
    let d_a = -(w1 * (l1x * hr * sa - l1y * hr * ca) + w2 * (-l2x * hr * sa + l2y * hr * ca));
    (p, [d_cx, d_cy, d_r, d_a])
}

/// Quadrature settings for the numeric classical Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfimOptions {
    /// Midpoint cells per axis.
    pub resolution: usize,
    /// Compare against a half-resolution evaluation.
    pub check_convergence: bool,
}

impl Default for CfimOptions {
    fn default() -> Self {
        Self { resolution: 512, check_convergence: true }
    }
}

/// Per-photon classical Fisher matrix `∫ (∂ᵢp)(∂ⱼp)/p` by midpoint quadrature.
pub fn cfim_numeric(scene: &SceneParams, field: &IntensityField, opts: &CfimOptions) -> Result<FisherMatrix> {
    scene.validate()?;
    if opts.resolution < 16 {
        return Err(Error::domain("quadrature resolution must be at least 16"));
    }
    let fine = cfim_at(scene, field, opts.resolution);
    if opts.check_convergence {
        let coarse = cfim_at(scene, field, opts.resolution / 2);
        let scale = fine.amax().max(f64::MIN_POSITIVE);
        let diff = (fine - coarse).amax() / scale;
        if diff > 1e-6 {
            return Err(Error::non_convergence(
                "classical Fisher quadrature",
                format!("halving the resolution changes entries by {diff:.3e} of the largest"),
            ));
        }
    }
    Ok(FisherMatrix::new(fine, FisherKind::Classical))
}

fn cfim_at(scene: &SceneParams, field: &IntensityField, n: usize) -> Matrix4<f64> {
    let [sx, sy] = field.support();
    let pad = 0.5 * scene.r;
    let grid = QuadGrid::new([scene.centroid_x, scene.centroid_y], [sx + pad, sy + pad], [n, n]);
    let sums = exec::sum_indexed_array::<10, _>(n, |j| {
        let y = grid.y(j);
        let mut acc = [0.0; 10];
        for i in 0..n {
            let (p, d) = pdf_with_gradient(scene, field, grid.x(i), y);
            if p < PDF_FLOOR {
                continue;
            }
            let inv = 1.0 / p;
            let mut k = 0;
            for a in 0..4 {
                for b in a..4 {
                    acc[k] += d[a] * d[b] * inv;
                    k += 1;
                }
            }
        }
        acc
    });
    let mut m = Matrix4::zeros();
    let mut k = 0;
    for a in 0..4 {
        for b in a..4 {
            let v = sums[k] * grid.cell_area();
            m[(a, b)] = v;
            m[(b, a)] = v;
            k += 1;
        }
    }
    m
}

/// Classical Fisher matrix expanded to second order in `r`.
pub fn cfim_smallr(scene: &SceneParams, k: &SmallRCoeffs) -> FisherMatrix {
    let (r, e) = (scene.r, scene.epsilon);
    let (s, c) = scene.alpha.sin_cos();
    let s2a = (2.0 * scene.alpha).sin();
    let c2a = (2.0 * scene.alpha).cos();
    let e2 = e * e;
    let e4 = e2 * e2;
    let r2 = r * r;
    let g = 2.0 * e2 + 1.0;
    let h = 2.0 - 5.0 * e2;
    let (a11, a22) = (k.a(1, 1), k.a(2, 2));
    let (b20, b02) = (k.b(2, 0), k.b(0, 2));
    let (c10, c01, c20, c02, c11) = (k.c(1, 0), k.c(0, 1), k.c(2, 0), k.c(0, 2), k.c(1, 1));
    let (f10, f01, q10, q01, t11) = (k.f(1, 0), k.f(0, 1), k.q(1, 0), k.q(0, 1), k.t11);

    let j11 = c10
        - r2 / 8.0
            * (a22 * s * s
                + g * b20 * s2a
                + g * c20 * c * c
                + 2.0 * e2 * (s * s * (c11 - t11) - c * c * f10 - q10 * s2a));
    let j22 = c01
        - r2 / 8.0
            * (a22 * c * c
                + g * s * (2.0 * b02 * c + c02 * s)
                + 2.0 * e2 * (c * c * (c11 - t11) - q01 * s2a - f01 * s * s));
    let j33 = e2 / 4.0 * (a11 * s2a + c01 * s * s + c10 * c * c)
        + r2 / 64.0
            * (h * a22 * s2a * s2a
                + 8.0 * e4 * s2a * (q10 * c * c + q01 * s * s)
                + 4.0 * h * s2a * (b02 * s * s + b20 * c * c)
                + 2.0 * h * (c11 * s2a * s2a + c20 * c.powi(4) + c02 * s.powi(4))
                + 4.0 * e4 * (f01 * s.powi(4) + f10 * c.powi(4))
                + 6.0 * e4 * t11 * s2a * s2a);
    let j44 = r2 * e2 / 4.0 * (c10 * s * s + c01 * c * c - a11 * s2a);
    let j12 = a11
        - r2 / 8.0
            * (g * b20 * c * c + g * b02 * s * s - 2.0 * e2 * (q01 * s * s + q10 * c * c)
                + e2 * a22 * s2a
                + (e2 + 1.0) * c11 * s2a
                - 2.0 * e2 * t11 * s2a);
    let j13 = e / 2.0 * (c10 * c + a11 * s)
        - e * r2 / 16.0
            * (g * a22 * s * s * c + g * b02 * s.powi(3) + 3.0 * g * b20 * s * c * c + 2.0 * g * c11 * s * s * c
                + g * c20 * c.powi(3)
                - 2.0 * e2 * (f10 * c.powi(3) + 3.0 * s * c * c * q10 + q01 * s.powi(3) + 3.0 * t11 * s * s * c));
    let j14 = r * e / 2.0 * (a11 * c - c10 * s);
    let j23 = e / 2.0 * (a11 * c + c01 * s)
        - r2 * e / 16.0
            * (g * a22 * s * c * c + g * b20 * c.powi(3) + 3.0 * g * b02 * s * s * c + g * c02 * s.powi(3)
                + 2.0 * g * c11 * s * c * c
                - 2.0 * e2 * f01 * s.powi(3)
                - 2.0 * e2 * q10 * c.powi(3)
                - 6.0 * e2 * q01 * s * s * c
                - 6.0 * e2 * t11 * s * c * c);
    let j24 = r * e / 2.0 * (c01 * c - a11 * s);
    let j34 = r * e2 / 8.0 * (2.0 * a11 * c2a + (c01 - c10) * s2a);

    #[rustfmt::skip]
    let m = Matrix4::new(
        j11, j12, j13, j14,
        j12, j22, j23, j24,
        j13, j23, j33, j34,
        j14, j24, j34, j44,
    );
    FisherMatrix::new(m, FisherKind::Classical)
}

/// Geometry factor `𝒜` of the small-separation direct-imaging precision.
pub fn a_factor(k: &SmallRCoeffs, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    let s2a = (2.0 * alpha).sin();
    2.0 * k.a(2, 2) * s * s * c * c
        + 2.0 * (k.b(2, 0) * c * c + k.b(0, 2) * s * s) * s2a
        + k.c(0, 2) * s.powi(4)
        + k.c(1, 1) * s2a * s2a
        + k.c(2, 0) * c.powi(4)
}

/// Small-separation direct-imaging precision and its geometry factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectPrecision {
    /// `r²(1 − ε²)²N𝒜/16`.
    pub h_r_direct: f64,
    pub a_factor: f64,
    pub prefactor: f64,
}

/// Leading-order `H_r` for direct imaging.
///
/// The expansion drops an `O(r²)` coupling between the distance and azimuth
/// rows that is absent only for circularly symmetric PSFs, or for PSFs with
/// reflection symmetry about the axes when `α` is a multiple of `π/2`.
pub fn precision_r_direct(scene: &SceneParams, k: &SmallRCoeffs) -> Result<DirectPrecision> {
    scene.validate_for_precision()?;
    let a = a_factor(k, scene.alpha);
    let w = 1.0 - scene.epsilon * scene.epsilon;
    Ok(DirectPrecision {
        h_r_direct: DIRECT_PREFACTOR * scene.r * scene.r * w * w * scene.n_total * a,
        a_factor: a,
        prefactor: DIRECT_PREFACTOR,
    })
}

/// `N/(J⁻¹)₃₃` from the numeric classical Fisher matrix; zero at `r = 0`.
pub fn precision_r_direct_numeric(scene: &SceneParams, field: &IntensityField, opts: &CfimOptions) -> Result<f64> {
    scene.validate_for_precision()?;
    if scene.r == 0.0 {
        return Ok(0.0);
    }
    let j = cfim_numeric(scene, field, opts)?;
    Ok(j.precision(DISTANCE, scene.n_total)?.0)
}

/// Which candidate prefactor the numeric precision supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefactorResolution {
    /// `N/(J⁻¹)₃₃ ÷ (r²(1 − ε²)²N𝒜)`.
    pub ratio: f64,
    /// `1/16` or `1/32`, whichever is closer.
    pub matched: f64,
    /// `|ratio − matched| / matched`.
    pub relative_error: f64,
}

/// Compares the numeric direct-imaging precision with both candidate prefactors.
pub fn resolve_prefactor(
    scene: &SceneParams,
    field: &IntensityField,
    k: &SmallRCoeffs,
    opts: &CfimOptions,
) -> Result<PrefactorResolution> {
    if scene.r <= 0.0 {
        return Err(Error::domain("prefactor resolution needs r > 0"));
    }
    let numeric = precision_r_direct_numeric(scene, field, opts)?;
    let w = 1.0 - scene.epsilon * scene.epsilon;
    let ratio = numeric / (scene.r * scene.r * w * w * scene.n_total * a_factor(k, scene.alpha));
    let matched = [1.0 / 16.0, 1.0 / 32.0]
        .into_iter()
        .min_by(|a, b| (ratio - a).abs().total_cmp(&(ratio - b).abs()))
        .unwrap_or(DIRECT_PREFACTOR);
    Ok(PrefactorResolution { ratio, matched, relative_error: (ratio - matched).abs() / matched })
}
