use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Elliptical Gaussian amplitude
/// `ψ(f) = exp(-¼ fᵀ Σ⁻¹ f) / (√(2π) |Σ|^¼)` with
/// `Σ = [[σ₁², βσ₁σ₂], [βσ₁σ₂, σ₂²]]`.
///
/// The intensity `ψ²` is the bivariate normal density with covariance `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPsf {
    sigma1: f64,
    sigma2: f64,
    beta: f64,
    inv: [f64; 3],
    norm: f64,
}

impl GaussianPsf {
    pub fn new(sigma1: f64, sigma2: f64, beta: f64) -> Result<Self> {
        if !(sigma1.is_finite() && sigma1 > 0.0) {
            return Err(Error::domain(format!("sigma1 must be positive, got {sigma1}")));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
        }
        if !(beta.is_finite() && beta.abs() < 1.0) {
            return Err(Error::domain(format!("|beta| must be < 1, got {beta}")));
        }
        let one_m_b2 = 1.0 - beta * beta;
        let det = sigma1 * sigma1 * sigma2 * sigma2 * one_m_b2;
        let inv = [
            1.0 / (sigma1 * sigma1 * one_m_b2),
            -beta / (sigma1 * sigma2 * one_m_b2),
            1.0 / (sigma2 * sigma2 * one_m_b2),
        ];
        Ok(Self {
            sigma1,
            sigma2,
            beta,
            inv,
            norm: 1.0 / ((2.0 * PI).sqrt() * det.powf(0.25)),
        })
    }

    /// Gaussian with covariance `Σ` given entrywise.
    pub fn from_covariance(sxx: f64, sxy: f64, syy: f64) -> Result<Self> {
        if !(sxx > 0.0 && syy > 0.0) {
            return Err(Error::domain("covariance diagonal must be positive"));
        }
        let (s1, s2) = (sxx.sqrt(), syy.sqrt());
        Self::new(s1, s2, sxy / (s1 * s2))
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Covariance entries `(Σxx, Σxy, Σyy)`.
    pub fn covariance(&self) -> [f64; 3] {
        [
            self.sigma1 * self.sigma1,
            self.beta * self.sigma1 * self.sigma2,
            self.sigma2 * self.sigma2,
        ]
    }

    /// Inverse covariance entries `(Axx, Axy, Ayy)`.
    pub fn inverse_covariance(&self) -> [f64; 3] {
        self.inv
    }

    /// `fᵀ Σ⁻¹ f`.
    #[inline]
    pub fn quad_form(&self, x: f64, y: f64) -> f64 {
        let [a, b, c] = self.inv;
        a * x * x + 2.0 * b * x * y + c * y * y
    }

    /// `Σ⁻¹ f`.
    #[inline]
    pub fn whiten(&self, x: f64, y: f64) -> [f64; 2] {
        let [a, b, c] = self.inv;
        [a * x + b * y, b * x + c * y]
    }

    #[inline]
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        self.norm * (-0.25 * self.quad_form(x, y)).exp()
    }

    #[inline]
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let p = self.amplitude(x, y);
        let [ux, uy] = self.whiten(x, y);
        [-0.5 * ux * p, -0.5 * uy * p]
    }

    /// Intensity `Λ = ψ²`.
    #[inline]
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        self.norm * self.norm * (-0.5 * self.quad_form(x, y)).exp()
    }

    /// Largest width, used to size quadrature domains.
    pub fn max_width(&self) -> f64 {
        self.sigma1.max(self.sigma2)
    }

    /// Overlap `∫ψ(f)ψ(f - d) = exp(-dᵀΣ⁻¹d / 8)`.
    pub fn overlap(&self, dx: f64, dy: f64) -> f64 {
        (-0.125 * self.quad_form(dx, dy)).exp()
    }

    /// `∫ψ(f) ∇ψ(f - d) = ¼ Σ⁻¹ d · overlap(d)`.
    pub fn shifted_gradient_overlap(&self, dx: f64, dy: f64) -> [f64; 2] {
        let delta = self.overlap(dx, dy);
        let [ux, uy] = self.whiten(dx, dy);
        [0.25 * ux * delta, 0.25 * uy * delta]
    }

    /// Gaussian whose covariance is `R(θ) Σ R(θ)ᵀ`.
    pub fn rotated(&self, theta: f64) -> Self {
        if theta == 0.0 {
            return *self;
        }
        let (s, c) = theta.sin_cos();
        let [sxx, sxy, syy] = self.covariance();
        let rxx = c * c * sxx - 2.0 * c * s * sxy + s * s * syy;
        let ryy = s * s * sxx + 2.0 * c * s * sxy + c * c * syy;
        let rxy = c * s * (sxx - syy) + (c * c - s * s) * sxy;
        // Rotation preserves positive definiteness.
        Self::from_covariance(rxx, rxy, ryy).expect("rotation preserves a valid covariance")
    }
}
