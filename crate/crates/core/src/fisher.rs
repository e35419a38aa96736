//! 4×4 Fisher information matrices in parameter order `(X̄, Ȳ, r, α)`.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

/// Condition number above which inversions are reported as unreliable.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherKind {
    Quantum,
    Classical,
}

/// Per-photon Fisher information matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    pub entries: Matrix4<f64>,
    pub kind: FisherKind,
}

/// Result of inverting a Fisher matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub matrix: Matrix4<f64>,
    /// Ratio of largest to smallest absolute eigenvalue.
    pub condition: f64,
}

impl FisherMatrix {
    pub fn new(entries: Matrix4<f64>, kind: FisherKind) -> Self {
        Self { entries, kind }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Largest `|Fᵢⱼ − Fⱼᵢ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..4 {
            for j in 0..i {
                m = m.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        m
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let sym = 0.5 * (self.entries + self.entries.transpose());
        let e = SymmetricEigen::new(sym).eigenvalues;
        let mut v = [e[0], e[1], e[2], e[3]];
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Symmetric within `1e-12` (relative to the largest entry) and no eigenvalue below `-1e-10`.
    pub fn is_symmetric_psd(&self) -> bool {
        let scale = self.entries.amax().max(1.0);
        self.asymmetry() <= 1e-12 * scale && self.min_eigenvalue() >= -1e-10 * scale
    }

    pub fn condition_number(&self) -> f64 {
        let e = self.eigenvalues();
        let max = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = e.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse by partially pivoted LU, with a condition-number report.
    pub fn inverse(&self) -> Result<Inverse> {
        let condition = self.condition_number();
        if !condition.is_finite() {
            return Err(Error::Singular("Fisher matrix has a zero eigenvalue".into()));
        }
        if condition > ILL_CONDITIONED {
            log::warn!("Fisher matrix condition number {condition:.3e} exceeds {ILL_CONDITIONED:e}");
        }
        let matrix = self
            .entries
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("LU factorisation failed".into()))?;
        Ok(Inverse { matrix, condition })
    }

    /// `N / (F⁻¹)ₖₖ`, the inverse-variance bound for parameter `k`.
    pub fn precision(&self, k: usize, n_total: f64) -> Result<(f64, f64)> {
        let inv = self.inverse()?;
        Ok((n_total / inv.matrix[(k, k)], inv.condition))
    }
}
