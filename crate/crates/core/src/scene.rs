use crate::error::{Error, Result};

/// Parameter indices in Fisher matrices: `(X̄, Ȳ, r, α)`.
pub const CENTROID_X: usize = 0;
pub const CENTROID_Y: usize = 1;
pub const DISTANCE: usize = 2;
pub const AZIMUTH: usize = 3;

/// The two-source scene: centroid, distance, azimuth, intensity imbalance
/// `ε = (N₂ − N₁)/(N₂ + N₁)` and total photon budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub r: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub n_total: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            centroid_x: 0.0,
            centroid_y: 0.0,
            r: 0.0,
            alpha: 0.0,
            epsilon: 0.0,
            n_total: 1.0,
        }
    }
}

impl SceneParams {
    pub fn new(r: f64, alpha: f64, epsilon: f64, n_total: f64) -> Self {
        Self {
            r,
            alpha,
            epsilon,
            n_total,
            ..Self::default()
        }
    }

    pub fn with_centroid(mut self, x: f64, y: f64) -> Self {
        self.centroid_x = x;
        self.centroid_y = y;
        self
    }

    /// Checks `r ≥ 0`, `|ε| ≤ 1`, `N > 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.centroid_x, self.centroid_y, self.r, self.alpha, self.epsilon, self.n_total];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("scene parameters must be finite"));
        }
        if self.r < 0.0 {
            return Err(Error::domain(format!("r must be non-negative, got {}", self.r)));
        }
        if self.epsilon.abs() > 1.0 {
            return Err(Error::domain(format!("|epsilon| must be <= 1, got {}", self.epsilon)));
        }
        if self.n_total <= 0.0 {
            return Err(Error::domain(format!("n_total must be positive, got {}", self.n_total)));
        }
        Ok(())
    }

    /// As [`validate`](Self::validate), additionally rejecting a dark source (`|ε| = 1`).
    pub fn validate_for_precision(&self) -> Result<()> {
        self.validate()?;
        if self.epsilon.abs() >= 1.0 {
            return Err(Error::domain(
                "|epsilon| = 1 leaves one source dark; precision limits are undefined",
            ));
        }
        Ok(())
    }

    /// Parameter vector `(X̄, Ȳ, r, α)`.
    pub fn params(&self) -> [f64; 4] {
        [self.centroid_x, self.centroid_y, self.r, self.alpha]
    }

    pub fn with_params(mut self, g: [f64; 4]) -> Self {
        self.centroid_x = g[0];
        self.centroid_y = g[1];
        self.r = g[2];
        self.alpha = g[3];
        self
    }

    /// Source positions `(X̄ ∓ r/2 cos α, Ȳ ∓ r/2 sin α)`.
    pub fn sources(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.alpha.sin_cos();
        let (hx, hy) = (0.5 * self.r * c, 0.5 * self.r * s);
        [
            [self.centroid_x - hx, self.centroid_y - hy],
            [self.centroid_x + hx, self.centroid_y + hy],
        ]
    }

    /// Source weights `((1 − ε)/2, (1 + ε)/2)`.
    pub fn weights(&self) -> [f64; 2] {
        [0.5 * (1.0 - self.epsilon), 0.5 * (1.0 + self.epsilon)]
    }
}
