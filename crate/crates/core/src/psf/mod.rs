//! Point-spread functions and the momentum-space moments consumed by the
//! Fisher-information formulas.
//!
//! A PSF is a real, unit-norm, inversion-symmetric amplitude `ψ(x, y)`.
//! Two backends are provided: an analytic elliptical [`GaussianPsf`] and a
//! sampled [`GridPsf`]. All moments are expressed through the momentum
//! operators `P̂ = -i∇`; because `ψ` is real, `⟨P̂ₓ²⟩ = ∫(∂ₓψ)²` and so on.

mod gaussian;
mod grid;
mod spline;

pub use gaussian::GaussianPsf;
pub use grid::{GridPsf, BOUNDARY_DECAY, MIN_GRID_SIZE, SYMMETRY_TOL};
pub(crate) use grid::{fd_x, fd_y};
pub use spline::Spline2;

use crate::error::{Error, Result};
use crate::exec;

/// Grid-moment convergence threshold (relative, Richardson-estimated).
pub const MOMENT_CONVERGENCE_TOL: f64 = 1e-6;

/// Default grid size for discretising analytic PSFs.
pub const DEFAULT_GRID_SIZE: usize = 512;

/// Default half-extent of a discretisation domain in units of the largest width.
pub const DEFAULT_EXTENT_WIDTHS: f64 = 8.0;

/// A point-spread function backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Psf {
    Gaussian(GaussianPsf),
    Grid(Box<GridPsf>),
}

impl From<GaussianPsf> for Psf {
    fn from(g: GaussianPsf) -> Self {
        Psf::Gaussian(g)
    }
}

impl From<GridPsf> for Psf {
    fn from(g: GridPsf) -> Self {
        Psf::Grid(Box::new(g))
    }
}

/// Validated Gaussian PSF.
pub fn make_gaussian(sigma1: f64, sigma2: f64, beta: f64) -> Result<Psf> {
    GaussianPsf::new(sigma1, sigma2, beta).map(Psf::from)
}

/// Validated, normalised grid PSF from row-major samples.
pub fn make_grid(samples: Vec<f64>, nx: usize, ny: usize, half_extent_x: f64, half_extent_y: f64) -> Result<Psf> {
    GridPsf::new(samples, nx, ny, half_extent_x, half_extent_y).map(Psf::from)
}

/// Samples a Gaussian onto the default `512²` grid over `±8·max(σ₁, σ₂)`.
pub fn discretize_gaussian(g: &GaussianPsf, n: usize) -> Result<GridPsf> {
    let half = DEFAULT_EXTENT_WIDTHS * g.max_width();
    GridPsf::sample(|x, y| g.amplitude(x, y), n, n, half, half)
}

impl Psf {
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        match self {
            Psf::Gaussian(g) => g.amplitude(x, y),
            Psf::Grid(g) => g.amplitude(x, y),
        }
    }

    /// Gradient of the amplitude as evaluated by [`Psf::amplitude`].
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            Psf::Gaussian(g) => g.gradient(x, y),
            Psf::Grid(g) => g.gradient(x, y),
        }
    }

    /// Half-extent of the region outside which the amplitude is negligible.
    pub fn support(&self) -> [f64; 2] {
        match self {
            Psf::Gaussian(g) => [DEFAULT_EXTENT_WIDTHS * g.max_width(); 2],
            Psf::Grid(g) => g.half_extent(),
        }
    }

    /// Grid resolution used when integrating against this PSF.
    pub fn default_resolution(&self) -> [usize; 2] {
        match self {
            Psf::Gaussian(_) => [DEFAULT_GRID_SIZE; 2],
            Psf::Grid(g) => [g.nx(), g.ny()],
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianPsf> {
        match self {
            Psf::Gaussian(g) => Some(g),
            Psf::Grid(_) => None,
        }
    }

    pub fn base_moments(&self) -> Result<BaseMoments> {
        base_moments(self)
    }

    pub fn geometry_moments(&self, r: f64, alpha: f64) -> Result<GeometryMoments> {
        let base = base_moments(self)?;
        geometry_moments(self, r, alpha, &base)
    }

    pub fn rotate(&self, theta: f64) -> Result<Psf> {
        rotate(self, theta)
    }
}

/// PSF-intrinsic second moments `κₓ = ⟨P̂ₓ²⟩`, `κ_y = ⟨P̂_y²⟩`, `η = ⟨P̂ₓP̂_y⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMoments {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub eta: f64,
}

impl BaseMoments {
    /// `κₓκ_y − η²`, the determinant of the momentum second-moment matrix.
    pub fn det(&self) -> f64 {
        self.kappa_x * self.kappa_y - self.eta * self.eta
    }

    pub fn trace(&self) -> f64 {
        self.kappa_x + self.kappa_y
    }

    /// `√(4η² + (κ_y − κₓ)²)`, the eigenvalue splitting of the moment matrix.
    pub fn splitting(&self) -> f64 {
        (4.0 * self.eta * self.eta + (self.kappa_y - self.kappa_x).powi(2)).sqrt()
    }

    /// `⟨P̂_r²⟩` along the displacement direction `α`.
    pub fn kappa_r(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        self.kappa_x * c * c + self.kappa_y * s * s + self.eta * (2.0 * alpha).sin()
    }

    /// `⟨P̂_{r⊥}²⟩` orthogonal to the displacement direction `α`.
    pub fn kappa_r_perp(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        self.kappa_x * s * s + self.kappa_y * c * c - self.eta * (2.0 * alpha).sin()
    }
}

/// Displacement-dependent quantities for a source pair at distance `r` and azimuth `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryMoments {
    /// Overlap `⟨ψ₁|ψ₂⟩ = ⟨cos(r P̂_r)⟩`.
    pub delta: f64,
    /// `⟨P̂ₓ sin(r P̂_r)⟩`.
    pub gamma_x: f64,
    /// `⟨P̂_y sin(r P̂_r)⟩`.
    pub gamma_y: f64,
    pub kappa_r: f64,
    pub kappa_r_perp: f64,
    pub r: f64,
    pub alpha: f64,
}

/// Computes `κₓ, κ_y, η`: closed forms for Gaussians, quadrature for grids.
pub fn base_moments(psf: &Psf) -> Result<BaseMoments> {
    match psf {
        Psf::Gaussian(g) => {
            let b2 = 1.0 - g.beta() * g.beta();
            let (s1, s2) = (g.sigma1(), g.sigma2());
            Ok(BaseMoments {
                kappa_x: 1.0 / (4.0 * s1 * s1 * b2),
                kappa_y: 1.0 / (4.0 * s2 * s2 * b2),
                eta: -g.beta() / (4.0 * s1 * s2 * b2),
            })
        }
        Psf::Grid(g) => grid_base_moments(g),
    }
}

fn moments_from_derivatives(dx: &[f64], dy: &[f64], nx: usize, ny: usize, area: f64) -> [f64; 3] {
    let sums = exec::sum_indexed_array(ny, |j| {
        let mut acc = [0.0; 3];
        for i in 0..nx {
            let (a, b) = (dx[j * nx + i], dy[j * nx + i]);
            acc[0] += a * a;
            acc[1] += b * b;
            acc[2] += a * b;
        }
        acc
    });
    sums.map(|s| s * area)
}

fn grid_base_moments(g: &GridPsf) -> Result<BaseMoments> {
    let (nx, ny) = (g.nx(), g.ny());
    let fine = moments_from_derivatives(g.deriv_x(), g.deriv_y(), nx, ny, g.dx() * g.dy());

    // Every other sample gives a coarser midpoint grid with spacing 2h.
    let (cx, cy) = (nx.div_ceil(2), ny.div_ceil(2));
    if cx >= 5 && cy >= 5 {
        let coarse: Vec<f64> = (0..cy)
            .flat_map(|j| (0..cx).map(move |i| (i, j)))
            .map(|(i, j)| g.samples()[2 * j * nx + 2 * i])
            .collect();
        let (hx, hy) = (2.0 * g.dx(), 2.0 * g.dy());
        let cdx = fd_x(&coarse, cx, cy, hx);
        let cdy = fd_y(&coarse, cx, cy, hy);
        let coarse_m = moments_from_derivatives(&cdx, &cdy, cx, cy, hx * hy);
        let scale = fine[0].abs().max(fine[1].abs());
        for (k, name) in ["kappa_x", "kappa_y", "eta"].iter().enumerate() {
            // Fourth-order differences: the fine-grid error is ≈ |fine − coarse| / 15.
            let est = (fine[k] - coarse_m[k]).abs() / 15.0 / scale;
            if est > MOMENT_CONVERGENCE_TOL {
                return Err(Error::non_convergence(
                    format!("grid moment {name}"),
                    format!("estimated relative error {est:.3e} exceeds {MOMENT_CONVERGENCE_TOL:e}"),
                ));
            }
        }
    }
    Ok(BaseMoments {
        kappa_x: fine[0],
        kappa_y: fine[1],
        eta: fine[2],
    })
}

/// Overlap and shift moments for separation `r` along azimuth `α`.
///
/// `δ = ∫ψ(f)ψ(f − d)` and `γ = ∫ψ(f)∇ψ(f − d)` with `d = r(cos α, sin α)`.
pub fn geometry_moments(psf: &Psf, r: f64, alpha: f64, base: &BaseMoments) -> Result<GeometryMoments> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!("r must be finite and non-negative, got {r}")));
    }
    if !alpha.is_finite() {
        return Err(Error::domain("alpha must be finite"));
    }
    let (s, c) = alpha.sin_cos();
    let (dx, dy) = (r * c, r * s);
    let (delta, gamma_x, gamma_y) = if r == 0.0 {
        (1.0, 0.0, 0.0)
    } else {
        match psf {
            Psf::Gaussian(g) => {
                let [gx, gy] = g.shifted_gradient_overlap(dx, dy);
                (g.overlap(dx, dy), gx, gy)
            }
            Psf::Grid(g) => grid_shift_moments(g, dx, dy)?,
        }
    };
    Ok(GeometryMoments {
        delta,
        gamma_x,
        gamma_y,
        kappa_r: base.kappa_r(alpha),
        kappa_r_perp: base.kappa_r_perp(alpha),
        r,
        alpha,
    })
}

fn grid_shift_moments(g: &GridPsf, dx: f64, dy: f64) -> Result<(f64, f64, f64)> {
    let [hx, hy] = g.half_extent();
    if dx.abs() >= hx || dy.abs() >= hy {
        return Err(Error::domain(format!(
            "shift ({dx:.4}, {dy:.4}) exceeds the grid support ±({hx}, {hy})"
        )));
    }
    let nx = g.nx();
    let sums = exec::sum_indexed_array(g.ny(), |j| {
        let y = g.node_y(j);
        let mut acc = [0.0; 3];
        for i in 0..nx {
            let p = g.samples()[j * nx + i];
            if p == 0.0 {
                continue;
            }
            let x = g.node_x(i);
            let shifted = g.amplitude(x - dx, y - dy);
            let [gx, gy] = g.interpolated_derivative(x - dx, y - dy);
            acc[0] += p * shifted;
            acc[1] += p * gx;
            acc[2] += p * gy;
        }
        acc
    });
    let area = g.dx() * g.dy();
    Ok((sums[0] * area, sums[1] * area, sums[2] * area))
}

/// Rotates the PSF counter-clockwise by `theta`: `ψ'(f) = ψ(R(θ)ᵀ f)`.
pub fn rotate(psf: &Psf, theta: f64) -> Result<Psf> {
    if !theta.is_finite() {
        return Err(Error::domain("rotation angle must be finite"));
    }
    match psf {
        Psf::Gaussian(g) => Ok(Psf::Gaussian(g.rotated(theta))),
        Psf::Grid(g) => Ok(Psf::from(g.rotated(theta)?)),
    }
}
