use crate::error::Result;
use crate::psf::{fd_x, fd_y, GaussianPsf, GridPsf, Psf, Spline2};

/// Intensity `Λ = ψ²` with partial derivatives `Λ^(i,j)` for `i, j ≤ 2`.
///
/// Gaussian derivatives are analytic. Grid derivatives are fourth-order
/// finite differences of the sampled intensity, spline-interpolated off the nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityField {
    Gaussian(GaussianPsf),
    Grid(Box<GridIntensity>),
}

/// Sampled intensity and its derivative grids.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIntensity {
    pub(crate) nx: usize,
    pub(crate) ny: usize,
    pub(crate) half_extent: [f64; 2],
    /// `derivs[i][j]` holds `Λ^(i,j)` at the nodes.
    pub(crate) derivs: [[Vec<f64>; 3]; 3],
    splines: [[Spline2; 3]; 3],
}

impl GridIntensity {
    fn new(psf: &GridPsf) -> Self {
        let (nx, ny) = (psf.nx(), psf.ny());
        let lambda: Vec<f64> = psf.samples().iter().map(|v| v * v).collect();
        let derivs = derivative_grids(&lambda, nx, ny, psf.dx(), psf.dy());
        let splines = std::array::from_fn(|i| std::array::from_fn(|j| Spline2::new(&derivs[i][j], nx, ny)));
        Self { nx, ny, half_extent: psf.half_extent(), derivs, splines }
    }

    pub(crate) fn dx(&self) -> f64 {
        2.0 * self.half_extent[0] / self.nx as f64
    }

    pub(crate) fn dy(&self) -> f64 {
        2.0 * self.half_extent[1] / self.ny as f64
    }

    #[inline]
    fn index_coords(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x + self.half_extent[0]) / self.dx() - 0.5,
            (y + self.half_extent[1]) / self.dy() - 0.5,
        )
    }
}

/// `Λ^(i,j)` grids by repeated fourth-order differences.
pub(crate) fn derivative_grids(lambda: &[f64], nx: usize, ny: usize, hx: f64, hy: f64) -> [[Vec<f64>; 3]; 3] {
    let x1 = fd_x(lambda, nx, ny, hx);
    let x2 = fd_x(&x1, nx, ny, hx);
    [lambda.to_vec(), x1, x2].map(|base| {
        let d1 = fd_y(&base, nx, ny, hy);
        let d2 = fd_y(&d1, nx, ny, hy);
        [base, d1, d2]
    })
}

impl IntensityField {
    pub fn new(psf: &Psf) -> Result<Self> {
        Ok(match psf {
            Psf::Gaussian(g) => Self::Gaussian(*g),
            Psf::Grid(g) => Self::Grid(Box::new(GridIntensity::new(g))),
        })
    }

    /// `Λ(x, y)`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Gaussian(g) => g.intensity(x, y),
            Self::Grid(g) => {
                let (u, v) = g.index_coords(x, y);
                g.splines[0][0].eval(u, v)
            }
        }
    }

    /// `Λ` and `∇Λ` together.
    #[inline]
    pub fn value_gradient(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        match self {
            Self::Gaussian(g) => {
                let l = g.intensity(x, y);
                let [axx, axy, ayy] = g.inverse_covariance();
                let (ux, uy) = (axx * x + axy * y, axy * x + ayy * y);
                (l, [-ux * l, -uy * l])
            }
            Self::Grid(g) => {
                let (u, v) = g.index_coords(x, y);
                (
                    g.splines[0][0].eval(u, v),
                    [g.splines[1][0].eval(u, v), g.splines[0][1].eval(u, v)],
                )
            }
        }
    }

    /// `∂ⁱₓ∂ʲ_y Λ(x, y)` for `i, j ∈ {0, 1, 2}`.
    pub fn derivative(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        assert!(i <= 2 && j <= 2, "derivative order ({i},{j}) exceeds (2,2)");
        match self {
            Self::Gaussian(g) => gaussian_derivatives(g, x, y)[i][j],
            Self::Grid(g) => {
                let (u, v) = g.index_coords(x, y);
                g.splines[i][j].eval(u, v)
            }
        }
    }

    /// Half extents outside which the intensity is negligible.
    pub fn support(&self) -> [f64; 2] {
        match self {
            Self::Gaussian(g) => Psf::Gaussian(*g).support(),
            Self::Grid(g) => g.half_extent,
        }
    }

    /// `Λ(0, 0)`, the peak for inversion-symmetric unimodal PSFs.
    pub fn peak(&self) -> f64 {
        match self {
            Self::Gaussian(g) => g.intensity(0.0, 0.0),
            Self::Grid(g) => g.derivs[0][0].iter().fold(0.0f64, |m, &v| m.max(v)),
        }
    }
}

/// Analytic `Λ^(i,j)` for a Gaussian intensity `N(0, Σ)`.
pub(crate) fn gaussian_derivatives(g: &GaussianPsf, x: f64, y: f64) -> [[f64; 3]; 3] {
    let l = g.intensity(x, y);
    let [axx, axy, ayy] = g.inverse_covariance();
    let (ux, uy) = (axx * x + axy * y, axy * x + ayy * y);
    let hx = ux * ux - axx;
    let hy = uy * uy - ayy;
    [
        [l, -uy * l, hy * l],
        [-ux * l, (ux * uy - axy) * l, (2.0 * axy * uy - ux * hy) * l],
        [hx * l, (2.0 * axy * ux - uy * hx) * l, (hx * hy - 4.0 * axy * ux * uy + 2.0 * axy * axy) * l],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn gaussian_derivatives_match_finite_differences() {
        let g = GaussianPsf::new(1.0, 1.4, 0.4).unwrap();
        let (x, y, h) = (0.3, -0.7, 1e-4);
        let d = gaussian_derivatives(&g, x, y);
        for i in 0..3 {
            for j in 0..3 {
                // Differentiate the lower-order entry numerically.
                let num = if i > 0 {
                    let f = |xx: f64| gaussian_derivatives(&g, xx, y)[i - 1][j];
                    (f(x + h) - f(x - h)) / (2.0 * h)
                } else if j > 0 {
                    let f = |yy: f64| gaussian_derivatives(&g, x, yy)[i][j - 1];
                    (f(y + h) - f(y - h)) / (2.0 * h)
                } else {
                    g.intensity(x, y)
                };
                assert_relative_eq!(d[i][j], num, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn isotropic_peak() {
        let f = IntensityField::new(&Psf::Gaussian(GaussianPsf::new(1.0, 1.0, 0.0).unwrap())).unwrap();
        assert_relative_eq!(f.peak(), 1.0 / (2.0 * std::f64::consts::PI), epsilon = 1e-15);
    }
}
