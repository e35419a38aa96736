use super::field::{derivative_grids, gaussian_derivatives, IntensityField};
use crate::error::{Error, Result};
use crate::exec;
use crate::quad::QuadGrid;

/// Points with `Λ` below this fraction of the peak are left out of the coefficient integrals.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Relative change allowed between the fine and coarse coefficient estimates.
pub const COEFF_CONVERGENCE_TOL: f64 = 1e-6;

const NAMES: [&str; 14] = [
    "a11", "a22", "b20", "b02", "c10", "c01", "c20", "c02", "c11", "f10", "f01", "q10", "q01", "t11",
];

/// Intensity-derivative integrals entering the small-separation classical Fisher matrix.
///
/// With `Λ^(i,j) = ∂ⁱₓ∂ʲ_y Λ`:
/// `a_ij = ∫Λ^(i,0)Λ^(0,j)/Λ`, `b_ij = ∫Λ^(i,j)Λ^(1,1)/Λ`, `c_ij = ∫(Λ^(i,j))²/Λ`,
/// `f_ij = ∫(Λ^(i,j))⁴/Λ³`, `q_ij = ∫Λ^(0,1)Λ^(1,0)(Λ^(i,j))²/Λ³` and
/// `t11 = ∫(Λ^(0,1))²(Λ^(1,0))²/Λ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallRCoeffs {
    pub a11: f64,
    pub a22: f64,
    pub b20: f64,
    pub b02: f64,
    pub c10: f64,
    pub c01: f64,
    pub c20: f64,
    pub c02: f64,
    pub c11: f64,
    pub f10: f64,
    pub f01: f64,
    pub q10: f64,
    pub q01: f64,
    pub t11: f64,
}

impl SmallRCoeffs {
    fn from_array(v: [f64; 14]) -> Self {
        let [a11, a22, b20, b02, c10, c01, c20, c02, c11, f10, f01, q10, q01, t11] = v;
        Self { a11, a22, b20, b02, c10, c01, c20, c02, c11, f10, f01, q10, q01, t11 }
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (1, 1) => self.a11,
            (2, 2) => self.a22,
            _ => panic!("a_{i}{j} is not part of the expansion"),
        }
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (2, 0) => self.b20,
            (0, 2) => self.b02,
            _ => panic!("b_{i}{j} is not part of the expansion"),
        }
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (1, 0) => self.c10,
            (0, 1) => self.c01,
            (2, 0) => self.c20,
            (0, 2) => self.c02,
            (1, 1) => self.c11,
            _ => panic!("c_{i}{j} is not part of the expansion"),
        }
    }

    pub fn f(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (1, 0) => self.f10,
            (0, 1) => self.f01,
            _ => panic!("f_{i}{j} is not part of the expansion"),
        }
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (1, 0) => self.q10,
            (0, 1) => self.q01,
            _ => panic!("q_{i}{j} is not part of the expansion"),
        }
    }
}

#[inline]
fn integrands(d: &[[f64; 3]; 3], floor: f64) -> [f64; 14] {
    let l = d[0][0];
    if l <= floor {
        return [0.0; 14];
    }
    let (l10, l01, l20, l02, l11) = (d[1][0], d[0][1], d[2][0], d[0][2], d[1][1]);
    let i1 = 1.0 / l;
    let i3 = i1 * i1 * i1;
    let (s10, s01) = (l10 * l10, l01 * l01);
    [
        l10 * l01 * i1,
        l20 * l02 * i1,
        l20 * l11 * i1,
        l02 * l11 * i1,
        s10 * i1,
        s01 * i1,
        l20 * l20 * i1,
        l02 * l02 * i1,
        l11 * l11 * i1,
        s10 * s10 * i3,
        s01 * s01 * i3,
        l01 * l10 * s10 * i3,
        l01 * l10 * s01 * i3,
        s01 * s10 * i3,
    ]
}

fn gaussian_integrals(g: &crate::psf::GaussianPsf, half: [f64; 2], n: usize, floor: f64) -> [f64; 14] {
    let grid = QuadGrid::new([0.0, 0.0], half, [n, n]);
    let sums = exec::sum_indexed_array::<14, _>(n, |j| {
        let y = grid.y(j);
        let mut acc = [0.0; 14];
        for i in 0..n {
            let v = integrands(&gaussian_derivatives(g, grid.x(i), y), floor);
            acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        acc
    });
    sums.map(|s| s * grid.cell_area())
}

fn node_integrals(derivs: &[[Vec<f64>; 3]; 3], nx: usize, ny: usize, area: f64, floor: f64) -> [f64; 14] {
    let sums = exec::sum_indexed_array::<14, _>(ny, |j| {
        let mut acc = [0.0; 14];
        for i in 0..nx {
            let k = j * nx + i;
            let d = std::array::from_fn(|a| std::array::from_fn(|b| derivs[a][b][k]));
            let v = integrands(&d, floor);
            acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        acc
    });
    sums.map(|s| s * area)
}

/// Cauchy–Schwarz bound for each coefficient, used to scale convergence errors.
fn scales(v: &[f64; 14]) -> [f64; 14] {
    let k = SmallRCoeffs::from_array(*v);
    [
        (k.c10 * k.c01).sqrt(),
        (k.c20 * k.c02).sqrt(),
        (k.c20 * k.c11).sqrt(),
        (k.c02 * k.c11).sqrt(),
        k.c10,
        k.c01,
        k.c20,
        k.c02,
        k.c11,
        k.f10,
        k.f01,
        (k.t11 * k.f10).sqrt(),
        (k.t11 * k.f01).sqrt(),
        k.t11,
    ]
}

/// Computes the expansion coefficients of an intensity field.
///
/// Gaussian fields use analytic derivatives on a midpoint grid and are
/// checked against a half-resolution grid. Grid fields integrate the
/// finite-difference derivative grids at the nodes and are checked against
/// the same construction on every other node, with the error estimate
/// scaled for fourth-order differences.
pub fn smallr_coeffs(field: &IntensityField) -> Result<SmallRCoeffs> {
    let floor = SUPPORT_CUTOFF * field.peak();
    let (fine, err) = match field {
        IntensityField::Gaussian(g) => {
            let half = field.support();
            let fine = gaussian_integrals(g, half, 512, floor);
            let coarse = gaussian_integrals(g, half, 256, floor);
            let err: [f64; 14] = std::array::from_fn(|k| (fine[k] - coarse[k]).abs());
            (fine, err)
        }
        IntensityField::Grid(g) => {
            let (nx, ny) = (g.nx, g.ny);
            let (hx, hy) = (g.dx(), g.dy());
            let fine = node_integrals(&g.derivs, nx, ny, hx * hy, floor);
            let (cx, cy) = (nx / 2, ny / 2);
            if cx < 8 || cy < 8 {
                return Err(Error::InvalidGrid("grid too small for coefficient refinement check".into()));
            }
            let lambda: Vec<f64> = (0..cy)
                .flat_map(|j| (0..cx).map(move |i| (i, j)))
                .map(|(i, j)| g.derivs[0][0][2 * j * nx + 2 * i])
                .collect();
            let coarse_derivs = derivative_grids(&lambda, cx, cy, 2.0 * hx, 2.0 * hy);
            let coarse = node_integrals(&coarse_derivs, cx, cy, 4.0 * hx * hy, floor);
            let err: [f64; 14] = std::array::from_fn(|k| (fine[k] - coarse[k]).abs() / 15.0);
            (fine, err)
        }
    };
    let sc = scales(&fine);
    for k in 0..14 {
        let rel = err[k] / sc[k].max(f64::MIN_POSITIVE);
        if !fine[k].is_finite() || rel > COEFF_CONVERGENCE_TOL {
            return Err(Error::non_convergence(
                format!("expansion coefficient {}", NAMES[k]),
                format!("estimated relative error {rel:.3e} exceeds {COEFF_CONVERGENCE_TOL:.0e}"),
            ));
        }
    }
    Ok(SmallRCoeffs::from_array(fine))
}
