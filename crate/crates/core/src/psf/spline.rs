//! Cubic B-spline interpolation on cell-centred grids with zero continuation
//! outside the domain.

/// Cubic B-spline basis value.
#[inline]
fn bspline(s: f64) -> f64 {
    let a = s.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        let t = 2.0 - a;
        t * t * t / 6.0
    } else {
        0.0
    }
}

/// Derivative of the cubic B-spline basis.
#[inline]
fn bspline_deriv(s: f64) -> f64 {
    let a = s.abs();
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    if a < 1.0 {
        sign * (-2.0 * a + 1.5 * a * a)
    } else if a < 2.0 {
        let t = 2.0 - a;
        -sign * 0.5 * t * t
    } else {
        0.0
    }
}

/// Solves `(c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i]` with `c[-1] = c[n] = 0` in place.
fn prefilter_line(line: &mut [f64], scratch: &mut Vec<f64>) {
    let n = line.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    // Thomas algorithm with diagonal 4/6 and off-diagonals 1/6, scaled by 6.
    let mut denom = 4.0;
    scratch[0] = 1.0 / denom;
    line[0] = 6.0 * line[0] / denom;
    for i in 1..n {
        denom = 4.0 - scratch[i - 1];
        scratch[i] = 1.0 / denom;
        line[i] = (6.0 * line[i] - line[i - 1]) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        line[i] -= scratch[i] * line[i + 1];
    }
}

/// Interpolating cubic B-spline over an `nx × ny` row-major sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline2 {
    nx: usize,
    ny: usize,
    coeffs: Vec<f64>,
}

impl Spline2 {
    pub fn new(samples: &[f64], nx: usize, ny: usize) -> Self {
        assert_eq!(samples.len(), nx * ny);
        let mut coeffs = samples.to_vec();
        let mut scratch = Vec::new();
        for row in coeffs.chunks_mut(nx) {
            prefilter_line(row, &mut scratch);
        }
        let mut col = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = coeffs[j * nx + i];
            }
            prefilter_line(&mut col, &mut scratch);
            for j in 0..ny {
                coeffs[j * nx + i] = col[j];
            }
        }
        Self { nx, ny, coeffs }
    }

    #[inline]
    fn coeff(&self, i: isize, j: isize) -> f64 {
        if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
            0.0
        } else {
            self.coeffs[j as usize * self.nx + i as usize]
        }
    }

    /// Value at fractional index coordinates (`u` along x, `v` along y).
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.eval_with(u, v, bspline, bspline)
    }

    /// Partial derivatives with respect to the index coordinates.
    pub fn eval_grad(&self, u: f64, v: f64) -> [f64; 2] {
        [
            self.eval_with(u, v, bspline_deriv, bspline),
            self.eval_with(u, v, bspline, bspline_deriv),
        ]
    }

    #[inline]
    fn eval_with(&self, u: f64, v: f64, wx: fn(f64) -> f64, wy: fn(f64) -> f64) -> f64 {
        if !(u > -2.0 && v > -2.0 && u < self.nx as f64 + 1.0 && v < self.ny as f64 + 1.0) {
            return 0.0;
        }
        let i0 = u.floor();
        let j0 = v.floor();
        let (tu, tv) = (u - i0, v - j0);
        let (i0, j0) = (i0 as isize, j0 as isize);
        let mut wxs = [0.0; 4];
        let mut wys = [0.0; 4];
        for m in 0..4 {
            wxs[m] = wx(tu - (m as f64 - 1.0));
            wys[m] = wy(tv - (m as f64 - 1.0));
        }
        let mut acc = 0.0;
        for (k, wyk) in wys.iter().enumerate() {
            let mut row = 0.0;
            for (m, wxm) in wxs.iter().enumerate() {
                row += wxm * self.coeff(i0 + m as isize - 1, j0 + k as isize - 1);
            }
            acc += wyk * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_exactly() {
        let (nx, ny) = (20, 17);
        let f: Vec<f64> = (0..nx * ny)
            .map(|k| {
                let (i, j) = ((k % nx) as f64, (k / nx) as f64);
                (-(i - 9.5).powi(2) / 8.0 - (j - 8.0).powi(2) / 6.0).exp()
            })
            .collect();
        let s = Spline2::new(&f, nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                assert!((s.eval(i as f64, j as f64) - f[j * nx + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smooth_function_accuracy_and_gradient() {
        let n = 64;
        let h = 0.25;
        let g = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp();
        let coord = |i: usize| -8.0 + (i as f64 + 0.5) * h;
        let f: Vec<f64> = (0..n * n).map(|k| g(coord(k % n), coord(k / n))).collect();
        let s = Spline2::new(&f, n, n);
        let (x, y) = (0.37, -0.81);
        let (u, v) = ((x + 8.0) / h - 0.5, (y + 8.0) / h - 0.5);
        assert!((s.eval(u, v) - g(x, y)).abs() < 1e-4);
        let gr = s.eval_grad(u, v);
        assert!((gr[0] / h - (-x * g(x, y))).abs() < 1e-3);
        assert!((gr[1] / h - (-y * g(x, y))).abs() < 1e-3);
        assert_eq!(s.eval(-5.0, 3.0), 0.0);
    }
}
