use std::path::Path;

use super::spline::Spline2;
use crate::error::{Error, Result};

/// Minimum samples per axis.
pub const MIN_GRID_SIZE: usize = 16;
/// Maximum boundary amplitude relative to the peak.
pub const BOUNDARY_DECAY: f64 = 1e-6;
/// Maximum per-sample inversion asymmetry relative to the peak.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Real amplitude sampled at the cell centres of `[-hx, hx] × [-hy, hy]`.
///
/// Samples are row-major with `y` increasing between rows. The stored
/// samples have unit discrete L² norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPsf {
    half_extent_x: f64,
    half_extent_y: f64,
    nx: usize,
    ny: usize,
    samples: Vec<f64>,
    deriv_x: Vec<f64>,
    deriv_y: Vec<f64>,
    value_spline: Spline2,
    deriv_x_spline: Spline2,
    deriv_y_spline: Spline2,
}

impl GridPsf {
    /// Validates and normalises a sampled amplitude.
    pub fn new(samples: Vec<f64>, nx: usize, ny: usize, half_extent_x: f64, half_extent_y: f64) -> Result<Self> {
        if nx < MIN_GRID_SIZE || ny < MIN_GRID_SIZE {
            return Err(Error::InvalidGrid(format!(
                "grid is {nx}x{ny}, need at least {MIN_GRID_SIZE} samples per axis"
            )));
        }
        if samples.len() != nx * ny {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                nx * ny,
                samples.len()
            )));
        }
        if !(half_extent_x > 0.0 && half_extent_y > 0.0 && half_extent_x.is_finite() && half_extent_y.is_finite()) {
            return Err(Error::InvalidGrid("half extents must be positive and finite".into()));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite sample at column {}, row {}",
                k % nx,
                k / nx
            )));
        }
        let dx = 2.0 * half_extent_x / nx as f64;
        let dy = 2.0 * half_extent_y / ny as f64;
        let norm2: f64 = samples.iter().map(|v| v * v).sum::<f64>() * dx * dy;
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidGrid("samples are not normalisable (zero norm)".into()));
        }
        let scale = norm2.sqrt().recip();
        let samples: Vec<f64> = samples.iter().map(|v| v * scale).collect();
        let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        for j in 0..ny {
            for i in 0..nx {
                let a = samples[j * nx + i];
                let b = samples[(ny - 1 - j) * nx + (nx - 1 - i)];
                if (a - b).abs() > SYMMETRY_TOL * peak {
                    return Err(Error::InvalidGrid(format!(
                        "inversion symmetry violated at column {i}, row {j}: {a} vs {b}"
                    )));
                }
            }
        }

        let mut edge = 0.0f64;
        for i in 0..nx {
            edge = edge.max(samples[i].abs()).max(samples[(ny - 1) * nx + i].abs());
        }
        for j in 0..ny {
            edge = edge.max(samples[j * nx].abs()).max(samples[j * nx + nx - 1].abs());
        }
        if edge > BOUNDARY_DECAY * peak {
            return Err(Error::InvalidGrid(format!(
                "boundary leakage: edge amplitude {:.3e} of peak exceeds {BOUNDARY_DECAY:e}",
                edge / peak
            )));
        }

        let deriv_x = fd_x(&samples, nx, ny, dx);
        let deriv_y = fd_y(&samples, nx, ny, dy);
        Ok(Self {
            half_extent_x,
            half_extent_y,
            nx,
            ny,
            value_spline: Spline2::new(&samples, nx, ny),
            deriv_x_spline: Spline2::new(&deriv_x, nx, ny),
            deriv_y_spline: Spline2::new(&deriv_y, nx, ny),
            samples,
            deriv_x,
            deriv_y,
        })
    }

    /// Samples `f` at the cell centres of the given domain.
    pub fn sample(f: impl Fn(f64, f64) -> f64, nx: usize, ny: usize, half_extent_x: f64, half_extent_y: f64) -> Result<Self> {
        let dx = 2.0 * half_extent_x / nx as f64;
        let dy = 2.0 * half_extent_y / ny as f64;
        let mut samples = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = -half_extent_y + (j as f64 + 0.5) * dy;
            for i in 0..nx {
                samples.push(f(-half_extent_x + (i as f64 + 0.5) * dx, y));
            }
        }
        Self::new(samples, nx, ny, half_extent_x, half_extent_y)
    }

    /// Parses the text matrix format: a header `nx ny hx hy` followed by `ny`
    /// rows of `nx` amplitudes, `y` increasing.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::GridFile {
            line: 1,
            message: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::GridFile {
                line: hline,
                message: format!("header needs 4 fields `nx ny half_extent_x half_extent_y`, got {}", fields.len()),
            });
        }
        let bad = |m: String| Error::GridFile { line: hline, message: m };
        let nx: usize = fields[0].parse().map_err(|_| bad(format!("bad nx `{}`", fields[0])))?;
        let ny: usize = fields[1].parse().map_err(|_| bad(format!("bad ny `{}`", fields[1])))?;
        let hx: f64 = fields[2].parse().map_err(|_| bad(format!("bad half_extent_x `{}`", fields[2])))?;
        let hy: f64 = fields[3].parse().map_err(|_| bad(format!("bad half_extent_y `{}`", fields[3])))?;

        let mut samples = Vec::with_capacity(nx * ny);
        let mut rows = 0;
        let mut last_line = hline;
        for (ln, l) in lines {
            last_line = ln;
            if rows == ny {
                return Err(Error::GridFile {
                    line: ln,
                    message: format!("more than {ny} data rows"),
                });
            }
            let before = samples.len();
            for tok in l.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::GridFile {
                    line: ln,
                    message: format!("bad amplitude `{tok}`"),
                })?;
                samples.push(v);
            }
            if samples.len() - before != nx {
                return Err(Error::GridFile {
                    line: ln,
                    message: format!("expected {nx} values, got {}", samples.len() - before),
                });
            }
            rows += 1;
        }
        if rows != ny {
            return Err(Error::GridFile {
                line: last_line,
                message: format!("expected {ny} data rows, got {rows}"),
            });
        }
        Self::new(samples, nx, ny, hx, hy)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Serialises to the text matrix format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.nx, self.ny, self.half_extent_x, self.half_extent_y);
        for row in self.samples.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn half_extent(&self) -> [f64; 2] {
        [self.half_extent_x, self.half_extent_y]
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_extent_y / self.ny as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Finite-difference `∂ψ/∂x` at the sample nodes.
    pub fn deriv_x(&self) -> &[f64] {
        &self.deriv_x
    }

    /// Finite-difference `∂ψ/∂y` at the sample nodes.
    pub fn deriv_y(&self) -> &[f64] {
        &self.deriv_y
    }

    pub fn node_x(&self, i: usize) -> f64 {
        -self.half_extent_x + (i as f64 + 0.5) * self.dx()
    }

    pub fn node_y(&self, j: usize) -> f64 {
        -self.half_extent_y + (j as f64 + 0.5) * self.dy()
    }

    /// Discrete L² norm of the stored samples.
    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.dx() * self.dy()).sqrt()
    }

    #[inline]
    fn index_coords(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x + self.half_extent_x) / self.dx() - 0.5,
            (y + self.half_extent_y) / self.dy() - 0.5,
        )
    }

    /// Spline-interpolated amplitude; zero outside the domain.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.index_coords(x, y);
        self.value_spline.eval(u, v)
    }

    /// Exact gradient of the interpolated amplitude.
    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (u, v) = self.index_coords(x, y);
        let [gu, gv] = self.value_spline.eval_grad(u, v);
        [gu / self.dx(), gv / self.dy()]
    }

    /// Interpolated finite-difference derivatives (more accurate than
    /// [`GridPsf::gradient`] away from the nodes).
    pub fn interpolated_derivative(&self, x: f64, y: f64) -> [f64; 2] {
        let (u, v) = self.index_coords(x, y);
        [self.deriv_x_spline.eval(u, v), self.deriv_y_spline.eval(u, v)]
    }

    /// Resamples the PSF rotated counter-clockwise by `theta` about the origin.
    pub fn rotated(&self, theta: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let mut samples = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = self.node_y(j);
            for i in 0..self.nx {
                let x = self.node_x(i);
                // ψ'(f) = ψ(R(θ)ᵀ f)
                samples.push(self.amplitude(c * x + s * y, -s * x + c * y));
            }
        }
        let norm = (samples.iter().map(|v| v * v).sum::<f64>() * self.dx() * self.dy()).sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidGrid(format!(
                "rotation resampling changed the norm to {norm:.9}"
            )));
        }
        // Interpolation breaks exact inversion symmetry at rounding level only;
        // re-symmetrise before validation.
        let n = samples.len();
        let sym: Vec<f64> = (0..n).map(|k| 0.5 * (samples[k] + samples[n - 1 - k])).collect();
        Self::new(sym, self.nx, self.ny, self.half_extent_x, self.half_extent_y)
    }
}

/// Fourth-order finite difference along x (one-sided near the edges).
pub(crate) fn fd_x(f: &[f64], nx: usize, ny: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    let mut line = vec![0.0; nx];
    for j in 0..ny {
        fd_line(&f[j * nx..(j + 1) * nx], h, &mut line);
        out[j * nx..(j + 1) * nx].copy_from_slice(&line);
    }
    out
}

/// Fourth-order finite difference along y (one-sided near the edges).
pub(crate) fn fd_y(f: &[f64], nx: usize, ny: usize, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    let mut col = vec![0.0; ny];
    let mut d = vec![0.0; ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = f[j * nx + i];
        }
        fd_line(&col, h, &mut d);
        for j in 0..ny {
            out[j * nx + i] = d[j];
        }
    }
    out
}

fn fd_line(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(n >= 5);
    let s = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
    }
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
    out[n - 1] = -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]) * s;
    out[n - 2] = -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]) * s;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::GaussianPsf;

    fn gaussian_grid(n: usize, half: f64) -> GridPsf {
        let g = GaussianPsf::new(1.0, 1.0, 0.0).unwrap();
        GridPsf::sample(|x, y| g.amplitude(x, y), n, n, half, half).unwrap()
    }

    #[test]
    fn normalised_on_construction() {
        let g = gaussian_grid(256, 8.0);
        assert!((g.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_samples_rejected() {
        let g = GaussianPsf::new(1.0, 1.0, 0.0).unwrap();
        let r = GridPsf::sample(|x, y| g.amplitude(x - 0.3, y), 64, 64, 8.0, 8.0);
        assert!(matches!(r, Err(Error::InvalidGrid(m)) if m.contains("symmetry")));
    }

    #[test]
    fn boundary_leakage_rejected() {
        let g = GaussianPsf::new(1.0, 1.0, 0.0).unwrap();
        // Peak at the domain edge (symmetric pair of bumps).
        let r = GridPsf::sample(
            |x, y| g.amplitude(x - 3.9, y) + g.amplitude(x + 3.9, y),
            64,
            64,
            4.0,
            4.0,
        );
        assert!(matches!(r, Err(Error::InvalidGrid(m)) if m.contains("boundary")));
    }

    #[test]
    fn zero_and_small_grids_rejected() {
        assert!(GridPsf::new(vec![0.0; 32 * 32], 32, 32, 1.0, 1.0).is_err());
        assert!(GridPsf::new(vec![1.0; 8 * 8], 8, 8, 1.0, 1.0).is_err());
        let mut v = vec![0.0; 32 * 32];
        v[5] = f64::NAN;
        assert!(GridPsf::new(v, 32, 32, 1.0, 1.0).is_err());
    }

    #[test]
    fn finite_difference_is_fourth_order() {
        let f: Vec<f64> = (0..40).map(|i| (0.1 * i as f64).sin()).collect();
        let mut d = vec![0.0; 40];
        fd_line(&f, 0.1, &mut d);
        for (i, v) in d.iter().enumerate() {
            assert!((v - (0.1 * i as f64).cos()).abs() < 1e-4, "i={i}");
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let g = gaussian_grid(32, 8.0);
        let back = GridPsf::from_text(&g.to_text()).unwrap();
        assert!((back.samples()[500] - g.samples()[500]).abs() < 1e-12);

        let err = GridPsf::from_text("16 16 1.0\n").unwrap_err();
        assert!(matches!(err, Error::GridFile { line: 1, .. }));
        let mut text = g.to_text();
        text = text.replacen("e", "x", 40);
        assert!(matches!(GridPsf::from_text(&text), Err(Error::GridFile { .. })));
        let truncated: String = g.to_text().lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(matches!(GridPsf::from_text(&truncated), Err(Error::GridFile { line: 10, .. })));
    }
}
