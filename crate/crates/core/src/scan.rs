//! Two-parameter scans of the precision limits.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::exec;
use crate::psf::{geometry_moments, BaseMoments, Psf};
use crate::qfim::{precision_alpha_closed, precision_r_limit};

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Values on a product grid, `param1` varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub param1_name: String,
    pub param2_name: String,
    pub param1: Vec<f64>,
    pub param2: Vec<f64>,
    /// Row-major: `values[i * param2.len() + j]`.
    pub values: Vec<f64>,
}

impl ScanGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.param2.len() + j]
    }

    /// Index pair of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        (k / self.param2.len(), k % self.param2.len())
    }

    /// Delimited table with header `param1,param2,value`, preceded by `# metadata` when given.
    pub fn to_delimited(&self, sep: char, metadata: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(m) = metadata {
            out.push_str(&format!("# {m}\n"));
        }
        out.push_str(&format!("param1{sep}param2{sep}value\n"));
        for (i, &p1) in self.param1.iter().enumerate() {
            for (j, &p2) in self.param2.iter().enumerate() {
                out.push_str(&format!("{p1:.12e}{sep}{p2:.12e}{sep}{:.12e}\n", self.get(i, j) + 0.0));
            }
        }
        out
    }
}

fn product<F>(p1: &[f64], p2: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    let n2 = p2.len();
    exec::map_indexed(p1.len() * n2, |k| f(p1[k / n2], p2[k % n2])).into_iter().collect()
}

/// Small-separation distance limit over `(α, ε)`.
pub fn scan_distance_limit(base: &BaseMoments, alphas: &[f64], epsilons: &[f64], n_total: f64) -> Result<ScanGrid> {
    if let Some(e) = epsilons.iter().find(|e| !(e.abs() < 1.0)) {
        return Err(Error::domain(format!("scan epsilon {e} outside (-1, 1)")));
    }
    let values = product(alphas, epsilons, |a, e| precision_r_limit(base, a, e, n_total))?;
    Ok(ScanGrid {
        param1_name: "alpha".into(),
        param2_name: "epsilon".into(),
        param1: alphas.to_vec(),
        param2: epsilons.to_vec(),
        values,
    })
}

/// Azimuth precision over `(r, α)` at fixed imbalance.
pub fn scan_azimuth_precision(psf: &Psf, rs: &[f64], alphas: &[f64], epsilon: f64, n_total: f64) -> Result<ScanGrid> {
    if !(epsilon.abs() < 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (-1, 1)")));
    }
    if rs.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::domain("scan distances must be non-negative"));
    }
    let base = psf.base_moments()?;
    let values = product(rs, alphas, |r, a| {
        let geom = geometry_moments(psf, r, a, &base)?;
        Ok(precision_alpha_closed(&base, &geom, epsilon, n_total))
    })?;
    Ok(ScanGrid {
        param1_name: "r".into(),
        param2_name: "alpha".into(),
        param1: rs.to_vec(),
        param2: alphas.to_vec(),
        values,
    })
}

/// The `(α, ε)` grid of the distance-limit density plot: 181 azimuths over `[−π/2, π/2]`, 41 imbalances over `[−0.95, 0.95]`.
pub fn distance_limit_axes() -> (Vec<f64>, Vec<f64>) {
    (linspace(-FRAC_PI_2, FRAC_PI_2, 181), linspace(-0.95, 0.95, 41))
}

/// The `(r, α)` grid of the azimuth-precision contour plot.
pub fn azimuth_precision_axes() -> (Vec<f64>, Vec<f64>) {
    (linspace(0.0, 3.0, 61), linspace(-FRAC_PI_2, FRAC_PI_2, 73))
}
