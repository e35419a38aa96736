//! Photon sampling and maximum-likelihood estimation of the scene.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{cfim_numeric, photon_pdf, CfimOptions, IntensityField, PDF_FLOOR};
use crate::error::{Error, Result};
use crate::exec;
use crate::psf::{GaussianPsf, GridPsf, Psf};
use crate::scene::{SceneParams, DISTANCE};

/// Detected photon positions drawn from the single-photon density.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSample {
    pub points: Vec<[f64; 2]>,
    pub seed: u64,
    pub stream: u64,
    pub scene: SceneParams,
}

/// Generator for one counter-based stream of a master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

enum Sampler<'a> {
    Gaussian([f64; 3]),
    Grid { psf: &'a GridPsf, cdf: Vec<f64> },
}

impl<'a> Sampler<'a> {
    fn new(psf: &'a Psf) -> Self {
        match psf {
            Psf::Gaussian(g) => Sampler::Gaussian(cholesky(g)),
            Psf::Grid(g) => {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = g
                    .samples()
                    .iter()
                    .map(|v| {
                        acc += v * v;
                        acc
                    })
                    .collect();
                cdf.iter_mut().for_each(|c| *c /= acc);
                Sampler::Grid { psf: g, cdf }
            }
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> [f64; 2] {
        match self {
            Sampler::Gaussian([l11, l21, l22]) => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                [l11 * z1, l21 * z1 + l22 * z2]
            }
            Sampler::Grid { psf, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
                let (i, j) = (k % psf.nx(), k / psf.nx());
                let jx: f64 = rng.random::<f64>() - 0.5;
                let jy: f64 = rng.random::<f64>() - 0.5;
                [psf.node_x(i) + jx * psf.dx(), psf.node_y(j) + jy * psf.dy()]
            }
        }
    }
}

/// Lower Cholesky factor `(l11, l21, l22)` of the intensity covariance.
fn cholesky(g: &GaussianPsf) -> [f64; 3] {
    let [sxx, sxy, syy] = g.covariance();
    let l11 = sxx.sqrt();
    let l21 = sxy / l11;
    [l11, l21, (syy - l21 * l21).sqrt()]
}

fn draw_photons(scene: &SceneParams, sampler: &Sampler, count: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let [s1, s2] = scene.sources();
    let w1 = scene.weights()[0];
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let s = if u < w1 { s1 } else { s2 };
            let d = sampler.draw(rng);
            [s[0] + d[0], s[1] + d[1]]
        })
        .collect()
}

/// Draws `count` photons: each picks source 1 with probability `(1 − ε)/2`,
/// then an offset from `Λ`.
///
/// Gaussian offsets are exact bivariate normals. Grid offsets pick a cell by
/// inverse CDF on the sampled intensity and are spread uniformly within it.
pub fn sample_photons(scene: &SceneParams, psf: &Psf, count: usize, seed: u64) -> Result<PhotonSample> {
    sample_photons_stream(scene, psf, count, seed, 0)
}

/// As [`sample_photons`] on an explicit stream of the seed.
pub fn sample_photons_stream(scene: &SceneParams, psf: &Psf, count: usize, seed: u64, stream: u64) -> Result<PhotonSample> {
    scene.validate()?;
    if count == 0 {
        return Err(Error::domain("photon count must be at least 1"));
    }
    let mut rng = stream_rng(seed, stream);
    let points = draw_photons(scene, &Sampler::new(psf), count, &mut rng);
    Ok(PhotonSample { points, seed, stream, scene: *scene })
}

/// `Σ ln p(f)`, with densities clipped at [`PDF_FLOOR`].
pub fn log_likelihood(points: &[[f64; 2]], scene: &SceneParams, field: &IntensityField) -> f64 {
    points
        .iter()
        .map(|&[x, y]| photon_pdf(scene, field, x, y).max(PDF_FLOOR).ln())
        .sum()
}

/// Stopping rules for [`mle_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Simplex diameter at which the search stops, in parameter units.
    pub x_tolerance: f64,
    /// Spread of simplex log-likelihoods at which the search stops.
    pub f_tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, x_tolerance: 1e-7, f_tolerance: 1e-9 }
    }
}

/// Outcome of a likelihood maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub estimate: SceneParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; `estimate` is then the best point seen.
    pub converged: bool,
}

/// Maximises the log-likelihood over the parameters selected by `free_mask`
/// in `(X̄, Ȳ, r, α)` order, holding the rest at `init`.
///
/// A Nelder–Mead simplex search is followed by coordinate-wise parabolic
/// refinement. Negative distances are rejected, so `r̂ ≥ 0`.
pub fn mle_fit(
    sample: &PhotonSample,
    field: &IntensityField,
    init: &SceneParams,
    free_mask: [bool; 4],
    opts: &MleOptions,
) -> Result<MleFit> {
    init.validate()?;
    if sample.points.is_empty() {
        return Err(Error::domain("photon sample is empty"));
    }
    let free: Vec<usize> = (0..4).filter(|&k| free_mask[k]).collect();
    let base = init.params();
    let width = 0.125 * field.support()[0].max(field.support()[1]);
    let embed = |x: &[f64]| {
        let mut g = base;
        for (&k, &v) in free.iter().zip(x) {
            g[k] = v;
        }
        g
    };
    let cost = |x: &[f64]| {
        let g = embed(x);
        if g[DISTANCE] < 0.0 {
            return f64::INFINITY;
        }
        -log_likelihood(&sample.points, &init.with_params(g), field)
    };
    if free.is_empty() {
        return Ok(MleFit { estimate: *init, log_likelihood: -cost(&[]), iterations: 0, converged: true });
    }
    let x0: Vec<f64> = free.iter().map(|&k| base[k]).collect();
    let steps: Vec<f64> = free
        .iter()
        .map(|&k| match k {
            3 => 0.1,
            _ => 0.1 * base[k].abs().max(width),
        })
        .collect();
    let (mut x, mut fx, iterations, converged) = nelder_mead(&cost, &x0, &steps, opts);
    let scale: Vec<f64> = steps.iter().map(|s| s * 1e-3).collect();
    polish(&cost, &mut x, &mut fx, &scale);
    Ok(MleFit {
        estimate: init.with_params(embed(&x)),
        log_likelihood: -fx,
        iterations,
        converged,
    })
}

fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], steps: &[f64], opts: &MleOptions) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += steps[k];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    for iter in 0..opts.max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread = values[n] - values[0];
        if diameter < opts.x_tolerance || (spread.is_finite() && spread < opts.f_tolerance && diameter < 1e3 * opts.x_tolerance) {
            return (simplex.swap_remove(0), values[0], iter, true);
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let xr = point(&centroid, &simplex[n], -1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = point(&centroid, &simplex[n], -2.0);
            let fe = f(&xe);
            if fe < fr {
                (simplex[n], values[n]) = (xe, fe);
            } else {
                (simplex[n], values[n]) = (xr, fr);
            }
        } else if fr < values[n - 1] {
            (simplex[n], values[n]) = (xr, fr);
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = point(&centroid, &xr, 0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &simplex[n], 0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                (simplex[n], values[n]) = (xc, fc);
            } else {
                for i in 1..=n {
                    simplex[i] = point(&simplex[0], &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best].clone(), values[best], opts.max_iterations, false)
}

/// Moves each coordinate to the vertex of a parabola through three samples, if that improves the cost.
fn polish(f: &impl Fn(&[f64]) -> f64, x: &mut [f64], fx: &mut f64, h: &[f64]) {
    for _ in 0..3 {
        for k in 0..x.len() {
            let mut probe = x.to_vec();
            probe[k] = x[k] - h[k];
            let fm = f(&probe);
            probe[k] = x[k] + h[k];
            let fp = f(&probe);
            let curv = fp - 2.0 * *fx + fm;
            if !(curv > 0.0 && fm.is_finite() && fp.is_finite()) {
                continue;
            }
            probe[k] = x[k] - 0.5 * h[k] * (fp - fm) / curv;
            let fv = f(&probe);
            if fv < *fx {
                x[k] = probe[k];
                *fx = fv;
            }
        }
    }
}

/// One row of the distance-estimation experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurseRow {
    pub r: f64,
    /// Sample variance of `r̂` over converged trials.
    pub empirical_var: f64,
    /// `(J⁻¹)₃₃/N` from the numeric classical Fisher matrix.
    pub crb_var: f64,
    pub trials: usize,
    pub converged: usize,
}

/// Variance of the distance estimate against the Cramér–Rao bound over a range of separations.
#[derive(Debug, Clone, PartialEq)]
pub struct CurseTable {
    pub rows: Vec<CurseRow>,
    pub seed: u64,
    pub epsilon: f64,
    pub alpha: f64,
    pub n_photons: usize,
    pub psf: String,
}

pub const CURSE_CSV_HEADER: &str = "r,empirical_var,crb_var,trials,converged";

impl CurseTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CURSE_CSV_HEADER}\n");
        for r in &self.rows {
            out += &format!("{},{:.10e},{:.10e},{},{}\n", r.r, r.empirical_var, r.crb_var, r.trials, r.converged);
        }
        out
    }

    /// `key=value` lines echoing the configuration.
    pub fn metadata(&self) -> String {
        let rs: Vec<String> = self.rows.iter().map(|r| r.r.to_string()).collect();
        format!(
            "seed={}\npsf={}\nepsilon={}\nalpha={}\nn_photons={}\ntrials={}\nr_list={}\nfree=r\n",
            self.seed,
            self.psf,
            self.epsilon,
            self.alpha,
            self.n_photons,
            self.rows.first().map_or(0, |r| r.trials),
            rs.join(";"),
        )
    }
}

fn describe(psf: &Psf) -> String {
    match psf {
        Psf::Gaussian(g) => format!("gaussian({},{},{})", g.sigma1(), g.sigma2(), g.beta()),
        Psf::Grid(g) => format!("grid({}x{})", g.nx(), g.ny()),
    }
}

/// Fits `r` alone, with the other parameters at their true values, in
/// `trials` independent samples per separation.
///
/// Trial `t` of separation index `i` draws from stream `i·2³² + t` of `seed`,
/// so the table does not depend on scheduling.
pub fn rayleigh_curse_experiment(
    psf: &Psf,
    epsilon: f64,
    alpha: f64,
    r_list: &[f64],
    n_photons: usize,
    trials: usize,
    seed: u64,
) -> Result<CurseTable> {
    if r_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("r_list must be sorted ascending"));
    }
    if r_list.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("experiment separations must be positive"));
    }
    if trials < 2 || n_photons == 0 {
        return Err(Error::domain("need at least two trials and one photon"));
    }
    let field = IntensityField::new(psf)?;
    let sampler = Sampler::new(psf);
    let mut rows = Vec::with_capacity(r_list.len());
    for (i, &r) in r_list.iter().enumerate() {
        let scene = SceneParams::new(r, alpha, epsilon, n_photons as f64);
        scene.validate_for_precision()?;
        let j = cfim_numeric(&scene, &field, &CfimOptions::default())?;
        let inv = j.inverse()?;
        let crb_var = inv.matrix[(DISTANCE, DISTANCE)] / n_photons as f64;
        let fits = exec::map_indexed(trials, |t| -> Result<MleFit> {
            let mut rng = stream_rng(seed, ((i as u64) << 32) + t as u64);
            let points = draw_photons(&scene, &sampler, n_photons, &mut rng);
            let sample = PhotonSample { points, seed, stream: ((i as u64) << 32) + t as u64, scene };
            mle_fit(&sample, &field, &scene, [false, false, true, false], &MleOptions::default())
        });
        let mut est = Vec::with_capacity(trials);
        for fit in fits {
            let fit = fit?;
            if fit.converged {
                est.push(fit.estimate.r);
            } else {
                log::warn!("MLE trial at r = {r} hit the iteration cap");
            }
        }
        rows.push(CurseRow { r, empirical_var: sample_variance(&est), crb_var, trials, converged: est.len() });
    }
    Ok(CurseTable { rows, seed, epsilon, alpha, n_photons, psf: describe(psf) })
}

/// Unbiased sample variance; NaN for fewer than two values.
pub fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}
