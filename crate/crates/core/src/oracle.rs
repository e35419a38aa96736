//! Brute-force quantum Fisher information in a finite Gram subspace.
//!
//! The single-photon state and its parameter derivatives live in the span of
//! `{ψ₁, ψ₂, ∂ₓψ₁, ∂ᵧψ₁, ∂ₓψ₂, ∂ᵧψ₂}`. The oracle samples these states by
//! quadrature, orthonormalises them, represents `ρ(g)` and finite-difference
//! derivatives `∂ρ` as small matrices, and evaluates the Fisher information
//! from the spectral decomposition of `ρ`. None of the closed-form moment
//! identities are used.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exec;
use crate::fisher::{FisherKind, FisherMatrix};
use crate::psf::Psf;
use crate::quad::QuadGrid;
use crate::scene::SceneParams;

pub type C64 = Complex<f64>;

/// Relative cutoff on Gram eigenvalues below which directions are dropped.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Eigenvalues of `ρ` at or below this are treated as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// A (possibly complex) amplitude that can be shifted to the source positions.
pub trait StateAmplitude: Sync {
    fn amplitude(&self, x: f64, y: f64) -> C64;
    fn gradient(&self, x: f64, y: f64) -> [C64; 2];
    /// Half extents outside which the amplitude is negligible.
    fn support(&self) -> [f64; 2];
}

impl StateAmplitude for Psf {
    fn amplitude(&self, x: f64, y: f64) -> C64 {
        C64::new(Psf::amplitude(self, x, y), 0.0)
    }

    fn gradient(&self, x: f64, y: f64) -> [C64; 2] {
        Psf::gradient(self, x, y).map(|g| C64::new(g, 0.0))
    }

    fn support(&self) -> [f64; 2] {
        Psf::support(self)
    }
}

/// `ψ(x, y)·exp(i c x³)`: a complex amplitude with an odd, coma-like phase,
/// used as a negative control for the saturability check.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseModulated {
    pub psf: Psf,
    pub strength: f64,
}

impl StateAmplitude for PhaseModulated {
    fn amplitude(&self, x: f64, y: f64) -> C64 {
        C64::from_polar(1.0, self.strength * x * x * x) * self.psf.amplitude(x, y)
    }

    fn gradient(&self, x: f64, y: f64) -> [C64; 2] {
        let phase = C64::from_polar(1.0, self.strength * x * x * x);
        let p = self.psf.amplitude(x, y);
        let [gx, gy] = self.psf.gradient(x, y);
        [phase * (gx + C64::i() * 3.0 * self.strength * x * x * p), phase * gy]
    }

    fn support(&self) -> [f64; 2] {
        self.psf.support()
    }
}

/// Numerical settings of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Quadrature cells per axis.
    pub resolution: usize,
    /// Central-difference step in each parameter's natural units.
    pub fd_step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { resolution: 512, fd_step: 1e-5 }
    }
}

pub const BASIS_LABELS: [&str; 6] = ["psi1", "psi2", "dx psi1", "dy psi1", "dx psi2", "dy psi2"];

fn source_positions(g: [f64; 4]) -> [[f64; 2]; 2] {
    let [cx, cy, r, a] = g;
    let (s, c) = a.sin_cos();
    [[cx - 0.5 * r * c, cy - 0.5 * r * s], [cx + 0.5 * r * c, cy + 0.5 * r * s]]
}

fn sample<A: StateAmplitude>(grid: &QuadGrid, f: impl Fn(f64, f64) -> C64 + Sync, _amp: &A) -> Vec<C64> {
    let nx = grid.n[0];
    exec::map_indexed(grid.n[1], |j| {
        let y = grid.y(j);
        (0..nx).map(|i| f(grid.x(i), y)).collect::<Vec<_>>()
    })
    .concat()
}

fn inner(grid: &QuadGrid, a: &[C64], b: &[C64]) -> C64 {
    let nx = grid.n[0];
    // Compensated row sums: finite differences of these sums divide by 2h.
    let [re, im] = exec::sum_indexed_array(grid.n[1], |j| {
        let row = j * nx..(j + 1) * nx;
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for (u, v) in a[row.clone()].iter().zip(&b[row]) {
            let p = u.conj() * v;
            re.add(p.re);
            im.add(p.im);
        }
        [re.value(), im.value()]
    });
    C64::new(re, im) * grid.cell_area()
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Orthonormalised span of the shifted states and their derivatives.
#[derive(Debug, Clone)]
pub struct GramSubspace {
    pub labels: [&'static str; 6],
    pub gram: DMatrix<C64>,
    /// Columns are the orthonormal vectors in basis coordinates (6 × rank).
    pub transform: DMatrix<C64>,
    pub rank: usize,
    pub gram_eigenvalues: Vec<f64>,
    pub grid: QuadGrid,
    samples: Vec<Vec<C64>>,
}

impl GramSubspace {
    /// Samples the six basis states at the scene and orthonormalises them.
    ///
    /// Symmetric (Löwdin) orthogonalisation is used at full rank; when the
    /// shifted families coincide the dependent directions are dropped.
    pub fn build<A: StateAmplitude>(amp: &A, scene: &SceneParams, opts: &OracleOptions) -> Result<Self> {
        scene.validate()?;
        if opts.resolution < 16 {
            return Err(Error::domain("oracle resolution must be at least 16"));
        }
        let [sx, sy] = amp.support();
        let pad = 0.5 * scene.r + 4.0 * opts.fd_step;
        let grid = QuadGrid::new(
            [scene.centroid_x, scene.centroid_y],
            [sx + pad, sy + pad],
            [opts.resolution, opts.resolution],
        );
        let src = scene.sources();
        let mut samples = Vec::with_capacity(6);
        for s in src {
            samples.push(sample(&grid, |x, y| amp.amplitude(x - s[0], y - s[1]), amp));
        }
        for s in src {
            samples.push(sample(&grid, |x, y| amp.gradient(x - s[0], y - s[1])[0], amp));
            samples.push(sample(&grid, |x, y| amp.gradient(x - s[0], y - s[1])[1], amp));
        }
        let mut gram = DMatrix::<C64>::zeros(6, 6);
        for i in 0..6 {
            for j in i..6 {
                let v = inner(&grid, &samples[i], &samples[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v.conj();
            }
        }
        let eig = SymmetricEigen::new(gram.clone());
        let wmax = eig.eigenvalues.iter().fold(0.0f64, |m, &w| m.max(w));
        if wmax <= 0.0 {
            return Err(Error::Singular("Gram matrix has no positive eigenvalue".into()));
        }
        let keep: Vec<usize> = (0..6).filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF * wmax).collect();
        let rank = keep.len();
        let mut canonical = DMatrix::<C64>::zeros(6, rank);
        for (col, &k) in keep.iter().enumerate() {
            let s = 1.0 / eig.eigenvalues[k].sqrt();
            canonical.set_column(col, &(eig.eigenvectors.column(k) * C64::new(s, 0.0)));
        }
        let transform = if rank == 6 {
            let mut v = DMatrix::<C64>::zeros(6, 6);
            for (col, &k) in keep.iter().enumerate() {
                v.set_column(col, &eig.eigenvectors.column(k));
            }
            &canonical * v.adjoint()
        } else {
            canonical
        };
        let mut gram_eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        gram_eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { labels: BASIS_LABELS, gram, transform, rank, gram_eigenvalues, grid, samples })
    }

    /// `max |Tᴴ G T − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.transform.adjoint() * &self.gram * &self.transform;
        let mut worst = 0.0f64;
        for i in 0..self.rank {
            for j in 0..self.rank {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `max |Gᵢⱼ − Gⱼᵢ*|` before symmetrisation, and the largest imaginary part.
    pub fn max_imaginary(&self) -> f64 {
        self.gram.iter().fold(0.0f64, |m, v| m.max(v.im.abs()))
    }

    /// Coordinates of a sampled state in the orthonormal basis.
    pub fn project(&self, state: &[C64]) -> DVector<C64> {
        let b = DVector::from_iterator(6, self.samples.iter().map(|s| inner(&self.grid, s, state)));
        self.transform.adjoint() * b
    }

    /// `ρ` at parameters `g` as a `rank × rank` matrix.
    pub fn density<A: StateAmplitude>(&self, amp: &A, g: [f64; 4], epsilon: f64) -> DMatrix<C64> {
        let w = [0.5 * (1.0 - epsilon), 0.5 * (1.0 + epsilon)];
        let mut rho = DMatrix::<C64>::zeros(self.rank, self.rank);
        for (s, wk) in source_positions(g).iter().zip(w) {
            let state = sample(&self.grid, |x, y| amp.amplitude(x - s[0], y - s[1]), amp);
            let c = self.project(&state);
            rho += (&c * c.adjoint()) * C64::new(wk, 0.0);
        }
        rho
    }

    /// Central-difference `∂ρ/∂gᵢ` for all four parameters.
    ///
    /// Uses `|a₊⟩⟨a₊| − |a₋⟩⟨a₋| = (|d⟩⟨s| + |s⟩⟨d|)/2` with `d = a₊ − a₋` and
    /// `s = a₊ + a₋` sampled pointwise, so the subtraction happens before
    /// projection rather than between two projected matrices.
    pub fn density_derivatives<A: StateAmplitude>(
        &self,
        amp: &A,
        g: [f64; 4],
        epsilon: f64,
        step: f64,
    ) -> [DMatrix<C64>; 4] {
        let w = [0.5 * (1.0 - epsilon), 0.5 * (1.0 + epsilon)];
        std::array::from_fn(|i| {
            let (mut gp, mut gm) = (g, g);
            gp[i] += step;
            gm[i] -= step;
            let (sp, sm) = (source_positions(gp), source_positions(gm));
            let mut out = DMatrix::<C64>::zeros(self.rank, self.rank);
            for k in 0..2 {
                let (p, m) = (sp[k], sm[k]);
                let d = sample(&self.grid, |x, y| amp.amplitude(x - p[0], y - p[1]) - amp.amplitude(x - m[0], y - m[1]), amp);
                let s = sample(&self.grid, |x, y| amp.amplitude(x - p[0], y - p[1]) + amp.amplitude(x - m[0], y - m[1]), amp);
                let (cd, cs) = (self.project(&d), self.project(&s));
                out += (&cd * cs.adjoint() + &cs * cd.adjoint()) * C64::new(w[k] / (4.0 * step), 0.0);
            }
            out
        })
    }

    /// Overlap `⟨ψ₁|ψ₂⟩` from the Gram matrix.
    pub fn overlap(&self) -> C64 {
        self.gram[(0, 1)]
    }
}

/// Builds the Gram subspace at the scene.
pub fn build_subspace<A: StateAmplitude>(amp: &A, scene: &SceneParams, opts: &OracleOptions) -> Result<GramSubspace> {
    GramSubspace::build(amp, scene, opts)
}

/// Eigenstates built from the closed-form coefficients and normalisations,
/// checked against quadrature overlaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenstateCheck {
    /// `‖ψ₁ + cₖψ₂‖²/𝒬ₖ`; 1 when the normalisation constants are right.
    pub norms: [f64; 2],
    /// Largest `|ρ|λₖ⟩ − λₖ|λₖ⟩|` coefficient in the `{ψ₁, ψ₂}` frame.
    pub eigen_residual: f64,
}

/// Verifies the closed-form eigenstates against the Gram matrix of the scene.
///
/// Returns `None` when the eigenstates are undefined (`δ = 0` or `ε = 1`).
pub fn eigenstate_check(sub: &GramSubspace, scene: &SceneParams) -> Result<Option<EigenstateCheck>> {
    let delta = sub.overlap().re;
    let es = crate::qfim::eigensystem(delta.clamp(-1.0, 1.0), scene.epsilon)?;
    let (Some(coef), Some(q1), Some(q2)) = (es.coefficients(), es.q_norm1, es.q_norm2) else {
        return Ok(None);
    };
    let g = |i: usize, j: usize| sub.gram[(i, j)].re;
    let w = scene.weights();
    let lambdas = [es.lambda1, es.lambda2];
    let mut norms = [0.0; 2];
    let mut eigen_residual = 0.0f64;
    for (k, (&c, q)) in coef.iter().zip([q1, q2]).enumerate() {
        norms[k] = (g(0, 0) + c * c * g(1, 1) + 2.0 * c * g(0, 1)) / q;
        let scale = 1.0 / q.sqrt();
        let r0 = w[0] * (g(0, 0) + c * g(0, 1)) - lambdas[k];
        let r1 = w[1] * (g(1, 0) + c * g(1, 1)) - lambdas[k] * c;
        eigen_residual = eigen_residual.max(r0.abs() * scale).max(r1.abs() * scale);
    }
    Ok(Some(EigenstateCheck { norms, eigen_residual }))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.
fn spectrum(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

/// Eigenvalues of `ρ` in the subspace, descending.
pub fn subspace_eigenvalues<A: StateAmplitude>(amp: &A, scene: &SceneParams, opts: &OracleOptions) -> Result<Vec<f64>> {
    let sub = GramSubspace::build(amp, scene, opts)?;
    Ok(spectrum(&sub.density(amp, scene.params(), scene.epsilon)).0)
}

/// Fisher information from the spectral expansion over nonzero eigenvalues.
fn fisher_from_spectrum(lambda: &[f64], vecs: &DMatrix<C64>, drho: &[DMatrix<C64>; 4]) -> DMatrix<f64> {
    let d: Vec<DMatrix<C64>> = drho.iter().map(|m| vecs.adjoint() * m * vecs).collect();
    let support: Vec<usize> = (0..lambda.len()).filter(|&k| lambda[k] > ZERO_EIGENVALUE).collect();
    let mut q = DMatrix::<f64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let dd = &d[i] * &d[j];
            let mut acc = C64::new(0.0, 0.0);
            for &k in &support {
                acc += dd[(k, k)] * (4.0 / lambda[k]);
            }
            for &k in &support {
                for &h in &support {
                    let (lk, lh) = (lambda[k], lambda[h]);
                    let coef = 2.0 * (1.0 / (lk + lh) - 1.0 / lk - 1.0 / lh);
                    acc += d[i][(h, k)] * d[j][(k, h)] * coef;
                }
            }
            q[(i, j)] = acc.re;
        }
    }
    q
}

/// Oracle Fisher matrix at two step sizes.
#[derive(Debug, Clone)]
pub struct OracleQfim {
    /// Evaluated with `fd_step`.
    pub fisher: FisherMatrix,
    /// Evaluated with `fd_step / 2`.
    pub half_step: FisherMatrix,
    pub fd_step: f64,
    /// Largest entrywise difference between the two, relative to the largest entry.
    pub step_discrepancy: f64,
    /// Eigenvalues of `ρ` in the subspace, descending.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
}

impl OracleQfim {
    /// Finite-difference noise dominates when the two steps disagree by more than `1e-6`.
    pub fn noise_dominated(&self) -> bool {
        self.step_discrepancy > 1e-6
    }
}

fn to_fisher(q: DMatrix<f64>) -> FisherMatrix {
    FisherMatrix::new(q.fixed_view::<4, 4>(0, 0).into_owned(), FisherKind::Quantum)
}

/// Quantum Fisher information matrix computed in the Gram subspace.
pub fn qfim_oracle<A: StateAmplitude>(amp: &A, scene: &SceneParams, opts: &OracleOptions) -> Result<OracleQfim> {
    scene.validate()?;
    if scene.r <= 0.0 {
        return Err(Error::domain("the oracle requires r > 0"));
    }
    if !(opts.fd_step > 0.0) {
        return Err(Error::domain("fd_step must be positive"));
    }
    let sub = GramSubspace::build(amp, scene, opts)?;
    let g = scene.params();
    let rho = sub.density(amp, g, scene.epsilon);
    let (lambda, vecs) = spectrum(&rho);
    let full = fisher_from_spectrum(&lambda, &vecs, &sub.density_derivatives(amp, g, scene.epsilon, opts.fd_step));
    let half = fisher_from_spectrum(
        &lambda,
        &vecs,
        &sub.density_derivatives(amp, g, scene.epsilon, 0.5 * opts.fd_step),
    );
    let scale = full.amax().max(f64::MIN_POSITIVE);
    let step_discrepancy = (&full - &half).amax() / scale;
    Ok(OracleQfim {
        fisher: to_fisher(full),
        half_step: to_fisher(half),
        fd_step: opts.fd_step,
        step_discrepancy,
        eigenvalues: lambda,
        rank: sub.rank,
    })
}

/// Symmetric logarithmic derivatives of the four parameters in the subspace.
#[derive(Debug, Clone)]
pub struct SldSet {
    pub rho: DMatrix<C64>,
    pub drho: [DMatrix<C64>; 4],
    pub sld: [DMatrix<C64>; 4],
    pub eigenvalues: Vec<f64>,
}

impl SldSet {
    /// `max |Im Tr(ρ Lᵢ Lⱼ)|` over all parameter pairs.
    pub fn compatibility_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let t = (&self.rho * &self.sld[i] * &self.sld[j]).trace();
                worst = worst.max(t.im.abs());
            }
        }
        worst
    }

    /// `max |(Lρ + ρL)/2 − ∂ρ|` entrywise.
    pub fn defining_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            let l = &self.sld[i];
            let lhs = (l * &self.rho + &self.rho * l) * C64::new(0.5, 0.0);
            worst = worst.max((lhs - &self.drho[i]).iter().fold(0.0f64, |m, v| m.max(v.norm())));
        }
        worst
    }

    /// `max |Tr(ρ Lᵢ)|`.
    pub fn trace_residual(&self) -> f64 {
        (0..4).map(|i| (&self.rho * &self.sld[i]).trace().norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part of any SLD entry.
    pub fn max_imaginary(&self) -> f64 {
        self.sld.iter().flat_map(|m| m.iter()).fold(0.0f64, |m, v| m.max(v.im.abs()))
    }
}

/// SLDs from `Lₖₕ = 2(∂ρ)ₖₕ/(λₖ + λₕ)` in the eigenbasis, dropping `λₖ + λₕ ≤ 1e-12`.
pub fn sld_matrices<A: StateAmplitude>(amp: &A, scene: &SceneParams, opts: &OracleOptions) -> Result<SldSet> {
    scene.validate()?;
    if scene.r <= 0.0 {
        return Err(Error::domain("SLDs require r > 0"));
    }
    let sub = GramSubspace::build(amp, scene, opts)?;
    let g = scene.params();
    let rho = sub.density(amp, g, scene.epsilon);
    let drho = sub.density_derivatives(amp, g, scene.epsilon, opts.fd_step);
    let (lambda, vecs) = spectrum(&rho);
    let n = lambda.len();
    let sld = std::array::from_fn(|i| {
        let d = vecs.adjoint() * &drho[i] * &vecs;
        let mut l = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            for h in 0..n {
                let s = lambda[k] + lambda[h];
                if s > ZERO_EIGENVALUE {
                    l[(k, h)] = d[(k, h)] * (2.0 / s);
                }
            }
        }
        &vecs * l * vecs.adjoint()
    });
    Ok(SldSet { rho, drho, sld, eigenvalues: lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::make_gaussian;
    use crate::qfim::{build_qfim, eigensystem};
    use approx::assert_relative_eq;

    fn opts() -> OracleOptions {
        OracleOptions { resolution: 256, ..OracleOptions::default() }
    }

    #[test]
    fn subspace_overlap_and_moments() {
        let p = make_gaussian(1.0, 1.4, 0.4).unwrap();
        let scene = SceneParams::new(0.7, 0.5, 0.2, 1.0).with_centroid(0.3, -0.2);
        let sub = build_subspace(&p, &scene, &opts()).unwrap();
        let geom = p.geometry_moments(0.7, 0.5).unwrap();
        let base = p.base_moments().unwrap();
        assert_relative_eq!(sub.overlap().re, geom.delta, epsilon = 1e-10);
        assert_relative_eq!(sub.gram[(2, 2)].re, base.kappa_x, epsilon = 1e-10);
        assert_eq!(sub.rank, 6);
        assert!(sub.orthonormality_residual() < 1e-10);
        assert_eq!(sub.max_imaginary(), 0.0);
    }

    #[test]
    fn coincident_sources_reduce_rank() {
        let p = make_gaussian(1.0, 1.0, 0.0).unwrap();
        let sub = build_subspace(&p, &SceneParams::new(0.0, 0.3, 0.1, 1.0), &opts()).unwrap();
        assert_eq!(sub.rank, 3);
        assert!(sub.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn oracle_matches_closed_form() {
        let p = make_gaussian(1.0, 1.4, 0.4).unwrap();
        let scene = SceneParams::new(0.3, 0.5, 0.4, 1.0);
        let o = qfim_oracle(&p, &scene, &opts()).unwrap();
        let base = p.base_moments().unwrap();
        let closed = build_qfim(&base, &p.geometry_moments(0.3, 0.5).unwrap(), &scene).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let c = closed.get(i, j);
                let d = (o.fisher.get(i, j) - c).abs();
                assert!(d <= 1e-6 * c.abs().max(1e-4), "({i},{j}) {c} vs {}", o.fisher.get(i, j));
            }
        }
        let es = eigensystem(p.geometry_moments(0.3, 0.5).unwrap().delta, 0.4).unwrap();
        assert_relative_eq!(o.eigenvalues[0], es.lambda2, epsilon = 1e-10);
        assert_relative_eq!(o.eigenvalues[1], es.lambda1, epsilon = 1e-10);
        assert!(!o.noise_dominated());
    }

    #[test]
    fn sld_properties_for_real_psf() {
        let p = make_gaussian(1.0, 1.4, 0.4).unwrap();
        let s = sld_matrices(&p, &SceneParams::new(0.5, 1.0, 0.3, 1.0), &opts()).unwrap();
        assert!(s.compatibility_residual() < 1e-8);
        assert!(s.defining_residual() < 1e-6);
        assert!(s.trace_residual() < 1e-8);
        assert_eq!(s.max_imaginary(), 0.0);
    }

    #[test]
    fn phase_control_breaks_compatibility() {
        let p = make_gaussian(1.0, 1.4, 0.4).unwrap();
        let ctrl = PhaseModulated { psf: p, strength: 0.5 };
        let s = sld_matrices(&ctrl, &SceneParams::new(0.5, 1.0, 0.3, 1.0), &opts()).unwrap();
        assert!(s.compatibility_residual() > 1e-3, "{}", s.compatibility_residual());
    }

    #[test]
    fn closed_form_eigenstates_are_normalised() {
        let p = make_gaussian(1.0, 1.4, 0.4).unwrap();
        for (r, e) in [(0.5, 0.4), (1.5, -0.3), (0.1, 0.0)] {
            let scene = SceneParams::new(r, 0.8, e, 1.0);
            let sub = build_subspace(&p, &scene, &opts()).unwrap();
            let chk = eigenstate_check(&sub, &scene).unwrap().unwrap();
            assert!((chk.norms[0] - 1.0).abs() < 1e-8 && (chk.norms[1] - 1.0).abs() < 1e-8, "{chk:?}");
            assert!(chk.eigen_residual < 1e-8);
        }
    }

    #[test]
    fn oracle_requires_positive_separation() {
        let p = make_gaussian(1.0, 1.0, 0.0).unwrap();
        assert!(qfim_oracle(&p, &SceneParams::new(0.0, 0.0, 0.0, 1.0), &opts()).is_err());
    }
}
