//! All precision figures for one scene, quantum and classical, side by side.

use crate::azimuth::{optimal_azimuth, AzimuthExtrema};
use crate::direct::{precision_r_direct, precision_r_direct_numeric, smallr_coeffs, CfimOptions, DirectPrecision, IntensityField};
use crate::error::Result;
use crate::psf::Psf;
use crate::qfim::{quantum_limits, QuantumLimits};
use crate::scene::SceneParams;

/// Imbalance above which the report notes the `(1 − ε²)` degradation.
pub const IMBALANCE_WARNING: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub scene: SceneParams,
    pub quantum: QuantumLimits,
    pub extrema: AzimuthExtrema,
    /// `N/(J⁻¹)₃₃` from the numeric classical Fisher matrix.
    pub h_r_direct: Option<f64>,
    /// Leading small-separation direct-imaging term.
    pub h_r_direct_smallr: Option<DirectPrecision>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Include the direct-imaging comparison.
    pub direct: bool,
    pub cfim: CfimOptions,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { direct: true, cfim: CfimOptions::default() }
    }
}

pub fn precision_report(psf: &Psf, scene: &SceneParams, opts: &ReportOptions) -> Result<PrecisionReport> {
    let quantum = quantum_limits(psf, scene)?;
    let extrema = optimal_azimuth(&quantum.base, scene.epsilon, scene.n_total)?;
    let mut notes = Vec::new();
    if quantum.h_alpha.degenerate {
        notes.push("r = 0: sources coincide, azimuth is unidentifiable; H_alpha reported as 0".to_string());
    }
    if let Some(c) = quantum.h_r.condition.filter(|&c| c > crate::fisher::ILL_CONDITIONED) {
        notes.push(format!("QFIM condition number {c:.3e}; closed-form ratios reported"));
    }
    if scene.epsilon.abs() >= IMBALANCE_WARNING {
        notes.push(format!(
            "|epsilon| = {}: precision reduced by the factor 1 - epsilon^2 = {:.4} relative to balanced sources",
            scene.epsilon.abs(),
            1.0 - scene.epsilon * scene.epsilon
        ));
    }
    if extrema.circular {
        notes.push("circularly symmetric PSF: every azimuth is equivalent".to_string());
    }
    let (h_r_direct, h_r_direct_smallr) = if opts.direct {
        let field = IntensityField::new(psf)?;
        let coeffs = smallr_coeffs(&field)?;
        (
            Some(precision_r_direct_numeric(scene, &field, &opts.cfim)?),
            Some(precision_r_direct(scene, &coeffs)?),
        )
    } else {
        (None, None)
    };
    Ok(PrecisionReport { scene: *scene, quantum, extrema, h_r_direct, h_r_direct_smallr, notes })
}

impl PrecisionReport {
    /// `(name, value)` pairs in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        let q = &self.quantum;
        let mut v = vec![
            ("h_r", q.h_r.value),
            ("var_r", q.h_r.variance()),
            ("h_alpha", q.h_alpha.value),
            ("var_alpha", q.h_alpha.variance()),
            ("h_r_limit", q.h_r_limit),
            ("h_alpha_smallr", q.h_alpha_smallr),
            ("alpha_opt", self.extrema.alpha_opt),
            ("alpha_wor", self.extrema.alpha_wor),
            ("h_opt", self.extrema.h_opt),
            ("h_wor", self.extrema.h_wor),
            ("xi", self.extrema.xi),
        ];
        if let Some(h) = self.h_r_direct {
            v.push(("h_r_direct", h));
        }
        if let Some(d) = self.h_r_direct_smallr {
            v.push(("h_r_direct_smallr", d.h_r_direct));
            v.push(("a_factor", d.a_factor));
        }
        v
    }
}
