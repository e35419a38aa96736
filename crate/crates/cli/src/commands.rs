use superres_core::direct::mle::rayleigh_curse_experiment;
use superres_core::oracle::OracleOptions;
use superres_core::psf::{discretize_gaussian, GaussianPsf, Psf};
use superres_core::report::{precision_report, ReportOptions};
use superres_core::scan::{scan_azimuth_precision, scan_distance_limit};
use superres_core::verify::{grid_vs_analytic, oracle_scene_grid, run_suite, VerifyOptions, GAUSSIAN_TOLERANCES, GRID_TOLERANCES};
use superres_core::Result;

use crate::config::{RunConfig, ScanKind, SuiteKind};

/// Output table separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn sep(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }
}

/// Text produced by a command, plus an optional sidecar file body.
pub struct Output {
    pub body: String,
    pub sidecar: Option<String>,
    /// False when a verification check failed.
    pub passed: bool,
}

impl Output {
    fn table(body: String) -> Self {
        Self { body, sidecar: None, passed: true }
    }
}

fn key_value_table(cfg: &RunConfig, fmt: Format, rows: &[(&str, f64)], notes: &[String]) -> String {
    let sep = fmt.sep();
    let mut out = format!("# {}\n", cfg.echo);
    for n in notes {
        out += &format!("# note: {n}\n");
    }
    out += &format!("quantity{sep}value\n");
    for (k, v) in rows {
        out += &format!("{k}{sep}{:.12e}\n", v + 0.0);
    }
    out
}

pub fn moments(cfg: &RunConfig, fmt: Format) -> Result<Output> {
    let base = cfg.psf.base_moments()?;
    let geom = cfg.psf.geometry_moments(cfg.scene.r, cfg.scene.alpha)?;
    let rows = [
        ("kappa_x", base.kappa_x),
        ("kappa_y", base.kappa_y),
        ("eta", base.eta),
        ("delta", geom.delta),
        ("gamma_x", geom.gamma_x),
        ("gamma_y", geom.gamma_y),
        ("kappa_r", geom.kappa_r),
        ("kappa_r_perp", geom.kappa_r_perp),
    ];
    Ok(Output::table(key_value_table(cfg, fmt, &rows, &[])))
}

pub fn precision(cfg: &RunConfig, fmt: Format) -> Result<Output> {
    let opts = ReportOptions { direct: cfg.direct, ..Default::default() };
    let rep = precision_report(&cfg.psf, &cfg.scene, &opts)?;
    for n in &rep.notes {
        log::warn!("{n}");
    }
    Ok(Output::table(key_value_table(cfg, fmt, &rep.fields(), &rep.notes)))
}

pub fn scan(cfg: &RunConfig, fmt: Format) -> Result<Output> {
    let n = cfg.scene.n_total;
    let grid = match cfg.scan {
        ScanKind::Distance => scan_distance_limit(&cfg.psf.base_moments()?, &cfg.scan_alpha, &cfg.scan_epsilon, n)?,
        ScanKind::Azimuth => scan_azimuth_precision(&cfg.psf, &cfg.scan_r, &cfg.scan_alpha, cfg.scene.epsilon, n)?,
    };
    let meta = format!("{};param1={};param2={}", cfg.echo, grid.param1_name, grid.param2_name);
    Ok(Output::table(grid.to_delimited(fmt.sep(), Some(&meta))))
}

pub fn simulate(cfg: &RunConfig, fmt: Format) -> Result<Output> {
    let (a, e) = (cfg.scene.alpha, cfg.scene.epsilon);
    let table = rayleigh_curse_experiment(&cfg.psf, e, a, &cfg.r_list, cfg.n_photons, cfg.trials, cfg.seed)?;
    let csv = table.to_csv();
    let body = match fmt {
        Format::Csv => csv,
        Format::Tsv => csv.replace(',', "\t"),
    };
    Ok(Output {
        body: format!("# {}\n{body}", cfg.echo),
        sidecar: Some(format!("{}config={}\n", table.metadata(), cfg.echo)),
        passed: true,
    })
}

/// Scenes used by the grid suite: the corners and centre of the oracle grid.
fn grid_suite_scenes() -> Vec<superres_core::SceneParams> {
    let all = oracle_scene_grid();
    [0, 13, 26].iter().map(|&k| all[k]).collect()
}

pub fn verify(cfg: &RunConfig, tolerance_scale: f64) -> Result<Output> {
    let oracle = OracleOptions { resolution: cfg.oracle_resolution, ..Default::default() };
    let mut lines = vec![format!("# {}", cfg.echo)];
    let checks = match cfg.suite {
        SuiteKind::Gaussian => {
            let opts = VerifyOptions { tolerance_scale, oracle, ..Default::default() };
            run_suite(&cfg.psf, &GAUSSIAN_TOLERANCES, &opts)?
        }
        SuiteKind::Grid => {
            let opts = VerifyOptions { tolerance_scale, oracle, scenes: grid_suite_scenes() };
            match &cfg.psf {
                Psf::Grid(_) => run_suite(&cfg.psf, &GRID_TOLERANCES, &opts)?,
                Psf::Gaussian(_) => {
                    let (s1, s2, b) = cfg.gaussian;
                    let g = GaussianPsf::new(s1, s2, b)?;
                    let grid = Psf::from(discretize_gaussian(&g, 512)?);
                    let mut c = run_suite(&grid, &GRID_TOLERANCES, &opts)?;
                    c.push(grid_vs_analytic(&grid, &g, GRID_TOLERANCES.qfim * tolerance_scale, &oracle_scene_grid())?);
                    c
                }
            }
        }
    };
    lines.extend(checks.iter().map(|c| c.line()));
    let passed = checks.iter().all(|c| c.passed);
    lines.push(format!("{} {}/{} checks passed", if passed { "OK" } else { "FAILED" }, checks.iter().filter(|c| c.passed).count(), checks.len()));
    Ok(Output { body: lines.join("\n") + "\n", sidecar: None, passed })
}
