//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use superres_core::psf::{make_gaussian, GridPsf, Psf};
use superres_core::scan::linspace;
use superres_core::{Error, Result, SceneParams};

/// Every key the configuration understands, with its default.
const DEFAULTS: &[(&str, &str)] = &[
    ("psf", "gaussian"),
    ("sigma1", "1"),
    ("sigma2", "1.4"),
    ("beta", "0.4"),
    ("grid_file", ""),
    ("centroid_x", "0"),
    ("centroid_y", "0"),
    ("r", "0.5"),
    ("alpha", "0"),
    ("epsilon", "0"),
    ("n_total", "1"),
    ("direct", "true"),
    ("scan", "distance"),
    ("scan_alpha_min", "-1.5707963267948966"),
    ("scan_alpha_max", "1.5707963267948966"),
    ("scan_alpha_n", "181"),
    ("scan_epsilon_min", "-0.95"),
    ("scan_epsilon_max", "0.95"),
    ("scan_epsilon_n", "41"),
    ("scan_r_min", "0"),
    ("scan_r_max", "3"),
    ("scan_r_n", "61"),
    ("r_list", "0.2,2"),
    ("n_photons", "100000"),
    ("trials", "200"),
    ("seed", "2024"),
    ("suite", "gaussian"),
    ("oracle_resolution", "512"),
];

const ANGLE_KEYS: &[&str] = &["alpha", "scan_alpha_min", "scan_alpha_max"];

/// Raw key/value pairs after defaults, file and overrides are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self { values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }
}

impl RawConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(config_error(format!("line {}: expected `key = value`", n + 1)));
            };
            cfg.set(k.trim(), v.trim()).map_err(|e| config_error(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key, rejecting unknown keys and angles given in degrees.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.values.contains_key(key) {
            return Err(config_error(format!("unknown key `{key}`")));
        }
        if ANGLE_KEYS.contains(&key) {
            let lower = value.to_ascii_lowercase();
            if lower.contains("deg") || value.contains('°') {
                return Err(config_error(format!("`{key}` must be given in radians, got `{value}`")));
            }
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| config_error(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key);
        let x: f64 = v.parse().map_err(|_| config_error(format!("`{key}` = `{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(config_error(format!("`{key}` must be finite")));
        }
        Ok(x)
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let v = self.get(key);
        v.parse().map_err(|_| config_error(format!("`{key}` = `{v}` is not a non-negative integer")))
    }

    fn bool(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(config_error(format!("`{key}` = `{v}` is not a boolean"))),
        }
    }

    /// `key=value` pairs joined by `;`, in key order.
    pub fn echo(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

fn config_error(msg: String) -> Error {
    Error::Domain(format!("config: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    /// Small-separation distance limit over `(α, ε)`.
    Distance,
    /// Azimuth precision over `(r, α)`.
    Azimuth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Gaussian,
    Grid,
}

/// Typed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub psf: Psf,
    /// The Gaussian parameters, kept as a reference when the PSF is a grid.
    pub gaussian: (f64, f64, f64),
    pub grid_file: Option<PathBuf>,
    pub scene: SceneParams,
    pub direct: bool,
    pub scan: ScanKind,
    pub scan_alpha: Vec<f64>,
    pub scan_epsilon: Vec<f64>,
    pub scan_r: Vec<f64>,
    pub r_list: Vec<f64>,
    pub n_photons: usize,
    pub trials: usize,
    pub seed: u64,
    pub suite: SuiteKind,
    pub oracle_resolution: usize,
    pub echo: String,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let gaussian = (raw.f64("sigma1")?, raw.f64("sigma2")?, raw.f64("beta")?);
        let grid_file = match raw.get("grid_file") {
            "" => None,
            p => Some(PathBuf::from(p)),
        };
        let psf = match raw.get("psf") {
            "gaussian" => make_gaussian(gaussian.0, gaussian.1, gaussian.2)?,
            "grid" => {
                let path = grid_file.as_ref().ok_or_else(|| config_error("psf = grid needs grid_file".into()))?;
                if !path.exists() {
                    return Err(config_error(format!("grid_file {} does not exist", path.display())));
                }
                Psf::from(GridPsf::load(path)?)
            }
            other => return Err(config_error(format!("psf must be gaussian or grid, got `{other}`"))),
        };
        let scene = SceneParams {
            centroid_x: raw.f64("centroid_x")?,
            centroid_y: raw.f64("centroid_y")?,
            r: raw.f64("r")?,
            alpha: raw.f64("alpha")?,
            epsilon: raw.f64("epsilon")?,
            n_total: raw.f64("n_total")?,
        };
        scene.validate()?;
        let axis = |name: &str| -> Result<Vec<f64>> {
            let n = raw.usize(&format!("scan_{name}_n"))?;
            if n == 0 {
                return Err(config_error(format!("scan_{name}_n must be at least 1")));
            }
            Ok(linspace(raw.f64(&format!("scan_{name}_min"))?, raw.f64(&format!("scan_{name}_max"))?, n))
        };
        let r_list = raw
            .get("r_list")
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| config_error(format!("r_list entry `{s}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        let seed = raw.get("seed").parse().map_err(|_| config_error("seed must be an unsigned integer".into()))?;
        Ok(Self {
            psf,
            gaussian,
            grid_file,
            scene,
            direct: raw.bool("direct")?,
            scan: match raw.get("scan") {
                "distance" => ScanKind::Distance,
                "azimuth" => ScanKind::Azimuth,
                other => return Err(config_error(format!("scan must be distance or azimuth, got `{other}`"))),
            },
            scan_alpha: axis("alpha")?,
            scan_epsilon: axis("epsilon")?,
            scan_r: axis("r")?,
            r_list,
            n_photons: raw.usize("n_photons")?,
            trials: raw.usize("trials")?,
            seed,
            suite: match raw.get("suite") {
                "gaussian" => SuiteKind::Gaussian,
                "grid" => SuiteKind::Grid,
                other => return Err(config_error(format!("suite must be gaussian or grid, got `{other}`"))),
            },
            oracle_resolution: raw.usize("oracle_resolution")?,
            echo: raw.echo(),
        })
    }
}
