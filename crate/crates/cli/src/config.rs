//! Experiment configuration, read from TOML.
//!
//! The layout is described by `schema/experiment.schema.json`. Every section
//! is optional; [`ExperimentConfig::preset`] supplies the defaults used by
//! the acceptance suite.

use std::path::{Path, PathBuf};

use fatou_lab::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NagelSteinBound,
    DorronsoroBound,
    DivergenceDimension,
    FrostmanLemma,
    CommuteLemma,
    Poincare,
    CorkscrewGeometry,
    InclusionLemma,
    BoundaryMax,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::NagelSteinBound,
        ExperimentKind::DorronsoroBound,
        ExperimentKind::DivergenceDimension,
        ExperimentKind::FrostmanLemma,
        ExperimentKind::CommuteLemma,
        ExperimentKind::Poincare,
        ExperimentKind::CorkscrewGeometry,
        ExperimentKind::InclusionLemma,
        ExperimentKind::BoundaryMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NagelSteinBound => "nagel-stein-bound",
            ExperimentKind::DorronsoroBound => "dorronsoro-bound",
            ExperimentKind::DivergenceDimension => "divergence-dimension",
            ExperimentKind::FrostmanLemma => "frostman-lemma",
            ExperimentKind::CommuteLemma => "commute-lemma",
            ExperimentKind::Poincare => "poincare",
            ExperimentKind::CorkscrewGeometry => "corkscrew-geometry",
            ExperimentKind::InclusionLemma => "inclusion-lemma",
            ExperimentKind::BoundaryMax => "boundary-max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub dim: usize,
    /// Refinement levels, `N = 2^level` per axis.
    pub levels: Vec<u32>,
    pub extent: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            dim: 1,
            levels: vec![10],
            extent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    /// Smoothness of Bessel potential data.
    pub alpha: Option<f64>,
    /// Several smoothness values, for sweeps.
    pub alphas: Vec<f64>,
    /// Sobolev order of boundary data.
    pub s: Option<f64>,
    /// Approach exponent; derived as `1 - αp/n` (or `1 - sp/n`) when absent.
    pub beta: Option<f64>,
    /// Exponent of the negative control, when the experiment has one.
    pub control_beta: Option<f64>,
    pub aperture: f64,
    pub c: f64,
    /// Averaging exponents of maximal functions.
    pub q: Vec<f64>,
}

impl Default for Exponents {
    fn default() -> Self {
        Self {
            p: 2.0,
            alpha: None,
            alphas: Vec::new(),
            s: None,
            beta: None,
            control_beta: None,
            aperture: 1.0,
            c: 1.0,
            q: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Surrogate {
    pub alpha_l: f64,
    /// Averaging exponent `r` of the composite maximal function.
    pub r: Option<f64>,
    pub j_max: u32,
    /// Averaging exponent of the boundary surrogate; `(1 + p)/2` when absent.
    pub p0: Option<f64>,
}

impl Default for Surrogate {
    fn default() -> Self {
        Self {
            alpha_l: 0.5,
            r: None,
            j_max: 8,
            p0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fractal {
    /// Dimensions of the Cantor measures.
    pub s: Vec<f64>,
    pub depths: Vec<u32>,
    pub eps: f64,
    pub t_min: f64,
    pub window: [u32; 2],
    /// Dimension and depth of the Cantor set carrying the spike data.
    pub spike_s: f64,
    pub spike_depth: u32,
}

impl Default for Fractal {
    fn default() -> Self {
        Self {
            s: vec![0.6, 0.75, 0.9],
            depths: vec![12, 16],
            eps: 0.5,
            t_min: 2f64.powi(-12),
            window: [4, 10],
            spike_s: 0.4,
            spike_depth: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Lipschitz constants of the test profiles.
    pub m: Vec<f64>,
    pub profiles: u32,
    /// Random samples per profile (or random pairs, for the Poincaré test).
    pub samples: usize,
    pub teeth: u32,
    /// Aperture scale of the negative-control target region.
    pub control_scale: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            m: vec![1.0],
            profiles: 1,
            samples: 10_000,
            teeth: 4,
            control_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub surrogate: Surrogate,
    #[serde(default)]
    pub fractal: Fractal,
    #[serde(default)]
    pub geometry: Geometry,
}

fn default_output() -> PathBuf {
    PathBuf::from("fatou-lab-out")
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

impl ExperimentConfig {
    /// Parameters of the corresponding acceptance criterion.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut c = Self {
            experiment: kind,
            seeds: (0..20).collect(),
            output_dir: default_output(),
            grid: GridParams::default(),
            exponents: Exponents::default(),
            surrogate: Surrogate::default(),
            fractal: Fractal::default(),
            geometry: Geometry::default(),
        };
        match kind {
            ExperimentKind::NagelSteinBound => {
                c.grid.levels = vec![10, 12, 14];
                c.exponents.alpha = Some(0.25);
                c.exponents.control_beta = Some(0.25);
            }
            ExperimentKind::DorronsoroBound => {
                c.grid.levels = vec![12];
                c.seeds = (0..10).collect();
                c.exponents.alpha = Some(0.25);
            }
            ExperimentKind::DivergenceDimension => {
                c.grid.levels = vec![14];
                c.seeds = vec![0];
                c.exponents.alpha = Some(0.25);
            }
            ExperimentKind::FrostmanLemma => {
                c.grid.levels = vec![12];
                c.exponents.alpha = Some(0.25);
            }
            ExperimentKind::CommuteLemma => {
                c.exponents.q = vec![1.0, 2.0];
            }
            ExperimentKind::Poincare => {
                c.grid.levels = vec![10, 12];
                c.exponents.alphas = vec![0.3, 0.7];
                c.geometry.samples = 10_000;
            }
            ExperimentKind::CorkscrewGeometry => {
                c.seeds = vec![0];
                c.geometry.m = vec![0.5, 1.0, 3.0];
                c.geometry.samples = 10_000;
            }
            ExperimentKind::InclusionLemma => {
                c.seeds = vec![0];
                c.exponents.beta = Some(0.5);
                c.geometry.profiles = 10;
                c.geometry.samples = 100_000;
            }
            ExperimentKind::BoundaryMax => {
                c.grid.levels = vec![10, 12];
                c.seeds = (0..10).collect();
                c.exponents.s = Some(0.25);
            }
        }
        c
    }

    pub fn from_toml(text: &str) -> fatou_lab::Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> fatou_lab::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialise")
    }

    /// SHA-256 of the canonical TOML serialisation, in hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn alpha(&self) -> fatou_lab::Result<f64> {
        self.exponents
            .alpha
            .ok_or_else(|| bad(format!("{} needs exponents.alpha", self.experiment.name())))
    }

    /// The approach exponent: explicit, or `1 - αp/n` from the smoothness.
    pub fn beta(&self) -> fatou_lab::Result<f64> {
        if let Some(b) = self.exponents.beta {
            return Ok(b);
        }
        let n = self.grid.dim as f64;
        let p = self.exponents.p;
        let smooth = self.exponents.alpha.or(self.exponents.s).ok_or_else(|| {
            bad(format!(
                "{} needs exponents.beta or a smoothness to derive it from",
                self.experiment.name()
            ))
        })?;
        let b = 1.0 - smooth * p / n;
        if b <= 0.0 {
            return Err(bad(format!(
                "derived β = 1 - αp/n = {b} is not positive; αp < n required"
            )));
        }
        Ok(b)
    }

    /// Averaging exponent `r`, by default halfway between 1 and `p`.
    pub fn r(&self) -> f64 {
        self.surrogate.r.unwrap_or(0.5 * (1.0 + self.exponents.p))
    }

    pub fn p0(&self) -> f64 {
        self.surrogate.p0.unwrap_or(0.5 * (1.0 + self.exponents.p))
    }

    /// Checks the constraints of the selected experiment, naming the first
    /// violated one.
    pub fn validate(&self) -> fatou_lab::Result<()> {
        let g = &self.grid;
        if !(g.dim == 1 || g.dim == 2) {
            return Err(bad(format!("grid.dim must be 1 or 2, got {}", g.dim)));
        }
        if g.levels.is_empty() {
            return Err(bad("grid.levels is empty"));
        }
        if let Some(l) = g.levels.iter().find(|&&l| !(2..=24).contains(&l) || (g.dim == 2 && l > 12)) {
            return Err(bad(format!("grid level {l} out of range")));
        }
        if !(g.extent > 0.0) {
            return Err(bad("grid.extent must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(bad("seeds is empty"));
        }
        // TOML integers are signed 64-bit
        if let Some(s) = self.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            return Err(bad(format!("seed {s} exceeds 2^63 - 1")));
        }
        let p = self.exponents.p;
        if !(p > 1.0 && p.is_finite()) {
            return Err(bad(format!("p must lie in (1, ∞), got {p}")));
        }
        let n = g.dim as f64;
        if let Some(b) = self.exponents.beta {
            if !(b > 0.0 && b <= 1.0) {
                return Err(bad(format!("β must lie in (0, 1], got {b}")));
            }
        }
        let one_d = |what: &str| -> fatou_lab::Result<()> {
            if g.dim != 1 {
                return Err(bad(format!("{what} runs on one-dimensional grids only")));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::NagelSteinBound | ExperimentKind::DorronsoroBound => {
                let a = self.alpha()?;
                if !(a > 0.0 && a * p <= n) {
                    return Err(bad(format!("0 < α and αp <= n required, got α = {a}, p = {p}")));
                }
                self.beta()?;
                if let Some(cb) = self.exponents.control_beta {
                    if !(cb > 0.0 && cb < self.beta()?) {
                        return Err(bad("control_beta must lie in (0, β)"));
                    }
                }
                if self.exponents.q.iter().any(|&q| !(q >= 1.0 && q < p)) {
                    return Err(bad("1 <= q < p required"));
                }
            }
            ExperimentKind::DivergenceDimension => {
                one_d("divergence-dimension")?;
                let a = self.alpha()?;
                if !(a > 0.0 && a * p < n) {
                    return Err(bad(format!("αp < n required, got α = {a}, p = {p}")));
                }
                self.beta()?;
                let f = &self.fractal;
                if !(f.eps > 0.0 && f.t_min > 0.0) {
                    return Err(bad("fractal.eps and fractal.t_min must be positive"));
                }
                if !(f.window[0] < f.window[1]) {
                    return Err(bad("fractal.window must be increasing"));
                }
            }
            ExperimentKind::FrostmanLemma => {
                one_d("frostman-lemma")?;
                let a = self.alpha()?;
                let floor = n - a * p;
                if let Some(s) = self.fractal.s.iter().find(|&&s| !(s > floor)) {
                    return Err(bad(format!(
                        "s > n−αp required: s = {s} but n − αp = {floor}"
                    )));
                }
                if self.fractal.s.iter().any(|&s| s > n) {
                    return Err(bad("Cantor dimensions must not exceed n"));
                }
                if self.fractal.depths.is_empty() {
                    return Err(bad("fractal.depths is empty"));
                }
            }
            ExperimentKind::CommuteLemma => {
                if self.exponents.q.is_empty() || self.exponents.q.iter().any(|&q| q < 1.0) {
                    return Err(bad("q >= 1 required"));
                }
            }
            ExperimentKind::Poincare => {
                one_d("poincare")?;
                let alphas = self.poincare_alphas();
                if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
                    return Err(bad("Poincaré smoothness values must lie in (0, 1)"));
                }
            }
            ExperimentKind::CorkscrewGeometry | ExperimentKind::InclusionLemma => {
                one_d(self.experiment.name())?;
                if self.geometry.m.iter().any(|&m| !(m > 0.0)) {
                    return Err(bad("Lipschitz constants must be positive"));
                }
                if self.geometry.samples == 0 {
                    return Err(bad("geometry.samples must be >= 1"));
                }
                if self.experiment == ExperimentKind::InclusionLemma {
                    self.beta()?;
                    if !(self.exponents.c > 0.0) {
                        return Err(bad("c must be positive"));
                    }
                }
            }
            ExperimentKind::BoundaryMax => {
                one_d("boundary-max")?;
                let s = self
                    .exponents
                    .s
                    .ok_or_else(|| bad("boundary-max needs exponents.s"))?;
                if !(s > 0.0 && s < 1.0 && s * p < n) {
                    return Err(bad(format!("0 < s < 1 and sp < n required, got s = {s}")));
                }
                self.beta()?;
                let p0 = self.p0();
                if !(p0 > 1.0 && p0 < p) {
                    return Err(bad(format!("1 < p₀ < p required, got p₀ = {p0}")));
                }
                if !(self.surrogate.alpha_l > 0.0 && self.surrogate.alpha_l <= 1.0) {
                    return Err(bad("α_L must lie in (0, 1]"));
                }
            }
        }
        let r = self.r();
        if !(r > 1.0 && r < p) {
            return Err(bad(format!("1 < r < p required, got r = {r}")));
        }
        Ok(())
    }

    pub fn poincare_alphas(&self) -> Vec<f64> {
        if self.exponents.alphas.is_empty() {
            self.exponents.alpha.into_iter().collect()
        } else {
            self.exponents.alphas.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for kind in ExperimentKind::ALL {
            let c = ExperimentConfig::preset(kind);
            c.validate().unwrap();
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let c = ExperimentConfig::from_toml("experiment = \"poincare\"\nseeds = [1]\n").unwrap();
        assert_eq!(c.grid.levels, vec![10]);
        assert_eq!(c.exponents.p, 2.0);
        assert!(ExperimentConfig::from_toml("experiment = \"poincare\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"\n").is_err());
    }

    #[test]
    fn frostman_precondition_named() {
        let mut c = ExperimentConfig::preset(ExperimentKind::FrostmanLemma);
        c.fractal.s = vec![0.4];
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("s > n−αp required"), "{e}");
    }

    #[test]
    fn beta_is_derived() {
        let c = ExperimentConfig::preset(ExperimentKind::NagelSteinBound);
        assert!((c.beta().unwrap() - 0.5).abs() < 1e-15);
        let b = ExperimentConfig::preset(ExperimentKind::BoundaryMax);
        assert!((b.beta().unwrap() - 0.5).abs() < 1e-15);
        let mut bad = c.clone();
        bad.exponents.alpha = Some(0.75);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::preset(ExperimentKind::Poincare);
        let mut b = a.clone();
        b.seeds.push(99);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
