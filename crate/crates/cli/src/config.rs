//! Scenario files. One TOML document describes every run; unknown keys are
//! rejected so that a typo cannot silently fall back to a default.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hom_superres::estimator::FitSpec;
use hom_superres::fisher::SldGrid;
use hom_superres::{DetectorSpec, QuadratureSpec, SourceModel, SourceScene, Strategy};
use serde::Deserialize;

/// A scalar or a list of scalars.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default)]
    pub x0: f64,
    pub eps: OneOrMany,
    pub visibility: OneOrMany,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub half_width: Option<f64>,
    pub nodes_1d: Option<usize>,
    pub nodes_2d: Option<usize>,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    /// Closed-form quantum Fisher matrix.
    #[default]
    Reference,
    /// Symmetric-logarithmic-derivative solve on a grid.
    Numeric,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiConfig {
    #[serde(default)]
    pub method: QfiMethod,
    pub points: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Pairs per batch (photons per direct-imaging batch are twice this).
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_n_batches")]
    pub n_batches: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grow two-photon batches until they hold `batch_size` cross-coincidences.
    #[serde(default)]
    pub condition_on_coincidences: bool,
    /// Pairs written by `simulate`.
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
}

fn default_batch_size() -> usize {
    1000
}
fn default_n_batches() -> usize {
    200
}
fn default_seed() -> u64 {
    1
}
fn default_n_pairs() -> usize {
    100_000
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            batch_size: default_batch_size(),
            n_batches: default_n_batches(),
            seed: default_seed(),
            condition_on_coincidences: false,
            n_pairs: default_n_pairs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub pixel_width: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub regions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityMapConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Half-width in units of sigma beyond the outer source.
    #[serde(default = "default_map_half_width")]
    pub half_width: f64,
}

fn default_points() -> usize {
    121
}
fn default_map_half_width() -> f64 {
    6.0
}

impl Default for DensityMapConfig {
    fn default() -> Self {
        DensityMapConfig { points: default_points(), half_width: default_map_half_width() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub fisher_scan: String,
    pub density_pc: String,
    pub density_pd: String,
    pub events: String,
    pub binned: String,
    pub regions: String,
    pub precision: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            fisher_scan: "fisher_scan.csv".into(),
            density_pc: "pc.csv".into(),
            density_pd: "pd.csv".into(),
            events: "events.csv".into(),
            binned: "binned.csv".into(),
            regions: "regions.csv".into(),
            precision: "precision.csv".into(),
        }
    }
}

fn default_strategies() -> Vec<String> {
    Strategy::ALL.iter().map(|s| s.name().to_string()).collect()
}

fn default_model() -> String {
    SourceModel::ThermalPair.name().to_string()
}

/// The parsed scenario file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    pub scene: SceneConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub qfi: QfiConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub density_map: DensityMapConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated scenario with typed values.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: SourceModel,
    pub strategies: Vec<Strategy>,
    pub x0: f64,
    pub eps: Vec<f64>,
    pub visibility: Vec<f64>,
    pub sigma: f64,
    pub quadrature: QuadratureSpec,
    pub qfi: QfiMethod,
    pub sld: SldGrid,
    pub sampling: SamplingConfig,
    pub fit: FitSpec,
    pub detector: Option<DetectorSpec>,
    pub density_map: DensityMapConfig,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Checks every value against the types it feeds; errors name the field.
    pub fn validate(&self) -> Result<Scenario> {
        let model: SourceModel = self.model.parse().context("field `model`")?;
        if self.strategies.is_empty() {
            bail!("field `strategies`: list must not be empty");
        }
        let mut strategies = Vec::new();
        for s in &self.strategies {
            let s: Strategy = s.parse().context("field `strategies`")?;
            if strategies.contains(&s) {
                bail!("field `strategies`: {s} listed twice");
            }
            strategies.push(s);
        }
        let eps = self.scene.eps.values();
        let visibility = self.scene.visibility.values();
        if eps.is_empty() {
            bail!("field `scene.eps`: list must not be empty");
        }
        if visibility.is_empty() {
            bail!("field `scene.visibility`: list must not be empty");
        }
        let sigma = self.scene.sigma;
        for &e in &eps {
            for &v in &visibility {
                SourceScene::with_sigma(self.scene.x0, e, v, sigma).context("field `scene`")?;
            }
        }

        let d = QuadratureSpec::default();
        let q = &self.quadrature;
        let quadrature = QuadratureSpec {
            half_width: q.half_width.unwrap_or(d.half_width),
            nodes_1d: q.nodes_1d.unwrap_or(d.nodes_1d),
            nodes_2d: q.nodes_2d.unwrap_or(d.nodes_2d),
            floor: q.floor.unwrap_or(d.floor),
        };
        quadrature.validate().context("table `quadrature`")?;
        let g = SldGrid::default();
        let sld = SldGrid {
            points: self.qfi.points.unwrap_or(g.points),
            half_width: self.qfi.half_width.unwrap_or(g.half_width),
            ..g
        };
        sld.validate().context("table `qfi`")?;

        let detector = match &self.detector {
            None => None,
            Some(c) => Some(
                DetectorSpec::new(c.pixel_width, c.lo, c.hi)
                    .and_then(|d| d.with_regions(c.regions.clone()))
                    .context("table `detector`")?,
            ),
        };
        if self.density_map.points < 2 {
            bail!("field `density_map.points`: need at least 2 points");
        }
        if !(self.density_map.half_width.is_finite() && self.density_map.half_width > 0.0) {
            bail!("field `density_map.half_width`: must be finite and > 0");
        }
        Ok(Scenario {
            model,
            strategies,
            x0: self.scene.x0,
            eps,
            visibility,
            sigma,
            quadrature,
            qfi: self.qfi.method,
            sld,
            sampling: self.sampling.clone(),
            fit: FitSpec::default(),
            detector,
            density_map: self.density_map.clone(),
            output: self.output.clone(),
        })
    }
}

impl Scenario {
    pub fn scene(&self, eps: f64, visibility: f64) -> SourceScene {
        SourceScene::with_sigma(self.x0, eps, visibility, self.sigma).expect("validated")
    }

    /// The single scene of commands that do not scan.
    pub fn single_scene(&self, command: &str) -> Result<SourceScene> {
        if self.eps.len() != 1 || self.visibility.len() != 1 {
            bail!("{command} needs a single `scene.eps` and a single `scene.visibility`");
        }
        Ok(self.scene(self.eps[0], self.visibility[0]))
    }
}
