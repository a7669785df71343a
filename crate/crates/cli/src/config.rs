use std::path::{Path, PathBuf};

use graph_scatter::aggregation::Aggregator;
use graph_scatter::dataset::DatasetFormat;
use graph_scatter::descriptors::Descriptor;
use graph_scatter::scattering::ArchitectureSpec;
use graph_scatter::spectral::{BankConfig, FilterBank, Preset};
use graph_scatter::{Error, Result};
use serde::Deserialize;

/// Everything a run needs. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub depth: Option<usize>,
    /// Architecture spec file; takes precedence over `preset`.
    pub architecture: Option<PathBuf>,
    pub dataset: Option<DatasetConfig>,
    #[serde(default)]
    pub aggregation: AggregationConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub perturb: PerturbConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: DatasetFormat,
    /// Descriptor names; all seven when absent.
    pub descriptors: Option<Vec<String>>,
}

fn default_format() -> DatasetFormat {
    DatasetFormat::EdgeListMulti
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    Pnorm,
    Lowpass,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationConfig {
    pub mode: AggregationMode,
    pub p: usize,
    pub normalize_first: bool,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig { mode: AggregationMode::Pnorm, p: 5, normalize_first: false }
    }
}

impl AggregationConfig {
    pub fn aggregator(&self) -> Result<Aggregator> {
        match self.mode {
            AggregationMode::Lowpass => Ok(Aggregator::LowPass),
            AggregationMode::Pnorm if self.p >= 1 => {
                Ok(Aggregator::PNorm { p: self.p, normalize_first: self.normalize_first })
            }
            AggregationMode::Pnorm => Err(Error::Config("aggregation p must be at least 1".into())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BankSource {
    File(PathBuf),
    Inline(BankConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub bank: Option<BankSource>,
    pub interval: [f64; 2],
    pub grid: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { bank: None, interval: [0.0, 1.0], grid: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    /// Hermitian perturbations of every shift operator on one graph.
    Operator,
    /// The split-vertex graph pair with its identification operators.
    SplitVertex,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbConfig {
    pub kind: PerturbKind,
    pub delta: f64,
    pub samples: usize,
    pub graph_size: usize,
    pub edge_probability: f64,
    pub omega: f64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        PerturbConfig {
            kind: PerturbKind::Operator,
            delta: 0.1,
            samples: 50,
            graph_size: 16,
            edge_probability: 0.3,
            omega: -1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub graph_size: usize,
    pub edge_probability: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig { graph_size: 16, edge_probability: 0.3 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Generate this many synthetic molecules when no dataset is given.
    pub synthetic: Option<usize>,
    pub folds: usize,
    pub standardize: bool,
    pub gammas: Option<Vec<f64>>,
    /// `C` values; the ridge is `1 / C`.
    pub c_pool: Option<Vec<f64>>,
    pub model_out: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { synthetic: None, folds: 10, standardize: false, gammas: None, c_pool: None, model_out: None }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Io(format!("config file not found: {}", path.display())));
        }
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn architecture_spec(&self, default_preset: Preset, default_depth: usize) -> Result<ArchitectureSpec> {
        let spec = match &self.architecture {
            Some(path) => {
                let path = self.resolve(path);
                if !path.exists() {
                    return Err(Error::Io(format!("architecture file not found: {}", path.display())));
                }
                ArchitectureSpec::from_file(&path)?
            }
            None => ArchitectureSpec::preset(self.preset.unwrap_or(default_preset), default_depth),
        };
        Ok(match self.depth {
            Some(d) => spec.with_depth(d),
            None if spec.depth.is_none() && spec.layers.is_none() => spec.with_depth(default_depth),
            None => spec,
        })
    }

    pub fn frame_bank(&self) -> Result<FilterBank> {
        match &self.frame.bank {
            Some(BankSource::Inline(cfg)) => cfg.build(),
            Some(BankSource::File(path)) => {
                let path = self.resolve(path);
                if !path.exists() {
                    return Err(Error::Io(format!("bank file not found: {}", path.display())));
                }
                BankConfig::from_toml(&std::fs::read_to_string(path)?)
            }
            None => Ok(self.preset.unwrap_or(Preset::ArchitectureI).bank()),
        }
    }

    pub fn descriptors(&self) -> Result<Vec<Descriptor>> {
        match self.dataset.as_ref().and_then(|d| d.descriptors.as_ref()) {
            Some(names) => names.iter().map(|n| n.parse()).collect(),
            None => Ok(Descriptor::ALL.to_vec()),
        }
    }

    pub fn dataset_path(&self) -> Result<(PathBuf, DatasetFormat)> {
        let d = self.dataset.as_ref().ok_or_else(|| Error::Config("no dataset configured".into()))?;
        Ok((self.resolve(&d.path), d.format))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_parses() {
        let text = r#"
            seed = 3
            jobs = 2
            preset = "architecture_II"
            depth = 2
            [dataset]
            path = "graphs.txt"
            descriptors = ["degree", "pagerank"]
            [aggregation]
            mode = "lowpass"
            [frame]
            bank = { filters = [{ kind = "constant", amplitude = 0.0 }] }
            grid = 11
            [perturb]
            kind = "split_vertex"
            delta = 0.01
        "#;
        let mut cfg: RunConfig = toml::from_str(text).unwrap();
        cfg.base_dir = Some(PathBuf::from("/data"));
        assert_eq!(cfg.dataset_path().unwrap(), (PathBuf::from("/data/graphs.txt"), DatasetFormat::EdgeListMulti));
        assert_eq!(cfg.descriptors().unwrap(), vec![Descriptor::Degree, Descriptor::Pagerank]);
        assert_eq!(cfg.aggregation.aggregator().unwrap(), Aggregator::LowPass);
        assert_eq!(cfg.perturb.kind, PerturbKind::SplitVertex);
        assert_eq!(cfg.architecture_spec(Preset::ArchitectureI, 4).unwrap().depth, Some(2));
        let bounds = cfg.frame_bank().unwrap().frame_bounds_on_interval(0.0, 1.0, 11).unwrap();
        assert_eq!((bounds.lower, bounds.upper), (0.0, 0.0));
    }

    #[test]
    fn defaults_and_errors() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.seed(), 0);
        assert_eq!(cfg.descriptors().unwrap().len(), 7);
        assert!(matches!(cfg.dataset_path(), Err(Error::Config(_))));
        assert!(toml::from_str::<RunConfig>("colour = 1").is_err());
        let bad: RunConfig = toml::from_str("[aggregation]\np = 0").unwrap();
        assert!(matches!(bad.aggregation.aggregator(), Err(Error::Config(_))));
    }
}
