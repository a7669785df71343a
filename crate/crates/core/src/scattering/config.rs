use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::architecture::{LayerModule, ScatteringArchitecture};
use super::connecting::ConnectingOperator;
use super::nonlinearity::Nonlinearity;
use crate::error::{Error, Result};
use crate::graph::{
    adjacency_operator, degree_operator, laplacian, read_matrix, rescaled_laplacian, GraphSignalSpace, ShiftOperator,
};
use crate::spectral::{BankConfig, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorName {
    RescaledLaplacian,
    Laplacian,
    NormalizedLaplacian,
    Adjacency,
    Degree,
}

/// A shift operator built from the input graph, or read from a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(OperatorName),
    File { matrix: PathBuf },
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec::Named(OperatorName::RescaledLaplacian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectingName {
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConnectingSpec {
    Named(ConnectingName),
    File { matrix: PathBuf },
}

impl Default for ConnectingSpec {
    fn default() -> Self {
        ConnectingSpec::Named(ConnectingName::Identity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    #[serde(default)]
    pub nonlinearity: Nonlinearity,
    pub bank: BankConfig,
    #[serde(default)]
    pub connecting: ConnectingSpec,
    #[serde(default)]
    pub operator: OperatorSpec,
}

/// Architecture description. Either `repeat` (one layer used `depth` times)
/// or an explicit `layers` list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub repeat: Option<LayerSpec>,
    #[serde(default)]
    pub layers: Option<Vec<LayerSpec>>,
    /// Directory against which relative matrix paths resolve.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ArchitectureSpec {
    /// The experiment presets: modulus nonlinearity, identity connecting
    /// operators and the rescaled Laplacian in every layer.
    pub fn preset(preset: Preset, depth: usize) -> Self {
        ArchitectureSpec {
            depth: Some(depth),
            repeat: Some(LayerSpec {
                nonlinearity: Nonlinearity::Absolute,
                bank: BankConfig { preset: Some(preset), ..BankConfig::default() },
                connecting: ConnectingSpec::default(),
                operator: OperatorSpec::default(),
            }),
            layers: None,
            base_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn from_file(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let mut spec = Self::from_toml(&std::fs::read_to_string(path)?)?;
        spec.base_dir = path.parent().map(FsPath::to_path_buf);
        Ok(spec)
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn layer_specs(&self) -> Result<Vec<LayerSpec>> {
        match (&self.repeat, &self.layers) {
            (Some(layer), None) => {
                let depth = self.depth.ok_or_else(|| Error::Config("`repeat` needs a `depth`".into()))?;
                Ok(vec![layer.clone(); depth])
            }
            (None, Some(layers)) => {
                let depth = self.depth.unwrap_or(layers.len());
                if depth > layers.len() {
                    return Err(Error::Config(format!("depth {depth} exceeds the {} listed layers", layers.len())));
                }
                Ok(layers[..depth].to_vec())
            }
            (None, None) => match self.depth {
                Some(0) => Ok(Vec::new()),
                _ => Err(Error::Config("architecture needs `repeat` or `layers`".into())),
            },
            (Some(_), Some(_)) => Err(Error::Config("use either `repeat` or `layers`, not both".into())),
        }
    }

    fn resolve(&self, p: &FsPath) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Instantiates the architecture on a graph.
    pub fn build(&self, adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>) -> Result<ScatteringArchitecture> {
        let specs = self.layer_specs()?;
        let mut layers = Vec::with_capacity(specs.len());
        let mut current = space.clone();
        let mut graph_operators: Vec<(OperatorName, ShiftOperator)> = Vec::new();
        for spec in &specs {
            let bank = spec.bank.build()?;
            let connecting = match &spec.connecting {
                ConnectingSpec::Named(ConnectingName::Identity) => ConnectingOperator::Identity,
                ConnectingSpec::File { matrix } => ConnectingOperator::from_real(&read_matrix(self.resolve(matrix))?),
            };
            let shift = match &spec.operator {
                OperatorSpec::Named(name) => match graph_operators.iter().find(|(n, _)| n == name) {
                    Some((_, op)) => op.clone(),
                    None => {
                        let op = named_operator(*name, adjacency, space)?;
                        graph_operators.push((*name, op.clone()));
                        op
                    }
                },
                OperatorSpec::File { matrix } => {
                    let m = read_matrix(self.resolve(matrix))?;
                    let target = if m.nrows() == current.size() { current.clone() } else { GraphSignalSpace::unit(m.nrows()) };
                    ShiftOperator::from_real(&target, &m, crate::graph::OperatorKind::Custom)?
                }
            };
            let domain = shift.space().clone();
            let layer = LayerModule::new(spec.nonlinearity, bank, connecting, shift, current.clone(), domain.clone())?;
            current = domain;
            layers.push(layer);
        }
        ScatteringArchitecture::new(space.clone(), layers)
    }
}

fn named_operator(name: OperatorName, adjacency: &DMatrix<f64>, space: &Arc<GraphSignalSpace>) -> Result<ShiftOperator> {
    match name {
        OperatorName::RescaledLaplacian => rescaled_laplacian(adjacency, space),
        OperatorName::Laplacian => laplacian(adjacency, space, false),
        OperatorName::NormalizedLaplacian => laplacian(adjacency, space, true),
        OperatorName::Adjacency => adjacency_operator(adjacency, space),
        OperatorName::Degree => degree_operator(adjacency, space),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.])
    }

    #[test]
    fn repeat_shorthand() {
        let text = r#"
            depth = 3
            [repeat]
            nonlinearity = "absolute"
            bank = { preset = "architecture_I" }
            connecting = "identity"
            operator = "rescaled_laplacian"
        "#;
        let spec = ArchitectureSpec::from_toml(text).unwrap();
        assert_eq!(spec, ArchitectureSpec::preset(Preset::ArchitectureI, 3));
        let arch = spec.build(&k3(), &GraphSignalSpace::unit(3)).unwrap();
        assert_eq!(arch.depth(), 3);
        assert_eq!(arch.output_count(), 1 + 4 + 16);
    }

    #[test]
    fn explicit_layers_and_depth_override() {
        let text = r#"
            [[layers]]
            bank = { preset = "architecture_II" }
            [[layers]]
            nonlinearity = "relu"
            operator = "laplacian"
            bank = { output = { kind = "delta_zero" }, filters = [{ kind = "cos_scaled", scale = 0.5 }] }
        "#;
        let spec = ArchitectureSpec::from_toml(text).unwrap();
        let arch = spec.build(&k3(), &GraphSignalSpace::unit(3)).unwrap();
        assert_eq!(arch.layers()[1].branching(), 1);
        assert_eq!(arch.output_count(), 1 + 4);
        assert_eq!(spec.clone().with_depth(1).layer_specs().unwrap().len(), 1);
        assert!(matches!(spec.with_depth(5).layer_specs(), Err(Error::Config(_))));
    }

    #[test]
    fn matrix_files_resolve_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pool.txt"), "0.5 0.5 0\n0 0 1\n").unwrap();
        std::fs::write(dir.path().join("op.txt"), "1 0\n0 0\n").unwrap();
        std::fs::write(
            dir.path().join("arch.toml"),
            "[[layers]]\nbank = { preset = \"architecture_II\" }\n\
             [[layers]]\nbank = { preset = \"architecture_II\" }\nconnecting = { matrix = \"pool.txt\" }\noperator = { matrix = \"op.txt\" }\n",
        )
        .unwrap();
        let spec = ArchitectureSpec::from_file(dir.path().join("arch.toml")).unwrap();
        let arch = spec.build(&k3(), &GraphSignalSpace::unit(3)).unwrap();
        assert_eq!(arch.layers()[1].domain().size(), 2);
        assert!((arch.layers()[1].connecting_upper() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_incomplete_specs() {
        assert!(matches!(ArchitectureSpec::from_toml("depth = 2").unwrap().layer_specs(), Err(Error::Config(_))));
        assert!(matches!(ArchitectureSpec::from_toml("bogus = 1"), Err(Error::Config(_))));
    }
}
