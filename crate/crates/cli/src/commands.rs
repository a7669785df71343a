use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use graph_scatter::aggregation::{aggregate_tree, format_value, Aggregator};
use graph_scatter::dataset::{read_graph_dataset, read_molecules, synthetic_molecules, DatasetFormat, GraphRecord};
use graph_scatter::descriptors::{applicable_descriptors, node_descriptors, Descriptor};
use graph_scatter::graph::{canonical_order, GraphSignalSpace};
use graph_scatter::higher_order::{molecule_features, MoleculeFeatureConfig};
use graph_scatter::kernel_ml::{cross_validate, fit_krr, CvConfig, CvReport, Grids, Task};
use graph_scatter::perturbation::{
    graph_perturbation_experiment, hermitian_perturbation, operator_perturbation_experiment, reference_split_pair,
    GraphExperimentConfig,
};
use graph_scatter::random::{permute_adjacency, random_connected_adjacency, random_signal};
use graph_scatter::scattering::{
    energy_decay_certificate, scatter, ArchitectureSpec, EigenvectorChoice, Nonlinearity, ScatteringArchitecture,
};
use graph_scatter::spectral::Preset;
use graph_scatter::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{PerturbKind, RunConfig};

/// What a command produced: its text output and whether every checked bound held.
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failure: None }
    }
}

/// Writes `text` to `out`, or returns it for standard output.
fn emit(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(text.as_bytes())?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn load_graphs(cfg: &RunConfig) -> Result<Vec<GraphRecord>> {
    let (path, format) = cfg.dataset_path()?;
    let records = read_graph_dataset(&path, format)?;
    log::info!("loaded {} graphs from {}", records.len(), path.display());
    Ok(records)
}

/// Runs `f` on every graph with its descriptor signals, in parallel but
/// collected in dataset order.
/// Runs `f` on every descriptor signal of every graph. Graph-level callers set
/// `canonical`, which relabels each graph into its canonical vertex order
/// first so isomorphic graphs give bit-identical results.
fn per_graph<T: Send>(
    cfg: &RunConfig,
    spec: &ArchitectureSpec,
    canonical: bool,
    f: impl Fn(&GraphRecord, &ScatteringArchitecture, Descriptor, &graph_scatter::graph::Signal) -> Result<T> + Sync,
) -> Result<Vec<(String, Vec<(Descriptor, T)>)>> {
    let records = load_graphs(cfg)?;
    let requested = cfg.descriptors()?;
    let total = records.len();
    records
        .par_iter()
        .enumerate()
        .map(|(k, record)| {
            let space = GraphSignalSpace::unit(record.size());
            let adjacency = if canonical {
                permute_adjacency(&record.adjacency, &canonical_order(&record.adjacency))
            } else {
                record.adjacency.clone()
            };
            let arch = spec.build(&adjacency, &space)?;
            let wanted = applicable_descriptors(&adjacency, &requested);
            let signals = node_descriptors(&adjacency, &space, &wanted)?;
            let values = signals
                .entries
                .iter()
                .map(|(d, s)| Ok((*d, f(record, &arch, *d, s)?)))
                .collect::<Result<Vec<_>>>()?;
            log::info!("graph {} ({}/{total}) done", record.id, k + 1);
            Ok((record.id.clone(), values))
        })
        .collect()
}

pub fn cmd_scatter(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.architecture_spec(Preset::ArchitectureI, 4)?;
    let results = per_graph(cfg, &spec, false, |_, arch, _, s| scatter(arch, s))?;
    let mut rows = Vec::new();
    for (id, per_signal) in &results {
        for (d, tree) in per_signal {
            for (layer, path, out) in tree.iter_outputs() {
                for (v, c) in out.values().iter().enumerate() {
                    rows.push(vec![
                        id.clone(),
                        d.name().to_string(),
                        layer.to_string(),
                        path.to_string(),
                        v.to_string(),
                        format_value(c.re),
                        format_value(c.im),
                    ]);
                }
            }
        }
    }
    let text = csv_text(&["graph", "signal", "layer", "path", "vertex", "re", "im"], rows)?;
    Ok(Outcome::ok(emit(cfg.out.as_deref(), text)?))
}

fn aggregated(cfg: &RunConfig, spec: &ArchitectureSpec, agg: Aggregator) -> Result<Vec<(String, Vec<(Descriptor, graph_scatter::aggregation::GraphLevelFeatures)>)>> {
    per_graph(cfg, spec, true, |_, arch, _, s| aggregate_tree(arch, &scatter(arch, s)?, &[agg]))
}

pub fn cmd_aggregate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.architecture_spec(Preset::ArchitectureI, 4)?;
    let agg = cfg.aggregation.aggregator()?;
    let mut rows = Vec::new();
    for (id, per_signal) in aggregated(cfg, &spec, agg)? {
        for (d, features) in per_signal {
            for (layer, path, component, value) in features.rows() {
                rows.push(vec![
                    id.clone(),
                    d.name().to_string(),
                    layer.to_string(),
                    path.to_string(),
                    component.to_string(),
                    format_value(value),
                ]);
            }
        }
    }
    let text = csv_text(&["graph", "signal", "layer", "path", "component", "value"], rows)?;
    Ok(Outcome::ok(emit(cfg.out.as_deref(), text)?))
}

pub fn cmd_validate_frame(cfg: &RunConfig) -> Result<Outcome> {
    let bank = cfg.frame_bank()?;
    let [lo, hi] = cfg.frame.interval;
    if !(lo <= hi) {
        return Err(Error::Config(format!("empty interval [{lo}, {hi}]")));
    }
    let b = bank.frame_bounds_on_interval(lo, hi, cfg.frame.grid)?;
    let tight = b.is_tight(graph_scatter::tolerance::FRAME);
    let report = serde_json::json!({
        "lower": b.lower, "upper": b.upper, "tight": tight,
        "interval": [lo, hi], "grid": cfg.frame.grid,
    });
    let text = format!("A: {:.12}\nB: {:.12}\ntight: {tight}\n", b.lower, b.upper);
    if let Some(out) = &cfg.out {
        std::fs::write(out, serde_json::to_string_pretty(&report).expect("json") + "\n")?;
    }
    let failure = (!(b.lower > 0.0)).then(|| format!("lower frame bound A = {} is not positive", b.lower));
    Ok(Outcome { text, failure })
}

pub fn cmd_perturb(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.perturb;
    if !(p.delta >= 0.0) {
        return Err(Error::Config(format!("delta must be non-negative, got {}", p.delta)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let spec = cfg.architecture_spec(Preset::ArchitectureII, 4)?;
    let (text, json, holds) = match p.kind {
        PerturbKind::Operator => {
            let adjacency = random_connected_adjacency(p.graph_size, p.edge_probability, &mut rng);
            let space = GraphSignalSpace::unit(p.graph_size);
            let arch = spec.build(&adjacency, &space)?;
            let shifts = arch
                .layers()
                .iter()
                .map(|l| hermitian_perturbation(l.shift(), p.delta, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let perturbed = arch.with_shifts(shifts)?;
            let samples: Vec<_> = (0..p.samples).map(|_| random_signal(&space, false, &mut rng)).collect();
            let report = operator_perturbation_experiment(&arch, &perturbed, &samples)?;
            (report.to_text(), serde_json::to_value(&report).expect("json"), Some(report.holds))
        }
        PerturbKind::SplitVertex => {
            let pair = reference_split_pair(p.delta)?;
            let layer = spec.layer_specs()?.first().cloned();
            let bank = match layer {
                Some(l) => l.bank.build()?,
                None => return Err(Error::Config("split-vertex experiment needs depth >= 1".into())),
            };
            let depth = spec.layer_specs()?.len();
            let arch = ScatteringArchitecture::uniform(&pair.laplacian, bank.clone(), Nonlinearity::Absolute, depth)?;
            let arch_tilde =
                ScatteringArchitecture::uniform(&pair.laplacian_tilde, bank, Nonlinearity::Absolute, depth)?;
            let samples: Vec<_> =
                (0..p.samples).map(|_| random_signal(pair.laplacian.space(), false, &mut rng)).collect();
            let config = GraphExperimentConfig {
                omega: Complex64::new(p.omega, 0.0),
                seed: cfg.seed(),
                ..GraphExperimentConfig::default()
            };
            let report = graph_perturbation_experiment(&arch, &arch_tilde, &[pair.pair.clone()], &samples, &config)?;
            (report.to_text(), serde_json::to_value(&report).expect("json"), report.holds)
        }
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, serde_json::to_string_pretty(&json).expect("json") + "\n")?;
    }
    let failure = (holds == Some(false)).then(|| "stability bound violated".to_string());
    Ok(Outcome { text, failure })
}

pub fn cmd_energy(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.energy;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let spec = cfg.architecture_spec(Preset::ArchitectureI, 6)?;
    let adjacency = random_connected_adjacency(e.graph_size, e.edge_probability, &mut rng);
    let space = GraphSignalSpace::unit(e.graph_size);
    let arch = spec.build(&adjacency, &space)?;
    let cert = energy_decay_certificate(&arch, &[EigenvectorChoice::Constant])?;
    let f = random_signal(&space, true, &mut rng);
    let tree = scatter(&arch, &f)?;
    let norm_sqr = f.norm_sqr();
    let mut rows = Vec::new();
    let mut violated = Vec::new();
    for n in 1..=arch.depth() {
        let w = tree.layer_energy(n)?;
        let bound = cert.bound_linear(n, norm_sqr);
        if w > bound + graph_scatter::tolerance::BOUND_SLACK * norm_sqr.max(1.0) {
            violated.push(n);
        }
        rows.push(vec![n.to_string(), format_value(w), format_value(bound)]);
    }
    let text = csv_text(&["n", "W_n", "bound_n"], rows)?;
    let failure = (!violated.is_empty()).then(|| format!("energy bound violated at layers {violated:?}"));
    Ok(Outcome { text: emit(cfg.out.as_deref(), text)?, failure })
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let dim = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimMismatch(dim, bad.len()));
    }
    Ok(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
}

/// Molecules give a regression problem; labelled graph datasets give a
/// classification problem over concatenated aggregated descriptor features.
fn fit_problem(cfg: &RunConfig) -> Result<(DMatrix<f64>, Vec<f64>, Task)> {
    let molecules = match (&cfg.dataset, cfg.fit.synthetic) {
        (Some(d), _) if d.format == DatasetFormat::Molecules => Some(read_molecules(&cfg.resolve(&d.path))?),
        (None, Some(count)) => Some(synthetic_molecules(count, cfg.seed())),
        (None, None) => return Err(Error::Config("fit needs a dataset or `fit.synthetic`".into())),
        _ => None,
    };
    if let Some(molecules) = molecules {
        let bank = cfg.preset.unwrap_or(Preset::ArchitectureII).bank();
        let feature_cfg = MoleculeFeatureConfig {
            depth: cfg.depth.unwrap_or(4),
            p: cfg.aggregation.p,
            normalize_first: cfg.aggregation.normalize_first,
            ..MoleculeFeatureConfig::default()
        };
        let rows = molecules
            .par_iter()
            .map(|m| molecule_features(&m.molecule, &feature_cfg, &bank))
            .collect::<Result<Vec<_>>>()?;
        let targets = molecules
            .iter()
            .map(|m| m.target.ok_or_else(|| Error::Config(format!("molecule {} has no target", m.id))))
            .collect::<Result<Vec<_>>>()?;
        log::info!("computed {} molecule feature vectors", rows.len());
        return Ok((to_matrix(&rows)?, targets, Task::Regression));
    }

    let spec = cfg.architecture_spec(Preset::ArchitectureII, 4)?;
    let agg = cfg.aggregation.aggregator()?;
    let records = load_graphs(cfg)?;
    let labels: BTreeMap<&str, f64> = records
        .iter()
        .map(|r| r.label.map(|l| (r.id.as_str(), l)).ok_or_else(|| Error::Config(format!("graph {} has no label", r.id))))
        .collect::<Result<_>>()?;
    let results = aggregated(cfg, &spec, agg)?;
    let rows: Vec<Vec<f64>> =
        results.iter().map(|(_, per_signal)| per_signal.iter().flat_map(|(_, f)| f.to_vector()).collect()).collect();
    let targets = results.iter().map(|(id, _)| labels[id.as_str()]).collect();
    Ok((to_matrix(&rows)?, targets, Task::Classification))
}

/// The `(γ, λ)` cell chosen in most folds; ties go to the smallest `γ`, then `λ`.
fn modal_cell(report: &CvReport) -> (f64, f64) {
    let mut cells: Vec<(f64, f64, usize)> = Vec::new();
    for f in &report.folds {
        match cells.iter_mut().find(|c| c.0 == f.gamma && c.1 == f.ridge) {
            Some(c) => c.2 += 1,
            None => cells.push((f.gamma, f.ridge, 1)),
        }
    }
    cells.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.total_cmp(&b.0)).then(a.1.total_cmp(&b.1)));
    (cells[0].0, cells[0].1)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let (x, y, task) = fit_problem(cfg)?;
    let default_grids = match task {
        Task::Regression => Grids::regression(),
        Task::Classification => Grids::classification(),
    };
    let grids = Grids {
        gammas: cfg.fit.gammas.clone().unwrap_or(default_grids.gammas),
        ridges: match &cfg.fit.c_pool {
            Some(c) => c.iter().map(|c| 1.0 / c).collect(),
            None => default_grids.ridges,
        },
    };
    let cv = CvConfig { folds: cfg.fit.folds, seed: cfg.seed(), task, grids, standardize: cfg.fit.standardize };
    let report = cross_validate(&x, &y, &cv)?;
    let mut text = format!("seed: {}\nsamples: {}\nfeatures: {}\n", report.seed, x.nrows(), x.ncols());
    text += &format!("{}: {}\n", if task == Task::Regression { "mae" } else { "accuracy" }, report.summary());
    if task == Task::Regression {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        text += &format!("target_std: {sd:.4}\nmae_over_std: {:.4}\n", report.mean / sd);
    }
    if let Some(path) = &cfg.fit.model_out {
        if task == Task::Regression {
            let (gamma, ridge) = modal_cell(&report);
            let model = fit_krr(&x, &y, gamma, ridge)?;
            std::fs::write(cfg.resolve(path), model.to_json() + "\n")?;
        } else {
            log::warn!("model dumps are written for regression only");
        }
    }
    match &cfg.out {
        Some(out) => std::fs::write(out, report.fold_csv())?,
        None => text += &report.fold_csv(),
    }
    Ok(Outcome::ok(text))
}
