use graph_scatter::aggregation::{aggregate_tree, format_value, Aggregator};
use graph_scatter::dataset::{format_molecules, parse_graph_dataset, parse_molecules, synthetic_molecules};
use graph_scatter::descriptors::{node_descriptors, Descriptor};
use graph_scatter::graph::{canonical_order, rescaled_laplacian, GraphSignalSpace};
use graph_scatter::higher_order::{molecule_features, MoleculeFeatureConfig};
use graph_scatter::kernel_ml::{cross_validate, fit_krr, CvConfig, Grids, KernelModel};
use graph_scatter::random::permute_adjacency;
use graph_scatter::scattering::{scatter, Nonlinearity, ScatteringArchitecture};
use graph_scatter::spectral::Preset;
use nalgebra::DMatrix;

fn cycle(n: usize) -> String {
    (0..n).map(|i| format!("{} {}\n", i, (i + 1) % n)).collect()
}

fn star(n: usize) -> String {
    (1..n).map(|i| format!("0 {i}\n")).collect()
}

fn graph_features(a: &DMatrix<f64>) -> Vec<f64> {
    let a = permute_adjacency(a, &canonical_order(a));
    let space = GraphSignalSpace::unit(a.nrows());
    let op = rescaled_laplacian(&a, &space).unwrap();
    let arch = ScatteringArchitecture::uniform(&op, Preset::ArchitectureI.bank(), Nonlinearity::Absolute, 3).unwrap();
    let signals = node_descriptors(&a, &space, &[Descriptor::Degree, Descriptor::Clustering]).unwrap();
    let mut out = Vec::new();
    for (_, s) in &signals.entries {
        let tree = scatter(&arch, s).unwrap();
        let feats = aggregate_tree(&arch, &tree, &[Aggregator::PNorm { p: 3, normalize_first: true }]).unwrap();
        out.extend(feats.to_vector());
    }
    out
}

#[test]
fn dataset_to_classifier() {
    let mut text = String::new();
    for k in 0..12 {
        let n = 5 + k;
        text += &format!("graph c{k} 0\n{}", cycle(n));
        text += &format!("graph s{k} 1\n{}", star(n));
    }
    let records = parse_graph_dataset(&text).unwrap();
    assert_eq!(records.len(), 24);
    let rows: Vec<Vec<f64>> = records.iter().map(|r| graph_features(&r.adjacency)).collect();
    assert!(rows.iter().all(|r| r.len() == rows[0].len()));
    let x = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let y: Vec<f64> = records.iter().map(|r| r.label.unwrap()).collect();
    let mut cfg = CvConfig::classification(1);
    cfg.folds = 4;
    let report = cross_validate(&x, &y, &cfg).unwrap();
    assert_eq!(report.mean, 1.0, "{}", report.summary());
}

#[test]
fn relabeled_dataset_records_give_identical_text() {
    let text = "graph a\n0 1\n1 2\n2 3\n3 0\n0 2\n3 4\ngraph b\n4 2\n2 1\n1 0\n0 4\n4 1\n0 3\n";
    let records = parse_graph_dataset(text).unwrap();
    let render = |a: &DMatrix<f64>| graph_features(a).into_iter().map(format_value).collect::<Vec<_>>();
    assert_eq!(render(&records[0].adjacency), render(&records[1].adjacency));
}

#[test]
fn molecules_round_trip_and_fit() {
    let mols = synthetic_molecules(24, 3);
    let reparsed = parse_molecules(&format_molecules(&mols)).unwrap();
    assert_eq!(reparsed.len(), mols.len());
    let cfg = MoleculeFeatureConfig::default();
    let bank = Preset::ArchitectureII.bank();
    let rows: Vec<Vec<f64>> = reparsed.iter().map(|m| molecule_features(&m.molecule, &cfg, &bank).unwrap()).collect();
    let x = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let y: Vec<f64> = reparsed.iter().map(|m| m.target.unwrap()).collect();

    let model = fit_krr(&x, &y, Grids::regression().gammas[2], 1e-3).unwrap();
    let reloaded: KernelModel = serde_json::from_str(&model.to_json()).unwrap();
    assert_eq!(reloaded.predict(&x).unwrap(), model.predict(&x).unwrap());
}
