//! Graph and molecule datasets on disk.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edgelist::parse_edge_line, parse_matrix, validate_adjacency, GraphSignalSpace};
use crate::higher_order::Molecule;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRecord {
    pub id: String,
    pub label: Option<f64>,
    pub adjacency: DMatrix<f64>,
}

impl GraphRecord {
    pub fn size(&self) -> usize {
        self.adjacency.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeRecord {
    pub id: String,
    pub target: Option<f64>,
    pub molecule: Molecule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// One file; `graph <id> [label]` headers followed by `i j [w]` lines.
    EdgeListMulti,
    /// A directory of dense adjacency CSV files, plus optional `labels.csv`.
    AdjacencyCsv,
    /// One file; `molecule <id> [target]` headers followed by `Z x y z` lines.
    Molecules,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge_list_multi" => Ok(DatasetFormat::EdgeListMulti),
            "adjacency_csv" => Ok(DatasetFormat::AdjacencyCsv),
            "molecules" => Ok(DatasetFormat::Molecules),
            _ => Err(Error::Config(format!("unknown dataset format `{s}`"))),
        }
    }
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn parse_header<'a>(rest: &'a str, line_no: usize, ids: &mut HashSet<String>) -> Result<(String, Option<f64>)> {
    let tokens: Vec<&'a str> = rest.split_whitespace().collect();
    let id = match tokens.first() {
        Some(id) => id.to_string(),
        None => return Err(parse_err(line_no, "record header needs an id".into())),
    };
    if tokens.len() > 2 {
        return Err(parse_err(line_no, format!("unexpected tokens after label in `{rest}`")));
    }
    let label = tokens
        .get(1)
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line_no, format!("bad label `{t}`"))))
        .transpose()?;
    if !ids.insert(id.clone()) {
        return Err(parse_err(line_no, format!("duplicate record id `{id}`")));
    }
    Ok((id, label))
}

struct PendingGraph {
    id: String,
    label: Option<f64>,
    nodes: Option<usize>,
    edges: Vec<(usize, usize, f64)>,
    seen: HashSet<(usize, usize)>,
}

impl PendingGraph {
    fn finish(self) -> Result<GraphRecord> {
        let max_id = self.edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
        let n = match self.nodes {
            Some(n) if n < max_id => return Err(Error::SizeMismatch { expected: n, found: max_id }),
            Some(n) => n,
            None => max_id,
        };
        let mut adjacency = DMatrix::zeros(n, n);
        for (i, j, w) in self.edges {
            adjacency[(i, j)] = w;
            adjacency[(j, i)] = w;
        }
        Ok(GraphRecord { id: self.id, label: self.label, adjacency })
    }
}

/// Parses the multi-graph edge-list format. Records keep file order. A
/// `nodes <n>` line inside a record fixes its vertex count, so isolated
/// vertices can be represented.
pub fn parse_graph_dataset(text: &str) -> Result<Vec<GraphRecord>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    let mut current: Option<PendingGraph> = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("graph ") {
            if let Some(done) = current.take() {
                records.push(done.finish()?);
            }
            let (id, label) = parse_header(rest, line_no, &mut ids)?;
            current = Some(PendingGraph { id, label, nodes: None, edges: Vec::new(), seen: HashSet::new() });
            continue;
        }
        let graph = current.as_mut().ok_or_else(|| parse_err(line_no, "edge before the first `graph` header".into()))?;
        if let Some(rest) = line.strip_prefix("nodes ") {
            let n = rest.trim().parse::<usize>().map_err(|_| parse_err(line_no, format!("bad node count `{rest}`")))?;
            graph.nodes = Some(n);
            continue;
        }
        let (i, j, w) = parse_edge_line(line, line_no)?;
        if i == j {
            return Err(parse_err(line_no, format!("self loop at vertex {i}")));
        }
        if !graph.seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateEdge(i, j));
        }
        graph.edges.push((i, j, w));
    }
    if let Some(done) = current {
        records.push(done.finish()?);
    }
    Ok(records)
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::DatasetNotFound(path.display().to_string()));
    }
    Ok(std::fs::read_to_string(path)?)
}

/// Reads every `*.csv` file except `labels.csv` in `dir`, sorted by file name.
/// The record id is the file stem; `labels.csv` (`id,label`) supplies labels.
pub fn read_adjacency_csv_dir(dir: &Path) -> Result<Vec<GraphRecord>> {
    if !dir.is_dir() {
        return Err(Error::DatasetNotFound(dir.display().to_string()));
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .collect::<std::result::Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv") && p.file_name().is_some_and(|n| n != "labels.csv"))
        .collect();
    files.sort();

    let labels_path = dir.join("labels.csv");
    let mut labels = std::collections::HashMap::new();
    if labels_path.exists() {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            label: f64,
        }
        for row in csv::Reader::from_path(&labels_path)?.deserialize::<Row>() {
            let row = row?;
            labels.insert(row.id, row.label);
        }
    }

    files
        .into_iter()
        .map(|path| {
            let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let adjacency = parse_matrix(&std::fs::read_to_string(&path)?)?;
            validate_adjacency(&adjacency, &GraphSignalSpace::unit(adjacency.nrows()))?;
            Ok(GraphRecord { label: labels.get(&id).copied(), id, adjacency })
        })
        .collect()
}

pub fn read_graph_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<GraphRecord>> {
    let records = match format {
        DatasetFormat::EdgeListMulti => parse_graph_dataset(&read_text(path)?)?,
        DatasetFormat::AdjacencyCsv => read_adjacency_csv_dir(path)?,
        DatasetFormat::Molecules => {
            return Err(Error::Config("molecule files are read with read_molecules".into()));
        }
    };
    for r in &records {
        validate_adjacency(&r.adjacency, &GraphSignalSpace::unit(r.size()))?;
    }
    Ok(records)
}

/// Parses `molecule <id> [target]` records with one `Z x y z` line per atom.
pub fn parse_molecules(text: &str) -> Result<Vec<MoleculeRecord>> {
    let mut records: Vec<MoleculeRecord> = Vec::new();
    let mut ids = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("molecule ") {
            let (id, target) = parse_header(rest, line_no, &mut ids)?;
            records.push(MoleculeRecord { id, target, molecule: Molecule { charges: Vec::new(), positions: Vec::new() } });
            continue;
        }
        let record = records.last_mut().ok_or_else(|| parse_err(line_no, "atom before the first `molecule` header".into()))?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(line_no, format!("bad number `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 4 {
            return Err(parse_err(line_no, format!("expected `Z x y z`, got `{line}`")));
        }
        record.molecule.charges.push(values[0]);
        record.molecule.positions.push([values[1], values[2], values[3]]);
    }
    Ok(records)
}

pub fn read_molecules(path: &Path) -> Result<Vec<MoleculeRecord>> {
    parse_molecules(&read_text(path)?)
}

pub fn format_molecules(records: &[MoleculeRecord]) -> String {
    let mut out = String::new();
    for r in records {
        match r.target {
            Some(t) => writeln!(out, "molecule {} {t:?}", r.id),
            None => writeln!(out, "molecule {}", r.id),
        }
        .expect("writing to a String");
        for (z, p) in r.molecule.charges.iter().zip(&r.molecule.positions) {
            writeln!(out, "{z:?} {:?} {:?} {:?}", p[0], p[1], p[2]).expect("writing to a String");
        }
    }
    out
}

/// A smooth reference energy: `-Σ Z_i^{3/2} - Σ_{i<j} sqrt(Z_i Z_j) exp(-r_ij)`.
pub fn synthetic_energy(m: &Molecule) -> f64 {
    let mut e: f64 = m.charges.iter().map(|z| -z.powf(1.5)).sum();
    for i in 0..m.atom_count() {
        for j in 0..i {
            let (a, b) = (m.positions[i], m.positions[j]);
            let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            e -= (m.charges[i] * m.charges[j]).sqrt() * (-r).exp();
        }
    }
    e
}

/// Random small molecules built by attaching each atom to an earlier one at a
/// bond length in `[1.0, 1.6]`, rejecting placements closer than `0.9` to any
/// atom. Targets come from [`synthetic_energy`].
pub fn synthetic_molecules(count: usize, seed: u64) -> Vec<MoleculeRecord> {
    const CHARGES: [f64; 5] = [1.0, 1.0, 6.0, 7.0, 8.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(3..=8);
            let mut charges = Vec::with_capacity(n);
            let mut positions: Vec<[f64; 3]> = Vec::with_capacity(n);
            while positions.len() < n {
                let p = match positions.len() {
                    0 => [0.0; 3],
                    len => {
                        let anchor = positions[rng.random_range(0..len)];
                        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
                        let r = rng.random_range(1.0..1.6);
                        [anchor[0] + r * dir[0], anchor[1] + r * dir[1], anchor[2] + r * dir[2]]
                    }
                };
                let clear = positions
                    .iter()
                    .all(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt() >= 0.9);
                if clear {
                    positions.push(p);
                    charges.push(CHARGES[rng.random_range(0..CHARGES.len())]);
                }
            }
            let molecule = Molecule { charges, positions };
            MoleculeRecord { id: format!("m{k:04}"), target: Some(synthetic_energy(&molecule)), molecule }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higher_order::coulomb_matrix;

    #[test]
    fn multi_graph_file() {
        assert!(parse_graph_dataset("").unwrap().is_empty());
        let text = "# two graphs\ngraph a 1\n0 1\n1 2\ngraph b -0.5\nnodes 4\n0 1 2.5\n";
        let records = parse_graph_dataset(text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!((records[0].id.as_str(), records[0].label, records[0].size()), ("a", Some(1.0), 3));
        assert_eq!((records[1].id.as_str(), records[1].label, records[1].size()), ("b", Some(-0.5), 4));
        assert_eq!(records[1].adjacency[(1, 0)], 2.5);
    }

    #[test]
    fn multi_graph_errors() {
        assert!(matches!(parse_graph_dataset("graph a\n0 1 x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph_dataset("0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(parse_graph_dataset("graph a\n0 1\n1 0\n").unwrap_err(), Error::DuplicateEdge(1, 0));
        assert!(matches!(parse_graph_dataset("graph a\ngraph a\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph_dataset("graph a\nnodes 2\n0 3\n"), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn adjacency_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("g2.csv"), "0,1\n1,0\n").unwrap();
        std::fs::write(dir.path().join("g1.csv"), "0,1,1\n1,0,1\n1,1,0\n").unwrap();
        std::fs::write(dir.path().join("labels.csv"), "id,label\ng1,3\n").unwrap();
        let records = read_graph_dataset(dir.path(), DatasetFormat::AdjacencyCsv).unwrap();
        assert_eq!(records.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["g1", "g2"]);
        assert_eq!(records[0].label, Some(3.0));
        assert_eq!(records[1].label, None);
        std::fs::write(dir.path().join("g3.csv"), "0,1\n2,0\n").unwrap();
        assert!(matches!(read_adjacency_csv_dir(dir.path()), Err(Error::AsymmetricAdjacency(..))));
    }

    #[test]
    fn missing_paths() {
        let missing = Path::new("/nonexistent/dataset.txt");
        assert!(matches!(read_graph_dataset(missing, DatasetFormat::EdgeListMulti), Err(Error::DatasetNotFound(_))));
        assert!(matches!(read_graph_dataset(missing, DatasetFormat::AdjacencyCsv), Err(Error::DatasetNotFound(_))));
    }

    #[test]
    fn molecules_round_trip() {
        let records = synthetic_molecules(5, 7);
        let parsed = parse_molecules(&format_molecules(&records)).unwrap();
        assert_eq!(parsed, records);
        assert!(matches!(parse_molecules("molecule a\n1 0 0\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn synthetic_molecules_are_valid_and_seeded() {
        let a = synthetic_molecules(30, 1);
        assert_eq!(a, synthetic_molecules(30, 1));
        assert_ne!(a, synthetic_molecules(30, 2));
        for r in &a {
            assert!((3..=8).contains(&r.molecule.atom_count()));
            assert!(coulomb_matrix(&r.molecule).is_ok());
        }
        let h2 = Molecule { charges: vec![1.0, 1.0], positions: vec![[0.0; 3], [1.0, 0.0, 0.0]] };
        assert!((synthetic_energy(&h2) - (-2.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
