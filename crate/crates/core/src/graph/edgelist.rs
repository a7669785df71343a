use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::GraphSignalSpace;
use crate::error::{Error, Result};

/// An undirected weighted graph read from text.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub size: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub vertex_weights: Option<Vec<f64>>,
}

impl EdgeList {
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.size, self.size);
        for &(i, j, w) in &self.edges {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        a
    }

    pub fn space(&self) -> Result<Arc<GraphSignalSpace>> {
        GraphSignalSpace::new(self.size, self.vertex_weights.clone())
    }
}

/// Parses `i j [w]` lines with 0-based ids. `#` starts a comment line, and an
/// optional `weights: w0 w1 ...` line sets vertex weights (and the vertex count).
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut vertex_weights: Option<Vec<f64>> = None;
    let mut max_id = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("weights:") {
            let w = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(line_no, format!("bad vertex weight `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            vertex_weights = Some(w);
            continue;
        }
        let (i, j, w) = parse_edge_line(line, line_no)?;
        if i == j {
            return Err(parse_err(line_no, format!("self loop at vertex {i}")));
        }
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::DuplicateEdge(i, j));
        }
        max_id = Some(max_id.unwrap_or(0).max(i).max(j));
        edges.push((i, j, w));
    }
    let size = match (&vertex_weights, max_id) {
        (Some(w), Some(m)) if m >= w.len() => {
            return Err(Error::SizeMismatch { expected: w.len(), found: m + 1 });
        }
        (Some(w), _) => w.len(),
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    Ok(EdgeList { size, edges, vertex_weights })
}

pub(crate) fn parse_edge_line(line: &str, line_no: usize) -> Result<(usize, usize, f64)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 2 || tokens.len() > 3 {
        return Err(parse_err(line_no, format!("expected `i j [w]`, got `{line}`")));
    }
    let id = |t: &str| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad vertex id `{t}`")));
    let i = id(tokens[0])?;
    let j = id(tokens[1])?;
    let w = match tokens.get(2) {
        Some(t) => t.parse::<f64>().map_err(|_| parse_err(line_no, format!("bad weight `{t}`")))?,
        None => 1.0,
    };
    if !w.is_finite() || w < 0.0 {
        return Err(parse_err(line_no, format!("weight must be finite and non-negative, got {w}")));
    }
    Ok((i, j, w))
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Parses a dense real matrix: one row per line, entries separated by commas
/// or whitespace, `#` comment lines ignored.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(k + 1, format!("bad matrix entry `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(k + 1, format!("expected {} entries, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_weights_and_comments() {
        let g = parse_edge_list("# triangle\nweights: 1 1 2\n0 1 1.5\n1 2\n\n0 2 1\n").unwrap();
        assert_eq!(g.size, 3);
        assert_eq!(g.vertex_weights, Some(vec![1.0, 1.0, 2.0]));
        let a = g.adjacency();
        assert_eq!(a[(1, 0)], 1.5);
        assert_eq!(a[(2, 1)], 1.0);
        assert_eq!(g.space().unwrap().total_weight(), 4.0);
    }

    #[test]
    fn duplicate_edges_are_rejected_in_either_orientation() {
        assert_eq!(parse_edge_list("0 1 1\n1 0 1\n").unwrap_err(), Error::DuplicateEdge(1, 0));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        match parse_edge_list("0 1 1\n1 2 abc\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse_edge_list("weights: 1 1\n0 2 1\n"), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn dense_matrix_text() {
        let m = parse_matrix("# 2x3\n1, 2, 3\n4 5 6\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1., 2., 3., 4., 5., 6.]));
        assert!(matches!(parse_matrix("1 2\n3\n"), Err(Error::Parse { line: 2, .. })));
    }
}
