//! Structural node descriptors used as input signals.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSignalSpace, Signal};

/// Largest graph for which maximal cliques are enumerated.
pub const CLIQUE_CAP: usize = 60;

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-10;
const PAGERANK_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    Degree,
    Eccentricity,
    Clustering,
    Triangles,
    CoreNumber,
    Cliques,
    Pagerank,
}

impl Descriptor {
    pub const ALL: [Descriptor; 7] = [
        Descriptor::Degree,
        Descriptor::Eccentricity,
        Descriptor::Clustering,
        Descriptor::Triangles,
        Descriptor::CoreNumber,
        Descriptor::Cliques,
        Descriptor::Pagerank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Degree => "degree",
            Descriptor::Eccentricity => "eccentricity",
            Descriptor::Clustering => "clustering",
            Descriptor::Triangles => "triangles",
            Descriptor::CoreNumber => "core_number",
            Descriptor::Cliques => "cliques",
            Descriptor::Pagerank => "pagerank",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Descriptor::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDescriptor(s.to_string()))
    }
}

/// Descriptor signals in request order.
#[derive(Debug, Clone)]
pub struct DescriptorSet {
    pub entries: Vec<(Descriptor, Signal)>,
}

impl DescriptorSet {
    pub fn get(&self, d: Descriptor) -> Option<&Signal> {
        self.entries.iter().find(|(k, _)| *k == d).map(|(_, s)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn neighbours(adjacency: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = adjacency.nrows();
    (0..n).map(|i| (0..n).filter(|&j| j != i && adjacency[(i, j)] > 0.0).collect()).collect()
}

pub fn degree(adjacency: &DMatrix<f64>) -> Vec<f64> {
    neighbours(adjacency).iter().map(|nb| nb.len() as f64).collect()
}

fn bfs_distances(nb: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; nb.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &u in &nb[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

pub fn is_connected(adjacency: &DMatrix<f64>) -> bool {
    let n = adjacency.nrows();
    n == 0 || bfs_distances(&neighbours(adjacency), 0).iter().all(Option::is_some)
}

/// Largest hop distance to any other vertex.
pub fn eccentricity(adjacency: &DMatrix<f64>) -> Result<Vec<f64>> {
    let nb = neighbours(adjacency);
    (0..nb.len())
        .map(|v| {
            let dist = bfs_distances(&nb, v);
            dist.iter()
                .try_fold(0usize, |m, d| d.map(|d| m.max(d)))
                .map(|m| m as f64)
                .ok_or(Error::DisconnectedForEccentricity)
        })
        .collect()
}

/// Number of triangles through each vertex.
pub fn triangles(adjacency: &DMatrix<f64>) -> Vec<f64> {
    let nb = neighbours(adjacency);
    let n = nb.len();
    let linked = |i: usize, j: usize| adjacency[(i, j)] > 0.0;
    (0..n)
        .map(|v| {
            let mut t = 0usize;
            for (a, &i) in nb[v].iter().enumerate() {
                for &j in &nb[v][a + 1..] {
                    if linked(i, j) {
                        t += 1;
                    }
                }
            }
            t as f64
        })
        .collect()
}

/// `c(u) = 2T(u) / (deg(u)(deg(u) − 1))`, zero when `deg(u) ≤ 1`.
pub fn clustering(adjacency: &DMatrix<f64>) -> Vec<f64> {
    degree(adjacency)
        .into_iter()
        .zip(triangles(adjacency))
        .map(|(d, t)| if d <= 1.0 { 0.0 } else { 2.0 * t / (d * (d - 1.0)) })
        .collect()
}

/// Core number by repeatedly removing a vertex of smallest remaining degree.
pub fn core_number(adjacency: &DMatrix<f64>) -> Vec<f64> {
    let nb = neighbours(adjacency);
    let n = nb.len();
    let mut deg: Vec<usize> = nb.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut core = vec![0usize; n];
    let mut k = 0;
    for _ in 0..n {
        let v = (0..n).filter(|&v| !removed[v]).min_by_key(|&v| (deg[v], v)).expect("vertex remains");
        k = k.max(deg[v]);
        core[v] = k;
        removed[v] = true;
        for &u in &nb[v] {
            if !removed[u] {
                deg[u] -= 1;
            }
        }
    }
    core.into_iter().map(|c| c as f64).collect()
}

/// Number of maximal cliques containing each vertex (Bron–Kerbosch with pivoting).
pub fn clique_participation(adjacency: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = adjacency.nrows();
    if n > CLIQUE_CAP {
        return Err(Error::CliqueCapExceeded { cap: CLIQUE_CAP, size: n });
    }
    let masks: Vec<u64> = neighbours(adjacency).iter().map(|nb| nb.iter().fold(0u64, |m, &j| m | (1 << j))).collect();
    let mut counts = vec![0usize; n];
    bron_kerbosch(0, (1u64 << n) - 1, 0, &masks, &mut counts);
    Ok(counts.into_iter().map(|c| c as f64).collect())
}

fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, masks: &[u64], counts: &mut [usize]) {
    if p == 0 {
        if x == 0 && r != 0 {
            let mut bits = r;
            while bits != 0 {
                counts[bits.trailing_zeros() as usize] += 1;
                bits &= bits - 1;
            }
        }
        return;
    }
    let union = p | x;
    let pivot = (0..masks.len()).filter(|&u| union >> u & 1 == 1).max_by_key(|&u| (p & masks[u]).count_ones()).unwrap_or(0);
    let mut candidates = p & !masks[pivot];
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        let bit = 1u64 << v;
        bron_kerbosch(r | bit, p & masks[v], x & masks[v], masks, counts);
        p &= !bit;
        x |= bit;
        candidates &= !bit;
    }
}

/// PageRank by power iteration; dangling vertices spread their mass evenly.
pub fn pagerank(adjacency: &DMatrix<f64>) -> Vec<f64> {
    let nb = neighbours(adjacency);
    let n = nb.len();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    for _ in 0..PAGERANK_MAX_ITERATIONS {
        let dangling: f64 = (0..n).filter(|&v| nb[v].is_empty()).map(|v| rank[v]).sum();
        let base = (1.0 - PAGERANK_DAMPING) * uniform + PAGERANK_DAMPING * dangling * uniform;
        let mut next = vec![base; n];
        for v in 0..n {
            if !nb[v].is_empty() {
                let share = PAGERANK_DAMPING * rank[v] / nb[v].len() as f64;
                for &u in &nb[v] {
                    next[u] += share;
                }
            }
        }
        let change: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if change < PAGERANK_TOLERANCE {
            break;
        }
    }
    rank
}

pub fn descriptor_values(adjacency: &DMatrix<f64>, d: Descriptor) -> Result<Vec<f64>> {
    Ok(match d {
        Descriptor::Degree => degree(adjacency),
        Descriptor::Eccentricity => eccentricity(adjacency)?,
        Descriptor::Clustering => clustering(adjacency),
        Descriptor::Triangles => triangles(adjacency),
        Descriptor::CoreNumber => core_number(adjacency),
        Descriptor::Cliques => clique_participation(adjacency)?,
        Descriptor::Pagerank => pagerank(adjacency),
    })
}

/// Computes the requested descriptors on the graph with edges where
/// `adjacency > 0`.
pub fn node_descriptors(
    adjacency: &DMatrix<f64>,
    space: &Arc<GraphSignalSpace>,
    requested: &[Descriptor],
) -> Result<DescriptorSet> {
    if adjacency.nrows() != space.size() || adjacency.ncols() != space.size() {
        return Err(Error::SizeMismatch { expected: space.size(), found: adjacency.nrows() });
    }
    let entries = requested
        .iter()
        .map(|&d| Ok((d, Signal::from_real(space, &descriptor_values(adjacency, d)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DescriptorSet { entries })
}

/// `requested` without eccentricity when the graph is disconnected.
pub fn applicable_descriptors(adjacency: &DMatrix<f64>, requested: &[Descriptor]) -> Vec<Descriptor> {
    if requested.contains(&Descriptor::Eccentricity) && !is_connected(adjacency) {
        log::warn!("graph is disconnected; dropping eccentricity");
        return requested.iter().copied().filter(|&d| d != Descriptor::Eccentricity).collect();
    }
    requested.to_vec()
}
