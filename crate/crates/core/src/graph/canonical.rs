use nalgebra::DMatrix;

fn weight_bits(w: f64) -> u64 {
    // `+ 0.0` folds -0.0 onto 0.0.
    (w + 0.0).to_bits()
}

fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut distinct = keys.to_vec();
    distinct.sort();
    distinct.dedup();
    keys.iter().map(|k| distinct.binary_search(k).expect("key present")).collect()
}

fn class_count(colours: &[usize]) -> usize {
    colours.iter().max().map_or(0, |m| m + 1)
}

/// Colour refinement until the partition is stable. Colours stay ranked, so
/// they mean the same thing on isomorphic graphs.
fn refine(a: &DMatrix<f64>, mut colours: Vec<usize>) -> Vec<usize> {
    let n = colours.len();
    loop {
        let signatures: Vec<(usize, Vec<(usize, u64)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(usize, u64)> =
                    (0..n).filter(|&j| j != i && a[(i, j)] != 0.0).map(|j| (colours[j], weight_bits(a[(i, j)]))).collect();
                nb.sort_unstable();
                (colours[i], nb)
            })
            .collect();
        let next = rank(&signatures);
        if class_count(&next) == class_count(&colours) {
            return next;
        }
        colours = next;
    }
}

/// A vertex order that relabeled copies of a graph share, so computations on
/// `permute_adjacency(a, &order)` repeat bit for bit across isomorphic inputs.
///
/// Refinement ties are broken by individualizing the lowest-indexed vertex of
/// the smallest tied class. The order is canonical whenever tied vertices are
/// related by an automorphism, which covers every graph but rare
/// refinement-equivalent non-automorphic configurations.
pub fn canonical_order(a: &DMatrix<f64>) -> Vec<usize> {
    let n = a.nrows();
    let mut colours = refine(a, vec![0; n]);
    while class_count(&colours) < n {
        let mut counts = vec![0usize; n];
        for &c in &colours {
            counts[c] += 1;
        }
        let tied = (0..n).find(|&c| counts[c] > 1).expect("a tied class");
        let v = (0..n).find(|&i| colours[i] == tied).expect("a member");
        let keys: Vec<(usize, bool)> = (0..n).map(|i| (colours[i], i != v)).collect();
        colours = refine(a, rank(&keys));
    }
    let mut order = vec![0; n];
    for (i, &c) in colours.iter().enumerate() {
        order[c] = i;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{permute_adjacency, random_connected_adjacency, random_permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canonical(a: &DMatrix<f64>) -> DMatrix<f64> {
        permute_adjacency(a, &canonical_order(a))
    }

    #[test]
    fn relabeled_graphs_share_a_canonical_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(1..=25);
            let mut a = random_connected_adjacency(n, 0.2, &mut rng);
            // Some weighted edges, kept symmetric.
            for i in 0..n {
                for j in 0..i {
                    if a[(i, j)] != 0.0 && rng.random_bool(0.3) {
                        a[(i, j)] = 2.0;
                        a[(j, i)] = 2.0;
                    }
                }
            }
            let c = canonical(&a);
            for _ in 0..5 {
                let perm = random_permutation(n, &mut rng);
                assert_eq!(canonical(&permute_adjacency(&a, &perm)), c);
            }
        }
    }

    #[test]
    fn symmetric_graphs_and_order_is_a_permutation() {
        let n = 8;
        let cycle = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j || (j + 1) % n == i { 1.0 } else { 0.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let perm = random_permutation(n, &mut rng);
        assert_eq!(canonical(&permute_adjacency(&cycle, &perm)), canonical(&cycle));

        let mut order = canonical_order(&cycle);
        order.sort_unstable();
        assert_eq!(order, (0..n).collect::<Vec<_>>());
        assert!(canonical_order(&DMatrix::zeros(0, 0)).is_empty());
    }
}
