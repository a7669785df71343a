//! Library results checked against values computed here by other means.

use std::f64::consts::{FRAC_PI_2, PI};

use graph_scatter::graph::{rescaled_laplacian, GraphSignalSpace, Signal};
use graph_scatter::perturbation::operator_stability_constant;
use graph_scatter::random::{random_connected_adjacency, random_signal};
use graph_scatter::scattering::{scatter, signal_stability_constant, Nonlinearity, ScatteringArchitecture};
use graph_scatter::spectral::{FilterKernel, Preset};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn apply_fn(x: &DMatrix<f64>, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = x.clone().symmetric_eigen();
    &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(g)) * eig.eigenvectors.transpose()
}

fn plain_laplacian(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = DVector::from_iterator(a.nrows(), a.row_iter().map(|r| r.sum()));
    let l = DMatrix::from_diagonal(&d) - a;
    let top = l.clone().symmetric_eigen().eigenvalues.max();
    l / top
}

#[test]
fn published_constants() {
    assert!((operator_stability_constant(4, 3.0, PI * 10f64.sqrt() / 2.0) - 45.0 * PI).abs() < 1e-9);
    // Architecture II frame sum: sin² + cos² twice plus the identity output.
    let bank = Preset::ArchitectureII.bank();
    for k in 0..=20 {
        let x = k as f64 / 20.0;
        assert!((bank.frame_sum(Complex64::new(x, 0.0)) - (2.0 + x * x)).abs() < 1e-12);
    }
}

#[test]
fn stability_constant_on_full_spectrum() {
    // A path on 40 vertices has eigenvalues close to both ends of [0, 1].
    let n = 40;
    let a = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    let op = rescaled_laplacian(&a, &GraphSignalSpace::unit(n)).unwrap();
    let ii = ScatteringArchitecture::uniform(&op, Preset::ArchitectureII.bank(), Nonlinearity::Absolute, 4).unwrap();
    assert!((signal_stability_constant(&ii) - 9.0).abs() < 1e-9);
    let i = ScatteringArchitecture::uniform(&op, Preset::ArchitectureI.bank(), Nonlinearity::Absolute, 4).unwrap();
    assert!((signal_stability_constant(&i) - 1.0).abs() < 1e-9);
}

#[test]
fn node_scattering_matches_direct_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gs: [fn(f64) -> f64; 4] = [|x| (FRAC_PI_2 * x).sin(), |x| (FRAC_PI_2 * x).cos(), |x| (PI * x).sin(), |x| (PI * x).cos()];
    for _ in 0..10 {
        let a = random_connected_adjacency(9, 0.35, &mut rng);
        let space = GraphSignalSpace::unit(9);
        let op = rescaled_laplacian(&a, &space).unwrap();
        let l = plain_laplacian(&a);
        let filters: Vec<DMatrix<f64>> = gs.iter().map(|g| apply_fn(&l, g)).collect();
        let arch = ScatteringArchitecture::uniform(&op, Preset::ArchitectureII.bank(), Nonlinearity::Absolute, 3).unwrap();
        let f = random_signal(&space, true, &mut rng);
        let fr = f.values().map(|c| c.re);
        let tree = scatter(&arch, &f).unwrap();
        for (layer, path, out) in tree.iter_outputs() {
            assert_eq!(path.len(), layer - 1);
            let mut h = fr.clone();
            for &g in &path.0 {
                h = &filters[g] * h.abs();
            }
            let expect = &l * h.abs();
            for (got, want) in out.values().iter().zip(expect.iter()) {
                assert!((got - Complex64::new(*want, 0.0)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn polynomial_kernel_matches_matrix_powers() {
    let a = DMatrix::from_row_slice(4, 4, &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let space = GraphSignalSpace::unit(4);
    let op = rescaled_laplacian(&a, &space).unwrap();
    let bank = Preset::ArchitectureII.bank();
    let k = FilterKernel::polynomial(vec![1.0, -2.0, 0.5]);
    let got = bank.kernel_matrix(&k, &op).unwrap().map(|c| c.re);
    let l = plain_laplacian(&a);
    let want = DMatrix::identity(4, 4) - &l * 2.0 + &l * &l * 0.5;
    assert!((got - want).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn features_are_lipschitz_and_energy_preserving(seed in 0u64..1000, n in 3usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_connected_adjacency(n, 0.4, &mut rng);
        let space = GraphSignalSpace::unit(n);
        let op = rescaled_laplacian(&a, &space).unwrap();
        let arch = ScatteringArchitecture::uniform(&op, Preset::ArchitectureI.bank(), Nonlinearity::Absolute, 4).unwrap();
        let f = random_signal(&space, false, &mut rng);
        let h = random_signal(&space, false, &mut rng);
        let (tf, th) = (scatter(&arch, &f).unwrap(), scatter(&arch, &h).unwrap());
        prop_assert!(tf.feature_distance(&th).unwrap() <= f.distance(&h).unwrap() + 1e-9);
        // A tight frame with constant 1/2 never adds energy.
        prop_assert!(tf.feature_norm_sqr() <= f.norm_sqr() + 1e-9);
    }

    #[test]
    fn scattering_is_homogeneous(seed in 0u64..1000, scale in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_connected_adjacency(8, 0.4, &mut rng);
        let space = GraphSignalSpace::unit(8);
        let op = rescaled_laplacian(&a, &space).unwrap();
        let arch = ScatteringArchitecture::uniform(&op, Preset::ArchitectureII.bank(), Nonlinearity::Absolute, 3).unwrap();
        let f = random_signal(&space, true, &mut rng);
        let g: Signal = f.scale(Complex64::new(scale, 0.0));
        let (tf, tg) = (scatter(&arch, &f).unwrap(), scatter(&arch, &g).unwrap());
        prop_assert!((tg.feature_norm() - scale * tf.feature_norm()).abs() <= 1e-9 * tg.feature_norm().max(1.0));
    }
}
