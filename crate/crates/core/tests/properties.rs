mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::*;
use rdx_gauss::cli::{DistortionFile, ModelFile};
use rdx_gauss::model::{derive_stats, random_instance, JointModel};
use rdx_gauss::rdf::{self, distortion_on_path};
use rdx_gauss::simdiag::{self, eigen_order_dominates, loewner_leq, Pairing};
use rdx_gauss::special;
use rdx_gauss::{linalg, SpdMatrix, SymMatrix};

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4).prop_flat_map(|nx| (Just(nx), nx..=5usize, 1usize..=4))
}

/// Model of `(T x, M y, R z)` given the model of `(x, y, z)`.
fn transform(m: &JointModel, t: &DMatrix<f64>, my: &DMatrix<f64>, r: &DMatrix<f64>) -> JointModel {
    JointModel::new(
        t * m.sigma_x().matrix() * t.transpose(),
        my * m.sigma_y().matrix() * my.transpose(),
        r * m.sigma_z().matrix() * r.transpose(),
        t * m.sigma_xy() * my.transpose(),
        t * m.sigma_xz() * r.transpose(),
        my * m.sigma_yz() * r.transpose(),
    )
    .unwrap()
}

fn well_conditioned(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let q = orthogonal(rng, n);
    let s: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.5).collect();
    &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditional_covariances_are_ordered((nx, ny, nz) in dims(), seed in any::<u64>()) {
        let s = derive_stats(&random_instance(nx, ny, nz, seed)).unwrap();
        prop_assert!(loewner_leq(&s.sigma_x_given_yz.as_sym(), &s.sigma_x_given_z.as_sym(), 1e-12).unwrap());
        prop_assert!(s.regression_identity_residual() <= 1e-9);
    }

    #[test]
    fn rates_invariant_under_invertible_maps((nx, ny, nz) in dims(), seed in any::<u64>(), t in 0.05f64..1.8) {
        let m = random_instance(nx, ny, nz, seed);
        let s = derive_stats(&m).unwrap();
        let d = distortion_on_path(&s, t).unwrap();
        let b = rdf::rate_bounds(&s, &d).unwrap();

        let mut g = rng(seed ^ 0x5eed);
        let tx = well_conditioned(&mut g, nx);
        let my = well_conditioned(&mut g, ny);
        let rz = well_conditioned(&mut g, nz);
        let m2 = transform(&m, &tx, &my, &rz);
        let s2 = derive_stats(&m2).unwrap();
        let d2 = SpdMatrix::new(&tx * d.matrix() * tx.transpose(), "D").unwrap();
        let b2 = rdf::rate_bounds(&s2, &d2).unwrap();
        prop_assert!((b.upper - b2.upper).abs() <= 1e-8, "{} vs {}", b.upper, b2.upper);
        if t <= 1.0 {
            let e2 = rdf::exact_rdf(&s2, &d2).unwrap();
            prop_assert!((e2 - b.upper).abs() <= 1e-8);
        }
    }

    #[test]
    fn side_information_rotation_changes_nothing((nx, ny, nz) in dims(), seed in any::<u64>()) {
        let m = random_instance(nx, ny, nz, seed);
        let s = derive_stats(&m).unwrap();
        let r = orthogonal(&mut rng(seed.wrapping_add(1)), nz);
        let s2 = derive_stats(&transform(&m, &DMatrix::identity(nx, nx), &DMatrix::identity(ny, ny), &r)).unwrap();
        prop_assert!(linalg::rel_diff(s2.sigma_x_given_z.matrix(), s.sigma_x_given_z.matrix()) <= 1e-9);
        prop_assert!(linalg::rel_diff(s2.sigma_x_given_yz.matrix(), s.sigma_x_given_yz.matrix()) <= 1e-9);
    }

    #[test]
    fn lower_never_exceeds_upper((nx, ny, nz) in dims(), seed in any::<u64>(), scale in 0.1f64..3.0) {
        let s = derive_stats(&random_instance(nx, ny, nz, seed)).unwrap();
        let a = gaussian(&mut rng(seed ^ 7), nx, nx);
        let d = s.sigma_x_given_yz.matrix() + (&a * a.transpose() + DMatrix::identity(nx, nx) * 0.05) * scale;
        let d = SpdMatrix::new(linalg::symmetrize(&d), "D").unwrap();
        for p in [Pairing::Auto, Pairing::Descending, Pairing::Reversed, Pairing::Aligned] {
            let b = rdf::rate_bounds_paired(&s, &d, p).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-10);
        }
    }

    #[test]
    fn generalized_eigenvalues_match_quadratic_roots(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut g = rng(seed);
        let s1 = SpdMatrix::new(random_spd(&mut g, 2), "s1").unwrap();
        let s2 = SpdMatrix::new(random_spd(&mut g, 2), "s2").unwrap();
        let jd = simdiag::whiten_diagonalize(&s1, &s2).unwrap();
        // det(Σ₂ − γ Σ₁) = qa γ² + qb γ + qc.
        let (a, b) = (s1.matrix(), s2.matrix());
        let qa = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let qb = -(b[(0, 0)] * a[(1, 1)] + a[(0, 0)] * b[(1, 1)] - b[(0, 1)] * a[(1, 0)] - a[(0, 1)] * b[(1, 0)]);
        let qc = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let mut roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
        roots.sort_by(|x, y| y.total_cmp(x));
        let mut got: Vec<f64> = jd.gamma.iter().copied().collect();
        got.sort_by(|x, y| y.total_cmp(x));
        for (r, g) in roots.iter().zip(&got) {
            prop_assert!((r - g).abs() <= 1e-8 * roots[0]);
        }
        let scaled = SpdMatrix::new(s1.matrix() * c, "cs1").unwrap();
        let js = simdiag::whiten_diagonalize_paired(&scaled, &s2, Pairing::Descending).unwrap();
        let jd = simdiag::whiten_diagonalize_paired(&s1, &s2, Pairing::Descending).unwrap();
        for (x, y) in js.gamma.iter().zip(jd.gamma.iter()) {
            prop_assert!((x * c - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn adding_psd_preserves_eigen_order(seed in any::<u64>(), n in 1usize..=6) {
        let mut g = rng(seed);
        let q2 = random_spd(&mut g, n);
        let a = gaussian(&mut g, n, 2);
        let q1 = &q2 + &a * a.transpose();
        let q1 = SymMatrix::new(linalg::symmetrize(&q1), "q1").unwrap();
        let q2 = SymMatrix::new(q2, "q2").unwrap();
        prop_assert!(eigen_order_dominates(&q1, &q2).unwrap());
        prop_assert!(loewner_leq(&q2, &q1, 1e-12).unwrap());
    }

    #[test]
    fn water_filling_rate_falls_with_budget(values in prop::collection::vec(0.01f64..50.0, 1..8), f in 0.01f64..0.98) {
        let total: f64 = values.iter().sum();
        let rate = |budget: f64| {
            let level = special::water_level(&values, budget).unwrap();
            values.iter().map(|l| 0.5 * (l / level).max(1.0).ln()).sum::<f64>()
        };
        let l1 = special::water_level(&values, f * total).unwrap();
        let l2 = special::water_level(&values, (f + 0.01) * total).unwrap();
        prop_assert!(l2 >= l1);
        prop_assert!(rate((f + 0.01) * total) <= rate(f * total) + 1e-12);
    }

    #[test]
    fn rate_rate_grows_with_requested_information(mu in prop::collection::vec(0.02f64..0.98, 1..6), f in 0.01f64..0.95) {
        let r_max = special::delivered_information(&mu, 0.0);
        let g1 = special::solve_gamma(&mu, f * r_max).unwrap();
        let g2 = special::solve_gamma(&mu, (f + 0.04) * r_max).unwrap();
        prop_assert!(g2 <= g1);
    }

    #[test]
    fn model_and_distortion_files_round_trip((nx, ny, nz) in dims(), seed in any::<u64>()) {
        let m = random_instance(nx, ny, nz, seed);
        let file = ModelFile::from_model(&m);
        let back = ModelFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_model().unwrap(), m.clone());
        let d = m.sigma_x().matrix().clone();
        let df = DistortionFile::new(&d);
        let parsed = DistortionFile::parse(&df.to_json()).unwrap().to_matrix().unwrap();
        prop_assert_eq!(parsed.matrix(), &d);
    }

    #[test]
    fn f64_survives_json(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let text = serde_json::to_string(&v).unwrap();
        let back: f64 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn bits_are_nats_over_ln2(n in 0.0f64..100.0) {
        prop_assert_eq!(rdx_gauss::nats_to_bits(n), n / std::f64::consts::LN_2);
        prop_assert!((rdx_gauss::nats_to_bits(n) * std::f64::consts::LN_2 - n).abs() <= 4.0 * f64::EPSILON * n.max(1.0));
    }
}
