use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wigmagic::experiments::{self as ex};
use wigmagic::families::{self, FamilyId, LogicalFrame};
use wigmagic::lpsolve::{solve, LpProblem};
use wigmagic::measures::{stabilizer_extent, wigner_distance};
use wigmagic::phasespace::{inverse_wigner, permute_local, wigner, SymplecticMap};
use wigmagic::qcore::{apply_unitary, depolarize, gates, haar_random_pure, haar_random_pure_with, ComplexMatrix};
use wigmagic::{DensityMatrix, StabilizerSet};

fn set(n: usize) -> &'static StabilizerSet {
    StabilizerSet::shared(n).unwrap()
}

fn mixed(n: usize, seed: u64, p: f64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = haar_random_pure_with(n, &mut rng).unwrap().density();
    let b = haar_random_pure_with(n, &mut rng).unwrap().density();
    DensityMatrix::mix(p, &a, &b).unwrap()
}

fn complex_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let entries: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        ComplexMatrix::from_rows(dim, &entries)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative_and_mixed_product(
        a in complex_matrix(2), b in complex_matrix(2), c in complex_matrix(2), d in complex_matrix(2)
    ) {
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
        let mixed_product = &a.kron(&b) * &c.kron(&d);
        prop_assert!(mixed_product.max_abs_diff(&(&a * &c).kron(&(&b * &d))) < 1e-12);
    }

    #[test]
    fn depolarizing_is_affine(seed in any::<u64>(), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let a = haar_random_pure(2, seed).unwrap().density();
        let b = haar_random_pure(2, seed.wrapping_add(1)).unwrap().density();
        let lhs = depolarize(&DensityMatrix::mix(p, &a, &b).unwrap(), q).unwrap();
        let rhs = DensityMatrix::mix(p, &depolarize(&a, q).unwrap(), &depolarize(&b, q).unwrap()).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
    }

    #[test]
    fn wigner_normalization_and_roundtrip(n in 1usize..=3, seed in any::<u64>(), p in 0.0f64..=1.0) {
        let rho = mixed(n, seed, p);
        let w = wigner(&rho);
        prop_assert!((w.sum() - 1.0).abs() < 1e-10);
        prop_assert!(inverse_wigner(&w).max_abs_diff(rho.matrix()) < 1e-10);
        // sum of squares tracks purity: sum W^2 = Tr(rho^2) / 2^n
        prop_assert!((w.sum_sq() - rho.purity() / (1 << n) as f64).abs() < 1e-10);
    }

    #[test]
    fn wigner_factorizes_on_products(s1 in any::<u64>(), s2 in any::<u64>(), p in 0.0f64..=1.0) {
        let a = mixed(1, s1, p);
        let b = mixed(2, s2, 1.0 - p);
        let (wa, wb, wab) = (wigner(&a), wigner(&b), wigner(&a.tensor(&b).unwrap()));
        for i in 0..4 {
            for j in 0..16 {
                prop_assert!((wab.values()[16 * i + j] - wa.values()[i] * wb.values()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn local_symplectic_maps_permute_entries(seed in any::<u64>(), qubit in 0usize..2, k in 0usize..6) {
        let w = wigner(&haar_random_pure(2, seed).unwrap().density());
        let moved = permute_local(&w, qubit, SymplecticMap::ALL[k]);
        let mut a = w.values().to_vec();
        let mut b = moved.values().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }
}

/// Bounded LP with a known feasible point `x0 >= 0` and non-negative costs.
fn feasible_lp() -> impl Strategy<Value = (LpProblem, Vec<f64>)> {
    (2usize..6, 1usize..5, 0usize..3).prop_flat_map(|(n, m_ub, m_eq)| {
        (
            prop::collection::vec(0.0f64..2.0, n),
            prop::collection::vec(0.0f64..3.0, n),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), m_ub),
            prop::collection::vec(0.0f64..1.0, m_ub),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), m_eq),
        )
            .prop_map(|(c, x0, ub, slack, eq)| {
                let mut p = LpProblem::new(c);
                for (row, s) in ub.into_iter().zip(slack) {
                    let b = row.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() + s;
                    p.add_ub(row, b);
                }
                for row in eq {
                    let b = row.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
                    p.add_eq(row, b);
                }
                (p, x0)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lp_weak_duality_and_certificates((p, x0) in feasible_lp()) {
        let s = solve(&p).unwrap();
        prop_assert!(s.is_optimal());
        let cert = s.certificate(&p);
        prop_assert!(cert.max() <= 1e-9, "{:?}", cert);
        let dual = p.dual_objective(&s.ub_duals, &s.eq_duals);
        prop_assert!(dual <= s.objective_value + 1e-9);
        prop_assert!(dual <= p.primal_objective(&x0) + 1e-9);
    }

    #[test]
    fn lp_scale_covariance_and_determinism((p, _) in feasible_lp(), k in 0.1f64..10.0) {
        let s = solve(&p).unwrap();
        let again = solve(&p).unwrap();
        prop_assert_eq!(&s, &again);
        let mut scaled = p.clone();
        for c in &mut scaled.objective {
            *c *= k;
        }
        let t = solve(&scaled).unwrap();
        prop_assert!((t.objective_value - k * s.objective_value).abs() <= 1e-8 * (1.0 + k));
        // the scaled argmin lies on the original optimal face
        prop_assert!((p.primal_objective(&t.primal) - s.objective_value).abs() <= 1e-8);
        prop_assert!(p.primal_residual(&t.primal) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distance_is_convex(n in 1usize..=2, s1 in any::<u64>(), s2 in any::<u64>(), q in 0.0f64..=1.0) {
        let (a, b) = (mixed(n, s1, q), mixed(n, s2, 1.0 - q));
        let (ca, cb) = (wigner_distance(&a, set(n)).unwrap().c, wigner_distance(&b, set(n)).unwrap().c);
        for k in 1..=9 {
            let p = k as f64 / 10.0;
            let m = DensityMatrix::mix(p, &a, &b).unwrap();
            let cm = wigner_distance(&m, set(n)).unwrap().c;
            prop_assert!(cm <= p * ca + (1.0 - p) * cb + 1e-8);
        }
    }

    #[test]
    fn distance_is_lipschitz(n in 1usize..=2, s1 in any::<u64>(), s2 in any::<u64>(), q in 0.0f64..=1.0) {
        let (a, b) = (mixed(n, s1, q), mixed(n, s2, q));
        let (ca, cb) = (wigner_distance(&a, set(n)).unwrap().c, wigner_distance(&b, set(n)).unwrap().c);
        prop_assert!((ca - cb).abs() <= wigner(&a).l1_distance(&wigner(&b)) + 1e-8);
    }

    #[test]
    fn single_qubit_cliffords_preserve_distance(seed in any::<u64>(), q in 0.0f64..=1.0) {
        let rho = mixed(1, seed, q);
        let c = wigner_distance(&rho, set(1)).unwrap().c;
        for u in gates::single_qubit_cliffords() {
            let moved = apply_unitary(&rho, &u).unwrap();
            prop_assert!((wigner_distance(&moved, set(1)).unwrap().c - c).abs() <= 1e-8);
        }
    }

    #[test]
    fn stabilizer_mixtures_are_free(weights in prop::collection::vec(0.0f64..1.0, 60)) {
        let total: f64 = weights.iter().sum::<f64>() + 1e-12;
        let mut m = ComplexMatrix::zeros(4);
        for (w, s) in weights.iter().zip(set(2).states()) {
            m = &m + &s.vector().projector().scale_real(w / total);
        }
        let rho = DensityMatrix::new(m).unwrap();
        prop_assert!(wigner_distance(&rho, set(2)).unwrap().c <= 1e-9);
    }

    #[test]
    fn witness_and_extent_bounds(seed in any::<u64>(), q in 0.0f64..=1.0) {
        let rho = mixed(2, seed, q);
        let d = wigner_distance(&rho, set(2)).unwrap();
        prop_assert!((d.witness.gap - d.c).abs() <= 1e-7);
        prop_assert!(d.witness.sup_norm() <= 1.0 + 1e-9);
        let e = stabilizer_extent(&rho, set(2)).unwrap();
        prop_assert!(e.gamma >= 1.0 - 1e-9);
        // Gamma - 1 >= C / M_2 with M_2 = 2
        prop_assert!(e.gamma - 1.0 - d.c / 2.0 >= -1e-8);
    }

    #[test]
    fn family_relations(t in 0.01f64..(PI - 0.01)) {
        prop_assume!((t - PI / 2.0).abs() > 1e-3);
        let s2 = set(2);
        let frame = LogicalFrame::repetition();
        let c = |f| wigner_distance(&families::family_state(f, t).unwrap().density(), s2).unwrap().c;
        let (cy, cx, cb) = (c(FamilyId::Ry), c(FamilyId::Rx), c(FamilyId::BellRz));
        prop_assert!((cx - 0.5 * cy).abs() <= 1e-9);

        let brz = families::family_state(FamilyId::BellRz, t).unwrap().density();
        let b = families::logical_bloch(&brz, &frame).unwrap();
        prop_assert!((cb - (b[0].abs() + b[1].abs() - 1.0)).abs() <= 1e-9);

        let neg = |f| wigner(&families::family_state(f, t).unwrap().density()).negative_count(families::NEGATIVE_TOL);
        prop_assert_eq!(neg(FamilyId::Ry), 4);
        prop_assert_eq!(neg(FamilyId::Rx), 2);
        prop_assert_eq!(neg(FamilyId::BellRz), 4);

        let ry_w = wigner(&families::family_state(FamilyId::Ry, t).unwrap().density());
        prop_assert!((ry_w.negative_mass() - t.sin() / 2.0).abs() <= 1e-12);
        let rx_w = wigner(&families::family_state(FamilyId::Rx, t).unwrap().density());
        prop_assert!(rx_w.negative_mass() > 0.0 && rx_w.negative_mass() < ry_w.negative_mass());

        // Gamma dominates every witness value once free_max is normalized to 1
        for f in FamilyId::ALL {
            let rho = families::family_state(f, t).unwrap().density();
            let h = families::closed_form_witness(f, t, &frame).unwrap();
            let g = families::operator_gap(&h, &rho, s2).unwrap();
            let gamma = stabilizer_extent(&rho, s2).unwrap().gamma;
            prop_assert!(gamma >= g.value / g.free_max - 1e-7);
            prop_assert!(h.commutes_with(&frame.stabilizer, 0.0));
        }
    }

    #[test]
    fn deficit_is_the_sum_of_its_parts(theta_b in 0.0f64..PI, phi_b in 0.0f64..(2.0 * PI)) {
        let recs = ex::dichotomy_scan(&ex::t_state(), &[(theta_b, phi_b)]).unwrap();
        let r = &recs[0];
        prop_assert!((r.deficit - (r.c_rho + r.c_sigma - r.c_joint)).abs() <= 1e-12);
        prop_assert_eq!(r.superadditive, r.deficit <= ex::SUPERADDITIVE_TOL);
    }
}

#[test]
fn sampled_experiments_are_reproducible() {
    let a = ex::monotonicity_sample(100, 42).unwrap();
    let b = ex::monotonicity_sample(100, 42).unwrap();
    assert_eq!(a, b);
    let c = ex::monotonicity_sample(100, 43).unwrap();
    assert_ne!(
        (a.fraction_increased, a.max_increase),
        (c.fraction_increased, c.max_increase)
    );
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    let grid = families::theta_grid(7);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| families::family_sweep(FamilyId::Ry, &grid, set(2)).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| families::family_sweep(FamilyId::Ry, &grid, set(2)).unwrap());
    assert_eq!(serial, parallel);
}
