mod common;

use bidaub::cascade::{cascade, key_point_fixed_point, TransitionMatrix};
use bidaub::mask::{build_mask, discriminant, is_feasible, FreeParameters, Mask, SolutionFamily};
use bidaub::reproduction::{evaluate, max_error, plan, LinearFunctional, TranslateRange, Window};
use bidaub::verify::{orthogonality_residual, verify, ShiftPair};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn feasible() -> impl Strategy<Value = (SolutionFamily, FreeParameters)> {
    (0usize..8, -1.0f64..1.5, -1.0f64..1.0)
        .prop_map(|(f, a, b)| (SolutionFamily::ALL[f], FreeParameters::new(a, b)))
        .prop_filter("real mask", |(f, p)| is_feasible(*f, *p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn built_masks_satisfy_all_fourteen((family, params) in feasible()) {
        let m = build_mask(family, params).unwrap();
        let r = verify(&m, 1e-10);
        prop_assert!(r.passes, "{family} {params:?}: {:e}", r.max_canonical_residual());
        let w = r.parity_sums;
        for v in [w.w1, w.w2, w.w3, w.w4] {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_pairs_differ_only_where_expected((family, params) in feasible()) {
        let a = build_mask(family, params).unwrap();
        let b = build_mask(family.partner(), params).unwrap();
        let sign = family.branch_sign();
        let delta = discriminant(family, params).max(0.0);
        prop_assert!(((a.c[2][3] - b.c[2][3]) - sign * delta.sqrt() / 4.0).abs() < 1e-12);
        prop_assert!(((a.c[2][2] + a.c[2][3]) - (b.c[2][2] + b.c[2][3])).abs() < 1e-12);
        // Entries whose formulas avoid c22 and c23.
        for (i, j) in [(1, 0), (1, 1), (1, 2), (1, 3), (3, 0), (3, 1), (3, 2), (3, 3)] {
            prop_assert_eq!(a.c[i][j], b.c[i][j]);
        }
    }

    #[test]
    fn spectrum_and_bound((family, params) in feasible()) {
        let m = build_mask(family, params).unwrap();
        let l = TransitionMatrix::from_mask(&m);
        let l4 = l.fourth_eigenvalue();
        for lambda in [1.0, 0.5, l4] {
            prop_assert!(l.characteristic(lambda).abs() < 1e-8);
        }
        prop_assert!(l4.abs() <= 7f64.sqrt() / 4.0 + 1e-9, "{family} {params:?}: {l4}");
        for s in l.column_sums() {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iterates_keep_unit_sum((family, params) in feasible()) {
        let m = build_mask(family, params).unwrap();
        let l = TransitionMatrix::from_mask(&m);
        let mut b = [1.0, 0.0, 0.0, 0.0];
        for _ in 0..60 {
            b = l.apply(&b);
            prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn anti_diagonal_shifts_vanish((family, params) in feasible()) {
        let m = build_mask(family, params).unwrap();
        for s in [ShiftPair::new(1, -1), ShiftPair::new(-1, 1)] {
            prop_assert!(orthogonality_residual(&m, s).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn reproduction_is_exact_linear_and_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let (family, params) = common::random_feasible(&mut rng, 1.0);
        let mask = build_mask(family, params).unwrap();
        let surface = cascade(&mask, 5).unwrap();
        let key = surface.key_points();
        let run = |f: LinearFunctional, s: &bidaub::DyadicSurface| {
            let p = plan(f, s.key_points()).unwrap();
            evaluate(&p, s, TranslateRange::default(), Window::default()).unwrap()
        };

        let f = LinearFunctional::new(
            rand::Rng::gen_range(&mut rng, -10.0..10.0),
            rand::Rng::gen_range(&mut rng, -10.0..10.0),
            rand::Rng::gen_range(&mut rng, -10.0..10.0),
        );
        let g = LinearFunctional::new(2.5, -7.0, 3.0);
        let rf = run(f, &surface);
        let rg = run(g, &surface);
        assert!(max_error(&rf, &f) < 1e-6, "{family} {params:?}");
        assert!(max_error(&rg, &g) < 1e-6);

        let sum = run(LinearFunctional::new(f.k + g.k, f.l + g.l, f.m + g.m), &surface);
        for ((a, b), c) in rf.values.iter().zip(&rg.values).zip(&sum.values) {
            assert!((a + b - c).abs() < 1e-10);
        }

        // Transposing the mask and swapping k and l transposes the reconstruction.
        let t_surface = cascade(&mask.transposed(), 5).unwrap();
        let t_key = t_surface.key_points();
        assert!((t_key.phi12() - key.phi21()).abs() < 1e-12);
        let rt = run(LinearFunctional::new(f.l, f.k, f.m), &t_surface);
        for p in 0..rf.nx {
            for q in 0..rf.ny {
                assert!((rf.get(p, q) - rt.get(q, p)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn fixed_point_warns_but_runs_on_invalid_mask() {
    // Column sums of L are not 1 here, so the iteration decays to zero.
    let m = Mask::new([[0.1; 4]; 4]).unwrap();
    let fp = key_point_fixed_point(&m, 200, 1e-13).unwrap();
    assert!(fp.key.sum().abs() < 1e-10);
}
