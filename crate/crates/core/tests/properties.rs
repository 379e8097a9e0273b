use glue_core::chain::{apply_similarity, diff, kappa, project_linear, Chain, Similarity};
use glue_core::rigor::{eval_with_jacobian, Interval};
use glue_core::scalar::Scalar;
use glue_core::schemes::{builtin, refined_length, IndexVector};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn chain_strategy(min_len: usize, max_len: usize, dim: usize) -> impl Strategy<Value = Chain> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), min_len..=max_len)
        .prop_map(move |pts| Chain::new(dim, &pts).unwrap())
}

/// Perturbation of the standard chain, where geometric rules are smooth.
fn near_linear(len: usize) -> impl Strategy<Value = Chain> {
    prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), len).prop_map(|noise| {
        let pts: Vec<Vec<f64>> = noise.iter().enumerate().map(|(i, (a, b))| vec![i as f64 + a, *b]).collect();
        Chain::new(2, &pts).unwrap()
    })
}

fn similarity_strategy() -> impl Strategy<Value = Similarity> {
    (0.1f64..10.0, 0.0f64..std::f64::consts::TAU, any::<bool>(), -5.0f64..5.0, -5.0f64..5.0).prop_map(
        |(scale, t, flip, sx, sy)| {
            let (c, s) = (t.cos(), t.sin());
            let rot = if flip { vec![c, s, s, -c] } else { vec![c, -s, s, c] };
            Similarity::new(scale, rot, vec![sx, sy]).unwrap()
        },
    )
}

fn max_diff(a: &Chain, b: &Chain) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn encloses(i: Interval, x: &BigRational) -> bool {
    &exact(i.lo()) <= x && x <= &exact(i.hi())
}

fn interval_strategy() -> impl Strategy<Value = (Interval, f64)> {
    (-1e3f64..1e3, 0.0f64..10.0, 0.0f64..=1.0).prop_map(|(lo, w, t)| {
        let i = Interval::new(lo, lo + w);
        (i, (lo + t * w).clamp(i.lo(), i.hi()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn refined_length_matches(p in chain_strategy(7, 15, 2), rounds in 0usize..4) {
        for id in ["chaikin", "fps", "cps2d", "spoiler", "bspline_tau:0.3"] {
            let s = builtin(id).unwrap();
            let q = s.subdivide_rounds(&p, rounds);
            if let Ok(q) = q {
                prop_assert_eq!(q.len(), refined_length(p.len(), s.spread(), rounds as u32));
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_linear(p in chain_strategy(3, 12, 3)) {
        let pi = project_linear(&p).unwrap();
        prop_assert!(max_diff(&project_linear(&pi).unwrap(), &pi) < 1e-10);
        prop_assert!(diff(&pi, 2).unwrap().max_norm() < 1e-10);
        // the residual is orthogonal to linear chains
        let r = p.sub(&pi).unwrap();
        prop_assert!(r.inner(&pi).unwrap().abs() < 1e-8 * (1.0 + p.max_norm().powi(2)));
    }

    #[test]
    fn kappa_is_similarity_invariant(p in chain_strategy(3, 9, 2), s in similarity_strategy()) {
        let q = apply_similarity(&s, &p).unwrap();
        match (kappa(&p).finite(), kappa(&q).finite()) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0)),
            (None, None) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn schemes_commute_with_similarities(p in near_linear(9), s in similarity_strategy()) {
        for id in ["chaikin", "fps", "cps2d", "spoiler", "bspline_tau:0.5"] {
            let scheme = builtin(id).unwrap();
            let (Ok(a), Ok(b)) = (
                scheme.subdivide(&apply_similarity(&s, &p).unwrap()),
                scheme.subdivide(&p).map(|q| apply_similarity(&s, &q).unwrap()),
            ) else {
                continue;
            };
            let scale = 1.0 + b.max_norm();
            prop_assert!(max_diff(&a, &b) <= 1e-10 * scale, "{}: {}", id, max_diff(&a, &b));
        }
    }

    #[test]
    fn constant_chains_are_fixed(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        for id in ["chaikin", "fps", "bspline_tau:0.25"] {
            let s = builtin(id).unwrap();
            let p = Chain::new(2, &vec![vec![x, y]; s.spread()]).unwrap();
            let q = s.subdivide(&p).unwrap();
            for pt in q.points() {
                prop_assert!((pt[0] - x).abs() < 1e-12 && (pt[1] - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interval_ops_enclose_exact_results((a, x) in interval_strategy(), (b, y) in interval_strategy()) {
        let (ex, ey) = (exact(x), exact(y));
        prop_assert!(encloses(a + b, &(&ex + &ey)));
        prop_assert!(encloses(a - b, &(&ex - &ey)));
        prop_assert!(encloses(a * b, &(&ex * &ey)));
        if !ey.is_zero() {
            if let Ok(q) = a.try_div(b) {
                prop_assert!(encloses(q, &(&ex / &ey)));
            }
        }
        if x >= 0.0 {
            let r = a.abs().try_sqrt().unwrap();
            let (lo, hi) = (exact(r.lo()), exact(r.hi()));
            let ax = ex.abs();
            prop_assert!(&lo * &lo <= ax && ax <= &hi * &hi);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(
        p in near_linear(7),
        bits in prop::collection::vec(0u8..2, 1..3),
    ) {
        let s = builtin("cps2d").unwrap();
        let word = IndexVector::new(bits).unwrap();
        let q = p.map(|x| Interval::point(*x));
        let (_, jac) = eval_with_jacobian(&s, &word, &q).unwrap();
        let h = 1e-6;
        let n = p.coords().len();
        for j in 0..n {
            let mut c = p.coords().to_vec();
            c[j] += h;
            let plus = s.compose_windows(&word, &Chain::from_flat(2, c.clone()).unwrap());
            c[j] -= 2.0 * h;
            let minus = s.compose_windows(&word, &Chain::from_flat(2, c).unwrap());
            let (plus, minus) = (plus.unwrap(), minus.unwrap());
            for i in 0..n {
                let fd = (plus.coords()[i] - minus.coords()[i]) / (2.0 * h);
                let enc = jac.get(i, j);
                let scale = 1.0 + fd.abs();
                prop_assert!(
                    enc.lo() - 1e-6 * scale <= fd && fd <= enc.hi() + 1e-6 * scale,
                    "entry ({}, {}): fd {} vs {:?}", i, j, fd, enc
                );
            }
        }
    }
}
