use proptest::prelude::*;

use cy4tilt::exceptional::{line_bundles, mutation_orbit};
use cy4tilt::hearts::{class_tilt, ext_quiver, heart_a, tilt_word, ClassHeart, Term, Tilt, TiltDir};
use cy4tilt::kclass::{q, ChernP2};
use cy4tilt::localcy4::{euler_x0, koszul_ext, serre_dual_x, PushforwardAtom};
use cy4tilt::cohomology::FactStore;
use cy4tilt::secondary::{build_secondary, fq_class, pullback_table, quiver_euler_form, QuiverModuleClass, SecondaryQuiver};

fn arb_class() -> impl Strategy<Value = ChernP2> {
    (-6i64..=6, -9i64..=9, -12i64..=12).prop_map(|(r, d, s)| ChernP2::new(r, d, q(s, 2)))
}

fn arb_class_heart() -> impl Strategy<Value = ClassHeart> {
    (proptest::collection::vec(arb_class(), 3), proptest::collection::vec(0u64..40, 9)).prop_map(|(classes, e)| {
        let ext1 = (0..3).map(|i| (0..3).map(|j| Some(if i == j { 0 } else { e[3 * i + j] })).collect()).collect();
        ClassHeart { classes, ext1 }
    })
}

fn arb_dir() -> impl Strategy<Value = TiltDir> {
    prop_oneof![Just(TiltDir::Left), Just(TiltDir::Right)]
}

fn opposite(d: TiltDir) -> TiltDir {
    match d {
        TiltDir::Left => TiltDir::Right,
        TiltDir::Right => TiltDir::Left,
    }
}

proptest! {
    #[test]
    fn class_tilt_then_inverse_is_identity(h in arb_class_heart(), i in 0usize..3, d in arb_dir()) {
        let t = class_tilt(&h, i, d).unwrap();
        let back = class_tilt(&t, i, opposite(d)).unwrap();
        prop_assert_eq!(back.classes, h.classes);
    }

    #[test]
    fn term_tilts_cancel(j in 0usize..3, k in 0usize..3, n in 1u64..20) {
        let s = Term::Simple(j);
        let x = Term::Simple(k);
        let l = Term::left(&s, &x, n);
        prop_assert_eq!(Term::right(&Term::shift(&s, -1), &l, n), x.clone());
        let r = Term::right(&s, &x, n);
        prop_assert_eq!(Term::left(&Term::shift(&s, 1), &r, n), x.clone());
        prop_assert_eq!(Term::shift(&Term::shift(&s, 3), -3), s.clone());
        prop_assert_eq!(l.psi().psi(), l);
    }

    #[test]
    fn euler_x0_is_symmetric(a in arb_class(), b in arb_class()) {
        prop_assert_eq!(euler_x0(&a, &b), euler_x0(&b, &a));
    }

    #[test]
    fn koszul_ext_matches_euler_and_serre(j in -3i64..=3, k in -3i64..=3, p in -1i64..=1, t in -1i64..=1) {
        let a = PushforwardAtom::new(&format!("O({j})"), ChernP2::line(j), p);
        let b = PushforwardAtom::new(&format!("O({k})"), ChernP2::line(k), t);
        let mut st = FactStore::new();
        if let (Ok(g), Ok(h)) = (koszul_ext(&mut st, &a, &b), koszul_ext(&mut st, &b, &a)) {
            prop_assert_eq!(g.euler(), Some(euler_x0(&a.k_class(), &b.k_class())));
            prop_assert_eq!(serre_dual_x(&g), h);
        }
    }

    #[test]
    fn quiver_euler_form_is_bilinear(
        counts in proptest::collection::vec(0u64..6, 3),
        d in proptest::collection::vec(-5i64..5, 3),
        e in proptest::collection::vec(-5i64..5, 3),
        f in proptest::collection::vec(-5i64..5, 3),
        a in -3i64..3,
    ) {
        let qv = SecondaryQuiver::from_counts(vec![ChernP2::zero(); 3], &[((0, 1), counts[0]), ((0, 2), counts[1]), ((1, 2), counts[2])]);
        let de: Vec<i64> = d.iter().zip(&e).map(|(x, y)| a * x + y).collect();
        prop_assert_eq!(quiver_euler_form(&qv, &de, &f), a * quiver_euler_form(&qv, &d, &f) + quiver_euler_form(&qv, &e, &f));
        let ef: Vec<i64> = e.iter().zip(&f).map(|(x, y)| a * x + y).collect();
        prop_assert_eq!(quiver_euler_form(&qv, &d, &ef), a * quiver_euler_form(&qv, &d, &e) + quiver_euler_form(&qv, &d, &f));
    }

    #[test]
    fn fq_class_is_additive(m in proptest::collection::vec(0u64..9, 3), n in proptest::collection::vec(0u64..9, 3)) {
        let qv = SecondaryQuiver::from_counts(cy4tilt::exceptional::omega_example().classes(), &[((0, 2), 3)]);
        let sum: Vec<u64> = m.iter().zip(&n).map(|(a, b)| a + b).collect();
        let lhs = fq_class(&qv, &QuiverModuleClass::new(sum));
        let rhs = fq_class(&qv, &QuiverModuleClass::new(m)) + fq_class(&qv, &QuiverModuleClass::new(n));
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn tilted_hearts_are_serre_palindromic(w in proptest::collection::vec((0usize..3, arb_dir()), 0..=1)) {
        let word: Vec<Tilt> = w.iter().map(|&(index, dir)| Tilt { dir, index }).collect();
        let h = tilt_word(&heart_a(), &word).unwrap();
        let qv = ext_quiver(&h).unwrap();
        let cls = h.classes();
        for i in 0..3 {
            for j in 0..3 {
                let a = qv.ext(i, j);
                let b = qv.ext(j, i);
                for k in 0..5 {
                    prop_assert_eq!(a.dims[k], b.dims[4 - k]);
                }
                if let Some(x) = a.euler() {
                    prop_assert_eq!(x, euler_x0(&cls[i], &cls[j]));
                }
            }
        }
    }
}

#[test]
fn euler_form_matches_pullback_ext1_on_orbit() {
    let e = |i: usize| {
        let mut v = vec![0; 3];
        v[i] = 1;
        v
    };
    for c in mutation_orbit(&line_bundles(), 3).unwrap() {
        let Ok(qv) = build_secondary(&c) else { continue };
        let t = pullback_table(&c, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let form = quiver_euler_form(&qv, &e(i), &e(j));
                let delta = i64::from(i == j);
                assert_eq!(form, delta - qv.count(i, j) as i64);
                if i != j {
                    assert_eq!(t[j][i].dims[1].value(), Some(qv.count(i, j)));
                }
            }
        }
    }
}
