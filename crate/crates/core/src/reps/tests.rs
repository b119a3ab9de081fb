use super::*;
use crate::words::{conjugacy_classes, Word, DEFAULT_BUDGET};
use proptest::prelude::*;

fn schottky() -> RepPoint {
    real_schottky(3.0, 3.0, 0.25).unwrap()
}

fn a1(d: usize) -> WeightFunctional {
    WeightFunctional::root(d, 1).unwrap()
}

#[test]
fn functional_canonicalisation_and_parsing() {
    let w = WeightFunctional::omega(3, 1).unwrap();
    assert!((w.coeffs().iter().sum::<f64>()).abs() < 1e-15);
    let v = CartanVector::new(vec![2.0, 0.5, -2.5]);
    assert!((w.eval(&v) - 2.0).abs() < 1e-15);
    assert!((a1(3).eval(&v) - 1.5).abs() < 1e-15);
    assert_eq!(WeightFunctional::parse(3, "a2").unwrap(), WeightFunctional::root(3, 2).unwrap());
    assert_eq!(
        WeightFunctional::parse(3, "omega_2").unwrap(),
        WeightFunctional::omega(3, 2).unwrap()
    );
    let two = WeightFunctional::parse(2, "2*a1").unwrap();
    assert!((two.eval(&CartanVector::new(vec![1.0, -1.0])) - 4.0).abs() < 1e-15);
    assert!(WeightFunctional::parse(3, "b1").is_err());
    assert!(WeightFunctional::root(3, 3).is_err());
}

#[test]
fn omega_weights_reconstruct_the_functional() {
    let phi = WeightFunctional::custom("x", vec![0.3, -1.0, 2.0, 0.1]).unwrap();
    let v = CartanVector::new(vec![1.5, 0.2, -0.4, -1.3]);
    let via: f64 = phi
        .omega_weights()
        .iter()
        .enumerate()
        .map(|(k, w)| w * v.omega(k + 1))
        .sum();
    assert!((via - phi.eval(&v)).abs() < 1e-14);
}

#[test]
fn evaluate_basics() {
    let rep = schottky();
    assert!(rep.evaluate(&Word::empty(2)).is_identity(1e-15));
    let w = Word::parse(2, "abAbbaB").unwrap();
    assert!(rep.evaluate(&w.concat(&w.inverse())).is_identity(1e-9));
    // homomorphism against direct multiplication
    let u = Word::parse(2, "bba").unwrap();
    let lhs = rep.evaluate(&w.concat(&u));
    let rhs = rep.evaluate(&w).mul(&rep.evaluate(&u));
    assert!(lhs.proj_distance(&rhs) < 1e-12);
}

#[test]
fn periods_of_diagonal_and_powers() {
    let l: f64 = 1.3;
    let g = ProjMatrix::from_real(2, &[l.exp(), 0.0, 0.0, (-l).exp()]).unwrap();
    let rep = RepPoint::new(vec![g]).unwrap();
    let c = ConjClass::of(&Word::parse(1, "a").unwrap());
    assert!((rep.period(&c, &a1(2)).unwrap() - 2.0 * l).abs() < 1e-13);

    let rep = schottky();
    let c = ConjClass::of(&Word::parse(2, "aBB").unwrap());
    let p1 = rep.period(&c, &a1(2)).unwrap();
    for n in 2..5 {
        let cn = ConjClass::of(&c.core().pow(n));
        assert!((rep.period(&cn, &a1(2)).unwrap() - n as f64 * p1).abs() < 1e-10 * n as f64);
    }
    // generators have translation length 3
    let ca = ConjClass::of(&Word::parse(2, "a").unwrap());
    assert!((rep.period(&ca, &a1(2)).unwrap() - 3.0).abs() < 1e-13);
}

#[test]
fn period_is_rotation_invariant() {
    let rep = lift(&schottky(), LiftKind::Sym, 3).unwrap();
    let phi = WeightFunctional::omega(3, 1).unwrap();
    let w = Word::parse(2, "aabAbb").unwrap();
    let base = rep.period(&ConjClass::of(&w), &phi).unwrap();
    for r in 0..w.len() {
        let g = rep.evaluate(&w.rotate(r));
        let v = eval_functionals(&g, Projection::Jordan, &[&phi]).unwrap()[0];
        assert!((v - base).abs() < 1e-10);
    }
}

#[test]
fn wedge_lift_realises_roots() {
    // a_2 period of a rank-3 rep equals the a_1 period of ... via omega identities:
    // omega_2(rho) = omega_1(wedge^2 rho)
    let base = lift(&schottky(), LiftKind::Sym, 4).unwrap();
    let w2 = lift(&base, LiftKind::Wedge, 2).unwrap();
    let om2 = WeightFunctional::omega(4, 2).unwrap();
    let om1 = WeightFunctional::omega(6, 1).unwrap();
    for c in conjugacy_classes(2, 4, true, DEFAULT_BUDGET).unwrap() {
        let x = base.period(&c, &om2).unwrap();
        let y = w2.period(&c, &om1).unwrap();
        assert!((x - y).abs() < 1e-9, "{c}: {x} vs {y}");
    }
}

#[test]
fn sym_lift_preserves_root_periods() {
    let rep = schottky();
    for d in 3..=5 {
        let s = lift(&rep, LiftKind::Sym, d).unwrap();
        for c in conjugacy_classes(2, 5, true, DEFAULT_BUDGET).unwrap() {
            let x = rep.period(&c, &a1(2)).unwrap();
            let y = s.period(&c, &a1(d)).unwrap();
            assert!((x - y).abs() < 1e-9, "d={d} {c}: {x} vs {y}");
        }
    }
}

#[test]
fn certified_schottky_has_positive_periods() {
    let rep = schottky();
    let cert = anosov_certificate(&rep, &a1(2), 10, DEFAULT_MU_MIN, DEFAULT_C_MAX).unwrap();
    assert!(cert.pass, "{cert:?}");
    let om = WeightFunctional::omega(2, 1).unwrap();
    for c in conjugacy_classes(2, 6, true, DEFAULT_BUDGET).unwrap() {
        assert!(rep.period(&c, &a1(2)).unwrap() > 0.0);
        assert!(rep.period(&c, &om).unwrap() > 0.0);
    }
}

#[test]
fn cyclic_certificate_slope() {
    let g = ProjMatrix::from_real(2, &[2.0, 0.0, 0.0, 0.5]).unwrap();
    let rep = RepPoint::new(vec![g]).unwrap();
    let cert = anosov_certificate(&rep, &a1(2), 12, DEFAULT_MU_MIN, DEFAULT_C_MAX).unwrap();
    assert!((cert.mu_hat - 2.0 * 2f64.ln()).abs() < 1e-10);
    assert!(cert.pass);
}

#[test]
fn unipotent_generator_fails_certificate() {
    let rep = FamilyKind::Unipotent { lb: 3.0 }.build().unwrap();
    let cert = anosov_certificate(&rep, &a1(2), 12, DEFAULT_MU_MIN, DEFAULT_C_MAX).unwrap();
    assert!(!cert.pass, "{cert:?}");
}

#[test]
fn certificate_slope_grows_with_separation() {
    let mut prev = 0.0;
    for kappa in [0.3, 0.15, 0.05] {
        let rep = real_schottky(3.0, 3.0, kappa).unwrap();
        let cert = anosov_certificate(&rep, &a1(2), 10, DEFAULT_MU_MIN, DEFAULT_C_MAX).unwrap();
        assert!(cert.mu_hat > prev);
        prev = cert.mu_hat;
    }
}

#[test]
fn fixed_line_examples() {
    let g = ProjMatrix::diag(&[C64::new(3.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0 / 3.0, 0.0)])
        .unwrap();
    let rep = RepPoint::new(vec![g]).unwrap();
    let c = ConjClass::of(&Word::parse(1, "a").unwrap());
    let v = fixed_line(&rep, &c).unwrap();
    assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    let vi = fixed_line(&rep, &c.inverse()).unwrap();
    assert!((vi[2].norm() - 1.0).abs() < 1e-12);

    let u = ProjMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let rep = RepPoint::new(vec![u]).unwrap();
    assert!(matches!(fixed_line(&rep, &c), Err(Error::NonProximal(_))));
}

#[test]
fn fixed_lines_are_equivariant() {
    let rep = lift(&schottky(), LiftKind::Sym, 3).unwrap();
    let g = Word::parse(2, "aB").unwrap();
    let gm = rep.evaluate(&g);
    for c in conjugacy_classes(2, 4, true, DEFAULT_BUDGET).unwrap() {
        let v = fixed_line(&rep, &c).unwrap();
        let conj = g.concat(c.core()).concat(&g.inverse());
        let x = &super::certificates::invariant_subspace(&rep, &conj.ranks(), 1)[0];
        let w = gm.apply(&v);
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ip: C64 = w.iter().zip(x).map(|(a, b)| b.conj() * a).sum();
        assert!((ip.norm() / n - 1.0).abs() < 1e-8, "class {c}");
    }
}

#[test]
fn hyperconvexity_of_sym_lift_and_counterexample() {
    let rep = lift(&schottky(), LiftKind::Sym, 3).unwrap();
    let r = hyperconvexity_certificate(&rep, 200, 5, 1).unwrap();
    // nearby fixed points make the gap small but it stays far above rounding
    assert!(r.min_gap > 1e-11, "{r:?}");
    let bad = schottky().plus_trivial().unwrap();
    let r = hyperconvexity_certificate(&bad, 200, 5, 1).unwrap();
    assert!(r.min_gap < 1e-14, "counter {r:?}");
    assert!(hyperconvexity_certificate(&schottky(), 10, 4, 1).is_err());
    let x = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    assert!(super::certificates::triple_gap(&x, &x, &[x.clone()]).is_none());
}

#[test]
fn limit_cone_examples() {
    let rep = schottky();
    let cone = limit_cone(&rep, 5, &[&a1(2)]).unwrap();
    let s = 0.5f64.sqrt();
    for v in &cone.directions {
        assert!((v[0] - s).abs() < 1e-12 && (v[1] + s).abs() < 1e-12);
    }
    assert!(cone.min_values[0] > 0.0);
    let sym = lift(&rep, LiftKind::Sym, 3).unwrap();
    let cone = limit_cone(&sym, 5, &[]).unwrap();
    for v in &cone.directions {
        assert!((v[0] - s).abs() < 1e-9 && v[1].abs() < 1e-9 && (v[2] + s).abs() < 1e-9);
    }
    let g = ProjMatrix::from_real(2, &[2.0, 0.0, 0.0, 0.5]).unwrap();
    let cyc = RepPoint::new(vec![g]).unwrap();
    assert_eq!(limit_cone(&cyc, 6, &[]).unwrap().directions.len(), 2);
}

#[test]
fn bending_family_properties() {
    let base = schottky();
    let r0 = bending(&base, C64::new(0.0, 0.0)).unwrap();
    for (g, h) in base.generators().iter().zip(r0.generators()) {
        assert!(g.proj_distance(h) < 1e-15);
    }
    let fam = FamilyKind::Bending {
        la: 3.0,
        lb: 3.0,
        kappa: 0.25,
        z: [0.0, 0.0],
    };
    let grid = grid_builder(&fam, C64::new(0.0, 0.0), 0.05, 0.05, 2).unwrap();
    assert!(grid.is_conj_symmetric() && grid.is_holomorphic());
    // periods at conjugate nodes agree exactly
    let c = ConjClass::of(&Word::parse(2, "abbAB").unwrap());
    for it in 1..=2 {
        for is in -2..=2 {
            let p = grid.node(is, it).unwrap().period(&c, &a1(2)).unwrap();
            let q = grid.node(is, -it).unwrap().period(&c, &a1(2)).unwrap();
            assert_eq!(p, q);
        }
    }
}

#[test]
fn bending_is_holomorphic_on_the_grid() {
    // discrete Cauchy-Riemann residual of an entry is O(delta^2)
    let fam = FamilyKind::Bending {
        la: 3.0,
        lb: 3.0,
        kappa: 0.25,
        z: [0.1, 0.0],
    };
    let mut prev = f64::INFINITY;
    for delta in [0.02, 0.01, 0.005] {
        let grid = grid_builder(&fam, C64::new(0.1, 0.0), delta, delta, 1).unwrap();
        let entry = |is, it| grid.node(is, it).unwrap().generators()[1].get(0, 1);
        let fs = (entry(1, 0) - entry(-1, 0)) / (2.0 * delta);
        let ft = (entry(0, 1) - entry(0, -1)) / (2.0 * delta);
        let cr = (ft - C64::new(0.0, 1.0) * fs).norm();
        assert!(cr < 5.0 * delta * delta);
        assert!(cr < prev);
        prev = cr;
    }
}

#[test]
fn grid_round_trip_and_errors() {
    let fam = FamilyKind::Bending {
        la: 3.0,
        lb: 3.0,
        kappa: 0.25,
        z: [0.0, 0.0],
    };
    let grid = grid_builder(&fam, C64::new(0.0, 0.0), 0.1, 0.1, 1).unwrap();
    let text = grid_to_json(&grid).unwrap();
    let back = parse_grid(&text).unwrap();
    assert_eq!(back.geometry(), grid.geometry());
    for (a, b) in grid.nodes().iter().zip(back.nodes()) {
        for (g, h) in a.generators().iter().zip(b.generators()) {
            assert!(g.proj_distance(h) < 1e-15);
        }
    }

    let bad = text.replacen("\"dim\": 2", "\"dim\": 3", 1);
    let err = parse_grid(&bad).unwrap_err().to_string();
    assert!(err.contains("node (is="), "{err}");

    let tiny = r#"{"rank":1,"dim":2,"grid":{"s0":0,"t0":0,"ds":1,"dt":1,"ns":1,"nt":1},
        "flags":{"holomorphic":true,"conj_symmetric":false},
        "nodes":[{"is":0,"it":0,"generators":[[[2,0],[0,0],[0,0],[0.5,0]]]}]}"#;
    let g = parse_grid(tiny).unwrap();
    let c = ConjClass::of(&Word::parse(1, "a").unwrap());
    let p = g.center().period(&c, &a1(2)).unwrap();
    assert!((p - 2.0 * 2f64.ln()).abs() < 1e-14);
}

#[test]
fn conj_symmetry_flag_is_checked() {
    let fam = FamilyKind::Bending {
        la: 3.0,
        lb: 3.0,
        kappa: 0.25,
        z: [0.0, 0.3],
    };
    // base with imaginary bending is not conjugation symmetric about t = 0
    let grid = grid_builder(&fam, C64::new(0.0, 0.0), 0.1, 0.1, 1).unwrap();
    assert!(!grid.is_conj_symmetric());
    let forced = ParamGrid::new(*grid.geometry(), grid.nodes().to_vec(), true, true);
    assert!(forced.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evaluation_is_a_homomorphism(
        u in prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..12),
        v in prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..12),
    ) {
        let rep = schottky();
        let u = Word::new(2, &u).unwrap();
        let v = Word::new(2, &v).unwrap();
        let lhs = rep.evaluate(&u.concat(&v));
        let rhs = rep.evaluate(&u).mul(&rep.evaluate(&v));
        prop_assert!(lhs.proj_distance(&rhs) < 1e-9);
    }
}
