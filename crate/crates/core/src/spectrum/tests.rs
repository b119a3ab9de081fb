use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::matlin::{ProjMatrix, C64};
use crate::reps::real_schottky;

fn a1() -> WeightFunctional {
    WeightFunctional::root(2, 1).unwrap()
}

fn schottky(i: usize) -> RepPoint {
    fixtures::real_schottky(i).build().unwrap()
}

#[test]
fn cyclic_table() {
    let rep = fixtures::cyclic().build().unwrap();
    let prim = ClassSpectrum::single(&rep, &a1(), 6).unwrap();
    // the classes of a and of its inverse
    assert_eq!(prim.len(), 2);
    assert!(prim.base_periods().iter().all(|&p| (p - 2.0).abs() < 1e-14));
    let all = ClassSpectrum::build_with(&[&rep], &[(0, a1())], 6, false).unwrap();
    assert_eq!(all.len(), 12);
    for i in 0..all.len() {
        let n = all.core_len(i) as f64;
        assert!((all.value(i, 0) - 2.0 * n).abs() < 1e-12);
    }
}

#[test]
fn table_is_conjugation_invariant() {
    let rep = schottky(1);
    let h = ProjMatrix::new(
        2,
        vec![
            C64::new(1.0, 0.3),
            C64::new(-0.4, 0.2),
            C64::new(0.7, 0.0),
            C64::new(2.0, -1.0),
        ],
    )
    .unwrap();
    let conj = rep.conjugate(&h).unwrap();
    let s = ClassSpectrum::single(&rep, &a1(), 8).unwrap();
    let t = ClassSpectrum::single(&conj, &a1(), 8).unwrap();
    assert_eq!(s.len(), t.len());
    let mut pairs: Vec<(Vec<u8>, f64, f64)> = Vec::new();
    let mut other: Vec<(Vec<u8>, f64)> = (0..t.len())
        .map(|i| (t.core_ranks(i).to_vec(), t.value(i, 0)))
        .collect();
    other.sort_by(|a, b| a.0.cmp(&b.0));
    let mut mine: Vec<(Vec<u8>, f64)> = (0..s.len())
        .map(|i| (s.core_ranks(i).to_vec(), s.value(i, 0)))
        .collect();
    mine.sort_by(|a, b| a.0.cmp(&b.0));
    for (a, b) in mine.into_iter().zip(other) {
        assert_eq!(a.0, b.0);
        pairs.push((a.0, a.1, b.1));
    }
    for (w, x, y) in pairs {
        assert!((x - y).abs() < 1e-10 * x.max(1.0), "{w:?}: {x} vs {y}");
    }
}

#[test]
fn longer_tables_extend_shorter_ones() {
    let rep = schottky(2);
    let s = ClassSpectrum::single(&rep, &a1(), 7).unwrap();
    let t = ClassSpectrum::single(&rep, &a1(), 8).unwrap();
    let kept: Vec<usize> = (0..t.len()).filter(|&i| t.core_len(i) <= 7).collect();
    assert_eq!(kept.len(), s.len());
    for (j, &i) in kept.iter().enumerate() {
        assert_eq!(s.core_ranks(j), t.core_ranks(i));
        assert_eq!(s.value(j, 0).to_bits(), t.value(i, 0).to_bits());
    }
}

#[test]
fn table_sorted_and_primitive() {
    let rep = schottky(0);
    let s = ClassSpectrum::single(&rep, &a1(), 8).unwrap();
    assert_eq!(s.skipped(), 0);
    let p = s.base_periods();
    assert!(p.windows(2).all(|w| w[0] <= w[1]));
    assert!(p.iter().all(|&x| x > 0.0));
    let mut seen = std::collections::HashSet::new();
    for i in 0..s.len() {
        let c = s.class(i);
        assert!(c.is_primitive());
        assert!(seen.insert(c.to_string()));
        assert_eq!(crate::words::ConjClass::of(c.core()), c);
    }
    // a^n has a1-period 3n for the symmetric fixture
    let a = (0..s.len()).find(|&i| s.class(i).to_string() == "a").unwrap();
    assert!((s.value(a, 0) - 3.0).abs() < 1e-12);
}

#[test]
fn csv_round_trip() {
    let rep = schottky(0);
    let eta = schottky(1);
    let s = ClassSpectrum::build(&[&rep, &eta], &[(0, a1()), (1, a1())], 4).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "class,core_length,rep0:a1,rep1:a1");
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], s.class(i).to_string());
        assert_eq!(f[1].parse::<usize>().unwrap(), s.core_len(i));
        for c in 0..2 {
            let v: f64 = f[2 + c].parse().unwrap();
            assert_eq!(v.to_bits(), s.value(i, c).to_bits());
        }
    }
}

#[test]
fn growth_matches_dirichlet_on_schottky() {
    let rep = schottky(0);
    let spec = ClassSpectrum::single(&rep, &a1(), 13).unwrap();
    let g = entropy_growth(&spec).unwrap();
    let d = exponent_dirichlet(&rep, &a1(), 10).unwrap();
    assert_eq!(g.windows.len(), 3);
    assert!(g.spread >= 0.0 && d.spread >= 0.0);
    assert!((g.value - d.value).abs() < 2e-2, "{} vs {}", g.value, d.value);
    assert!(d.spread < 1e-6);
}

#[test]
fn growth_needs_enough_classes() {
    let rep = schottky(0);
    let spec = ClassSpectrum::single(&rep, &a1(), 4).unwrap();
    assert!(matches!(entropy_growth(&spec), Err(Error::TooFewClasses { .. })));
}

#[test]
fn cyclic_growth_vanishes() {
    let rep = fixtures::cyclic().build().unwrap();
    let mut last = f64::INFINITY;
    for l in [400usize, 1600] {
        let s = ClassSpectrum::build_with(&[&rep], &[(0, a1())], l, false).unwrap();
        let e = entropy_growth(&s).unwrap().value;
        assert!(e.abs() < last);
        last = e.abs();
    }
    assert!(last < 2e-3);
}

#[test]
fn dirichlet_scales_inversely() {
    let rep = schottky(2);
    let shells = ElementShells::build(&rep, &a1(), 8).unwrap();
    let scaled = ElementShells::build(&rep, &a1().scaled(2.5), 8).unwrap();
    let h = shells.exponent().unwrap().value;
    let hc = scaled.exponent().unwrap().value;
    assert!((h / 2.5 - hc).abs() < 1e-12 * h);
}

#[test]
fn dirichlet_rejects_negative_functional() {
    let rep = schottky(0);
    let r = exponent_dirichlet(&rep, &a1().scaled(-1.0), 6);
    assert!(matches!(r, Err(Error::NotPositive(_))));
}

#[test]
fn ei_values() {
    // Ei(1) and Ei(50) reference values
    assert!((exponent::ln_ei(1.0) - 1.895_117_816_355_936_8f64.ln()).abs() < 1e-14);
    let ei50 = 1.058_563_689_713_169_1e20f64;
    assert!((exponent::ln_ei(50.0) - ei50.ln()).abs() < 1e-12);
    for x in [5.0, 20.0, 39.9, 40.1] {
        let series = {
            let (mut t, mut s) = (1.0f64, 0.0f64);
            for n in 1..400 {
                t *= x / n as f64;
                s += t / n as f64;
            }
            (0.577_215_664_901_532_9 + f64::ln(x) + s).ln()
        };
        assert!((exponent::ln_ei(x) - series).abs() < 1e-10, "{x}");
    }
}

struct PairFixture {
    spec: ClassSpectrum,
    h: f64,
}

fn pair(len: usize) -> PairFixture {
    let r = schottky(1);
    let e = real_schottky(3.3, 2.2, 0.15).unwrap();
    let spec = ClassSpectrum::build(&[&r, &e], &[(0, a1()), (1, a1())], len).unwrap();
    let h = exponent_dirichlet(&r, &a1(), 10).unwrap().value;
    PairFixture { spec, h }
}

#[test]
fn pressure_calibration() {
    let PairFixture { spec, h } = pair(13);
    let f = spec.base_periods();
    let zero = vec![0.0; f.len()];
    let p0 = pressure_orbit(&spec, &zero).unwrap();
    let e = entropy_growth(&spec).unwrap();
    assert_eq!(p0.value.to_bits(), e.value.to_bits());
    let ph: Vec<f64> = f.iter().map(|x| -h * x).collect();
    assert!(pressure_orbit(&spec, &ph).unwrap().value.abs() < 2e-2);
    let mut prev = f64::INFINITY;
    for s in [0.2, 0.3, 0.4, 0.5, 0.6] {
        let pot: Vec<f64> = f.iter().map(|x| -s * x).collect();
        let p = pressure_orbit(&spec, &pot).unwrap().value;
        assert!(p < prev);
        if s > h + 0.05 {
            assert!(p < 0.0);
        }
        prev = p;
    }
}

#[test]
fn pressure_derivative_is_gibbs_mean() {
    let PairFixture { spec, h } = pair(13);
    let f = spec.base_periods();
    let g = spec.column(1);
    let gm = gibbs_average(&spec, &g, h).unwrap().value;
    let dt = 0.05;
    let reach = g.iter().zip(&f).map(|(a, b)| a / b).fold(0.0f64, f64::max);
    let tilt = h + dt * reach;
    let p = |t: f64| {
        let pot: Vec<f64> = f.iter().zip(&g).map(|(x, y)| -h * x + t * y).collect();
        pressure_orbit_tilted(&spec, &pot, tilt).unwrap().value
    };
    let der = (p(dt) - p(-dt)) / (2.0 * dt);
    assert!((der - gm).abs() < 2e-2, "{der} vs {gm}");
}

#[test]
fn variance_signs() {
    let PairFixture { spec, h } = pair(12);
    let g = spec.column(1);
    let v = variance(&spec, &g, h, 0.2).unwrap();
    assert!(v.value > -1e-3);
    assert!(v.value > 1e-2, "{}", v.value);
    let f = spec.base_periods();
    let prop: Vec<f64> = f.iter().map(|x| 1.7 * x).collect();
    let w = variance(&spec, &prop, h, 0.2).unwrap();
    assert!(w.value.abs() < 1e-6, "{}", w.value);
    assert!((w.mean - 1.7).abs() < 1e-13);
}

#[test]
fn gibbs_ratio_forms() {
    let PairFixture { spec, h } = pair(10);
    let f = spec.base_periods();
    assert_eq!(gibbs_average(&spec, &f, h).unwrap().value, 1.0);
    let g: Vec<f64> = f.iter().map(|x| 3.0 * x).collect();
    assert!((gibbs_average(&spec, &g, h).unwrap().value - 3.0).abs() < 1e-14);
}

#[test]
fn intersection_basics() {
    let PairFixture { spec, h } = pair(12);
    let f = spec.base_periods();
    let i = intersection(&spec, &f, h).unwrap();
    assert_eq!(i.value, 1.0);
    assert_eq!(i.spread, 0.0);
    let doubled: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
    assert_eq!(intersection(&spec, &doubled, h).unwrap().value, 2.0);
    let g = spec.column(1);
    let ig = intersection(&spec, &g, h).unwrap();
    assert!((ig.value - ig.gibbs).abs() < 5e-3 + ig.spread);
    let mut bad = g.clone();
    bad[3] = -1.0;
    assert!(matches!(
        intersection(&spec, &bad, h),
        Err(Error::NotPositiveComparison(_))
    ));
}

#[test]
fn renormalized_intersection_properties() {
    let PairFixture { spec, h } = pair(12);
    let f = spec.base_periods();
    let same = renormalized_intersection(&spec, &f, h, h).unwrap();
    assert_eq!(same.value, 1.0);
    let eta = real_schottky(3.3, 2.2, 0.15).unwrap();
    let he = exponent_dirichlet(&eta, &a1(), 10).unwrap().value;
    let g = spec.column(1);
    let j = renormalized_intersection(&spec, &g, h, he).unwrap();
    assert!(j.value >= 1.0 - 1e-3, "{}", j.value);
    // phi -> c phi on both sides
    let c = 2.0;
    let fc: Vec<f64> = f.iter().map(|x| c * x).collect();
    let gc: Vec<f64> = g.iter().map(|x| c * x).collect();
    let rows = (0..spec.len())
        .map(|i| (spec.core_ranks(i).to_vec(), vec![fc[i], gc[i]]))
        .collect();
    let sc = ClassSpectrum::from_rows(2, spec.max_len(), &["f", "g"], rows).unwrap();
    let jc = renormalized_intersection(&sc, &sc.column(1), h / c, he / c).unwrap();
    assert!((jc.value - j.value).abs() < 1e-12);
    assert!(renormalized_intersection(&spec, &g, 0.0, he).is_err());
}

// rows above 95% of the largest period get full-length cores, which puts
// the completeness horizon there
fn synthetic(periods: &[f64]) -> ClassSpectrum {
    let top = 0.95 * periods.iter().copied().fold(0.0, f64::max);
    let rows = periods
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut w = (i as u32).to_le_bytes().to_vec();
            if p < top {
                w.pop();
            }
            (w, vec![p])
        })
        .collect();
    ClassSpectrum::from_rows(2, 4, &["f"], rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn growth_scaling_and_permutation(seed in 0u64..1000, c in 0.3f64..4.0) {
        use rand::{Rng, SeedableRng, seq::SliceRandom};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // periods with density ~ exp(t)/t
        let mut p: Vec<f64> = (0..3000)
            .map(|_| 1.0 + (1.0 + rng.gen::<f64>() * 3000.0).ln() * 1.3)
            .collect();
        let t = 0.95 * p.iter().copied().fold(0.0, f64::max);
        let e = entropy_of_periods(&p, t).unwrap().value;
        let scaled: Vec<f64> = p.iter().map(|x| x * c).collect();
        let es = entropy_of_periods(&scaled, t * c).unwrap().value;
        prop_assert!((es - e / c).abs() < 1e-9 * e.abs().max(1.0));
        p.shuffle(&mut rng);
        prop_assert_eq!(entropy_of_periods(&p, t).unwrap().value.to_bits(), e.to_bits());
    }

    #[test]
    fn staircase_and_pressure_monotone(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<f64> = (0..2000)
            .map(|_| 1.0 + (1.0 + rng.gen::<f64>() * 2000.0).ln() * 2.0)
            .collect();
        let s = synthetic(&p);
        let mut last = 0;
        for j in 0..100 {
            let n = s.count_le(j as f64 * 0.2);
            prop_assert!(n >= last);
            last = n;
        }
        let f = s.base_periods();
        let mut prev = f64::INFINITY;
        for sv in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let pot: Vec<f64> = f.iter().map(|x| -sv * x).collect();
            let v = pressure_orbit(&s, &pot).unwrap().value;
            prop_assert!(v < prev);
            prev = v;
        }
    }
}
