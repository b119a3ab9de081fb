//! Acceptance run: each criterion prints one PASS/FAIL line with its
//! measured values and runtime; the process fails if any criterion fails.
//! Pass criterion numbers as arguments to run a subset.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anosov_core::bowen::{
    bowen_dimension, box_dimension, default_scale, sample_limit_set, CloudMode, SchottkyData,
};
use anosov_core::calculus::{
    grid_fields, master_identity_check, pluriharmonicity_residual, Axis, CalculusSettings,
    Stencil,
};
use anosov_core::fixtures;
use anosov_core::matlin::{cartan, jordan};
use anosov_core::reps::{
    anosov_certificate, lift, LiftKind, DEFAULT_C_MAX, DEFAULT_MU_MIN,
};
use anosov_core::spectrum::{
    entropy_growth, exponent_dirichlet, gibbs_average, intersection, pressure_orbit,
    pressure_orbit_tilted, variance, ClassSpectrum,
};
use anosov_core::{ProjMatrix, RepPoint, WeightFunctional, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Core length of class tables (desk scale).
const CLASS_LEN: usize = 16;
/// Word length of Dirichlet shells.
const ELEMENT_LEN: usize = 12;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn a1(d: usize) -> WeightFunctional {
    WeightFunctional::root(d, 1).unwrap()
}

fn settings() -> CalculusSettings {
    CalculusSettings {
        class_len: CLASS_LEN,
        element_len: ELEMENT_LEN,
        ..Default::default()
    }
}

fn dirichlet(rep: &RepPoint, phi: &WeightFunctional) -> f64 {
    exponent_dirichlet(rep, phi, ELEMENT_LEN).unwrap().value
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> ProjMatrix {
    let e = (0..d * d)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ProjMatrix::new(d, e).unwrap()
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ProjMatrix {
    let m = random_matrix(rng, d);
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for j in 0..d {
        let mut v: Vec<C64> = (0..d).map(|i| m.get(i, j)).collect();
        for u in &cols {
            let p: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    let e = (0..d * d).map(|k| cols[k % d][k / d]).collect();
    ProjMatrix::new(d, e).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 6];
    for n in 0..100 {
        let d = 2 + n % 4;
        let g = random_matrix(&mut rng, d);
        let h = random_matrix(&mut rng, d);
        let scale = 1.0 + cartan(&g).norm();
        let jg = jordan(&g).unwrap();
        let conj = jordan(&g.conjugate_by(&h)).unwrap();
        worst[0] = worst[0].max(max_diff(jg.coords(), conj.coords()) / scale);
        let (u, v) = (random_unitary(&mut rng, d), random_unitary(&mut rng, d));
        let moved = cartan(&u.mul(&g).mul(&v));
        worst[1] = worst[1].max(max_diff(cartan(&g).coords(), moved.coords()) / scale);
        let cube = jordan(&g.mul(&g).mul(&g)).unwrap();
        let tripled: Vec<f64> = jg.coords().iter().map(|x| 3.0 * x).collect();
        worst[2] = worst[2].max(max_diff(cube.coords(), &tripled) / (3.0 * scale));
        let inv = cartan(&g.inverse());
        let rev: Vec<f64> = cartan(&g).coords().iter().rev().map(|x| -x).collect();
        worst[3] = worst[3].max(max_diff(inv.coords(), &rev) / scale);
        for k in 1..d {
            let w = g.wedge(k).unwrap();
            let c = (cartan(&w).omega(1) - cartan(&g).omega(k)).abs();
            let j = (jordan(&w).unwrap().omega(1) - jg.omega(k)).abs();
            worst[4] = worst[4].max(c.max(j) / (k as f64 * scale));
        }
        let two = random_matrix(&mut rng, 2);
        let base = jordan(&two).unwrap().root(1);
        let lifted = jordan(&two.sym_power(d + 1).unwrap()).unwrap();
        for k in 1..=d {
            worst[5] = worst[5].max((lifted.root(k) - base).abs() / (1.0 + base.abs()));
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    verdict(
        max < 1e-9,
        format!(
            "max relative error {max:.2e} (conj {:.1e}, unitary {:.1e}, powers {:.1e}, inverse {:.1e}, wedge {:.1e}, sym {:.1e}) over 100 matrices, d = 2..5",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, f) in fixtures::REAL_SCHOTTKY.iter().enumerate() {
        let rep = fixtures::real_schottky(i).build().unwrap();
        let g = entropy_growth(&ClassSpectrum::single(&rep, &a1(2), CLASS_LEN).unwrap())
            .unwrap()
            .value;
        let d = dirichlet(&rep, &a1(2));
        pass &= (g - d).abs() < 2e-2;
        parts.push(format!("{} growth {g:.5} dirichlet {d:.5}", f.0));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, fam) in [
        ("schottky-symmetric", fixtures::real_schottky(0)),
        ("schottky-complex", fixtures::complex_schottky()),
    ] {
        let rep = fam.build().unwrap();
        let b = bowen_dimension(&SchottkyData::from_rep(&rep).unwrap(), 7, 1e-10)
            .unwrap()
            .value;
        let h = dirichlet(&rep, &a1(2));
        let cloud = sample_limit_set(&rep, 11, CloudMode::Rotations, None).unwrap();
        let boxes = box_dimension(&cloud, default_scale(&cloud)).unwrap().value;
        pass &= (b - h).abs() < 1e-2 && (boxes - h).abs() < 5e-2;
        parts.push(format!(
            "{name} bowen {b:.5} exponent {h:.5} box {boxes:.4} ({} points)",
            cloud.points.len()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_4() -> Verdict {
    let base = fixtures::real_schottky(0).build().unwrap();
    let h = dirichlet(&base, &a1(2));
    let mut parts = vec![format!("base {h:.5}")];
    let mut pass = true;
    for d in [3, 4, 5] {
        let l = lift(&base, LiftKind::Sym, d).unwrap();
        let hd = dirichlet(&l, &a1(d));
        let g = entropy_growth(&ClassSpectrum::single(&l, &a1(d), CLASS_LEN - 2).unwrap())
            .unwrap()
            .value;
        pass &= (hd - h).abs() < 2e-2 && (g - h).abs() < 2e-2;
        parts.push(format!("d={d} dirichlet {hd:.5} growth {g:.5}"));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_5() -> Verdict {
    let r = fixtures::real_schottky(1).build().unwrap();
    let e = anosov_core::reps::real_schottky(3.3, 2.2, 0.15).unwrap();
    let spec = ClassSpectrum::build(&[&r, &e], &[(0, a1(2)), (1, a1(2))], CLASS_LEN - 2).unwrap();
    let h = dirichlet(&r, &a1(2));
    let f = spec.base_periods();
    let g = spec.column(1);
    let pot: Vec<f64> = f.iter().map(|x| -h * x).collect();
    let p = pressure_orbit(&spec, &pot).unwrap().value;
    let gm = gibbs_average(&spec, &g, h).unwrap().value;
    let dt = 0.05;
    let reach = g.iter().zip(&f).map(|(a, b)| a / b).fold(0.0f64, f64::max);
    let tilt = h + dt * reach;
    let at = |t: f64| {
        let pot: Vec<f64> = f.iter().zip(&g).map(|(x, y)| -h * x + t * y).collect();
        pressure_orbit_tilted(&spec, &pot, tilt).unwrap().value
    };
    let der = (at(dt) - at(-dt)) / (2.0 * dt);
    let var = variance(&spec, &g, h, 0.2).unwrap().value;
    verdict(
        p.abs() < 2e-2 && (der - gm).abs() < 2e-2 && var >= -1e-3,
        format!("P(-hf) {p:.2e}; dP {der:.5} vs Gibbs mean {gm:.5}; variance {var:.4e}"),
    )
}

fn criterion_6() -> Verdict {
    let rep = fixtures::real_schottky(0).build().unwrap();
    let own = ClassSpectrum::single(&rep, &a1(2), CLASS_LEN - 4).unwrap();
    let h = dirichlet(&rep, &a1(2));
    let self_i = intersection(&own, &own.column(0), h).unwrap().value;
    let mut min_j = f64::INFINITY;
    let mut pairs = 0;
    let mut rejected = 0;
    let fams = fixtures::random_real_schottky(17, 60);
    for pair in fams.chunks(2) {
        if pairs == 20 {
            break;
        }
        let (a, b) = (pair[0].build().unwrap(), pair[1].build().unwrap());
        let certified = [&a, &b].iter().all(|r| {
            anosov_certificate(r, &a1(2), 10, DEFAULT_MU_MIN, DEFAULT_C_MAX)
                .map(|c| c.pass)
                .unwrap_or(false)
        });
        if !certified {
            rejected += 1;
            continue;
        }
        let spec =
            ClassSpectrum::build(&[&a, &b], &[(0, a1(2)), (1, a1(2))], CLASS_LEN - 4).unwrap();
        let (ha, hb) = (dirichlet(&a, &a1(2)), dirichlet(&b, &a1(2)));
        let i = intersection(&spec, &spec.column(1), ha).unwrap().value;
        min_j = min_j.min(hb / ha * i);
        pairs += 1;
    }
    verdict(
        self_i == 1.0 && pairs == 20 && min_j >= 1.0 - 1e-3,
        format!("I(rho, rho) = {self_i}; min J {min_j:.5} over {pairs} certified pairs ({rejected} rejected)"),
    )
}

fn criterion_7() -> Verdict {
    let grid = fixtures::bending_grid(fixtures::GRID_STEP, fixtures::GRID_HALF).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["w1", "a1"] {
        let phi = WeightFunctional::parse(2, name).unwrap();
        let f = grid_fields(&grid, &phi, Stencil::Cross, &settings()).unwrap();
        let ps = f.pressure(Axis::S).unwrap().value;
        let pt = f.pressure(Axis::T).unwrap().value;
        pass &= pt.abs() < 0.05 * ps.abs();
        parts.push(format!("{name}: P(s) {ps:.5} P(t) {pt:.2e} ratio {:.3}", (pt / ps).abs()));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_8() -> Verdict {
    let phi = a1(2);
    let coarse = pluriharmonicity_residual(
        &fixtures::bending_grid(2.0 * fixtures::GRID_STEP, fixtures::GRID_HALF).unwrap(),
        &phi,
        &settings(),
    )
    .unwrap();
    let fine = pluriharmonicity_residual(
        &fixtures::bending_grid(fixtures::GRID_STEP, fixtures::GRID_HALF).unwrap(),
        &phi,
        &settings(),
    )
    .unwrap();
    verdict(
        fine.value < 0.05 && fine.value < coarse.value,
        format!(
            "residual {:.3e} at step {}, {:.3e} at step {}",
            fine.value,
            fixtures::GRID_STEP,
            coarse.value,
            2.0 * fixtures::GRID_STEP
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, grid) in [
        (
            "bending",
            fixtures::bending_grid(fixtures::GRID_STEP, fixtures::GRID_HALF).unwrap(),
        ),
        (
            "sym3 bending",
            fixtures::sym3_bending_grid(fixtures::GRID_STEP, fixtures::GRID_HALF).unwrap(),
        ),
    ] {
        let r = master_identity_check(&grid, &a1(grid.dim()), &settings()).unwrap();
        pass &= r.residual < 0.1 && r.sign_consistent && r.h_t == 0.0;
        parts.push(format!(
            "{name}: R {:.3e}, h_tt {:.5} vs h0 P - h_ss {:.5} (+2h_s^2/h0 {:.5}), sign {}",
            r.residual,
            r.h_tt,
            r.h0 * r.pressure_s.value - r.h_ss,
            2.0 * r.h_s * r.h_s / r.h0,
            if r.sign_consistent { "consistent" } else { "inconsistent" }
        ));
    }
    verdict(pass, parts.join("; "))
}

const COMMANDS: [&[&str]; 9] = [
    &["spectrum"],
    &["exponent"],
    &["intersect"],
    &["pressure"],
    &["dimension"],
    &["limitset"],
    &["verify", "identities"],
    &["verify", "certificates"],
    &["verify", "oracles"],
];

fn snapshot(dir: &Path, args: &[&str], fixture: &str, threads: usize) -> Vec<u8> {
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"family": "{fixture}", "other": "schottky-skew", "max_len": 8, "element_len": 8,
                "depth": 3, "cloud_len": 7, "grid_half": 1, "ppm": {{"width": 32, "height": 24}},
                "calculus": {{"class_len": 8, "element_len": 8, "certify_len": 6}}}}"#
        ),
    )
    .unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_anosov-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .unwrap();
    let mut snap = format!("{:?}\n", o.status.code()).into_bytes();
    snap.extend(o.stdout);
    snap.extend(o.stderr);
    if let Ok(rd) = std::fs::read_dir(&out) {
        let mut names: Vec<_> = rd.map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names {
            snap.extend(p.file_name().unwrap().to_string_lossy().as_bytes());
            snap.extend(std::fs::read(&p).unwrap());
        }
    }
    snap
}

fn criterion_10() -> Verdict {
    let mut runs = 0;
    let mut mismatches = Vec::new();
    let mut codes = std::collections::BTreeMap::new();
    for (fixture, _) in fixtures::named() {
        for args in COMMANDS {
            let snaps: Vec<Vec<u8>> = [1, 4, 8]
                .iter()
                .map(|&t| {
                    let dir = tempfile::tempdir().unwrap();
                    runs += 1;
                    snapshot(dir.path(), args, &fixture, t)
                })
                .collect();
            *codes.entry(snaps[0][..8].to_vec()).or_insert(0) += 1;
            if snaps.iter().any(|s| s != &snaps[0]) {
                mismatches.push(format!("{fixture} {}", args.join(" ")));
            }
        }
    }
    let exits: Vec<String> = codes
        .iter()
        .map(|(k, v)| format!("{}x{v}", String::from_utf8_lossy(k).trim()))
        .collect();
    verdict(
        mismatches.is_empty(),
        format!(
            "{runs} runs, {} mismatching (exit statuses {}){}",
            mismatches.len(),
            exits.join(", "),
            if mismatches.is_empty() {
                String::new()
            } else {
                format!(": {}", mismatches.join(", "))
            }
        ),
    )
}

type Criterion = (usize, &'static str, u64, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "linear-algebra identities", 10, criterion_1),
    (2, "exponent cross-method", 120, criterion_2),
    (3, "dimension triple-check", 180, criterion_3),
    (4, "symmetric-lift invariance", 120, criterion_4),
    (5, "pressure calibration", 60, criterion_5),
    (6, "intersection properties", 180, criterion_6),
    (7, "imaginary-direction degeneracy", 240, criterion_7),
    (8, "pluriharmonicity", 300, criterion_8),
    (9, "curvature identity", 600, criterion_9),
    (10, "determinism across thread counts", 300, criterion_10),
];

fn main() {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (n, name, budget, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(budget);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {} [{:.1} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
