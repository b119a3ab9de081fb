//! Bundled test families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matlin::C64;
use crate::reps::{grid_builder, FamilyKind, LiftKind, ParamGrid};
use crate::Result;

/// `(name, la, lb, kappa)` of the real Schottky fixtures.
pub const REAL_SCHOTTKY: [(&str, f64, f64, f64); 3] = [
    ("schottky-symmetric", 3.0, 3.0, 0.25),
    ("schottky-skew", 2.5, 3.5, 0.2),
    ("schottky-thin", 2.0, 2.6, 0.1),
];

/// Imaginary bending of the symmetric fixture.
pub const COMPLEX_BEND: f64 = 0.8;

/// Default grid spacing and half-width for the bending grid.
pub const GRID_STEP: f64 = 0.1;
pub const GRID_HALF: usize = 2;

pub fn real_schottky(i: usize) -> FamilyKind {
    let (_, la, lb, kappa) = REAL_SCHOTTKY[i];
    FamilyKind::RealSchottky { la, lb, kappa }
}

pub fn complex_schottky() -> FamilyKind {
    let (_, la, lb, kappa) = REAL_SCHOTTKY[0];
    FamilyKind::Bending {
        la,
        lb,
        kappa,
        z: [0.0, COMPLEX_BEND],
    }
}

/// Bending family through the symmetric fixture, centred on the real locus.
pub fn bending_family() -> FamilyKind {
    let (_, la, lb, kappa) = REAL_SCHOTTKY[0];
    FamilyKind::Bending {
        la,
        lb,
        kappa,
        z: [0.0, 0.0],
    }
}

pub fn sym_lift(base: FamilyKind, d: usize) -> FamilyKind {
    FamilyKind::Lift {
        base: Box::new(base),
        lift: LiftKind::Sym,
        param: d,
    }
}

pub fn cyclic() -> FamilyKind {
    FamilyKind::Cyclic { length: 2.0 }
}

/// A parabolic first generator: not Anosov.
pub fn unipotent() -> FamilyKind {
    FamilyKind::Unipotent { lb: 3.0 }
}

/// All named fixtures.
pub fn named() -> Vec<(String, FamilyKind)> {
    let mut v: Vec<(String, FamilyKind)> = REAL_SCHOTTKY
        .iter()
        .enumerate()
        .map(|(i, f)| (f.0.to_string(), real_schottky(i)))
        .collect();
    v.push(("schottky-complex".into(), complex_schottky()));
    v.push(("bending".into(), bending_family()));
    v.push(("sym4-schottky".into(), sym_lift(real_schottky(0), 4)));
    v.push(("cyclic".into(), cyclic()));
    v.push(("unipotent".into(), unipotent()));
    v
}

pub fn by_name(name: &str) -> Option<FamilyKind> {
    named().into_iter().find(|(n, _)| n == name).map(|(_, f)| f)
}

/// Grid of the bending family around `z = 0`.
pub fn bending_grid(step: f64, half: usize) -> Result<ParamGrid> {
    grid_builder(&bending_family(), C64::new(0.0, 0.0), step, step, half)
}

/// Same grid with every node lifted by `Sym^3`.
pub fn sym3_bending_grid(step: f64, half: usize) -> Result<ParamGrid> {
    grid_builder(
        &sym_lift(bending_family(), 4),
        C64::new(0.0, 0.0),
        step,
        step,
        half,
    )
}

/// Random real Schottky parameters with disjoint isometric circles:
/// `la, lb` uniform in `[2, 4]`, `kappa` uniform in `[0.05, 0.8] * bound`.
pub fn random_real_schottky(seed: u64, count: usize) -> Vec<FamilyKind> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let la: f64 = rng.gen_range(2.0..4.0);
            let lb: f64 = rng.gen_range(2.0..4.0);
            let bound = (la / 4.0).tanh() * (lb / 4.0).tanh();
            let kappa = bound * rng.gen_range(0.05..0.8);
            FamilyKind::RealSchottky { la, lb, kappa }
        })
        .collect()
}
