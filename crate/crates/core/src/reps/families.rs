//! Built-in families: real two-generator Schottky groups, complex bending
//! deformations and nodewise lifts.

use serde::{Deserialize, Serialize};

use super::RepPoint;
use crate::matlin::{ProjMatrix, C64};
use crate::{Error, Result};

/// Real Schottky group in `PSL_2(R)` with hyperbolic generators of
/// translation lengths `la`, `lb`.
///
/// The axis of `a` has endpoints `+-w`, the axis of `b` has endpoints
/// `+-1/w`, with `w = sqrt(kappa)`; `kappa` is the cross-ratio parameter
/// of the four endpoints. The isometric circles are disjoint exactly when
/// `kappa < tanh(la/4) tanh(lb/4)`.
pub fn real_schottky(la: f64, lb: f64, kappa: f64) -> Result<RepPoint> {
    if !(la > 0.0 && lb > 0.0) {
        return Err(Error::OutOfRange(format!(
            "translation lengths must be positive, got {la}, {lb}"
        )));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfRange(format!("kappa must lie in (0,1), got {kappa}")));
    }
    let w = kappa.sqrt();
    let (ca, sa) = ((la / 2.0).cosh(), (la / 2.0).sinh());
    let (cb, sb) = ((lb / 2.0).cosh(), (lb / 2.0).sinh());
    let a = ProjMatrix::from_real(2, &[ca, sa * w, sa / w, ca])?;
    let b = ProjMatrix::from_real(2, &[cb, -sb / w, -sb * w, cb])?;
    Ok(RepPoint::with_meta(vec![a, b], "schottky", C64::new(0.0, 0.0))?)
}

/// Conjugate the second generator by `exp(zX)`, `X = diag(1/2, -1/2)`.
/// Entries are holomorphic in `z`; a real base gives conjugation symmetry.
pub fn bending(base: &RepPoint, z: C64) -> Result<RepPoint> {
    if base.dim() != 2 || base.rank() != 2 {
        return Err(Error::DimensionMismatch(
            "bending acts on two-generator representations in dimension 2".into(),
        ));
    }
    let e = base.generators()[1].entries();
    let ls = base.generators()[1].log_scale().exp();
    let ez = z.exp();
    let b = ProjMatrix::new(
        2,
        vec![e[0] * ls, e[1] * ls * ez, e[2] * ls / ez, e[3] * ls],
    )?;
    RepPoint::with_meta(vec![base.generators()[0].clone(), b], "bending", z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    Sym,
    Wedge,
}

/// Apply `Sym^{d-1}` (`param = d`) or `wedge^k` (`param = k`) to every generator.
pub fn lift(rep: &RepPoint, kind: LiftKind, param: usize) -> Result<RepPoint> {
    let gens = rep
        .generators()
        .iter()
        .map(|g| match kind {
            LiftKind::Sym => g.sym_power(param),
            LiftKind::Wedge => g.wedge(param),
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match kind {
        LiftKind::Sym => format!("sym{param}({})", rep.family()),
        LiftKind::Wedge => format!("wedge{param}({})", rep.family()),
    };
    RepPoint::with_meta(gens, &name, rep.param())
}

/// Serializable family description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    RealSchottky {
        la: f64,
        lb: f64,
        kappa: f64,
    },
    Bending {
        la: f64,
        lb: f64,
        kappa: f64,
        /// `[re, im]`
        z: [f64; 2],
    },
    Lift {
        base: Box<FamilyKind>,
        lift: LiftKind,
        param: usize,
    },
    Cyclic {
        /// translation length of the single generator `diag(e^{l/2}, e^{-l/2})`
        length: f64,
    },
    Unipotent {
        lb: f64,
    },
    PlusTrivial {
        base: Box<FamilyKind>,
    },
    Matrices {
        dim: usize,
        /// row-major `[re, im]` pairs per generator
        generators: Vec<Vec<[f64; 2]>>,
    },
}

impl FamilyKind {
    /// Family evaluated at a complex parameter offset `z` (only bending
    /// families depend on it; the offset is added to their base `z`).
    pub fn at(&self, dz: C64) -> Result<RepPoint> {
        match self {
            FamilyKind::RealSchottky { la, lb, kappa } => real_schottky(*la, *lb, *kappa),
            FamilyKind::Bending { la, lb, kappa, z } => {
                let base = real_schottky(*la, *lb, *kappa)?;
                bending(&base, C64::new(z[0], z[1]) + dz)
            }
            FamilyKind::Lift { base, lift: k, param } => lift(&base.at(dz)?, *k, *param),
            FamilyKind::Cyclic { length } => {
                let h = (length / 2.0).exp();
                let g = ProjMatrix::from_real(2, &[h, 0.0, 0.0, 1.0 / h])?;
                RepPoint::with_meta(vec![g], "cyclic", C64::new(0.0, 0.0))
            }
            FamilyKind::Unipotent { lb } => {
                let base = real_schottky(*lb, *lb, 0.25)?;
                let u = ProjMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0])?;
                RepPoint::with_meta(
                    vec![u, base.generators()[1].clone()],
                    "unipotent",
                    C64::new(0.0, 0.0),
                )
            }
            FamilyKind::PlusTrivial { base } => base.at(dz)?.plus_trivial(),
            FamilyKind::Matrices { dim, generators } => {
                let gens = generators
                    .iter()
                    .map(|g| {
                        ProjMatrix::new(*dim, g.iter().map(|p| C64::new(p[0], p[1])).collect())
                    })
                    .collect::<Result<Vec<_>>>()?;
                RepPoint::new(gens)
            }
        }
    }

    pub fn build(&self) -> Result<RepPoint> {
        self.at(C64::new(0.0, 0.0))
    }

    /// Whether generator entries depend holomorphically on the offset.
    pub fn is_holomorphic(&self) -> bool {
        true
    }

    /// Whether `rho_{conj z} = conj(rho_z)` for real offsets of a real base.
    pub fn is_conj_symmetric(&self) -> bool {
        match self {
            FamilyKind::Bending { z, .. } => z[1] == 0.0,
            FamilyKind::Lift { base, .. } | FamilyKind::PlusTrivial { base } => {
                base.is_conj_symmetric()
            }
            FamilyKind::Matrices { generators, .. } => {
                generators.iter().flatten().all(|p| p[1] == 0.0)
            }
            _ => true,
        }
    }
}

/// Convenience constructor by kind name, mirroring [`FamilyKind`].
pub fn schottky_family(kind: &FamilyKind) -> Result<RepPoint> {
    kind.build()
}
