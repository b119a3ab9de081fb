//! Representations of free groups into `PGL_d(C)`, weight functionals and
//! period evaluation.

mod certificates;
mod families;
mod grid;

pub use certificates::{
    anosov_certificate, attracting_subspace, fixed_line, hyperconvexity_certificate, limit_cone,
    AnosovCertificate, HyperconvexityReport, LimitCone, DEFAULT_C_MAX, DEFAULT_MU_MIN,
    PROXIMAL_GAP,
};
pub(crate) use certificates::{invariant_subspace, linear_fit};
pub use families::{bending, lift, real_schottky, schottky_family, FamilyKind, LiftKind};
pub use grid::{
    grid_builder, grid_to_json, load_grid, parse_grid, save_grid, GridGeometry, ParamGrid,
};

use std::fmt;

use crate::matlin::{
    cartan, jordan, log_top, matmul_into, omega_profile, CartanVector, ProductAccumulator,
    ProjMatrix, Projection, C64, GRADED_MAX_DIM, RENORM_EVERY,
};
use crate::words::{ConjClass, Word};
use crate::{Error, Result};

/// Which family of functionals a [`WeightFunctional`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionalKind {
    /// Fundamental weight `omega_k(x) = x_1 + ... + x_k`.
    Omega(usize),
    /// Simple root `a_k(x) = x_k - x_{k+1}`.
    Root(usize),
    Custom,
}

/// Linear functional on Cartan coordinates with mean-zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunctional {
    coeffs: Vec<f64>,
    kind: FunctionalKind,
    name: String,
}

impl WeightFunctional {
    pub fn omega(dim: usize, k: usize) -> Result<Self> {
        if k < 1 || k >= dim {
            return Err(Error::OutOfRange(format!("omega_{k} in dimension {dim}")));
        }
        let coeffs = (0..dim).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
        Ok(Self::build(coeffs, FunctionalKind::Omega(k), format!("omega{k}")))
    }

    pub fn root(dim: usize, k: usize) -> Result<Self> {
        if k < 1 || k >= dim {
            return Err(Error::OutOfRange(format!("a_{k} in dimension {dim}")));
        }
        let mut coeffs = vec![0.0; dim];
        coeffs[k - 1] = 1.0;
        coeffs[k] = -1.0;
        Ok(Self::build(coeffs, FunctionalKind::Root(k), format!("a{k}")))
    }

    pub fn custom(name: &str, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "custom functional {name:?} needs at least two finite coefficients"
            )));
        }
        Ok(Self::build(coeffs, FunctionalKind::Custom, name.to_string()))
    }

    fn build(mut coeffs: Vec<f64>, kind: FunctionalKind, name: String) -> Self {
        let mean = coeffs.iter().sum::<f64>() / coeffs.len() as f64;
        for c in coeffs.iter_mut() {
            *c -= mean;
        }
        WeightFunctional { coeffs, kind, name }
    }

    /// Parses `omega<k>`, `w<k>`, `a<k>`; also accepts `c*name` for a
    /// positive multiple.
    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((c, rest)) = s.split_once('*') {
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad functional scale in {s:?}")))?;
            return Ok(Self::parse(dim, rest)?.scaled(c));
        }
        let (kind, num) = if let Some(n) = s.strip_prefix("omega") {
            ('w', n)
        } else if let Some(n) = s.strip_prefix('w') {
            ('w', n)
        } else if let Some(n) = s.strip_prefix('a') {
            ('a', n)
        } else {
            return Err(Error::Parse(format!("unknown functional {s:?}")));
        };
        let k: usize = num
            .trim_start_matches('_')
            .parse()
            .map_err(|_| Error::Parse(format!("unknown functional {s:?}")))?;
        if kind == 'w' {
            Self::omega(dim, k)
        } else {
            Self::root(dim, k)
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightFunctional {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            kind: if c == 1.0 { self.kind } else { FunctionalKind::Custom },
            name: if c == 1.0 {
                self.name.clone()
            } else {
                format!("{c}*{}", self.name)
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kind(&self) -> FunctionalKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, v: &CartanVector) -> f64 {
        self.coeffs.iter().zip(v.coords()).map(|(a, b)| a * b).sum()
    }

    /// Coefficients in the fundamental weights: `phi = sum_k w_k omega_k` on
    /// mean-zero vectors, `w_k = c_k - c_{k+1}`.
    pub fn omega_weights(&self) -> Vec<f64> {
        self.coeffs.windows(2).map(|w| w[0] - w[1]).collect()
    }

    pub(crate) fn needed_omegas(&self) -> Vec<bool> {
        self.omega_weights().iter().map(|w| *w != 0.0).collect()
    }
}

impl fmt::Display for WeightFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Evaluates several functionals on one matrix, computing each needed
/// `omega_k` only once.
pub fn eval_functionals(
    g: &ProjMatrix,
    proj: Projection,
    phis: &[&WeightFunctional],
) -> Result<Vec<f64>> {
    let needed = needed_union(g.dim(), phis)?;
    let om = omega_profile(g, proj, &needed)?;
    Ok(combine(phis, &om))
}

fn needed_union(d: usize, phis: &[&WeightFunctional]) -> Result<Vec<bool>> {
    let mut needed = vec![false; d - 1];
    for phi in phis {
        if phi.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "functional {} has dimension {}, expected {d}",
                phi.name(),
                phi.dim()
            )));
        }
        for (n, w) in needed.iter_mut().zip(phi.needed_omegas()) {
            *n |= w;
        }
    }
    Ok(needed)
}

fn combine(phis: &[&WeightFunctional], om: &[f64]) -> Vec<f64> {
    phis.iter()
        .map(|phi| {
            phi.omega_weights()
                .iter()
                .zip(om)
                .filter(|(w, _)| **w != 0.0)
                .map(|(w, o)| w * o)
                .sum()
        })
        .collect()
}

/// Generator images in one exterior power `wedge^k`.
#[derive(Clone, Debug)]
struct Level {
    gens: Vec<ProjMatrix>,
    invs: Vec<ProjMatrix>,
}

impl Level {
    #[inline]
    fn letter(&self, r: u8) -> &ProjMatrix {
        let i = (r / 2) as usize;
        if r & 1 == 0 {
            &self.gens[i]
        } else {
            &self.invs[i]
        }
    }
}

/// A representation of the free group of rank `k` into `PGL_d(C)`.
///
/// For `3 <= d <= GRADED_MAX_DIM` the exterior powers of the generators are
/// cached, and `omega_k` of a word is computed from the product in
/// `wedge^k rho`. This keeps every coordinate of long products accurate.
#[derive(Clone, Debug)]
pub struct RepPoint {
    /// `levels[k-1]` is `wedge^k`; only `k = 1` when not graded.
    levels: Vec<Level>,
    family: String,
    param: C64,
}

impl RepPoint {
    pub fn new(gens: Vec<ProjMatrix>) -> Result<Self> {
        Self::with_meta(gens, "custom", C64::new(0.0, 0.0))
    }

    pub fn with_meta(gens: Vec<ProjMatrix>, family: &str, param: C64) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::OutOfRange("representation needs a generator".into()));
        }
        let d = gens[0].dim();
        if let Some(g) = gens.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch(format!(
                "generator dimensions {d} and {}",
                g.dim()
            )));
        }
        let invs: Vec<ProjMatrix> = gens.iter().map(|g| g.inverse()).collect();
        for (i, (g, h)) in gens.iter().zip(&invs).enumerate() {
            if !g.mul(h).is_identity(1e-10) {
                return Err(Error::DegenerateMatrix(format!(
                    "generator {} is too ill-conditioned to invert",
                    i + 1
                )));
            }
        }
        let mut levels = vec![Level { gens, invs }];
        if (3..=GRADED_MAX_DIM).contains(&d) {
            for k in 2..d {
                let base = &levels[0];
                let lg = base.gens.iter().map(|g| g.wedge_unchecked(k)).collect();
                let li = base.invs.iter().map(|g| g.wedge_unchecked(k)).collect();
                levels.push(Level { gens: lg, invs: li });
            }
        }
        Ok(RepPoint {
            levels,
            family: family.to_string(),
            param,
        })
    }

    pub fn rank(&self) -> usize {
        self.levels[0].gens.len()
    }

    pub fn dim(&self) -> usize {
        self.levels[0].gens[0].dim()
    }

    pub fn generators(&self) -> &[ProjMatrix] {
        &self.levels[0].gens
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn param(&self) -> C64 {
        self.param
    }

    fn graded(&self) -> bool {
        self.levels.len() > 1
    }

    /// Image of the letter with the given rank (see [`crate::words`]).
    #[inline]
    pub fn letter(&self, r: u8) -> &ProjMatrix {
        self.levels[0].letter(r)
    }

    pub fn evaluate(&self, w: &Word) -> ProjMatrix {
        assert!(w.rank() <= self.rank(), "word rank exceeds representation rank");
        self.evaluate_ranks(&w.ranks())
    }

    pub fn evaluate_ranks(&self, ranks: &[u8]) -> ProjMatrix {
        self.evaluate_level(0, ranks)
    }

    fn evaluate_level(&self, level: usize, ranks: &[u8]) -> ProjMatrix {
        let lv = &self.levels[level];
        let mut acc = ProductAccumulator::new(lv.gens[0].dim());
        for &r in ranks {
            acc.push(lv.letter(r));
        }
        acc.finish()
    }

    /// `omega_k` of the Cartan or Jordan projection of a word, for the `k`
    /// flagged in `needed` (length `d - 1`; other slots NaN).
    pub fn word_omegas(&self, ranks: &[u8], proj: Projection, needed: &[bool]) -> Result<Vec<f64>> {
        if !self.graded() {
            return omega_profile(&self.evaluate_ranks(ranks), proj, needed);
        }
        let mut out = vec![f64::NAN; needed.len()];
        for (k, n) in needed.iter().enumerate() {
            if *n {
                out[k] = log_top(&self.evaluate_level(k, ranks), proj)?;
            }
        }
        Ok(out)
    }

    /// Several functionals of the Cartan or Jordan projection of a word.
    pub fn word_functionals(
        &self,
        ranks: &[u8],
        proj: Projection,
        phis: &[&WeightFunctional],
    ) -> Result<Vec<f64>> {
        let needed = needed_union(self.dim(), phis)?;
        Ok(combine(phis, &self.word_omegas(ranks, proj, &needed)?))
    }

    /// `phi(lambda(rho(core)))`.
    pub fn period(&self, c: &ConjClass, phi: &WeightFunctional) -> Result<f64> {
        Ok(self.word_functionals(&c.core().ranks(), Projection::Jordan, &[phi])?[0])
    }

    /// Full Jordan projection of the class, from all `omega_k`.
    pub fn jordan_of(&self, c: &ConjClass) -> Result<CartanVector> {
        self.projection_of_word(&c.core().ranks(), Projection::Jordan)
    }

    pub fn projection_of_word(&self, ranks: &[u8], proj: Projection) -> Result<CartanVector> {
        let d = self.dim();
        if !self.graded() {
            let g = self.evaluate_ranks(ranks);
            return match proj {
                Projection::Cartan => Ok(cartan(&g)),
                Projection::Jordan => jordan(&g),
            };
        }
        let om = self.word_omegas(ranks, proj, &vec![true; d - 1])?;
        Ok(CartanVector::from_omegas(&om))
    }

    /// Conjugate every generator by `h`.
    pub fn conjugate(&self, h: &ProjMatrix) -> Result<RepPoint> {
        let gens = self.generators().iter().map(|g| g.conjugate_by(h)).collect();
        RepPoint::with_meta(gens, &self.family, self.param)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> RepPoint {
        RepPoint {
            levels: self
                .levels
                .iter()
                .map(|l| Level {
                    gens: l.gens.iter().map(|g| g.conj()).collect(),
                    invs: l.invs.iter().map(|g| g.conj()).collect(),
                })
                .collect(),
            family: self.family.clone(),
            param: self.param.conj(),
        }
    }

    /// Nodewise block sum with a second representation of the same rank.
    pub fn direct_sum(&self, other: &RepPoint) -> Result<RepPoint> {
        if other.rank() != self.rank() {
            return Err(Error::DimensionMismatch("direct sum of different ranks".into()));
        }
        let gens = self
            .generators()
            .iter()
            .zip(other.generators())
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        RepPoint::with_meta(gens, &format!("{}+{}", self.family, other.family), self.param)
    }

    /// `rho` summed with the trivial one-dimensional representation.
    pub fn plus_trivial(&self) -> Result<RepPoint> {
        let gens = self
            .generators()
            .iter()
            .map(|g| g.direct_sum(&ProjMatrix::identity(1)))
            .collect();
        RepPoint::with_meta(gens, &format!("{}+1", self.family), self.param)
    }

    pub fn with_param(mut self, family: &str, param: C64) -> Self {
        self.family = family.to_string();
        self.param = param;
        self
    }
}

/// Products along a depth-first word walk: one stack per required exterior
/// power, one slot per prefix length.
pub(crate) struct PrefixStack<'a> {
    rep: &'a RepPoint,
    /// (level index, matrix dimension, entries, log scales)
    stacks: Vec<(usize, usize, Vec<C64>, Vec<f64>)>,
    needed: Vec<bool>,
    depth: usize,
}

impl<'a> PrefixStack<'a> {
    /// `needed[k-1]` selects `omega_k`; ungraded representations keep the
    /// full product instead.
    pub(crate) fn new(rep: &'a RepPoint, max_len: usize, needed: &[bool]) -> Self {
        let levels: Vec<usize> = if rep.graded() {
            (0..needed.len()).filter(|&k| needed[k]).collect()
        } else {
            vec![0]
        };
        let stacks = levels
            .into_iter()
            .map(|l| {
                let m = rep.levels[l].gens[0].dim();
                let mut ent = vec![C64::new(0.0, 0.0); m * m * (max_len + 1)];
                for i in 0..m {
                    ent[i * m + i] = C64::new(1.0, 0.0);
                }
                (l, m, ent, vec![0.0; max_len + 1])
            })
            .collect();
        PrefixStack {
            rep,
            stacks,
            needed: needed.to_vec(),
            depth: 0,
        }
    }

    pub(crate) fn for_functionals(
        rep: &'a RepPoint,
        max_len: usize,
        phis: &[&WeightFunctional],
    ) -> Result<Self> {
        let needed = needed_union(rep.dim(), phis)?;
        Ok(Self::new(rep, max_len, &needed))
    }

    #[inline]
    pub(crate) fn push(&mut self, r: u8) {
        let depth = self.depth;
        for (l, m, ent, lss) in self.stacks.iter_mut() {
            let g = self.rep.levels[*l].letter(r);
            let d2 = *m * *m;
            let (head, tail) = ent.split_at_mut((depth + 1) * d2);
            let cur = &head[depth * d2..];
            let next = &mut tail[..d2];
            matmul_into(*m, cur, g.entries(), next);
            let mut ls = lss[depth] + g.log_scale();
            if (depth + 1) % RENORM_EVERY == 0 {
                let mx = next.iter().fold(0.0f64, |a, z| a.max(z.norm()));
                if mx > 0.0 && mx.is_finite() {
                    for z in next.iter_mut() {
                        *z /= mx;
                    }
                    ls += mx.ln();
                }
            }
            lss[depth + 1] = ls;
        }
        self.depth += 1;
    }

    #[inline]
    pub(crate) fn pop(&mut self) {
        self.depth -= 1;
    }

    fn top_of(&self, i: usize) -> ProjMatrix {
        let (_, m, ent, lss) = &self.stacks[i];
        let d2 = m * m;
        let e = ent[self.depth * d2..(self.depth + 1) * d2].to_vec();
        ProjMatrix::from_parts(*m, e, lss[self.depth])
    }

    /// `omega_k` of the current prefix for the `k` requested at construction.
    pub(crate) fn omegas(&self, proj: Projection) -> Result<Vec<f64>> {
        if !self.rep.graded() {
            return omega_profile(&self.top_of(0), proj, &self.needed);
        }
        let mut out = vec![f64::NAN; self.needed.len()];
        for (i, (l, ..)) in self.stacks.iter().enumerate() {
            out[*l] = log_top(&self.top_of(i), proj)?;
        }
        Ok(out)
    }

    pub(crate) fn functionals(&self, proj: Projection, phis: &[&WeightFunctional]) -> Result<Vec<f64>> {
        Ok(combine(phis, &self.omegas(proj)?))
    }
}

#[cfg(test)]
mod tests;
