//! Anosov and hyperconvexity certificates, boundary-map samples, limit cone.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{PrefixStack, RepPoint, WeightFunctional};
use crate::matlin::{orthonormalize, singular_values, Projection, C64};
use crate::words::{
    conjugacy_classes, element_count, walk_elements, ConjClass, WordVisitor, DEFAULT_BUDGET,
};
use crate::{Error, Result};

pub const DEFAULT_MU_MIN: f64 = 0.05;
pub const DEFAULT_C_MAX: f64 = 20.0;
/// Minimal Jordan gap for an element to count as proximal.
pub const PROXIMAL_GAP: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct AnosovCertificate {
    /// `minima[n - 1] = min_{|g| = n} phi(cartan(rho(g)))`.
    pub minima: Vec<f64>,
    pub mu_hat: f64,
    pub c_hat: f64,
    pub mu_min: f64,
    pub c_max: f64,
    pub pass: bool,
}

struct MinVisitor<'a> {
    stack: PrefixStack<'a>,
    phi: &'a WeightFunctional,
    minima: Vec<f64>,
    err: Option<Error>,
}

impl WordVisitor for MinVisitor<'_> {
    fn push(&mut self, r: u8) {
        self.stack.push(r);
    }
    fn pop(&mut self) {
        self.stack.pop();
    }
    fn emit(&mut self, w: &[u8], _: bool) {
        match self.stack.functionals(Projection::Cartan, &[self.phi]) {
            Ok(v) => {
                let m = &mut self.minima[w.len() - 1];
                *m = m.min(v[0]);
            }
            Err(e) => {
                self.err.get_or_insert(e);
            }
        }
    }
}

/// Word-length growth certificate for `phi` along the Cartan projection.
///
/// The slope is a least-squares fit of the minima over `n in [ceil(L/2), L]`;
/// `c_hat` is the smallest constant with `m(n) >= mu_hat * n - c_hat` for all
/// `n <= L`. The run passes when `mu_hat >= mu_min` and `c_hat <= c_max`.
pub fn anosov_certificate(
    rep: &RepPoint,
    phi: &WeightFunctional,
    max_len: usize,
    mu_min: f64,
    c_max: f64,
) -> Result<AnosovCertificate> {
    if phi.dim() != rep.dim() {
        return Err(Error::DimensionMismatch(format!(
            "functional {} for a representation of dimension {}",
            phi.name(),
            rep.dim()
        )));
    }
    if max_len < 2 {
        return Err(Error::OutOfRange("certificate needs L >= 2".into()));
    }
    let k = rep.rank();
    let total: u128 = (1..=max_len).map(|n| element_count(k, n)).sum();
    if total > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: total,
            budget: DEFAULT_BUDGET,
        });
    }
    let shards: Vec<Result<Vec<f64>>> = (0..(2 * k) as u8)
        .into_par_iter()
        .map(|first| {
            let mut v = MinVisitor {
                stack: PrefixStack::for_functionals(rep, max_len, &[phi])?,
                phi,
                minima: vec![f64::INFINITY; max_len],
                err: None,
            };
            walk_elements(k, max_len, first, &mut v);
            match v.err {
                Some(e) => Err(e),
                None => Ok(v.minima),
            }
        })
        .collect();
    let mut minima = vec![f64::INFINITY; max_len];
    for s in shards {
        for (m, x) in minima.iter_mut().zip(s?) {
            *m = m.min(x);
        }
    }
    let lo = max_len.div_ceil(2);
    let xs: Vec<f64> = (lo..=max_len).map(|n| n as f64).collect();
    let ys: Vec<f64> = (lo..=max_len).map(|n| minima[n - 1]).collect();
    let (mu_hat, _) = linear_fit(&xs, &ys);
    let c_hat = minima
        .iter()
        .enumerate()
        .map(|(i, m)| mu_hat * (i + 1) as f64 - m)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    Ok(AnosovCertificate {
        pass: mu_hat >= mu_min && c_hat <= c_max,
        minima,
        mu_hat,
        c_hat,
        mu_min,
        c_max,
    })
}

/// Least-squares line `y = slope * x + intercept`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn check_gap(rep: &RepPoint, c: &ConjClass, m: usize) -> Result<()> {
    let lam = rep.jordan_of(c)?;
    let gap = lam.coords()[m - 1] - lam.coords()[m];
    if gap < PROXIMAL_GAP {
        return Err(Error::NonProximal(format!(
            "class {c}: Jordan gap {gap:.3e} between positions {m} and {}",
            m + 1
        )));
    }
    Ok(())
}

/// Attracting eigenline of `rho(core)`, as a unit vector whose largest
/// component is real and positive.
pub fn fixed_line(rep: &RepPoint, c: &ConjClass) -> Result<Vec<C64>> {
    check_gap(rep, c, 1)?;
    let basis = invariant_subspace(rep, &c.core().ranks(), 1);
    Ok(basis.into_iter().next().unwrap())
}

/// Orthonormal basis of the attracting `m`-plane of `rho(core)`.
pub fn attracting_subspace(rep: &RepPoint, c: &ConjClass, m: usize) -> Result<Vec<Vec<C64>>> {
    let d = rep.dim();
    if m < 1 || m >= d {
        return Err(Error::OutOfRange(format!("subspace dimension {m} in dimension {d}")));
    }
    check_gap(rep, c, m)?;
    Ok(invariant_subspace(rep, &c.core().ranks(), m))
}

/// Orthogonal iteration with the core matrix applied letter by letter, so
/// the iteration never forms the ill-conditioned product explicitly.
pub(crate) fn invariant_subspace(rep: &RepPoint, ranks: &[u8], m: usize) -> Vec<Vec<C64>> {
    let d = rep.dim();
    let mut q: Vec<Vec<C64>> = (0..m)
        .map(|j| {
            (0..d)
                .map(|i| C64::new(1.0 + 0.37 * ((i * 7 + j * 3) % 5) as f64, 0.11 * (i + j) as f64))
                .collect()
        })
        .collect();
    orthonormalize(&mut q);
    for _pass in 0..400 {
        let prev = q.clone();
        for &r in ranks.iter().rev() {
            let g = rep.letter(r);
            for col in q.iter_mut() {
                *col = g.apply(col);
            }
            orthonormalize(&mut q);
        }
        if subspace_distance(&prev, &q) < 1e-14 {
            break;
        }
    }
    if m == 1 {
        fix_phase(&mut q[0]);
    }
    q
}

fn fix_phase(v: &mut [C64]) {
    let (mut best, mut bi) = (0.0, 0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            bi = i;
        }
    }
    if best > 0.0 {
        let ph = v[bi].conj() / best;
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
}

/// Sine of the largest principal angle between two orthonormal frames.
pub(crate) fn subspace_distance(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for v in b {
        let mut r = v.clone();
        for u in a {
            let p: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
            for (ri, ui) in r.iter_mut().zip(u) {
                *ri -= p * ui;
            }
        }
        worst = worst.max(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    worst
}

#[derive(Clone, Debug)]
pub struct HyperconvexityReport {
    pub min_gap: f64,
    pub samples: usize,
    pub rejected: usize,
    pub classes: usize,
}

/// Sampled transversality of `xi1(x) + xi1(y)` against `xi^{d-2}(z)` over
/// triples of attracting fixed points of distinct primitive classes.
pub fn hyperconvexity_certificate(
    rep: &RepPoint,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<HyperconvexityReport> {
    let d = rep.dim();
    if d < 3 {
        return Err(Error::OutOfRange(format!(
            "hyperconvexity needs dimension >= 3, got {d}"
        )));
    }
    let classes = conjugacy_classes(rep.rank(), max_len, true, DEFAULT_BUDGET)?;
    let data: Vec<(Vec<C64>, Vec<Vec<C64>>)> = classes
        .par_iter()
        .filter_map(|c| {
            let line = fixed_line(rep, c).ok()?;
            let plane = attracting_subspace(rep, c, d - 2).ok()?;
            Some((line, plane))
        })
        .collect();
    if data.len() < 3 {
        return Err(Error::TooFewClasses {
            have: data.len(),
            need: 3,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut min_gap = f64::INFINITY;
    let mut rejected = 0;
    let mut taken = 0;
    while taken < samples {
        let pick: Vec<usize> = idx.choose_multiple(&mut rng, 3).copied().collect();
        let (x, y, z) = (&data[pick[0]].0, &data[pick[1]].0, &data[pick[2]].1);
        match triple_gap(x, y, z) {
            Some(g) => {
                min_gap = min_gap.min(g);
                taken += 1;
            }
            None => {
                rejected += 1;
                if rejected > 10 * samples + 100 {
                    break;
                }
            }
        }
    }
    Ok(HyperconvexityReport {
        min_gap,
        samples: taken,
        rejected,
        classes: data.len(),
    })
}

/// Smallest singular value of `[x, y, basis(z)]`, or `None` if the two lines
/// coincide numerically.
pub(crate) fn triple_gap(x: &[C64], y: &[C64], z: &[Vec<C64>]) -> Option<f64> {
    let d = x.len();
    let ip: C64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    if (1.0 - ip.norm()).abs() < 1e-12 {
        return None;
    }
    let mut cols: Vec<&[C64]> = vec![x, y];
    cols.extend(z.iter().map(|v| v.as_slice()));
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..d {
            m[i * d + j] = col[i];
        }
    }
    Some(*singular_values(d, &m).last().unwrap())
}

#[derive(Clone, Debug)]
pub struct LimitCone {
    /// `lambda / |lambda|` for every primitive class of length `<= L`.
    pub directions: Vec<Vec<f64>>,
    /// Minimum of each requested functional over the normalised directions.
    pub min_values: Vec<f64>,
}

pub fn limit_cone(
    rep: &RepPoint,
    max_len: usize,
    phis: &[&WeightFunctional],
) -> Result<LimitCone> {
    let classes = conjugacy_classes(rep.rank(), max_len, true, DEFAULT_BUDGET)?;
    let directions: Vec<Vec<f64>> = classes
        .par_iter()
        .map(|c| {
            let lam = rep.jordan_of(c)?;
            let n = lam.norm();
            Ok(lam.coords().iter().map(|x| x / n).collect())
        })
        .collect::<Result<_>>()?;
    let min_values = phis
        .iter()
        .map(|phi| {
            directions
                .iter()
                .map(|v| phi.coeffs().iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(LimitCone {
        directions,
        min_values,
    })
}
