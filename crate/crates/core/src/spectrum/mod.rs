//! Orbit-sum engines over period tables.
//!
//! A [`ClassSpectrum`] holds, for every primitive conjugacy class up to a
//! core length `L`, the periods `phi(lambda(rho(core)))` for a list of
//! (representation, functional) columns. Column 0 is the base: rows are
//! sorted by it and all counting is done against it.

mod exponent;
mod orbit;

pub use exponent::{
    entropy_growth, entropy_of_periods, exponent_dirichlet, ElementShells, ExponentEstimate,
    Method, WindowEstimate, WINDOW_FRACTIONS,
};
pub use orbit::{
    gibbs_average, intersection, pressure_orbit, pressure_orbit_tilted, renormalized_intersection,
    variance, GibbsEstimate, IntersectionEstimate, PressureEstimate, RenormalizedIntersection,
    VarianceEstimate,
};

use std::io::Write;

use rayon::prelude::*;

use crate::matlin::Projection;
use crate::reps::{PrefixStack, RepPoint, WeightFunctional};
use crate::words::{class_budget_estimate, walk_classes, ConjClass, WordVisitor, DEFAULT_BUDGET};
use crate::{Error, Result};

/// Largest tolerated fraction of skipped (non-proximal) classes.
pub const MAX_SKIP_RATIO: f64 = 1e-3;

/// One period column: a functional evaluated on a representation.
#[derive(Clone, Debug)]
pub struct Column {
    pub rep: usize,
    pub functional: WeightFunctional,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct ClassSpectrum {
    rank: usize,
    max_len: usize,
    columns: Vec<Column>,
    letters: Vec<u8>,
    offsets: Vec<u32>,
    values: Vec<f64>,
    skipped: usize,
}

#[derive(Default)]
struct Shard {
    letters: Vec<u8>,
    offsets: Vec<u32>,
    values: Vec<f64>,
    skipped: usize,
}

struct TableVisitor<'a> {
    stacks: Vec<PrefixStack<'a>>,
    phis: Vec<Vec<&'a WeightFunctional>>,
    ncols: usize,
    /// (rep, position in that rep's functional list) per column
    slots: Vec<(usize, usize)>,
    shard: Shard,
    buf: Vec<f64>,
    err: Option<Error>,
}

impl WordVisitor for TableVisitor<'_> {
    fn push(&mut self, r: u8) {
        for s in self.stacks.iter_mut() {
            s.push(r);
        }
    }

    fn pop(&mut self) {
        for s in self.stacks.iter_mut() {
            s.pop();
        }
    }

    fn emit(&mut self, w: &[u8], _: bool) {
        let mut per_rep = Vec::with_capacity(self.stacks.len());
        for (s, phis) in self.stacks.iter().zip(&self.phis) {
            match s.functionals(Projection::Jordan, phis) {
                Ok(v) => per_rep.push(v),
                Err(Error::EigenNonConvergence { .. }) => {
                    self.shard.skipped += 1;
                    return;
                }
                Err(e) => {
                    self.err.get_or_insert(e);
                    return;
                }
            }
        }
        self.buf.clear();
        for &(r, j) in &self.slots {
            self.buf.push(per_rep[r][j]);
        }
        let base = self.buf[0];
        if !(base.is_finite() && base > crate::reps::PROXIMAL_GAP)
            || self.buf.iter().any(|v| !v.is_finite())
        {
            self.shard.skipped += 1;
            return;
        }
        debug_assert_eq!(self.buf.len(), self.ncols);
        self.shard.letters.extend_from_slice(w);
        self.shard.offsets.push(self.shard.letters.len() as u32);
        self.shard.values.extend_from_slice(&self.buf);
    }
}

impl ClassSpectrum {
    /// Periods of every primitive class of core length `<= max_len`.
    /// `columns[i] = (rep index, functional)`; column 0 is the base.
    pub fn build(
        reps: &[&RepPoint],
        columns: &[(usize, WeightFunctional)],
        max_len: usize,
    ) -> Result<Self> {
        Self::build_with(reps, columns, max_len, true)
    }

    /// As [`ClassSpectrum::build`], optionally keeping proper powers.
    pub fn build_with(
        reps: &[&RepPoint],
        columns: &[(usize, WeightFunctional)],
        max_len: usize,
        primitive_only: bool,
    ) -> Result<Self> {
        if reps.is_empty() || columns.is_empty() {
            return Err(Error::OutOfRange("spectrum needs a representation and a column".into()));
        }
        let k = reps[0].rank();
        if reps.iter().any(|r| r.rank() != k) {
            return Err(Error::DimensionMismatch("representations of different ranks".into()));
        }
        if max_len < 1 {
            return Err(Error::OutOfRange("maximal length must be at least 1".into()));
        }
        let req = class_budget_estimate(k, max_len);
        if req > DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded {
                requested: req,
                budget: DEFAULT_BUDGET,
            });
        }
        for (r, phi) in columns {
            let rep = reps.get(*r).ok_or_else(|| {
                Error::OutOfRange(format!("column refers to representation {r}"))
            })?;
            if phi.dim() != rep.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "functional {} has dimension {}, representation {r} has {}",
                    phi.name(),
                    phi.dim(),
                    rep.dim()
                )));
            }
        }
        let mut per_rep: Vec<Vec<&WeightFunctional>> = vec![Vec::new(); reps.len()];
        let mut slots = Vec::with_capacity(columns.len());
        for (r, phi) in columns {
            slots.push((*r, per_rep[*r].len()));
            per_rep[*r].push(phi);
        }
        let shards: Vec<Result<Shard>> = (0..(2 * k) as u8)
            .into_par_iter()
            .map(|first| {
                let stacks = reps
                    .iter()
                    .zip(&per_rep)
                    .map(|(rep, phis)| PrefixStack::for_functionals(rep, max_len, phis))
                    .collect::<Result<Vec<_>>>()?;
                let mut v = TableVisitor {
                    stacks,
                    phis: per_rep.clone(),
                    ncols: columns.len(),
                    slots: slots.clone(),
                    shard: Shard::default(),
                    buf: Vec::with_capacity(columns.len()),
                    err: None,
                };
                walk_classes(k, max_len, first, primitive_only, &mut v);
                match v.err {
                    Some(e) => Err(e),
                    None => Ok(v.shard),
                }
            })
            .collect();
        let mut merged = Shard::default();
        for s in shards {
            let s = s?;
            let base = merged.letters.len() as u32;
            merged.letters.extend_from_slice(&s.letters);
            merged.offsets.extend(s.offsets.iter().map(|o| o + base));
            merged.values.extend_from_slice(&s.values);
            merged.skipped += s.skipped;
        }
        let ncols = columns.len();
        let n = merged.offsets.len();
        let total = n + merged.skipped;
        if total > 0 && merged.skipped as f64 > MAX_SKIP_RATIO * total as f64 {
            return Err(Error::TooManySkipped {
                skipped: merged.skipped,
                total,
            });
        }
        let start = |i: usize| if i == 0 { 0 } else { merged.offsets[i - 1] as usize };
        let core = |i: usize| &merged.letters[start(i)..merged.offsets[i] as usize];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            merged.values[a * ncols]
                .total_cmp(&merged.values[b * ncols])
                .then_with(|| core(a).len().cmp(&core(b).len()))
                .then_with(|| core(a).cmp(core(b)))
        });
        let mut letters = Vec::with_capacity(merged.letters.len());
        let mut offsets = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(merged.values.len());
        for &i in &order {
            letters.extend_from_slice(core(i));
            offsets.push(letters.len() as u32);
            values.extend_from_slice(&merged.values[i * ncols..(i + 1) * ncols]);
        }
        let columns = columns
            .iter()
            .map(|(r, phi)| Column {
                rep: *r,
                functional: phi.clone(),
                label: format!("rep{r}:{}", phi.name()),
            })
            .collect();
        Ok(ClassSpectrum {
            rank: k,
            max_len,
            columns,
            letters,
            offsets,
            values,
            skipped: merged.skipped,
        })
    }

    /// Single representation, single functional.
    pub fn single(rep: &RepPoint, phi: &WeightFunctional, max_len: usize) -> Result<Self> {
        Self::build(&[rep], &[(0, phi.clone())], max_len)
    }

    /// Table from explicit rows `(core ranks, periods)`; rows are sorted
    /// as in [`ClassSpectrum::build`]. Intended for synthetic period data.
    pub fn from_rows(
        rank: usize,
        max_len: usize,
        labels: &[&str],
        rows: Vec<(Vec<u8>, Vec<f64>)>,
    ) -> Result<Self> {
        let ncols = labels.len();
        let mut rows = rows;
        if let Some((_, v)) = rows.iter().find(|(_, v)| v.len() != ncols || !(v[0] > 0.0)) {
            return Err(Error::OutOfRange(format!(
                "row with {} values (expected {ncols}) or non-positive base {:?}",
                v.len(),
                v.first()
            )));
        }
        rows.sort_by(|a, b| {
            a.1[0]
                .total_cmp(&b.1[0])
                .then_with(|| a.0.len().cmp(&b.0.len()))
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut letters = Vec::new();
        let mut offsets = Vec::new();
        let mut values = Vec::new();
        for (w, v) in rows {
            letters.extend_from_slice(&w);
            offsets.push(letters.len() as u32);
            values.extend_from_slice(&v);
        }
        let columns = labels
            .iter()
            .map(|l| Column {
                rep: 0,
                functional: WeightFunctional::root(2, 1).unwrap(),
                label: l.to_string(),
            })
            .collect();
        Ok(ClassSpectrum {
            rank,
            max_len,
            columns,
            letters,
            offsets,
            values,
            skipped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn core_ranks(&self, i: usize) -> &[u8] {
        let s = if i == 0 { 0 } else { self.offsets[i - 1] as usize };
        &self.letters[s..self.offsets[i] as usize]
    }

    pub fn core_len(&self, i: usize) -> usize {
        self.core_ranks(i).len()
    }

    pub fn class(&self, i: usize) -> ConjClass {
        ConjClass::from_canonical(self.rank, self.core_ranks(i), true)
    }

    pub fn value(&self, i: usize, col: usize) -> f64 {
        self.values[i * self.ncols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, col)).collect()
    }

    /// Base periods, ascending.
    pub fn base_periods(&self) -> Vec<f64> {
        self.column(0)
    }

    /// Largest `T` below which the table contains every class of the base
    /// period: the smallest base period among classes of length exactly `L`.
    pub fn t_complete(&self) -> f64 {
        self.t_complete_for(0)
    }

    /// Same bound for the periods of another column.
    pub fn t_complete_for(&self, col: usize) -> f64 {
        (0..self.len())
            .filter(|&i| self.core_len(i) == self.max_len)
            .map(|i| self.value(i, col))
            .fold(f64::INFINITY, f64::min)
    }

    /// Rows with base period `<= t`: a prefix of the table.
    pub fn count_le(&self, t: f64) -> usize {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.value(mid, 0) <= t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// CSV with one row per class; periods with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "class,core_length")?;
        for c in &self.columns {
            write!(w, ",{}", c.label)?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{},{}", self.class(i), self.core_len(i))?;
            for c in 0..self.ncols() {
                write!(w, ",{:.16e}", self.value(i, c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
