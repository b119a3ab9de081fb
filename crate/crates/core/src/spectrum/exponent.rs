//! Growth-rate estimators: orbit counting and Dirichlet series over group
//! elements.

use rayon::prelude::*;
use serde::Serialize;

use super::ClassSpectrum;
use crate::matlin::Projection;
use crate::reps::{linear_fit, PrefixStack, RepPoint, WeightFunctional};
use crate::words::{element_count, walk_elements, WordVisitor, DEFAULT_BUDGET};
use crate::{Error, Result};

/// Nested fitting windows `[f * T, T]`, widest first.
pub const WINDOW_FRACTIONS: [f64; 3] = [1.0 / 2.0, 2.0 / 3.0, 3.0 / 4.0];
/// Minimal number of classes below the horizon for a counting estimate.
pub const MIN_CLASSES: usize = 500;
const SAMPLES: usize = 257;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Growth,
    Dirichlet,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowEstimate {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub method: Method,
    pub windows: Vec<WindowEstimate>,
    /// `max - min` over the window values.
    pub spread: f64,
    /// Period horizon (growth) or maximal word length (Dirichlet).
    pub horizon: f64,
    /// Classes or elements used.
    pub samples: usize,
}

pub(crate) struct GrowthFit {
    pub value: f64,
    pub windows: Vec<WindowEstimate>,
    pub spread: f64,
    pub used: usize,
}

/// Running `ln sum_{i <= j} exp(w_i)` for every prefix `j`.
pub(crate) fn prefix_logsumexp(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::new();
    let (mut m, mut s) = (f64::NEG_INFINITY, 0.0f64);
    for x in w {
        if x > m {
            s = if s == 0.0 { 1.0 } else { s * (m - x).exp() + 1.0 };
            m = x;
        } else {
            s += (x - m).exp();
        }
        out.push(m + s.ln());
    }
    out
}

/// `ln Ei(x)` for `x > 0`.
pub(crate) fn ln_ei(x: f64) -> f64 {
    if x > 40.0 {
        let (mut term, mut s) = (1.0, 1.0);
        for n in 1..40 {
            let next = term * n as f64 / x;
            if next > term {
                break;
            }
            term = next;
            s += term;
            if term < 1e-17 {
                break;
            }
        }
        return x - x.ln() + s.ln();
    }
    let (mut term, mut s) = (1.0, 0.0);
    for n in 1..500 {
        term *= x / n as f64;
        s += term / n as f64;
        if term < 1e-17 * s * n as f64 {
            break;
        }
    }
    (0.577_215_664_901_532_9 + x.ln() + s).ln()
}

/// Exponential growth rate of `t -> ln sum_{base_i <= t} exp(w_i)` near
/// `t_max`. In each window the affine slope is corrected by the slope of
/// `ln Ei(h t) - h t`, solved self-consistently in `h`; the windows are
/// averaged. `base` is ascending.
pub(crate) fn growth_fit(base: &[f64], weights: Option<&[f64]>, t_max: f64) -> Result<GrowthFit> {
    let used = base.partition_point(|&t| t <= t_max);
    if used < MIN_CLASSES {
        return Err(Error::TooFewClasses {
            have: used,
            need: MIN_CLASSES,
        });
    }
    let cum = match weights {
        Some(w) => prefix_logsumexp(w[..used].iter().copied()),
        None => (1..=used).map(|n| (n as f64).ln()).collect(),
    };
    let mut windows = Vec::with_capacity(WINDOW_FRACTIONS.len());
    for f in WINDOW_FRACTIONS {
        let lo = f * t_max;
        let mut ts = Vec::with_capacity(SAMPLES);
        let mut vs = Vec::with_capacity(SAMPLES);
        for j in 0..SAMPLES {
            let t = lo + (t_max - lo) * j as f64 / (SAMPLES - 1) as f64;
            let n = base[..used].partition_point(|&b| b <= t);
            if n == 0 {
                continue;
            }
            ts.push(t);
            vs.push(cum[n - 1]);
        }
        if ts.len() < 2 {
            return Err(Error::TooFewClasses {
                have: ts.len(),
                need: 2,
            });
        }
        let (slope, _) = linear_fit(&ts, &vs);
        let mut h = slope;
        for _ in 0..50 {
            if !(h * lo > 1.0) {
                h = slope;
                break;
            }
            let c: Vec<f64> = ts.iter().map(|&t| ln_ei(h * t) - h * t).collect();
            let next = slope - linear_fit(&ts, &c).0;
            let done = (next - h).abs() <= 1e-15 * h.abs();
            h = next;
            if done {
                break;
            }
        }
        windows.push(WindowEstimate {
            lo,
            hi: t_max,
            value: h,
        });
    }
    let value = windows.iter().map(|w| w.value).sum::<f64>() / windows.len() as f64;
    let spread = spread_of(&windows);
    Ok(GrowthFit {
        value,
        windows,
        spread,
        used,
    })
}

pub(crate) fn spread_of(w: &[WindowEstimate]) -> f64 {
    let hi = w.iter().map(|w| w.value).fold(f64::NEG_INFINITY, f64::max);
    let lo = w.iter().map(|w| w.value).fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Counting exponent of a list of periods, complete up to `t_max`.
pub fn entropy_of_periods(periods: &[f64], t_max: f64) -> Result<ExponentEstimate> {
    let mut sorted = periods.to_vec();
    sorted.sort_by(f64::total_cmp);
    let g = growth_fit(&sorted, None, t_max)?;
    Ok(ExponentEstimate {
        value: g.value,
        method: Method::Growth,
        windows: g.windows,
        spread: g.spread,
        horizon: t_max,
        samples: g.used,
    })
}

/// Growth rate of the number of classes with base period `<= T`.
pub fn entropy_growth(spec: &ClassSpectrum) -> Result<ExponentEstimate> {
    let t_max = spec.t_complete();
    let g = growth_fit(&spec.base_periods(), None, t_max)?;
    Ok(ExponentEstimate {
        value: g.value,
        method: Method::Growth,
        windows: g.windows,
        spread: g.spread,
        horizon: t_max,
        samples: g.used,
    })
}

/// `phi(cartan(rho(g)))` for every reduced word, grouped by length.
#[derive(Clone, Debug)]
pub struct ElementShells {
    rank: usize,
    shells: Vec<Vec<f64>>,
}

struct ShellVisitor<'a> {
    stack: PrefixStack<'a>,
    phi: [&'a WeightFunctional; 1],
    shells: Vec<Vec<f64>>,
    err: Option<Error>,
}

impl WordVisitor for ShellVisitor<'_> {
    fn push(&mut self, r: u8) {
        self.stack.push(r);
    }

    fn pop(&mut self) {
        self.stack.pop();
    }

    fn emit(&mut self, w: &[u8], _: bool) {
        match self.stack.functionals(Projection::Cartan, &self.phi) {
            Ok(v) => self.shells[w.len() - 1].push(v[0]),
            Err(e) => {
                self.err.get_or_insert(e);
            }
        }
    }
}

impl ElementShells {
    pub fn build(rep: &RepPoint, phi: &WeightFunctional, max_len: usize) -> Result<Self> {
        let k = rep.rank();
        if phi.dim() != rep.dim() {
            return Err(Error::DimensionMismatch(format!(
                "functional of dimension {} on a representation of dimension {}",
                phi.dim(),
                rep.dim()
            )));
        }
        if max_len < 2 {
            return Err(Error::OutOfRange("need words of length at least 2".into()));
        }
        let req: u128 = (1..=max_len).map(|n| element_count(k, n)).sum();
        if req > DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded {
                requested: req,
                budget: DEFAULT_BUDGET,
            });
        }
        let parts: Vec<Result<Vec<Vec<f64>>>> = (0..(2 * k) as u8)
            .into_par_iter()
            .map(|first| {
                let mut v = ShellVisitor {
                    stack: PrefixStack::for_functionals(rep, max_len, &[phi])?,
                    phi: [phi],
                    shells: vec![Vec::new(); max_len],
                    err: None,
                };
                walk_elements(k, max_len, first, &mut v);
                match v.err {
                    Some(e) => Err(e),
                    None => Ok(v.shells),
                }
            })
            .collect();
        let mut shells = vec![Vec::new(); max_len];
        for p in parts {
            for (s, part) in shells.iter_mut().zip(p?) {
                s.extend(part);
            }
        }
        Ok(ElementShells { rank: k, shells })
    }

    /// Shells from explicit values; `shells[n - 1]` holds the words of length `n`.
    pub fn from_shells(rank: usize, shells: Vec<Vec<f64>>) -> Self {
        ElementShells { rank, shells }
    }

    pub fn max_len(&self) -> usize {
        self.shells.len()
    }

    pub fn shell(&self, n: usize) -> &[f64] {
        &self.shells[n - 1]
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `ln sum_{|g| = n} exp(-s * phi(g))`.
    pub fn log_shell_sum(&self, n: usize, s: f64) -> f64 {
        let sh = self.shell(n);
        let m = sh.iter().map(|&x| -s * x).fold(f64::NEG_INFINITY, f64::max);
        m + sh.iter().map(|&x| (-s * x - m).exp()).sum::<f64>().ln()
    }

    fn window_slope(&self, lo: usize, s: f64) -> f64 {
        let ns: Vec<f64> = (lo..=self.max_len()).map(|n| n as f64).collect();
        let ys: Vec<f64> = (lo..=self.max_len()).map(|n| self.log_shell_sum(n, s)).collect();
        linear_fit(&ns, &ys).0
    }

    /// Critical exponent: the zero of the shell growth rate, one value per
    /// window; the narrowest window is reported.
    pub fn exponent(&self) -> Result<ExponentEstimate> {
        let l = self.max_len();
        let top = self.shell(l);
        let min = top.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotPositive(format!(
                "functional takes value {min:.3e} on a word of length {l}"
            )));
        }
        let growth = ((2 * self.rank - 1) as f64).ln();
        let s_hi = 2.0 * growth * l as f64 / min;
        let mut windows = Vec::new();
        for f in WINDOW_FRACTIONS {
            let lo = ((f * l as f64).ceil() as usize).clamp(1, l - 1);
            let (mut a, mut b) = (0.0, s_hi);
            if self.window_slope(lo, b) > 0.0 {
                return Err(Error::Bracket(format!(
                    "shell growth still positive at s = {b:.3e}"
                )));
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if self.window_slope(lo, m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            windows.push(WindowEstimate {
                lo: lo as f64,
                hi: l as f64,
                value: 0.5 * (a + b),
            });
        }
        Ok(ExponentEstimate {
            value: windows.last().unwrap().value,
            method: Method::Dirichlet,
            spread: spread_of(&windows),
            windows,
            horizon: l as f64,
            samples: self.shells.iter().map(Vec::len).sum(),
        })
    }
}

/// Critical exponent of `s -> sum_g exp(-s * phi(cartan(rho(g))))` from
/// words of length `<= max_len`.
pub fn exponent_dirichlet(
    rep: &RepPoint,
    phi: &WeightFunctional,
    max_len: usize,
) -> Result<ExponentEstimate> {
    ElementShells::build(rep, phi, max_len)?.exponent()
}
