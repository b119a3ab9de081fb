//! Pressure, Gibbs averages and intersection numbers from orbit sums.

use serde::Serialize;

use super::exponent::{growth_fit, spread_of, WindowEstimate, WINDOW_FRACTIONS};
use super::ClassSpectrum;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub windows: Vec<WindowEstimate>,
    pub spread: f64,
    /// Constant `c` added per unit base period before fitting.
    pub tilt: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsEstimate {
    pub value: f64,
    pub windows: Vec<WindowEstimate>,
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntersectionEstimate {
    /// Plain average of period ratios.
    pub value: f64,
    pub windows: Vec<WindowEstimate>,
    pub spread: f64,
    /// Gibbs-weighted variant at the supplied exponent.
    pub gibbs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RenormalizedIntersection {
    pub value: f64,
    pub intersection: f64,
    pub h_base: f64,
    pub h_other: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Gibbs mean that was subtracted.
    pub mean: f64,
    pub step: f64,
    /// Pressure at `t = -step, 0, step`.
    pub pressures: [f64; 3],
}

fn check_len(spec: &ClassSpectrum, v: &[f64]) -> Result<()> {
    if v.len() != spec.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} classes",
            v.len(),
            spec.len()
        )));
    }
    Ok(())
}

/// Pressure of the potential with periods `potential[i]`, measured along the
/// base flow, after adding `tilt` times the base periods (and subtracting it
/// again from the result).
pub fn pressure_orbit_tilted(
    spec: &ClassSpectrum,
    potential: &[f64],
    tilt: f64,
) -> Result<PressureEstimate> {
    check_len(spec, potential)?;
    let base = spec.base_periods();
    let t_max = spec.t_complete();
    let w: Vec<f64> = potential
        .iter()
        .zip(&base)
        .map(|(p, b)| p + tilt * b)
        .collect();
    let fit = if potential.iter().all(|&p| p == 0.0) && tilt == 0.0 {
        growth_fit(&base, None, t_max)?
    } else {
        growth_fit(&base, Some(&w), t_max)?
    };
    Ok(PressureEstimate {
        value: fit.value - tilt,
        windows: fit
            .windows
            .into_iter()
            .map(|w| WindowEstimate {
                value: w.value - tilt,
                ..w
            })
            .collect(),
        spread: fit.spread,
        tilt,
        horizon: t_max,
    })
}

/// Pressure with the smallest tilt making every tilted period non-negative.
pub fn pressure_orbit(spec: &ClassSpectrum, potential: &[f64]) -> Result<PressureEstimate> {
    check_len(spec, potential)?;
    let t_max = spec.t_complete();
    let tilt = potential
        .iter()
        .enumerate()
        .take_while(|&(i, _)| spec.value(i, 0) <= t_max)
        .map(|(i, p)| -p / spec.value(i, 0))
        .fold(0.0f64, f64::max);
    pressure_orbit_tilted(spec, potential, tilt)
}

/// `sum w(a) g(a) / sum w(a) f(a)` with `w = exp(-h f)` over the classes
/// with base period in each window, averaged over the windows.
pub fn gibbs_average(spec: &ClassSpectrum, g: &[f64], h: f64) -> Result<GibbsEstimate> {
    check_len(spec, g)?;
    let t_max = spec.t_complete();
    let used = spec.count_le(t_max);
    let mut windows = Vec::new();
    for f in WINDOW_FRACTIONS {
        let lo = f * t_max;
        let start = window_start(spec, lo, used)?;
        let shift = -h * spec.value(used - 1, 0);
        let (mut num, mut den) = (0.0, 0.0);
        for (i, gi) in g.iter().enumerate().take(used).skip(start) {
            let b = spec.value(i, 0);
            let w = (-h * b - shift).exp();
            num += w * gi;
            den += w * b;
        }
        windows.push(WindowEstimate {
            lo,
            hi: t_max,
            value: num / den,
        });
    }
    Ok(GibbsEstimate {
        value: mean_of(&windows),
        spread: spread_of(&windows),
        windows,
    })
}

fn window_start(spec: &ClassSpectrum, lo: f64, used: usize) -> Result<usize> {
    let start = spec.count_le(lo);
    if used < start + 2 {
        return Err(Error::TooFewClasses {
            have: used.saturating_sub(start),
            need: 2,
        });
    }
    Ok(start)
}

fn mean_of(w: &[WindowEstimate]) -> f64 {
    w.iter().map(|w| w.value).sum::<f64>() / w.len() as f64
}

/// Unweighted mean of `g / f` over the classes with base period in each
/// window, averaged over the windows; `h` is the base exponent used by the
/// Gibbs variant.
pub fn intersection(spec: &ClassSpectrum, g: &[f64], h: f64) -> Result<IntersectionEstimate> {
    check_len(spec, g)?;
    let t_max = spec.t_complete();
    let used = spec.count_le(t_max);
    for (i, gi) in g.iter().enumerate().take(used) {
        if !(*gi > 0.0) {
            return Err(Error::NotPositiveComparison(format!(
                "class {} has comparison period {gi:.6e}",
                spec.class(i)
            )));
        }
    }
    let mut windows = Vec::new();
    for f in WINDOW_FRACTIONS {
        let lo = f * t_max;
        let start = window_start(spec, lo, used)?;
        let r: f64 = (start..used).map(|i| g[i] / spec.value(i, 0)).sum();
        windows.push(WindowEstimate {
            lo,
            hi: t_max,
            value: r / (used - start) as f64,
        });
    }
    let gibbs = gibbs_average(spec, g, h)?.value;
    Ok(IntersectionEstimate {
        value: mean_of(&windows),
        spread: spread_of(&windows),
        windows,
        gibbs,
    })
}

/// `J = (h_other / h_base) * I`.
pub fn renormalized_intersection(
    spec: &ClassSpectrum,
    g: &[f64],
    h_base: f64,
    h_other: f64,
) -> Result<RenormalizedIntersection> {
    if !(h_base > 0.0 && h_other > 0.0) {
        return Err(Error::NotPositive(format!(
            "exponents {h_base:.6e} and {h_other:.6e}"
        )));
    }
    let i = intersection(spec, g, h_base)?.value;
    Ok(RenormalizedIntersection {
        value: h_other / h_base * i,
        intersection: i,
        h_base,
        h_other,
    })
}

/// Second derivative at `t = 0` of `t -> P(-h f + t (g - m f))`, `m` the
/// Gibbs mean of `g`, by a central difference of step `step`.
pub fn variance(spec: &ClassSpectrum, g: &[f64], h: f64, step: f64) -> Result<VarianceEstimate> {
    check_len(spec, g)?;
    if !(step > 0.0) {
        return Err(Error::OutOfRange(format!("step {step} must be positive")));
    }
    let mean = gibbs_average(spec, g, h)?.value;
    let base = spec.base_periods();
    let centred: Vec<f64> = g.iter().zip(&base).map(|(g, f)| g - mean * f).collect();
    let t_max = spec.t_complete();
    let n = spec.count_le(t_max);
    let reach = centred[..n]
        .iter()
        .zip(&base)
        .map(|(c, f)| (c / f).abs())
        .fold(0.0f64, f64::max);
    let tilt = h + step * reach;
    let at = |t: f64| -> Result<f64> {
        let pot: Vec<f64> = centred
            .iter()
            .zip(&base)
            .map(|(c, f)| -h * f + t * c)
            .collect();
        Ok(pressure_orbit_tilted(spec, &pot, tilt)?.value)
    };
    let p = [at(-step)?, at(0.0)?, at(step)?];
    Ok(VarianceEstimate {
        value: (p[0] - 2.0 * p[1] + p[2]) / (step * step),
        mean,
        step,
        pressures: p,
    })
}
