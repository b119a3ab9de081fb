//! Hausdorff dimension oracles for Schottky groups in `PSL_2(C)`: a
//! transfer-operator solver of Bowen's equation and box counting on
//! sampled limit sets.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matlin::C64;
use crate::reps::{fixed_line, invariant_subspace, linear_fit, RepPoint};
use crate::words::{conjugacy_classes, inverse_rank, ConjClass, Word, DEFAULT_BUDGET};
use crate::{Error, Result};

/// Möbius map `z -> (a z + b) / (c z + d)` stored as `[a, b, c, d]` with
/// `|ad - bc| = 1`.
pub type Mobius = [C64; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, z: C64, margin: f64) -> bool {
        (z - self.center).norm() < self.radius - margin
    }

    fn boundary(&self, n: usize) -> impl Iterator<Item = C64> + '_ {
        (0..n).map(move |j| {
            let t = std::f64::consts::TAU * (j as f64 + 0.5) / n as f64;
            self.center + C64::from_polar(self.radius, t)
        })
    }
}

pub fn mobius_apply(g: &Mobius, z: C64) -> C64 {
    (g[0] * z + g[1]) / (g[2] * z + g[3])
}

fn mobius_inverse(g: &Mobius) -> Mobius {
    [g[3], -g[1], -g[2], g[0]]
}

fn mobius_mul(g: &Mobius, h: &Mobius) -> Mobius {
    [
        g[0] * h[0] + g[1] * h[2],
        g[0] * h[1] + g[1] * h[3],
        g[2] * h[0] + g[3] * h[2],
        g[2] * h[1] + g[3] * h[3],
    ]
}

fn normalize(g: Mobius) -> Result<Mobius> {
    let det = (g[0] * g[3] - g[1] * g[2]).norm();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::DegenerateMatrix("singular Möbius map".into()));
    }
    let s = det.sqrt();
    Ok(g.map(|z| z / s))
}

/// Derivative of `g` at `z` in the spherical metric.
pub fn spherical_derivative(g: &Mobius, z: C64) -> f64 {
    let w = mobius_apply(g, z);
    (1.0 + z.norm_sqr()) / ((g[2] * z + g[3]).norm_sqr() * (1.0 + w.norm_sqr()))
}

/// Disks and pairings of a Schottky group. Letter `r` (rank order
/// `a, A, b, B, ...`) maps the exterior of `disks[r ^ 1]` onto the interior
/// of `disks[r]`.
#[derive(Clone, Debug)]
pub struct SchottkyData {
    maps: Vec<Mobius>,
    disks: Vec<Disk>,
}

const PAIRING_SAMPLES: usize = 64;

impl SchottkyData {
    /// Explicit maps (one per generator) and disks (one per letter).
    pub fn new(generators: Vec<Mobius>, disks: Vec<Disk>) -> Result<Self> {
        if disks.len() != 2 * generators.len() || generators.is_empty() {
            return Err(Error::InvalidSchottky(format!(
                "{} disks for {} generators",
                disks.len(),
                generators.len()
            )));
        }
        let mut maps = Vec::with_capacity(disks.len());
        for g in generators {
            let g = normalize(g)?;
            maps.push(g);
            maps.push(mobius_inverse(&g));
        }
        let s = SchottkyData { maps, disks };
        s.validate()?;
        Ok(s)
    }

    /// Isometric circles of the generators of a two-dimensional
    /// representation.
    pub fn from_rep(rep: &RepPoint) -> Result<Self> {
        if rep.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "Schottky data needs dimension 2, got {}",
                rep.dim()
            )));
        }
        let mut gens = Vec::new();
        let mut disks = Vec::new();
        for g in rep.generators() {
            let e = g.normalized_entries();
            let m = normalize([e[0], e[1], e[2], e[3]])?;
            if m[2].norm() < 1e-300 {
                return Err(Error::InvalidSchottky(
                    "generator fixes infinity; no isometric circle".into(),
                ));
            }
            let r = 1.0 / m[2].norm();
            disks.push(Disk {
                center: m[0] / m[2],
                radius: r,
            });
            disks.push(Disk {
                center: -m[3] / m[2],
                radius: r,
            });
            gens.push(m);
        }
        Self::new(gens, disks)
    }

    pub fn rank(&self) -> usize {
        self.maps.len() / 2
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn map(&self, r: u8) -> &Mobius {
        &self.maps[r as usize]
    }

    /// Smallest gap between two disks.
    pub fn margin(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.disks.len() {
            for j in i + 1..self.disks.len() {
                let (a, b) = (&self.disks[i], &self.disks[j]);
                m = m.min((a.center - b.center).norm() - a.radius - b.radius);
            }
        }
        m
    }

    /// Disjointness and pairing on sampled boundary points.
    pub fn validate(&self) -> Result<()> {
        if self.disks.iter().any(|d| !(d.radius > 0.0 && d.radius.is_finite())) {
            return Err(Error::InvalidSchottky("non-positive radius".into()));
        }
        let m = self.margin();
        if !(m > 0.0) {
            return Err(Error::InvalidSchottky(format!(
                "disks overlap (margin {m:.3e})"
            )));
        }
        for r in 0..self.maps.len() {
            let target = &self.disks[r];
            for (j, d) in self.disks.iter().enumerate() {
                if j == r ^ 1 {
                    continue;
                }
                for z in d.boundary(PAIRING_SAMPLES) {
                    let w = mobius_apply(&self.maps[r], z);
                    if !target.contains(w, 0.0) {
                        return Err(Error::InvalidSchottky(format!(
                            "letter {r} sends a point of disk {j} outside disk {r}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Conjugate by `h`: maps `h g h^-1`, disks `h(D)`.
    pub fn conjugate(&self, h: &Mobius) -> Result<Self> {
        let h = normalize(*h)?;
        let hi = mobius_inverse(&h);
        let gens = (0..self.rank())
            .map(|i| mobius_mul(&mobius_mul(&h, &self.maps[2 * i]), &hi))
            .collect();
        let disks = self
            .disks
            .iter()
            .map(|d| image_disk(&h, d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gens, disks)
    }

    /// Attracting fixed point of letter `r`.
    fn attracting_point(&self, r: u8) -> C64 {
        let mut z = self.disks[r as usize].center;
        for _ in 0..200 {
            z = mobius_apply(&self.maps[r as usize], z);
        }
        z
    }
}

fn image_disk(h: &Mobius, d: &Disk) -> Result<Disk> {
    let pole_inside = h[2].norm() > 0.0 && d.contains(-h[3] / h[2], -1e-12 * d.radius);
    if pole_inside {
        return Err(Error::InvalidSchottky("Möbius pole on a disk".into()));
    }
    let p: Vec<C64> = d.boundary(3).map(|z| mobius_apply(h, z)).collect();
    let (a, b, c) = (p[0], p[1], p[2]);
    // circumcentre
    let bb = b - a;
    let cc = c - a;
    let den = 2.0 * (bb.re * cc.im - bb.im * cc.re);
    let ux = (cc.im * bb.norm_sqr() - bb.im * cc.norm_sqr()) / den;
    let uy = (bb.re * cc.norm_sqr() - cc.re * bb.norm_sqr()) / den;
    let center = a + C64::new(ux, uy);
    Ok(Disk {
        center,
        radius: (a - center).norm(),
    })
}

/// Transfer operator `L_s f(x) = sum_i |g_i'(x)|^s f(g_i x)` discretised on
/// the cylinders of depth `n`: functions constant on cylinders, derivatives
/// evaluated at one limit point per cylinder.
#[derive(Clone, Debug)]
pub struct TransferDiscretization {
    pub s: f64,
    pub depth: usize,
    /// Cylinders per disk.
    pub per_disk: usize,
    /// Row `i`: `(column, weight)` for the admissible predecessors.
    rows: Vec<Vec<(usize, f64)>>,
}

struct Cylinders {
    alpha: usize,
    depth: usize,
    per: usize,
}

impl Cylinders {
    fn new(k: usize, depth: usize) -> Self {
        let alpha = 2 * k;
        Cylinders {
            alpha,
            depth,
            per: (alpha - 1).pow(depth as u32 - 1),
        }
    }

    fn count(&self) -> usize {
        self.alpha * self.per
    }

    fn word(&self, mut idx: usize) -> Vec<u8> {
        let first = (idx / self.per) as u8;
        idx %= self.per;
        let mut w = vec![first];
        let mut digits = vec![0usize; self.depth - 1];
        for d in digits.iter_mut().rev() {
            *d = idx % (self.alpha - 1);
            idx /= self.alpha - 1;
        }
        for c in digits {
            let prev = *w.last().unwrap();
            let skip = inverse_rank(prev) as usize;
            let r = if c >= skip { c + 1 } else { c };
            w.push(r as u8);
        }
        w
    }

    fn index(&self, w: &[u8]) -> usize {
        let mut idx = 0;
        for i in 1..w.len() {
            let skip = inverse_rank(w[i - 1]);
            let c = if w[i] > skip { w[i] - 1 } else { w[i] } as usize;
            idx = idx * (self.alpha - 1) + c;
        }
        w[0] as usize * self.per + idx
    }
}

pub fn build_transfer(sch: &SchottkyData, s: f64, depth: usize) -> Result<TransferDiscretization> {
    if !(s >= 0.0) {
        return Err(Error::OutOfRange(format!("exponent {s} must be non-negative")));
    }
    if depth < 1 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    let cyl = Cylinders::new(sch.rank(), depth);
    let fixed: Vec<C64> = (0..cyl.alpha as u8).map(|r| sch.attracting_point(r)).collect();
    let rows = (0..cyl.count())
        .into_par_iter()
        .map(|i| {
            let w = cyl.word(i);
            let mut x = fixed[*w.last().unwrap() as usize];
            for &r in w.iter().rev() {
                x = mobius_apply(sch.map(r), x);
            }
            let mut row = Vec::with_capacity(cyl.alpha - 1);
            let mut pred = Vec::with_capacity(depth);
            for j in 0..cyl.alpha as u8 {
                if j == inverse_rank(w[0]) {
                    continue;
                }
                pred.clear();
                pred.push(j);
                pred.extend_from_slice(&w[..depth - 1]);
                let weight = spherical_derivative(sch.map(j), x).powf(s);
                row.push((cyl.index(&pred), weight));
            }
            row
        })
        .collect();
    Ok(TransferDiscretization {
        s,
        depth,
        per_disk: cyl.per,
        rows,
    })
}

impl TransferDiscretization {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, w)| w * v[j]).sum();
        }
    }

    /// Perron eigenvalue by power iteration.
    pub fn spectral_radius(&self) -> Result<f64> {
        let n = self.size();
        let mut v = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        let mut lam = 0.0;
        for it in 0..20_000 {
            self.apply(&v, &mut next);
            let norm: f64 = next.iter().map(|x| x.max(0.0)).sum();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::EigenNonConvergence {
                    dim: n,
                    iterations: it,
                    active: n,
                    residual: norm,
                });
            }
            let prev = lam;
            lam = norm;
            for (a, b) in v.iter_mut().zip(&next) {
                *a = b.max(0.0) / norm;
            }
            if it > 2 && (lam - prev).abs() <= 1e-13 * lam {
                return Ok(lam);
            }
        }
        Err(Error::EigenNonConvergence {
            dim: n,
            iterations: 20_000,
            active: n,
            residual: lam,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BowenEstimate {
    pub value: f64,
    pub depth: usize,
    /// `(s, spectral radius)` along the bisection.
    pub trace: Vec<(f64, f64)>,
}

/// Zero of `s -> log spectral radius(L_s)` by bisection on `[0, 2]`.
pub fn bowen_dimension(sch: &SchottkyData, depth: usize, tol: f64) -> Result<BowenEstimate> {
    let rad = |s: f64| build_transfer(sch, s, depth)?.spectral_radius();
    let (mut lo, mut hi) = (0.0, 2.0);
    let (mut r_lo, mut r_hi) = (rad(lo)?, rad(hi)?);
    let mut trace = vec![(lo, r_lo), (hi, r_hi)];
    if r_lo <= 1.0 + 1e-12 {
        return Ok(BowenEstimate {
            value: 0.0,
            depth,
            trace,
        });
    }
    if r_hi >= 1.0 {
        return Err(Error::Bracket(format!(
            "spectral radius {r_lo:.6e} at s = 0 and {r_hi:.6e} at s = 2"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let r = rad(mid)?;
        trace.push((mid, r));
        if !(r < r_lo && r > r_hi) {
            return Err(Error::Bracket(format!(
                "spectral radius not decreasing: {r_lo:.6e} at {lo}, {r:.6e} at {mid}, {r_hi:.6e} at {hi}"
            )));
        }
        if r > 1.0 {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Ok(BowenEstimate {
        value: 0.5 * (lo + hi),
        depth,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudMode {
    /// One attracting point per class.
    Classes,
    /// The attracting points of every cyclic rotation of each core.
    Rotations,
}

/// Points of an affine chart of projective space, as real coordinates
/// `(re z_1, im z_1, re z_2, ...)`.
#[derive(Clone, Debug, Serialize)]
pub struct PointCloud {
    /// Homogeneous coordinate set to 1.
    pub chart: usize,
    pub real_dim: usize,
    pub points: Vec<Vec<f64>>,
}

fn to_chart(v: &[C64], chart: usize) -> Vec<f64> {
    let p = v[chart];
    let mut out = Vec::with_capacity(2 * (v.len() - 1));
    for (i, z) in v.iter().enumerate() {
        if i != chart {
            let q = z / p;
            out.push(q.re);
            out.push(q.im);
        }
    }
    out
}

/// Attracting fixed lines of all primitive classes of core length `<= L`,
/// in the chart `chart` (default: the coordinate of largest minimal
/// modulus). Points closer than `1e-12` are merged.
pub fn sample_limit_set(
    rep: &RepPoint,
    max_len: usize,
    mode: CloudMode,
    chart: Option<usize>,
) -> Result<PointCloud> {
    let classes = conjugacy_classes(rep.rank(), max_len, true, DEFAULT_BUDGET)?;
    let lines: Vec<Vec<C64>> = classes
        .par_iter()
        .map(|c| -> Result<Vec<Vec<C64>>> {
            let v = fixed_line(rep, c)?;
            let mut out = vec![v];
            if mode == CloudMode::Rotations {
                let mut ranks = c.core().ranks();
                for _ in 1..ranks.len() {
                    ranks.rotate_left(1);
                    out.extend(invariant_subspace(rep, &ranks, 1));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let d = rep.dim();
    let chart = match chart {
        Some(c) if c < d => c,
        Some(c) => return Err(Error::OutOfRange(format!("chart {c} for dimension {d}"))),
        None => (0..d)
            .map(|c| {
                let m = lines
                    .iter()
                    .map(|v| v[c].norm() / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min);
                (c, m)
            })
            .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best })
            .0,
    };
    let mut points: Vec<Vec<f64>> = lines.iter().map(|v| to_chart(v, chart)).collect();
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
    Ok(PointCloud {
        chart,
        real_dim: 2 * (d - 1),
        points,
    })
}

/// Attracting fixed point of a class in the chart of a cloud.
pub fn class_point(rep: &RepPoint, c: &ConjClass, chart: usize) -> Result<Vec<f64>> {
    Ok(to_chart(&fixed_line(rep, c)?, chart))
}

/// Image of a chart point under a word, back in the same chart.
pub fn move_point(rep: &RepPoint, w: &Word, p: &[f64], chart: usize) -> Vec<f64> {
    let d = rep.dim();
    let mut v = Vec::with_capacity(d);
    let mut k = 0;
    for i in 0..d {
        if i == chart {
            v.push(C64::new(1.0, 0.0));
        } else {
            v.push(C64::new(p[2 * k], p[2 * k + 1]));
            k += 1;
        }
    }
    let v = rep.evaluate(w).apply(&v);
    to_chart(&v, chart)
}

pub const BOX_SCALES: usize = 9;

fn occupied(pts: &[Vec<f64>], lo: &[f64], eps: f64) -> usize {
    let boxes: HashSet<Vec<i64>> = pts
        .iter()
        .map(|p| {
            p.iter()
                .zip(lo)
                .map(|(x, l)| ((x - l) / eps).floor() as i64)
                .collect()
        })
        .collect();
    boxes.len()
}

fn lower_corner(pts: &[Vec<f64>]) -> Vec<f64> {
    (0..pts[0].len())
        .map(|i| pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Coarsest scale of the ladder whose finest rung is the last dyadic
/// subdivision of the extent with at least 8 points per occupied box.
pub fn default_scale(cloud: &PointCloud) -> f64 {
    let ext = cloud_extent(cloud);
    let pts = &cloud.points;
    if pts.len() < 2 || !(ext > 0.0) {
        return 1.0;
    }
    let lo = lower_corner(pts);
    let mut last = 0usize;
    for j in 1..48 {
        if occupied(pts, &lo, ext / (1u64 << j) as f64) * 8 > pts.len() {
            break;
        }
        last = j;
    }
    let top = last.saturating_sub(BOX_SCALES - 1);
    ext / (1u64 << top) as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub value: f64,
    /// `(eps, occupied boxes, used in fit)`
    pub scales: Vec<(f64, usize, bool)>,
}

/// Slope of `log N(eps)` against `log(1/eps)` for `eps_j = eps0 2^-j`,
/// `j = 0..8`, on a grid anchored at the bounding box. A scale is used when
/// it has at least two boxes and at most an eighth of the points.
pub fn box_dimension(cloud: &PointCloud, eps0: f64) -> Result<BoxCount> {
    let pts = &cloud.points;
    if pts.is_empty() {
        return Err(Error::OutOfRange("empty point cloud".into()));
    }
    if !(eps0 > 0.0) {
        return Err(Error::OutOfRange(format!("scale {eps0} must be positive")));
    }
    let lo = lower_corner(pts);
    let mut scales = Vec::with_capacity(BOX_SCALES);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..BOX_SCALES {
        let eps = eps0 / (1u64 << j) as f64;
        let count = occupied(pts, &lo, eps);
        let used = count >= 2 && count * 8 <= pts.len();
        if used {
            xs.push((1.0 / eps).ln());
            ys.push((count as f64).ln());
        }
        scales.push((eps, count, used));
    }
    if pts.len() == 1 || scales.iter().all(|s| s.1 == 1) {
        return Ok(BoxCount { value: 0.0, scales });
    }
    if xs.len() < 4 {
        return Err(Error::TooFewClasses {
            have: xs.len(),
            need: 4,
        });
    }
    Ok(BoxCount {
        value: linear_fit(&xs, &ys).0,
        scales,
    })
}

/// Largest side of the bounding box.
pub fn cloud_extent(cloud: &PointCloud) -> f64 {
    let n = cloud.points.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let (a, b) = cloud
                .points
                .iter()
                .map(|p| p[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            b - a
        })
        .fold(0.0, f64::max)
}

impl PointCloud {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let names: Vec<String> = if self.real_dim == 2 {
            vec!["x".into(), "y".into()]
        } else {
            (1..=self.real_dim).map(|i| format!("x{i}")).collect()
        };
        writeln!(w, "{},chart", names.join(","))?;
        for p in &self.points {
            for x in p {
                write!(w, "{x:.16e},")?;
            }
            writeln!(w, "{}", self.chart)?;
        }
        Ok(())
    }

    /// Binary greyscale raster (`P5`) of hit counts of the first two
    /// coordinates, clamped at 255.
    pub fn write_ppm<W: Write>(&self, mut w: W, width: usize, height: usize) -> Result<()> {
        if width == 0 || height == 0 {
            return Err(Error::OutOfRange("raster size must be positive".into()));
        }
        let mut img = vec![0u8; width * height];
        if !self.points.is_empty() {
            let (mut x0, mut x1, mut y0, mut y1) = (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            );
            for p in &self.points {
                x0 = x0.min(p[0]);
                x1 = x1.max(p[0]);
                y0 = y0.min(p[1]);
                y1 = y1.max(p[1]);
            }
            let span = (x1 - x0).max(y1 - y0).max(1e-300);
            for p in &self.points {
                let i = (((p[0] - x0) / span) * (width - 1) as f64).round() as usize;
                let j = (((y1 - p[1]) / span) * (height - 1) as f64).round() as usize;
                if i < width && j < height {
                    let c = &mut img[j * width + i];
                    *c = c.saturating_add(1);
                }
            }
        }
        writeln!(w, "P5 {width} {height} 255")?;
        w.write_all(&img)?;
        Ok(())
    }
}

#[cfg(test)]
#[path = "bowen_tests.rs"]
mod tests;
