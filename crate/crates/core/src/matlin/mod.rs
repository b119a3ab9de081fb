//! Small dense complex linear algebra on projective matrices.
//!
//! A [`ProjMatrix`] stores a matrix as `exp(log_scale) * entries` with the
//! entries rescaled so that the largest modulus is one, and with
//! `|det| = 1` for the represented matrix. Long products therefore never
//! overflow and the determinant modulus is known exactly, which is what the
//! Cartan and Jordan projections need.
//!
//! For dimensions up to [`GRADED_MAX_DIM`] the projections are computed
//! through exterior powers: `omega_k(sigma(g)) = log sigma_1(wedge^k g)` and
//! `omega_k(lambda(g)) = log rho(wedge^k g)`. Only top singular values and
//! spectral radii enter, so every coordinate keeps full relative accuracy
//! even when the singular values spread over hundreds of orders of
//! magnitude.

mod dense;
mod eigen;
mod svd;

use std::fmt;

pub use eigen::eigenvalues;
pub use svd::{singular_values, top_singular_value};

pub(crate) use dense::{det, matmul_into, orthonormalize, Lu};

use crate::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

/// Largest dimension handled through exterior powers.
pub const GRADED_MAX_DIM: usize = 6;

/// Relative pivot threshold below which a matrix is rejected as degenerate.
pub const DEGENERATE_THRESHOLD: f64 = 1e-13;

/// A determinant-normalised element of `PGL_d(C)`.
#[derive(Clone, PartialEq)]
pub struct ProjMatrix {
    dim: usize,
    entries: Vec<C64>,
    log_scale: f64,
}

impl fmt::Debug for ProjMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProjMatrix(d={}, log_scale={:.6}) [", self.dim, self.log_scale)?;
        for i in 0..self.dim {
            write!(f, "[")?;
            for j in 0..self.dim {
                let z = self.entries[i * self.dim + j];
                write!(f, "{:.6}{:+.6}i ", z.re, z.im)?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl ProjMatrix {
    /// Build from row-major entries, normalising `|det|` to one.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::OutOfRange(format!("matrix dimension {dim}, need at least 2")));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DegenerateMatrix("non-finite entry".into()));
        }
        let m = dense::max_abs(&entries);
        if m == 0.0 {
            return Err(Error::DegenerateMatrix("zero matrix".into()));
        }
        let scaled: Vec<C64> = entries.iter().map(|z| z / m).collect();
        let lu = Lu::new(dim, &scaled)
            .ok_or_else(|| Error::DegenerateMatrix("exactly singular".into()))?;
        if lu.pivot_ratio() < DEGENERATE_THRESHOLD {
            return Err(Error::DegenerateMatrix(format!(
                "pivot ratio {:.3e} below {DEGENERATE_THRESHOLD:e}",
                lu.pivot_ratio()
            )));
        }
        let d = lu.det().norm();
        // represented matrix = exp(ls) * scaled with |det| = 1
        let log_scale = -d.ln() / dim as f64;
        Ok(ProjMatrix {
            dim,
            entries: scaled,
            log_scale,
        })
    }

    pub fn from_real(dim: usize, rows: &[f64]) -> Result<Self> {
        Self::new(dim, rows.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut e = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            e[i * dim + i] = C64::new(1.0, 0.0);
        }
        ProjMatrix {
            dim,
            entries: e,
            log_scale: 0.0,
        }
    }

    pub fn diag(values: &[C64]) -> Result<Self> {
        let d = values.len();
        let mut e = vec![C64::new(0.0, 0.0); d * d];
        for (i, v) in values.iter().enumerate() {
            e[i * d + i] = *v;
        }
        Self::new(d, e)
    }

    /// Internal constructor for products whose determinant modulus is known.
    pub(crate) fn from_parts(dim: usize, mut entries: Vec<C64>, mut log_scale: f64) -> Self {
        let m = dense::max_abs(&entries);
        if m > 0.0 && m.is_finite() {
            for z in entries.iter_mut() {
                *z /= m;
            }
            log_scale += m.ln();
        }
        ProjMatrix {
            dim,
            entries,
            log_scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scaled entries (largest modulus one).
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Entry of the `|det| = 1` representative.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j] * self.log_scale.exp()
    }

    /// Entries of the `|det| = 1` representative (may overflow for long words).
    pub fn normalized_entries(&self) -> Vec<C64> {
        let s = self.log_scale.exp();
        self.entries.iter().map(|z| z * s).collect()
    }

    pub fn mul(&self, other: &ProjMatrix) -> ProjMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in product");
        let mut out = vec![C64::new(0.0, 0.0); self.dim * self.dim];
        matmul_into(self.dim, &self.entries, &other.entries, &mut out);
        ProjMatrix::from_parts(self.dim, out, self.log_scale + other.log_scale)
    }

    pub fn inverse(&self) -> ProjMatrix {
        let lu = Lu::new(self.dim, &self.entries).expect("ProjMatrix is invertible");
        ProjMatrix::from_parts(self.dim, lu.inverse(), -self.log_scale)
    }

    pub fn conj(&self) -> ProjMatrix {
        ProjMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
            log_scale: self.log_scale,
        }
    }

    pub fn transpose(&self) -> ProjMatrix {
        let n = self.dim;
        let mut e = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                e[j * n + i] = self.entries[i * n + j];
            }
        }
        ProjMatrix {
            dim: n,
            entries: e,
            log_scale: self.log_scale,
        }
    }

    /// `self * other * self^-1`.
    pub fn conjugate_by(&self, other: &ProjMatrix) -> ProjMatrix {
        other.mul(self).mul(&other.inverse())
    }

    /// Projective distance `sqrt(1 - |<A,B>|^2)` between Frobenius-normalised
    /// representatives; zero iff the matrices agree up to a scalar.
    pub fn proj_distance(&self, other: &ProjMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let na = self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb = other.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ip: C64 = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum();
        // residual form: accurate near c = 1 where 1 - c^2 cancels
        let lambda = ip / (na * na);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a * lambda - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / nb
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.proj_distance(&ProjMatrix::identity(self.dim)) <= tol
    }

    /// k-th exterior power in the lexicographic basis `e_I`, `I` increasing.
    pub fn wedge(&self, k: usize) -> Result<ProjMatrix> {
        let d = self.dim;
        if k < 1 || k + 1 > d {
            return Err(Error::OutOfRange(format!("wedge power {k} for dimension {d}")));
        }
        Ok(self.wedge_unchecked(k))
    }

    pub(crate) fn wedge_unchecked(&self, k: usize) -> ProjMatrix {
        let d = self.dim;
        if k == 1 {
            return self.clone();
        }
        let subsets = k_subsets(d, k);
        let m = subsets.len();
        let mut out = vec![C64::new(0.0, 0.0); m * m];
        let mut minor = vec![C64::new(0.0, 0.0); k * k];
        for (a, rows) in subsets.iter().enumerate() {
            for (b, cols) in subsets.iter().enumerate() {
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &c) in cols.iter().enumerate() {
                        minor[i * k + j] = self.entries[r * d + c];
                    }
                }
                out[a * m + b] = det(k, &minor);
            }
        }
        ProjMatrix::from_parts(m, out, k as f64 * self.log_scale)
    }

    /// Symmetric power of a 2x2 matrix acting on homogeneous polynomials of
    /// degree `d - 1` in the monomial basis `e1^(d-1-j) e2^j`.
    pub fn sym_power(&self, d: usize) -> Result<ProjMatrix> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch(format!(
                "symmetric power needs a 2x2 matrix, got {}x{}",
                self.dim, self.dim
            )));
        }
        if d < 2 {
            return Err(Error::OutOfRange(format!("symmetric power dimension {d}")));
        }
        let m = d - 1;
        let (g00, g01, g10, g11) = (
            self.entries[0],
            self.entries[1],
            self.entries[2],
            self.entries[3],
        );
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            // (g00 + g10 X)^(m-j) * (g01 + g11 X)^j
            let mut poly = vec![C64::new(1.0, 0.0)];
            for _ in 0..(m - j) {
                poly = poly_mul_linear(&poly, g00, g10);
            }
            for _ in 0..j {
                poly = poly_mul_linear(&poly, g01, g11);
            }
            for (i, c) in poly.into_iter().enumerate() {
                out[i * d + j] = c;
            }
        }
        Ok(ProjMatrix::from_parts(d, out, m as f64 * self.log_scale))
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &ProjMatrix) -> ProjMatrix {
        let (p, q) = (self.dim, other.dim);
        let n = p + q;
        let mut e = vec![C64::new(0.0, 0.0); n * n];
        let sa = self.log_scale.exp();
        let sb = other.log_scale.exp();
        for i in 0..p {
            for j in 0..p {
                e[i * n + j] = self.entries[i * p + j] * sa;
            }
        }
        for i in 0..q {
            for j in 0..q {
                e[(p + i) * n + p + j] = other.entries[i * q + j] * sb;
            }
        }
        ProjMatrix::from_parts(n, e, 0.0)
    }

    /// Unit vector spanning the attracting eigenline.
    pub fn top_eigenvector(&self) -> Result<Vec<C64>> {
        let (vals, _) = self.sorted_eigenvalues()?;
        Ok(eigen::eigenvector(self.dim, &self.entries, vals[0]))
    }

    /// Eigenvalues of the scaled entries sorted by decreasing modulus, with
    /// their log moduli for the `|det| = 1` representative.
    pub fn sorted_eigenvalues(&self) -> Result<(Vec<C64>, Vec<f64>)> {
        let mut ev = eigenvalues(self.dim, &self.entries)?;
        ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(std::cmp::Ordering::Equal));
        let logs = ev.iter().map(|z| z.norm().ln() + self.log_scale).collect();
        Ok((ev, logs))
    }

    /// Unit eigenvectors for the `count` eigenvalues of largest modulus.
    pub fn top_eigenvectors(&self, count: usize) -> Result<Vec<Vec<C64>>> {
        let (vals, _) = self.sorted_eigenvalues()?;
        Ok(vals
            .iter()
            .take(count)
            .map(|&mu| eigen::eigenvector(self.dim, &self.entries, mu))
            .collect())
    }

    /// Apply to a vector (scaled entries; the result is projective).
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }
}

fn poly_mul_linear(p: &[C64], c0: C64, c1: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); p.len() + 1];
    for (i, &a) in p.iter().enumerate() {
        out[i] += a * c0;
        out[i + 1] += a * c1;
    }
    out
}

/// All increasing k-subsets of `0..d` in lexicographic order.
pub fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Sorted, mean-zero real vector: a Cartan or Jordan projection.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanVector {
    coords: Vec<f64>,
}

impl CartanVector {
    /// Sorts and subtracts the mean.
    pub fn new(mut coords: Vec<f64>) -> Self {
        coords.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mean = coords.iter().sum::<f64>() / coords.len() as f64;
        for c in coords.iter_mut() {
            *c -= mean;
        }
        CartanVector { coords }
    }

    /// From cumulative weights `omega_1..omega_{d-1}` (with `omega_d = 0`).
    pub fn from_omegas(omegas: &[f64]) -> Self {
        let d = omegas.len() + 1;
        let mut coords = Vec::with_capacity(d);
        let mut prev = 0.0;
        for &w in omegas {
            coords.push(w - prev);
            prev = w;
        }
        coords.push(-prev);
        CartanVector::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `omega_k = x_1 + ... + x_k`.
    pub fn omega(&self, k: usize) -> f64 {
        self.coords[..k].iter().sum()
    }

    /// `a_k = x_k - x_{k+1}` (1-based).
    pub fn root(&self, k: usize) -> f64 {
        self.coords[k - 1] - self.coords[k]
    }

    pub fn scaled(&self, c: f64) -> CartanVector {
        CartanVector {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }
}

/// Which projection to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    Cartan,
    Jordan,
}

/// `log sigma_1(g)` or `log rho(g)` for the `|det| = 1` representative.
pub fn log_top(g: &ProjMatrix, proj: Projection) -> Result<f64> {
    let m = g.dim();
    if m == 2 {
        return Ok(match proj {
            Projection::Cartan => cartan2_top(g),
            Projection::Jordan => jordan2_top(g),
        });
    }
    Ok(match proj {
        Projection::Cartan => top_singular_value(m, g.entries()).ln() + g.log_scale(),
        Projection::Jordan => {
            let ev = eigenvalues(m, g.entries())?;
            let r = ev.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            r.ln() + g.log_scale()
        }
    })
}

/// `omega_k` of the chosen projection for each `k` with `needed[k-1]`;
/// other slots are left as NaN. `needed` has length `d - 1`.
///
/// For a matrix that is itself a long product, accuracy of `omega_k`,
/// `k >= 2`, is limited by how well the product was formed; evaluate words
/// in exterior-power representations instead (see `reps`).
pub fn omega_profile(g: &ProjMatrix, proj: Projection, needed: &[bool]) -> Result<Vec<f64>> {
    let d = g.dim();
    debug_assert_eq!(needed.len(), d - 1);
    let mut out = vec![f64::NAN; d - 1];
    if d <= GRADED_MAX_DIM {
        for k in 1..d {
            if needed[k - 1] {
                let w = if k == 1 { g.clone() } else { g.wedge_unchecked(k) };
                out[k - 1] = log_top(&w, proj)?;
            }
        }
        return Ok(out);
    }
    let v = match proj {
        Projection::Cartan => cartan_direct(g),
        Projection::Jordan => jordan_direct(g)?,
    };
    for k in 1..d {
        if needed[k - 1] {
            out[k - 1] = v.omega(k);
        }
    }
    Ok(out)
}

fn cartan2_top(g: &ProjMatrix) -> f64 {
    let e = g.entries();
    let f = e.iter().map(|z| z.norm_sqr()).sum::<f64>();
    // |det(entries)| = exp(-2 log_scale) exactly by the normalisation invariant
    let dm = (-2.0 * g.log_scale()).exp();
    let disc = (f * f - 4.0 * dm * dm).max(0.0).sqrt();
    let s1 = ((f + disc) * 0.5).sqrt();
    (s1.ln() + g.log_scale()).max(0.0)
}

fn jordan2_top(g: &ProjMatrix) -> f64 {
    let e = g.entries();
    let (mu, _) = eigen::eig2(e[0], e[1], e[2], e[3]);
    (mu.norm().ln() + g.log_scale()).max(0.0)
}

fn cartan_direct(g: &ProjMatrix) -> CartanVector {
    let sv = singular_values(g.dim(), g.entries());
    CartanVector::new(sv.iter().map(|s| s.ln() + g.log_scale()).collect())
}

fn jordan_direct(g: &ProjMatrix) -> Result<CartanVector> {
    let (_, logs) = g.sorted_eigenvalues()?;
    Ok(CartanVector::new(logs))
}

/// Cartan projection: sorted, mean-zero logarithms of singular values.
pub fn cartan(g: &ProjMatrix) -> CartanVector {
    let d = g.dim();
    if d == 1 {
        return CartanVector::new(vec![0.0]);
    }
    if d <= GRADED_MAX_DIM {
        let needed = vec![true; d - 1];
        let om = omega_profile(g, Projection::Cartan, &needed).expect("cartan route is infallible");
        return CartanVector::from_omegas(&om);
    }
    cartan_direct(g)
}

/// Jordan projection: sorted, mean-zero logarithms of eigenvalue moduli.
pub fn jordan(g: &ProjMatrix) -> Result<CartanVector> {
    let d = g.dim();
    if d == 1 {
        return Ok(CartanVector::new(vec![0.0]));
    }
    if d <= GRADED_MAX_DIM {
        let needed = vec![true; d - 1];
        let om = omega_profile(g, Projection::Jordan, &needed)?;
        return Ok(CartanVector::from_omegas(&om));
    }
    jordan_direct(g)
}

/// k-th exterior power (free-function form).
pub fn wedge(g: &ProjMatrix, k: usize) -> Result<ProjMatrix> {
    g.wedge(k)
}

/// Symmetric power lift of a 2x2 matrix to dimension `d`.
pub fn sym_power(g: &ProjMatrix, d: usize) -> Result<ProjMatrix> {
    g.sym_power(d)
}

/// Product accumulator for word evaluation: renormalises by the largest
/// entry modulus every [`RENORM_EVERY`] multiplications.
pub struct ProductAccumulator {
    dim: usize,
    cur: Vec<C64>,
    tmp: Vec<C64>,
    log_scale: f64,
    pending: usize,
}

pub const RENORM_EVERY: usize = 8;

impl ProductAccumulator {
    pub fn new(dim: usize) -> Self {
        let id = ProjMatrix::identity(dim);
        ProductAccumulator {
            dim,
            cur: id.entries,
            tmp: vec![C64::new(0.0, 0.0); dim * dim],
            log_scale: 0.0,
            pending: 0,
        }
    }

    pub fn push(&mut self, g: &ProjMatrix) {
        matmul_into(self.dim, &self.cur, &g.entries, &mut self.tmp);
        std::mem::swap(&mut self.cur, &mut self.tmp);
        self.log_scale += g.log_scale;
        self.pending += 1;
        if self.pending >= RENORM_EVERY {
            self.renormalize();
        }
    }

    fn renormalize(&mut self) {
        let m = dense::max_abs(&self.cur);
        if m > 0.0 && m.is_finite() {
            for z in self.cur.iter_mut() {
                *z /= m;
            }
            self.log_scale += m.ln();
        }
        self.pending = 0;
    }

    pub fn finish(self) -> ProjMatrix {
        ProjMatrix::from_parts(self.dim, self.cur, self.log_scale)
    }
}
