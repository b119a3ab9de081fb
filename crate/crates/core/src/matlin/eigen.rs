//! Eigenvalues of small dense complex matrices: Householder reduction to
//! upper Hessenberg form followed by single-shift QR sweeps with Wilkinson
//! shifts and deflation.

use super::dense::{idx, Lu};
use super::C64;
use crate::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn hessenberg(n: usize, a: &mut [C64]) {
    if n < 3 {
        return;
    }
    let mut v = vec![zero(); n];
    for k in 0..n - 2 {
        let mut alpha2 = 0.0;
        for i in k + 1..n {
            alpha2 += a[idx(n, i, k)].norm_sqr();
        }
        let alpha = alpha2.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[idx(n, k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase*alpha*e1, normalised
        for i in 0..n {
            v[i] = zero();
        }
        for i in k + 1..n {
            v[i] = a[idx(n, i, k)];
        }
        v[k + 1] += phase * alpha;
        let vn = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v[k + 1..].iter_mut() {
            *z /= vn;
        }
        // A <- (I - 2vv^H) A
        for j in 0..n {
            let mut s = zero();
            for i in k + 1..n {
                s += v[i].conj() * a[idx(n, i, j)];
            }
            s *= 2.0;
            for i in k + 1..n {
                a[idx(n, i, j)] -= v[i] * s;
            }
        }
        // A <- A (I - 2vv^H)
        for i in 0..n {
            let mut s = zero();
            for j in k + 1..n {
                s += a[idx(n, i, j)] * v[j];
            }
            s *= 2.0;
            for j in k + 1..n {
                a[idx(n, i, j)] -= s * v[j].conj();
            }
        }
        for i in k + 2..n {
            a[idx(n, i, k)] = zero();
        }
    }
}

/// Eigenvalues of a 2x2 block, returned with the larger modulus first.
pub(crate) fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let det = a * d - b * c;
    let half = tr * 0.5;
    let disc = (half * half - det).sqrt();
    let p = half + disc;
    let m = half - disc;
    if p.norm() >= m.norm() {
        // recover the small root from the product to avoid cancellation
        let small = if p.norm() > 0.0 { det / p } else { m };
        (p, small)
    } else {
        let small = if m.norm() > 0.0 { det / m } else { p };
        (m, small)
    }
}

/// All eigenvalues (unordered) of a dense `n x n` complex matrix.
pub fn eigenvalues(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    assert_eq!(a.len(), n * n);
    match n {
        0 => return Ok(vec![]),
        1 => return Ok(vec![a[0]]),
        2 => {
            let (x, y) = eig2(a[0], a[1], a[2], a[3]);
            return Ok(vec![x, y]);
        }
        _ => {}
    }
    let mut h = a.to_vec();
    hessenberg(n, &mut h);
    let mut eig = vec![zero(); n];
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = MAX_SWEEPS_PER_EIGENVALUE * n;
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[0];
            break;
        }
        // find start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[idx(n, lo, lo - 1)].norm();
            let scale = h[idx(n, lo, lo)].norm() + h[idx(n, lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if sub <= eps * scale {
                h[idx(n, lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[idx(n, hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hi {
            let (x, y) = eig2(
                h[idx(n, lo, lo)],
                h[idx(n, lo, hi)],
                h[idx(n, hi, lo)],
                h[idx(n, hi, hi)],
            );
            eig[lo] = x;
            eig[hi] = y;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total_iter += 1;
        if total_iter > max_total {
            return Err(Error::EigenNonConvergence {
                dim: n,
                iterations: total_iter,
                active: hi - lo + 1,
                residual: h[idx(n, hi, hi - 1)].norm(),
            });
        }
        // Wilkinson shift, with exceptional shifts to break cycles
        let mu = if iter % 11 == 0 {
            h[idx(n, hi, hi)] + C64::new(0.75, 0.3) * h[idx(n, hi, hi - 1)].norm()
        } else {
            let (x, y) = eig2(
                h[idx(n, hi - 1, hi - 1)],
                h[idx(n, hi - 1, hi)],
                h[idx(n, hi, hi - 1)],
                h[idx(n, hi, hi)],
            );
            let d = h[idx(n, hi, hi)];
            if (x - d).norm() < (y - d).norm() {
                x
            } else {
                y
            }
        };
        for k in lo..=hi {
            h[idx(n, k, k)] -= mu;
        }
        rot.clear();
        for k in lo..hi {
            let x = h[idx(n, k, k)];
            let y = h[idx(n, k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (1.0, zero())
            } else if x.norm() == 0.0 {
                (0.0, C64::new(1.0, 0.0))
            } else {
                let c = x.norm() / r;
                let s = x * y.conj() / (x.norm() * r);
                (c, s)
            };
            for j in k..=hi {
                let a1 = h[idx(n, k, j)];
                let a2 = h[idx(n, k + 1, j)];
                h[idx(n, k, j)] = a1 * c + s * a2;
                h[idx(n, k + 1, j)] = -s.conj() * a1 + a2 * c;
            }
            rot.push((c, s));
        }
        for (off, &(c, s)) in rot.iter().enumerate() {
            let k = lo + off;
            let top = lo;
            let bottom = (k + 2).min(hi);
            for i in top..=bottom {
                let a1 = h[idx(n, i, k)];
                let a2 = h[idx(n, i, k + 1)];
                h[idx(n, i, k)] = a1 * c + s.conj() * a2;
                h[idx(n, i, k + 1)] = -s * a1 + a2 * c;
            }
        }
        for k in lo..=hi {
            h[idx(n, k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Unit eigenvector for an eigenvalue estimate `mu`, by inverse iteration.
pub(crate) fn eigenvector(n: usize, a: &[C64], mu: C64) -> Vec<C64> {
    let scale = super::dense::max_abs(a).max(mu.norm()).max(f64::MIN_POSITIVE);
    let mut shifted = a.to_vec();
    // perturb the shift so the shifted matrix is numerically invertible
    let shift = mu + C64::new(scale * 1e-13, scale * 7e-14);
    for i in 0..n {
        shifted[idx(n, i, i)] -= shift;
    }
    let lu = match Lu::new(n, &shifted) {
        Some(lu) => lu,
        None => {
            let mut e = vec![zero(); n];
            e[0] = C64::new(1.0, 0.0);
            return e;
        }
    };
    let mut x: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * i as f64, 0.05 * (i as f64 + 1.0)))
        .collect();
    for _ in 0..4 {
        let y = lu.solve(&x);
        let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            break;
        }
        x = y.into_iter().map(|z| z / nrm).collect();
    }
    // fix the phase so the largest component is real positive
    let (mut best, mut bi) = (0.0, 0);
    for (i, z) in x.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            bi = i;
        }
    }
    if best > 0.0 {
        let ph = x[bi].conj() / best;
        for z in x.iter_mut() {
            *z *= ph;
        }
    }
    x
}
