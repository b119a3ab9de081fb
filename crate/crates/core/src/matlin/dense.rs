//! Raw row-major complex kernels shared by the projective layer.

use super::C64;

#[inline]
pub(crate) fn idx(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

pub(crate) fn matmul_into(n: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    if n == 2 {
        out[0] = a[0] * b[0] + a[1] * b[2];
        out[1] = a[0] * b[1] + a[1] * b[3];
        out[2] = a[2] * b[0] + a[3] * b[2];
        out[3] = a[2] * b[1] + a[3] * b[3];
        return;
    }
    for v in out.iter_mut() {
        *v = C64::new(0.0, 0.0);
    }
    for i in 0..n {
        for k in 0..n {
            let aik = a[idx(n, i, k)];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bkj) in orow.iter_mut().zip(row) {
                *o += aik * bkj;
            }
        }
    }
}

pub(crate) fn max_abs(a: &[C64]) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// LU factorisation with partial pivoting. Returns `None` for an exactly
/// singular pivot. The determinant sign/phase is tracked in the result.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    parity: bool,
}

impl Lu {
    pub(crate) fn new(n: usize, a: &[C64]) -> Option<Lu> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[idx(n, k, k)].norm();
            for i in k + 1..n {
                let v = lu[idx(n, i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(idx(n, k, j), idx(n, p, j));
                }
                perm.swap(k, p);
                parity = !parity;
            }
            let pivot = lu[idx(n, k, k)];
            for i in k + 1..n {
                let f = lu[idx(n, i, k)] / pivot;
                lu[idx(n, i, k)] = f;
                for j in k + 1..n {
                    let u = lu[idx(n, k, j)];
                    lu[idx(n, i, j)] -= f * u;
                }
            }
        }
        Some(Lu { n, lu, perm, parity })
    }

    pub(crate) fn det(&self) -> C64 {
        let mut d = C64::new(if self.parity { -1.0 } else { 1.0 }, 0.0);
        for k in 0..self.n {
            d *= self.lu[idx(self.n, k, k)];
        }
        d
    }

    /// Smallest pivot modulus relative to the largest, a cheap condition proxy.
    pub(crate) fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..self.n {
            let v = self.lu[idx(self.n, k, k)].norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    pub(crate) fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[idx(n, i, k)];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[idx(n, i, k)];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= self.lu[idx(n, i, i)];
        }
        x
    }

    pub(crate) fn inverse(&self) -> Vec<C64> {
        let n = self.n;
        let mut inv = vec![C64::new(0.0, 0.0); n * n];
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            for v in e.iter_mut() {
                *v = C64::new(0.0, 0.0);
            }
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                inv[idx(n, i, j)] = col[i];
            }
        }
        inv
    }
}

pub(crate) fn det(n: usize, a: &[C64]) -> C64 {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => Lu::new(n, a).map(|lu| lu.det()).unwrap_or(C64::new(0.0, 0.0)),
    }
}

/// Orthonormalise the given columns in place (modified Gram-Schmidt).
/// Returns the smallest norm encountered before normalisation.
pub(crate) fn orthonormalize(cols: &mut [Vec<C64>]) -> f64 {
    let mut min_norm = f64::INFINITY;
    for j in 0..cols.len() {
        for i in 0..j {
            let (head, tail) = cols.split_at_mut(j);
            let qi = &head[i];
            let v = &mut tail[0];
            let proj: C64 = qi.iter().zip(v.iter()).map(|(q, x)| q.conj() * x).sum();
            for (x, q) in v.iter_mut().zip(qi.iter()) {
                *x -= proj * q;
            }
        }
        let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        min_norm = min_norm.min(nrm);
        if nrm > 0.0 {
            for x in cols[j].iter_mut() {
                *x /= nrm;
            }
        }
    }
    min_norm
}
