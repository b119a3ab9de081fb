//! One-sided (Hestenes) Jacobi singular values for small complex matrices.

use super::dense::idx;
use super::C64;

const MAX_SWEEPS: usize = 60;

/// Singular values in non-increasing order.
pub fn singular_values(n: usize, a: &[C64]) -> Vec<f64> {
    // work on columns: cols[j][i] = a[i][j]
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| a[idx(n, i, j)]).collect())
        .collect();
    let tol = f64::EPSILON * n as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = &cols[p];
                    let cq = &cols[q];
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = C64::new(0.0, 0.0);
                    for i in 0..n {
                        al += cp[i].norm_sqr();
                        be += cq[i].norm_sqr();
                        ga += cp[i].conj() * cq[i];
                    }
                    (al, be, ga)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for i in 0..n {
                    let x = cp[i];
                    let y = cq[i] * phase.conj();
                    cp[i] = x * c - y * s;
                    cq[i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Largest singular value.
pub fn top_singular_value(n: usize, a: &[C64]) -> f64 {
    if n == 1 {
        return a[0].norm();
    }
    if n == 2 {
        let f = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d = (a[0] * a[3] - a[1] * a[2]).norm();
        let disc = (f * f - 4.0 * d * d).max(0.0).sqrt();
        return ((f + disc) * 0.5).sqrt();
    }
    singular_values(n, a)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let a = vec![
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, -0.5),
        ];
        let s = singular_values(2, &a);
        assert!((s[0] - 2.0).abs() < 1e-15);
        assert!((s[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shear_matches_golden_ratio() {
        // [[1,1],[0,1]]: singular values phi and 1/phi
        let a = vec![
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ];
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s = singular_values(2, &a);
        assert!((s[0] - phi).abs() < 1e-14);
        assert!((s[1] - 1.0 / phi).abs() < 1e-14);
        assert!((top_singular_value(2, &a) - phi).abs() < 1e-14);
    }
}
