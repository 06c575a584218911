//! Symmetric tridiagonal eigenvalues by implicit-shift QL, optionally
//! tracking the first row of the eigenvector matrix (Golub-Welsch weights).

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `offdiag` (`offdiag.len() == diag.len() - 1`), together with
/// the first component of each normalized eigenvector when requested.
///
/// Output is unsorted.
pub fn tridiagonal_eigen(
    diag: &[f64],
    offdiag: &[f64],
    first_components: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&offdiag[..n.saturating_sub(1)]);
    let mut z = if first_components {
        let mut z = vec![0.0; n];
        if n > 0 {
            z[0] = 1.0;
        }
        Some(z)
    } else {
        None
    };

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::ConvergenceFailure(MAX_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Sorted eigenvalues only.
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let (mut values, _) = tridiagonal_eigen(diag, offdiag, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian_spectrum() {
        // eigenvalues of tridiag(1, 0, 1) of size n are 2 cos(k pi / (n+1))
        let n = 50;
        let values = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        let mut expect: Vec<f64> = (1..=n).map(|k| 2.0 * (k as f64 * PI / (n + 1) as f64).cos()).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn first_components_are_normalized() {
        let diag = [0.3, -1.2, 2.0, 0.7, 0.0];
        let off = [0.5, 1.1, 0.2, 0.9];
        let (values, z) = tridiagonal_eigen(&diag, &off, true).unwrap();
        let z = z.unwrap();
        let total: f64 = z.iter().map(|v| v * v).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // sum of eigenvalues equals trace; sum w_j x_j equals the (0,0) entry
        assert!((values.iter().sum::<f64>() - diag.iter().sum::<f64>()).abs() < 1e-13);
        let first_moment: f64 = values.iter().zip(&z).map(|(x, c)| x * c * c).sum();
        assert!((first_moment - diag[0]).abs() < 1e-14);
    }

    #[test]
    fn trivial_sizes() {
        assert!(tridiagonal_eigenvalues(&[], &[]).unwrap().is_empty());
        assert_eq!(tridiagonal_eigenvalues(&[3.5], &[]).unwrap(), vec![3.5]);
    }
}
