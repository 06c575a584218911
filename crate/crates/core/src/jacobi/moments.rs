//! Recurrence coefficients from power moments (Chebyshev algorithm).

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{JacobiMatrix, Route};
use crate::error::{Error, Result};
use crate::measures::{rational_to_f64, round_to_bits};
use crate::measures::MomentTable;

const CERTIFIED_DIGITS: f64 = 1e-12;

/// Monic recurrence coefficients `(alpha_k, beta_k)`, `k < n`, with
/// `beta_0 = m_0`. Needs moments up to `m_{2n-1}`.
fn chebyshev(
    m: &[BigRational],
    n: usize,
    round: &dyn Fn(BigRational) -> BigRational,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let len = 2 * n;
    if !m[0].is_positive() {
        return Err(Error::MomentsNotPositiveDefinite(0));
    }
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    alpha.push(round(&m[1] / &m[0]));
    beta.push(m[0].clone());
    let mut older: Vec<BigRational> = vec![BigRational::zero(); len];
    let mut prev: Vec<BigRational> = m[..len].to_vec();
    for k in 1..n {
        let mut cur = vec![BigRational::zero(); len];
        for l in k..len - k {
            let v = &prev[l + 1] - &alpha[k - 1] * &prev[l] - &beta[k - 1] * &older[l];
            cur[l] = round(v);
        }
        if !cur[k].is_positive() {
            return Err(Error::MomentsNotPositiveDefinite(k));
        }
        let a = round(&cur[k + 1] / &cur[k] - &prev[k] / &prev[k - 1]);
        let b = round(&cur[k] / &prev[k - 1]);
        alpha.push(a);
        beta.push(b);
        older = prev;
        prev = cur;
    }
    Ok((alpha, beta))
}

fn to_matrix(alpha: &[BigRational], beta: &[BigRational], hull: (f64, f64), route: Route) -> Result<JacobiMatrix> {
    let diag: Vec<f64> = alpha.iter().map(rational_to_f64).collect();
    let offdiag: Vec<f64> = beta[1..].iter().map(|b| rational_to_f64(b).sqrt()).collect();
    JacobiMatrix::new(diag, offdiag, hull, route)
}

/// Jacobi matrix of size `n` from a moment table (needs `nmax >= 2n - 1`).
///
/// Exact tables give exact coefficients (rounded once to `f64`). Rounded
/// tables are processed at their own precision and again at half of it;
/// the two must agree to 12 digits.
pub fn jacobi_from_moments(moments: &MomentTable, n: usize, hull: (f64, f64)) -> Result<JacobiMatrix> {
    if n == 0 || moments.values.len() < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "{n} coefficients need moments up to order {}, have {}",
            2 * n - 1,
            moments.values.len().saturating_sub(1)
        )));
    }
    match moments.precision {
        None => {
            let (alpha, beta) = chebyshev(&moments.values, n, &|r| r)?;
            to_matrix(&alpha, &beta, hull, Route::Moments { bits: None })
        }
        Some(bits) => {
            // Rounded tables come from valid measures, so a breakdown means
            // the working precision ran out.
            let full = chebyshev(&moments.values, n, &|r| round_to_bits(&r, bits))
                .map_err(|_| Error::InsufficientPrecision(f64::INFINITY))?;
            let half_bits = (bits / 2).max(16);
            let coarse_moments: Vec<BigRational> =
                moments.values.iter().map(|v| round_to_bits(v, half_bits)).collect();
            let coarse = chebyshev(&coarse_moments, n, &|r| round_to_bits(&r, half_bits))
                .map_err(|_| Error::InsufficientPrecision(f64::INFINITY))?;
            let mut worst: f64 = 0.0;
            for (a, b) in full.0.iter().zip(&coarse.0).chain(full.1.iter().zip(&coarse.1)) {
                let fa = rational_to_f64(a);
                let fb = rational_to_f64(b);
                worst = worst.max((fa - fb).abs() / fa.abs().max(1.0));
            }
            if worst > CERTIFIED_DIGITS {
                return Err(Error::InsufficientPrecision(worst));
            }
            to_matrix(&full.0, &full.1, hull, Route::Moments { bits: Some(bits) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::jacobi_arcsine;
    use crate::measures::{exact_moments, exact_moments_with_precision, MeasureSpec};
    use num_bigint::BigInt;

    #[test]
    fn arcsine_matches_closed_form() {
        let m = exact_moments(&MeasureSpec::Arcsine, 10);
        let j = jacobi_from_moments(&m, 5, (-1.0, 1.0)).unwrap();
        let c = jacobi_arcsine(5);
        for (a, b) in j.diag.iter().zip(&c.diag) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in j.offdiag.iter().zip(&c.offdiag) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn julia_two_is_rescaled_chebyshev() {
        let spec = MeasureSpec::julia(2.0).unwrap();
        let m = exact_moments(&spec, 10);
        let j = jacobi_from_moments(&m, 5, spec.hull()).unwrap();
        assert!(j.diag.iter().all(|&a| a == 0.0));
        assert!((j.offdiag[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(j.offdiag[1..].iter().all(|&b| (b - 1.0).abs() < 1e-15));
    }

    #[test]
    fn julia_first_coefficient() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        let j = jacobi_from_moments(&exact_moments(&spec, 4), 2, spec.hull()).unwrap();
        assert_eq!(j.diag, vec![0.0, 0.0]);
        assert!((j.offdiag[0] - 1.70293864).abs() < 1e-8);
    }

    #[test]
    fn rounded_route_is_certified() {
        let d0 = 2f64.ln() / 2.5f64.ln();
        let p1 = 0.3f64.powf(d0);
        let d2 = (1.0 - p1).powf(1.0 / d0);
        let spec = MeasureSpec::LinearIfs(crate::measures::LinearIfs::two_map_unit(0.3, d2, p1, 1.0 - p1).unwrap());
        let m = exact_moments(&spec, 80);
        assert!(m.precision.is_some());
        assert!(jacobi_from_moments(&m, 40, spec.hull()).is_ok());
        // half of 128 bits cannot carry 80 ill-conditioned moments to 12 digits
        let weak = exact_moments_with_precision(&spec, 80, 128);
        let r = jacobi_from_moments(&weak, 40, spec.hull());
        assert!(matches!(r, Err(Error::InsufficientPrecision(_))), "{r:?}");
    }

    #[test]
    fn indefinite_functional_is_rejected() {
        // m_2 < m_1^2 violates positivity of the 2x2 Hankel matrix
        let table = MomentTable {
            values: [1, 1, 0, 0].iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect(),
            precision: None,
        };
        assert!(matches!(
            jacobi_from_moments(&table, 2, (-1.0, 1.0)),
            Err(Error::MomentsNotPositiveDefinite(1))
        ));
    }
}
