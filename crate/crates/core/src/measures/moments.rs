//! Power moments from the balance equation, in exact or high-precision
//! rational arithmetic.
//!
//! Parameters that are (the nearest doubles to) small rationals, such as
//! `2.9 = 29/10` or `1/3`, are lifted to those rationals and the moments are
//! exact. Anything else is lifted to the exact binary value of the double and
//! the recursion runs on dyadic rationals rounded to a working precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::MeasureSpec;

/// Working precision of the rounded moment route, in bits.
pub const DEFAULT_MOMENT_BITS: u32 = 512;

const MAX_SIMPLE_DENOMINATOR: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    /// `m_0 ..= m_nmax`.
    pub values: Vec<BigRational>,
    /// `None` when every value is exact; otherwise the rounding precision.
    pub precision: Option<u32>,
}

impl MomentTable {
    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    pub fn nmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }

    /// Leading Hankel determinants `det [m_{i+j}]_{i,j<k}` for `k = 1..=order`.
    pub fn hankel_determinants(&self, order: usize) -> Vec<BigRational> {
        let mut dets = Vec::with_capacity(order);
        for k in 1..=order.min(self.values.len().div_ceil(2)) {
            let mut a: Vec<Vec<BigRational>> =
                (0..k).map(|i| (0..k).map(|j| self.values[i + j].clone()).collect()).collect();
            dets.push(determinant(&mut a));
        }
        dets
    }
}

fn determinant(a: &mut [Vec<BigRational>]) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    // Scale to keep both parts inside f64 range before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer() / (r.denom() << shift as usize)
    } else {
        (r.numer() << (-shift) as usize) / r.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Nearest small rational reproducing `x` exactly, if any.
pub(crate) fn simple_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x == x.trunc() && x.abs() < 1e15 {
        return Some(BigRational::from_integer(BigInt::from(x as i64)));
    }
    // Continued-fraction convergents of |x|.
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..40 {
        let a = v.floor();
        if a > 1e12 {
            break;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > MAX_SIMPLE_DENOMINATOR {
            break;
        }
        if (p2 as f64) / (q2 as f64) == x.abs() {
            return Some(BigRational::new(BigInt::from(sign * p2), BigInt::from(q2)));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = v - v.floor();
        if frac == 0.0 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

/// Rounds to a dyadic rational with `bits` significant bits (truncation).
pub(crate) fn round_to_bits(r: &BigRational, bits: u32) -> BigRational {
    if r.is_zero() {
        return r.clone();
    }
    let num = r.numer().abs();
    let den = r.denom();
    let e = bits as i64 - (num.bits() as i64 - den.bits() as i64);
    let mant = if e >= 0 { (num << e as usize) / den } else { num / (den << (-e) as usize) };
    let mant = if r.is_negative() { -mant } else { mant };
    if e >= 0 {
        BigRational::new(mant, BigInt::one() << e as usize)
    } else {
        BigRational::from_integer(mant << (-e) as usize)
    }
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one(); n + 1];
    for k in 1..n {
        row[k] = &row[k - 1] * BigInt::from(n - k + 1) / BigInt::from(k);
    }
    row
}

fn pow(r: &BigRational, n: usize) -> BigRational {
    num_traits::pow(r.clone(), n)
}

/// Moments `m_0..=m_nmax`, exact whenever the parameters are simple rationals.
pub fn exact_moments(spec: &MeasureSpec, nmax: usize) -> MomentTable {
    exact_moments_with_precision(spec, nmax, DEFAULT_MOMENT_BITS)
}

/// As [`exact_moments`], with an explicit precision for the rounded route.
pub fn exact_moments_with_precision(spec: &MeasureSpec, nmax: usize, bits: u32) -> MomentTable {
    match spec {
        MeasureSpec::Arcsine => {
            let mut values = vec![BigRational::zero(); nmax + 1];
            let mut central = BigRational::one();
            for k in 0..=nmax / 2 {
                if k > 0 {
                    // C(2k,k)/4^k = C(2k-2,k-1)/4^(k-1) * (2k-1)/(2k)
                    central = central * BigRational::new(BigInt::from(2 * k - 1), BigInt::from(2 * k));
                }
                values[2 * k] = central.clone();
            }
            MomentTable { values, precision: None }
        }
        MeasureSpec::Julia(j) => {
            let (lambda, precision) = match simple_rational(j.lambda()) {
                Some(r) => (r, None),
                None => (BigRational::from_float(j.lambda()).expect("finite"), Some(bits)),
            };
            let round = |r: BigRational| match precision {
                Some(b) => round_to_bits(&r, b),
                None => r,
            };
            let mut values = vec![BigRational::zero(); nmax + 1];
            values[0] = BigRational::one();
            for m in 1..=nmax / 2 {
                let row = binomial_row(m);
                let mut acc = BigRational::zero();
                for k in (0..=m).step_by(2) {
                    // odd moments vanish
                    let term = BigRational::from_integer(row[k].clone()) * pow(&lambda, m - k) * &values[k];
                    acc += term;
                }
                values[2 * m] = round(acc);
            }
            MomentTable { values, precision }
        }
        MeasureSpec::LinearIfs(ifs) => {
            let lifted: Vec<Option<(BigRational, BigRational, BigRational)>> = ifs
                .maps()
                .iter()
                .zip(ifs.probs())
                .map(|(m, &p)| Some((simple_rational(m.delta)?, simple_rational(m.theta)?, simple_rational(p)?)))
                .collect();
            let exact_params: Option<Vec<_>> = lifted.into_iter().collect();
            let (params, precision) = match exact_params {
                Some(p) if p.iter().map(|t| t.2.clone()).sum::<BigRational>().is_one() => (p, None),
                _ => {
                    let raw: Vec<_> = ifs
                        .maps()
                        .iter()
                        .zip(ifs.probs())
                        .map(|(m, &p)| {
                            (
                                BigRational::from_float(m.delta).expect("finite"),
                                BigRational::from_float(m.theta).expect("finite"),
                                BigRational::from_float(p).expect("finite"),
                            )
                        })
                        .collect();
                    (raw, Some(bits))
                }
            };
            // Normalize the probabilities exactly so that m_0 = 1.
            let total: BigRational = params.iter().map(|t| t.2.clone()).sum();
            let params: Vec<_> = params.into_iter().map(|(d, t, p)| (d, t, p / &total)).collect();
            let round = |r: BigRational| match precision {
                Some(b) => round_to_bits(&r, b),
                None => r,
            };
            let mut values: Vec<BigRational> = Vec::with_capacity(nmax + 1);
            values.push(BigRational::one());
            // delta_i^k and theta_i^k tables, grown incrementally
            let mut dpow: Vec<Vec<BigRational>> = params.iter().map(|_| vec![BigRational::one()]).collect();
            let mut tpow: Vec<Vec<BigRational>> = params.iter().map(|_| vec![BigRational::one()]).collect();
            for n in 1..=nmax {
                for (i, (d, t, _)) in params.iter().enumerate() {
                    let nd = round(&dpow[i][n - 1] * d);
                    let nt = round(&tpow[i][n - 1] * t);
                    dpow[i].push(nd);
                    tpow[i].push(nt);
                }
                let row = binomial_row(n);
                let mut numer = BigRational::zero();
                let mut denom = BigRational::one();
                for (i, (_, _, p)) in params.iter().enumerate() {
                    let mut inner = BigRational::zero();
                    for k in 0..n {
                        if tpow[i][n - k].is_zero() {
                            continue;
                        }
                        inner += BigRational::from_integer(row[k].clone()) * &dpow[i][k] * &tpow[i][n - k] * &values[k];
                    }
                    numer += p * inner;
                    denom -= p * &dpow[i][n];
                }
                values.push(round(numer / denom));
            }
            MomentTable { values, precision }
        }
    }
}
