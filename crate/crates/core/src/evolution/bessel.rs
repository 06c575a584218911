//! Integer-order Bessel functions of the first kind.

/// `J_0(x) ..= J_kmax(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    if x < 0.0 {
        let mut v = bessel_j_sequence(-x, kmax);
        for (k, value) in v.iter_mut().enumerate() {
            if k % 2 == 1 {
                *value = -*value;
            }
        }
        return v;
    }
    // Start far enough beyond both kmax and the turning point k = x that the
    // dominant solution has died out.
    let mut start = kmax.max(x.ceil() as usize) + 40 + (12.0 * x.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut v = vec![0.0; start + 2];
    v[start] = 1e-300;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let next = k as f64 * two_over_x * v[k] - v[k + 1];
        v[k - 1] = next;
        if next.abs() > 1e250 {
            for value in v[k - 1..].iter_mut() {
                *value *= 1e-250;
            }
        }
    }
    let mut norm = v[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * v[k];
    }
    v.truncate(kmax + 1);
    for value in &mut v {
        *value /= norm;
    }
    v
}

/// Bessel coefficients `J_0(x) ..= J_K(x)` with `K` the last index where
/// `|J_k(x)| >= tol`, capped at `max_terms`.
pub fn bessel_coefficients(x: f64, tol: f64, max_terms: usize) -> Vec<f64> {
    let x = x.abs();
    let mut kmax = (1.5 * x).ceil() as usize + 50;
    loop {
        let v = bessel_j_sequence(x, kmax);
        let last = v.iter().rposition(|c| c.abs() >= tol).unwrap_or(0);
        if last + 10 < kmax || kmax >= max_terms {
            let keep = (last + 1).min(max_terms);
            let mut v = v;
            v.truncate(keep.max(1));
            return v;
        }
        kmax *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let v = bessel_j_sequence(1.0, 5);
        assert!((v[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((v[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let w = bessel_j_sequence(10.0, 3);
        assert!((w[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((w[1] - 0.043_472_746_168_861_44).abs() < 1e-14);
    }

    #[test]
    fn negative_argument_and_zero() {
        let v = bessel_j_sequence(-2.0, 4);
        let w = bessel_j_sequence(2.0, 4);
        for k in 0..=4 {
            assert_eq!(v[k], if k % 2 == 0 { w[k] } else { -w[k] });
        }
        assert_eq!(bessel_j_sequence(0.0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn cutoff_respects_tolerance() {
        let c = bessel_coefficients(50.0, 1e-17, usize::MAX);
        assert!(c.last().unwrap().abs() >= 1e-17);
        let beyond = bessel_j_sequence(50.0, c.len() + 20);
        assert!(beyond[c.len()..].iter().all(|v| v.abs() < 1e-17));
        let deep = bessel_coefficients(20.0, 1e-250, usize::MAX);
        assert!(deep.len() > 150 && deep.last().unwrap().abs() > 0.0);
    }
}
