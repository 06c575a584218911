//! Expansion coefficients of `p_n(l_i(s))` in the basis `p_k(s)`.

use super::JacobiMatrix;
use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, LinearIfs};

/// `coeffs[i][n][k] = Gamma^n_{i,k}`, zero for `k > n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTensor {
    pub n_max: usize,
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl GammaTensor {
    pub fn get(&self, map: usize, n: usize, k: usize) -> f64 {
        self.coeffs[map][n][k]
    }

    /// `sum_k (Gamma^n_{i,k})^2`.
    pub fn norm_squared(&self, map: usize, n: usize) -> f64 {
        self.coeffs[map][n].iter().map(|g| g * g).sum()
    }
}

fn polys(j: &JacobiMatrix, x: f64, n_max: usize, out: &mut [f64]) {
    out[0] = 1.0;
    let mut prev = 0.0;
    for k in 0..n_max {
        let back = if k > 0 { j.offdiag[k - 1] * prev } else { 0.0 };
        prev = out[k];
        out[k + 1] = ((x - j.diag[k]) * out[k] - back) / j.offdiag[k];
    }
}

/// `Gamma^n_{i,k} = sum_atoms w p_n(l_i(x)) p_k(x)` for `k <= n <= n_max`.
///
/// `d` must integrate polynomials of degree `2 n_max` exactly (a Gauss rule
/// of size `n_max + 1` or larger, or a fine atomic image).
pub fn gamma_coefficients(j: &JacobiMatrix, ifs: &LinearIfs, n_max: usize, d: &DiscreteMeasure) -> Result<GammaTensor> {
    if d.len() < n_max + 1 {
        return Err(Error::TooFewAtoms { atoms: d.len(), requested: n_max + 1 });
    }
    if n_max >= j.len() {
        return Err(Error::InvalidArgument(format!("degree {n_max} needs a Jacobi matrix of size {}", n_max + 1)));
    }
    let maps = ifs.maps();
    let mut coeffs = vec![vec![vec![0.0; n_max + 1]; n_max + 1]; maps.len()];
    let mut base = vec![0.0; n_max + 1];
    let mut image = vec![0.0; n_max + 1];
    for a in &d.atoms {
        polys(j, a.x, n_max, &mut base);
        for (i, map) in maps.iter().enumerate() {
            polys(j, map.apply(a.x), n_max, &mut image);
            for n in 0..=n_max {
                let wn = a.w * image[n];
                for k in 0..=n {
                    coeffs[i][n][k] += wn * base[k];
                }
            }
        }
    }
    Ok(GammaTensor { n_max, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{gauss_rule, jacobi_ifs_refined};
    use crate::measures::MeasureSpec;

    #[test]
    fn leading_and_constant_coefficients() {
        let spec = MeasureSpec::LinearIfs(LinearIfs::two_map_unit(0.25, 0.5, 0.5, 0.5).unwrap());
        let ifs = spec.as_linear().unwrap();
        let j = jacobi_ifs_refined(&spec, 24).unwrap();
        let g = gamma_coefficients(&j, ifs, 10, &gauss_rule(&j, 24).unwrap()).unwrap();
        for (i, m) in ifs.maps().iter().enumerate() {
            assert!((g.get(i, 0, 0) - 1.0).abs() < 1e-13);
            for n in 0..=10 {
                assert!((g.get(i, n, n) - m.delta.powi(n as i32)).abs() < 1e-10, "map {i} n {n}");
            }
        }
    }

    #[test]
    fn parseval_on_cantor() {
        let spec = MeasureSpec::cantor_thirds();
        let ifs = spec.as_linear().unwrap();
        let j = jacobi_ifs_refined(&spec, 16).unwrap();
        let rule = gauss_rule(&j, 16).unwrap();
        let g = gamma_coefficients(&j, ifs, 4, &rule).unwrap();
        let mut p = vec![0.0; 5];
        let direct: f64 = rule
            .atoms
            .iter()
            .map(|a| {
                polys(&j, a.x / 3.0, 4, &mut p);
                a.w * p[4] * p[4]
            })
            .sum();
        assert!((g.norm_squared(0, 4) - direct).abs() < 1e-9 * direct.max(1.0));
    }
}
