//! Jacobi matrices from atomic measures, Gauss rules, and closed forms.

use std::f64::consts::FRAC_1_SQRT_2;

use super::eigen::tridiagonal_eigen;
use super::{JacobiMatrix, Route};
use crate::error::{Error, Result};
use crate::measures::{atomic_approximation, balance_pushforward, composite_rule, Atom, DiscreteMeasure, MeasureSpec};

/// Degrees checked for discrete orthonormality after a reduction.
const ORTHO_CHECK_DEGREE: usize = 40;
const ORTHO_TOLERANCE: f64 = 1e-8;

/// Orthonormal Chebyshev polynomials of the first kind on `[-1, 1]`.
pub fn jacobi_arcsine(n: usize) -> JacobiMatrix {
    let n = n.max(1);
    let offdiag: Vec<f64> = (0..n - 1).map(|k| if k == 0 { FRAC_1_SQRT_2 } else { 0.5 }).collect();
    JacobiMatrix { diag: vec![0.0; n], offdiag, hull: (-1.0, 1.0), route: Route::ClosedForm }
}

/// Monic recurrence coefficients `(alpha, beta)` of a discrete measure, with
/// `beta_0` the total mass, by Givens-type updating (one atom at a time).
///
/// Only the leading `n` coefficients are maintained, which keeps the cost at
/// `O(atoms * n)`; the bulge chase never feeds information upwards, so the
/// leading block is unaffected by the truncation.
fn rkpw(atoms: &[Atom], n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.min(atoms.len());
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    alpha[0] = atoms[0].x;
    beta[0] = atoms[0].w;
    for (i, atom) in atoms.iter().enumerate().skip(1) {
        let mut pn = atom.w;
        let xlam = atom.x;
        let (mut gam, mut sig, mut t) = (1.0f64, 0.0f64, 0.0f64);
        let top = (i + 1).min(n);
        // Rows that have not been reached yet start from the new atom.
        if i < n {
            alpha[i] = xlam;
        }
        for k in 0..top {
            let rho = beta[k] + pn;
            let tmp = gam * rho;
            let tsig = sig;
            if rho <= 0.0 {
                gam = 1.0;
                sig = 0.0;
            } else {
                gam = beta[k] / rho;
                sig = pn / rho;
            }
            let tk = sig * (alpha[k] - xlam) - gam * t;
            alpha[k] -= tk - t;
            t = tk;
            pn = if sig <= 0.0 { tsig * beta[k] } else { t * t / sig };
            beta[k] = tmp;
        }
    }
    (alpha, beta)
}

fn matrix_from_monic(
    alpha: Vec<f64>,
    beta: &[f64],
    hull: (f64, f64),
    route: Route,
) -> Result<JacobiMatrix> {
    let offdiag: Vec<f64> = beta[1..alpha.len()].iter().map(|b| b.sqrt()).collect();
    JacobiMatrix::new(alpha, offdiag, hull, route)
}

fn hull_of(d: &DiscreteMeasure) -> (f64, f64) {
    let lo = d.atoms.iter().map(|a| a.x).fold(f64::INFINITY, f64::min);
    let hi = d.atoms.iter().map(|a| a.x).fold(f64::NEG_INFINITY, f64::max);
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Largest deviation of the discrete Gram matrix of `p_0..p_m` from the
/// identity.
pub(crate) fn orthonormality_defect(j: &JacobiMatrix, d: &DiscreteMeasure, m: usize) -> f64 {
    let m = m.min(j.len() - 1);
    let mut gram = vec![0.0; (m + 1) * (m + 1)];
    let mut p = vec![0.0; m + 1];
    for a in &d.atoms {
        p[0] = 1.0;
        let mut prev = 0.0;
        for k in 0..m {
            let back = if k > 0 { j.offdiag[k - 1] * prev } else { 0.0 };
            prev = p[k];
            p[k + 1] = ((a.x - j.diag[k]) * p[k] - back) / j.offdiag[k];
        }
        for r in 0..=m {
            let wr = a.w * p[r];
            for c in r..=m {
                gram[r * (m + 1) + c] += wr * p[c];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for r in 0..=m {
        for c in r..=m {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[r * (m + 1) + c] - target).abs());
        }
    }
    worst
}

/// Jacobi matrix of size `n` of a discrete measure.
///
/// Requires at least `4n` atoms. The result is checked for discrete
/// orthonormality up to degree 40.
pub fn jacobi_from_discrete(d: &DiscreteMeasure, n: usize) -> Result<JacobiMatrix> {
    if n == 0 || d.len() < 4 * n {
        return Err(Error::TooFewAtoms { atoms: d.len(), requested: n });
    }
    let (alpha, beta) = rkpw(&d.atoms, n);
    let route = Route::Discrete { atoms: d.len(), max_cell_diameter: d.max_cell_diameter };
    let j = matrix_from_monic(alpha, &beta, hull_of(d), route)?;
    let defect = orthonormality_defect(&j, d, ORTHO_CHECK_DEGREE);
    if !(defect <= ORTHO_TOLERANCE) {
        return Err(Error::LostOrthogonality(defect));
    }
    Ok(j)
}

/// `n`-point Gauss rule of the leading `n x n` block (Golub-Welsch), atoms
/// sorted by position.
pub fn gauss_rule(j: &JacobiMatrix, n: usize) -> Result<DiscreteMeasure> {
    if n == 0 || n > j.len() {
        return Err(Error::InvalidArgument(format!("gauss rule of size {n} from a matrix of size {}", j.len())));
    }
    let (x, z) = tridiagonal_eigen(&j.diag[..n], &j.offdiag[..n - 1], true)?;
    let z = z.expect("first components requested");
    let mut atoms: Vec<Atom> = x.into_iter().zip(z).map(|(x, c)| Atom { x, w: c * c }).collect();
    atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    let total: f64 = atoms.iter().map(|a| a.w).sum();
    for a in &mut atoms {
        a.w /= total;
    }
    Ok(DiscreteMeasure { atoms, source_level: 0, max_cell_diameter: None })
}

const REFINE_TOLERANCE: f64 = 1e-15;
const REFINE_MAX_ITERATIONS: usize = 400;
/// Iterations without halving the best change before rounding noise is
/// assumed to dominate.
const REFINE_PATIENCE: usize = 6;
/// Largest accepted noise floor per matrix row, relative to the largest
/// entry; rounding in the eigensolver and the reduction grows with size.
const REFINE_ACCEPT: f64 = 1e-13;

/// Jacobi matrix of size `n` of a linear IFS measure as the fixed point of
/// `J -> reduce(pushforward(gauss_rule(J)))`.
///
/// The `n`-point Gauss rule integrates degree `2n - 1` exactly, and the
/// balance pushforward maps exact moments to exact moments, so the exact
/// matrix is a fixed point. Errors contract at least by `sum_i pi_i delta_i`
/// per step.
pub fn jacobi_ifs_refined(spec: &MeasureSpec, n: usize) -> Result<JacobiMatrix> {
    if spec.as_linear().is_none() {
        return Err(Error::InvalidArgument("refinement applies to linear IFS only".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("size must be positive".into()));
    }
    let m = spec.map_count();
    let mut level = 0;
    while m.pow(level as u32) < 4 * n && m.pow(level as u32 + 1) <= crate::measures::cell_cap() {
        level += 1;
    }
    let start = atomic_approximation(spec, level)?;
    let hull = spec.hull();
    let (alpha, beta) = rkpw(&start.atoms, n);
    let mut j = matrix_from_monic(alpha, &beta, hull, Route::IfsRefined { iterations: 0, change: f64::INFINITY })?;
    let mut best = f64::INFINITY;
    let mut stale = 0;
    for it in 1..=REFINE_MAX_ITERATIONS {
        let g = gauss_rule(&j, n)?;
        let pushed = balance_pushforward(&g, spec)?;
        let (alpha, beta) = rkpw(&pushed.atoms, n);
        let next = matrix_from_monic(alpha, &beta, hull, Route::IfsRefined { iterations: it, change: 0.0 })?;
        let change = j
            .diag
            .iter()
            .zip(&next.diag)
            .chain(j.offdiag.iter().zip(&next.offdiag))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        j = next;
        j.route = Route::IfsRefined { iterations: it, change };
        if change <= REFINE_TOLERANCE {
            return Ok(j);
        }
        if change < 0.5 * best {
            best = change;
            stale = 0;
        } else {
            stale += 1;
            if stale >= REFINE_PATIENCE {
                break;
            }
        }
    }
    let scale = j.diag.iter().chain(&j.offdiag).fold(1.0f64, |acc, v| acc.max(v.abs()));
    if best <= REFINE_ACCEPT * scale * n.max(10) as f64 {
        Ok(j)
    } else {
        Err(Error::ConvergenceFailure(REFINE_MAX_ITERATIONS))
    }
}

/// Jacobi matrix of the balanced Julia measure from the renormalization
/// recursion of its monic polynomials, `P_2n(x) = P_n(x^2 - lambda)`.
///
/// With `B_k = b_{k-1}^2` and `B_0 = 0`: `B_2k + B_2k+1 = lambda` and
/// `B_2k B_2k-1 = B_k`.
pub fn jacobi_julia(lambda: f64, n: usize) -> Result<JacobiMatrix> {
    let spec = MeasureSpec::julia(lambda)?;
    let n = n.max(1);
    let mut big = vec![0.0; n.max(2)];
    big[1] = lambda;
    for k in 2..n {
        big[k] = if k % 2 == 0 { big[k / 2] / big[k - 1] } else { lambda - big[k - 1] };
    }
    let offdiag: Vec<f64> = big[1..n].iter().map(|b| b.sqrt()).collect();
    JacobiMatrix::new(vec![0.0; n], offdiag, spec.hull(), Route::JuliaRenormalization)
}

/// Best available Jacobi matrix of size `n` for a measure.
pub fn jacobi_for_measure(spec: &MeasureSpec, n: usize) -> Result<JacobiMatrix> {
    match spec {
        MeasureSpec::Arcsine => Ok(jacobi_arcsine(n)),
        MeasureSpec::Julia(j) => jacobi_julia(j.lambda(), n),
        // The fixed point can stall above its noise floor when the IFS
        // contracts slowly; the composite rule does not iterate.
        MeasureSpec::LinearIfs(_) if n <= REFINED_MAX_SIZE => match jacobi_ifs_refined(spec, n) {
            Err(Error::ConvergenceFailure(_)) => jacobi_ifs_composite(spec, n),
            other => other,
        },
        MeasureSpec::LinearIfs(_) => jacobi_ifs_composite(spec, n),
    }
}

/// Largest size handled by the Gauss fixed point; beyond it the iteration
/// stalls at a rounding floor that grows with size.
const REFINED_MAX_SIZE: usize = 512;
const COMPOSITE_BASE: usize = 24;
/// Leaf weight is `COMPOSITE_BASE / (COMPOSITE_SPREAD n)`: each leaf then
/// holds a small fraction of the zeros of `p_n`.
const COMPOSITE_SPREAD: f64 = 10.0;

/// Jacobi matrix of size `n` of a linear IFS from a composite Gauss rule
/// (see [`composite_rule`]). Suited to large `n`.
pub fn jacobi_ifs_composite(spec: &MeasureSpec, n: usize) -> Result<JacobiMatrix> {
    let small = jacobi_ifs_refined(spec, COMPOSITE_BASE)?;
    let base = gauss_rule(&small, COMPOSITE_BASE)?;
    let max_weight = COMPOSITE_BASE as f64 / (COMPOSITE_SPREAD * n as f64);
    let mut rule = composite_rule(spec, &base, max_weight)?;
    // Ascending positions keep the reduction's sweeps short-range.
    rule.atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    let (alpha, beta) = rkpw(&rule.atoms, n);
    let route = Route::Discrete { atoms: rule.len(), max_cell_diameter: rule.max_cell_diameter };
    let j = matrix_from_monic(alpha, &beta, spec.hull(), route)?;
    let defect = orthonormality_defect(&j, &rule, ORTHO_CHECK_DEGREE);
    if !(defect <= ORTHO_TOLERANCE) {
        return Err(Error::LostOrthogonality(defect));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::jacobi_from_moments;
    use crate::measures::exact_moments;

    fn max_diff(a: &JacobiMatrix, b: &JacobiMatrix, n: usize) -> f64 {
        let da = a.diag[..n].iter().zip(&b.diag[..n]).map(|(x, y)| (x - y).abs());
        let db = a.offdiag[..n - 1].iter().zip(&b.offdiag[..n - 1]).map(|(x, y)| (x - y).abs());
        da.chain(db).fold(0.0, f64::max)
    }

    #[test]
    fn arcsine_small_sizes() {
        let j = jacobi_arcsine(3);
        assert_eq!(j.diag, vec![0.0; 3]);
        assert_eq!(j.offdiag, vec![FRAC_1_SQRT_2, 0.5]);
        let one = jacobi_arcsine(1);
        assert_eq!(one.diag, vec![0.0]);
        assert!(one.offdiag.is_empty());
    }

    #[test]
    fn chebyshev_nodes_reproduce_arcsine() {
        let d = atomic_approximation(&MeasureSpec::Arcsine, 12).unwrap();
        assert_eq!(d.len(), 4096);
        let j = jacobi_from_discrete(&d, 30).unwrap();
        assert!(max_diff(&j, &jacobi_arcsine(30), 30) < 1e-10);
    }

    #[test]
    fn too_few_atoms() {
        let d = DiscreteMeasure::uniform(&[0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(jacobi_from_discrete(&d, 10), Err(Error::TooFewAtoms { atoms: 3, requested: 10 })));
    }

    #[test]
    fn gauss_rule_recovers_matrix() {
        let j = jacobi_julia(2.9, 40).unwrap();
        let g = gauss_rule(&j, 40).unwrap();
        let (alpha, beta) = rkpw(&g.atoms, 40);
        let back = matrix_from_monic(alpha, &beta, j.hull, Route::ClosedForm).unwrap();
        assert!(max_diff(&back, &j, 40) < 1e-12);
    }

    #[test]
    fn julia_recursion_matches_moments() {
        for lambda in [2.0, 2.5, 2.9] {
            let spec = MeasureSpec::julia(lambda).unwrap();
            let exact = jacobi_from_moments(&exact_moments(&spec, 80), 40, spec.hull()).unwrap();
            let rec = jacobi_julia(lambda, 40).unwrap();
            assert!(max_diff(&exact, &rec, 40) < 1e-12, "lambda {lambda}");
        }
    }

    #[test]
    fn julia_midpoint_atoms_are_a_gauss_rule() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        let d = atomic_approximation(&spec, 8).unwrap();
        let j = jacobi_from_discrete(&d, 40).unwrap();
        assert!(max_diff(&j, &jacobi_julia(2.9, 40).unwrap(), 40) < 1e-11);
        assert!(j.diag.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn refined_cantor_matches_moments() {
        let spec = MeasureSpec::cantor_thirds();
        let exact = jacobi_from_moments(&exact_moments(&spec, 80), 40, spec.hull()).unwrap();
        let refined = jacobi_ifs_refined(&spec, 40).unwrap();
        assert!(max_diff(&exact, &refined, 40) < 1e-12);
    }
}
