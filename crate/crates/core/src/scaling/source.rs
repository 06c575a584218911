//! Operators to evolve, sized on demand, and sweeps over target times.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{gaussian_sweep, PropagationParams, Propagator, SweepResult};
use crate::jacobi::{jacobi_barrier, jacobi_for_measure, BarrierSpec, JacobiMatrix};
use crate::measures::MeasureSpec;

/// Something that yields a Jacobi matrix of a requested size.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Matrix(JacobiMatrix),
    Measure(MeasureSpec),
    Barrier(BarrierSpec),
}

impl Operator {
    pub fn build(&self, n: usize) -> Result<JacobiMatrix> {
        match self {
            Operator::Matrix(j) => Ok(j.truncate(n.min(j.len()))),
            Operator::Measure(spec) => jacobi_for_measure(spec, n),
            Operator::Barrier(spec) => {
                let size = n.min(spec.size);
                let sites = spec.sites.iter().copied().filter(|&l| l < size).collect();
                jacobi_barrier(&BarrierSpec { sites, size, ..spec.clone() })
            }
        }
    }

    pub fn max_size(&self) -> usize {
        match self {
            Operator::Matrix(j) => j.len(),
            Operator::Measure(_) => usize::MAX,
            Operator::Barrier(spec) => spec.size,
        }
    }

    /// Half-width of the spectral interval used by the truncation rule.
    pub fn radius(&self) -> Result<f64> {
        let hull = match self {
            Operator::Matrix(j) => j.hull,
            Operator::Measure(spec) => spec.hull(),
            Operator::Barrier(spec) => jacobi_barrier(spec)?.hull,
        };
        Ok(0.5 * (hull.1 - hull.0))
    }

    /// Linear IFS matrices are costly to build at large sizes, so sweeps on
    /// them start small and double.
    fn costly(&self) -> bool {
        matches!(self, Operator::Measure(MeasureSpec::LinearIfs(_)))
    }

    /// Truncation rule `ceil(1.2 r t) + 64`, capped by the operator size.
    pub fn rule_size(&self, t: f64) -> Result<usize> {
        let n = (1.2 * self.radius()? * t).ceil() as usize + 64;
        Ok(n.min(self.max_size()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub params: PropagationParams,
    /// Samples per unit of `log s` in the Gaussian time grid.
    pub density: f64,
    /// First truncation tried for costly operators.
    pub start_size: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { params: PropagationParams::default(), density: 400.0, start_size: 2048 }
    }
}

/// Runs `attempt` with growing truncations until the guard band stays below
/// the tolerance.
fn sized<T>(
    op: &Operator,
    t_end: f64,
    opts: &SweepOptions,
    attempt: impl Fn(&JacobiMatrix) -> Result<(T, f64)>,
) -> Result<T> {
    let rule = op.rule_size(t_end)?;
    let mut n = if op.costly() { rule.min(opts.start_size) } else { rule };
    loop {
        let j = op.build(n)?;
        let (value, tail) = attempt(&j)?;
        if tail <= opts.params.tail_tol {
            return Ok(value);
        }
        if n >= rule {
            return Err(Error::TruncationTooSmall(tail));
        }
        n = (2 * n).min(rule);
    }
}

/// Gaussian sweep over `targets` with a certified truncation.
pub fn run_sweep(op: &Operator, targets: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    let t_max = targets.iter().cloned().fold(0.0, f64::max);
    sized(op, 5.0 * t_max, opts, |j| {
        let r = gaussian_sweep(j, j.len(), targets, opts.density, &opts.params)?;
        let tail = r.max_tail;
        Ok((r, tail))
    })
}

/// Occupation probabilities `|psi_n(t)|^2` at a list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketSeries {
    pub times: Vec<f64>,
    /// Trailing zeros removed.
    pub probs: Vec<Vec<f64>>,
    pub truncation: usize,
    pub max_tail: f64,
}

/// Instantaneous packets at increasing `times`, stepping one propagator.
pub fn run_packets(op: &Operator, times: &[f64], opts: &SweepOptions) -> Result<PacketSeries> {
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be non-negative and increasing".into()));
    }
    let t_max = times.last().copied().unwrap_or(0.0);
    sized(op, t_max, opts, |j| {
        let mut prop = Propagator::from_ground(j, j.len(), opts.params)?;
        let mut probs = Vec::with_capacity(times.len());
        for &t in times {
            prop.advance(t - prop.time())?;
            let mut p: Vec<f64> = prop.state().iter().map(|a| a.norm_sqr()).collect();
            let keep = p.iter().rposition(|&v| v > 0.0).map_or(1, |i| i + 1);
            p.truncate(keep);
            probs.push(p);
        }
        let tail = prop.max_tail();
        Ok((PacketSeries { times: times.to_vec(), probs, truncation: j.len(), max_tail: tail }, tail))
    })
}

/// Runs independent jobs in parallel, keeping input order.
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn costly_operator_grows_until_certified() {
        let op = Operator::Measure(MeasureSpec::cantor_thirds());
        let opts = SweepOptions { start_size: 16, ..Default::default() };
        let s = run_packets(&op, &[5.0, 40.0], &opts).unwrap();
        assert!(s.truncation > 16 && s.max_tail <= 1e-12);
        let total: f64 = s.probs[1].iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn capped_matrix_reports_short_truncation() {
        let op = Operator::Matrix(crate::jacobi::jacobi_arcsine(30));
        assert!(matches!(run_packets(&op, &[40.0], &SweepOptions::default()), Err(Error::TruncationTooSmall(_))));
    }
}
