//! Orthogonality measures: linear iterated function systems, the balanced
//! measure of the real quadratic Julia set, and the arcsine baseline.
//!
//! Every measure is described declaratively by a [`MeasureSpec`], which is
//! validated on construction and immutable afterwards. The IFS view is shared
//! by all three families: each exposes a finite family of monotone maps with
//! probabilities, and the convex hull of its support.

mod cylinders;
mod moments;

pub use cylinders::{
    atomic_approximation, balance_pushforward, cell_cap, composite_rule, cylinders, resolved_atoms,
    set_cell_cap, Atom, Cell, CylinderCover, DiscreteMeasure, DEFAULT_CELL_CAP,
};
pub use moments::{exact_moments, exact_moments_with_precision, MomentTable, DEFAULT_MOMENT_BITS};
pub(crate) use moments::{rational_to_f64, round_to_bits};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine contraction `s -> delta * s + theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub delta: f64,
    pub theta: f64,
}

impl AffineMap {
    pub fn apply(&self, s: f64) -> f64 {
        self.delta * s + self.theta
    }

    /// The unique fixed point `theta / (1 - delta)`.
    pub fn fixed_point(&self) -> f64 {
        if let (Some(d), Some(t)) = (moments::simple_rational(self.delta), moments::simple_rational(self.theta)) {
            return moments::rational_to_f64(&(t / (num_rational::BigRational::from_integer(1.into()) - d)));
        }
        self.theta / (1.0 - self.delta)
    }
}

/// Linear IFS `{l_i, pi_i}` with orientation-preserving contractions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearIfs {
    maps: Vec<AffineMap>,
    probs: Vec<f64>,
    hull: (f64, f64),
    disconnected: bool,
}

impl LinearIfs {
    pub fn new(maps: Vec<AffineMap>, probs: Vec<f64>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidMeasure("a linear IFS needs at least 2 maps".into()));
        }
        if maps.len() != probs.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} maps but {} probabilities",
                maps.len(),
                probs.len()
            )));
        }
        for m in &maps {
            if !(m.delta > 0.0 && m.delta < 1.0) {
                return Err(Error::ContractionOutOfRange(m.delta));
            }
            if !m.theta.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite offset {}", m.theta)));
            }
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) || (total - 1.0).abs() > 1e-14 {
            return Err(Error::NonStochasticWeights(total));
        }
        let lo = maps.iter().map(AffineMap::fixed_point).fold(f64::INFINITY, f64::min);
        let hi = maps.iter().map(AffineMap::fixed_point).fold(f64::NEG_INFINITY, f64::max);
        if !(lo < hi) {
            return Err(Error::InvalidMeasure("degenerate hull: all maps share a fixed point".into()));
        }
        let mut images: Vec<(f64, f64)> =
            maps.iter().map(|m| (m.apply(lo), m.apply(hi))).collect();
        images.sort_by(|a, b| a.0.total_cmp(&b.0));
        let disconnected = images.windows(2).all(|w| w[0].1 < w[1].0);
        Ok(Self { maps, probs, hull: (lo, hi), disconnected })
    }

    /// Two-map IFS with hull `[0, 1]`: `l_1(s) = d1 s`, `l_2(s) = d2 s + 1 - d2`.
    pub fn two_map_unit(d1: f64, d2: f64, p1: f64, p2: f64) -> Result<Self> {
        // Keep 1 - d2 a simple rational when d2 is one, so moments stay exact.
        let theta = match moments::simple_rational(d2) {
            Some(q) => moments::rational_to_f64(&(num_rational::BigRational::from_integer(1.into()) - q)),
            None => 1.0 - d2,
        };
        Self::new(
            vec![AffineMap { delta: d1, theta: 0.0 }, AffineMap { delta: d2, theta }],
            vec![p1, p2],
        )
    }

    /// Middle-thirds Cantor measure on `[0, 1]`.
    pub fn cantor_thirds() -> Self {
        Self::two_map_unit(1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5).expect("static parameters")
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn hull(&self) -> (f64, f64) {
        self.hull
    }

    /// True iff the first-level images of the hull are pairwise disjoint.
    pub fn is_disconnected(&self) -> bool {
        self.disconnected
    }

    pub fn max_contraction(&self) -> f64 {
        self.maps.iter().map(|m| m.delta).fold(0.0, f64::max)
    }
}

/// Balanced measure on the Julia set of `z^2 - lambda`, `lambda >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticJulia {
    lambda: f64,
    fixed_point: f64,
}

impl QuadraticJulia {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 2.0 {
            return Err(Error::LambdaBelowTwo(lambda));
        }
        let fixed_point = 0.5 * (1.0 + (1.0 + 4.0 * lambda).sqrt());
        Ok(Self { lambda, fixed_point })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Fixed point of `phi_+`, the right end of the support.
    pub fn fixed_point(&self) -> f64 {
        self.fixed_point
    }

    /// Inverse branch `phi_j(s) = j sqrt(s + lambda)`; `plus` selects `j = +1`.
    pub fn branch(&self, plus: bool, s: f64) -> f64 {
        let r = (s + self.lambda).max(0.0).sqrt();
        if plus {
            r
        } else {
            -r
        }
    }
}

/// Declarative description of an orthogonality measure.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    LinearIfs(LinearIfs),
    Julia(QuadraticJulia),
    /// `ds / (pi sqrt(1 - s^2))` on `[-1, 1]`.
    Arcsine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum MeasureJson {
    LinearIfs { maps: Vec<AffineMap>, probs: Vec<f64> },
    Julia { lambda: f64 },
    Arcsine,
}

impl MeasureSpec {
    pub fn julia(lambda: f64) -> Result<Self> {
        QuadraticJulia::new(lambda).map(MeasureSpec::Julia)
    }

    pub fn linear(maps: Vec<AffineMap>, probs: Vec<f64>) -> Result<Self> {
        LinearIfs::new(maps, probs).map(MeasureSpec::LinearIfs)
    }

    pub fn cantor_thirds() -> Self {
        MeasureSpec::LinearIfs(LinearIfs::cantor_thirds())
    }

    /// Re-checks all parameters and recomputes derived fields.
    pub fn validate(self) -> Result<Self> {
        match self {
            MeasureSpec::LinearIfs(ifs) => {
                LinearIfs::new(ifs.maps, ifs.probs).map(MeasureSpec::LinearIfs)
            }
            MeasureSpec::Julia(j) => MeasureSpec::julia(j.lambda),
            MeasureSpec::Arcsine => Ok(MeasureSpec::Arcsine),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Self::from_value(raw)
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Self::from_value(raw)
    }

    fn from_value(raw: MeasureJson) -> Result<Self> {
        match raw {
            MeasureJson::LinearIfs { maps, probs } => MeasureSpec::linear(maps, probs),
            MeasureJson::Julia { lambda } => MeasureSpec::julia(lambda),
            MeasureJson::Arcsine => Ok(MeasureSpec::Arcsine),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = match self {
            MeasureSpec::LinearIfs(ifs) => {
                MeasureJson::LinearIfs { maps: ifs.maps.clone(), probs: ifs.probs.clone() }
            }
            MeasureSpec::Julia(j) => MeasureJson::Julia { lambda: j.lambda },
            MeasureSpec::Arcsine => MeasureJson::Arcsine,
        };
        serde_json::to_value(raw).expect("measure json is always serializable")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    /// Convex hull `[lo, hi]` of the support.
    pub fn hull(&self) -> (f64, f64) {
        match self {
            MeasureSpec::LinearIfs(ifs) => ifs.hull,
            MeasureSpec::Julia(j) => (-j.fixed_point, j.fixed_point),
            MeasureSpec::Arcsine => (-1.0, 1.0),
        }
    }

    pub fn hull_width(&self) -> f64 {
        let (lo, hi) = self.hull();
        hi - lo
    }

    /// Number of IFS maps (Julia and arcsine use two inverse branches).
    pub fn map_count(&self) -> usize {
        match self {
            MeasureSpec::LinearIfs(ifs) => ifs.maps.len(),
            _ => 2,
        }
    }

    pub fn map_prob(&self, i: usize) -> f64 {
        match self {
            MeasureSpec::LinearIfs(ifs) => ifs.probs[i],
            _ => 0.5,
        }
    }

    /// Applies the `i`-th map; for Julia and arcsine, `i = 0` is the
    /// increasing branch and `i = 1` the decreasing one.
    pub fn apply_map(&self, i: usize, s: f64) -> f64 {
        match self {
            MeasureSpec::LinearIfs(ifs) => ifs.maps[i].apply(s),
            MeasureSpec::Julia(j) => j.branch(i == 0, s),
            MeasureSpec::Arcsine => {
                let r = (0.5 * (s + 1.0)).max(0.0).sqrt();
                if i == 0 {
                    r
                } else {
                    -r
                }
            }
        }
    }

    /// Image of an interval under the `i`-th map; all maps are monotone.
    pub fn map_interval(&self, i: usize, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.apply_map(i, lo);
        let b = self.apply_map(i, hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// True when the measure is invariant under reflection about 0.
    pub fn is_symmetric_about_zero(&self) -> bool {
        !matches!(self, MeasureSpec::LinearIfs(_))
    }

    /// Level-k cylinders are pairwise disjoint for every k.
    pub fn has_disjoint_cylinders(&self) -> bool {
        match self {
            MeasureSpec::LinearIfs(ifs) => ifs.disconnected,
            MeasureSpec::Julia(j) => j.lambda > 2.0,
            MeasureSpec::Arcsine => false,
        }
    }

    pub fn as_linear(&self) -> Option<&LinearIfs> {
        match self {
            MeasureSpec::LinearIfs(ifs) => Some(ifs),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cantor_is_valid_and_disconnected() {
        let spec = MeasureSpec::cantor_thirds();
        assert_eq!(spec.hull(), (0.0, 1.0));
        assert!(spec.as_linear().unwrap().is_disconnected());
    }

    #[test]
    fn julia_hull_is_fixed_point() {
        let j = QuadraticJulia::new(2.9).unwrap();
        let l = j.fixed_point();
        assert_abs_diff_eq!(l, 2.27482, epsilon = 1e-5);
        assert!((l * l - l - 2.9).abs() < 1e-12);
        assert_eq!(MeasureSpec::Julia(j).hull(), (-l, l));
    }

    #[test]
    fn rejects_bad_parameters() {
        let maps = vec![AffineMap { delta: 0.3, theta: 0.0 }, AffineMap { delta: 0.3, theta: 0.7 }];
        assert!(matches!(
            MeasureSpec::linear(maps.clone(), vec![0.7, 0.4]),
            Err(Error::NonStochasticWeights(_))
        ));
        let bad = vec![AffineMap { delta: 1.2, theta: 0.0 }, AffineMap { delta: 0.3, theta: 0.7 }];
        assert!(matches!(
            MeasureSpec::linear(bad, vec![0.5, 0.5]),
            Err(Error::ContractionOutOfRange(_))
        ));
        assert!(matches!(MeasureSpec::julia(1.5), Err(Error::LambdaBelowTwo(_))));
        assert!(matches!(
            MeasureSpec::linear(maps[..1].to_vec(), vec![1.0]),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn overlapping_ifs_is_flagged_not_rejected() {
        let spec = LinearIfs::two_map_unit(0.6, 0.6, 0.5, 0.5).unwrap();
        assert!(!spec.is_disconnected());
        let touching = LinearIfs::two_map_unit(0.5, 0.5, 0.5, 0.5).unwrap();
        assert!(!touching.is_disconnected());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"variant":"linear_ifs","maps":[{"delta":0.4,"theta":0.0},{"delta":0.4,"theta":0.6}],"probs":[0.5,0.5]}"#;
        let spec = MeasureSpec::from_json(text).unwrap();
        assert_eq!(MeasureSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert_eq!(
            MeasureSpec::from_json(r#"{"variant":"julia","lambda":2.9}"#).unwrap(),
            MeasureSpec::julia(2.9).unwrap()
        );
        assert_eq!(MeasureSpec::from_json(r#"{"variant":"arcsine"}"#).unwrap(), MeasureSpec::Arcsine);
        assert!(matches!(
            MeasureSpec::from_json(r#"{"variant":"julia","lambda":1.5}"#),
            Err(Error::LambdaBelowTwo(_))
        ));
    }
}
