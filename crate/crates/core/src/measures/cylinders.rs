//! Cylinder covers and atomic images of IFS measures.

use std::sync::atomic::{AtomicUsize, Ordering};

use super::MeasureSpec;
use crate::error::{Error, Result};

pub const DEFAULT_CELL_CAP: usize = 1 << 26;

static CELL_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_CELL_CAP);

/// Current cap on the number of cells or atoms any enumeration may produce.
pub fn cell_cap() -> usize {
    CELL_CAP.load(Ordering::Relaxed)
}

pub fn set_cell_cap(cap: usize) {
    CELL_CAP.store(cap.max(1), Ordering::Relaxed);
}

fn check_cap(spec: &MeasureSpec, level: usize) -> Result<usize> {
    let cells = (spec.map_count() as u128).checked_pow(level as u32).unwrap_or(u128::MAX);
    let cap = cell_cap();
    if cells > cap as u128 {
        return Err(Error::LevelTooLarge { level, cells, cap });
    }
    Ok(cells as usize)
}

/// One cylinder `I_sigma` of a level-k cover.
///
/// The word `sigma` is packed as a base-M integer with `sigma_1` (the
/// outermost map) as most significant digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub code: u64,
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

impl Cell {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderCover {
    pub level: usize,
    pub maps: usize,
    pub cells: Vec<Cell>,
}

impl CylinderCover {
    /// Index word of a cell, outermost map first.
    pub fn word(&self, cell: &Cell) -> Vec<usize> {
        let mut digits = vec![0; self.level];
        let mut code = cell.code;
        for d in digits.iter_mut().rev() {
            *d = (code % self.maps as u64) as usize;
            code /= self.maps as u64;
        }
        digits
    }

    /// Printable word: `+`/`-` for two-branch maps, digits otherwise.
    pub fn word_label(&self, cell: &Cell, two_branch: bool) -> String {
        self.word(cell)
            .into_iter()
            .map(|d| {
                if two_branch {
                    if d == 0 {
                        '+'
                    } else {
                        '-'
                    }
                } else {
                    char::from_digit(d as u32, 36).unwrap_or('?')
                }
            })
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    pub fn max_length(&self) -> f64 {
        self.cells.iter().map(Cell::length).fold(0.0, f64::max)
    }

    /// True when no two cells share a point.
    pub fn is_pairwise_disjoint(&self) -> bool {
        let mut sorted: Vec<(f64, f64)> = self.cells.iter().map(|c| (c.lo, c.hi)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        sorted.windows(2).all(|w| w[0].1 < w[1].0)
    }
}

/// Level-k cylinder cover `{(sigma, phi_sigma(I_0), pi_sigma)}`, in
/// lexicographic order of `sigma`.
pub fn cylinders(spec: &MeasureSpec, level: usize) -> Result<CylinderCover> {
    check_cap(spec, level)?;
    let m = spec.map_count();
    let (lo, hi) = spec.hull();
    let mut cells = vec![Cell { code: 0, lo, hi, weight: 1.0 }];
    for depth in 0..level {
        let shift = (m as u64).pow(depth as u32);
        let mut next = Vec::with_capacity(cells.len() * m);
        for j in 0..m {
            let p = spec.map_prob(j);
            for c in &cells {
                let (a, b) = spec.map_interval(j, c.lo, c.hi);
                next.push(Cell { code: j as u64 * shift + c.code, lo: a, hi: b, weight: c.weight * p });
            }
        }
        cells = next;
    }
    Ok(CylinderCover { level, maps: m, cells })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Finite atomic probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    /// Cylinder level the atoms were generated at (0 for quadrature rules).
    pub source_level: usize,
    /// Largest cylinder diameter represented by one atom, when known.
    pub max_cell_diameter: Option<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from raw atoms, checking positivity and normalization.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.w).sum();
        if atoms.is_empty() || atoms.iter().any(|a| !(a.w > 0.0) || !a.x.is_finite()) {
            return Err(Error::InvalidMeasure("atoms need finite positions and positive weights".into()));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NonStochasticWeights(total));
        }
        Ok(Self { atoms, source_level: 0, max_cell_diameter: None })
    }

    /// Equal-weight atoms at the given points.
    pub fn uniform(points: &[f64]) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&x| Atom { x, w }).collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn moment(&self, n: i32) -> f64 {
        self.atoms.iter().map(|a| a.w * a.x.powi(n)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }
}

/// One atom per level-k cylinder, placed at the image of the hull midpoint.
pub fn atomic_approximation(spec: &MeasureSpec, level: usize) -> Result<DiscreteMeasure> {
    check_cap(spec, level)?;
    let (lo, hi) = spec.hull();
    let mut d = DiscreteMeasure {
        atoms: vec![Atom { x: 0.5 * (lo + hi), w: 1.0 }],
        source_level: 0,
        max_cell_diameter: Some(hi - lo),
    };
    for _ in 0..level {
        d = balance_pushforward(&d, spec)?;
    }
    if level > 0 {
        d.max_cell_diameter = Some(cylinders(spec, level)?.max_length());
    }
    Ok(d)
}

/// One balance step: `(x, w) -> {(phi_j(x), w pi_j)}` for every map.
pub fn balance_pushforward(d: &DiscreteMeasure, spec: &MeasureSpec) -> Result<DiscreteMeasure> {
    let m = spec.map_count();
    let count = d.atoms.len().saturating_mul(m);
    if count > cell_cap() {
        return Err(Error::LevelTooLarge {
            level: d.source_level + 1,
            cells: count as u128,
            cap: cell_cap(),
        });
    }
    let mut atoms = Vec::with_capacity(count);
    for j in 0..m {
        let p = spec.map_prob(j);
        atoms.extend(d.atoms.iter().map(|a| Atom { x: spec.apply_map(j, a.x), w: a.w * p }));
    }
    let max_cell_diameter = d.max_cell_diameter.map(|diam| match spec {
        MeasureSpec::LinearIfs(ifs) => diam * ifs.max_contraction(),
        _ => diam,
    });
    Ok(DiscreteMeasure { atoms, source_level: d.source_level + 1, max_cell_diameter })
}

/// Atoms of a variable-depth cover: every cylinder is split until its length
/// is at most `max_diameter`, and each leaf carries one midpoint-image atom.
///
/// For unequal contractions this resolves the measure uniformly in space
/// with far fewer atoms than a fixed-level cover.
pub fn resolved_atoms(spec: &MeasureSpec, max_diameter: f64) -> Result<DiscreteMeasure> {
    if !(max_diameter > 0.0) {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let (lo, hi) = spec.hull();
    let mid = 0.5 * (lo + hi);
    let m = spec.map_count();
    let cap = cell_cap();
    let mut atoms = Vec::new();
    let mut deepest = 0;
    let mut widest: f64 = 0.0;
    // Depth-first over (interval, weight, depth, composed map), keeping the
    // word order lexicographic. The composed map is evaluated lazily through
    // the stack of branch indices.
    let mut stack: Vec<(f64, f64, f64, Vec<u8>)> = vec![(lo, hi, 1.0, Vec::new())];
    while let Some((a, b, w, word)) = stack.pop() {
        if b - a <= max_diameter {
            let mut x = mid;
            for &j in word.iter().rev() {
                x = spec.apply_map(j as usize, x);
            }
            atoms.push(Atom { x, w });
            deepest = deepest.max(word.len());
            widest = widest.max(b - a);
            if atoms.len() > cap {
                return Err(Error::LevelTooLarge { level: deepest, cells: atoms.len() as u128, cap });
            }
            continue;
        }
        // Children of phi_word(I) are phi_word(phi_j(I)); push in reverse so
        // that j = 0 is processed first.
        for j in (0..m).rev() {
            let mut child = word.clone();
            child.push(j as u8);
            let (mut ca, mut cb) = (lo, hi);
            for &k in child.iter().rev() {
                let (u, v) = spec.map_interval(k as usize, ca, cb);
                ca = u;
                cb = v;
            }
            stack.push((ca, cb, w * spec.map_prob(j), child));
        }
    }
    Ok(DiscreteMeasure { atoms, source_level: deepest, max_cell_diameter: Some(widest) })
}

/// Composite rule: the atoms of `base` (a rule on the hull) pushed through
/// every leaf of a variable-depth cover whose cylinders carry weight at most
/// `max_weight`.
///
/// With a Gauss rule as `base` each leaf integrates polynomials of degree
/// `2 len(base) - 1` in the leaf coordinate exactly, so the rule resolves
/// polynomials whose zeros are spread thinly across the leaves.
pub fn composite_rule(spec: &MeasureSpec, base: &DiscreteMeasure, max_weight: f64) -> Result<DiscreteMeasure> {
    if !(max_weight > 0.0) {
        return Err(Error::InvalidArgument("leaf weight must be positive".into()));
    }
    let (lo, hi) = spec.hull();
    let m = spec.map_count();
    let cap = cell_cap();
    let mut atoms = Vec::new();
    let mut deepest = 0;
    let mut widest: f64 = 0.0;
    let mut stack: Vec<(f64, f64, f64, Vec<u8>)> = vec![(lo, hi, 1.0, Vec::new())];
    while let Some((a, b, w, word)) = stack.pop() {
        if w <= max_weight {
            for atom in &base.atoms {
                let mut x = atom.x;
                for &j in word.iter().rev() {
                    x = spec.apply_map(j as usize, x);
                }
                atoms.push(Atom { x, w: w * atom.w });
            }
            deepest = deepest.max(word.len());
            widest = widest.max(b - a);
            if atoms.len() > cap {
                return Err(Error::LevelTooLarge { level: deepest, cells: atoms.len() as u128, cap });
            }
            continue;
        }
        for j in (0..m).rev() {
            let mut child = word.clone();
            child.push(j as u8);
            let (mut ca, mut cb) = (lo, hi);
            for &k in child.iter().rev() {
                let (u, v) = spec.map_interval(k as usize, ca, cb);
                ca = u;
                cb = v;
            }
            stack.push((ca, cb, w * spec.map_prob(j), child));
        }
    }
    Ok(DiscreteMeasure { atoms, source_level: deepest, max_cell_diameter: Some(widest) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn julia_level_one_cells() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        let cover = cylinders(&spec, 1).unwrap();
        assert_eq!(cover.cells.len(), 2);
        let plus = cover.cells[0];
        assert_abs_diff_eq!(plus.lo, 0.79069, epsilon = 1e-5);
        assert_abs_diff_eq!(plus.hi, 2.27482, epsilon = 1e-5);
        assert_eq!(plus.weight, 0.5);
        let minus = cover.cells[1];
        assert_abs_diff_eq!(minus.lo, -2.27482, epsilon = 1e-5);
        assert_abs_diff_eq!(minus.hi, -0.79069, epsilon = 1e-5);
        assert_eq!(cover.word_label(&minus, true), "-");
    }

    #[test]
    fn cantor_level_two() {
        let cover = cylinders(&MeasureSpec::cantor_thirds(), 2).unwrap();
        assert_eq!(cover.cells.len(), 4);
        for c in &cover.cells {
            assert_abs_diff_eq!(c.length(), 1.0 / 9.0, epsilon = 1e-15);
            assert_eq!(c.weight, 0.25);
        }
        let words: Vec<_> = cover.cells.iter().map(|c| cover.word(c)).collect();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        // lexicographic order is also left-to-right order for increasing maps
        assert!(cover.cells.windows(2).all(|w| w[0].hi < w[1].lo));
    }

    #[test]
    fn level_zero_is_hull() {
        for spec in [MeasureSpec::Arcsine, MeasureSpec::julia(2.5).unwrap(), MeasureSpec::cantor_thirds()] {
            let cover = cylinders(&spec, 0).unwrap();
            assert_eq!(cover.cells.len(), 1);
            assert_eq!((cover.cells[0].lo, cover.cells[0].hi), spec.hull());
            assert_eq!(cover.cells[0].weight, 1.0);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        assert!(matches!(cylinders(&spec, 27), Err(Error::LevelTooLarge { .. })));
    }

    #[test]
    fn cantor_atoms() {
        let d = atomic_approximation(&MeasureSpec::cantor_thirds(), 1).unwrap();
        assert_eq!(d.atoms.len(), 2);
        assert_abs_diff_eq!(d.atoms[0].x, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.atoms[1].x, 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(d.atoms[0].w, 0.5);
    }

    #[test]
    fn julia_atoms_level_one() {
        let d = atomic_approximation(&MeasureSpec::julia(2.9).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(d.atoms[0].x, 2.9f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.atoms[1].x, -(2.9f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn pushforward_reproduces_cylinder_layout() {
        let spec = MeasureSpec::cantor_thirds();
        let mut d = DiscreteMeasure::new(vec![Atom { x: 0.5, w: 1.0 }]).unwrap();
        d = balance_pushforward(&d, &spec).unwrap();
        d = balance_pushforward(&d, &spec).unwrap();
        let cover = cylinders(&spec, 2).unwrap();
        for (a, c) in d.atoms.iter().zip(&cover.cells) {
            assert_abs_diff_eq!(a.x, 0.5 * (c.lo + c.hi), epsilon = 1e-15);
            assert_eq!(a.w, c.weight);
        }
        let j = MeasureSpec::julia(2.0).unwrap();
        let one = DiscreteMeasure::new(vec![Atom { x: 0.0, w: 1.0 }]).unwrap();
        let p = balance_pushforward(&one, &j).unwrap();
        assert_abs_diff_eq!(p.atoms[0].x, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.atoms[1].x, -(2f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn resolved_atoms_cover_and_normalize() {
        let spec = crate::measures::LinearIfs::two_map_unit(0.3, 0.5065, 0.4022, 0.5978).unwrap();
        let spec = MeasureSpec::LinearIfs(spec);
        let d = resolved_atoms(&spec, 1e-3).unwrap();
        assert!(d.max_cell_diameter.unwrap() <= 1e-3);
        assert_abs_diff_eq!(d.total_weight(), 1.0, epsilon = 1e-12);
        assert!(d.atoms.windows(2).all(|w| w[0].x < w[1].x));
    }
}
