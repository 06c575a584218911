use num_complex::Complex64;
use proptest::prelude::*;

use fbx::dimensions::{dq_linear_exact, spectrum_linear_exact};
use fbx::evolution::{propagate, PropagationParams, Propagator};
use fbx::jacobi::{jacobi_for_measure, jacobi_from_moments, jacobi_julia};
use fbx::measures::{atomic_approximation, cylinders, exact_moments, LinearIfs, MeasureSpec};
use fbx::scaling::{class_member, fit_power_law, three_map, FitWindow};

fn two_map() -> impl Strategy<Value = MeasureSpec> {
    (0.05f64..0.45, 0.05f64..0.45, 0.1f64..0.9)
        .prop_map(|(d1, d2, p)| MeasureSpec::LinearIfs(LinearIfs::two_map_unit(d1, d2, p, 1.0 - p).unwrap()))
}

fn julia() -> impl Strategy<Value = MeasureSpec> {
    (2.0f64..4.0).prop_map(|l| MeasureSpec::julia(l).unwrap())
}

fn any_measure() -> impl Strategy<Value = MeasureSpec> {
    prop_oneof![two_map(), julia(), Just(MeasureSpec::Arcsine)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cylinder_weights_sum_to_one_and_children_shrink(spec in any_measure(), k in 1usize..8) {
        let parent = cylinders(&spec, k - 1).unwrap();
        let child = cylinders(&spec, k).unwrap();
        prop_assert!((child.total_weight() - 1.0).abs() < 1e-12);
        let m = spec.map_count() as u64;
        for c in &child.cells {
            // the outermost map is the leading digit, so the parent drops the last one
            let p = parent.cells.iter().find(|p| p.code == c.code / m).unwrap();
            prop_assert!(c.length() < p.length());
            prop_assert!(c.lo >= p.lo - 1e-12 && c.hi <= p.hi + 1e-12);
        }
    }

    #[test]
    fn julia_atoms_are_symmetric(spec in julia(), k in 1usize..10) {
        let d = atomic_approximation(&spec, k).unwrap();
        let mut xs: Vec<f64> = d.atoms.iter().map(|a| a.x).collect();
        xs.sort_by(f64::total_cmp);
        for (a, b) in xs.iter().zip(xs.iter().rev()) {
            prop_assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn hankel_determinants_are_positive(spec in any_measure()) {
        let dets = exact_moments(&spec, 16).hankel_determinants(8);
        prop_assert!(dets.iter().all(|d| d > &num_rational::BigRational::from_integer(0.into())));
    }

    #[test]
    fn zeros_interlace(spec in julia(), n in 2usize..40) {
        let j = jacobi_for_measure(&spec, n + 1).unwrap();
        let a = j.poly_zeros(n).unwrap();
        let b = j.poly_zeros(n + 1).unwrap();
        for i in 0..n {
            prop_assert!(b[i] < a[i] && a[i] < b[i + 1]);
        }
    }

    #[test]
    fn symmetric_measures_have_zero_diagonal(spec in julia()) {
        let exact = jacobi_from_moments(&exact_moments(&spec, 39), 20, spec.hull()).unwrap();
        prop_assert!(exact.diag.iter().all(|&a| a == 0.0));
        let MeasureSpec::Julia(q) = &spec else { unreachable!() };
        let rec = jacobi_julia(q.lambda(), 20).unwrap();
        prop_assert!(rec.diag.iter().all(|a| a.abs() <= 1e-12));
    }

    #[test]
    fn evolution_is_unitary(spec in any_measure(), t in 0.0f64..300.0) {
        let j = jacobi_for_measure(&spec, 2 * (1.2 * t) as usize + 200).unwrap();
        let p = propagate(&j, t, &PropagationParams::default()).unwrap();
        prop_assert!(p.tail_mass <= 1e-12);
        prop_assert!((p.norm_squared() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn group_property(spec in any_measure(), t1 in 0.0f64..60.0, t2 in 0.0f64..60.0) {
        let params = PropagationParams::default();
        let j = jacobi_for_measure(&spec, (1.2 * (t1 + t2)) as usize + 200).unwrap();
        let whole = propagate(&j, t1 + t2, &params).unwrap();
        let first = propagate(&j, t1, &params).unwrap();
        let mut again = Propagator::new(&j, j.len(), &first.amps, params).unwrap();
        again.advance(t2).unwrap();
        let err: f64 = again
            .state()
            .iter()
            .zip(whole.amps.iter().chain(std::iter::repeat(&Complex64::new(0.0, 0.0))))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(err <= 1e-8, "err {err:e}");
    }

    #[test]
    fn symmetric_measures_alternate_real_and_imaginary(spec in julia(), t in 0.0f64..80.0) {
        let j = jacobi_for_measure(&spec, (1.2 * t) as usize + 200).unwrap();
        let p = propagate(&j, t, &PropagationParams::default()).unwrap();
        for (n, a) in p.amps.iter().enumerate() {
            let stray = if n % 2 == 0 { a.im } else { a.re };
            prop_assert!(stray.abs() <= 1e-8);
        }
    }

    #[test]
    fn class_members_have_flat_spectra(d1 in 0.05f64..0.55) {
        let d0 = 2f64.ln() / (5f64.ln() - 2f64.ln());
        let m = class_member(d0, d1).unwrap();
        for q in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 5.0] {
            prop_assert!((dq_linear_exact(&m, q).unwrap() - d0).abs() <= 1e-12);
        }
    }

    #[test]
    fn three_map_spectra_are_flat(delta in 0.05f64..0.3, frac in -0.9f64..0.9) {
        let offset = frac * (1.0 - 3.0 * delta);
        let m = three_map(delta, offset).unwrap();
        let d0 = 3f64.ln() / (1.0 / delta).ln();
        for q in [-2.0, 0.0, 1.0, 2.0, 4.0] {
            prop_assert!((dq_linear_exact(&m, q).unwrap() - d0).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_spectra_do_not_increase(spec in two_map()) {
        let ifs = spec.as_linear().unwrap();
        let qs: Vec<f64> = (-8..=12).map(|i| i as f64 * 0.5).collect();
        let s = spectrum_linear_exact(ifs, &qs).unwrap();
        prop_assert!(s.monotonicity_defect() <= 1e-12);
    }

    #[test]
    fn fits_bracket_their_exponent(
        slope in -1.0f64..1.5,
        wiggle in prop::collection::vec(-0.2f64..0.2, 13),
    ) {
        let ts: Vec<f64> = (0..13).map(|i| 10f64.powf(1.0 + i as f64 / 4.0)).collect();
        let ys: Vec<f64> = ts.iter().zip(&wiggle).map(|(t, w)| t.powf(slope) * w.exp()).collect();
        let f = fit_power_law(&ts, &ys, &FitWindow::default()).unwrap();
        prop_assert!(f.slope_inf <= f.exponent && f.exponent <= f.slope_sup);
        prop_assert!(f.residual.is_finite());
        prop_assert!(f.window.0 < f.window.1);
    }
}
