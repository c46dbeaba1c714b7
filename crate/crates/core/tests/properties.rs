use std::f64::consts::{LN_2, TAU};

use holocurve::curve::{deviation_scan, eval_u, eval_uj, symmetry_check, CurveSpec};
use holocurve::potential::{
    disc_mass_curve, flux_mass, harmonic_majorant, Atom, CurvePotential, Disc, FluxSettings, Measure, MeasureOracle,
};
use holocurve::projective::{check_admissible, exact_rank, float_rank, DivisorSystem, GaussianRational, LinearForm};
use holocurve::selection::{cover_double_disc, select_disc, SelectionParams, COVER_LIMIT};
use holocurve::zeros::{winding_count, ContourSpec};
use holocurve::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn small_int_rows(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, cols), rows)
}

fn system_from(rows: &[Vec<i64>], order: usize) -> Option<DivisorSystem> {
    let forms: Option<Vec<LinearForm>> = rows.iter().map(|r| LinearForm::from_integers(r).ok()).collect();
    DivisorSystem::new(forms?, order).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_and_float_rank_agree(rows in small_int_rows(3, 3)) {
        let exact: Vec<Vec<GaussianRational>> =
            rows.iter().map(|r| r.iter().map(|&x| GaussianRational::from_integer(x)).collect()).collect();
        let float: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| c(x as f64, 0.0)).collect()).collect();
        prop_assert_eq!(exact_rank(&exact), float_rank(&float));
    }

    #[test]
    fn admissibility_ignores_scaling_and_order(
        rows in small_int_rows(5, 3),
        scale in (-4i64..=4, -4i64..=4).prop_filter("nonzero", |(a, b)| *a != 0 || *b != 0),
        which in 0usize..5,
        rotate in 0usize..5,
    ) {
        let Some(system) = system_from(&rows, 2) else { return Ok(()) };
        let base = check_admissible(&system).unwrap().admissible;
        let factor = GaussianRational::from_f64(scale.0 as f64, scale.1 as f64).unwrap();
        let mut forms = system.forms().to_vec();
        forms[which] = forms[which].scaled_exact(&factor).unwrap();
        forms.rotate_left(rotate);
        let changed = DivisorSystem::new(forms, 2).unwrap();
        prop_assert_eq!(check_admissible(&changed).unwrap().admissible, base);
    }

    #[test]
    fn form_values_respect_cauchy_schwarz(
        re in -30.0f64..30.0, im in -30.0f64..30.0,
        coeffs in prop::collection::vec(-5i64..=5, 3),
    ) {
        prop_assume!(coeffs.iter().any(|&x| x != 0));
        let spec = CurveSpec::SineSymmetric { order: 3 };
        let f = LinearForm::from_integers(&coeffs).unwrap();
        let z = c(re, im);
        prop_assert!(eval_uj(&spec, &f, z).unwrap() <= eval_u(&spec, z) + f.norm().ln() + 1e-12);
    }

    #[test]
    fn unimodular_factor_leaves_u_unchanged(theta in 0.0f64..TAU, re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let base = CurveSpec::Exponential { slopes: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)], offsets: vec![c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)] };
        let turned = CurveSpec::Exponential {
            slopes: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)],
            offsets: vec![c(0.0, theta), c(0.5, theta), c(0.0, theta)],
        };
        let z = c(re, im);
        prop_assert!((eval_u(&base, z) - eval_u(&turned, z)).abs() <= 1e-12 * (1.0 + eval_u(&base, z).abs()));
    }

    #[test]
    fn sine_family_symmetry(r in 0.0f64..50.0, theta in 0.0f64..TAU) {
        let spec = CurveSpec::SineSymmetric { order: 3 };
        prop_assert!(symmetry_check(&spec, C64::from_polar(r, theta)).unwrap() <= 1e-9);
    }

    #[test]
    fn nonnegative_and_monotone_curve_masses(cx in -20.0f64..20.0, cy in -20.0f64..20.0, r in 0.5f64..8.0) {
        let spec = CurveSpec::SineSymmetric { order: 3 };
        let settings = FluxSettings::default();
        let small = flux_mass(&CurvePotential(&spec), &Disc::new(c(cx, cy), r).unwrap(), &settings).unwrap();
        let large = flux_mass(&CurvePotential(&spec), &Disc::new(c(cx, cy), 1.5 * r).unwrap(), &settings).unwrap();
        prop_assert!(small.raw >= -1e-9 && large.raw >= -1e-9);
        prop_assert!(large.mass >= small.mass * (1.0 - 1e-6) - 1e-9);
    }

    #[test]
    fn majorant_dominates(cx in -10.0f64..10.0, cy in -10.0f64..10.0, r in 0.5f64..6.0, u in 0.0f64..0.98, t in 0.0f64..TAU) {
        let spec = CurveSpec::exp_line();
        let disc = Disc::new(c(cx, cy), r).unwrap();
        let m = harmonic_majorant(&spec, &disc, 256).unwrap();
        let z = disc.center + C64::from_polar(u * r, t);
        prop_assert!(m.value(z).unwrap() >= eval_u(&spec, z) - 1e-6);
    }

    #[test]
    fn coverings_stay_small(re in -1.0f64..1.0, im in -1.0f64..1.0, log_r in -6.0f64..6.0) {
        let outer = 10f64.powf(log_r);
        let a = c(re, im) * (0.7 * outer);
        let discs = cover_double_disc(a, outer).unwrap();
        prop_assert!(discs.len() <= COVER_LIMIT);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn winding_is_scale_free_and_monotone(x in -3.0f64..3.0, y in -40.0f64..40.0, r in 1.0f64..9.0, s in (-5.0f64..5.0, 0.1f64..5.0)) {
        let spec = CurveSpec::exp_line();
        let f = LinearForm::from_integers(&[1, -1]).unwrap();
        let g = f.scaled(C64::from_polar(s.1, s.0)).unwrap();
        let small = ContourSpec::new(Disc::new(c(x, y), r).unwrap());
        let large = ContourSpec::new(Disc::new(c(x, y), 1.5 * r).unwrap());
        let a = winding_count(&spec, &f, &small).unwrap().count;
        prop_assert_eq!(a, winding_count(&spec, &g, &small).unwrap().count);
        prop_assert!(winding_count(&spec, &f, &large).unwrap().count >= a);
    }

    #[test]
    fn selection_is_scale_equivariant(
        points in prop::collection::vec((0.5f64..60.0, 0.0f64..TAU, 0.5f64..10.0), 2..8),
        k in -3i32..4,
    ) {
        let atoms: Vec<Atom> = points.iter().map(|&(r, t, m)| Atom { point: C64::from_polar(r, t), mass: m }).collect();
        let base = Measure::Atomic(atoms.clone());
        let lambda = 2f64.powi(k);
        let pushed = Measure::Pushforward { scale: c(lambda, 0.0), inner: Box::new(Measure::Atomic(atoms)) };
        let params = SelectionParams::new(64.0);
        let Ok(a) = select_disc(&base, &params) else { return Ok(()) };
        let b = select_disc(&pushed, &SelectionParams { outer_radius: 64.0 * lambda, ..params }).unwrap();
        prop_assert!((b.center - a.center * lambda).norm() <= 1e-12 * lambda * 64.0);
        prop_assert!((b.radius - a.radius * lambda).abs() <= 1e-12 * lambda * 64.0);
        prop_assert_eq!(a.mass, b.mass);
    }
}

#[test]
fn deviation_window_on_the_line() {
    // Subset {x0, x1}: max(|z0|, |z1|) on the unit sphere lies in [1/√2, 1].
    let spec = CurveSpec::exp_line();
    let system = DivisorSystem::new(
        vec![
            LinearForm::from_integers(&[1, 0]).unwrap(),
            LinearForm::from_integers(&[0, 1]).unwrap(),
            LinearForm::from_integers(&[1, -1]).unwrap(),
        ],
        1,
    )
    .unwrap();
    let samples: Vec<C64> = (-20..=20).flat_map(|x| (-20..=20).map(move |y| c(x as f64, y as f64))).collect();
    let range = deviation_scan(&spec, &system, &[0, 1], &samples).unwrap();
    assert!(range.min >= -0.5 * LN_2 - 1e-6 && range.max <= 1e-6, "{range:?}");
}

#[test]
fn curve_masses_are_monotone_in_radius() {
    let spec = CurveSpec::exp_line();
    let mut last = 0.0;
    for k in 1..=20 {
        let m = disc_mass_curve(&spec, &Disc::centered(k as f64).unwrap(), 64, None).unwrap();
        assert!(m >= last * (1.0 - 1e-6), "{k}: {m} < {last}");
        last = m;
    }
    let oracle = Measure::curve(spec);
    assert!(oracle.mass(&Disc::centered(3.0).unwrap()).unwrap() > 0.0);
}
