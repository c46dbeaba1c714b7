//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails. Tolerances are pinned below.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};
use std::time::{Duration, Instant};

use holocurve::curve::CurveSpec;
use holocurve::julia::{
    julia_report, riesz_unbounded_test, sector_equivariance, sector_omission_report, RemplissageOutcome,
    RemplissageParams, CLUSTER_TOL, GROWTH_FACTOR,
};
use holocurve::lowdisc::Halton;
use holocurve::potential::{
    annulus_profile, characteristic_boundary, characteristic_from_measure, rescaled_potential, Atom, CurveMeasure,
    Disc, FluxSettings, GaussianBump, Measure, MeasureOracle,
};
use holocurve::projective::{check_admissible, DivisorSystem, LinearForm};
use holocurve::selection::{cover_double_disc, select_disc, SelectionParams, COVER_LIMIT, DOUBLING_BOUND};
use holocurve::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ADMISSIBLE_BUDGET: Duration = Duration::from_secs(1);
const IDENTITY_TOL: f64 = 0.02;
const IDENTITY_BUDGET: Duration = Duration::from_secs(30);
const CALIBRATION_TOL: f64 = 0.01;
const ANNULUS_TOL: f64 = 1e-6;
const SMALL_DISC_MASS: f64 = 0.04;
const CENTRAL_TOL: f64 = 1e-3;
const LEMMA_BUDGET: Duration = Duration::from_secs(60);
const CONTAINMENT_SAMPLES: usize = 10_000;
const DIRECTION_TOL: f64 = 0.15;
const MAX_RELATIVE_RADIUS: f64 = 0.3;
const JULIA_BUDGET: Duration = Duration::from_secs(120);
const RESCALED_CEILING: f64 = 1e-3;
const RESCALED_MASS_CAP: f64 = 201.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn form(v: &[i64]) -> LinearForm {
    LinearForm::from_integers(v).unwrap()
}

fn example_system() -> DivisorSystem {
    let rows = [[1, 0, 1], [1, 0, 2], [1, 1, 0], [1, 2, 0], [0, 1, 1], [0, 1, 2]];
    DivisorSystem::new(rows.iter().map(|r| form(r)).collect(), 2).unwrap()
}

fn line_system() -> DivisorSystem {
    DivisorSystem::new(vec![form(&[1, 0]), form(&[0, 1]), form(&[1, -1])], 1).unwrap()
}

fn sine() -> CurveSpec {
    CurveSpec::SineSymmetric { order: 3 }
}

fn admissibility() -> Outcome {
    let start = Instant::now();
    let report = check_admissible(&example_system()).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        pass: report.admissible
            && report.subsets_checked == 20
            && report.witness.is_none()
            && elapsed < ADMISSIBLE_BUDGET,
        detail: format!(
            "admissible={} subsets={} method={:?} in {elapsed:.2?}",
            report.admissible, report.subsets_checked, report.method
        ),
    }
}

fn footnote_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (name, spec) in [("exp", CurveSpec::exp_line()), ("sine", sine())] {
        let oracle = CurveMeasure::new(spec.clone());
        for r in [1.0, 2.0, 5.0, 10.0, 20.0] {
            let boundary = characteristic_boundary(&spec, r, 8192).unwrap();
            let measure = characteristic_from_measure(&oracle, r, 16).unwrap();
            let ratio = (boundary - measure).abs() / boundary.max(1.0);
            worst = worst.max(ratio);
            if ratio > IDENTITY_TOL {
                pass = false;
                eprintln!("  {name} r={r}: boundary {boundary} measure {measure}");
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: pass && elapsed < IDENTITY_BUDGET,
        detail: format!("worst relative gap {worst:.2e} in {elapsed:.2?}"),
    }
}

fn calibration() -> Outcome {
    let spec = CurveSpec::exp_line();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [5.0, 10.0, 20.0, 50.0] {
        let t = characteristic_boundary(&spec, r, 16384).unwrap();
        let rel = (t - r / PI).abs() / (r / PI);
        pass &= rel <= CALIBRATION_TOL;
        parts.push(format!("r={r}: T={t:.5} vs r/π={:.5} ({:.2}%)", r / PI, 100.0 * rel));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn counterexample() -> Outcome {
    let m = Measure::InverseSquare { cutoff: 0.0 };
    let profile = annulus_profile(&m, 2.0, 0..=20).unwrap();
    let annulus_err = profile.masses.iter().map(|a| (a - TAU * LN_2).abs()).fold(0.0, f64::max);
    let h = Halton::new(3, 17);
    let mut heaviest: f64 = 0.0;
    for i in 0..200 {
        let p = h.point(i);
        let modulus = 10f64.powf(4.0 * p[0]);
        let a = C64::from_polar(modulus, TAU * p[1]);
        let r = 0.1 * modulus * (1.0 - p[2]).max(1e-3);
        heaviest = heaviest.max(m.mass(&Disc::new(a, r).unwrap()).unwrap());
    }
    Outcome {
        pass: annulus_err <= ANNULUS_TOL && heaviest <= SMALL_DISC_MASS,
        detail: format!("max |A_m − 2π ln 2| = {annulus_err:.1e}; heaviest small disc {heaviest:.5}"),
    }
}

fn synthetic_oracle(rng: &mut ChaCha8Rng) -> Measure {
    let mut parts = Vec::new();
    let atoms: Vec<Atom> = (0..rng.gen_range(8..14))
        .map(|k| {
            let radius = 2f64.powi(k) * rng.gen_range(0.3..1.0);
            Atom {
                point: C64::from_polar(radius, rng.gen_range(0.0..TAU)),
                mass: 2f64.powf(k as f64 * rng.gen_range(0.3..1.0)),
            }
        })
        .collect();
    parts.push(Measure::Atomic(atoms));
    for _ in 0..rng.gen_range(2..6) {
        let modulus = 10f64.powf(rng.gen_range(-0.5..2.5));
        parts.push(Measure::Gaussian(GaussianBump {
            center: C64::from_polar(modulus, rng.gen_range(0.0..TAU)),
            sigma: rng.gen_range(0.05..0.3) * modulus.max(1.0),
            weight: rng.gen_range(1.0..50.0),
        }));
    }
    Measure::Mixture(parts)
}

fn lemma_certificates() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut runs, mut good, mut worst_ratio) = (0, 0, 0.0f64);
    for _ in 0..50 {
        let oracle = synthetic_oracle(&mut rng);
        for outer in [32.0, 512.0] {
            runs += 1;
            let params = SelectionParams::new(outer);
            let central = oracle.mass(&Disc::centered(outer / 4.0).unwrap()).unwrap();
            let Ok(rec) = select_disc(&oracle, &params) else { continue };
            // Re-derive both conditions from the oracle rather than the record.
            let mass = oracle.mass(&rec.disc()).unwrap();
            let double = oracle.mass(&Disc::new(rec.center, 2.0 * rec.radius).unwrap()).unwrap();
            let radius_ok = (rec.radius - (outer - rec.center.norm()) / 4.0).abs() <= 1e-12 * outer;
            worst_ratio = worst_ratio.max(double / mass);
            if radius_ok && double <= DOUBLING_BOUND * mass && mass >= 0.5 * central * (1.0 - CENTRAL_TOL) {
                good += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: good == runs && elapsed < LEMMA_BUDGET,
        detail: format!("{good}/{runs} certified, worst doubling ratio {worst_ratio:.2}, {elapsed:.2?}"),
    }
}

fn covering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let (mut ok, mut most) = (0, 0);
    for _ in 0..100 {
        let outer = 10f64.powf(rng.gen_range(-3.0..4.0));
        let a = C64::from_polar(outer * rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
        let Ok(discs) = cover_double_disc(a, outer) else { continue };
        most = most.max(discs.len());
        let r = (outer - a.norm()) / 4.0;
        let covered = (0..CONTAINMENT_SAMPLES).all(|_| {
            let p = loop {
                let w = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if w.norm() < 1.0 {
                    break a + w * (2.0 * r);
                }
            };
            discs.iter().any(|d| d.contains(p))
        });
        let shaped = discs.iter().all(|d| {
            (d.center - a).norm() < 2.0 * r && (d.radius - (outer - d.center.norm()) / 4.0).abs() <= 1e-9 * outer
        });
        if covered && shaped && discs.len() <= COVER_LIMIT {
            ok += 1;
        }
    }
    Outcome { pass: ok == 100, detail: format!("{ok}/100 coverings verified, at most {most} discs") }
}

fn sector_omission() -> Outcome {
    let spec = sine();
    let system = example_system();
    let radii = [12.0, 16.0, 20.0, 24.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for (ray, forms) in [(PI / 6.0, [0usize, 1, 4, 5]), (FRAC_PI_2, [0, 1, 2, 3])] {
        let report = sector_omission_report(&spec, &system, (ray - PI / 6.0, ray + PI / 6.0), &radii).unwrap();
        let zero = forms.iter().all(|&j| report.counts_for(j).iter().all(|&c| c == 0));
        pass &= zero && (report.disc_fraction - 0.25).abs() < 1e-12;
        parts.push(format!("ray {ray:.4}: omitted {:?}", report.omitted));
    }
    let check = sector_equivariance(&spec, &system, (0.0, PI / 3.0), &radii).unwrap();
    pass &= check.counts_agree && check.verdicts_agree;
    parts.push(format!("equivariance counts_agree={}", check.counts_agree));
    Outcome { pass, detail: parts.join("; ") }
}

fn julia_and_rescaling() -> (Outcome, Outcome) {
    let start = Instant::now();
    let spec = CurveSpec::exp_line();
    let (report, outcome) = julia_report(&spec, &line_system(), &RemplissageParams::default(), CLUSTER_TOL).unwrap();
    let elapsed = start.elapsed();
    let RemplissageOutcome::Records { records, .. } = outcome else {
        let fail = Outcome { pass: false, detail: "growth hypothesis rejected".into() };
        return (fail, Outcome { pass: false, detail: "no discs".into() });
    };
    let mut pass = elapsed < JULIA_BUDGET;
    let mut parts = Vec::new();
    for target in [FRAC_PI_2, 3.0 * FRAC_PI_2] {
        let found =
            report.directions.iter().position(|d| holocurve::numeric::angle_delta(*d, target).abs() <= DIRECTION_TOL);
        let support = found.map_or(0, |k| {
            report.supporting[k]
                .iter()
                .filter(|h| {
                    h.record.doubling_ratio <= DOUBLING_BOUND && h.record.relative_radius <= MAX_RELATIVE_RADIUS
                })
                .count()
        });
        pass &= support >= 3;
        parts.push(format!(
            "{target:.4}: {} ({support} discs)",
            found.map_or("missing".into(), |k| format!("{:.4}", report.directions[k]))
        ));
    }
    let max_rel = records.iter().map(|h| h.record.relative_radius).fold(0.0, f64::max);
    parts.push(format!(
        "{} directions, {} records, max relative radius {max_rel:.3}, {elapsed:.2?}",
        report.directions.len(),
        records.len()
    ));
    let julia = Outcome { pass, detail: parts.join("; ") };

    let (mut top, mut heaviest, mut ok) = (f64::NEG_INFINITY, 0.0f64, !records.is_empty());
    for hit in &records {
        let rp = rescaled_potential(&spec, &hit.record, 1024).unwrap();
        for i in 0..41 {
            for k in 0..41 {
                let zeta = C64::new(-1.9 + 0.095 * i as f64, -1.9 + 0.095 * k as f64);
                if zeta.norm() <= 1.9 {
                    top = top.max(rp.value(zeta).unwrap());
                }
            }
        }
        match rp.riesz_mass(1.9, &FluxSettings::default()) {
            Ok(est) => heaviest = heaviest.max(est.mass),
            Err(_) => ok = false,
        }
    }
    let rescaled = Outcome {
        pass: ok && top <= RESCALED_CEILING && heaviest <= RESCALED_MASS_CAP,
        detail: format!("{} discs: max value {top:.2e}, max mass over D(0,1.9) {heaviest:.2}", records.len()),
    };
    (julia, rescaled)
}

fn growth_gate() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut check = |name: &str, oracle: &dyn MeasureOracle, expect: bool| {
        let (verdict, _) = riesz_unbounded_test(oracle, 2.0, 0..=10, GROWTH_FACTOR).unwrap();
        pass &= verdict == expect;
        parts.push(format!("{name}={verdict}"));
    };
    check("exp", &CurveMeasure::new(CurveSpec::exp_line()), true);
    check("sine", &CurveMeasure::new(sine()), true);
    check("inverse_square", &Measure::InverseSquare { cutoff: 0.0 }, false);
    check("zero", &Measure::Zero, false);
    check("lebesgue_disc", &Measure::Lebesgue { support: Some(1.0) }, false);
    check(
        "atoms",
        &Measure::Atomic(vec![
            Atom { point: C64::new(3.0, 1.0), mass: 2.0 },
            Atom { point: C64::new(-40.0, 7.0), mass: 1.0 },
        ]),
        false,
    );
    check("bump", &Measure::Gaussian(GaussianBump { center: C64::new(5.0, -5.0), sigma: 2.0, weight: 10.0 }), false);
    Outcome { pass, detail: parts.join(" ") }
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, outcome: Outcome| {
        println!("criterion {n:>2} {:<4} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        results.push((n, name, outcome));
    };
    report(1, "exact admissibility", admissibility());
    report(2, "characteristic two ways", footnote_identity());
    report(3, "classical calibration", calibration());
    report(4, "inverse-square measure", counterexample());
    report(5, "selection certificates", lemma_certificates());
    report(6, "covering constant", covering());
    report(7, "sector omission", sector_omission());
    let (julia, rescaled) = julia_and_rescaling();
    report(8, "julia directions", julia);
    report(9, "rescaled potentials", rescaled);
    report(10, "growth hypothesis gate", growth_gate());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
