//! The six subcommands. Each one reads a validated [`RunConfig`] and writes
//! its reports through an [`Emitter`].

use std::f64::consts::{PI, TAU};

use holocurve::curve::{deviation_scan, symmetry_check, CurveSpec};
use holocurve::julia::{
    direction_distance, julia_report, riesz_unbounded_test, rotate_directions, sector_equivariance,
    sector_omission_report, shifted_forms, RemplissageOutcome, RemplissageParams,
};
use holocurve::lowdisc::Halton;
use holocurve::numeric::Combinations;
use holocurve::potential::{
    annulus_profile, characteristic_boundary, characteristic_from_measure, Atom, Disc, GaussianBump,
};
use holocurve::projective::{bounding_constants, check_admissible, DivisorSystem};
use holocurve::selection::{
    cover_double_disc, select_disc_annulus, select_disc_sequence, CoverRule, DiscRecord, SelectionParams,
    SequenceOutcome, COVER_LIMIT, DOUBLING_BOUND,
};
use holocurve::{Measure, MeasureOracle, C64};
use serde_json::{json, Value};

use crate::config::{Analysis, NamedMeasure, RunConfig};
use crate::error::CliError;
use crate::output::{num, Emitter};

pub fn run(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    match cfg.analysis {
        Analysis::Admissible => admissible(cfg, out),
        Analysis::Analyze => analyze(cfg, out),
        Analysis::Remplissage => remplissage(cfg, out),
        Analysis::VerifyExample => verify_example(cfg, out),
        Analysis::LemmaDemo => lemma_demo(cfg, out),
        Analysis::Counterexample => counterexample(cfg, out),
    }
}

fn curve(cfg: &RunConfig) -> &CurveSpec {
    cfg.curve.as_ref().expect("checked on load")
}

fn system(cfg: &RunConfig) -> &DivisorSystem {
    cfg.system.as_ref().expect("checked on load")
}

fn complex(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Sampled `C₁`, `C₂` for every subset of `order + 1` forms.
fn subset_constants(system: &DivisorSystem, budget: usize, seed: u64) -> Result<Vec<Value>, CliError> {
    Combinations::new(system.len(), system.order() + 1)
        .map(|subset| {
            let b = bounding_constants(system, &subset, budget, seed)?;
            Ok(json!({ "subset": subset, "c1_sampled": b.lower, "c2_sampled": b.upper, "samples": b.sample_count }))
        })
        .collect()
}

fn admissible(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let system = system(cfg);
    let report = check_admissible(system)?;
    let constants = subset_constants(system, cfg.numeric.sample_budget, cfg.seed)?;
    println!("admissible: {} ({:?})", report.admissible, report.verdict);
    out.json(
        "admissibility.json",
        "holocurve.admissibility/1",
        &json!({ "admissibility": report, "constants": constants }),
    )
}

fn analyze(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let (spec, system, n) = (curve(cfg), system(cfg), &cfg.numeric);
    let measure = Measure::curve(spec.clone());

    let mut rows = Vec::new();
    for &r in &n.radii {
        let boundary = characteristic_boundary(spec, r, n.boundary_nodes)?;
        let from_measure = characteristic_from_measure(&measure, r, n.quad_points)?;
        let diff = (boundary - from_measure).abs();
        rows.push(vec![num(r), num(boundary), num(from_measure), num(diff), num(diff / boundary.abs().max(1.0))]);
    }
    out.csv(
        "characteristic.csv",
        "holocurve.characteristic/1",
        &["r", "t_boundary", "t_measure", "abs_diff", "rel_diff"],
        &rows,
    )?;

    let profile = annulus_profile(&measure, n.t, n.m_range.0..=n.m_range.1)?;
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|(m, a)| {
            let inner = n.t.powi(m);
            vec![m.to_string(), num(inner), num(inner * n.t), num(a)]
        })
        .collect();
    out.csv("annulus_profile.csv", "holocurve.annulus_profile/1", &["m", "inner", "outer", "mass"], &rows)?;

    let g = n.deviation_grid;
    let step = 2.0 * n.deviation_radius / (g - 1) as f64;
    let samples: Vec<C64> = (0..g)
        .flat_map(|i| (0..g).map(move |k| (i, k)))
        .map(|(i, k)| C64::new(-n.deviation_radius + i as f64 * step, -n.deviation_radius + k as f64 * step))
        .collect();
    let all: Vec<usize> = (0..system.len()).collect();
    let whole = deviation_scan(spec, system, &all, &samples)?;
    let constants = subset_constants(system, n.sample_budget, cfg.seed)?;
    let mut subsets = Vec::new();
    for c in constants {
        let subset: Vec<usize> = serde_json::from_value(c["subset"].clone())?;
        let range = deviation_scan(spec, system, &subset, &samples)?;
        subsets.push(json!({
            "subset": subset,
            "min": range.min,
            "max": range.max,
            "log_c1_sampled": c["c1_sampled"].as_f64().map(f64::ln),
            "log_c2_sampled": c["c2_sampled"].as_f64().map(f64::ln),
        }));
    }
    out.json(
        "deviation.json",
        "holocurve.deviation/1",
        &json!({
            "grid": { "half_width": n.deviation_radius, "points_per_side": g, "samples": samples.len() },
            "all_forms": whole,
            "subsets": subsets,
        }),
    )
}

fn remplissage_params(cfg: &RunConfig) -> RemplissageParams {
    let n = &cfg.numeric;
    let base = RemplissageParams::default();
    RemplissageParams {
        t: n.t,
        m_range: n.remplissage_m_range.0..=n.remplissage_m_range.1,
        hit_threshold: n.hit_threshold,
        selection: SelectionParams { grid_density: n.grid_density, refine_rounds: n.refine_rounds, ..base.selection },
        ..base
    }
}

const HIT_HEADER: [&str; 12] = [
    "status",
    "annulus_index",
    "center_re",
    "center_im",
    "radius",
    "mass",
    "doubling_ratio",
    "relative_radius",
    "argument",
    "hit_threshold",
    "hit_forms",
    "per_form_counts",
];

fn hit_rows(outcome: &RemplissageOutcome) -> Vec<Vec<String>> {
    let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(";");
    let mut rows = Vec::new();
    if let RemplissageOutcome::Records { records, rejected, .. } = outcome {
        for (status, list) in [("accepted", records), ("rejected", rejected)] {
            for h in list {
                let r = &h.record;
                rows.push(vec![
                    status.to_string(),
                    h.annulus_index.to_string(),
                    num(r.center.re),
                    num(r.center.im),
                    num(r.radius),
                    num(r.mass),
                    num(r.doubling_ratio),
                    num(r.relative_radius),
                    num(h.argument()),
                    h.hit_threshold.to_string(),
                    join(&mut h.hit_forms.iter().map(|j| j.to_string())),
                    join(&mut h.per_form_counts.iter().map(|c| c.to_string())),
                ]);
            }
        }
    }
    rows
}

fn outcome_summary(outcome: &RemplissageOutcome) -> Value {
    match outcome {
        RemplissageOutcome::Records { records, profile, rejected } => json!({
            "outcome": "records",
            "accepted": records.len(),
            "rejected": rejected.len(),
            "profile": profile,
        }),
        RemplissageOutcome::HypothesisFails { profile } => json!({ "outcome": "hypothesis_fails", "profile": profile }),
    }
}

fn remplissage(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let (report, outcome) = julia_report(curve(cfg), system(cfg), &remplissage_params(cfg), cfg.numeric.cluster_tol)?;
    println!("directions: {:?}", report.directions);
    out.csv("disc_hits.csv", "holocurve.disc_hits/1", &HIT_HEADER, &hit_rows(&outcome))?;
    out.json(
        "julia_report.json",
        "holocurve.julia_report/1",
        &json!({ "julia": report, "search": outcome_summary(&outcome) }),
    )
}

fn verify_example(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let (spec, system, n) = (curve(cfg), system(cfg), &cfg.numeric);
    let CurveSpec::SineSymmetric { order } = spec else { unreachable!("checked on load") };
    let turn = TAU / *order as f64;

    let admissibility = check_admissible(system)?;

    let halton = Halton::new(2, cfg.seed);
    let mut worst = (0.0f64, C64::new(0.0, 0.0));
    for i in 0..n.symmetry_samples as u64 {
        let z = halton.disc_point(i) * n.symmetry_radius;
        let residual = symmetry_check(spec, z)?;
        if residual > worst.0 || residual.is_nan() {
            worst = (residual, z);
        }
    }

    let mut sectors = Vec::new();
    let mut rows = Vec::new();
    for (s, &(a, b)) in n.sectors.iter().enumerate() {
        for k in 0..*order {
            let sector = (a + k as f64 * turn, b + k as f64 * turn);
            let report = sector_omission_report(spec, system, sector, &n.sector_radii)?;
            for row in &report.rows {
                rows.push(vec![
                    s.to_string(),
                    k.to_string(),
                    num(sector.0),
                    num(sector.1),
                    row.form_index.to_string(),
                    num(row.radius),
                    row.count.to_string(),
                    num(row.min_boundary_modulus),
                ]);
            }
            let claim = (k == 0).then(|| n.expected_omitted.as_ref().map(|e| &e[s])).flatten().map(|expected| {
                json!({ "expected_omitted": expected, "holds": expected.iter().all(|j| report.omitted.contains(j)) })
            });
            sectors.push(json!({ "base_sector": s, "rotation": k, "report": report, "claim": claim }));
        }
    }
    let equivariance = n
        .sectors
        .iter()
        .map(|&sector| {
            let check = sector_equivariance(spec, system, sector, &n.sector_radii)?;
            Ok(json!({ "sector": sector, "counts_agree": check.counts_agree, "verdicts_agree": check.verdicts_agree }))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;

    let params = remplissage_params(cfg);
    let (julia, outcome) = julia_report(spec, system, &params, n.cluster_tol)?;
    // Zeros of P∘F in εS are zeros of P'∘F in S for the shifted form P', so
    // the shifted system's directions, turned by 2π/q, must match.
    let julia_equivariance = if n.julia_equivariance {
        let (other, _) = julia_report(spec, &shifted_forms(system)?, &params, n.cluster_tol)?;
        let predicted = rotate_directions(&other.directions, turn);
        let distance = direction_distance(&julia.directions, &predicted);
        Some(json!({
            "shifted_directions": other.directions,
            "turned": predicted,
            "distance": distance,
            "holds": distance <= n.cluster_tol,
        }))
    } else {
        None
    };

    let claims_hold = sectors.iter().all(|s| s["claim"]["holds"].as_bool().unwrap_or(true));
    println!(
        "admissible: {}; symmetry residual {:.3e}; sector claims hold: {}; directions: {:?}",
        admissibility.admissible, worst.0, claims_hold, julia.directions
    );
    out.csv(
        "sectors.csv",
        "holocurve.sector_counts/1",
        &["base_sector", "rotation", "from", "to", "form", "radius", "count", "min_boundary_modulus"],
        &rows,
    )?;
    out.csv("disc_hits.csv", "holocurve.disc_hits/1", &HIT_HEADER, &hit_rows(&outcome))?;
    out.json(
        "verify_example.json",
        "holocurve.verify_example/1",
        &json!({
            "admissibility": admissibility,
            "symmetry": {
                "samples": n.symmetry_samples,
                "radius": n.symmetry_radius,
                "max_residual": worst.0,
                "worst_point": complex(worst.1),
            },
            "sectors": sectors,
            "sector_claims_hold": claims_hold,
            "equivariance": equivariance,
            "julia": julia,
            "julia_equivariance": julia_equivariance,
            "search": outcome_summary(&outcome),
        }),
    )
}

fn default_measures() -> Vec<NamedMeasure> {
    let atoms = (0..14)
        .map(|k| Atom { point: C64::from_polar(2f64.powi(k) * 0.7, 0.9 * k as f64), mass: 1.0 + 0.25 * k as f64 })
        .collect();
    let bumps = (0..6)
        .map(|k| {
            Measure::Gaussian(GaussianBump {
                center: C64::from_polar(4f64.powi(k), 2.0 * k as f64),
                sigma: 0.1 * 4f64.powi(k),
                weight: 2.0,
            })
        })
        .collect();
    let finite = vec![Atom { point: C64::new(3.0, 1.0), mass: 5.0 }, Atom { point: C64::new(-2.0, 0.5), mass: 1.0 }];
    [
        ("lebesgue_plane", Measure::Lebesgue { support: None }),
        ("dyadic_atoms", Measure::Atomic(atoms)),
        ("inverse_square_cut", Measure::InverseSquare { cutoff: 1.0 }),
        ("gaussian_bumps", Measure::Mixture(bumps)),
        ("finite_atoms", Measure::Atomic(finite)),
    ]
    .into_iter()
    .map(|(name, measure)| NamedMeasure { name: name.into(), measure })
    .collect()
}

fn lemma_demo(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let n = &cfg.numeric;
    let measures = cfg.measures.clone().unwrap_or_else(default_measures);
    let template =
        SelectionParams { grid_density: n.grid_density, refine_rounds: n.refine_rounds, ..SelectionParams::new(1.0) };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for named in &measures {
        let outcome = select_disc_sequence(&named.measure, &n.schedule, &template)?;
        let mut certificates = Vec::new();
        if let SequenceOutcome::Diverging { records } = &outcome {
            for (&big, rec) in n.schedule.iter().zip(records) {
                let central = named.measure.mass(&Disc::centered(big / 4.0)?)?;
                let cover = cover_double_disc(rec.center, big)?;
                let doubling_ok = rec.doubling_ratio <= DOUBLING_BOUND;
                let mass_ok = rec.mass >= 0.5 * central * (1.0 - 1e-3);
                rows.push(record_row(&named.name, big, rec, central, doubling_ok, mass_ok, cover.len()));
                certificates.push(json!({
                    "outer_radius": big,
                    "central_mass": central,
                    "doubling_ok": doubling_ok,
                    "mass_ok": mass_ok,
                    "cover_discs": cover.len(),
                    "cover_limit": COVER_LIMIT,
                    "cover": cover.iter().map(|d| json!({ "center": complex(d.center), "radius": d.radius })).collect::<Vec<_>>(),
                }));
            }
        }
        println!(
            "{}: {}",
            named.name,
            match &outcome {
                SequenceOutcome::Diverging { records } => format!("{} certified discs", records.len()),
                SequenceOutcome::FiniteMeasure { .. } => "finite measure".into(),
            }
        );
        reports.push(
            json!({ "name": named.name, "measure": named.measure, "outcome": outcome, "certificates": certificates }),
        );
    }
    out.csv(
        "disc_records.csv",
        "holocurve.disc_records/1",
        &[
            "measure",
            "outer_radius",
            "center_re",
            "center_im",
            "radius",
            "mass",
            "doubling_ratio",
            "relative_radius",
            "central_mass",
            "doubling_ok",
            "mass_ok",
            "cover_discs",
        ],
        &rows,
    )?;
    out.json("lemma_demo.json", "holocurve.lemma_demo/1", &json!({ "schedule": n.schedule, "measures": reports }))
}

fn record_row(
    name: &str,
    big: f64,
    rec: &DiscRecord,
    central: f64,
    doubling_ok: bool,
    mass_ok: bool,
    cover: usize,
) -> Vec<String> {
    vec![
        name.to_string(),
        num(big),
        num(rec.center.re),
        num(rec.center.im),
        num(rec.radius),
        num(rec.mass),
        num(rec.doubling_ratio),
        num(rec.relative_radius),
        num(central),
        doubling_ok.to_string(),
        mass_ok.to_string(),
        cover.to_string(),
    ]
}

fn counterexample(cfg: &RunConfig, out: &mut Emitter) -> Result<(), CliError> {
    let n = &cfg.numeric;
    let measure = Measure::InverseSquare { cutoff: 0.0 };
    let closed = TAU * n.t.ln();
    let (unbounded, profile) =
        riesz_unbounded_test(&measure, n.t, n.m_range.0..=n.m_range.1, RemplissageParams::default().growth_factor)?;
    let mut worst_profile_error = 0.0f64;
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|(m, a)| {
            let inner = n.t.powi(m);
            worst_profile_error = worst_profile_error.max((a - closed).abs());
            vec![m.to_string(), num(inner), num(inner * n.t), num(a), num(closed), num((a - closed).abs())]
        })
        .collect();
    out.csv(
        "annulus_profile.csv",
        "holocurve.annulus_profile_closed/1",
        &["m", "inner", "outer", "mass", "closed_form", "abs_error"],
        &rows,
    )?;

    // Discs D(a, ρ|a|), |a| log-uniform in [1, 10⁴].
    let halton = Halton::new(3, cfg.seed);
    let mut rows = Vec::new();
    let (mut max_mass, mut max_ratio) = (0.0f64, 0.0f64);
    for i in 0..n.disc_samples as u64 {
        let p = halton.point(i);
        let a = C64::from_polar(10f64.powf(4.0 * p[0]), TAU * p[1]);
        let rho = n.max_relative_radius * (0.05 + 0.95 * p[2]);
        let mass = measure.mass(&Disc::new(a, rho * a.norm())?)?;
        let bound = PI * rho * rho / ((1.0 - rho) * (1.0 - rho));
        max_mass = max_mass.max(mass);
        max_ratio = max_ratio.max(mass / bound);
        rows.push(vec![
            num(a.re),
            num(a.im),
            num(rho * a.norm()),
            num(rho),
            num(mass),
            num(bound),
            (mass <= bound).to_string(),
        ]);
    }
    out.csv(
        "bounded_discs.csv",
        "holocurve.bounded_discs/1",
        &["center_re", "center_im", "radius", "relative_radius", "mass", "density_bound", "within_bound"],
        &rows,
    )?;

    // What the annulus selection finds: relative radii stay bounded below
    // while masses stay bounded above.
    let template =
        SelectionParams { grid_density: n.grid_density, refine_rounds: n.refine_rounds, ..SelectionParams::new(1.0) };
    let selections = (n.m_range.0..=n.m_range.1)
        .map(|m| {
            let rec = select_disc_annulus(&measure, n.t, m, &CoverRule::default(), &template)?;
            Ok(json!({ "m": m, "record": rec }))
        })
        .collect::<Result<Vec<Value>, CliError>>()?;

    println!(
        "annulus masses unbounded: {unbounded}; max |A_m - 2π ln t| = {worst_profile_error:.2e}; max disc mass {max_mass:.4}"
    );
    out.json(
        "counterexample.json",
        "holocurve.counterexample/1",
        &json!({
            "measure": measure,
            "unbounded_profile": unbounded,
            "profile": profile,
            "closed_form_annulus_mass": closed,
            "max_profile_error": worst_profile_error,
            "discs": {
                "samples": n.disc_samples,
                "max_relative_radius": n.max_relative_radius,
                "max_mass": max_mass,
                "max_mass_over_bound": max_ratio,
                "all_within_bound": max_ratio <= 1.0,
            },
            "annulus_selections": selections,
        }),
    )
}
