//! Circles de remplissage, Julia directions and sector omission.
//!
//! "Infinitely many preimages" is read as "at least `hit_threshold` zeros in
//! each disc of a growing sequence"; reports keep the raw counts so stricter
//! thresholds can be applied afterwards. All results are per divisor system.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::RangeInclusive;

use crate::curve::{Curve, CurveSpec};
use crate::error::{Error, Result};
use crate::numeric::{angle_delta, wrap_angle};
use crate::potential::{annulus_profile, AnnulusProfile, CurveMeasure, Disc, FluxSettings, MeasureOracle};
use crate::projective::{check_admissible, DivisorSystem, LinearForm};
use crate::selection::{annulus_cover, select_from_cover, CoverRule, DiscRecord, SelectionParams, DOUBLING_BOUND};
use crate::zeros::{sector_zero_scan, winding_count, ContourSpec, SectorCount};
use crate::C64;

/// Default growth factor between the first and last thirds of a profile.
pub const GROWTH_FACTOR: f64 = 2.0;
/// Default angular tolerance for clustering record arguments (radians).
pub const CLUSTER_TOL: f64 = 0.15;
/// Records (from distinct annuli) needed before a cluster counts as a
/// direction.
pub const MIN_SUPPORT: usize = 3;

/// Whether the annulus masses `A_m` grow: the maximum over the last third of
/// `m_range` must exceed `growth` times the maximum over the first third.
pub fn riesz_unbounded_test<M: MeasureOracle + ?Sized>(
    oracle: &M,
    t: f64,
    m_range: RangeInclusive<i32>,
    growth: f64,
) -> Result<(bool, AnnulusProfile)> {
    if !(growth >= 1.0) {
        return Err(Error::InvalidInput(alloc::format!("growth factor must be at least 1, got {growth}")));
    }
    let profile = annulus_profile(oracle, t, m_range)?;
    let n = profile.masses.len();
    if n < 3 {
        return Err(Error::InvalidInput("the growth test needs at least 3 annuli".into()));
    }
    let third = n / 3;
    let head = profile.masses[..third].iter().copied().fold(0.0, f64::max);
    let tail = profile.masses[n - third..].iter().copied().fold(0.0, f64::max);
    Ok((tail > 0.0 && tail > growth * head, profile))
}

/// A selected disc with the zero counts of every form inside it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscHitRecord {
    pub annulus_index: i32,
    pub record: DiscRecord,
    pub per_form_counts: Vec<u32>,
    pub hit_forms: Vec<usize>,
    pub hit_threshold: u32,
}

impl DiscHitRecord {
    pub fn new(annulus_index: i32, record: DiscRecord, per_form_counts: Vec<u32>, hit_threshold: u32) -> Self {
        let hit_forms =
            per_form_counts.iter().enumerate().filter(|(_, &c)| c >= hit_threshold).map(|(j, _)| j).collect();
        Self { annulus_index, record, per_form_counts, hit_forms, hit_threshold }
    }

    pub fn argument(&self) -> f64 {
        wrap_angle(self.record.center.arg())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RemplissageParams {
    pub t: f64,
    pub m_range: RangeInclusive<i32>,
    pub hit_threshold: u32,
    pub growth_factor: f64,
    pub cover: CoverRule,
    pub selection: SelectionParams,
}

impl Default for RemplissageParams {
    fn default() -> Self {
        Self {
            t: 2.0,
            m_range: 2..=9,
            hit_threshold: 1,
            growth_factor: GROWTH_FACTOR,
            cover: CoverRule::default(),
            selection: SelectionParams { grid_density: 200, ..SelectionParams::new(1.0) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum RemplissageOutcome {
    Records {
        records: Vec<DiscHitRecord>,
        profile: AnnulusProfile,
        /// Selected discs dropped for having too few hit forms or for leaving
        /// the shrink envelope.
        rejected: Vec<DiscHitRecord>,
    },
    /// The annulus masses do not grow, so the search has nothing to work on.
    HypothesisFails { profile: AnnulusProfile },
}

/// `8 · patch radius / t^m`: the largest relative radius accepted for a
/// record of annulus `m`.
pub fn shrink_envelope(patch_radius: f64, inner: f64) -> f64 {
    8.0 * patch_radius / inner
}

pub fn remplissage_search<C: Curve + Clone>(
    curve: &C,
    system: &DivisorSystem,
    params: &RemplissageParams,
) -> Result<RemplissageOutcome> {
    if system.ambient_dim() + 1 != curve.components() {
        return Err(Error::DimensionMismatch { expected: curve.components(), got: system.ambient_dim() + 1 });
    }
    let report = check_admissible(system)?;
    if !report.admissible {
        return Err(Error::InvalidInput(alloc::format!("divisor system is not admissible: {}", report.explanation)));
    }
    let oracle = CurveMeasure { curve: curve.clone(), settings: FluxSettings::default() };
    let (unbounded, profile) = riesz_unbounded_test(&oracle, params.t, params.m_range.clone(), params.growth_factor)?;
    if !unbounded {
        return Ok(RemplissageOutcome::HypothesisFails { profile });
    }
    let needed = system.len().saturating_sub(2 * system.order());
    let ms: Vec<i32> =
        params.m_range.clone().filter(|&m| profile.get(m).is_some_and(|a| a > params.cover.min_mass)).collect();
    let per_annulus = crate::numeric::par_map(&ms, |&m| -> Result<Vec<(DiscHitRecord, bool)>> {
        let cover = annulus_cover(&oracle, params.t, m, &params.cover)?;
        let envelope = shrink_envelope(cover.patch_radius(), cover.inner);
        let mut out = Vec::new();
        for rec in select_from_cover(&oracle, &cover, &params.selection)? {
            let counts = system
                .forms()
                .iter()
                .map(|f| Ok(winding_count(curve, f, &ContourSpec::new(rec.disc()))?.count))
                .collect::<Result<Vec<u32>>>()?;
            let hit = DiscHitRecord::new(m, rec, counts, params.hit_threshold);
            let keep = hit.hit_forms.len() >= needed
                && rec.doubling_ratio <= DOUBLING_BOUND
                && rec.relative_radius <= envelope;
            out.push((hit, keep));
        }
        Ok(out)
    });
    let (mut records, mut rejected) = (Vec::new(), Vec::new());
    for batch in per_annulus {
        for (hit, keep) in batch? {
            if keep {
                records.push(hit);
            } else {
                rejected.push(hit);
            }
        }
    }
    Ok(RemplissageOutcome::Records { records, profile, rejected })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JuliaReport {
    /// Detected directions in `[0, 2π)`, for this divisor system only.
    pub directions: Vec<f64>,
    pub supporting: Vec<Vec<DiscHitRecord>>,
    pub unbounded_profile: bool,
    pub hit_threshold: u32,
    pub cluster_tol: f64,
}

/// Clusters record arguments on the circle (single linkage at
/// `cluster_tol`); a cluster becomes a direction when at least
/// [`MIN_SUPPORT`] records from as many distinct annuli lie within
/// `cluster_tol` of its circular mean.
pub fn julia_directions(records: &[DiscHitRecord], cluster_tol: f64) -> JuliaReport {
    let hit_threshold = records.iter().map(|r| r.hit_threshold).max().unwrap_or(1);
    let mut report = JuliaReport {
        directions: Vec::new(),
        supporting: Vec::new(),
        unbounded_profile: !records.is_empty(),
        hit_threshold,
        cluster_tol,
    };
    if records.is_empty() || !(cluster_tol > 0.0) {
        return report;
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].argument().total_cmp(&records[b].argument()).then(a.cmp(&b)));
    let args: Vec<f64> = order.iter().map(|&i| records[i].argument()).collect();

    // Cut the circle at every gap wider than the tolerance.
    let n = args.len();
    let gap = |k: usize| if k + 1 < n { args[k + 1] - args[k] } else { args[0] + TAU - args[n - 1] };
    let cuts: Vec<usize> = (0..n).filter(|&k| gap(k) > cluster_tol).collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    if cuts.is_empty() {
        clusters.push(order.clone());
    } else {
        for (c, &start_cut) in cuts.iter().enumerate() {
            let end_cut = cuts[(c + 1) % cuts.len()];
            let mut members = Vec::new();
            let mut k = (start_cut + 1) % n;
            loop {
                members.push(order[k]);
                if k == end_cut {
                    break;
                }
                k = (k + 1) % n;
            }
            clusters.push(members);
        }
    }

    let mut found: Vec<(f64, Vec<DiscHitRecord>)> = Vec::new();
    for members in clusters {
        let sum = members.iter().fold(C64::new(0.0, 0.0), |acc, &i| acc + C64::from_polar(1.0, records[i].argument()));
        if sum.norm() < 1e-12 {
            continue;
        }
        let mean = wrap_angle(sum.arg());
        let support: Vec<DiscHitRecord> =
            records.iter().filter(|r| angle_delta(mean, r.argument()).abs() <= cluster_tol).cloned().collect();
        let mut annuli: Vec<i32> = support.iter().map(|r| r.annulus_index).collect();
        annuli.sort_unstable();
        annuli.dedup();
        if support.len() >= MIN_SUPPORT && annuli.len() >= MIN_SUPPORT {
            found.push((mean, support));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (d, s) in found {
        report.directions.push(d);
        report.supporting.push(s);
    }
    report
}

/// Remplissage search followed by clustering.
pub fn julia_report<C: Curve + Clone>(
    curve: &C,
    system: &DivisorSystem,
    params: &RemplissageParams,
    cluster_tol: f64,
) -> Result<(JuliaReport, RemplissageOutcome)> {
    let outcome = remplissage_search(curve, system, params)?;
    let report = match &outcome {
        RemplissageOutcome::Records { records, .. } => julia_directions(records, cluster_tol),
        RemplissageOutcome::HypothesisFails { .. } => JuliaReport {
            directions: Vec::new(),
            supporting: Vec::new(),
            unbounded_profile: false,
            hit_threshold: params.hit_threshold,
            cluster_tol,
        },
    };
    Ok((report, outcome))
}

/// Zero counts of every form along the bisector of a sector, with verdicts.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorReport {
    pub sector: (f64, f64),
    pub bisector: f64,
    pub disc_fraction: f64,
    pub radii: Vec<f64>,
    pub rows: Vec<SectorCount>,
    /// Forms with no zero in any tested disc.
    pub omitted: Vec<usize>,
    pub not_omitted: Vec<usize>,
    /// Per form: smallest tested radius from which all counts are 0.
    pub onset_radius: Vec<Option<f64>>,
}

impl SectorReport {
    pub fn counts_for(&self, form: usize) -> Vec<u32> {
        self.rows.iter().filter(|r| r.form_index == form).map(|r| r.count).collect()
    }
}

/// Discs `D(r e^{iβ}, κ r)` on the bisector `β`, with `κ = min(1/4, sin(w/2))`
/// for sector width `w`, so that each disc stays inside the sector.
pub fn sector_omission_report<C: Curve + ?Sized>(
    curve: &C,
    system: &DivisorSystem,
    sector: (f64, f64),
    radii: &[f64],
) -> Result<SectorReport> {
    let width = sector.1 - sector.0;
    if !(width > 0.2) || width >= TAU {
        return Err(Error::InvalidInput(alloc::format!("sector width must lie in (0.2, 2π), got {width}")));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidInput("sector scan needs positive radii".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let bisector = 0.5 * (sector.0 + sector.1);
    let disc_fraction = 0.25f64.min(libm::sin(0.5 * width));
    let rows = sector_zero_scan(curve, system, bisector, &radii, disc_fraction)?;
    let mut omitted = Vec::new();
    let mut not_omitted = Vec::new();
    let mut onset_radius = Vec::new();
    for j in 0..system.len() {
        let counts: Vec<(f64, u32)> = rows.iter().filter(|r| r.form_index == j).map(|r| (r.radius, r.count)).collect();
        if counts.iter().all(|&(_, c)| c == 0) {
            omitted.push(j);
        } else {
            not_omitted.push(j);
        }
        let last_hit = counts.iter().rposition(|&(_, c)| c > 0);
        onset_radius.push(match last_hit {
            None => counts.first().map(|&(r, _)| r),
            Some(k) => counts.get(k + 1).map(|&(r, _)| r),
        });
    }
    Ok(SectorReport { sector, bisector, disc_fraction, radii, rows, omitted, not_omitted, onset_radius })
}

/// Forms pulled back through the coordinate shift `F(εz) ∼ (f_1, …, f_{q'−1}, f_0)(z)`
/// of the sine family: coefficient `j` moves to slot `j + 1`.
pub fn shifted_forms(system: &DivisorSystem) -> Result<DivisorSystem> {
    let q = system.ambient_dim() + 1;
    let forms = system
        .forms()
        .iter()
        .map(|f| match f.exact() {
            Some(ex) => LinearForm::from_exact((0..q).map(|k| ex[(k + q - 1) % q].clone()).collect()),
            None => LinearForm::new((0..q).map(|k| f.coefficients()[(k + q - 1) % q]).collect()),
        })
        .collect::<Result<Vec<_>>>()?;
    DivisorSystem::new(forms, system.order())
}

/// Sector reports for the sector rotated by `2π/q'` with the original
/// forms, and for the original sector with the shifted forms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivarianceCheck {
    pub rotated: SectorReport,
    pub shifted: SectorReport,
    /// Every per-disc count agrees.
    pub counts_agree: bool,
    pub verdicts_agree: bool,
}

/// The rotational symmetry of the sine family, as a check on zero counts:
/// `P ∘ F` has as many zeros in `ε·D` as `P' ∘ F` has in `D`, where `P'` is
/// `P` with its coefficients shifted.
pub fn sector_equivariance(
    spec: &CurveSpec,
    system: &DivisorSystem,
    sector: (f64, f64),
    radii: &[f64],
) -> Result<EquivarianceCheck> {
    let CurveSpec::SineSymmetric { order } = spec else {
        return Err(Error::WrongFamily);
    };
    let turn = TAU / *order as f64;
    let rotated = sector_omission_report(spec, system, (sector.0 + turn, sector.1 + turn), radii)?;
    let shifted = sector_omission_report(spec, &shifted_forms(system)?, sector, radii)?;
    let counts_agree = rotated.rows.len() == shifted.rows.len()
        && rotated.rows.iter().zip(&shifted.rows).all(|(a, b)| a.form_index == b.form_index && a.count == b.count);
    let verdicts_agree = rotated.omitted == shifted.omitted;
    Ok(EquivarianceCheck { rotated, shifted, counts_agree, verdicts_agree })
}

/// Rotates every direction by `angle`, for comparing reports.
pub fn rotate_directions(directions: &[f64], angle: f64) -> Vec<f64> {
    let mut out: Vec<f64> = directions.iter().map(|d| wrap_angle(d + angle)).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Largest distance from a direction in `a` to the nearest one in `b`
/// (symmetrised); infinite if exactly one side is empty.
pub fn direction_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter().map(|p| y.iter().map(|q| angle_delta(*p, *q).abs()).fold(PI, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Helper for diagnostics: the disc of a record scaled by `factor`.
pub fn record_disc(record: &DiscRecord, factor: f64) -> Result<Disc> {
    Disc::new(record.center, record.radius * factor)
}
