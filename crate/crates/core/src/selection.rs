//! Disc selection with a doubling certificate.
//!
//! For `δ(z) = (R − |z|)/4`, any point `a` with
//! `μ(D(a, δ(a))) > ½ sup_z μ(D(z, δ(z)))` gives a disc `D(a, r)`, `r = δ(a)`,
//! with `μ(D(a, 2r)) ≤ 100 · 2 · μ(D(a, r))`: `D(a, 2r)` is covered by at most
//! 100 discs `D(z, δ(z))`, each of mass at most the supremum. The search
//! below discretises the supremum on a polar grid and then *checks* both
//! conclusions directly, so grid quantisation can never produce a wrong
//! record, only a refinement or an error.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::lowdisc::Halton;
use crate::potential::{Disc, MeasureOracle};
use crate::C64;

/// Doubling constant of the certificate.
pub const DOUBLING_BOUND: f64 = 200.0;
/// Maximal number of discs `D(z, δ(z))` needed to cover `D(a, 2δ(a))`.
pub const COVER_LIMIT: usize = 100;

/// Relative slack on the central-mass certificate.
const MASS_TOL: f64 = 1e-3;

/// A selected disc `D(center, radius)` with its mass and doubling ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscRecord {
    pub center: C64,
    pub radius: f64,
    /// `μ(D(center, radius))`.
    pub mass: f64,
    /// `μ(D(center, 2 radius)) / μ(D(center, radius))`.
    pub doubling_ratio: f64,
    /// `radius / |center|`; infinite at the origin.
    pub relative_radius: f64,
}

impl DiscRecord {
    pub fn new(center: C64, radius: f64, mass: f64, doubling_ratio: f64) -> Self {
        let n = center.norm();
        let relative_radius = if n > 0.0 { radius / n } else { f64::INFINITY };
        Self { center, radius, mass, doubling_ratio, relative_radius }
    }

    pub fn disc(&self) -> Disc {
        Disc { center: self.center, radius: self.radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionParams {
    /// The radius `R` of the search disc `D(0, R)`.
    pub outer_radius: f64,
    /// Target number of grid candidates in the first round (≥ 100).
    pub grid_density: usize,
    /// Extra rounds, each with four times the candidates, if certification
    /// fails.
    pub refine_rounds: usize,
    pub doubling_bound: f64,
}

impl SelectionParams {
    pub fn new(outer_radius: f64) -> Self {
        Self { outer_radius, grid_density: 400, refine_rounds: 2, doubling_bound: DOUBLING_BOUND }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_radius > 0.0 && self.outer_radius.is_finite()) {
            return Err(Error::InvalidInput(format!("outer radius must be positive, got {}", self.outer_radius)));
        }
        if self.grid_density < 100 {
            return Err(Error::InvalidInput(format!("grid density must be at least 100, got {}", self.grid_density)));
        }
        if !(self.doubling_bound >= 1.0) {
            return Err(Error::InvalidInput("doubling bound must be at least 1".into()));
        }
        Ok(())
    }

    fn delta(&self, z: C64) -> f64 {
        (self.outer_radius - z.norm()) / 4.0
    }
}

/// Fraction of `R/4` below which `δ` is not sampled in the first round.
const FIRST_FLOOR: f64 = 1.0 / 16.0;

/// Polar grid whose radial and angular spacing are `spacing · δ(z)`.
fn polar_grid(r_out: f64, spacing: f64, floor: f64, emit: &mut dyn FnMut(C64)) {
    emit(C64::new(0.0, 0.0));
    let delta = |rho: f64| (r_out - rho) / 4.0;
    let mut rho = spacing * delta(0.0);
    let mut level = 0usize;
    while delta(rho) >= floor * r_out / 4.0 {
        let n = libm::ceil(TAU * rho / (spacing * delta(rho))).max(6.0) as usize;
        // Stagger alternate rings by half a step.
        let offset = if level % 2 == 1 { PI / n as f64 } else { 0.0 };
        for k in 0..n {
            emit(C64::from_polar(rho, offset + TAU * k as f64 / n as f64));
        }
        rho += spacing * delta(rho);
        level += 1;
    }
}

fn grid_for_budget(r_out: f64, budget: usize, floor: f64) -> (f64, Vec<C64>) {
    let count = |s: f64, floor: f64| {
        let mut n = 0usize;
        polar_grid(r_out, s, floor, &mut |_| n += 1);
        n
    };
    // Small budgets cannot reach close to the rim even at unit spacing.
    let mut floor = floor;
    while floor < 1.0 && count(1.0, floor) > budget {
        floor *= 2.0;
    }
    // Smallest spacing in [0.02, 1] whose grid fits the budget.
    let (mut lo, mut hi) = (0.02f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if count(mid, floor) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut pts = Vec::new();
    polar_grid(r_out, hi, floor, &mut |z| pts.push(z));
    (hi, pts)
}

fn objective<M: MeasureOracle + ?Sized>(oracle: &M, params: &SelectionParams, z: C64) -> Result<f64> {
    oracle.mass(&Disc::new(z, params.delta(z))?)
}

/// Hill-climbs `z ↦ μ(D(z, δ(z)))` from `start` with an eight-direction
/// pattern search.
fn pattern_search<M: MeasureOracle + ?Sized>(
    oracle: &M,
    params: &SelectionParams,
    start: (C64, f64),
    spacing: f64,
) -> Result<(C64, f64)> {
    let (mut z, mut best) = start;
    let mut step = 0.5 * spacing * params.delta(z);
    let min_step = spacing * params.delta(z) / 16.0;
    for _ in 0..64 {
        if step < min_step {
            break;
        }
        let moves: Vec<C64> = (0..8)
            .map(|k| z + C64::from_polar(step, TAU * k as f64 / 8.0))
            .filter(|w| w.norm() < params.outer_radius * (1.0 - 1e-9))
            .collect();
        let vals = crate::numeric::par_map(&moves, |w| objective(oracle, params, *w));
        let mut improved = false;
        for (w, v) in moves.iter().zip(vals) {
            let v = v?;
            if v > best * (1.0 + 1e-9) {
                best = v;
                z = *w;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((z, best))
}

/// Certificate for `D(a, δ(a))`: the record plus whether both conditions
/// hold.
fn certify<M: MeasureOracle + ?Sized>(
    oracle: &M,
    params: &SelectionParams,
    a: C64,
    central: f64,
) -> Result<(DiscRecord, bool)> {
    let r = params.delta(a);
    let mass = oracle.mass(&Disc::new(a, r)?)?;
    let double = oracle.mass(&Disc::new(a, 2.0 * r)?)?;
    let ratio = if mass > 0.0 { double / mass } else { f64::INFINITY };
    let ok = mass > 0.0 && ratio <= params.doubling_bound && mass >= 0.5 * central * (1.0 - MASS_TOL);
    Ok((DiscRecord::new(a, r, mass, ratio), ok))
}

/// Selects `D(a, δ(a))` in `D(0, R)` with `μ(D(a, 2r)) ≤ bound · μ(D(a, r))`
/// and `μ(D(a, r)) ≥ ½ μ(D(0, R/4))`.
pub fn select_disc<M: MeasureOracle + ?Sized>(oracle: &M, params: &SelectionParams) -> Result<DiscRecord> {
    params.validate()?;
    let central = oracle.mass(&Disc::centered(params.outer_radius / 4.0)?)?;
    if !(central > 0.0) {
        return Err(Error::ZeroCentralMass { radius: params.outer_radius / 4.0 });
    }
    if !central.is_finite() {
        return Err(Error::InvalidInput(format!("measure of D(0, {}) is infinite", params.outer_radius / 4.0)));
    }
    let mut detail = alloc::string::String::new();
    for round in 0..=params.refine_rounds {
        let budget = params.grid_density.saturating_mul(1 << (2 * round));
        let floor = FIRST_FLOOR / libm::pow(4.0, round as f64);
        let (spacing, grid) = grid_for_budget(params.outer_radius, budget, floor);
        let values = crate::numeric::par_map(&grid, |z| objective(oracle, params, *z))
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

        // Polish the best few grid points, then certify in decreasing order.
        let mut candidates: Vec<(C64, f64)> = Vec::new();
        for &i in order.iter().take(4) {
            candidates.push(pattern_search(oracle, params, (grid[i], values[i]), spacing)?);
        }
        candidates.extend(order.iter().take(8).map(|&i| (grid[i], values[i])));
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
        candidates.dedup_by(|a, b| a.0 == b.0);

        let mut best_failure: Option<DiscRecord> = None;
        for &(a, _) in &candidates {
            let (rec, ok) = certify(oracle, params, a, central)?;
            if ok {
                return Ok(rec);
            }
            best_failure.get_or_insert(rec);
        }
        if let Some(rec) = best_failure {
            detail = format!(
                "best candidate D({}, {}) has mass {:e} (central {:e}) and doubling ratio {:e}",
                rec.center, rec.radius, rec.mass, central, rec.doubling_ratio
            );
        }
    }
    Err(Error::CertificateFailed { rounds: params.refine_rounds, detail })
}

/// Result of running the selection along an increasing radius schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum SequenceOutcome {
    /// Central masses keep growing; one record per radius.
    Diverging { records: Vec<DiscRecord> },
    /// Central masses stopped growing: the measure looks finite, and the
    /// caller should precompose the curve with an entire map instead.
    FiniteMeasure { central_masses: Vec<f64> },
}

/// Relative growth the central mass must show over the second half of the
/// schedule.
const PLATEAU_TOL: f64 = 1e-6;

pub fn select_disc_sequence<M: MeasureOracle + ?Sized>(
    oracle: &M,
    schedule: &[f64],
    template: &SelectionParams,
) -> Result<SequenceOutcome> {
    if schedule.len() < 2 || schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("radius schedule must be strictly increasing with ≥ 2 entries".into()));
    }
    let central_masses =
        schedule.iter().map(|&r| oracle.mass(&Disc::centered(r / 4.0)?)).collect::<Result<Vec<f64>>>()?;
    let mid = central_masses[(schedule.len() - 1) / 2];
    let last = central_masses[schedule.len() - 1];
    if !(last > mid * (1.0 + PLATEAU_TOL) + 1e-300) {
        return Ok(SequenceOutcome::FiniteMeasure { central_masses });
    }
    let records = schedule
        .iter()
        .map(|&r| select_disc(oracle, &SelectionParams { outer_radius: r, ..*template }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceOutcome::Diverging { records })
}

/// How an annulus `t^m ≤ |z| < t^{m+1}` is cut into patches.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverRule {
    /// Angular patch count is `⌈max(min_angular, √A_m)⌉`.
    pub min_angular: usize,
    /// Annuli with less mass than this are rejected.
    pub min_mass: f64,
}

impl Default for CoverRule {
    fn default() -> Self {
        Self { min_angular: 16, min_mass: 1e-9 }
    }
}

/// One patch of an annulus cover: the disc through its corners and its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Patch {
    pub disc: Disc,
    pub sector: usize,
    pub band: usize,
    pub mass: f64,
}

/// Patch discs of the annulus together with their masses.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnulusCover {
    pub inner: f64,
    pub outer: f64,
    pub annulus_mass: f64,
    pub angular: usize,
    pub radial: usize,
    pub patches: Vec<Patch>,
}

impl AnnulusCover {
    /// Sum of patch masses per angular sector.
    pub fn sector_masses(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.angular];
        for p in &self.patches {
            out[p.sector] += p.mass;
        }
        out
    }

    /// Largest patch radius. Records selected inside a patch have radius at
    /// most this, so `8 · patch_radius / inner` bounds their relative radius
    /// unless the selection drifts within `inner / 8` of the origin.
    pub fn patch_radius(&self) -> f64 {
        self.patches.iter().map(|p| p.disc.radius).fold(0.0, f64::max)
    }

    pub fn heaviest(&self) -> &Patch {
        self.patches.iter().fold(&self.patches[0], |best, p| if p.mass > best.mass { p } else { best })
    }
}

pub fn annulus_cover<M: MeasureOracle + ?Sized>(oracle: &M, t: f64, m: i32, rule: &CoverRule) -> Result<AnnulusCover> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("annulus ratio t must exceed 1, got {t}")));
    }
    if rule.min_angular < 3 {
        return Err(Error::InvalidInput("cover needs at least 3 angular patches".into()));
    }
    let inner = libm::pow(t, m as f64);
    let outer = inner * t;
    let annulus_mass = oracle.annulus_mass(inner, outer)?;
    if !(annulus_mass > rule.min_mass) {
        return Err(Error::EmptyAnnulus { mass: annulus_mass });
    }
    let angular = libm::ceil((rule.min_angular as f64).max(libm::sqrt(annulus_mass))) as usize;
    let radial = (libm::ceil((t - 1.0) * angular as f64 / TAU) as usize).max(1);
    let width = TAU / angular as f64;
    let mut shapes = Vec::with_capacity(angular * radial);
    for band in 0..radial {
        let lo = inner * libm::pow(t, band as f64 / radial as f64);
        let hi = inner * libm::pow(t, (band + 1) as f64 / radial as f64);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * width;
        let center_rel = |rho: f64| libm::sqrt(mid * mid + rho * rho - 2.0 * mid * rho * libm::cos(half));
        // Farthest corner; for thin patches the radial edge midpoints can be
        // farther, so include them too.
        let radius = center_rel(lo).max(center_rel(hi)).max(0.5 * (hi - lo)) * (1.0 + 1e-12);
        for sector in 0..angular {
            let center = C64::from_polar(mid, (sector as f64 + 0.5) * width);
            shapes.push((Disc::new(center, radius)?, sector, band));
        }
    }
    let masses = crate::numeric::par_map(&shapes, |(d, _, _)| oracle.mass(d));
    let mut patches = Vec::with_capacity(shapes.len());
    for ((disc, sector, band), mass) in shapes.into_iter().zip(masses) {
        patches.push(Patch { disc, sector, band, mass: mass? });
    }
    Ok(AnnulusCover { inner, outer, annulus_mass, angular, radial, patches })
}

/// `μ` seen from `shift`: `mass(D(c, r)) = μ(D(shift + c, r))`.
struct Translated<'a, M: ?Sized> {
    inner: &'a M,
    shift: C64,
}

impl<M: MeasureOracle + ?Sized> MeasureOracle for Translated<'_, M> {
    fn mass(&self, disc: &Disc) -> Result<f64> {
        self.inner.mass(&Disc { center: disc.center + self.shift, radius: disc.radius })
    }
}

/// Runs [`select_disc`] in `D(c, 4ρ)` for a patch disc `D(c, ρ)`.
pub fn select_in_patch<M: MeasureOracle + ?Sized>(
    oracle: &M,
    patch: &Disc,
    template: &SelectionParams,
) -> Result<DiscRecord> {
    let local = Translated { inner: oracle, shift: patch.center };
    let params = SelectionParams { outer_radius: 4.0 * patch.radius, ..*template };
    let rec = select_disc(&local, &params)?;
    Ok(DiscRecord::new(rec.center + patch.center, rec.radius, rec.mass, rec.doubling_ratio))
}

/// Selection inside the heaviest patch of the annulus `t^m ≤ |z| < t^{m+1}`.
pub fn select_disc_annulus<M: MeasureOracle + ?Sized>(
    oracle: &M,
    t: f64,
    m: i32,
    rule: &CoverRule,
    template: &SelectionParams,
) -> Result<DiscRecord> {
    let cover = annulus_cover(oracle, t, m, rule)?;
    select_in_patch(oracle, &cover.heaviest().disc, template)
}

/// Like [`select_disc_annulus`], but starting from the heaviest patch of
/// every angular sector whose mass is a circular local maximum holding at
/// least half the largest sector mass, so that several directions carrying
/// comparable mass are all represented.
pub fn select_disc_annulus_all<M: MeasureOracle + ?Sized>(
    oracle: &M,
    t: f64,
    m: i32,
    rule: &CoverRule,
    template: &SelectionParams,
) -> Result<Vec<DiscRecord>> {
    select_from_cover(oracle, &annulus_cover(oracle, t, m, rule)?, template)
}

/// The selection step of [`select_disc_annulus_all`] on a prepared cover.
/// Records whose centres fall inside an earlier record's disc are dropped.
pub fn select_from_cover<M: MeasureOracle + ?Sized>(
    oracle: &M,
    cover: &AnnulusCover,
    template: &SelectionParams,
) -> Result<Vec<DiscRecord>> {
    let sectors = cover.sector_masses();
    let n = sectors.len();
    let top = sectors.iter().copied().fold(0.0, f64::max);
    let mut starts = Vec::new();
    for j in 0..n {
        let (prev, next) = (sectors[(j + n - 1) % n], sectors[(j + 1) % n]);
        if sectors[j] >= 0.5 * top && sectors[j] >= prev && sectors[j] >= next && sectors[j] > 0.0 {
            let patch = cover
                .patches
                .iter()
                .filter(|p| p.sector == j)
                .fold(None::<&Patch>, |best, p| match best {
                    Some(b) if b.mass >= p.mass => Some(b),
                    _ => Some(p),
                })
                .map(|p| p.disc);
            starts.extend(patch);
        }
    }
    let found = crate::numeric::par_map(&starts, |d| select_in_patch(oracle, d, template));
    let mut records: Vec<DiscRecord> = Vec::new();
    for rec in found {
        let rec = rec?;
        if records.iter().all(|r| (r.center - rec.center).norm() >= r.radius.max(rec.radius)) {
            records.push(rec);
        }
    }
    Ok(records)
}

/// Points checked by the covering certificate.
pub const COVER_SAMPLES: u64 = 10_000;

/// Covers `D(a, 2r)`, `r = δ(a) = (R − |a|)/4`, by discs `D(z, δ(z))` with `z`
/// in `D(a, 2r)`.
///
/// Inside `D(a, 2r)` one has `δ(z) ≥ r/2`, so a hexagonal lattice of pitch
/// `0.8 r` (covering radius `0.8r/√3 ≈ 0.46 r`) suffices; lattice points
/// outside are projected onto the disc, which does not increase distances.
/// The result is checked on [`COVER_SAMPLES`] quasi-random points.
pub fn cover_double_disc(a: C64, outer_radius: f64) -> Result<Vec<Disc>> {
    let n = a.norm();
    if !(outer_radius > 0.0 && outer_radius.is_finite() && n < outer_radius) {
        return Err(Error::InvalidInput(format!("need |a| < R, got |a| = {n}, R = {outer_radius}")));
    }
    let delta = |z: C64| (outer_radius - z.norm()) / 4.0;
    let r = delta(a);
    let pitch = 0.8 * r;
    let reach = 2.0 * r + pitch / libm::sqrt(3.0);
    let inside = 2.0 * r * (1.0 - 1e-4);
    let row = pitch * libm::sqrt(3.0) / 2.0;
    let rows = libm::ceil(reach / row) as i64;
    let cols = libm::ceil(reach / pitch) as i64 + 1;
    let mut discs = Vec::new();
    for i in -rows..=rows {
        let shift = if i.rem_euclid(2) == 1 { 0.5 * pitch } else { 0.0 };
        for j in -cols..=cols {
            let offset = C64::new(j as f64 * pitch + shift, i as f64 * row);
            if offset.norm() > reach {
                continue;
            }
            let z = if offset.norm() > inside { a + offset * (inside / offset.norm()) } else { a + offset };
            discs.push(Disc::new(z, delta(z))?);
        }
    }
    if discs.len() > COVER_LIMIT {
        return Err(Error::CoveringFailed { center: a, radius: 2.0 * r, point: C64::new(f64::NAN, f64::NAN) });
    }
    let h = Halton::new(2, 0);
    for i in 0..COVER_SAMPLES {
        let p = a + h.disc_point(i) * (2.0 * r);
        if !discs.iter().any(|d| d.contains(p)) {
            return Err(Error::CoveringFailed { center: a, radius: 2.0 * r, point: p });
        }
    }
    Ok(discs)
}
