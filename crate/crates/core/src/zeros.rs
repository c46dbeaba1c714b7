//! Zero counting of `P ∘ F` on circles by the argument principle.
//!
//! The argument is tracked on `P(F(z)/‖F(z)‖)`; the positive factor
//! `‖F(z)‖` never changes it, so the count is insensitive to the `e^{±700}`
//! magnitudes exponential families reach.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use crate::curve::{form_value, Curve};
use crate::error::{Error, Result};
use crate::numeric::angle_delta;
use crate::potential::Disc;
use crate::projective::{DivisorSystem, LinearForm};
use crate::C64;

/// Radius multiplier applied when the contour passes too close to a zero.
pub const JIGGLE_FACTOR: f64 = 1.007;
pub const MAX_JIGGLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContourSpec {
    pub disc: Disc,
    /// Starting node count (≥ 32); raised for fast-varying curves.
    pub initial_nodes: usize,
    /// Maximal bisection depth per initial arc (≤ 24).
    pub max_depth: u32,
    /// Smallest acceptable cancellation ratio `|Σ c_j f_j| / Σ |c_j f_j|` on
    /// the contour.
    pub boundary_floor: f64,
}

impl ContourSpec {
    pub fn new(disc: Disc) -> Self {
        Self { disc, initial_nodes: 64, max_depth: 20, boundary_floor: 1e-9 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_nodes < 32 {
            return Err(Error::InvalidInput(alloc::format!("contour needs ≥ 32 nodes, got {}", self.initial_nodes)));
        }
        if self.max_depth > 24 {
            return Err(Error::InvalidInput(alloc::format!("bisection depth {} exceeds 24", self.max_depth)));
        }
        if !(self.boundary_floor >= 0.0 && self.boundary_floor < 1.0) {
            return Err(Error::InvalidInput("boundary floor must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroCount {
    pub count: u32,
    /// Smallest cancellation ratio met on the contour.
    pub min_boundary_modulus: f64,
    /// Radius actually used, when it differs from the requested one.
    pub jiggled_radius: Option<f64>,
}

enum ArcFailure {
    NearZero(f64),
    Depth,
}

struct ArcResult {
    phase: f64,
    min_modulus: f64,
}

/// Counts the zeros of `P ∘ F` in the open disc of `contour`.
pub fn winding_count<C: Curve + ?Sized>(curve: &C, form: &LinearForm, contour: &ContourSpec) -> Result<ZeroCount> {
    contour.validate()?;
    if form.len() != curve.components() {
        return Err(Error::DimensionMismatch { expected: curve.components(), got: form.len() });
    }
    let mut radius = contour.disc.radius;
    let mut worst = 1.0;
    for attempt in 0..=MAX_JIGGLES {
        match winding_once(curve, form, contour, radius)? {
            Ok((count, min_modulus)) => {
                return Ok(ZeroCount {
                    count,
                    min_boundary_modulus: min_modulus,
                    jiggled_radius: (attempt > 0).then_some(radius),
                })
            }
            Err(ArcFailure::NearZero(m)) => {
                worst = m;
                radius *= JIGGLE_FACTOR;
            }
            Err(ArcFailure::Depth) => {
                return Err(Error::NonConvergence {
                    what: "winding count",
                    detail: alloc::format!(
                        "phase still jumps by ≥ π/2 after {} bisections on |z - {}| = {radius}",
                        contour.max_depth,
                        contour.disc.center
                    ),
                })
            }
        }
    }
    Err(Error::ZeroOnContour { center: contour.disc.center, radius: contour.disc.radius, modulus: worst })
}

fn winding_once<C: Curve + ?Sized>(
    curve: &C,
    form: &LinearForm,
    contour: &ContourSpec,
    radius: f64,
) -> Result<core::result::Result<(u32, f64), ArcFailure>> {
    let center = contour.disc.center;
    let wanted = 4.0 * curve.frequency_hint() * TAU * radius;
    let nodes =
        contour.initial_nodes.max(if wanted.is_finite() { libm::ceil(wanted) as usize } else { 0 }).next_power_of_two();
    let point = |theta: f64| center + C64::new(libm::cos(theta), libm::sin(theta)) * radius;
    let eval = |theta: f64| -> Result<(f64, f64)> {
        let v = form_value(form, &curve.log_components(point(theta)))?;
        Ok((v.value.phase, v.relative_modulus))
    };
    let step = TAU / nodes as f64;
    let idx: Vec<usize> = (0..nodes).collect();
    let starts = crate::numeric::par_map(&idx, |&k| eval(k as f64 * step)).into_iter().collect::<Result<Vec<_>>>()?;
    let arcs = crate::numeric::par_map(&idx, |&k| {
        let a = (k as f64 * step, starts[k]);
        let b = ((k + 1) as f64 * step, starts[(k + 1) % nodes]);
        arc_phase(&eval, a, b, contour)
    });
    let mut total = 0.0;
    let mut min_modulus = f64::INFINITY;
    for arc in arcs {
        match arc? {
            Ok(r) => {
                total += r.phase;
                min_modulus = min_modulus.min(r.min_modulus);
            }
            Err(f) => return Ok(Err(f)),
        }
    }
    let turns = total / TAU;
    let count = libm::round(turns);
    if (turns - count).abs() > 1e-6 || count < 0.0 {
        return Err(Error::NonConvergence {
            what: "winding count",
            detail: alloc::format!("total phase change is {turns} turns on |z - {center}| = {radius}"),
        });
    }
    Ok(Ok((count as u32, min_modulus)))
}

/// Phase change along one arc, bisecting until every increment is below
/// `π/2`.
fn arc_phase<F>(
    eval: &F,
    a: (f64, (f64, f64)),
    b: (f64, (f64, f64)),
    contour: &ContourSpec,
) -> Result<core::result::Result<ArcResult, ArcFailure>>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let floor = contour.boundary_floor;
    let mut min_modulus = a.1 .1.min(b.1 .1);
    if min_modulus <= floor {
        return Ok(Err(ArcFailure::NearZero(min_modulus)));
    }
    let mut phase = 0.0;
    let mut stack = alloc::vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let d = angle_delta(lo.1 .0, hi.1 .0);
        if d.abs() < FRAC_PI_2 {
            phase += d;
            continue;
        }
        if depth >= contour.max_depth {
            return Ok(Err(ArcFailure::Depth));
        }
        let t = 0.5 * (lo.0 + hi.0);
        let mid = (t, eval(t)?);
        if mid.1 .1 <= floor {
            return Ok(Err(ArcFailure::NearZero(mid.1 .1)));
        }
        min_modulus = min_modulus.min(mid.1 .1);
        // Right half first so the left half is processed next.
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(Ok(ArcResult { phase, min_modulus }))
}

/// One row of a sector scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorCount {
    pub form_index: usize,
    pub radius: f64,
    pub count: u32,
    pub min_boundary_modulus: f64,
}

/// Counts zeros of every form in `D(r e^{iθ}, fraction · r)` for each `r`.
pub fn sector_zero_scan<C: Curve + ?Sized>(
    curve: &C,
    system: &DivisorSystem,
    ray_angle: f64,
    radii: &[f64],
    disc_fraction: f64,
) -> Result<Vec<SectorCount>> {
    if !(disc_fraction > 0.0 && disc_fraction <= 0.25) {
        return Err(Error::InvalidInput(alloc::format!("disc fraction must lie in (0, 1/4], got {disc_fraction}")));
    }
    if system.ambient_dim() + 1 != curve.components() {
        return Err(Error::DimensionMismatch { expected: curve.components(), got: system.ambient_dim() + 1 });
    }
    let jobs: Vec<(usize, f64)> = radii.iter().flat_map(|&r| (0..system.len()).map(move |j| (j, r))).collect();
    crate::numeric::par_map(&jobs, |&(j, r)| -> Result<SectorCount> {
        let disc = Disc::new(C64::from_polar(r, ray_angle), disc_fraction * r)?;
        let zc = winding_count(curve, &system.forms()[j], &ContourSpec::new(disc))?;
        Ok(SectorCount { form_index: j, radius: r, count: zc.count, min_boundary_modulus: zc.min_boundary_modulus })
    })
    .into_iter()
    .collect()
}
