//! Riesz (Cartan) measures of subharmonic potentials and the quantities
//! built on them.
//!
//! Masses are normalised so that `log|z|` has a unit atom at the origin:
//! `μ = Δu / 2π`, and the mass of a disc is the outward flux
//! `(1/2π) ∮ ∂u/∂n ds`. With this normalisation
//! `T(r) = (1/2π)∫u(re^{iθ})dθ − u(0) = ∫_0^r μ(D(0,t)) dt/t`.

mod majorant;
mod measure;

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::ops::RangeInclusive;

pub use self::majorant::{harmonic_majorant, rescaled_potential, HarmonicMajorant, RescaledPotential};
pub use self::measure::{Atom, CurveMeasure, GaussianBump, Measure, MeasureOracle};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::C64;

/// The open disc `D(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("invalid disc D({center}, {radius})")));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), radius)
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.center, self.radius * factor)
    }
}

/// A real function on (part of) the plane whose Riesz mass can be measured.
pub trait Potential: Sync {
    fn value(&self, z: C64) -> f64;

    /// See [`Curve::frequency_hint`].
    fn frequency_hint(&self) -> f64 {
        1.0
    }
}

/// `u = log‖F‖` of a curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePotential<C>(pub C);

impl<C: Curve> Potential for CurvePotential<C> {
    fn value(&self, z: C64) -> f64 {
        self.0.log_norm(z)
    }
    fn frequency_hint(&self) -> f64 {
        self.0.frequency_hint()
    }
}

/// Quadrature settings for flux (Green identity) disc masses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluxSettings {
    /// Lower bound for the number of boundary nodes, at least 64.
    pub initial_nodes: usize,
    /// Radial difference step; `None` picks `radius·1e-4` clamped to
    /// `[1e-8, 1e-2]`.
    pub step: Option<f64>,
    /// Stop once successive node doublings change the mass by less than this
    /// (relative).
    pub rel_tol: f64,
    pub max_doublings: u32,
    /// Boundary nodes per unit arc length per unit of frequency hint.
    pub node_density: f64,
}

impl Default for FluxSettings {
    fn default() -> Self {
        Self { initial_nodes: 64, step: None, rel_tol: 1e-3, max_doublings: 6, node_density: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEstimate {
    /// Mass after clamping round-off negatives to zero.
    pub mass: f64,
    /// Unclamped quadrature value.
    pub raw: f64,
    pub nodes: usize,
    /// Change over the last node doubling.
    pub change: f64,
}

pub(crate) fn default_step(radius: f64) -> f64 {
    (radius * 1e-4).clamp(1e-8, 1e-2).min(radius / 20.0)
}

/// Riesz mass of `D(center, r)` as the flux `(1/2π)∮ ∂u/∂n ds`, using a
/// Richardson-extrapolated central radial difference at `K` equispaced
/// boundary nodes and doubling `K` until the estimate settles.
pub fn flux_mass<P: Potential + ?Sized>(potential: &P, disc: &Disc, settings: &FluxSettings) -> Result<FluxEstimate> {
    if settings.initial_nodes < 64 {
        return Err(Error::InvalidInput("flux quadrature needs at least 64 nodes".into()));
    }
    let r = disc.radius;
    let h = settings.step.unwrap_or_else(|| default_step(r));
    if !(h > 0.0 && h < r / 10.0) {
        return Err(Error::InvalidInput(alloc::format!("radial step {h} must lie in (0, r/10) for r = {r}")));
    }
    let wanted = settings.node_density * potential.frequency_hint() * TAU * r;
    let mut nodes = settings.initial_nodes.max(if wanted.is_finite() { libm::ceil(wanted) as usize } else { 0 });
    nodes = nodes.next_power_of_two();

    let derivative = |theta: f64| -> f64 {
        let e = C64::new(libm::cos(theta), libm::sin(theta));
        let at = |rho: f64| potential.value(disc.center + e * rho);
        let d1 = (at(r + h) - at(r - h)) / (2.0 * h);
        let d2 = (at(r + 0.5 * h) - at(r - 0.5 * h)) / h;
        (4.0 * d2 - d1) / 3.0
    };
    let sweep = |count: usize, stride: usize, offset: usize| -> (f64, f64) {
        let idx: Vec<usize> = (0..count).map(|k| k * stride + offset).collect();
        nodes_total(&idx, count * stride, &derivative)
    };

    let (mut sum, mut abs_sum) = sweep(nodes, 1, 0);
    let mut estimate = r * sum / nodes as f64;
    let mut change = f64::INFINITY;
    for _ in 0..settings.max_doublings {
        // New nodes sit halfway between the old ones.
        let (s, a) = sweep(nodes, 2, 1);
        sum += s;
        abs_sum += a;
        nodes *= 2;
        let next = r * sum / nodes as f64;
        change = (next - estimate).abs();
        estimate = next;
        let scale = r * abs_sum / nodes as f64;
        if change <= (settings.rel_tol * estimate.abs()).max(1e-9 * scale + 1e-13) {
            let floor = 1e-6 * scale + 1e-12;
            let mass = if estimate < 0.0 && -estimate <= floor { 0.0 } else { estimate };
            return Ok(FluxEstimate { mass, raw: estimate, nodes, change });
        }
    }
    Err(Error::NonConvergence {
        what: "flux disc mass",
        detail: alloc::format!(
            "D({}, {}) still changing by {change:e} at {nodes} nodes (estimate {estimate:e})",
            disc.center,
            disc.radius
        ),
    })
}

fn nodes_total<F: Fn(f64) -> f64 + Sync>(idx: &[usize], total_nodes: usize, f: &F) -> (f64, f64) {
    let step = TAU / total_nodes as f64;
    let vals = crate::numeric::par_map(idx, |&k| f(k as f64 * step));
    vals.iter().fold((0.0, 0.0), |(s, a), v| (s + v, a + v.abs()))
}

/// Riesz mass of a disc for `u = log‖F‖`, with `nodes` initial boundary
/// nodes and radial step `step`.
pub fn disc_mass_curve<C: Curve + ?Sized>(curve: &C, disc: &Disc, nodes: usize, step: Option<f64>) -> Result<f64> {
    let settings = FluxSettings { initial_nodes: nodes, step, ..FluxSettings::default() };
    Ok(flux_mass(&CurvePotential(curve), disc, &settings)?.mass)
}

/// `T(r) = (1/2π)∫u(re^{iθ})dθ − u(0)` by the trapezoidal rule.
pub fn characteristic_boundary<C: Curve + ?Sized>(curve: &C, r: f64, nodes: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("radius must be positive, got {r}")));
    }
    if nodes < 4 {
        return Err(Error::InvalidInput("need at least 4 boundary nodes".into()));
    }
    let idx: Vec<usize> = (0..nodes).collect();
    let step = TAU / nodes as f64;
    let vals = crate::numeric::par_map(&idx, |&k| curve.log_norm(C64::from_polar(r, k as f64 * step)));
    let mean = vals.iter().sum::<f64>() / nodes as f64;
    Ok(mean - curve.log_norm(C64::new(0.0, 0.0)))
}

/// `∫_0^r μ(D(0,t)) dt/t`, integrated in `log t` over `(r·1e-6, r)` with
/// adaptive Simpson on `quad_points` initial panels.
pub fn characteristic_from_measure<M: MeasureOracle + ?Sized>(oracle: &M, r: f64, quad_points: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("radius must be positive, got {r}")));
    }
    let (lo, hi) = (libm::log(r * 1e-6), libm::log(r));
    let top = oracle.mass(&Disc::centered(r)?)?;
    if !top.is_finite() {
        return Err(Error::InvalidInput("measure of D(0, r) is infinite".into()));
    }
    let tol = 1e-5 * (top * (hi - lo)).max(1e-6);
    adaptive_simpson(|s| oracle.mass(&Disc::centered(libm::exp(s))?), lo, hi, quad_points.max(2), tol, 50)
}

/// `A_m = μ({t^m ≤ |z| < t^{m+1}})` for `m` in `indices`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnulusProfile {
    pub t: f64,
    pub first_index: i32,
    pub masses: Vec<f64>,
}

impl AnnulusProfile {
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.masses.iter().enumerate().map(|(k, &a)| (self.first_index + k as i32, a))
    }

    pub fn get(&self, m: i32) -> Option<f64> {
        usize::try_from(m - self.first_index).ok().and_then(|k| self.masses.get(k).copied())
    }
}

pub fn annulus_profile<M: MeasureOracle + ?Sized>(
    oracle: &M,
    t: f64,
    indices: RangeInclusive<i32>,
) -> Result<AnnulusProfile> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("annulus ratio t must exceed 1, got {t}")));
    }
    let first_index = *indices.start();
    let ms: Vec<i32> = indices.collect();
    let masses = crate::numeric::par_map(&ms, |&m| -> Result<f64> {
        let inner = libm::pow(t, m as f64);
        Ok(oracle.annulus_mass(inner, inner * t)?.max(0.0))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(AnnulusProfile { t, first_index, masses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // mpmath (40 digits): T(r) for (1 : e^z), i.e. the boundary mean of
    // ½log(1 + e^{2r cos θ}) minus ½log 2.
    const EXP_T: [(f64, f64); 6] = [
        (1.0, 0.112130900045952),
        (2.0, 0.361030229643158),
        (5.0, 1.2714970312925),
        (10.0, 2.84965386926613),
        (20.0, 6.02617385626752),
        (50.0, 15.5715390145205),
    ];

    #[test]
    fn log_modulus_has_unit_mass() {
        struct LogAbs;
        impl Potential for LogAbs {
            fn value(&self, z: C64) -> f64 {
                libm::log(z.norm())
            }
        }
        let est = flux_mass(&LogAbs, &Disc::new(c(0.3, -0.2), 2.0).unwrap(), &FluxSettings::default()).unwrap();
        assert!((est.mass - 1.0).abs() < 1e-6, "{est:?}");
        let est = flux_mass(&LogAbs, &Disc::new(c(3.0, 0.0), 2.0).unwrap(), &FluxSettings::default()).unwrap();
        assert!(est.mass.abs() < 1e-6, "{est:?}");
    }

    #[test]
    fn exp_line_disc_masses() {
        let spec = CurveSpec::exp_line();
        // mpmath: (1/2π)∫ ½sech²(x)·2√(100 − x²) dx = 3.16989095911279
        let m = disc_mass_curve(&spec, &Disc::centered(10.0).unwrap(), 64, None).unwrap();
        assert!((m - 3.16989095911279).abs() < 1e-5, "{m}");
        assert!((m - 10.0 / PI).abs() < 0.01 * 10.0 / PI);
        let far = disc_mass_curve(&spec, &Disc::new(c(100.0, 0.0), 1.0).unwrap(), 64, None).unwrap();
        assert!((0.0..=1e-6).contains(&far), "{far}");
    }

    #[test]
    fn constant_curve_is_massless() {
        let spec = CurveSpec::constant(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let m = disc_mass_curve(&spec, &Disc::new(c(4.0, 1.0), 3.0).unwrap(), 64, None).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn flux_rejects_bad_parameters() {
        let spec = CurveSpec::exp_line();
        let d = Disc::centered(1.0).unwrap();
        assert!(disc_mass_curve(&spec, &d, 32, None).is_err());
        assert!(disc_mass_curve(&spec, &d, 64, Some(0.2)).is_err());
        assert!(Disc::new(c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn boundary_characteristic_of_exp_line() {
        let spec = CurveSpec::exp_line();
        for (r, expected) in EXP_T {
            let t = characteristic_boundary(&spec, r, 8192).unwrap();
            assert!((t - expected).abs() < 1e-9 * (1.0 + expected), "r = {r}: {t}");
        }
        let constant = CurveSpec::constant(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(characteristic_boundary(&constant, 3.0, 64).unwrap().abs() < 1e-15);
    }

    #[test]
    fn measure_characteristic_of_exp_line() {
        let oracle = CurveMeasure::new(CurveSpec::exp_line());
        let t = characteristic_from_measure(&oracle, 20.0, 32).unwrap();
        assert!((t - EXP_T[4].1).abs() < 0.02 * EXP_T[4].1, "{t}");
    }

    #[test]
    fn measure_characteristic_of_atom_and_zero() {
        let atom = Measure::Atomic(alloc::vec![Atom { point: c(1.0, 0.0), mass: 1.0 }]);
        let t = characteristic_from_measure(&atom, core::f64::consts::E, 16).unwrap();
        assert!((t - 1.0).abs() < 1e-3, "{t}");
        assert_eq!(characteristic_from_measure(&Measure::Zero, 5.0, 16).unwrap(), 0.0);
    }

    #[test]
    fn profiles() {
        let inv = Measure::InverseSquare { cutoff: 0.0 };
        let p = annulus_profile(&inv, 2.0, 0..=20).unwrap();
        for (_, a) in p.iter() {
            assert!((a - TAU * core::f64::consts::LN_2).abs() < 1e-12);
        }
        let leb = Measure::Lebesgue { support: None };
        let p = annulus_profile(&leb, 2.0, 0..=5).unwrap();
        for (m, a) in p.iter() {
            let expected = 3.0 * PI * libm::pow(4.0, m as f64);
            assert!((a - expected).abs() < 1e-9 * expected);
        }
        let atoms = Measure::Atomic(
            (0..8).map(|k| Atom { point: c(libm::pow(4.0, k as f64), 0.0), mass: libm::pow(2.0, k as f64) }).collect(),
        );
        let p = annulus_profile(&atoms, 4.0, 0..=6).unwrap();
        for (m, a) in p.iter() {
            assert_eq!(a, libm::pow(2.0, m as f64));
        }
        assert_eq!(p.get(3), Some(8.0));
        assert!(annulus_profile(&atoms, 1.0, 0..=2).is_err());
    }
}
