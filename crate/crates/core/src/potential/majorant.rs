//! Poisson-integral harmonic majorants and the rescaled potentials built
//! from them around selected discs.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::{flux_mass, Disc, FluxEstimate, FluxSettings, Potential};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::selection::DiscRecord;
use crate::C64;

/// Boundary nodes per unit arc length per unit of frequency hint.
const BOUNDARY_DENSITY: f64 = 8.0;

/// Least harmonic majorant of `u` on a disc, as the Poisson integral of
/// equispaced boundary samples.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicMajorant {
    disc: Disc,
    boundary: Vec<f64>,
}

impl HarmonicMajorant {
    /// Builds the majorant from boundary values `u(c + R e^{2πik/K})`.
    pub fn from_boundary(disc: Disc, boundary: Vec<f64>) -> Result<Self> {
        if boundary.len() < 8 {
            return Err(Error::InvalidInput("harmonic majorant needs at least 8 boundary nodes".into()));
        }
        if boundary.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("boundary data must be finite".into()));
        }
        Ok(Self { disc, boundary })
    }

    pub fn disc(&self) -> &Disc {
        &self.disc
    }

    pub fn nodes(&self) -> usize {
        self.boundary.len()
    }

    pub fn value(&self, z: C64) -> Result<f64> {
        if !self.disc.contains(z) {
            return Err(Error::OutsideDisc { z, center: self.disc.center, radius: self.disc.radius });
        }
        Ok(self.value_unchecked(z))
    }

    /// Discrete Poisson sum normalised by the kernel total, so constants are
    /// reproduced exactly whatever the node count.
    pub(crate) fn value_unchecked(&self, z: C64) -> f64 {
        let w = (z - self.disc.center) / self.disc.radius;
        let numer = 1.0 - w.norm_sqr();
        let step = TAU / self.boundary.len() as f64;
        let (mut acc, mut weight) = (0.0, 0.0);
        for (k, u) in self.boundary.iter().enumerate() {
            let th = k as f64 * step;
            let e = C64::new(libm::cos(th), libm::sin(th));
            let kernel = numer / (e - w).norm_sqr();
            acc += kernel * u;
            weight += kernel;
        }
        acc / weight
    }
}

/// Majorant of `log‖F‖` on `disc`; the node count is raised to resolve the
/// curve's oscillation on the boundary.
pub fn harmonic_majorant<C: Curve + ?Sized>(curve: &C, disc: &Disc, boundary_nodes: usize) -> Result<HarmonicMajorant> {
    let wanted = BOUNDARY_DENSITY * curve.frequency_hint() * TAU * disc.radius;
    let nodes =
        boundary_nodes.max(if wanted.is_finite() { libm::ceil(wanted) as usize } else { 0 }).next_power_of_two();
    let idx: Vec<usize> = (0..nodes).collect();
    let step = TAU / nodes as f64;
    let boundary =
        crate::numeric::par_map(&idx, |&k| curve.log_norm(disc.center + C64::from_polar(disc.radius, k as f64 * step)));
    HarmonicMajorant::from_boundary(*disc, boundary)
}

/// `ζ ↦ (u(a + rζ) − ũ(a + rζ)) / M` on `D(0, 2)`, where `ũ` is the harmonic
/// majorant of `u` on `D(a, 2r)` and `M = μ(D(a, r))`.
#[derive(Debug, Clone)]
pub struct RescaledPotential<C> {
    curve: C,
    center: C64,
    radius: f64,
    mass: f64,
    majorant: HarmonicMajorant,
}

impl<C: Curve> RescaledPotential<C> {
    pub fn majorant(&self) -> &HarmonicMajorant {
        &self.majorant
    }

    pub fn value(&self, zeta: C64) -> Result<f64> {
        if zeta.norm() >= 2.0 {
            return Err(Error::OutsideDisc { z: zeta, center: C64::new(0.0, 0.0), radius: 2.0 });
        }
        Ok(self.value_unchecked(zeta))
    }

    fn value_unchecked(&self, zeta: C64) -> f64 {
        let z = self.center + zeta * self.radius;
        (self.curve.log_norm(z) - self.majorant.value_unchecked(z)) / self.mass
    }

    /// Riesz mass of the rescaled function over `D(0, radius)`, `radius < 2`.
    pub fn riesz_mass(&self, radius: f64, settings: &FluxSettings) -> Result<FluxEstimate> {
        if !(radius > 0.0 && radius < 2.0) {
            return Err(Error::InvalidInput(alloc::format!("rescaled mass radius must lie in (0, 2), got {radius}")));
        }
        let disc = Disc::centered(radius)?;
        let h = settings.step.unwrap_or_else(|| super::default_step(radius));
        if radius + h >= 2.0 {
            return Err(Error::InvalidInput("difference stencil leaves D(0, 2)".into()));
        }
        flux_mass(self, &disc, settings)
    }
}

impl<C: Curve> Potential for RescaledPotential<C> {
    fn value(&self, z: C64) -> f64 {
        self.value_unchecked(z)
    }

    // The Poisson kernel on |ζ| ≤ 1.9 resolves only at a few hundred nodes.
    fn frequency_hint(&self) -> f64 {
        self.curve.frequency_hint() * self.radius + 40.0
    }
}

pub fn rescaled_potential<C: Curve>(
    curve: C,
    record: &DiscRecord,
    boundary_nodes: usize,
) -> Result<RescaledPotential<C>> {
    if !(record.mass > 0.0 && record.mass.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("disc record mass must be positive, got {}", record.mass)));
    }
    let outer = Disc::new(record.center, 2.0 * record.radius)?;
    let majorant = harmonic_majorant(&curve, &outer, boundary_nodes.max(1024))?;
    Ok(RescaledPotential { curve, center: record.center, radius: record.radius, mass: record.mass, majorant })
}
