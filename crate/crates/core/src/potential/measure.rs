//! Measure oracles: anything that can report the mass of a disc.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use super::{flux_mass, CurvePotential, Disc, FluxSettings};
use crate::curve::{Curve, CurveSpec};
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;
use crate::C64;

/// Uniform "mass of a disc" interface. Implementations must be safe to
/// query concurrently.
pub trait MeasureOracle: Sync {
    /// `μ(D(center, radius))` for the open disc; may be `+inf`.
    fn mass(&self, disc: &Disc) -> Result<f64>;

    /// `μ({inner ≤ |z| < outer})`.
    fn annulus_mass(&self, inner: f64, outer: f64) -> Result<f64> {
        let big = self.mass(&Disc::centered(outer)?)?;
        let small = if inner > 0.0 { self.mass(&Disc::centered(inner)?)? } else { 0.0 };
        Ok((big - small).max(0.0))
    }
}

impl<M: MeasureOracle + ?Sized> MeasureOracle for &M {
    fn mass(&self, disc: &Disc) -> Result<f64> {
        (**self).mass(disc)
    }
    fn annulus_mass(&self, inner: f64, outer: f64) -> Result<f64> {
        (**self).annulus_mass(inner, outer)
    }
}

/// Riesz measure of `log‖F‖` for a curve, via flux quadrature.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveMeasure<C> {
    pub curve: C,
    pub settings: FluxSettings,
}

impl<C: Curve> CurveMeasure<C> {
    pub fn new(curve: C) -> Self {
        Self { curve, settings: FluxSettings::default() }
    }
}

impl<C: Curve> MeasureOracle for CurveMeasure<C> {
    fn mass(&self, disc: &Disc) -> Result<f64> {
        Ok(flux_mass(&CurvePotential(&self.curve), disc, &self.settings)?.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    pub point: C64,
    pub mass: f64,
}

/// `weight` times the isotropic normal law with mean `center` and standard
/// deviation `sigma` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianBump {
    pub center: C64,
    pub sigma: f64,
    pub weight: f64,
}

/// Declarative measures, as named in configuration files. On the wire every
/// variant is an object tagged by `kind`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "wire::MeasureWire", into = "wire::MeasureWire"))]
pub enum Measure {
    Zero,
    Curve(CurveMeasure<CurveSpec>),
    /// Density `1/|z|²` on `|z| ≥ cutoff` (`cutoff = 0`: the whole plane).
    InverseSquare {
        cutoff: f64,
    },
    /// Area measure, optionally restricted to `D(0, support)`.
    Lebesgue {
        support: Option<f64>,
    },
    Atomic(Vec<Atom>),
    Gaussian(GaussianBump),
    Mixture(Vec<Measure>),
    /// Push-forward under `z ↦ scale·z`.
    Pushforward {
        scale: C64,
        inner: Box<Measure>,
    },
}

#[cfg(feature = "serde")]
mod wire {
    use alloc::boxed::Box;
    use alloc::vec::Vec;

    use super::{Atom, CurveMeasure, GaussianBump, Measure};
    use crate::curve::CurveSpec;
    use crate::potential::FluxSettings;
    use crate::C64;

    // Internally tagged enums cannot carry bare sequences, so the list-like
    // variants get named fields here.
    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
    pub(super) enum MeasureWire {
        Zero,
        Curve {
            curve: CurveSpec,
            #[serde(default)]
            settings: Option<FluxSettings>,
        },
        InverseSquare {
            #[serde(default)]
            cutoff: f64,
        },
        Lebesgue {
            #[serde(default)]
            support: Option<f64>,
        },
        Atomic {
            atoms: Vec<Atom>,
        },
        Gaussian {
            center: C64,
            sigma: f64,
            weight: f64,
        },
        Mixture {
            parts: Vec<Measure>,
        },
        Pushforward {
            scale: C64,
            inner: Box<Measure>,
        },
    }

    impl From<MeasureWire> for Measure {
        fn from(w: MeasureWire) -> Self {
            match w {
                MeasureWire::Zero => Measure::Zero,
                MeasureWire::Curve { curve, settings } => {
                    Measure::Curve(CurveMeasure { curve, settings: settings.unwrap_or_default() })
                }
                MeasureWire::InverseSquare { cutoff } => Measure::InverseSquare { cutoff },
                MeasureWire::Lebesgue { support } => Measure::Lebesgue { support },
                MeasureWire::Atomic { atoms } => Measure::Atomic(atoms),
                MeasureWire::Gaussian { center, sigma, weight } => {
                    Measure::Gaussian(GaussianBump { center, sigma, weight })
                }
                MeasureWire::Mixture { parts } => Measure::Mixture(parts),
                MeasureWire::Pushforward { scale, inner } => Measure::Pushforward { scale, inner },
            }
        }
    }

    impl From<Measure> for MeasureWire {
        fn from(m: Measure) -> Self {
            match m {
                Measure::Zero => MeasureWire::Zero,
                Measure::Curve(c) => MeasureWire::Curve { curve: c.curve, settings: Some(c.settings) },
                Measure::InverseSquare { cutoff } => MeasureWire::InverseSquare { cutoff },
                Measure::Lebesgue { support } => MeasureWire::Lebesgue { support },
                Measure::Atomic(atoms) => MeasureWire::Atomic { atoms },
                Measure::Gaussian(g) => MeasureWire::Gaussian { center: g.center, sigma: g.sigma, weight: g.weight },
                Measure::Mixture(parts) => MeasureWire::Mixture { parts },
                Measure::Pushforward { scale, inner } => MeasureWire::Pushforward { scale, inner },
            }
        }
    }
}

impl Measure {
    pub fn curve(spec: CurveSpec) -> Self {
        Measure::Curve(CurveMeasure::new(spec))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.into()));
        match self {
            Measure::Zero => Ok(()),
            Measure::Curve(c) => c.curve.validate(),
            Measure::InverseSquare { cutoff } if !(*cutoff >= 0.0 && cutoff.is_finite()) => {
                bad("inverse_square cutoff must be finite and nonnegative")
            }
            Measure::Lebesgue { support: Some(s) } if !(*s > 0.0) => bad("lebesgue support must be positive"),
            Measure::Atomic(atoms) if atoms.iter().any(|a| !(a.mass >= 0.0) || !a.point.re.is_finite()) => {
                bad("atoms need finite points and nonnegative masses")
            }
            Measure::Gaussian(g) if !(g.sigma > 0.0 && g.weight >= 0.0) => bad("gaussian bump needs sigma > 0"),
            Measure::Mixture(parts) => parts.iter().try_for_each(Measure::validate),
            Measure::Pushforward { scale, inner } => {
                if scale.norm() == 0.0 {
                    return bad("push-forward scale must be nonzero");
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }
}

impl MeasureOracle for Measure {
    fn mass(&self, disc: &Disc) -> Result<f64> {
        match self {
            Measure::Zero => Ok(0.0),
            Measure::Curve(c) => c.mass(disc),
            Measure::InverseSquare { cutoff } => Ok(inverse_square_disc_mass(disc, *cutoff)),
            Measure::Lebesgue { support } => Ok(match support {
                None => PI * disc.radius * disc.radius,
                Some(s) => lens_area(disc.radius, *s, disc.center.norm()),
            }),
            Measure::Atomic(atoms) => Ok(atoms.iter().filter(|a| disc.contains(a.point)).map(|a| a.mass).sum()),
            Measure::Gaussian(g) => Ok(gaussian_disc_mass(g, disc)),
            Measure::Mixture(parts) => parts.iter().map(|p| p.mass(disc)).sum(),
            Measure::Pushforward { scale, inner } => {
                inner.mass(&Disc::new(disc.center / scale, disc.radius / scale.norm())?)
            }
        }
    }

    fn annulus_mass(&self, inner: f64, outer: f64) -> Result<f64> {
        if outer <= inner {
            return Ok(0.0);
        }
        match self {
            Measure::InverseSquare { cutoff } => {
                let lo = inner.max(*cutoff);
                Ok(if outer > lo && lo > 0.0 {
                    TAU * libm::log(outer / lo)
                } else if lo == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                })
            }
            Measure::Lebesgue { support } => {
                let cap = |r: f64| support.map_or(r, |s| r.min(s));
                Ok(PI * (cap(outer) * cap(outer) - cap(inner) * cap(inner)))
            }
            Measure::Atomic(atoms) => Ok(atoms
                .iter()
                .filter(|a| {
                    let n = a.point.norm();
                    inner <= n && n < outer
                })
                .map(|a| a.mass)
                .sum()),
            Measure::Mixture(parts) => parts.iter().map(|p| p.annulus_mass(inner, outer)).sum(),
            Measure::Pushforward { scale, inner: m } => m.annulus_mass(inner / scale.norm(), outer / scale.norm()),
            _ => {
                let big = self.mass(&Disc::centered(outer)?)?;
                let small = if inner > 0.0 { self.mass(&Disc::centered(inner)?)? } else { 0.0 };
                Ok((big - small).max(0.0))
            }
        }
    }
}

/// Area of `D(c1, r1) ∩ D(c2, r2)` with `|c1 - c2| = d`.
pub(crate) fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = libm::acos(((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0));
    let a2 = libm::acos(((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0));
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * libm::sqrt(k.max(0.0))
}

/// `∫∫_{D ∩ {|z| ≥ cutoff}} dA/|z|²`.
///
/// In log-polar coordinates `(log ρ, θ)` the density becomes Lebesgue, so the
/// mass is `∫ log(ρ_out(θ)/ρ_in(θ)) dθ` over the rays meeting the region. A
/// disc avoiding the cutoff circle has the closed form `π·log(d²/(d²−r²))`.
pub(crate) fn inverse_square_disc_mass(disc: &Disc, cutoff: f64) -> f64 {
    let d = disc.center.norm();
    let r = disc.radius;
    if d >= r + cutoff && d > r {
        return PI * libm::log(d * d / ((d - r) * (d + r)));
    }
    if cutoff <= 0.0 {
        return f64::INFINITY;
    }
    // Angles (relative to arg a) where the disc boundary crosses |z| = cutoff.
    let mut breaks: Vec<f64> = Vec::new();
    if d > 0.0 {
        let cos_k = (cutoff * cutoff + d * d - r * r) / (2.0 * cutoff * d);
        if cos_k.abs() < 1.0 {
            let k = libm::acos(cos_k);
            breaks.push(-k);
            breaks.push(k);
        }
    }
    let ray = |phi: f64| -> f64 {
        let s = libm::sin(phi);
        let disc2 = r * r - d * d * s * s;
        if disc2 <= 0.0 {
            return 0.0;
        }
        let root = libm::sqrt(disc2);
        let c = d * libm::cos(phi);
        let (lo, hi) = ((c - root).max(0.0), c + root);
        let lo = lo.max(cutoff);
        if hi > lo {
            libm::log(hi / lo)
        } else {
            0.0
        }
    };
    let rule = gauss_legendre(24);
    let integrate = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| crate::numeric::gauss_composite(f, a, b, 8, &rule);
    if d > r {
        // Rays meet the disc for |φ| < φ0; φ = φ0·sin ψ removes the square-root
        // behaviour at the tangent rays.
        let phi0 = libm::asin(r / d);
        let mut cuts: Vec<f64> = alloc::vec![-FRAC_PI_2, FRAC_PI_2];
        for b in &breaks {
            if b.abs() < phi0 {
                cuts.push(libm::asin(b / phi0));
            }
        }
        cuts.sort_by(f64::total_cmp);
        let g = |psi: f64| ray(phi0 * libm::sin(psi)) * phi0 * libm::cos(psi);
        cuts.windows(2).map(|w| integrate(w[0], w[1], &g)).sum()
    } else {
        let mut cuts: Vec<f64> = alloc::vec![-PI, PI];
        cuts.extend(breaks);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2).map(|w| integrate(w[0], w[1], &ray)).sum()
    }
}

/// `e^{-x}·I₀(x)` for `x ≥ 0` (Abramowitz–Stegun 9.8.1/9.8.2).
fn bessel_i0_scaled(x: f64) -> f64 {
    if x < 3.75 {
        let t = (x / 3.75) * (x / 3.75);
        let i0 = 1.0
            + t * (3.5156229 + t * (3.0899424 + t * (1.2067492 + t * (0.2659732 + t * (0.0360768 + t * 0.0045813)))));
        i0 * libm::exp(-x)
    } else {
        let t = 3.75 / x;
        let p = 0.39894228
            + t * (0.01328592
                + t * (0.00225319
                    + t * (-0.00157565
                        + t * (0.00916281
                            + t * (-0.02057706 + t * (0.02635537 + t * (-0.01647633 + t * 0.00392377)))))));
        p / libm::sqrt(x)
    }
}

/// Weight of the normal law inside the disc: the radial density of
/// `|X − a|` is Rician, integrated over `[0, r]` where it is non-negligible.
fn gaussian_disc_mass(g: &GaussianBump, disc: &Disc) -> f64 {
    let d = (disc.center - g.center).norm();
    let s2 = g.sigma * g.sigma;
    let lo = (d - 10.0 * g.sigma).max(0.0);
    let hi = disc.radius.min(d + 10.0 * g.sigma);
    if hi <= lo {
        return if disc.radius >= d + 10.0 * g.sigma { g.weight } else { 0.0 };
    }
    let rule = gauss_legendre(16);
    let density = |rho: f64| {
        let x = rho * d / s2;
        rho / s2 * libm::exp(-(rho - d) * (rho - d) / (2.0 * s2)) * bessel_i0_scaled(x)
    };
    let panels = (libm::ceil((hi - lo) / g.sigma) as usize).clamp(4, 64);
    g.weight * crate::numeric::gauss_composite(density, lo, hi, panels, &rule).clamp(0.0, 1.0)
}
