//! Holomorphic curves `F = (f_0 : … : f_m)` and their overflow-safe
//! evaluation.
//!
//! Every component is produced in log-polar form ([`LogValue`]), so families
//! such as `exp(a z + b)` can be evaluated far beyond `|Re(a z)| ≈ 709`
//! where the raw value leaves double range. Public results are either the
//! unit direction `F/‖F‖` together with `u = log‖F‖`, or logarithms of
//! `|P ∘ F|`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, LN_2, TAU};

use crate::error::{Error, Result};
use crate::numeric::half_log_sum_exp2;
use crate::projective::{DivisorSystem, LinearForm};
use crate::C64;

/// A complex number stored as `exp(log_abs + i·phase)`. Zero is
/// `log_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { log_abs: f64::NEG_INFINITY, phase: 0.0 };

    pub fn from_complex(c: C64) -> Self {
        if c.re == 0.0 && c.im == 0.0 {
            return Self::ZERO;
        }
        Self { log_abs: libm::log(c.norm()), phase: c.arg() }
    }

    /// `exp(log_abs - shift)·e^{i·phase}`.
    pub fn scaled(self, shift: f64) -> C64 {
        if self.log_abs == f64::NEG_INFINITY {
            return C64::new(0.0, 0.0);
        }
        let m = libm::exp(self.log_abs - shift);
        C64::new(m * libm::cos(self.phase), m * libm::sin(self.phase))
    }
}

impl core::ops::Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> Self {
        Self { log_abs: self.log_abs + other.log_abs, phase: self.phase + other.phase }
    }
}

/// `F(z)/‖F(z)‖` and `log‖F(z)‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub direction: Vec<C64>,
    pub log_norm: f64,
}

impl CurveSample {
    pub fn from_log_components(parts: &[LogValue]) -> Self {
        let log_norm = half_log_sum_exp2(parts.iter().map(|p| p.log_abs));
        let direction = parts.iter().map(|p| p.scaled(log_norm)).collect();
        Self { direction, log_norm }
    }
}

/// A holomorphic curve given through its homogeneous components.
///
/// Implementors provide `log_components`; everything else is derived. The
/// components must be entire and have no common zero.
pub trait Curve: Sync {
    /// Number of homogeneous components, `m + 1`.
    fn components(&self) -> usize;

    fn log_components(&self, z: C64) -> Vec<LogValue>;

    fn sample(&self, z: C64) -> CurveSample {
        CurveSample::from_log_components(&self.log_components(z))
    }

    /// `u(z) = log‖F(z)‖`.
    fn log_norm(&self, z: C64) -> f64 {
        half_log_sum_exp2(self.log_components(z).iter().map(|p| p.log_abs))
    }

    /// Rough rate (per unit length) at which `u` varies; used to size
    /// quadrature grids. Zero means "slowly varying".
    fn frequency_hint(&self) -> f64 {
        1.0
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn components(&self) -> usize {
        (**self).components()
    }
    fn log_components(&self, z: C64) -> Vec<LogValue> {
        (**self).log_components(z)
    }
    fn frequency_hint(&self) -> f64 {
        (**self).frequency_hint()
    }
}

/// Entire maps allowed as the inner function of a composed curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InnerMap {
    /// `g(z) = Σ c_k z^k`.
    Polynomial { coefficients: Vec<C64> },
    /// `g(z) = exp(slope·z + offset)`.
    Exponential { slope: C64, offset: C64 },
}

impl InnerMap {
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            InnerMap::Polynomial { coefficients } => horner(coefficients, z),
            InnerMap::Exponential { slope, offset } => (slope * z + offset).exp(),
        }
    }
}

/// Built-in curve families.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum CurveSpec {
    /// `f_j = exp(slopes[j]·z + offsets[j])`.
    Exponential { slopes: Vec<C64>, offsets: Vec<C64> },
    /// `f_j = sin(ε^j z)/z` with `ε = exp(2πi/order)`, `j = 0..order`. The
    /// common factor `1/z` removes the shared zero of `sin(ε^j z)` at the
    /// origin; the value at `0` is `ε^j`.
    SineSymmetric { order: usize },
    /// `f_j = Σ_k coefficients[j][k]·z^k`.
    Polynomial { coefficients: Vec<Vec<C64>> },
    /// `F ∘ g` for an inner entire map `g`.
    Composed { inner: InnerMap, outer: Box<CurveSpec> },
}

impl CurveSpec {
    /// `(1 : e^z)`.
    pub fn exp_line() -> Self {
        let zero = C64::new(0.0, 0.0);
        CurveSpec::Exponential { slopes: alloc::vec![zero, C64::new(1.0, 0.0)], offsets: alloc::vec![zero, zero] }
    }

    /// The constant curve `(c_0 : … : c_m)`.
    pub fn constant(values: &[C64]) -> Self {
        CurveSpec::Polynomial { coefficients: values.iter().map(|&c| alloc::vec![c]).collect() }
    }

    /// Projective dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.components().saturating_sub(1)
    }

    /// Structural checks plus the no-common-zero condition for polynomial
    /// families (the other families satisfy it by construction).
    pub fn validate(&self) -> Result<()> {
        match self {
            CurveSpec::Exponential { slopes, offsets } => {
                if slopes.len() != offsets.len() {
                    return Err(Error::DimensionMismatch { expected: slopes.len(), got: offsets.len() });
                }
                if slopes.len() < 2 {
                    return Err(Error::InvalidInput("a curve needs at least two components".into()));
                }
                Ok(())
            }
            CurveSpec::SineSymmetric { order } => {
                if *order < 2 {
                    return Err(Error::InvalidInput("sine_symmetric order must be at least 2".into()));
                }
                Ok(())
            }
            CurveSpec::Polynomial { coefficients } => {
                if coefficients.len() < 2 {
                    return Err(Error::InvalidInput("a curve needs at least two components".into()));
                }
                check_polynomial_common_zeros(coefficients)
            }
            CurveSpec::Composed { inner, outer } => {
                if let InnerMap::Polynomial { coefficients } = inner {
                    if coefficients.is_empty() {
                        return Err(Error::InvalidInput("inner polynomial without coefficients".into()));
                    }
                }
                outer.validate()
            }
        }
    }
}

impl Curve for CurveSpec {
    fn components(&self) -> usize {
        match self {
            CurveSpec::Exponential { slopes, .. } => slopes.len(),
            CurveSpec::SineSymmetric { order } => *order,
            CurveSpec::Polynomial { coefficients } => coefficients.len(),
            CurveSpec::Composed { outer, .. } => outer.components(),
        }
    }

    fn log_components(&self, z: C64) -> Vec<LogValue> {
        match self {
            CurveSpec::Exponential { slopes, offsets } => slopes
                .iter()
                .zip(offsets)
                .map(|(a, b)| {
                    let w = a * z + b;
                    LogValue { log_abs: w.re, phase: w.im }
                })
                .collect(),
            CurveSpec::SineSymmetric { order } => (0..*order)
                .map(|j| {
                    let root = unit_root(j, *order);
                    let s = log_sinc(root * z);
                    LogValue { log_abs: s.log_abs, phase: s.phase + root.arg() }
                })
                .collect(),
            CurveSpec::Polynomial { coefficients } => coefficients.iter().map(|c| log_poly(c, z)).collect(),
            CurveSpec::Composed { inner, outer } => outer.log_components(inner.eval(z)),
        }
    }

    fn frequency_hint(&self) -> f64 {
        match self {
            CurveSpec::Exponential { slopes, .. } => {
                let mut spread = 0.0f64;
                for a in slopes {
                    for b in slopes {
                        spread = spread.max((a - b).norm());
                    }
                }
                spread
            }
            CurveSpec::SineSymmetric { .. } => 2.0,
            CurveSpec::Polynomial { .. } => 0.0,
            CurveSpec::Composed { .. } => 1.0,
        }
    }
}

/// The curve `z ↦ F(scale·z)`.
#[derive(Debug, Clone, Copy)]
pub struct Precomposed<C> {
    pub inner: C,
    pub scale: C64,
}

impl<C: Curve> Curve for Precomposed<C> {
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn log_components(&self, z: C64) -> Vec<LogValue> {
        self.inner.log_components(self.scale * z)
    }
    fn frequency_hint(&self) -> f64 {
        self.inner.frequency_hint() * self.scale.norm()
    }
}

/// Adapts a caller-supplied evaluator that returns [`CurveSample`]s.
pub struct SampledCurve<F> {
    components: usize,
    eval: F,
}

impl<F: Fn(C64) -> CurveSample + Sync> SampledCurve<F> {
    pub fn new(components: usize, eval: F) -> Self {
        Self { components, eval }
    }
}

impl<F: Fn(C64) -> CurveSample + Sync> Curve for SampledCurve<F> {
    fn components(&self) -> usize {
        self.components
    }
    fn log_components(&self, z: C64) -> Vec<LogValue> {
        let s = (self.eval)(z);
        s.direction
            .iter()
            .map(|d| {
                let v = LogValue::from_complex(*d);
                LogValue { log_abs: v.log_abs + s.log_norm, phase: v.phase }
            })
            .collect()
    }
    fn sample(&self, z: C64) -> CurveSample {
        (self.eval)(z)
    }
}

fn unit_root(j: usize, order: usize) -> C64 {
    let t = TAU * j as f64 / order as f64;
    C64::new(libm::cos(t), libm::sin(t))
}

fn horner(coefficients: &[C64], z: C64) -> C64 {
    coefficients.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `sin w` in log-polar form, factoring out `e^{|Im w|}` when it is large.
pub fn log_sin(w: C64) -> LogValue {
    let (x, y) = (w.re, w.im);
    if y.abs() <= 1.0 {
        return LogValue::from_complex(w.sin());
    }
    if y > 0.0 {
        // sin w = (i/2)·e^{-iw}·(1 - e^{2iw}), |e^{2iw}| = e^{-2y} < e^{-2}.
        let q = C64::new(1.0, 0.0) - (C64::new(0.0, 2.0) * w).exp();
        LogValue { log_abs: y - LN_2 + libm::log(q.norm()), phase: FRAC_PI_2 - x + q.arg() }
    } else {
        // sin w = (-i/2)·e^{iw}·(1 - e^{-2iw}).
        let q = C64::new(1.0, 0.0) - (C64::new(0.0, -2.0) * w).exp();
        LogValue { log_abs: -y - LN_2 + libm::log(q.norm()), phase: -FRAC_PI_2 + x + q.arg() }
    }
}

/// `sin(w)/w`, with value 1 at the origin.
pub fn log_sinc(w: C64) -> LogValue {
    if w.norm() < 1e-2 {
        let w2 = w * w;
        let series = C64::new(1.0, 0.0) - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0;
        return LogValue::from_complex(series);
    }
    let s = log_sin(w);
    LogValue { log_abs: s.log_abs - libm::log(w.norm()), phase: s.phase - w.arg() }
}

/// Polynomial value in log-polar form; large `|z|` is handled by factoring
/// out `z^d`.
pub fn log_poly(coefficients: &[C64], z: C64) -> LogValue {
    let Some(degree) = coefficients.iter().rposition(|c| c.re != 0.0 || c.im != 0.0) else {
        return LogValue::ZERO;
    };
    let coefficients = &coefficients[..=degree];
    if z.norm() <= 1.0 || degree == 0 {
        return LogValue::from_complex(horner(coefficients, z));
    }
    let w = z.inv();
    let q = coefficients.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
    let q = LogValue::from_complex(q);
    LogValue { log_abs: q.log_abs + degree as f64 * libm::log(z.norm()), phase: q.phase + degree as f64 * z.arg() }
}

fn poly_roots(coefficients: &[C64]) -> Vec<C64> {
    let degree = coefficients.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coefficients[degree];
    let monic: Vec<C64> = coefficients[..=degree].iter().map(|c| c / lead).collect();
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..degree).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for i in 0..degree {
            let p = horner(&monic, roots[i]);
            let denom: C64 = (0..degree).filter(|&j| j != i).map(|j| roots[i] - roots[j]).product();
            if denom.norm() == 0.0 {
                roots[i] += C64::new(1e-8, 1e-8);
                continue;
            }
            let step = p / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

fn check_polynomial_common_zeros(components: &[Vec<C64>]) -> Result<()> {
    let nonzero: Vec<&Vec<C64>> = components.iter().filter(|c| c.iter().any(|x| x.norm() > 0.0)).collect();
    if nonzero.is_empty() {
        return Err(Error::InvalidInput("all curve components vanish identically".into()));
    }
    let degree = |c: &[C64]| c.iter().rposition(|x| x.norm() > 0.0).unwrap_or(0);
    let pivot = nonzero.iter().min_by_key(|c| degree(c)).expect("nonempty");
    if degree(pivot) == 0 {
        return Ok(());
    }
    for root in poly_roots(pivot) {
        let vanishes = nonzero.iter().all(|c| {
            let scale: f64 = c.iter().enumerate().map(|(k, x)| x.norm() * libm::pow(root.norm(), k as f64)).sum();
            horner(c, root).norm() <= 1e-8 * scale.max(1e-300)
        });
        if vanishes {
            return Err(Error::CommonZero { at: root });
        }
    }
    Ok(())
}

/// `P(F(z))` in log-polar form, together with the cancellation ratio
/// `|Σ c_j f_j| / Σ |c_j f_j|` (1 without cancellation, 0 at a zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: LogValue,
    pub relative_modulus: f64,
}

/// Values with `|Σ c_j f_j| ≤ ZERO_TOLERANCE · Σ|c_j f_j|` are zeros to
/// working precision.
pub const ZERO_TOLERANCE: f64 = 4.0 * f64::EPSILON;

pub fn form_value(form: &LinearForm, parts: &[LogValue]) -> Result<FormValue> {
    if parts.len() != form.len() {
        return Err(Error::DimensionMismatch { expected: form.len(), got: parts.len() });
    }
    let coeffs = form.coefficients();
    let shift = parts
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(p, _)| p.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(FormValue { value: LogValue::ZERO, relative_modulus: 0.0 });
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (p, c) in parts.iter().zip(coeffs) {
        let term = c * p.scaled(shift);
        sum += term;
        scale += term.norm();
    }
    let modulus = sum.norm();
    if modulus <= ZERO_TOLERANCE * scale {
        return Ok(FormValue { value: LogValue::ZERO, relative_modulus: modulus / scale });
    }
    Ok(FormValue {
        value: LogValue { log_abs: shift + libm::log(modulus), phase: sum.arg() },
        relative_modulus: modulus / scale,
    })
}

pub fn eval_curve<C: Curve + ?Sized>(curve: &C, z: C64) -> CurveSample {
    curve.sample(z)
}

/// `u(z) = log‖F(z)‖`.
pub fn eval_u<C: Curve + ?Sized>(curve: &C, z: C64) -> f64 {
    curve.log_norm(z)
}

/// `u_j(z) = log|P_j(F(z))|`; `-inf` exactly when `P_j(F(z))` vanishes to
/// working precision.
pub fn eval_uj<C: Curve + ?Sized>(curve: &C, form: &LinearForm, z: C64) -> Result<f64> {
    Ok(form_value(form, &curve.log_components(z))?.value.log_abs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviationRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl DeviationRange {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Extremes of `max_{j∈subset} u_j − u` over the sample points.
pub fn deviation_scan<C: Curve + ?Sized>(
    curve: &C,
    system: &DivisorSystem,
    subset: &[usize],
    samples: &[C64],
) -> Result<DeviationRange> {
    if curve.components() != system.ambient_dim() + 1 {
        return Err(Error::DimensionMismatch { expected: system.ambient_dim() + 1, got: curve.components() });
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= system.len()) {
        return Err(Error::InvalidInput(alloc::format!("form index {bad} out of range")));
    }
    let values = crate::numeric::par_map(samples, |&z| -> Result<f64> {
        let parts = curve.log_components(z);
        let u = half_log_sum_exp2(parts.iter().map(|p| p.log_abs));
        let mut best = f64::NEG_INFINITY;
        for &j in subset {
            best = best.max(form_value(&system.forms()[j], &parts)?.value.log_abs);
        }
        Ok(best - u)
    });
    let mut range = DeviationRange { min: f64::INFINITY, max: f64::NEG_INFINITY, samples: samples.len() };
    for v in values {
        let v = v?;
        range.min = range.min.min(v);
        range.max = range.max.max(v);
    }
    Ok(range)
}

/// Distance between `F(εz)` and the cyclic shift of `F(z)`, compared
/// projectively (up to a unimodular factor) and through `log‖F‖`.
pub fn symmetry_check(spec: &CurveSpec, z: C64) -> Result<f64> {
    let CurveSpec::SineSymmetric { order } = spec else {
        return Err(Error::WrongFamily);
    };
    let eps = unit_root(1, *order);
    let rotated = spec.sample(eps * z);
    let base = spec.sample(z);
    let shifted: Vec<C64> = (0..*order).map(|j| base.direction[(j + 1) % order]).collect();
    let overlap: C64 = shifted.iter().zip(&rotated.direction).map(|(s, r)| s.conj() * r).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let dir_gap = rotated.direction.iter().zip(&shifted).map(|(r, s)| (r - phase * s).norm()).fold(0.0f64, f64::max);
    Ok(dir_gap.max((rotated.log_norm - base.log_norm).abs()))
}
