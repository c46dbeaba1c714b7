//! Linear forms on `C^{m+1}`, admissibility of divisor systems and the
//! compactness constants `C₁ ≤ max_{j∈I} |P_j(z)| ≤ C₂` on the unit sphere.

mod exact;
mod svd;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use self::exact::{exact_rank, GaussianRational};
pub use self::svd::{float_rank, singular_values, RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::lowdisc::Halton;
use crate::numeric::{par_map, Combinations};
use crate::C64;

/// A nonzero linear form `P(x) = Σ c_k x_k`. Forms built from rational data
/// keep an exact copy of their coefficients for rank computations.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    coefficients: Vec<C64>,
    exact: Option<Vec<GaussianRational>>,
}

impl LinearForm {
    /// Floating-point form; admissibility checks on it use the SVD rank.
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("linear form without coefficients".into()));
        }
        if coefficients.iter().all(|c| *c == C64::new(0.0, 0.0)) {
            return Err(Error::ZeroForm);
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite form coefficient".into()));
        }
        Ok(Self { coefficients, exact: None })
    }

    pub fn from_exact(coefficients: Vec<GaussianRational>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("linear form without coefficients".into()));
        }
        if coefficients.iter().all(GaussianRational::is_zero) {
            return Err(Error::ZeroForm);
        }
        let floats = coefficients.iter().map(GaussianRational::to_complex).collect();
        Ok(Self { coefficients: floats, exact: Some(coefficients) })
    }

    pub fn from_integers(coefficients: &[i64]) -> Result<Self> {
        Self::from_exact(coefficients.iter().map(|&n| GaussianRational::from_integer(n)).collect())
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn exact(&self) -> Option<&[GaussianRational]> {
        self.exact.as_deref()
    }

    /// Number of homogeneous variables, `m + 1`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.coefficients.iter().map(|c| c.norm_sqr()).sum())
    }

    /// The form multiplied by `scale`; the exact copy is dropped.
    pub fn scaled(&self, scale: C64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|c| c * scale).collect())
    }

    /// The form multiplied by an exact nonzero scalar.
    pub fn scaled_exact(&self, scale: &GaussianRational) -> Result<Self> {
        match &self.exact {
            Some(ex) => Self::from_exact(ex.iter().map(|c| c * scale).collect()),
            None => self.scaled(scale.to_complex()),
        }
    }
}

/// `P(x) = Σ c_k x_k`.
pub fn evaluate_form(form: &LinearForm, point: &[C64]) -> Result<C64> {
    if point.len() != form.len() {
        return Err(Error::DimensionMismatch { expected: form.len(), got: point.len() });
    }
    Ok(form.coefficients.iter().zip(point).map(|(c, x)| c * x).sum())
}

/// `q` hyperplanes in `P^m` together with the intersection order `n`: the
/// system is admissible when any `n + 1` of the hyperplanes have empty
/// intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorSystem {
    forms: Vec<LinearForm>,
    ambient_dim: usize,
    order: usize,
}

impl DivisorSystem {
    pub fn new(forms: Vec<LinearForm>, order: usize) -> Result<Self> {
        let first = forms.first().ok_or(Error::TooFewForms { forms: 0, needed: 1 })?;
        let len = first.len();
        if len < 2 {
            return Err(Error::InvalidInput("forms need at least two homogeneous variables".into()));
        }
        if let Some(bad) = forms.iter().find(|f| f.len() != len) {
            return Err(Error::DimensionMismatch { expected: len, got: bad.len() });
        }
        if order == 0 {
            return Err(Error::InvalidInput("intersection order n must be at least 1".into()));
        }
        Ok(Self { forms, ambient_dim: len - 1, order })
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    /// Projective dimension `m`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Intersection order `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.forms.iter().all(|f| f.exact.is_some())
    }

    /// The same system with its forms reordered by `perm` (`new[i] = old[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: perm.len() });
        }
        let forms = perm
            .iter()
            .map(|&i| self.forms.get(i).cloned().ok_or_else(|| Error::InvalidInput(format!("index {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(forms, self.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum RankMethod {
    Exact,
    SingularValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// Every `(n+1)`-subset has rank `m + 1`.
    AllSubsetsFullRank,
    /// A subset of `n + 1` hyperplanes meets in a point.
    DeficientSubset,
    /// `n < m`: any `n + 1 ≤ m` hyperplanes of `P^m` intersect.
    OrderBelowDimension,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub witness: Option<Vec<usize>>,
    pub witness_rank: Option<usize>,
    pub subsets_checked: u64,
    pub verdict: Verdict,
    pub method: RankMethod,
    pub explanation: String,
}

fn subset_rank(system: &DivisorSystem, subset: &[usize], method: RankMethod) -> usize {
    match method {
        RankMethod::Exact => {
            let rows: Vec<Vec<GaussianRational>> =
                subset.iter().map(|&i| system.forms[i].exact.clone().expect("exact system")).collect();
            exact_rank(&rows)
        }
        RankMethod::SingularValues => {
            let rows: Vec<Vec<C64>> = subset.iter().map(|&i| system.forms[i].coefficients.clone()).collect();
            float_rank(&rows)
        }
    }
}

/// Checks that every `n + 1` forms of the system have rank `m + 1`, i.e. the
/// corresponding hyperplanes have no common point. Rational systems are
/// checked exactly.
pub fn check_admissible(system: &DivisorSystem) -> Result<AdmissibilityReport> {
    let size = system.order + 1;
    if system.len() < size {
        return Err(Error::TooFewForms { forms: system.len(), needed: size });
    }
    let method = if system.is_exact() { RankMethod::Exact } else { RankMethod::SingularValues };
    let full = system.ambient_dim + 1;

    if system.order < system.ambient_dim {
        let witness: Vec<usize> = (0..size).collect();
        let rank = subset_rank(system, &witness, method);
        return Ok(AdmissibilityReport {
            admissible: false,
            witness: Some(witness),
            witness_rank: Some(rank),
            subsets_checked: 1,
            verdict: Verdict::OrderBelowDimension,
            method,
            explanation: format!(
                "n = {} < m = {}: any {} hyperplanes of P^{} share a point",
                system.order, system.ambient_dim, size, system.ambient_dim
            ),
        });
    }

    let mut checked = 0u64;
    for subset in Combinations::new(system.len(), size) {
        checked += 1;
        let rank = subset_rank(system, &subset, method);
        if rank < full {
            let explanation = format!("forms {subset:?} have rank {rank} < {full}; their hyperplanes meet");
            return Ok(AdmissibilityReport {
                admissible: false,
                witness: Some(subset),
                witness_rank: Some(rank),
                subsets_checked: checked,
                verdict: Verdict::DeficientSubset,
                method,
                explanation,
            });
        }
    }
    Ok(AdmissibilityReport {
        admissible: true,
        witness: None,
        witness_rank: None,
        subsets_checked: checked,
        verdict: Verdict::AllSubsetsFullRank,
        method,
        explanation: format!("all {checked} subsets of size {size} have rank {full}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundEstimate {
    /// Sampled minimum; an upper bound for the true `C₁`.
    pub lower: f64,
    /// Sampled maximum; a lower bound for the true `C₂`.
    pub upper: f64,
    pub sample_count: usize,
}

/// `max_{j∈subset} |P_j(z)|` at a point of the sphere.
pub fn subset_max_modulus(system: &DivisorSystem, subset: &[usize], z: &[C64]) -> Result<f64> {
    subset.iter().try_fold(0.0f64, |acc, &j| Ok(acc.max(evaluate_form(&system.forms[j], z)?.norm())))
}

/// Samples `max_{j∈subset} |P_j(z)|` over `sample_budget` Halton points of
/// the unit sphere of `C^{m+1}`. Larger budgets extend the same sequence, so
/// `lower` is nonincreasing and `upper` nondecreasing in the budget.
pub fn bounding_constants(
    system: &DivisorSystem,
    subset: &[usize],
    sample_budget: usize,
    seed: u64,
) -> Result<BoundEstimate> {
    let size = system.order + 1;
    if subset.len() != size {
        return Err(Error::SubsetSize { expected: size, got: subset.len() });
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= system.len()) {
        return Err(Error::InvalidInput(format!("form index {bad} out of range")));
    }
    if sample_budget < 10 {
        return Err(Error::InvalidInput("sample budget must be at least 10".into()));
    }
    let halton = Halton::new(2 * (system.ambient_dim + 1), seed);
    const CHUNK: usize = 4096;
    let chunks: Vec<usize> = (0..sample_budget.div_ceil(CHUNK)).collect();
    let partial = par_map(&chunks, |&c| -> Result<(f64, f64)> {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(sample_budget);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in start..end {
            let v = subset_max_modulus(system, subset, &halton.sphere_point(i as u64))?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    });
    let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
    for p in partial {
        let (lo, hi) = p?;
        lower = lower.min(lo);
        upper = upper.max(hi);
    }
    Ok(BoundEstimate { lower, upper, sample_count: sample_budget })
}
