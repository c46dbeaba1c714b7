//! Deterministic low-discrepancy point sets (Halton sequences).

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::C64;

/// The first `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    value
}

/// A Halton sequence in `[0,1)^dims`; `seed` offsets the starting index so
/// distinct seeds give distinct (but equally uniform) point sets.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    offset: u64,
}

impl Halton {
    pub fn new(dims: usize, seed: u64) -> Self {
        Self { bases: primes(dims), offset: seed.wrapping_mul(7919).wrapping_add(1) }
    }

    pub fn dims(&self) -> usize {
        self.bases.len()
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        let i = self.offset.wrapping_add(index);
        self.bases.iter().map(|&b| radical_inverse(i, b)).collect()
    }

    /// Point of the open unit disc, uniform in area.
    pub fn disc_point(&self, index: u64) -> C64 {
        let p = self.point(index);
        let r = libm::sqrt(p[0]);
        let t = TAU * p[1];
        C64::new(r * libm::cos(t), r * libm::sin(t))
    }

    /// Point of the unit sphere of `C^n` where `n = dims / 2`, obtained from
    /// complex Gaussians (Box–Muller) by normalisation.
    pub fn sphere_point(&self, index: u64) -> Vec<C64> {
        let p = self.point(index);
        let mut v: Vec<C64> = p
            .chunks_exact(2)
            .map(|pair| {
                let u1 = pair[0].max(1e-300);
                let r = libm::sqrt(-2.0 * libm::log(u1));
                let t = TAU * pair[1];
                C64::new(r * libm::cos(t), r * libm::sin(t))
            })
            .collect();
        let norm = libm::sqrt(v.iter().map(|c| c.norm_sqr()).sum::<f64>());
        if norm > 0.0 {
            for c in &mut v {
                *c /= norm;
            }
        } else {
            v[0] = C64::new(1.0, 0.0);
        }
        v
    }
}
