//! Singular values of small complex matrices by one-sided Jacobi rotations.

use alloc::vec::Vec;

use crate::C64;

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Singular values of the `rows × cols` matrix given row-wise, in
/// nonincreasing order.
pub fn singular_values(rows: &[Vec<C64>]) -> Vec<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    // Work on columns of the matrix with fewer columns than rows.
    let mut cols: Vec<Vec<C64>> = if ncols <= nrows {
        (0..ncols).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    } else {
        rows.iter().map(|r| r.iter().map(|c| c.conj()).collect()).collect()
    };
    let n = cols.len();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|c| c.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|c| c.norm_sqr()).sum();
                let gamma: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= 1e-15 * libm::sqrt(alpha * beta) || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of the off-diagonal entry, then apply a
                // real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for k in 0..cols[i].len() {
                    let a = cols[i][k];
                    let b = cols[j][k] * phase.conj();
                    cols[i][k] = a * c - b * s;
                    cols[j][k] = a * s + b * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| libm::sqrt(c.iter().map(|x| x.norm_sqr()).sum())).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with threshold `RANK_TOLERANCE · σ_max`.
pub fn float_rank(rows: &[Vec<C64>]) -> usize {
    let sv = singular_values(rows);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * top).count()
}
