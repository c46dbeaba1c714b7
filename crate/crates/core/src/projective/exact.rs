//! Exact arithmetic over the Gaussian rationals `Q(i)`.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// Exact value of a finite double (every finite `f64` is a dyadic rational).
    pub fn from_f64(re: f64, im: f64) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(alloc::format!("non-finite coefficient {x}")))
        };
        Ok(Self::new(conv(re)?, conv(im)?))
    }

    /// Parses a real rational written as `"p/q"` or `"p"`.
    pub fn parse_real(s: &str) -> Result<BigRational> {
        let s = s.trim();
        let value =
            BigRational::from_str(s).map_err(|_| Error::InvalidInput(alloc::format!("cannot parse rational {s:?}")))?;
        Ok(value)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_complex(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re * &rhs.re - &self.im * &rhs.im, &self.re * &rhs.im + &self.im * &rhs.re)
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

/// Rank of a matrix over `Q(i)` by Gaussian elimination.
pub fn exact_rank(rows: &[Vec<GaussianRational>]) -> usize {
    let mut mat: Vec<Vec<GaussianRational>> = rows.to_vec();
    let nrows = mat.len();
    let ncols = mat.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pivot);
        let inv = mat[rank][col].inverse().expect("pivot is nonzero");
        let pivot_row: Vec<GaussianRational> = mat[rank].iter().map(|x| x * &inv).collect();
        for row in mat.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = &*x - &(&factor * p);
            }
        }
        mat[rank] = pivot_row;
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn int(n: i64) -> GaussianRational {
        GaussianRational::from_integer(n)
    }

    #[test]
    fn parse_fraction() {
        let q = GaussianRational::parse_real("-3/6").unwrap();
        assert_eq!(q, BigRational::new(BigInt::from(-1), BigInt::from(2)));
        assert!(GaussianRational::parse_real("x/2").is_err());
    }

    #[test]
    fn inverse_of_gaussian_integer() {
        let z = GaussianRational::from_f64(1.0, 2.0).unwrap();
        let one = &z * &z.inverse().unwrap();
        assert_eq!(one, int(1));
    }

    #[test]
    fn rank_of_example_rows() {
        let rows = vec![vec![int(1), int(0), int(1)], vec![int(1), int(0), int(2)], vec![int(1), int(1), int(0)]];
        assert_eq!(exact_rank(&rows), 3);
        let rows = vec![vec![int(1), int(0), int(1)], vec![int(2), int(0), int(2)], vec![int(0), int(1), int(0)]];
        assert_eq!(exact_rank(&rows), 2);
    }

    #[test]
    fn rank_with_complex_dependency() {
        let i = GaussianRational::from_f64(0.0, 1.0).unwrap();
        let r0 = vec![int(1), i.clone()];
        let r1 = vec![i.clone(), &i * &i];
        assert_eq!(exact_rank(&[r0, r1]), 1);
    }
}
