//! Univariate polynomials with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Rat;
use crate::error::{KstabError, Result};

/// A polynomial in one variable over the rationals.
///
/// Coefficients are stored by ascending degree; the leading coefficient is
/// nonzero unless the polynomial is identically zero (empty vector).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn constant(c: Rat) -> Self {
        UniPoly::from_coeffs(vec![c])
    }

    /// Builds from ascending-degree coefficients, trimming trailing zeros.
    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// The monomial c·x^d.
    pub fn monomial(c: Rat, d: usize) -> Self {
        if c.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); d + 1];
        coeffs[d] = c;
        UniPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of x^i (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> Self {
        UniPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Substitutes x -> c·x.
    pub fn compose_scale(&self, c: &Rat) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut p = Rat::one();
        for a in &self.coeffs {
            out.push(a * &p);
            p *= c;
        }
        UniPoly::from_coeffs(out)
    }

    /// Exact division with remainder by a nonzero divisor.
    pub fn div_rem(&self, divisor: &UniPoly) -> Result<(UniPoly, UniPoly)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| KstabError::DivisionByZero("polynomial division by zero".into()))?;
        let lead = divisor.coeff(dd);
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let q = rem.last().unwrap() / &lead;
            for i in 0..=dd {
                let t = &q * &divisor.coeff(i);
                rem[k + i] -= &t;
            }
            while rem.last().is_some_and(Rat::is_zero) {
                rem.pop();
            }
            quot[k] = q;
            if rem.len() <= k + dd {
                continue;
            }
        }
        Ok((UniPoly::from_coeffs(quot), UniPoly::from_coeffs(rem)))
    }
}

/// Coefficient of x^expected_degree, which may be zero. Errors with
/// DegreeOverflow when the polynomial genuinely exceeds the expected degree,
/// which signals a wrong dimension upstream.
pub fn leading_coefficient(p: &UniPoly, expected_degree: usize) -> Result<Rat> {
    match p.degree() {
        Some(d) if d > expected_degree => Err(KstabError::DegreeOverflow(format!(
            "polynomial has degree {d}, expected at most {expected_degree}"
        ))),
        _ => Ok(p.coeff(expected_degree)),
    }
}

impl Add<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        UniPoly::from_coeffs(out)
    }
}

impl Sub<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - rhs.coeff(i));
        }
        UniPoly::from_coeffs(out)
    }
}

impl Mul<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = a * b;
                out[i + j] += &t;
            }
        }
        UniPoly::from_coeffs(out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn normalization_trims_leading_zeros() {
        let p = UniPoly::from_coeffs(vec![r(1), r(2), r(0), r(0)]);
        assert_eq!(p.degree(), Some(1));
        assert!(UniPoly::from_coeffs(vec![r(0)]).is_zero());
    }

    #[test]
    fn leading_coefficient_contract() {
        // p = 3x^2 + x, expected degree 2 -> 3
        let p = UniPoly::from_coeffs(vec![r(0), r(1), r(3)]);
        assert_eq!(leading_coefficient(&p, 2).unwrap(), r(3));
        // p = x, expected degree 2 -> 0 (sub-leading case)
        let q = UniPoly::from_coeffs(vec![r(0), r(1)]);
        assert_eq!(leading_coefficient(&q, 2).unwrap(), r(0));
        assert!(matches!(
            leading_coefficient(&p, 1),
            Err(KstabError::DegreeOverflow(_))
        ));
    }

    #[test]
    fn mul_and_eval() {
        // (x + 1)(x + 2) = x^2 + 3x + 2
        let a = UniPoly::from_coeffs(vec![r(1), r(1)]);
        let b = UniPoly::from_coeffs(vec![r(2), r(1)]);
        let p = &a * &b;
        assert_eq!(p.coeffs(), &[r(2), r(3), r(1)]);
        assert_eq!(p.eval(&r(10)), r(132));
    }

    #[test]
    fn division_with_remainder() {
        // x^3 - 1 = (x - 1)(x^2 + x + 1)
        let p = UniPoly::from_coeffs(vec![r(-1), r(0), r(0), r(1)]);
        let d = UniPoly::from_coeffs(vec![r(-1), r(1)]);
        let (q, rem) = p.div_rem(&d).unwrap();
        assert_eq!(q.coeffs(), &[r(1), r(1), r(1)]);
        assert!(rem.is_zero());

        let (q2, r2) = p.div_rem(&UniPoly::from_coeffs(vec![r(0), r(0), r(1)])).unwrap();
        assert_eq!(q2.coeffs(), &[r(0), r(1)]);
        assert_eq!(r2.coeffs(), &[r(-1)]);
    }
}
