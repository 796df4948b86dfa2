//! Bivariate polynomials in (r, k) with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use super::{Rat, UniPoly};
use crate::error::{KstabError, Result};

/// A polynomial in two variables r and k. Zero coefficients are never
/// stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    // (r-degree, k-degree) -> coefficient
    coeffs: BTreeMap<(usize, usize), Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { coeffs: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn insert(&mut self, r_deg: usize, k_deg: usize, c: Rat) {
        if c.is_zero() {
            self.coeffs.remove(&(r_deg, k_deg));
        } else {
            self.coeffs.insert((r_deg, k_deg), c);
        }
    }

    pub fn coeff(&self, r_deg: usize, k_deg: usize) -> Rat {
        self.coeffs.get(&(r_deg, k_deg)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.coeffs.iter()
    }

    pub fn k_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|&(_, k)| k).max()
    }

    pub fn r_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|&(r, _)| r).max()
    }

    /// Lifts a univariate polynomial in r.
    pub fn from_r_poly(p: &UniPoly) -> Self {
        let mut out = BiPoly::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            out.insert(i, 0, c.clone());
        }
        out
    }

    /// The monomial k.
    pub fn k_monomial() -> Self {
        let mut out = BiPoly::zero();
        out.insert(0, 1, Rat::one());
        out
    }

    pub fn eval(&self, r: &Rat, k: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(i, j), c) in &self.coeffs {
            acc += c * &r.pow(i as u32) * &k.pow(j as u32);
        }
        acc
    }

    /// Collects the coefficient of k^j as a polynomial in r.
    pub fn k_slice(&self, j: usize) -> UniPoly {
        let max_r = self
            .coeffs
            .keys()
            .filter(|&&(_, kk)| kk == j)
            .map(|&(rr, _)| rr)
            .max();
        match max_r {
            None => UniPoly::zero(),
            Some(d) => {
                let mut v = vec![Rat::zero(); d + 1];
                for (&(i, kk), c) in &self.coeffs {
                    if kk == j {
                        v[i] = c.clone();
                    }
                }
                UniPoly::from_coeffs(v)
            }
        }
    }

    /// Evaluates r to a number, leaving a polynomial in k.
    pub fn eval_r(&self, r: &Rat) -> UniPoly {
        let kd = self.k_degree().unwrap_or(0);
        let mut v = vec![Rat::zero(); kd + 1];
        for (&(i, j), c) in &self.coeffs {
            let t = c * &r.pow(i as u32);
            v[j] += &t;
        }
        UniPoly::from_coeffs(v)
    }
}

impl Add<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.coeffs {
            let v = out.coeff(i, j) + c;
            out.insert(i, j, v);
        }
        out
    }
}

impl Sub<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.coeffs {
            let v = out.coeff(i, j) - c;
            out.insert(i, j, v);
        }
        out
    }
}

impl Mul<&BiPoly> for &BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.coeffs {
            for (&(i2, j2), c2) in &rhs.coeffs {
                let v = out.coeff(i1 + i2, j1 + j2) + c1 * c2;
                out.insert(i1 + i2, j1 + j2, v);
            }
        }
        out
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c})*r^{i}*k^{j}")?;
            first = false;
        }
        Ok(())
    }
}

/// Splits w̃(r, k) = Σ e_i(r) k^i into the polynomials e_1, ..., e_{n+1}.
///
/// Errors with DegreeOverflow when the k-degree exceeds n+1 (wrong
/// dimension) and rejects a nonzero k-constant part, which a weight
/// difference can never have. Reassembling Σ e_i(r) k^i is the identity.
pub fn extract_e_coefficients(wtilde: &BiPoly, n: usize) -> Result<Vec<UniPoly>> {
    if let Some(kd) = wtilde.k_degree() {
        if kd > n + 1 {
            return Err(KstabError::DegreeOverflow(format!(
                "k-degree {kd} exceeds n+1 = {}",
                n + 1
            )));
        }
    }
    let e0 = wtilde.k_slice(0);
    if !e0.is_zero() {
        return Err(KstabError::InvalidInput(
            "weight polynomial has a nonzero k-constant part".into(),
        ));
    }
    Ok((1..=n + 1).map(|i| wtilde.k_slice(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn extract_zero() {
        let e = extract_e_coefficients(&BiPoly::zero(), 3).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(UniPoly::is_zero));
    }

    #[test]
    fn extract_direct_reading() {
        // w̃ = r^2 k^2 + r k -> e_2 = r^2, e_1 = r
        let mut w = BiPoly::zero();
        w.insert(2, 2, r(1));
        w.insert(1, 1, r(1));
        let e = extract_e_coefficients(&w, 1).unwrap();
        assert_eq!(e[0], UniPoly::monomial(r(1), 1));
        assert_eq!(e[1], UniPoly::monomial(r(1), 2));
    }

    #[test]
    fn extract_then_reassemble_is_identity() {
        let mut w = BiPoly::zero();
        w.insert(0, 1, Rat::new(-3, 7).unwrap());
        w.insert(4, 2, r(5));
        w.insert(2, 3, Rat::new(1, 2).unwrap());
        let e = extract_e_coefficients(&w, 2).unwrap();
        let mut back = BiPoly::zero();
        let k = BiPoly::k_monomial();
        let mut kpow = k.clone();
        for ei in &e {
            back = &back + &(&BiPoly::from_r_poly(ei) * &kpow);
            kpow = &kpow * &k;
        }
        assert_eq!(back, w);
    }

    #[test]
    fn degree_overflow_signals_wrong_dimension() {
        let mut w = BiPoly::zero();
        w.insert(0, 4, r(1));
        assert!(matches!(
            extract_e_coefficients(&w, 2),
            Err(KstabError::DegreeOverflow(_))
        ));
    }
}
