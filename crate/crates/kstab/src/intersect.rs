//! A symbolic intersection algebra: formal numerical classes with declared
//! top intersection numbers, a multilinear expression evaluator, and
//! machine verification of intersection identities.
//!
//! Missing table entries are hard errors, never zeros: silent zeros are
//! the classic source of wrong intersection numbers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KstabError, Result};
use crate::exactmath::{Rat, UniPoly};
use crate::torictc::{resolution_numbers, ToricTestConfiguration};

/// Coefficient rings for the evaluator: exact rationals, polynomials in a
/// scalar, or multivariate polynomials in free parameters.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn is_zero(&self) -> bool;
}

impl Ring for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl Ring for UniPoly {
    fn zero() -> Self {
        UniPoly::zero()
    }
    fn one() -> Self {
        UniPoly::constant(Rat::one())
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        UniPoly::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        UniPoly::is_zero(self)
    }
}

/// A multivariate polynomial over named free parameters, for symbolic
/// tables. Degrees stay bounded by the ambient degree, so a sparse map is
/// plenty; no Groebner machinery.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<BTreeMap<String, u32>, Rat>,
}

impl MultiPoly {
    pub fn constant(c: Rat) -> MultiPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(BTreeMap::new(), c);
        }
        MultiPoly { terms }
    }

    pub fn parameter(name: &str) -> MultiPoly {
        let mut mono = BTreeMap::new();
        mono.insert(name.to_string(), 1);
        let mut terms = BTreeMap::new();
        terms.insert(mono, Rat::one());
        MultiPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BTreeMap<String, u32>, &Rat)> {
        self.terms.iter()
    }

    /// Substitutes numbers for every parameter.
    pub fn substitute(&self, values: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (mono, c) in &self.terms {
            let mut term = c.clone();
            for (name, &e) in mono {
                let v = values.get(name).ok_or_else(|| {
                    KstabError::MissingInput(format!("no value for parameter {name}"))
                })?;
                term *= &v.pow(e);
            }
            acc += term;
        }
        Ok(acc)
    }
}

impl Ring for MultiPoly {
    fn zero() -> Self {
        MultiPoly::default()
    }
    fn one() -> Self {
        MultiPoly::constant(Rat::one())
    }
    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in &rhs.terms {
            let v = out.terms.get(mono).map_or_else(|| c.clone(), |x| x + c);
            if v.is_zero() {
                out.terms.remove(mono);
            } else {
                out.terms.insert(mono.clone(), v);
            }
        }
        out
    }
    fn mul(&self, rhs: &Self) -> Self {
        let mut out = MultiPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let mut mono = m1.clone();
                for (name, &e) in m2 {
                    *mono.entry(name.clone()).or_insert(0) += e;
                }
                let add = c1 * c2;
                let v = out.terms.get(&mono).map_or_else(|| add.clone(), |x| x + &add);
                if v.is_zero() {
                    out.terms.remove(&mono);
                } else {
                    out.terms.insert(mono, v);
                }
            }
        }
        out
    }
    fn neg(&self) -> Self {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
    fn from_rat(r: &Rat) -> Self {
        MultiPoly::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (name, e) in mono {
                write!(f, "*{name}^{e}")?;
            }
            first = false;
        }
        Ok(())
    }
}

/// A table of declared top intersection numbers: monomials are multisets
/// of class names of the ambient degree. Lookups are multiset-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionTable<R: Ring = Rat> {
    ambient_degree: usize,
    entries: BTreeMap<Vec<String>, R>,
}

impl<R: Ring> IntersectionTable<R> {
    pub fn new(ambient_degree: usize) -> Self {
        IntersectionTable {
            ambient_degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn ambient_degree(&self) -> usize {
        self.ambient_degree
    }

    fn key(&self, monomial: &[&str]) -> Result<Vec<String>> {
        if monomial.len() != self.ambient_degree {
            return Err(KstabError::DegreeMismatch(format!(
                "monomial of degree {}, table degree {}",
                monomial.len(),
                self.ambient_degree
            )));
        }
        let mut key: Vec<String> = monomial.iter().map(|s| s.to_string()).collect();
        key.sort();
        Ok(key)
    }

    pub fn insert(&mut self, monomial: &[&str], value: R) -> Result<()> {
        let key = self.key(monomial)?;
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn lookup(&self, monomial: &[&str]) -> Result<&R> {
        let key = self.key(monomial)?;
        self.entries.get(&key).ok_or_else(|| {
            KstabError::MissingEntry(format!("no intersection number for {}", key.join(".")))
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<String>, &R)> {
        self.entries.iter()
    }

    /// Maps the values through a ring morphism (numbers into constant
    /// polynomials, say).
    pub fn map_values<S: Ring>(&self, f: impl Fn(&R) -> S) -> IntersectionTable<S> {
        IntersectionTable {
            ambient_degree: self.ambient_degree,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

/// Serialization of numeric tables:
/// {"ambient_degree": d, "entries": [{"monomial": [names], "value": "p/q"}]}.
#[derive(Serialize, Deserialize)]
struct TableRaw {
    ambient_degree: usize,
    entries: Vec<TableEntryRaw>,
}

#[derive(Serialize, Deserialize)]
struct TableEntryRaw {
    monomial: Vec<String>,
    value: Rat,
}

impl Serialize for IntersectionTable<Rat> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = TableRaw {
            ambient_degree: self.ambient_degree,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| TableEntryRaw { monomial: k.clone(), value: v.clone() })
                .collect(),
        };
        raw.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for IntersectionTable<Rat> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = TableRaw::deserialize(de)?;
        let mut table = IntersectionTable::new(raw.ambient_degree);
        for e in raw.entries {
            let mono: Vec<&str> = e.monomial.iter().map(String::as_str).collect();
            table
                .insert(&mono, e.value)
                .map_err(|err| D::Error::custom(err.to_string()))?;
        }
        Ok(table)
    }
}

/// A formal linear combination of class symbols with coefficients in R.
#[derive(Debug, Clone)]
pub struct LinComb<R: Ring>(pub Vec<(R, String)>);

impl<R: Ring> LinComb<R> {
    pub fn class(name: &str) -> Self {
        LinComb(vec![(R::one(), name.to_string())])
    }

    pub fn scaled(name: &str, c: R) -> Self {
        LinComb(vec![(c, name.to_string())])
    }

    pub fn plus(mut self, c: R, name: &str) -> Self {
        self.0.push((c, name.to_string()));
        self
    }
}

/// Full multilinear expansion of a product of linear combinations against
/// the table. The expression's total degree must equal the ambient degree
/// and every needed monomial must be present.
pub fn evaluate<R: Ring>(factors: &[LinComb<R>], table: &IntersectionTable<R>) -> Result<R> {
    if factors.len() != table.ambient_degree() {
        return Err(KstabError::DegreeMismatch(format!(
            "product of {} factors against a degree-{} table",
            factors.len(),
            table.ambient_degree()
        )));
    }
    let mut acc = R::zero();
    let mut choice = vec![0usize; factors.len()];
    loop {
        let mut coeff = R::one();
        let mut names: Vec<&str> = Vec::with_capacity(factors.len());
        for (f, &c) in factors.iter().zip(&choice) {
            let (r, name) = &f.0[c];
            coeff = coeff.mul(r);
            names.push(name);
        }
        if !coeff.is_zero() {
            let value = table.lookup(&names)?;
            acc = acc.add(&coeff.mul(value));
        }
        // odometer over the factor choices
        let mut i = 0;
        loop {
            if i == factors.len() {
                return Ok(acc);
            }
            choice[i] += 1;
            if choice[i] < factors[i].0.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Expands a product whose coefficients are polynomials in a scalar m
/// against a numeric table, returning the exact polynomial in m.
pub fn m_expansion(factors: &[LinComb<UniPoly>], table: &IntersectionTable<Rat>) -> Result<UniPoly> {
    let lifted = table.map_values(|v| UniPoly::constant(v.clone()));
    evaluate(factors, &lifted)
}

/// Outcome of the combinatorial identity check: either both sides agree
/// coefficientwise or the discrepancy is exhibited.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdakaReport {
    pub n: usize,
    pub equal: bool,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
}

/// Verifies, in symbolic mode over the free parameters L^i.E^{n+1-i}
/// (0 <= i <= n-1) with the relations L^{n+1} = 0 and L^n.E = 0, that
///
///   (rL-E)^n.(rL+(n-1)E)
///     = -E.E.( sum_{j=1}^{n-1} (n-j) (rL)^{j-1}.(rL-E)^{n-j} )
///
/// holds coefficientwise as polynomials in r. A failed check is a report,
/// not an error.
pub fn verify_odaka_identity(n: usize) -> Result<OdakaReport> {
    if !(1..=8).contains(&n) {
        return Err(KstabError::InvalidInput("identity check supports 1 <= n <= 8".into()));
    }
    let mut table: IntersectionTable<MultiPoly> = IntersectionTable::new(n + 1);
    for i in 0..=(n + 1) {
        let value = if i >= n {
            MultiPoly::zero()
        } else {
            MultiPoly::parameter(&format!("L{}E{}", i, n + 1 - i))
        };
        let mut mono: Vec<&str> = Vec::new();
        for _ in 0..i {
            mono.push("L");
        }
        for _ in i..(n + 1) {
            mono.push("E");
        }
        table.insert(&mono, value)?;
    }

    let r = MultiPoly::parameter("r");
    let r_l_minus_e = LinComb(vec![
        (r.clone(), "L".to_string()),
        (MultiPoly::constant(Rat::from_int(-1)), "E".to_string()),
    ]);
    let r_l = LinComb::scaled("L", r.clone());

    // LHS: (rL-E)^n . (rL + (n-1)E)
    let mut lhs_factors = vec![r_l_minus_e.clone(); n];
    lhs_factors.push(LinComb(vec![
        (r.clone(), "L".to_string()),
        (MultiPoly::constant(Rat::from_int(n as i64 - 1)), "E".to_string()),
    ]));
    let lhs = evaluate(&lhs_factors, &table)?;

    // RHS: -E.E.( sum_{j=1}^{n-1} (n-j) (rL)^{j-1} . (rL-E)^{n-j} )
    let mut rhs = MultiPoly::zero();
    for j in 1..n {
        let mut factors: Vec<LinComb<MultiPoly>> = vec![
            LinComb::class("E"),
            LinComb::scaled("E", MultiPoly::constant(Rat::from_int(-(n as i64 - j as i64)))),
        ];
        for _ in 0..(j - 1) {
            factors.push(r_l.clone());
        }
        for _ in 0..(n - j) {
            factors.push(r_l_minus_e.clone());
        }
        rhs = rhs.add(&evaluate(&factors, &table)?);
    }

    let diff = lhs.add(&rhs.neg());
    Ok(OdakaReport {
        n,
        equal: diff.is_zero(),
        lhs: format!("{lhs:?}"),
        rhs: format!("{rhs:?}"),
        discrepancy: if diff.is_zero() { None } else { Some(format!("{diff:?}")) },
    })
}

/// The signs checked by `check_inequalities`, with the exact values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub value_i: Rat,
    pub value_ii: Rat,
    pub value_iii: Rat,
    pub value_improved: Rat,
    pub holds_i: bool,
    pub holds_ii: bool,
    pub holds_iii: bool,
    pub holds_improved: bool,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.holds_i && self.holds_ii && self.holds_iii && self.holds_improved
    }
}

/// Builds the degree-(n+1) intersection table of a toric flag-ideal
/// configuration over the symbols "Lcal" (the semiample class rL - E) and
/// "Lq" (the unit pullback q*L), from mixed volumes of graph polytopes.
pub fn flag_configuration_table(tc: &ToricTestConfiguration) -> Result<IntersectionTable<Rat>> {
    let n = tc.dim();
    let numbers = resolution_numbers(tc)?; // N_j = Lcal^j.(r Lq)^{n+1-j}
    let r = Rat::from_int(tc.exponent);
    let mut table = IntersectionTable::new(n + 1);
    for (j, nj) in numbers.iter().enumerate() {
        let mut mono: Vec<&str> = Vec::new();
        for _ in 0..j {
            mono.push("Lcal");
        }
        for _ in j..(n + 1) {
            mono.push("Lq");
        }
        let scale = r.pow((n + 1 - j) as u32);
        table.insert(&mono, nj.checked_div(&scale)?)?;
    }
    Ok(table)
}

/// Evaluates the sign conditions on (rL-E)^n against the declared table:
/// (i) (rL-E)^n.R <= 0 for the nef R = q*L, (ii) (rL-E)^n.E > 0,
/// (iii) (rL-E)^n.(rL+nE) > 0, and the improvement
/// (rL-E)^n.(rL+(n-1)E) >= 0. The caller asserts nontriviality (pure
/// t-power ideals are excluded by the hypothesis).
pub fn check_inequalities(
    table: &IntersectionTable<Rat>,
    r: i64,
    n: usize,
    nontrivial: bool,
) -> Result<InequalityReport> {
    if !nontrivial {
        return Err(KstabError::InvalidInput(
            "inequality suite excludes pure-power (shifted trivial) ideals".into(),
        ));
    }
    let rr = Rat::from_int(r);
    let lcal = LinComb::<Rat>::class("Lcal");

    let dot = |last: LinComb<Rat>| -> Result<Rat> {
        let mut factors = vec![lcal.clone(); n];
        factors.push(last);
        evaluate(&factors, table)
    };

    // E = r Lq - Lcal
    let e = LinComb(vec![
        (rr.clone(), "Lq".to_string()),
        (Rat::from_int(-1), "Lcal".to_string()),
    ]);
    let value_i = dot(LinComb::class("Lq"))?;
    let value_ii = dot(e)?;
    // rL + cE = r(1+c) Lq - c Lcal
    let with_e_multiple = |c: i64| -> LinComb<Rat> {
        LinComb(vec![
            (&rr * &Rat::from_int(1 + c), "Lq".to_string()),
            (Rat::from_int(-c), "Lcal".to_string()),
        ])
    };
    let value_iii = dot(with_e_multiple(n as i64))?;
    let value_improved = dot(with_e_multiple(n as i64 - 1))?;

    Ok(InequalityReport {
        holds_i: !value_i.is_positive(),
        holds_ii: value_ii.is_positive(),
        holds_iii: value_iii.is_positive(),
        holds_improved: !value_improved.is_negative(),
        value_i,
        value_ii,
        value_iii,
        value_improved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> Rat {
        Rat::from_int(x)
    }

    #[test]
    fn evaluate_squares_with_declared_numbers() {
        // (L+E)^2 with L^2 = 1, L.E = 0, E^2 = -1 -> 0
        let mut t: IntersectionTable<Rat> = IntersectionTable::new(2);
        t.insert(&["L", "L"], r(1)).unwrap();
        t.insert(&["L", "E"], r(0)).unwrap();
        t.insert(&["E", "E"], r(-1)).unwrap();
        let le = LinComb::<Rat>::class("L").plus(Rat::one(), "E");
        assert_eq!(evaluate(&[le.clone(), le], &t).unwrap(), r(0));
    }

    #[test]
    fn expansion_on_a_curve_base() {
        // (rL-E)^2 with L^2 = L.E = 0, E^2 = e: the expansion collapses to e
        let mut t: IntersectionTable<Rat> = IntersectionTable::new(2);
        t.insert(&["L", "L"], r(0)).unwrap();
        t.insert(&["L", "E"], r(0)).unwrap();
        t.insert(&["E", "E"], r(7)).unwrap();
        let f = LinComb(vec![(r(5), "L".to_string()), (r(-1), "E".to_string())]);
        assert_eq!(evaluate(&[f.clone(), f], &t).unwrap(), r(7));
    }

    #[test]
    fn missing_entries_are_hard_errors() {
        let t: IntersectionTable<Rat> = IntersectionTable::new(2);
        let l = LinComb::<Rat>::class("L");
        assert!(matches!(
            evaluate(&[l.clone(), l], &t),
            Err(KstabError::MissingEntry(_))
        ));
    }

    #[test]
    fn degree_mismatch_rejected() {
        let t: IntersectionTable<Rat> = IntersectionTable::new(2);
        let l = LinComb::<Rat>::class("L");
        assert!(matches!(evaluate(&[l], &t), Err(KstabError::DegreeMismatch(_))));
    }

    #[test]
    fn evaluator_is_symmetric_and_multilinear() {
        let mut t: IntersectionTable<Rat> = IntersectionTable::new(2);
        t.insert(&["A", "A"], r(2)).unwrap();
        t.insert(&["A", "B"], r(3)).unwrap();
        t.insert(&["B", "B"], r(5)).unwrap();
        let a = LinComb::<Rat>::class("A");
        let b = LinComb::<Rat>::class("B");
        let ab = evaluate(&[a.clone(), b.clone()], &t).unwrap();
        let ba = evaluate(&[b.clone(), a.clone()], &t).unwrap();
        assert_eq!(ab, ba);
        // (2A + 3B).B = 2 A.B + 3 B.B
        let comb = LinComb(vec![(r(2), "A".to_string()), (r(3), "B".to_string())]);
        let lhs = evaluate(&[comb, b], &t).unwrap();
        assert_eq!(lhs, r(2) * r(3) + r(3) * r(5));
    }

    #[test]
    fn symbolic_and_numeric_modes_agree_after_substitution() {
        let mut sym: IntersectionTable<MultiPoly> = IntersectionTable::new(2);
        sym.insert(&["L", "L"], MultiPoly::parameter("p")).unwrap();
        sym.insert(&["L", "E"], MultiPoly::constant(Rat::zero())).unwrap();
        sym.insert(&["E", "E"], MultiPoly::parameter("q")).unwrap();
        let f = LinComb(vec![
            (MultiPoly::constant(r(2)), "L".to_string()),
            (MultiPoly::constant(r(-1)), "E".to_string()),
        ]);
        let symbolic = evaluate(&[f.clone(), f], &sym).unwrap();
        let mut values = BTreeMap::new();
        values.insert("p".to_string(), r(3));
        values.insert("q".to_string(), r(-2));
        // numeric: (2L - E)^2 = 4p + q = 12 - 2 = 10
        assert_eq!(symbolic.substitute(&values).unwrap(), r(10));
    }

    #[test]
    fn odaka_identity_small_n() {
        for n in 1..=3 {
            let report = verify_odaka_identity(n).unwrap();
            assert!(report.equal, "n = {n}: {:?}", report.discrepancy);
        }
    }

    #[test]
    fn m_expansion_example() {
        // (A + mB)^2 with A^2 = 0, A.B = 1, B^2 = 0 -> 2m
        let mut t: IntersectionTable<Rat> = IntersectionTable::new(2);
        t.insert(&["A", "A"], r(0)).unwrap();
        t.insert(&["A", "B"], r(1)).unwrap();
        t.insert(&["B", "B"], r(0)).unwrap();
        let f = LinComb(vec![
            (UniPoly::constant(Rat::one()), "A".to_string()),
            (UniPoly::monomial(Rat::one(), 1), "B".to_string()),
        ]);
        let p = m_expansion(&[f.clone(), f], &t).unwrap();
        assert_eq!(p, UniPoly::monomial(r(2), 1));
    }

    #[test]
    fn constant_family_is_degree_zero() {
        let mut t: IntersectionTable<Rat> = IntersectionTable::new(1);
        t.insert(&["A"], r(4)).unwrap();
        let f = LinComb(vec![(UniPoly::constant(r(3)), "A".to_string())]);
        let p = m_expansion(&[f], &t).unwrap();
        assert_eq!(p, UniPoly::constant(r(12)));
    }

    #[test]
    fn flag_table_and_inequalities_on_the_worked_example() {
        let tc = crate::torictc::fixtures::dnc_p1();
        let table = flag_configuration_table(&tc).unwrap();
        // Lcal.Lq = 0, Lcal.Lcal = -1, Lq.Lq = 0 at r = 1
        assert_eq!(*table.lookup(&["Lcal", "Lq"]).unwrap(), r(0));
        assert_eq!(*table.lookup(&["Lcal", "Lcal"]).unwrap(), r(-1));
        assert_eq!(*table.lookup(&["Lq", "Lq"]).unwrap(), r(0));
        let report = check_inequalities(&table, 1, 1, true).unwrap();
        assert!(report.all_hold(), "{report:?}");
        // n = 1: the improved pairing is exactly zero (empty sum).
        assert!(report.value_improved.is_zero());
        assert_eq!(report.value_ii, r(1));
    }
}
