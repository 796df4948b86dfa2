//! The fibration pipeline: delta, the slope m-expansion, the DF
//! m-expansion with its vanishing leading term, the CM-degree on a curve
//! base, and instability propagation from base to total space.
//!
//! Split products are assembled from a base configuration table and fibre
//! numbers; general fibrations take a fully user-declared table.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{KstabError, Result};
use crate::exactmath::{Rat, UniPoly};
use crate::intersect::{evaluate, IntersectionTable, LinComb, Ring};
use crate::invariants::df_from_coefficients;
use crate::torictc::HilbertWeightData;

/// Data of a fibration with fibre volume V and fibre slope mu, plus the
/// split intersection numbers needed for the m-expansion.
///
/// `base_table` holds the base configuration's total-space numbers over
/// the symbols "LB" (the configuration class) and "KB" (the relative
/// canonical), in the trivial-end normalization; `lb_b` and `kb_dot_lb`
/// are the base variety's own numbers L_B^b and K_B.L_B^{b-1};
/// `kf_dot_lf` is the fibre number K_F.L_F^{n-b-1}.
#[derive(Debug, Clone)]
pub struct FibrationData {
    pub n: usize,
    pub b: usize,
    pub v: Rat,
    pub mu_fibre: Rat,
    pub kf_dot_lf: Rat,
    pub base_table: IntersectionTable<Rat>,
    pub lb_b: Rat,
    pub kb_dot_lb: Rat,
}

impl FibrationData {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 || self.b >= self.n {
            return Err(KstabError::InvalidInput(format!(
                "need 0 < b < n, got b = {}, n = {}",
                self.b, self.n
            )));
        }
        if !self.v.is_positive() {
            return Err(KstabError::InvalidInput("fibre volume must be positive".into()));
        }
        if self.base_table.ambient_degree() != self.b + 1 {
            return Err(KstabError::DegreeMismatch(format!(
                "base table has degree {}, expected b+1 = {}",
                self.base_table.ambient_degree(),
                self.b + 1
            )));
        }
        Ok(())
    }
}

/// delta = 1 / ((n - b + 1) V).
pub fn delta(n: usize, b: usize, v: &Rat) -> Result<Rat> {
    if b >= n {
        return Err(KstabError::InvalidInput("delta needs n > b".into()));
    }
    if !v.is_positive() {
        return Err(KstabError::InvalidInput("delta needs V > 0".into()));
    }
    Rat::one().checked_div(&(Rat::from_int((n - b + 1) as i64) * v))
}

/// The two displayed coefficients of mu(X, L_X) = lambda0 + lambda1/m + ...:
/// lambda0 = (n-b)/n mu, lambda1 = b/n mu_T(B, L_B).
pub fn slope_expansion(
    n: usize,
    b: usize,
    mu_fibre: &Rat,
    mu_base_twisted: &Rat,
) -> Result<(Rat, Rat)> {
    if b == 0 || b >= n {
        return Err(KstabError::MissingInput("slope expansion needs 0 < b < n".into()));
    }
    let lambda0 = Rat::new((n - b) as i64, n as i64)? * mu_fibre;
    let lambda1 = Rat::new(b as i64, n as i64)? * mu_base_twisted;
    Ok((lambda0, lambda1))
}

/// Degree of the CM class pushed to a curve base (b = 1):
/// (n-b) mu A + (n-b+1) B for the supplied totals A = c1(L_U)^{n-b+1} and
/// B = K_{X/B}.c1(L_U)^{n-b}.
pub fn cm_degree(a_total: &Rat, b_total: &Rat, mu_fibre: &Rat, n: usize, b: usize) -> Result<Rat> {
    if b != 1 {
        return Err(KstabError::MissingInput(
            "the CM degree is a number only over a curve base (b = 1)".into(),
        ));
    }
    if n < 2 {
        return Err(KstabError::InvalidInput("cm_degree needs n > b = 1".into()));
    }
    Ok(Rat::from_int((n - 1) as i64) * mu_fibre * a_total + Rat::from_int(n as i64) * b_total)
}

/// All multisets of the given degree over a symbol list.
fn multisets<'a>(symbols: &[&'a str], degree: usize) -> Vec<Vec<&'a str>> {
    fn rec<'a>(symbols: &[&'a str], degree: usize, start: usize, cur: &mut Vec<&'a str>, out: &mut Vec<Vec<&'a str>>) {
        if cur.len() == degree {
            out.push(cur.clone());
            return;
        }
        for i in start..symbols.len() {
            cur.push(symbols[i]);
            rec(symbols, degree, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(symbols, degree, 0, &mut Vec::new(), &mut out);
    out
}

/// The Kunneth-split total-space table over {"LU", "LB", "KB", "KF"}:
/// every entry factors into a base-part number times a fibre-part number,
/// vanishing unless the degrees split as (b+1) + (n-b). Entries with
/// canonical-class degree two or higher stay missing; nothing in the DF
/// expression requests them.
pub fn kunneth_total_table(fd: &FibrationData) -> Result<IntersectionTable<Rat>> {
    fd.validate()?;
    let n = fd.n;
    let b = fd.b;
    let mut table = IntersectionTable::new(n + 1);
    for mono in multisets(&["LU", "LB", "KB", "KF"], n + 1) {
        let lb = mono.iter().filter(|&&s| s == "LB").count();
        let kb = mono.iter().filter(|&&s| s == "KB").count();
        let lu = mono.iter().filter(|&&s| s == "LU").count();
        let kf = mono.iter().filter(|&&s| s == "KF").count();
        if kb >= 2 || kf >= 2 {
            continue; // no quadratic canonical data declared
        }
        let value = if lb + kb != b + 1 || lu + kf != n - b {
            Rat::zero()
        } else {
            let base_val = if kb == 0 {
                let f: Vec<&str> = vec!["LB"; b + 1];
                fd.base_table.lookup(&f)?.clone()
            } else {
                let mut f: Vec<&str> = vec!["LB"; b];
                f.push("KB");
                fd.base_table.lookup(&f)?.clone()
            };
            let fibre_val = if kf == 0 { fd.v.clone() } else { fd.kf_dot_lf.clone() };
            base_val * fibre_val
        };
        table.insert(&mono, value)?;
    }
    Ok(table)
}

/// The generic-fibre (X-level) split table over {"LU","LBx","KBx","KF"}
/// of degree n, from the base variety numbers and the fibre numbers.
fn kunneth_fibre_table(fd: &FibrationData) -> Result<IntersectionTable<Rat>> {
    let n = fd.n;
    let b = fd.b;
    let mut table = IntersectionTable::new(n);
    for mono in multisets(&["LU", "LBx", "KBx", "KF"], n) {
        let lb = mono.iter().filter(|&&s| s == "LBx").count();
        let kb = mono.iter().filter(|&&s| s == "KBx").count();
        let lu = mono.iter().filter(|&&s| s == "LU").count();
        let kf = mono.iter().filter(|&&s| s == "KF").count();
        if kb >= 2 || kf >= 2 {
            continue;
        }
        let value = if lb + kb != b || lu + kf != n - b {
            Rat::zero()
        } else {
            let base_val = if kb == 0 { fd.lb_b.clone() } else { fd.kb_dot_lb.clone() };
            let fibre_val = if kf == 0 { fd.v.clone() } else { fd.kf_dot_lf.clone() };
            base_val * fibre_val
        };
        table.insert(&mono, value)?;
    }
    Ok(table)
}

/// The exact DF m-expansion of a fibration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfExpansion {
    /// Coefficient of m^{b+1}; identically zero for consistent tables.
    pub coeff_b_plus_1: Rat,
    /// Coefficient of m^b; equals V C(n,b) base_df exactly.
    pub coeff_b: Rat,
    /// The base map's own invariant, for the comparison.
    pub base_df: Rat,
    /// The polynomial part of DF(m), in base-normalized units.
    pub poly: UniPoly,
}

/// Expands DF(X, p*L_U + m f*L_B-cal) exactly in m.
///
/// mu(X, L_m) is a ratio of polynomials, so the expansion performs exact
/// polynomial division: DF·den = Q·den + R with R required to vanish (a
/// nonzero remainder is a table-consistency failure). The polynomial part
/// is reported in base-normalized units (divided by 2·b!), in which the
/// m^b coefficient equals V C(n,b) base_df on the nose.
pub fn df_m_expansion(fd: &FibrationData, base_tc: &HilbertWeightData) -> Result<DfExpansion> {
    fd.validate()?;
    let n = fd.n;
    let b = fd.b;
    let total = kunneth_total_table(fd)?.map_values(|v| UniPoly::constant(v.clone()));
    let xlevel = kunneth_fibre_table(fd)?.map_values(|v| UniPoly::constant(v.clone()));

    let m = UniPoly::monomial(Rat::one(), 1);
    let one = UniPoly::constant(Rat::one());
    let lm_total = LinComb(vec![
        (one.clone(), "LU".to_string()),
        (m.clone(), "LB".to_string()),
    ]);
    let k_total = LinComb::<UniPoly>::class("KB").plus(one.clone(), "KF");
    let lm_x = LinComb(vec![
        (one.clone(), "LU".to_string()),
        (m.clone(), "LBx".to_string()),
    ]);
    let k_x = LinComb::<UniPoly>::class("KBx").plus(one.clone(), "KF");

    // numerator of mu: -K_X.L_m^{n-1}; denominator: L_m^n
    let mut factors = vec![lm_x.clone(); n - 1];
    factors.push(k_x);
    let num = evaluate(&factors, &xlevel)?.neg();
    let den = evaluate(&vec![lm_x; n], &xlevel)?;
    if den.is_zero() {
        return Err(KstabError::DivisionByZero("L_m^n vanishes identically".into()));
    }

    let t1 = evaluate(&vec![lm_total.clone(); n + 1], &total)?;
    let mut factors = vec![lm_total; n];
    factors.push(k_total);
    let t2 = evaluate(&factors, &total)?;

    let frac = Rat::new(n as i64, n as i64 + 1)?;
    let g = &(&num * &t1).scale(&frac) + &(&den * &t2);
    let (q, rem) = g.div_rem(&den)?;
    if !rem.is_zero() {
        return Err(KstabError::InconsistentSamples(
            "table-consistency failure: DF(m) is not a polynomial".into(),
        ));
    }
    let unit = Rat::from_int(2) * Rat::factorial(b);
    let poly = q.scale(&unit.recip()?);

    let coeff_b_plus_1 = poly.coeff(b + 1);
    if let Some(d) = poly.degree() {
        if d > b + 1 {
            return Err(KstabError::LeadingTermNonzero(format!(
                "DF(m) has degree {d} > b+1 = {}",
                b + 1
            )));
        }
    }
    if !coeff_b_plus_1.is_zero() {
        return Err(KstabError::LeadingTermNonzero(format!(
            "the m^{} coefficient is {coeff_b_plus_1}, expected 0",
            b + 1
        )));
    }
    let coeff_b = poly.coeff(b);
    let base_df = df_from_coefficients(base_tc);
    let expected = &fd.v * &Rat::binomial(n, b) * &base_df;
    if coeff_b != expected {
        return Err(KstabError::InconsistentSamples(format!(
            "table-consistency failure: m^{b} coefficient is {coeff_b}, V C(n,b) base_df = {expected}"
        )));
    }
    Ok(DfExpansion { coeff_b_plus_1, coeff_b, base_df, poly })
}

/// The least integer m0 beyond which the DF polynomial stays negative,
/// by exact integer scanning under a Cauchy-style root bound.
pub fn propagate_instability(poly: &UniPoly, b: usize) -> Result<i64> {
    if poly.coeff(b).is_negative() {
        // fall through to the scan
    } else {
        return Err(KstabError::Inconclusive(format!(
            "m^{b} coefficient {} is not negative",
            poly.coeff(b)
        )));
    }
    let deg = poly.degree().expect("nonzero polynomial");
    let lead = poly.coeff(deg);
    if !lead.is_negative() {
        return Err(KstabError::Inconclusive(
            "leading coefficient is not negative; the polynomial is not eventually negative".into(),
        ));
    }
    // all real roots lie strictly below 1 + max |c_i / c_top|
    let mut max_ratio = Rat::zero();
    for i in 0..deg {
        let ratio = poly.coeff(i).abs().checked_div(&lead.abs())?;
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    let bound: BigInt = (Rat::one() + max_ratio).ceil() + BigInt::from(1);
    let mut m0 = bound
        .to_i64()
        .ok_or_else(|| KstabError::InvalidInput("root bound too large".into()))?;
    while m0 > i64::MIN + 1 && poly.eval(&Rat::from_int(m0 - 1)).is_negative() {
        m0 -= 1;
    }
    Ok(m0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torictc::{hilbert_weight_data, fixtures::dnc_p1};

    fn r(x: i64) -> Rat {
        Rat::from_int(x)
    }

    fn rq(a: i64, b: i64) -> Rat {
        Rat::new(a, b).unwrap()
    }

    /// The split product over the worked base configuration: fibre a curve
    /// of degree 2 with K_F = L_F (so V = 2, mu = -1), total dim 2.
    fn split_example() -> (FibrationData, HilbertWeightData) {
        let base = dnc_p1();
        let d = hilbert_weight_data(&base).unwrap();
        let (_, lnp1) = crate::torictc::norm_data(&base).unwrap();
        let mut base_table = IntersectionTable::new(2);
        base_table.insert(&["LB", "LB"], lnp1).unwrap(); // -1
        // LB.KB in the same normalization: -2 b! (b1_raw - R a1) = +1
        base_table.insert(&["LB", "KB"], r(1)).unwrap();
        let fd = FibrationData {
            n: 2,
            b: 1,
            v: r(2),
            mu_fibre: r(-1),
            kf_dot_lf: r(2),
            base_table,
            lb_b: r(2),
            kb_dot_lb: r(-2),
        };
        (fd, d)
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta(2, 1, &r(2)).unwrap(), rq(1, 4));
        assert_eq!(delta(3, 1, &r(1)).unwrap(), rq(1, 3));
        assert_eq!(delta(5, 4, &r(1)).unwrap(), rq(1, 2));
    }

    #[test]
    fn slope_expansion_values() {
        // product with mu = 0 fibres
        let (l0, _) = slope_expansion(3, 1, &r(0), &r(5)).unwrap();
        assert!(l0.is_zero());
        // n=2, b=1, mu=1, mu_T(B) = -2 -> (1/2, -1)
        let (l0, l1) = slope_expansion(2, 1, &r(1), &r(-2)).unwrap();
        assert_eq!(l0, rq(1, 2));
        assert_eq!(l1, r(-1));
    }

    #[test]
    fn slope_expansion_cross_checked_against_the_split_table() {
        // On the split product the generic-fibre slope is the exact
        // rational function mu(m) = (1-m)/(2m) = -1/2 + (1/2) m^{-1}, and
        // the displayed coefficients reproduce its expansion: lambda0 =
        // (n-b)/n mu_fibre, lambda1 = b/n mu(B, L_B) (no twist on a split
        // product).
        let (fd, _) = split_example();
        let mu_base = crate::invariants::twisted_slope(&crate::invariants::TwistInput {
            k_dot_l: fd.kb_dot_lb.clone(),
            t_dot_l: r(0),
            l_n: fd.lb_b.clone(),
            n: fd.b,
        })
        .unwrap();
        let (l0, l1) = slope_expansion(fd.n, fd.b, &fd.mu_fibre, &mu_base).unwrap();
        assert_eq!(l0, rq(-1, 2));
        assert_eq!(l1, rq(1, 2));
        // direct check at a few m: mu(m) = (K-route) matches l0 + l1/m
        for m in [5i64, 9, 30] {
            let mu_m = rq(1 - m, 2 * m);
            assert_eq!(mu_m, &l0 + &l1.checked_div(&r(m)).unwrap());
        }
    }

    #[test]
    fn cm_degree_examples() {
        // declared-table example: A=2, B=-1, n=2, mu=1 -> 0
        assert_eq!(cm_degree(&r(2), &r(-1), &r(1), 2, 1).unwrap(), r(0));
        // mu = 0 reduces to the relative-canonical term n B
        assert_eq!(cm_degree(&r(9), &r(-1), &r(0), 3, 1).unwrap(), r(-3));
        // isotrivial product: both totals vanish
        assert_eq!(cm_degree(&r(0), &r(0), &r(1), 2, 1).unwrap(), r(0));
        assert!(matches!(
            cm_degree(&r(1), &r(1), &r(1), 3, 2),
            Err(KstabError::MissingInput(_))
        ));
    }

    #[test]
    fn df_expansion_on_the_split_product() {
        let (fd, base) = split_example();
        let out = df_m_expansion(&fd, &base).unwrap();
        assert!(out.coeff_b_plus_1.is_zero());
        assert_eq!(out.base_df, rq(1, 4));
        // V C(n,b) base_df = 2 * 2 * 1/4 = 1
        assert_eq!(out.coeff_b, r(1));
        assert_eq!(out.poly, UniPoly::monomial(r(1), 1));
    }

    #[test]
    fn trivial_base_configuration_gives_zero_expansion() {
        use crate::polytope::{LatticePolytope, PLConvexFunction};
        use crate::torictc::{ToricPolarisedPair, ToricTestConfiguration};
        let pair = ToricPolarisedPair::new(LatticePolytope::segment(0, 2), None).unwrap();
        let base = ToricTestConfiguration::new(
            pair,
            PLConvexFunction::constant(1, Rat::zero()),
            Rat::one(),
            1,
        )
        .unwrap();
        let d = hilbert_weight_data(&base).unwrap();
        let (_, lnp1) = crate::torictc::norm_data(&base).unwrap();
        let mut base_table = IntersectionTable::new(2);
        base_table.insert(&["LB", "LB"], lnp1).unwrap(); // 0 for the product
        // LB.KB = -2 b! (b1_raw - R a1) = -2(1 - 1) = 0
        base_table.insert(&["LB", "KB"], r(0)).unwrap();
        let fd = FibrationData {
            n: 2,
            b: 1,
            v: r(2),
            mu_fibre: r(-1),
            kf_dot_lf: r(2),
            base_table,
            lb_b: r(2),
            kb_dot_lb: r(-2),
        };
        let out = df_m_expansion(&fd, &d).unwrap();
        assert!(out.coeff_b.is_zero());
        assert!(out.poly.is_zero());
    }

    #[test]
    fn instability_propagation_thresholds() {
        // DF(m) = -m + 10 -> m0 = 11
        let p = UniPoly::from_coeffs(vec![r(10), r(-1)]);
        assert_eq!(propagate_instability(&p, 1).unwrap(), 11);
        // positive coefficient is inconclusive
        let q = UniPoly::from_coeffs(vec![r(10), r(1)]);
        assert!(matches!(
            propagate_instability(&q, 1),
            Err(KstabError::Inconclusive(_))
        ));
        // already negative everywhere relevant
        let neg = UniPoly::from_coeffs(vec![r(-1), r(-1)]);
        assert_eq!(propagate_instability(&neg, 1).unwrap(), 0);
    }

    #[test]
    fn sign_flipped_base_destabilizes_for_large_m() {
        // Declared table with the base weight data negated: base_df = -1/4,
        // and the consistent total-space numbers follow the same relations
        // Lnp1 = (b+1)!(b0 - R a0), LB.KB = -2 b! (b1 - R a1) with R = 1.
        let base = HilbertWeightData {
            a0: r(2),
            a1: r(1),
            b0: rq(-3, 2),
            b1: rq(-1, 2),
            a_q: r(0),
            b_q: r(0),
            n: 1,
            r_exponent: 1,
        };
        let mut base_table = IntersectionTable::new(2);
        base_table.insert(&["LB", "LB"], r(-7)).unwrap();
        base_table.insert(&["LB", "KB"], r(3)).unwrap();
        let fd = FibrationData {
            n: 2,
            b: 1,
            v: r(2),
            mu_fibre: r(-1),
            kf_dot_lf: r(2),
            base_table,
            lb_b: r(2),
            kb_dot_lb: r(-2),
        };
        let out = df_m_expansion(&fd, &base).unwrap();
        assert_eq!(out.base_df, rq(-1, 4));
        assert_eq!(out.coeff_b, r(-1));
        assert_eq!(out.poly, UniPoly::monomial(r(-1), 1));
        assert_eq!(propagate_instability(&out.poly, 1).unwrap(), 1);
    }
}
