//! The stability invariants: twisted slope, Donaldson-Futaki invariant by
//! two routes, minimum norm by three routes, J-functional, Chow weights,
//! log variants, and verdicts.
//!
//! All reported DF-type values use one fixed normalization, the leading
//! Hilbert/weight coefficient combination; intersection inputs are
//! expected in the matching units (raw top intersection numbers on the
//! total space divided by 2·n!).

use serde::{Deserialize, Serialize};

use crate::error::{KstabError, Result};
use crate::exactmath::{Rat, UniPoly};
use crate::torictc::{
    b_tilde_zero, bivariate_weight_oracle, hilbert_weight_data, norm_data, HilbertWeightData,
    ToricTestConfiguration,
};

/// Slope inputs: intersection numbers on the polarised pair itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistInput {
    pub k_dot_l: Rat,
    pub t_dot_l: Rat,
    pub l_n: Rat,
    pub n: usize,
}

/// The twisted slope -(K_X + T').L^{n-1} / L^n.
pub fn twisted_slope(t: &TwistInput) -> Result<Rat> {
    if !t.l_n.is_positive() {
        return Err(KstabError::InvalidInput(format!(
            "L^n must be positive, got {}",
            t.l_n
        )));
    }
    (-(&t.k_dot_l + &t.t_dot_l)).checked_div(&t.l_n)
}

/// The leading Hilbert/weight coefficient combination
/// (b0 (a1 + a_q) - (b1 + b_q) a0) / a0.
pub fn df_from_coefficients(d: &HilbertWeightData) -> Rat {
    let num = &d.b0 * &(&d.a1 + &d.a_q) - &(&d.b1 + &d.b_q) * &d.a0;
    num.checked_div(&d.a0).expect("a0 > 0 by construction")
}

/// The intersection route n/(n+1) mu_p Lnp1 + LK + LT, on declared
/// normalized numbers.
pub fn df_from_intersections(mu_p: &Rat, lnp1: &Rat, lk: &Rat, lt: &Rat, n: usize) -> Rat {
    let frac = Rat::new(n as i64, n as i64 + 1).expect("n+1 > 0");
    frac * mu_p * lnp1 + lk + lt
}

/// Inputs for one minimum-norm route.
#[derive(Debug, Clone)]
pub enum NormRoute {
    /// L-cal^n.(r q*L) and L-cal^{n+1} in the trivial-end normalization.
    Intersection { l_dot_ql: Rat, lnp1: Rat },
    /// The same two numbers recombined through (rL-E)^n.(rL + n E),
    /// normalized by the dimensional constant n+1.
    Odaka { l_dot_ql: Rat, lnp1: Rat },
    /// The restricted-weight route (n!/r)(b~0 - n b0).
    B0 { b_tilde0: Rat, b0: Rat },
}

/// The minimum norm of a configuration of exponent r by the chosen route.
/// The three routes agree exactly wherever more than one is computable.
pub fn minimum_norm(route: &NormRoute, n: usize, r: i64) -> Result<Rat> {
    if r < 1 {
        return Err(KstabError::InvalidInput("exponent must be >= 1".into()));
    }
    let rr = Rat::from_int(r);
    match route {
        NormRoute::Intersection { l_dot_ql, lnp1 } => {
            let frac = Rat::new(n as i64, n as i64 + 1)?;
            (l_dot_ql - &(frac * lnp1)).checked_div(&rr)
        }
        NormRoute::Odaka { l_dot_ql, lnp1 } => {
            // (rL-E)^n.(rL + n r^{-1}·r E) expanded in (Lcal, qL):
            // (n+1) Lcal^n.(r qL) - n Lcal^{n+1}, divided by (n+1) r.
            let np1 = Rat::from_int(n as i64 + 1);
            let num = &np1 * l_dot_ql - &(Rat::from_int(n as i64) * lnp1);
            num.checked_div(&(&np1 * &rr))
        }
        NormRoute::B0 { b_tilde0, b0 } => {
            let num = Rat::factorial(n) * (b_tilde0 - &(Rat::from_int(n as i64) * b0));
            num.checked_div(&rr)
        }
    }
}

/// Norm of a toric configuration by all three routes; exact agreement is a
/// cross-check of the whole pipeline.
pub fn toric_norm_routes(tc: &ToricTestConfiguration) -> Result<(Rat, Rat, Rat)> {
    let n = tc.dim();
    let r = tc.exponent;
    let (l_dot_ql, lnp1) = norm_data(tc)?;
    let by_intersection = minimum_norm(
        &NormRoute::Intersection { l_dot_ql: l_dot_ql.clone(), lnp1: lnp1.clone() },
        n,
        r,
    )?;
    let by_odaka = minimum_norm(&NormRoute::Odaka { l_dot_ql, lnp1 }, n, r)?;
    let d = hilbert_weight_data(tc)?;
    let by_b0 = minimum_norm(
        &NormRoute::B0 { b_tilde0: b_tilde_zero(tc)?, b0: d.b0 },
        n,
        r,
    )?;
    Ok((by_intersection, by_odaka, by_b0))
}

/// J_T = -n/(n+1) gamma_T Lnp1 + LT; exactly linear in the twist inputs.
pub fn j_functional(gamma: &Rat, lnp1: &Rat, lt: &Rat, n: usize) -> Rat {
    let frac = Rat::new(n as i64, n as i64 + 1).expect("n+1 > 0");
    lt - &(frac * gamma * lnp1)
}

/// The slope ratio gamma_T = L^{n-1}.T / L^n.
pub fn gamma_ratio(t_dot_l: &Rat, l_n: &Rat) -> Result<Rat> {
    t_dot_l.checked_div(l_n)
}

/// The weight polynomial in k at a fixed dilation r, with its
/// normalization by h-hat(r): the finite-dimensional weight of the
/// configuration at level (r, ·).
pub fn chow_weight(tc: &ToricTestConfiguration, r_eval: i64) -> Result<(UniPoly, UniPoly)> {
    let n = tc.dim();
    // A point twist makes the oracle compute the untwisted structure.
    let tc_for_oracle = if tc.pair.twist_polytope.is_some() {
        tc.clone()
    } else {
        let mut with_point = tc.clone();
        with_point.pair.twist_polytope = Some(crate::polytope::LatticePolytope::point(vec![
            0;
            tc.dim()
        ]));
        with_point
    };
    let grid = (n as i64 + 2).max(4);
    let wtilde = bivariate_weight_oracle(&tc_for_oracle, grid, grid)?;
    let at_r = wtilde.eval_r(&Rat::from_int(r_eval));
    let hhat = Rat::from_int(tc.pair.polytope.lattice_count(r_eval)? as i64);
    if hhat.is_zero() {
        return Err(KstabError::DivisionByZero("h-hat(r) = 0 at the evaluation point".into()));
    }
    let normalized = at_r.scale(&hhat.recip()?);
    Ok((at_r, normalized))
}

/// Log variant: the divisor contributes exactly like a twist, augmenting
/// (a_q, b_q) by its own slope and total-space numbers.
pub fn log_df(d: &HilbertWeightData, d_dot_l: &Rat, l_dot_d: &Rat) -> Rat {
    let mut augmented = d.clone();
    augmented.a_q = &augmented.a_q + d_dot_l;
    augmented.b_q = &augmented.b_q + l_dot_d;
    df_from_coefficients(&augmented)
}

/// How a supplied configuration set violates stability, if it does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ViolationKind {
    /// df < 0: not even K-semistable.
    Semistability,
    /// df = 0 with positive norm: K-stability fails on a nontrivial
    /// configuration.
    Stability,
    /// df < epsilon * norm for the supplied epsilon.
    Uniform { epsilon: Rat },
}

/// Aggregated verdict over a finite set of supplied configurations.
/// Finite sweeps are evidence, never certificates: only the
/// theorem-backed thresholds construct `UniformCertificate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    DestabilizedBy { index: usize, violation: ViolationKind },
    NonNegativeOnSuppliedSet,
    UniformCertificate { epsilon: Rat, k_min: i64 },
}

/// Scans (df, norm) pairs for stability violations.
pub fn verdict(reports: &[(Rat, Rat)], epsilon: Option<&Rat>) -> Result<Verdict> {
    for (i, (df, norm)) in reports.iter().enumerate() {
        if norm.is_negative() {
            return Err(KstabError::InvalidInput(format!(
                "norm of configuration {i} is negative: {norm}"
            )));
        }
        if df.is_negative() {
            return Ok(Verdict::DestabilizedBy { index: i, violation: ViolationKind::Semistability });
        }
        if df.is_zero() && norm.is_positive() {
            return Ok(Verdict::DestabilizedBy { index: i, violation: ViolationKind::Stability });
        }
        if let Some(eps) = epsilon {
            if df < &(eps * norm) {
                return Ok(Verdict::DestabilizedBy {
                    index: i,
                    violation: ViolationKind::Uniform { epsilon: eps.clone() },
                });
            }
        }
    }
    Ok(Verdict::NonNegativeOnSuppliedSet)
}

/// df along the ray of twists t * (a_q', b_q'); exactly affine in t.
pub fn twist_sweep(
    base: &HilbertWeightData,
    direction: (&Rat, &Rat),
    t_range: &[Rat],
) -> Vec<(Rat, Rat)> {
    t_range
        .iter()
        .map(|t| {
            let mut d = base.clone();
            d.a_q = &d.a_q + &(t * direction.0);
            d.b_q = &d.b_q + &(t * direction.1);
            (t.clone(), df_from_coefficients(&d))
        })
        .collect()
}

/// A full per-configuration report with route provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub df: Rat,
    pub minimum_norm: Rat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_value: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chow_poly: Option<UniPoly>,
    pub verdict: Verdict,
    pub routes: std::collections::BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torictc::fixtures::{dnc_p1, dnc_p1_twisted};

    fn r(x: i64) -> Rat {
        Rat::from_int(x)
    }

    fn rq(a: i64, b: i64) -> Rat {
        Rat::new(a, b).unwrap()
    }

    #[test]
    fn twisted_slope_examples() {
        // projective plane: K.L = -3, L^2 = 1 -> mu = 3
        let mu = twisted_slope(&TwistInput {
            k_dot_l: r(-3),
            t_dot_l: r(0),
            l_n: r(1),
            n: 2,
        })
        .unwrap();
        assert_eq!(mu, r(3));
        // Calabi-Yau-type data: K.L + T.L = 0 -> mu = 0
        let mu = twisted_slope(&TwistInput { k_dot_l: r(-2), t_dot_l: r(2), l_n: r(5), n: 3 }).unwrap();
        assert!(mu.is_zero());
        // the degree-2 line: K.L = -2, L^1 = 2 -> mu = 1
        let mu = twisted_slope(&TwistInput { k_dot_l: r(-2), t_dot_l: r(0), l_n: r(2), n: 1 }).unwrap();
        assert_eq!(mu, r(1));
    }

    #[test]
    fn df_of_the_worked_example_is_one_quarter() {
        let d = hilbert_weight_data(&dnc_p1()).unwrap();
        assert_eq!(df_from_coefficients(&d), rq(1, 4));
    }

    #[test]
    fn df_of_trivial_configuration_vanishes() {
        let d = HilbertWeightData {
            a0: r(2),
            a1: r(1),
            b0: r(0),
            b1: r(0),
            a_q: r(3),
            b_q: r(0),
            n: 1,
            r_exponent: 1,
        };
        assert!(df_from_coefficients(&d).is_zero());
    }

    #[test]
    fn route_agreement_on_the_worked_example() {
        // the coefficient route equals the intersection route on the same
        // configuration, with the toric numbers in normalized units
        let tc = dnc_p1();
        let d = hilbert_weight_data(&tc).unwrap();
        let coeff = df_from_coefficients(&d);

        let mu = twisted_slope(&TwistInput {
            k_dot_l: r(-2),
            t_dot_l: r(0),
            l_n: r(2),
            n: 1,
        })
        .unwrap();
        // normalized units: Lnp1 = (n+1) b0 / 2, LK = -b1
        let lnp1 = rq(1, 2) * Rat::from_int(2) * d.b0.clone();
        let lk = -&d.b1;
        let by_table = df_from_intersections(&mu, &lnp1, &lk, &Rat::zero(), 1);
        assert_eq!(coeff, by_table);
        assert_eq!(by_table, rq(1, 4));
    }

    #[test]
    fn weight_shift_invariance_is_exact() {
        let d = hilbert_weight_data(&dnc_p1_twisted()).unwrap();
        let df = df_from_coefficients(&d);
        for c in [rq(1, 2), r(-3), rq(22, 7)] {
            let mut shifted = d.clone();
            shifted.b0 = &shifted.b0 + &(&c * &shifted.a0);
            shifted.b1 = &shifted.b1 + &(&c * &shifted.a1);
            shifted.b_q = &shifted.b_q + &(&c * &shifted.a_q);
            assert_eq!(df_from_coefficients(&shifted), df);
        }
    }

    #[test]
    fn norm_routes_agree_and_are_positive_on_the_example() {
        let (a, b, c) = toric_norm_routes(&dnc_p1()).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a, rq(1, 2));
        assert!(a.is_positive());
    }

    #[test]
    fn norm_vanishes_on_trivial_configurations() {
        use crate::polytope::{LatticePolytope, PLConvexFunction};
        use crate::torictc::{ToricPolarisedPair, ToricTestConfiguration};
        let pair = ToricPolarisedPair::new(LatticePolytope::segment(0, 2), None).unwrap();
        let tc = ToricTestConfiguration::new(
            pair,
            PLConvexFunction::constant(1, rq(1, 3)),
            Rat::one(),
            1,
        )
        .unwrap();
        let (a, b, c) = toric_norm_routes(&tc).unwrap();
        assert!(a.is_zero() && b.is_zero() && c.is_zero());
    }

    #[test]
    fn j_functional_examples() {
        // T = 0 -> 0
        assert!(j_functional(&r(0), &r(7), &r(0), 2).is_zero());
        // product of two lines: gamma = 1/2
        let gamma = gamma_ratio(&r(1), &r(2)).unwrap();
        assert_eq!(gamma, rq(1, 2));
        // linearity: J_{2T} = 2 J_T
        let j1 = j_functional(&gamma, &r(3), &r(5), 1);
        let j2 = j_functional(&(Rat::from_int(2) * gamma.clone()), &r(3), &r(10), 1);
        assert_eq!(j2, Rat::from_int(2) * j1);
    }

    #[test]
    fn chow_weight_of_trivial_configuration_vanishes() {
        use crate::polytope::{LatticePolytope, PLConvexFunction};
        use crate::torictc::{ToricPolarisedPair, ToricTestConfiguration};
        let pair = ToricPolarisedPair::new(LatticePolytope::segment(0, 2), None).unwrap();
        let tc = ToricTestConfiguration::new(
            pair,
            PLConvexFunction::constant(1, Rat::zero()),
            Rat::one(),
            1,
        )
        .unwrap();
        let (w, normalized) = chow_weight(&tc, 5).unwrap();
        assert!(w.is_zero());
        assert!(normalized.is_zero());
    }

    #[test]
    fn chow_weight_sign_matches_df_untwisted() {
        let tc = dnc_p1();
        let d = hilbert_weight_data(&tc).unwrap();
        let df = df_from_coefficients(&d);
        for r_eval in [3, 10, 25] {
            let (w, _) = chow_weight(&tc, r_eval).unwrap();
            let top = w.coeff(w.degree().unwrap());
            assert_eq!(top.signum(), df.signum());
        }
    }

    #[test]
    fn log_df_with_zero_divisor_is_df() {
        let d = hilbert_weight_data(&dnc_p1()).unwrap();
        assert_eq!(log_df(&d, &Rat::zero(), &Rat::zero()), df_from_coefficients(&d));
    }

    #[test]
    fn log_df_with_toric_boundary_divisor() {
        // Boundary point x = 2 on the worked example: divisor data from
        // the restricted lattice-sum oracle, then the coefficient route.
        use crate::torictc::boundary_divisor_data;
        let tc = dnc_p1();
        let p = tc.polytope().to_rational();
        let facets = p.facets().unwrap();
        let at_two = (0..facets.len())
            .find(|&i| facets[i].eval(&[r(2)]) == facets[i].rhs)
            .unwrap();
        let (d_a, d_b) = boundary_divisor_data(&tc, at_two).unwrap();
        let d = hilbert_weight_data(&tc).unwrap();
        let got = log_df(&d, &d_a, &d_b);
        // (b0 (a1 + 1) - (b1 + 1) a0)/a0 = (3 - 3)/2 = 0
        assert!(got.is_zero());
        let mut augmented = d.clone();
        augmented.a_q = &augmented.a_q + &d_a;
        augmented.b_q = &augmented.b_q + &d_b;
        assert_eq!(got, df_from_coefficients(&augmented));
    }

    #[test]
    fn df_from_intersections_reductions() {
        // all-zero inputs
        assert!(df_from_intersections(&r(0), &r(0), &r(0), &r(0), 3).is_zero());
        // Calabi-Yau-type slope: the invariant reduces to LK + LT
        let (lk, lt) = (rq(2, 3), rq(-1, 7));
        assert_eq!(df_from_intersections(&r(0), &r(9), &lk, &lt, 2), &lk + &lt);
    }

    #[test]
    fn log_df_enters_like_a_twist() {
        let d = hilbert_weight_data(&dnc_p1()).unwrap();
        let (da, db) = (rq(1, 3), rq(-2, 5));
        let mut twisted = d.clone();
        twisted.a_q = &twisted.a_q + &da;
        twisted.b_q = &twisted.b_q + &db;
        assert_eq!(log_df(&d, &da, &db), df_from_coefficients(&twisted));
    }

    #[test]
    fn verdict_trichotomy() {
        let v = verdict(&[(r(-1), r(2))], None).unwrap();
        assert_eq!(
            v,
            Verdict::DestabilizedBy { index: 0, violation: ViolationKind::Semistability }
        );
        let v = verdict(&[(rq(1, 4), rq(1, 2))], Some(&rq(1, 10))).unwrap();
        assert_eq!(v, Verdict::NonNegativeOnSuppliedSet);
        let v = verdict(&[(r(0), r(1))], None).unwrap();
        assert_eq!(
            v,
            Verdict::DestabilizedBy { index: 0, violation: ViolationKind::Stability }
        );
        assert!(verdict(&[(r(1), r(-1))], None).is_err());
    }

    #[test]
    fn norm_matches_the_closed_form_on_exponent_one_configurations() {
        // integral of f over P minus vol(P) min f reproduces the mixed
        // volume route on every exponent-one configuration tried; verified
        // here and reported, without the implementation depending on it.
        use crate::suites::{configuration_at_minimal_exponent, random_flag_ideal};
        use crate::polytope::LatticePolytope;
        use crate::torictc::ToricPolarisedPair;
        use rand::SeedableRng;

        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 8 {
            let pair = ToricPolarisedPair::new(LatticePolytope::segment(0, 3), None).unwrap();
            let ideal = random_flag_ideal(&mut rng, 1, 3);
            let Ok(tc) = configuration_at_minimal_exponent(&pair, &ideal, 1) else {
                continue; // needs exponent 1 for the closed form as stated
            };
            let (norm, _, _) = toric_norm_routes(&tc).unwrap();
            let p = tc.polytope();
            let integral = tc.pl_function.integral_on(p).unwrap();
            let min = tc.pl_function.min_on(p).unwrap();
            let closed_form = integral - p.volume().unwrap() * min;
            assert_eq!(norm, closed_form, "ideal {:?}", tc.pl_function);
            checked += 1;
        }
        // and on the worked example: 1/2
        let tc = dnc_p1();
        let closed = tc.pl_function.integral_on(tc.polytope()).unwrap();
        assert_eq!(closed, rq(1, 2));
    }

    #[test]
    fn sweep_is_affine_in_t() {
        let base = hilbert_weight_data(&dnc_p1()).unwrap();
        let dir = (r(1), rq(1, 2));
        let ts: Vec<Rat> = vec![r(0), rq(1, 2), r(1), r(2)];
        let out = twist_sweep(&base, (&dir.0, &dir.1), &ts);
        // constant direction gives a constant list
        let flat = twist_sweep(&base, (&r(0), &r(0)), &ts);
        assert!(flat.windows(2).all(|w| w[0].1 == w[1].1));
        // differences proportional to t-differences
        let d01 = &out[1].1 - &out[0].1;
        let d12 = &out[2].1 - &out[1].1;
        assert_eq!(d01, d12); // equal t-steps of 1/2
        let d23 = &out[3].1 - &out[2].1;
        assert_eq!(d23, Rat::from_int(2) * d12);
    }
}
