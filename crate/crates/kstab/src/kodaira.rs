//! Theorem-backed uniform-stability certificates: the embedding threshold
//! with its explicit epsilon, the family-uniform adjoint threshold, and
//! the J-to-DF decomposition.
//!
//! Nef certification is sufficient-only: a class is certified nef exactly
//! when it decomposes as a nonnegative rational combination of registered
//! generators. A failed certification is reported as unknown, never as
//! instability.

use serde::{Deserialize, Serialize};

use crate::error::{KstabError, Result};
use crate::exactmath::{Rat, UniPoly};
use crate::invariants::Verdict;
use crate::polytope::simplex::nonneg_combination;

/// Registered nef generators, as coordinate vectors in a declared class
/// basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NefOracle {
    pub basis: Vec<String>,
    pub generators: Vec<NefGenerator>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NefGenerator {
    pub name: String,
    pub vector: Vec<Rat>,
}

impl NefOracle {
    pub fn validate(&self) -> Result<()> {
        for g in &self.generators {
            if g.vector.len() != self.basis.len() {
                return Err(KstabError::DimensionMismatch(format!(
                    "generator {} has {} coordinates in a {}-class basis",
                    g.name,
                    g.vector.len(),
                    self.basis.len()
                )));
            }
        }
        Ok(())
    }

    /// A nonnegative decomposition of the class over the generators, when
    /// one exists.
    pub fn certify(&self, class: &[Rat]) -> Option<Vec<(String, Rat)>> {
        let cols: Vec<Vec<Rat>> = self.generators.iter().map(|g| g.vector.clone()).collect();
        let lambda = nonneg_combination(&cols, class)?;
        Some(
            self.generators
                .iter()
                .zip(lambda)
                .filter(|(_, l)| !l.is_zero())
                .map(|(g, l)| (g.name.clone(), l))
                .collect(),
        )
    }
}

/// The certificate behind an embedding threshold: which constraint bound
/// k, and the nef decomposition found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    /// k forced by k-hat = k/(2(n+1)) >= 1.
    pub k_hat_threshold: i64,
    /// least k whose candidate class the oracle certifies nef
    pub nef_threshold: i64,
    pub decomposition: Vec<(String, Rat)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingThreshold {
    pub k_min: i64,
    pub epsilon: Rat,
    pub certificate: EmbeddingCertificate,
}

impl EmbeddingThreshold {
    /// The only constructor of a uniform certificate: theorem-backed
    /// thresholds, never finite sweeps.
    pub fn verdict(&self) -> Verdict {
        Verdict::UniformCertificate {
            epsilon: self.epsilon.clone(),
            k_min: self.k_min,
        }
    }
}

/// The smallest k satisfying both proof constraints: k-hat >= 1 and the
/// class -(n mu/(n+1)) L - K_X + (k-hat/n) L certified nef. Returns the
/// proof constant epsilon = 1/(n(n+1)), independent of the pair.
///
/// `l_vector` and `k_vector` are the coordinates of L and K_X in the
/// oracle's class basis. NefCertificateUnavailable up to the cap does not
/// imply instability: the oracle is incomplete by design.
pub fn embedding_threshold(
    n: usize,
    mu: &Rat,
    l_vector: &[Rat],
    k_vector: &[Rat],
    oracle: &NefOracle,
    cap: i64,
) -> Result<EmbeddingThreshold> {
    if n == 0 {
        return Err(KstabError::InvalidInput("dimension must be positive".into()));
    }
    oracle.validate()?;
    if l_vector.len() != oracle.basis.len() || k_vector.len() != oracle.basis.len() {
        return Err(KstabError::DimensionMismatch(
            "L and K vectors must live in the oracle basis".into(),
        ));
    }
    let n_rat = Rat::from_int(n as i64);
    let k_hat_threshold = 2 * (n as i64 + 1);
    let slope_coeff = -(&n_rat * mu).checked_div(&Rat::from_int(n as i64 + 1))?;
    let candidate = |k: i64| -> Result<Vec<Rat>> {
        let k_hat = Rat::new(k, 2 * (n as i64 + 1))?;
        let l_coeff = &slope_coeff + &k_hat.checked_div(&n_rat)?;
        Ok(l_vector
            .iter()
            .zip(k_vector)
            .map(|(l, kx)| &(&l_coeff * l) - kx)
            .collect())
    };
    let mut nef_threshold = None;
    for k in 1..=cap {
        if oracle.certify(&candidate(k)?).is_some() {
            nef_threshold = Some(k);
            break;
        }
    }
    let Some(nef_threshold) = nef_threshold else {
        return Err(KstabError::NefCertificateUnavailable(format!(
            "no candidate class certified nef for k <= {cap}"
        )));
    };
    let k_min = k_hat_threshold.max(nef_threshold);
    // The nef side is monotone once L itself is certified, so k_min
    // satisfies both constraints; re-certify at k_min for the record.
    let Some(decomposition) = oracle.certify(&candidate(k_min)?) else {
        return Err(KstabError::NefCertificateUnavailable(format!(
            "certificate at k-hat >= 1 (k = {k_min}) unavailable; register L as a generator"
        )));
    };
    Ok(EmbeddingThreshold {
        k_min,
        epsilon: Rat::one().checked_div(&(n_rat.clone() * (n_rat + Rat::one())))?,
        certificate: EmbeddingCertificate {
            k_hat_threshold,
            nef_threshold,
            decomposition,
        },
    })
}

/// The fixed list [L^n, L^{n-1}.K, ..., K^n] of a smooth polarised family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChernNumbers {
    pub n: usize,
    pub values: Vec<Rat>,
}

impl ChernNumbers {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.n + 1 {
            return Err(KstabError::InvalidInput(format!(
                "need n+1 = {} intersection numbers, got {}",
                self.n + 1,
                self.values.len()
            )));
        }
        if !self.values[0].is_positive() {
            return Err(KstabError::InvalidInput("L^n must be positive".into()));
        }
        Ok(())
    }

    /// L^j.K^{n-j}.
    fn number(&self, l_power: usize) -> &Rat {
        &self.values[self.n - l_power]
    }

    /// The numerator -K.(mL+2K)^{n-1} and denominator (mL+2K)^n of the
    /// adjoint slope, as exact polynomials in m.
    pub fn adjoint_slope_fraction(&self) -> (UniPoly, UniPoly) {
        let n = self.n;
        let mut num = vec![Rat::zero(); n];
        for (j, slot) in num.iter_mut().enumerate() {
            // coefficient of m^j in -K.(mL+2K)^{n-1}
            let two_pow = Rat::from_int(2).pow((n - 1 - j) as u32);
            *slot = -(Rat::binomial(n - 1, j) * two_pow * self.number(j).clone());
        }
        let mut den = vec![Rat::zero(); n + 1];
        for (j, slot) in den.iter_mut().enumerate() {
            let two_pow = Rat::from_int(2).pow((n - j) as u32);
            *slot = Rat::binomial(n, j) * two_pow * self.number(j).clone();
        }
        (UniPoly::from_coeffs(num), UniPoly::from_coeffs(den))
    }

    /// mu(X, mL + 2K) at a specific m, when (mL+2K)^n > 0.
    pub fn adjoint_slope_at(&self, m: i64) -> Result<Rat> {
        let (num, den) = self.adjoint_slope_fraction();
        let d = den.eval(&Rat::from_int(m));
        if !d.is_positive() {
            return Err(KstabError::InvalidInput(format!(
                "(mL+2K)^n = {d} is not positive at m = {m}; not a polarization"
            )));
        }
        num.eval(&Rat::from_int(m)).checked_div(&d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyThreshold {
    pub m_min: i64,
    /// (m, least admissible k) for each m from m_min to the cap.
    pub per_m: Vec<(i64, i64)>,
}

/// The family-uniform adjoint threshold: the least m >= m' with
/// mu(X, mL+2K) <= 1, and for each such m the least k with k-hat >= 1 and
/// -(n/(n+1)) mu(m) + k-hat/n - 1 > 0. The very-ampleness floor m' is a
/// caller input.
pub fn family_threshold(c: &ChernNumbers, m_cap: i64, very_ample_floor: i64) -> Result<FamilyThreshold> {
    c.validate()?;
    if m_cap < very_ample_floor {
        return Err(KstabError::InvalidInput("cap below the very-ampleness floor".into()));
    }
    let n = c.n as i64;
    let mut m_min = None;
    let mut per_m = Vec::new();
    for m in very_ample_floor..=m_cap {
        let Ok(mu) = c.adjoint_slope_at(m) else {
            continue;
        };
        if mu > Rat::one() {
            continue;
        }
        if m_min.is_none() {
            m_min = Some(m);
        }
        // need k-hat > n (1 + n mu / (n+1)) and k-hat >= 1
        let bound = Rat::from_int(n)
            * (Rat::one() + Rat::from_int(n).checked_div(&Rat::from_int(n + 1))? * &mu);
        let k_hat_min_strict = strict_ceiling_times(&bound, 2 * (n + 1));
        let k = k_hat_min_strict.max(2 * (n + 1));
        per_m.push((m, k));
    }
    match m_min {
        Some(m_min) => Ok(FamilyThreshold { m_min, per_m }),
        None => Err(KstabError::NoThresholdBelowCap(format!(
            "mu(X, mL+2K) stays above 1 for all valid m in [{very_ample_floor}, {m_cap}]"
        ))),
    }
}

// least integer k with k/denominator > bound
fn strict_ceiling_times(bound: &Rat, denominator: i64) -> i64 {
    use num_traits::ToPrimitive;
    let scaled = bound * &Rat::from_int(denominator);
    let mut k = scaled.ceil().to_i64().expect("threshold fits i64");
    if Rat::from_int(k) == scaled {
        k += 1;
    }
    k
}

/// DF as the J-part plus the relative-canonical part. When the caller
/// flags the variety log canonical the canonical term must be nonnegative;
/// a negative value signals bad input, not a theorem failure.
pub fn j_df_decomposition(
    j_value: &Rat,
    relative_canonical_term: &Rat,
    log_canonical: bool,
) -> Result<Rat> {
    if log_canonical && relative_canonical_term.is_negative() {
        return Err(KstabError::NegativeDiscrepancy(format!(
            "relative canonical term {relative_canonical_term} is negative on a log canonical input"
        )));
    }
    Ok(j_value + relative_canonical_term)
}
