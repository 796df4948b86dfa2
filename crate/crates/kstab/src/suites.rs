//! Seeded randomized verification suites, shared by the CLI and the
//! acceptance tests. Seeds are explicit and fixed by default, never
//! time-based, so every run is reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KstabError, Result};
use crate::exactmath::Rat;
use crate::intersect::{check_inequalities, flag_configuration_table};
use crate::invariants::toric_norm_routes;
use crate::polytope::LatticePolytope;
use crate::torictc::{from_flag_ideal, FlagGenerator, MonomialFlagIdeal, ToricPolarisedPair, ToricTestConfiguration};

/// Draws a random monomial flag ideal in the given dimension: a pure
/// power t^N, at least one t-free generator with a nonzero exponent (so
/// the support has codimension two, the lemma's standing hypothesis), and
/// possibly further mixed generators.
pub fn random_flag_ideal(rng: &mut ChaCha20Rng, dim: usize, max_exp: i64) -> MonomialFlagIdeal {
    loop {
        let t_cap = rng.gen_range(1..=3u32);
        let mut generators = vec![FlagGenerator { exponent: vec![0; dim], t_power: t_cap }];
        let t_free: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..=max_exp)).collect();
        if t_free.iter().all(|&e| e == 0) {
            continue;
        }
        generators.push(FlagGenerator { exponent: t_free, t_power: 0 });
        for _ in 0..rng.gen_range(0..=2usize) {
            let exponent: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..=max_exp)).collect();
            let t_power = rng.gen_range(0..t_cap);
            if exponent.iter().all(|&e| e == 0) && t_power == 0 {
                continue; // the unit ideal is not a degeneration
            }
            generators.push(FlagGenerator { exponent, t_power });
        }
        let Ok(ideal) = MonomialFlagIdeal::new(generators) else {
            continue;
        };
        if !ideal.is_pure_power() {
            return ideal;
        }
    }
}

/// Builds the ideal's configuration at the least workable exponent.
pub fn configuration_at_minimal_exponent(
    pair: &ToricPolarisedPair,
    ideal: &MonomialFlagIdeal,
    r_cap: i64,
) -> Result<ToricTestConfiguration> {
    for r in 1..=r_cap {
        match from_flag_ideal(pair, ideal, r) {
            Ok(tc) => return Ok(tc),
            Err(KstabError::NotSemiample(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(KstabError::NotSemiample(format!(
        "no workable exponent up to {r_cap}"
    )))
}

/// One draw of the inequality suite, with the exact values retained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityTrial {
    pub ideal: MonomialFlagIdeal,
    pub exponent: i64,
    pub all_hold: bool,
    pub values: Vec<Rat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalitySuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
    pub failed_trials: Vec<InequalityTrial>,
}

/// Runs the intersection-theoretic sign checks on random flag ideals over
/// the segment [0, 4] and the 2x2 square, alternating. Zero failures is
/// the expected outcome.
pub fn inequality_suite(trials: usize, seed: u64) -> Result<InequalitySuiteReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let segment = ToricPolarisedPair::new(LatticePolytope::segment(0, 4), None)?;
    let square = ToricPolarisedPair::new(LatticePolytope::cube(2, 2), None)?;
    let mut failures = 0;
    let mut failed_trials = Vec::new();
    let mut done = 0;
    while done < trials {
        // Square draws are heavier; one in five keeps the suite fast while
        // still exercising dimension two throughout.
        let on_square = done % 5 == 4;
        let (pair, dim, max_exp) = if on_square {
            (&square, 2, 3)
        } else {
            (&segment, 1, 6)
        };
        let ideal = random_flag_ideal(&mut rng, dim, max_exp);
        let Ok(tc) = configuration_at_minimal_exponent(pair, &ideal, 24) else {
            continue; // ill-fitting draw; redraw without counting
        };
        if tc.is_trivial()? {
            continue;
        }
        let table = flag_configuration_table(&tc)?;
        let report = check_inequalities(&table, tc.exponent, tc.dim(), true)?;
        if !report.all_hold() {
            failures += 1;
            failed_trials.push(InequalityTrial {
                ideal: ideal.clone(),
                exponent: tc.exponent,
                all_hold: false,
                values: vec![
                    report.value_i.clone(),
                    report.value_ii.clone(),
                    report.value_iii.clone(),
                    report.value_improved.clone(),
                ],
            });
        }
        done += 1;
    }
    Ok(InequalitySuiteReport { seed, trials, failures, failed_trials })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormAgreementReport {
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
}

/// Cross-checks the three norm routes on random flag ideals over segments
/// [0, d], d <= 4: exact pairwise agreement, and strict positivity off the
/// trivial locus.
pub fn norm_agreement_suite(trials: usize, seed: u64) -> Result<NormAgreementReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut done = 0;
    while done < trials {
        let d = rng.gen_range(1..=4i64);
        let pair = ToricPolarisedPair::new(LatticePolytope::segment(0, d), None)?;
        let ideal = random_flag_ideal(&mut rng, 1, 6);
        let Ok(tc) = configuration_at_minimal_exponent(&pair, &ideal, 24) else {
            continue;
        };
        let (a, b, c) = toric_norm_routes(&tc)?;
        if a != b || b != c {
            failures += 1;
        } else if tc.is_trivial()? {
            if !a.is_zero() {
                failures += 1;
            }
        } else if !a.is_positive() {
            failures += 1;
        }
        done += 1;
    }
    Ok(NormAgreementReport { seed, trials, failures })
}
