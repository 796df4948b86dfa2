//! Input file schemas and parsing helpers.

use std::path::Path;

use serde::Deserialize;

use kstab::error::{KstabError, Result};
use kstab::exactmath::Rat;
use kstab::fibration::FibrationData;
use kstab::intersect::IntersectionTable;
use kstab::invariants::TwistInput;
use kstab::kodaira::NefOracle;
use kstab::polytope::LatticePolytope;
use kstab::torictc::{HilbertWeightData, ToricTestConfiguration};

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| KstabError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| KstabError::InvalidInput(format!("cannot parse {}: {e}", path.display())))
}

pub fn read_polytope(path: &Path) -> Result<LatticePolytope> {
    read_json(path)
}

pub fn read_configuration(path: &Path) -> Result<ToricTestConfiguration> {
    let tc: ToricTestConfiguration = read_json(path)?;
    // Re-validate through the constructor contract.
    ToricTestConfiguration::new(tc.pair.clone(), tc.pl_function.clone(), tc.r_cap.clone(), tc.exponent)
}

/// {"n": .., "slope": {k_dot_l, t_dot_l, l_n, n}, "table": {...}} with the
/// table over the symbols Lcal, Krel, T in normalized units.
#[derive(Deserialize)]
pub struct DfTableInput {
    pub n: usize,
    pub slope: TwistInput,
    pub table: IntersectionTable<Rat>,
}

#[derive(Deserialize)]
pub struct JInput {
    pub n: usize,
    #[serde(default)]
    pub gamma: Option<Rat>,
    #[serde(default)]
    pub slope: Option<TwistInput>,
    pub lnp1: Rat,
    pub lt: Rat,
}

#[derive(Deserialize, Clone)]
pub struct FibrationInput {
    pub n: usize,
    pub b: usize,
    #[serde(rename = "V")]
    pub v: Rat,
    pub mu_fibre: Rat,
    pub kf_dot_lf: Rat,
    pub table: IntersectionTable<Rat>,
    pub lb_b: Rat,
    pub kb_dot_lb: Rat,
    pub base_tc: HilbertWeightData,
}

impl FibrationInput {
    pub fn into_data(self) -> FibrationData {
        FibrationData {
            n: self.n,
            b: self.b,
            v: self.v,
            mu_fibre: self.mu_fibre,
            kf_dot_lf: self.kf_dot_lf,
            base_table: self.table,
            lb_b: self.lb_b,
            kb_dot_lb: self.kb_dot_lb,
        }
    }
}

#[derive(Deserialize)]
pub struct CmDegreeInput {
    pub n: usize,
    pub b: usize,
    pub a_total: Rat,
    pub b_total: Rat,
    pub mu_fibre: Rat,
}

#[derive(Deserialize)]
pub struct EmbedInput {
    pub slope: TwistInput,
    pub l_vector: Vec<Rat>,
    pub k_vector: Vec<Rat>,
    pub oracle: NefOracle,
}

pub fn parse_rat_list(text: &str) -> Result<Vec<Rat>> {
    text.split(',')
        .map(|t| t.trim().parse::<Rat>())
        .collect()
}

pub fn parse_rat_pair(text: &str) -> Result<(Rat, Rat)> {
    let parts = parse_rat_list(text)?;
    if parts.len() != 2 {
        return Err(KstabError::InvalidInput(format!(
            "expected two comma-separated rationals, got `{text}`"
        )));
    }
    let mut it = parts.into_iter();
    Ok((it.next().unwrap(), it.next().unwrap()))
}
