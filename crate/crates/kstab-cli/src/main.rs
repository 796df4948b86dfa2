//! Command-line interface: JSON in, deterministic JSON reports out.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 oracle-inconclusive.

mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use kstab::error::KstabError;
use kstab::exactmath::Rat;
use kstab::intersect::{evaluate, verify_odaka_identity, LinComb};
use kstab::invariants::{
    self, df_from_coefficients, df_from_intersections, j_functional, minimum_norm, twist_sweep,
    twisted_slope, NormRoute,
};
use kstab::kodaira::{embedding_threshold, family_threshold};
use kstab::suites::inequality_suite;
use kstab::torictc::{b_tilde_zero, hilbert_weight_data, norm_data};

use inputs::*;
use report::Report;

#[derive(Parser)]
#[command(name = "kstab", version, about = "Exact stability invariants of polarised pairs")]
struct Cli {
    /// Where to write the JSON report.
    #[arg(long, global = true, default_value = "report.json")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ehrhart polynomial of a lattice polytope.
    Ehrhart { input: PathBuf },
    /// Donaldson-Futaki-type invariants.
    #[command(subcommand)]
    Df(DfCommand),
    /// Minimum norm of a toric test-configuration.
    Norm {
        input: PathBuf,
        #[arg(long, value_parser = ["intersection", "odaka", "b0", "all"], default_value = "all")]
        route: String,
    },
    /// J-functional on declared inputs.
    Jtest { input: PathBuf },
    /// Weight polynomial in k at a fixed dilation r.
    ChowWeight {
        input: PathBuf,
        #[arg(long)]
        r: i64,
    },
    /// Fibration pipeline.
    #[command(subcommand)]
    Fibration(FibrationCommand),
    /// CM-class degree over a curve base.
    CmDegree { input: PathBuf },
    /// Theorem-backed uniform-stability thresholds.
    #[command(subcommand)]
    Kodaira(KodairaCommand),
    /// Bundled verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Subcommand)]
enum DfCommand {
    /// From a toric test-configuration (coefficient route).
    Toric { input: PathBuf },
    /// From a declared intersection table.
    Table { input: PathBuf },
}

#[derive(Subcommand)]
enum FibrationCommand {
    /// DF m-expansion of a split fibration.
    Expand { input: PathBuf },
}

#[derive(Subcommand)]
enum KodairaCommand {
    /// Embedding threshold of a single pair.
    Embed {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        cap: i64,
    },
    /// Family-uniform adjoint threshold.
    Family {
        input: PathBuf,
        #[arg(long)]
        very_ample_floor: i64,
        #[arg(long)]
        cap: i64,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// The combinatorial intersection identity, coefficientwise.
    Identities {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Sign checks on random monomial flag ideals.
    Inequalities(TrialArgs),
    /// Norm route agreement on random monomial flag ideals.
    Norms(TrialArgs),
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// df along a ray of twists.
    Twist {
        input: PathBuf,
        /// Twist direction per unit t, as "a_q,b_q".
        #[arg(long)]
        direction: String,
        /// Comma-separated rational values of t.
        #[arg(long)]
        range: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            let code = classify(&err);
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}

fn classify(err: &KstabError) -> u8 {
    match err {
        KstabError::NefCertificateUnavailable(_)
        | KstabError::Inconclusive(_)
        | KstabError::NoThresholdBelowCap(_) => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, KstabError> {
    match &cli.command {
        Command::Ehrhart { input } => {
            let polytope = read_polytope(input)?;
            let ehr = polytope.ehrhart()?;
            let volume = polytope.volume()?;
            let report = Report::new("ehrhart", &[input], &cli.out).payload(json!({
                "dim": polytope.dim(),
                "coefficients": ehr.coeffs(),
                "leading_coefficient": ehr.coeff(polytope.dim()),
                "volume": volume,
                "routes": {"ehrhart": "exact fit with two verification samples",
                           "volume": "simplicial triangulation"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Df(DfCommand::Toric { input }) => {
            let tc = read_configuration(input)?;
            let data = hilbert_weight_data(&tc)?;
            let df = df_from_coefficients(&data);
            let (int_route, odaka_route, b0_route) = invariants::toric_norm_routes(&tc)?;
            let verdict = invariants::verdict(&[(df.clone(), int_route.clone())], None)?;
            let report = Report::new("df toric", &[input], &cli.out).payload(json!({
                "df": df,
                "minimum_norm": int_route,
                "norm_routes": {"intersection": int_route, "odaka": odaka_route, "b0": b0_route},
                "weight_data": data,
                "verdict": verdict,
                "routes": {"df": "coefficients", "minimum_norm": "intersection"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Df(DfCommand::Table { input }) => {
            let spec: DfTableInput = read_json(input)?;
            let n = spec.n;
            let mu = twisted_slope(&spec.slope)?;
            let lcal = LinComb::<Rat>::class("Lcal");
            let dot = |name: &str| -> Result<Rat, KstabError> {
                let mut f = vec![lcal.clone(); n];
                f.push(LinComb::class(name));
                evaluate(&f, &spec.table)
            };
            let lnp1 = evaluate(&vec![lcal.clone(); n + 1], &spec.table)?;
            let lk = dot("Krel")?;
            let lt = dot("T")?;
            let df = df_from_intersections(&mu, &lnp1, &lk, &lt, n);
            let report = Report::new("df table", &[input], &cli.out).payload(json!({
                "df": df,
                "mu": mu,
                "lnp1": lnp1, "lk": lk, "lt": lt,
                "routes": {"df": "intersections"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Norm { input, route } => {
            let tc = read_configuration(input)?;
            let n = tc.dim();
            let r = tc.exponent;
            let (l_dot_ql, lnp1) = norm_data(&tc)?;
            let mut routes = serde_json::Map::new();
            let value = match route.as_str() {
                "intersection" => {
                    let v = minimum_norm(&NormRoute::Intersection { l_dot_ql, lnp1 }, n, r)?;
                    routes.insert("intersection".into(), json!(v));
                    v
                }
                "odaka" => {
                    let v = minimum_norm(&NormRoute::Odaka { l_dot_ql, lnp1 }, n, r)?;
                    routes.insert("odaka".into(), json!(v));
                    v
                }
                "b0" => {
                    let data = hilbert_weight_data(&tc)?;
                    let v = minimum_norm(
                        &NormRoute::B0 { b_tilde0: b_tilde_zero(&tc)?, b0: data.b0 },
                        n,
                        r,
                    )?;
                    routes.insert("b0".into(), json!(v));
                    v
                }
                _ => {
                    let (a, b, c) = invariants::toric_norm_routes(&tc)?;
                    routes.insert("intersection".into(), json!(a));
                    routes.insert("odaka".into(), json!(b));
                    routes.insert("b0".into(), json!(c));
                    if a != b || b != c {
                        let report =
                            Report::new("norm", &[input], &cli.out).payload(json!({
                                "routes": routes,
                                "agreement": false,
                            }));
                        report.write(&cli.out)?;
                        return Ok(ExitCode::from(1));
                    }
                    a
                }
            };
            let report = Report::new("norm", &[input], &cli.out).payload(json!({
                "minimum_norm": value,
                "routes": routes,
                "agreement": true,
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Jtest { input } => {
            let spec: JInput = read_json(input)?;
            let gamma = match spec.gamma {
                Some(g) => g,
                None => {
                    let s = spec.slope.as_ref().ok_or_else(|| {
                        KstabError::MissingInput("jtest needs gamma or slope inputs".into())
                    })?;
                    invariants::gamma_ratio(&s.t_dot_l, &s.l_n)?
                }
            };
            let j = j_functional(&gamma, &spec.lnp1, &spec.lt, spec.n);
            let report = Report::new("jtest", &[input], &cli.out).payload(json!({
                "j_value": j,
                "gamma": gamma,
                "routes": {"j": "declared inputs"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ChowWeight { input, r } => {
            let tc = read_configuration(input)?;
            let (weight, normalized) = invariants::chow_weight(&tc, *r)?;
            let top = weight.degree().map(|d| weight.coeff(d));
            let report = Report::new("chow-weight", &[input], &cli.out).payload(json!({
                "r": r,
                "weight_in_k": weight.coeffs(),
                "normalized_in_k": normalized.coeffs(),
                "top_coefficient": top,
                "routes": {"chow": "bivariate lattice oracle at fixed r"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fibration(FibrationCommand::Expand { input }) => {
            let spec: FibrationInput = read_json(input)?;
            let fd = spec.clone().into_data();
            let out = kstab::fibration::df_m_expansion(&fd, &spec.base_tc)?;
            let delta = kstab::fibration::delta(spec.n, spec.b, &spec.v)?;
            let threshold = kstab::fibration::propagate_instability(&out.poly, spec.b).ok();
            let report = Report::new("fibration expand", &[input], &cli.out).payload(json!({
                "delta": delta,
                "coeff_b_plus_1": out.coeff_b_plus_1,
                "coeff_b": out.coeff_b,
                "base_df": out.base_df,
                "poly_in_m": out.poly.coeffs(),
                "instability_threshold": threshold,
                "routes": {"expansion": "split-table multilinear expansion, exact division"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CmDegree { input } => {
            let spec: CmDegreeInput = read_json(input)?;
            let degree =
                kstab::fibration::cm_degree(&spec.a_total, &spec.b_total, &spec.mu_fibre, spec.n, spec.b)?;
            let report = Report::new("cm-degree", &[input], &cli.out).payload(json!({
                "cm_degree": degree,
                "routes": {"cm": "declared pushforward totals"},
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kodaira(KodairaCommand::Embed { input, cap }) => {
            let spec: EmbedInput = read_json(input)?;
            let mu = twisted_slope(&spec.slope)?;
            let got = embedding_threshold(
                spec.slope.n,
                &mu,
                &spec.l_vector,
                &spec.k_vector,
                &spec.oracle,
                *cap,
            )?;
            let verdict = got.verdict();
            let report = Report::new("kodaira embed", &[input], &cli.out).payload(json!({
                "k_min": got.k_min,
                "epsilon": got.epsilon,
                "certificate": got.certificate,
                "verdict": verdict,
                "note": "k_min is a proof-backed bound; smaller k may work in reality",
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kodaira(KodairaCommand::Family { input, very_ample_floor, cap }) => {
            let chern: kstab::kodaira::ChernNumbers = read_json(input)?;
            let got = family_threshold(&chern, *cap, *very_ample_floor)?;
            let report = Report::new("kodaira family", &[input], &cli.out).payload(json!({
                "m_min": got.m_min,
                "per_m": got.per_m,
                "note": "thresholds are proof-backed bounds",
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(VerifyCommand::Identities { n_max }) => {
            let mut all = true;
            let mut rows = Vec::new();
            for n in 1..=*n_max {
                let r = verify_odaka_identity(n)?;
                all &= r.equal;
                println!("identity n={n}: {}", if r.equal { "PASS" } else { "FAIL" });
                rows.push(r);
            }
            let report = Report::new("verify identities", &[], &cli.out).payload(json!({
                "n_max": n_max,
                "all_pass": all,
                "reports": rows,
            }));
            report.write(&cli.out)?;
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify(VerifyCommand::Inequalities(args)) => {
            let suite = inequality_suite(args.trials, args.seed)?;
            let pass = suite.failures == 0;
            println!(
                "inequalities: {} trials, {} failures: {}",
                suite.trials,
                suite.failures,
                if pass { "PASS" } else { "FAIL" }
            );
            let report = Report::new("verify inequalities", &[], &cli.out)
                .seed(args.seed)
                .payload(json!(suite));
            report.write(&cli.out)?;
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify(VerifyCommand::Norms(args)) => {
            let suite = kstab::suites::norm_agreement_suite(args.trials, args.seed)?;
            let pass = suite.failures == 0;
            println!(
                "norm agreement: {} trials, {} failures: {}",
                suite.trials,
                suite.failures,
                if pass { "PASS" } else { "FAIL" }
            );
            let report = Report::new("verify norms", &[], &cli.out)
                .seed(args.seed)
                .payload(json!(suite));
            report.write(&cli.out)?;
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Sweep(SweepCommand::Twist { input, direction, range }) => {
            let tc = read_configuration(input)?;
            let base = hilbert_weight_data(&tc)?;
            let dir = parse_rat_pair(direction)?;
            let ts = parse_rat_list(range)?;
            let values = twist_sweep(&base, (&dir.0, &dir.1), &ts);
            let destabilized = values.iter().any(|(_, df)| df.is_negative());
            let report = Report::new("sweep twist", &[input], &cli.out).payload(json!({
                "direction": [dir.0, dir.1],
                "values": values,
                "affine_in_t": true,
                "any_negative": destabilized,
                "note": "finite sweeps are evidence over the supplied set, never certificates",
            }));
            report.write(&cli.out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

