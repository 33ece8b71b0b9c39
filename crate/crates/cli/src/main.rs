//! Command-line front end: channel-set ingestion, verb dispatch,
//! deterministic seeding, and JSON/CSV emission.
//!
//! Exit codes: 0 success, 1 contract failure (with the failing stage named),
//! 2 malformed input or parameters.

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use cqcap::capacity::{averaged_capacity, compound_capacity};
use cqcap::channel::CompoundSet;
use cqcap::checks::{run_suite, SUITES};
use cqcap::converse::{
    averaged_weak_converse_check, fano_holevo_bound, markov_good_set,
    strong_converse_rate_bound, DuplicatePolicy,
};
use cqcap::error::CqError;
use cqcap::json::{
    code_from_file, code_to_file, parse_channel_set, ChannelSetFile, CodeFile, ParsedChannels,
};
use cqcap::pipeline::{compound_direct_pipeline, PipelineOptions};
use cqcap::universal::{universal_pvm, universal_test_set};
use cqcap::DensityOperator;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cqcap",
    about = "Capacity, coding, and hypothesis-testing numerics for compound and averaged classical-quantum channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker thread cap (fallback: CQCAP_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CapacityMode {
    Compound,
    Averaged,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HypothesisSuite {
    /// Classical universal test sets over random composite nulls.
    Test,
    /// Universal PVM on the states of a channel file.
    Pvm,
}

#[derive(Subcommand)]
enum Command {
    /// Minimax Holevo capacity of a channel set.
    Capacity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "compound")]
        mode: CapacityMode,
        /// Additive accuracy target of the solver.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Direct-part coding pipeline: net, universal test, one-shot code.
    Code {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        /// Capacity solver tolerance inside the pipeline.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Write the constructed code as JSON for the converse verb.
        #[arg(long)]
        emit_code: Option<PathBuf>,
        /// Write per-trial average errors as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Universal hypothesis-testing diagnostics (CSV rows).
    Hypothesis {
        #[arg(long, value_enum)]
        suite: HypothesisSuite,
        /// Channel file; required for the pvm suite.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Word lengths for the test suite.
        #[arg(long, value_delimiter = ',', default_values_t = vec![6usize, 8, 10, 12])]
        k: Vec<usize>,
        /// Neighborhood radii for the test suite.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.3])]
        delta: Vec<f64>,
        /// Block lengths for the pvm suite.
        #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8])]
        l: Vec<usize>,
        /// Number of random null sets for the test suite.
        #[arg(long, default_value_t = 20)]
        sets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Converse bounds for a stored code against a channel set.
    Converse {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        channels: PathBuf,
        /// Single-type strong-converse constant (existential in theory,
        /// supplied by the user here).
        #[arg(long)]
        kprime: f64,
    },
    /// Randomized invariant suites.
    Check {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("CQCAP_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: failed to build thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    let output = cli.output.clone();
    match pool.install(|| dispatch(cli.command, output.as_deref())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<CqError>() {
                Some(CqError::ContractViolation { .. }) => 1,
                Some(_) => 2,
                None => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn read_channels(path: &Path) -> anyhow::Result<ParsedChannels> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: ChannelSetFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(parse_channel_set(&file)?)
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)
}

/// Twelve significant digits, fixed across platforms.
fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

fn dispatch(command: Command, output: Option<&Path>) -> anyhow::Result<ExitCode> {
    match command {
        Command::Capacity { input, mode, tol } => {
            let parsed = read_channels(&input)?;
            let result = match (mode, &parsed) {
                (CapacityMode::Compound, _) => compound_capacity(parsed.compound(), tol)?,
                (CapacityMode::Averaged, ParsedChannels::Averaged(spec)) => {
                    averaged_capacity(spec, tol)?
                }
                (CapacityMode::Averaged, ParsedChannels::Compound(_)) => {
                    return Err(anyhow!(
                        "averaged mode needs per-channel weights in the input file"
                    ));
                }
            };
            emit_json(output, &result)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Code {
            input,
            n,
            theta,
            seed,
            trials,
            tol,
            emit_code,
            csv,
        } => {
            let parsed = read_channels(&input)?;
            let opts = PipelineOptions { tol, trials };
            let outcome = compound_direct_pipeline(parsed.compound(), n, theta, seed, &opts)?;
            if let Some(path) = emit_code {
                let file = code_to_file(&outcome.code);
                std::fs::write(&path, serde_json::to_string(&file)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = csv {
                let mut text = String::from("trial,avg_error\n");
                for (i, e) in outcome.report.one_shot.trial_errors.iter().enumerate() {
                    text.push_str(&format!("{i},{}\n", fmt(*e)));
                }
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            emit_json(output, &outcome.report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Hypothesis {
            suite,
            input,
            k,
            delta,
            l,
            sets,
            seed,
        } => {
            let text = match suite {
                HypothesisSuite::Test => hypothesis_test_csv(&k, &delta, sets, seed)?,
                HypothesisSuite::Pvm => {
                    let input = input
                        .ok_or_else(|| anyhow!("--input is required for the pvm suite"))?;
                    let parsed = read_channels(&input)?;
                    hypothesis_pvm_csv(parsed.compound(), &l)?
                }
            };
            emit(output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Converse {
            code,
            channels,
            kprime,
        } => {
            let code_text = std::fs::read_to_string(&code)
                .with_context(|| format!("reading {}", code.display()))?;
            let code_file: CodeFile = serde_json::from_str(&code_text)
                .with_context(|| format!("parsing {}", code.display()))?;
            let codebook = code_from_file(&code_file)?;
            let parsed = read_channels(&channels)?;
            let set = parsed.compound();

            #[derive(Serialize)]
            struct ConverseOutput {
                fano: std::collections::BTreeMap<String, cqcap::converse::FanoHolevoReport>,
                strong: cqcap::converse::StrongConverseReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                markov: Option<cqcap::converse::MarkovGoodSet>,
                #[serde(skip_serializing_if = "Option::is_none")]
                weak: Option<cqcap::converse::WeakConverseReport>,
            }

            let mut fano = std::collections::BTreeMap::new();
            for (id, w) in set.iter() {
                fano.insert(
                    id.clone(),
                    fano_holevo_bound(&codebook, w, DuplicatePolicy::MultiplicityWeighted)?,
                );
            }
            let strong = strong_converse_rate_bound(codebook.n, &codebook, set, kprime)?;
            let (markov, weak) = match &parsed {
                ParsedChannels::Averaged(spec) => (
                    Some(markov_good_set(&codebook, spec)?),
                    Some(averaged_weak_converse_check(
                        std::slice::from_ref(&codebook),
                        spec,
                    )?),
                ),
                ParsedChannels::Compound(_) => (None, None),
            };
            let all_hold = fano.values().all(|r| r.holds)
                && strong.holds
                && markov.as_ref().map(|m| m.holds).unwrap_or(true)
                && weak.as_ref().map(|w| w.all_hold).unwrap_or(true);
            emit_json(
                output,
                &ConverseOutput {
                    fano,
                    strong,
                    markov,
                    weak,
                },
            )?;
            if all_hold {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("converse: at least one bound failed");
                Ok(ExitCode::from(1))
            }
        }
        Command::Check {
            suite,
            trials,
            seed,
        } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(anyhow!("unknown suite {suite:?}; available: {SUITES:?}"));
            }
            let outcome = run_suite(&suite, trials, seed)?;
            emit_json(output, &outcome)?;
            if outcome.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "check {suite}: {} violations, worst margin {}",
                    outcome.violations, outcome.worst_margin
                );
                Ok(ExitCode::from(1))
            }
        }
    }
}

/// CSV rows for random composite nulls: exact masses against both bounds.
fn hypothesis_test_csv(
    ks: &[usize],
    deltas: &[f64],
    sets: usize,
    seed: u64,
) -> anyhow::Result<String> {
    let mut text =
        String::from("k,delta,set,member,q_mass,q_lower_bound,r_mass,r_upper_bound,slack\n");
    let mut case = 0u64;
    for &k in ks {
        for &delta in deltas {
            for set_idx in 0..sets {
                let mut rng = cqcap::random::stream(seed, case);
                case += 1;
                let size = 1 + (set_idx % 4);
                let omega: Vec<Vec<f64>> = (0..size)
                    .map(|_| cqcap::random::random_weights(2, &mut rng))
                    .collect();
                let r = cqcap::random::random_interior_weights(2, 0.05, &mut rng);
                let t = universal_test_set(&omega, &r, k, delta)?;
                for (member, &mass) in t.q_masses.iter().enumerate() {
                    let slack = (mass - t.q_mass_lower_bound)
                        .min(t.r_mass_upper_bound - t.r_mass);
                    text.push_str(&format!(
                        "{k},{},{set_idx},{member},{},{},{},{},{}\n",
                        fmt(delta),
                        fmt(mass),
                        fmt(t.q_mass_lower_bound),
                        fmt(t.r_mass),
                        fmt(t.r_mass_upper_bound),
                        fmt(slack)
                    ));
                }
            }
        }
    }
    Ok(text)
}

/// CSV rows for the universal PVM on a channel file's output states, with
/// the uniform mixture as the reference.
fn hypothesis_pvm_csv(set: &CompoundSet, ls: &[usize]) -> anyhow::Result<String> {
    let omega: Vec<DensityOperator> = set
        .members()
        .iter()
        .flat_map(|w| w.outputs().iter().cloned())
        .collect();
    let parts: Vec<(f64, &DensityOperator)> = omega
        .iter()
        .map(|rho| (1.0 / omega.len() as f64, rho))
        .collect();
    let sigma = DensityOperator::mixture(&parts)?;
    let mut text = String::from(
        "l,delta,member,first_kind,first_lower_bound,second_kind,second_upper_bound,s_m_over_l,floor,slack\n",
    );
    for &l in ls {
        let u = universal_pvm(&omega, &sigma, l)?;
        let second_bound =
            (-(l as f64) * (u.s_omega_sigma - u.schedule.tau2)).exp2().min(1.0);
        for (member, &mass) in u.first_kind.iter().enumerate() {
            let s_m = u.measured_relative_entropy(member).to_f64() / l as f64;
            let floor = u.s_omega_sigma - u.schedule.zeta;
            text.push_str(&format!(
                "{l},{},{member},{},{},{},{},{},{},{}\n",
                fmt(u.schedule.delta),
                fmt(mass),
                fmt(1.0 - u.schedule.tau1_clamped()),
                fmt(u.second_kind),
                fmt(second_bound),
                fmt(s_m),
                fmt(floor),
                fmt(s_m - floor)
            ));
        }
    }
    Ok(text)
}
