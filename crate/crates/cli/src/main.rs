//! Command-line front end for the signaling solvers.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 solver failure,
//! 4 verification failure. Schemes go to `--out`, or to stdout when it is
//! absent; the one-line summary then moves to stderr.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use infodesign::auction::{
    brute_force_auction, solve_auction_sampled, solve_auction_signaling, welfare_of_assignment, WinnerNetParams,
    DEFAULT_BRUTE_FORCE_CAP,
};
use infodesign::game::{brute_force_game_opt, solve_game_signaling, GameSolveOptions};
use infodesign::io::{
    load_sampler, parse_instance, parse_sampler_spec, to_canonical_json, verify, write_json, AuctionScheme,
    GameScheme, Instance, SchemeFile,
};
use infodesign::{EquilibriumConcept, FileError, SolveError};

/// Seed used by `solve-auction-sampled` when `--seed` is not given.
const DEFAULT_SEED: u64 = 0x5EED;

/// Default approximation parameter for `solve-auction`.
const DEFAULT_AUCTION_EPSILON: f64 = 0.3;

#[derive(Parser)]
#[command(name = "infodesign", version, about = "Near-optimal signaling schemes for Bayesian games and auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best ε-equilibrium signaling scheme for a Bayesian game
    SolveGame {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        concept: EquilibriumConcept,
        /// Net multiset size (defaults to the formula in ε, n and m)
        #[arg(long)]
        net_size: Option<usize>,
        /// Player whose incentive constraints are dropped (0-based)
        #[arg(long)]
        stackelberg_leader: Option<usize>,
        /// Rewrite the scheme on at most M+1 signals
        #[arg(long)]
        reduce_signals: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy k-signal scheme for a second-price auction
    SolveAuction {
        file: PathBuf,
        /// Number of signals (defaults to the file's k)
        #[arg(short = 'k')]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_AUCTION_EPSILON, allow_negative_numbers = true)]
        epsilon: f64,
        /// Winner net multiset size (defaults to the formula in ε, n and r)
        #[arg(long)]
        net_multiset_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Auction scheme from sampled valuations: uniform-iid:n=N,M=M or mixture:PATH
    SolveAuctionSampled {
        sampler: String,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        net_multiset_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a scheme's totals and check its invariants
    Verify { instance: PathBuf, scheme: PathBuf },
    /// Exhaustive optimum over all k-signal partitions
    BruteAuction {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
    },
    /// Grid lower bound on the best two-signal scheme of a two-state game
    BruteGame {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value_t = EquilibriumConcept::Nash)]
        concept: EquilibriumConcept,
        #[arg(long)]
        net_size: Option<usize>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        let code = match e {
            FileError::Write { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Parameter(_) => 1,
            SolveError::Model(_) => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Writes the scheme and prints the summary where it belongs.
fn emit(scheme: &SchemeFile, out: Option<&PathBuf>, summary: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            write_json(path, scheme)?;
            println!("{summary}");
        }
        None => {
            print!("{}", to_canonical_json(scheme));
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    let start = Instant::now();
    match command {
        Command::SolveGame { file, epsilon, delta, concept, net_size, stackelberg_leader, reduce_signals, out } => {
            let Instance::Game { validated, .. } = parse_instance(&file)? else {
                return Err(FileError::Field(format!("{} is not a game instance", file.display())).into());
            };
            let mut opts = GameSolveOptions::new(epsilon, delta, concept);
            opts.net_size = net_size;
            opts.stackelberg_leader = stackelberg_leader;
            opts.reduce_signals = reduce_signals;
            let result = solve_game_signaling(&validated.instance, &opts)?;
            let s = &result.stats;
            eprintln!(
                "net: multiset size {}, {} strategies, {} profiles, {} with non-empty polytope",
                s.multiset_size, s.net_size, s.profiles, s.kept
            );
            for (idx, (sig, d)) in result.scheme.signals.iter().zip(&result.diagnostics).enumerate() {
                eprintln!("signal {idx}: alpha {:.6} regret {:.3e} rows {}", sig.weight, d.regret, d.polytope_rows);
            }
            let summary = format!(
                "objective {} signals {} time {:.3}s",
                result.objective,
                result.scheme.len(),
                start.elapsed().as_secs_f64()
            );
            let scheme = SchemeFile::Game(GameScheme::from_result(&result, &validated.reduction, &opts));
            emit(&scheme, out.as_ref(), &summary)
        }
        Command::SolveAuction { file, k, epsilon, net_multiset_size, out } => {
            let Instance::Auction { validated, raw } = parse_instance(&file)? else {
                return Err(FileError::Field(format!("{} is not an auction instance", file.display())).into());
            };
            let k = k
                .or(raw.signal_budget)
                .ok_or_else(|| Failure::usage("-k is required when the instance has no k"))?;
            if k == 0 {
                return Err(Failure::usage("k must be at least 1"));
            }
            let auction = &validated.instance;
            let params = match net_multiset_size {
                Some(s) => WinnerNetParams::explicit(s)?,
                None => WinnerNetParams::worst_case(auction.num_bidders, auction.support_size(), epsilon)?,
            };
            let result = solve_auction_signaling(auction, k, &params)?;
            eprintln!(
                "winner net: multiset size {}, {} tuples; greedy gains {:?}",
                result.multiset_size, result.net_size, result.trace
            );
            let summary = format!(
                "welfare {} signals {} time {:.3}s",
                result.welfare,
                result.winner_tuples.len(),
                start.elapsed().as_secs_f64()
            );
            let scheme = SchemeFile::Auction(AuctionScheme::from_result(&result, &validated.reduction, k));
            emit(&scheme, out.as_ref(), &summary)
        }
        Command::SolveAuctionSampled { sampler, k, epsilon, delta, seed, net_multiset_size, out } => {
            let loaded = load_sampler(&parse_sampler_spec(&sampler)?)?;
            let params = net_multiset_size.map(WinnerNetParams::explicit).transpose()?;
            let sampled =
                solve_auction_sampled(loaded.sampler.as_ref(), &loaded.prior, k, epsilon, delta, seed, params)?;
            let result = &sampled.result;
            let true_welfare = match &loaded.truth {
                Some(t) => Some(welfare_of_assignment(t, &result.assignment).map_err(SolveError::from)?),
                None => None,
            };
            eprintln!(
                "{} samples, {} distinct; winner net: multiset size {}, {} tuples",
                sampled.samples,
                sampled.empirical.support_size(),
                result.multiset_size,
                result.net_size
            );
            let mut summary = format!("welfare {} signals {}", result.welfare, result.winner_tuples.len());
            if let Some(t) = true_welfare {
                summary.push_str(&format!(" true_welfare {t}"));
            }
            summary.push_str(&format!(" samples {} time {:.3}s", sampled.samples, start.elapsed().as_secs_f64()));
            let identity = infodesign::model::StateReduction::identity(loaded.prior.len());
            let mut file = AuctionScheme::from_result(result, &identity, k);
            file.seed = Some(seed);
            file.samples = Some(sampled.samples);
            file.true_welfare = true_welfare;
            emit(&SchemeFile::Auction(file), out.as_ref(), &summary)
        }
        Command::Verify { instance, scheme } => {
            let instance = parse_instance(&instance)?;
            let scheme = SchemeFile::read(&scheme)?;
            let report = verify(&instance, &scheme);
            if report.ok() {
                println!("ok recomputed {}", report.recomputed);
                Ok(())
            } else {
                for p in &report.problems {
                    eprintln!("{p}");
                }
                Err(Failure { code: 4, message: format!("{} problem(s) found", report.problems.len()) })
            }
        }
        Command::BruteAuction { file, k } => {
            let Instance::Auction { validated, .. } = parse_instance(&file)? else {
                return Err(FileError::Field(format!("{} is not an auction instance", file.display())).into());
            };
            let (welfare, assignment) = brute_force_auction(&validated.instance, k, DEFAULT_BRUTE_FORCE_CAP)?;
            let assignment = validated.reduction.expand_assignment(&assignment);
            println!("opt {welfare} assignment {assignment:?}");
            Ok(())
        }
        Command::BruteGame { file, epsilon, delta, grid, concept, net_size } => {
            let Instance::Game { validated, .. } = parse_instance(&file)? else {
                return Err(FileError::Field(format!("{} is not a game instance", file.display())).into());
            };
            let mut opts = GameSolveOptions::new(epsilon, delta, concept);
            opts.net_size = net_size;
            match brute_force_game_opt(&validated.instance, &opts, grid)? {
                Some(v) => println!("lower bound {v}"),
                None => println!("lower bound none (no grid decomposition has accepted profiles)"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
