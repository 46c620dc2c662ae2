//! JSON instance and scheme files, sampler specs and scheme verification.
//!
//! Tensors are stored flat in the in-memory layout (first player most
//! significant). Bidder, signal and state indices are 0-based throughout.
//! Output is canonical: fields in declaration order, floats in shortest
//! round-trip form, so reruns with the same inputs produce identical bytes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::auction::{
    welfare_of_assignment, AuctionSolveResult, FiniteMixture, UniformIid, ValuationSampler, WinnerTuple,
};
use crate::error::FileError;
use crate::game::{GameSolveOptions, GameSolveResult};
use crate::model::{
    validate_auction, validate_game, AuctionInstance, BayesianGame, MixedProfile, Signal, SignalingScheme,
    StateReduction, Tensor, Tolerances, Validated, ValuationMatrix,
};
use crate::net::{check_equilibrium, EquilibriumConcept};

/// Tolerance for embedded totals and decompositions in scheme files.
pub const VERIFY_TOL: f64 = 1e-6;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Game(GameFile),
    Auction(AuctionFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub num_players: usize,
    pub num_actions: usize,
    pub num_states: usize,
    pub prior: Vec<f64>,
    /// `payoffs[i][θ]`, each of length `m^n`.
    pub payoffs: Vec<Vec<Vec<f64>>>,
    /// `objective[θ]`, each of length `m^n`.
    pub objective: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionFile {
    pub num_bidders: usize,
    pub num_states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub prior: Vec<f64>,
    pub valuations: Vec<ValuationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationEntry {
    pub probability: f64,
    /// `n` rows of `M` values.
    pub values: Vec<Vec<f64>>,
}

fn expect_len(what: &str, got: usize, expected: usize, name: &str) -> Result<(), FileError> {
    if got == expected {
        Ok(())
    } else {
        Err(FileError::Field(format!("{what} has length {got}, expected {name} = {expected}")))
    }
}

impl GameFile {
    pub fn from_model(game: &BayesianGame) -> Self {
        GameFile {
            num_players: game.num_players,
            num_actions: game.num_actions,
            num_states: game.num_states(),
            prior: game.prior.clone(),
            payoffs: game.payoffs.iter().map(|p| p.iter().map(|t| t.data().to_vec()).collect()).collect(),
            objective: game.objective.iter().map(|t| t.data().to_vec()).collect(),
        }
    }

    /// Shape checks with field paths, then conversion. Value ranges are
    /// left to [`BayesianGame::check`].
    pub fn to_model(&self) -> Result<BayesianGame, FileError> {
        let (n, m, states) = (self.num_players, self.num_actions, self.num_states);
        if n == 0 {
            return Err(FileError::Field("num_players must be at least 1".into()));
        }
        if m == 0 {
            return Err(FileError::Field("num_actions must be at least 1".into()));
        }
        if states == 0 {
            return Err(FileError::Field("num_states must be at least 1".into()));
        }
        let cells = m
            .checked_pow(n as u32)
            .ok_or_else(|| FileError::Field(format!("num_actions^num_players = {m}^{n} overflows")))?;
        expect_len("prior", self.prior.len(), states, "num_states")?;
        expect_len("payoffs", self.payoffs.len(), n, "num_players")?;
        for (i, p) in self.payoffs.iter().enumerate() {
            expect_len(&format!("payoffs[{i}]"), p.len(), states, "num_states")?;
            for (th, t) in p.iter().enumerate() {
                expect_len(&format!("payoffs[{i}][{th}]"), t.len(), cells, "num_actions^num_players")?;
            }
        }
        expect_len("objective", self.objective.len(), states, "num_states")?;
        for (th, t) in self.objective.iter().enumerate() {
            expect_len(&format!("objective[{th}]"), t.len(), cells, "num_actions^num_players")?;
        }
        let tensor = |v: &Vec<f64>| Tensor::new(n, m, v.clone());
        Ok(BayesianGame {
            num_players: n,
            num_actions: m,
            prior: self.prior.clone(),
            payoffs: self.payoffs.iter().map(|p| p.iter().map(tensor).collect()).collect::<Result<_, _>>()?,
            objective: self.objective.iter().map(tensor).collect::<Result<_, _>>()?,
        })
    }
}

impl AuctionFile {
    pub fn from_model(auction: &AuctionInstance) -> Self {
        AuctionFile {
            num_bidders: auction.num_bidders,
            num_states: auction.num_states(),
            k: auction.signal_budget,
            prior: auction.prior.clone(),
            valuations: auction
                .valuations
                .iter()
                .map(|(v, p)| ValuationEntry { probability: *p, values: v.rows() })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<AuctionInstance, FileError> {
        let (n, states) = (self.num_bidders, self.num_states);
        if n == 0 {
            return Err(FileError::Field("num_bidders must be at least 1".into()));
        }
        if states == 0 {
            return Err(FileError::Field("num_states must be at least 1".into()));
        }
        expect_len("prior", self.prior.len(), states, "num_states")?;
        if self.valuations.is_empty() {
            return Err(FileError::Field("valuations is empty".into()));
        }
        let mut valuations = Vec::with_capacity(self.valuations.len());
        for (t, entry) in self.valuations.iter().enumerate() {
            expect_len(&format!("valuations[{t}].values"), entry.values.len(), n, "num_bidders")?;
            for (i, row) in entry.values.iter().enumerate() {
                expect_len(&format!("valuations[{t}].values[{i}]"), row.len(), states, "num_states")?;
            }
            valuations.push((ValuationMatrix::from_rows(&entry.values)?, entry.probability));
        }
        Ok(AuctionInstance { num_bidders: n, prior: self.prior.clone(), valuations, signal_budget: self.k })
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(|e| FileError::Syntax(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

/// A validated instance together with the raw form it came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Game { raw: BayesianGame, validated: Validated<BayesianGame> },
    Auction { raw: AuctionInstance, validated: Validated<AuctionInstance> },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Game { .. } => "game",
            Instance::Auction { .. } => "auction",
        }
    }
}

/// Parses and validates an instance document.
pub fn parse_instance_str(text: &str) -> Result<Instance, FileError> {
    match InstanceFile::from_json(text)? {
        InstanceFile::Game(g) => {
            let raw = g.to_model()?;
            let validated = validate_game(raw.clone())?;
            Ok(Instance::Game { raw, validated })
        }
        InstanceFile::Auction(a) => {
            let raw = a.to_model()?;
            let validated = validate_auction(raw.clone())?;
            Ok(Instance::Auction { raw, validated })
        }
    }
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance, FileError> {
    parse_instance_str(&read_file(path.as_ref())?)
}

fn read_file(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path).map_err(|source| FileError::Read { path: path.display().to_string(), source })
}

/// Pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types always serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), FileError> {
    let path = path.as_ref();
    std::fs::write(path, to_canonical_json(value))
        .map_err(|source| FileError::Write { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeFile {
    Game(GameScheme),
    Auction(AuctionScheme),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameScheme {
    pub objective: f64,
    pub signals: Vec<SignalRecord>,
    pub metadata: GameMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalRecord {
    pub alpha: f64,
    /// Over the instance's original states.
    pub posterior: Vec<f64>,
    pub profile: Vec<Vec<f64>>,
    pub objective_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameMetadata {
    pub epsilon: f64,
    pub delta: f64,
    pub concept: EquilibriumConcept,
    pub net_size: usize,
    #[serde(default)]
    pub stackelberg_leader: Option<usize>,
    #[serde(default)]
    pub reduce_signals: bool,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionScheme {
    /// State → signal, entries in `0..k`.
    pub assignment: Vec<usize>,
    /// Welfare on the distribution the solver saw (the empirical one when sampled).
    pub welfare: f64,
    pub winner_tuples: Vec<WinnerTuple>,
    pub k: usize,
    pub net_multiset_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Welfare on the true distribution, when the sampler's is explicit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_welfare: Option<f64>,
    pub version: String,
}

impl SchemeFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        serde_json::from_str(text).map_err(|e| FileError::Syntax(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FileError> {
        Self::from_json(&read_file(path.as_ref())?)
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

impl GameScheme {
    /// Packages a solver result, lifting posteriors back to the original
    /// state space.
    pub fn from_result(
        result: &GameSolveResult,
        reduction: &StateReduction,
        opts: &GameSolveOptions,
    ) -> Self {
        let signals = result
            .scheme
            .signals
            .iter()
            .zip(&result.signal_values)
            .map(|(s, &v)| SignalRecord {
                alpha: s.weight,
                posterior: reduction.expand(&s.posterior),
                profile: s.profile.as_ref().map(|p| p.strategies.clone()).unwrap_or_default(),
                objective_value: v,
            })
            .collect();
        GameScheme {
            objective: result.objective,
            signals,
            metadata: GameMetadata {
                epsilon: opts.epsilon,
                delta: opts.delta,
                concept: opts.concept,
                net_size: result.stats.multiset_size,
                stackelberg_leader: opts.stackelberg_leader,
                reduce_signals: opts.reduce_signals,
                version: VERSION.to_string(),
            },
        }
    }
}

impl AuctionScheme {
    pub fn from_result(result: &AuctionSolveResult, reduction: &StateReduction, k: usize) -> Self {
        AuctionScheme {
            assignment: reduction.expand_assignment(&result.assignment),
            welfare: result.welfare,
            winner_tuples: result.winner_tuples.clone(),
            k,
            net_multiset_size: result.multiset_size,
            seed: None,
            samples: None,
            true_welfare: None,
            version: VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Recomputed objective (games) or welfare (auctions).
    pub recomputed: f64,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Recomputes every total in `scheme` from its parts and checks the
/// decomposition and equilibrium invariants against `instance`.
pub fn verify(instance: &Instance, scheme: &SchemeFile) -> VerifyReport {
    match (instance, scheme) {
        (Instance::Game { raw, .. }, SchemeFile::Game(s)) => verify_game(raw, s),
        (Instance::Auction { raw, .. }, SchemeFile::Auction(s)) => verify_auction(raw, s),
        (i, _) => VerifyReport {
            recomputed: f64::NAN,
            problems: vec![format!("scheme kind does not match {} instance", i.kind())],
        },
    }
}

fn verify_game(game: &BayesianGame, s: &GameScheme) -> VerifyReport {
    let mut problems = Vec::new();
    let meta = &s.metadata;
    if !(meta.epsilon > 0.0 && meta.delta >= 0.0) {
        problems.push(format!("metadata has epsilon {} and delta {}", meta.epsilon, meta.delta));
    }
    if meta.stackelberg_leader.is_some_and(|l| l >= game.num_players) {
        problems.push("stackelberg leader out of range".into());
    }
    let tol = Tolerances::default();
    let slack = meta.epsilon + meta.delta;
    let excluded: Vec<usize> = meta.stackelberg_leader.into_iter().collect();
    let mut signals = Vec::new();
    let mut total = 0.0;
    for (idx, rec) in s.signals.iter().enumerate() {
        let profile = MixedProfile { strategies: rec.profile.clone() };
        if rec.posterior.len() != game.num_states() {
            problems.push(format!("signal {idx}: posterior has length {}", rec.posterior.len()));
            continue;
        }
        if profile.num_players() != game.num_players {
            problems.push(format!("signal {idx}: profile has {} players", profile.num_players()));
            continue;
        }
        if let Err(e) = profile.validate(Some(game.num_actions)) {
            problems.push(format!("signal {idx}: {e}"));
            continue;
        }
        if !(rec.alpha.is_finite() && rec.alpha >= 0.0) {
            problems.push(format!("signal {idx}: alpha {}", rec.alpha));
            continue;
        }
        let pg = match game.posterior_game(&rec.posterior) {
            Ok(pg) => pg,
            Err(e) => {
                problems.push(format!("signal {idx}: {e}"));
                continue;
            }
        };
        let value = pg.objective.expected(&profile);
        if (value - rec.objective_value).abs() > VERIFY_TOL {
            problems.push(format!("signal {idx}: objective_value {} but recomputed {value}", rec.objective_value));
        }
        if rec.alpha > tol.drop_eps {
            let check = check_equilibrium(&pg.payoffs, &profile, slack, meta.concept, &excluded, &tol);
            if !check.accepted {
                problems.push(format!(
                    "signal {idx}: profile is not a {slack}-{} (regret {})",
                    meta.concept, check.regret
                ));
            }
        }
        total += rec.alpha * value;
        signals.push(Signal { weight: rec.alpha, posterior: rec.posterior.clone(), profile: Some(profile) });
    }
    let scheme = SignalingScheme { signals, assignment: None };
    if let Err(e) = scheme.check_decomposition(&game.prior, VERIFY_TOL) {
        problems.push(e.to_string());
    }
    if (total - s.objective).abs() > VERIFY_TOL {
        problems.push(format!("objective {} but recomputed {total}", s.objective));
    }
    VerifyReport { recomputed: total, problems }
}

fn verify_auction(auction: &AuctionInstance, s: &AuctionScheme) -> VerifyReport {
    let mut problems = Vec::new();
    if s.k == 0 {
        problems.push("k must be at least 1".into());
    }
    if let Some(bad) = s.assignment.iter().find(|&&a| a >= s.k) {
        problems.push(format!("assignment uses signal {bad} but k = {}", s.k));
    }
    if s.winner_tuples.len() > s.k {
        problems.push(format!("{} winner tuples for k = {}", s.winner_tuples.len(), s.k));
    }
    let sampled = s.samples.is_some();
    if !sampled {
        // Sampled schemes name winners per empirical matrix, not per support entry.
        for (idx, w) in s.winner_tuples.iter().enumerate() {
            if w.winners.len() != auction.support_size() || w.winners.iter().any(|&b| b >= auction.num_bidders) {
                problems.push(format!("winner tuple {idx} does not fit the instance"));
            }
        }
    }
    let recomputed = match welfare_of_assignment(auction, &s.assignment) {
        Ok(w) => w,
        Err(e) => {
            problems.push(e.to_string());
            return VerifyReport { recomputed: f64::NAN, problems };
        }
    };
    let claimed = if sampled { s.true_welfare } else { Some(s.welfare) };
    if let Some(c) = claimed {
        if (c - recomputed).abs() > VERIFY_TOL {
            problems.push(format!("welfare {c} but recomputed {recomputed}"));
        }
    }
    VerifyReport { recomputed, problems }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplerSpec {
    UniformIid { num_bidders: usize, num_states: usize },
    Mixture(PathBuf),
}

/// `uniform-iid:n=<n>,M=<M>` or `mixture:<path>`.
pub fn parse_sampler_spec(spec: &str) -> Result<SamplerSpec, FileError> {
    let bad = |msg: String| FileError::SamplerSpec(msg);
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad(format!("`{spec}` has no `kind:` prefix")))?;
    match kind {
        "uniform-iid" => {
            let (mut n, mut m) = (None, None);
            for part in rest.split(',') {
                let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
                let value: usize = value.parse().map_err(|_| bad(format!("`{value}` is not a count")))?;
                if value == 0 {
                    return Err(bad(format!("{key} must be at least 1")));
                }
                let slot = match key {
                    "n" => &mut n,
                    "M" => &mut m,
                    other => return Err(bad(format!("unknown key `{other}`"))),
                };
                if slot.replace(value).is_some() {
                    return Err(bad(format!("duplicate key `{key}`")));
                }
            }
            match (n, m) {
                (Some(num_bidders), Some(num_states)) => Ok(SamplerSpec::UniformIid { num_bidders, num_states }),
                _ => Err(bad("uniform-iid needs both n and M".into())),
            }
        }
        "mixture" if !rest.is_empty() => Ok(SamplerSpec::Mixture(PathBuf::from(rest))),
        "mixture" => Err(bad("mixture needs a file path".into())),
        other => Err(bad(format!("unknown sampler `{other}` (expected uniform-iid or mixture)"))),
    }
}

/// A ready sampler, the prior to pair it with and, for mixtures, the
/// explicit distribution it draws from.
pub struct LoadedSampler {
    pub sampler: Box<dyn ValuationSampler>,
    pub prior: Vec<f64>,
    pub truth: Option<AuctionInstance>,
}

/// Uniform-iid uses the uniform prior; a mixture uses its file's prior.
pub fn load_sampler(spec: &SamplerSpec) -> Result<LoadedSampler, FileError> {
    match spec {
        SamplerSpec::UniformIid { num_bidders, num_states } => Ok(LoadedSampler {
            sampler: Box::new(UniformIid { num_bidders: *num_bidders, num_states: *num_states }),
            prior: vec![1.0 / *num_states as f64; *num_states],
            truth: None,
        }),
        SamplerSpec::Mixture(path) => match parse_instance(path)? {
            Instance::Auction { raw, .. } => {
                let mixture =
                    FiniteMixture::new(raw.valuations.clone()).map_err(|e| FileError::Field(e.to_string()))?;
                Ok(LoadedSampler { sampler: Box::new(mixture), prior: raw.prior.clone(), truth: Some(raw) })
            }
            Instance::Game { .. } => Err(FileError::SamplerSpec("mixture file must hold an auction".into())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{solve_auction_signaling, WinnerNetParams};
    use crate::game::solve_game_signaling;
    use crate::model::fixtures::{a1, g1, random_auction, random_game};
    use proptest::prelude::*;

    const G1_JSON: &str = r#"{"kind":"game","num_players":1,"num_actions":2,"num_states":2,
        "prior":[0.5,0.5],"payoffs":[[[1,0],[0,1]]],"objective":[[1,0],[0,1]]}"#;

    #[test]
    fn parses_g1() {
        match parse_instance_str(G1_JSON).unwrap() {
            Instance::Game { raw, validated } => {
                assert_eq!(raw, g1());
                assert!(validated.reduction.is_identity());
            }
            other => panic!("expected a game, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"kind":"game","num_players":1,"num_actions":2,"num_states":2,
            "prior":[0.5,0.5],"payoffs":[[[1,0],[0,1]]]}"#;
        let err = parse_instance_str(text).unwrap_err().to_string();
        assert!(err.contains("objective"), "{err}");
    }

    #[test]
    fn field_level_errors() {
        let wrong_prior = G1_JSON.replace("[0.5,0.5]", "[1.0]");
        let err = parse_instance_str(&wrong_prior).unwrap_err().to_string();
        assert!(err.contains("prior has length 1"), "{err}");

        let wrong_tensor = G1_JSON.replace(r#""objective":[[1,0],[0,1]]"#, r#""objective":[[1,0],[0,1,0]]"#);
        let err = parse_instance_str(&wrong_tensor).unwrap_err().to_string();
        assert!(err.contains("objective[1]"), "{err}");

        let out_of_range = G1_JSON.replace("[[[1,0]", "[[[1.5,0]");
        let err = parse_instance_str(&out_of_range).unwrap_err().to_string();
        assert!(err.contains("outside [-1,1]"), "{err}");

        let not_prob = G1_JSON.replace("[0.5,0.5]", "[0.6,0.6]");
        let err = parse_instance_str(&not_prob).unwrap_err().to_string();
        assert!(err.contains("prior does not sum to 1"), "{err}");

        assert!(matches!(parse_instance_str("{"), Err(FileError::Syntax(_))));
        assert!(matches!(parse_instance_str(r#"{"kind":"poker"}"#), Err(FileError::Syntax(_))));
        let extra = G1_JSON.replace(r#""kind":"game","#, r#""kind":"game","colour":1,"#);
        assert!(matches!(parse_instance_str(&extra), Err(FileError::Syntax(_))));
    }

    #[test]
    fn auction_parsing_and_zero_states() {
        let text = r#"{"kind":"auction","num_bidders":2,"num_states":3,"k":2,"prior":[0.5,0,0.5],
            "valuations":[{"probability":1,"values":[[1,0.3,0],[0,0.2,1]]}]}"#;
        match parse_instance_str(text).unwrap() {
            Instance::Auction { raw, validated } => {
                assert_eq!(raw.num_states(), 3);
                assert_eq!(validated.instance.num_states(), 2);
                assert_eq!(validated.reduction.kept, vec![0, 2]);
                assert_eq!(raw.signal_budget, Some(2));
            }
            other => panic!("expected an auction, got {other:?}"),
        }
        let bad_row = text.replace("[1,0.3,0]", "[1,0.3]");
        let err = parse_instance_str(&bad_row).unwrap_err().to_string();
        assert!(err.contains("valuations[0].values[0]"), "{err}");
        let bad_k = text.replace(r#""k":2"#, r#""k":4"#);
        assert!(parse_instance_str(&bad_k).is_err());
    }

    #[test]
    fn game_scheme_round_trip_and_verify() {
        let game = random_game(2, 2, 3, 4);
        let validated = validate_game(game.clone()).unwrap();
        let opts = GameSolveOptions::new(0.4, 0.0, EquilibriumConcept::Nash).with_net_size(2);
        let result = solve_game_signaling(&validated.instance, &opts).unwrap();
        let scheme = SchemeFile::Game(GameScheme::from_result(&result, &validated.reduction, &opts));
        let text = scheme.to_json();
        let back = SchemeFile::from_json(&text).unwrap();
        assert_eq!(back, scheme);
        assert_eq!(back.to_json(), text);
        let inst = Instance::Game { raw: game, validated };
        let report = verify(&inst, &back);
        assert!(report.ok(), "{:?}", report.problems);

        let SchemeFile::Game(mut tampered) = back else { unreachable!() };
        tampered.objective += 0.1;
        assert!(!verify(&inst, &SchemeFile::Game(tampered.clone())).ok());
        tampered.objective -= 0.1;
        tampered.signals[0].posterior.reverse();
        assert!(!verify(&inst, &SchemeFile::Game(tampered)).ok());
    }

    #[test]
    fn game_scheme_lifts_posteriors() {
        let mut game = g1();
        game.prior = vec![0.5, 0.5];
        let raw = BayesianGame {
            prior: vec![0.5, 0.0, 0.5],
            payoffs: vec![vec![game.payoffs[0][0].clone(), game.payoffs[0][0].clone(), game.payoffs[0][1].clone()]],
            objective: vec![game.objective[0].clone(), game.objective[0].clone(), game.objective[1].clone()],
            ..game
        };
        let validated = validate_game(raw.clone()).unwrap();
        let opts = GameSolveOptions::new(0.5, 0.0, EquilibriumConcept::Nash).with_net_size(1);
        let result = solve_game_signaling(&validated.instance, &opts).unwrap();
        let scheme = GameScheme::from_result(&result, &validated.reduction, &opts);
        assert!((scheme.objective - 1.0).abs() < 1e-6);
        assert!(scheme.signals.iter().all(|s| s.posterior.len() == 3 && s.posterior[1] == 0.0));
        let report = verify(&Instance::Game { raw, validated }, &SchemeFile::Game(scheme));
        assert!(report.ok(), "{:?}", report.problems);
    }

    #[test]
    fn auction_scheme_verify() {
        let a = a1();
        let validated = validate_auction(a.clone()).unwrap();
        let r = solve_auction_signaling(&a, 2, &WinnerNetParams::explicit(2).unwrap()).unwrap();
        let scheme = AuctionScheme::from_result(&r, &validated.reduction, 2);
        assert_eq!(scheme.welfare, 1.0);
        let inst = Instance::Auction { raw: a, validated };
        assert!(verify(&inst, &SchemeFile::Auction(scheme.clone())).ok());

        let mut off = scheme.clone();
        off.welfare += 0.1;
        assert!(!verify(&inst, &SchemeFile::Auction(off)).ok());
        let mut overflow = scheme.clone();
        overflow.assignment = vec![0, 2];
        assert!(!verify(&inst, &SchemeFile::Auction(overflow)).ok());
        let mut short = scheme;
        short.assignment = vec![0];
        assert!(!verify(&inst, &SchemeFile::Auction(short)).ok());

        let game = Instance::Game { raw: g1(), validated: validate_game(g1()).unwrap() };
        let r2 = solve_auction_signaling(&a1(), 1, &WinnerNetParams::explicit(2).unwrap()).unwrap();
        let s2 = AuctionScheme::from_result(&r2, &StateReduction::identity(2), 1);
        assert!(!verify(&game, &SchemeFile::Auction(s2)).ok());
    }

    #[test]
    fn sampler_specs() {
        assert_eq!(
            parse_sampler_spec("uniform-iid:n=3,M=4").unwrap(),
            SamplerSpec::UniformIid { num_bidders: 3, num_states: 4 }
        );
        assert_eq!(
            parse_sampler_spec("uniform-iid:M=4,n=3").unwrap(),
            SamplerSpec::UniformIid { num_bidders: 3, num_states: 4 }
        );
        assert_eq!(parse_sampler_spec("mixture:a/b.json").unwrap(), SamplerSpec::Mixture("a/b.json".into()));
        for bad in [
            "",
            "uniform-iid",
            "uniform-iid:n=3",
            "uniform-iid:n=3,M=0",
            "uniform-iid:n=3,M=2,n=1",
            "uniform-iid:n=3,m=2",
            "uniform-iid:n=-1,M=2",
            "mixture:",
            "gaussian:n=1",
        ] {
            assert!(parse_sampler_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_output_is_stable() {
        let a = random_auction(3, 4, 2, 8);
        let f = InstanceFile::Auction(AuctionFile::from_model(&a));
        let text = f.to_json();
        assert_eq!(InstanceFile::from_json(&text).unwrap().to_json(), text);
        match parse_instance_str(&text).unwrap() {
            Instance::Auction { raw, .. } => assert_eq!(raw, a),
            other => panic!("{other:?}"),
        }
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1.0f64..=1.0]
    }

    fn instance_file() -> impl Strategy<Value = InstanceFile> {
        let game = (1usize..=2, 1usize..=3, 1usize..=3).prop_flat_map(|(n, m, states)| {
            let cells = m.pow(n as u32);
            let tensor = move || proptest::collection::vec(finite(), cells);
            (
                proptest::collection::vec(finite(), states),
                proptest::collection::vec(proptest::collection::vec(tensor(), states), n),
                proptest::collection::vec(tensor(), states),
            )
                .prop_map(move |(prior, payoffs, objective)| {
                    InstanceFile::Game(GameFile {
                        num_players: n,
                        num_actions: m,
                        num_states: states,
                        prior,
                        payoffs,
                        objective,
                    })
                })
        });
        let auction = (1usize..=3, 1usize..=4, 1usize..=3).prop_flat_map(|(n, states, r)| {
            let entry = (finite(), proptest::collection::vec(proptest::collection::vec(finite(), states), n))
                .prop_map(|(probability, values)| ValuationEntry { probability, values });
            (
                proptest::option::of(1usize..=states),
                proptest::collection::vec(finite(), states),
                proptest::collection::vec(entry, r),
            )
                .prop_map(move |(k, prior, valuations)| {
                    InstanceFile::Auction(AuctionFile { num_bidders: n, num_states: states, k, prior, valuations })
                })
        });
        prop_oneof![game, auction]
    }

    proptest! {
        #[test]
        fn instance_files_round_trip(f in instance_file()) {
            let text = f.to_json();
            let back = InstanceFile::from_json(&text).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_json(), text);
        }

        #[test]
        fn valid_models_round_trip(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=3, states in 1usize..=3) {
            let g = random_game(n, m, states, seed);
            let text = InstanceFile::Game(GameFile::from_model(&g)).to_json();
            match parse_instance_str(&text).unwrap() {
                Instance::Game { raw, .. } => prop_assert_eq!(raw, g),
                _ => prop_assert!(false),
            }
        }
    }
}
