//! Signaling in explicit Bayesian normal-form games.
//!
//! The solver enumerates net profiles, keeps those that some posterior can
//! induce as an (ε+δ)-equilibrium, and then chooses one posterior per kept
//! profile by a single LP over `γ_σ = α_σ μ_σ`:
//!
//! ```text
//! maximize    Σ_σ w_σ · γ_σ
//! subject to  Σ_σ γ_σ = λ
//!             A^σ γ_σ ≤ (1ᵀγ_σ) b^σ     for every σ
//!             γ ≥ 0
//! ```
//!
//! where `A^σ μ ≤ b^σ` is the profile's posterior polytope and
//! `w_σ(θ) = E_{s∼x^σ} F(θ, s)`.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::SolveError;
use crate::lp::{self, LinearProgram, LpResult};
use crate::model::{BayesianGame, MixedProfile, Signal, SignalingScheme, Tolerances};
use crate::net::{
    check_equilibrium, enumerate_net, enumerate_profiles, EquilibriumConcept, NetParams,
    DEFAULT_ENUMERATION_CAP,
};
use crate::polytope::{build_polytope, polytope_nonempty, PosteriorPolytope};

/// Largest dense simplex tableau the decomposition LP may build (about 400 MB).
pub const LP_CELL_CAP: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolveOptions {
    pub epsilon: f64,
    pub delta: f64,
    pub concept: EquilibriumConcept,
    /// Net multiset size; `None` uses the formula in [`NetParams::worst_case`].
    pub net_size: Option<usize>,
    /// Player whose incentive constraints are dropped (Stackelberg leader).
    pub stackelberg_leader: Option<usize>,
    pub reduce_signals: bool,
    pub enumeration_cap: u128,
    pub tolerances: Tolerances,
}

impl GameSolveOptions {
    pub fn new(epsilon: f64, delta: f64, concept: EquilibriumConcept) -> Self {
        GameSolveOptions {
            epsilon,
            delta,
            concept,
            net_size: None,
            stackelberg_leader: None,
            reduce_signals: false,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_net_size(mut self, s: usize) -> Self {
        self.net_size = Some(s);
        self
    }

    fn check(&self, game: &BayesianGame) -> Result<(), SolveError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(SolveError::Parameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(SolveError::Parameter(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if let Some(l) = self.stackelberg_leader {
            if l >= game.num_players {
                return Err(SolveError::Parameter(format!(
                    "stackelberg leader {l} out of range for {} players",
                    game.num_players
                )));
            }
        }
        Ok(())
    }

    pub fn net_params(&self, game: &BayesianGame) -> Result<NetParams, SolveError> {
        match self.net_size {
            Some(s) => NetParams::explicit(s),
            None => NetParams::worst_case(game.num_players, game.num_actions, self.epsilon),
        }
    }

    pub fn excluded_players(&self) -> Vec<usize> {
        self.stackelberg_leader.into_iter().collect()
    }
}

/// A net profile together with its posterior polytope and objective weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub profile: MixedProfile,
    pub polytope: PosteriorPolytope,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalDiagnostics {
    /// Deviation gain of the attached profile at the signal's posterior.
    pub regret: f64,
    pub polytope_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetStats {
    pub multiset_size: usize,
    pub net_size: usize,
    pub profiles: usize,
    pub kept: usize,
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolveResult {
    pub scheme: SignalingScheme,
    pub objective: f64,
    /// `F(μ_σ, x^σ)` per retained signal.
    pub signal_values: Vec<f64>,
    pub diagnostics: Vec<SignalDiagnostics>,
    pub stats: NetStats,
}

/// Net profiles whose (ε+δ) polytope is non-empty, in enumeration order.
pub fn build_candidates(game: &BayesianGame, opts: &GameSolveOptions) -> Result<(Vec<Candidate>, NetStats), SolveError> {
    opts.check(game)?;
    let params = opts.net_params(game)?;
    let net = enumerate_net(game.num_actions, params.multiset_size, opts.enumeration_cap)?;
    let profiles = enumerate_profiles(&net, game.num_players, opts.enumeration_cap)?;
    let slack = opts.epsilon + opts.delta;
    let excluded = opts.excluded_players();
    let drop_eps = opts.tolerances.drop_eps;

    let built: Vec<Result<Option<Candidate>, SolveError>> = profiles
        .par_iter()
        .map(|x| {
            let polytope = build_polytope(game, x, slack, opts.concept, &excluded, drop_eps);
            if !polytope_nonempty(&polytope)? {
                return Ok(None);
            }
            let weights = game.objective_weights(x);
            Ok(Some(Candidate { profile: x.clone(), polytope, weights }))
        })
        .collect();

    // A profile is selected for at most one signal.
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates = Vec::new();
    for c in built {
        if let Some(c) = c? {
            let key: Vec<u64> = c.profile.strategies.iter().flatten().map(|v| v.to_bits()).collect();
            if seen.insert(key) {
                candidates.push(c);
            }
        }
    }
    let stats = NetStats {
        multiset_size: params.multiset_size,
        net_size: net.len(),
        profiles: profiles.len(),
        kept: candidates.len(),
        discarded: profiles.len() - candidates.len(),
    };
    Ok((candidates, stats))
}

/// Solves the decomposition LP over `candidates` and recovers `(α_σ, μ_σ)`.
/// Signals with `α_σ < drop_eps` are dropped; the returned value is
/// `Σ_σ α_σ w_σ·μ_σ` recomputed from the recovered scheme.
pub fn assemble_scheme(
    prior: &[f64],
    candidates: &[Candidate],
    tol: &Tolerances,
) -> Result<(SignalingScheme, f64), SolveError> {
    let states = prior.len();
    let t = candidates.len();
    if t == 0 {
        return Err(SolveError::NoDecomposition);
    }
    let nvars = t * states;
    let ub: usize = candidates.iter().map(|c| c.polytope.rows.len()).sum();
    let cells = (ub + states + 1) as u128 * (nvars + ub + states + 1) as u128;
    if cells > LP_CELL_CAP {
        return Err(SolveError::TooLarge { what: "decomposition LP tableau", required: cells, cap: LP_CELL_CAP });
    }
    let mut objective = vec![0.0; nvars];
    for (s, c) in candidates.iter().enumerate() {
        objective[s * states..(s + 1) * states].copy_from_slice(&c.weights);
    }
    let mut program = LinearProgram::new(objective);
    for theta in 0..states {
        let mut row = vec![0.0; nvars];
        for s in 0..t {
            row[s * states + theta] = 1.0;
        }
        program.add_eq(row, prior[theta]);
    }
    for (s, c) in candidates.iter().enumerate() {
        if c.polytope.trivially_empty {
            return Err(SolveError::Internal("candidate with empty polytope".into()));
        }
        for (r, b) in c.polytope.rows.iter().zip(&c.polytope.rhs) {
            let mut row = vec![0.0; nvars];
            for theta in 0..states {
                row[s * states + theta] = r[theta] - b;
            }
            program.add_ub(row, 0.0);
        }
    }
    let solution = match lp::solve_lp(&program)? {
        LpResult::Optimal(sol) => sol,
        LpResult::Infeasible => return Err(SolveError::NoDecomposition),
        LpResult::Unbounded => {
            return Err(SolveError::Internal("decomposition LP reported unbounded".into()))
        }
    };

    let mut signals = Vec::new();
    let mut value = 0.0;
    for (s, c) in candidates.iter().enumerate() {
        let gamma = &solution.x[s * states..(s + 1) * states];
        let alpha: f64 = gamma.iter().sum();
        if alpha < tol.drop_eps {
            continue;
        }
        let posterior: Vec<f64> = gamma.iter().map(|g| g / alpha).collect();
        value += alpha * dot(&c.weights, &posterior);
        signals.push(Signal { weight: alpha, posterior, profile: Some(c.profile.clone()) });
    }
    Ok((SignalingScheme { signals, assignment: None }, value))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full pipeline: net → polytopes → decomposition LP → optional reduction.
pub fn solve_game_signaling(game: &BayesianGame, opts: &GameSolveOptions) -> Result<GameSolveResult, SolveError> {
    let (candidates, stats) = build_candidates(game, opts)?;
    let (mut scheme, _) = assemble_scheme(&game.prior, &candidates, &opts.tolerances)?;
    let mut values: Vec<f64> = scheme
        .signals
        .iter()
        .map(|s| dot(&game.objective_weights(s.profile.as_ref().expect("profile attached")), &s.posterior))
        .collect();
    if opts.reduce_signals {
        let (reduced, reduced_values) = reduce_signals(&scheme, &values, &opts.tolerances);
        scheme = reduced;
        values = reduced_values;
    }

    let slack = opts.epsilon + opts.delta;
    let excluded = opts.excluded_players();
    let mut diagnostics = Vec::with_capacity(scheme.len());
    for (idx, signal) in scheme.signals.iter().enumerate() {
        let profile = signal.profile.as_ref().expect("profile attached");
        let pg = game.posterior_game(&signal.posterior)?;
        let check = check_equilibrium(&pg.payoffs, profile, slack, opts.concept, &excluded, &opts.tolerances);
        if !check.accepted {
            return Err(SolveError::Internal(format!(
                "signal {idx} (weight {}) has regret {} above {}",
                signal.weight, check.regret, slack
            )));
        }
        let rows = candidates
            .iter()
            .find(|c| &c.profile == profile)
            .map_or(0, |c| c.polytope.rows.len());
        diagnostics.push(SignalDiagnostics { regret: check.regret, polytope_rows: rows });
    }
    let objective = game.evaluate_objective(&scheme)?;
    Ok(GameSolveResult { scheme, objective, signal_values: values, diagnostics, stats })
}

/// Rewrites the scheme on at most `M + 1` signals without changing
/// `Σ α_σ μ_σ` or `Σ α_σ v_σ`.
///
/// The points `(μ_σ, v_σ)` live in an `M`-dimensional affine space. While
/// they are affinely dependent, a dependency `β` (`Σβ = 0`, `Σβμ = 0`,
/// `Σβv = 0`) is found by row reduction and weight is shifted along it until
/// some `α_σ` reaches zero.
pub fn reduce_signals(scheme: &SignalingScheme, values: &[f64], tol: &Tolerances) -> (SignalingScheme, Vec<f64>) {
    let mut signals: Vec<Signal> = scheme.signals.clone();
    let mut vals: Vec<f64> = values.to_vec();
    loop {
        let Some(beta) = affine_dependency(&signals, &vals) else {
            break;
        };
        // Largest step keeping α ≥ 0; β has a positive entry since Σβ = 0.
        let mut step = f64::INFINITY;
        let mut hit = usize::MAX;
        for (i, (&b, s)) in beta.iter().zip(&signals).enumerate() {
            if b > 0.0 {
                let r = s.weight / b;
                if r < step {
                    step = r;
                    hit = i;
                }
            }
        }
        if hit == usize::MAX {
            break;
        }
        for (s, &b) in signals.iter_mut().zip(&beta) {
            s.weight -= step * b;
        }
        signals[hit].weight = 0.0;
        let mut keep = Vec::with_capacity(signals.len());
        let mut keep_vals = Vec::with_capacity(signals.len());
        for (s, v) in signals.into_iter().zip(vals) {
            if s.weight > tol.drop_eps {
                keep.push(s);
                keep_vals.push(v);
            }
        }
        signals = keep;
        vals = keep_vals;
    }
    (SignalingScheme { signals, assignment: None }, vals)
}

/// A nonzero `β` with `P β = 0`, where the columns of `P` are
/// `(1, μ_σ, v_σ)`, or `None` when the columns are independent.
fn affine_dependency(signals: &[Signal], values: &[f64]) -> Option<Vec<f64>> {
    let t = signals.len();
    if t < 2 {
        return None;
    }
    let states = signals[0].posterior.len();
    let rows = states + 2;
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(rows);
    p.push(vec![1.0; t]);
    for theta in 0..states {
        p.push(signals.iter().map(|s| s.posterior[theta]).collect());
    }
    p.push(values.to_vec());

    let scale = p.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let pivot_tol = 1e-11 * scale;
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    let mut free = None;
    for c in 0..t {
        if r == rows {
            free = Some(c);
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, p[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= pivot_tol {
            free = Some(c);
            break;
        }
        p.swap(r, best);
        let pv = p[r][c];
        for v in p[r].iter_mut() {
            *v /= pv;
        }
        for i in 0..rows {
            if i != r && p[i][c] != 0.0 {
                let f = p[i][c];
                let pivot_row = p[r].clone();
                for (v, pr) in p[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free = free?;
    let mut beta = vec![0.0; t];
    beta[free] = 1.0;
    for (row, &c) in pivot_cols.iter().enumerate() {
        beta[c] = -p[row][free];
    }
    Some(beta)
}

/// Value of the best net profile accepted at each fixed posterior, using
/// the candidates' polytopes: `(full revelation, no revelation)`. Either is
/// `None` when some required posterior admits no candidate.
pub fn revelation_baselines(game: &BayesianGame, candidates: &[Candidate]) -> (Option<f64>, Option<f64>) {
    const INSIDE: f64 = 1e-12;
    let states = game.num_states();
    let mut full = Some(0.0);
    for theta in 0..states {
        let mut e = vec![0.0; states];
        e[theta] = 1.0;
        let best = candidates
            .iter()
            .filter(|c| c.polytope.contains(&e, INSIDE))
            .map(|c| c.weights[theta])
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        full = match (full, best) {
            (Some(f), Some(b)) => Some(f + game.prior[theta] * b),
            _ => None,
        };
    }
    let none = candidates
        .iter()
        .filter(|c| c.polytope.contains(&game.prior, INSIDE))
        .map(|c| dot(&c.weights, &game.prior))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    (full, none)
}

/// Grid-search lower bound on the best two-signal scheme for a two-state
/// game, where each posterior carries its best net profile accepted as a
/// δ-equilibrium. Returns `None` if no grid decomposition admits accepted
/// profiles at both ends. Only meant as a test oracle.
pub fn brute_force_game_opt(
    game: &BayesianGame,
    opts: &GameSolveOptions,
    grid: usize,
) -> Result<Option<f64>, SolveError> {
    if game.num_states() != 2 {
        return Err(SolveError::Parameter(format!(
            "grid oracle supports exactly 2 states, got {}",
            game.num_states()
        )));
    }
    if grid == 0 {
        return Err(SolveError::Parameter("grid must be at least 1".into()));
    }
    opts.check(game)?;
    let params = opts.net_params(game)?;
    let net = enumerate_net(game.num_actions, params.multiset_size, opts.enumeration_cap)?;
    let profiles = enumerate_profiles(&net, game.num_players, opts.enumeration_cap)?;
    let weights: Vec<Vec<f64>> = profiles.iter().map(|x| game.objective_weights(x)).collect();
    let excluded = opts.excluded_players();

    let mut points: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    points.push(game.prior[0]);
    let best_at = |p: f64| -> Result<Option<f64>, SolveError> {
        let mu = [p, 1.0 - p];
        let pg = game.posterior_game(&mu)?;
        Ok(profiles
            .iter()
            .zip(&weights)
            .filter(|(x, _)| {
                check_equilibrium(&pg.payoffs, x, opts.delta, opts.concept, &excluded, &opts.tolerances).accepted
            })
            .map(|(_, w)| dot(w, &mu))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))))
    };
    let values: Vec<Option<f64>> = points.iter().map(|&p| best_at(p)).collect::<Result<_, _>>()?;

    let lam = game.prior[0];
    let mut best: Option<f64> = None;
    for (i, &p) in points.iter().enumerate() {
        if p > lam {
            continue;
        }
        for (j, &q) in points.iter().enumerate() {
            if q < lam {
                continue;
            }
            let (Some(vp), Some(vq)) = (values[i], values[j]) else {
                continue;
            };
            let v = if q == p {
                vp
            } else {
                let a = (q - lam) / (q - p);
                a * vp + (1.0 - a) * vq
            };
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    Ok(best)
}
