//! Domain types: Bayesian games, auction instances, mixed profiles and
//! signaling schemes, plus validation and multilinear payoff evaluation.
//!
//! Tensors over `[m]^n` are stored flat in row-major order with player 0's
//! action as the most significant index:
//! `index(s) = Σ_i s_i · m^(n-1-i)`.

use crate::error::ModelError;

/// Tolerance used when checking that probability vectors sum to one at
/// validation time.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Constraint violation accepted from the LP solver.
    pub feasibility_eps: f64,
    /// Weights below this are treated as zero.
    pub drop_eps: f64,
    /// Additive slack on equilibrium checks.
    pub verify_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { feasibility_eps: 1e-7, drop_eps: 1e-12, verify_eps: 1e-6 }
    }
}

/// A real-valued tensor over the pure profiles `[m]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    num_players: usize,
    num_actions: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(num_players: usize, num_actions: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        let expected = profile_count(num_players, num_actions)?;
        if data.len() != expected {
            return Err(ModelError::Shape(format!(
                "tensor has {} entries, expected {}^{} = {}",
                data.len(),
                num_actions,
                num_players,
                expected
            )));
        }
        Ok(Tensor { num_players, num_actions, data })
    }

    pub fn zeros(num_players: usize, num_actions: usize) -> Self {
        let len = num_actions.pow(num_players as u32);
        Tensor { num_players, num_actions, data: vec![0.0; len] }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, actions: &[usize]) -> f64 {
        self.data[flat_index(actions, self.num_actions)]
    }

    /// Multilinear contraction `Σ_s Π_i x_i(s_i) · T(s)`.
    pub fn expected(&self, profile: &MixedProfile) -> f64 {
        debug_assert_eq!(profile.num_players(), self.num_players);
        // Contract the least significant axis (last player) first.
        let m = self.num_actions;
        let mut cur: Vec<f64> = self.data.clone();
        for player in (0..self.num_players).rev() {
            let x = &profile.strategies[player];
            cur = cur.chunks_exact(m).map(|chunk| dot(chunk, x)).collect();
        }
        cur[0]
    }

    /// Payoffs `T(j, x_{-i})` for every pure action `j` of `player`.
    pub fn deviation_payoffs(&self, profile: &MixedProfile, player: usize) -> Vec<f64> {
        let m = self.num_actions;
        let n = self.num_players;
        let mut out = vec![0.0; m];
        let mut actions = vec![0usize; n];
        for &value in &self.data {
            let mut weight = 1.0;
            for (other, &a) in actions.iter().enumerate() {
                if other != player {
                    weight *= profile.strategies[other][a];
                }
            }
            if weight != 0.0 {
                out[actions[player]] += weight * value;
            }
            advance(&mut actions, m);
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Odometer increment of a pure profile in row-major order.
pub(crate) fn advance(actions: &mut [usize], m: usize) {
    for a in actions.iter_mut().rev() {
        *a += 1;
        if *a < m {
            return;
        }
        *a = 0;
    }
}

pub fn flat_index(actions: &[usize], num_actions: usize) -> usize {
    actions.iter().fold(0, |acc, &a| acc * num_actions + a)
}

fn profile_count(num_players: usize, num_actions: usize) -> Result<usize, ModelError> {
    (0..num_players).try_fold(1usize, |acc, _| acc.checked_mul(num_actions)).ok_or_else(|| {
        ModelError::Shape(format!("{num_actions}^{num_players} profiles overflow"))
    })
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub strategies: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(strategies: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let profile = MixedProfile { strategies };
        profile.validate(None)?;
        Ok(profile)
    }

    /// Every player plays the given pure action.
    pub fn pure(actions: &[usize], num_actions: usize) -> Self {
        let strategies = actions
            .iter()
            .map(|&a| {
                let mut x = vec![0.0; num_actions];
                x[a] = 1.0;
                x
            })
            .collect();
        MixedProfile { strategies }
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn validate(&self, num_actions: Option<usize>) -> Result<(), ModelError> {
        if self.strategies.is_empty() {
            return Err(ModelError::Shape("profile has no players".into()));
        }
        for (i, x) in self.strategies.iter().enumerate() {
            if let Some(m) = num_actions {
                if x.len() != m {
                    return Err(ModelError::Shape(format!(
                        "strategy of player {i} has length {}, expected {m}",
                        x.len()
                    )));
                }
            }
            check_distribution(x, PROB_SUM_TOL, &format!("strategy of player {i}"))?;
        }
        Ok(())
    }
}

pub(crate) fn check_distribution(v: &[f64], tol: f64, what: &str) -> Result<(), ModelError> {
    if v.is_empty() {
        return Err(ModelError::Shape(format!("{what} is empty")));
    }
    if let Some(bad) = v.iter().find(|p| !p.is_finite() || **p < -tol) {
        return Err(ModelError::Range(format!("{what} has invalid entry {bad}")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(ModelError::Range(format!("{what} does not sum to 1 (sum = {sum})")));
    }
    Ok(())
}

fn check_unit_range(v: &[f64], lo: f64, what: &str) -> Result<(), ModelError> {
    match v.iter().find(|x| !x.is_finite() || **x < lo || **x > 1.0) {
        Some(bad) => Err(ModelError::Range(format!("{what} outside [{lo},1]: {bad}"))),
        None => Ok(()),
    }
}

/// Explicit Bayesian normal-form game with a principal's objective tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianGame {
    pub num_players: usize,
    pub num_actions: usize,
    pub prior: Vec<f64>,
    /// `payoffs[i][θ]` is player i's payoff tensor in state θ.
    pub payoffs: Vec<Vec<Tensor>>,
    /// `objective[θ]` is the principal's objective tensor in state θ.
    pub objective: Vec<Tensor>,
}

/// Complete-information game under a fixed belief.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGame {
    pub payoffs: Vec<Tensor>,
    pub objective: Tensor,
}

impl BayesianGame {
    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    /// Checks shapes, ranges and the prior without modifying the game.
    pub fn check(&self) -> Result<(), ModelError> {
        let (n, m) = (self.num_players, self.num_actions);
        if n == 0 {
            return Err(ModelError::Shape("num_players must be at least 1".into()));
        }
        if m == 0 {
            return Err(ModelError::Shape("num_actions must be at least 1".into()));
        }
        let states = self.prior.len();
        check_distribution(&self.prior, PROB_SUM_TOL, "prior")?;
        if self.payoffs.len() != n {
            return Err(ModelError::Shape(format!(
                "payoffs has {} players, expected {n}",
                self.payoffs.len()
            )));
        }
        let len = profile_count(n, m)?;
        for (i, per_state) in self.payoffs.iter().enumerate() {
            if per_state.len() != states {
                return Err(ModelError::Shape(format!(
                    "payoffs of player {i} cover {} states, expected {states}",
                    per_state.len()
                )));
            }
            for (theta, t) in per_state.iter().enumerate() {
                if t.data.len() != len || t.num_players != n || t.num_actions != m {
                    return Err(ModelError::Shape(format!(
                        "payoff tensor of player {i}, state {theta} has {} entries, expected {len}",
                        t.data.len()
                    )));
                }
                check_unit_range(&t.data, -1.0, &format!("payoff of player {i}, state {theta}"))?;
            }
        }
        if self.objective.len() != states {
            return Err(ModelError::Shape(format!(
                "objective covers {} states, expected {states}",
                self.objective.len()
            )));
        }
        for (theta, t) in self.objective.iter().enumerate() {
            if t.data.len() != len {
                return Err(ModelError::Shape(format!(
                    "objective tensor for state {theta} has {} entries, expected {len}",
                    t.data.len()
                )));
            }
            check_unit_range(&t.data, -1.0, &format!("objective in state {theta}"))?;
        }
        Ok(())
    }

    /// `Σ_θ μ(θ) A^θ` for every player and the objective.
    pub fn posterior_game(&self, posterior: &[f64]) -> Result<PosteriorGame, ModelError> {
        if posterior.len() != self.num_states() {
            return Err(ModelError::Shape(format!(
                "posterior has length {}, expected {}",
                posterior.len(),
                self.num_states()
            )));
        }
        check_distribution(posterior, 1e-6, "posterior")?;
        let payoffs = self.payoffs.iter().map(|per_state| mix(per_state, posterior)).collect();
        let objective = mix(&self.objective, posterior);
        Ok(PosteriorGame { payoffs, objective })
    }

    /// `w(θ) = E_{s∼x}[F(θ, s)]` for each state.
    pub fn objective_weights(&self, profile: &MixedProfile) -> Vec<f64> {
        self.objective.iter().map(|t| t.expected(profile)).collect()
    }

    /// `Σ_σ α_σ · F(μ_σ, x^σ)` for a scheme whose signals all carry profiles.
    pub fn evaluate_objective(&self, scheme: &SignalingScheme) -> Result<f64, ModelError> {
        let mut total = 0.0;
        for (idx, signal) in scheme.signals.iter().enumerate() {
            let profile = match &signal.profile {
                Some(p) => p,
                None if signal.weight <= 0.0 => continue,
                None => return Err(ModelError::MissingProfile(idx)),
            };
            if signal.posterior.len() != self.num_states() {
                return Err(ModelError::Shape(format!(
                    "signal {idx} posterior has length {}, expected {}",
                    signal.posterior.len(),
                    self.num_states()
                )));
            }
            let w = self.objective_weights(profile);
            total += signal.weight * dot(&w, &signal.posterior);
        }
        Ok(total)
    }
}

fn mix(per_state: &[Tensor], weights: &[f64]) -> Tensor {
    let first = &per_state[0];
    let mut out = Tensor::zeros(first.num_players, first.num_actions);
    for (t, &w) in per_state.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.data.iter_mut().zip(&t.data) {
            *o += w * v;
        }
    }
    out
}

/// An n×M valuation matrix and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationMatrix {
    pub num_bidders: usize,
    /// Row-major n×M: `values[i * M + θ]`.
    pub values: Vec<f64>,
}

impl ValuationMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let num_bidders = rows.len();
        if num_bidders == 0 {
            return Err(ModelError::Shape("valuation matrix has no bidders".into()));
        }
        let states = rows[0].len();
        if rows.iter().any(|r| r.len() != states) {
            return Err(ModelError::Shape("valuation matrix rows have unequal length".into()));
        }
        Ok(ValuationMatrix { num_bidders, values: rows.concat() })
    }

    pub fn num_states(&self) -> usize {
        self.values.len() / self.num_bidders.max(1)
    }

    #[inline]
    pub fn value(&self, bidder: usize, state: usize) -> f64 {
        self.values[bidder * self.num_states() + state]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.num_states()).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInstance {
    pub num_bidders: usize,
    pub prior: Vec<f64>,
    /// Explicit valuation distribution `{(V^t, ρ_t)}`.
    pub valuations: Vec<(ValuationMatrix, f64)>,
    /// Communication budget carried with the instance, if any.
    pub signal_budget: Option<usize>,
}

impl AuctionInstance {
    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn support_size(&self) -> usize {
        self.valuations.len()
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.num_bidders == 0 {
            return Err(ModelError::Shape("num_bidders must be at least 1".into()));
        }
        check_distribution(&self.prior, PROB_SUM_TOL, "prior")?;
        if self.valuations.is_empty() {
            return Err(ModelError::Shape("valuation support is empty".into()));
        }
        let states = self.num_states();
        for (t, (v, _)) in self.valuations.iter().enumerate() {
            if v.num_bidders != self.num_bidders || v.values.len() != self.num_bidders * states {
                return Err(ModelError::Shape(format!(
                    "valuation matrix {t} is not {}x{states}",
                    self.num_bidders
                )));
            }
            check_unit_range(&v.values, 0.0, &format!("valuation matrix {t}"))?;
        }
        let rho: Vec<f64> = self.valuations.iter().map(|(_, p)| *p).collect();
        check_distribution(&rho, PROB_SUM_TOL, "valuation probabilities")?;
        if let Some(k) = self.signal_budget {
            if k == 0 || k > states {
                return Err(ModelError::Range(format!("k = {k} outside [1, {states}]")));
            }
        }
        Ok(())
    }
}

/// Record of which original states survived validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateReduction {
    pub original_states: usize,
    /// Original indices of the retained states, increasing.
    pub kept: Vec<usize>,
}

impl StateReduction {
    pub fn identity(states: usize) -> Self {
        StateReduction { original_states: states, kept: (0..states).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.kept.len() == self.original_states
    }

    /// Lifts a vector over the retained states back to the original space,
    /// filling removed states with zero.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.original_states];
        for (&orig, &v) in self.kept.iter().zip(reduced) {
            out[orig] = v;
        }
        out
    }

    /// Inverse of [`expand`](Self::expand); entries of removed states are dropped.
    pub fn restrict(&self, original: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&i| original[i]).collect()
    }

    /// Lifts a state→signal assignment; removed states go to signal 0.
    pub fn expand_assignment(&self, reduced: &[usize]) -> Vec<usize> {
        let mut out = vec![0; self.original_states];
        for (&orig, &s) in self.kept.iter().zip(reduced) {
            out[orig] = s;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validated<T> {
    pub instance: T,
    pub reduction: StateReduction,
}

fn kept_states(prior: &[f64]) -> Vec<usize> {
    prior.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, _)| i).collect()
}

/// Validates a game and removes states of zero prior mass.
pub fn validate_game(raw: BayesianGame) -> Result<Validated<BayesianGame>, ModelError> {
    raw.check()?;
    let kept = kept_states(&raw.prior);
    let reduction = StateReduction { original_states: raw.prior.len(), kept };
    if reduction.is_identity() {
        return Ok(Validated { instance: raw, reduction });
    }
    let pick = |v: &[Tensor]| reduction.kept.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
    let instance = BayesianGame {
        num_players: raw.num_players,
        num_actions: raw.num_actions,
        prior: renormalize(&reduction.restrict(&raw.prior)),
        payoffs: raw.payoffs.iter().map(|p| pick(p)).collect(),
        objective: pick(&raw.objective),
    };
    Ok(Validated { instance, reduction })
}

/// Validates an auction and removes states of zero prior mass.
pub fn validate_auction(raw: AuctionInstance) -> Result<Validated<AuctionInstance>, ModelError> {
    raw.check()?;
    let kept = kept_states(&raw.prior);
    let reduction = StateReduction { original_states: raw.prior.len(), kept };
    if reduction.is_identity() {
        return Ok(Validated { instance: raw, reduction });
    }
    let valuations = raw
        .valuations
        .iter()
        .map(|(v, p)| {
            let values = (0..v.num_bidders)
                .flat_map(|i| reduction.kept.iter().map(move |&s| (i, s)))
                .map(|(i, s)| v.value(i, s))
                .collect();
            (ValuationMatrix { num_bidders: v.num_bidders, values }, *p)
        })
        .collect();
    let states = reduction.kept.len();
    let instance = AuctionInstance {
        num_bidders: raw.num_bidders,
        prior: renormalize(&reduction.restrict(&raw.prior)),
        valuations,
        signal_budget: raw.signal_budget.map(|k| k.min(states)),
    };
    Ok(Validated { instance, reduction })
}

fn renormalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// One signal of a scheme: probability α, posterior μ and optionally the
/// equilibrium profile selected in its subgame.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub weight: f64,
    pub posterior: Vec<f64>,
    pub profile: Option<MixedProfile>,
}

/// Convex decomposition `λ = Σ_σ α_σ μ_σ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalingScheme {
    pub signals: Vec<Signal>,
    /// Deterministic state→signal map, when the scheme is a partition.
    pub assignment: Option<Vec<usize>>,
}

impl SignalingScheme {
    /// Builds the decomposition induced by a partition of the states.
    /// Empty signals are kept with zero weight so that signal indices match
    /// the assignment.
    pub fn from_assignment(prior: &[f64], assignment: &[usize], num_signals: usize) -> Self {
        let mut weights = vec![0.0; num_signals];
        for (theta, &s) in assignment.iter().enumerate() {
            weights[s] += prior[theta];
        }
        let signals = weights
            .iter()
            .enumerate()
            .map(|(s, &alpha)| {
                let posterior = assignment
                    .iter()
                    .enumerate()
                    .map(|(theta, &a)| if a == s && alpha > 0.0 { prior[theta] / alpha } else { 0.0 })
                    .collect();
                Signal { weight: alpha, posterior, profile: None }
            })
            .collect();
        SignalingScheme { signals, assignment: Some(assignment.to_vec()) }
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// `Σ_σ α_σ μ_σ`.
    pub fn mean_posterior(&self, num_states: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_states];
        for s in &self.signals {
            for (o, p) in out.iter_mut().zip(&s.posterior) {
                *o += s.weight * p;
            }
        }
        out
    }

    /// Checks the decomposition invariants against `prior` at tolerance `tol`.
    pub fn check_decomposition(&self, prior: &[f64], tol: f64) -> Result<(), ModelError> {
        let states = prior.len();
        let mut total = 0.0;
        for (idx, s) in self.signals.iter().enumerate() {
            if !s.weight.is_finite() || s.weight < 0.0 {
                return Err(ModelError::Decomposition(format!("signal {idx} has weight {}", s.weight)));
            }
            if s.posterior.len() != states {
                return Err(ModelError::Shape(format!(
                    "signal {idx} posterior has length {}, expected {states}",
                    s.posterior.len()
                )));
            }
            if s.weight > 0.0 {
                check_distribution(&s.posterior, tol, &format!("posterior of signal {idx}"))
                    .map_err(|e| ModelError::Decomposition(e.to_string()))?;
            }
            total += s.weight;
        }
        if (total - 1.0).abs() > tol {
            return Err(ModelError::Decomposition(format!("signal weights sum to {total}")));
        }
        let mean = self.mean_posterior(states);
        for (theta, (m, p)) in mean.iter().zip(prior).enumerate() {
            if (m - p).abs() > tol {
                return Err(ModelError::Decomposition(format!(
                    "mean posterior {m} differs from prior {p} at state {theta}"
                )));
            }
        }
        if let Some(assign) = &self.assignment {
            if assign.len() != states {
                return Err(ModelError::Shape("assignment length differs from state count".into()));
            }
            let rebuilt = SignalingScheme::from_assignment(prior, assign, self.signals.len());
            for (idx, (a, b)) in rebuilt.signals.iter().zip(&self.signals).enumerate() {
                let off = (a.weight - b.weight).abs() > tol
                    || (b.weight > 0.0
                        && a.posterior.iter().zip(&b.posterior).any(|(x, y)| (x - y).abs() > tol));
                if off {
                    return Err(ModelError::Decomposition(format!(
                        "signal {idx} is inconsistent with the assignment"
                    )));
                }
            }
        }
        Ok(())
    }
}
