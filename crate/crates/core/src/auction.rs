//! Welfare-maximizing signaling with `k` signals in a second-price auction.
//!
//! A signal's outcome is summarized by its winner tuple: the bidder who wins
//! under each valuation matrix of the support. The best `k`-signal scheme is
//! the best set of `k` winner tuples, each state routed to the tuple that
//! collects the most welfare from it. That set function is monotone and
//! submodular, so greedy over a small net of tuples is near optimal.

use std::collections::{BTreeSet, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SolveError};
use crate::model::{AuctionInstance, SignalingScheme, ValuationMatrix};
use crate::net::{compositions, multichoose, DEFAULT_ENUMERATION_CAP};

pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 10_000_000;

/// Winning bidder under each valuation matrix of the support (0-based).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WinnerTuple {
    pub winners: Vec<usize>,
}

impl WinnerTuple {
    pub fn new(winners: Vec<usize>) -> Self {
        WinnerTuple { winners }
    }

    fn check(&self, auction: &AuctionInstance) -> Result<(), ModelError> {
        if self.winners.len() != auction.support_size() {
            return Err(ModelError::Shape(format!(
                "winner tuple has length {}, expected {}",
                self.winners.len(),
                auction.support_size()
            )));
        }
        if let Some(w) = self.winners.iter().find(|&&w| w >= auction.num_bidders) {
            return Err(ModelError::Range(format!("winner {w} is not a bidder index")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WinnerNetParams {
    pub multiset_size: usize,
    pub cap: u128,
}

impl WinnerNetParams {
    pub fn explicit(multiset_size: usize) -> Result<Self, SolveError> {
        if multiset_size == 0 {
            return Err(SolveError::Parameter("winner net multiset size must be at least 1".into()));
        }
        Ok(WinnerNetParams { multiset_size, cap: DEFAULT_ENUMERATION_CAP })
    }

    /// `⌈2 ln(4nr) / ε²⌉`.
    pub fn worst_case(num_bidders: usize, support: usize, epsilon: f64) -> Result<Self, SolveError> {
        if !(epsilon > 0.0) {
            return Err(SolveError::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let s = (2.0 * (4.0 * (num_bidders * support) as f64).ln() / (epsilon * epsilon)).ceil();
        Self::explicit((s as usize).max(1))
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }
}

/// Welfare of a deterministic state→signal map:
/// `Σ_t ρ_t Σ_σ max_i Σ_{θ→σ} λ(θ) V^t(i,θ)`.
pub fn welfare_of_assignment(auction: &AuctionInstance, assignment: &[usize]) -> Result<f64, ModelError> {
    let states = auction.num_states();
    if assignment.len() != states {
        return Err(ModelError::Shape(format!(
            "assignment has length {}, expected {states}",
            assignment.len()
        )));
    }
    let signals = assignment.iter().max().map_or(0, |m| m + 1);
    Ok(assignment_welfare(auction, assignment, signals, &mut vec![0.0; signals * auction.num_bidders]))
}

/// `sums` is scratch space of length `signals · n`.
fn assignment_welfare(auction: &AuctionInstance, assignment: &[usize], signals: usize, sums: &mut [f64]) -> f64 {
    let n = auction.num_bidders;
    let mut total = 0.0;
    for (v, rho) in &auction.valuations {
        sums.fill(0.0);
        for (theta, (&s, &lam)) in assignment.iter().zip(&auction.prior).enumerate() {
            for i in 0..n {
                sums[s * n + i] += lam * v.value(i, theta);
            }
        }
        let best: f64 = (0..signals)
            .map(|s| sums[s * n..(s + 1) * n].iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        total += rho * best;
    }
    total
}

/// Welfare of an arbitrary scheme, using `λ(θ)φ(θ,σ) = α_σ μ_σ(θ)`.
pub fn welfare_of_scheme(auction: &AuctionInstance, scheme: &SignalingScheme) -> Result<f64, ModelError> {
    let states = auction.num_states();
    if let Some(s) = scheme.signals.iter().position(|s| s.posterior.len() != states) {
        return Err(ModelError::Shape(format!("signal {s} posterior does not have {states} states")));
    }
    let mut total = 0.0;
    for (v, rho) in &auction.valuations {
        for s in &scheme.signals {
            let best = (0..auction.num_bidders)
                .map(|i| (0..states).map(|th| s.weight * s.posterior[th] * v.value(i, th)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            total += rho * best;
        }
    }
    Ok(total)
}

/// `Σ_θ λ(θ) Σ_t ρ_t max_i V^t(i,θ)`, the welfare of revealing the state.
pub fn full_revelation_welfare(auction: &AuctionInstance) -> f64 {
    (0..auction.num_states())
        .map(|th| {
            let inner: f64 = auction
                .valuations
                .iter()
                .map(|(v, rho)| {
                    rho * (0..auction.num_bidders).map(|i| v.value(i, th)).fold(f64::NEG_INFINITY, f64::max)
                })
                .sum();
            auction.prior[th] * inner
        })
        .sum()
}

/// `g(θ) = λ(θ) Σ_t ρ_t V^t(w_t, θ)` for every state.
fn tuple_gains(auction: &AuctionInstance, tuple: &WinnerTuple) -> Vec<f64> {
    (0..auction.num_states())
        .map(|th| {
            let inner: f64 =
                auction.valuations.iter().zip(&tuple.winners).map(|((v, rho), &w)| rho * v.value(w, th)).sum();
            auction.prior[th] * inner
        })
        .collect()
}

/// `welfare(W) = Σ_θ max_{w∈W} λ(θ) Σ_t ρ_t V^t(w_t, θ)`, with `welfare(∅) = 0`.
pub fn welfare_set_function(auction: &AuctionInstance, tuples: &[WinnerTuple]) -> Result<f64, ModelError> {
    if tuples.is_empty() {
        return Ok(0.0);
    }
    let mut best = vec![f64::NEG_INFINITY; auction.num_states()];
    for w in tuples {
        w.check(auction)?;
        for (b, g) in best.iter_mut().zip(tuple_gains(auction, w)) {
            *b = b.max(g);
        }
    }
    Ok(best.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    /// Chosen tuples in the order they were added.
    pub chosen: Vec<WinnerTuple>,
    /// Marginal gain of each round.
    pub trace: Vec<f64>,
    pub value: f64,
}

/// Greedy maximization of [`welfare_set_function`] under `|W| ≤ k`.
///
/// The ground set is deduplicated and sorted, so ties go to the
/// lexicographically smallest tuple. Zero-gain rounds still add a tuple,
/// which makes `k ≥ |ground|` return the whole ground set.
pub fn greedy_max(auction: &AuctionInstance, ground: &[WinnerTuple], k: usize) -> Result<GreedyResult, ModelError> {
    let ground: Vec<WinnerTuple> = ground.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    for w in &ground {
        w.check(auction)?;
    }
    let gains: Vec<Vec<f64>> = ground.par_iter().map(|w| tuple_gains(auction, w)).collect();
    // Valuations are nonnegative, so the empty set's per-state best is 0.
    let mut current = vec![0.0; auction.num_states()];
    let mut taken = vec![false; ground.len()];
    let mut chosen = Vec::new();
    let mut trace = Vec::new();
    let mut value = 0.0;
    while chosen.len() < k && chosen.len() < ground.len() {
        let marginal: Vec<f64> = gains
            .par_iter()
            .map(|g| g.iter().zip(&current).map(|(a, b)| (a - b).max(0.0)).sum())
            .collect();
        let mut pick: Option<usize> = None;
        for (idx, gain) in marginal.iter().enumerate() {
            if !taken[idx] && pick.map_or(true, |p| *gain > marginal[p]) {
                pick = Some(idx);
            }
        }
        let Some(p) = pick else { break };
        taken[p] = true;
        for (c, g) in current.iter_mut().zip(&gains[p]) {
            *c = c.max(*g);
        }
        chosen.push(ground[p].clone());
        trace.push(marginal[p]);
        value = current.iter().sum();
    }
    Ok(GreedyResult { chosen, trace, value })
}

/// Routes each state to the lowest-index tuple collecting the most welfare
/// from it, and returns the assignment with its true welfare.
pub fn recover_scheme(auction: &AuctionInstance, tuples: &[WinnerTuple]) -> Result<(Vec<usize>, f64), ModelError> {
    if tuples.is_empty() {
        return Err(ModelError::Shape("recover_scheme needs at least one winner tuple".into()));
    }
    for w in tuples {
        w.check(auction)?;
    }
    let gains: Vec<Vec<f64>> = tuples.iter().map(|w| tuple_gains(auction, w)).collect();
    let assignment: Vec<usize> = (0..auction.num_states())
        .map(|th| {
            let mut best = 0;
            for s in 1..tuples.len() {
                if gains[s][th] > gains[best][th] {
                    best = s;
                }
            }
            best
        })
        .collect();
    let welfare = welfare_of_assignment(auction, &assignment)?;
    Ok((assignment, welfare))
}

/// The winner tuples induced by every multiset `Y` of states of size `s_Y`:
/// `w_t(Y)` is the lowest-index bidder maximizing `Σ_{θ∈Y} V^t(i,θ)`.
/// Sorted and deduplicated.
pub fn enumerate_winner_net(auction: &AuctionInstance, params: &WinnerNetParams) -> Result<Vec<WinnerTuple>, SolveError> {
    if params.multiset_size == 0 {
        return Err(SolveError::Parameter("winner net multiset size must be at least 1".into()));
    }
    let states = auction.num_states();
    let required = multichoose(states, params.multiset_size);
    if required > params.cap {
        return Err(SolveError::TooLarge { what: "winner-tuple net", required, cap: params.cap });
    }
    let n = auction.num_bidders;
    let tuples: BTreeSet<WinnerTuple> = compositions(states, params.multiset_size)
        .par_iter()
        .map(|counts| {
            let winners = auction
                .valuations
                .iter()
                .map(|(v, _)| {
                    let score = |i: usize| -> f64 { counts.iter().enumerate().map(|(th, &c)| c as f64 * v.value(i, th)).sum() };
                    let mut best = 0;
                    let mut best_score = score(0);
                    for i in 1..n {
                        let s = score(i);
                        if s > best_score {
                            best = i;
                            best_score = s;
                        }
                    }
                    best
                })
                .collect();
            WinnerTuple { winners }
        })
        .collect();
    Ok(tuples.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSolveResult {
    /// State → signal, 0-based.
    pub assignment: Vec<usize>,
    pub welfare: f64,
    /// Greedy's chosen set; signal `σ` corresponds to `winner_tuples[σ]`.
    pub winner_tuples: Vec<WinnerTuple>,
    pub trace: Vec<f64>,
    pub net_size: usize,
    pub multiset_size: usize,
}

/// Winner net, then greedy with budget `k`, then scheme recovery.
pub fn solve_auction_signaling(
    auction: &AuctionInstance,
    k: usize,
    params: &WinnerNetParams,
) -> Result<AuctionSolveResult, SolveError> {
    if k == 0 {
        return Err(SolveError::Parameter("k must be at least 1".into()));
    }
    auction.check()?;
    let net = enumerate_winner_net(auction, params)?;
    let greedy = greedy_max(auction, &net, k)?;
    let (assignment, welfare) = recover_scheme(auction, &greedy.chosen)?;
    Ok(AuctionSolveResult {
        assignment,
        welfare,
        winner_tuples: greedy.chosen,
        trace: greedy.trace,
        net_size: net.len(),
        multiset_size: params.multiset_size,
    })
}

/// Exhaustive optimum over all assignments of states to `min(k, M)` signals.
/// Ties keep the first assignment in odometer order (state 0 least significant).
pub fn brute_force_auction(auction: &AuctionInstance, k: usize, cap: u128) -> Result<(f64, Vec<usize>), SolveError> {
    if k == 0 {
        return Err(SolveError::Parameter("k must be at least 1".into()));
    }
    auction.check()?;
    let states = auction.num_states();
    let k = k.min(states);
    let total = (k as u128).checked_pow(states as u32).unwrap_or(u128::MAX);
    if total > cap {
        return Err(SolveError::TooLarge { what: "assignment space", required: total, cap });
    }
    let decode = |mut code: u64| -> Vec<usize> {
        (0..states)
            .map(|_| {
                let d = (code % k as u64) as usize;
                code /= k as u64;
                d
            })
            .collect()
    };
    let n = auction.num_bidders;
    let (code, value) = (0..total as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; k * n],
            |sums, code| (code, assignment_welfare(auction, &decode(code), k, sums)),
        )
        .reduce(
            || (u64::MAX, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    Ok((value, decode(code)))
}

/// `⌈2(M ln k + ln(2/δ)) / ε²⌉`.
pub fn sample_count(num_states: usize, k: usize, epsilon: f64, delta: f64) -> Result<usize, SolveError> {
    if !(epsilon > 0.0) {
        return Err(SolveError::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SolveError::Parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k == 0 {
        return Err(SolveError::Parameter("k must be at least 1".into()));
    }
    let r = 2.0 * (num_states as f64 * (k as f64).ln() + (2.0 / delta).ln()) / (epsilon * epsilon);
    Ok(r.ceil() as usize)
}

/// Source of i.i.d. valuation matrices.
pub trait ValuationSampler {
    fn num_bidders(&self) -> usize;
    fn num_states(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> ValuationMatrix;
}

/// Every entry independently uniform on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformIid {
    pub num_bidders: usize,
    pub num_states: usize,
}

impl ValuationSampler for UniformIid {
    fn num_bidders(&self) -> usize {
        self.num_bidders
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> ValuationMatrix {
        let values = (0..self.num_bidders * self.num_states).map(|_| rng.gen::<f64>()).collect();
        ValuationMatrix { num_bidders: self.num_bidders, values }
    }
}

/// Draws from a finite-support distribution.
#[derive(Debug, Clone)]
pub struct FiniteMixture {
    support: Vec<ValuationMatrix>,
    index: WeightedIndex<f64>,
}

impl FiniteMixture {
    pub fn new(support: Vec<(ValuationMatrix, f64)>) -> Result<Self, SolveError> {
        if support.is_empty() {
            return Err(SolveError::Parameter("mixture has no components".into()));
        }
        let index = WeightedIndex::new(support.iter().map(|(_, p)| *p))
            .map_err(|e| SolveError::Parameter(format!("mixture weights: {e}")))?;
        Ok(FiniteMixture { support: support.into_iter().map(|(v, _)| v).collect(), index })
    }
}

impl ValuationSampler for FiniteMixture {
    fn num_bidders(&self) -> usize {
        self.support[0].num_bidders
    }
    fn num_states(&self) -> usize {
        self.support[0].num_states()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> ValuationMatrix {
        self.support[self.index.sample(rng)].clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSolveResult {
    pub result: AuctionSolveResult,
    /// The empirical instance the solver ran on.
    pub empirical: AuctionInstance,
    pub samples: usize,
}

/// Draws `r` matrices from `sampler` with a generator seeded by `seed`,
/// merges duplicates into one weighted support and solves the empirical
/// instance. Without explicit `params` the winner net uses the default size
/// for the merged support.
#[allow(clippy::too_many_arguments)]
pub fn solve_auction_sampled(
    sampler: &dyn ValuationSampler,
    prior: &[f64],
    k: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
    params: Option<WinnerNetParams>,
) -> Result<SampledSolveResult, SolveError> {
    if sampler.num_states() != prior.len() {
        return Err(SolveError::Parameter(format!(
            "sampler has {} states but the prior has {}",
            sampler.num_states(),
            prior.len()
        )));
    }
    let r = sample_count(prior.len(), k, epsilon, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support: Vec<(ValuationMatrix, f64)> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let weight = 1.0 / r as f64;
    for draw in 0..r {
        let v = sampler.sample(&mut rng);
        if v.num_bidders != sampler.num_bidders() || v.values.len() != sampler.num_bidders() * prior.len() {
            return Err(SolveError::Sampler(format!("draw {draw} has the wrong shape")));
        }
        if let Some(x) = v.values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(SolveError::Sampler(format!("draw {draw} has value {x} outside [0,1]")));
        }
        let key: Vec<u64> = v.values.iter().map(|x| x.to_bits()).collect();
        match seen.get(&key) {
            Some(&idx) => support[idx].1 += weight,
            None => {
                seen.insert(key, support.len());
                support.push((v, weight));
            }
        }
    }
    let empirical = AuctionInstance {
        num_bidders: sampler.num_bidders(),
        prior: prior.to_vec(),
        valuations: support,
        signal_budget: None,
    };
    let params = match params {
        Some(p) => p,
        None => WinnerNetParams::worst_case(empirical.num_bidders, empirical.support_size(), epsilon)?,
    };
    let result = solve_auction_signaling(&empirical, k, &params)?;
    Ok(SampledSolveResult { result, empirical, samples: r })
}
