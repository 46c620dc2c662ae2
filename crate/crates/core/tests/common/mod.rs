//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use infodesign::model::{AuctionInstance, BayesianGame, Tensor, ValuationMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn normalized(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| v / sum).collect()
}

fn tensor(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Tensor {
    let len = m.pow(n as u32);
    Tensor::new(n, m, (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap()
}

/// Payoffs and objective uniform in [-1,1].
pub fn random_game(rng: &mut ChaCha8Rng, n: usize, m: usize, states: usize) -> BayesianGame {
    let payoffs = (0..n).map(|_| (0..states).map(|_| tensor(rng, n, m)).collect()).collect();
    let objective = (0..states).map(|_| tensor(rng, n, m)).collect();
    BayesianGame { num_players: n, num_actions: m, prior: normalized(rng, states), payoffs, objective }
}

/// Two players; the column player's payoff is the negation of the row
/// player's, and the objective is the row player's payoff.
pub fn random_zero_sum(rng: &mut ChaCha8Rng, m: usize, states: usize) -> BayesianGame {
    let row: Vec<Tensor> = (0..states).map(|_| tensor(rng, 2, m)).collect();
    let col = row
        .iter()
        .map(|t| Tensor::new(2, m, t.data().iter().map(|v| -v).collect()).unwrap())
        .collect();
    BayesianGame {
        num_players: 2,
        num_actions: m,
        prior: normalized(rng, states),
        payoffs: vec![row.clone(), col],
        objective: row,
    }
}

/// Valuations uniform in [0,1].
pub fn random_auction(rng: &mut ChaCha8Rng, n: usize, states: usize, support: usize) -> AuctionInstance {
    let prior = normalized(rng, states);
    let rho = normalized(rng, support);
    let valuations = rho
        .into_iter()
        .map(|p| {
            let values = (0..n * states).map(|_| rng.gen_range(0.0..=1.0)).collect();
            (ValuationMatrix { num_bidders: n, values }, p)
        })
        .collect();
    AuctionInstance { num_bidders: n, prior, valuations, signal_budget: None }
}

/// Every `k`-subset of `0..len`, in lexicographic order.
pub fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            rec(i + 1, len, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, k, &mut Vec::new(), &mut out);
    out
}
