//! Posterior beliefs under which a fixed profile is an approximate
//! equilibrium.
//!
//! For fixed `x`, every payoff `A_i^μ(·)` is linear in `μ`, so the set of
//! beliefs inducing `x` as an ε-equilibrium is `{μ ∈ Δ_M : A μ ≤ b}`.

use crate::error::LpError;
use crate::lp;
use crate::model::{BayesianGame, MixedProfile};
use crate::net::EquilibriumConcept;

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorPolytope {
    pub num_states: usize,
    /// Inequality rows over μ; all-zero rows with nonnegative right side are pruned.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Set when a pruned row read `0 ≤ b` with `b < 0`.
    pub trivially_empty: bool,
    /// Number of incentive rows before pruning.
    pub raw_rows: usize,
    pub epsilon: f64,
    pub concept: EquilibriumConcept,
}

impl PosteriorPolytope {
    /// Whether `μ` satisfies every row within `tol`. The simplex constraints
    /// are not checked here.
    pub fn contains(&self, posterior: &[f64], tol: f64) -> bool {
        !self.trivially_empty
            && self.rows.iter().zip(&self.rhs).all(|(r, b)| {
                let lhs: f64 = r.iter().zip(posterior).map(|(a, m)| a * m).sum();
                lhs <= b + tol
            })
    }

    /// Largest row violation at `μ` (non-positive when inside).
    pub fn violation(&self, posterior: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| r.iter().zip(posterior).map(|(a, m)| a * m).sum::<f64>() - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the incentive system for `profile` at slack `epsilon`.
///
/// NE: one row per non-excluded player `i` and action `j`,
/// `Σ_θ μ(θ)(A_i^θ(j, x_{-i}) − A_i^θ(x)) ≤ ε`.
/// WSNE: one row per non-excluded `i`, supported `j` and alternative `k`,
/// `Σ_θ μ(θ)(A_i^θ(k, x_{-i}) − A_i^θ(j, x_{-i})) ≤ ε`.
pub fn build_polytope(
    game: &BayesianGame,
    profile: &MixedProfile,
    epsilon: f64,
    concept: EquilibriumConcept,
    excluded_players: &[usize],
    drop_eps: f64,
) -> PosteriorPolytope {
    let states = game.num_states();
    let m = game.num_actions;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut raw_rows = 0;
    let mut trivially_empty = false;
    let mut push = |row: Vec<f64>| {
        if row.iter().all(|v| *v == 0.0) {
            if epsilon < 0.0 {
                trivially_empty = true;
            }
        } else {
            rows.push(row);
            rhs.push(epsilon);
        }
    };
    for i in 0..game.num_players {
        if excluded_players.contains(&i) {
            continue;
        }
        let x = &profile.strategies[i];
        // dev[θ][j] = A_i^θ(j, x_{-i})
        let dev: Vec<Vec<f64>> =
            game.payoffs[i].iter().map(|t| t.deviation_payoffs(profile, i)).collect();
        match concept {
            EquilibriumConcept::Nash => {
                let current: Vec<f64> =
                    dev.iter().map(|d| d.iter().zip(x).map(|(a, p)| a * p).sum()).collect();
                for j in 0..m {
                    raw_rows += 1;
                    push((0..states).map(|th| dev[th][j] - current[th]).collect());
                }
            }
            EquilibriumConcept::WellSupported => {
                for j in (0..m).filter(|&j| x[j] > drop_eps) {
                    for k in 0..m {
                        raw_rows += 1;
                        push((0..states).map(|th| dev[th][k] - dev[th][j]).collect());
                    }
                }
            }
        }
    }
    PosteriorPolytope { num_states: states, rows, rhs, trivially_empty, raw_rows, epsilon, concept }
}

/// Whether the polytope meets the simplex.
pub fn polytope_nonempty(p: &PosteriorPolytope) -> Result<bool, LpError> {
    if p.trivially_empty {
        return Ok(false);
    }
    if p.rows.is_empty() {
        return Ok(p.num_states > 0);
    }
    lp::check_feasible(&p.rows, &p.rhs, &[vec![1.0; p.num_states]], &[1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{g1, random_game};
    use crate::model::Tolerances;
    use crate::net::{check_equilibrium, enumerate_net, enumerate_profiles, DEFAULT_ENUMERATION_CAP};
    use rand::{Rng, SeedableRng};

    const NE: EquilibriumConcept = EquilibriumConcept::Nash;
    const WS: EquilibriumConcept = EquilibriumConcept::WellSupported;

    #[test]
    fn g1_pure_action_rows() {
        let p = build_polytope(&g1(), &MixedProfile::pure(&[0], 2), 0.0, NE, &[], 1e-12);
        assert_eq!(p.rows, vec![vec![-1.0, 1.0]]);
        assert_eq!(p.rhs, vec![0.0]);
        assert_eq!(p.raw_rows, 2);
        assert!(p.contains(&[0.5, 0.5], 0.0));
        assert!(!p.contains(&[0.49, 0.51], 0.0));

        let p = build_polytope(&g1(), &MixedProfile::pure(&[0], 2), 0.2, NE, &[], 1e-12);
        assert_eq!(p.rhs, vec![0.2]);
        assert!(p.contains(&[0.4, 0.6], 1e-12));
        assert!(!p.contains(&[0.39, 0.61], 0.0));
    }

    #[test]
    fn pure_profiles_give_identical_systems() {
        let g = random_game(2, 3, 3, 11);
        for a in 0..3 {
            for b in 0..3 {
                let x = MixedProfile::pure(&[a, b], 3);
                let ne = build_polytope(&g, &x, 0.1, NE, &[], 1e-12);
                let ws = build_polytope(&g, &x, 0.1, WS, &[], 1e-12);
                assert_eq!(ne.rows, ws.rows);
                assert_eq!(ne.rhs, ws.rhs);
            }
        }
    }

    #[test]
    fn row_counts() {
        let g = random_game(2, 3, 2, 5);
        let x = MixedProfile::new(vec![vec![0.5, 0.5, 0.0], vec![1.0 / 3.0; 3]]).unwrap();
        let ne = build_polytope(&g, &x, 0.0, NE, &[], 1e-12);
        assert_eq!(ne.raw_rows, 2 * 3);
        let ws = build_polytope(&g, &x, 0.0, WS, &[], 1e-12);
        assert_eq!(ws.raw_rows, (2 + 3) * 3);
        let leader = build_polytope(&g, &x, 0.0, NE, &[0], 1e-12);
        assert_eq!(leader.raw_rows, 3);
    }

    #[test]
    fn nonemptiness_examples() {
        let mk = |rows: Vec<Vec<f64>>, rhs: Vec<f64>| PosteriorPolytope {
            num_states: 2,
            rows,
            rhs,
            trivially_empty: false,
            raw_rows: 0,
            epsilon: 0.0,
            concept: NE,
        };
        assert!(polytope_nonempty(&mk(vec![vec![-1.0, 0.0]], vec![-0.5])).unwrap());
        assert!(!polytope_nonempty(&mk(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![-0.6, 0.4])).unwrap());

        let g = random_game(2, 2, 3, 2);
        let net = enumerate_net(2, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        for x in enumerate_profiles(&net, 2, DEFAULT_ENUMERATION_CAP).unwrap() {
            let p = build_polytope(&g, &x, 2.0, NE, &[], 1e-12);
            assert!(polytope_nonempty(&p).unwrap());
            for vertex in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
                assert!(p.contains(&vertex, 1e-12));
            }
        }
    }

    fn random_simplex(rng: &mut impl Rng, states: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..states).map(|_| -rng.gen_range(1e-9f64..1.0).ln()).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|v| v / sum).collect()
    }

    #[test]
    fn membership_agrees_with_checker() {
        let tol = Tolerances::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut agreements = 0;
        for trial in 0..60u64 {
            let n = 1 + (trial % 2) as usize;
            let m = 2 + (trial % 3 == 0) as usize;
            let states = 1 + (trial % 3) as usize;
            let g = random_game(n, m, states, trial);
            let net = enumerate_net(m, 2, DEFAULT_ENUMERATION_CAP).unwrap();
            let profiles = enumerate_profiles(&net, n, DEFAULT_ENUMERATION_CAP).unwrap();
            for _ in 0..5 {
                let mu = random_simplex(&mut rng, states);
                let pg = g.posterior_game(&mu).unwrap();
                for x in &profiles {
                    for eps in [0.0, 0.1, 0.5] {
                        for concept in [NE, WS] {
                            let p = build_polytope(&g, x, eps, concept, &[], tol.drop_eps);
                            let inside = p.violation(&mu) <= tol.feasibility_eps;
                            let check = check_equilibrium(&pg.payoffs, x, eps, concept, &[], &tol);
                            // Disagreement is only possible inside the band between
                            // the two tolerances.
                            let v = p.violation(&mu);
                            if v.abs() > 2.0 * tol.verify_eps {
                                assert_eq!(inside, check.accepted, "trial {trial} eps {eps} {concept}");
                                agreements += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(agreements > 1000);
    }

    #[test]
    fn larger_slack_gives_larger_polytope() {
        let g = random_game(2, 3, 3, 4);
        let x = MixedProfile::new(vec![vec![0.5, 0.0, 0.5], vec![1.0, 0.0, 0.0]]).unwrap();
        for concept in [NE, WS] {
            let small = build_polytope(&g, &x, 0.1, concept, &[], 1e-12);
            let big = build_polytope(&g, &x, 0.4, concept, &[], 1e-12);
            assert_eq!(small.rows, big.rows);
            assert!(small.rhs.iter().zip(&big.rhs).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn polytope_is_convex() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = random_game(2, 2, 3, 8);
        let net = enumerate_net(2, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        for x in enumerate_profiles(&net, 2, DEFAULT_ENUMERATION_CAP).unwrap() {
            let p = build_polytope(&g, &x, 0.3, NE, &[], 1e-12);
            let inside: Vec<Vec<f64>> =
                (0..200).map(|_| random_simplex(&mut rng, 3)).filter(|mu| p.contains(mu, 0.0)).collect();
            for pair in inside.windows(2) {
                let a: f64 = rng.gen();
                let mix: Vec<f64> = pair[0].iter().zip(&pair[1]).map(|(u, v)| a * u + (1.0 - a) * v).collect();
                assert!(p.contains(&mix, 1e-12));
            }
        }
    }
}
