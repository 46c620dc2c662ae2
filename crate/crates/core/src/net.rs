//! The net of uniform-on-multiset mixed strategies and approximate
//! equilibrium checks.
//!
//! Every strategy in the net has entries `c_j / s` for integer counts
//! summing to the multiset size `s`, so comparisons between net strategies
//! are exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::model::{MixedProfile, Tensor, Tolerances};

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumConcept {
    /// ε-Nash: no pure deviation gains more than ε over the mixed payoff.
    #[serde(rename = "ne")]
    Nash,
    /// ε-well-supported: every supported action is within ε of a best response.
    #[serde(rename = "wsne")]
    WellSupported,
}

impl std::str::FromStr for EquilibriumConcept {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ne" => Ok(EquilibriumConcept::Nash),
            "wsne" => Ok(EquilibriumConcept::WellSupported),
            other => Err(format!("unknown equilibrium concept `{other}` (expected ne or wsne)")),
        }
    }
}

impl std::fmt::Display for EquilibriumConcept {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EquilibriumConcept::Nash => "ne",
            EquilibriumConcept::WellSupported => "wsne",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetParams {
    pub multiset_size: usize,
    /// True when `multiset_size` came from [`NetParams::worst_case`].
    pub from_formula: bool,
}

impl NetParams {
    pub fn explicit(multiset_size: usize) -> Result<Self, SolveError> {
        if multiset_size == 0 {
            return Err(SolveError::Parameter("net multiset size must be at least 1".into()));
        }
        Ok(NetParams { multiset_size, from_formula: false })
    }

    /// `⌈3(n+1)² ln((n+1)² m) / ε²⌉`.
    pub fn worst_case(num_players: usize, num_actions: usize, epsilon: f64) -> Result<Self, SolveError> {
        if !(epsilon > 0.0) {
            return Err(SolveError::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let k = ((num_players + 1) * (num_players + 1)) as f64;
        let s = (3.0 * k * (k * num_actions as f64).ln() / (epsilon * epsilon)).ceil();
        Ok(NetParams { multiset_size: (s as usize).max(1), from_formula: true })
    }
}

/// Number of multisets of `size` elements drawn from `items` kinds,
/// `C(items + size - 1, size)`, saturating at `u128::MAX`.
pub fn multichoose(items: usize, size: usize) -> u128 {
    if items == 0 {
        return if size == 0 { 1 } else { 0 };
    }
    let n = (items + size - 1) as u128;
    let k = size.min(items - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul(n - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// All count vectors of length `parts` summing to `total`, in descending
/// lexicographic order.
pub(crate) fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in (0..=total).rev() {
            prefix.push(c);
            rec(parts - 1, total - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Uniform distributions over every multiset of `[m]` of size `s`,
/// deduplicated and in descending lexicographic order.
pub fn enumerate_net(num_actions: usize, multiset_size: usize, cap: u128) -> Result<Vec<Vec<f64>>, SolveError> {
    if num_actions == 0 || multiset_size == 0 {
        return Err(SolveError::Parameter("net needs m ≥ 1 and s ≥ 1".into()));
    }
    let required = multichoose(num_actions, multiset_size);
    if required > cap {
        return Err(SolveError::TooLarge { what: "strategy net", required, cap });
    }
    let s = multiset_size as f64;
    Ok(compositions(num_actions, multiset_size)
        .into_iter()
        .map(|counts| counts.into_iter().map(|c| c as f64 / s).collect())
        .collect())
}

/// The Cartesian power `net^n`, first player most significant.
pub fn enumerate_profiles(net: &[Vec<f64>], num_players: usize, cap: u128) -> Result<Vec<MixedProfile>, SolveError> {
    let required = (net.len() as u128).checked_pow(num_players as u32).unwrap_or(u128::MAX);
    if required > cap {
        return Err(SolveError::TooLarge { what: "profile set", required, cap });
    }
    let mut out = Vec::with_capacity(required as usize);
    let mut idx = vec![0usize; num_players];
    for _ in 0..required {
        out.push(MixedProfile { strategies: idx.iter().map(|&k| net[k].clone()).collect() });
        crate::model::advance(&mut idx, net.len());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    pub accepted: bool,
    /// Largest deviation gain over the checked inequalities (0 when none apply).
    pub regret: f64,
}

/// Largest gain available to a unilateral deviation, per the concept.
pub fn regret(
    payoffs: &[Tensor],
    profile: &MixedProfile,
    concept: EquilibriumConcept,
    excluded_players: &[usize],
    drop_eps: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, tensor) in payoffs.iter().enumerate() {
        if excluded_players.contains(&i) {
            continue;
        }
        let dev = tensor.deviation_payoffs(profile, i);
        let best = dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let x = &profile.strategies[i];
        let gain = match concept {
            EquilibriumConcept::Nash => {
                let current: f64 = dev.iter().zip(x).map(|(d, p)| d * p).sum();
                best - current
            }
            EquilibriumConcept::WellSupported => dev
                .iter()
                .zip(x)
                .filter(|(_, p)| **p > drop_eps)
                .map(|(d, _)| best - d)
                .fold(0.0, f64::max),
        };
        worst = worst.max(gain);
    }
    worst
}

/// Whether `profile` is an ε-equilibrium of the complete-information game
/// `payoffs`, up to the additive slack `tol.verify_eps`.
pub fn check_equilibrium(
    payoffs: &[Tensor],
    profile: &MixedProfile,
    epsilon: f64,
    concept: EquilibriumConcept,
    excluded_players: &[usize],
    tol: &Tolerances,
) -> EquilibriumCheck {
    let r = regret(payoffs, profile, concept, excluded_players, tol.drop_eps);
    EquilibriumCheck { accepted: r <= epsilon + tol.verify_eps, regret: r }
}

/// Parallel [`check_equilibrium`] over many profiles; results follow input order.
pub fn check_all(
    payoffs: &[Tensor],
    profiles: &[MixedProfile],
    epsilon: f64,
    concept: EquilibriumConcept,
    excluded_players: &[usize],
    tol: &Tolerances,
) -> Vec<EquilibriumCheck> {
    profiles
        .par_iter()
        .map(|x| check_equilibrium(payoffs, x, epsilon, concept, excluded_players, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::g1;
    use proptest::prelude::*;

    const TOL: Tolerances = Tolerances { feasibility_eps: 1e-7, drop_eps: 1e-12, verify_eps: 1e-6 };

    #[test]
    fn net_examples() {
        let net = enumerate_net(2, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(net, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]);
        assert_eq!(enumerate_net(1, 7, DEFAULT_ENUMERATION_CAP).unwrap(), vec![vec![1.0]]);
        let pure = enumerate_net(3, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(pure, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn net_size_matches_multichoose() {
        for m in 1..=5 {
            for s in 1..=6 {
                let net = enumerate_net(m, s, DEFAULT_ENUMERATION_CAP).unwrap();
                assert_eq!(net.len() as u128, multichoose(m, s), "m={m} s={s}");
                let mut sorted = net.clone();
                sorted.dedup();
                assert_eq!(sorted.len(), net.len());
            }
        }
        assert_eq!(multichoose(3, 3), 10);
        assert_eq!(multichoose(10, 47), 7_575_968_400);
    }

    #[test]
    fn net_cap_reports_required_size() {
        match enumerate_net(10, 47, DEFAULT_ENUMERATION_CAP) {
            Err(SolveError::TooLarge { required, cap, .. }) => {
                assert_eq!(required, 7_575_968_400);
                assert_eq!(cap, DEFAULT_ENUMERATION_CAP);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn worst_case_size() {
        // n=1, m=2, ε=0.5: 3·4·ln 8 / 0.25 = 99.8 → 100
        assert_eq!(NetParams::worst_case(1, 2, 0.5).unwrap().multiset_size, 100);
        assert!(NetParams::worst_case(1, 2, 0.0).is_err());
        assert!(NetParams::explicit(0).is_err());
    }

    #[test]
    fn profile_counts() {
        let net = enumerate_net(2, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(enumerate_profiles(&net, 2, DEFAULT_ENUMERATION_CAP).unwrap().len(), 9);
        assert_eq!(enumerate_profiles(&net, 3, DEFAULT_ENUMERATION_CAP).unwrap().len(), 27);
        let single = enumerate_profiles(&net, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let flat: Vec<Vec<f64>> = single.into_iter().map(|p| p.strategies[0].clone()).collect();
        assert_eq!(flat, net);
        assert!(enumerate_profiles(&net, 3, 26).is_err());
    }

    #[test]
    fn g1_equilibrium_examples() {
        let g = g1();
        let at_e1 = g.posterior_game(&[1.0, 0.0]).unwrap();
        let a1 = MixedProfile::pure(&[0], 2);
        let a2 = MixedProfile::pure(&[1], 2);
        for concept in [EquilibriumConcept::Nash, EquilibriumConcept::WellSupported] {
            assert!(check_equilibrium(&at_e1.payoffs, &a1, 0.0, concept, &[], &TOL).accepted);
            let c = check_equilibrium(&at_e1.payoffs, &a2, 0.5, concept, &[], &TOL);
            assert!(!c.accepted);
            assert_eq!(c.regret, 1.0);
            // excluding the only player removes every condition
            assert!(check_equilibrium(&at_e1.payoffs, &a2, 0.0, concept, &[0], &TOL).accepted);
        }
        let mid = g.posterior_game(&[0.5, 0.5]).unwrap();
        let uniform = MixedProfile::new(vec![vec![0.5, 0.5]]).unwrap();
        assert!(check_equilibrium(&mid.payoffs, &uniform, 0.0, EquilibriumConcept::Nash, &[], &TOL).accepted);
        assert!(
            check_equilibrium(&mid.payoffs, &uniform, 0.0, EquilibriumConcept::WellSupported, &[], &TOL).accepted
        );
    }

    #[test]
    fn wsne_is_stricter_on_mixed_support() {
        // Row player: action 0 pays 1, action 1 pays 0.9. Mixing half/half
        // has NE regret 0.05 but WSNE regret 0.1.
        let t = Tensor::new(1, 2, vec![1.0, 0.9]).unwrap();
        let x = MixedProfile::new(vec![vec![0.5, 0.5]]).unwrap();
        let ne = regret(&[t.clone()], &x, EquilibriumConcept::Nash, &[], 1e-12);
        let ws = regret(&[t], &x, EquilibriumConcept::WellSupported, &[], 1e-12);
        assert!((ne - 0.05).abs() < 1e-12);
        assert!((ws - 0.1).abs() < 1e-12);
    }

    fn random_tensors(n: usize, m: usize, seed: u64) -> Vec<Tensor> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Tensor::new(n, m, (0..m.pow(n as u32)).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap())
            .collect()
    }

    /// Exact best-response check by enumerating every pure deviation.
    fn has_accepted_profile(payoffs: &[Tensor], profiles: &[MixedProfile], eps: f64) -> bool {
        profiles
            .iter()
            .any(|x| check_equilibrium(payoffs, x, eps, EquilibriumConcept::Nash, &[], &TOL).accepted)
    }

    #[test]
    fn formula_sized_net_contains_equilibria() {
        // 2×2 at ε = 0.5 (s = 313) and 2-player 3-action at ε = 1.5 (s = 40).
        for (m, eps) in [(2usize, 0.5), (3, 1.5)] {
            let s = NetParams::worst_case(2, m, eps).unwrap().multiset_size;
            let net = enumerate_net(m, s, DEFAULT_ENUMERATION_CAP).unwrap();
            let profiles = enumerate_profiles(&net, 2, 10_000_000).unwrap();
            for seed in 0..4 {
                let payoffs = random_tensors(2, m, seed * 7 + m as u64);
                assert!(has_accepted_profile(&payoffs, &profiles, eps), "seed {seed} m {m}");
            }
        }
    }

    #[test]
    fn small_nets_contain_approximate_equilibria() {
        for seed in 0..40 {
            for m in [2usize, 3] {
                let payoffs = random_tensors(2, m, seed * 7 + m as u64);
                let net = enumerate_net(m, 6, DEFAULT_ENUMERATION_CAP).unwrap();
                let profiles = enumerate_profiles(&net, 2, DEFAULT_ENUMERATION_CAP).unwrap();
                assert!(has_accepted_profile(&payoffs, &profiles, 0.5), "seed {seed} m {m}");
            }
        }
    }

    proptest! {
        #[test]
        fn wsne_acceptance_implies_ne(seed in any::<u64>(), m in 2usize..=3, s in 1usize..=3, eps in 0.0f64..0.6) {
            let payoffs = random_tensors(2, m, seed);
            let net = enumerate_net(m, s, DEFAULT_ENUMERATION_CAP).unwrap();
            let profiles = enumerate_profiles(&net, 2, DEFAULT_ENUMERATION_CAP).unwrap();
            for x in &profiles {
                let ws = check_equilibrium(&payoffs, x, eps, EquilibriumConcept::WellSupported, &[], &TOL);
                let ne = check_equilibrium(&payoffs, x, eps, EquilibriumConcept::Nash, &[], &TOL);
                prop_assert!(!ws.accepted || ne.accepted);
                prop_assert!(ne.regret <= ws.regret + 1e-12);
            }
        }

        #[test]
        fn diameter_slack_accepts_everything(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3) {
            let payoffs = random_tensors(n, m, seed);
            let net = enumerate_net(m, 2, DEFAULT_ENUMERATION_CAP).unwrap();
            for x in enumerate_profiles(&net, n, DEFAULT_ENUMERATION_CAP).unwrap() {
                for concept in [EquilibriumConcept::Nash, EquilibriumConcept::WellSupported] {
                    prop_assert!(check_equilibrium(&payoffs, &x, 2.0, concept, &[], &TOL).accepted);
                }
            }
        }
    }
}
