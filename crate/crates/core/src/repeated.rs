//! Infinitely repeated two-player games with continuation probability `delta`.
//!
//! Strategies are deterministic finite automata that observe the joint action
//! profile after each stage. Two automata playing each other produce an
//! eventually periodic sequence of joint states, so the discounted payoff
//! `sum_k delta^k u(s^k)` has an exact closed form: a finite prefix plus a
//! geometric tail over the cycle. [`analytic_payoff`] computes it that way;
//! [`truncated_payoff`] sums the series directly and [`simulate_payoff`]
//! estimates it by Monte Carlo with geometric stopping.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{self, ActionProfile, PlayerId, StrategicGame};

/// Largest stage index accepted by [`deviate_at`].
pub const MAX_DEVIATION_STAGE: usize = 1_000_000;

/// Default number of stages scanned by [`check_equilibrium`].
pub const DEFAULT_MAX_K: usize = 50;

/// Absolute tolerance on deviation gains in [`check_equilibrium`].
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-12;

/// State ids of the automata built by [`grim_trigger`] and [`forgiving_strategy`].
pub const COOPERATE: usize = 0;
pub const PUNISH: usize = 1;

const SIM_CHUNK: usize = 4096;

/// A deterministic Moore machine bound to one player of a game.
///
/// States are `0..num_states()`. Each state names the action the owning
/// player takes; after every stage the machine moves on the observed joint
/// profile (indexed as in [`StrategicGame::profile_index`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyAutomaton {
    player: PlayerId,
    num_actions: usize,
    num_profiles: usize,
    initial: usize,
    action_of: Vec<usize>,
    transition: Vec<u32>,
}

impl StrategyAutomaton {
    /// Builds an automaton for `player`; `next(state, profile_index)` must be
    /// defined for every state and every profile of `game`.
    pub fn new(
        game: &StrategicGame,
        player: PlayerId,
        initial: usize,
        action_of: Vec<usize>,
        next: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        game.validate_player(player)?;
        let num_states = action_of.len();
        if num_states == 0 {
            return Err(Error::invalid("automaton needs at least one state"));
        }
        if num_states > u32::MAX as usize {
            return Err(Error::invalid("too many automaton states"));
        }
        if initial >= num_states {
            return Err(Error::invalid(format!(
                "initial state {initial} out of range ({num_states} states)"
            )));
        }
        let num_actions = game.num_actions(player);
        if let Some(&a) = action_of.iter().find(|&&a| a >= num_actions) {
            return Err(Error::invalid(format!(
                "action index {a} out of range for player {}",
                game.player_name(player)
            )));
        }
        let num_profiles = game.num_profiles();
        let mut transition = Vec::with_capacity(num_states * num_profiles);
        for s in 0..num_states {
            for obs in 0..num_profiles {
                let t = next(s, obs);
                if t >= num_states {
                    return Err(Error::invalid(format!(
                        "transition from state {s} leads to unknown state {t}"
                    )));
                }
                transition.push(t as u32);
            }
        }
        Ok(StrategyAutomaton {
            player,
            num_actions,
            num_profiles,
            initial,
            action_of,
            transition,
        })
    }

    /// A one-state automaton that always plays `action`.
    pub fn always(game: &StrategicGame, player: PlayerId, action: usize) -> Result<Self> {
        StrategyAutomaton::new(game, player, 0, vec![action], |_, _| 0)
    }

    pub fn player(&self) -> PlayerId {
        self.player
    }

    pub fn num_states(&self) -> usize {
        self.action_of.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn action(&self, state: usize) -> usize {
        self.action_of[state]
    }

    pub fn next(&self, state: usize, profile_index: usize) -> usize {
        self.transition[state * self.num_profiles + profile_index] as usize
    }

    fn check_bound_to(&self, game: &StrategicGame, player: PlayerId) -> Result<()> {
        if self.player != player {
            return Err(Error::invalid(format!(
                "automaton plays for player {}, expected player {}",
                self.player.0, player.0
            )));
        }
        if self.num_profiles != game.num_profiles() || self.num_actions != game.num_actions(player)
        {
            return Err(Error::invalid("automaton is bound to a different game"));
        }
        Ok(())
    }

    /// Rebinds the automaton to `game.permute_players(order)`, where `game` is
    /// the game it was built for.
    pub fn for_permuted_game(&self, game: &StrategicGame, order: &[usize]) -> Result<Self> {
        let permuted = game.permute_players(order)?;
        let new_player = order
            .iter()
            .position(|&p| p == self.player.0)
            .map(PlayerId)
            .ok_or_else(|| Error::invalid("permutation does not contain the automaton's player"))?;
        StrategyAutomaton::new(
            &permuted,
            new_player,
            self.initial,
            self.action_of.clone(),
            |s, obs| {
                let original = game::permute_profile_back(&permuted.profile_at(obs), order);
                self.next(s, game.profile_index(&original))
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedPayoff {
    pub per_player: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatedGameConfig {
    pub delta: f64,
    pub truncation_tolerance: f64,
}

impl RepeatedGameConfig {
    pub fn new(delta: f64, truncation_tolerance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!(
                "delta must lie in [0, 1], got {delta}"
            )));
        }
        if truncation_tolerance.is_nan() || truncation_tolerance <= 0.0 {
            return Err(Error::invalid("truncation tolerance must be positive"));
        }
        Ok(RepeatedGameConfig {
            delta,
            truncation_tolerance,
        })
    }
}

fn require_two_players(game: &StrategicGame) -> Result<()> {
    if game.num_players() != 2 {
        return Err(Error::invalid(format!(
            "repeated-game analysis needs a 2-player game, got {} players",
            game.num_players()
        )));
    }
    Ok(())
}

fn check_pair(game: &StrategicGame, a: &StrategyAutomaton, b: &StrategyAutomaton) -> Result<()> {
    require_two_players(game)?;
    a.check_bound_to(game, PlayerId(0))?;
    b.check_bound_to(game, PlayerId(1))
}

fn check_discount(delta: f64) -> Result<()> {
    if delta == 1.0 {
        return Err(Error::Divergent);
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Joint play of two automata: returns the profile index played in
/// `states` and the successor joint state.
#[inline]
fn stage(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    states: (usize, usize),
) -> (usize, (usize, usize)) {
    // row-major index of (a, b) in a two-player game
    let idx = a.action(states.0) * game.num_actions(PlayerId(1)) + b.action(states.1);
    (idx, (a.next(states.0, idx), b.next(states.1, idx)))
}

/// The joint profiles of the first `stages` rounds.
pub fn play(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    stages: usize,
) -> Result<Vec<ActionProfile>> {
    check_pair(game, a, b)?;
    let mut states = (a.initial, b.initial);
    let mut out = Vec::with_capacity(stages);
    for _ in 0..stages {
        let (idx, next) = stage(game, a, b, states);
        out.push(game.profile_at(idx));
        states = next;
    }
    Ok(out)
}

/// `sum_{k < stages} delta^k u(s^k)`. Accepts `delta = 1`, which gives the
/// plain total over the horizon.
pub fn finite_horizon_payoff(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    delta: f64,
    stages: usize,
) -> Result<DiscountedPayoff> {
    check_pair(game, a, b)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "delta must lie in [0, 1], got {delta}"
        )));
    }
    let mut totals = vec![0.0; 2];
    let mut weight = 1.0;
    let mut states = (a.initial, b.initial);
    for _ in 0..stages {
        let (idx, next) = stage(game, a, b, states);
        for (t, u) in totals.iter_mut().zip(game.payoff_at(idx)) {
            *t += weight * u;
        }
        weight *= delta;
        states = next;
    }
    Ok(DiscountedPayoff { per_player: totals })
}

/// Exact discounted payoff `sum_{k>=0} delta^k u(s^k)` for `0 <= delta < 1`.
///
/// The joint state sequence is followed until a joint state repeats; the
/// cycle found is then summed in closed form as `C / (1 - delta^L)` where `C`
/// is the discounted payoff over one pass of the cycle and `L` its length.
pub fn analytic_payoff(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    delta: f64,
) -> Result<DiscountedPayoff> {
    check_pair(game, a, b)?;
    check_discount(delta)?;

    let mut first_seen: HashMap<(usize, usize), usize> = HashMap::new();
    // per stage: (discount weight, profile index)
    let mut trace: Vec<(f64, usize)> = Vec::new();
    let mut states = (a.initial, b.initial);
    let mut weight = 1.0;
    let cycle_start = loop {
        if let Some(&t0) = first_seen.get(&states) {
            break t0;
        }
        first_seen.insert(states, trace.len());
        let (idx, next) = stage(game, a, b, states);
        trace.push((weight, idx));
        weight *= delta;
        states = next;
    };
    let cycle_len = trace.len() - cycle_start;
    // delta^L, computed the same way the weights were
    let cycle_discount = (0..cycle_len).fold(1.0, |acc, _| acc * delta);

    let mut per_player = vec![0.0; 2];
    for (player, total) in per_player.iter_mut().enumerate() {
        let prefix: f64 = trace[..cycle_start]
            .iter()
            .map(|&(w, idx)| w * game.payoff_at(idx)[player])
            .sum();
        let cycle: f64 = trace[cycle_start..]
            .iter()
            .map(|&(w, idx)| w * game.payoff_at(idx)[player])
            .sum();
        *total = prefix + cycle / (1.0 - cycle_discount);
    }
    Ok(DiscountedPayoff { per_player })
}

/// Direct summation of the discounted series, stopped once the remaining tail
/// is bounded by `config.truncation_tolerance`.
pub fn truncated_payoff(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    config: &RepeatedGameConfig,
) -> Result<DiscountedPayoff> {
    check_pair(game, a, b)?;
    check_discount(config.delta)?;
    let bound = game
        .profiles()
        .flat_map(|p| game.payoff(&p).to_vec())
        .fold(0.0_f64, |m, u| m.max(u.abs()));
    let mut totals = vec![0.0; 2];
    let mut weight = 1.0;
    let mut states = (a.initial, b.initial);
    // tail after stage k is at most weight * bound / (1 - delta)
    while weight * bound / (1.0 - config.delta) > config.truncation_tolerance {
        let (idx, next) = stage(game, a, b, states);
        for (t, u) in totals.iter_mut().zip(game.payoff_at(idx)) {
            *t += weight * u;
        }
        weight *= config.delta;
        states = next;
    }
    Ok(DiscountedPayoff { per_player: totals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEstimate {
    pub mean: DiscountedPayoff,
    /// Standard error of the mean, per player.
    pub stderr: Vec<f64>,
    pub trials: usize,
}

/// Monte Carlo estimate of the discounted payoff.
///
/// Each trial plays stages until a stop event with probability `1 - delta`
/// fires after a stage, summing undiscounted stage payoffs; the expected sum
/// equals the discounted series. Trials are drawn in fixed chunks of 4096,
/// chunk `i` using ChaCha8 seeded with `seed` on stream `i`, so the result
/// depends only on `seed` and `trials`, not on the number of worker threads.
pub fn simulate_payoff(
    game: &StrategicGame,
    a: &StrategyAutomaton,
    b: &StrategyAutomaton,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<SimulationEstimate> {
    check_pair(game, a, b)?;
    check_discount(delta)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }

    let chunks = trials.div_ceil(SIM_CHUNK);
    let totals: Vec<[f64; 2]> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let n = SIM_CHUNK.min(trials - chunk * SIM_CHUNK);
            (0..n)
                .map(|_| {
                    let mut sum = [0.0; 2];
                    let mut states = (a.initial, b.initial);
                    loop {
                        let (idx, next) = stage(game, a, b, states);
                        let u = game.payoff_at(idx);
                        sum[0] += u[0];
                        sum[1] += u[1];
                        states = next;
                        if rng.random::<f64>() >= delta {
                            break sum;
                        }
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let n = totals.len() as f64;
    let mut mean = vec![0.0; 2];
    let mut stderr = vec![0.0; 2];
    for p in 0..2 {
        let m = totals.iter().map(|t| t[p]).sum::<f64>() / n;
        let var = if totals.len() > 1 {
            totals.iter().map(|t| (t[p] - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean[p] = m;
        stderr[p] = (var / n).sqrt();
    }
    Ok(SimulationEstimate {
        mean: DiscountedPayoff { per_player: mean },
        stderr,
        trials,
    })
}

fn two_state_pair(
    game: &StrategicGame,
    coop: &ActionProfile,
    punish: &ActionProfile,
    next: impl Fn(usize, usize) -> usize + Copy,
) -> Result<(StrategyAutomaton, StrategyAutomaton)> {
    require_two_players(game)?;
    game.validate_profile(coop)?;
    game.validate_profile(punish)?;
    let build = |p: PlayerId| {
        StrategyAutomaton::new(
            game,
            p,
            COOPERATE,
            vec![coop.action(p), punish.action(p)],
            next,
        )
    };
    Ok((build(PlayerId(0))?, build(PlayerId(1))?))
}

/// Grim trigger for both players: play the cooperative profile while every
/// observed profile so far equals it, otherwise play the punishment profile
/// forever.
pub fn grim_trigger(
    game: &StrategicGame,
    coop: &ActionProfile,
    punish: &ActionProfile,
) -> Result<(StrategyAutomaton, StrategyAutomaton)> {
    game.validate_profile(coop)?;
    let coop_idx = game.profile_index(coop);
    two_state_pair(game, coop, punish, move |s, obs| {
        if s == COOPERATE && obs == coop_idx {
            COOPERATE
        } else {
            PUNISH
        }
    })
}

/// Cooperates after observing either the cooperative or the punishment
/// profile and punishes after anything else. This is only an equilibrium
/// without discounting, so it is meant for finite-horizon inspection.
pub fn forgiving_strategy(
    game: &StrategicGame,
    coop: &ActionProfile,
    punish: &ActionProfile,
) -> Result<(StrategyAutomaton, StrategyAutomaton)> {
    game.validate_profile(coop)?;
    game.validate_profile(punish)?;
    let coop_idx = game.profile_index(coop);
    let punish_idx = game.profile_index(punish);
    two_state_pair(game, coop, punish, move |_, obs| {
        if obs == coop_idx || obs == punish_idx {
            COOPERATE
        } else {
            PUNISH
        }
    })
}

/// Follows `base` for stages `0..k`, plays `deviation_action` at stage `k`,
/// then resumes `base`'s transition logic from the state `base` would reach
/// after observing the stage-`k` profile.
///
/// Built as a product of `base` with a stage counter: `(k + 2) * |base|` states.
pub fn deviate_at(
    k: usize,
    base: &StrategyAutomaton,
    deviation_action: usize,
) -> Result<StrategyAutomaton> {
    if k > MAX_DEVIATION_STAGE {
        return Err(Error::invalid(format!(
            "deviation stage {k} exceeds the cap of {MAX_DEVIATION_STAGE}"
        )));
    }
    if deviation_action >= base.num_actions {
        return Err(Error::invalid(format!(
            "deviation action {deviation_action} out of range"
        )));
    }
    let n = base.num_states();
    let phases = k + 2;
    let total = phases * n;
    if total > u32::MAX as usize {
        return Err(Error::invalid("deviation automaton too large"));
    }
    let mut action_of = Vec::with_capacity(total);
    let mut transition = Vec::with_capacity(total * base.num_profiles);
    for phase in 0..phases {
        // phase k deviates; phases past k are the free-running base automaton
        let next_phase = (phase + 1).min(k + 1);
        for s in 0..n {
            action_of.push(if phase == k {
                deviation_action
            } else {
                base.action(s)
            });
            for obs in 0..base.num_profiles {
                transition.push((next_phase * n + base.next(s, obs)) as u32);
            }
        }
    }
    Ok(StrategyAutomaton {
        player: base.player,
        num_actions: base.num_actions,
        num_profiles: base.num_profiles,
        initial: base.initial,
        action_of,
        transition,
    })
}

/// Stage payoffs that determine the grim-trigger threshold for one player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    /// Payoff when everyone cooperates.
    pub coop: f64,
    /// Best payoff from a unilateral deviation against cooperation.
    pub temptation: f64,
    /// Payoff under the punishment profile.
    pub punishment: f64,
}

impl ThresholdParams {
    pub fn for_player(
        game: &StrategicGame,
        coop: &ActionProfile,
        punish: &ActionProfile,
        player: PlayerId,
    ) -> Result<Self> {
        game.validate_player(player)?;
        game.validate_profile(coop)?;
        game.validate_profile(punish)?;
        let temptation = (0..game.num_actions(player))
            .filter(|&a| a != coop.action(player))
            .map(|a| game.utility(player, &coop.with_action(player, a)))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(ThresholdParams {
            coop: game.utility(player, coop),
            temptation,
            punishment: game.utility(player, punish),
        })
    }

    /// The common parameters of a game that is symmetric with respect to
    /// the two profiles; errors if the players' parameters differ.
    pub fn symmetric(
        game: &StrategicGame,
        coop: &ActionProfile,
        punish: &ActionProfile,
    ) -> Result<Self> {
        require_two_players(game)?;
        let first = ThresholdParams::for_player(game, coop, punish, PlayerId(0))?;
        let second = ThresholdParams::for_player(game, coop, punish, PlayerId(1))?;
        if first != second {
            return Err(Error::invalid(format!(
                "players have different stage payoffs ({first:?} vs {second:?})"
            )));
        }
        Ok(first)
    }

    pub fn threshold(&self) -> Result<f64> {
        grim_trigger_threshold(self.coop, self.temptation, self.punishment)
    }
}

/// Minimal continuation probability at which grim trigger is an equilibrium:
/// `(d - c) / (d - p)` for cooperative payoff `c`, temptation `d` and
/// punishment `p`, requiring `d > c > p`.
pub fn grim_trigger_threshold(c: f64, d: f64, p: f64) -> Result<f64> {
    if ![c, d, p].iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("threshold parameters must be finite"));
    }
    if d <= c {
        return Err(Error::NoTemptation);
    }
    if c <= p {
        return Err(Error::NotSustainable);
    }
    Ok((d - c) / (d - p))
}

/// Per-player threshold report for a two-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameThreshold {
    pub params: Vec<ThresholdParams>,
    /// `None` for a player with no profitable deviation from cooperation.
    pub per_player: Vec<Option<f64>>,
    /// The largest per-player threshold: the game's grim-trigger threshold.
    pub delta_star: f64,
}

/// Threshold of the whole game: the largest per-player threshold.
pub fn game_threshold(
    game: &StrategicGame,
    coop: &ActionProfile,
    punish: &ActionProfile,
) -> Result<GameThreshold> {
    require_two_players(game)?;
    let mut params = Vec::new();
    let mut per_player = Vec::new();
    for p in 0..2 {
        let tp = ThresholdParams::for_player(game, coop, punish, PlayerId(p))?;
        per_player.push(match tp.threshold() {
            Ok(t) => Some(t),
            Err(Error::NoTemptation) => None,
            Err(e) => return Err(e),
        });
        params.push(tp);
    }
    let delta_star = per_player
        .iter()
        .flatten()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::NoTemptation)?;
    Ok(GameThreshold {
        params,
        per_player,
        delta_star,
    })
}

/// A symmetric 2x2 game with actions `Cooperate`/`Defect` and stage payoffs
/// `(C,C) = (c,c)`, `(D,C) = (d,s)`, `(C,D) = (s,d)`, `(D,D) = (p,p)`.
pub fn symmetric_dilemma(c: f64, d: f64, p: f64, s: f64) -> StrategicGame {
    let names = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    StrategicGame::from_fn(
        names(&["Row", "Col"]),
        vec![
            names(&["Cooperate", "Defect"]),
            names(&["Cooperate", "Defect"]),
        ],
        |prof| match prof.actions() {
            [0, 0] => vec![c, c],
            [1, 0] => vec![d, s],
            [0, 1] => vec![s, d],
            _ => vec![p, p],
        },
    )
    .expect("fixed 2x2 layout")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub player: PlayerId,
    pub k: usize,
    pub action: usize,
    /// Deviation payoff minus cooperative payoff.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub cooperative: DiscountedPayoff,
    /// The deviation with the largest gain, first found on ties.
    pub worst_deviation: Option<Deviation>,
}

/// One-shot deviation scan against grim trigger: for each player, each stage
/// `k` in `0..=max_k` and each non-cooperative action, compares the payoff of
/// deviating at `k` with the cooperative payoff.
pub fn check_equilibrium(
    game: &StrategicGame,
    coop: &ActionProfile,
    punish: &ActionProfile,
    delta: f64,
    max_k: usize,
) -> Result<EquilibriumReport> {
    let (grim_a, grim_b) = grim_trigger(game, coop, punish)?;
    let cooperative = analytic_payoff(game, &grim_a, &grim_b, delta)?;
    let mut worst: Option<Deviation> = None;
    for k in 0..=max_k {
        for player in [PlayerId(0), PlayerId(1)] {
            for action in (0..game.num_actions(player)).filter(|&a| a != coop.action(player)) {
                let payoff = if player.0 == 0 {
                    analytic_payoff(game, &deviate_at(k, &grim_a, action)?, &grim_b, delta)?
                } else {
                    analytic_payoff(game, &grim_a, &deviate_at(k, &grim_b, action)?, delta)?
                };
                let gain = payoff.per_player[player.0] - cooperative.per_player[player.0];
                if worst.is_none_or(|w| gain > w.gain) {
                    worst = Some(Deviation {
                        player,
                        k,
                        action,
                        gain,
                    });
                }
            }
        }
    }
    let is_equilibrium = worst.is_none_or(|w| w.gain <= EQUILIBRIUM_TOLERANCE);
    Ok(EquilibriumReport {
        is_equilibrium,
        cooperative,
        worst_deviation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin::*;
    use crate::game::return_game;

    fn profiles() -> (ActionProfile, ActionProfile) {
        (
            ActionProfile::new(vec![IMMEDIATE_REFUND, COMPLY]),
            ActionProfile::new(vec![NO_IMMEDIATE_REFUND, DONT_COMPLY]),
        )
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn grim_states_play_coop_then_punish() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        assert_eq!(m.action(COOPERATE), IMMEDIATE_REFUND);
        assert_eq!(m.action(PUNISH), NO_IMMEDIATE_REFUND);
        assert_eq!(c.action(COOPERATE), COMPLY);
        assert_eq!(c.action(PUNISH), DONT_COMPLY);
        assert_eq!(m.initial(), COOPERATE);
    }

    #[test]
    fn grim_against_itself_always_cooperates() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        assert!(play(&g, &m, &c, 25).unwrap().iter().all(|p| *p == coop));
    }

    #[test]
    fn grim_punishes_after_stage_zero_defection() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, _) = grim_trigger(&g, &coop, &punish).unwrap();
        let defector = StrategyAutomaton::always(&g, CUSTOMER, DONT_COMPLY).unwrap();
        let run = play(&g, &m, &defector, 6).unwrap();
        assert_eq!(run[0].action(RETAILER), IMMEDIATE_REFUND);
        assert!(run[1..]
            .iter()
            .all(|p| p.action(RETAILER) == NO_IMMEDIATE_REFUND));
    }

    #[test]
    fn grim_rejects_invalid_profiles() {
        let g = return_game();
        let (coop, _) = profiles();
        assert!(grim_trigger(&g, &coop, &ActionProfile::new(vec![0, 5])).is_err());
        assert!(grim_trigger(&g, &ActionProfile::new(vec![0]), &coop).is_err());
        assert!(forgiving_strategy(&g, &coop, &ActionProfile::new(vec![2, 0])).is_err());
    }

    #[test]
    fn deviation_at_zero_plays_immediately() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (_, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let dev = deviate_at(0, &c, DONT_COMPLY).unwrap();
        assert_eq!(dev.action(dev.initial()), DONT_COMPLY);
    }

    #[test]
    fn deviation_at_three_path() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let dev = deviate_at(3, &c, DONT_COMPLY).unwrap();
        let run = play(&g, &m, &dev, 10).unwrap();
        assert_eq!(&run[..3], &[coop.clone(), coop.clone(), coop.clone()]);
        assert_eq!(
            run[3],
            ActionProfile::new(vec![IMMEDIATE_REFUND, DONT_COMPLY])
        );
        assert!(run[4..].iter().all(|p| *p == punish));
    }

    #[test]
    fn noop_deviation_changes_nothing() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let base = analytic_payoff(&g, &m, &c, 0.7).unwrap();
        for k in [0, 1, 5] {
            let dev = deviate_at(k, &c, COMPLY).unwrap();
            let v = analytic_payoff(&g, &m, &dev, 0.7).unwrap();
            for p in 0..2 {
                assert!(close(v.per_player[p], base.per_player[p]));
            }
        }
    }

    #[test]
    fn deviation_cap_enforced() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, _) = grim_trigger(&g, &coop, &punish).unwrap();
        assert!(deviate_at(MAX_DEVIATION_STAGE + 1, &m, NO_IMMEDIATE_REFUND).is_err());
        assert!(deviate_at(2, &m, 9).is_err());
    }

    #[test]
    fn builtin_cooperative_payoff() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let v = analytic_payoff(&g, &m, &c, 0.5).unwrap();
        assert_eq!(v.per_player, vec![2.0, 2.0]);
    }

    #[test]
    fn always_punish_pays_zero() {
        let g = return_game();
        let m = StrategyAutomaton::always(&g, RETAILER, NO_IMMEDIATE_REFUND).unwrap();
        let c = StrategyAutomaton::always(&g, CUSTOMER, DONT_COMPLY).unwrap();
        for delta in [0.0, 0.3, 0.99] {
            assert_eq!(
                analytic_payoff(&g, &m, &c, delta).unwrap().per_player,
                vec![0.0, 0.0]
            );
        }
    }

    #[test]
    fn deviation_at_threshold_is_indifferent() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let dev = deviate_at(0, &c, DONT_COMPLY).unwrap();
        let v = analytic_payoff(&g, &m, &dev, 0.5).unwrap();
        assert_eq!(v.per_player[1], 2.0);
    }

    #[test]
    fn divergent_and_invalid_delta() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        assert!(matches!(
            analytic_payoff(&g, &m, &c, 1.0),
            Err(Error::Divergent)
        ));
        assert!(analytic_payoff(&g, &m, &c, -0.1).is_err());
        assert!(analytic_payoff(&g, &m, &c, f64::NAN).is_err());
        assert!(simulate_payoff(&g, &m, &c, 1.0, 10, 1).is_err());
    }

    #[test]
    fn automata_must_match_roles() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        assert!(analytic_payoff(&g, &c, &m, 0.5).is_err());
    }

    #[test]
    fn simulation_with_zero_delta_plays_one_stage() {
        let g = return_game();
        let m = StrategyAutomaton::always(&g, RETAILER, IMMEDIATE_REFUND).unwrap();
        let c = StrategyAutomaton::always(&g, CUSTOMER, DONT_COMPLY).unwrap();
        let est = simulate_payoff(&g, &m, &c, 0.0, 500, 3).unwrap();
        assert_eq!(est.mean.per_player, vec![-1.0, 2.0]);
        assert_eq!(est.stderr, vec![0.0, 0.0]);
    }

    #[test]
    fn simulation_is_deterministic() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let a = simulate_payoff(&g, &m, &c, 0.7, 10_000, 99).unwrap();
        let b = simulate_payoff(&g, &m, &c, 0.7, 10_000, 99).unwrap();
        assert_eq!(a, b);
        let other = simulate_payoff(&g, &m, &c, 0.7, 10_000, 100).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn simulation_rejects_zero_trials() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        assert!(simulate_payoff(&g, &m, &c, 0.5, 0, 1).is_err());
    }

    #[test]
    fn threshold_values() {
        assert_eq!(grim_trigger_threshold(1.0, 2.0, 0.0).unwrap(), 0.5);
        assert!(close(
            grim_trigger_threshold(1.0, 3.0, 0.0).unwrap(),
            2.0 / 3.0
        ));
        assert_eq!(grim_trigger_threshold(2.0, 3.0, 1.0).unwrap(), 0.5);
        assert!(matches!(
            grim_trigger_threshold(1.0, 1.0, 0.0),
            Err(Error::NoTemptation)
        ));
        assert!(matches!(
            grim_trigger_threshold(1.0, 2.0, 1.0),
            Err(Error::NotSustainable)
        ));
    }

    #[test]
    fn return_game_threshold_params() {
        let g = return_game();
        let (coop, punish) = profiles();
        let tp = ThresholdParams::symmetric(&g, &coop, &punish).unwrap();
        assert_eq!(
            tp,
            ThresholdParams {
                coop: 1.0,
                temptation: 2.0,
                punishment: 0.0
            }
        );
        assert_eq!(game_threshold(&g, &coop, &punish).unwrap().delta_star, 0.5);
    }

    #[test]
    fn asymmetric_game_threshold_takes_max() {
        let g = StrategicGame::from_fn(
            vec!["A".into(), "B".into()],
            vec![vec!["c".into(), "d".into()], vec!["c".into(), "d".into()]],
            |p| match p.actions() {
                [0, 0] => vec![1.0, 1.0],
                [1, 0] => vec![3.0, -1.0],
                [0, 1] => vec![-1.0, 2.0],
                _ => vec![0.0, 0.0],
            },
        )
        .unwrap();
        let coop = ActionProfile::new(vec![0, 0]);
        let punish = ActionProfile::new(vec![1, 1]);
        assert!(ThresholdParams::symmetric(&g, &coop, &punish).is_err());
        let t = game_threshold(&g, &coop, &punish).unwrap();
        assert!(close(t.delta_star, 2.0 / 3.0));
        assert_eq!(t.per_player[1], Some(0.5));
    }

    #[test]
    fn builtin_equilibrium_checks() {
        let g = return_game();
        let (coop, punish) = profiles();
        assert!(
            check_equilibrium(&g, &coop, &punish, 0.6, 50)
                .unwrap()
                .is_equilibrium
        );
        let below = check_equilibrium(&g, &coop, &punish, 0.4, 50).unwrap();
        assert!(!below.is_equilibrium);
        assert_eq!(below.worst_deviation.unwrap().k, 0);
        let at = check_equilibrium(&g, &coop, &punish, 0.5, 50).unwrap();
        assert!(at.is_equilibrium);
        assert!(at.worst_deviation.unwrap().gain.abs() <= EQUILIBRIUM_TOLERANCE);
    }

    #[test]
    fn forgiving_transitions() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = forgiving_strategy(&g, &coop, &punish).unwrap();
        let nir_dc = g.profile_index(&punish);
        let ir_c = g.profile_index(&coop);
        let ir_dc = g.profile_index(&ActionProfile::new(vec![IMMEDIATE_REFUND, DONT_COMPLY]));
        for aut in [&m, &c] {
            for s in [COOPERATE, PUNISH] {
                assert_eq!(aut.next(s, nir_dc), COOPERATE);
                assert_eq!(aut.next(s, ir_c), COOPERATE);
                assert_eq!(aut.next(s, ir_dc), PUNISH);
            }
        }
        assert_eq!(m.action(COOPERATE), IMMEDIATE_REFUND);
        assert_eq!(c.action(PUNISH), DONT_COMPLY);
    }

    #[test]
    fn forgiving_finite_horizon_at_delta_one() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = forgiving_strategy(&g, &coop, &punish).unwrap();
        let v = finite_horizon_payoff(&g, &m, &c, 1.0, 10).unwrap();
        assert_eq!(v.per_player, vec![10.0, 10.0]);
        // one defection: punished once, then (punish, punish) restores cooperation
        let dev = deviate_at(2, &c, DONT_COMPLY).unwrap();
        let run = play(&g, &m, &dev, 6).unwrap();
        assert_eq!(run[3], punish);
        assert_eq!(run[4], coop);
    }

    #[test]
    fn truncated_matches_analytic() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let dev = deviate_at(4, &m, NO_IMMEDIATE_REFUND).unwrap();
        let cfg = RepeatedGameConfig::new(0.8, 1e-13).unwrap();
        let exact = analytic_payoff(&g, &dev, &c, 0.8).unwrap();
        let series = truncated_payoff(&g, &dev, &c, &cfg).unwrap();
        for p in 0..2 {
            assert!((exact.per_player[p] - series.per_player[p]).abs() < 1e-11);
        }
    }

    #[test]
    fn config_validation() {
        assert!(RepeatedGameConfig::new(1.0, 1e-9).is_ok());
        assert!(RepeatedGameConfig::new(1.1, 1e-9).is_err());
        assert!(RepeatedGameConfig::new(0.5, 0.0).is_err());
    }

    #[test]
    fn swapping_roles_swaps_payoffs() {
        let g = return_game();
        let (coop, punish) = profiles();
        let (m, c) = grim_trigger(&g, &coop, &punish).unwrap();
        let dev = deviate_at(2, &c, DONT_COMPLY).unwrap();
        let order = [1, 0];
        let swapped = g.permute_players(&order).unwrap();
        let v = analytic_payoff(&g, &m, &dev, 0.65).unwrap();
        let w = analytic_payoff(
            &swapped,
            &dev.for_permuted_game(&g, &order).unwrap(),
            &m.for_permuted_game(&g, &order).unwrap(),
            0.65,
        )
        .unwrap();
        assert_eq!(v.per_player, vec![w.per_player[1], w.per_player[0]]);
    }
}
