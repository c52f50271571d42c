//! Finite strategic-form games.
//!
//! A [`StrategicGame`] holds a list of players, an ordered action list per
//! player and a complete payoff table over the Cartesian product of action
//! sets. Computation works on indices; names are carried for reporting and
//! for the text spec format:
//!
//! ```text
//! players: Retailer, Customer
//! actions Retailer: ImmediateRefund, NoImmediateRefund
//! actions Customer: Comply, DontComply
//! payoff ImmediateRefund Comply: 1 1
//! payoff ImmediateRefund DontComply: -1 2
//! payoff NoImmediateRefund Comply: 2 -1
//! payoff NoImmediateRefund DontComply: 0 0
//! ```

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linefmt::{self, Line};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// One action index per player, in the game's player order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(Vec<usize>);

impl ActionProfile {
    pub fn new(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, player: PlayerId) -> usize {
        self.0[player.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The same profile with `player`'s action replaced.
    pub fn with_action(&self, player: PlayerId, action: usize) -> Self {
        let mut actions = self.0.clone();
        actions[player.0] = action;
        ActionProfile(actions)
    }
}

impl From<Vec<usize>> for ActionProfile {
    fn from(actions: Vec<usize>) -> Self {
        ActionProfile(actions)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategicGame {
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    /// Payoff vectors indexed by flat profile index (row-major, last player fastest).
    payoffs: Vec<Vec<f64>>,
}

impl StrategicGame {
    /// Builds a game from an explicit payoff list. Every profile must appear exactly once.
    pub fn new(
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        entries: impl IntoIterator<Item = (ActionProfile, Vec<f64>)>,
    ) -> Result<Self> {
        check_names(&players, &actions)?;
        let shell = StrategicGame {
            players,
            actions,
            payoffs: Vec::new(),
        };
        let mut table: Vec<Option<Vec<f64>>> = vec![None; shell.num_profiles()];
        for (profile, payoff) in entries {
            shell.validate_profile(&profile)?;
            if payoff.len() != shell.num_players() {
                return Err(Error::invalid(format!(
                    "payoff vector for {} has {} entries, expected {}",
                    shell.describe_profile(&profile),
                    payoff.len(),
                    shell.num_players()
                )));
            }
            let slot = &mut table[shell.profile_index(&profile)];
            if slot.is_some() {
                return Err(Error::invalid(format!(
                    "duplicate payoff for {}",
                    shell.describe_profile(&profile)
                )));
            }
            *slot = Some(payoff);
        }
        let mut payoffs = Vec::with_capacity(table.len());
        for (idx, slot) in table.into_iter().enumerate() {
            match slot {
                Some(p) => payoffs.push(p),
                None => {
                    return Err(Error::MissingPayoff {
                        profile: shell.describe_profile(&shell.profile_at(idx)),
                    })
                }
            }
        }
        Ok(StrategicGame { payoffs, ..shell })
    }

    /// Builds a game whose payoffs are computed by `f` for every profile.
    pub fn from_fn(
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        f: impl Fn(&ActionProfile) -> Vec<f64>,
    ) -> Result<Self> {
        check_names(&players, &actions)?;
        let shell = StrategicGame {
            players,
            actions,
            payoffs: Vec::new(),
        };
        let entries: Vec<_> = shell
            .profiles()
            .map(|p| {
                let u = f(&p);
                (p, u)
            })
            .collect();
        StrategicGame::new(shell.players, shell.actions, entries)
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn player_names(&self) -> &[String] {
        &self.players
    }

    pub fn player_name(&self, player: PlayerId) -> &str {
        &self.players[player.0]
    }

    pub fn player_index(&self, name: &str) -> Option<PlayerId> {
        self.players.iter().position(|p| p == name).map(PlayerId)
    }

    pub fn num_actions(&self, player: PlayerId) -> usize {
        self.actions[player.0].len()
    }

    pub fn action_names(&self, player: PlayerId) -> &[String] {
        &self.actions[player.0]
    }

    pub fn action_index(&self, player: PlayerId, name: &str) -> Option<usize> {
        self.actions[player.0].iter().position(|a| a == name)
    }

    pub fn num_profiles(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    pub fn validate_player(&self, player: PlayerId) -> Result<()> {
        if player.0 < self.num_players() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "player index {} out of range for a {}-player game",
                player.0,
                self.num_players()
            )))
        }
    }

    pub fn validate_profile(&self, profile: &ActionProfile) -> Result<()> {
        if profile.len() != self.num_players() {
            return Err(Error::invalid(format!(
                "profile has {} actions, game has {} players",
                profile.len(),
                self.num_players()
            )));
        }
        for (i, (&a, acts)) in profile.0.iter().zip(&self.actions).enumerate() {
            if a >= acts.len() {
                return Err(Error::invalid(format!(
                    "action index {a} out of range for player {}",
                    self.players[i]
                )));
            }
        }
        Ok(())
    }

    /// Flat row-major index of a valid profile. Lexicographic profile order
    /// coincides with index order.
    pub fn profile_index(&self, profile: &ActionProfile) -> usize {
        profile
            .0
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, acts)| acc * acts.len() + a)
    }

    pub fn profile_at(&self, mut index: usize) -> ActionProfile {
        let mut actions = vec![0; self.num_players()];
        for (slot, acts) in actions.iter_mut().zip(&self.actions).rev() {
            *slot = index % acts.len();
            index /= acts.len();
        }
        ActionProfile(actions)
    }

    /// All profiles in lexicographic order.
    pub fn profiles(&self) -> impl Iterator<Item = ActionProfile> + '_ {
        (0..self.num_profiles()).map(move |i| self.profile_at(i))
    }

    pub fn payoff(&self, profile: &ActionProfile) -> &[f64] {
        &self.payoffs[self.profile_index(profile)]
    }

    pub fn payoff_at(&self, profile_index: usize) -> &[f64] {
        &self.payoffs[profile_index]
    }

    pub fn utility(&self, player: PlayerId, profile: &ActionProfile) -> f64 {
        self.payoff(profile)[player.0]
    }

    pub fn profile_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<ActionProfile> {
        if names.len() != self.num_players() {
            return Err(Error::invalid(format!(
                "expected {} action names, got {}",
                self.num_players(),
                names.len()
            )));
        }
        let actions = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                self.action_index(PlayerId(i), n.as_ref()).ok_or_else(|| {
                    Error::invalid(format!(
                        "unknown action `{}` for player {}",
                        n.as_ref(),
                        self.players[i]
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ActionProfile(actions))
    }

    /// Human-readable `(ActionA, ActionB)` rendering of a valid profile.
    pub fn describe_profile(&self, profile: &ActionProfile) -> String {
        let names: Vec<&str> = profile
            .0
            .iter()
            .enumerate()
            .map(|(i, &a)| self.actions[i][a].as_str())
            .collect();
        format!("({})", names.join(", "))
    }

    /// Reorders players: player `i` of the result is player `order[i]` of `self`.
    pub fn permute_players(&self, order: &[usize]) -> Result<StrategicGame> {
        check_permutation(order, self.num_players())?;
        let players = order.iter().map(|&i| self.players[i].clone()).collect();
        let actions = order.iter().map(|&i| self.actions[i].clone()).collect();
        StrategicGame::from_fn(players, actions, |p| {
            let original = permute_profile_back(p, order);
            let u = self.payoff(&original);
            order.iter().map(|&i| u[i]).collect()
        })
    }

    /// Parses the line-oriented game spec format (see module docs).
    pub fn parse(text: &str) -> Result<StrategicGame> {
        let lines = linefmt::parse_lines(text)?;
        let mut players: Option<Vec<String>> = None;
        let mut actions: HashMap<usize, Vec<String>> = HashMap::new();
        let mut payoff_lines: Vec<&Line> = Vec::new();

        for line in &lines {
            match line.keyword() {
                "players" => {
                    if players.is_some() {
                        return Err(line.error("duplicate `players` line"));
                    }
                    if !line.args().is_empty() {
                        return Err(line.error("`players` takes no arguments before `:`"));
                    }
                    players = Some(linefmt::comma_list(line)?);
                }
                "actions" => {
                    let names = players
                        .as_ref()
                        .ok_or_else(|| line.error("`actions` before `players`"))?;
                    let [player] = line.args() else {
                        return Err(line.error("expected `actions <player>: a, b, ...`"));
                    };
                    let idx = names
                        .iter()
                        .position(|p| p == player)
                        .ok_or_else(|| line.error(format!("unknown player `{player}`")))?;
                    if actions.insert(idx, linefmt::comma_list(line)?).is_some() {
                        return Err(line.error(format!("duplicate actions for `{player}`")));
                    }
                }
                "payoff" => payoff_lines.push(line),
                other => return Err(line.error(format!("unknown keyword `{other}`"))),
            }
        }

        let players = players.ok_or_else(|| Error::parse(1, "missing `players` line"))?;
        let mut action_lists = Vec::with_capacity(players.len());
        for (i, name) in players.iter().enumerate() {
            let acts = actions
                .remove(&i)
                .ok_or_else(|| Error::parse(1, format!("missing `actions {name}` line")))?;
            action_lists.push(acts);
        }
        check_names(&players, &action_lists).map_err(|e| Error::parse(1, e.to_string()))?;

        let shell = StrategicGame {
            players,
            actions: action_lists,
            payoffs: Vec::new(),
        };
        let mut entries = Vec::with_capacity(payoff_lines.len());
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for line in payoff_lines {
            let profile = shell
                .profile_from_names(line.args())
                .map_err(|e| line.error(e.to_string()))?;
            let values = line
                .value
                .split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| line.error(format!("invalid payoff value `{v}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != shell.num_players() {
                return Err(line.error(format!(
                    "expected {} payoff values, got {}",
                    shell.num_players(),
                    values.len()
                )));
            }
            if let Some(prev) = seen.insert(shell.profile_index(&profile), line.number) {
                return Err(line.error(format!(
                    "duplicate payoff for {} (first given on line {prev})",
                    shell.describe_profile(&profile)
                )));
            }
            entries.push((profile, values));
        }
        StrategicGame::new(shell.players, shell.actions, entries)
    }

    /// Renders the game in the spec format accepted by [`StrategicGame::parse`].
    pub fn to_spec_string(&self) -> String {
        let mut out = format!("players: {}\n", self.players.join(", "));
        for (p, acts) in self.players.iter().zip(&self.actions) {
            out.push_str(&format!("actions {p}: {}\n", acts.join(", ")));
        }
        for profile in self.profiles() {
            let names: Vec<&str> = profile
                .0
                .iter()
                .enumerate()
                .map(|(i, &a)| self.actions[i][a].as_str())
                .collect();
            let values: Vec<String> = self.payoff(&profile).iter().map(f64::to_string).collect();
            out.push_str(&format!(
                "payoff {}: {}\n",
                names.join(" "),
                values.join(" ")
            ));
        }
        out
    }
}

impl fmt::Display for StrategicGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec_string())
    }
}

fn check_names(players: &[String], actions: &[Vec<String>]) -> Result<()> {
    if players.is_empty() {
        return Err(Error::invalid("a game needs at least one player"));
    }
    if actions.len() != players.len() {
        return Err(Error::invalid(format!(
            "{} players but {} action lists",
            players.len(),
            actions.len()
        )));
    }
    let valid =
        |s: &str| !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || c == ',' || c == ':');
    for (i, p) in players.iter().enumerate() {
        if !valid(p) {
            return Err(Error::invalid(format!("invalid player name `{p}`")));
        }
        if players[..i].contains(p) {
            return Err(Error::invalid(format!("duplicate player `{p}`")));
        }
    }
    for (p, acts) in players.iter().zip(actions) {
        if acts.is_empty() {
            return Err(Error::invalid(format!("player `{p}` has no actions")));
        }
        for (j, a) in acts.iter().enumerate() {
            if !valid(a) {
                return Err(Error::invalid(format!("invalid action name `{a}`")));
            }
            if acts[..j].contains(a) {
                return Err(Error::invalid(format!("duplicate action `{a}` for `{p}`")));
            }
        }
    }
    Ok(())
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid(
            "permutation length does not match player count",
        ));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid("not a permutation of the players"));
        }
    }
    Ok(())
}

/// Maps a profile of a permuted game back to the original player order.
pub(crate) fn permute_profile_back(profile: &ActionProfile, order: &[usize]) -> ActionProfile {
    let mut original = vec![0; order.len()];
    for (new_pos, &old) in order.iter().enumerate() {
        original[old] = profile.0[new_pos];
    }
    ActionProfile(original)
}

/// Index constants for [`return_game`].
pub mod builtin {
    use super::PlayerId;

    pub const RETAILER: PlayerId = PlayerId(0);
    pub const CUSTOMER: PlayerId = PlayerId(1);

    pub const IMMEDIATE_REFUND: usize = 0;
    pub const NO_IMMEDIATE_REFUND: usize = 1;
    pub const COMPLY: usize = 0;
    pub const DONT_COMPLY: usize = 1;
}

/// The two-player return-processing game between the platform and a customer.
pub fn return_game() -> StrategicGame {
    let players = vec!["Retailer".to_owned(), "Customer".to_owned()];
    let actions = vec![
        vec!["ImmediateRefund".to_owned(), "NoImmediateRefund".to_owned()],
        vec!["Comply".to_owned(), "DontComply".to_owned()],
    ];
    let entries = [
        (vec![0, 0], vec![1.0, 1.0]),
        (vec![0, 1], vec![-1.0, 2.0]),
        (vec![1, 0], vec![2.0, -1.0]),
        (vec![1, 1], vec![0.0, 0.0]),
    ];
    StrategicGame::new(
        players,
        actions,
        entries.into_iter().map(|(a, u)| (ActionProfile(a), u)),
    )
    .expect("built-in game is well formed")
}

/// The set of actions maximizing `player`'s utility when every other player's
/// action is fixed by `others`. `others` has one slot per player; the slot for
/// `player` must be `None` and every other slot `Some`.
pub fn best_responses(
    game: &StrategicGame,
    player: PlayerId,
    others: &[Option<usize>],
) -> Result<Vec<usize>> {
    game.validate_player(player)?;
    if others.len() != game.num_players() {
        return Err(Error::invalid(format!(
            "partial profile has {} slots, game has {} players",
            others.len(),
            game.num_players()
        )));
    }
    let mut fixed = Vec::with_capacity(others.len());
    for (i, slot) in others.iter().enumerate() {
        match (i == player.0, slot) {
            (true, None) => fixed.push(0),
            (true, Some(_)) => {
                return Err(Error::invalid(format!(
                    "partial profile fixes the responding player {}",
                    game.players[i]
                )))
            }
            (false, Some(a)) => fixed.push(*a),
            (false, None) => {
                return Err(Error::invalid(format!(
                    "partial profile leaves player {} unfixed",
                    game.players[i]
                )))
            }
        }
    }
    let base = ActionProfile(fixed);
    game.validate_profile(&base)?;
    Ok(best_responses_unchecked(game, player, &base))
}

fn best_responses_unchecked(
    game: &StrategicGame,
    player: PlayerId,
    base: &ActionProfile,
) -> Vec<usize> {
    let utilities: Vec<f64> = (0..game.num_actions(player))
        .map(|a| game.utility(player, &base.with_action(player, a)))
        .collect();
    let best = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // exact comparison: payoffs are compared as given, no tolerance
    (0..utilities.len())
        .filter(|&a| utilities[a] == best)
        .collect()
}

/// Every pure-strategy Nash equilibrium, found by exhaustive enumeration, in
/// lexicographic profile order.
pub fn find_pure_nash(game: &StrategicGame) -> Vec<ActionProfile> {
    game.profiles()
        .filter(|profile| is_pure_nash(game, profile))
        .collect()
}

/// True if every player's action in `profile` is a best response to the rest.
pub fn is_pure_nash(game: &StrategicGame, profile: &ActionProfile) -> bool {
    (0..game.num_players())
        .map(PlayerId)
        .all(|p| best_responses_unchecked(game, p, profile).contains(&profile.action(p)))
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn matching_pennies() -> StrategicGame {
        StrategicGame::from_fn(
            names(&["Row", "Col"]),
            vec![names(&["H", "T"]), names(&["H", "T"])],
            |p| {
                if p.actions()[0] == p.actions()[1] {
                    vec![1.0, -1.0]
                } else {
                    vec![-1.0, 1.0]
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn return_game_payoffs() {
        let g = return_game();
        let ir_c = ActionProfile::new(vec![IMMEDIATE_REFUND, COMPLY]);
        let ir_dc = ActionProfile::new(vec![IMMEDIATE_REFUND, DONT_COMPLY]);
        let nir_c = ActionProfile::new(vec![NO_IMMEDIATE_REFUND, COMPLY]);
        let nir_dc = ActionProfile::new(vec![NO_IMMEDIATE_REFUND, DONT_COMPLY]);
        assert_eq!(g.payoff(&ir_c), &[1.0, 1.0]);
        assert_eq!(g.payoff(&ir_dc), &[-1.0, 2.0]);
        assert_eq!(g.payoff(&nir_c), &[2.0, -1.0]);
        assert_eq!(g.payoff(&nir_dc), &[0.0, 0.0]);
    }

    #[test]
    fn builtin_best_responses() {
        let g = return_game();
        assert_eq!(
            best_responses(&g, RETAILER, &[None, Some(COMPLY)]).unwrap(),
            vec![NO_IMMEDIATE_REFUND]
        );
        assert_eq!(
            best_responses(&g, CUSTOMER, &[Some(IMMEDIATE_REFUND), None]).unwrap(),
            vec![DONT_COMPLY]
        );
    }

    #[test]
    fn single_action_best_response() {
        let g = StrategicGame::from_fn(
            names(&["A", "B"]),
            vec![names(&["x"]), names(&["y"])],
            |_| vec![3.0, -2.0],
        )
        .unwrap();
        assert_eq!(
            best_responses(&g, PlayerId(1), &[Some(0), None]).unwrap(),
            vec![0]
        );
        assert_eq!(find_pure_nash(&g), vec![ActionProfile::new(vec![0, 0])]);
    }

    #[test]
    fn ties_return_all_maximizers() {
        let g = StrategicGame::from_fn(
            names(&["A", "B"]),
            vec![names(&["x", "y", "z"]), names(&["u"])],
            |p| vec![if p.actions()[0] == 1 { 0.0 } else { 5.0 }, 0.0],
        )
        .unwrap();
        assert_eq!(
            best_responses(&g, PlayerId(0), &[None, Some(0)]).unwrap(),
            vec![0, 2]
        );
    }

    #[test]
    fn bad_partial_profiles() {
        let g = return_game();
        assert!(best_responses(&g, RETAILER, &[Some(0), Some(0)]).is_err());
        assert!(best_responses(&g, RETAILER, &[None, None]).is_err());
        assert!(best_responses(&g, RETAILER, &[None]).is_err());
        assert!(best_responses(&g, RETAILER, &[None, Some(7)]).is_err());
        assert!(best_responses(&g, PlayerId(2), &[None, Some(0)]).is_err());
    }

    #[test]
    fn builtin_nash() {
        let g = return_game();
        assert_eq!(
            find_pure_nash(&g),
            vec![ActionProfile::new(vec![NO_IMMEDIATE_REFUND, DONT_COMPLY])]
        );
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        assert!(find_pure_nash(&matching_pennies()).is_empty());
    }

    #[test]
    fn strictly_dominant_profile() {
        // each player gets +10 for playing action 2, regardless of the other
        let g = StrategicGame::from_fn(
            names(&["A", "B"]),
            vec![names(&["a0", "a1", "a2"]), names(&["b0", "b1", "b2"])],
            |p| {
                let a = p.actions();
                vec![
                    if a[0] == 2 { 10.0 } else { a[1] as f64 },
                    if a[1] == 2 { 10.0 } else { a[0] as f64 },
                ]
            },
        )
        .unwrap();
        assert_eq!(find_pure_nash(&g), vec![ActionProfile::new(vec![2, 2])]);
    }

    #[test]
    fn profile_index_round_trip() {
        let g = StrategicGame::from_fn(
            names(&["A", "B", "C"]),
            vec![
                names(&["a", "b"]),
                names(&["c", "d", "e"]),
                names(&["f", "g"]),
            ],
            |_| vec![0.0; 3],
        )
        .unwrap();
        let all: Vec<_> = g.profiles().collect();
        assert_eq!(all.len(), 12);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted, "enumeration is lexicographic");
        for (i, p) in all.iter().enumerate() {
            assert_eq!(g.profile_index(p), i);
        }
    }

    #[test]
    fn parse_builtin_spec() {
        let text = "players: Retailer, Customer
actions Retailer: ImmediateRefund, NoImmediateRefund
actions Customer: Comply, DontComply
payoff ImmediateRefund Comply: 1 1
payoff ImmediateRefund DontComply: -1 2
payoff NoImmediateRefund Comply: 2 -1
payoff NoImmediateRefund DontComply: 0 0
";
        assert_eq!(StrategicGame::parse(text).unwrap(), return_game());
        let reparsed = StrategicGame::parse(&return_game().to_spec_string()).unwrap();
        assert_eq!(reparsed, return_game());
    }

    #[test]
    fn parse_whitespace_insensitive() {
        let text =
            "  players :Retailer ,Customer\nactions   Retailer:ImmediateRefund,NoImmediateRefund\n\
actions Customer :  Comply ,  DontComply\npayoff  ImmediateRefund   Comply :1  1\n\
payoff ImmediateRefund DontComply:-1 2\npayoff NoImmediateRefund Comply:   2 -1\n\
payoff NoImmediateRefund DontComply:0 0";
        assert_eq!(StrategicGame::parse(text).unwrap(), return_game());
    }

    #[test]
    fn parse_missing_payoff_names_profile() {
        let text = "players: A, B\nactions A: x, y\nactions B: u, v\n\
payoff x u: 1 1\npayoff x v: 1 1\npayoff y u: 1 1\n";
        let err = StrategicGame::parse(text).unwrap_err();
        assert!(err.to_string().contains("(y, v)"), "{err}");
    }

    #[test]
    fn parse_duplicate_payoff_rejected() {
        let text = "players: A\nactions A: x\npayoff x: 1\npayoff x: 2\n";
        let err = StrategicGame::parse(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "actions A: x\n",
            "players: A\n",
            "players: A\nactions B: x\n",
            "players: A\nactions A: x\npayoff y: 1\n",
            "players: A\nactions A: x\npayoff x: 1 2\n",
            "players: A\nactions A: x\npayoff x: one\n",
            "players: A\nactions A: x, x\npayoff x: 1\n",
            "players: A\nactions A: x\nbogus: 1\n",
        ] {
            assert!(StrategicGame::parse(bad).is_err(), "accepted: {bad:?}");
        }
    }

    #[test]
    fn permuting_players_swaps_payoffs() {
        let g = return_game();
        let s = g.permute_players(&[1, 0]).unwrap();
        assert_eq!(
            s.player_names(),
            &["Customer".to_owned(), "Retailer".to_owned()]
        );
        // (Comply, ImmediateRefund) in swapped game == (IR, Comply) in original, payoffs swapped
        assert_eq!(
            s.payoff(&ActionProfile::new(vec![DONT_COMPLY, IMMEDIATE_REFUND])),
            &[2.0, -1.0]
        );
        assert_eq!(
            find_pure_nash(&s),
            vec![ActionProfile::new(vec![DONT_COMPLY, NO_IMMEDIATE_REFUND])]
        );
    }
}
