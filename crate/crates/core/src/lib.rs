//! Game-theoretic identification of elite customers.
//!
//! The crate covers the whole pipeline:
//!
//! - [`game`]: finite strategic-form games, best responses and pure Nash
//!   enumeration, plus the built-in return-processing game.
//! - [`repeated`]: repeated play of strategy automata, exact discounted
//!   payoffs, Monte Carlo validation and the grim-trigger threshold.
//! - [`behavior`]: purchase/return histories and the repetition-probability
//!   estimate derived from purchase gaps.
//! - [`classifier`]: the threshold-and-compliance eliteness rule.
//! - [`evaluation`]: confusion-matrix metrics and a logistic-regression baseline.
//! - [`synth`]: seeded synthetic customer populations.

pub mod behavior;
pub mod classifier;
mod csvio;
pub mod error;
pub mod evaluation;
pub mod game;
pub mod linefmt;
pub mod repeated;
pub mod synth;

pub use behavior::{
    compliance_all, estimate_delta, EstimatorConfig, PurchaseHistory, ReturnEvent, ReturnHistory,
};
pub use classifier::{classify, classify_population, ClassifierConfig, EliteDecision, Reason};
pub use error::{Error, Result};
pub use evaluation::{confusion, precision, recall, ConfusionMatrix, FeatureVector, LogisticModel};
pub use game::{
    best_responses, find_pure_nash, return_game, ActionProfile, PlayerId, StrategicGame,
};
pub use repeated::{
    analytic_payoff, check_equilibrium, deviate_at, forgiving_strategy, grim_trigger,
    grim_trigger_threshold, simulate_payoff, DiscountedPayoff, StrategyAutomaton,
};
pub use synth::{generate, PopulationSpec, SegmentSpec};
