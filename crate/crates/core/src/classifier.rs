//! The eliteness rule: a customer is elite when the estimated repetition
//! probability clears the threshold `tau` and every in-window return complied.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::behavior::{
    compliance_all, estimate_delta, in_window_returns, EstimatorConfig, PurchaseHistory,
    ReturnHistory,
};
use crate::csvio;
use crate::error::{Error, Result};
use crate::game::{ActionProfile, StrategicGame};
use crate::repeated::game_threshold;

pub const DEFAULT_TAU: f64 = 0.5;

pub const DECISIONS_HEADER: [&str; 5] =
    ["customer_id", "delta_hat", "compliant", "elite", "reason"];

/// How an estimate exactly equal to `tau` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Low only when `delta_hat < tau`; `delta_hat == tau` goes on to the
    /// compliance check.
    #[default]
    Strict,
    /// Low when `delta_hat <= tau`; eliteness needs `delta_hat > tau`.
    Inclusive,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Boundary::Strict),
            "inclusive" => Ok(Boundary::Inclusive),
            other => Err(Error::invalid(format!(
                "boundary must be `strict` or `inclusive`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub tau: f64,
    pub boundary: Boundary,
    pub estimator: EstimatorConfig,
}

impl ClassifierConfig {
    pub fn new(tau: f64, estimator: EstimatorConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        Ok(ClassifierConfig {
            tau,
            boundary: Boundary::default(),
            estimator,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Takes `tau` from the grim-trigger threshold of `game`.
    pub fn from_game(
        game: &StrategicGame,
        coop: &ActionProfile,
        punish: &ActionProfile,
        estimator: EstimatorConfig,
    ) -> Result<Self> {
        let threshold = game_threshold(game, coop, punish)?;
        ClassifierConfig::new(threshold.delta_star, estimator)
    }

    fn is_low(&self, delta_hat: f64) -> bool {
        match self.boundary {
            Boundary::Strict => delta_hat < self.tau,
            Boundary::Inclusive => delta_hat <= self.tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    LowDelta,
    ComplianceFailure,
    Elite,
}

impl Reason {
    pub fn is_elite(self) -> bool {
        self == Reason::Elite
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::LowDelta => "LowDelta",
            Reason::ComplianceFailure => "ComplianceFailure",
            Reason::Elite => "Elite",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Reason::LowDelta, Reason::ComplianceFailure, Reason::Elite]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown reason `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliteDecision {
    pub customer_id: String,
    pub delta_hat: f64,
    pub compliant: bool,
    pub elite: bool,
    pub reason: Reason,
}

impl EliteDecision {
    /// Checks the decision's internal consistency against `tau`.
    pub fn check(&self, tau: f64) -> Result<()> {
        let consistent = self.elite == self.reason.is_elite()
            && (!self.elite || (self.delta_hat >= tau && self.compliant));
        if consistent {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "inconsistent decision for customer {}: {self:?}",
                self.customer_id
            )))
        }
    }
}

/// Decides one customer from its estimate and compliance record.
pub fn classify(delta_hat: f64, compliant: bool, config: &ClassifierConfig) -> Result<Reason> {
    if !(0.0..=1.0).contains(&delta_hat) {
        return Err(Error::invalid(format!(
            "delta_hat must lie in [0, 1], got {delta_hat}"
        )));
    }
    Ok(if config.is_low(delta_hat) {
        Reason::LowDelta
    } else if compliant {
        Reason::Elite
    } else {
        Reason::ComplianceFailure
    })
}

#[derive(Default)]
struct Joined<'a> {
    purchases: Vec<&'a PurchaseHistory>,
    returns: Vec<&'a ReturnHistory>,
}

fn join<'a>(
    purchases: &'a [PurchaseHistory],
    returns: &'a [ReturnHistory],
) -> BTreeMap<&'a str, Joined<'a>> {
    let mut joined: BTreeMap<&str, Joined> = BTreeMap::new();
    for p in purchases {
        joined.entry(&p.customer_id).or_default().purchases.push(p);
    }
    for r in returns {
        joined.entry(&r.customer_id).or_default().returns.push(r);
    }
    joined
}

fn merged_purchases(id: &str, parts: &[&PurchaseHistory]) -> PurchaseHistory {
    PurchaseHistory {
        customer_id: id.to_owned(),
        purchase_dates: parts
            .iter()
            .flat_map(|p| p.purchase_dates.iter().copied())
            .collect(),
    }
}

/// One decision per customer appearing in either input, ordered by customer
/// id. A customer without purchases gets `delta_hat = 0`; one without
/// returns is compliant.
pub fn classify_population(
    purchases: &[PurchaseHistory],
    returns: &[ReturnHistory],
    config: &ClassifierConfig,
) -> Vec<EliteDecision> {
    let joined: Vec<_> = join(purchases, returns).into_iter().collect();
    joined
        .par_iter()
        .map(|(id, parts)| {
            let delta_hat =
                estimate_delta(&merged_purchases(id, &parts.purchases), &config.estimator);
            let compliant = parts
                .returns
                .iter()
                .all(|r| compliance_all(r, &config.estimator));
            let reason =
                classify(delta_hat, compliant, config).expect("estimate_delta stays within [0, 1]");
            EliteDecision {
                customer_id: (*id).to_owned(),
                delta_hat,
                compliant,
                elite: reason.is_elite(),
                reason,
            }
        })
        .collect()
}

/// Number of customers in `decisions` with no return inside the window,
/// i.e. whose compliance holds vacuously.
pub fn count_vacuously_compliant(
    decisions: &[EliteDecision],
    returns: &[ReturnHistory],
    config: &EstimatorConfig,
) -> usize {
    let with_returns: BTreeMap<&str, usize> = returns.iter().fold(BTreeMap::new(), |mut m, r| {
        *m.entry(r.customer_id.as_str()).or_default() += in_window_returns(r, config).count();
        m
    });
    decisions
        .iter()
        .filter(|d| {
            with_returns
                .get(d.customer_id.as_str())
                .copied()
                .unwrap_or(0)
                == 0
        })
        .count()
}

/// Renders `decisions.csv`; `delta_hat` is printed with six decimals.
pub fn write_decisions(decisions: &[EliteDecision]) -> String {
    let mut out = DECISIONS_HEADER.join(",") + "\n";
    for d in decisions {
        let _ = writeln!(
            out,
            "{},{:.6},{},{},{}",
            d.customer_id,
            d.delta_hat,
            u8::from(d.compliant),
            u8::from(d.elite),
            d.reason
        );
    }
    out
}

pub fn parse_decisions(source: &str, input: impl Read) -> Result<Vec<EliteDecision>> {
    let table = csvio::read_table(source, input, &DECISIONS_HEADER)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let r = &row.record;
        let delta_hat: f64 = r[1]
            .parse()
            .ok()
            .filter(|d| (0.0..=1.0).contains(d))
            .ok_or_else(|| table.error(row.line, format!("invalid delta_hat `{}`", &r[1])))?;
        let reason: Reason = r[4]
            .parse()
            .map_err(|e: Error| table.error(row.line, e.to_string()))?;
        let decision = EliteDecision {
            customer_id: csvio::customer_id(&table, row, &r[0])?,
            delta_hat,
            compliant: csvio::flag(&table, row, &r[2], "compliant")?,
            elite: csvio::flag(&table, row, &r[3], "elite")?,
            reason,
        };
        if decision.elite != reason.is_elite() {
            return Err(table.error(row.line, "elite flag disagrees with reason"));
        }
        out.push(decision);
    }
    Ok(out)
}

pub fn load_decisions(path: &Path) -> Result<Vec<EliteDecision>> {
    parse_decisions(&path.display().to_string(), csvio::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::ReturnEvent;
    use chrono::{Days, NaiveDate};

    fn day0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
    }

    fn config() -> ClassifierConfig {
        let est = EstimatorConfig::with_defaults(day0() + Days::new(270)).unwrap();
        ClassifierConfig::new(DEFAULT_TAU, est).unwrap()
    }

    #[test]
    fn decision_table() {
        let c = config();
        assert_eq!(classify(0.6, true, &c).unwrap(), Reason::Elite);
        assert_eq!(classify(0.4, true, &c).unwrap(), Reason::LowDelta);
        assert_eq!(classify(0.9, false, &c).unwrap(), Reason::ComplianceFailure);
        assert_eq!(classify(0.5, true, &c).unwrap(), Reason::Elite);
        assert_eq!(classify(0.2, false, &c).unwrap(), Reason::LowDelta);
    }

    #[test]
    fn inclusive_boundary() {
        let c = config().with_boundary(Boundary::Inclusive);
        assert_eq!(classify(0.5, true, &c).unwrap(), Reason::LowDelta);
        assert_eq!(classify(0.5000001, true, &c).unwrap(), Reason::Elite);
        assert_eq!(
            "inclusive".parse::<Boundary>().unwrap(),
            Boundary::Inclusive
        );
        assert!("sideways".parse::<Boundary>().is_err());
    }

    #[test]
    fn out_of_range_inputs() {
        let c = config();
        assert!(classify(1.2, true, &c).is_err());
        assert!(classify(-0.1, true, &c).is_err());
        assert!(classify(f64::NAN, true, &c).is_err());
        assert!(ClassifierConfig::new(1.5, c.estimator).is_err());
    }

    #[test]
    fn tau_from_return_game() {
        use crate::game::{builtin, return_game};
        let est = config().estimator;
        let coop = ActionProfile::new(vec![builtin::IMMEDIATE_REFUND, builtin::COMPLY]);
        let punish = ActionProfile::new(vec![builtin::NO_IMMEDIATE_REFUND, builtin::DONT_COMPLY]);
        let c = ClassifierConfig::from_game(&return_game(), &coop, &punish, est).unwrap();
        assert_eq!(c.tau, 0.5);
    }

    fn history(id: &str, offsets: &[u64]) -> PurchaseHistory {
        PurchaseHistory {
            customer_id: id.into(),
            purchase_dates: offsets.iter().map(|&o| day0() + Days::new(o)).collect(),
        }
    }

    #[test]
    fn population_join_semantics() {
        let purchases = vec![history("b", &[0, 30, 60]), history("a", &[0, 200])];
        let returns = vec![
            ReturnHistory {
                customer_id: "c".into(),
                events: vec![ReturnEvent {
                    date: day0() + Days::new(10),
                    complied: true,
                }],
            },
            ReturnHistory {
                customer_id: "a".into(),
                events: vec![ReturnEvent {
                    date: day0() + Days::new(10),
                    complied: false,
                }],
            },
        ];
        let d = classify_population(&purchases, &returns, &config());
        let ids: Vec<_> = d.iter().map(|x| x.customer_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(d[0].reason, Reason::LowDelta);
        assert!(!d[0].compliant);
        assert_eq!(d[1].reason, Reason::Elite);
        assert_eq!(d[1].delta_hat, 1.0);
        assert_eq!(d[2].delta_hat, 0.0);
        assert_eq!(d[2].reason, Reason::LowDelta);
        assert_eq!(
            count_vacuously_compliant(&d, &returns, &config().estimator),
            1
        );
        for x in &d {
            x.check(0.5).unwrap();
        }
    }

    #[test]
    fn empty_population() {
        assert!(classify_population(&[], &[], &config()).is_empty());
    }

    #[test]
    fn eliteness_moves_with_the_window() {
        // purchases at 0, 60, 120 relative to day0; the 0-60 and 60-120 gaps qualify
        let purchases = vec![history("a", &[0, 60, 120])];
        let at = |offset: u64| {
            let est = EstimatorConfig::with_defaults(day0() + Days::new(offset)).unwrap();
            classify_population(&purchases, &[], &ClassifierConfig::new(0.5, est).unwrap())[0].elite
        };
        assert!(at(270));
        // day 0 and day 60 have left the window: only one in-window purchase
        assert!(!at(120 + 270 - 59));
    }

    #[test]
    fn decisions_csv_round_trip() {
        let purchases = vec![history("a", &[0, 50, 200, 260]), history("b", &[5])];
        let d = classify_population(&purchases, &[], &config());
        let text = write_decisions(&d);
        assert!(text
            .starts_with("customer_id,delta_hat,compliant,elite,reason\na,0.666667,1,1,Elite\n"));
        let back = parse_decisions("mem", text.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].reason, Reason::LowDelta);
        let bad = "customer_id,delta_hat,compliant,elite,reason\na,0.5,1,0,Elite\n";
        assert!(parse_decisions("mem", bad.as_bytes()).is_err());
    }
}
