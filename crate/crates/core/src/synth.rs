//! Seeded synthetic customer populations.
//!
//! Each customer belongs to a segment. Purchases follow a renewal process
//! with exponential inter-arrival times (rounded up to whole days, at least
//! one day) starting at `reference_date - horizon_days`. Each purchase spawns
//! a return with the segment's return probability, and each return complies
//! with the segment's compliance probability. Every customer also receives a
//! held-out evaluation-day compliance draw (the ground truth) and an
//! `nserves` count drawn uniformly from `0..=3`.
//!
//! Customer `i` (in spec order, counting across segments) draws from ChaCha8
//! seeded with the population seed on stream `i`, so output does not depend
//! on how generation is scheduled across threads.
//!
//! Spec file format:
//!
//! ```text
//! reference_date: 2020-10-02
//! horizon_days: 400
//! segment loyal: count=5000 gap_mean_days=30 compliance_prob=1.0 return_prob=0.3
//! segment churny: count=5000 gap_mean_days=120 compliance_prob=0.6 return_prob=0.3
//! ```

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::behavior::{self, PurchaseHistory, ReturnEvent, ReturnHistory, DEFAULT_WINDOW_DAYS};
use crate::error::{Error, Result};
use crate::evaluation::{write_ground_truth, write_serves};
use crate::linefmt;

/// Largest delay, in days, between a purchase and its return request.
pub const MAX_RETURN_DELAY_DAYS: u64 = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub name: String,
    pub count: usize,
    pub purchase_gap_mean_days: f64,
    pub compliance_prob: f64,
    pub return_prob_per_purchase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub segments: Vec<SegmentSpec>,
    pub horizon_days: u32,
    pub reference_date: NaiveDate,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_days < DEFAULT_WINDOW_DAYS {
            return Err(Error::invalid(format!(
                "horizon_days ({}) must cover the {DEFAULT_WINDOW_DAYS}-day estimator window",
                self.horizon_days
            )));
        }
        if self
            .reference_date
            .checked_sub_days(Days::new(self.horizon_days.into()))
            .is_none()
        {
            return Err(Error::invalid(
                "horizon starts before the representable date range",
            ));
        }
        let mut names = Vec::new();
        for s in &self.segments {
            let name_ok = !s.name.is_empty() && s.name.chars().all(|c| c.is_ascii_alphanumeric());
            if !name_ok {
                return Err(Error::invalid(format!(
                    "segment name `{}` must be non-empty and alphanumeric",
                    s.name
                )));
            }
            if names.contains(&&s.name) {
                return Err(Error::invalid(format!("duplicate segment `{}`", s.name)));
            }
            names.push(&s.name);
            if !(s.purchase_gap_mean_days > 0.0 && s.purchase_gap_mean_days.is_finite()) {
                return Err(Error::invalid(format!(
                    "segment `{}`: gap_mean_days must be positive",
                    s.name
                )));
            }
            for (label, p) in [
                ("compliance_prob", s.compliance_prob),
                ("return_prob", s.return_prob_per_purchase),
            ] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid(format!(
                        "segment `{}`: {label} must lie in [0, 1]",
                        s.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn horizon_start(&self) -> NaiveDate {
        self.reference_date - Days::new(self.horizon_days.into())
    }

    /// Parses the spec file format (see module docs); the seed is supplied
    /// separately.
    pub fn parse(text: &str, seed: u64) -> Result<PopulationSpec> {
        let mut horizon_days = None;
        let mut reference_date = None;
        let mut segments = Vec::new();
        for line in linefmt::parse_lines(text)? {
            match (line.keyword(), line.args()) {
                ("horizon_days", []) => {
                    let v = line.value.parse().map_err(|_| {
                        line.error(format!("invalid horizon_days `{}`", line.value))
                    })?;
                    if horizon_days.replace(v).is_some() {
                        return Err(line.error("duplicate horizon_days"));
                    }
                }
                ("reference_date", []) => {
                    let d = NaiveDate::parse_from_str(&line.value, "%Y-%m-%d")
                        .map_err(|e| line.error(format!("invalid reference_date: {e}")))?;
                    if reference_date.replace(d).is_some() {
                        return Err(line.error("duplicate reference_date"));
                    }
                }
                ("segment", [name]) => {
                    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
                    for item in line.value.split_whitespace() {
                        let (k, v) = item.split_once('=').ok_or_else(|| {
                            line.error(format!("expected key=value, got `{item}`"))
                        })?;
                        if fields.insert(k, v).is_some() {
                            return Err(line.error(format!("duplicate field `{k}`")));
                        }
                    }
                    let mut take = |key: &str| {
                        fields.remove(key).ok_or_else(|| {
                            line.error(format!("segment `{name}` is missing `{key}`"))
                        })
                    };
                    let count = take("count")?;
                    let gap = take("gap_mean_days")?;
                    let compliance = take("compliance_prob")?;
                    let ret = take("return_prob")?;
                    if let Some(k) = fields.keys().next() {
                        return Err(line.error(format!("unknown segment field `{k}`")));
                    }
                    let num = |v: &str| {
                        v.parse::<f64>()
                            .map_err(|_| line.error(format!("invalid number `{v}`")))
                    };
                    segments.push(SegmentSpec {
                        name: name.clone(),
                        count: count
                            .parse()
                            .map_err(|_| line.error(format!("invalid count `{count}`")))?,
                        purchase_gap_mean_days: num(gap)?,
                        compliance_prob: num(compliance)?,
                        return_prob_per_purchase: num(ret)?,
                    });
                }
                _ => {
                    return Err(line.error(format!("unknown entry `{}`", line.head.join(" "))));
                }
            }
        }
        let spec = PopulationSpec {
            segments,
            horizon_days: horizon_days.ok_or_else(|| Error::parse(1, "missing horizon_days"))?,
            reference_date: reference_date
                .ok_or_else(|| Error::parse(1, "missing reference_date"))?,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCustomer {
    pub id: String,
    /// Index into [`PopulationSpec::segments`].
    pub segment: usize,
    pub purchases: Vec<NaiveDate>,
    pub returns: Vec<ReturnEvent>,
    pub nserves: u32,
    /// Held-out evaluation-day compliance.
    pub ground_truth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Sorted by customer id.
    pub customers: Vec<SyntheticCustomer>,
}

/// The four CSV files emitted for a population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationFiles {
    pub purchases: String,
    pub returns: String,
    pub serves: String,
    pub ground_truth: String,
}

impl Population {
    pub fn purchase_histories(&self) -> Vec<PurchaseHistory> {
        self.customers
            .iter()
            .filter(|c| !c.purchases.is_empty())
            .map(|c| PurchaseHistory {
                customer_id: c.id.clone(),
                purchase_dates: c.purchases.clone(),
            })
            .collect()
    }

    pub fn return_histories(&self) -> Vec<ReturnHistory> {
        self.customers
            .iter()
            .filter(|c| !c.returns.is_empty())
            .map(|c| ReturnHistory {
                customer_id: c.id.clone(),
                events: c.returns.clone(),
            })
            .collect()
    }

    pub fn nserves(&self) -> BTreeMap<String, u32> {
        self.customers
            .iter()
            .map(|c| (c.id.clone(), c.nserves))
            .collect()
    }

    pub fn ground_truth(&self) -> BTreeMap<String, bool> {
        self.customers
            .iter()
            .map(|c| (c.id.clone(), c.ground_truth))
            .collect()
    }

    pub fn to_files(&self) -> PopulationFiles {
        PopulationFiles {
            purchases: behavior::write_purchases(&self.purchase_histories()),
            returns: behavior::write_returns(&self.return_histories()),
            serves: write_serves(&self.nserves()),
            ground_truth: write_ground_truth(&self.ground_truth()),
        }
    }
}

fn customer(spec: &PopulationSpec, stream: u64, segment: usize, index: usize) -> SyntheticCustomer {
    let seg = &spec.segments[segment];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let start = spec.horizon_start();
    let horizon = u64::from(spec.horizon_days);
    let inter_arrival =
        Exp::new(1.0 / seg.purchase_gap_mean_days).expect("validated positive mean");

    let mut purchases = Vec::new();
    let mut returns = Vec::new();
    let mut t: u64 = 0;
    loop {
        let gap = inter_arrival.sample(&mut rng).ceil().max(1.0);
        if gap > (horizon - t) as f64 {
            break;
        }
        t += gap as u64;
        let date = start + Days::new(t);
        purchases.push(date);
        if rng.random::<f64>() < seg.return_prob_per_purchase {
            let delay = rng.random_range(1..=MAX_RETURN_DELAY_DAYS);
            let complied = rng.random::<f64>() < seg.compliance_prob;
            returns.push(ReturnEvent {
                date: (date + Days::new(delay)).min(spec.reference_date),
                complied,
            });
        }
    }
    returns.sort_by_key(|e| e.date);
    let nserves = rng.random_range(0..=3);
    let ground_truth = rng.random::<f64>() < seg.compliance_prob;
    SyntheticCustomer {
        id: format!("{}{index:06}", seg.name),
        segment,
        purchases,
        returns,
        nserves,
        ground_truth,
    }
}

pub fn generate(spec: &PopulationSpec) -> Result<Population> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .segments
        .iter()
        .enumerate()
        .flat_map(|(s, seg)| (0..seg.count).map(move |i| (s, i)))
        .collect();
    let mut customers: Vec<SyntheticCustomer> = jobs
        .par_iter()
        .enumerate()
        .map(|(stream, &(s, i))| customer(spec, stream as u64, s, i))
        .collect();
    customers.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Population { customers })
}
