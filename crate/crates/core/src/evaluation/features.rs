use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::behavior::{
    estimate_delta, in_window_returns, EstimatorConfig, PurchaseHistory, ReturnHistory,
};
use crate::csvio;
use crate::error::Result;

pub const SERVES_HEADER: [&str; 2] = ["customer_id", "nserves"];

pub const FEATURE_NAMES: [&str; 5] = [
    "q2_failures",
    "q1_successes",
    "nserves",
    "delta_hat",
    "last_status",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// In-window returns that failed compliance.
    pub q2_failures: u32,
    /// In-window returns that complied.
    pub q1_successes: u32,
    /// Opaque per-customer count read from `serves.csv`.
    pub nserves: u32,
    pub delta_hat: f64,
    /// Compliance of the latest in-window return; `true` when there is none.
    pub last_status: bool,
}

impl FeatureVector {
    /// Order matches [`FEATURE_NAMES`].
    pub fn to_array(&self) -> [f64; 5] {
        [
            f64::from(self.q2_failures),
            f64::from(self.q1_successes),
            f64::from(self.nserves),
            self.delta_hat,
            if self.last_status { 1.0 } else { 0.0 },
        ]
    }
}

/// Features for every customer seen in any of the three inputs. Customers
/// missing from `nserves` get a count of zero.
pub fn build_features(
    purchases: &[PurchaseHistory],
    returns: &[ReturnHistory],
    config: &EstimatorConfig,
    nserves: &BTreeMap<String, u32>,
) -> BTreeMap<String, FeatureVector> {
    let mut dates: BTreeMap<&str, PurchaseHistory> = BTreeMap::new();
    for p in purchases {
        dates
            .entry(&p.customer_id)
            .or_insert_with(|| PurchaseHistory {
                customer_id: p.customer_id.clone(),
                purchase_dates: Vec::new(),
            })
            .purchase_dates
            .extend(&p.purchase_dates);
    }
    let mut events: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for r in returns {
        events
            .entry(&r.customer_id)
            .or_default()
            .extend(in_window_returns(r, config).copied());
    }

    let ids = dates
        .keys()
        .chain(events.keys())
        .copied()
        .chain(nserves.keys().map(String::as_str));
    let mut out = BTreeMap::new();
    for id in ids {
        if out.contains_key(id) {
            continue;
        }
        let delta_hat = dates.get(id).map_or(0.0, |h| estimate_delta(h, config));
        let evs = events.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let q1 = evs.iter().filter(|e| e.complied).count() as u32;
        // stable sort keeps file order among same-day events; the last one wins
        let mut ordered = evs.to_vec();
        ordered.sort_by_key(|e| e.date);
        out.insert(
            id.to_owned(),
            FeatureVector {
                q2_failures: evs.len() as u32 - q1,
                q1_successes: q1,
                nserves: nserves.get(id).copied().unwrap_or(0),
                delta_hat,
                last_status: ordered.last().is_none_or(|e| e.complied),
            },
        );
    }
    out
}

pub fn parse_serves(source: &str, input: impl Read) -> Result<BTreeMap<String, u32>> {
    let table = csvio::read_table(source, input, &SERVES_HEADER)?;
    let mut out = BTreeMap::new();
    for row in &table.rows {
        let id = csvio::customer_id(&table, row, &row.record[0])?;
        let n: u32 = row.record[1]
            .parse()
            .map_err(|_| table.error(row.line, format!("invalid nserves `{}`", &row.record[1])))?;
        if out.insert(id, n).is_some() {
            return Err(table.error(row.line, format!("duplicate customer `{}`", &row.record[0])));
        }
    }
    Ok(out)
}

pub fn load_serves(path: &Path) -> Result<BTreeMap<String, u32>> {
    parse_serves(&path.display().to_string(), csvio::open(path)?)
}

pub fn write_serves(serves: &BTreeMap<String, u32>) -> String {
    let mut out = SERVES_HEADER.join(",") + "\n";
    for (id, n) in serves {
        let _ = writeln!(out, "{id},{n}");
    }
    out
}
