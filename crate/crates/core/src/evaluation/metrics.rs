use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::classifier::EliteDecision;
use crate::csvio;
use crate::error::Result;

pub const GROUND_TRUTH_HEADER: [&str; 2] = ["customer_id", "complied"];
pub const REPORT_HEADER: [&str; 7] = ["method", "tp", "fp", "fn", "tn", "precision", "recall"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledOutcome {
    pub customer_id: String,
    pub predicted_elite: bool,
    /// Observed compliance after the decision.
    pub complied: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.true_pos, self.true_pos + self.false_pos)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.true_pos, self.true_pos + self.false_neg)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion(outcomes: &[LabeledOutcome]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for o in outcomes {
        match (o.predicted_elite, o.complied) {
            (true, true) => m.true_pos += 1,
            (true, false) => m.false_pos += 1,
            (false, true) => m.false_neg += 1,
            (false, false) => m.true_neg += 1,
        }
    }
    m
}

/// `tp / (tp + fp)`, `None` when nobody was predicted elite.
pub fn precision(m: &ConfusionMatrix) -> Option<f64> {
    m.precision()
}

/// `tp / (tp + fn)`, `None` when nobody complied.
pub fn recall(m: &ConfusionMatrix) -> Option<f64> {
    m.recall()
}

/// Six decimals, or `undefined` for a 0/0 ratio.
pub fn format_metric(value: Option<f64>) -> String {
    value.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.6}"))
}

pub fn parse_ground_truth(source: &str, input: impl Read) -> Result<BTreeMap<String, bool>> {
    let table = csvio::read_table(source, input, &GROUND_TRUTH_HEADER)?;
    let mut out = BTreeMap::new();
    for row in &table.rows {
        let id = csvio::customer_id(&table, row, &row.record[0])?;
        let complied = csvio::flag(&table, row, &row.record[1], "complied")?;
        if out.insert(id, complied).is_some() {
            return Err(table.error(row.line, format!("duplicate customer `{}`", &row.record[0])));
        }
    }
    Ok(out)
}

pub fn load_ground_truth(path: &Path) -> Result<BTreeMap<String, bool>> {
    parse_ground_truth(&path.display().to_string(), csvio::open(path)?)
}

pub fn write_ground_truth(truth: &BTreeMap<String, bool>) -> String {
    let mut out = GROUND_TRUTH_HEADER.join(",") + "\n";
    for (id, complied) in truth {
        let _ = writeln!(out, "{id},{}", u8::from(*complied));
    }
    out
}

/// Scores exactly the customers present in the ground truth. A customer
/// without a decision had neither purchases nor returns in the classifier
/// input, so it counts as not elite.
pub fn outcomes_from_decisions(
    decisions: &[EliteDecision],
    truth: &BTreeMap<String, bool>,
) -> Vec<LabeledOutcome> {
    let by_id: BTreeMap<&str, &EliteDecision> = decisions
        .iter()
        .map(|d| (d.customer_id.as_str(), d))
        .collect();
    truth
        .iter()
        .map(|(id, &complied)| LabeledOutcome {
            customer_id: id.clone(),
            predicted_elite: by_id.get(id.as_str()).is_some_and(|d| d.elite),
            complied,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodReport {
    pub method: String,
    pub matrix: ConfusionMatrix,
}

/// Machine-readable report, one row per method.
pub fn write_report_csv(reports: &[MethodReport]) -> String {
    let mut out = REPORT_HEADER.join(",") + "\n";
    for r in reports {
        let m = &r.matrix;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            m.true_pos,
            m.false_pos,
            m.false_neg,
            m.true_neg,
            format_metric(m.precision()),
            format_metric(m.recall())
        );
    }
    out
}
