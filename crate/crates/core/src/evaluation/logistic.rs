//! Logistic regression over the five customer features.
//!
//! Features are z-scored with training-set statistics; a feature with zero
//! variance is masked out (its standardized value is always 0). Training
//! minimizes mean log-loss by full-batch gradient descent from zero weights,
//! so a run is fully determined by the data, `epochs` and `learning_rate`.

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use crate::error::{Error, Result};

pub const NUM_FEATURES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: [f64; NUM_FEATURES],
    pub stddevs: [f64; NUM_FEATURES],
    /// `false` for features dropped because they had zero variance.
    pub active: [bool; NUM_FEATURES],
}

impl Standardizer {
    pub fn fit(rows: &[[f64; NUM_FEATURES]]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut means = [0.0; NUM_FEATURES];
        let mut stddevs = [1.0; NUM_FEATURES];
        let mut active = [false; NUM_FEATURES];
        for j in 0..NUM_FEATURES {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            means[j] = mean;
            if var > 0.0 {
                stddevs[j] = var.sqrt();
                active[j] = true;
            }
        }
        Standardizer {
            means,
            stddevs,
            active,
        }
    }

    pub fn transform(&self, row: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        std::array::from_fn(|j| {
            if self.active[j] {
                (row[j] - self.means[j]) / self.stddevs[j]
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: [f64; NUM_FEATURES],
    pub bias: f64,
    pub standardization: Standardizer,
    /// Mean log-loss before each update, followed by the final loss
    /// (`epochs + 1` entries).
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    pub fn final_loss(&self) -> f64 {
        *self
            .loss_history
            .last()
            .expect("history holds at least the initial loss")
    }
}

fn score(weights: &[f64; NUM_FEATURES], bias: f64, z: &[f64; NUM_FEATURES]) -> f64 {
    weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + bias
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Mean log-loss of the linear model on already-standardized rows.
pub fn log_loss(
    weights: &[f64; NUM_FEATURES],
    bias: f64,
    rows: &[[f64; NUM_FEATURES]],
    labels: &[bool],
) -> f64 {
    let total: f64 = rows
        .iter()
        .zip(labels)
        .map(|(z, &y)| {
            let t = score(weights, bias, z);
            // -[y log s(t) + (1-y) log(1 - s(t))] = softplus(t) - y t
            softplus(t) - if y { t } else { 0.0 }
        })
        .sum();
    total / rows.len() as f64
}

/// Gradient of [`log_loss`] with respect to the weights and the bias.
pub fn log_loss_gradient(
    weights: &[f64; NUM_FEATURES],
    bias: f64,
    rows: &[[f64; NUM_FEATURES]],
    labels: &[bool],
) -> ([f64; NUM_FEATURES], f64) {
    let mut gw = [0.0; NUM_FEATURES];
    let mut gb = 0.0;
    for (z, &y) in rows.iter().zip(labels) {
        let residual = sigmoid(score(weights, bias, z)) - if y { 1.0 } else { 0.0 };
        for (g, x) in gw.iter_mut().zip(z) {
            *g += residual * x;
        }
        gb += residual;
    }
    let n = rows.len() as f64;
    (gw.map(|g| g / n), gb / n)
}

/// Trains on `features` with `labels` (true = complied). Needs both classes.
pub fn train_logistic(
    features: &[FeatureVector],
    labels: &[bool],
    config: &TrainConfig,
) -> Result<LogisticModel> {
    if features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if !labels.contains(&true) || !labels.contains(&false) {
        return Err(Error::invalid("training labels must contain both classes"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be positive and finite"));
    }
    let raw: Vec<[f64; NUM_FEATURES]> = features.iter().map(FeatureVector::to_array).collect();
    let standardization = Standardizer::fit(&raw);
    let rows: Vec<_> = raw.iter().map(|r| standardization.transform(r)).collect();

    let mut weights = [0.0; NUM_FEATURES];
    let mut bias = 0.0;
    let mut loss_history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        loss_history.push(log_loss(&weights, bias, &rows, labels));
        let (gw, gb) = log_loss_gradient(&weights, bias, &rows, labels);
        for (w, g) in weights.iter_mut().zip(gw) {
            *w -= config.learning_rate * g;
        }
        bias -= config.learning_rate * gb;
    }
    loss_history.push(log_loss(&weights, bias, &rows, labels));
    Ok(LogisticModel {
        weights,
        bias,
        standardization,
        loss_history,
    })
}

/// The linear score `w . z(fv) + b`.
pub fn decision_score(model: &LogisticModel, fv: &FeatureVector) -> f64 {
    let z = model.standardization.transform(&fv.to_array());
    score(&model.weights, model.bias, &z)
}

/// Predicted probability of compliance.
pub fn predict_proba(model: &LogisticModel, fv: &FeatureVector) -> f64 {
    sigmoid(decision_score(model, fv))
}

pub fn predict(model: &LogisticModel, fv: &FeatureVector, threshold: f64) -> bool {
    predict_proba(model, fv) >= threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(delta_hat: f64, q1: u32, q2: u32) -> FeatureVector {
        FeatureVector {
            q2_failures: q2,
            q1_successes: q1,
            nserves: 1,
            delta_hat,
            last_status: q2 == 0,
        }
    }

    fn separable() -> (Vec<FeatureVector>, Vec<bool>) {
        let feats: Vec<_> = (0..40)
            .map(|i| fv(i as f64 / 39.0, (i % 4) as u32, (i % 3 == 0) as u32))
            .collect();
        let labels = feats.iter().map(|f| f.delta_hat > 0.5).collect();
        (feats, labels)
    }

    #[test]
    fn learns_a_separable_set() {
        let (x, y) = separable();
        let m = train_logistic(
            &x,
            &y,
            &TrainConfig {
                epochs: 500,
                learning_rate: 0.1,
            },
        )
        .unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(f, &l)| predict(&m, f, 0.5) == l)
            .count();
        assert!(
            correct as f64 / x.len() as f64 >= 0.95,
            "accuracy {correct}/40"
        );
        assert!(m.final_loss() < m.loss_history[0]);
    }

    #[test]
    fn zero_epochs_is_a_coin_flip() {
        let (x, y) = separable();
        let m = train_logistic(
            &x,
            &y,
            &TrainConfig {
                epochs: 0,
                learning_rate: 0.1,
            },
        )
        .unwrap();
        assert_eq!(m.weights, [0.0; NUM_FEATURES]);
        assert_eq!(m.bias, 0.0);
        assert_eq!(m.loss_history.len(), 1);
        for f in &x {
            assert_eq!(predict_proba(&m, f), 0.5);
        }
    }

    #[test]
    fn duplicated_data_gives_the_same_model() {
        let (x, y) = separable();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 0.1,
        };
        let m1 = train_logistic(&x, &y, &cfg).unwrap();
        let x2: Vec<_> = x.iter().flat_map(|f| [*f, *f]).collect();
        let y2: Vec<_> = y.iter().flat_map(|l| [*l, *l]).collect();
        let m2 = train_logistic(&x2, &y2, &cfg).unwrap();
        for j in 0..NUM_FEATURES {
            assert!((m1.weights[j] - m2.weights[j]).abs() < 1e-12);
        }
        assert!((m1.bias - m2.bias).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_is_masked() {
        let (x, y) = separable();
        let m = train_logistic(&x, &y, &TrainConfig::default()).unwrap();
        // nserves is 1 for every row
        assert!(!m.standardization.active[2]);
        assert_eq!(m.weights[2], 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, _) = separable();
        let ones = vec![true; x.len()];
        assert!(train_logistic(&x, &ones, &TrainConfig::default()).is_err());
        assert!(train_logistic(&x, &[true, false], &TrainConfig::default()).is_err());
        let (x, y) = separable();
        assert!(train_logistic(
            &x,
            &y,
            &TrainConfig {
                epochs: 1,
                learning_rate: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn stable_at_extreme_scores() {
        let z = [[100.0, 0.0, 0.0, 0.0, 0.0], [-100.0, 0.0, 0.0, 0.0, 0.0]];
        let w = [10.0, 0.0, 0.0, 0.0, 0.0];
        let l = log_loss(&w, 0.0, &z, &[false, true]);
        assert!((l - 1000.0).abs() < 1e-9, "{l}");
        let (g, _) = log_loss_gradient(&w, 0.0, &z, &[false, true]);
        assert!(g.iter().all(|x| x.is_finite()));
    }
}
