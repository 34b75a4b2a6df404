//! Epoch loop and SOC prediction.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{CycleRecord, Dataset, DegeneratePolicy, Normalizer, Role};
use crate::error::{Error, Result};
use crate::network::{Gradient, Network, Topology};
use crate::persist::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    /// Stop once the epoch RMS on normalized targets is at or below this.
    pub target_rms_percent: f64,
    /// Seeds weight initialization in [`train_model`] and the shuffle order.
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.9,
            max_epochs: 50_000,
            target_rms_percent: 10.0,
            seed: 42,
            shuffle: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("momentum must lie in [0, 1)".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be at least 1".into()));
        }
        if self.target_rms_percent.is_nan() || self.target_rms_percent <= 0.0 {
            return Err(Error::Config("target RMS must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_rms_percent: f64,
    /// `(epoch, rms_percent)`, 1-based, one entry per epoch.
    pub rms_history: Vec<(usize, f64)>,
    pub converged: bool,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,rms_percent\n");
        for (epoch, rms) in &self.rms_history {
            let _ = writeln!(out, "{epoch},{rms}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

struct Pattern {
    features: Vec<f64>,
    target: f64,
}

fn patterns(train_set: &Dataset, normalizer: &Normalizer) -> Result<Vec<Pattern>> {
    train_set
        .records()
        .iter()
        .map(|r| {
            let n = normalizer.normalize(r);
            let target = n.target.ok_or(Error::Unlabeled {
                cycle: r.cycle_number,
            })?;
            Ok(Pattern {
                features: n.features.to_vec(),
                target,
            })
        })
        .collect()
}

fn rms_percent(net: &Network, patterns: &[Pattern]) -> Result<f64> {
    let mut sum = 0.0;
    for p in patterns {
        let err = p.target - net.predict(&p.features)?;
        sum += err * err;
    }
    Ok(100.0 * (sum / patterns.len() as f64).sqrt())
}

/// Per-pattern delta-rule training until the RMS target or the epoch cap.
pub fn train(
    mut net: Network,
    train_set: &Dataset,
    normalizer: &Normalizer,
    cfg: &TrainConfig,
) -> Result<(Network, TrainReport)> {
    cfg.validate()?;
    if train_set.role() != Role::Training {
        return Err(Error::Config("training requires a Training dataset".into()));
    }
    let patterns = patterns(train_set, normalizer)?;
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut prev_update = Gradient::zeros(net.param_count());
    let mut rms_history = Vec::new();
    let mut converged = false;

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let p = &patterns[i];
            let act = net.forward(&p.features)?;
            let grad = net.backward(&act, &[p.target])?;
            prev_update = net
                .apply_delta(&grad, cfg.learning_rate, cfg.momentum, &prev_update)
                .map_err(|e| match e {
                    Error::NumericOverflow { .. } => Error::NumericOverflow { epoch: Some(epoch) },
                    other => other,
                })?;
        }
        let rms = rms_percent(&net, &patterns)?;
        if !rms.is_finite() {
            return Err(Error::NumericOverflow { epoch: Some(epoch) });
        }
        rms_history.push((epoch, rms));
        if rms <= cfg.target_rms_percent {
            converged = true;
            break;
        }
    }

    let &(epochs_run, final_rms_percent) = rms_history.last().expect("max_epochs >= 1");
    Ok((
        net,
        TrainReport {
            epochs_run,
            final_rms_percent,
            rms_history,
            converged,
        },
    ))
}

/// Fit the scaling on `train_set`, initialize from `cfg.seed` and train.
///
/// Columns that are constant in the training data get a unit-span scale
/// rather than failing the fit.
pub fn train_model(
    train_set: &Dataset,
    topology: Topology,
    cfg: &TrainConfig,
) -> Result<(Model, TrainReport)> {
    let normalizer = Normalizer::fit_with(train_set, DegeneratePolicy::UnitSpan)?;
    let net = Network::init(topology, cfg.seed);
    let (network, report) = train(net, train_set, &normalizer, cfg)?;
    Ok((
        Model {
            network,
            normalizer,
        },
        report,
    ))
}

/// Predicted SOC percent per record, in input order. Not clamped.
pub fn predict_records(
    net: &Network,
    records: &[CycleRecord],
    normalizer: &Normalizer,
) -> Result<Vec<(u32, f64)>> {
    records
        .iter()
        .map(|r| {
            let n = normalizer.normalize(r);
            let y = net.predict(&n.features)?;
            Ok((r.cycle_number, normalizer.denormalize_soc(y)))
        })
        .collect()
}

pub fn predict_series(
    net: &Network,
    data: &Dataset,
    normalizer: &Normalizer,
) -> Result<Vec<(u32, f64)>> {
    predict_records(net, data.records(), normalizer)
}

pub fn predictions_to_csv(predictions: &[(u32, f64)]) -> String {
    let mut out = String::from("cycle_number,predicted_soc\n");
    for (cycle, soc) in predictions {
        let _ = writeln!(out, "{cycle},{soc}");
    }
    out
}
