//! Mini-batch training on weak data, and the fully supervised reference.
//!
//! Each epoch disassembles the triplets into pointwise instances, shuffles
//! the triplet-instance pool and the unlabeled pool separately, and cuts
//! both into the same number of contiguous batches. Batch `i` therefore
//! holds roughly the global triplet:unlabeled ratio (within one element on
//! either side) and both risk terms are always defined.

use std::ops::Range;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::accuracy;
use crate::model::{adam_step, init_model, AdamConfig, AdamState, ModelKind, Scorer};
use crate::risk::{compute_thetas, empirical_risk, empirical_risk_with_grad, Thetas};
use crate::sampler::disassemble;
use crate::seed::Seed;
use crate::types::{ClassPrior, CorrectionKind, FeatureVector, LabeledExample, LossSpec, WeakDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Prior given to the learner. May differ from the prior the data was drawn under.
    pub prior: ClassPrior,
    pub loss: LossSpec,
    pub correction: CorrectionKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub model: ModelKind,
    pub seed: Seed,
}

impl TrainConfig {
    /// Desk-scale defaults: 30 epochs, batch 64, lr 1e-3, weight decay 1e-5,
    /// linear model, abs correction.
    pub fn new(prior: ClassPrior) -> Self {
        TrainConfig {
            prior,
            loss: LossSpec::square(),
            correction: CorrectionKind::Abs,
            epochs: 30,
            batch_size: 64,
            lr: 1e-3,
            weight_decay: 1e-5,
            model: ModelKind::Linear,
            seed: Seed(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config(format!("batch size must be at least 2, got {}", self.batch_size)));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::Config(format!("weight decay must be >= 0, got {}", self.weight_decay)));
        }
        if let ModelKind::Mlp { hidden: 0 } = self.model {
            return Err(Error::Config("hidden width must be at least 1".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, weight_decay: self.weight_decay, ..AdamConfig::default() }
    }
}

/// Metrics recorded after each completed epoch, evaluated on the full
/// training data with the current model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub raw_risk: f64,
    pub corrected_risk: f64,
    pub us_term: Option<f64>,
    pub u_term: Option<f64>,
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub const CSV_HEADER: &'static str = "epoch,raw_risk,corrected_risk,us_term,u_term,test_accuracy";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.epoch,
                r.raw_risk,
                r.corrected_risk,
                opt(r.us_term),
                opt(r.u_term),
                opt(r.test_accuracy)
            ));
        }
        out
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Splits `n_us` triplet instances and `n_u` unlabeled points into paired
/// contiguous ranges, one pair per batch.
pub fn plan_batches(n_us: usize, n_u: usize, batch_size: usize) -> Result<Vec<(Range<usize>, Range<usize>)>> {
    if batch_size < 2 {
        return Err(Error::Config(format!("batch size must be at least 2, got {batch_size}")));
    }
    if batch_size > n_us || batch_size > n_u {
        return Err(Error::Config(format!(
            "batch size {batch_size} exceeds a training pool ({n_us} triplet instances, {n_u} unlabeled); \
             lower the batch size or generate more data"
        )));
    }
    let count = (n_us + n_u).div_ceil(batch_size).clamp(1, n_us.min(n_u));
    let cut = |n: usize, i: usize| i * n / count;
    Ok((0..count)
        .map(|i| (cut(n_us, i)..cut(n_us, i + 1), cut(n_u, i)..cut(n_u, i + 1)))
        .collect())
}

fn scores(model: &Scorer, xs: &[&FeatureVector]) -> Vec<f64> {
    xs.iter().map(|x| model.forward_unchecked(x)).collect()
}

fn check_dims<'a>(dim: usize, xs: impl IntoIterator<Item = &'a FeatureVector>) -> Result<()> {
    for x in xs {
        if x.dim() != dim {
            return Err(Error::Shape { expected: dim, found: x.dim() });
        }
    }
    Ok(())
}

/// Full-data risk of `model` on weak data.
pub fn weak_risk(
    model: &Scorer,
    us_pool: &[&FeatureVector],
    u_pool: &[&FeatureVector],
    thetas: &Thetas,
    config: &TrainConfig,
) -> Result<crate::risk::RiskValue> {
    empirical_risk(&scores(model, us_pool), &scores(model, u_pool), thetas, &config.loss, config.correction)
}

/// Trains a scorer on triplets and unlabeled data with the corrected risk.
pub fn train(
    config: &TrainConfig,
    data: &WeakDataset,
    eval_set: Option<&[LabeledExample]>,
) -> Result<(Scorer, TrainLog)> {
    config.validate()?;
    let thetas = compute_thetas(config.prior)?;
    let dim = data.dim()?;
    if let Some(test) = eval_set {
        check_dims(dim, test.iter().map(|e| &e.x))?;
    }
    let us_pool: Vec<&FeatureVector> = data.triplets.iter().flat_map(|t| t.iter()).collect();
    let u_pool: Vec<&FeatureVector> = data.unlabeled.iter().collect();
    if us_pool.is_empty() {
        return Err(Error::InsufficientData(crate::error::Side::Similarity));
    }
    if u_pool.is_empty() {
        return Err(Error::InsufficientData(crate::error::Side::Unlabeled));
    }
    let batches = plan_batches(us_pool.len(), u_pool.len(), config.batch_size)?;

    let mut model = init_model(config.model, dim, config.seed)?;
    let mut log = TrainLog::default();
    if config.epochs == 0 {
        return Ok((model, log));
    }
    let mut adam = AdamState::new(model.num_params(), config.adam());
    let mut params = model.params();
    let mut grad = vec![0.0; params.len()];
    let mut us_order: Vec<usize> = (0..us_pool.len()).collect();
    let mut u_order: Vec<usize> = (0..u_pool.len()).collect();

    for epoch in 0..config.epochs {
        let mut rng = config.seed.derive("shuffle", epoch as u64).rng();
        us_order.shuffle(&mut rng);
        u_order.shuffle(&mut rng);
        for (us_range, u_range) in &batches {
            let us_x: Vec<&FeatureVector> = us_order[us_range.clone()].iter().map(|&i| us_pool[i]).collect();
            let u_x: Vec<&FeatureVector> = u_order[u_range.clone()].iter().map(|&i| u_pool[i]).collect();
            let (_, g_us, g_u) = empirical_risk_with_grad(
                &scores(&model, &us_x),
                &scores(&model, &u_x),
                &thetas,
                &config.loss,
                config.correction,
            )?;
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (x, up) in us_x.iter().zip(&g_us).chain(u_x.iter().zip(&g_u)) {
                model.backward_accumulate(x, *up, &mut grad)?;
            }
            adam_step(&mut params, &grad, &mut adam)?;
            model.set_params(&params)?;
        }
        let risk = weak_risk(&model, &us_pool, &u_pool, &thetas, config)?;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            raw_risk: risk.raw,
            corrected_risk: risk.corrected,
            us_term: Some(risk.us_term),
            u_term: Some(risk.u_term),
            test_accuracy: eval_set.map(|t| accuracy(&model, t)).transpose()?,
        });
    }
    Ok((model, log))
}

/// Mean supervised loss of `model` on labeled examples.
pub fn supervised_risk(model: &Scorer, labeled: &[LabeledExample], loss: &LossSpec) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::InvalidInput("empty labeled set".into()));
    }
    let total: f64 = labeled.iter().map(|e| loss.value_unchecked(model.forward_unchecked(&e.x), e.y)).sum();
    Ok(total / labeled.len() as f64)
}

/// Same loop as [`train`] but on true labels with the plain supervised
/// risk. `config.prior` and `config.correction` are not used.
pub fn train_supervised_oracle(
    config: &TrainConfig,
    labeled: &[LabeledExample],
    eval_set: Option<&[LabeledExample]>,
) -> Result<(Scorer, TrainLog)> {
    config.validate()?;
    let first = labeled.first().ok_or_else(|| Error::InvalidInput("empty labeled set".into()))?;
    let dim = first.x.dim();
    check_dims(dim, labeled.iter().map(|e| &e.x))?;
    if let Some(test) = eval_set {
        check_dims(dim, test.iter().map(|e| &e.x))?;
    }
    if config.batch_size > labeled.len() {
        return Err(Error::Config(format!(
            "batch size {} exceeds the labeled pool ({}); lower the batch size",
            config.batch_size,
            labeled.len()
        )));
    }
    let mut model = init_model(config.model, dim, config.seed)?;
    let mut log = TrainLog::default();
    if config.epochs == 0 {
        return Ok((model, log));
    }
    let n = labeled.len();
    let count = n.div_ceil(config.batch_size);
    let mut adam = AdamState::new(model.num_params(), config.adam());
    let mut params = model.params();
    let mut grad = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut config.seed.derive("shuffle", epoch as u64).rng());
        for i in 0..count {
            let batch = &order[i * n / count..(i + 1) * n / count];
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &j in batch {
                let e = &labeled[j];
                let up = scale * config.loss.grad_unchecked(model.forward_unchecked(&e.x), e.y);
                model.backward_accumulate(&e.x, up, &mut grad)?;
            }
            adam_step(&mut params, &grad, &mut adam)?;
            model.set_params(&params)?;
        }
        let risk = supervised_risk(&model, labeled, &config.loss)?;
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            raw_risk: risk,
            corrected_risk: risk,
            us_term: None,
            u_term: None,
            test_accuracy: eval_set.map(|t| accuracy(&model, t)).transpose()?,
        });
    }
    Ok((model, log))
}

/// Flattened triplet instances, in disassembly order.
pub fn triplet_instances(data: &WeakDataset) -> Vec<FeatureVector> {
    disassemble(&data.triplets)
}
