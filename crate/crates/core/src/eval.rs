//! Accuracy and repeated-training sweeps over the training prior, the
//! data fraction and the correction function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Scorer;
use crate::parallel::{ordered_map, Execution};
use crate::sampler::{make_weak_dataset, synth_gaussian_labeled, GaussianSourceSpec, SamplerKind};
use crate::seed::Seed;
use crate::trainer::{train, train_supervised_oracle, TrainConfig, TrainLog};
use crate::types::{ClassPrior, CorrectionKind, Label, LabeledExample, WeakDataset};

/// Fraction of examples with `sign(f(x)) == y`, where `sign(0) = +1`.
pub fn accuracy(model: &Scorer, test: &[LabeledExample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    let mut correct = 0usize;
    for e in test {
        correct += (Label::from_score(model.forward(&e.x)?) == e.y) as usize;
    }
    Ok(correct as f64 / test.len() as f64)
}

/// One synthetic experiment: a Gaussian source, data sizes and a training
/// configuration. `train.seed` is ignored; seeds come from the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub source: GaussianSourceSpec,
    pub n_us: usize,
    pub n_u: usize,
    pub n_test: usize,
    pub sampler: SamplerKind,
    pub train: TrainConfig,
}

impl ExperimentSpec {
    /// The training prior defaults to the source prior.
    pub fn new(source: GaussianSourceSpec, n_us: usize, n_u: usize) -> Self {
        let train = TrainConfig::new(source.prior);
        ExperimentSpec { source, n_us, n_u, n_test: 2000, sampler: SamplerKind::Rejection, train }
    }

    pub fn weak_data(&self, seed: Seed) -> Result<WeakDataset> {
        make_weak_dataset(&self.source, self.n_us, self.n_u, self.sampler, seed.derive("data", 0))
    }

    pub fn test_set(&self, seed: Seed) -> Result<Vec<LabeledExample>> {
        Ok(synth_gaussian_labeled(&self.source, self.n_test, seed.derive("test", 0))?.into_examples())
    }

    pub fn config_for(&self, seed: Seed) -> TrainConfig {
        TrainConfig { seed: seed.derive("train", 0), ..self.train.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub accuracy: f64,
    pub log: TrainLog,
}

/// Trains on weak data for one seed and evaluates on a fresh test set.
pub fn run_weak(spec: &ExperimentSpec, seed: Seed) -> Result<RunOutcome> {
    run_weak_on(spec, &spec.weak_data(seed)?, seed)
}

fn run_weak_on(spec: &ExperimentSpec, data: &WeakDataset, seed: Seed) -> Result<RunOutcome> {
    let test = spec.test_set(seed)?;
    let (model, log) = train(&spec.config_for(seed), data, None)?;
    Ok(RunOutcome { accuracy: accuracy(&model, &test)?, log })
}

/// Supervised reference trained on `n_us + n_u` labeled draws from the same source.
pub fn run_supervised(spec: &ExperimentSpec, seed: Seed) -> Result<RunOutcome> {
    let n = spec.n_us + spec.n_u;
    let pool = synth_gaussian_labeled(&spec.source, n, seed.derive("supervised", 0))?;
    let test = spec.test_set(seed)?;
    let (model, log) = train_supervised_oracle(&spec.config_for(seed), pool.examples(), None)?;
    Ok(RunOutcome { accuracy: accuracy(&model, &test)?, log })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub setting: String,
    pub value: Option<f64>,
    /// One accuracy per seed, in seed order.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two seeds.
    pub sd: Option<f64>,
    pub n_seeds: usize,
}

impl SweepRow {
    fn new(setting: String, value: Option<f64>, accuracies: Vec<f64>) -> Self {
        let (mean, sd) = mean_sd(&accuracies);
        SweepRow { setting, value, n_seeds: accuracies.len(), accuracies, mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingError {
    pub setting: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<SweepRow>,
    pub errors: Vec<SettingError>,
    pub config: ExperimentSpec,
}

impl SweepResult {
    pub const CSV_HEADER: &'static str = "setting,mean_accuracy,sd,n_seeds,accuracies";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let accs: Vec<String> = r.accuracies.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.setting,
                r.mean,
                r.sd.map(|s| s.to_string()).unwrap_or_default(),
                r.n_seeds,
                accs.join(";")
            ));
        }
        out
    }

    /// Whitespace-separated `value mean sd` rows for plotting. Rows without a
    /// numeric value use their index.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {} mean_accuracy sd\n", self.axis);
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {}\n",
                r.value.unwrap_or(i as f64),
                r.mean,
                r.sd.unwrap_or(0.0)
            ));
        }
        out
    }

    pub fn row(&self, setting: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.setting == setting)
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    if values.is_empty() {
        return (f64::NAN, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() >= 2)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

/// Runs every `(setting, seed)` job and assembles rows in setting order.
fn sweep<S, F>(
    axis: &str,
    settings: Vec<(String, Option<f64>, S)>,
    seeds: &[u64],
    config: &ExperimentSpec,
    exec: Execution,
    job: F,
) -> Result<SweepResult>
where
    S: Clone + Send + Sync,
    F: Fn(&S, Seed) -> Result<f64> + Send + Sync,
{
    let jobs: Vec<(usize, u64)> =
        (0..settings.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let results = ordered_map(exec, jobs, |(i, s)| job(&settings[i].2, Seed(s)));
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, (name, value, _)) in settings.iter().enumerate() {
        let chunk = &results[i * seeds.len()..(i + 1) * seeds.len()];
        match chunk.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => errors.push(SettingError { setting: name.clone(), error: e.to_string() }),
            None => {
                let accs = chunk.iter().map(|r| *r.as_ref().unwrap()).collect();
                rows.push(SweepRow::new(name.clone(), *value, accs));
            }
        }
    }
    Ok(SweepResult { axis: axis.into(), seeds: seeds.to_vec(), rows, errors, config: config.clone() })
}

/// Data drawn under the source prior; training under each given prior.
/// A given prior of 0.5 produces an error record instead of a row.
pub fn prior_sweep(given: &[f64], seeds: &[u64], spec: &ExperimentSpec) -> Result<SweepResult> {
    prior_sweep_with(Execution::default(), given, seeds, spec)
}

pub fn prior_sweep_with(exec: Execution, given: &[f64], seeds: &[u64], spec: &ExperimentSpec) -> Result<SweepResult> {
    let mut settings = Vec::new();
    let mut invalid = Vec::new();
    for &p in given {
        match ClassPrior::new(p).and_then(ClassPrior::require_non_degenerate) {
            Ok(prior) => settings.push((format!("{p}"), Some(p), prior)),
            Err(e) => invalid.push(SettingError { setting: format!("{p}"), error: e.to_string() }),
        }
    }
    let mut result = sweep("given_prior", settings, seeds, spec, exec, |prior, seed| {
        let mut s = spec.clone();
        s.train.prior = *prior;
        run_weak(&s, seed).map(|o| o.accuracy)
    })?;
    result.errors.extend(invalid);
    Ok(result)
}

/// Trains on nested prefixes of each seed's full dataset.
pub fn fraction_sweep(fractions: &[f64], seeds: &[u64], spec: &ExperimentSpec) -> Result<SweepResult> {
    fraction_sweep_with(Execution::default(), fractions, seeds, spec)
}

pub fn fraction_sweep_with(
    exec: Execution,
    fractions: &[f64],
    seeds: &[u64],
    spec: &ExperimentSpec,
) -> Result<SweepResult> {
    let settings = fractions.iter().map(|&f| (format!("{f}"), Some(f), f)).collect();
    sweep("data_fraction", settings, seeds, spec, exec, |&fraction, seed| {
        let data = spec.weak_data(seed)?.prefix_fraction(fraction)?;
        run_weak_on(spec, &data, seed).map(|o| o.accuracy)
    })
}

pub fn correction_sweep(corrections: &[CorrectionKind], seeds: &[u64], spec: &ExperimentSpec) -> Result<SweepResult> {
    correction_sweep_with(Execution::default(), corrections, seeds, spec)
}

pub fn correction_sweep_with(
    exec: Execution,
    corrections: &[CorrectionKind],
    seeds: &[u64],
    spec: &ExperimentSpec,
) -> Result<SweepResult> {
    let settings = corrections.iter().map(|&c| (c.name().to_string(), None, c)).collect();
    sweep("correction", settings, seeds, spec, exec, |&c, seed| {
        let mut s = spec.clone();
        s.train.correction = c;
        run_weak(&s, seed).map(|o| o.accuracy)
    })
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either input is constant or shorter than two.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, _) = mean_sd(&ra);
    let (mb, _) = mean_sd(&rb);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}
