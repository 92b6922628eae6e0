use std::path::Path;

use serde::Serialize;
use serde_json::json;

use usimul::eval::{accuracy, correction_sweep, fraction_sweep, prior_sweep, ExperimentSpec, SweepResult};
use usimul::io::{
    read_labeled_csv, read_triplets_jsonl, read_unlabeled_jsonl, write_labeled_csv, write_triplets_jsonl,
    write_unlabeled_jsonl,
};
use usimul::model::ModelDocument;
use usimul::sampler::{make_weak_dataset, synth_gaussian_labeled, GaussianSourceSpec, LabeledPool, PoolSource};
use usimul::trainer::{train, TrainConfig};
use usimul::verify::{run_suite, Suite};
use usimul::{ClassPrior, LossSpec, ModelKind, Scorer, Seed, WeakDataset};

use crate::args::{EvalArgs, MakeWeakArgs, SourceArgs, SweepArgs, SynthArgs, TrainArgs, TrainingArgs, VerifyArgs};
use crate::error::CliError;
use crate::manifest::{manifest_path, with_suffix, write_file, ManifestBuilder, RunManifest};

type Result<T> = std::result::Result<T, CliError>;

/// Prints the manifest to stderr and, when given, stores it next to the outputs.
fn emit_manifest(manifest: RunManifest, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    eprint!("{text}");
    if let Some(path) = path {
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn source_spec(a: &SourceArgs) -> Result<GaussianSourceSpec> {
    let prior = ClassPrior::new(a.pi)?;
    let axis = |sign: f64| {
        let mut mu = vec![0.0; a.dim];
        if let Some(first) = mu.first_mut() {
            *first = sign * a.separation * a.sigma / 2.0;
        }
        mu
    };
    let spec = GaussianSourceSpec {
        dim: a.dim,
        mu_plus: a.mu_plus.clone().unwrap_or_else(|| axis(1.0)),
        mu_minus: a.mu_minus.clone().unwrap_or_else(|| axis(-1.0)),
        sigma: a.sigma,
        prior,
    };
    spec.validate()?;
    Ok(spec)
}

fn train_config(t: &TrainingArgs, prior: ClassPrior, seed: Seed) -> TrainConfig {
    let model = match t.model.as_str() {
        "mlp" => ModelKind::Mlp { hidden: t.hidden },
        _ => ModelKind::Linear,
    };
    TrainConfig {
        prior,
        loss: LossSpec::square(),
        correction: t.correction,
        epochs: t.epochs,
        batch_size: t.batch,
        lr: t.lr,
        weight_decay: t.weight_decay,
        model,
        seed,
    }
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("synth", a, Some(a.seed));
    let spec = source_spec(&a.source)?;
    let pool = synth_gaussian_labeled(&spec, a.n, Seed(a.seed))?;
    let mut bytes = Vec::new();
    write_labeled_csv(&mut bytes, pool.examples())?;
    m.write_output(&a.out, &bytes)?;
    emit_manifest(m.finish(), Some(&manifest_path(&a.out)))
}

pub fn make_weak(a: &MakeWeakArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("make-weak", a, Some(a.seed));
    let prior = a.pi.map(ClassPrior::new).transpose()?;
    let bytes = m.read_input(&a.input)?;
    let pool = LabeledPool::new(read_labeled_csv(&bytes[..])?)?;
    let empirical = pool.empirical_prior().map_err(|e| CliError::Config(e.to_string()))?;
    let source = match prior {
        Some(p) => PoolSource::with_prior(&pool, p)?,
        None => PoolSource::uniform(&pool),
    };
    let data = make_weak_dataset(&source, a.n_us, a.n_u, a.sampler, Seed(a.seed))?;
    let mut triplets = Vec::new();
    write_triplets_jsonl(&mut triplets, &data.triplets)?;
    let mut unlabeled = Vec::new();
    write_unlabeled_jsonl(&mut unlabeled, &data.unlabeled)?;
    m.write_output(&a.out_dir.join("triplets.jsonl"), &triplets)?;
    m.write_output(&a.out_dir.join("unlabeled.jsonl"), &unlabeled)?;
    eprintln!(
        "pool: {} examples, empirical pi_plus = {}; sampling with pi_plus = {}",
        pool.len(),
        empirical.pi_plus(),
        data.prior.pi_plus()
    );
    emit_manifest(m.finish(), Some(&a.out_dir.join("manifest.json")))
}

pub fn train_cmd(a: &TrainArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("train", a, Some(a.seed));
    let prior = ClassPrior::new(a.pi)?.require_non_degenerate()?;
    let config = train_config(&a.training, prior, Seed(a.seed));
    config.validate()?;
    let triplets = read_triplets_jsonl(&m.read_input(&a.us)?[..])?;
    let unlabeled = read_unlabeled_jsonl(&m.read_input(&a.u)?[..])?;
    let test = match &a.test {
        Some(path) => Some(read_labeled_csv(&m.read_input(path)?[..])?),
        None => None,
    };
    let data = WeakDataset { triplets, unlabeled, prior };
    let (model, log) = train(&config, &data, test.as_deref())?;

    let doc = model.to_document(Some(serde_json::to_value(&config)?));
    m.write_output(&a.out, &json_bytes(&doc)?)?;
    let log_path = a.log.clone().unwrap_or_else(|| with_suffix(&a.out, "log.csv"));
    m.write_output(&log_path, log.to_csv().as_bytes())?;
    if let Some(test) = &test {
        println!("{}", json!({ "test_accuracy": accuracy(&model, test)? }));
    }
    emit_manifest(m.finish(), Some(&manifest_path(&a.out)))
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("eval", a, None);
    let doc: ModelDocument = serde_json::from_slice(&m.read_input(&a.model)?)?;
    let model = Scorer::from_document(&doc)?;
    let test = read_labeled_csv(&m.read_input(&a.test)?[..])?;
    println!("{}", json!({ "accuracy": accuracy(&model, &test)? }));
    emit_manifest(m.finish(), None)
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("verify", a, Some(a.seed));
    let suite: Suite = a.suite.parse()?;
    let report = run_suite(suite, Seed(a.seed))?;
    let bytes = json_bytes(&report)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = &a.out {
        m.write_output(out, &bytes)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit_manifest(m.finish(), a.out.as_deref().map(manifest_path).as_deref())?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let mut m = ManifestBuilder::new("sweep", a, None);
    let source = source_spec(&a.source)?;
    let mut spec = ExperimentSpec::new(source.clone(), a.n_us, a.n_u);
    spec.n_test = a.n_test;
    spec.sampler = a.sampler;
    spec.train = train_config(&a.training, source.prior, Seed(0));
    let result: SweepResult = match a.kind.as_str() {
        "prior" => prior_sweep(&a.given, &a.seeds, &spec)?,
        "fraction" => fraction_sweep(&a.fractions, &a.seeds, &spec)?,
        "correction" => correction_sweep(&a.corrections, &a.seeds, &spec)?,
        other => return Err(CliError::Usage(format!("unknown sweep kind {other:?}"))),
    };
    let csv = result.to_csv();
    m.write_output(&with_suffix(&a.out, "csv"), csv.as_bytes())?;
    m.write_output(&with_suffix(&a.out, "json"), &json_bytes(&result)?)?;
    m.write_output(&with_suffix(&a.out, "dat"), result.to_dat().as_bytes())?;
    print!("{csv}");
    for e in &result.errors {
        eprintln!("setting {} skipped: {}", e.setting, e.error);
    }
    emit_manifest(m.finish(), Some(&with_suffix(&a.out, "manifest.json")))
}
