//! Weak-supervision generation: uncertain similarity triplets, unlabeled
//! pools, Gaussian sources and triplet disassembly.
//!
//! Two triplet samplers are provided. [`SamplerKind::Rejection`] draws three
//! labeled instances i.i.d. and rejects exactly when both companions share a
//! class different from the anchor's. [`SamplerKind::PaperCase`] picks one of
//! the four tied-pair cases `{y=y'=+, y=y'=-, y=y''=+, y=y''=-}` with
//! probabilities proportional to `{pi_+^2, pi_-^2, pi_+^2, pi_-^2}`, draws the
//! tied pair from that class and the remaining instance from the marginal.
//! The two produce different pooled label mixtures.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::DiscreteDomainSpec;
use crate::seed::Seed;
use crate::types::{ClassPrior, FeatureVector, Label, LabeledExample, Triplet, WeakDataset};

/// Anything that can produce labeled instances.
pub trait LabeledSource: Sync {
    type Item: Clone + Send;

    /// One `(x, y)` draw from the joint distribution.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Self::Item, Label);

    /// One draw from the class-conditional of `label`.
    fn draw_class<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Result<Self::Item>;

    /// The class prior under which [`LabeledSource::draw`] samples labels.
    fn class_prior(&self) -> Result<ClassPrior>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Rejection,
    PaperCase,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 2] = [SamplerKind::Rejection, SamplerKind::PaperCase];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Rejection => "rejection",
            SamplerKind::PaperCase => "paper_case",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "rejection" => Ok(SamplerKind::Rejection),
            "paper_case" | "case" => Ok(SamplerKind::PaperCase),
            other => Err(Error::Config(format!(
                "unknown sampler {other:?} (expected rejection or paper-case)"
            ))),
        }
    }
}

/// Isotropic two-class Gaussian source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSourceSpec {
    pub dim: usize,
    pub mu_plus: Vec<f64>,
    pub mu_minus: Vec<f64>,
    pub sigma: f64,
    pub prior: ClassPrior,
}

impl GaussianSourceSpec {
    pub fn new(mu_plus: Vec<f64>, mu_minus: Vec<f64>, sigma: f64, prior: ClassPrior) -> Result<Self> {
        let spec = GaussianSourceSpec { dim: mu_plus.len(), mu_plus, mu_minus, sigma, prior };
        spec.validate()?;
        Ok(spec)
    }

    /// Means at `±separation/2` along the first axis, unit sigma.
    pub fn separated(dim: usize, separation: f64, prior: ClassPrior) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        let mut mu_plus = vec![0.0; dim];
        let mut mu_minus = vec![0.0; dim];
        mu_plus[0] = separation / 2.0;
        mu_minus[0] = -separation / 2.0;
        GaussianSourceSpec::new(mu_plus, mu_minus, 1.0, prior)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if self.mu_plus.len() != self.dim || self.mu_minus.len() != self.dim {
            return Err(Error::InvalidSpec(format!(
                "means must have dimension {} (got {} and {})",
                self.dim,
                self.mu_plus.len(),
                self.mu_minus.len()
            )));
        }
        if self.mu_plus.iter().chain(&self.mu_minus).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("means must be finite".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidSpec(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    fn mean(&self, label: Label) -> &[f64] {
        match label {
            Label::Pos => &self.mu_plus,
            Label::Neg => &self.mu_minus,
        }
    }

    fn features<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> FeatureVector {
        let values = self
            .mean(label)
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                m + self.sigma * z
            })
            .collect();
        FeatureVector::new(values).expect("finite mean and sigma give finite features")
    }
}

fn draw_label<R: Rng + ?Sized>(prior: ClassPrior, rng: &mut R) -> Label {
    if rng.random::<f64>() < prior.pi_plus() {
        Label::Pos
    } else {
        Label::Neg
    }
}

impl LabeledSource for GaussianSourceSpec {
    type Item = FeatureVector;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (FeatureVector, Label) {
        let y = draw_label(self.prior, rng);
        (self.features(y, rng), y)
    }

    fn draw_class<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Result<FeatureVector> {
        Ok(self.features(label, rng))
    }

    fn class_prior(&self) -> Result<ClassPrior> {
        Ok(self.prior)
    }
}

/// A finite collection of labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPool {
    examples: Vec<LabeledExample>,
    positives: Vec<usize>,
    negatives: Vec<usize>,
}

impl LabeledPool {
    pub fn new(examples: Vec<LabeledExample>) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::InsufficientPool("labeled pool is empty".into()));
        }
        let d = examples[0].x.dim();
        if let Some(bad) = examples.iter().find(|e| e.x.dim() != d) {
            return Err(Error::Shape { expected: d, found: bad.x.dim() });
        }
        let (positives, negatives) = (0..examples.len()).partition(|&i| examples[i].y == Label::Pos);
        Ok(LabeledPool { examples, positives, negatives })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.examples[0].x.dim()
    }

    pub fn count(&self, label: Label) -> usize {
        self.indices(label).len()
    }

    fn indices(&self, label: Label) -> &[usize] {
        match label {
            Label::Pos => &self.positives,
            Label::Neg => &self.negatives,
        }
    }

    pub fn has_both_classes(&self) -> bool {
        !self.positives.is_empty() && !self.negatives.is_empty()
    }

    /// Fraction of positive labels; fails if the pool holds a single class.
    pub fn empirical_prior(&self) -> Result<ClassPrior> {
        if !self.has_both_classes() {
            return Err(Error::InsufficientPool(format!(
                "pool holds only one class ({} positive, {} negative); both are required",
                self.positives.len(),
                self.negatives.len()
            )));
        }
        ClassPrior::new(self.positives.len() as f64 / self.examples.len() as f64)
    }

    pub fn into_examples(self) -> Vec<LabeledExample> {
        self.examples
    }
}

/// Draws from a pool with replacement: uniformly over the pool, or by first
/// drawing the class from an enforced prior and then uniformly within it.
#[derive(Debug, Clone, Copy)]
pub struct PoolSource<'a> {
    pool: &'a LabeledPool,
    prior: Option<ClassPrior>,
}

impl<'a> PoolSource<'a> {
    pub fn uniform(pool: &'a LabeledPool) -> Self {
        PoolSource { pool, prior: None }
    }

    pub fn with_prior(pool: &'a LabeledPool, prior: ClassPrior) -> Result<Self> {
        pool.empirical_prior()?;
        Ok(PoolSource { pool, prior: Some(prior) })
    }

    pub fn dim(&self) -> usize {
        self.pool.dim()
    }
}

impl LabeledSource for PoolSource<'_> {
    type Item = FeatureVector;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (FeatureVector, Label) {
        match self.prior {
            None => {
                let e = &self.pool.examples[rng.random_range(0..self.pool.len())];
                (e.x.clone(), e.y)
            }
            Some(prior) => {
                let y = draw_label(prior, rng);
                let x = self.draw_class(y, rng).expect("both classes checked at construction");
                (x, y)
            }
        }
    }

    fn draw_class<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Result<FeatureVector> {
        let idx = self.pool.indices(label);
        if idx.is_empty() {
            return Err(Error::InsufficientPool(format!("pool has no examples of class {label}")));
        }
        Ok(self.pool.examples[idx[rng.random_range(0..idx.len())]].x.clone())
    }

    fn class_prior(&self) -> Result<ClassPrior> {
        match self.prior {
            Some(p) => Ok(p),
            None => self.pool.empirical_prior(),
        }
    }
}

/// A finite support whose items are point indices.
#[derive(Debug, Clone)]
pub struct DiscreteSource {
    prior: ClassPrior,
    plus: WeightedIndex<f64>,
    minus: WeightedIndex<f64>,
}

impl DiscreteSource {
    pub fn new(domain: &DiscreteDomainSpec) -> Result<Self> {
        domain.validate()?;
        let build = |p: &[f64]| {
            WeightedIndex::new(p.iter().copied()).map_err(|e| Error::InvalidDomain(e.to_string()))
        };
        Ok(DiscreteSource {
            prior: domain.prior,
            plus: build(&domain.p_plus)?,
            minus: build(&domain.p_minus)?,
        })
    }
}

impl LabeledSource for DiscreteSource {
    type Item = usize;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Label) {
        let y = draw_label(self.prior, rng);
        (self.draw_index(y, rng), y)
    }

    fn draw_class<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Result<usize> {
        Ok(self.draw_index(label, rng))
    }

    fn class_prior(&self) -> Result<ClassPrior> {
        Ok(self.prior)
    }
}

impl DiscreteSource {
    fn draw_index<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> usize {
        match label {
            Label::Pos => self.plus.sample(rng),
            Label::Neg => self.minus.sample(rng),
        }
    }
}

/// True when a raw labeled draw violates the triplet condition: both
/// companions share a class that differs from the anchor's.
pub fn is_rejected(anchor: Label, companion_a: Label, companion_b: Label) -> bool {
    companion_a == companion_b && companion_a != anchor
}

/// A single raw draw of the rejection sampler. Returns `None` when the draw
/// is rejected.
pub fn try_triplet_rejection<S, R>(source: &S, rng: &mut R) -> Option<Triplet<S::Item>>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    let (x, y) = source.draw(rng);
    let (xa, ya) = source.draw(rng);
    let (xb, yb) = source.draw(rng);
    (!is_rejected(y, ya, yb)).then(|| Triplet::new(x, xa, xb))
}

/// Draws until a raw draw is accepted. With a single-class source every
/// draw is accepted.
pub fn sample_triplet_rejection<S, R>(source: &S, rng: &mut R) -> Triplet<S::Item>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    loop {
        if let Some(t) = try_triplet_rejection(source, rng) {
            return t;
        }
    }
}

/// Case weights in the order `(y=y'=+, y=y'=-, y=y''=+, y=y''=-)`.
pub fn paper_case_weights(prior: ClassPrior) -> [f64; 4] {
    let (a, b) = (prior.pi_plus().powi(2), prior.pi_minus().powi(2));
    let z = 2.0 * (a + b);
    [a / z, b / z, a / z, b / z]
}

/// The tied class and whether the tie involves the second companion, per case.
pub(crate) const PAPER_CASES: [(Label, bool); 4] =
    [(Label::Pos, false), (Label::Neg, false), (Label::Pos, true), (Label::Neg, true)];

/// Paper-case draw that also returns the chosen case index.
pub fn sample_triplet_paper_case_with_case<S, R>(source: &S, rng: &mut R) -> Result<(Triplet<S::Item>, usize)>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    let weights = paper_case_weights(source.class_prior()?);
    let u: f64 = rng.random();
    let mut case = 3;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            case = i;
            break;
        }
    }
    let (tied, _) = PAPER_CASES[case];
    let anchor = source.draw_class(tied, rng)?;
    let partner = source.draw_class(tied, rng)?;
    let (free, _) = source.draw(rng);
    // The companions are an unordered pair, so the tied partner's slot is
    // randomized. This makes cases 0/1 and 2/3 indistinguishable in output.
    let mut pair = [partner, free];
    pair.shuffle(rng);
    let [a, b] = pair;
    Ok((Triplet::new(anchor, a, b), case))
}

pub fn sample_triplet_paper_case<S, R>(source: &S, rng: &mut R) -> Result<Triplet<S::Item>>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    sample_triplet_paper_case_with_case(source, rng).map(|(t, _)| t)
}

pub fn sample_triplet<S, R>(kind: SamplerKind, source: &S, rng: &mut R) -> Result<Triplet<S::Item>>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    match kind {
        SamplerKind::Rejection => Ok(sample_triplet_rejection(source, rng)),
        SamplerKind::PaperCase => sample_triplet_paper_case(source, rng),
    }
}

/// `n` i.i.d. draws from the marginal, labels discarded.
pub fn sample_unlabeled<S, R>(source: &S, n: usize, rng: &mut R) -> Result<Vec<S::Item>>
where
    S: LabeledSource + ?Sized,
    R: Rng + ?Sized,
{
    if n == 0 {
        return Err(Error::InvalidCount(n));
    }
    Ok((0..n).map(|_| source.draw(rng).0).collect())
}

/// Builds a dataset of `n_us` triplets and `n_u` unlabeled points. Triplets
/// and unlabeled points come from independent sub-streams of `seed`.
pub fn make_weak_dataset<S>(
    source: &S,
    n_us: usize,
    n_u: usize,
    kind: SamplerKind,
    seed: Seed,
) -> Result<WeakDataset>
where
    S: LabeledSource<Item = FeatureVector> + ?Sized,
{
    if n_us == 0 {
        return Err(Error::InvalidCount(n_us));
    }
    let prior = source.class_prior()?;
    let mut trng = seed.stream("triplets");
    let triplets = (0..n_us)
        .map(|_| sample_triplet(kind, source, &mut trng))
        .collect::<Result<Vec<_>>>()?;
    let unlabeled = sample_unlabeled(source, n_u, &mut seed.stream("unlabeled"))?;
    Ok(WeakDataset { triplets, unlabeled, prior })
}

/// Flattens triplets into `(anchor, c1, c2, anchor, c1, c2, ...)`.
pub fn disassemble<T: Clone>(triplets: &[Triplet<T>]) -> Vec<T> {
    triplets.iter().flat_map(|t| t.iter().cloned()).collect()
}

/// `n` labeled draws from a Gaussian source.
pub fn synth_gaussian_labeled(spec: &GaussianSourceSpec, n: usize, seed: Seed) -> Result<LabeledPool> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidCount(n));
    }
    let mut rng = seed.stream("labeled");
    let examples = (0..n)
        .map(|_| {
            let (x, y) = spec.draw(&mut rng);
            LabeledExample { x, y }
        })
        .collect();
    LabeledPool::new(examples)
}
