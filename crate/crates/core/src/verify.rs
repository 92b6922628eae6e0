//! Oracles for the algebraic and statistical properties of the estimator.
//!
//! Each check produces a [`VerifyReport`]. Records of kind
//! [`CheckKind::Measure`] report a quantity without asserting anything about
//! it and always pass; this is how the estimator's sample-level bias is
//! reported.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{fraction_sweep_with, spearman, ExperimentSpec, SweepResult};
use crate::model::{init_model, ModelKind, Scorer};
use crate::parallel::{ordered_map, Execution};
use crate::risk::{
    compute_thetas, empirical_risk, empirical_risk_with_grad, matching_residuals, reconstructed_risk_discrete,
    supervised_risk_discrete, DiscreteDomainSpec, Thetas,
};
use crate::sampler::{
    is_rejected, paper_case_weights, sample_triplet, sample_unlabeled, try_triplet_rejection, DiscreteSource,
    GaussianSourceSpec, SamplerKind, PAPER_CASES,
};
use crate::seed::Seed;
use crate::types::{ClassPrior, CorrectionKind, Label, LossSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Assert,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub kind: CheckKind,
    pub expected: f64,
    pub observed: f64,
    /// Absent for measurements.
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Passes iff `|observed - expected| <= tolerance`.
    pub fn close(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            kind: CheckKind::Assert,
            expected,
            observed,
            tolerance: Some(tolerance),
            pass: (observed - expected).abs() <= tolerance,
            note: None,
        }
    }

    /// Passes iff `|observed - expected| < tolerance`.
    pub fn strictly_close(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        let mut c = Self::close(name, expected, observed, tolerance);
        c.pass = (observed - expected).abs() < tolerance;
        c
    }

    pub fn measure(name: impl Into<String>, expected: f64, observed: f64) -> Self {
        CheckRecord {
            name: name.into(),
            kind: CheckKind::Measure,
            expected,
            observed,
            tolerance: None,
            pass: true,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckRecord>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        VerifyReport { suite: suite.into(), checks, pass, warnings: Vec::new() }
    }

    /// Concatenates reports, prefixing check names with their suite.
    pub fn merge(suite: impl Into<String>, parts: Vec<VerifyReport>) -> Self {
        let mut checks = Vec::new();
        let mut warnings = Vec::new();
        for part in parts {
            for mut c in part.checks {
                c.name = format!("{}/{}", part.suite, c.name);
                checks.push(c);
            }
            warnings.extend(part.warnings.into_iter().map(|w| format!("{}: {w}", part.suite)));
        }
        let mut r = VerifyReport::new(suite, checks);
        r.warnings = warnings;
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Priors `0.05, 0.10, ..., 0.95` without `0.5`.
pub fn default_prior_grid() -> Vec<f64> {
    (1..=19).filter(|&k| k != 10).map(|k| k as f64 * 0.05).collect()
}

const THETA_TOL: f64 = 1e-12;

/// Substitutes given coefficients into the four matching equations.
pub fn check_thetas_against(prior: ClassPrior, thetas: &Thetas) -> Vec<CheckRecord> {
    matching_residuals(thetas, prior)
        .iter()
        .enumerate()
        .map(|(i, r)| {
            CheckRecord::strictly_close(format!("pi={}/eq{}", prior.pi_plus(), i + 1), 0.0, *r, THETA_TOL)
        })
        .collect()
}

pub fn check_theta_system(priors: &[f64]) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for &p in priors {
        let prior = ClassPrior::new(p)?;
        checks.extend(check_thetas_against(prior, &compute_thetas(prior)?));
    }
    Ok(VerifyReport::new("thetas", checks))
}

/// A random finite domain: support size in `1..=max_support`, Dirichlet(1)
/// class-conditionals, scores in `[-2, 2]`, prior from the 0.1 grid minus 0.5.
pub fn random_domain<R: Rng + ?Sized>(rng: &mut R, max_support: usize, support: Option<usize>) -> DiscreteDomainSpec {
    let k = support.unwrap_or_else(|| rng.random_range(1..=max_support));
    let simplex = |rng: &mut R| {
        let v: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let p_plus = simplex(rng);
    let p_minus = simplex(rng);
    let grid = [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9];
    let prior = ClassPrior::new(grid[rng.random_range(0..grid.len())]).expect("grid prior");
    let scores = (0..k).map(|_| rng.random_range(-2.0..=2.0)).collect();
    DiscreteDomainSpec { p_plus, p_minus, prior, scores }
}

const IDENTITY_TOL: f64 = 1e-10;

pub fn check_risk_identity(n_trials: usize, seed: Seed) -> Result<VerifyReport> {
    if n_trials == 0 {
        return Err(Error::InvalidCount(0));
    }
    let spec = LossSpec::square();
    let mut rng = seed.stream("identity");
    let mut checks = Vec::new();
    for trial in 0..n_trials {
        let domain = random_domain(&mut rng, 8, None);
        let lhs = supervised_risk_discrete(&domain, &spec)?;
        let rhs = reconstructed_risk_discrete(&domain, &spec)?;
        checks.push(
            CheckRecord::strictly_close(format!("trial{trial}"), lhs, rhs, IDENTITY_TOL)
                .with_note(format!("K={} pi={}", domain.support_size(), domain.prior.pi_plus())),
        );
    }
    Ok(VerifyReport::new("identity", checks))
}

/// Monte Carlo acceptance fraction of single raw rejection-sampler draws,
/// compared with `1 - pi_+ pi_-` at three standard errors.
pub fn check_acceptance_rate(priors: &[f64], n_draws: usize, seed: Seed) -> Result<VerifyReport> {
    if n_draws == 0 {
        return Err(Error::InvalidCount(0));
    }
    let sources = priors
        .iter()
        .map(|&p| GaussianSourceSpec::separated(1, 2.0, ClassPrior::new(p)?))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<usize> = (0..sources.len()).collect();
    let checks = ordered_map(Execution::default(), jobs, |i| {
        let src = &sources[i];
        let mut rng = seed.derive("acceptance", i as u64).rng();
        let accepted = (0..n_draws).filter(|_| try_triplet_rejection(src, &mut rng).is_some()).count();
        let (pp, pm) = (src.prior.pi_plus(), src.prior.pi_minus());
        let expected = 1.0 - pp * pm;
        let tol = 3.0 * (expected * (1.0 - expected) / n_draws as f64).sqrt();
        CheckRecord::close(format!("pi={}", pp), expected, accepted as f64 / n_draws as f64, tol)
            .with_note(format!("{n_draws} raw draws"))
    });
    Ok(VerifyReport::new("acceptance", checks))
}

/// Largest support the enumeration oracle accepts.
pub const MAX_ENUMERATION_SUPPORT: usize = 8;

/// Exact expectations of the uncorrected empirical risk under a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub us_term: f64,
    pub u_term: f64,
    pub expected_risk: f64,
    pub total_probability: f64,
    pub configurations: usize,
}

/// Enumerates every accepted `(x, y, x', y', x'', y'')` configuration (or, for
/// the case sampler, every `(case, x, x', x'', free label)`) with its exact
/// probability. Any single triplet and unlabeled point give an unbiased
/// estimate of the risk expectation, so the expectation of the estimator
/// equals the mean corrected loss over one triplet plus one unlabeled draw.
pub fn enumerate_expected_risk(
    domain: &DiscreteDomainSpec,
    sampler: SamplerKind,
    spec: &LossSpec,
) -> Result<Enumeration> {
    domain.validate()?;
    let k = domain.support_size();
    if k > MAX_ENUMERATION_SUPPORT {
        return Err(Error::EnumerationTooLarge { size: k, max: MAX_ENUMERATION_SUPPORT });
    }
    let thetas = compute_thetas(domain.prior)?;
    let lus: Vec<f64> = domain
        .scores
        .iter()
        .map(|&s| {
            thetas.theta_us_plus * spec.value_unchecked(s, Label::Pos)
                + thetas.theta_us_minus * spec.value_unchecked(s, Label::Neg)
        })
        .collect();
    let lu: Vec<f64> = domain
        .scores
        .iter()
        .map(|&s| {
            thetas.theta_u_plus * spec.value_unchecked(s, Label::Pos)
                + thetas.theta_u_minus * spec.value_unchecked(s, Label::Neg)
        })
        .collect();
    let prior = domain.prior;
    let joint = |y: Label, i: usize| prior.of(y) * domain.conditional(y)[i];

    let mut total = 0.0;
    let mut us_term = 0.0;
    let mut configurations = 0;
    match sampler {
        SamplerKind::Rejection => {
            let accept = 1.0 - prior.pi_plus() * prior.pi_minus();
            for y in Label::BOTH {
                for ya in Label::BOTH {
                    for yb in Label::BOTH {
                        if is_rejected(y, ya, yb) {
                            continue;
                        }
                        for i in 0..k {
                            for j in 0..k {
                                for l in 0..k {
                                    let p = joint(y, i) * joint(ya, j) * joint(yb, l) / accept;
                                    total += p;
                                    us_term += p * (lus[i] + lus[j] + lus[l]) / 3.0;
                                    configurations += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        SamplerKind::PaperCase => {
            let weights = paper_case_weights(prior);
            for (case, (tied, _)) in PAPER_CASES.iter().enumerate() {
                let cond = domain.conditional(*tied);
                for yf in Label::BOTH {
                    for i in 0..k {
                        for j in 0..k {
                            for l in 0..k {
                                let p = weights[case] * cond[i] * cond[j] * joint(yf, l);
                                total += p;
                                us_term += p * (lus[i] + lus[j] + lus[l]) / 3.0;
                                configurations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let u_term: f64 = domain.marginal().iter().zip(&lu).map(|(p, l)| p * l).sum();
    Ok(Enumeration { us_term, u_term, expected_risk: us_term + u_term, total_probability: total, configurations })
}

/// Monte Carlo estimate of the uncorrected empirical risk's expectation,
/// from `n_mc` independent replicates of one triplet plus one unlabeled
/// point. Returns `(mean, standard error)`.
pub fn monte_carlo_expected_risk(
    domain: &DiscreteDomainSpec,
    sampler: SamplerKind,
    spec: &LossSpec,
    n_mc: usize,
    seed: Seed,
    exec: Execution,
) -> Result<(f64, f64)> {
    const CHUNK: usize = 8192;
    if n_mc < 2 {
        return Err(Error::InvalidCount(n_mc));
    }
    let source = DiscreteSource::new(domain)?;
    let thetas = compute_thetas(domain.prior)?;
    let chunks: Vec<(u64, usize)> =
        (0..n_mc.div_ceil(CHUNK)).map(|c| (c as u64, CHUNK.min(n_mc - c * CHUNK))).collect();
    let partials = ordered_map(exec, chunks, |(c, len)| -> Result<(f64, f64)> {
        let mut rng = seed.derive("monte_carlo", c).rng();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..len {
            let t = sample_triplet(sampler, &source, &mut rng)?;
            let u = sample_unlabeled(&source, 1, &mut rng)?[0];
            let us: Vec<f64> = t.iter().map(|&i| domain.scores[i]).collect();
            let r = empirical_risk(&us, &[domain.scores[u]], &thetas, spec, CorrectionKind::None)?.raw;
            sum += r;
            sum_sq += r * r;
        }
        Ok((sum, sum_sq))
    });
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sum_sq += q;
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Bias `E[R_hat] - R` of the uncorrected estimator for a constant scorer
/// `f = c`: `[(t_us+ + t_u+) - pi+] l(c,+1) + [(t_us- + t_u-) - pi-] l(c,-1)`.
pub fn constant_scorer_bias(prior: ClassPrior, c: f64, spec: &LossSpec) -> Result<f64> {
    let t = compute_thetas(prior)?;
    Ok((t.theta_us_plus + t.theta_u_plus - prior.pi_plus()) * spec.value(c, Label::Pos)?
        + (t.theta_us_minus + t.theta_u_minus - prior.pi_minus()) * spec.value(c, Label::Neg)?)
}

const PROBABILITY_TOL: f64 = 1e-12;

/// Enumerated and Monte Carlo expectation of the estimator against the
/// supervised risk. The bias itself is measured, not asserted.
pub fn measure_estimator_bias(
    domain: &DiscreteDomainSpec,
    sampler: SamplerKind,
    n_mc: usize,
    seed: Seed,
) -> Result<VerifyReport> {
    let spec = LossSpec::square();
    let exact = enumerate_expected_risk(domain, sampler, &spec)?;
    let risk = supervised_risk_discrete(domain, &spec)?;
    let (mc, se) = monte_carlo_expected_risk(domain, sampler, &spec, n_mc, seed, Execution::default())?;
    let checks = vec![
        CheckRecord::close("total_probability", 1.0, exact.total_probability, PROBABILITY_TOL)
            .with_note(format!("{} configurations", exact.configurations)),
        CheckRecord::close("monte_carlo_vs_enumeration", exact.expected_risk, mc, 3.0 * se)
            .with_note(format!("{n_mc} replicates, standard error {se:e}")),
        CheckRecord::measure("bias", 0.0, exact.expected_risk - risk)
            .with_note(format!("E[R_hat]={} R={}", exact.expected_risk, risk)),
    ];
    Ok(VerifyReport::new(format!("bias[{sampler}]"), checks))
}

const CLOSED_FORM_TOL: f64 = 1e-10;

/// Enumerated bias of constant scorers against the closed form, for both samplers.
pub fn check_constant_scorer_bias(prior: ClassPrior, constants: &[f64]) -> Result<VerifyReport> {
    let spec = LossSpec::square();
    let mut checks = Vec::new();
    for sampler in SamplerKind::ALL {
        for &c in constants {
            // The support size is irrelevant for a constant scorer; use two points.
            let domain = DiscreteDomainSpec::new(vec![0.7, 0.3], vec![0.2, 0.8], prior, vec![c, c])?;
            let exact = enumerate_expected_risk(&domain, sampler, &spec)?;
            let delta = exact.expected_risk - supervised_risk_discrete(&domain, &spec)?;
            checks.push(
                CheckRecord::close(
                    format!("{sampler}/pi={}/c={c}", prior.pi_plus()),
                    constant_scorer_bias(prior, c, &spec)?,
                    delta,
                    CLOSED_FORM_TOL,
                )
                .with_note(format!("E[R_hat]={}", exact.expected_risk)),
            );
        }
    }
    Ok(VerifyReport::new("constant_scorer_bias", checks))
}

/// The full bias suite: constant-scorer closed forms plus Monte Carlo vs
/// enumeration on random four-point domains, for both samplers.
pub fn bias_suite(seed: Seed, n_domains: usize, n_mc: usize) -> Result<VerifyReport> {
    let mut parts = vec![check_constant_scorer_bias(ClassPrior::new(0.4)?, &[-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])?];
    for &p in &[0.2, 0.7] {
        parts.push(check_constant_scorer_bias(ClassPrior::new(p)?, &[-1.0, 0.0, 1.0])?);
    }
    let mut rng = seed.stream("bias_domains");
    for d in 0..n_domains {
        let domain = random_domain(&mut rng, 4, Some(4));
        for sampler in SamplerKind::ALL {
            let mut r = measure_estimator_bias(&domain, sampler, n_mc, seed.derive("bias_mc", d as u64))?;
            r.suite = format!("domain{d}/{}", r.suite);
            parts.push(r);
        }
    }
    Ok(VerifyReport::merge("bias", parts))
}

const GRADIENT_TOL: f64 = 1e-5;
const KINK_MARGIN: f64 = 1e-4;

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// One random batch: triplet instances, unlabeled points, model and prior.
struct GradTrial {
    model: Scorer,
    us: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    thetas: Thetas,
    correction: CorrectionKind,
}

impl GradTrial {
    fn risk(&self, model: &Scorer) -> (f64, f64) {
        let s = |xs: &[Vec<f64>]| xs.iter().map(|x| model.forward_unchecked(x)).collect::<Vec<_>>();
        let r = empirical_risk(&s(&self.us), &s(&self.u), &self.thetas, &LossSpec::square(), self.correction)
            .expect("non-empty batch");
        (r.raw, r.corrected)
    }

    fn near_kink(&self) -> bool {
        let (raw, _) = self.risk(&self.model);
        if self.correction != CorrectionKind::None && raw.abs() < KINK_MARGIN {
            return true;
        }
        match &self.model {
            Scorer::Linear(_) => false,
            Scorer::Mlp(m) => self.us.iter().chain(&self.u).any(|x| {
                m.w1.chunks_exact(m.dim).zip(&m.b1).any(|(row, b)| {
                    (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b).abs() < KINK_MARGIN
                })
            }),
        }
    }

    fn analytic(&self) -> Vec<f64> {
        let s = |xs: &[Vec<f64>]| xs.iter().map(|x| self.model.forward_unchecked(x)).collect::<Vec<_>>();
        let (_, gus, gu) =
            empirical_risk_with_grad(&s(&self.us), &s(&self.u), &self.thetas, &LossSpec::square(), self.correction)
                .expect("non-empty batch");
        let mut grad = vec![0.0; self.model.num_params()];
        for (x, g) in self.us.iter().zip(&gus).chain(self.u.iter().zip(&gu)) {
            self.model.backward_accumulate(x, *g, &mut grad).expect("shapes match");
        }
        grad
    }

    fn numeric(&self, h: f64) -> Vec<f64> {
        let p = self.model.params();
        let mut m = self.model.clone();
        let mut q = p.clone();
        (0..p.len())
            .map(|i| {
                q[i] = p[i] + h;
                m.set_params(&q).unwrap();
                let fp = self.risk(&m).1;
                q[i] = p[i] - h;
                m.set_params(&q).unwrap();
                let fm = self.risk(&m).1;
                q[i] = p[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }
}

/// Analytic batch-risk gradients through the correction and the model
/// against central differences, over random models, data, priors and
/// corrections. Trials alternate linear / MLP and cycle the corrections.
pub fn check_gradients(n_trials: usize, seed: Seed) -> Result<VerifyReport> {
    if n_trials == 0 {
        return Err(Error::InvalidCount(0));
    }
    let grid = default_prior_grid();
    let jobs: Vec<usize> = (0..n_trials).collect();
    let results = ordered_map(Execution::default(), jobs, |t| -> Result<CheckRecord> {
        let mut rng = seed.derive("gradients", t as u64).rng();
        let kind = if t % 2 == 0 { ModelKind::Linear } else { ModelKind::Mlp { hidden: rng.random_range(2..10) } };
        let correction = CorrectionKind::ALL[(t / 2) % 3];
        loop {
            let dim = rng.random_range(1..5);
            let mut model = init_model(kind, dim, Seed(rng.random()))?;
            // Random (non-zero) biases so that every parameter is exercised.
            let mut params = model.params();
            params.iter_mut().for_each(|p| *p += rng.random_range(-0.5..0.5));
            model.set_params(&params)?;
            let mut points = |n: usize| -> Vec<Vec<f64>> {
                (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
            };
            let us = points(3 * (1 + t % 4));
            let u = points(2 + t % 5);
            let prior = ClassPrior::new(grid[t % grid.len()])?;
            let trial = GradTrial { model, us, u, thetas: compute_thetas(prior)?, correction };
            if trial.near_kink() {
                continue;
            }
            let an = trial.analytic();
            let fd = trial.numeric(1e-5);
            let raw = trial.risk(&trial.model).0;
            let err = relative_error(&an, &fd);
            return Ok(CheckRecord::strictly_close(format!("trial{t}"), 0.0, err, GRADIENT_TOL)
                .with_note(format!("{} {} raw={raw:.4}", trial.model.kind(), correction)));
        }
    });
    let mut checks = results.into_iter().collect::<Result<Vec<_>>>()?;

    let model = init_model(ModelKind::Mlp { hidden: 4 }, 3, seed.derive("zero_upstream", 0))?;
    let zero = model.backward(&[0.3, -1.0, 2.0], 0.0)?;
    let max_abs = zero.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    checks.push(CheckRecord::close("zero_upstream", 0.0, max_abs, 0.0));
    Ok(VerifyReport::new("gradients", checks))
}

/// Accuracy must not drop from the smallest to the largest data fraction,
/// and mean accuracy must be positively rank-correlated with the fraction.
pub fn check_error_trend(fractions: &[f64], seeds: &[u64], spec: &ExperimentSpec) -> Result<VerifyReport> {
    let sweep = fraction_sweep_with(Execution::default(), fractions, seeds, spec)?;
    Ok(trend_report(&sweep))
}

/// Mean accuracy a scorer must beat, above always predicting the majority
/// class, for a sweep to count as informative.
pub const INFORMATIVE_MARGIN: f64 = 0.05;

pub fn trend_report(sweep: &SweepResult) -> VerifyReport {
    let mut rows: Vec<_> = sweep.rows.iter().filter_map(|r| r.value.map(|v| (v, r.mean))).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut warnings: Vec<String> =
        sweep.errors.iter().map(|e| format!("setting {} failed: {}", e.setting, e.error)).collect();
    let mut checks = Vec::new();
    if !sweep.errors.is_empty() {
        checks.push(CheckRecord::close("settings_failed", 0.0, sweep.errors.len() as f64, 0.0));
    }
    let majority = sweep.config.source.prior.pi_plus().max(sweep.config.source.prior.pi_minus());
    let best = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    checks.push(
        CheckRecord::measure("best_mean_accuracy", majority, best).with_note(if best >= majority + INFORMATIVE_MARGIN {
            "informative"
        } else {
            "non-informative: no setting beats the majority-class rate"
        }),
    );
    if rows.len() < 2 {
        warnings.push("fewer than two fractions: trend check passes trivially".into());
    } else {
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        let mut c = CheckRecord::close("largest_vs_smallest", first.1, last.1, 0.0);
        c.pass = last.1 >= first.1;
        checks.push(c.with_note(format!("fraction {} vs {}", last.0, first.0)));
        let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let rho = spearman(&xs, &ys).unwrap_or(0.0);
        let mut c = CheckRecord::close("rank_correlation", 0.0, rho, 0.0);
        c.pass = rho > 0.0;
        checks.push(c.with_note("Spearman correlation of fraction and mean accuracy must be positive"));
    }
    let mut report = VerifyReport::new("trend", checks);
    report.warnings = warnings;
    report
}

/// The default synthetic experiment: 2-D Gaussians with 4-sigma mean
/// separation, pi_+ = 0.4, 2000 triplets and 2000 unlabeled points.
pub fn default_experiment() -> ExperimentSpec {
    let prior = ClassPrior::new(0.4).expect("valid prior");
    let source = GaussianSourceSpec::separated(2, 4.0, prior).expect("valid source");
    let mut spec = ExperimentSpec::new(source, 2000, 2000);
    spec.train.lr = 1e-2;
    spec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Thetas,
    Identity,
    Acceptance,
    Bias,
    Gradients,
    Trend,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Thetas, Suite::Identity, Suite::Acceptance, Suite::Bias, Suite::Gradients, Suite::Trend];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Thetas => "thetas",
            Suite::Identity => "identity",
            Suite::Acceptance => "acceptance",
            Suite::Bias => "bias",
            Suite::Gradients => "gradients",
            Suite::Trend => "trend",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Runs a suite with its default parameters.
pub fn run_suite(suite: Suite, seed: Seed) -> Result<VerifyReport> {
    match suite {
        Suite::Thetas => check_theta_system(&default_prior_grid()),
        Suite::Identity => check_risk_identity(100, seed),
        Suite::Acceptance => check_acceptance_rate(&[0.2, 0.4, 0.6], 100_000, seed),
        Suite::Bias => bias_suite(seed, 3, 200_000),
        Suite::Gradients => check_gradients(50, seed),
        Suite::Trend => check_error_trend(&[0.1, 0.25, 0.5, 1.0], &[0, 1, 2, 3, 4], &default_experiment()),
        Suite::All => {
            let parts = Suite::EACH.iter().map(|&s| run_suite(s, seed)).collect::<Result<Vec<_>>>()?;
            Ok(VerifyReport::merge("all", parts))
        }
    }
}
