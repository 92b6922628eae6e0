//! Mixing coefficients, corrected pointwise losses, the empirical risk over
//! triplet and unlabeled scores, and exact risks on finite domains.
//!
//! With `ell` the base loss, the two corrected losses are
//!
//! ```text
//! ell_us(z) = theta_us_plus * ell(z, +1) + theta_us_minus * ell(z, -1)
//! ell_u(z)  = theta_u_plus  * ell(z, +1) + theta_u_minus  * ell(z, -1)
//! ```
//!
//! and the empirical risk is `mean(ell_us over disassembled triplets) +
//! mean(ell_u over unlabeled)`, optionally passed through a correction `g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::types::{check_score, ClassPrior, CorrectionKind, Label, LossSpec};

/// The four coefficients mixing per-label losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thetas {
    pub theta_us_plus: f64,
    pub theta_us_minus: f64,
    pub theta_u_plus: f64,
    pub theta_u_minus: f64,
}

impl Thetas {
    pub fn as_array(&self) -> [f64; 4] {
        [self.theta_us_plus, self.theta_us_minus, self.theta_u_plus, self.theta_u_minus]
    }
}

/// Coefficients for a known class prior. Requires `pi_plus != 1/2`.
pub fn compute_thetas(prior: ClassPrior) -> Result<Thetas> {
    let prior = prior.require_non_degenerate()?;
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let shared = 1.0 - pp * pm;
    let denom = 2.0 * (pp - pm);
    Ok(Thetas {
        theta_us_plus: shared / denom,
        theta_us_minus: shared / -denom,
        theta_u_plus: -2.0 * pm / denom,
        theta_u_minus: -2.0 * pp / -denom,
    })
}

/// Weights `(w_plus, w_minus) = (2 pi_+^2, 2 pi_-^2) / (1 - pi_+ pi_-)` with
/// which each class-conditional enters the unnormalized triplet-instance
/// measure.
pub fn triplet_class_weights(prior: ClassPrior) -> (f64, f64) {
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    let z = 1.0 - pp * pm;
    (2.0 * pp * pp / z, 2.0 * pm * pm / z)
}

/// Residuals of the four linear conditions the coefficients must satisfy
/// for the weak-data risk to reproduce the supervised risk:
///
/// ```text
/// w+ t_us+ + pi+ t_u+ = pi+     w+ t_us- + pi+ t_u- = 0
/// w- t_us+ + pi- t_u+ = 0       w- t_us- + pi- t_u- = pi-
/// ```
pub fn matching_residuals(thetas: &Thetas, prior: ClassPrior) -> [f64; 4] {
    let (wp, wm) = triplet_class_weights(prior);
    let (pp, pm) = (prior.pi_plus(), prior.pi_minus());
    [
        wp * thetas.theta_us_plus + pp * thetas.theta_u_plus - pp,
        wp * thetas.theta_us_minus + pp * thetas.theta_u_minus,
        wm * thetas.theta_us_plus + pm * thetas.theta_u_plus,
        wm * thetas.theta_us_minus + pm * thetas.theta_u_minus - pm,
    ]
}

#[inline]
fn mix(score: f64, a_plus: f64, a_minus: f64, spec: &LossSpec) -> f64 {
    a_plus * spec.value_unchecked(score, Label::Pos) + a_minus * spec.value_unchecked(score, Label::Neg)
}

#[inline]
fn mix_grad(score: f64, a_plus: f64, a_minus: f64, spec: &LossSpec) -> f64 {
    a_plus * spec.grad_unchecked(score, Label::Pos) + a_minus * spec.grad_unchecked(score, Label::Neg)
}

/// Corrected loss applied to instances from disassembled triplets. May be negative.
pub fn corrected_loss_us(score: f64, thetas: &Thetas, spec: &LossSpec) -> Result<f64> {
    check_score(score)?;
    Ok(mix(score, thetas.theta_us_plus, thetas.theta_us_minus, spec))
}

/// Corrected loss applied to unlabeled instances. May be negative.
pub fn corrected_loss_u(score: f64, thetas: &Thetas, spec: &LossSpec) -> Result<f64> {
    check_score(score)?;
    Ok(mix(score, thetas.theta_u_plus, thetas.theta_u_minus, spec))
}

/// An evaluated empirical risk, split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskValue {
    pub us_term: f64,
    pub u_term: f64,
    pub raw: f64,
    pub corrected: f64,
}

fn check_inputs(us_scores: &[f64], u_scores: &[f64]) -> Result<()> {
    if us_scores.is_empty() {
        return Err(Error::InsufficientData(Side::Similarity));
    }
    if u_scores.is_empty() {
        return Err(Error::InsufficientData(Side::Unlabeled));
    }
    us_scores.iter().chain(u_scores).try_for_each(|&s| check_score(s))
}

/// Empirical risk from scores on disassembled triplet instances and on
/// unlabeled instances, with `g` applied to the summed estimate.
pub fn empirical_risk(
    us_scores: &[f64],
    u_scores: &[f64],
    thetas: &Thetas,
    spec: &LossSpec,
    correction: CorrectionKind,
) -> Result<RiskValue> {
    check_inputs(us_scores, u_scores)?;
    Ok(risk_unchecked(us_scores, u_scores, thetas, spec, correction))
}

fn risk_unchecked(
    us_scores: &[f64],
    u_scores: &[f64],
    thetas: &Thetas,
    spec: &LossSpec,
    correction: CorrectionKind,
) -> RiskValue {
    let us_term = us_scores
        .iter()
        .map(|&s| mix(s, thetas.theta_us_plus, thetas.theta_us_minus, spec))
        .sum::<f64>()
        / us_scores.len() as f64;
    let u_term = u_scores
        .iter()
        .map(|&s| mix(s, thetas.theta_u_plus, thetas.theta_u_minus, spec))
        .sum::<f64>()
        / u_scores.len() as f64;
    let raw = us_term + u_term;
    RiskValue { us_term, u_term, raw, corrected: correction.apply(raw) }
}

/// Gradient of the corrected empirical risk with respect to every score.
pub fn empirical_risk_grad(
    us_scores: &[f64],
    u_scores: &[f64],
    thetas: &Thetas,
    spec: &LossSpec,
    correction: CorrectionKind,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, gus, gu) = empirical_risk_with_grad(us_scores, u_scores, thetas, spec, correction)?;
    Ok((gus, gu))
}

/// Risk value and score gradients in one pass.
pub fn empirical_risk_with_grad(
    us_scores: &[f64],
    u_scores: &[f64],
    thetas: &Thetas,
    spec: &LossSpec,
    correction: CorrectionKind,
) -> Result<(RiskValue, Vec<f64>, Vec<f64>)> {
    check_inputs(us_scores, u_scores)?;
    let value = risk_unchecked(us_scores, u_scores, thetas, spec, correction);
    let factor = correction.derivative(value.raw);
    let us_scale = factor / us_scores.len() as f64;
    let u_scale = factor / u_scores.len() as f64;
    let gus = us_scores
        .iter()
        .map(|&s| us_scale * mix_grad(s, thetas.theta_us_plus, thetas.theta_us_minus, spec))
        .collect();
    let gu = u_scores
        .iter()
        .map(|&s| u_scale * mix_grad(s, thetas.theta_u_plus, thetas.theta_u_minus, spec))
        .collect();
    Ok((value, gus, gu))
}

/// Finite input space with class-conditional probability vectors and fixed
/// scores per support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDomainSpec {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub prior: ClassPrior,
    pub scores: Vec<f64>,
}

const SIMPLEX_TOL: f64 = 1e-12;

impl DiscreteDomainSpec {
    pub fn new(p_plus: Vec<f64>, p_minus: Vec<f64>, prior: ClassPrior, scores: Vec<f64>) -> Result<Self> {
        let d = DiscreteDomainSpec { p_plus, p_minus, prior, scores };
        d.validate()?;
        Ok(d)
    }

    pub fn support_size(&self) -> usize {
        self.scores.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.scores.len();
        if k == 0 {
            return Err(Error::InvalidDomain("empty support".into()));
        }
        if self.p_plus.len() != k || self.p_minus.len() != k {
            return Err(Error::InvalidDomain(format!(
                "support size {k} but probability vectors have lengths {} and {}",
                self.p_plus.len(),
                self.p_minus.len()
            )));
        }
        for (name, p) in [("p_plus", &self.p_plus), ("p_minus", &self.p_minus)] {
            if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidDomain(format!("{name} has negative or non-finite entries")));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidDomain(format!("{name} sums to {total}, not 1")));
            }
        }
        if self.scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidDomain("non-finite score".into()));
        }
        Ok(())
    }

    /// Class-conditional probability vector.
    pub fn conditional(&self, label: Label) -> &[f64] {
        match label {
            Label::Pos => &self.p_plus,
            Label::Neg => &self.p_minus,
        }
    }

    /// Marginal `pi_+ P_+ + pi_- P_-`.
    pub fn marginal(&self) -> Vec<f64> {
        let (pp, pm) = (self.prior.pi_plus(), self.prior.pi_minus());
        self.p_plus.iter().zip(&self.p_minus).map(|(a, b)| pp * a + pm * b).collect()
    }

    fn expect(&self, label: Label, f: impl Fn(f64) -> f64) -> f64 {
        self.conditional(label).iter().zip(&self.scores).map(|(p, &s)| p * f(s)).sum()
    }
}

/// Supervised risk `pi_+ E_{P+}[ell(f, +1)] + pi_- E_{P-}[ell(f, -1)]` by exact summation.
pub fn supervised_risk_discrete(domain: &DiscreteDomainSpec, spec: &LossSpec) -> Result<f64> {
    domain.validate()?;
    let prior = domain.prior;
    Ok(prior.pi_plus() * domain.expect(Label::Pos, |s| spec.value_unchecked(s, Label::Pos))
        + prior.pi_minus() * domain.expect(Label::Neg, |s| spec.value_unchecked(s, Label::Neg)))
}

/// The weak-data rewrite of the supervised risk, evaluated exactly:
/// `w+ E_{P+}[ell_us] + w- E_{P-}[ell_us] + pi+ E_{P+}[ell_u] + pi- E_{P-}[ell_u]`.
pub fn reconstructed_risk_discrete(domain: &DiscreteDomainSpec, spec: &LossSpec) -> Result<f64> {
    domain.validate()?;
    let prior = domain.prior;
    let t = compute_thetas(prior)?;
    let (wp, wm) = triplet_class_weights(prior);
    let us = |s| mix(s, t.theta_us_plus, t.theta_us_minus, spec);
    let u = |s| mix(s, t.theta_u_plus, t.theta_u_minus, spec);
    Ok(wp * domain.expect(Label::Pos, us)
        + wm * domain.expect(Label::Neg, us)
        + prior.pi_plus() * domain.expect(Label::Pos, u)
        + prior.pi_minus() * domain.expect(Label::Neg, u))
}
