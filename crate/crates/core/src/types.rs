//! Shared domain vocabulary: priors, labels, instances, triplets, datasets,
//! the loss and the non-negativity correction.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class prior `(pi_plus, pi_minus)` with `pi_minus = 1 - pi_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ClassPrior {
    pi_plus: f64,
}

impl ClassPrior {
    pub fn new(pi_plus: f64) -> Result<Self> {
        if pi_plus.is_finite() && pi_plus > 0.0 && pi_plus < 1.0 {
            Ok(ClassPrior { pi_plus })
        } else {
            Err(Error::InvalidPrior(pi_plus))
        }
    }

    pub fn pi_plus(self) -> f64 {
        self.pi_plus
    }

    pub fn pi_minus(self) -> f64 {
        1.0 - self.pi_plus
    }

    /// Probability of the given class.
    pub fn of(self, label: Label) -> f64 {
        match label {
            Label::Pos => self.pi_plus(),
            Label::Neg => self.pi_minus(),
        }
    }

    /// The prior with the roles of the two classes exchanged.
    pub fn swapped(self) -> Self {
        ClassPrior { pi_plus: self.pi_minus() }
    }

    /// Fails unless `pi_plus != 1/2`.
    pub fn require_non_degenerate(self) -> Result<Self> {
        if self.pi_plus == 0.5 {
            Err(Error::DegeneratePrior(self.pi_plus))
        } else {
            Ok(self)
        }
    }
}

impl TryFrom<f64> for ClassPrior {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        ClassPrior::new(value)
    }
}

impl From<ClassPrior> for f64 {
    fn from(p: ClassPrior) -> f64 {
        p.pi_plus
    }
}

/// Binary class label, serialized as `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Pos, Label::Neg];

    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// Decision rule for a real score; ties go to the positive class.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(Error::InvalidInput(format!("label must be +1 or -1, got {other}"))),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Pos => f.write_str("+1"),
            Label::Neg => f.write_str("-1"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" | "1.0" | "+1.0" => Ok(Label::Pos),
            "-1" | "-1.0" => Ok(Label::Neg),
            other => Err(Error::InvalidInput(format!("label must be +1 or -1, got {other:?}"))),
        }
    }
}

/// A point in feature space with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature value {bad}")));
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: FeatureVector,
    pub y: Label,
}

/// Three instances of which at least two share a class. Which two is
/// unknown and no label is stored. The companions form an unordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet<T> {
    pub anchor: T,
    #[serde(rename = "c1")]
    pub companion_a: T,
    #[serde(rename = "c2")]
    pub companion_b: T,
}

impl<T> Triplet<T> {
    pub fn new(anchor: T, companion_a: T, companion_b: T) -> Self {
        Triplet { anchor, companion_a, companion_b }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        [&self.anchor, &self.companion_a, &self.companion_b].into_iter()
    }
}

pub type UncertainTriplet = Triplet<FeatureVector>;

/// Triplets plus an unlabeled pool, the training input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakDataset {
    pub triplets: Vec<UncertainTriplet>,
    pub unlabeled: Vec<FeatureVector>,
    pub prior: ClassPrior,
}

impl WeakDataset {
    pub fn n_us(&self) -> usize {
        self.triplets.len()
    }

    pub fn n_u(&self) -> usize {
        self.unlabeled.len()
    }

    /// Feature dimension, checked to be consistent across every instance.
    pub fn dim(&self) -> Result<usize> {
        let mut all = self.triplets.iter().flat_map(|t| t.iter()).chain(self.unlabeled.iter());
        let first = all.next().ok_or_else(|| Error::InvalidInput("empty dataset".into()))?;
        let d = first.dim();
        for v in all {
            if v.dim() != d {
                return Err(Error::Shape { expected: d, found: v.dim() });
            }
        }
        Ok(d)
    }

    /// Keeps the first `round(fraction * n)` items on each side (at least one).
    pub fn prefix_fraction(&self, fraction: f64) -> Result<WeakDataset> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Config(format!("data fraction {fraction} must lie in (0, 1]")));
        }
        let take = |n: usize| ((n as f64 * fraction).round() as usize).clamp(1, n.max(1));
        Ok(WeakDataset {
            triplets: self.triplets[..take(self.n_us())].to_vec(),
            unlabeled: self.unlabeled[..take(self.n_u())].to_vec(),
            prior: self.prior,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Square,
}

/// Loss selection plus optional Lipschitz and value bounds. The bounds are
/// metadata describing the loss on a declared score interval `[-B, B]`;
/// training never clips scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub lipschitz_bound: Option<f64>,
    pub value_bound: Option<f64>,
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::square()
    }
}

impl LossSpec {
    /// Square loss with undeclared bounds.
    pub fn square() -> Self {
        LossSpec { kind: LossKind::Square, lipschitz_bound: None, value_bound: None }
    }

    /// Square loss with bounds valid for scores in `[-bound, bound]`:
    /// `|d/dz (1 - yz)^2| <= 2(1 + B)` and `(1 - yz)^2 <= (1 + B)^2`.
    pub fn square_on_interval(bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidSpec(format!("score bound {bound} must be finite and >= 0")));
        }
        Ok(LossSpec {
            kind: LossKind::Square,
            lipschitz_bound: Some(2.0 * (1.0 + bound)),
            value_bound: Some((1.0 + bound).powi(2)),
        })
    }

    /// Loss of a real score against a label.
    pub fn value(&self, score: f64, label: Label) -> Result<f64> {
        check_score(score)?;
        Ok(self.value_unchecked(score, label))
    }

    /// Derivative of [`LossSpec::value`] with respect to the score.
    pub fn grad(&self, score: f64, label: Label) -> Result<f64> {
        check_score(score)?;
        Ok(self.grad_unchecked(score, label))
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, score: f64, label: Label) -> f64 {
        match self.kind {
            LossKind::Square => {
                let r = 1.0 - label.sign() * score;
                r * r
            }
        }
    }

    #[inline]
    pub(crate) fn grad_unchecked(&self, score: f64, label: Label) -> f64 {
        match self.kind {
            LossKind::Square => {
                let y = label.sign();
                -2.0 * y * (1.0 - y * score)
            }
        }
    }
}

pub(crate) fn check_score(score: f64) -> Result<()> {
    if score.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite score {score}")))
    }
}

/// Function `g` applied to the summed empirical risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionKind {
    /// Identity.
    None,
    /// `max(0, z)`.
    MaxZero,
    /// `|z|`.
    Abs,
}

impl CorrectionKind {
    pub const ALL: [CorrectionKind; 3] =
        [CorrectionKind::None, CorrectionKind::MaxZero, CorrectionKind::Abs];

    pub fn apply(self, z: f64) -> f64 {
        match self {
            CorrectionKind::None => z,
            CorrectionKind::MaxZero => z.max(0.0),
            CorrectionKind::Abs => z.abs(),
        }
    }

    /// Derivative of `g` at `z`. Both kinks take the subgradient 0 at `z = 0`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            CorrectionKind::None => 1.0,
            CorrectionKind::MaxZero => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CorrectionKind::Abs => {
                if z > 0.0 {
                    1.0
                } else if z < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CorrectionKind::None => "none",
            CorrectionKind::MaxZero => "max_zero",
            CorrectionKind::Abs => "abs",
        }
    }
}

impl fmt::Display for CorrectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorrectionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "identity" => Ok(CorrectionKind::None),
            "max_zero" | "max-zero" | "max" | "relu" => Ok(CorrectionKind::MaxZero),
            "abs" => Ok(CorrectionKind::Abs),
            other => Err(Error::Config(format!(
                "unknown correction {other:?} (expected none, max_zero or abs)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loss_value_examples() {
        let sq = LossSpec::square();
        assert_eq!(sq.value(0.0, Label::Pos).unwrap(), 1.0);
        assert_eq!(sq.value(1.0, Label::Pos).unwrap(), 0.0);
        assert_eq!(sq.value(1.0, Label::Neg).unwrap(), 4.0);
    }

    #[test]
    fn loss_grad_examples() {
        let sq = LossSpec::square();
        assert_eq!(sq.grad(1.0, Label::Pos).unwrap(), 0.0);
        assert_eq!(sq.grad(0.0, Label::Pos).unwrap(), -2.0);
        assert_eq!(sq.grad(0.0, Label::Neg).unwrap(), 2.0);
    }

    #[test]
    fn non_finite_scores_are_rejected() {
        let sq = LossSpec::square();
        assert!(matches!(sq.value(f64::NAN, Label::Pos), Err(Error::InvalidInput(_))));
        assert!(matches!(sq.grad(f64::INFINITY, Label::Neg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn loss_grad_matches_central_differences_on_grid() {
        let sq = LossSpec::square();
        let h = 1e-5;
        for i in -40..=40 {
            let z = i as f64 * 0.1 + 0.013;
            for y in Label::BOTH {
                let fd = (sq.value(z + h, y).unwrap() - sq.value(z - h, y).unwrap()) / (2.0 * h);
                let an = sq.grad(z, y).unwrap();
                let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-300);
                assert!(rel < 1e-6, "z={z} y={y} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn prior_validation() {
        assert!(ClassPrior::new(0.0).is_err());
        assert!(ClassPrior::new(1.0).is_err());
        assert!(ClassPrior::new(f64::NAN).is_err());
        let p = ClassPrior::new(0.3).unwrap();
        assert_eq!(p.pi_plus() + p.pi_minus(), 1.0);
        assert!(matches!(
            ClassPrior::new(0.5).unwrap().require_non_degenerate(),
            Err(Error::DegeneratePrior(_))
        ));
    }

    #[test]
    fn corrections() {
        assert_eq!(CorrectionKind::MaxZero.apply(-2.0), 0.0);
        assert_eq!(CorrectionKind::Abs.apply(-2.0), 2.0);
        assert_eq!(CorrectionKind::None.apply(-2.0), -2.0);
        assert_eq!(CorrectionKind::Abs.derivative(0.0), 0.0);
        assert_eq!(CorrectionKind::MaxZero.derivative(0.0), 0.0);
        assert!("bogus".parse::<CorrectionKind>().is_err());
        assert_eq!("abs".parse::<CorrectionKind>().unwrap(), CorrectionKind::Abs);
    }

    #[test]
    fn square_interval_bounds() {
        let spec = LossSpec::square_on_interval(2.0).unwrap();
        assert_eq!(spec.lipschitz_bound, Some(6.0));
        assert_eq!(spec.value_bound, Some(9.0));
    }

    #[test]
    fn triplet_serializes_without_labels() {
        let t = Triplet::new(
            FeatureVector::new(vec![1.0]).unwrap(),
            FeatureVector::new(vec![2.0]).unwrap(),
            FeatureVector::new(vec![3.0]).unwrap(),
        );
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"anchor":[1.0],"c1":[2.0],"c2":[3.0]}"#);
    }

    proptest! {
        #[test]
        fn loss_symmetric_under_joint_flip(z in -50.0f64..50.0) {
            let sq = LossSpec::square();
            for y in Label::BOTH {
                prop_assert_eq!(sq.value(z, y).unwrap(), sq.value(-z, y.flip()).unwrap());
            }
        }

        #[test]
        fn loss_is_nonnegative(z in -1e3f64..1e3) {
            let sq = LossSpec::square();
            prop_assert!(sq.value(z, Label::Pos).unwrap() >= 0.0);
            prop_assert!(sq.value(z, Label::Neg).unwrap() >= 0.0);
        }
    }
}
