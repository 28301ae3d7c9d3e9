//! Weighted and balanced empirical measures over labeled samples.
//!
//! For `q` in `(0, 1)` the weighted empirical measure of a function `f` is
//! `½ (q⁻¹ Pₙ(f·1{y=+1}) + (1−q)⁻¹ Pₙ(f·1{y=−1}))`. With `q = p̂`, the
//! empirical positive rate, it reduces to the average of the two
//! class-conditional empirical means.

use crate::data::{ClassConditionalSampler, ClassSample};
use crate::erm::{LinearScore, MarginLoss};
use crate::error::{open_unit, Error, Result};
use crate::numeric::{mean_and_std_err, pairwise_mean, pairwise_sum};

/// Binary label in `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_i64(value: i64) -> Option<Self> {
        match value {
            -1 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// `n` feature vectors in `d` dimensions with their labels, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    dim: usize,
}

impl LabeledDataset {
    /// Builds a dataset from a flat row-major feature buffer.
    pub fn from_flat(dim: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidData("dimension must be at least 1".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::InvalidData(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature in row {} column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { features, labels, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::InvalidData(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.features.chunks_exact(self.dim).zip(self.labels.iter().copied())
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.len() - pos)
    }

    /// Keeps the rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            dim: self.dim,
        }
    }

    pub(crate) fn features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }
}

/// Weight parameter `q`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WeightParam(f64);

impl WeightParam {
    pub fn new(q: f64) -> Result<Self> {
        open_unit("q", q).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// How classes are weighted: an explicit `q`, or `q = p̂` taken from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Explicit(WeightParam),
    Balanced,
}

/// A real function of a labeled observation.
pub trait MeasurableFn: Sync {
    fn eval(&self, x: &[f64], y: Label) -> f64;
}

impl<F> MeasurableFn for F
where
    F: Fn(&[f64], Label) -> f64 + Sync,
{
    fn eval(&self, x: &[f64], y: Label) -> f64 {
        self(x, y)
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Fraction of positive labels; 0 for an empty dataset.
pub fn estimate_class_prob(data: &LabeledDataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    data.class_counts().0 as f64 / data.len() as f64
}

pub fn empirical_mean<F: MeasurableFn + ?Sized>(data: &LabeledDataset, f: &F) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let values: Vec<f64> = data.iter().map(|(x, y)| f.eval(x, y)).collect();
    Ok(pairwise_mean(&values))
}

/// Per-class sums of `f`, each accumulated pairwise: `(sum over +, sum over −)`.
fn class_sums<F: MeasurableFn + ?Sized>(data: &LabeledDataset, f: &F) -> (f64, f64) {
    let (pos, neg): (Vec<_>, Vec<_>) = data.iter().partition(|(_, y)| y.is_positive());
    let eval = |rows: Vec<(&[f64], Label)>| -> f64 {
        let v: Vec<f64> = rows.into_iter().map(|(x, y)| f.eval(x, y)).collect();
        pairwise_sum(&v)
    };
    (eval(pos), eval(neg))
}

/// Weighted empirical measure `P_{n,q}(f)`.
///
/// In [`Weighting::Balanced`] mode `q = p̂` and the value is the mean of the
/// two class-conditional means; an empty class contributes 0.
pub fn weighted_empirical<F: MeasurableFn + ?Sized>(data: &LabeledDataset, f: &F, weighting: Weighting) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (sum_pos, sum_neg) = class_sums(data, f);
    let n = data.len() as f64;
    match weighting {
        Weighting::Explicit(q) => {
            let q = q.get();
            Ok(0.5 * (sum_pos / n / q + sum_neg / n / (1.0 - q)))
        }
        Weighting::Balanced => {
            let (n_pos, n_neg) = data.class_counts();
            let mean_pos = if n_pos == 0 { 0.0 } else { sum_pos / n_pos as f64 };
            let mean_neg = if n_neg == 0 { 0.0 } else { sum_neg / n_neg as f64 };
            Ok(0.5 * (mean_pos + mean_neg))
        }
    }
}

fn require_both_classes(data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (positives, negatives) = data.class_counts();
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateClass { positives, negatives });
    }
    Ok(())
}

/// Weighted empirical risk `R_{n,q}(g)` of a linear score under a margin loss,
/// `ℓ_g(x, y) = φ(y βᵀx)`.
pub fn balanced_empirical_risk<L: MarginLoss + ?Sized>(
    data: &LabeledDataset,
    score: &LinearScore,
    loss: &L,
    weighting: Weighting,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if score.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: score.dim(),
        });
    }
    if weighting == Weighting::Balanced {
        require_both_classes(data)?;
    }
    let ell = |x: &[f64], y: Label| loss.value(y.sign() * score.eval(x));
    weighted_empirical(data, &ell, weighting)
}

/// Empirical AM risk: mean of the per-class error rates of `classifier`.
pub fn zero_one_am_risk<C>(data: &LabeledDataset, classifier: C) -> Result<f64>
where
    C: Fn(&[f64]) -> Label,
{
    let predicted: Vec<Label> = data.iter().map(|(x, _)| classifier(x)).collect();
    am_risk_of_predictions(data.labels(), &predicted)
}

/// AM risk of precomputed predictions against `truth`.
pub fn am_risk_of_predictions(truth: &[Label], predicted: &[Label]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let n_pos = truth.iter().filter(|y| y.is_positive()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateClass {
            positives: n_pos,
            negatives: n_neg,
        });
    }
    let (mut err_pos, mut err_neg) = (0usize, 0usize);
    for (y, g) in truth.iter().zip(predicted) {
        if g != y {
            match y {
                Label::Positive => err_pos += 1,
                Label::Negative => err_neg += 1,
            }
        }
    }
    Ok(0.5 * (err_pos as f64 / n_pos as f64 + err_neg as f64 / n_neg as f64))
}

/// Balanced risk `½ (E₊ ℓ_g + E₋ ℓ_g)` on a fixed class-conditional sample.
pub fn weighted_risk_on_sample<L: MarginLoss + ?Sized>(
    sample: &ClassSample,
    score: &LinearScore,
    loss: &L,
) -> MonteCarloEstimate {
    let class_losses = |rows: &[f64], sign: f64| -> Vec<f64> {
        rows.chunks_exact(sample.dim())
            .map(|x| loss.value(sign * score.eval(x)))
            .collect()
    };
    let (m_pos, se_pos) = mean_and_std_err(&class_losses(sample.positives(), 1.0));
    let (m_neg, se_neg) = mean_and_std_err(&class_losses(sample.negatives(), -1.0));
    MonteCarloEstimate {
        mean: 0.5 * (m_pos + m_neg),
        std_err: 0.5 * (se_pos * se_pos + se_neg * se_neg).sqrt(),
    }
}

/// Monte-Carlo estimate of the population balanced risk `R_p(g) = P_p(ℓ_g)`,
/// drawing `draws_per_class` observations from each class.
pub fn mc_weighted_risk_estimate<S, L>(
    sampler: &S,
    score: &LinearScore,
    loss: &L,
    draws_per_class: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    S: ClassConditionalSampler + ?Sized,
    L: MarginLoss + ?Sized,
{
    if draws_per_class == 0 {
        return Err(Error::Config("draws_per_class must be at least 1".into()));
    }
    let sample = ClassSample::draw(sampler, draws_per_class, draws_per_class, seed);
    Ok(weighted_risk_on_sample(&sample, score, loss))
}

/// [`mc_weighted_risk_estimate`] without the standard error.
pub fn mc_weighted_risk<S, L>(
    sampler: &S,
    score: &LinearScore,
    loss: &L,
    draws_per_class: usize,
    seed: u64,
) -> Result<f64>
where
    S: ClassConditionalSampler + ?Sized,
    L: MarginLoss + ?Sized,
{
    mc_weighted_risk_estimate(sampler, score, loss, draws_per_class, seed).map(|e| e.mean)
}
