//! Balanced k-nearest-neighbor estimate and classifier, and the balanced
//! Bayes rule used as a reference.

mod kdtree;

pub use kdtree::{brute_force_neighbors, KdTree, Neighbor};

use crate::data::{true_eta, ClassConditionalSampler, ClassSample, StudentMixtureParams};
use crate::error::{open_unit, Error, Result};
use crate::measures::{estimate_class_prob, Label, LabeledDataset, MonteCarloEstimate};
use crate::numeric::mean_and_std_err;
use crate::par;
use crate::rng::{domain, substream};

/// Above this dimension the model falls back to the brute-force scan.
pub const KD_TREE_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborSearch {
    BruteForce,
    KdTree,
}

/// k-th smallest Euclidean distance from `x` to the rows of `points`.
pub fn knn_radius(points: &[f64], dim: usize, x: &[f64], k: usize) -> Result<f64> {
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let nbrs = brute_force_neighbors(points, dim, x, k);
    Ok(nbrs[k - 1].dist_sq.sqrt())
}

/// A fitted balanced k-NN model. Immutable once built.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: LabeledDataset,
    k: usize,
    p_hat: f64,
    n_pos: usize,
    index: Option<KdTree>,
}

impl KnnModel {
    /// Uses the k-d tree when the dimension allows it.
    pub fn new(train: LabeledDataset, k: usize) -> Result<Self> {
        let search = if train.dim() <= KD_TREE_MAX_DIM {
            NeighborSearch::KdTree
        } else {
            NeighborSearch::BruteForce
        };
        Self::with_search(train, k, search)
    }

    pub fn with_search(train: LabeledDataset, k: usize, search: NeighborSearch) -> Result<Self> {
        let n = train.len();
        if k == 0 || k > n {
            return Err(Error::InvalidK { k, n });
        }
        let (n_pos, n_neg) = train.class_counts();
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::DegenerateClass {
                positives: n_pos,
                negatives: n_neg,
            });
        }
        let index = match search {
            NeighborSearch::KdTree => Some(KdTree::build(train.features(), train.dim())),
            NeighborSearch::BruteForce => None,
        };
        Ok(Self {
            p_hat: estimate_class_prob(&train),
            train,
            k,
            n_pos,
            index,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    pub fn train(&self) -> &LabeledDataset {
        &self.train
    }

    /// Exactly `k` neighbors, ascending by `(distance, training index)`.
    pub fn neighbors(&self, x: &[f64]) -> Vec<Neighbor> {
        match &self.index {
            Some(tree) => tree.nearest(x, self.k),
            None => brute_force_neighbors(self.train.features(), self.train.dim(), x, self.k),
        }
    }

    pub fn radius(&self, x: &[f64]) -> f64 {
        self.neighbors(x)[self.k - 1].dist_sq.sqrt()
    }

    fn positive_neighbors(&self, x: &[f64]) -> usize {
        self.neighbors(x)
            .iter()
            .filter(|nb| self.train.label(nb.index).is_positive())
            .count()
    }

    /// `η̂(x)`: fraction of positives among the `k` selected neighbors.
    pub fn eta(&self, x: &[f64]) -> f64 {
        self.positive_neighbors(x) as f64 / self.k as f64
    }

    /// `+1` iff `η̂(x) ≥ p̂`. Compared as `count · n ≥ n₊ · k` in integers so
    /// that equality is exact.
    pub fn classify(&self, x: &[f64]) -> Label {
        let lhs = self.positive_neighbors(x) as u128 * self.train.len() as u128;
        let rhs = self.n_pos as u128 * self.k as u128;
        if lhs >= rhs {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Classifies each row of `queries`, in parallel when enabled.
    pub fn classify_batch(&self, queries: &[f64]) -> Vec<Label> {
        let d = self.train.dim();
        par::map_range(queries.len() / d, |i| self.classify(&queries[i * d..(i + 1) * d]))
    }
}

/// A regression function `η(x) = P(Y = +1 | X = x)`.
pub trait RegressionFunction: Sync {
    fn eta(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> RegressionFunction for F {
    fn eta(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

impl RegressionFunction for StudentMixtureParams {
    fn eta(&self, x: &[f64]) -> f64 {
        true_eta(self, x)
    }
}

/// `η` paired with the class prior `p`; defines the balanced Bayes rule.
#[derive(Debug, Clone)]
pub struct BayesOracle<E> {
    eta: E,
    p: f64,
}

impl<E: RegressionFunction> BayesOracle<E> {
    pub fn new(eta: E, p: f64) -> Result<Self> {
        open_unit("p", p)?;
        Ok(Self { eta, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        self.eta.eta(x)
    }
}

/// `g*_p(x) = +1` iff `η(x) ≥ p`.
pub fn bayes_balanced_classify<E: RegressionFunction>(oracle: &BayesOracle<E>, x: &[f64]) -> Label {
    if oracle.eta(x) >= oracle.p {
        Label::Positive
    } else {
        Label::Negative
    }
}

const MC_CHUNK: usize = 8192;

fn check_prior<E, S: ClassConditionalSampler + ?Sized>(oracle: &BayesOracle<E>, sampler: &S) -> Result<()> {
    if (oracle.p - sampler.prior()).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "oracle prior {} differs from sampler prior {}",
            oracle.p,
            sampler.prior()
        )));
    }
    Ok(())
}

/// Excess AM risk of `classifier` over the balanced Bayes rule, estimated
/// from `draws` samples of the feature marginal as
/// `½ E[1{g(X) ≠ g*_p(X)} |η(X) − p| / (p (1 − p))]`.
///
/// The expectation alone is the excess of the summed class-conditional
/// errors; it is halved here because AM risk averages them.
pub fn excess_am_risk_identity<E, C, S>(
    oracle: &BayesOracle<E>,
    classifier: C,
    sampler: &S,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    E: RegressionFunction,
    C: Fn(&[f64]) -> Label + Sync,
    S: ClassConditionalSampler + ?Sized,
{
    if draws == 0 {
        return Err(Error::Config("draws must be at least 1".into()));
    }
    check_prior(oracle, sampler)?;
    let p = oracle.p;
    let d = sampler.dim();
    let chunks = draws.div_ceil(MC_CHUNK);
    let parts = par::map_range(chunks, |c| {
        let rows = MC_CHUNK.min(draws - c * MC_CHUNK);
        let mut rng = substream(seed, &[domain::MC_MARGINAL, c as u64]);
        let mut x = vec![0.0; d];
        (0..rows)
            .map(|_| {
                sampler.sample_joint(&mut rng, &mut x);
                let eta = oracle.eta(&x);
                let bayes = if eta >= p { Label::Positive } else { Label::Negative };
                if classifier(&x) != bayes {
                    0.5 * (eta - p).abs() / (p * (1.0 - p))
                } else {
                    0.0
                }
            })
            .collect::<Vec<f64>>()
    });
    let values = parts.concat();
    let (mean, std_err) = mean_and_std_err(&values);
    Ok(MonteCarloEstimate { mean, std_err })
}

/// Direct Monte-Carlo estimate of `AM(g) − AM(g*_p)` from class-conditional
/// draws, evaluating both classifiers on the same points.
pub fn direct_excess_am_risk<E, C, S>(
    oracle: &BayesOracle<E>,
    classifier: C,
    sampler: &S,
    draws_per_class: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    E: RegressionFunction,
    C: Fn(&[f64]) -> Label + Sync,
    S: ClassConditionalSampler + ?Sized,
{
    if draws_per_class < 2 {
        return Err(Error::Config("draws_per_class must be at least 2".into()));
    }
    check_prior(oracle, sampler)?;
    let sample = ClassSample::draw(sampler, draws_per_class, draws_per_class, seed);
    let d = sample.dim();
    let mut mean = 0.0;
    let mut var = 0.0;
    for label in [Label::Positive, Label::Negative] {
        let rows = sample.class_rows(label);
        let diffs: Vec<f64> = par::map_range(rows.len() / d, |i| {
            let x = &rows[i * d..(i + 1) * d];
            let err = |l: Label| f64::from(u8::from(l != label));
            err(classifier(x)) - err(bayes_balanced_classify(oracle, x))
        });
        let (m, se) = mean_and_std_err(&diffs);
        mean += 0.5 * m;
        var += 0.25 * se * se;
    }
    Ok(MonteCarloEstimate {
        mean,
        std_err: var.sqrt(),
    })
}

#[cfg(test)]
mod tests;
