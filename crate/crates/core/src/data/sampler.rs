use rand::Rng;

use crate::measures::Label;
use crate::par;
use crate::rng::{domain, substream, StreamRng};

/// Rows generated per random substream; fixed so output never depends on threading.
pub(crate) const CHUNK_ROWS: usize = 4096;

/// A source of class-conditional draws `X | Y = y` together with the class prior.
pub trait ClassConditionalSampler: Sync {
    fn dim(&self) -> usize;

    /// `P(Y = +1)`.
    fn prior(&self) -> f64;

    /// Writes one draw of `X | Y = label` into `out` (length `dim`).
    fn sample_class(&self, label: Label, rng: &mut StreamRng, out: &mut [f64]);

    /// One draw from the joint law; returns the label.
    fn sample_joint(&self, rng: &mut StreamRng, out: &mut [f64]) -> Label {
        let label = if rng.gen::<f64>() < self.prior() {
            Label::Positive
        } else {
            Label::Negative
        };
        self.sample_class(label, rng, out);
        label
    }
}

impl<S: ClassConditionalSampler + ?Sized> ClassConditionalSampler for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn prior(&self) -> f64 {
        (**self).prior()
    }
    fn sample_class(&self, label: Label, rng: &mut StreamRng, out: &mut [f64]) {
        (**self).sample_class(label, rng, out)
    }
}

/// Fixed-size draws from each class, stored row-major per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSample {
    dim: usize,
    positives: Vec<f64>,
    negatives: Vec<f64>,
}

impl ClassSample {
    /// Draws `n_pos` positives and `n_neg` negatives.
    pub fn draw<S: ClassConditionalSampler + ?Sized>(sampler: &S, n_pos: usize, n_neg: usize, seed: u64) -> Self {
        let dim = sampler.dim();
        Self {
            dim,
            positives: draw_class(sampler, Label::Positive, n_pos, seed, domain::MC_POSITIVE),
            negatives: draw_class(sampler, Label::Negative, n_neg, seed, domain::MC_NEGATIVE),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positives(&self) -> &[f64] {
        &self.positives
    }

    pub fn negatives(&self) -> &[f64] {
        &self.negatives
    }

    pub fn n_pos(&self) -> usize {
        self.positives.len() / self.dim
    }

    pub fn n_neg(&self) -> usize {
        self.negatives.len() / self.dim
    }

    /// Class rows for `label`.
    pub fn class_rows(&self, label: Label) -> &[f64] {
        match label {
            Label::Positive => &self.positives,
            Label::Negative => &self.negatives,
        }
    }
}

fn draw_class<S: ClassConditionalSampler + ?Sized>(
    sampler: &S,
    label: Label,
    count: usize,
    seed: u64,
    stream: u64,
) -> Vec<f64> {
    let dim = sampler.dim();
    let chunks = count.div_ceil(CHUNK_ROWS);
    let parts = par::map_range(chunks, |c| {
        let rows = CHUNK_ROWS.min(count - c * CHUNK_ROWS);
        let mut rng = substream(seed, &[stream, c as u64]);
        let mut out = vec![0.0; rows * dim];
        for row in out.chunks_exact_mut(dim) {
            sampler.sample_class(label, &mut rng, row);
        }
        out
    });
    parts.concat()
}

/// Restricts a sampler to the Euclidean ball of radius `radius` by rejection.
#[derive(Debug, Clone)]
pub struct Truncated<S> {
    pub inner: S,
    pub radius: f64,
}

impl<S: ClassConditionalSampler> ClassConditionalSampler for Truncated<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn prior(&self) -> f64 {
        self.inner.prior()
    }

    fn sample_class(&self, label: Label, rng: &mut StreamRng, out: &mut [f64]) {
        let r2 = self.radius * self.radius;
        loop {
            self.inner.sample_class(label, rng, out);
            if out.iter().map(|v| v * v).sum::<f64>() <= r2 {
                return;
            }
        }
    }
}
