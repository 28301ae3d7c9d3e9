//! Two-class multivariate Student-t mixture.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::sampler::{ClassConditionalSampler, CHUNK_ROWS};
use crate::error::{open_unit, positive, Error, Result};
use crate::measures::{Label, LabeledDataset};
use crate::par;
use crate::rng::{domain, substream, StreamRng};

/// Location, scale matrix and degrees of freedom of one class.
#[derive(Debug, Clone)]
pub struct StudentClass {
    location: Vec<f64>,
    scale: DMatrix<f64>,
    dof: f64,
    chol: DMatrix<f64>,
    log_det: f64,
    chi2: ChiSquared<f64>,
}

impl StudentClass {
    pub fn new(location: Vec<f64>, scale: DMatrix<f64>, dof: f64) -> Result<Self> {
        let d = location.len();
        if d == 0 || scale.nrows() != d || scale.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: scale.nrows(),
            });
        }
        positive("dof", dof)?;
        if (&scale - scale.transpose()).amax() > 1e-12 * scale.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite("scale matrix is not symmetric"));
        }
        let chol = scale
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("Cholesky factorization failed"))?
            .l();
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let chi2 = ChiSquared::new(dof).map_err(|_| Error::Domain {
            name: "dof",
            value: dof,
            expected: "> 0",
        })?;
        Ok(Self {
            location,
            scale,
            dof,
            chol,
            log_det,
            chi2,
        })
    }

    /// Isotropic class: `scale = variance · I`.
    pub fn isotropic(location: Vec<f64>, variance: f64, dof: f64) -> Result<Self> {
        let d = location.len();
        Self::new(location, DMatrix::identity(d, d) * variance, dof)
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// `μ + L z √(ν / w)` with `z ~ N(0, I)` and `w ~ χ²(ν)`.
    fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let w = self.chi2.sample(rng);
        let mix = (self.dof / w).sqrt();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let lz: f64 = (0..=i).map(|j| self.chol[(i, j)] * z[j]).sum();
            *o = self.location[i] + lz * mix;
        }
    }

    /// Squared Mahalanobis distance `(x−μ)ᵀ Σ⁻¹ (x−μ)` by forward substitution.
    fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_iterator(self.dim(), x.iter().zip(&self.location).map(|(a, b)| a - b));
        let y = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        y.norm_squared()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let nu = self.dof;
        let m = self.mahalanobis_sq(x);
        libm::lgamma((nu + d) / 2.0)
            - libm::lgamma(nu / 2.0)
            - 0.5 * d * (nu * std::f64::consts::PI).ln()
            - 0.5 * self.log_det
            - 0.5 * (nu + d) * (m / nu).ln_1p()
    }
}

/// Class prior plus the two class-conditional Student-t laws.
#[derive(Debug, Clone)]
pub struct StudentMixtureParams {
    p: f64,
    negative: StudentClass,
    positive: StudentClass,
}

impl StudentMixtureParams {
    pub fn new(p: f64, negative: StudentClass, positive: StudentClass) -> Result<Self> {
        open_unit("p", p)?;
        if negative.dim() != positive.dim() {
            return Err(Error::DimensionMismatch {
                expected: negative.dim(),
                got: positive.dim(),
            });
        }
        Ok(Self { p, negative, positive })
    }

    /// The 2-D reference mixture: negatives at the origin with scale `I` and
    /// 2.5 degrees of freedom, positives at `(1, 1)` with scale `3I` and 1.1
    /// degrees of freedom.
    pub fn reference(p: f64) -> Result<Self> {
        Self::new(
            p,
            StudentClass::isotropic(vec![0.0, 0.0], 1.0, 2.5)?,
            StudentClass::isotropic(vec![1.0, 1.0], 3.0, 1.1)?,
        )
    }

    /// Both classes share location 0, scale `I` and `dof` degrees of freedom.
    pub fn identical_classes(p: f64, dim: usize, dof: f64) -> Result<Self> {
        let class = StudentClass::isotropic(vec![0.0; dim], 1.0, dof)?;
        Self::new(p, class.clone(), class)
    }

    pub fn with_prior(&self, p: f64) -> Result<Self> {
        Self::new(p, self.negative.clone(), self.positive.clone())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn class(&self, label: Label) -> &StudentClass {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }
}

impl ClassConditionalSampler for StudentMixtureParams {
    fn dim(&self) -> usize {
        self.negative.dim()
    }

    fn prior(&self) -> f64 {
        self.p
    }

    fn sample_class(&self, label: Label, rng: &mut StreamRng, out: &mut [f64]) {
        self.class(label).sample(rng, out);
    }
}

/// `n` i.i.d. draws from the joint law; labels are Bernoulli(`p`).
pub fn sample_student_mixture(params: &StudentMixtureParams, n: usize, seed: u64) -> LabeledDataset {
    let dim = params.dim();
    let chunks = n.div_ceil(CHUNK_ROWS);
    let parts = par::map_range(chunks, |c| {
        let rows = CHUNK_ROWS.min(n - c * CHUNK_ROWS);
        let mut rng = substream(seed, &[domain::DATASET, c as u64]);
        let mut features = vec![0.0; rows * dim];
        let mut labels = Vec::with_capacity(rows);
        for row in features.chunks_exact_mut(dim) {
            labels.push(params.sample_joint(&mut rng, row));
        }
        (features, labels)
    });
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (f, l) in parts {
        features.extend(f);
        labels.extend(l);
    }
    LabeledDataset::from_flat(dim, features, labels).expect("Student-t draws are finite")
}

pub fn student_log_density(params: &StudentMixtureParams, which: Label, x: &[f64]) -> f64 {
    params.class(which).log_density(x)
}

/// `η(x) = P(Y = +1 | X = x)`, evaluated in log space.
pub fn true_eta(params: &StudentMixtureParams, x: &[f64]) -> f64 {
    let log_pos = params.p.ln() + params.positive.log_density(x);
    let log_neg = (-params.p).ln_1p() + params.negative.log_density(x);
    let diff = log_neg - log_pos;
    if diff >= 0.0 {
        let e = (-diff).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + diff.exp())
    }
}
