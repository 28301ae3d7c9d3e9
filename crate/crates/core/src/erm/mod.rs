//! Constrained balanced empirical risk minimization over linear scores
//! `g_β(x) = βᵀx` with `‖β‖ ≤ u`.

mod loss;

pub use loss::{LossKind, LossSpec, MarginLoss};

use crate::data::{ClassConditionalSampler, ClassSample};
use crate::error::{positive, Error, Result};
use crate::measures::{Label, LabeledDataset, Weighting};
use crate::numeric::{dot, mean_and_std_err, norm, pairwise_sum};
use crate::rng::{domain, substream};

/// Slack allowed on the norm constraint.
const NORM_SLACK: f64 = 1e-9;

/// A linear score `x ↦ βᵀx` constrained to the ball `‖β‖ ≤ norm_cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScore {
    beta: Vec<f64>,
    norm_cap: f64,
}

impl LinearScore {
    pub fn new(beta: Vec<f64>, norm_cap: f64) -> Result<Self> {
        positive("norm_cap", norm_cap)?;
        let n = norm(&beta);
        if n.is_nan() || n > norm_cap + NORM_SLACK {
            return Err(Error::Domain {
                name: "‖beta‖",
                value: n,
                expected: "at most the norm cap",
            });
        }
        Ok(Self { beta, norm_cap })
    }

    pub fn zeros(dim: usize, norm_cap: f64) -> Self {
        Self {
            beta: vec![0.0; dim],
            norm_cap,
        }
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn norm_cap(&self) -> f64 {
        self.norm_cap
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.beta, x)
    }

    /// `+1` when the score is nonnegative.
    pub fn classify(&self, x: &[f64]) -> Label {
        if self.eval(x) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Euclidean projection onto `{‖β‖ ≤ u}`.
pub fn project_ball(beta: &[f64], u: f64) -> Vec<f64> {
    let n = norm(beta);
    if n <= u {
        beta.to_vec()
    } else {
        let s = u / n;
        beta.iter().map(|b| b * s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Armijo backtracking with sufficient-decrease constant `c`, halving on rejection.
    Backtracking {
        c: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Zero,
    Provided(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub init: Init,
    /// Stop once the projected-gradient norm is below `tol_grad · (1 + |objective|)`.
    pub tol_grad: f64,
    /// Stop once an accepted step decreases the objective by at most `tol_obj · (1 + |objective|)`.
    pub tol_obj: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            step_rule: StepRule::Backtracking { c: 1e-4 },
            init: Init::Zero,
            tol_grad: 1e-8,
            tol_obj: 1e-15,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        positive("tol_grad", self.tol_grad)?;
        positive("tol_obj", self.tol_obj)?;
        match self.step_rule {
            StepRule::Fixed(s) => positive("step", s).map(drop),
            StepRule::Backtracking { c } if c > 0.0 && c < 1.0 => Ok(()),
            StepRule::Backtracking { c } => Err(Error::Domain {
                name: "armijo c",
                value: c,
                expected: "open interval (0, 1)",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    ObjectiveTolerance,
    MaxIterations,
    /// Backtracking could not find an acceptable step.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub objective: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Objective after each accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub score: LinearScore,
    pub diagnostics: FitDiagnostics,
}

/// `R_{n,q}(β) = c₊ Σ_{y=+1} φ(βᵀz) + c₋ Σ_{y=−1} φ(βᵀz)` with `z = y·x`.
///
/// Balanced mode uses `c± = 1 / (2 n±)`; an explicit `q` uses
/// `c₊ = 1 / (2 n q)` and `c₋ = 1 / (2 n (1 − q))`.
struct Objective<'a, L: ?Sized> {
    dim: usize,
    signed_pos: Vec<f64>,
    signed_neg: Vec<f64>,
    coef_pos: f64,
    coef_neg: f64,
    loss: &'a L,
}

impl<'a, L: MarginLoss + ?Sized> Objective<'a, L> {
    fn new(data: &LabeledDataset, loss: &'a L, weighting: Weighting) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (n_pos, n_neg) = data.class_counts();
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::DegenerateClass {
                positives: n_pos,
                negatives: n_neg,
            });
        }
        let dim = data.dim();
        let mut signed_pos = Vec::with_capacity(n_pos * dim);
        let mut signed_neg = Vec::with_capacity(n_neg * dim);
        for (x, y) in data.iter() {
            match y {
                Label::Positive => signed_pos.extend_from_slice(x),
                Label::Negative => signed_neg.extend(x.iter().map(|v| -v)),
            }
        }
        let n = data.len() as f64;
        let (coef_pos, coef_neg) = match weighting {
            Weighting::Balanced => (0.5 / n_pos as f64, 0.5 / n_neg as f64),
            Weighting::Explicit(q) => (0.5 / (n * q.get()), 0.5 / (n * (1.0 - q.get()))),
        };
        Ok(Self {
            dim,
            signed_pos,
            signed_neg,
            coef_pos,
            coef_neg,
            loss,
        })
    }

    fn classes(&self) -> [(&[f64], f64); 2] {
        [(&self.signed_pos, self.coef_pos), (&self.signed_neg, self.coef_neg)]
    }

    fn value(&self, beta: &[f64]) -> f64 {
        self.classes()
            .iter()
            .map(|(rows, coef)| {
                let v: Vec<f64> = rows
                    .chunks_exact(self.dim)
                    .map(|z| self.loss.value(dot(beta, z)))
                    .collect();
                coef * pairwise_sum(&v)
            })
            .sum()
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim];
        for (rows, coef) in self.classes() {
            let slopes: Vec<f64> = rows
                .chunks_exact(self.dim)
                .map(|z| self.loss.derivative(dot(beta, z)))
                .collect();
            let mut terms = vec![0.0; slopes.len()];
            for (j, g) in grad.iter_mut().enumerate() {
                for (t, (s, z)) in terms.iter_mut().zip(slopes.iter().zip(rows.chunks_exact(self.dim))) {
                    *t = s * z[j];
                }
                *g += coef * pairwise_sum(&terms);
            }
        }
        grad
    }

    /// Largest eigenvalue of `Σ c_i z_i z_iᵀ` by power iteration.
    fn second_moment_top_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for (rows, coef) in self.classes() {
            for z in rows.chunks_exact(d) {
                for a in 0..d {
                    for b in 0..d {
                        m[a * d + b] += coef * z[a] * z[b];
                    }
                }
            }
        }
        let mut v = vec![1.0 / (d as f64).sqrt(); d];
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w: Vec<f64> = (0..d).map(|a| dot(&m[a * d..(a + 1) * d], &v)).collect();
            let wn = norm(&w);
            if wn == 0.0 {
                return 0.0;
            }
            let next = wn;
            v = w.into_iter().map(|x| x / wn).collect();
            if (next - lambda).abs() <= 1e-12 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    }
}

/// Gradient in `β` of the weighted empirical risk `R_{n,q}(g_β)`.
pub fn balanced_risk_gradient<L: MarginLoss + ?Sized>(
    data: &LabeledDataset,
    score: &LinearScore,
    loss: &L,
    weighting: Weighting,
) -> Result<Vec<f64>> {
    if score.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: score.dim(),
        });
    }
    Ok(Objective::new(data, loss, weighting)?.gradient(score.beta()))
}

fn projected_gradient_norm(beta: &[f64], grad: &[f64], u: f64) -> f64 {
    let moved: Vec<f64> = beta.iter().zip(grad).map(|(b, g)| b - g).collect();
    let p = project_ball(&moved, u);
    beta.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Projected gradient descent on the weighted empirical risk over `‖β‖ ≤ u`.
///
/// The first trial step is `1/L̂`, with `L̂` the top eigenvalue of the weighted
/// second-moment matrix times the loss's curvature bound. Under backtracking
/// each iteration starts from twice the previously accepted step.
pub fn fit_constrained_balanced_erm<L: MarginLoss + ?Sized>(
    data: &LabeledDataset,
    loss: &L,
    curvature_bound: f64,
    u: f64,
    weighting: Weighting,
    cfg: &OptimizerConfig,
) -> Result<FitResult> {
    positive("u", u)?;
    cfg.validate()?;
    let obj = Objective::new(data, loss, weighting)?;
    let d = data.dim();

    let mut beta = match &cfg.init {
        Init::Zero => vec![0.0; d],
        Init::Provided(b) if b.len() == d => project_ball(b, u),
        Init::Provided(b) => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            })
        }
    };
    let lipschitz = curvature_bound * obj.second_moment_top_eigenvalue();
    let mut step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };

    let mut f = obj.value(&beta);
    let mut grad = obj.gradient(&beta);
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    while iterations < cfg.max_iters {
        if projected_gradient_norm(&beta, &grad, u) <= cfg.tol_grad * (1.0 + f.abs()) {
            stop = StopReason::GradientTolerance;
            break;
        }
        let (candidate, f_new) = match cfg.step_rule {
            StepRule::Fixed(s) => {
                let c = project_ball(&axpy(&beta, -s, &grad), u);
                let fc = obj.value(&c);
                (c, fc)
            }
            StepRule::Backtracking { c: armijo } => {
                let mut t = step * 2.0;
                loop {
                    let c = project_ball(&axpy(&beta, -t, &grad), u);
                    let fc = obj.value(&c);
                    let dir: f64 = grad
                        .iter()
                        .zip(c.iter().zip(&beta))
                        .map(|(g, (a, b))| g * (a - b))
                        .sum();
                    if fc <= f + armijo * dir {
                        step = t;
                        break (c, fc);
                    }
                    t *= 0.5;
                    if t < 1e-300 || c == beta {
                        break (beta.clone(), f);
                    }
                }
            }
        };
        if candidate == beta {
            stop = StopReason::LineSearchStalled;
            break;
        }
        iterations += 1;
        let decrease = f - f_new;
        beta = candidate;
        f = f_new;
        grad = obj.gradient(&beta);
        trace.push(f);
        if decrease >= 0.0 && decrease <= cfg.tol_obj * (1.0 + f.abs()) {
            stop = StopReason::ObjectiveTolerance;
            break;
        }
    }

    let grad_norm = projected_gradient_norm(&beta, &grad, u);
    let score = LinearScore::new(beta, u)?;
    Ok(FitResult {
        score,
        diagnostics: FitDiagnostics {
            objective: f,
            iterations,
            grad_norm,
            converged: matches!(stop, StopReason::GradientTolerance | StopReason::ObjectiveTolerance),
            stop_reason: stop,
            objective_trace: trace,
        },
    })
}

/// [`fit_constrained_balanced_erm`] for a named loss.
pub fn fit_balanced_erm(
    data: &LabeledDataset,
    loss: &LossSpec,
    u: f64,
    weighting: Weighting,
    cfg: &OptimizerConfig,
) -> Result<FitResult> {
    fit_constrained_balanced_erm(data, loss, loss.curvature_bound(), u, weighting, cfg)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// Class sizes `(round(N p), N − round(N p))`, each at least one.
pub fn oracle_class_counts(mc_draws: usize, p: f64) -> (usize, usize) {
    let n_pos = ((mc_draws as f64 * p).round() as usize).max(1);
    let n_neg = mc_draws.saturating_sub(n_pos).max(1);
    (n_pos, n_neg)
}

/// Proxy for the population minimizer `g*_p`: constrained balanced ERM on a
/// sample with exactly `round(N p)` positives and the rest negatives.
pub fn estimate_oracle_score<S: ClassConditionalSampler + ?Sized>(
    sampler: &S,
    loss: &LossSpec,
    u: f64,
    mc_draws: usize,
    cfg: &OptimizerConfig,
) -> Result<LinearScore> {
    if mc_draws == 0 {
        return Err(Error::Config("mc_draws must be at least 1".into()));
    }
    let (n_pos, n_neg) = oracle_class_counts(mc_draws, sampler.prior());
    let sample = ClassSample::draw(
        sampler,
        n_pos,
        n_neg,
        crate::rng::stream_id(&[cfg.seed, domain::ORACLE]),
    );
    let data = class_sample_dataset(&sample);
    Ok(fit_balanced_erm(&data, loss, u, Weighting::Balanced, cfg)?.score)
}

/// Positives first, then negatives.
pub fn class_sample_dataset(sample: &ClassSample) -> LabeledDataset {
    let mut features = sample.positives().to_vec();
    features.extend_from_slice(sample.negatives());
    let mut labels = vec![Label::Positive; sample.n_pos()];
    labels.extend(std::iter::repeat_n(Label::Negative, sample.n_neg()));
    LabeledDataset::from_flat(sample.dim(), features, labels).expect("finite draws")
}

/// `D² σ²_max / (μ σ²_min)`.
pub fn bernstein_constant_linear(d: f64, mu: f64, sigma_max_sq: f64, sigma_min_sq: f64) -> Result<f64> {
    positive("D", d)?;
    positive("mu", mu)?;
    positive("sigma_max_sq", sigma_max_sq)?;
    positive("sigma_min_sq", sigma_min_sq)?;
    Ok(d * d * sigma_max_sq / (mu * sigma_min_sq))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinRatio {
    pub beta: Vec<f64>,
    pub ph: f64,
    pub ph2: f64,
    pub ratio: f64,
    pub ratio_std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinReport {
    pub ratios: Vec<BernsteinRatio>,
    /// Scores whose `P(h)` fell below the threshold.
    pub skipped: usize,
    pub max_ratio: f64,
    pub max_ratio_std_err: f64,
    pub analytic_b: f64,
    pub derivative_bound: f64,
    pub strong_convexity: f64,
    pub sigma_max_sq: f64,
    pub sigma_min_sq: f64,
}

pub const BERNSTEIN_MIN_PH: f64 = 1e-6;

/// Parameters of [`bernstein_empirical_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinCheck {
    pub u: f64,
    pub q: f64,
    pub num_scores: usize,
    /// Draws per class.
    pub draws: usize,
    pub seed: u64,
}

/// Monte-Carlo check of `P h² ≤ B P h` for
/// `h = (1−q)(ℓ_g − ℓ_{g*}) 1{y=+1} + q (ℓ_g − ℓ_{g*}) 1{y=−1}`
/// over random feasible `β`, next to the analytic constant for linear scores.
///
/// `M` for the curvature constants is `u · max ‖x‖` over the drawn sample.
pub fn bernstein_empirical_check<S: ClassConditionalSampler + ?Sized>(
    sampler: &S,
    loss_kind: LossKind,
    oracle: &LinearScore,
    check: &BernsteinCheck,
) -> Result<BernsteinReport> {
    let BernsteinCheck {
        u,
        q,
        num_scores,
        draws,
        seed,
    } = *check;
    positive("u", u)?;
    crate::error::open_unit("q", q)?;
    if draws < 2 {
        return Err(Error::Config("draws must be at least 2".into()));
    }
    let p = sampler.prior();
    let d = sampler.dim();
    let sample = ClassSample::draw(sampler, draws, draws, crate::rng::stream_id(&[seed, domain::BERNSTEIN]));

    let max_norm = [sample.positives(), sample.negatives()]
        .iter()
        .flat_map(|rows| rows.chunks_exact(d).map(norm))
        .fold(0.0, f64::max);
    let loss = LossSpec::new(loss_kind, (u * max_norm).max(f64::MIN_POSITIVE))?;
    let (sigma_max_sq, sigma_min_sq) = second_moment_eigen_range(&sample);
    let derivative_bound = loss.derivative_bound();
    let strong_convexity = loss.strong_convexity();
    let analytic_b = if strong_convexity > 0.0 {
        bernstein_constant_linear(derivative_bound, strong_convexity, sigma_max_sq, sigma_min_sq)?
    } else {
        f64::INFINITY
    };

    let mut rng = substream(seed, &[domain::BERNSTEIN, 1]);
    let mut ratios = Vec::with_capacity(num_scores);
    let mut skipped = 0;
    for _ in 0..num_scores {
        let beta = random_in_ball(&mut rng, d, u);
        let score = LinearScore::new(beta.clone(), u)?;
        // Per-draw contributions to P h and P h², scaled so that each is an
        // average over the class sample.
        let mut a = Vec::with_capacity(2 * draws);
        let mut b = Vec::with_capacity(2 * draws);
        for (label, weight, prior) in [(Label::Positive, 1.0 - q, p), (Label::Negative, q, 1.0 - p)] {
            for x in sample.class_rows(label).chunks_exact(d) {
                let y = label.sign();
                let delta = loss.value(y * score.eval(x)) - loss.value(y * oracle.eval(x));
                let h = weight * delta;
                a.push(prior * h);
                b.push(prior * h * h);
            }
        }
        let (ph, ph2, cov) = class_moments(&a, &b, draws);
        if ph <= BERNSTEIN_MIN_PH {
            skipped += 1;
            continue;
        }
        let ratio = ph2 / ph;
        let var = (cov.var_b - 2.0 * ratio * cov.cov_ab + ratio * ratio * cov.var_a) / (ph * ph);
        ratios.push(BernsteinRatio {
            beta,
            ph,
            ph2,
            ratio,
            ratio_std_err: var.max(0.0).sqrt(),
        });
    }
    let (max_ratio, max_ratio_std_err) = ratios
        .iter()
        .map(|r| (r.ratio, r.ratio_std_err))
        .fold((f64::NEG_INFINITY, 0.0), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(BernsteinReport {
        ratios,
        skipped,
        max_ratio,
        max_ratio_std_err,
        analytic_b,
        derivative_bound,
        strong_convexity,
        sigma_max_sq,
        sigma_min_sq,
    })
}

struct Covariance {
    var_a: f64,
    var_b: f64,
    cov_ab: f64,
}

/// Sums of the two per-class means, and the variance terms of those sums.
/// The first `draws` entries of `a`/`b` are positives, the rest negatives.
fn class_moments(a: &[f64], b: &[f64], draws: usize) -> (f64, f64, Covariance) {
    let mut total_a = 0.0;
    let mut total_b = 0.0;
    let mut cov = Covariance {
        var_a: 0.0,
        var_b: 0.0,
        cov_ab: 0.0,
    };
    for (ca, cb) in a.chunks(draws).zip(b.chunks(draws)) {
        let (ma, _) = mean_and_std_err(ca);
        let (mb, _) = mean_and_std_err(cb);
        let n = ca.len() as f64;
        let (mut va, mut vb, mut cab) = (0.0, 0.0, 0.0);
        for (x, y) in ca.iter().zip(cb) {
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
            cab += (x - ma) * (y - mb);
        }
        let denom = (n - 1.0) * n;
        cov.var_a += va / denom;
        cov.var_b += vb / denom;
        cov.cov_ab += cab / denom;
        total_a += ma;
        total_b += mb;
    }
    (total_a, total_b, cov)
}

/// Uniform draw from the ball of radius `u` in `d` dimensions.
pub fn random_in_ball(rng: &mut crate::rng::StreamRng, d: usize, u: f64) -> Vec<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = norm(&dir);
    let r = u * rng.gen::<f64>().powf(1.0 / d as f64);
    dir.iter().map(|v| v / n * r).collect()
}

/// Largest and smallest eigenvalue over the two class second-moment matrices
/// `E[x xᵀ | y]`.
fn second_moment_eigen_range(sample: &ClassSample) -> (f64, f64) {
    let d = sample.dim();
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for rows in [sample.positives(), sample.negatives()] {
        let n = (rows.len() / d) as f64;
        let mut m = nalgebra::DMatrix::<f64>::zeros(d, d);
        for x in rows.chunks_exact(d) {
            let v = nalgebra::DVector::from_column_slice(x);
            m += &v * v.transpose();
        }
        m /= n;
        let eig = m.symmetric_eigen();
        hi = hi.max(eig.eigenvalues.max());
        lo = lo.min(eig.eigenvalues.min());
    }
    (hi, lo)
}
