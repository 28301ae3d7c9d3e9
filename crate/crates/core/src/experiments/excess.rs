//! Excess balanced risk of constrained ERM as a function of `n`, with `p = n^{−a}`.

use crate::data::{ClassSample, StudentMixtureParams};
use crate::erm::{estimate_oracle_score, fit_balanced_erm, LinearScore, LossKind, LossSpec, OptimizerConfig};
use crate::error::{Error, Result};
use crate::experiments::heatmap::draw_nondegenerate;
use crate::experiments::{summarize, ResultRow};
use crate::measures::{weighted_risk_on_sample, MonteCarloEstimate, Weighting};
use crate::numeric::{mean_and_std_err, norm, ols_slope};
use crate::par;
use crate::rng::{domain, stream_id};

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessRiskConfig {
    pub n_grid: Vec<usize>,
    pub a: f64,
    pub u: f64,
    pub loss: LossKind,
    /// Sample size `N` for the oracle fit.
    pub oracle_draws: usize,
    /// Evaluation draws `N′` per class.
    pub risk_draws: usize,
    pub reps: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for ExcessRiskConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![100, 316, 1000, 3162, 10_000],
            a: 1.0 / 3.0,
            u: 10.0,
            loss: LossKind::Logistic,
            oracle_draws: 100_000,
            risk_draws: 10_000,
            reps: 100,
            seed: 0,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl ExcessRiskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must be nonempty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Config("n must be at least 2".into()));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::Domain {
                name: "a",
                value: self.a,
                expected: "(0, 1)",
            });
        }
        crate::error::positive("u", self.u)?;
        if self.reps == 0 || self.oracle_draws < 2 || self.risk_draws < 2 {
            return Err(Error::Config(
                "reps >= 1, oracle_draws >= 2 and risk_draws >= 2 required".into(),
            ));
        }
        self.optimizer.validate()
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let grid = self.n_grid.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        vec![
            ("experiment".into(), "erm-curve".into()),
            ("n_grid".into(), grid),
            ("a".into(), format!("{}", self.a)),
            ("u".into(), format!("{}", self.u)),
            ("loss".into(), self.loss.name().into()),
            ("oracle_draws".into(), self.oracle_draws.to_string()),
            ("risk_draws".into(), self.risk_draws.to_string()),
            ("reps".into(), self.reps.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("max_iters".into(), self.optimizer.max_iters.to_string()),
            ("tol_grad".into(), format!("{}", self.optimizer.tol_grad)),
            ("tol_obj".into(), format!("{}", self.optimizer.tol_obj)),
        ]
    }
}

/// `R(ĝ) − R(g*)` on a common class-conditional sample, with the standard
/// error of the paired per-point differences.
pub fn paired_excess<L: crate::erm::MarginLoss + ?Sized>(
    sample: &ClassSample,
    fitted: &LinearScore,
    reference: &LinearScore,
    loss: &L,
) -> MonteCarloEstimate {
    let d = sample.dim();
    let class = |rows: &[f64], sign: f64| {
        let diffs: Vec<f64> = rows
            .chunks_exact(d)
            .map(|x| loss.value(sign * fitted.eval(x)) - loss.value(sign * reference.eval(x)))
            .collect();
        mean_and_std_err(&diffs)
    };
    let (mp, sp) = class(sample.positives(), 1.0);
    let (mn, sn) = class(sample.negatives(), -1.0);
    MonteCarloEstimate {
        mean: 0.5 * (mp + mn),
        std_err: 0.5 * (sp * sp + sn * sn).sqrt(),
    }
}

struct Reference {
    loss: LossSpec,
    params: StudentMixtureParams,
    oracle: LinearScore,
    oracle_risk: MonteCarloEstimate,
}

fn eval_sample(cfg: &ExcessRiskConfig, params: &StudentMixtureParams, n: usize, key: u64) -> ClassSample {
    ClassSample::draw(
        params,
        cfg.risk_draws,
        cfg.risk_draws,
        stream_id(&[cfg.seed, domain::EXCESS, cfg.a.to_bits(), n as u64, key]),
    )
}

fn prepare(cfg: &ExcessRiskConfig, n: usize) -> Result<Reference> {
    let p = (n as f64).powf(-cfg.a);
    let params = StudentMixtureParams::reference(p)?;
    let eval = eval_sample(cfg, &params, n, u64::MAX);
    let radius = eval
        .positives()
        .chunks_exact(eval.dim())
        .chain(eval.negatives().chunks_exact(eval.dim()))
        .map(norm)
        .fold(0.0, f64::max);
    let loss = LossSpec::new(cfg.loss, cfg.u * radius.max(1.0))?;
    let oracle_cfg = OptimizerConfig {
        seed: stream_id(&[cfg.seed, cfg.a.to_bits(), n as u64]),
        ..cfg.optimizer.clone()
    };
    let oracle = estimate_oracle_score(&params, &loss, cfg.u, cfg.oracle_draws, &oracle_cfg)?;
    let oracle_risk = weighted_risk_on_sample(&eval, &oracle, &loss);
    Ok(Reference {
        loss,
        params,
        oracle,
        oracle_risk,
    })
}

struct RepOutcome {
    excess: Option<MonteCarloEstimate>,
    redraws: usize,
    converged: bool,
}

fn run_rep(cfg: &ExcessRiskConfig, n: usize, reference: &Reference, rep: usize) -> Result<RepOutcome> {
    let keys = [domain::EXCESS, cfg.a.to_bits(), n as u64, rep as u64];
    let Some((train, redraws)) = draw_nondegenerate(&reference.params, n, cfg.seed, &keys) else {
        return Ok(RepOutcome {
            excess: None,
            redraws: super::MAX_REDRAWS,
            converged: false,
        });
    };
    let fit = fit_balanced_erm(&train, &reference.loss, cfg.u, Weighting::Balanced, &cfg.optimizer)?;
    let eval = eval_sample(cfg, &reference.params, n, rep as u64);
    Ok(RepOutcome {
        excess: Some(paired_excess(&eval, &fit.score, &reference.oracle, &reference.loss)),
        redraws,
        converged: fit.diagnostics.converged,
    })
}

/// One row per `n`.
pub fn run_erm_excess_curve(cfg: &ExcessRiskConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let references: Vec<Reference> = par::map_slice(&cfg.n_grid, |&n| prepare(cfg, n))
        .into_iter()
        .collect::<Result<_>>()?;
    let tasks = cfg.n_grid.len() * cfg.reps;
    let outcomes: Vec<RepOutcome> = par::map_range(tasks, |t| {
        let i = t / cfg.reps;
        run_rep(cfg, cfg.n_grid[i], &references[i], t % cfg.reps)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let rows = cfg
        .n_grid
        .iter()
        .zip(&references)
        .zip(outcomes.chunks(cfg.reps))
        .map(|((&n, reference), reps)| {
            let p = reference.params.p();
            let raw: Vec<MonteCarloEstimate> = reps.iter().filter_map(|r| r.excess).collect();
            let clamped: Vec<f64> = raw.iter().map(|e| e.mean.max(0.0)).collect();
            let raw_means: Vec<f64> = raw.iter().map(|e| e.mean).collect();
            let within_noise = raw.iter().filter(|e| e.mean >= -3.0 * e.std_err).count();
            let stats = summarize(&clamped);
            ResultRow::new()
                .with("a", cfg.a)
                .with("n", n)
                .with("p", p)
                .with("np", n as f64 * p)
                .with("mean_excess", stats.mean)
                .with("q10", stats.q10)
                .with("q90", stats.q90)
                .with("mean_raw_excess", summarize(&raw_means).mean)
                .with("frac_within_3se", within_noise as f64 / raw.len().max(1) as f64)
                .with("oracle_risk", reference.oracle_risk.mean)
                .with("oracle_norm", norm(reference.oracle.beta()))
                .with("reps", raw.len())
                .with("redraws", reps.iter().map(|r| r.redraws).sum::<usize>())
                .with("unconverged", reps.iter().filter(|r| !r.converged).count())
                .with("valid", raw.len() == reps.len())
                .with("seed", cfg.seed)
        })
        .collect();
    Ok(rows)
}

/// Least-squares slope of `log(mean_excess)` against `log(np)` over rows with
/// positive mean excess.
pub fn excess_slope(rows: &[ResultRow]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.real("np")?, r.real("mean_excess")?)))
        .filter(|&(_, e)| e > 0.0)
        .map(|(np, e)| (np.ln(), e.ln()))
        .unzip();
    (x.len() >= 2).then(|| ols_slope(&x, &y))
}
