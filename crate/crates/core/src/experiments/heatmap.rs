//! Balanced k-NN AM risk over a grid of `(k, p) = (n^b, n^{−a})`.

use crate::data::{sample_student_mixture, ClassSample, StudentMixtureParams};
use crate::erm::class_sample_dataset;
use crate::error::{Error, Result};
use crate::experiments::{summarize, ResultRow, MAX_REDRAWS};
use crate::knn::KnnModel;
use crate::measures::{am_risk_of_predictions, LabeledDataset};
use crate::par;
use crate::rng::{domain, stream_id};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapConfig {
    pub n: usize,
    pub a_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Test points drawn per class.
    pub test_queries: usize,
}

/// `count` evenly spaced points covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            a_grid: linspace(0.25, 0.75, 5),
            b_grid: linspace(0.25, 0.75, 5),
            reps: 20,
            seed: 0,
            test_queries: 2000,
        }
    }
}

impl HeatmapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.a_grid.is_empty() || self.b_grid.is_empty() {
            return Err(Error::Config("a_grid and b_grid must be nonempty".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::Config("n must be at least 2".into()));
        }
        if self.test_queries == 0 {
            return Err(Error::Config("test_queries must be at least 1".into()));
        }
        for &v in self.a_grid.iter().chain(&self.b_grid) {
            if !(0.25..=0.75).contains(&v) {
                return Err(Error::Domain {
                    name: "grid exponent",
                    value: v,
                    expected: "[1/4, 3/4]",
                });
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        vec![
            ("experiment".into(), "knn-heatmap".into()),
            ("n".into(), self.n.to_string()),
            ("a_grid".into(), list(&self.a_grid)),
            ("b_grid".into(), list(&self.b_grid)),
            ("reps".into(), self.reps.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("test_queries".into(), self.test_queries.to_string()),
        ]
    }
}

/// `p = n^{−a}` and `k = round(n^b)` clamped to `[1, n]`.
pub fn cell_parameters(n: usize, a: f64, b: f64) -> (f64, usize) {
    let nf = n as f64;
    let p = nf.powf(-a);
    let k = (nf.powf(b).round() as usize).clamp(1, n);
    (p, k)
}

/// Draws `n` points, redrawing the whole set while a class is empty.
/// Returns the dataset and the number of redraws, or `None` when every attempt failed.
pub(crate) fn draw_nondegenerate(
    params: &StudentMixtureParams,
    n: usize,
    seed: u64,
    keys: &[u64],
) -> Option<(LabeledDataset, usize)> {
    for attempt in 0..=MAX_REDRAWS {
        let mut k = keys.to_vec();
        k.push(attempt as u64);
        let data = sample_student_mixture(params, n, stream_id(&[seed, stream_id(&k)]));
        let (pos, neg) = data.class_counts();
        if pos > 0 && neg > 0 {
            return Some((data, attempt));
        }
    }
    None
}

struct RepOutcome {
    risk: Option<f64>,
    redraws: usize,
}

fn run_rep(cfg: &HeatmapConfig, a: f64, b: f64, rep: usize) -> Result<RepOutcome> {
    let (p, k) = cell_parameters(cfg.n, a, b);
    let params = StudentMixtureParams::reference(p)?;
    let keys = [domain::HEATMAP, a.to_bits(), b.to_bits(), rep as u64];
    let Some((train, redraws)) = draw_nondegenerate(&params, cfg.n, cfg.seed, &keys) else {
        log::warn!("cell a={a} b={b} rep {rep}: a class stayed empty after {MAX_REDRAWS} redraws");
        return Ok(RepOutcome {
            risk: None,
            redraws: MAX_REDRAWS,
        });
    };
    if redraws > 0 {
        log::debug!("cell a={a} b={b} rep {rep}: {redraws} redraws");
    }
    let model = KnnModel::new(train, k)?;
    let test_seed = stream_id(&[cfg.seed, domain::TEST_SET, a.to_bits(), b.to_bits(), rep as u64]);
    let test = class_sample_dataset(&ClassSample::draw(
        &params,
        cfg.test_queries,
        cfg.test_queries,
        test_seed,
    ));
    let predicted = model.classify_batch(test.features());
    let risk = am_risk_of_predictions(test.labels(), &predicted)?;
    Ok(RepOutcome {
        risk: Some(risk),
        redraws,
    })
}

/// One row per `(a, b)` cell, in `a`-major order.
pub fn run_knn_heatmap(cfg: &HeatmapConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells: Vec<(f64, f64)> = cfg
        .a_grid
        .iter()
        .flat_map(|&a| cfg.b_grid.iter().map(move |&b| (a, b)))
        .collect();
    let tasks = cells.len() * cfg.reps;
    let outcomes = par::map_range(tasks, |t| {
        let (a, b) = cells[t / cfg.reps];
        run_rep(cfg, a, b, t % cfg.reps)
    });
    let outcomes: Vec<RepOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let rows = cells
        .iter()
        .zip(outcomes.chunks(cfg.reps))
        .map(|(&(a, b), reps)| {
            let (p, k) = cell_parameters(cfg.n, a, b);
            let risks: Vec<f64> = reps.iter().filter_map(|r| r.risk).collect();
            let redraws: usize = reps.iter().map(|r| r.redraws).sum();
            let valid = risks.len() == reps.len();
            let stats = summarize(&risks);
            ResultRow::new()
                .with("a", a)
                .with("b", b)
                .with("n", cfg.n)
                .with("k", k)
                .with("p", p)
                .with("kp", k as f64 * p)
                .with("mean_am_risk", stats.mean)
                .with("q10", stats.q10)
                .with("q90", stats.q90)
                .with("reps", risks.len())
                .with("redraws", redraws)
                .with("valid", valid)
                .with("seed", cfg.seed)
        })
        .collect();
    Ok(rows)
}
