//! The two simulation studies, the bound report and their outputs.

mod excess;
mod heatmap;
mod report;
mod results;
mod svg;

pub use excess::{excess_slope, paired_excess, run_erm_excess_curve, ExcessRiskConfig};
pub use heatmap::{cell_parameters, linspace, run_knn_heatmap, HeatmapConfig};
pub use report::{run_bound_report, BoundReportInputs};
pub use results::{read_results, results_to_string, write_results, ResultRow, Scalar};
pub use svg::{excess_curve_svg, heatmap_svg};

use crate::numeric::{pairwise_mean, quantile_type7};

/// Whole-training-set redraws allowed while a class is empty.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

/// Mean and type-7 10%/90% quantiles; all NaN for an empty slice.
pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary {
            mean: f64::NAN,
            q10: f64::NAN,
            q90: f64::NAN,
        };
    }
    Summary {
        mean: pairwise_mean(values),
        q10: quantile_type7(values, 0.1),
        q90: quantile_type7(values, 0.9),
    }
}
