//! Synthetic and file-backed datasets.

mod cache;
mod loader;
mod sampler;
mod student;

pub use cache::{read_cache, read_cache_from, write_cache, write_cache_to, CACHE_MAGIC};
pub use loader::{load_csv, min_max_scale, parse_csv, write_csv, CsvSchema, LabelColumn};
pub use sampler::{ClassConditionalSampler, ClassSample, Truncated};
pub use student::{sample_student_mixture, student_log_density, true_eta, StudentClass, StudentMixtureParams};
