//! Hyperparameter sweeps: grid enumeration, training and rolling-origin
//! testing of every point, result files and grouped summaries.

mod grid;
mod io;
mod run;
mod summary;

pub use grid::{
    data_choices, enumerate_full_grid, enumerate_reduced_grid, model_structures, reference_point, DataSpec,
    HyperparameterPoint, Method, ModelSpec, Preprocessing, EPSILON_THRESHOLDS, SEASON, SEASONAL_MIN_TRAINING_DAYS,
    TRAINING_DAYS,
};
pub use io::{
    load_results, persist_results, persist_summary, read_results, result_header, write_results, write_summary,
    PointFields, SUMMARY_HEADER,
};
pub use run::{
    evaluate_point, forecast_at, run_search, Dataset, EvaluationRecord, PointForecast, PreparedDataset, SearchConfig,
    Status, DEFAULT_TEST_DAYS,
};
pub use summary::{group_key, summarize, GroupBy, Summary, SummaryRow, SUMMARY_STEPS};
