//! Statistical post-processing of detection-event records.

mod detprob;
mod fits;
mod lambda;
mod pij;

pub use detprob::{detection_probability_series, DetectionSeries};
pub use fits::{
    eps_from_pl, fit_exp_decay, fit_gompertz, fit_linear, fit_power_law, pl_from_eps, FitModel,
    FitResult,
};
pub use lambda::{lambda_from_runs, lambda_from_stats, LambdaResult, LambdaSweep};
pub use pij::{
    autocorrelation_avg, autocorrelation_avg_filtered, correlation_sd_bootstrap, estimate_pij,
    nn_correlation_avg, stab_neighbor_pairs, AvgCorrelation, PijMatrix, PijNode,
};
