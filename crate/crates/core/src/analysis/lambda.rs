//! Error-suppression ratio between distance-5 and distance-7 codes.

use crate::analysis::fits::{eps_from_pl, fit_linear, fit_power_law, FitResult};
use crate::circuits::{Circuit, DetectorSet};
use crate::decode::{logical_error_probability, DetectorGraph, LogicalStats};
use crate::sim::RecordSet;
use crate::{Error, Result};

/// Suppression factor `lambda = eps5 / eps7` with propagated uncertainty.
#[derive(Clone, Debug)]
pub struct LambdaResult {
    pub eps5: f64,
    pub eps7: f64,
    pub eps5_sd: f64,
    pub eps7_sd: f64,
    pub lambda: f64,
    pub inverse: f64,
    pub lambda_sd: f64,
    /// True when eps7 is compatible with zero and `lambda` is only a lower
    /// bound (computed against the upper CI of eps7).
    pub lower_bound_only: bool,
}

fn eps_with_sd(stats: &LogicalStats, n_cycles: u32) -> Result<(f64, f64)> {
    let eps = eps_from_pl(stats.p.min(0.5), n_cycles)?;
    // Derivative of the conversion, evaluated at p_L.
    let pl = stats.p.min(0.4999);
    let deriv = (1.0 - 2.0 * pl).powf(1.0 / n_cycles as f64 - 1.0) / n_cycles as f64;
    let sd_pl = (stats.ci_high - stats.ci_low) / (2.0 * 1.959963984540054);
    Ok((eps, deriv * sd_pl))
}

/// Form the ratio from two decoded logical-error stats over equal cycles.
pub fn lambda_from_stats(
    stats5: &LogicalStats,
    n5: u32,
    stats7: &LogicalStats,
    n7: u32,
) -> Result<LambdaResult> {
    if n5 != n7 {
        return Err(Error::InvalidParam(format!(
            "cycle counts differ ({n5} vs {n7}); the ratio is defined per cycle"
        )));
    }
    let (eps5, eps5_sd) = eps_with_sd(stats5, n5)?;
    let (eps7, eps7_sd) = eps_with_sd(stats7, n7)?;
    if stats7.errors == 0 {
        let (eps7_hi, _) = eps_with_sd(
            &LogicalStats { p: stats7.ci_high, ..stats7.clone() },
            n7,
        )?;
        let lambda = if eps7_hi > 0.0 { eps5 / eps7_hi } else { f64::INFINITY };
        return Ok(LambdaResult {
            eps5,
            eps7: 0.0,
            eps5_sd,
            eps7_sd,
            lambda,
            inverse: if lambda.is_finite() { 1.0 / lambda } else { 0.0 },
            lambda_sd: f64::NAN,
            lower_bound_only: true,
        });
    }
    let lambda = eps5 / eps7;
    let rel = ((eps5_sd / eps5).powi(2) + (eps7_sd / eps7).powi(2)).sqrt();
    Ok(LambdaResult {
        eps5,
        eps7,
        eps5_sd,
        eps7_sd,
        lambda,
        inverse: 1.0 / lambda,
        lambda_sd: lambda * rel,
        lower_bound_only: false,
    })
}

/// Decode two record sets and form the suppression ratio.
#[allow(clippy::too_many_arguments)]
pub fn lambda_from_runs(
    records5: &RecordSet,
    detectors5: &DetectorSet,
    graph5: &DetectorGraph,
    circuit5: &Circuit,
    records7: &RecordSet,
    detectors7: &DetectorSet,
    graph7: &DetectorGraph,
    circuit7: &Circuit,
) -> Result<LambdaResult> {
    let stats5 = logical_error_probability(records5, detectors5, graph5, circuit5)?;
    let stats7 = logical_error_probability(records7, detectors7, graph7, circuit7)?;
    lambda_from_stats(&stats5, circuit5.n_cycles, &stats7, circuit7.n_cycles)
}

/// Sweep of the ratio over injected populations, with model fits.
#[derive(Clone, Debug)]
pub struct LambdaSweep {
    /// (injected population, result) sorted by population.
    pub points: Vec<(f64, LambdaResult)>,
}

impl LambdaSweep {
    pub fn new(mut points: Vec<(f64, LambdaResult)>) -> LambdaSweep {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        LambdaSweep { points }
    }

    /// Linear fit of `1/lambda` against the injected population.
    pub fn fit_inverse_linear(&self) -> Result<FitResult> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(_, r)| !r.lower_bound_only)
            .map(|(p, r)| (*p, r.inverse))
            .collect();
        fit_linear(&pts)
    }

    /// Ratio-of-offset-power-laws fit: each distance's per-cycle error is
    /// fitted separately and the ratio of the two models is returned as
    /// `(fit5, fit7)`.
    pub fn fit_ratio_of_power_laws(&self) -> Result<(FitResult, FitResult)> {
        let pts5: Vec<(f64, f64)> = self.points.iter().map(|(p, r)| (*p, r.eps5)).collect();
        let pts7: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(_, r)| r.eps7 > 0.0)
            .map(|(p, r)| (*p, r.eps7))
            .collect();
        Ok((fit_power_law(&pts5)?, fit_power_law(&pts7)?))
    }

    /// Second divided differences of `1/lambda`; positive values mean the
    /// response is convex in the injected population.
    pub fn inverse_second_differences(&self) -> Vec<f64> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|(p, r)| (*p, r.inverse)).collect();
        pts.windows(3)
            .map(|w| {
                let d1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                let d2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
                2.0 * (d2 - d1) / (w[2].0 - w[0].0)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p_injected,eps5,eps7,lambda,inverse,lambda_sd,lower_bound\n");
        for (p, r) in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p, r.eps5, r.eps7, r.lambda, r.inverse, r.lambda_sd, r.lower_bound_only
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn stats(errors: usize, shots: usize) -> LogicalStats {
        LogicalStats::from_counts(errors, shots)
    }

    #[test]
    fn ratio_definition_holds() {
        // p_L chosen so eps5 = 7.2e-3-ish, eps7 = 1.0e-3 at one cycle.
        let s5 = stats(720, 100_000);
        let s7 = stats(100, 100_000);
        let r = lambda_from_stats(&s5, 1, &s7, 1).unwrap();
        assert_abs_diff_eq!(r.lambda, 7.2, epsilon = 1e-9);
        assert_abs_diff_eq!(r.inverse, 1.0 / 7.2, epsilon = 1e-12);
        assert!(!r.lower_bound_only);
        assert!(r.lambda_sd > 0.0);
    }

    #[test]
    fn identical_inputs_give_unity_and_swap_gives_reciprocal() {
        let s = stats(250, 50_000);
        let r = lambda_from_stats(&s, 10, &s, 10).unwrap();
        assert_abs_diff_eq!(r.lambda, 1.0, epsilon = 1e-12);
        let a = stats(300, 50_000);
        let b = stats(100, 50_000);
        let fwd = lambda_from_stats(&a, 10, &b, 10).unwrap();
        let rev = lambda_from_stats(&b, 10, &a, 10).unwrap();
        assert_abs_diff_eq!(fwd.lambda * rev.lambda, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_denominator_reports_lower_bound() {
        let s5 = stats(100, 10_000);
        let s7 = stats(0, 10_000);
        let r = lambda_from_stats(&s5, 5, &s7, 5).unwrap();
        assert!(r.lower_bound_only);
        assert!(r.lambda.is_finite());
        assert!(r.lambda > 0.0);
    }

    #[test]
    fn mismatched_cycles_rejected() {
        let s = stats(10, 1000);
        assert!(lambda_from_stats(&s, 5, &s, 7).is_err());
    }

    #[test]
    fn convexity_detector() {
        let mk = |inv: f64| LambdaResult {
            eps5: inv,
            eps7: 1.0,
            eps5_sd: 0.0,
            eps7_sd: 0.0,
            lambda: 1.0 / inv,
            inverse: inv,
            lambda_sd: 0.0,
            lower_bound_only: false,
        };
        let sweep = LambdaSweep::new(vec![
            (0.0, mk(0.2)),
            (1e-3, mk(0.25)),
            (2e-3, mk(0.4)),
            (3e-3, mk(0.7)),
        ]);
        assert!(sweep.inverse_second_differences().iter().all(|&d| d > 0.0));
        let linear = LambdaSweep::new(vec![
            (0.0, mk(0.2)),
            (1e-3, mk(0.3)),
            (2e-3, mk(0.4)),
            (3e-3, mk(0.5)),
        ]);
        let fit = linear.fit_inverse_linear().unwrap();
        assert!(fit.r_squared > 0.999999);
    }
}
