//! Per-cycle error conversions and phenomenological model fits.
//!
//! Both nonlinear fitters reduce to a one-dimensional search (over the
//! offset or the rate constant) around an inner linear least-squares solve
//! in log space: a coarse multi-start grid picks the basin, golden-section
//! refinement polishes it. Residuals and R^2 are reported in log space.

use crate::{Error, Result};

/// Logical error per cycle from logical error probability after `n` cycles.
pub fn eps_from_pl(p_l: f64, n: u32) -> Result<f64> {
    if !(0.0..=0.5).contains(&p_l) {
        return Err(Error::InvalidParam(format!("p_L = {p_l} outside [0, 0.5]")));
    }
    if n < 1 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    // -expm1(log1p(-2 p_L) / n) / 2; avoids cancellation at small rates.
    Ok(-((-2.0 * p_l).ln_1p() / n as f64).exp_m1() / 2.0)
}

/// Inverse of [`eps_from_pl`].
pub fn pl_from_eps(eps: f64, n: u32) -> Result<f64> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::InvalidParam(format!("eps = {eps} outside [0, 0.5]")));
    }
    if n < 1 {
        return Err(Error::InvalidParam("n must be >= 1".into()));
    }
    Ok(-((-2.0 * eps).ln_1p() * n as f64).exp_m1() / 2.0)
}

/// Fitted model with parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FitModel {
    /// `eps(P) = a (P + p0)^b`
    OffsetPowerLaw { a: f64, b: f64, p0: f64 },
    /// `eps(n) = a exp(-b exp(-c n))`
    Gompertz { a: f64, b: f64, c: f64 },
    /// `y = slope x + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `y(t) = amplitude exp(-t / tau)`
    ExpDecay { amplitude: f64, tau: f64 },
}

impl FitModel {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FitModel::OffsetPowerLaw { a, b, p0 } => a * (x + p0).powf(b),
            FitModel::Gompertz { a, b, c } => a * (-b * (-c * x).exp()).exp(),
            FitModel::Linear { slope, intercept } => slope * x + intercept,
            FitModel::ExpDecay { amplitude, tau } => amplitude * (-x / tau).exp(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub model: FitModel,
    /// Covariance of the fitted parameters, linearized at the optimum.
    pub covariance: Vec<Vec<f64>>,
    pub r_squared: f64,
    pub residual_norm: f64,
    pub degenerate: bool,
    pub converged: bool,
}

fn check_points(points: &[(f64, f64)], min_len: usize, positive_y: bool) -> Result<()> {
    if points.len() < min_len {
        return Err(Error::InvalidParam(format!(
            "need at least {min_len} points, got {}",
            points.len()
        )));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParam("non-finite data point".into()));
        }
        if positive_y && y <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "log-space fit needs positive values, got {y}"
            )));
        }
    }
    Ok(())
}

/// Ordinary least squares `y = alpha + beta x`; returns (alpha, beta, rss).
fn ols(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let sx: f64 = xy.iter().map(|p| p.0).sum();
    let sy: f64 = xy.iter().map(|p| p.1).sum();
    let sxx: f64 = xy.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = xy.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let beta = if denom.abs() < 1e-30 { 0.0 } else { (n * sxy - sx * sy) / denom };
    let alpha = (sy - beta * sx) / n;
    let rss: f64 = xy
        .iter()
        .map(|&(x, y)| {
            let r = alpha + beta * x - y;
            r * r
        })
        .sum();
    (alpha, beta, rss)
}

fn log_space_r2(points: &[(f64, f64)], rss: f64) -> f64 {
    let n = points.len() as f64;
    let mean: f64 = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let tss: f64 = points.iter().map(|p| (p.1.ln() - mean).powi(2)).sum();
    if tss <= 0.0 {
        return if rss <= 1e-20 { 1.0 } else { 0.0 };
    }
    1.0 - rss / tss
}

/// Golden-section minimization of `f` on `[lo, hi]`.
fn golden_min(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64) -> (f64, bool) {
    const PHI: f64 = 0.618_033_988_749_894_8;
    let mut iterations = 0;
    let mut c = hi - PHI * (hi - lo);
    let mut d = lo + PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > 1e-10 * (1.0 + lo.abs() + hi.abs()) {
        iterations += 1;
        if iterations > 500 {
            return ((lo + hi) / 2.0, false);
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + PHI * (hi - lo);
            fd = f(d);
        }
    }
    ((lo + hi) / 2.0, true)
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = |r1: usize, c1: usize, r2: usize, c2: usize| {
        (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det
    };
    Some([
        [inv(1, 1, 2, 2), inv(0, 2, 2, 1), inv(0, 1, 1, 2)],
        [inv(1, 2, 2, 0), inv(0, 0, 2, 2), inv(0, 2, 1, 0)],
        [inv(1, 0, 2, 1), inv(0, 1, 2, 0), inv(0, 0, 1, 1)],
    ])
}

fn covariance3(jacobian: &[[f64; 3]], rss: f64, n: usize) -> Vec<Vec<f64>> {
    let mut jtj = [[0.0; 3]; 3];
    for row in jacobian {
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    let dof = n.saturating_sub(3).max(1) as f64;
    let sigma2 = rss / dof;
    match invert3(jtj) {
        Some(inv) => (0..3)
            .map(|i| (0..3).map(|j| inv[i][j] * sigma2).collect())
            .collect(),
        None => vec![vec![f64::NAN; 3]; 3],
    }
}

/// Fit `eps(P) = a (P + p0)^b` by least squares on `ln eps`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points, 4, true)?;
    if points.iter().any(|&(x, _)| x < 0.0) {
        return Err(Error::InvalidParam("P must be >= 0".into()));
    }
    let max_x = points.iter().map(|p| p.0).fold(0.0f64, f64::max);
    // Inner profile: for fixed offset, linear least squares in log space.
    let solve = |p0: f64| -> Option<(f64, f64, f64)> {
        if points.iter().any(|&(x, _)| x + p0 <= 0.0) {
            return None;
        }
        let xy: Vec<(f64, f64)> = points
            .iter()
            .map(|&(x, y)| ((x + p0).ln(), y.ln()))
            .collect();
        Some(ols(&xy))
    };
    let mut grid: Vec<f64> = vec![0.0];
    for i in 0..=15 {
        grid.push(10f64.powf(-4.0 + 3.0 * i as f64 / 15.0));
    }
    let mut best: Option<(f64, f64)> = None; // (p0, rss)
    for &p0 in &grid {
        if let Some((_, _, rss)) = solve(p0) {
            if best.is_none_or(|(_, b)| rss < b) {
                best = Some((p0, rss));
            }
        }
    }
    let (p0_grid, _) = best.ok_or_else(|| {
        Error::NonConvergence("no admissible offset (all P + p0 <= 0)".into())
    })?;
    let objective = |p0: f64| solve(p0).map_or(f64::INFINITY, |(_, _, rss)| rss);
    let lo = 0.0f64.max(p0_grid / 10.0 - 1e-12);
    let hi = (p0_grid * 10.0).max(1e-4).min(10.0 * max_x.max(0.1));
    let (p0, converged) = golden_min(lo, hi, &objective);
    let p0 = if objective(p0) <= objective(p0_grid) { p0 } else { p0_grid };
    let (alpha, beta, rss) = solve(p0).ok_or_else(|| {
        Error::NonConvergence("offset refinement left the admissible region".into())
    })?;
    let mut degenerate = false;
    let (alpha, mut b, rss) = if beta < 0.0 {
        // Outside the declared bounds: fall back to the flat model.
        degenerate = true;
        let mean: f64 = points.iter().map(|p| p.1.ln()).sum::<f64>() / points.len() as f64;
        let rss = points.iter().map(|p| (p.1.ln() - mean).powi(2)).sum();
        (mean, 0.0, rss)
    } else {
        (alpha, beta, rss)
    };
    if b < 1e-3 || p0 >= hi * 0.999 {
        degenerate = true;
        b = b.max(0.0);
    }
    let a = alpha.exp();
    // Linearized covariance in (ln a, b, p0).
    let jac: Vec<[f64; 3]> = points
        .iter()
        .map(|&(x, _)| [1.0, (x + p0).max(1e-300).ln(), b / (x + p0).max(1e-300)])
        .collect();
    Ok(FitResult {
        model: FitModel::OffsetPowerLaw { a, b, p0 },
        covariance: covariance3(&jac, rss, points.len()),
        r_squared: log_space_r2(points, rss),
        residual_norm: rss.sqrt(),
        degenerate,
        converged,
    })
}

/// Fit `eps(n) = a exp(-b exp(-c n))` by least squares on `ln eps`.
pub fn fit_gompertz(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points, 5, true)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let decreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1)
        && sorted.last().unwrap().1 < sorted.first().unwrap().1;
    if decreasing {
        return Err(Error::InvalidParam(
            "monotone-decreasing data is inconsistent with a growing saturation model".into(),
        ));
    }
    let max_y = points.iter().map(|p| p.1).fold(0.0f64, f64::max);
    // For fixed c: ln eps = ln a - b x with x = exp(-c n); enforce
    // a in [max eps, 1] by clamped re-solve.
    let solve = |c: f64| -> (f64, f64, f64) {
        let xy: Vec<(f64, f64)> = points.iter().map(|&(n, y)| ((-c * n).exp(), y.ln())).collect();
        let (alpha, beta, rss) = ols(&xy);
        let mut ln_a = alpha;
        let mut b = -beta;
        let lo = max_y.ln();
        let hi = 0.0;
        if ln_a < lo || ln_a > hi || b < 0.0 {
            ln_a = ln_a.clamp(lo, hi);
            // Re-solve b alone with the intercept pinned.
            let num: f64 = xy.iter().map(|&(x, y)| (ln_a - y) * x).sum();
            let den: f64 = xy.iter().map(|&(x, _)| x * x).sum();
            b = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
            let rss = xy.iter().map(|&(x, y)| (ln_a - b * x - y).powi(2)).sum();
            return (ln_a, b, rss);
        }
        (ln_a, b, rss)
    };
    let grid: Vec<f64> = (0..24)
        .map(|i| 0.01 * (200.0f64).powf(i as f64 / 23.0))
        .collect();
    let mut best = grid[0];
    let mut best_rss = f64::INFINITY;
    for &c in &grid {
        let (_, _, rss) = solve(c);
        if rss < best_rss {
            best_rss = rss;
            best = c;
        }
    }
    let objective = |c: f64| solve(c).2;
    let (c, converged) = golden_min(best / 3.0, best * 3.0, &objective);
    let c = if objective(c) <= best_rss { c } else { best };
    let (ln_a, b, rss) = solve(c);
    let a = ln_a.exp();
    let degenerate = c >= grid.last().unwrap() * 2.9 || b < 1e-6;
    let jac: Vec<[f64; 3]> = points
        .iter()
        .map(|&(n, _)| {
            let x = (-c * n).exp();
            [1.0, -x, b * n * x]
        })
        .collect();
    Ok(FitResult {
        model: FitModel::Gompertz { a, b, c },
        covariance: covariance3(&jac, rss, points.len()),
        r_squared: log_space_r2(points, rss),
        residual_norm: rss.sqrt(),
        degenerate,
        converged,
    })
}

/// Ordinary least-squares line fit.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<FitResult> {
    check_points(points, 2, false)?;
    let (intercept, slope, rss) = ols(points);
    let n = points.len() as f64;
    let mean: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let tss: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let denom = n * sxx - sx * sx;
    let sigma2 = rss / (n - 2.0).max(1.0);
    let cov = if denom.abs() > 1e-30 {
        vec![
            vec![sigma2 * n / denom, -sigma2 * sx / denom],
            vec![-sigma2 * sx / denom, sigma2 * sxx / denom],
        ]
    } else {
        vec![vec![f64::NAN; 2]; 2]
    };
    Ok(FitResult {
        model: FitModel::Linear { slope, intercept },
        covariance: cov,
        r_squared: r2,
        residual_norm: rss.sqrt(),
        degenerate: denom.abs() <= 1e-30,
        converged: true,
    })
}

/// Log-linear exponential-decay fit `y = amplitude exp(-t / tau)` over the
/// positive samples.
pub fn fit_exp_decay(points: &[(f64, f64)]) -> Result<FitResult> {
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, y)| y > 0.0).collect();
    check_points(&positive, 3, true)?;
    let xy: Vec<(f64, f64)> = positive.iter().map(|&(t, y)| (t, y.ln())).collect();
    let (alpha, beta, rss) = ols(&xy);
    if beta >= 0.0 {
        return Err(Error::NonConvergence("data is not decaying".into()));
    }
    Ok(FitResult {
        model: FitModel::ExpDecay { amplitude: alpha.exp(), tau: -1.0 / beta },
        covariance: vec![],
        r_squared: log_space_r2(&positive, rss),
        residual_norm: rss.sqrt(),
        degenerate: false,
        converged: true,
    })
}
