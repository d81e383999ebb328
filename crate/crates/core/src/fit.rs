//! Least-squares slope estimation on log-log data, used to measure the
//! empirical order of small quantities against the damping rate.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Values at or below this magnitude are treated as exact zeros when fitting;
/// they sit at the rounding floor of the double-precision pipelines.
pub const EXACT_ZERO_FLOOR: f64 = 1e-14;

/// Minimum number of grid points for a meaningful order fit.
pub const MIN_FIT_POINTS: usize = 5;

/// Required span of the abscissa in decades.
pub const MIN_FIT_DECADES: f64 = 1.5;

/// Outcome of a log-log order fit.
#[derive(Debug, Clone, PartialEq)]
pub enum SlopeFit {
    /// Every ordinate was zero to machine precision; no finite slope exists.
    Exact,
    Fitted {
        slope: f64,
        intercept: f64,
        /// Root-mean-square residual of log10 ordinates around the fit line.
        rms_residual: f64,
    },
}

impl SlopeFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            SlopeFit::Exact => None,
            SlopeFit::Fitted { slope, .. } => Some(*slope),
        }
    }
}

/// Validates an abscissa grid: strictly increasing, strictly positive,
/// at least [`MIN_FIT_POINTS`] points spanning [`MIN_FIT_DECADES`] decades.
pub fn validate_grid(xs: &[f64]) -> Result<()> {
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientGrid {
            points: xs.len(),
            required: MIN_FIT_POINTS,
        });
    }
    for window in xs.windows(2) {
        if !(window[0] < window[1]) {
            return Err(Error::GridNotIncreasing);
        }
    }
    if xs[0] <= 0.0 {
        return Err(Error::GridNotIncreasing);
    }
    let decades = (xs[xs.len() - 1] / xs[0]).log10();
    if decades < MIN_FIT_DECADES {
        return Err(Error::GridTooNarrow {
            decades,
            required: MIN_FIT_DECADES,
        });
    }
    Ok(())
}

/// Fits `log10(y) = slope * log10(x) + intercept` by least squares.
///
/// The grid must satisfy [`validate_grid`]. If every `y` is below the exact
/// floor the fit reports [`SlopeFit::Exact`]. Individual zero ordinates in an
/// otherwise nonzero series are rejected, since they would make the logarithm
/// meaningless.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    validate_grid(xs)?;
    assert_eq!(xs.len(), ys.len());
    if ys.iter().all(|&y| y.abs() <= EXACT_ZERO_FLOOR) {
        return Ok(SlopeFit::Exact);
    }
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::NonPositiveOrdinate);
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for i in 0..xs.len() {
        let r = ly[i] - (slope * lx[i] + intercept);
        ss += r * r;
    }
    let rms_residual = (ss / n).sqrt();
    Ok(SlopeFit::Fitted {
        slope,
        intercept,
        rms_residual,
    })
}

/// Geometrically spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (step * i as f64).exp()).collect()
}
