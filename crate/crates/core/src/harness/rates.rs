use alloc::vec::Vec;

use super::HarnessError;
use crate::math;

/// Outcome of a log-log regression.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RateFit {
    Slope(f64),
    /// Every error is at or below the exactness floor.
    Exact,
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        match *self {
            RateFit::Slope(s) => Some(s),
            RateFit::Exact => None,
        }
    }

    /// Exact fits meet any rate requirement.
    pub fn at_least(&self, rate: f64) -> bool {
        match *self {
            RateFit::Slope(s) => s >= rate,
            RateFit::Exact => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rates {
    /// Least-squares slope of `log error` against `log scale` over all rows.
    pub fitted: RateFit,
    /// `log(e_{i}/e_{i−1}) / log(s_{i}/s_{i−1})`; `None` for the first row
    /// and wherever an error is at or below the floor.
    pub pairwise: Vec<Option<f64>>,
}

/// [`fit_rates_with_floor`] with a zero floor.
pub fn fit_rates(scale: &[f64], errors: &[f64]) -> Result<Rates, HarnessError> {
    fit_rates_with_floor(scale, errors, 0.0)
}

/// Slope of `log(error)` against `log(scale)` (mesh size or time step).
///
/// Needs at least two rows with distinct positive scales; three or more are
/// expected for a meaningful fit. Errors at or below `floor` count as exact;
/// if every error is, the fit is [`RateFit::Exact`].
pub fn fit_rates_with_floor(scale: &[f64], errors: &[f64], floor: f64) -> Result<Rates, HarnessError> {
    if scale.len() != errors.len() || scale.len() < 2 {
        return Err(HarnessError::DegenerateFit("need at least two rows of matching length"));
    }
    if scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(HarnessError::DegenerateFit("scales must be positive"));
    }
    if errors.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(HarnessError::DegenerateFit("errors must be finite and non-negative"));
    }
    let pairwise = (0..errors.len())
        .map(|i| {
            if i == 0 || errors[i] <= floor || errors[i - 1] <= floor {
                None
            } else {
                Some(math::ln(errors[i] / errors[i - 1]) / math::ln(scale[i] / scale[i - 1]))
            }
        })
        .collect();
    if errors.iter().all(|&e| e <= floor) {
        return Ok(Rates {
            fitted: RateFit::Exact,
            pairwise,
        });
    }
    if errors.iter().any(|&e| e <= floor) {
        return Err(HarnessError::DegenerateFit("some but not all errors vanish"));
    }
    let xs: Vec<f64> = scale.iter().map(|&s| math::ln(s)).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| math::ln(e)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::DegenerateFit("scales are all equal"));
    }
    Ok(Rates {
        fitted: RateFit::Slope(sxy / sxx),
        pairwise,
    })
}
