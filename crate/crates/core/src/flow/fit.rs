//! Tension coefficients from collapse measurements.

use serde::Serialize;

use super::evolve::TensionParams;
use crate::error::{Error, Result};

/// Shape whose collapse is being fitted; sets `dR^2/dt = -k g1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseGeometry {
    /// Circle in R^3: `R^2 = R0^2 - 2 g1 t`.
    Ring,
    /// 2-sphere in R^4: `R^2 = R0^2 - 4 g1 t`.
    Sphere,
}

impl CollapseGeometry {
    pub fn rate_factor(self) -> f64 {
        match self {
            CollapseGeometry::Ring => 2.0,
            CollapseGeometry::Sphere => 4.0,
        }
    }
}

pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensionFit {
    pub params: TensionParams,
    /// Slope and intercept of `R^2` against `t`.
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub gamma1_stderr: f64,
    pub gamma2_stderr: Option<f64>,
    /// Standard deviation of the `R^2` fit residuals.
    pub residual_std: f64,
    pub samples: usize,
}

impl TensionFit {
    /// Fitted radius at time `t`.
    pub fn radius_at(&self, t: f64) -> f64 {
        (self.intercept + self.slope * t).max(0.0).sqrt()
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    residual_std: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let dof = (n - 2.0).max(1.0);
    Line {
        slope,
        intercept,
        slope_stderr: (ssr / dof / sxx).sqrt(),
        residual_std: (ssr / dof).sqrt(),
    }
}

/// Fits `g1` from a radius series `(t, R)` and, when `drift` is given,
/// `g2` from the transverse centroid coordinate `(t, z)` sampled at the same
/// times. Positive `g2` corresponds to drift toward `+z`.
///
/// Since `dR/dt = -k g1 / (2R)` and `dz/dt = k g2 / (2R)` for both
/// geometries, `g2 = -g1 dz/dR`, i.e. drift speed times `R` for a ring.
pub fn fit_tension(
    radius: &[(f64, f64)],
    geometry: CollapseGeometry,
    drift: Option<&[(f64, f64)]>,
) -> Result<TensionFit> {
    if radius.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSampling {
            have: radius.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    if radius.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
        return Err(Error::FitRejected("non-finite sample".into()));
    }
    let t: Vec<f64> = radius.iter().map(|s| s.0).collect();
    let r2: Vec<f64> = radius.iter().map(|s| s.1 * s.1).collect();
    let line = least_squares(&t, &r2);
    if !(line.slope < 0.0) {
        return Err(Error::FitRejected(format!(
            "R^2 is not decreasing (slope {:.4e})",
            line.slope
        )));
    }
    let tol = 3.0 * line.residual_std;
    let mut low = r2[0];
    for (k, &v) in r2.iter().enumerate().skip(1) {
        if v > low + tol {
            return Err(Error::FitRejected(format!(
                "R^2 rises at sample {k} (t = {}): {v:.4} above running minimum {low:.4}",
                t[k]
            )));
        }
        low = low.min(v);
    }
    let k = geometry.rate_factor();
    let gamma1 = -line.slope / k;
    let gamma1_stderr = line.slope_stderr / k;
    let (gamma2, gamma2_stderr) = match drift {
        None => (0.0, None),
        Some(d) => {
            if d.len() != radius.len() || d.iter().zip(radius).any(|(a, b)| a.0 != b.0) {
                return Err(Error::Contract(
                    "drift series must be sampled at the radius series times".into(),
                ));
            }
            let r: Vec<f64> = radius.iter().map(|s| s.1).collect();
            let z: Vec<f64> = d.iter().map(|s| s.1).collect();
            let fit = least_squares(&r, &z);
            let g2 = -gamma1 * fit.slope;
            let err = (gamma1 * fit.slope_stderr).hypot(fit.slope * gamma1_stderr);
            (g2, Some(err))
        }
    };
    Ok(TensionFit {
        params: TensionParams { gamma1, gamma2 },
        slope: line.slope,
        intercept: line.intercept,
        slope_stderr: line.slope_stderr,
        gamma1_stderr,
        gamma2_stderr,
        residual_std: line.residual_std,
        samples: radius.len(),
    })
}
