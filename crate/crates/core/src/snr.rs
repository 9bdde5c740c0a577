use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Signal-to-noise ratio stored as `log2 ρ`.
///
/// Keeping the exponent rather than ρ itself lets sweeps run to `10^300` and
/// beyond while `ln(1+ρ)` stays accurate at both ends.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Snr {
    log2: f64,
}

impl Snr {
    pub fn from_linear(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(invalid(format!("rho must be positive and finite, got {rho}")));
        }
        Ok(Self { log2: rho.log2() })
    }

    pub fn from_log2(log2: f64) -> Self {
        assert!(log2.is_finite(), "log2 rho must be finite");
        Self { log2 }
    }

    /// `ρ = 10^decades`.
    pub fn from_decades(decades: f64) -> Self {
        Self::from_log2(decades * std::f64::consts::LOG2_10)
    }

    pub fn log2(self) -> f64 {
        self.log2
    }

    pub fn ln(self) -> f64 {
        self.log2 * std::f64::consts::LN_2
    }

    pub fn decades(self) -> f64 {
        self.log2 / std::f64::consts::LOG2_10
    }

    /// Linear value; overflows to infinity above roughly `10^308`.
    pub fn linear(self) -> f64 {
        self.log2.exp2()
    }

    /// `L = ln(1+ρ)`, the admissible log-variance range.
    pub fn log_variance_range(self) -> f64 {
        ln_one_plus_exp(self.ln())
    }

    /// Multiply ρ by a positive factor.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(invalid(format!("SNR scale factor must be positive, got {factor}")));
        }
        Ok(Self::from_log2(self.log2 + factor.log2()))
    }
}

/// `ln(1 + e^t)` without overflow or cancellation.
pub(crate) fn ln_one_plus_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// A list of SNR points, increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoGrid {
    points: Vec<Snr>,
}

impl RhoGrid {
    pub fn new(points: Vec<Snr>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("rho grid is empty"));
        }
        if points.windows(2).any(|w| !(w[1].log2 > w[0].log2)) {
            return Err(invalid("rho grid must be strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `points` values of ρ with decade exponents evenly spaced in `[start, stop]`.
    pub fn decades(start: f64, stop: f64, points: usize) -> Result<Self> {
        Self::new(spaced(start, stop, points, false)?.into_iter().map(Snr::from_decades).collect())
    }

    /// Decade exponents geometrically spaced in `[start, stop]`, so that
    /// `log log ρ` is evenly spaced. Needed to resolve loglog growth.
    pub fn geometric_decades(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start > 0.0) {
            return Err(invalid("geometric decade grids need a positive start exponent"));
        }
        Self::new(spaced(start, stop, points, true)?.into_iter().map(Snr::from_decades).collect())
    }

    /// Parse `start:stop:points` (decades, linear spacing) or
    /// `start:stop:points:geom` (geometric spacing of the exponents).
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(invalid(format!("rho grid '{text}' is not start:stop:points[:geom]")));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| invalid(format!("bad number '{s}' in rho grid")))
        };
        let start = num(parts[0])?;
        let stop = num(parts[1])?;
        let points: usize =
            parts[2].trim().parse().map_err(|_| invalid(format!("bad point count '{}'", parts[2])))?;
        match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") => Self::decades(start, stop, points),
            Some("geom") => Self::geometric_decades(start, stop, points),
            Some(other) => Err(invalid(format!("unknown grid spacing '{other}'"))),
        }
    }

    pub fn points(&self) -> &[Snr] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Width of the grid in decades.
    pub fn span_decades(&self) -> f64 {
        self.points.last().unwrap().decades() - self.points[0].decades()
    }
}

fn spaced(start: f64, stop: f64, points: usize, geometric: bool) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(invalid(format!("rho grid needs finite start <= stop, got {start}..{stop}")));
    }
    if points == 0 || (points == 1 && stop != start) {
        return Err(invalid("rho grid needs at least two points to span a range"));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                stop
            } else if geometric {
                start * (stop / start).powf(step(i))
            } else {
                start + (stop - start) * step(i)
            }
        })
        .collect())
}
