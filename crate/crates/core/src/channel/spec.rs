use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{self, CMatrix};
use crate::snr::Snr;

/// The six channel classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    FixedH,
    CoherentMIMO,
    BlockFading,
    FastFading,
    Multipath,
    FracLog,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::FixedH,
        ChannelKind::CoherentMIMO,
        ChannelKind::BlockFading,
        ChannelKind::FastFading,
        ChannelKind::Multipath,
        ChannelKind::FracLog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::FixedH => "FixedH",
            ChannelKind::CoherentMIMO => "CoherentMIMO",
            ChannelKind::BlockFading => "BlockFading",
            ChannelKind::FastFading => "FastFading",
            ChannelKind::Multipath => "Multipath",
            ChannelKind::FracLog => "FracLog",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown channel kind '{s}'")))
    }
}

fn one() -> usize {
    1
}

/// Description of one channel instance. JSON field names follow the
/// configuration schema: `kind, M, N, T, rho, H_re, H_im, beta, c_beta, taps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(rename = "M", default = "one")]
    pub m: usize,
    #[serde(rename = "N", default = "one")]
    pub n: usize,
    #[serde(rename = "T", default = "one")]
    pub t: usize,
    pub rho: f64,
    #[serde(rename = "H_re", default, skip_serializing_if = "Option::is_none")]
    pub h_re: Option<Vec<Vec<f64>>>,
    #[serde(rename = "H_im", default, skip_serializing_if = "Option::is_none")]
    pub h_im: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<f64>>,
}

/// Transmit power used by FracLog inputs; the schema carries no power field.
pub(crate) const FRACLOG_POWER: f64 = 1.0;

impl ChannelSpec {
    fn bare(kind: ChannelKind, m: usize, n: usize, t: usize, rho: f64) -> Self {
        Self { kind, m, n, t, rho, h_re: None, h_im: None, beta: None, c_beta: None, taps: None }
    }

    pub fn fast_fading(n: usize, rho: f64) -> Result<Self> {
        Self::bare(ChannelKind::FastFading, 1, n, 1, rho).validated()
    }

    pub fn multipath(taps: Vec<f64>, n: usize, rho: f64) -> Result<Self> {
        Self { taps: Some(taps), ..Self::bare(ChannelKind::Multipath, 1, n, 1, rho) }.validated()
    }

    pub fn fixed_h(h: &CMatrix, t: usize, rho: f64) -> Result<Self> {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..h.nrows()).map(|r| (0..h.ncols()).map(|c| f(&h[(r, c)])).collect()).collect()
        };
        Self {
            h_re: Some(rows(|z| z.re)),
            h_im: Some(rows(|z| z.im)),
            ..Self::bare(ChannelKind::FixedH, h.ncols(), h.nrows(), t, rho)
        }
        .validated()
    }

    pub fn coherent_mimo(m: usize, n: usize, t: usize, rho: f64) -> Result<Self> {
        Self::bare(ChannelKind::CoherentMIMO, m, n, t, rho).validated()
    }

    pub fn block_fading(m: usize, n: usize, t: usize, rho: f64) -> Result<Self> {
        Self::bare(ChannelKind::BlockFading, m, n, t, rho).validated()
    }

    pub fn frac_log(beta: f64, c_beta: f64, n: usize, t: usize, rho: f64) -> Result<Self> {
        Self { beta: Some(beta), c_beta: Some(c_beta), ..Self::bare(ChannelKind::FracLog, 1, n, t, rho) }
            .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Check the invariants for this kind. Returns warnings for admissible but
    /// degenerate settings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.m == 0 || self.n == 0 || self.t == 0 {
            return Err(invalid("M, N and T must all be at least 1"));
        }
        Snr::from_linear(self.rho)?;
        match self.kind {
            ChannelKind::FastFading | ChannelKind::Multipath => {
                if self.m != 1 || self.t != 1 {
                    return Err(invalid(format!("{} uses M = 1 and T = 1", self.kind)));
                }
                if self.kind == ChannelKind::Multipath {
                    super::tap_power(self.taps.as_deref().ok_or_else(|| invalid("Multipath needs taps"))?)?;
                }
            }
            ChannelKind::FixedH => {
                self.h_matrix()?;
            }
            ChannelKind::CoherentMIMO => {
                if self.t < self.m {
                    return Err(invalid("CoherentMIMO needs T >= M"));
                }
            }
            ChannelKind::BlockFading => {
                if self.t < self.m {
                    return Err(invalid("BlockFading needs T >= M"));
                }
                if self.t < 2 * self.m {
                    warnings.push(format!(
                        "BlockFading with T = {} < 2M = {}: orthogonal-subspace constructions are unavailable",
                        self.t,
                        2 * self.m
                    ));
                }
            }
            ChannelKind::FracLog => {
                let beta = self.beta.ok_or_else(|| invalid("FracLog needs beta"))?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(invalid(format!("beta must lie in (0,1), got {beta}")));
                }
                let c = self.c_beta.ok_or_else(|| invalid("FracLog needs c_beta"))?;
                if !(c > 0.0) || !c.is_finite() {
                    return Err(invalid(format!("c_beta must be positive, got {c}")));
                }
                if self.m != 1 {
                    return Err(invalid("FracLog uses a single transmit antenna (M = 1)"));
                }
                if self.t < 8 {
                    return Err(invalid("FracLog needs block length T >= 8"));
                }
            }
        }
        Ok(warnings)
    }

    pub fn snr(&self) -> Result<Snr> {
        Snr::from_linear(self.rho)
    }

    /// SNR the laws actually see: `ρ Σ σ_ℓ²` for multipath, `ρ` otherwise.
    pub fn effective_snr(&self) -> Result<Snr> {
        let snr = self.snr()?;
        match (self.kind, self.taps.as_deref()) {
            (ChannelKind::Multipath, Some(taps)) => snr.scaled(super::tap_power(taps)?),
            _ => Ok(snr),
        }
    }

    /// The fixed channel matrix (`N × M`).
    pub fn h_matrix(&self) -> Result<CMatrix> {
        let re = self.h_re.as_ref().ok_or_else(|| invalid("FixedH needs H_re"))?;
        if re.len() != self.n || re.iter().any(|r| r.len() != self.m) {
            return Err(invalid(format!("H_re must be N x M = {} x {}", self.n, self.m)));
        }
        let im = match &self.h_im {
            Some(im) => {
                if im.len() != self.n || im.iter().any(|r| r.len() != self.m) {
                    return Err(invalid(format!("H_im must be N x M = {} x {}", self.n, self.m)));
                }
                im.clone()
            }
            None => vec![vec![0.0; self.m]; self.n],
        };
        let h = CMatrix::from_fn(self.n, self.m, |r, c| Complex64::new(re[r][c], im[r][c]));
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("H has non-finite entries"));
        }
        if linalg::numerical_rank(&h) == 0 {
            return Err(invalid("H must be nonzero"));
        }
        Ok(h)
    }

    pub fn power_constraint(&self) -> PowerConstraint {
        match self.kind {
            ChannelKind::FastFading | ChannelKind::Multipath => PowerConstraint::Peak,
            ChannelKind::FracLog => PowerConstraint::Energy(self.t as f64 * FRACLOG_POWER),
            _ => PowerConstraint::Energy(self.t as f64),
        }
    }
}

/// Input power constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerConstraint {
    /// `|x| ≤ 1`.
    Peak,
    /// `‖X‖_F² ≤ E`.
    Energy(f64),
}

/// One channel input: a scalar (fast fading) or an `M × T` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "InputRepr", into = "InputRepr")]
pub enum InputPoint {
    Scalar(Complex64),
    Matrix(CMatrix),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum InputRepr {
    Scalar { re: f64, im: f64 },
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl From<InputPoint> for InputRepr {
    fn from(p: InputPoint) -> Self {
        match p {
            InputPoint::Scalar(z) => InputRepr::Scalar { re: z.re, im: z.im },
            InputPoint::Matrix(m) => {
                let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
                    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect()
                };
                InputRepr::Matrix { re: rows(|z| z.re), im: rows(|z| z.im) }
            }
        }
    }
}

impl From<InputRepr> for InputPoint {
    fn from(r: InputRepr) -> Self {
        match r {
            InputRepr::Scalar { re, im } => InputPoint::Scalar(Complex64::new(re, im)),
            InputRepr::Matrix { re, im } => {
                let rows = re.len();
                let cols = re.first().map_or(0, Vec::len);
                InputPoint::Matrix(CMatrix::from_fn(rows, cols, |r, c| {
                    let i = im.get(r).and_then(|row| row.get(c)).copied().unwrap_or(0.0);
                    Complex64::new(re[r].get(c).copied().unwrap_or(f64::NAN), i)
                }))
            }
        }
    }
}

impl InputPoint {
    pub fn energy(&self) -> f64 {
        match self {
            InputPoint::Scalar(z) => z.norm_sqr(),
            InputPoint::Matrix(m) => linalg::frobenius_sq(m),
        }
    }

    /// Check the constraint with relative slack `1e-12`.
    pub fn check_power(&self, constraint: PowerConstraint) -> Result<()> {
        let e = self.energy();
        if e.is_nan() {
            return Err(invalid("input point has non-finite entries"));
        }
        let limit = match constraint {
            PowerConstraint::Peak => match self {
                InputPoint::Scalar(_) => 1.0,
                InputPoint::Matrix(m) => {
                    let peak = m.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
                    return if peak <= 1.0 + 1e-12 {
                        Ok(())
                    } else {
                        Err(invalid(format!("peak power violated: {peak} > 1")))
                    };
                }
            },
            PowerConstraint::Energy(cap) => cap,
        };
        if e <= limit * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(invalid(format!("power constraint violated: {e} > {limit}")))
        }
    }

    pub fn as_scalar(&self) -> Result<Complex64> {
        match self {
            InputPoint::Scalar(z) => Ok(*z),
            InputPoint::Matrix(m) if m.len() == 1 => Ok(m[(0, 0)]),
            InputPoint::Matrix(_) => Err(invalid("expected a scalar input")),
        }
    }

    pub fn as_matrix(&self) -> CMatrix {
        match self {
            InputPoint::Scalar(z) => CMatrix::from_element(1, 1, *z),
            InputPoint::Matrix(m) => m.clone(),
        }
    }
}
