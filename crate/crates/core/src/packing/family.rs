//! Law families: the input alphabet of a channel together with its
//! pairwise Bhattacharyya distance.

use num_complex::Complex64;

use crate::channel::{self, InputPoint, PowerConstraint, ToeplitzSpectrum};
use crate::divergence::bhatt_log_variance;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::par;
use crate::snr::Snr;

/// An input alphabet with a symmetric pairwise distance in bits.
pub trait LawFamily: Sync {
    type Point: Clone + Send + Sync;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
    fn to_input(&self, p: &Self::Point) -> InputPoint;
    fn from_input(&self, p: &InputPoint) -> Result<Self::Point>;
    fn power(&self) -> PowerConstraint;
}

/// Fast-fading inputs, parameterized by log-variance `u ∈ [0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFamily {
    pub snr: Snr,
    pub receive: usize,
}

impl ScaleFamily {
    pub fn range(&self) -> f64 {
        self.snr.log_variance_range()
    }
}

impl LawFamily for ScaleFamily {
    type Point = f64;

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        self.receive as f64 * bhatt_log_variance(*a, *b).value()
    }

    fn to_input(&self, u: &f64) -> InputPoint {
        // |x|² = (e^u − 1)/ρ, evaluated in log domain.
        let u = u.clamp(0.0, self.range());
        if u == 0.0 {
            return InputPoint::Scalar(Complex64::new(0.0, 0.0));
        }
        let ln_expm1 = if u > 1.0 { u + (-(-u).exp()).ln_1p() } else { u.exp_m1().ln() };
        let energy = (ln_expm1 - self.snr.ln()).exp().min(1.0);
        InputPoint::Scalar(Complex64::new(energy.sqrt(), 0.0))
    }

    fn from_input(&self, p: &InputPoint) -> Result<f64> {
        let x = p.as_scalar()?;
        if x.norm_sqr() > 1.0 + 1e-12 {
            return Err(invalid("peak power violated"));
        }
        Ok(channel::log_variance(self.snr, x.norm_sqr().min(1.0)))
    }

    fn power(&self) -> PowerConstraint {
        PowerConstraint::Peak
    }
}

/// Coherent inputs with a known, fixed `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedHFamily {
    pub h: CMatrix,
    pub snr: Snr,
    pub t: usize,
}

impl LawFamily for FixedHFamily {
    type Point = CMatrix;

    fn distance(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        channel::fixed_h_bhatt(&self.h, &(a - b), self.snr).map(|d| d.value()).unwrap_or(f64::NAN)
    }

    fn to_input(&self, p: &CMatrix) -> InputPoint {
        InputPoint::Matrix(p.clone())
    }

    fn from_input(&self, p: &InputPoint) -> Result<CMatrix> {
        matrix_of_shape(p, self.h.ncols(), self.t)
    }

    fn power(&self) -> PowerConstraint {
        PowerConstraint::Energy(self.t as f64)
    }
}

/// Coherent inputs over i.i.d. Rayleigh `H`, scored by the averaged distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighFamily {
    pub m: usize,
    pub receive: usize,
    pub t: usize,
    pub snr: Snr,
}

impl RayleighFamily {
    /// Eigenvalues of `D D^†` (closed form up to `M = 2`).
    pub fn gram_eigenvalues(d: &CMatrix) -> Vec<f64> {
        match d.nrows() {
            1 => vec![linalg::frobenius_sq(d)],
            2 => {
                let (mut a, mut c, mut b) = (0.0, 0.0, Complex64::new(0.0, 0.0));
                for j in 0..d.ncols() {
                    let (x, y) = (d[(0, j)], d[(1, j)]);
                    a += x.norm_sqr();
                    c += y.norm_sqr();
                    b += x * y.conj();
                }
                let mid = 0.5 * (a + c);
                let rad = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
                // Smaller root via the product to avoid cancellation.
                let big = mid + rad;
                let det = (a * c - b.norm_sqr()).max(0.0);
                let small = if big > 0.0 { det / big } else { 0.0 };
                vec![small, big]
            }
            _ => linalg::hermitian_eigenvalues(&(d * d.adjoint())).into_iter().map(|l| l.max(0.0)).collect(),
        }
    }
}

impl LawFamily for RayleighFamily {
    type Point = CMatrix;

    fn distance(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        let eigs = Self::gram_eigenvalues(&(a - b));
        let nats: f64 = eigs.iter().map(|&l| channel_ln1p(self.snr, 0.25 * l)).sum();
        self.receive as f64 * nats / std::f64::consts::LN_2
    }

    fn to_input(&self, p: &CMatrix) -> InputPoint {
        InputPoint::Matrix(p.clone())
    }

    fn from_input(&self, p: &InputPoint) -> Result<CMatrix> {
        matrix_of_shape(p, self.m, self.t)
    }

    fn power(&self) -> PowerConstraint {
        PowerConstraint::Energy(self.t as f64)
    }
}

/// `ln(1 + ρ x)` in log domain.
fn channel_ln1p(snr: Snr, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        crate::snr::ln_one_plus_exp(snr.ln() + x.ln())
    }
}

/// Noncoherent block-fading inputs: orthonormal `T × M` bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassmannFamily {
    pub m: usize,
    pub receive: usize,
    pub t: usize,
    pub snr: Snr,
}

impl LawFamily for GrassmannFamily {
    type Point = CMatrix;

    fn distance(&self, a: &CMatrix, b: &CMatrix) -> f64 {
        let cross = a.adjoint() * b;
        let sin_sq = cross.svd(false, false).singular_values.iter().map(|&c| (1.0 - c * c).max(0.0)).collect::<Vec<_>>();
        self.receive as f64 * channel::block_sum_sin_sq(sin_sq.into_iter(), self.snr)
    }

    fn to_input(&self, p: &CMatrix) -> InputPoint {
        InputPoint::Matrix(p.adjoint())
    }

    fn from_input(&self, p: &InputPoint) -> Result<CMatrix> {
        linalg::row_space_basis(&matrix_of_shape(p, self.m, self.t)?)
    }

    fn power(&self) -> PowerConstraint {
        PowerConstraint::Energy(self.t as f64)
    }
}

/// A FracLog input sequence with its output covariance factored once.
#[derive(Debug, Clone)]
pub struct FracLogPoint {
    pub x: CVector,
    covariance: CMatrix,
    log_det: f64,
}

/// Fractional-log inputs `x ∈ ℂ^T`, output `CN(0, ρ diag(x) R_T diag(x)^† + I)`.
#[derive(Debug, Clone)]
pub struct FracLogFamily {
    r: CMatrix,
    pub snr: Snr,
    pub power: f64,
    pub receive: usize,
}

impl FracLogFamily {
    pub fn new(spectrum: &ToeplitzSpectrum, snr: Snr, power: f64, receive: usize) -> Self {
        Self { r: spectrum.matrix().map(Complex64::from), snr, power, receive }
    }

    pub fn block_length(&self) -> usize {
        self.r.nrows()
    }

    pub fn point(&self, x: CVector) -> Result<FracLogPoint> {
        let t = self.block_length();
        if x.len() != t {
            return Err(Error::Dimension(format!("input of length {} for block length {t}", x.len())));
        }
        let rho = self.snr.linear();
        let mut cov = CMatrix::from_fn(t, t, |i, j| x[i] * self.r[(i, j)] * x[j].conj() * rho);
        for i in 0..t {
            cov[(i, i)] += Complex64::new(1.0, 0.0);
        }
        let log_det = linalg::hermitian_log_det(&cov)?;
        Ok(FracLogPoint { x, covariance: cov, log_det })
    }
}

impl LawFamily for FracLogFamily {
    type Point = FracLogPoint;

    fn distance(&self, a: &FracLogPoint, b: &FracLogPoint) -> f64 {
        let avg = (&a.covariance + &b.covariance) * Complex64::from(0.5);
        match linalg::hermitian_log_det(&avg) {
            Ok(ld) => {
                let nats = ld - 0.5 * (a.log_det + b.log_det);
                self.receive as f64 * nats.max(0.0) / std::f64::consts::LN_2
            }
            Err(_) => f64::NAN,
        }
    }

    fn to_input(&self, p: &FracLogPoint) -> InputPoint {
        InputPoint::Matrix(CMatrix::from_row_slice(1, p.x.len(), p.x.as_slice()))
    }

    fn from_input(&self, p: &InputPoint) -> Result<FracLogPoint> {
        let m = matrix_of_shape(p, 1, self.block_length())?;
        self.point(m.row(0).transpose())
    }

    fn power(&self) -> PowerConstraint {
        PowerConstraint::Energy(self.block_length() as f64 * self.power)
    }
}

fn matrix_of_shape(p: &InputPoint, rows: usize, cols: usize) -> Result<CMatrix> {
    let m = p.as_matrix();
    if m.shape() != (rows, cols) {
        return Err(Error::Dimension(format!("expected a {rows}x{cols} input, got {:?}", m.shape())));
    }
    Ok(m)
}

/// Dense symmetric matrix of pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute<F: LawFamily>(family: &F, points: &[F::Point]) -> Self {
        let n = points.len();
        let rows = par::map_indexed(n, |i| {
            (i + 1..n).map(|j| family.distance(&points[i], &points[j])).collect::<Vec<_>>()
        });
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, d) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Minimum distance over pairs drawn from `indices`; `None` for fewer than two.
    pub fn min_over(&self, indices: &[usize]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (a, &i) in indices.iter().enumerate() {
            for &j in &indices[a + 1..] {
                let d = self.get(i, j);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }
}
