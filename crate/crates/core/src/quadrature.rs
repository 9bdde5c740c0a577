//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Global subdivision: the interval with the largest error estimate is split
//! until the summed estimate meets the tolerance or the interval budget runs
//! out. Infinite ranges are mapped onto finite ones by rational substitutions
//! whose Jacobians vanish fast enough for Gaussian-tailed integrands.

use std::cell::RefCell;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule: stop when error ≤ max(abs, rel·|value|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-12, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        k += w * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f(x) dx` on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Quadrature("finite integration limits required".into()));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (value, error) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let (mut total, mut total_err) = (value, error);
    let mut evaluations = 15;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(Estimate { value: total, error: total_err, evaluations });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "tolerance not reached within {} intervals (error estimate {total_err:e})",
                tol.max_intervals
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature("interval cannot be subdivided further".into()));
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        // Re-sum periodically so cancellation in the running totals cannot drift.
        if evaluations % 3000 == 15 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// `∫_a^∞ f(x) dx` with `x = a + scale·t/(1−t)`, `t ∈ [0, 1)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let g = |t: f64| {
        let u = 1.0 - t;
        let x = a + scale * t / u;
        let j = scale / (u * u);
        let y = f(x);
        if y == 0.0 {
            0.0
        } else {
            y * j
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// `∫_ℝ f(x) dx` with `x = center + scale·t/(1−t²)`, `t ∈ (−1, 1)`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let g = |t: f64| {
        let u = 1.0 - t * t;
        let x = center + scale * t / u;
        let j = scale * (1.0 + t * t) / (u * u);
        let y = f(x);
        if y == 0.0 {
            0.0
        } else {
            y * j
        }
    };
    integrate(g, -1.0, 1.0, tol)
}

/// `∬_ℝ² f(x, y) dx dy` as nested real-line integrals around `center`.
pub fn integrate_plane<F: Fn(f64, f64) -> f64>(
    f: F,
    center: (f64, f64),
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let inner_tol = Tolerance { abs: tol.abs * 0.1, rel: tol.rel * 0.1, ..tol };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = RefCell::new(0usize);
    let outer = |x: f64| match integrate_real_line(|y| f(x, y), center.1, scale, inner_tol) {
        Ok(e) => {
            *evals.borrow_mut() += e.evaluations;
            e.value
        }
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            0.0
        }
    };
    let est = integrate_real_line(outer, center.0, scale, tol)?;
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(Estimate { evaluations: evals.into_inner(), ..est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_and_singular_integrands() {
        let e = integrate(|x| x.sqrt(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-11);
        let e = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((e.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn infinite_ranges() {
        let tol = Tolerance::default();
        let e = integrate_real_line(|x| (-x * x).exp(), 0.0, 1.0, tol).unwrap();
        assert!((e.value - PI.sqrt()).abs() < 1e-11);
        let e = integrate_semi_infinite(|x| (-x).exp(), 0.0, 1.0, tol).unwrap();
        assert!((e.value - 1.0).abs() < 1e-11);
        let e = integrate_plane(|x, y| (-(x * x + y * y)).exp() / PI, (0.0, 0.0), 1.0, tol).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance { abs: 1e-15, rel: 0.0, max_intervals: 3 };
        assert!(matches!(
            integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, tol),
            Err(Error::Quadrature(_))
        ));
    }
}
