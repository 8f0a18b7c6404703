//! The classical model: functions on the unit circle sampled on a dyadic
//! grid `t_j = 2 pi j / N`, with `tau` the mean over the grid and `Phi` the
//! zeroth Fourier coefficient.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::matfun::least_squares_residual_sqr;
use crate::matrix::{ComplexMatrix, C64, ZERO};

/// Imaginary parts above this (relative to the largest sample) make an input
/// non-real.
const REAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircleError {
    #[error("sample count {len} is not a power of two >= 4")]
    BadLength { len: usize },
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("sample {index} is zero")]
    ZeroSample { index: usize },
    #[error("sample {index} is not real")]
    NotReal { index: usize },
    #[error("sample {index} is negative")]
    NegativeSample { index: usize },
    #[error("degree {degree} needs more than {len} samples")]
    DegreeTooLarge { degree: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    samples: Vec<C64>,
}

impl CircleFunction {
    pub fn new(samples: Vec<C64>) -> Result<Self, CircleError> {
        let len = samples.len();
        if len < 4 || !len.is_power_of_two() {
            return Err(CircleError::BadLength { len });
        }
        if let Some(index) = samples.iter().position(|z| !z.is_finite()) {
            return Err(CircleError::NonFinite { index });
        }
        Ok(Self { samples })
    }

    pub fn from_real(samples: &[f64]) -> Result<Self, CircleError> {
        Self::new(samples.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Samples `f(t_j)` for `j = 0..n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<Self, CircleError> {
        Self::new((0..n).map(|j| f(grid_point(j, n))).collect())
    }

    /// Trigonometric polynomial `sum_k c_k e^{ikt}`, indices `k >= 0`.
    pub fn from_coefficients(n: usize, coefficients: &[C64]) -> Result<Self, CircleError> {
        let mut c = alloc::vec![ZERO; n];
        for (k, &ck) in coefficients.iter().enumerate() {
            c[k % n] += ck;
        }
        fft_in_place(&mut c, true);
        Self::new(c)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// `c_k = (1/N) sum_j f(t_j) e^{-ikt_j}`, index `k` modulo `N`.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut c = self.samples.clone();
        fft_in_place(&mut c, false);
        let inv = 1.0 / c.len() as f64;
        c.iter_mut().for_each(|z| *z *= inv);
        c
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    fn real_parts(&self) -> Result<Vec<f64>, CircleError> {
        let scale = self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (index, z) in self.samples.iter().enumerate() {
            if z.im.abs() > REAL_TOL * (1.0 + scale) {
                return Err(CircleError::NotReal { index });
            }
        }
        Ok(self.samples.iter().map(|z| z.re).collect())
    }
}

pub fn grid_point(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Radix-2 decimation-in-time transform, `sum_j x_j e^{-+2 pi i jk/N}`
/// (the plus sign when `inverse`), unnormalized.
pub fn fft_in_place(x: &mut [C64], inverse: bool) {
    let n = x.len();
    assert!(n.is_power_of_two(), "transform length must be a power of two");
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            x.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = sign * 2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // twiddles from the angle directly, no recurrence drift
                let w = C64::from_polar(1.0, step * k as f64);
                let a = x[start + k];
                let b = x[start + k + half] * w;
                x[start + k] = a + b;
                x[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `exp((1/N) sum_j log |f(t_j)|)`; any exactly zero sample gives `0`.
pub fn circle_delta(f: &CircleFunction) -> f64 {
    let mut s = 0.0;
    for z in f.samples() {
        let m = z.norm();
        if m == 0.0 {
            return 0.0;
        }
        s += m.ln();
    }
    (s / f.len() as f64).exp()
}

/// Conjugate function: multiplier `-i sign(k)` on the Fourier coefficients,
/// with `k = 0` and the Nyquist index sent to zero.
pub fn conjugate_fn(u: &CircleFunction) -> Result<CircleFunction, CircleError> {
    let re = u.real_parts()?;
    let n = re.len();
    let mut c: Vec<C64> = re.iter().map(|&x| C64::new(x, 0.0)).collect();
    fft_in_place(&mut c, false);
    let minus_i = C64::new(0.0, -1.0);
    for (k, z) in c.iter_mut().enumerate() {
        *z = if k == 0 || k == n / 2 {
            ZERO
        } else if k < n / 2 {
            *z * minus_i
        } else {
            -*z * minus_i
        };
    }
    fft_in_place(&mut c, true);
    let inv = 1.0 / n as f64;
    CircleFunction::new(c.iter().map(|z| C64::new(z.re * inv, 0.0)).collect())
}

/// Outer function with modulus `|f|`: `h = exp(log|f| + i conj(log|f|))`.
pub fn outer_part(f: &CircleFunction) -> Result<CircleFunction, CircleError> {
    let mut logs = Vec::with_capacity(f.len());
    for (index, z) in f.samples().iter().enumerate() {
        let m = z.norm();
        if m == 0.0 {
            return Err(CircleError::ZeroSample { index });
        }
        logs.push(m.ln());
    }
    let u = CircleFunction::from_real(&logs)?;
    let v = conjugate_fn(&u)?;
    CircleFunction::new(
        logs.iter()
            .zip(v.samples())
            .map(|(&a, b)| C64::from_polar(a.exp(), b.re))
            .collect(),
    )
}

/// `min (1/N) sum_j f(t_j) |1 - sum_{k=1}^{degree} alpha_k e^{ikt_j}|^2` over
/// complex `alpha`, by least squares on the weighted Vandermonde system.
pub fn circle_szego_inf(f: &CircleFunction, degree: usize) -> Result<f64, CircleError> {
    let w = f.real_parts()?;
    if let Some(index) = w.iter().position(|&x| x < 0.0) {
        return Err(CircleError::NegativeSample { index });
    }
    let n = w.len();
    if degree >= n {
        return Err(CircleError::DegreeTooLarge { degree, len: n });
    }
    let root: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let rhs: Vec<C64> = root.iter().map(|&r| C64::new(r, 0.0)).collect();
    if degree == 0 {
        return Ok(w.iter().sum::<f64>() / n as f64);
    }
    let a = ComplexMatrix::from_fn(n, degree, |j, k| {
        C64::from_polar(root[j], (k + 1) as f64 * grid_point(j, n))
    });
    Ok(least_squares_residual_sqr(&a, &rhs) / n as f64)
}
