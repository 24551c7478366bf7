//! Unnormalized cosine transforms of power-of-two length built on a complex FFT
//! (Makhoul's even/odd reordering), plus the periodic cosine/sine sums used by
//! the spectral baseline.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct CosineTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-i pi k / (2n))`
    twiddle: Vec<Complex<f64>>,
}

impl CosineTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::UnsupportedGridSize(n));
        }
        let mut planner = FftPlanner::new();
        let twiddle = (0..n).map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2.0 * n as f64))).collect();
        Ok(CosineTransform { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), twiddle })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// DCT-II in place: `X_k = sum_n x_n cos(pi k (n + 1/2) / N)`.
    pub fn dct2(&self, x: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = self.n;
        buf.clear();
        buf.resize(n, Complex::new(0.0, 0.0));
        for i in 0..n / 2 {
            buf[i].re = x[2 * i];
            buf[n - 1 - i].re = x[2 * i + 1];
        }
        self.forward.process(buf);
        for k in 0..n {
            x[k] = (buf[k] * self.twiddle[k]).re;
        }
    }

    /// DCT-III in place: `y_n = sum_k c_k cos(pi k (n + 1/2) / N)`.
    pub fn dct3(&self, c: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = self.n;
        buf.clear();
        buf.extend((0..n).map(|k| c[k] * self.twiddle[k].conj()));
        self.inverse.process(buf);
        for i in 0..n / 2 {
            c[2 * i] = buf[i].re;
            c[2 * i + 1] = buf[n - 1 - i].re;
        }
    }

    /// Sine synthesis in place: `y_n = sum_{k=1}^{N-1} b_k sin(pi k (n + 1/2) / N)`.
    /// `b_0` is ignored.
    ///
    /// Uses `sin(pi k (n + 1/2) / N) = (-1)^n cos(pi (N - k) (n + 1/2) / N)`.
    pub fn sine3(&self, b: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = self.n;
        // c_v = b_{N-v}, c_0 = 0
        b[0] = 0.0;
        b[1..].reverse();
        self.dct3(b, buf);
        for (i, v) in b.iter_mut().enumerate() {
            if i % 2 == 1 {
                *v = -*v;
            }
        }
        debug_assert_eq!(b.len(), n);
    }
}

/// Periodic sums for the spectral baseline: `sum_k x_k cos(2 pi k n / N)` and
/// `sum_k x_k sin(2 pi k n / N)`.
pub struct PeriodicTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
}

impl PeriodicTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::UnsupportedGridSize(n));
        }
        Ok(PeriodicTransform { n, forward: FftPlanner::new().plan_fft_forward(n) })
    }

    pub fn cos(&self, x: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        self.run(x, buf);
        for (v, z) in x.iter_mut().zip(buf.iter()) {
            *v = z.re;
        }
    }

    pub fn sin(&self, x: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        self.run(x, buf);
        for (v, z) in x.iter_mut().zip(buf.iter()) {
            *v = -z.im;
        }
    }

    fn run(&self, x: &[f64], buf: &mut Vec<Complex<f64>>) {
        buf.clear();
        buf.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process(buf);
    }
}

/// Applies `f` to every row (fixed y index) of an `m x m` row-major grid, in
/// parallel. Each worker gets its own scratch buffer.
pub(crate) fn along_x<F>(data: &mut [f64], m: usize, f: F)
where
    F: Fn(&mut [f64], &mut Vec<Complex<f64>>) + Sync,
{
    data.par_chunks_exact_mut(m).for_each_init(Vec::new, |buf, row| f(row, buf));
}

/// Applies `f` to every column (fixed x index) of an `m x m` row-major grid.
pub(crate) fn along_y<F>(data: &mut [f64], m: usize, f: F)
where
    F: Fn(&mut [f64], &mut Vec<Complex<f64>>) + Sync,
{
    transpose(data, m);
    along_x(data, m, f);
    transpose(data, m);
}

pub(crate) fn transpose(data: &mut [f64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}
