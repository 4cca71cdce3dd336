//! Periodic grids and two-dimensional FFTs.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::Complex64;

/// A square periodic grid on `[-L, L)^2` with `n` points per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_length: f64,
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Self {
        Grid { n, half_length }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Angular wavenumber of FFT index `i`; the Nyquist index maps to the negative end.
    pub fn wavenumber(&self, i: usize) -> f64 {
        let n = self.n as i64;
        let i = i as i64;
        let m = if i < n / 2 { i } else { i - n };
        m as f64 * std::f64::consts::PI / self.half_length
    }

    /// Signed mode index of FFT index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Samples `f(x, y)` row-major (row index is `y`).
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for j in 0..self.n {
            let y = self.coord(j);
            for i in 0..self.n {
                out.push(f(self.coord(i), y));
            }
        }
        out
    }
}

/// Planned forward and inverse 2D transforms for one grid size.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft2 { n, fwd, inv, scratch: vec![Complex64::new(0.0, 0.0); len], column: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalised forward transform.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let fft = self.fwd.clone();
        self.apply(data, fft.as_ref());
    }

    /// Inverse transform including the `1/N^2` normalisation.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let fft = self.inv.clone();
        self.apply(data, fft.as_ref());
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    fn apply(&mut self, data: &mut [Complex64], fft: &dyn Fft<f64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        fft.process_with_scratch(data, &mut self.scratch);
        for i in 0..n {
            for j in 0..n {
                self.column[j] = data[j * n + i];
            }
            fft.process_with_scratch(&mut self.column, &mut self.scratch);
            for j in 0..n {
                data[j * n + i] = self.column[j];
            }
        }
    }

    pub fn forward_real(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data);
        data
    }
}
