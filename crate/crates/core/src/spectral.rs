//! Axis-wise discrete Fourier operations on sector arrays.
//!
//! A sector array with `A` axes of `G` points each is transformed one axis at
//! a time; axis `a` has stride `G^(A-1-a)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Spectral {
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("points", &self.points).finish()
    }
}

impl Spectral {
    pub fn new(points: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..points)
            .map(|n| {
                let signed = if n <= points / 2 { n as f64 } else { n as f64 - points as f64 };
                2.0 * PI * signed / length
            })
            .collect();
        Self {
            points,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
            wavenumbers,
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Wavenumber used for first derivatives; the unpaired Nyquist mode of an
    /// even grid is dropped.
    fn derivative_wavenumber(&self, n: usize) -> f64 {
        if self.points % 2 == 0 && n == self.points / 2 {
            0.0
        } else {
            self.wavenumbers[n]
        }
    }

    fn for_each_line<F>(&self, data: &mut [Complex64], axes: usize, axis: usize, mut f: F)
    where
        F: FnMut(&mut [Complex64]),
    {
        let g = self.points;
        let stride = g.pow((axes - 1 - axis) as u32);
        let outer = data.len() / (g * stride);
        let mut line = vec![Complex64::default(); g];
        for o in 0..outer {
            let base = o * g * stride;
            for inner in 0..stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride + inner];
                }
                f(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride + inner] = *v;
                }
            }
        }
    }

    fn transform_all(&self, data: &mut [Complex64], axes: usize, fft: &Arc<dyn Fft<f64>>) {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for a in 0..axes {
            self.for_each_line(data, axes, a, |line| fft.process_with_scratch(line, &mut scratch));
        }
    }

    /// Spectral first derivative along one axis.
    pub fn derivative(&self, data: &[Complex64], axes: usize, axis: usize) -> Vec<Complex64> {
        let mut out = data.to_vec();
        let mut scratch =
            vec![Complex64::default(); self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())];
        let scale = 1.0 / self.points as f64;
        self.for_each_line(&mut out, axes, axis, |line| {
            self.forward.process_with_scratch(line, &mut scratch);
            for (n, c) in line.iter_mut().enumerate() {
                *c *= Complex64::new(0.0, self.derivative_wavenumber(n) * scale);
            }
            self.inverse.process_with_scratch(line, &mut scratch);
        });
        out
    }

    /// Applies the Fourier multiplier `sum_a coeff[a] * k_a^2`.
    pub fn quadratic_multiplier(&self, data: &[Complex64], coeffs: &[f64]) -> Vec<Complex64> {
        let axes = coeffs.len();
        let g = self.points;
        let mut out = data.to_vec();
        self.transform_all(&mut out, axes, &self.forward);
        let k2: Vec<f64> = self.wavenumbers.iter().map(|k| k * k).collect();
        let scale = 1.0 / (g as f64).powi(axes as i32);
        let mut idx = vec![0usize; axes];
        for z in out.iter_mut() {
            let mult: f64 = idx.iter().zip(coeffs).map(|(&n, c)| c * k2[n]).sum();
            *z *= mult * scale;
            // odometer, last axis fastest
            for a in (0..axes).rev() {
                idx[a] += 1;
                if idx[a] < g {
                    break;
                }
                idx[a] = 0;
            }
        }
        self.transform_all(&mut out, axes, &self.inverse);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_plane_wave() {
        let (g, l) = (16usize, 10.0);
        let sp = Spectral::new(g, l);
        let k = 2.0 * PI * 3.0 / l;
        let data: Vec<Complex64> = (0..g)
            .map(|i| Complex64::from_polar(1.0, k * i as f64 * l / g as f64))
            .collect();
        let d = sp.derivative(&data, 1, 0);
        for (x, dx) in data.iter().zip(&d) {
            let expect = Complex64::new(0.0, k) * x;
            assert!((dx - expect).norm() <= 1e-12 * expect.norm());
        }
    }

    #[test]
    fn derivative_along_second_axis_only() {
        let (g, l) = (8usize, 4.0);
        let sp = Spectral::new(g, l);
        let k = 2.0 * PI * 2.0 / l;
        let h = l / g as f64;
        let data: Vec<Complex64> = (0..g * g)
            .map(|f| {
                let (i, j) = (f / g, f % g);
                Complex64::new((i as f64).cos(), 0.0) * Complex64::from_polar(1.0, k * j as f64 * h)
            })
            .collect();
        let d = sp.derivative(&data, 2, 1);
        for (x, dx) in data.iter().zip(&d) {
            assert!((dx - Complex64::new(0.0, k) * x).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_multiplier_of_mode() {
        let (g, l) = (8usize, 10.0);
        let sp = Spectral::new(g, l);
        let k = 2.0 * PI * 2.0 / l;
        let data: Vec<Complex64> = (0..g)
            .map(|i| Complex64::from_polar(1.0, k * i as f64 * l / g as f64))
            .collect();
        let out = sp.quadratic_multiplier(&data, &[0.5]);
        for (x, y) in data.iter().zip(&out) {
            assert!((y - x * (0.5 * k * k)).norm() < 1e-12);
        }
    }
}
