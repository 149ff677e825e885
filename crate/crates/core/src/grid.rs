//! Periodic lattices, spectral differentiation and quadrature.
//!
//! Fields are flat slices in row-major order: for a 2D grid the sample at
//! `(i, j)` lives at `i * n1 + j`, with axis 0 the slow index. Coordinates
//! run over `[-L/2, L/2)` on every axis.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// One periodic axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub length: f64,
    pub dx: f64,
    /// Wavenumbers in transform order: 0, 1, ..., N/2-1, -N/2, ..., -1 (times 2π/L).
    pub k: Vec<f64>,
}

impl Axis {
    fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n_points must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!(
                "length must be positive, got {length}"
            )));
        }
        let dk = 2.0 * PI / length;
        let half = (n / 2) as isize;
        let k = (0..n as isize)
            .map(|j| if j < half { j } else { j - n as isize })
            .map(|m| m as f64 * dk)
            .collect();
        Ok(Self {
            n,
            length,
            dx: length / n as f64,
            k,
        })
    }

    /// Sample positions `-L/2 + j dx`.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| -0.5 * self.length + j as f64 * self.dx)
            .collect()
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }
}

/// A 1D or 2D periodic grid with cached transform plans.
#[derive(Clone)]
pub struct Grid {
    axes: Vec<Axis>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("axes", &self.axes).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

/// Builds a grid with the same number of points and length on every axis.
pub fn make_grid(dim: usize, n_points: usize, length: f64) -> Result<Grid> {
    if !(1..=2).contains(&dim) {
        return Err(Error::Grid(format!("dim must be 1 or 2, got {dim}")));
    }
    Grid::new(&vec![n_points; dim], &vec![length; dim])
}

impl Grid {
    pub fn new(n_points: &[usize], lengths: &[f64]) -> Result<Self> {
        if !(1..=2).contains(&n_points.len()) {
            return Err(Error::Grid(format!(
                "dim must be 1 or 2, got {}",
                n_points.len()
            )));
        }
        if n_points.len() != lengths.len() {
            return Err(Error::Grid(format!(
                "{} sizes but {} lengths",
                n_points.len(),
                lengths.len()
            )));
        }
        let axes = n_points
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| Axis::new(n, l))
            .collect::<Result<Vec<_>>>()?;
        let mut planner = FftPlanner::new();
        let forward = axes.iter().map(|a| planner.plan_fft_forward(a.n)).collect();
        let inverse = axes.iter().map(|a| planner.plan_fft_inverse(a.n)).collect();
        Ok(Self {
            axes,
            forward,
            inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.dx).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length).product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.dx).fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.len(),
                got: len,
            })
        }
    }

    /// Index along `axis` of the flat sample index `idx`.
    #[inline]
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        match (self.dim(), axis) {
            (1, _) => idx,
            (_, 0) => idx / self.axes[1].n,
            _ => idx % self.axes[1].n,
        }
    }

    /// Per-sample coordinate along `axis`, laid out like a field.
    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let x = self.axes[axis].coordinates();
        (0..self.len())
            .map(|i| x[self.axis_index(i, axis)])
            .collect()
    }

    /// Per-mode wavenumber along `axis`, laid out like a spectrum.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let k = &self.axes[axis].k;
        (0..self.len())
            .map(|i| k[self.axis_index(i, axis)])
            .collect()
    }

    /// |k|² per mode.
    pub fn k_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for a in 0..self.dim() {
            for (o, k) in out.iter_mut().zip(self.wavenumbers(a)) {
                *o += k * k;
            }
        }
        out
    }

    /// Largest wavenumber magnitude present on the grid.
    pub fn k_max(&self) -> f64 {
        self.k_squared().into_iter().fold(0.0, f64::max).sqrt()
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plans = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        match self.dim() {
            1 => plans[0].process(data),
            _ => {
                let (n0, n1) = (self.axes[0].n, self.axes[1].n);
                for row in data.chunks_exact_mut(n1) {
                    plans[1].process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n0];
                for j in 0..n1 {
                    for i in 0..n0 {
                        col[i] = data[i * n1 + j];
                    }
                    plans[0].process(&mut col);
                    for i in 0..n0 {
                        data[i * n1 + j] = col[i];
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    pub fn forward_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut data = f.to_vec();
        self.transform(&mut data, false);
        data
    }

    pub fn inverse_complex(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spec, true);
        spec
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse_complex(spec)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }

    /// Spectral multiplier of ∂ⁿ along `axis`. The Nyquist mode is dropped
    /// for odd orders so real fields stay real.
    fn derivative_symbol(&self, axis: usize, order: u32) -> Vec<Complex64> {
        let nyq = self.axes[axis].nyquist();
        (0..self.len())
            .map(|i| {
                let j = self.axis_index(i, axis);
                if order % 2 == 1 && j == nyq {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(0.0, self.axes[axis].k[j]).powu(order)
            })
            .collect()
    }

    pub fn derivative(&self, f: &[f64], axis: usize, order: u32) -> Vec<f64> {
        let mut spec = self.forward(f);
        for (s, m) in spec.iter_mut().zip(self.derivative_symbol(axis, order)) {
            *s *= m;
        }
        self.inverse_real(spec)
    }

    pub fn derivative_complex(&self, f: &[Complex64], axis: usize, order: u32) -> Vec<Complex64> {
        let mut spec = self.forward_complex(f);
        for (s, m) in spec.iter_mut().zip(self.derivative_symbol(axis, order)) {
            *s *= m;
        }
        self.inverse_complex(spec)
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|a| self.derivative(f, a, 1)).collect()
    }

    pub fn divergence(&self, v: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (a, comp) in v.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(self.derivative(comp, a, 1)) {
                *o += d;
            }
        }
        out
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let k2 = self.k_squared();
        self.apply_multiplier(f, &k2.iter().map(|k| -k).collect::<Vec<_>>())
    }

    pub fn laplacian_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.forward_complex(f);
        for (s, k2) in spec.iter_mut().zip(self.k_squared()) {
            *s *= -k2;
        }
        self.inverse_complex(spec)
    }

    /// Multiplies the spectrum of a real field by a real symbol.
    pub fn apply_multiplier(&self, f: &[f64], symbol: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(f);
        for (s, m) in spec.iter_mut().zip(symbol) {
            *s *= *m;
        }
        self.inverse_real(spec)
    }

    /// Δx^dim · Σ f.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.cell_volume() * f.iter().sum::<f64>()
    }

    /// ∫|f|² evaluated in wavenumber space: (ΔV / N) Σ |f̂|².
    pub fn parseval(&self, f: &[Complex64]) -> f64 {
        let spec = self.forward_complex(f);
        self.cell_volume() / self.len() as f64 * spec.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Zeroes every mode with |n| > N/3 on any axis.
    pub fn dealias(&self, f: &[f64]) -> Vec<f64> {
        let mask: Vec<f64> = (0..self.len())
            .map(|i| {
                let keep = (0..self.dim()).all(|a| {
                    let ax = &self.axes[a];
                    let j = self.axis_index(i, a);
                    let m = if j < ax.n / 2 { j } else { ax.n - j };
                    3 * m <= ax.n
                });
                if keep {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        self.apply_multiplier(f, &mask)
    }

    /// Pointwise product of two fields projected by the 2/3 rule.
    pub fn dealiased_product(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let a = self.dealias(a);
        let b = self.dealias(b);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.dealias(&prod)
    }

    /// Band-limited translate g(x) = f(x + d).
    pub fn shift(&self, f: &[f64], d: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(f);
        for (i, s) in spec.iter_mut().enumerate() {
            let mut factor = Complex64::new(1.0, 0.0);
            for (a, &da) in d.iter().enumerate() {
                let ax = &self.axes[a];
                let j = self.axis_index(i, a);
                let phase = ax.k[j] * da;
                factor *= if j == ax.nyquist() {
                    Complex64::new(phase.cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, phase)
                };
            }
            *s *= factor;
        }
        self.inverse_real(spec)
    }

    /// Largest |f| on the boundary rows/columns (index 0 on each axis).
    pub fn edge_max(&self, f: &[f64]) -> f64 {
        (0..self.len())
            .filter(|&i| (0..self.dim()).any(|a| self.axis_index(i, a) == 0))
            .map(|i| f[i].abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn wavenumbers_follow_transform_order() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        assert_eq!(
            g.axis(0).k,
            vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]
        );
        let g = make_grid(1, 8, 4.0 * PI).unwrap();
        assert!((g.axis(0).k[1] - 0.5).abs() < 1e-15);
        assert!((g.axis(0).dx * 8.0 - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_grid(1, 6, 1.0), Err(Error::Grid(_))));
        assert!(matches!(make_grid(1, 4, 1.0), Err(Error::Grid(_))));
        assert!(matches!(make_grid(3, 8, 1.0), Err(Error::Grid(_))));
        assert!(matches!(make_grid(1, 8, 0.0), Err(Error::Grid(_))));
    }

    #[test]
    fn derivatives_of_sine() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let cos: Vec<f64> = x.iter().map(|x| x.cos()).collect();
        assert!(max_diff(&g.derivative(&f, 0, 1), &cos) < 1e-12);
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        assert!(max_diff(&g.derivative(&f, 0, 2), &neg) < 1e-12);
        assert!(max_diff(&g.laplacian(&f), &neg) < 1e-12);
        let c = vec![3.0; 32];
        for order in 1..5 {
            assert!(g.derivative(&c, 0, order).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn quadrature() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        assert!((g.integrate(&vec![1.0; 64]) - 2.0 * PI).abs() < 1e-13);
        let s: Vec<f64> = g.coordinates(0).iter().map(|x| x.sin()).collect();
        assert!(g.integrate(&s).abs() < 1e-14);

        let g = make_grid(1, 256, 40.0).unwrap();
        let gauss: Vec<f64> = g
            .coordinates(0)
            .iter()
            .map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt())
            .collect();
        assert!((g.integrate(&gauss) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_dimensional_layout() {
        let g = Grid::new(&[8, 16], &[2.0 * PI, 4.0 * PI]).unwrap();
        let x = g.coordinates(0);
        let y = g.coordinates(1);
        let f: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(x, y)| x.sin() * (0.5 * y).cos())
            .collect();
        let fx: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(x, y)| x.cos() * (0.5 * y).cos())
            .collect();
        let fy: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(x, y)| -0.5 * x.sin() * (0.5 * y).sin())
            .collect();
        assert!(max_diff(&g.derivative(&f, 0, 1), &fx) < 1e-12);
        assert!(max_diff(&g.derivative(&f, 1, 1), &fy) < 1e-12);
        let lap: Vec<f64> = f.iter().map(|v| -1.25 * v).collect();
        assert!(max_diff(&g.laplacian(&f), &lap) < 1e-12);
    }

    #[test]
    fn shift_translates_modes() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let f: Vec<f64> = x.iter().map(|x| (2.0 * x).sin()).collect();
        let want: Vec<f64> = x.iter().map(|x| (2.0 * (x + 0.3)).sin()).collect();
        assert!(max_diff(&g.shift(&f, &[0.3]), &want) < 1e-12);
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = make_grid(1, 48usize.next_power_of_two(), 2.0 * PI).unwrap();
        let x = g.coordinates(0);
        let low: Vec<f64> = x.iter().map(|x| (3.0 * x).cos()).collect();
        assert!(max_diff(&g.dealias(&low), &low) < 1e-13);
        let high: Vec<f64> = x.iter().map(|x| (30.0 * x).cos()).collect();
        assert!(g.dealias(&high).iter().all(|v| v.abs() < 1e-13));
    }
}
