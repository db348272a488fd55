//! FFT bridge between the coefficient rectangle and the physical grid.
//!
//! The convention is `u(x_j) = sum_k u_k e^{i kappa0 k . x_j}` with
//! `x_j = j L / M`, which on the grid is the plain unnormalized inverse DFT.
//! Plans and scratch are cached per thread, keyed by `M`, so the public
//! functions stay pure and safe to call concurrently.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use ndarray::Array3;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;

struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: RefCell<Vec<Complex64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<Fft2>>> = RefCell::new(HashMap::new());
}

fn plans_for(m: usize) -> Rc<Fft2> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(m);
                let inverse = planner.plan_fft_inverse(m);
                let scratch_len = forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len());
                Rc::new(Fft2 {
                    m,
                    forward,
                    inverse,
                    scratch: RefCell::new(vec![Complex64::default(); scratch_len]),
                })
            })
            .clone()
    })
}

impl Fft2 {
    fn transform_2d(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        debug_assert_eq!(data.len(), m * m);
        let mut scratch = self.scratch.borrow_mut();
        for row in data.chunks_exact_mut(m) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, m);
        for row in data.chunks_exact_mut(m) {
            fft.process_with_scratch(row, &mut scratch);
        }
        transpose_square(data, m);
    }

    fn forward_2d(&self, data: &mut [Complex64]) {
        self.transform_2d(data, &self.forward);
    }

    fn inverse_2d(&self, data: &mut [Complex64]) {
        self.transform_2d(data, &self.inverse);
    }
}

fn transpose_square(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

fn wrap(k: i64, m: usize) -> usize {
    (k.rem_euclid(m as i64)) as usize
}

/// Scatters one component's coefficient rectangle into an `M x M` buffer in
/// DFT index order (zero-padded beyond the dealias cutoff).
fn embed(field: &SpectralField, component: usize, buf: &mut [Complex64]) {
    let grid = field.grid();
    let m = grid.m;
    buf.fill(Complex64::default());
    for (i, j, k1, k2) in grid.modes() {
        buf[wrap(k1, m) * m + wrap(k2, m)] = field.coeffs()[(component, i, j)];
    }
}

/// Gathers the resolved rectangle out of an `M x M` spectral buffer,
/// applying the forward-DFT normalization `1 / M^2`.
fn extract(grid: TorusGrid, buf: &[Complex64], component: usize, out: &mut SpectralField) {
    let m = grid.m;
    let scale = 1.0 / (m * m) as f64;
    for (i, j, k1, k2) in grid.modes() {
        out.coeffs_mut()[(component, i, j)] = buf[wrap(k1, m) * m + wrap(k2, m)] * scale;
    }
}

/// Evaluates both velocity components on the physical grid.
/// Returns shape `(2, M, M)`.
pub fn to_physical(field: &SpectralField) -> Array3<f64> {
    let grid = field.grid();
    let m = grid.m;
    let plans = plans_for(m);
    let mut out = Array3::zeros((2, m, m));
    let mut buf = vec![Complex64::default(); m * m];
    for c in 0..2 {
        embed(field, c, &mut buf);
        plans.inverse_2d(&mut buf);
        for i in 0..m {
            for j in 0..m {
                out[(c, i, j)] = buf[i * m + j].re;
            }
        }
    }
    out
}

/// Transforms physical samples of a vector field back to the resolved
/// coefficient rectangle. No projection is applied.
pub fn from_physical(grid: TorusGrid, physical: &Array3<f64>) -> SpectralField {
    let m = grid.m;
    assert_eq!(physical.dim(), (2, m, m));
    let plans = plans_for(m);
    let mut out = SpectralField::zeros(grid);
    let mut buf = vec![Complex64::default(); m * m];
    for c in 0..2 {
        for i in 0..m {
            for j in 0..m {
                buf[i * m + j] = Complex64::new(physical[(c, i, j)], 0.0);
            }
        }
        plans.forward_2d(&mut buf);
        extract(grid, &buf, c, &mut out);
    }
    out
}

/// Physical-space quadrature of `int |u|^2 dx`, exact for resolved fields.
pub fn physical_energy(grid: TorusGrid, physical: &Array3<f64>) -> f64 {
    let m = grid.m;
    let cell = (grid.l / m as f64).powi(2);
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            sum += physical[(0, i, j)].powi(2) + physical[(1, i, j)].powi(2);
        }
    }
    cell * sum
}

/// Quadrature `L^4` norm `(int |u|^4 dx)^{1/4}`.
pub fn l4_norm(field: &SpectralField) -> f64 {
    let grid = field.grid();
    let phys = to_physical(field);
    let m = grid.m;
    let cell = (grid.l / m as f64).powi(2);
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let sq = phys[(0, i, j)].powi(2) + phys[(1, i, j)].powi(2);
            sum += sq * sq;
        }
    }
    (cell * sum).powf(0.25)
}

/// Largest pointwise speed `max_x |u(x)|`; drives the CFL estimate.
pub fn max_speed(physical: &Array3<f64>) -> f64 {
    let (_, m, n) = physical.dim();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let sq = physical[(0, i, j)].powi(2) + physical[(1, i, j)].powi(2);
            worst = worst.max(sq);
        }
    }
    worst.sqrt()
}
