//! Pseudo-spectral evaluation of the Navier-Stokes nonlinearity
//! `B(u, v) = P_sigma[(u . grad) v]`.
//!
//! Divergence-free `u` lets us evaluate the advection in conservation form
//! `d_a (u_a v_b)`: products are formed on the physical grid, transformed
//! back, truncated to the alias-free rectangle (the 2/3 rule), then
//! Leray-projected and Hermitian-symmetrized.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft::{self, from_physical, max_speed, to_physical};
use crate::spectral::field::SpectralField;

fn divergence_of_tensor(
    t1b: &SpectralField,
    t2b: &SpectralField,
    component: usize,
    out: &mut SpectralField,
) {
    let grid = out.grid();
    let kappa0 = grid.kappa0;
    for (i, j, k1, k2) in grid.modes() {
        let d = Complex64::new(0.0, kappa0)
            * (t1b.coeffs()[(component, i, j)] * k1 as f64
                + t2b.coeffs()[(component, i, j)] * k2 as f64);
        out.coeffs_mut()[(component, i, j)] = d;
    }
}

fn assemble(grid: crate::spectral::grid::TorusGrid, products: &Array3<f64>) -> SpectralField {
    // products holds (u1 v1, u1 v2, u2 v1, u2 v2) packed as two vector fields
    // (u1 v ; u2 v) so a single from_physical call handles each pair.
    let m = grid.m;
    let mut row1 = Array3::zeros((2, m, m));
    let mut row2 = Array3::zeros((2, m, m));
    for c in 0..2 {
        for i in 0..m {
            for j in 0..m {
                row1[(c, i, j)] = products[(c, i, j)];
                row2[(c, i, j)] = products[(c + 2, i, j)];
            }
        }
    }
    let t1 = from_physical(grid, &row1); // components: (u1 v1, u1 v2)
    let t2 = from_physical(grid, &row2); // components: (u2 v1, u2 v2)
    let mut w = SpectralField::zeros(grid);
    divergence_of_tensor(&t1, &t2, 0, &mut w);
    divergence_of_tensor(&t1, &t2, 1, &mut w);
    w.zero_mean_mut();
    w.leray_project_mut();
    w.symmetrize();
    w
}

/// `B(u, v)`: mean-free, divergence-free, dealiased.
pub fn bilinear(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let m = grid.m;
    let up = to_physical(u);
    let vp = if std::ptr::eq(u, v) {
        None
    } else {
        Some(to_physical(v))
    };
    let vp_ref = vp.as_ref().unwrap_or(&up);
    let mut products = Array3::zeros((4, m, m));
    for i in 0..m {
        for j in 0..m {
            let (u1, u2) = (up[(0, i, j)], up[(1, i, j)]);
            let (v1, v2) = (vp_ref[(0, i, j)], vp_ref[(1, i, j)]);
            products[(0, i, j)] = u1 * v1;
            products[(1, i, j)] = u1 * v2;
            products[(2, i, j)] = u2 * v1;
            products[(3, i, j)] = u2 * v2;
        }
    }
    Ok(assemble(grid, &products))
}

/// `B(u, u)` together with `max_x |u(x)|`, which the time stepper needs for
/// its CFL estimate; one physical transform is shared.
pub fn self_advection(u: &SpectralField) -> (SpectralField, f64) {
    let grid = u.grid();
    let m = grid.m;
    let up = to_physical(u);
    let speed = max_speed(&up);
    let mut products = Array3::zeros((4, m, m));
    for i in 0..m {
        for j in 0..m {
            let (u1, u2) = (up[(0, i, j)], up[(1, i, j)]);
            products[(0, i, j)] = u1 * u1;
            products[(1, i, j)] = u1 * u2;
            products[(2, i, j)] = u1 * u2;
            products[(3, i, j)] = u2 * u2;
        }
    }
    (assemble(grid, &products), speed)
}

/// `b(u, v, w) = (B(u, v), w)`.
pub fn trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    if u.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    bilinear(u, v)?.h_inner(w)
}

/// Right-hand side of the Ladyzhenskaya-based estimate
/// `|b(u,v,w)| <= |u|_L4 |grad v| |w|_L4`, with quadrature `L^4` norms.
pub fn trilinear_estimate(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> f64 {
    fft::l4_norm(u) * v.h1_norm() * fft::l4_norm(w)
}
