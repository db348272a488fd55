//! Divergence-free, mean-free vector fields stored as Fourier coefficients.

use ndarray::Array3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::grid::TorusGrid;

/// A real, mean-free, periodic vector field on the torus, represented by the
/// Fourier coefficients of its two components on the resolved rectangle
/// `|k_i| <= dealias_cutoff`.
///
/// Invariants maintained by every constructor and operation:
///
/// * the `k = 0` coefficient vanishes (the field has zero mean),
/// * Hermitian symmetry `coeff(-k) = conj(coeff(k))` (the field is real),
/// * after Leray projection, `k . coeff(k) = 0` to roundoff.
///
/// Parseval's identity fixes the normalization: `|u|_{L2}^2 = L^2 sum_k |u_k|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    /// Shape `(2, S, S)` with `S = 2 * dealias_cutoff + 1`; index `(c, i, j)`
    /// holds component `c` of the mode `k = (i - K, j - K)`.
    coeffs: Array3<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let s = grid.modes_per_dim();
        SpectralField {
            grid,
            coeffs: Array3::zeros((2, s, s)),
        }
    }

    /// Builds `c k_perp e^{i kappa0 k.x} + conj(c) k_perp e^{-i kappa0 k.x}`,
    /// the divergence-free single-mode field with unit direction
    /// `k_perp = (-k2, k1) / |k|`.
    pub fn single_mode(grid: TorusGrid, k: (i64, i64), amplitude: Complex64) -> Result<Self> {
        if k == (0, 0) {
            return Err(Error::invalid("single mode must have k != 0"));
        }
        if grid.index_of(k.0).is_none() || grid.index_of(k.1).is_none() {
            return Err(Error::invalid(format!(
                "mode ({}, {}) is not resolved at cutoff {}",
                k.0, k.1, grid.dealias_cutoff
            )));
        }
        let norm = ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
        let perp = [-(k.1 as f64) / norm, k.0 as f64 / norm];
        let mut field = SpectralField::zeros(grid);
        field.set_mode_pair(k.0, k.1, [amplitude * perp[0], amplitude * perp[1]]);
        Ok(field)
    }

    /// Seeded random divergence-free field with `|u_k| ~ |k|^-spectral_exponent`
    /// for `0 < |k| <= max_k` and uniformly random phases.
    pub fn random_div_free(grid: TorusGrid, seed: u64, max_k: f64, spectral_exponent: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = SpectralField::zeros(grid);
        let cut = grid.dealias_cutoff as i64;
        for k1 in 0..=cut {
            for k2 in -cut..=cut {
                // Half lattice: k1 > 0, or k1 == 0 and k2 > 0.
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
                if kk > max_k {
                    continue;
                }
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let amp = Complex64::from_polar(kk.powf(-spectral_exponent), phase);
                let perp = [-(k2 as f64) / kk, k1 as f64 / kk];
                field.set_mode_pair(k1, k2, [amp * perp[0], amp * perp[1]]);
            }
        }
        field
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    /// Fourier coefficient of the mode `k`; zero when `k` lies beyond the
    /// resolved rectangle (the field is a trigonometric polynomial).
    pub fn coeff(&self, k1: i64, k2: i64) -> [Complex64; 2] {
        match (self.grid.index_of(k1), self.grid.index_of(k2)) {
            (Some(i), Some(j)) => [self.coeffs[(0, i, j)], self.coeffs[(1, i, j)]],
            _ => [Complex64::default(); 2],
        }
    }

    /// Sets the coefficient at `k` and its Hermitian mirror at `-k`.
    /// Panics if `k` is unresolved or zero; builders only.
    pub fn set_mode_pair(&mut self, k1: i64, k2: i64, value: [Complex64; 2]) {
        assert!((k1, k2) != (0, 0), "mean mode must stay zero");
        let i = self.grid.index_of(k1).expect("mode not resolved");
        let j = self.grid.index_of(k2).expect("mode not resolved");
        let im = self.grid.index_of(-k1).unwrap();
        let jm = self.grid.index_of(-k2).unwrap();
        for c in 0..2 {
            self.coeffs[(c, i, j)] = value[c];
            self.coeffs[(c, im, jm)] = value[c].conj();
        }
    }

    /// Enforces Hermitian symmetry by averaging `coeff(k)` with
    /// `conj(coeff(-k))`; run after every nonlinear evaluation.
    pub fn symmetrize(&mut self) {
        let s = self.grid.modes_per_dim();
        for c in 0..2 {
            for i in 0..s {
                let im = s - 1 - i;
                for j in 0..s {
                    let jm = s - 1 - j;
                    if (i, j) > (im, jm) {
                        continue;
                    }
                    let a = self.coeffs[(c, i, j)];
                    let b = self.coeffs[(c, im, jm)];
                    let avg = 0.5 * (a + b.conj());
                    self.coeffs[(c, i, j)] = avg;
                    self.coeffs[(c, im, jm)] = avg.conj();
                }
            }
        }
    }

    pub fn zero_mean_mut(&mut self) {
        let k = self.grid.dealias_cutoff;
        self.coeffs[(0, k, k)] = Complex64::default();
        self.coeffs[(1, k, k)] = Complex64::default();
    }

    /// Largest coefficient magnitude over modes and components.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Largest `|k . coeff(k)|` over modes; zero for divergence-free fields.
    pub fn max_divergence(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, k1, k2) in self.grid.modes() {
            let dot = self.coeffs[(0, i, j)] * k1 as f64 + self.coeffs[(1, i, j)] * k2 as f64;
            worst = worst.max(dot.norm());
        }
        worst
    }

    /// Fraction of the total energy carried by modes with
    /// `max(|k1|, |k2|) = dealias_cutoff`, the outermost stored shell.
    /// Small values certify that the truncation resolves the field.
    pub fn highest_shell_fraction(&self) -> f64 {
        let cut = self.grid.dealias_cutoff as i64;
        let mut shell = 0.0;
        let mut total = 0.0;
        for (i, j, k1, k2) in self.grid.modes() {
            let e = self.coeffs[(0, i, j)].norm_sqr() + self.coeffs[(1, i, j)].norm_sqr();
            total += e;
            if k1.abs().max(k2.abs()) == cut {
                shell += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            shell / total
        }
    }

    /// Helmholtz-Leray projection onto divergence-free fields:
    /// `coeff(k) <- (I - k k^T / |k|^2) coeff(k)`.
    pub fn leray_project(&self) -> SpectralField {
        let mut out = self.clone();
        out.leray_project_mut();
        out
    }

    pub fn leray_project_mut(&mut self) {
        for (i, j, k1, k2) in self.grid.modes() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let kk = (k1 * k1 + k2 * k2) as f64;
            let dot = self.coeffs[(0, i, j)] * k1 as f64 + self.coeffs[(1, i, j)] * k2 as f64;
            self.coeffs[(0, i, j)] -= dot * (k1 as f64 / kk);
            self.coeffs[(1, i, j)] -= dot * (k2 as f64 / kk);
        }
    }

    /// Modal (Type-1) projection `P_N`: keeps modes with `|k| < N`, zeroes the
    /// rest. Boundary-shell modes `|k| = N` are unobserved.
    pub fn modal_project(&self, n: u32) -> Result<SpectralField> {
        if n < 1 {
            return Err(Error::invalid("modal cutoff N must be >= 1"));
        }
        let mut out = self.clone();
        let n2 = i128::from(n) * i128::from(n);
        for (i, j, k1, k2) in self.grid.modes() {
            let kk = i128::from(k1 * k1 + k2 * k2);
            if kk >= n2 {
                out.coeffs[(0, i, j)] = Complex64::default();
                out.coeffs[(1, i, j)] = Complex64::default();
            }
        }
        Ok(out)
    }

    /// Stokes operator `A = -Laplacian`: multiplies each mode by `kappa0^2 |k|^2`.
    pub fn apply_stokes(&self) -> SpectralField {
        let mut out = self.clone();
        for (i, j, k1, k2) in self.grid.modes() {
            let lambda = self.grid.stokes_eigenvalue(k1, k2);
            out.coeffs[(0, i, j)] *= lambda;
            out.coeffs[(1, i, j)] *= lambda;
        }
        out
    }

    /// Inverse Stokes operator on mean-free fields; the `k = 0` mode is zero
    /// by invariant and stays zero.
    pub fn apply_inverse_stokes(&self) -> SpectralField {
        let mut out = self.clone();
        for (i, j, k1, k2) in self.grid.modes() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let lambda = self.grid.stokes_eigenvalue(k1, k2);
            out.coeffs[(0, i, j)] /= lambda;
            out.coeffs[(1, i, j)] /= lambda;
        }
        out
    }

    /// `L^2` (H) norm via Parseval: `sqrt(L^2 sum_k |u_k|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        self.grid.l * sum.sqrt()
    }

    /// `H^1` (V) seminorm `|grad u|`: `sqrt(L^2 kappa0^2 sum_k |k|^2 |u_k|^2)`.
    pub fn h1_norm(&self) -> f64 {
        let mut sum = 0.0;
        for (i, j, k1, k2) in self.grid.modes() {
            let kk = (k1 * k1 + k2 * k2) as f64;
            sum += kk * (self.coeffs[(0, i, j)].norm_sqr() + self.coeffs[(1, i, j)].norm_sqr());
        }
        self.grid.l * self.grid.kappa0 * sum.sqrt()
    }

    /// `|A u|`, the `H^2` quantity controlled on the attractor.
    pub fn stokes_norm(&self) -> f64 {
        let mut sum = 0.0;
        for (i, j, k1, k2) in self.grid.modes() {
            let lambda = self.grid.stokes_eigenvalue(k1, k2);
            sum += lambda * lambda
                * (self.coeffs[(0, i, j)].norm_sqr() + self.coeffs[(1, i, j)].norm_sqr());
        }
        self.grid.l * sum.sqrt()
    }

    /// `H` inner product `(u, v) = L^2 sum_k u_k . conj(v_k)`; real for
    /// Hermitian-symmetric fields.
    pub fn h_inner(&self, other: &SpectralField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut sum = 0.0;
        for (a, b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            sum += (a * b.conj()).re;
        }
        Ok(self.grid.l * self.grid.l * sum)
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.mapv_inplace(|c| c * s);
        out
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        assert_eq!(self.grid, x.grid, "axpy across grids");
        for (s, v) in self.coeffs.iter_mut().zip(x.coeffs.iter()) {
            *s += a * v;
        }
    }
}

impl std::ops::Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "adding fields across grids");
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "subtracting fields across grids");
        SpectralField {
            grid: self.grid,
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap()
    }

    #[test]
    fn leray_annihilates_gradients() {
        // coeff(k) = alpha * k is a pure gradient; the projector kills it.
        let mut f = SpectralField::zeros(grid());
        for k1 in -3i64..=3 {
            for k2 in -3i64..=3 {
                if (k1, k2) <= (0, 0) {
                    continue;
                }
                let alpha = Complex64::new(0.3 * k1 as f64 - 0.1, 0.7 + 0.2 * k2 as f64);
                f.set_mode_pair(k1, k2, [alpha * k1 as f64, alpha * k2 as f64]);
            }
        }
        let p = f.leray_project();
        assert!(p.max_coeff() <= 1e-14 * f.max_coeff());
    }

    #[test]
    fn leray_is_idempotent_and_hand_value() {
        let f = SpectralField::random_div_free(grid(), 11, 5.0, 1.0);
        let once = f.leray_project();
        let twice = once.leray_project();
        assert!((&once - &twice).max_coeff() <= 1e-15 * once.max_coeff());
        assert!(once.max_divergence() <= 1e-12 * once.max_coeff());

        // (I - kk^T/|k|^2) at k = (1,0) maps (3,4) to (0,4).
        let mut g = SpectralField::zeros(grid());
        g.set_mode_pair(1, 0, [Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)]);
        let p = g.leray_project();
        let c = p.coeff(1, 0);
        assert!((c[0] - Complex64::new(0.0, 0.0)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn modal_projection_convention() {
        let g = grid();
        let u = SpectralField::single_mode(g, (1, 0), Complex64::new(0.5, 0.2)).unwrap();
        // |k| = 1 < 4: survives untouched.
        let p = u.modal_project(4).unwrap();
        assert_eq!(p, u);
        // |k| = 5 >= 4: wiped out.
        let v = SpectralField::single_mode(g, (5, 0), Complex64::new(0.5, 0.2)).unwrap();
        assert!(v.modal_project(4).unwrap().max_coeff() == 0.0);
        // N = 1 keeps only the (zero) mean mode.
        let w = SpectralField::random_div_free(g, 3, 5.0, 1.5);
        assert!(w.modal_project(1).unwrap().max_coeff() == 0.0);
        assert!(w.modal_project(0).is_err());
        // Boundary shell |k| = N is unobserved.
        let b = SpectralField::single_mode(g, (3, 4), Complex64::new(1.0, 0.0)).unwrap();
        assert!(b.modal_project(5).unwrap().max_coeff() == 0.0);
        // Idempotence and commutation with Leray and A^-1.
        let pn = w.modal_project(3).unwrap();
        assert_eq!(pn.modal_project(3).unwrap(), pn);
        let a = w.modal_project(3).unwrap().apply_inverse_stokes();
        let b = w.apply_inverse_stokes().modal_project(3).unwrap();
        assert!((&a - &b).max_coeff() <= 1e-15 * a.max_coeff());
    }

    #[test]
    fn modal_projection_is_orthogonal() {
        let u = SpectralField::random_div_free(grid(), 17, 5.0, 1.0);
        let low = u.modal_project(3).unwrap();
        let high = &u - &low;
        assert_eq!(low.h_inner(&high).unwrap(), 0.0);
    }

    #[test]
    fn type1_interpolant_bound() {
        // |u - P_N u| <= |grad u| / (kappa0 N)
        let g = TorusGrid::new(3.0, 16).unwrap();
        for seed in 0..20 {
            let u = SpectralField::random_div_free(g, seed, 5.0, 0.7);
            for n in [1u32, 2, 3, 5] {
                let tail = &u - &u.modal_project(n).unwrap();
                assert!(tail.l2_norm() <= u.h1_norm() / (g.kappa0 * n as f64) + 1e-14);
            }
        }
    }

    #[test]
    fn poincare_inequality() {
        let g = TorusGrid::new(5.0, 16).unwrap();
        for seed in 0..20 {
            let u = SpectralField::random_div_free(g, seed, 5.0, 0.4);
            assert!(u.l2_norm() <= u.h1_norm() / g.kappa0 * (1.0 + 1e-14));
        }
    }

    #[test]
    fn stokes_multipliers() {
        let g = grid();
        let u = SpectralField::single_mode(g, (1, 0), Complex64::new(1.0, -0.5)).unwrap();
        let au = u.apply_stokes();
        assert!((au.coeff(1, 0)[1] - u.coeff(1, 0)[1]).norm() < 1e-15); // lambda = 1

        let v = SpectralField::single_mode(g, (2, 1), Complex64::new(0.3, 0.1)).unwrap();
        let av = v.apply_stokes();
        assert!((av.coeff(2, 1)[0] - v.coeff(2, 1)[0] * 5.0).norm() < 1e-15); // lambda = 5

        let w = SpectralField::random_div_free(g, 5, 5.0, 1.0);
        let round = w.apply_stokes().apply_inverse_stokes();
        assert!((&w - &round).max_coeff() <= 1e-13 * w.max_coeff());
    }

    #[test]
    fn paper_example_force_norms() {
        // c = 1 / (2 sqrt(2) pi |k|), L = 2 pi, k = (1,0): |f| = ||f|| = 1.
        let g = grid();
        let c = 1.0 / (2.0 * std::f64::consts::SQRT_2 * std::f64::consts::PI);
        let f = SpectralField::single_mode(g, (1, 0), Complex64::new(c, 0.0)).unwrap();
        assert!((f.l2_norm() - 1.0).abs() < 1e-14);
        assert!((f.h1_norm() - 1.0).abs() < 1e-14);
        let zero = SpectralField::zeros(g);
        assert_eq!(zero.l2_norm(), 0.0);
        assert_eq!(zero.h1_norm(), 0.0);
    }

    #[test]
    fn random_fields_satisfy_invariants() {
        for seed in 0..10 {
            let u = SpectralField::random_div_free(grid(), seed, 5.0, 2.0);
            assert_eq!(u.coeff(0, 0), [Complex64::default(); 2]);
            assert!(u.max_divergence() <= 1e-12 * u.max_coeff());
            let mut v = u.clone();
            v.symmetrize();
            assert_eq!(u, v);
        }
    }
}
