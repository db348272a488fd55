//! The periodic square domain and its resolved Fourier lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization of the torus `[0, L] x [0, L]`.
///
/// `M` physical points per dimension resolve Fourier modes `k` with
/// `|k_i| <= dealias_cutoff`, where `dealias_cutoff = floor(M / 3)` so that
/// quadratic products evaluated on the `M`-grid are alias-free on the
/// retained band (the 2/3 rule).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    /// Domain side length.
    pub l: f64,
    /// Fundamental wavenumber `2*pi / L`.
    pub kappa0: f64,
    /// Physical grid resolution per dimension (power of two).
    pub m: usize,
    /// Largest retained `|k_i|`.
    pub dealias_cutoff: usize,
}

impl TorusGrid {
    pub fn new(l: f64, m: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::invalid(format!("domain length must be positive, got {l}")));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid resolution must be a power of two >= 4, got {m}"
            )));
        }
        let dealias_cutoff = m / 3;
        debug_assert!(dealias_cutoff >= 1);
        Ok(TorusGrid {
            l,
            kappa0: 2.0 * std::f64::consts::PI / l,
            m,
            dealias_cutoff,
        })
    }

    /// Side length of the stored coefficient rectangle, `2 * dealias_cutoff + 1`.
    pub fn modes_per_dim(&self) -> usize {
        2 * self.dealias_cutoff + 1
    }

    /// Signed wavenumber component for a storage index along one axis.
    pub fn wavenumber(&self, index: usize) -> i64 {
        index as i64 - self.dealias_cutoff as i64
    }

    /// Storage index for a signed wavenumber component, if resolved.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let cut = self.dealias_cutoff as i64;
        if -cut <= k && k <= cut {
            Some((k + cut) as usize)
        } else {
            None
        }
    }

    /// Stokes eigenvalue `kappa0^2 |k|^2` for a mode.
    pub fn stokes_eigenvalue(&self, k1: i64, k2: i64) -> f64 {
        self.kappa0 * self.kappa0 * (k1 * k1 + k2 * k2) as f64
    }

    /// Iterator over all resolved modes as `(i, j, k1, k2)`.
    pub fn modes(&self) -> impl Iterator<Item = (usize, usize, i64, i64)> + '_ {
        let s = self.modes_per_dim();
        let cut = self.dealias_cutoff as i64;
        (0..s).flat_map(move |i| {
            (0..s).map(move |j| (i, j, i as i64 - cut, j as i64 - cut))
        })
    }
}
