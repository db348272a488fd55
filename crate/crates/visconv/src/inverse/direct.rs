//! Direct viscosity identification from full-state data: a test oracle that
//! needs exactly the information the inverse problem denies itself.

use crate::error::{Error, Result};
use crate::sim::Trajectory;
use crate::spectral::SpectralField;

/// Averages the energy identity over `[s, t]`:
/// `nu = (int <f, u> - 1/2 (|u(t)|^2 - |u(s)|^2)) / int ||u||^2`,
/// trapezoid quadrature at the recording cadence. The kinetic-energy
/// difference carries the factor 1/2 the identity requires.
pub fn direct_viscosity(
    truth: &Trajectory,
    force: &SpectralField,
    window: (f64, f64),
) -> Result<f64> {
    if truth.cutoff.is_some() {
        return Err(Error::invalid(
            "direct viscosity identification requires full-state data",
        ));
    }
    let (i0, i1) = truth.window_indices(window.0, window.1)?;
    let h = truth.dt_record();
    let mut input = 0.0;
    let mut dissipation = 0.0;
    for i in i0..=i1 {
        let w = if i == i0 || i == i1 { 0.5 } else { 1.0 };
        input += w * force.h_inner(&truth.states[i])?;
        dissipation += w * truth.states[i].h1_norm().powi(2);
    }
    input *= h;
    dissipation *= h;
    if dissipation == 0.0 {
        return Err(Error::invalid(
            "trajectory carries no enstrophy over the window",
        ));
    }
    let kinetic = 0.5
        * (truth.states[i1].l2_norm().powi(2) - truth.states[i0].l2_norm().powi(2));
    Ok((input - kinetic) / dissipation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{integrate, ForceSpec, PhysicsConfig};
    use crate::spectral::TorusGrid;
    use num_complex::Complex64;

    #[test]
    fn stationary_single_mode_recovers_nu_exactly() {
        let grid = TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let nu = 0.1;
        let amp = 0.8;
        let lambda = grid.stokes_eigenvalue(1, 0);
        let force_spec = ForceSpec::SingleMode {
            k: [1, 0],
            amplitude: [amp * nu * lambda, 0.0],
        };
        let u0 = SpectralField::single_mode(grid, (1, 0), Complex64::new(amp, 0.0)).unwrap();
        let cfg = PhysicsConfig::new(grid, nu, force_spec, 0.01, 0.0).unwrap();
        let traj = integrate(&u0, &cfg, 5.0, 10, None).unwrap();
        let force = cfg.force.build(grid).unwrap();
        let got = direct_viscosity(&traj, &force, (0.0, 5.0)).unwrap();
        assert!((got - nu).abs() <= 1e-8 * nu, "got {got}");
    }

    #[test]
    fn unforced_decay_recovers_nu_from_kinetic_energy_alone() {
        let grid = TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let nu = 0.1;
        let cfg = PhysicsConfig::new(grid, nu, ForceSpec::zero(), 0.005, 0.0).unwrap();
        let u0 = SpectralField::single_mode(grid, (1, 0), Complex64::new(1.0, 0.0)).unwrap();
        let traj = integrate(&u0, &cfg, 4.0, 2, None).unwrap();
        let force = SpectralField::zeros(grid);
        let got = direct_viscosity(&traj, &force, (0.0, 4.0)).unwrap();
        assert!((got - nu).abs() <= 1e-4 * nu, "got {got}");
    }

    #[test]
    fn truncated_data_is_refused() {
        let grid = TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let cfg = PhysicsConfig::new(grid, 0.1, ForceSpec::zero(), 0.01, 0.0).unwrap();
        let u0 = SpectralField::single_mode(grid, (1, 0), Complex64::new(1.0, 0.0)).unwrap();
        let traj = integrate(&u0, &cfg, 1.0, 10, Some(4)).unwrap();
        let force = SpectralField::zeros(grid);
        assert!(direct_viscosity(&traj, &force, (0.0, 1.0)).is_err());
    }
}
