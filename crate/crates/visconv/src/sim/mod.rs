//! Forward integration of the 2D Navier-Stokes system
//! `du/dt + nu A u + B(u, u) = f` on the torus.
//!
//! The stiff diagonal viscous term is handled exactly per mode and the
//! nonlinearity and forcing explicitly, second order in time (an ETD
//! two-stage scheme). Constant-forced equilibria are preserved to roundoff,
//! which the stationary single-mode tests rely on.

mod etd;
mod trajectory;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use etd::LinearPropagator;
pub use trajectory::Trajectory;

use crate::error::{Error, Result};
use crate::spectral::{self, ladyzhenskaya_c0, SpectralField, TorusGrid};

/// Time-autonomous forcing, built from divergence-free single modes
/// (`c k_perp e^{i kappa0 k.x} + c.c.`) or loaded from a container file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    SingleMode { k: [i64; 2], amplitude: [f64; 2] },
    MultiMode { modes: Vec<ForceMode> },
    File { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceMode {
    pub k: [i64; 2],
    pub amplitude: [f64; 2],
}

impl ForceSpec {
    pub fn zero() -> Self {
        ForceSpec::MultiMode { modes: vec![] }
    }

    pub fn build(&self, grid: TorusGrid) -> Result<SpectralField> {
        match self {
            ForceSpec::SingleMode { k, amplitude } => SpectralField::single_mode(
                grid,
                (k[0], k[1]),
                Complex64::new(amplitude[0], amplitude[1]),
            ),
            ForceSpec::MultiMode { modes } => {
                let mut f = SpectralField::zeros(grid);
                for mode in modes {
                    let single = SpectralField::single_mode(
                        grid,
                        (mode.k[0], mode.k[1]),
                        Complex64::new(mode.amplitude[0], mode.amplitude[1]),
                    )?;
                    f = &f + &single;
                }
                Ok(f)
            }
            ForceSpec::File { path } => {
                let traj = crate::vsct::read_trajectory(std::path::Path::new(path))?;
                if traj.is_empty() {
                    return Err(Error::invalid(format!("force file {path} holds no state")));
                }
                if traj.states[0].grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(traj.states[0].clone())
            }
        }
    }
}

/// Everything needed to advance the true system: domain, viscosity, forcing,
/// step size and the transient to discard.
#[derive(Debug, Clone)]
pub struct PhysicsConfig {
    pub grid: TorusGrid,
    pub nu: f64,
    pub force: ForceSpec,
    pub dt: f64,
    pub spinup_time: f64,
}

impl PhysicsConfig {
    pub fn new(grid: TorusGrid, nu: f64, force: ForceSpec, dt: f64, spinup_time: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::invalid(format!("viscosity must be positive, got {nu}")));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if spinup_time < 0.0 {
            return Err(Error::invalid("spin-up time must be nonnegative"));
        }
        Ok(PhysicsConfig {
            grid,
            nu,
            force,
            dt,
            spinup_time,
        })
    }

    /// Default truth-run transient `20 / (nu kappa0^2)`, long enough for the
    /// slowest mode to forget its initial condition.
    pub fn default_spinup(nu: f64, kappa0: f64) -> f64 {
        20.0 / (nu * kappa0 * kappa0)
    }
}

/// Grashof number `G = |f| / (nu kappa0)^2`.
pub fn grashof(force: &SpectralField, nu: f64, kappa0: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::invalid(format!("viscosity must be positive, got {nu}")));
    }
    Ok(force.l2_norm() / (nu * kappa0).powi(2))
}

/// Seeded initial condition: random divergence-free field with spectrum
/// `|u_k| ~ |k|^-2` up to `|k| <= 8`, normalized to unit `L^2` norm. The
/// choice is immaterial after spin-up.
pub fn initial_condition(grid: TorusGrid, seed: u64) -> SpectralField {
    let u = SpectralField::random_div_free(grid, seed, 8.0, 2.0);
    let norm = u.l2_norm();
    if norm == 0.0 {
        u
    } else {
        u.scaled(1.0 / norm)
    }
}

pub(crate) fn check_cfl(dt: f64, speed: f64, grid: TorusGrid) -> Result<()> {
    let cfl = dt * speed * grid.m as f64 / grid.l;
    if cfl > 0.5 {
        Err(Error::CflViolation { cfl })
    } else {
        Ok(())
    }
}

struct NseStepper {
    propagator: LinearPropagator,
    force: SpectralField,
    dt: f64,
}

impl NseStepper {
    fn new(cfg: &PhysicsConfig) -> Result<Self> {
        let force = cfg.force.build(cfg.grid)?;
        let propagator = LinearPropagator::viscous(cfg.grid, cfg.nu, cfg.dt);
        Ok(NseStepper {
            propagator,
            force,
            dt: cfg.dt,
        })
    }

    fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        let (advection, speed) = spectral::self_advection(u);
        check_cfl(self.dt, speed, u.grid())?;
        let mut slope = self.force.clone();
        slope.axpy(-1.0, &advection);

        let predictor = self.propagator.predict(u, &slope);
        let (advection2, _) = spectral::self_advection(&predictor);
        let mut slope2 = self.force.clone();
        slope2.axpy(-1.0, &advection2);

        Ok(self.propagator.correct(predictor, &slope, &slope2))
    }
}

/// Advances the state by one step of `dt`.
pub fn step(u: &SpectralField, cfg: &PhysicsConfig) -> Result<SpectralField> {
    NseStepper::new(cfg)?.step(u)
}

/// Integrates from `u0` over `[0, t_end]`, recording every `record_every`
/// steps (state 0 included), optionally truncating recorded states to the
/// modal cutoff. Samples earlier than `spinup_time` are flagged transient.
pub fn integrate(
    u0: &SpectralField,
    cfg: &PhysicsConfig,
    t_end: f64,
    record_every: usize,
    cutoff: Option<u32>,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
    }
    if record_every == 0 {
        return Err(Error::invalid("record_every must be >= 1"));
    }
    let stepper = NseStepper::new(cfg)?;
    let n_steps = (t_end / cfg.dt - 1e-9).ceil() as usize;
    let mut u = u0.clone();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut record = |i: usize, u: &SpectralField| -> Result<()> {
        times.push(i as f64 * cfg.dt);
        states.push(match cutoff {
            Some(n) => u.modal_project(n)?,
            None => u.clone(),
        });
        Ok(())
    };
    record(0, &u)?;
    for i in 1..=n_steps {
        u = stepper.step(&u)?;
        if i % record_every == 0 {
            record(i, &u)?;
        }
    }
    let transient_count = times.iter().filter(|&&t| t < cfg.spinup_time).count();
    Ok(Trajectory {
        times,
        states,
        cutoff,
        transient_count,
        nu: Some(cfg.nu),
        force: Some(cfg.force.clone()),
    })
}

/// Relative defect of the energy identity
/// `1/2 d/dt |u|^2 + nu ||u||^2 = (f, u)` integrated over `[s, t]`:
/// `|1/2 (|u(t)|^2 - |u(s)|^2) + nu int ||u||^2 - int (f, u)| / int ||u||^2`,
/// trapezoid quadrature at the recording cadence.
pub fn energy_balance_residual(
    traj: &Trajectory,
    cfg: &PhysicsConfig,
    window: (f64, f64),
) -> Result<f64> {
    if traj.cutoff.is_some() {
        return Err(Error::invalid(
            "energy balance requires a full (untruncated) trajectory",
        ));
    }
    let (i0, i1) = traj.window_indices(window.0, window.1)?;
    let force = cfg.force.build(cfg.grid)?;
    let h = traj.dt_record();
    let mut dissipation = 0.0;
    let mut input = 0.0;
    for i in i0..=i1 {
        let weight = if i == i0 || i == i1 { 0.5 } else { 1.0 };
        let u = &traj.states[i];
        dissipation += weight * u.h1_norm().powi(2);
        input += weight * force.h_inner(u)?;
    }
    dissipation *= h;
    input *= h;
    let kinetic = 0.5
        * (traj.states[i1].l2_norm().powi(2) - traj.states[i0].l2_norm().powi(2));
    Ok((kinetic + cfg.nu * dissipation - input).abs() / dissipation)
}

/// Post-spin-up check of the global-attractor bounds
/// `|u| <= nu G`, `||u|| <= nu kappa0 G`, `|A u| <= c2 nu kappa0^2 (G + c0^-2)^3`
/// (with `c2 = 2137 c0^4`), plus the resolution requirement that the
/// outermost retained shell carries at most `1e-8` of the energy.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorCheck {
    pub grashof: f64,
    pub max_l2_ratio: f64,
    pub max_h1_ratio: f64,
    pub max_stokes_ratio: f64,
    pub max_shell_fraction: f64,
    pub pass: bool,
}

pub const SHELL_ENERGY_LIMIT: f64 = 1e-8;

pub fn attractor_check(traj: &Trajectory, cfg: &PhysicsConfig) -> Result<AttractorCheck> {
    let force = cfg.force.build(cfg.grid)?;
    let g = grashof(&force, cfg.nu, cfg.grid.kappa0)?;
    if g == 0.0 {
        return Err(Error::invalid(
            "attractor bounds are trivial for unforced flow",
        ));
    }
    let kappa0 = cfg.grid.kappa0;
    let c0 = ladyzhenskaya_c0();
    let stokes_bound = 2137.0 * c0.powi(4) * cfg.nu * kappa0 * kappa0 * (g + c0.powi(-2)).powi(3);
    let mut check = AttractorCheck {
        grashof: g,
        max_l2_ratio: 0.0,
        max_h1_ratio: 0.0,
        max_stokes_ratio: 0.0,
        max_shell_fraction: 0.0,
        pass: true,
    };
    for u in traj.states.iter().skip(traj.transient_count) {
        check.max_l2_ratio = check.max_l2_ratio.max(u.l2_norm() / (cfg.nu * g));
        check.max_h1_ratio = check.max_h1_ratio.max(u.h1_norm() / (cfg.nu * kappa0 * g));
        check.max_stokes_ratio = check.max_stokes_ratio.max(u.stokes_norm() / stokes_bound);
        check.max_shell_fraction = check.max_shell_fraction.max(u.highest_shell_fraction());
    }
    check.pass = check.max_l2_ratio <= 1.0
        && check.max_h1_ratio <= 1.0
        && check.max_stokes_ratio <= 1.0
        && check.max_shell_fraction <= SHELL_ENERGY_LIMIT;
    Ok(check)
}
