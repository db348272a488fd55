//! Continuous data assimilation by nudging, and the determining map.
//!
//! Given modal observations `phi` of a reference flow and a viscosity guess
//! `gamma`, the nudged system
//!
//! ```text
//! dv/dt + gamma A v + B(v, v) = f + mu (phi - P_N v)
//! ```
//!
//! synchronizes `v` with the reference. Its unique globally bounded solution
//! defines the determining map `W(gamma, phi)`, approximated here by an
//! initial-value integration from `v = 0` with an exponential-forgetting
//! spin-up ahead of the evaluation window. The gain is parameterized
//! nondimensionally: `mu = mu0 nu0 kappa0^2 N^2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{check_cfl, LinearPropagator, PhysicsConfig, Trajectory};
use crate::spectral::{self, SpectralField};

/// How to treat violated theorem hypotheses: refuse, or warn and proceed.
/// The sufficient conditions are conservative by orders of magnitude at
/// desk scale, and runs beyond them are scientifically interesting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionPolicy {
    Strict,
    Advisory,
}

/// One evaluated theorem hypothesis, in the normalized sense `lhs >= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `lhs - rhs`; positive margins certify the hypothesis.
    pub margin: f64,
}

impl ConditionCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        ConditionCheck {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs >= rhs,
            margin: lhs - rhs,
        }
    }

    pub fn enforce(&self, policy: ConditionPolicy) -> Result<()> {
        if self.pass {
            return Ok(());
        }
        match policy {
            ConditionPolicy::Strict => Err(Error::ConditionFailed {
                name: self.name.clone(),
                lhs: self.lhs,
                rhs: self.rhs,
            }),
            ConditionPolicy::Advisory => {
                log::warn!(
                    "condition {} violated ({:.6e} < {:.6e}); proceeding (advisory mode)",
                    self.name,
                    self.lhs,
                    self.rhs
                );
                Ok(())
            }
        }
    }
}

/// Observation cutoff, gain, viscosity bracket and evaluation window.
#[derive(Debug, Clone)]
pub struct AssimConfig {
    /// Modal observation cutoff `N >= 1`.
    pub n: u32,
    /// Nondimensional nudging gain `mu0 >= 1`.
    pub mu0: f64,
    /// Viscosity bracket `0 < nu0 < nu1`.
    pub nu0: f64,
    pub nu1: f64,
    /// Forgetting interval integrated before the window.
    pub spinup_time: f64,
    /// Evaluation window `[s, t]`.
    pub window: (f64, f64),
    pub policy: ConditionPolicy,
}

impl AssimConfig {
    pub fn new(
        n: u32,
        mu0: f64,
        nu0: f64,
        nu1: f64,
        spinup_time: f64,
        window: (f64, f64),
        policy: ConditionPolicy,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("observation cutoff N must be >= 1"));
        }
        if !(nu0 > 0.0 && nu1 > nu0) {
            return Err(Error::invalid(format!(
                "viscosity bracket must satisfy 0 < nu0 < nu1, got [{nu0}, {nu1}]"
            )));
        }
        if !(mu0 >= 1.0) {
            return Err(Error::invalid(format!("mu0 must be >= 1, got {mu0}")));
        }
        if spinup_time < 0.0 {
            return Err(Error::invalid("spin-up time must be nonnegative"));
        }
        if !(window.0 < window.1) {
            return Err(Error::invalid(format!(
                "window must satisfy s < t, got [{}, {}]",
                window.0, window.1
            )));
        }
        Ok(AssimConfig {
            n,
            mu0,
            nu0,
            nu1,
            spinup_time,
            window,
            policy,
        })
    }

    /// Nudging gain `mu = mu0 nu0 kappa0^2 N^2`.
    pub fn mu(&self, kappa0: f64) -> f64 {
        self.mu0 * self.nu0 * kappa0 * kappa0 * (self.n as f64).powi(2)
    }

    /// Spin-up long enough that the initialization error decays by `1e-10`
    /// at the Gronwall rate `beta = nu0 kappa0^2 N^2`.
    pub fn default_spinup(nu0: f64, kappa0: f64, n: u32) -> f64 {
        10.0 * std::f64::consts::LN_10 / (nu0 * kappa0 * kappa0 * (n as f64).powi(2))
    }
}

/// A priori bound `M_H(phi)` of the determining map in `C_b(H)`:
/// `sqrt(2) sqrt(|f|^2 / (nu0 kappa0^2)^2 + mu0^2 sup|phi|^2)`.
pub fn m_h(force_l2: f64, sup_data_l2: f64, nu0: f64, kappa0: f64, mu0: f64) -> f64 {
    let denom = nu0 * kappa0 * kappa0;
    std::f64::consts::SQRT_2
        * ((force_l2 / denom).powi(2) + (mu0 * sup_data_l2).powi(2)).sqrt()
}

/// A priori bound `M_V(phi)` in `C_b(V)`; same shape with `V` norms.
pub fn m_v(force_h1: f64, sup_data_h1: f64, nu0: f64, kappa0: f64, mu0: f64) -> f64 {
    m_h(force_h1, sup_data_h1, nu0, kappa0, mu0)
}

/// Well-posedness condition of the determining map:
/// `N >= (8 / (nu0 kappa0)) sqrt(2) (|f|_V / (nu0 kappa0^2 N^2) + mu0 R)`
/// with `R` the data radius in `C_b(V)`.
pub fn det_map_condition(
    n: u32,
    force_h1: f64,
    data_radius_v: f64,
    nu0: f64,
    kappa0: f64,
    mu0: f64,
) -> ConditionCheck {
    let nf = n as f64;
    let rhs = 8.0 / (nu0 * kappa0)
        * std::f64::consts::SQRT_2
        * (force_h1 / (nu0 * kappa0 * kappa0 * nf * nf) + mu0 * data_radius_v);
    ConditionCheck::new("N-determining-map", nf, rhs)
}

/// Piecewise-linear-in-time reconstruction of recorded modal observations.
#[derive(Debug, Clone)]
pub struct DataSignal {
    traj: Trajectory,
    cutoff: u32,
}

impl DataSignal {
    pub fn new(traj: Trajectory) -> Result<Self> {
        let cutoff = traj
            .cutoff
            .ok_or_else(|| Error::invalid("data signal requires a P_N-truncated trajectory"))?;
        traj.validate_uniform()?;
        if traj.len() < 2 {
            return Err(Error::invalid("data signal needs at least two samples"));
        }
        Ok(DataSignal { traj, cutoff })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn range(&self) -> (f64, f64) {
        (self.traj.start_time(), self.traj.end_time())
    }

    /// Linear interpolation between the two bracketing samples. Evaluation
    /// is only defined inside the recorded range (up to roundoff slack).
    pub fn eval(&self, t: f64) -> Result<SpectralField> {
        let (t0, t1) = self.range();
        let h = self.traj.dt_record();
        let slack = 1e-9 * h.max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::InsufficientData {
                need_start: t,
                need_end: t,
                have_start: t0,
                have_end: t1,
            });
        }
        let pos = ((t - t0) / h).clamp(0.0, (self.traj.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.traj.len() - 2);
        let theta = (pos - i as f64).clamp(0.0, 1.0);
        let mut out = self.traj.states[i].scaled(1.0 - theta);
        out.axpy(theta, &self.traj.states[i + 1]);
        Ok(out)
    }

    /// Time derivative of the data at each sample of `[i0, i1]`: centered
    /// second-order differences, one-sided second-order at the window ends.
    pub fn derivative_at_samples(&self, i0: usize, i1: usize) -> Vec<SpectralField> {
        assert!(i1 > i0 && i1 < self.traj.len());
        let h = self.traj.dt_record();
        let s = &self.traj.states;
        let mut out = Vec::with_capacity(i1 - i0 + 1);
        for i in i0..=i1 {
            let mut d = if i == 0 {
                // -3/2 f0 + 2 f1 - 1/2 f2
                let mut d = s[0].scaled(-1.5);
                d.axpy(2.0, &s[1]);
                d.axpy(-0.5, &s[2]);
                d
            } else if i == self.traj.len() - 1 {
                let n = self.traj.len();
                let mut d = s[n - 1].scaled(1.5);
                d.axpy(-2.0, &s[n - 2]);
                d.axpy(0.5, &s[n - 3]);
                d
            } else {
                let mut d = s[i + 1].scaled(0.5);
                d.axpy(-0.5, &s[i - 1]);
                d
            };
            d = d.scaled(1.0 / h);
            out.push(d);
        }
        out
    }

    /// Smallest informative cutoff: the lowest `|k|` carrying data energy,
    /// or `None` when the signal is identically zero. `P_n(phi) = 0` exactly
    /// for all `n <= n0`.
    pub fn n0(&self) -> Option<f64> {
        let tol = 1e-12
            * self
                .traj
                .states
                .iter()
                .fold(0.0f64, |m, s| m.max(s.max_coeff()));
        if tol == 0.0 {
            return None;
        }
        let grid = self.traj.states[0].grid();
        let mut smallest: Option<f64> = None;
        for (i, j, k1, k2) in grid.modes() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let active = self.traj.states.iter().any(|s| {
                s.coeffs()[(0, i, j)].norm() > tol || s.coeffs()[(1, i, j)].norm() > tol
            });
            if active {
                let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
                smallest = Some(smallest.map_or(kk, |s: f64| s.min(kk)));
            }
        }
        smallest
    }
}

/// `P_N` truncation of a full trajectory: the observation transform.
pub fn observe(traj: &Trajectory, n: u32) -> Result<Trajectory> {
    traj.truncated(n)
}

struct NudgedStepper {
    propagator: LinearPropagator,
    force: SpectralField,
    mu: f64,
    dt: f64,
}

impl NudgedStepper {
    fn new(gamma: f64, dt: f64, cfg: &AssimConfig, phys: &PhysicsConfig) -> Result<Self> {
        let mu = cfg.mu(phys.grid.kappa0);
        Ok(NudgedStepper {
            propagator: LinearPropagator::nudged(phys.grid, gamma, mu, cfg.n, dt),
            force: phys.force.build(phys.grid)?,
            mu,
            dt,
        })
    }

    fn slope(&self, v: &SpectralField, t: f64, data: &DataSignal) -> Result<SpectralField> {
        let (advection, speed) = spectral::self_advection(v);
        check_cfl(self.dt, speed, v.grid())?;
        let mut slope = self.force.clone();
        slope.axpy(-1.0, &advection);
        slope.axpy(self.mu, &data.eval(t)?);
        Ok(slope)
    }

    fn step(&self, v: &SpectralField, t: f64, data: &DataSignal) -> Result<SpectralField> {
        let slope1 = self.slope(v, t, data)?;
        let predictor = self.propagator.predict(v, &slope1);
        let slope2 = self.slope(&predictor, t + self.dt, data)?;
        Ok(self.propagator.correct(predictor, &slope1, &slope2))
    }
}

/// One step of `dt` of the nudged system at time `t`. The linear terms
/// `gamma A` and `mu P_N` are treated exactly per mode, `B`, `f` and
/// `mu phi` explicitly.
pub fn nudged_step(
    v: &SpectralField,
    gamma: f64,
    data: &DataSignal,
    t: f64,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<SpectralField> {
    if gamma < cfg.nu0 {
        return Err(Error::invalid(format!(
            "nudged step requires gamma >= nu0, got {gamma} < {}",
            cfg.nu0
        )));
    }
    NudgedStepper::new(gamma, phys.dt, cfg, phys)?.step(v, t, data)
}

pub(crate) fn determining_map_impl(
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
    v0: Option<&SpectralField>,
    bracket: (f64, f64),
) -> Result<Trajectory> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
    }
    ConditionCheck::new("gamma-in-bracket", gamma, bracket.0).enforce(cfg.policy)?;
    ConditionCheck::new("gamma-in-bracket", bracket.1, gamma).enforce(cfg.policy)?;

    let traj = data.trajectory();
    let (w0, w1) = traj.window_indices(cfg.window.0, cfg.window.1)?;
    let h = traj.dt_record();

    // Sufficient condition for W to be well-defined, from the data radius.
    let force = phys.force.build(phys.grid)?;
    let radius = traj.states[..=w1]
        .iter()
        .fold(0.0f64, |m, s| m.max(s.h1_norm()));
    det_map_condition(cfg.n, force.h1_norm(), radius, cfg.nu0, phys.grid.kappa0, cfg.mu0)
        .enforce(cfg.policy)?;

    // Start at the latest sample at or before s - spinup_time.
    let start_needed = traj.times[w0] - cfg.spinup_time;
    if start_needed < traj.start_time() - 1e-9 * h.max(1.0) {
        return Err(Error::InsufficientData {
            need_start: start_needed,
            need_end: traj.times[w1],
            have_start: traj.start_time(),
            have_end: traj.end_time(),
        });
    }
    let i_init = ((start_needed - traj.start_time()) / h + 1e-9).floor() as usize;

    let n_sub = ((h / phys.dt - 1e-9).ceil() as usize).max(1);
    let dt_eff = h / n_sub as f64;
    let stepper = NudgedStepper::new(gamma, dt_eff, cfg, phys)?;

    let mut v = match v0 {
        Some(field) => field.clone(),
        None => SpectralField::zeros(phys.grid),
    };
    let mut times = Vec::new();
    let mut states = Vec::new();
    for i in i_init..=w1 {
        if i >= w0 {
            times.push(traj.times[i]);
            states.push(v.clone());
        }
        if i < w1 {
            for sub in 0..n_sub {
                let t_local = traj.times[i] + sub as f64 * dt_eff;
                v = stepper.step(&v, t_local, data)?;
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        cutoff: None,
        transient_count: 0,
        nu: None,
        force: Some(phys.force.clone()),
    })
}

/// Approximates the determining map `W(gamma, phi)` on the configured window:
/// integrates the nudged system from `v = 0` starting `spinup_time` before
/// the window and returns the restriction to `[s, t]`, sampled at the data
/// cadence. The initialization error is bounded by
/// `e^{-beta spinup_time} M_H(phi)` with `beta = nu0 kappa0^2 N^2`.
pub fn determining_map(
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<Trajectory> {
    determining_map_impl(gamma, data, cfg, phys, None, (cfg.nu0, cfg.nu1))
}

/// Same as [`determining_map`] with an explicit initial field; exposed so the
/// exponential-forgetting contract is directly measurable.
pub fn determining_map_with_initial(
    v0: &SpectralField,
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<Trajectory> {
    determining_map_impl(gamma, data, cfg, phys, Some(v0), (cfg.nu0, cfg.nu1))
}

/// Result of a two-viscosity Lipschitz probe: the measured deviation and the
/// Corollary bound (`p = 0`, identical data) it must respect.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzProbe {
    /// `sup_[s,t] |v1 - v2|` over the window samples.
    pub measured: f64,
    /// `sqrt(5 |g1 - g2|^2 / ((g1+g2)/2) * sup ||(v1+v2)/2||^2 / (nu0 kappa0^2 N^2))`.
    pub bound: f64,
}

/// Runs the determining map at two viscosities against shared data and
/// checks the Lipschitz estimate with the measured mean `V` norm.
pub fn lipschitz_probe(
    gamma1: f64,
    gamma2: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<LipschitzProbe> {
    let force = phys.force.build(phys.grid)?;
    let traj = data.trajectory();
    let (_, w1) = traj.window_indices(cfg.window.0, cfg.window.1)?;
    let sup_v = traj.states[..=w1]
        .iter()
        .fold(0.0f64, |m, s| m.max(s.h1_norm()));
    let mv = m_v(force.h1_norm(), sup_v, cfg.nu0, phys.grid.kappa0, cfg.mu0);
    ConditionCheck::new("mu0-bracket-ratio", cfg.mu0, cfg.nu1 / cfg.nu0).enforce(cfg.policy)?;
    ConditionCheck::new(
        "N-lipschitz",
        cfg.n as f64,
        8.0 / (cfg.nu0 * phys.grid.kappa0) * mv,
    )
    .enforce(cfg.policy)?;

    let v1 = determining_map(gamma1, data, cfg, phys)?;
    let v2 = determining_map(gamma2, data, cfg, phys)?;
    let mut measured = 0.0f64;
    let mut sup_mean_v = 0.0f64;
    for (a, b) in v1.states.iter().zip(v2.states.iter()) {
        measured = measured.max((a - b).l2_norm());
        let mut mean = a.scaled(0.5);
        mean.axpy(0.5, b);
        sup_mean_v = sup_mean_v.max(mean.h1_norm());
    }
    let kappa0 = phys.grid.kappa0;
    let gbar = 0.5 * (gamma1 + gamma2);
    let bound_sq = 5.0 * (gamma1 - gamma2).powi(2) / gbar * sup_mean_v.powi(2)
        / (cfg.nu0 * kappa0 * kappa0 * (cfg.n as f64).powi(2));
    let probe = LipschitzProbe {
        measured,
        bound: bound_sq.sqrt(),
    };
    if gamma1 != gamma2 {
        ConditionCheck::new("lipschitz-bound", probe.bound, probe.measured)
            .enforce(cfg.policy)?;
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ForceSpec;
    use crate::spectral::TorusGrid;
    use num_complex::Complex64;

    fn grid() -> TorusGrid {
        TorusGrid::new(2.0 * std::f64::consts::PI, 16).unwrap()
    }

    /// Constant-in-time observations of the stationary single-mode solution
    /// `u = f / (nu kappa0^2 |k|^2)`.
    fn stationary_data(
        nu: f64,
        k: (i64, i64),
        amp: f64,
        n: u32,
        t_end: f64,
        h: f64,
    ) -> (PhysicsConfig, DataSignal, SpectralField) {
        let g = grid();
        let lambda = g.stokes_eigenvalue(k.0, k.1);
        let force = ForceSpec::SingleMode {
            k: [k.0, k.1],
            amplitude: [amp * nu * lambda, 0.0],
        };
        let u = SpectralField::single_mode(g, k, Complex64::new(amp, 0.0)).unwrap();
        let phys = PhysicsConfig::new(g, nu, force, 0.01, 0.0).unwrap();
        let count = (t_end / h).round() as usize + 1;
        let obs = u.modal_project(n).unwrap();
        let traj = Trajectory {
            times: (0..count).map(|i| i as f64 * h).collect(),
            states: vec![obs; count],
            cutoff: Some(n),
            transient_count: 0,
            nu: Some(nu),
            force: Some(phys.force.clone()),
        };
        (phys, DataSignal::new(traj).unwrap(), u)
    }

    fn advisory(n: u32, nu0: f64, nu1: f64, spinup: f64, window: (f64, f64), mu0: f64) -> AssimConfig {
        AssimConfig::new(n, mu0, nu0, nu1, spinup, window, ConditionPolicy::Advisory).unwrap()
    }

    #[test]
    fn config_invariants() {
        assert!(AssimConfig::new(0, 2.0, 0.1, 0.2, 1.0, (0.0, 1.0), ConditionPolicy::Strict).is_err());
        assert!(AssimConfig::new(4, 0.5, 0.1, 0.2, 1.0, (0.0, 1.0), ConditionPolicy::Strict).is_err());
        assert!(AssimConfig::new(4, 2.0, 0.2, 0.1, 1.0, (0.0, 1.0), ConditionPolicy::Strict).is_err());
        let cfg = advisory(4, 0.05, 0.5, 1.0, (0.0, 1.0), 2.0);
        assert!((cfg.mu(1.0) - 2.0 * 0.05 * 16.0).abs() < 1e-14);
    }

    #[test]
    fn truth_is_a_fixed_point_of_the_nudged_step() {
        let nu = 0.1;
        let (phys, data, u) = stationary_data(nu, (1, 0), 0.8, 4, 2.0, 0.1);
        let cfg = advisory(4, 0.05, 0.5, 0.0, (0.0, 2.0), 2.0);
        let mut v = u.clone();
        for i in 0..20 {
            v = nudged_step(&v, nu, &data, i as f64 * phys.dt, &cfg, &phys).unwrap();
        }
        assert!((&v - &u).l2_norm() <= 1e-10 * u.l2_norm());
    }

    #[test]
    fn large_gain_pins_observed_modes_to_the_data() {
        let (phys, data, u) = stationary_data(0.1, (1, 0), 0.6, 4, 40.0, 0.5);
        let cfg = advisory(4, 400.0, 0.05, 0.5, 0.0, (0.0, 40.0), 2.0);
        let gamma = 0.3;
        let mut v = SpectralField::zeros(grid());
        let mut t = 0.0;
        while t < 30.0 {
            v = nudged_step(&v, gamma, &data, t, &cfg, &phys).unwrap();
            t += phys.dt;
        }
        let observed = v.modal_project(4).unwrap();
        let target = u.modal_project(4).unwrap();
        // mu >> 1: fixed point (f + mu phi) / (gamma kappa^2 |k|^2 + mu) -> phi.
        assert!(
            (&observed - &target).l2_norm() <= 2e-2 * target.l2_norm(),
            "err {}",
            (&observed - &target).l2_norm() / target.l2_norm()
        );
    }

    #[test]
    fn unforced_undriven_nudge_decays() {
        let g = grid();
        let n = 3u32;
        let zero_obs = SpectralField::zeros(g).modal_project(n).unwrap();
        let traj = Trajectory {
            times: vec![0.0, 50.0],
            states: vec![zero_obs.clone(), zero_obs],
            cutoff: Some(n),
            transient_count: 0,
            nu: None,
            force: None,
        };
        let data = DataSignal::new(traj).unwrap();
        let phys = PhysicsConfig::new(g, 0.2, ForceSpec::zero(), 0.01, 0.0).unwrap();
        let cfg = advisory(n, 0.1, 0.5, 0.0, (0.0, 50.0), 2.0);
        let gamma = 0.2;
        let v0 = SpectralField::random_div_free(g, 9, 4.0, 1.5).scaled(0.05);
        let mut v = v0.clone();
        let t_end = 5.0;
        let steps = (t_end / phys.dt) as usize;
        for i in 0..steps {
            v = nudged_step(&v, gamma, &data, i as f64 * phys.dt, &cfg, &phys).unwrap();
        }
        let rate = (gamma * g.kappa0 * g.kappa0).min(cfg.mu(g.kappa0));
        assert!(v.l2_norm() <= v0.l2_norm() * (-rate * t_end / 2.0).exp());
    }

    #[test]
    fn determining_map_matches_the_closed_form_fixed_point() {
        let nu = 0.1;
        let n = 4u32;
        let k = (1i64, 0i64);
        let (phys, data, u) = stationary_data(nu, k, 0.8, n, 30.0, 0.05);
        let cfg = advisory(n, 0.05, 0.5, 12.0, (14.0, 20.0), 10.0);
        let mu = cfg.mu(phys.grid.kappa0);
        let force = phys.force.build(phys.grid).unwrap();
        for gamma in [0.05, 0.12, 0.2, 0.35, 0.5] {
            let w = determining_map(gamma, &data, &cfg, &phys).unwrap();
            let lambda = phys.grid.stokes_eigenvalue(k.0, k.1);
            let expected_coeff = |c: usize| {
                (force.coeff(k.0, k.1)[c] + mu * u.coeff(k.0, k.1)[c]) / (gamma * lambda + mu)
            };
            for state in &w.states {
                let got = state.coeff(k.0, k.1);
                for c in 0..2 {
                    assert!(
                        (got[c] - expected_coeff(c)).norm() <= 1e-8 * u.l2_norm(),
                        "gamma {gamma}: coefficient mismatch {:?}",
                        (got[c] - expected_coeff(c)).norm()
                    );
                }
            }
            // Lemma bounds: sup |v| <= M_H(phi), sup ||v|| <= M_V(phi).
            let sup_h = w.states.iter().fold(0.0f64, |m, s| m.max(s.l2_norm()));
            let sup_v = w.states.iter().fold(0.0f64, |m, s| m.max(s.h1_norm()));
            let obs_sup_h = data.trajectory().states.iter().fold(0.0f64, |m, s| m.max(s.l2_norm()));
            let obs_sup_v = data.trajectory().states.iter().fold(0.0f64, |m, s| m.max(s.h1_norm()));
            let kappa0 = phys.grid.kappa0;
            assert!(sup_h <= m_h(force.l2_norm(), obs_sup_h, cfg.nu0, kappa0, cfg.mu0));
            assert!(sup_v <= m_v(force.h1_norm(), obs_sup_v, cfg.nu0, kappa0, cfg.mu0));
        }
    }

    #[test]
    fn exponential_forgetting_of_the_initial_field() {
        let nu = 0.1;
        let n = 4u32;
        let (phys, data, _) = stationary_data(nu, (1, 0), 0.05, n, 30.0, 0.05);
        let spinup = 8.0;
        let cfg = advisory(n, 0.05, 0.5, spinup, (10.0, 12.0), 10.0);
        let gamma = 0.3;
        let from_zero = determining_map(gamma, &data, &cfg, &phys).unwrap();
        let v0 = SpectralField::random_div_free(phys.grid, 3, 4.0, 1.0).scaled(0.02);
        let from_random =
            determining_map_with_initial(&v0, gamma, &data, &cfg, &phys).unwrap();
        let diff = (&from_zero.states[0] - &from_random.states[0]).l2_norm();
        let beta = cfg.nu0 * phys.grid.kappa0.powi(2) * (n as f64).powi(2);
        assert!(
            diff <= (-beta * spinup).exp() * v0.l2_norm(),
            "forgetting too slow: {diff} vs {}",
            (-beta * spinup).exp() * v0.l2_norm()
        );
    }

    #[test]
    fn insufficient_data_range_is_reported() {
        let (phys, data, _) = stationary_data(0.1, (1, 0), 0.8, 4, 5.0, 0.1);
        let cfg = advisory(4, 0.05, 0.5, 10.0, (2.0, 4.0), 2.0);
        match determining_map(0.1, &data, &cfg, &phys) {
            Err(Error::InsufficientData { .. }) => {}
            other => panic!("expected insufficient-data error, got {other:?}"),
        }
    }

    #[test]
    fn strict_mode_rejects_gamma_outside_bracket() {
        let (phys, data, _) = stationary_data(0.1, (1, 0), 0.8, 4, 30.0, 0.1);
        let mut cfg = advisory(4, 0.05, 0.5, 5.0, (10.0, 15.0), 2.0);
        cfg.policy = ConditionPolicy::Strict;
        match determining_map(0.6, &data, &cfg, &phys) {
            Err(Error::ConditionFailed { name, .. }) => assert_eq!(name, "gamma-in-bracket"),
            other => panic!("expected bracket rejection, got {other:?}"),
        }
        assert!(determining_map(-0.1, &data, &cfg, &phys).is_err());
    }

    #[test]
    fn lipschitz_probe_single_mode_closed_form() {
        let nu = 1.0;
        let n = 8u32;
        let k = (1i64, 0i64);
        let amp = 0.004;
        let (phys, data, u) = stationary_data(nu, k, amp, n, 30.0, 0.05);
        // Weak data: the corollary conditions pass strictly.
        let cfg = AssimConfig::new(
            n,
            1.3,
            0.9,
            1.1,
            12.0,
            (14.0, 18.0),
            ConditionPolicy::Strict,
        )
        .unwrap();
        let (g1, g2) = (0.95, 1.05);
        let probe = lipschitz_probe(g1, g2, &data, &cfg, &phys).unwrap();
        let mu = cfg.mu(phys.grid.kappa0);
        let lambda = phys.grid.stokes_eigenvalue(k.0, k.1);
        let force = phys.force.build(phys.grid).unwrap();
        let mut fm = force.clone();
        fm.axpy(mu, &u.modal_project(n).unwrap());
        let expected = fm.l2_norm() * (g1 - g2).abs() * lambda
            / ((g1 * lambda + mu) * (g2 * lambda + mu));
        assert!(
            (probe.measured - expected).abs() <= 1e-6 * expected,
            "measured {} vs closed form {expected}",
            probe.measured
        );
        assert!(probe.measured <= probe.bound);

        let same = lipschitz_probe(0.95, 0.95, &data, &cfg, &phys).unwrap();
        assert!(same.measured <= 1e-10 * u.l2_norm());
    }

    #[test]
    fn monotone_gain_does_not_hurt_truth_tracking() {
        let nu = 0.1;
        let n = 4u32;
        let mut errs = Vec::new();
        for mu0 in [2.0, 4.0, 8.0] {
            let (phys, data, u) = stationary_data(nu, (1, 0), 0.8, n, 30.0, 0.05);
            let cfg = advisory(n, 0.05, 0.5, 6.0, (8.0, 12.0), mu0);
            let w = determining_map(nu, &data, &cfg, &phys).unwrap();
            let err = w
                .states
                .iter()
                .fold(0.0f64, |m, s| m.max((s - &u).l2_norm()));
            errs.push(err);
        }
        assert!(errs[1] <= errs[0] * 1.05 + 1e-14);
        assert!(errs[2] <= errs[1] * 1.05 + 1e-14);
    }

    #[test]
    fn n0_detects_the_smallest_active_mode() {
        let (_, data, _) = stationary_data(0.1, (1, 0), 0.8, 4, 1.0, 0.1);
        assert_eq!(data.n0(), Some(1.0));
        let (_, data5, _) = stationary_data(0.1, (5, 0), 0.8, 8, 1.0, 0.1);
        assert_eq!(data5.n0(), Some(5.0));
        // Single-mode data with |k| >= N truncates to nothing.
        let (_, empty, _) = stationary_data(0.1, (5, 0), 0.8, 4, 1.0, 0.1);
        assert_eq!(empty.n0(), None);
    }
}
