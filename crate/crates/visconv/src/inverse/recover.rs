//! The loss functional, the viscosity update map `Gamma`, and the
//! fixed-point recovery loop.
//!
//! For a guess `gamma`, one evaluation runs the determining map
//! `v = W(gamma, P_N u)`, forms the observable error `psi = P_N u - P_N v`,
//! and combines exponentially weighted inner products of `psi` with the data
//! and its time derivative:
//!
//! ```text
//! c1 = ( <A^-1 psi(t), P_N u(t)> - e^{-mu (t-s)} <A^-1 psi(s), P_N u(s)> ) / (t-s)
//! c2 = - < <A^-1 psi, d/dt P_N u> >
//! c3 = gamma < <psi, P_N u> >
//! Gamma(gamma) = gamma - (c1 + c2 + c3) / < |P_N u|^2 >
//! ```
//!
//! `Gamma` fixes the true viscosity and contracts towards it whenever the
//! sufficiency conditions hold; the loop below iterates it with the
//! residual-based stopping rule.

use serde::Serialize;

use crate::assim::{determining_map_impl, AssimConfig, DataSignal};
use crate::error::{Error, Result};
use crate::inverse::average::exp_weighted_average;
use crate::sim::PhysicsConfig;

/// `L(gamma) = sup over window samples of |P_N W(gamma, P_N u) - P_N u|`.
pub fn loss(
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<f64> {
    Ok(evaluate_gamma(gamma, data, cfg, phys, (cfg.nu0, cfg.nu1))?.loss)
}

/// One application of the update map `Gamma`.
pub fn gamma_update(
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
) -> Result<f64> {
    Ok(evaluate_gamma(gamma, data, cfg, phys, (cfg.nu0, cfg.nu1))?.next)
}

pub(crate) struct GammaStep {
    pub next: f64,
    pub loss: f64,
}

pub(crate) fn evaluate_gamma(
    gamma: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
    bracket: (f64, f64),
) -> Result<GammaStep> {
    let traj = data.trajectory();
    let (w0, w1) = traj.window_indices(cfg.window.0, cfg.window.1)?;
    let times = &traj.times[w0..=w1];
    let mu = cfg.mu(phys.grid.kappa0);

    // A-priori denominator check: the weighted data energy is computable
    // before any solve, and a zero value means the observations carry no
    // information below the cutoff (the n0 >= N pathology).
    let energy: Vec<f64> = traj.states[w0..=w1]
        .iter()
        .map(|phi| phi.l2_norm().powi(2))
        .collect();
    let denominator = exp_weighted_average(&energy, times, mu)?;
    if denominator <= 0.0 {
        return Err(Error::DegenerateData {
            window_start: times[0],
            window_end: times[times.len() - 1],
            n0: data.n0(),
            cutoff: data.cutoff(),
        });
    }

    let v_traj = determining_map_impl(gamma, data, cfg, phys, None, bracket)?;
    debug_assert_eq!(v_traj.len(), times.len());

    let mut psi = Vec::with_capacity(times.len());
    let mut loss = 0.0f64;
    for (phi, v) in traj.states[w0..=w1].iter().zip(v_traj.states.iter()) {
        let e = phi - &v.modal_project(cfg.n)?;
        loss = loss.max(e.l2_norm());
        psi.push(e);
    }

    let span = times[times.len() - 1] - times[0];
    let a_inv_psi_last = psi[psi.len() - 1].apply_inverse_stokes();
    let a_inv_psi_first = psi[0].apply_inverse_stokes();
    let c1 = (a_inv_psi_last.h_inner(&traj.states[w1])?
        - (-mu * span).exp() * a_inv_psi_first.h_inner(&traj.states[w0])?)
        / span;

    let dphi = data.derivative_at_samples(w0, w1);
    let mut series2 = Vec::with_capacity(times.len());
    let mut series3 = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        series2.push(psi[i].apply_inverse_stokes().h_inner(&dphi[i])?);
        series3.push(psi[i].h_inner(&traj.states[w0 + i])?);
    }
    let c2 = -exp_weighted_average(&series2, times, mu)?;
    let c3 = gamma * exp_weighted_average(&series3, times, mu)?;

    Ok(GammaStep {
        next: gamma - (c1 + c2 + c3) / denominator,
        loss,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryStatus {
    Running,
    Converged,
    ConditionFailed,
    MaxIter,
}

/// Iteration record of the fixed-point recovery.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryState {
    /// Viscosity iterates, starting with `gamma0`.
    pub gamma_history: Vec<f64>,
    /// `L(gamma_k)` aligned with `gamma_history`.
    pub loss_history: Vec<f64>,
    /// Successive-update ratios `|g_{k+1} - g_k| / |g_k - g_{k-1}|`.
    pub contraction_estimates: Vec<f64>,
    /// Wall-clock seconds per iteration.
    pub wall_times: Vec<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub status: RecoveryStatus,
}

impl RecoveryState {
    pub fn final_gamma(&self) -> f64 {
        *self.gamma_history.last().unwrap()
    }
}

/// Iterates `Gamma` from `gamma0` until the residual stopping rule
/// `|gamma_k+1 - gamma_k| / (nu1 - nu0) <= eps2 / (nu1 - nu0 + eps1)`
/// fires (which certifies `|gamma - nu| <= eps2` under the contraction
/// conditions) or `max_iter` is reached. Iterates must stay inside
/// `[nu0 - eps1, nu1 + eps1]`; escaping the bracket is reported as a
/// condition failure rather than clamped away.
pub fn recover_viscosity(
    gamma0: f64,
    data: &DataSignal,
    cfg: &AssimConfig,
    phys: &PhysicsConfig,
    eps1: f64,
    eps2: f64,
    max_iter: usize,
) -> Result<RecoveryState> {
    if !(eps1 > 0.0 && eps1 < cfg.nu0) {
        return Err(Error::invalid(format!(
            "eps1 must lie in (0, nu0) = (0, {}), got {eps1}",
            cfg.nu0
        )));
    }
    if !(eps2 > 0.0) {
        return Err(Error::invalid(format!("eps2 must be positive, got {eps2}")));
    }
    let bracket = (cfg.nu0 - eps1, cfg.nu1 + eps1);
    if gamma0 < bracket.0 || gamma0 > bracket.1 {
        return Err(Error::invalid(format!(
            "gamma0 = {gamma0} outside the feasible bracket [{}, {}]",
            bracket.0, bracket.1
        )));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be >= 1"));
    }

    let mut state = RecoveryState {
        gamma_history: vec![gamma0],
        loss_history: Vec::new(),
        contraction_estimates: Vec::new(),
        wall_times: Vec::new(),
        eps1,
        eps2,
        status: RecoveryStatus::Running,
    };
    let threshold = eps2 / (cfg.nu1 - cfg.nu0 + eps1);

    for _ in 0..max_iter {
        let clock = std::time::Instant::now();
        let gamma = state.final_gamma();
        let step = evaluate_gamma(gamma, data, cfg, phys, bracket)?;
        state.wall_times.push(clock.elapsed().as_secs_f64());
        state.loss_history.push(step.loss);

        let n = state.gamma_history.len();
        if n >= 2 {
            let prev = (state.gamma_history[n - 1] - state.gamma_history[n - 2]).abs();
            if prev > 0.0 {
                state
                    .contraction_estimates
                    .push((step.next - gamma).abs() / prev);
            }
        }
        state.gamma_history.push(step.next);

        if step.next < bracket.0 || step.next > bracket.1 || !step.next.is_finite() {
            state.status = RecoveryStatus::ConditionFailed;
            return Ok(state);
        }
        if (step.next - gamma).abs() / (cfg.nu1 - cfg.nu0) <= threshold {
            state.status = RecoveryStatus::Converged;
            return Ok(state);
        }
    }
    state.status = RecoveryStatus::MaxIter;
    Ok(state)
}
