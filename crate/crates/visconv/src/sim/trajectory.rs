//! Uniformly sampled time series of spectral fields.

use crate::error::{Error, Result};
use crate::sim::ForceSpec;
use crate::spectral::SpectralField;

/// A uniformly sampled trajectory, either full-state or `P_N`-truncated
/// observations (`cutoff = Some(N)`, in which case every stored state
/// vanishes on `|k| >= N`).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub cutoff: Option<u32>,
    /// Number of leading samples inside the configured spin-up transient.
    pub transient_count: usize,
    /// Viscosity used to generate the data, when known.
    pub nu: Option<f64>,
    /// Forcing used to generate the data, when known.
    pub force: Option<ForceSpec>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Recording cadence; trajectories are uniform by construction.
    pub fn dt_record(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        (self.end_time() - self.start_time()) / (self.times.len() - 1) as f64
    }

    pub fn validate_uniform(&self) -> Result<()> {
        if self.times.len() != self.states.len() {
            return Err(Error::Format("times / states length mismatch".into()));
        }
        if self.times.len() >= 2 {
            let h = self.dt_record();
            for w in self.times.windows(2) {
                if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                    return Err(Error::Format("sample times are not uniform".into()));
                }
            }
            if h <= 0.0 {
                return Err(Error::Format("sample times are not increasing".into()));
            }
        }
        Ok(())
    }

    /// Index of the sample closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        if self.times.len() < 2 {
            return 0;
        }
        let h = self.dt_record();
        let raw = ((t - self.start_time()) / h).round();
        (raw.max(0.0) as usize).min(self.times.len() - 1)
    }

    /// Indices spanning the window `[s, t]`, snapped to the sample grid.
    pub fn window_indices(&self, s: f64, t: f64) -> Result<(usize, usize)> {
        if self.is_empty() {
            return Err(Error::invalid("empty trajectory"));
        }
        let h = self.dt_record().max(f64::EPSILON);
        if s < self.start_time() - 0.5 * h || t > self.end_time() + 0.5 * h || s >= t {
            return Err(Error::InsufficientData {
                need_start: s,
                need_end: t,
                have_start: self.start_time(),
                have_end: self.end_time(),
            });
        }
        let i = self.nearest_index(s);
        let j = self.nearest_index(t);
        if i >= j {
            return Err(Error::invalid(format!(
                "window [{s}, {t}] spans fewer than two samples at cadence {h}"
            )));
        }
        Ok((i, j))
    }

    /// `P_N` truncation of every state; the observation transform.
    pub fn truncated(&self, n: u32) -> Result<Trajectory> {
        let states = self
            .states
            .iter()
            .map(|u| u.modal_project(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: self.times.clone(),
            states,
            cutoff: Some(n),
            transient_count: self.transient_count,
            nu: self.nu,
            force: self.force.clone(),
        })
    }

    /// Every `stride`-th sample.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        assert!(stride >= 1);
        Trajectory {
            times: self.times.iter().copied().step_by(stride).collect(),
            states: self.states.iter().cloned().step_by(stride).collect(),
            cutoff: self.cutoff,
            transient_count: self.transient_count.div_ceil(stride),
            nu: self.nu,
            force: self.force.clone(),
        }
    }
}
