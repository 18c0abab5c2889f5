//! Spin-velocity field `v(t, x) = a(t) e(x)`.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, WireGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    Constant { value: f64 },
    /// `value` on `[t_on, t_off)`, zero elsewhere.
    Pulse { value: f64, t_on: f64, t_off: f64 },
    /// Piecewise linear through `(times[i], values[i])`, held constant
    /// outside the table.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinVelocity {
    pub profile: VelocityProfile,
    /// Width of an optional Gaussian envelope `exp(−x²/(2S²))`; uniform in
    /// space when `None`.
    pub envelope_width: Option<f64>,
}

impl Default for SpinVelocity {
    fn default() -> Self {
        Self::zero()
    }
}

impl SpinVelocity {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self { profile: VelocityProfile::Constant { value }, envelope_width: None }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.envelope_width {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidVelocity(format!("envelope width must be > 0, got {s}")));
            }
        }
        match &self.profile {
            VelocityProfile::Constant { value } if !value.is_finite() => {
                Err(Error::InvalidVelocity("value must be finite".into()))
            }
            VelocityProfile::Pulse { value, t_on, t_off } => {
                if !(value.is_finite() && t_on.is_finite() && t_off.is_finite() && t_on <= t_off) {
                    Err(Error::InvalidVelocity("pulse needs finite value and t_on <= t_off".into()))
                } else {
                    Ok(())
                }
            }
            VelocityProfile::Tabulated { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidVelocity("table needs equally many (>= 1) times and values".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidVelocity("table times must be strictly increasing".into()));
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidVelocity("table entries must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        match &self.profile {
            VelocityProfile::Constant { value } => *value,
            VelocityProfile::Pulse { value, t_on, t_off } => {
                if t >= *t_on && t < *t_off {
                    *value
                } else {
                    0.0
                }
            }
            VelocityProfile::Tabulated { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[times.len() - 1]
                } else {
                    let (t0, t1) = (times[i - 1], times[i]);
                    let w = (t - t0) / (t1 - t0);
                    values[i - 1] + w * (values[i] - values[i - 1])
                }
            }
        }
    }

    pub fn envelope(&self, x: f64) -> f64 {
        match self.envelope_width {
            None => 1.0,
            Some(s) => (-x * x / (2.0 * s * s)).exp(),
        }
    }

    /// `v(t)` restricted to the grid.
    pub fn at(&self, t: f64, grid: &WireGrid) -> ScalarField {
        let a = self.amplitude(t);
        ScalarField::from_fn(grid, |x| a * self.envelope(x))
    }

    pub fn is_zero(&self) -> bool {
        match &self.profile {
            VelocityProfile::Constant { value } | VelocityProfile::Pulse { value, .. } => *value == 0.0,
            VelocityProfile::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// `C_v = sup_t |v(t)|_∞`.
    pub fn c_v(&self) -> f64 {
        // the envelope peaks at 1
        match &self.profile {
            VelocityProfile::Constant { value } | VelocityProfile::Pulse { value, .. } => value.abs(),
            VelocityProfile::Tabulated { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}
