use crate::error::{Error, Result};
use crate::model::{DriveProtocol, ModelParams};
use crate::propagator::{evolve, IntegratorOptions, SpinState, Trajectory};

use super::SweepEngine;

/// Magnetization traces for several pulse lengths (`f64::INFINITY` gives the
/// continuous-wave curve), all started from the adiabatic ground state at
/// `v_dc`.
#[allow(clippy::too_many_arguments)]
pub fn pulse_trace(
    params: &ModelParams,
    v_dc: f64,
    v_rf: f64,
    f: f64,
    t_pump_list: &[f64],
    t_end: f64,
    opts: &IntegratorOptions,
    engine: &SweepEngine,
) -> Result<Vec<Trajectory>> {
    if t_pump_list.is_empty() {
        return Err(Error::domain(
            "t_pump_list",
            "at least one pulse length is required",
        ));
    }
    let protocols = t_pump_list
        .iter()
        .map(|&tp| DriveProtocol::pulse(v_dc, v_rf, f, tp))
        .collect::<Result<Vec<_>>>()?;
    // identical for every entry: V(0) = V_dc regardless of the pulse length
    let psi0 = SpinState::adiabatic_ground(params, &protocols[0]);
    engine.run(protocols.len(), |i| {
        evolve(params, &protocols[i], psi0, t_end, opts)
    })
}

/// First time at which ⟨S_z⟩ reaches its most reversed value relative to
/// its starting sign, searched over `t ≤ horizon`. Returns `(t, sz)`.
pub fn reversal_time(trajectory: &Trajectory, horizon: f64) -> Option<(f64, f64)> {
    let first = trajectory.samples.first()?;
    let sign = if first.sz >= 0.0 { 1.0 } else { -1.0 };
    trajectory
        .samples
        .iter()
        .filter(|s| s.t <= horizon)
        .min_by(|a, b| (sign * a.sz).total_cmp(&(sign * b.sz)))
        .map(|s| (s.t, s.sz))
}
