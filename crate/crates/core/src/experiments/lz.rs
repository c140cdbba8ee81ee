use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::LZParams;
use crate::error::{ensure_finite, Error, Result};
use crate::format;
use crate::model::{self, DriveProtocol, ModelParams};
use crate::propagator::{evolve_final, IntegratorOptions, SpinState};

use super::io::read_csv_columns;
use super::SweepEngine;

pub const LZ_CSV: &str = "lz.csv";

/// Smallest total bias excursion `|κ(v_end − v_start)|` accepted, in units of Δ.
pub const LZ_MIN_SPAN_IN_DELTA: f64 = 20.0;

/// Default bias excursion on each side of the crossing, in units of Δ. The
/// finite-window error in the adiabatic regime scales as `ε_end⁻³`; at 40Δ it
/// stays below 10⁻³ relative up to δ_l = 2.
pub const LZ_DEFAULT_HALF_SPAN_IN_DELTA: f64 = 40.0;

/// Linear ramp through the avoided crossing. Returns the diabatic-passage
/// (survival) probability.
///
/// The system starts in the adiabatic ground state at `v_start`. Survival is
/// read as the final population of the adiabatic level that continues the
/// initial diabatic state, i.e. the projection onto the instantaneous
/// eigenbasis at `v_end`. Projecting onto the diabatic basis instead would
/// add the static admixture `≈ (Δ/2ε_end)²`, which dwarfs the LZ probability
/// in the adiabatic regime.
pub fn lz_sweep(
    params: &ModelParams,
    v_start: f64,
    v_end: f64,
    sweep_rate: f64,
    opts: &IntegratorOptions,
) -> Result<f64> {
    ensure_finite("v_start", v_start)?;
    ensure_finite("v_end", v_end)?;
    ensure_finite("sweep_rate", sweep_rate)?;
    if v_end <= v_start {
        return Err(Error::domain(
            "v_end",
            "ramp must run upward (v_end > v_start)",
        ));
    }
    if sweep_rate <= 0.0 {
        return Err(Error::domain(
            "sweep_rate",
            format!("must be > 0, got {sweep_rate}"),
        ));
    }
    let (e_start, e_end) = (model::bias(params, v_start)?, model::bias(params, v_end)?);
    if !(e_start < 0.0 && e_end > 0.0) && !(e_start > 0.0 && e_end < 0.0) {
        return Err(Error::domain(
            "v_start",
            format!("crossing (ε = 0) is not strictly inside [{v_start}, {v_end}] V"),
        ));
    }
    let span = (params.kappa() * (v_end - v_start)).abs();
    if span < LZ_MIN_SPAN_IN_DELTA * params.delta0() {
        return Err(Error::domain(
            "v_end",
            format!("bias span {span} GHz is below {LZ_MIN_SPAN_IN_DELTA}Δ"),
        ));
    }

    let duration = (v_end - v_start) / sweep_rate;
    let protocol = DriveProtocol::linear_ramp(v_start, sweep_rate, duration)?;
    let psi0 = SpinState::adiabatic_ground(params, &protocol);
    let psi = evolve_final(params, &protocol, psi0, duration, opts)?;

    let h_end = model::hamiltonian(params, &protocol, duration)?;
    let (ground, excited) = (SpinState::ground_of(&h_end), SpinState::excited_of(&h_end));
    let starts_up = psi0.p_plus() >= psi0.p_minus();
    let weight = |s: &SpinState| if starts_up { s.p_plus() } else { s.p_minus() };
    let continuation = if weight(&excited) >= weight(&ground) {
        excited
    } else {
        ground
    };
    Ok(psi.overlap_sqr(&continuation))
}

/// Voltage window placing the crossing in the middle with
/// `|ε| ≥ half_span_in_delta·Δ` at both ends (linear bias only).
pub fn lz_window(params: &ModelParams, half_span_in_delta: f64) -> (f64, f64) {
    let crossing = -params.epsilon_offset() / params.kappa();
    let half = half_span_in_delta * params.delta0() / params.kappa();
    (crossing - half, crossing + half)
}

/// Voltage sweep rate (V/ns) giving adiabaticity `delta_l`.
pub fn sweep_rate_for_adiabaticity(params: &ModelParams, delta_l: f64) -> Result<f64> {
    let lz = LZParams::from_adiabaticity(params.delta0(), delta_l)?;
    Ok(lz.bias_sweep_rate() / params.kappa())
}

/// Runs [`lz_sweep`] for each rate; returns `(rate, survival)` pairs in input
/// order.
pub fn lz_series(
    params: &ModelParams,
    v_start: f64,
    v_end: f64,
    rates: &[f64],
    opts: &IntegratorOptions,
    engine: &SweepEngine,
) -> Result<Vec<(f64, f64)>> {
    let survivals = engine.run(rates.len(), |i| {
        lz_sweep(params, v_start, v_end, rates[i], opts)
    })?;
    Ok(rates.iter().copied().zip(survivals).collect())
}

pub fn lz_csv_string(runs: &[(f64, f64)]) -> String {
    let mut out = String::from("sweep_rate_v_per_ns,survival\n");
    for (r, s) in runs {
        let _ = writeln!(out, "{},{}", format::csv(*r), format::csv(*s));
    }
    out
}

pub fn read_lz_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let cols = read_csv_columns(path, &["sweep_rate_v_per_ns", "survival"])?;
    Ok(cols[0]
        .iter()
        .copied()
        .zip(cols[1].iter().copied())
        .collect())
}
