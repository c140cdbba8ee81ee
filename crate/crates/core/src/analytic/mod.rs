//! Closed-form Landau-Zener and fast-driving interference formulas.
//!
//! Everything here is evaluated in linear-frequency units (GHz, GHz/ns),
//! consistent with the propagator's `i·dψ/dt = 2π·H·ψ`. In these units the
//! harmonic bias `ε(t) = κV_dc + κV_rf·sin(2πft)` has Bessel argument
//! `κV_rf/f` and resonances at `κV_dc = n·f`.

mod bessel;

use std::f64::consts::{PI, TAU};

use log::warn;

use crate::error::{ensure_finite, Error, Result};
use crate::model::{DriveMode, DriveProtocol, ModelParams};

pub use bessel::{bessel_j, MAX_ARGUMENT as BESSEL_MAX_ARGUMENT, MAX_ORDER as BESSEL_MAX_ORDER};

/// Below this `(dε/dt)/Δ²` the fast-driving formula is flagged as unreliable.
pub const FAST_DRIVING_MIN_RATIO: f64 = 10.0;

/// A single passage through the avoided crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LZParams {
    delta: f64,
    bias_sweep_rate: f64,
}

impl LZParams {
    /// `delta` in GHz, `bias_sweep_rate = dε/dt` in GHz/ns.
    pub fn new(delta: f64, bias_sweep_rate: f64) -> Result<Self> {
        ensure_finite("delta", delta)?;
        ensure_finite("bias_sweep_rate", bias_sweep_rate)?;
        if delta < 0.0 {
            return Err(Error::domain("delta", format!("must be >= 0, got {delta}")));
        }
        if bias_sweep_rate <= 0.0 {
            return Err(Error::domain(
                "bias_sweep_rate",
                format!("must be > 0 (take the adiabatic limit explicitly), got {bias_sweep_rate}"),
            ));
        }
        Ok(LZParams {
            delta,
            bias_sweep_rate,
        })
    }

    /// Sweep rate that produces a given adiabaticity parameter.
    pub fn from_adiabaticity(delta: f64, delta_l: f64) -> Result<Self> {
        ensure_finite("delta_l", delta_l)?;
        if delta_l <= 0.0 {
            return Err(Error::domain(
                "delta_l",
                format!("must be > 0, got {delta_l}"),
            ));
        }
        Self::new(delta, PI * delta * delta / (2.0 * delta_l))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn bias_sweep_rate(&self) -> f64 {
        self.bias_sweep_rate
    }

    /// Adiabaticity `δ_l = Δ_ω²/(4·v_ω)` with the angular quantities
    /// `Δ_ω = 2πΔ`, `v_ω = 2π·dε/dt`, i.e. `π·Δ²/(2·dε/dt)` in GHz units.
    pub fn delta_l(&self) -> f64 {
        PI * self.delta * self.delta / (2.0 * self.bias_sweep_rate)
    }
}

/// Diabatic-passage probability `exp(−2π·δ_l)`.
pub fn lz_probability(p: &LZParams) -> f64 {
    (-TAU * p.delta_l()).exp()
}

/// Inverts [`lz_probability`]: `Δ = √(−dε/dt·ln(P)/π²)`.
pub fn delta_from_survival(survival: f64, bias_sweep_rate: f64) -> Result<f64> {
    ensure_finite("survival", survival)?;
    ensure_finite("bias_sweep_rate", bias_sweep_rate)?;
    if !(survival > 0.0 && survival < 1.0) {
        return Err(Error::domain(
            "survival",
            format!("must lie strictly inside (0, 1), got {survival}"),
        ));
    }
    if bias_sweep_rate <= 0.0 {
        return Err(Error::domain(
            "bias_sweep_rate",
            format!("must be > 0, got {bias_sweep_rate}"),
        ));
    }
    Ok((-bias_sweep_rate * survival.ln() / (PI * PI)).sqrt())
}

/// Bessel argument `κV_rf/f` of the harmonic drive.
fn drive_argument(params: &ModelParams, protocol: &DriveProtocol) -> Result<f64> {
    if let DriveMode::LinearRamp { .. } = protocol.mode() {
        return Err(Error::domain(
            "protocol",
            "harmonic drive required, got a linear ramp",
        ));
    }
    Ok(params.kappa() * protocol.v_rf() / protocol.frequency())
}

/// Dressed tunnelling amplitude `Γ_n = Δ·J_n(κV_rf/f)` in GHz.
pub fn gamma_n(params: &ModelParams, protocol: &DriveProtocol, n: i32) -> Result<f64> {
    let x = drive_argument(params, protocol)?;
    Ok(params.delta0() * bessel_j(n, x)?)
}

/// Static part of the bias entering the resonance condition, `κV_dc + ε₀`.
fn static_bias(params: &ModelParams, protocol: &DriveProtocol) -> f64 {
    params.kappa() * protocol.v_dc() + params.epsilon_offset()
}

/// One harmonic of the fast-driving expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceSpec {
    pub n: i32,
    /// 2πf, rad/ns.
    pub omega: f64,
    /// 2πκ, rad/ns per volt.
    pub gamma_v: f64,
    pub v_rf: f64,
    /// Γ_n, GHz.
    pub gamma_n: f64,
    /// Ω_n = √((n·f − κV_dc − ε₀)² + Γ_n²), GHz.
    pub omega_n: f64,
}

impl ResonanceSpec {
    pub fn evaluate(params: &ModelParams, protocol: &DriveProtocol, n: i32) -> Result<Self> {
        let gamma = gamma_n(params, protocol, n)?;
        let detuning = n as f64 * protocol.frequency() - static_bias(params, protocol);
        Ok(ResonanceSpec {
            n,
            omega: protocol.omega(),
            gamma_v: params.gamma_angular(),
            v_rf: protocol.v_rf(),
            gamma_n: gamma,
            omega_n: detuning.hypot(gamma),
        })
    }

    /// `(Γ_n²/2Ω_n²)(1 − cos 2πΩ_n t)`.
    pub fn term(&self, t: f64) -> f64 {
        if self.omega_n == 0.0 {
            return 0.0;
        }
        let ratio = self.gamma_n / self.omega_n;
        0.5 * ratio * ratio * (1.0 - (TAU * self.omega_n * t).cos())
    }
}

/// `(dε/dt)/Δ²` at the crossing, `κV_rf·2πf/Δ²`.
pub fn fast_driving_ratio(params: &ModelParams, protocol: &DriveProtocol) -> f64 {
    params.kappa().abs() * protocol.v_rf() * protocol.omega() / params.delta0().powi(2)
}

/// Harmonic cutoff `⌈κ(|V_dc| + V_rf)/f⌉ + 10`.
pub fn default_n_max(params: &ModelParams, protocol: &DriveProtocol) -> usize {
    let reach =
        params.kappa().abs() * (protocol.v_dc().abs() + protocol.v_rf()) / protocol.frequency();
    (reach.ceil() as usize + 10).min(BESSEL_MAX_ORDER as usize)
}

/// Fast-driving estimate with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastDriveEstimate {
    /// Raw sum clamped into [0, 1].
    pub probability: f64,
    pub raw_sum: f64,
    /// Harmonic with the largest contribution, and that contribution.
    pub dominant_n: i32,
    pub dominant_term: f64,
    pub fast_driving_ratio: f64,
}

impl FastDriveEstimate {
    pub fn is_fast_driving(&self) -> bool {
        self.fast_driving_ratio >= FAST_DRIVING_MIN_RATIO
    }
}

/// Probability of leaving `S_z = −2` after driving for `t` ns, summed over
/// harmonics `−n_max..=n_max`.
///
/// The formula assumes the spin starts in `S_z = −2`. It is even in the
/// static bias, so it equally describes leaving `S_z = +2`. For a pulse, `t`
/// must not exceed the pulse length.
pub fn fast_drive_estimate(
    params: &ModelParams,
    protocol: &DriveProtocol,
    t: f64,
    n_max: usize,
) -> Result<FastDriveEstimate> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::domain("t", format!("must be >= 0, got {t}")));
    }
    if n_max < 1 {
        return Err(Error::domain("n_max", "must be >= 1"));
    }
    if n_max > BESSEL_MAX_ORDER as usize {
        return Err(Error::domain(
            "n_max",
            format!("must be <= {BESSEL_MAX_ORDER}"),
        ));
    }
    match protocol.mode() {
        DriveMode::LinearRamp { .. } => {
            return Err(Error::domain("protocol", "harmonic drive required, got a linear ramp"))
        }
        DriveMode::Pulse { t_pump } if t > t_pump => {
            return Err(Error::domain(
                "t",
                format!("t = {t} ns lies after the pulse end {t_pump} ns; the formula covers the driven segment only"),
            ))
        }
        _ => {}
    }

    let ratio = fast_driving_ratio(params, protocol);
    if ratio < FAST_DRIVING_MIN_RATIO {
        warn!("fast-driving ratio (dε/dt)/Δ² = {ratio:.3} is below {FAST_DRIVING_MIN_RATIO}; estimate is unreliable");
    }

    let n_max = n_max as i32;
    let mut raw = 0.0;
    let mut dominant = (0, f64::NEG_INFINITY);
    for n in -n_max..=n_max {
        let term = ResonanceSpec::evaluate(params, protocol, n)?.term(t);
        raw += term;
        if term > dominant.1 {
            dominant = (n, term);
        }
    }
    if raw > 1.0 + 1e-6 {
        warn!("fast-driving sum {raw} exceeds 1 at t = {t} ns; clamping");
    }
    Ok(FastDriveEstimate {
        probability: raw.clamp(0.0, 1.0),
        raw_sum: raw,
        dominant_n: dominant.0,
        dominant_term: dominant.1,
        fast_driving_ratio: ratio,
    })
}

/// Clamped fast-driving transition probability.
pub fn fast_drive_probability(
    params: &ModelParams,
    protocol: &DriveProtocol,
    t: f64,
    n_max: usize,
) -> Result<f64> {
    Ok(fast_drive_estimate(params, protocol, t, n_max)?.probability)
}

/// DC voltages where `κV + ε₀ = n·f`, for `n = ±1..=±n_max`, as
/// `(n, volts)` sorted by voltage.
pub fn resonance_voltages(params: &ModelParams, f: f64, n_max: usize) -> Result<Vec<(i32, f64)>> {
    ensure_finite("f", f)?;
    if f <= 0.0 {
        return Err(Error::domain("f", format!("must be > 0, got {f}")));
    }
    let kappa = params.kappa();
    if !(kappa > 0.0) {
        return Err(Error::domain(
            "kappa",
            format!("resonance positions need κ > 0, got {kappa}"),
        ));
    }
    let n_max = n_max as i32;
    let mut out: Vec<(i32, f64)> = (-n_max..=n_max)
        .filter(|&n| n != 0)
        .map(|n| (n, (n as f64 * f - params.epsilon_offset()) / kappa))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}
