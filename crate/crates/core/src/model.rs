//! Physical parameters of the driven doublet and the voltage → displacement →
//! bias chain that turns a junction voltage into a 2×2 Hamiltonian.
//!
//! Units: energies are linear frequencies in GHz (E/h), times in ns, lengths
//! in nm and voltages in V. The Schrödinger equation built on top of these
//! quantities therefore carries an explicit factor 2π.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::error::{ensure_finite, Error, Result};
use crate::experiments::parse_key_values;

/// Tunnel splitting of the Fe²⁺/MgO ground doublet at zero bias, GHz.
pub const PAPER_DELTA0_GHZ: f64 = 0.05;
/// Bias change per nm of piezoelectric displacement, GHz/nm.
pub const PAPER_ALPHA_H_GHZ_PER_NM: f64 = 270.0;
/// Scaled tunnelling modulation 24·α_F, GHz/nm.
pub const PAPER_ALPHA_F24_GHZ_PER_NM: f64 = 1.0;
/// Voltage at which the first harmonic resonance sits for f = 10Δ.
pub const PAPER_RESONANCE_ANCHOR_V: f64 = 0.15;

/// Constants of the two-level model and of the tip–surface junction.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    delta0: f64,
    alpha_h: f64,
    alpha_f_scaled: f64,
    lever_arm: f64,
    epsilon_offset: f64,
    quadratic_bias: f64,
    include_tunneling_modulation: bool,
}

impl ModelParams {
    pub fn new(delta0: f64, alpha_h: f64, alpha_f_scaled: f64, lever_arm: f64) -> Result<Self> {
        ensure_finite("delta0", delta0)?;
        if delta0 <= 0.0 {
            return Err(Error::domain(
                "delta0",
                format!("must be > 0, got {delta0}"),
            ));
        }
        ensure_finite("alpha_h", alpha_h)?;
        ensure_finite("alpha_f_scaled", alpha_f_scaled)?;
        ensure_finite("lever_arm", lever_arm)?;
        if lever_arm <= 0.0 {
            return Err(Error::domain(
                "lever_arm",
                format!("must be > 0, got {lever_arm}"),
            ));
        }
        Ok(ModelParams {
            delta0,
            alpha_h,
            alpha_f_scaled,
            lever_arm,
            epsilon_offset: 0.0,
            quadratic_bias: 0.0,
            include_tunneling_modulation: false,
        })
    }

    /// Builds parameters whose lever arm is fixed by requiring that a
    /// voltage `anchor_v` produces the bias `anchor_bias_ghz`, i.e.
    /// `2·alpha_h·λ·anchor_v = anchor_bias_ghz`.
    ///
    /// The microscopic charge, spring constant and tip distance never enter
    /// separately, only through λ, so this is the only way λ is pinned.
    pub fn calibrated(
        delta0: f64,
        alpha_h: f64,
        alpha_f_scaled: f64,
        anchor_v: f64,
        anchor_bias_ghz: f64,
    ) -> Result<Self> {
        ensure_finite("anchor_v", anchor_v)?;
        ensure_finite("anchor_bias_ghz", anchor_bias_ghz)?;
        if anchor_v == 0.0 || alpha_h == 0.0 {
            return Err(Error::domain(
                "anchor_v",
                "calibration needs a nonzero anchor voltage and alpha_h",
            ));
        }
        let lever_arm = anchor_bias_ghz / (2.0 * alpha_h * anchor_v);
        Self::new(delta0, alpha_h, alpha_f_scaled, lever_arm)
    }

    /// Fe²⁺ on MgO at the NOTIN point with no external field: Δ = 0.05 GHz,
    /// α_h = 270 GHz/nm, and λ calibrated so the n = 1 resonance for
    /// f = 10Δ falls at 0.15 V. Tunnelling modulation is disabled.
    pub fn paper() -> Self {
        Self::calibrated(
            PAPER_DELTA0_GHZ,
            PAPER_ALPHA_H_GHZ_PER_NM,
            PAPER_ALPHA_F24_GHZ_PER_NM,
            PAPER_RESONANCE_ANCHOR_V,
            10.0 * PAPER_DELTA0_GHZ,
        )
        .expect("paper constants are valid")
    }

    /// Same junction, different tunnel splitting.
    pub fn with_delta0(mut self, delta0: f64) -> Result<Self> {
        ensure_finite("delta0", delta0)?;
        if delta0 <= 0.0 {
            return Err(Error::domain(
                "delta0",
                format!("must be > 0, got {delta0}"),
            ));
        }
        self.delta0 = delta0;
        Ok(self)
    }

    pub fn with_epsilon_offset(mut self, epsilon_offset: f64) -> Result<Self> {
        self.epsilon_offset = ensure_finite("epsilon_offset", epsilon_offset)?;
        Ok(self)
    }

    /// Adds `c·δz²` (GHz, with δz in nm) to the bias.
    pub fn with_quadratic_bias(mut self, coefficient: f64) -> Result<Self> {
        self.quadratic_bias = ensure_finite("quadratic_bias", coefficient)?;
        Ok(self)
    }

    pub fn with_tunneling_modulation(mut self, enabled: bool) -> Self {
        self.include_tunneling_modulation = enabled;
        self
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn alpha_h(&self) -> f64 {
        self.alpha_h
    }

    pub fn alpha_f_scaled(&self) -> f64 {
        self.alpha_f_scaled
    }

    pub fn lever_arm(&self) -> f64 {
        self.lever_arm
    }

    pub fn epsilon_offset(&self) -> f64 {
        self.epsilon_offset
    }

    pub fn quadratic_bias(&self) -> f64 {
        self.quadratic_bias
    }

    pub fn include_tunneling_modulation(&self) -> bool {
        self.include_tunneling_modulation
    }

    /// Linear bias per volt, κ = 2·α_h·λ (GHz/V).
    pub fn kappa(&self) -> f64 {
        2.0 * self.alpha_h * self.lever_arm
    }

    /// κ in angular units, rad/ns per volt.
    pub fn gamma_angular(&self) -> f64 {
        TAU * self.kappa()
    }

    /// True when the bias is odd in the voltage, so every observable built
    /// from it is symmetric under V → −V.
    pub fn is_bias_odd(&self) -> bool {
        self.epsilon_offset == 0.0 && self.quadratic_bias == 0.0
    }

    /// Parses the flat `key = value` configuration format (TOML without
    /// tables).
    ///
    /// Unknown keys are rejected. Keys that are absent keep their value from
    /// [`ModelParams::paper`].
    pub fn from_config_str(text: &str, origin: &Path) -> Result<Self> {
        let c: ConfigFile = parse_key_values(text, origin)?;
        let base = Self::paper();
        Ok(Self::new(
            c.delta0_ghz.unwrap_or(base.delta0),
            c.alpha_h_ghz_per_nm.unwrap_or(base.alpha_h),
            c.alpha_f24_ghz_per_nm.unwrap_or(base.alpha_f_scaled),
            c.lever_arm_nm_per_v.unwrap_or(base.lever_arm),
        )?
        .with_epsilon_offset(c.epsilon_offset_ghz.unwrap_or(base.epsilon_offset))?
        .with_quadratic_bias(c.quad_bias_ghz_per_nm2.unwrap_or(base.quadratic_bias))?
        .with_tunneling_modulation(
            c.tunneling_modulation
                .unwrap_or(base.include_tunneling_modulation),
        ))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&text, path)
    }

    /// Serializes into the format read by [`ModelParams::from_config_str`].
    /// Values use Rust's shortest round-trip representation.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "delta0_ghz = {:?}", self.delta0);
        let _ = writeln!(out, "alpha_h_ghz_per_nm = {:?}", self.alpha_h);
        let _ = writeln!(out, "alpha_f24_ghz_per_nm = {:?}", self.alpha_f_scaled);
        let _ = writeln!(out, "lever_arm_nm_per_v = {:?}", self.lever_arm);
        let _ = writeln!(out, "epsilon_offset_ghz = {:?}", self.epsilon_offset);
        let _ = writeln!(out, "quad_bias_ghz_per_nm2 = {:?}", self.quadratic_bias);
        let _ = writeln!(
            out,
            "tunneling_modulation = {}",
            self.include_tunneling_modulation
        );
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    delta0_ghz: Option<f64>,
    alpha_h_ghz_per_nm: Option<f64>,
    alpha_f24_ghz_per_nm: Option<f64>,
    lever_arm_nm_per_v: Option<f64>,
    epsilon_offset_ghz: Option<f64>,
    quad_bias_ghz_per_nm2: Option<f64>,
    tunneling_modulation: Option<bool>,
}

/// Time dependence of the junction voltage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveMode {
    /// RF drive that never switches off.
    ContinuousWave,
    /// RF drive on for `0 ≤ t < t_pump`, DC only afterwards.
    Pulse { t_pump: f64 },
    /// `V(t) = v_start + sweep_rate·t` for `0 ≤ t ≤ duration` (V/ns, ns).
    LinearRamp {
        v_start: f64,
        sweep_rate: f64,
        duration: f64,
    },
}

/// Voltage waveform `V_dc + V_rf·sin(2πf·t + φ)`, optionally gated, or a
/// linear ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveProtocol {
    v_dc: f64,
    v_rf: f64,
    frequency: f64,
    phase: f64,
    mode: DriveMode,
}

impl DriveProtocol {
    pub fn continuous_wave(v_dc: f64, v_rf: f64, frequency: f64) -> Result<Self> {
        Self::harmonic(v_dc, v_rf, frequency, DriveMode::ContinuousWave)
    }

    pub fn pulse(v_dc: f64, v_rf: f64, frequency: f64, t_pump: f64) -> Result<Self> {
        if !(t_pump >= 0.0) {
            return Err(Error::domain(
                "t_pump",
                format!("must be >= 0, got {t_pump}"),
            ));
        }
        if t_pump.is_infinite() {
            return Self::continuous_wave(v_dc, v_rf, frequency);
        }
        Self::harmonic(v_dc, v_rf, frequency, DriveMode::Pulse { t_pump })
    }

    fn harmonic(v_dc: f64, v_rf: f64, frequency: f64, mode: DriveMode) -> Result<Self> {
        ensure_finite("v_dc", v_dc)?;
        ensure_finite("v_rf", v_rf)?;
        ensure_finite("frequency", frequency)?;
        if v_rf < 0.0 {
            return Err(Error::domain(
                "v_rf",
                format!("amplitude must be >= 0, got {v_rf}"),
            ));
        }
        if frequency <= 0.0 {
            return Err(Error::domain(
                "frequency",
                format!("must be > 0, got {frequency}"),
            ));
        }
        Ok(DriveProtocol {
            v_dc,
            v_rf,
            frequency,
            phase: 0.0,
            mode,
        })
    }

    pub fn linear_ramp(v_start: f64, sweep_rate: f64, duration: f64) -> Result<Self> {
        ensure_finite("v_start", v_start)?;
        ensure_finite("sweep_rate", sweep_rate)?;
        ensure_finite("duration", duration)?;
        if duration <= 0.0 {
            return Err(Error::domain(
                "duration",
                format!("must be > 0, got {duration}"),
            ));
        }
        Ok(DriveProtocol {
            v_dc: v_start,
            v_rf: 0.0,
            frequency: 0.0,
            phase: 0.0,
            mode: DriveMode::LinearRamp {
                v_start,
                sweep_rate,
                duration,
            },
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Result<Self> {
        self.phase = ensure_finite("phase", phase)?;
        Ok(self)
    }

    pub fn v_dc(&self) -> f64 {
        self.v_dc
    }

    pub fn v_rf(&self) -> f64 {
        self.v_rf
    }

    /// Drive frequency in GHz; zero for a linear ramp.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn mode(&self) -> DriveMode {
        self.mode
    }

    /// Angular drive frequency ω = 2πf, rad/ns.
    pub fn omega(&self) -> f64 {
        TAU * self.frequency
    }

    /// Time at which the waveform changes analytic form, if any.
    pub fn switch_off_time(&self) -> Option<f64> {
        match self.mode {
            DriveMode::Pulse { t_pump } => Some(t_pump),
            _ => None,
        }
    }

    /// Junction voltage at time `t` (ns).
    pub fn voltage(&self, t: f64) -> f64 {
        match self.mode {
            DriveMode::ContinuousWave => self.rf_voltage(t),
            DriveMode::Pulse { t_pump } => {
                if t < t_pump {
                    self.rf_voltage(t)
                } else {
                    self.v_dc
                }
            }
            DriveMode::LinearRamp {
                v_start,
                sweep_rate,
                ..
            } => v_start + sweep_rate * t,
        }
    }

    fn rf_voltage(&self, t: f64) -> f64 {
        self.v_dc + self.v_rf * (TAU * self.frequency * t + self.phase).sin()
    }

    /// Largest |V(t)| the waveform can reach.
    pub fn max_abs_voltage(&self) -> f64 {
        match self.mode {
            DriveMode::LinearRamp {
                v_start,
                sweep_rate,
                duration,
            } => v_start.abs().max((v_start + sweep_rate * duration).abs()),
            _ => self.v_dc.abs() + self.v_rf,
        }
    }
}

/// Piezoelectric displacement of the adatom, δz = λ·V (nm).
pub fn displacement(params: &ModelParams, v: f64) -> Result<f64> {
    ensure_finite("v", v)?;
    Ok(params.lever_arm * v)
}

/// Energy bias ε(V) = 2·α_h·λ·V + c·(λV)² + ε₀ (GHz).
pub fn bias(params: &ModelParams, v: f64) -> Result<f64> {
    ensure_finite("v", v)?;
    Ok(bias_unchecked(params, v))
}

pub(crate) fn bias_unchecked(params: &ModelParams, v: f64) -> f64 {
    let dz = params.lever_arm * v;
    params.kappa() * v + params.quadratic_bias * dz * dz + params.epsilon_offset
}

/// Tunnel splitting at displacement `dz` (GHz). With Δ = 48·F and the
/// stored coefficient equal to 24·α_F, the slope is twice that coefficient.
pub fn tunneling(params: &ModelParams, dz: f64) -> Result<f64> {
    ensure_finite("dz", dz)?;
    Ok(tunneling_unchecked(params, dz))
}

pub(crate) fn tunneling_unchecked(params: &ModelParams, dz: f64) -> f64 {
    if params.include_tunneling_modulation {
        params.delta0 + 2.0 * params.alpha_f_scaled * dz
    } else {
        params.delta0
    }
}

/// Traceless Hermitian 2×2 operator `x·σ_x + z·σ_z` (GHz) in the diabatic
/// basis `{|S_z = +2⟩, |S_z = −2⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hamiltonian {
    pub x: f64,
    pub z: f64,
}

impl Hamiltonian {
    /// Builds `−Δ/2·σ_x − ε/2·σ_z`.
    pub fn from_delta_bias(delta: f64, epsilon: f64) -> Self {
        Hamiltonian {
            x: -0.5 * delta,
            z: -0.5 * epsilon,
        }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.z, 0.0), C64::new(self.x, 0.0)],
            [C64::new(self.x, 0.0), C64::new(-self.z, 0.0)],
        ]
    }

    /// Half the level splitting, `√(x² + z²)`.
    pub fn magnitude(&self) -> f64 {
        self.x.hypot(self.z)
    }

    /// `(E_minus, E_plus)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = self.magnitude();
        (-m, m)
    }

    /// Normalized real eigenvector for the lower level, `(c_plus, c_minus)`.
    pub fn ground_state(&self) -> [f64; 2] {
        self.eigenvector(-1.0)
    }

    /// Normalized real eigenvector for the upper level.
    pub fn excited_state(&self) -> [f64; 2] {
        self.eigenvector(1.0)
    }

    // Bloch-vector parametrization: the eigenvector of n̂·σ with eigenvalue
    // `sign` is (cos θ/2, sin θ/2) for sign = +1 and (−sin θ/2, cos θ/2) for
    // sign = −1, where n̂ = (sin θ, 0, cos θ).
    fn eigenvector(&self, sign: f64) -> [f64; 2] {
        let theta = if self.x == 0.0 && self.z == 0.0 {
            PI / 2.0
        } else {
            self.x.atan2(self.z)
        };
        let (s, c) = (0.5 * theta).sin_cos();
        if sign > 0.0 {
            [c, s]
        } else {
            [-s, c]
        }
    }
}

/// Instantaneous Hamiltonian at time `t` under `protocol`.
pub fn hamiltonian(params: &ModelParams, protocol: &DriveProtocol, t: f64) -> Result<Hamiltonian> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::domain("t", format!("must be >= 0, got {t}")));
    }
    Ok(hamiltonian_at_voltage(params, protocol.voltage(t)))
}

pub(crate) fn hamiltonian_at_voltage(params: &ModelParams, v: f64) -> Hamiltonian {
    let dz = params.lever_arm * v;
    Hamiltonian::from_delta_bias(tunneling_unchecked(params, dz), bias_unchecked(params, v))
}

/// Adiabatic levels `∓½√(Δ² + ε²)` at a static voltage (GHz).
pub fn adiabatic_levels(params: &ModelParams, v_dc: f64) -> Result<(f64, f64)> {
    ensure_finite("v_dc", v_dc)?;
    Ok(hamiltonian_at_voltage(params, v_dc).eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn paper_calibration() {
        let p = ModelParams::paper();
        // λ = 0.5 / (2·270·0.15)
        assert_relative_eq!(p.lever_arm(), 6.172_839_506_172_84e-3, max_relative = 1e-12);
        assert_relative_eq!(p.kappa(), 0.5 / 0.15, max_relative = 1e-14);
        assert_eq!(p.kappa(), 2.0 * p.alpha_h() * p.lever_arm());
    }

    #[test]
    fn displacement_examples() {
        let p = ModelParams::paper();
        assert_eq!(displacement(&p, 0.0).unwrap(), 0.0);
        let d = displacement(&p, 0.15).unwrap();
        assert!((d - 9.26e-4).abs() < 5e-7, "{d}");
        assert!(displacement(&p, f64::NAN).is_err());
    }

    #[test]
    fn bias_examples() {
        let p = ModelParams::paper();
        assert_eq!(bias(&p, 0.0).unwrap(), 0.0);
        assert_relative_eq!(bias(&p, 0.15).unwrap(), 0.5, max_relative = 1e-14);
        assert_eq!(bias(&p, -0.2).unwrap(), -bias(&p, 0.2).unwrap());
        assert!(bias(&p, f64::INFINITY).is_err());
    }

    #[test]
    fn tunneling_examples() {
        let p = ModelParams::paper();
        assert_eq!(tunneling(&p, 0.0).unwrap(), 0.05);
        assert_eq!(tunneling(&p, 1e-3).unwrap(), 0.05);
        let m = p.with_tunneling_modulation(true);
        assert_relative_eq!(tunneling(&m, 1e-3).unwrap(), 0.052, max_relative = 1e-12);
    }

    #[test]
    fn hamiltonian_examples() {
        let p = ModelParams::paper();
        let cw = DriveProtocol::continuous_wave(0.0, 0.0, 0.5).unwrap();
        let (lo, hi) = hamiltonian(&p, &cw, 3.0).unwrap().eigenvalues();
        assert_relative_eq!(lo, -0.025, max_relative = 1e-14);
        assert_relative_eq!(hi, 0.025, max_relative = 1e-14);

        let h = Hamiltonian::from_delta_bias(0.0, 1.0).matrix();
        assert_eq!(h[0][0], C64::new(-0.5, 0.0));
        assert_eq!(h[1][1], C64::new(0.5, 0.0));
        assert_eq!(h[0][1], C64::new(0.0, 0.0));

        assert!(hamiltonian(&p, &cw, -1.0).is_err());
    }

    #[test]
    fn levels_examples() {
        let p = ModelParams::paper();
        assert_eq!(adiabatic_levels(&p, 0.0).unwrap(), (-0.025, 0.025));
        let (lo, hi) = adiabatic_levels(&p, 0.15).unwrap();
        assert_relative_eq!(
            hi - lo,
            (0.05f64 * 0.05 + 0.25).sqrt(),
            max_relative = 1e-14
        );

        // far from the crossing the levels approach ∓|ε|/2
        let v = 3.0;
        let eps = bias(&p, v).unwrap();
        let (lo, hi) = adiabatic_levels(&p, v).unwrap();
        let bound = 0.05 * 0.05 / (4.0 * eps);
        assert!((hi - eps / 2.0).abs() <= bound);
        assert!((lo + eps / 2.0).abs() <= bound);
    }

    #[test]
    fn eigenvectors_at_crossing_are_even_superpositions() {
        let h = Hamiltonian::from_delta_bias(0.05, 0.0);
        for v in [h.ground_state(), h.excited_state()] {
            assert!((v[0] * v[0] - 0.5).abs() < 1e-10);
            assert!((v[1] * v[1] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_solve_the_eigenproblem() {
        for (d, e) in [
            (0.05, 0.5),
            (0.05, -0.5),
            (0.0, 1.0),
            (0.0, -1.0),
            (0.3, 0.0),
        ] {
            let h = Hamiltonian::from_delta_bias(d, e);
            let (lo, hi) = h.eigenvalues();
            for (vec, val) in [(h.ground_state(), lo), (h.excited_state(), hi)] {
                let r0 = h.z * vec[0] + h.x * vec[1] - val * vec[0];
                let r1 = h.x * vec[0] - h.z * vec[1] - val * vec[1];
                assert!(r0.abs() < 1e-14 && r1.abs() < 1e-14, "{d} {e}");
            }
        }
    }

    #[test]
    fn pulse_waveform() {
        let p = DriveProtocol::pulse(0.15, 0.26, 0.5, 10.0).unwrap();
        assert_eq!(p.voltage(0.0), 0.15);
        assert_relative_eq!(p.voltage(0.5), 0.15 + 0.26, max_relative = 1e-12);
        assert_eq!(p.voltage(10.0), 0.15);
        assert_eq!(p.voltage(12.3), 0.15);
        let ramp = DriveProtocol::linear_ramp(-0.1, 0.01, 20.0).unwrap();
        assert_relative_eq!(ramp.voltage(10.0), 0.0, epsilon = 1e-15);
        assert!(DriveProtocol::continuous_wave(0.0, -0.1, 0.5).is_err());
        assert!(DriveProtocol::continuous_wave(0.0, 0.1, 0.0).is_err());
        assert!(matches!(
            DriveProtocol::pulse(0.0, 0.1, 0.5, f64::INFINITY)
                .unwrap()
                .mode(),
            DriveMode::ContinuousWave
        ));
    }

    #[test]
    fn config_round_trip_and_errors() {
        let p = ModelParams::paper()
            .with_epsilon_offset(0.01)
            .unwrap()
            .with_tunneling_modulation(true);
        let text = p.to_config_string();
        let q = ModelParams::from_config_str(&text, Path::new("mem")).unwrap();
        assert_eq!(p, q);

        let partial =
            ModelParams::from_config_str("# only Δ\ndelta0_ghz = 0.1\n", Path::new("mem")).unwrap();
        assert_eq!(partial.delta0(), 0.1);
        assert_eq!(partial.kappa(), ModelParams::paper().kappa());

        let err = ModelParams::from_config_str("bogus=1", Path::new("x.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(ModelParams::from_config_str("delta0_ghz=-1", Path::new("x")).is_err());
        assert!(ModelParams::from_config_str("lever_arm_nm_per_v=abc", Path::new("x")).is_err());
        assert!(ModelParams::from_config_str("delta0_ghz = 1", Path::new("x")).is_ok());
        let err = ModelParams::from_config_str("delta0_ghz = 0.1\nwhat = 2\n", Path::new("x"))
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    proptest! {
        #[test]
        fn hamiltonian_hermitian_traceless(t in 0.0f64..500.0, vdc in -1.0f64..1.0, vrf in 0.0f64..1.0) {
            let p = ModelParams::paper().with_tunneling_modulation(true);
            let proto = DriveProtocol::continuous_wave(vdc, vrf, 0.5).unwrap();
            let m = hamiltonian(&p, &proto, t).unwrap().matrix();
            prop_assert_eq!((m[0][0] + m[1][1]).norm(), 0.0);
            prop_assert_eq!(m[0][1], m[1][0].conj());
            prop_assert_eq!(m[0][0].im, 0.0);
            prop_assert_eq!(m[1][1].im, 0.0);
        }

        #[test]
        fn linear_in_voltage(v in -2.0f64..2.0) {
            let p = ModelParams::paper();
            let d1 = displacement(&p, v).unwrap();
            let d2 = displacement(&p, 2.0 * v).unwrap();
            prop_assert!((d2 - 2.0 * d1).abs() <= 1e-12 * d2.abs().max(1e-300));
            let b1 = bias(&p, v).unwrap();
            let b2 = bias(&p, 2.0 * v).unwrap();
            prop_assert!((b2 - 2.0 * b1).abs() <= 1e-12 * b2.abs().max(1e-300));
        }

        #[test]
        fn level_gap_identity(v in -2.0f64..2.0) {
            let p = ModelParams::paper();
            let (lo, hi) = adiabatic_levels(&p, v).unwrap();
            let eps = bias(&p, v).unwrap();
            let lhs = (hi - lo).powi(2);
            let rhs = 0.05f64.powi(2) + eps * eps;
            prop_assert!(lo <= hi);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
            prop_assert_eq!(adiabatic_levels(&p, -v).unwrap(), (lo, hi));
        }
    }
}
