use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::format;
use crate::model::{DriveProtocol, ModelParams};
use crate::propagator::{evolve_final, expectation_sz, IntegratorOptions, SpinState};

use super::io::{read_csv_columns, read_key_values};
use super::SweepEngine;

pub const SCAN_CSV: &str = "scan.csv";
pub const SCAN_REFERENCE_CSV: &str = "scan_reference.csv";
pub const SCAN_META: &str = "scan_meta.txt";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanMeta {
    f_ghz: f64,
    v_rf_v: f64,
    t_pump_ns: f64,
}

/// ⟨S_z⟩ at the end of a fixed-length pulse, as a function of `V_dc`.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub v_dc: Vec<f64>,
    pub sz_final: Vec<f64>,
    /// ⟨S_z⟩ before the pulse, the reference the readout is compared with.
    pub sz_initial: Vec<f64>,
    pub v_rf: f64,
    pub frequency: f64,
    pub t_pump: f64,
    /// Not persisted; zero for results read back from disk.
    pub wall_time: Vec<Duration>,
}

/// Evenly spaced axis including both end points.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        end
                    } else {
                        start + i as f64 * step
                    }
                })
                .collect()
        }
    }
}

pub(crate) fn check_axis(field: &'static str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::domain(field, "axis needs at least two points"));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(field, "axis contains non-finite values"));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(field, "axis must be strictly increasing"));
    }
    Ok(())
}

/// ⟨S_z⟩(t_pump) and the initial ⟨S_z⟩ for one static voltage.
pub(crate) fn pulse_endpoint(
    params: &ModelParams,
    v_dc: f64,
    v_rf: f64,
    f: f64,
    t_pump: f64,
    opts: &IntegratorOptions,
) -> Result<(f64, f64)> {
    let protocol = DriveProtocol::pulse(v_dc, v_rf, f, t_pump)?;
    let psi0 = SpinState::adiabatic_ground(params, &protocol);
    let sz0 = expectation_sz(&psi0)?;
    if t_pump == 0.0 {
        return Ok((sz0, sz0));
    }
    let psi = evolve_final(params, &protocol, psi0, t_pump, opts)?;
    Ok((expectation_sz(&psi)?, sz0))
}

/// Reads ⟨S_z⟩ right at the end of a pulse of length `t_pump` for every
/// `v_dc` in the axis.
#[allow(clippy::too_many_arguments)]
pub fn dc_scan(
    params: &ModelParams,
    v_dc_axis: &[f64],
    v_rf: f64,
    f: f64,
    t_pump: f64,
    opts: &IntegratorOptions,
    engine: &SweepEngine,
) -> Result<ScanResult> {
    check_axis("v_dc_axis", v_dc_axis)?;
    if !(t_pump >= 0.0) || !t_pump.is_finite() {
        return Err(Error::domain(
            "t_pump",
            format!("must be finite and >= 0, got {t_pump}"),
        ));
    }
    // validate the drive once before fanning out
    DriveProtocol::pulse(0.0, v_rf, f, t_pump)?;
    opts.validate()?;

    let points = engine.run(v_dc_axis.len(), |i| {
        let start = Instant::now();
        let (sz, sz0) = pulse_endpoint(params, v_dc_axis[i], v_rf, f, t_pump, opts)?;
        Ok((sz, sz0, start.elapsed()))
    })?;

    Ok(ScanResult {
        v_dc: v_dc_axis.to_vec(),
        sz_final: points.iter().map(|p| p.0).collect(),
        sz_initial: points.iter().map(|p| p.1).collect(),
        v_rf,
        frequency: f,
        t_pump,
        wall_time: points.iter().map(|p| p.2).collect(),
    })
}

/// A local maximum of the flip signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Refined position, V.
    pub v: f64,
    /// Signal at the refined position.
    pub height: f64,
    /// Grid index of the raw maximum.
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakOptions {
    /// Keep maxima at or above this fraction of the global maximum.
    pub min_relative_height: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions {
            min_relative_height: 0.5,
        }
    }
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when the three are collinear.
pub(crate) fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature >= 0.0 {
        return (x[1], y[1]);
    }
    // y = y1 + b(x − x1) + c(x − x1)² with the middle derivative b
    let b = d1 + curvature * (x[1] - x[0]);
    let shift = (-b / (2.0 * curvature)).clamp(x[0] - x[1], x[2] - x[1]);
    (x[1] + shift, y[1] + b * shift + curvature * shift * shift)
}

/// Interior local maxima of `signal` above the relative threshold, refined
/// by quadratic interpolation over the three surrounding grid points.
pub fn find_peaks(axis: &[f64], signal: &[f64], opts: &PeakOptions) -> Vec<Peak> {
    let global = signal.iter().cloned().fold(0.0, f64::max);
    if global <= 0.0 || axis.len() < 3 {
        return vec![];
    }
    let threshold = opts.min_relative_height * global;
    (1..signal.len() - 1)
        .filter(|&i| {
            signal[i] > signal[i - 1] && signal[i] >= signal[i + 1] && signal[i] >= threshold
        })
        .map(|i| {
            let (v, height) = parabola_vertex(
                [axis[i - 1], axis[i], axis[i + 1]],
                [signal[i - 1], signal[i], signal[i + 1]],
            );
            Peak {
                v,
                height,
                index: i,
            }
        })
        .collect()
}

impl ScanResult {
    /// `|⟨S_z⟩_final − ⟨S_z⟩_initial|` per grid point.
    pub fn flip_signal(&self) -> Vec<f64> {
        self.sz_final
            .iter()
            .zip(&self.sz_initial)
            .map(|(a, b)| (a - b).abs())
            .collect()
    }

    pub fn peaks(&self, opts: &PeakOptions) -> Vec<Peak> {
        find_peaks(&self.v_dc, &self.flip_signal(), opts)
    }

    /// Largest spacing between neighbouring axis points.
    pub fn grid_step(&self) -> f64 {
        self.v_dc
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("v_dc,sz_final\n");
        for (v, s) in self.v_dc.iter().zip(&self.sz_final) {
            let _ = writeln!(out, "{},{}", format::csv(*v), format::csv(*s));
        }
        out
    }

    pub fn reference_csv_string(&self) -> String {
        let mut out = String::from("v_dc,sz_initial\n");
        for (v, s) in self.v_dc.iter().zip(&self.sz_initial) {
            let _ = writeln!(out, "{},{}", format::csv(*v), format::csv(*s));
        }
        out
    }

    pub fn metadata_string(&self) -> String {
        format!(
            "f_ghz = {:?}\nv_rf_v = {:?}\nt_pump_ns = {:?}\n",
            self.frequency, self.v_rf, self.t_pump
        )
    }

    /// Writes `scan.csv`, `scan_reference.csv` and `scan_meta.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        for (name, body) in [
            (SCAN_CSV, self.to_csv_string()),
            (SCAN_REFERENCE_CSV, self.reference_csv_string()),
            (SCAN_META, self.metadata_string()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Reads back what [`ScanResult::write_dir`] produced.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let scan = read_csv_columns(&dir.join(SCAN_CSV), &["v_dc", "sz_final"])?;
        let reference = read_csv_columns(&dir.join(SCAN_REFERENCE_CSV), &["v_dc", "sz_initial"])?;
        if scan[0] != reference[0] {
            return Err(Error::Parse {
                path: dir.join(SCAN_REFERENCE_CSV),
                line: 0,
                reason: "v_dc axis differs from scan.csv".into(),
            });
        }
        let meta: ScanMeta = read_key_values(&dir.join(SCAN_META))?;
        let n = scan[0].len();
        let mut columns = scan.into_iter();
        let v_dc = columns.next().unwrap();
        check_axis("v_dc", &v_dc)?;
        Ok(ScanResult {
            v_dc,
            sz_final: columns.next().unwrap(),
            sz_initial: reference.into_iter().nth(1).unwrap(),
            v_rf: meta.v_rf_v,
            frequency: meta.f_ghz,
            t_pump: meta.t_pump_ns,
            wall_time: vec![Duration::ZERO; n],
        })
    }
}
