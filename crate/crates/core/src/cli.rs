//! Command-line front end. Every subcommand resolves its flags, validates
//! them, writes its CSV outputs into `--out-dir` together with a `run.txt`
//! manifest listing every resolved value, and prints a short summary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytic::{self, LZParams};
use crate::error::{Error, Result};
use crate::experiments::{
    dc_scan, extract_delta, linspace, lz_csv_string, lz_series, lz_window, map2d, pulse_trace,
    read_lz_csv, reversal_time, sweep_rate_for_adiabaticity, PeakOptions, ScanResult, SweepEngine,
    LZ_CSV, LZ_DEFAULT_HALF_SPAN_IN_DELTA,
};
use crate::format;
use crate::model::{self, ModelParams};
use crate::propagator::IntegratorOptions;

#[derive(Parser, Debug)]
#[command(
    name = "lzsm",
    version,
    about = "LZSM control of a single Fe2+ spin: simulations and analysis"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model parameter file (`key = value` lines).
    #[arg(long, global = true, conflicts_with = "paper_defaults")]
    pub params: Option<PathBuf>,
    /// Paper model: Δ = 0.05 GHz, α_h = 270 GHz/nm, calibrated λ, f = 10Δ.
    #[arg(long, global = true)]
    pub paper_defaults: bool,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Reserved; every pipeline is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 512)]
    pub steps_per_period: usize,
    /// Halve steps until the end state moves by less than --tolerance.
    #[arg(long, global = true)]
    pub adaptive: bool,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Adiabatic levels versus V_dc.
    #[command(allow_negative_numbers = true)]
    Levels {
        #[arg(long, default_value_t = -300.0)]
        vdc_min_mv: f64,
        #[arg(long, default_value_t = 300.0)]
        vdc_max_mv: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
    },
    /// ⟨S_z⟩(t) for one or more pulse lengths (`inf` = continuous wave).
    #[command(allow_negative_numbers = true)]
    Trace {
        #[arg(long, default_value_t = 150.0)]
        vdc_mv: f64,
        #[arg(long, default_value_t = 260.0)]
        vrf_mv: f64,
        /// Drive frequency; defaults to 10Δ.
        #[arg(long)]
        f_ghz: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "inf")]
        tpump_ns: Vec<f64>,
        #[arg(long, default_value_t = 40.0)]
        t_end_ns: f64,
        /// Sample spacing; defaults to 1/(20f).
        #[arg(long)]
        sample_ns: Option<f64>,
    },
    /// ⟨S_z⟩ at the end of a pulse versus V_dc.
    #[command(allow_negative_numbers = true)]
    Scan {
        #[arg(long, default_value_t = -400.0)]
        vdc_min_mv: f64,
        #[arg(long, default_value_t = 400.0)]
        vdc_max_mv: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value_t = 200.0)]
        vrf_mv: f64,
        #[arg(long)]
        f_ghz: Option<f64>,
        /// Pulse length; defaults to 0.9/Δ.
        #[arg(long)]
        tpump_ns: Option<f64>,
        /// Relative threshold for the reported peaks.
        #[arg(long, default_value_t = 0.5)]
        min_peak_height: f64,
    },
    /// ⟨S_z⟩ at the end of a pulse over a (V_dc, V_rf) grid.
    #[command(allow_negative_numbers = true)]
    Map {
        #[arg(long, default_value_t = -400.0)]
        vdc_min_mv: f64,
        #[arg(long, default_value_t = 400.0)]
        vdc_max_mv: f64,
        #[arg(long, default_value_t = 200)]
        vdc_points: usize,
        #[arg(long, default_value_t = 0.0)]
        vrf_min_mv: f64,
        #[arg(long, default_value_t = 800.0)]
        vrf_max_mv: f64,
        #[arg(long, default_value_t = 200)]
        vrf_points: usize,
        #[arg(long)]
        f_ghz: Option<f64>,
        #[arg(long)]
        tpump_ns: Option<f64>,
        /// Also render map.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Landau-Zener survival for a series of sweep rates.
    #[command(allow_negative_numbers = true)]
    Lz {
        /// Adiabaticity values δ_l; ignored when --rate-v-per-ns is given.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.05,0.1,0.2,0.35,0.5,0.75,1,1.5,2"
        )]
        delta_l: Vec<f64>,
        /// Voltage sweep rates.
        #[arg(long, value_delimiter = ',')]
        rate_v_per_ns: Option<Vec<f64>>,
        /// Bias excursion on each side of the crossing, in units of Δ.
        #[arg(long, default_value_t = LZ_DEFAULT_HALF_SPAN_IN_DELTA)]
        half_span_delta: f64,
    },
    /// Recover Δ from a `scan` directory and an `lz` CSV.
    #[command(allow_negative_numbers = true)]
    Extract {
        #[arg(long)]
        scan_dir: PathBuf,
        #[arg(long)]
        lz_csv: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        min_peak_height: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Levels { .. } => "levels",
            Command::Trace { .. } => "trace",
            Command::Scan { .. } => "scan",
            Command::Map { .. } => "map",
            Command::Lz { .. } => "lz",
            Command::Extract { .. } => "extract",
        }
    }
}

/// `key=value` lines written to `run.txt`.
#[derive(Default)]
struct Manifest(Vec<(String, String)>);

impl Manifest {
    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn num(&mut self, key: &str, value: f64) {
        self.set(key, format!("{value:?}"));
    }

    fn list(&mut self, key: &str, values: &[f64]) {
        let joined: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        self.set(key, joined.join(","));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn mv(field: &'static str, value_mv: f64) -> Result<f64> {
    if !value_mv.is_finite() {
        return Err(Error::domain(
            field,
            format!("expected a finite value, got {value_mv}"),
        ));
    }
    Ok(value_mv / 1000.0)
}

fn axis(field: &'static str, min_mv: f64, max_mv: f64, points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = (mv(field, min_mv)?, mv(field, max_mv)?);
    if points < 2 || hi <= lo {
        return Err(Error::domain(field, "need max > min and at least 2 points"));
    }
    Ok(linspace(lo, hi, points))
}

fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Everything shared by the subcommands, resolved and validated.
struct Context {
    params: ModelParams,
    source: String,
    opts: IntegratorOptions,
    engine: SweepEngine,
    out_dir: PathBuf,
}

impl Context {
    fn resolve(common: &Common) -> Result<Self> {
        let (params, source) = match (&common.params, common.paper_defaults) {
            (Some(path), _) => (ModelParams::load(path)?, path.display().to_string()),
            (None, true) => (ModelParams::paper(), "paper-defaults".to_string()),
            (None, false) => {
                return Err(Error::domain(
                    "params",
                    "pass --params FILE or --paper-defaults",
                ));
            }
        };
        let opts = IntegratorOptions {
            steps_per_period: common.steps_per_period,
            tolerance: common.tolerance,
            sample_interval: None,
            adaptive: common.adaptive,
        };
        opts.validate()?;
        let engine = if common.threads == 0 {
            SweepEngine::all_cores()
        } else {
            SweepEngine::new(common.threads)?
        };
        std::fs::create_dir_all(&common.out_dir).map_err(|e| Error::io(&common.out_dir, e))?;
        let probe = common.out_dir.join(".lzsm-write-probe");
        std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        let _ = std::fs::remove_file(&probe);
        Ok(Context {
            params,
            source,
            opts,
            engine,
            out_dir: common.out_dir.clone(),
        })
    }

    fn frequency(&self, f_ghz: Option<f64>) -> Result<f64> {
        positive("f_ghz", f_ghz.unwrap_or(10.0 * self.params.delta0()))
    }

    fn t_pump(&self, tpump_ns: Option<f64>) -> Result<f64> {
        let t = tpump_ns.unwrap_or(0.9 / self.params.delta0());
        if t >= 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::domain(
                "tpump_ns",
                format!("must be finite and >= 0, got {t}"),
            ))
        }
    }

    fn manifest(&self, command: &str, common: &Common) -> Manifest {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("params_source", &self.source);
        for line in self.params.to_config_string().lines() {
            if let Some((k, v)) = line.split_once('=') {
                m.set(&format!("model.{}", k.trim()), v.trim());
            }
        }
        m.num("model.kappa_ghz_per_v", self.params.kappa());
        m.set("steps_per_period", self.opts.steps_per_period);
        m.num("tolerance", self.opts.tolerance);
        m.set("adaptive", self.opts.adaptive);
        m.set("threads", self.engine.threads());
        m.set("seed", common.seed);
        m.set("out_dir", self.out_dir.display());
        m
    }

    fn finish(&self, manifest: &Manifest) -> Result<()> {
        write_file(&self.out_dir.join("run.txt"), &manifest.render())
    }
}

/// Runs a parsed command line, printing the summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<()> {
    let ctx = Context::resolve(&cli.common)?;
    let mut m = ctx.manifest(cli.command.name(), &cli.common);
    let p = &ctx.params;
    let mut say = |text: String| {
        let _ = writeln!(out, "{text}");
    };

    match &cli.command {
        Command::Levels {
            vdc_min_mv,
            vdc_max_mv,
            points,
        } => {
            let v = axis("vdc_mv", *vdc_min_mv, *vdc_max_mv, *points)?;
            m.num("vdc_min_mv", *vdc_min_mv);
            m.num("vdc_max_mv", *vdc_max_mv);
            m.set("points", points);
            let mut csv = String::from("v_dc,e_minus_ghz,e_plus_ghz\n");
            let mut min_gap = (f64::INFINITY, 0.0);
            for &x in &v {
                let (lo, hi) = model::adiabatic_levels(p, x)?;
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    format::csv(x),
                    format::csv(lo),
                    format::csv(hi)
                );
                if hi - lo < min_gap.0 {
                    min_gap = (hi - lo, x);
                }
            }
            write_file(&ctx.out_dir.join("levels.csv"), &csv)?;
            say(format!(
                "levels: {} points, minimum gap {} GHz at v_dc = {} V",
                v.len(),
                format::sig(min_gap.0, 6),
                format::sig(min_gap.1, 6)
            ));
        }

        Command::Trace {
            vdc_mv,
            vrf_mv,
            f_ghz,
            tpump_ns,
            t_end_ns,
            sample_ns,
        } => {
            let (v_dc, v_rf) = (mv("vdc_mv", *vdc_mv)?, mv("vrf_mv", *vrf_mv)?);
            let f = ctx.frequency(*f_ghz)?;
            let t_end = positive("t_end_ns", *t_end_ns)?;
            let dt = sample_ns.unwrap_or(1.0 / (20.0 * f));
            let opts = ctx.opts.with_sample_interval(positive("sample_ns", dt)?);
            opts.validate()?;
            for &tp in tpump_ns {
                model::DriveProtocol::pulse(v_dc, v_rf, f, tp)?;
            }
            m.num("vdc_mv", *vdc_mv);
            m.num("vrf_mv", *vrf_mv);
            m.num("f_ghz", f);
            m.list("tpump_ns", tpump_ns);
            m.num("t_end_ns", t_end);
            m.num("sample_ns", dt);

            let traces = pulse_trace(p, v_dc, v_rf, f, tpump_ns, t_end, &opts, &ctx.engine)?;
            let mut files = Vec::new();
            for (tp, traj) in tpump_ns.iter().zip(&traces) {
                let name = if tp.is_infinite() {
                    "trace_cw.csv".to_string()
                } else {
                    format!("trace_tpump_{}ns.csv", format::sig(*tp, 6))
                };
                traj.write_csv(&ctx.out_dir.join(&name))?;
                match reversal_time(traj, t_end) {
                    Some((t, sz)) => say(format!(
                        "{name}: sz(0) = {}, most reversed sz = {} at t = {} ns, sz(end) = {}",
                        format::sig(traj.samples[0].sz, 6),
                        format::sig(sz, 6),
                        format::sig(t, 6),
                        format::sig(traj.last().sz, 6)
                    )),
                    None => say(format!("{name}: empty trajectory")),
                }
                files.push(name);
            }
            m.set("files", files.join(","));
        }

        Command::Scan {
            vdc_min_mv,
            vdc_max_mv,
            points,
            vrf_mv,
            f_ghz,
            tpump_ns,
            min_peak_height,
        } => {
            let v = axis("vdc_mv", *vdc_min_mv, *vdc_max_mv, *points)?;
            let v_rf = mv("vrf_mv", *vrf_mv)?;
            let f = ctx.frequency(*f_ghz)?;
            let t_pump = ctx.t_pump(*tpump_ns)?;
            let peak_opts = peak_options(*min_peak_height)?;
            m.num("vdc_min_mv", *vdc_min_mv);
            m.num("vdc_max_mv", *vdc_max_mv);
            m.set("points", points);
            m.num("vrf_mv", *vrf_mv);
            m.num("f_ghz", f);
            m.num("tpump_ns", t_pump);
            m.num("min_peak_height", *min_peak_height);

            let scan = dc_scan(p, &v, v_rf, f, t_pump, &ctx.opts, &ctx.engine)?;
            scan.write_dir(&ctx.out_dir)?;
            let peaks: Vec<String> = scan
                .peaks(&peak_opts)
                .iter()
                .map(|pk| format!("{} V ({})", format::sig(pk.v, 5), format::sig(pk.height, 3)))
                .collect();
            say(format!(
                "scan: {} points, flip maxima: {}",
                v.len(),
                peaks.join(", ")
            ));
        }

        Command::Map {
            vdc_min_mv,
            vdc_max_mv,
            vdc_points,
            vrf_min_mv,
            vrf_max_mv,
            vrf_points,
            f_ghz,
            tpump_ns,
            svg,
        } => {
            let v_dc = axis("vdc_mv", *vdc_min_mv, *vdc_max_mv, *vdc_points)?;
            let v_rf = axis("vrf_mv", *vrf_min_mv, *vrf_max_mv, *vrf_points)?;
            if v_rf[0] < 0.0 {
                return Err(Error::domain("vrf_min_mv", "RF amplitudes must be >= 0"));
            }
            let f = ctx.frequency(*f_ghz)?;
            let t_pump = ctx.t_pump(*tpump_ns)?;
            m.num("vdc_min_mv", *vdc_min_mv);
            m.num("vdc_max_mv", *vdc_max_mv);
            m.set("vdc_points", vdc_points);
            m.num("vrf_min_mv", *vrf_min_mv);
            m.num("vrf_max_mv", *vrf_max_mv);
            m.set("vrf_points", vrf_points);
            m.num("f_ghz", f);
            m.num("tpump_ns", t_pump);
            m.set("svg", svg);

            let map = map2d(p, &v_dc, &v_rf, f, t_pump, &ctx.opts, &ctx.engine)?;
            map.write_dir(&ctx.out_dir, *svg)?;
            say(format!(
                "map: {}x{} cells, {} predicted resonances in range",
                v_dc.len(),
                v_rf.len(),
                map.overlay.len()
            ));
        }

        Command::Lz {
            delta_l,
            rate_v_per_ns,
            half_span_delta,
        } => {
            let half = positive("half_span_delta", *half_span_delta)?;
            let rates = match rate_v_per_ns {
                Some(r) => r.clone(),
                None => delta_l
                    .iter()
                    .map(|&d| sweep_rate_for_adiabaticity(p, d))
                    .collect::<Result<Vec<_>>>()?,
            };
            if rates.is_empty() {
                return Err(Error::domain("rate_v_per_ns", "no sweep rates given"));
            }
            for &r in &rates {
                positive("rate_v_per_ns", r)?;
            }
            let (a, b) = lz_window(p, half);
            m.num("half_span_delta", half);
            m.num("v_start_v", a);
            m.num("v_end_v", b);
            m.list("rate_v_per_ns", &rates);

            let runs = lz_series(p, a, b, &rates, &ctx.opts, &ctx.engine)?;
            write_file(&ctx.out_dir.join(LZ_CSV), &lz_csv_string(&runs))?;
            for (rate, survival) in &runs {
                let lz = LZParams::new(p.delta0(), p.kappa() * rate)?;
                say(format!(
                    "rate {} V/ns (delta_l {}): survival {} vs formula {}",
                    format::sig(*rate, 6),
                    format::sig(lz.delta_l(), 4),
                    format::sig(*survival, 6),
                    format::sig(analytic::lz_probability(&lz), 6)
                ));
            }
        }

        Command::Extract {
            scan_dir,
            lz_csv,
            min_peak_height,
        } => {
            let peak_opts = peak_options(*min_peak_height)?;
            m.set("scan_dir", scan_dir.display());
            m.set("lz_csv", lz_csv.display());
            m.num("min_peak_height", *min_peak_height);
            let scan = ScanResult::read_dir(scan_dir)?;
            let runs = read_lz_csv(lz_csv)?;
            let ex = extract_delta(&scan, &runs, &peak_opts)?;

            let mut report = String::new();
            let _ = writeln!(report, "kappa_ghz_per_v={:?}", ex.kappa);
            let _ = writeln!(report, "kappa_uncertainty={:?}", ex.kappa_uncertainty);
            let _ = writeln!(report, "comb_rms_residual_v={:?}", ex.fit_residual);
            let peaks: Vec<String> = ex.peaks.iter().map(|(n, v)| format!("{n}:{v:?}")).collect();
            let _ = writeln!(report, "peaks={}", peaks.join(","));
            let _ = writeln!(report, "delta_ghz={:?}", ex.delta);
            let _ = writeln!(report, "delta_uncertainty_ghz={:?}", ex.delta_uncertainty);
            write_file(&ctx.out_dir.join("extract.txt"), &report)?;
            say(format!(
                "kappa = {} +- {} GHz/V from {} resonances",
                format::sig(ex.kappa, 6),
                format::sig(ex.kappa_uncertainty, 2),
                ex.peaks.len()
            ));
            say(format!(
                "delta = {} +- {} GHz from {} LZ runs",
                format::sig(ex.delta, 6),
                format::sig(ex.delta_uncertainty, 2),
                ex.runs.len()
            ));
        }
    }
    ctx.finish(&m)
}

fn peak_options(min_relative_height: f64) -> Result<PeakOptions> {
    if !(0.0..=1.0).contains(&min_relative_height) {
        return Err(Error::domain(
            "min_peak_height",
            format!("must lie in [0, 1], got {min_relative_height}"),
        ));
    }
    Ok(PeakOptions {
        min_relative_height,
    })
}

/// Single-line, `key=value` rendering of a failure for stderr.
pub fn error_line(kind: &str, message: &str) -> String {
    let flat: String = message.lines().map(str::trim).collect::<Vec<_>>().join(" ");
    format!("error kind={kind} message={flat:?}")
}

/// Entry point behind the binary. Returns the process exit code: 0 on
/// success, 2 for invalid input, 1 for anything else.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 2;
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            match e {
                Error::Domain { .. } | Error::Parse { .. } => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unit_flags() {
        let cli = Cli::try_parse_from([
            "lzsm",
            "--paper-defaults",
            "trace",
            "--vdc-mv",
            "-150",
            "--tpump-ns",
            "5,inf",
        ])
        .unwrap();
        match cli.command {
            Command::Trace {
                vdc_mv, tpump_ns, ..
            } => {
                assert_eq!(vdc_mv, -150.0);
                assert_eq!(tpump_ns, vec![5.0, f64::INFINITY]);
            }
            other => panic!("{other:?}"),
        }
        assert!(
            Cli::try_parse_from(["lzsm", "--params", "a", "--paper-defaults", "levels"]).is_err()
        );
    }

    #[test]
    fn error_line_is_single_line() {
        let line = error_line("domain", "bad\nvalue");
        assert_eq!(line, r#"error kind=domain message="bad value""#);
    }

    #[test]
    fn manifest_render() {
        let mut m = Manifest::default();
        m.num("x", 0.1);
        m.list("l", &[1.0, f64::INFINITY]);
        assert_eq!(m.render(), "x=0.1\nl=1.0,inf\n");
    }
}
