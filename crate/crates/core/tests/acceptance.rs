//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;

use lzsm::analytic::{bessel_j, fast_drive_probability, lz_probability, LZParams};
use lzsm::experiments::{
    dc_scan, extract_delta, linspace, lz_series, lz_window, map2d, pulse_trace, reversal_time,
    sweep_rate_for_adiabaticity, HeatMap, PeakOptions, SweepEngine, LZ_DEFAULT_HALF_SPAN_IN_DELTA,
};
use lzsm::model::{DriveProtocol, ModelParams};
use lzsm::propagator::{evolve, evolve_final, IntegratorOptions, SpinState};

const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;
const J1_FIRST_MAX: f64 = 1.841_183_781_340_659;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, pass: bool, what: &str, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!(
            "criterion {id} [{}] {what}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn opts() -> IntegratorOptions {
    IntegratorOptions::default()
}

fn engine() -> SweepEngine {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    SweepEngine::new(cores.max(4)).unwrap()
}

fn lz_oracle(r: &mut Report) {
    let start = Instant::now();
    let p = ModelParams::paper();
    let (a, b) = lz_window(&p, LZ_DEFAULT_HALF_SPAN_IN_DELTA);
    let adiabaticity = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0];
    let rates: Vec<f64> = adiabaticity
        .iter()
        .map(|&d| sweep_rate_for_adiabaticity(&p, d).unwrap())
        .collect();
    let runs = lz_series(&p, a, b, &rates, &opts(), &SweepEngine::serial()).unwrap();
    let worst = runs
        .iter()
        .map(|&(rate, s)| {
            let exact = lz_probability(&LZParams::new(p.delta0(), p.kappa() * rate).unwrap());
            (s - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    r.line(
        1,
        worst < 0.02 && elapsed < Duration::from_secs(60) && runs.len() >= 8,
        "LZ survival vs formula",
        format!(
            "{} rates, delta_l 0.05..2, max rel err {worst:.2e} (< 2e-2), {elapsed:.2?} (< 60 s)",
            runs.len()
        ),
    );
}

fn resonance_positions(r: &mut Report) {
    let p = ModelParams::paper();
    let f = 10.0 * p.delta0();
    let t_pump = 0.9 / p.delta0();
    let scan = dc_scan(
        &p,
        &linspace(-0.4, 0.4, 401),
        0.2,
        f,
        t_pump,
        &opts(),
        &engine(),
    )
    .unwrap();
    let step = scan.grid_step();
    // the n = 2 maxima reach only about a quarter of the n = 1 flip
    let peaks = scan.peaks(&PeakOptions {
        min_relative_height: 0.15,
    });
    let mut worst: f64 = 0.0;
    let mut found = Vec::new();
    for target in [-0.30, -0.15, 0.15, 0.30] {
        let nearest = peaks
            .iter()
            .min_by(|a, b| (a.v - target).abs().total_cmp(&(b.v - target).abs()))
            .map(|pk| pk.v)
            .unwrap_or(f64::NAN);
        worst = worst.max((nearest - target).abs());
        found.push(format!("{nearest:+.4}"));
    }
    r.line(
        2,
        worst <= step,
        "scan flip maxima at +-0.15, +-0.30 V",
        format!(
            "found [{}] V, max offset {:.2} mV (<= grid {:.1} mV)",
            found.join(", "),
            worst * 1e3,
            step * 1e3
        ),
    );
}

fn time_scale(r: &mut Report) {
    let p = ModelParams::paper();
    let o = opts().with_sample_interval(0.05);
    let tr = pulse_trace(
        &p,
        0.15,
        0.26,
        10.0 * p.delta0(),
        &[f64::INFINITY],
        40.0,
        &o,
        &SweepEngine::serial(),
    )
    .unwrap()
    .remove(0);
    let s0 = tr.samples[0].sz;
    let (t_rev, sz_rev) = reversal_time(&tr, 40.0).unwrap();
    let zero = tr
        .samples
        .iter()
        .find(|s| s.sz * s0 < 0.0)
        .map(|s| s.t)
        .unwrap_or(f64::NAN);
    r.line(
        3,
        (15.0..=25.0).contains(&t_rev) && sz_rev * s0 < 0.0,
        "CW reversal time",
        format!(
            "Sz {s0:+.3} -> {sz_rev:+.3} at t = {t_rev:.2} ns (window 15-25 ns); first zero crossing at {zero:.2} ns"
        ),
    );
}

fn fig4_map(p: &ModelParams) -> (HeatMap, Duration, usize) {
    let eng = engine();
    let start = Instant::now();
    let map = map2d(
        p,
        &linspace(-0.5, 0.5, 200),
        &linspace(0.0, 0.8, 200),
        10.0 * p.delta0(),
        0.9 / p.delta0(),
        &opts(),
        &eng,
    )
    .unwrap();
    (map, start.elapsed(), eng.threads())
}

fn bessel_node(r: &mut Report, p: &ModelParams, map: &HeatMap) {
    let f = map.frequency;
    let half = 0.5 * f / p.kappa() / 2.0;
    let v1 = f / p.kappa();
    let col_max = map.strongest_column(v1, half);
    let max = map.fringe_amplitude(v1, half, col_max);
    let node_col = map.nearest_rf_column(J1_FIRST_ZERO * f / p.kappa());
    let at_node = map.fringe_amplitude(v1, half, node_col);
    let at_max = map.fringe_amplitude(
        v1,
        half,
        map.nearest_rf_column(J1_FIRST_MAX * f / p.kappa()),
    );
    r.line(
        4,
        at_node < 0.2 * max,
        "n = 1 fringe at the first J_1 zero",
        format!(
            "x = {J1_FIRST_ZERO:.4} (V_rf = {:.4} V): {at_node:.3} = {:.1}% of max {max:.3} at V_rf = {:.3} V (< 20%); at x = {J1_FIRST_MAX:.4}, the J_1 maximum, {:.1}%",
            map.v_rf[node_col],
            100.0 * at_node / max,
            map.v_rf[col_max],
            100.0 * at_max / max
        ),
    );
}

fn overlay(r: &mut Report, p: &ModelParams, map: &HeatMap) {
    let f = map.frequency;
    let half = 0.25 * f / p.kappa();
    let step = map.dc_step();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &(n, v) in map.overlay.iter().filter(|o| o.0.abs() <= 3) {
        let col = map.strongest_column(v, half);
        let c = map.fringe_center(v, half, col).unwrap_or(f64::NAN);
        worst = worst.max((c - v).abs());
        parts.push(format!("n={n}: {:+.2} mV", (c - v) * 1e3));
    }
    r.line(
        5,
        parts.len() == 6 && worst <= step,
        "resonance overlay vs fringe centers",
        format!(
            "[{}], max {:.2} mV (<= grid {:.2} mV)",
            parts.join(", "),
            worst * 1e3,
            step * 1e3
        ),
    );
}

fn round_trip(r: &mut Report) {
    let mut parts = Vec::new();
    let mut pass = true;
    for delta in [0.05, 0.1] {
        let truth = ModelParams::paper().with_delta0(delta).unwrap();
        let f = 10.0 * delta;
        let reach = 5.0 * f / truth.kappa();
        let scan = dc_scan(
            &truth,
            &linspace(-reach, reach, 601),
            2.3 * f / truth.kappa(),
            f,
            0.9 / delta,
            &opts(),
            &engine(),
        )
        .unwrap();
        let (a, b) = lz_window(&truth, LZ_DEFAULT_HALF_SPAN_IN_DELTA);
        let rates: Vec<f64> = [0.1, 0.3, 0.6]
            .iter()
            .map(|&d| sweep_rate_for_adiabaticity(&truth, d).unwrap())
            .collect();
        let runs = lz_series(&truth, a, b, &rates, &opts(), &engine()).unwrap();
        match extract_delta(&scan, &runs, &PeakOptions::default()) {
            Ok(ex) => {
                let err = (ex.delta - delta).abs() / delta;
                pass &= err < 0.05;
                parts.push(format!(
                    "Delta {delta} -> {:.5} ({:+.2}%)",
                    ex.delta,
                    100.0 * (ex.delta - delta) / delta
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("Delta {delta}: {e}"));
            }
        }
    }
    r.line(
        6,
        pass,
        "Delta extraction round trip",
        format!("{} (< 5%)", parts.join("; ")),
    );
}

fn properties(r: &mut Report) {
    let p = ModelParams::paper();
    let cw = DriveProtocol::continuous_wave(0.15, 0.26, 0.5).unwrap();

    let tr = evolve(
        &p,
        &cw,
        SpinState::adiabatic_ground(&p, &cw),
        100.0,
        &opts(),
    )
    .unwrap();
    let norm = tr
        .samples
        .iter()
        .map(|s| (s.p_plus + s.p_minus - 1.0).abs())
        .fold((tr.final_state.norm_sqr().sqrt() - 1.0).abs(), f64::max);

    let psi0 = SpinState::normalized(C::new(0.3, -0.4), C::new(0.5, 0.2)).unwrap();
    let a = evolve(&p, &cw, psi0, 40.0, &opts()).unwrap();
    let mut phase: f64 = 0.0;
    for ph in [0.7, -2.1, PI] {
        let b = evolve(&p, &cw, psi0.with_global_phase(ph), 40.0, &opts()).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            phase = phase
                .max((x.sz - y.sz).abs())
                .max((x.p_plus - y.p_plus).abs());
        }
    }

    let sz = |spp: usize| {
        let psi = evolve_final(
            &p,
            &cw,
            SpinState::adiabatic_ground(&p, &cw),
            40.0,
            &opts().with_steps_per_period(spp),
        )
        .unwrap();
        2.0 * (psi.p_plus() - psi.p_minus())
    };
    let conv = (sz(512) - sz(1024)).abs();

    let mut even: f64 = 0.0;
    for v_dc in [0.05, 0.15, 0.22, 0.3] {
        for t in [3.0, 11.0, 20.0] {
            let plus = DriveProtocol::continuous_wave(v_dc, 0.26, 0.5).unwrap();
            let minus = DriveProtocol::continuous_wave(-v_dc, 0.26, 0.5).unwrap();
            let d = fast_drive_probability(&p, &plus, t, 40).unwrap()
                - fast_drive_probability(&p, &minus, t, 40).unwrap();
            even = even.max(d.abs());
        }
    }

    let mut rec: f64 = 0.0;
    for k in 0..=99 {
        let x = 0.5 + 49.5 * k as f64 / 99.0;
        for n in 1..=20 {
            let res = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap()
                - 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
            rec = rec.max(res.abs());
        }
    }

    let axis = linspace(-0.4, 0.4, 81);
    let s1 = dc_scan(&p, &axis, 0.2, 0.5, 18.0, &opts(), &SweepEngine::serial()).unwrap();
    let sn = dc_scan(&p, &axis, 0.2, 0.5, 18.0, &opts(), &engine()).unwrap();
    let rf = linspace(0.0, 0.8, 9);
    let m1 = map2d(&p, &axis, &rf, 0.5, 18.0, &opts(), &SweepEngine::serial()).unwrap();
    let mn = map2d(&p, &axis, &rf, 0.5, 18.0, &opts(), &engine()).unwrap();
    let identical =
        s1.to_csv_string() == sn.to_csv_string() && m1.to_csv_string() == mn.to_csv_string();

    let pass =
        norm < 1e-9 && phase < 1e-12 && conv < 1e-6 && even < 1e-10 && rec < 1e-9 && identical;
    r.line(
        7,
        pass,
        "property suite",
        format!(
            "norm {norm:.1e} (<1e-9), phase {phase:.1e} (<1e-12), step doubling {conv:.1e} (<1e-6), \
             evenness {even:.1e} (<1e-10), recurrence {rec:.1e} (<1e-9), CSV 1 vs {} threads {}",
            engine().threads(),
            if identical { "identical" } else { "DIFFER" }
        ),
    );
}

fn main() {
    let mut r = Report { failed: 0 };
    lz_oracle(&mut r);
    resonance_positions(&mut r);
    time_scale(&mut r);

    let p = ModelParams::paper();
    let (map, elapsed, threads) = fig4_map(&p);
    bessel_node(&mut r, &p, &map);
    overlay(&mut r, &p, &map);

    round_trip(&mut r);
    properties(&mut r);

    r.line(
        8,
        elapsed < Duration::from_secs(600) && threads >= 4 && map.sz.len() == 40_000,
        "200x200 map wall time",
        format!(
            "{} cells on {threads} threads in {elapsed:.1?} (< 600 s)",
            map.sz.len()
        ),
    );

    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
