//! Magnetization under a resonant RF drive: continuous wave and two pulse
//! lengths. A pulse that ends after half a Rabi period leaves the spin
//! reversed.

use lzsm::analytic::{gamma_n, ResonanceSpec};
use lzsm::experiments::{pulse_trace, reversal_time, SweepEngine};
use lzsm::model::{DriveProtocol, ModelParams};
use lzsm::propagator::IntegratorOptions;

fn main() -> lzsm::Result<()> {
    let p = ModelParams::paper();
    let (v_dc, v_rf, f) = (0.15, 0.26, 0.5);

    let cw = DriveProtocol::continuous_wave(v_dc, v_rf, f)?;
    let res = ResonanceSpec::evaluate(&p, &cw, 1)?;
    println!(
        "Gamma_1 = {:.5} GHz, full flip after {:.2} ns",
        gamma_n(&p, &cw, 1)?,
        0.5 / res.gamma_n
    );

    let t_pumps = [f64::INFINITY, 9.0, 18.0];
    let opts = IntegratorOptions::default().with_sample_interval(0.5);
    let traces = pulse_trace(
        &p,
        v_dc,
        v_rf,
        f,
        &t_pumps,
        40.0,
        &opts,
        &SweepEngine::all_cores(),
    )?;

    for (tp, tr) in t_pumps.iter().zip(&traces) {
        let (t, sz) = reversal_time(tr, 40.0).expect("non-empty");
        println!(
            "t_pump = {tp:>5}: Sz(0) = {:+.3}, min Sz = {sz:+.3} at {t:.1} ns, Sz(40 ns) = {:+.3}",
            tr.samples[0].sz,
            tr.last().sz
        );
    }

    println!("\n  t(ns)      CW   18 ns");
    for (a, b) in traces[0].samples.iter().zip(&traces[2].samples).step_by(8) {
        println!("{:>7.1} {:>+7.3} {:>+7.3}", a.t, a.sz, b.sz);
    }
    Ok(())
}
