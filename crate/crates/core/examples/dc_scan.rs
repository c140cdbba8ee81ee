//! Final magnetization after an 18 ns pulse as a function of V_dc. The spin
//! flips wherever the DC bias puts a multiple of the drive frequency on the
//! avoided crossing.

use lzsm::analytic::resonance_voltages;
use lzsm::experiments::{dc_scan, linspace, PeakOptions, SweepEngine};
use lzsm::model::ModelParams;
use lzsm::propagator::IntegratorOptions;

fn main() -> lzsm::Result<()> {
    let p = ModelParams::paper();
    let f = 10.0 * p.delta0();
    let axis = linspace(-0.4, 0.4, 401);
    let scan = dc_scan(
        &p,
        &axis,
        0.2,
        f,
        18.0,
        &IntegratorOptions::default(),
        &SweepEngine::all_cores(),
    )?;

    let predicted = resonance_voltages(&p, f, 2)?;
    println!("predicted resonances: {predicted:?}");
    let opts = PeakOptions {
        min_relative_height: 0.15,
    };
    for pk in scan.peaks(&opts) {
        println!("flip maximum at {:+.4} V, |dSz| = {:.3}", pk.v, pk.height);
    }

    let flip = scan.flip_signal();
    for (i, v) in scan.v_dc.iter().enumerate().step_by(10) {
        let bar = "#".repeat((flip[i] * 10.0).round() as usize);
        println!("{v:+.2} {:+.3} {bar}", scan.sz_final[i]);
    }
    Ok(())
}
