//! Single passages through the avoided crossing at different sweep rates,
//! compared with the Landau-Zener formula.

use lzsm::analytic::{lz_probability, LZParams};
use lzsm::experiments::{
    lz_series, lz_window, sweep_rate_for_adiabaticity, SweepEngine, LZ_DEFAULT_HALF_SPAN_IN_DELTA,
};
use lzsm::model::ModelParams;
use lzsm::propagator::IntegratorOptions;

fn main() -> lzsm::Result<()> {
    let p = ModelParams::paper();
    let (a, b) = lz_window(&p, LZ_DEFAULT_HALF_SPAN_IN_DELTA);
    let adiabaticity = [0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0];
    let rates = adiabaticity
        .iter()
        .map(|&d| sweep_rate_for_adiabaticity(&p, d))
        .collect::<lzsm::Result<Vec<_>>>()?;
    let runs = lz_series(
        &p,
        a,
        b,
        &rates,
        &IntegratorOptions::default(),
        &SweepEngine::all_cores(),
    )?;

    println!("sweep {a:+.3} V -> {b:+.3} V");
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>9}",
        "delta", "rate V/ns", "numeric", "formula", "rel err"
    );
    for (d, (rate, survival)) in adiabaticity.iter().zip(&runs) {
        let exact = lz_probability(&LZParams::new(p.delta0(), p.kappa() * rate)?);
        println!(
            "{d:>6} {rate:>12.4e} {survival:>12.5e} {exact:>12.5e} {:>9.2e}",
            (survival - exact).abs() / exact
        );
    }
    Ok(())
}
