//! Recovers the tunnel splitting from simulated measurements alone: a DC
//! scan fixes the bias-per-volt from the resonance comb, then LZ sweeps give
//! Delta through the survival probability.

use lzsm::experiments::{
    dc_scan, extract_delta, linspace, lz_series, lz_window, sweep_rate_for_adiabaticity,
    PeakOptions, SweepEngine, LZ_DEFAULT_HALF_SPAN_IN_DELTA,
};
use lzsm::model::ModelParams;
use lzsm::propagator::IntegratorOptions;

fn main() -> lzsm::Result<()> {
    let engine = SweepEngine::all_cores();
    let opts = IntegratorOptions::default();
    for delta in [0.05, 0.1] {
        let truth = ModelParams::paper().with_delta0(delta)?;
        let f = 10.0 * delta;
        // kappa V_rf / f = 2.3 keeps n = 1 and n = 2 of comparable height
        let v_rf = 2.3 * f / truth.kappa();
        let axis = linspace(
            -2.5 * 2.0 * f / truth.kappa(),
            2.5 * 2.0 * f / truth.kappa(),
            601,
        );
        let scan = dc_scan(&truth, &axis, v_rf, f, 0.9 / delta, &opts, &engine)?;

        let (a, b) = lz_window(&truth, LZ_DEFAULT_HALF_SPAN_IN_DELTA);
        let rates = [0.1, 0.3, 0.6]
            .iter()
            .map(|&d| sweep_rate_for_adiabaticity(&truth, d))
            .collect::<lzsm::Result<Vec<_>>>()?;
        let runs = lz_series(&truth, a, b, &rates, &opts, &engine)?;

        let ex = extract_delta(&scan, &runs, &PeakOptions::default())?;
        println!(
            "Delta = {delta}: kappa {:.4} (true {:.4}) GHz/V, Delta^ = {:.5} +- {:.1e} GHz ({:+.2}%)",
            ex.kappa,
            truth.kappa(),
            ex.delta,
            ex.delta_uncertainty,
            100.0 * (ex.delta - delta) / delta
        );
    }
    Ok(())
}
