//! Interference map over (V_dc, V_rf). Fringes sit on the resonance comb and
//! fade where the Bessel factor J_n(kappa V_rf / f) vanishes. Writes the CSV,
//! the overlay list and an SVG rendering into the directory given as the
//! first argument (default `lzsm_map_out`).

use std::path::PathBuf;
use std::time::Instant;

use lzsm::experiments::{linspace, map2d, SweepEngine};
use lzsm::model::ModelParams;
use lzsm::propagator::IntegratorOptions;

fn main() -> lzsm::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "lzsm_map_out".into()),
    );
    std::fs::create_dir_all(&out).map_err(|e| lzsm::Error::Io {
        path: out.clone(),
        source: e,
    })?;

    let p = ModelParams::paper();
    let f = 10.0 * p.delta0();
    let engine = SweepEngine::all_cores();
    let start = Instant::now();
    let map = map2d(
        &p,
        &linspace(-0.4, 0.4, 81),
        &linspace(0.0, 0.8, 81),
        f,
        18.0,
        &IntegratorOptions::default(),
        &engine,
    )?;
    println!(
        "{} cells on {} threads in {:.1?}",
        map.sz.len(),
        engine.threads(),
        start.elapsed()
    );

    let j1_zero = 3.8317 * f / p.kappa();
    let col = map.strongest_column(0.15, 0.02);
    println!(
        "n = 1 fringe: strongest at V_rf = {:.3} V ({:.2}), at the J_1 zero {:.3} V: {:.2}",
        map.v_rf[col],
        map.fringe_amplitude(0.15, 0.02, col),
        j1_zero,
        map.fringe_amplitude(0.15, 0.02, map.nearest_rf_column(j1_zero))
    );
    for (n, v) in &map.overlay {
        if *n > 0 {
            let col = map.strongest_column(*v, 0.02);
            let c = map.fringe_center(*v, 0.02, col).unwrap_or(f64::NAN);
            println!("n = {n}: predicted {v:.4} V, fringe center {c:.4} V");
        }
    }

    map.write_dir(&out, true)?;
    println!("wrote {}", out.display());
    Ok(())
}
