//! Lowest two levels of the Fe2+ doublet as the junction voltage moves the
//! atom through the avoided crossing.

use lzsm::experiments::linspace;
use lzsm::model::{adiabatic_levels, bias, ModelParams};

fn main() -> lzsm::Result<()> {
    let p = ModelParams::paper();
    println!(
        "kappa = {:.4} GHz/V, lever arm = {:.4e} nm/V",
        p.kappa(),
        p.lever_arm()
    );
    println!("{:>8} {:>10} {:>10} {:>10}", "V_dc", "eps", "E-", "E+");
    for v in linspace(-0.3, 0.3, 13) {
        let (lo, hi) = adiabatic_levels(&p, v)?;
        println!("{v:>8.3} {:>10.5} {lo:>10.5} {hi:>10.5}", bias(&p, v)?);
    }
    let (lo, hi) = adiabatic_levels(&p, 0.0)?;
    println!("gap at the crossing: {:.4} GHz", hi - lo);
    Ok(())
}
