//! A power-sum nonlinearity has no scaling law, so each frozen problem is
//! shot directly; the Nehari projection then fixes the energy level.
//!
//! Run with `cargo run --release --example power_sum`.

use peakscope::energy::{energy_breakdown, nehari_project, nehari_residual};
use peakscope::model::ProblemParams;
use peakscope::radial::{shoot, FrozenCoefficients, ShootOptions};

fn main() -> peakscope::Result<()> {
    let params = ProblemParams::power_sum(3, 2.0, &[(1.0, 3.0), (0.5, 4.0)], 3.0);
    for report in params.validate()? {
        println!("hypothesis warning: {report:?}");
    }
    for v in [0.5, 1.0, 2.0] {
        let frozen = FrozenCoefficients::new(1.0, v, 1.0)?;
        let w = shoot(&params, frozen, &ShootOptions::default())?;
        let theta = nehari_project(&w, &frozen)?;
        let e = energy_breakdown(&w.scaled(theta), &frozen)?;
        println!(
            "V = {v:3.1}: w(0) = {:.10}  theta* - 1 = {:+.1e}  Sigma = {:.10}  Nehari {:.1e}",
            w.shooting_value,
            theta - 1.0,
            e.i_value,
            nehari_residual(&e, &frozen, params.p)
        );
    }
    Ok(())
}
