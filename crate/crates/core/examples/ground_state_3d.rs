//! Canonical ground state in three dimensions with its diagnostics.
//!
//! Run with `cargo run --release --example ground_state_3d`.

use peakscope::energy::{energy_breakdown, nehari_residual, pohozaev_residual};
use peakscope::model::ProblemParams;
use peakscope::radial::{fit_decay_rate, ode_residual_report, shoot_canonical, FrozenCoefficients};

fn main() -> peakscope::Result<()> {
    let params = ProblemParams::pure_power(3, 2.0, 4.0, 4.0);
    let unit = FrozenCoefficients::UNIT;
    let w = shoot_canonical(&params, 1e-12)?;
    println!(
        "w(0) = {:.15}  on {} nodes up to r = {:.2}",
        w.shooting_value,
        w.r.len(),
        w.r.last().unwrap()
    );

    let e = energy_breakdown(&w, &unit)?;
    println!(
        "A = {:.12}  B = {:.12}  Phi = {:.12}  I = {:.12}",
        e.kinetic, e.mass, e.primitive, e.i_value
    );
    println!(
        "Nehari residual   {:.2e}",
        nehari_residual(&e, &unit, params.p)
    );
    println!("Pohozaev residual {:.2e}", pohozaev_residual(&w, &unit)?);

    let res = ode_residual_report(&w, &unit)?;
    println!(
        "ODE residual      {:.2e} (flux balance {:.2e}, consistency {:.2e})",
        res.scaled(),
        res.equation,
        res.consistency
    );
    let fit = fit_decay_rate(&w, &unit)?;
    println!(
        "decay slope {:.6} vs predicted {:.6} ({:.2e} relative)",
        fit.fitted_slope,
        fit.predicted_slope,
        fit.relative_error()
    );
    Ok(())
}
