//! Coefficient fields from expression strings: values, exact gradients,
//! kink flags and a sampled positivity certificate.
//!
//! Run with `cargo run --example coefficient_expressions`.

use peakscope::expr::parse;
use peakscope::field::{BoxDomain, CoefficientField};

fn main() -> peakscope::Result<()> {
    let e = parse("exp(-(x1-1)^2) + 0.5*abs(x2)", 3)?;
    println!("parsed: {e}");
    for z in [[1.0, 0.5, 0.0], [0.0, 0.0, 0.0]] {
        let ev = e.eval_with_gradient(&z)?;
        println!(
            "  at {z:?}: value {:.6}, gradient {:?}, nonsmooth {}",
            ev.value, ev.gradient, ev.nonsmooth
        );
    }
    match parse("1 + x4", 3) {
        Err(err) => println!("rejected: {err}"),
        Ok(_) => unreachable!(),
    }

    let mut field = CoefficientField::parse("1 + 0.1*sin(x1)", "1 + x1^2 + x2^2", "2 - 0.5*x3", 3)?;
    let domain = BoxDomain::cube(3, 1.0)?;
    let cert = field.certify_positive(&domain, 0.5, 11)?;
    println!(
        "on [-1,1]^3: min alpha {:.4}, min V {:.4}, min K {:.4}",
        cert.min_alpha, cert.min_v, cert.min_k
    );
    let fe = field.eval(&[0.5, -0.5, 1.0])?;
    println!("frozen at (0.5,-0.5,1): {:?}", fe.frozen);
    println!(
        "grad alpha {:?}\ngrad V     {:?}\ngrad K     {:?}",
        fe.grad_alpha, fe.grad_v, fe.grad_k
    );
    Ok(())
}
