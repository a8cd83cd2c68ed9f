//! Linear dependence of the coefficient gradients ∇α, ∇V, ∇K.
//!
//! Run with `cargo run --example gram_rank`.

use peakscope::field::CoefficientField;
use peakscope::locator::{gram_rank, GRAM_TOL};

fn main() -> peakscope::Result<()> {
    let cases = [
        ("proportional", ("1", "1 + x1^2", "2 + x1"), [1.0, 0.0, 0.0]),
        (
            "orthonormal",
            ("1 + x3", "1 + x1", "1 + x2"),
            [0.0, 0.0, 0.0],
        ),
        (
            "alpha = V + K",
            ("3 + x1 + 2*x2 - x2 + x3", "1 + x1 + 2*x2", "1 - x2 + x3"),
            [0.0, 0.0, 0.0],
        ),
    ];
    for (name, (a, v, k), z) in cases {
        let field = CoefficientField::parse(a, v, k, 3)?;
        let g = gram_rank(&field, &z, GRAM_TOL)?;
        println!(
            "{name:<14} rank {}  dependent {}  singular values {:?}",
            g.rank, g.lin_dep, g.singular_values
        );
    }
    Ok(())
}
