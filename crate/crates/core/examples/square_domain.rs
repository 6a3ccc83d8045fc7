//! Continuation on the square with the 12 × 12 tensor basis.

use std::f64::consts::PI;

use singular_fractional::continuation::{run_continuation, ContinuationOptions, EpsSchedule};
use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::spectral::max_abs;
use singular_fractional::FracExponent;

fn main() -> singular_fractional::Result<()> {
    let square = Domain::rectangle(PI, PI)?;
    let basis = EigenBasis::tensor_with_resolution(square, &[12, 12], 1)?;
    println!(
        "{} modes on a {:?} grid",
        basis.len(),
        basis.grid().nodes_per_axis()
    );

    let spec = FracExponent::new(0.5, 0.5)?;
    let report = run_continuation(
        &basis,
        spec,
        &EpsSchedule::default(),
        &ContinuationOptions::default(),
    )?;
    let limit = report.limit.as_ref().expect("completed run has a limit");
    let n = basis.grid().nodes_per_axis()[0];
    let centre = limit.values()[(n / 2) * n + n / 2];
    println!(
        "completed {} steps, ordering {}",
        report.completed(),
        report.ordering_holds()
    );
    println!("u at the centre {centre:.6}, sup {:.6}", limit.sup_norm());
    println!(
        "limit weak residual {:.2e}",
        max_abs(&report.limit_residual)
    );
    Ok(())
}
