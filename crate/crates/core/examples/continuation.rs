//! ε-continuation to the singular limit on an interval.

use std::f64::consts::PI;

use singular_fractional::continuation::{
    estimate_limit, run_continuation, ContinuationOptions, EpsSchedule,
};
use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::spectral::max_abs;
use singular_fractional::FracExponent;

fn main() -> singular_fractional::Result<()> {
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 128, 1)?;
    let spec = FracExponent::new(0.5, 0.5)?;
    let report = run_continuation(
        &basis,
        spec,
        &EpsSchedule::default(),
        &ContinuationOptions::default(),
    )?;

    println!(
        "{:>3} {:>12} {:>10} {:>10}",
        "k", "eps", "sup u", "increment"
    );
    for (k, step) in report.steps.iter().enumerate() {
        let inc = k
            .checked_sub(1)
            .map(|j| format!("{:.3e}", report.pairs[j].increment))
            .unwrap_or_default();
        println!(
            "{k:>3} {:>12.4e} {:>10.6} {inc:>10}",
            step.eps, report.sup_trace[k]
        );
    }
    let limit = estimate_limit(&report)?;
    println!(
        "ordering {} energy chain {} tail bound {:.3e} interior min {:.3e}",
        report.ordering_holds(),
        report.energy_chain_holds(),
        limit.tail_bound,
        limit.interior_min
    );
    println!(
        "limit weak residual {:.2e}",
        max_abs(&report.limit_residual)
    );
    Ok(())
}
