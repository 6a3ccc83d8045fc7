//! Two schedules to the same final ε, and a cold restart, reach the same
//! limit.

use std::f64::consts::PI;

use singular_fractional::continuation::{
    run_continuation, uniqueness_probe, ContinuationOptions, EpsSchedule,
};
use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::FracExponent;

fn main() -> singular_fractional::Result<()> {
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 64, 1)?;
    let spec = FracExponent::new(0.5, 0.5)?;
    let opts = ContinuationOptions::default();
    let a = EpsSchedule::default();
    let b = EpsSchedule::ending_at(a.last(), 0.4)?;
    println!(
        "schedule a: {} steps, schedule b: {} steps from {:.4}",
        a.steps, b.steps, b.eps0
    );

    let (probe, ra, _) = uniqueness_probe(&basis, spec, &a, &b, &opts, &opts, 0.0)?;
    println!(
        "limits differ by {:.2e} (bound {:.2e}): {}",
        probe.sup_difference,
        probe.bound,
        if probe.passed() { "pass" } else { "fail" }
    );

    let cold = ContinuationOptions {
        warm_start: false,
        ..opts
    };
    let fresh = run_continuation(&basis, spec, &a, &cold)?;
    let d = ra
        .limit
        .as_ref()
        .unwrap()
        .sup_distance(fresh.limit.as_ref().unwrap())?;
    println!("warm vs cold start: {d:.2e}");
    Ok(())
}
