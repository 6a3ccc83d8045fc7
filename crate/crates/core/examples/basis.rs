//! Dirichlet eigenpairs on an interval and a rectangle, and the
//! synthesis/analysis round trip.

use std::f64::consts::PI;

use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::SpectralField;

fn main() -> singular_fractional::Result<()> {
    let line = EigenBasis::with_resolution(Domain::interval(PI)?, 8, 2)?;
    println!(
        "interval: {} modes on {} nodes",
        line.len(),
        line.grid().len()
    );
    for (i, m) in line.modes().iter().enumerate().take(4) {
        println!(
            "  phi_{} index {:?} lambda {}",
            i + 1,
            m.index,
            m.eigenvalue
        );
    }

    let rect = Domain::rectangle(PI, 2.0 * PI)?;
    let lowest = EigenBasis::with_resolution(rect, 6, 1)?;
    let tensor = EigenBasis::tensor_with_resolution(rect, &[2, 3], 1)?;
    println!("rectangle, lowest 6:");
    for m in lowest.modes() {
        println!("  {:?} lambda {:.4}", m.index, m.eigenvalue);
    }
    println!("rectangle, 2 x 3 tensor set:");
    for m in tensor.modes() {
        println!("  {:?} lambda {:.4}", m.index, m.eigenvalue);
    }

    let coeffs: Vec<f64> = (0..line.len()).map(|i| 1.0 / (1 + i) as f64).collect();
    let u = SpectralField::new(line.clone(), coeffs.clone())?;
    let back = line.analyze(&u.synthesize())?;
    let err = coeffs
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "round-trip error {err:.2e}, orthonormality defect {:.2e}",
        line.orthonormality_defect()
    );
    Ok(())
}
