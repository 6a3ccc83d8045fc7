//! Applying and inverting the spectral fractional Laplacian.

use std::f64::consts::PI;

use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::spectral::{apply_fractional, hs_norm, solve_shifted};
use singular_fractional::GridField;

fn main() -> singular_fractional::Result<()> {
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 64, 2)?;
    let f = GridField::from_fn(basis.grid().clone(), |x| x[0] * (PI - x[0]));
    let c = basis.analyze(&f)?;

    for s in [0.25, 0.5, 0.75, 1.0] {
        let lu = apply_fractional(&c, s)?;
        let back = solve_shifted(&lu, s, 0.0)?;
        let err = back.synthesize().sup_distance(&c.synthesize())?;
        println!(
            "s = {s:<4}  |u|_H^s = {:.6}  sup (-Δ)^s u = {:.4}  inverse error {err:.1e}",
            hs_norm(&c, s)?,
            lu.synthesize().sup_norm()
        );
    }

    // (-Δ) applied to x(π-x) is the constant 2, up to truncation
    let lap = apply_fractional(&c, 1.0)?.synthesize();
    let mid = lap.values()[lap.len() / 2];
    println!("(-Δ)[x(π-x)] at the midpoint: {mid:.4}");
    Ok(())
}
