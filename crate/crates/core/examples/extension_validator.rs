//! Checks the spectral operator against its harmonic extension to the
//! half-cylinder: flux calibration, profiles and energy.

use std::f64::consts::PI;

use singular_fractional::extension::{
    calibrate_cs, cylinder_energy, extend_field, extract_flux, YGridPolicy,
};
use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::spectral::{apply_fractional, hs_norm_sq};
use singular_fractional::SpectralField;

fn main() -> singular_fractional::Result<()> {
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 16, 1)?;
    let policy = YGridPolicy::default();

    for s in [0.25, 0.5, 0.75] {
        let cal = calibrate_cs(&basis, s, 5, &policy)?;
        println!("s = {s}: c_s = {:.6}, spread {:.1e}", cal.c_s, cal.spread);
    }

    let s = 0.5;
    let coeffs: Vec<f64> = (0..16)
        .map(|i| if i < 4 { 1.0 / (1 + i) as f64 } else { 0.0 })
        .collect();
    let u = SpectralField::new(basis.clone(), coeffs)?;
    let field = extend_field(&u, s, &policy)?;
    let flux = extract_flux(&field, policy.fit_nodes)?;
    let direct = apply_fractional(&u, s)?;
    let err = flux
        .coeffs()
        .iter()
        .zip(direct.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("flux vs (-Δ)^(1/2) u: max coefficient error {err:.2e}");
    println!(
        "cylinder energy {:.8}, |u|² = {:.8}",
        cylinder_energy(&field)?,
        hs_norm_sq(&u, s)?
    );
    for y in [0.0, 0.5, 1.0, 2.0] {
        println!("  sup U(., {y}) = {:.6}", field.slice(y).sup_norm());
    }
    Ok(())
}
