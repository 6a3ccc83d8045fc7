//! One regularized solve with its bracket and energy certificates.

use std::f64::consts::PI;

use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::monotone::{solve_regularized, SolveOptions};
use singular_fractional::FracExponent;

fn main() -> singular_fractional::Result<()> {
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 128, 1)?;
    let spec = FracExponent::new(0.5, 0.5)?;
    let opts = SolveOptions::default();
    let r = solve_regularized(&basis, spec, 0.1, None, &opts)?;

    let c = &r.bracket.certificates;
    println!(
        "converged after {} iterations, gap {:.2e}",
        r.bracket.iterations, r.bracket.gap
    );
    println!(
        "ascending {} descending {} confined {}",
        c.ascending(),
        c.descending(),
        c.confined()
    );
    println!(
        "sup u = {:.6}, supersolution sup = {:.6}",
        r.solution().sup_norm(),
        r.supersolution.sup_norm()
    );
    println!(
        "energy: |u|² = {:.8}, <g(u), u> = {:.8}, defect {:.1e}",
        r.energy.hs_norm_sq, r.energy.pairing, r.energy.relative_defect
    );
    println!("certified: {}", r.certified(&opts));
    Ok(())
}
