//! Monotone iteration with a user-supplied right-hand side.

use std::f64::consts::PI;

use singular_fractional::geometry::{Domain, EigenBasis};
use singular_fractional::monotone::{monotone_iterate, SolveOptions};
use singular_fractional::nonlinearity::{verify_g1_g2, RuleFn};
use singular_fractional::spectral::solve_shifted;
use singular_fractional::GridField;

fn main() -> singular_fractional::Result<()> {
    // g(u) = exp(-u), nonincreasing with |g'| ≤ 1 on u ≥ 0
    let g = RuleFn::new(|u: f64| (-u.max(0.0)).exp()).with_lipschitz(1.0);
    let rep = verify_g1_g2(&g, 64)?;
    println!(
        "nonincreasing {}, blows up at 0 {}",
        rep.nonincreasing, rep.blowup
    );

    let s = 0.75;
    let basis = EigenBasis::with_resolution(Domain::interval(PI)?, 64, 1)?;
    let grid = basis.grid().clone();
    // 0 is a subsolution; (-Δ)^{-s} 1 is a supersolution since g ≤ 1
    let sub = GridField::zeros(grid.clone());
    let one = basis.analyze(&GridField::constant(grid, 1.0))?;
    let sup = solve_shifted(&one, s, 0.0)?.synthesize();

    let r = monotone_iterate(&basis, s, &g, &sub, &sup, &SolveOptions::default())?;
    println!(
        "converged {} in {} iterations, gap {:.1e}, sup u = {:.6}",
        r.converged,
        r.iterations,
        r.gap,
        r.lower.sup_norm()
    );
    Ok(())
}
