//! The regularized right-hand side and its sampled certification.

use singular_fractional::nonlinearity::{verify_g1_g2, SingularRhs};

fn main() -> singular_fractional::Result<()> {
    for eps in [1.0, 0.1, 0.01, 0.0] {
        let g = SingularRhs::new(0.5, eps)?;
        let r = 0.01;
        let lip = if eps > 0.0 {
            format!("{:.3}", g.lipschitz(0.0)?)
        } else {
            "unbounded".into()
        };
        println!(
            "eps = {eps:<5} g({r}) = {:.4}  sup |g'| on [0, ∞) = {lip}",
            g.eval_g(r)?
        );
    }

    let singular = verify_g1_g2(&SingularRhs::limit(0.5)?, 64)?;
    let regular = verify_g1_g2(&SingularRhs::new(0.5, 0.1)?, 64)?;
    println!(
        "u^(-1/2): blowup {} nonincreasing {}",
        singular.blowup, singular.nonincreasing
    );
    println!(
        "(0.1 + u)^(-1/2): blowup {} nonincreasing {}",
        regular.blowup, regular.nonincreasing
    );
    Ok(())
}
