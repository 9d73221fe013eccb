//! Momentum occupations of XXZ ground states and the power-law exponent
//! near the Fermi point, against the Luttinger-liquid prediction.

use momentum_entanglement::workflows::{occupation_report, SolveOptions};

fn main() -> momentum_entanglement::Result<()> {
    println!("Delta   alpha_fit   alpha_theory");
    for delta in [0.0, 0.2, 0.6, 1.0] {
        let r = occupation_report(16, delta, &SolveOptions::default())?;
        println!(
            "{delta:5.2} {:11.5} {:12.5}",
            r.fit.param("b"),
            r.alpha_theory.unwrap_or(f64::NAN)
        );
    }
    let r = occupation_report(16, 0.6, &SolveOptions::default())?;
    println!("\nN = 16, Delta = 0.6");
    for (k, n) in r.momenta.iter().zip(&r.occupations) {
        println!("  k = {k:+.4}  n_k = {n:.6}");
    }
    Ok(())
}
