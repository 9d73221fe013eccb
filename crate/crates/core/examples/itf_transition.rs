//! Ising chain in a transverse field: the entropy density plateau below
//! the critical field, its decay above it, the finite-size collapse and the
//! single-mode approximation of the peak.

use std::f64::consts::LN_2;

use momentum_entanglement::quadratic::{
    collapse_row, entropy_per_site, single_mode_approx, thermo_entropy_per_site, QuadraticModel,
};

fn main() -> momentum_entanglement::Result<()> {
    println!("plateau value ln 2 - 1/2 = {:.6}", LN_2 - 0.5);
    println!("   J     s_200      s_2000     s_inf      single-mode/200");
    for i in 0..=8 {
        let j = 0.25 * i as f64;
        println!(
            "{j:5.2} {:9.6} {:10.6} {:10.6} {:12.6}",
            entropy_per_site(&QuadraticModel::ising(j), 200)?,
            entropy_per_site(&QuadraticModel::ising(j), 2000)?,
            thermo_entropy_per_site(j, 1.0),
            single_mode_approx(j, 200)? / 200.0
        );
    }

    println!("\ncollapse N (J - 1) -> s_N - s_inf");
    for jt in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let a = collapse_row(100, 1.0 + jt / 100.0)?;
        let b = collapse_row(400, 1.0 + jt / 400.0)?;
        println!("{jt:6.1} {:12.3e} {:12.3e}", a.s_tilde, b.s_tilde);
    }
    Ok(())
}
