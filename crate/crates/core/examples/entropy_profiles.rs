//! Block entropy profiles of an XXZ ground state: positive blocks, pairs
//! and energy blocks, with a Rényi order alongside.

use momentum_entanglement::modes::BlockFamily;
use momentum_entanglement::rdm::entropy_scan;
use momentum_entanglement::workflows::{xxz_momentum_state, SolveOptions, K_FERMI};

fn main() -> momentum_entanglement::Result<()> {
    let xs = xxz_momentum_state(12, 0.5, &SolveOptions::default())?;
    for family in [
        BlockFamily::Positive,
        BlockFamily::Pair,
        BlockFamily::Energy,
    ] {
        let profile = entropy_scan(&xs.state, family, K_FERMI, &[2.0])?;
        println!("family {}", family.as_str());
        for p in &profile.points {
            println!(
                "  {:8.4}  S = {:.6}  S_2 = {:.6}",
                p.parameter, p.entropy.vn, p.entropy.renyi[0].1
            );
        }
    }
    Ok(())
}
