//! The minimax block entropy: for each block size the least entangled block,
//! then the size where that minimum is largest.

use momentum_entanglement::rdm::{minimax_entropy, MinimaxMode};
use momentum_entanglement::workflows::{xxz_momentum_state, SolveOptions};

fn main() -> momentum_entanglement::Result<()> {
    let xs = xxz_momentum_state(12, 0.5, &SolveOptions::default())?;
    for (label, mode) in [
        ("exhaustive", MinimaxMode::Exhaustive),
        ("heuristic", MinimaxMode::Heuristic { seed: 1 }),
    ] {
        let r = minimax_entropy(&xs.state, 6, mode)?;
        println!(
            "{label}: S_M = {:.6} at size {} block {:?}",
            r.value, r.size, r.block
        );
        for m in &r.per_size {
            println!("  n = {}  min S = {:.6}  {:?}", m.size, m.entropy, m.block);
        }
    }
    Ok(())
}
