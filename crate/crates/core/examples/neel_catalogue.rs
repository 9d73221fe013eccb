//! The Néel state in momentum space compared with its closed-form
//! amplitudes and entropy catalogue.

use std::f64::consts::{FRAC_PI_2, LN_2};

use momentum_entanglement::ed::neel_state;
use momentum_entanglement::mbft::{
    fourier_matrix, max_difference_up_to_phase, transform, TransformMethod,
};
use momentum_entanglement::modes::{Boundary, ModeBlock, MomentumGrid};
use momentum_entanglement::rdm::{block_entropy_state, neel_reference, EntropyMethod};

fn main() -> momentum_entanglement::Result<()> {
    let n = 8;
    let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
    let state = transform(
        &neel_state(n)?,
        &fourier_matrix(&grid),
        TransformMethod::Givens,
    )?;
    let reference = neel_reference(n)?;
    println!(
        "amplitude mismatch against the closed form: {:.3e}",
        max_difference_up_to_phase(state.amplitudes(), &reference.amplitudes)
    );
    let s = |b: &ModeBlock| {
        block_entropy_state(&state, b, &[], EntropyMethod::Schmidt).map(|e| e.vn / LN_2)
    };
    for j in grid.positive_indices() {
        let b = ModeBlock::pair_at(&grid, j)?;
        println!("S(p_k), k = {:+.3}: {:.6} ln 2", grid.momentum(j), s(&b)?);
    }
    for m in 1..n {
        println!(
            "S(E_{m}) = {:.6} ln 2",
            s(&ModeBlock::energy(&grid, m, FRAC_PI_2)?)?
        );
    }
    for &(m, predicted) in &reference.positive {
        let b = ModeBlock::positive(&grid, m, FRAC_PI_2)?;
        println!(
            "S(P_{m}) = {:.6} ln 2 (closed form {:.1} ln 2)",
            s(&b)?,
            predicted / LN_2
        );
    }
    Ok(())
}
