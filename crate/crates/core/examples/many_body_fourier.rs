//! Many-body Fourier transform: Givens rotations against Slater
//! determinants, then momentum conservation of an XXZ ground state.

use momentum_entanglement::ed::{ground_state, xxz_hamiltonian, SolverMethod};
use momentum_entanglement::mbft::{
    fourier_matrix, givens_decompose, max_difference_up_to_phase, momentum_residual,
    random_sector_state, transform, Basis, TransformMethod,
};
use momentum_entanglement::modes::{Boundary, MomentumGrid};

fn main() -> momentum_entanglement::Result<()> {
    let grid = MomentumGrid::new(8, Boundary::Antiperiodic)?;
    let u = fourier_matrix(&grid);
    let plan = givens_decompose(&u)?;
    println!("N = 8: {} Givens rotations", plan.rotations.len());
    for seed in 0..5 {
        let s = random_sector_state(8, 4, Basis::Position, seed)?;
        let a = transform(&s, &u, TransformMethod::Givens)?;
        let b = transform(&s, &u, TransformMethod::Determinant)?;
        println!(
            "seed {seed}: max |givens - det| = {:.2e}",
            max_difference_up_to_phase(a.amplitudes(), b.amplitudes())
        );
    }

    for (n, delta) in [(12, 0.5), (16, 0.8)] {
        let gs = ground_state(&xxz_hamiltonian(n, delta)?, SolverMethod::Lanczos, 1e-10, 0)?;
        let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
        let k = transform(
            &gs.to_state()?,
            &fourier_matrix(&grid),
            TransformMethod::Givens,
        )?;
        println!(
            "N = {n}, Delta = {delta}: momentum residual {:.2e}",
            momentum_residual(&k)?
        );
    }
    Ok(())
}
