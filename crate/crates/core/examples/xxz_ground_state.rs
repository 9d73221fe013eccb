//! XXZ ground states by Lanczos, cross-checked against dense
//! diagonalization and written to a checkpoint.

use momentum_entanglement::checkpoint::{load_ground, save_ground, GroundCheckpoint};
use momentum_entanglement::ed::{free_fermion_energy, ground_state, xxz_hamiltonian, SolverMethod};

fn main() -> momentum_entanglement::Result<()> {
    println!("  Delta   E_lanczos          E_dense            gap");
    for delta in [-0.5, 0.0, 0.5, 1.0] {
        let h = xxz_hamiltonian(8, delta)?;
        let lz = ground_state(&h, SolverMethod::Lanczos, 1e-10, 0)?;
        let dn = ground_state(&h, SolverMethod::Dense, 1e-10, 0)?;
        println!(
            "{delta:7.2} {:18.12} {:18.12} {:8.4}",
            lz.energy, dn.energy, lz.gap
        );
    }
    println!("free fermions, N = 8: {:.12}", free_fermion_energy(8)?);

    let gs = ground_state(&xxz_hamiltonian(16, 0.5)?, SolverMethod::Lanczos, 1e-10, 0)?;
    println!(
        "N = 16, Delta = 0.5: E = {:.12}, dim = {}, {} iterations",
        gs.energy,
        gs.vector.len(),
        gs.iterations
    );
    let path = std::env::temp_dir().join("xxz_n16.bin");
    save_ground(&path, &GroundCheckpoint::from(&gs))?;
    let back = load_ground(&path)?;
    assert_eq!(back.vector, gs.vector);
    println!("checkpoint round trip ok: {}", path.display());

    match xxz_hamiltonian(10, 0.5).and_then(|h| ground_state(&h, SolverMethod::Lanczos, 1e-10, 0)) {
        Err(e) => println!("N = 10: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
