//! Momentum grids and the three block families around the Fermi point.

use std::f64::consts::FRAC_PI_2;

use momentum_entanglement::modes::{BlockFamily, Boundary, ModeBlock, MomentumGrid};

fn main() -> momentum_entanglement::Result<()> {
    for boundary in [Boundary::Antiperiodic, Boundary::Periodic] {
        let grid = MomentumGrid::new(8, boundary)?;
        let ks: Vec<String> = grid.momenta().iter().map(|k| format!("{k:+.3}")).collect();
        println!("{:>13}: {}", boundary.as_str(), ks.join(" "));
    }

    let grid = MomentumGrid::new(12, Boundary::Antiperiodic)?;
    let show = |b: &ModeBlock| {
        b.indices()
            .iter()
            .map(|&j| format!("{:+.3}", grid.momentum(j)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for n in 1..=3 {
        let p = ModeBlock::positive(&grid, n, FRAC_PI_2)?;
        let e = ModeBlock::energy(&grid, n, FRAC_PI_2)?;
        println!("P_{n} = [{}]   E_{n} = [{}]", show(&p), show(&e));
    }
    let pair = ModeBlock::pair_at(&grid, grid.positive_indices()[0])?;
    assert_eq!(pair.family(), BlockFamily::Pair);
    println!("p_k  = [{}]", show(&pair));
    Ok(())
}
