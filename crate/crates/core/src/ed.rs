//! Exact diagonalization of the fermionized XXZ ring at half filling.
//!
//! `H = -1/2 sum_i (c+_i c_{i+1} + h.c.) + Delta sum_i n_i n_{i+1}` with
//! antiperiodic boundary conditions `c+_{N+1} = -c+_1`. Site `i` (1-based)
//! is bit `i - 1` of the occupation word and the fermionic order is the
//! site order, so the only string sign appears on the wrap-around hop.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, words_with_popcount, Binomial};
use crate::error::{invalid, Error, Result};
use crate::lanczos::{lowest_eigenpair, LanczosOptions, SymmetricOperator};
use crate::mbft::{Basis, ManyBodyState};

pub const MAX_ED_SITES: usize = 24;
/// Largest sector handled by the dense solver.
pub const MAX_DENSE_DIM: usize = 3500;
/// Ground states whose gap falls below this are flagged.
pub const LOW_GAP: f64 = 1e-8;

/// Occupation words with a fixed particle number, ascending.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    sites: usize,
    particles: usize,
    states: Vec<u64>,
    binomial: Binomial,
}

impl SectorBasis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_ED_SITES {
            return Err(Error::SizeLimit(format!(
                "sector basis supports 1..={MAX_ED_SITES} sites, got {sites}"
            )));
        }
        if particles > sites {
            return invalid(format!("{particles} particles on {sites} sites"));
        }
        Ok(Self {
            sites,
            particles,
            states: words_with_popcount(sites, particles),
            binomial: Binomial::new(sites),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Ordinal of `word`, or `None` if it is not in the sector.
    pub fn index(&self, word: u64) -> Option<usize> {
        if word & !mask(self.sites) != 0 || word.count_ones() as usize != self.particles {
            return None;
        }
        Some(self.binomial.rank(word))
    }
}

/// Sparse XXZ Hamiltonian on the half-filled sector (CSR, real symmetric).
#[derive(Debug, Clone)]
pub struct XxzHamiltonian {
    sites: usize,
    delta: f64,
    basis: SectorBasis,
    diagonal: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

/// Diagonal element: `Delta` times the number of occupied nearest-neighbour
/// pairs on the ring.
pub fn xxz_diagonal(word: u64, sites: usize, delta: f64) -> f64 {
    let rotated = ((word >> 1) | ((word & 1) << (sites - 1))) & mask(sites);
    delta * (word & rotated).count_ones() as f64
}

/// Off-diagonal elements `(new_word, amplitude)` reached from `word`.
pub fn xxz_hops(word: u64, sites: usize) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(sites);
    for i in 0..sites - 1 {
        let pair = 0b11u64 << i;
        let occ = word & pair;
        if occ != 0 && occ != pair {
            out.push((word ^ pair, -0.5));
        }
    }
    if sites > 2 {
        let pair = 1u64 | (1u64 << (sites - 1));
        let occ = word & pair;
        if occ != 0 && occ != pair {
            // antiperiodic sign times the string through sites 2..N-1
            let middle = word & mask(sites - 1) & !1u64;
            let string = if middle.count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.push((word ^ pair, -0.5 * -1.0 * string));
        }
    }
    out
}

impl XxzHamiltonian {
    /// Half-filled XXZ Hamiltonian on an even ring (`4 <= N <= 24`).
    pub fn new(sites: usize, delta: f64) -> Result<Self> {
        if sites < 4 || sites % 2 != 0 {
            return invalid(format!("XXZ ring needs an even N >= 4, got {sites}"));
        }
        let basis = SectorBasis::new(sites, sites / 2)?;
        let rows: Vec<(f64, Vec<(u32, f64)>)> = basis
            .states()
            .par_iter()
            .map(|&w| {
                let mut hops: Vec<(u32, f64)> = xxz_hops(w, sites)
                    .into_iter()
                    .map(|(t, v)| (basis.index(t).expect("hops conserve particles") as u32, v))
                    .collect();
                hops.sort_by_key(|h| h.0);
                (xxz_diagonal(w, sites, delta), hops)
            })
            .collect();
        let mut diagonal = Vec::with_capacity(rows.len());
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for (d, hops) in rows {
            diagonal.push(d);
            for (c, v) in hops {
                cols.push(c);
                values.push(v);
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            sites,
            delta,
            basis,
            diagonal,
            row_start,
            cols,
            values,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    /// Matrix element `<row| H |col>` (sector ordinals).
    pub fn element(&self, row: usize, col: usize) -> f64 {
        let mut v = if row == col { self.diagonal[row] } else { 0.0 };
        for idx in self.row_start[row]..self.row_start[row + 1] {
            if self.cols[idx] as usize == col {
                v += self.values[idx];
            }
        }
        v
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] += self.diagonal[r];
            for idx in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[idx] as usize)] += self.values[idx];
            }
        }
        m
    }
}

impl SymmetricOperator for XxzHamiltonian {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // row gather: every output entry is owned by one worker
        y.par_chunks_mut(4096).enumerate().for_each(|(chunk, ys)| {
            let base = chunk * 4096;
            for (offset, yv) in ys.iter_mut().enumerate() {
                let r = base + offset;
                let mut acc = self.diagonal[r] * x[r];
                for idx in self.row_start[r]..self.row_start[r + 1] {
                    acc += self.values[idx] * x[self.cols[idx] as usize];
                }
                *yv = acc;
            }
        });
    }
}

/// Builds the half-filled XXZ Hamiltonian.
pub fn xxz_hamiltonian(sites: usize, delta: f64) -> Result<XxzHamiltonian> {
    XxzHamiltonian::new(sites, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMethod {
    Lanczos,
    Dense,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub sites: usize,
    pub delta: f64,
    pub energy: f64,
    /// Normalized sector amplitudes, first nonzero entry positive.
    pub vector: Vec<f64>,
    pub residual: f64,
    /// `E_1 - E_0` estimate.
    pub gap: f64,
    /// Gap below [`LOW_GAP`]: entropies derived from this state are unreliable.
    pub low_gap: bool,
    pub iterations: usize,
}

impl GroundStateResult {
    /// Embeds the sector vector into a full position-basis state.
    pub fn to_state(&self) -> Result<ManyBodyState> {
        let basis = SectorBasis::new(self.sites, self.sites / 2)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << self.sites];
        for (&w, &a) in basis.states().iter().zip(&self.vector) {
            amps[w as usize] = Complex64::new(a, 0.0);
        }
        ManyBodyState::new(self.sites, Basis::Position, amps, Some(self.sites / 2))
    }
}

fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn residual_norm(h: &XxzHamiltonian, v: &[f64], e: f64) -> f64 {
    let mut w = vec![0.0; v.len()];
    h.apply(v, &mut w);
    w.iter()
        .zip(v)
        .map(|(a, b)| (a - e * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Lowest eigenpair of the half-filled sector.
///
/// Only rings with `N` a multiple of 4 have a unique ground state with
/// antiperiodic boundaries; `N = 2 mod 4` is rejected.
pub fn ground_state(
    h: &XxzHamiltonian,
    method: SolverMethod,
    tol: f64,
    seed: u64,
) -> Result<GroundStateResult> {
    let n = h.sites();
    if n % 4 == 2 {
        return Err(Error::Degenerate { n });
    }
    let dim = h.basis().len();
    let (energy, mut vector, gap, iterations) = match method {
        SolverMethod::Dense => {
            if dim > MAX_DENSE_DIM {
                return Err(Error::SizeLimit(format!(
                    "dense solver limited to dimension {MAX_DENSE_DIM}, sector has {dim}"
                )));
            }
            let eig = SymmetricEigen::new(h.to_dense());
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let e0 = eig.eigenvalues[order[0]];
            let gap = order
                .get(1)
                .map_or(f64::INFINITY, |&i| eig.eigenvalues[i] - e0);
            let v: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
            (e0, v, gap, 0)
        }
        SolverMethod::Lanczos => {
            let opts = LanczosOptions {
                tol,
                seed,
                ..Default::default()
            };
            let pair = lowest_eigenpair(h, &opts, &[])?;
            let gap = pair.next_value.map_or(f64::INFINITY, |e1| e1 - pair.value);
            (pair.value, pair.vector, gap, pair.iterations)
        }
    };
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|x| *x /= norm);
    fix_sign(&mut vector);
    let residual = residual_norm(h, &vector, energy);
    if residual > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
            tol,
        });
    }
    Ok(GroundStateResult {
        sites: n,
        delta: h.delta(),
        energy,
        vector,
        residual,
        gap,
        low_gap: gap < LOW_GAP,
        iterations,
    })
}

/// `(|1010...> + |0101...>) / sqrt 2` in the position basis.
pub fn neel_state(sites: usize) -> Result<ManyBodyState> {
    if sites < 2 || sites % 2 != 0 {
        return invalid(format!("Néel state needs an even N, got {sites}"));
    }
    if sites > crate::mbft::MAX_STATE_SITES {
        return Err(Error::SizeLimit(format!("{sites} sites")));
    }
    let odd: u64 = (0..sites).step_by(2).fold(0, |w, i| w | (1 << i));
    let even = odd << 1;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << sites];
    let a = std::f64::consts::FRAC_1_SQRT_2;
    amps[odd as usize] = Complex64::new(a, 0.0);
    amps[even as usize] = Complex64::new(a, 0.0);
    ManyBodyState::new(sites, Basis::Position, amps, Some(sites / 2))
}

/// Sum of the `N/2` lowest single-particle energies `-cos k` on the
/// antiperiodic grid: the `Delta = 0` ground energy.
pub fn free_fermion_energy(sites: usize) -> Result<f64> {
    let grid = crate::modes::MomentumGrid::new(sites, crate::modes::Boundary::Antiperiodic)?;
    let mut levels: Vec<f64> = grid.momenta().iter().map(|k| -k.cos()).collect();
    levels.sort_by(f64::total_cmp);
    Ok(levels[..sites / 2].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sector_enumeration() {
        let b = SectorBasis::new(4, 2).unwrap();
        assert_eq!(
            b.states(),
            &[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]
        );
        let b = SectorBasis::new(20, 10).unwrap();
        assert_eq!(b.len(), 184_756);
        for (i, &w) in b.states().iter().enumerate().step_by(997) {
            assert_eq!(b.index(w), Some(i));
        }
        assert_eq!(b.index(0b111), None);
        assert!(SectorBasis::new(25, 12).is_err());
        assert!(SectorBasis::new(4, 5).is_err());
    }

    #[test]
    fn diagonal_counts_ring_pairs() {
        assert_eq!(xxz_diagonal(0b1100, 4, 0.7), 0.7);
        assert_eq!(xxz_diagonal(0b1001, 4, 1.0), 1.0);
        assert_eq!(xxz_diagonal(0b1010, 4, 1.0), 0.0);
        assert_eq!(xxz_diagonal(0b1111, 4, 1.0), 4.0);
    }

    #[test]
    fn wrap_hop_sign() {
        // +1/2 (c+_4 c_1 + h.c.), then reorder c+_4 past the middle particles
        let hops = xxz_hops(0b0001, 4);
        assert_eq!(hops.iter().find(|h| h.0 == 0b1000).unwrap().1, 0.5);
        let hops = xxz_hops(0b0011, 4);
        assert_eq!(hops.iter().find(|h| h.0 == 0b1010).unwrap().1, -0.5);
        let hops = xxz_hops(0b0101, 4);
        assert_eq!(hops.iter().find(|h| h.0 == 0b1100).unwrap().1, -0.5);
        let hops = xxz_hops(0b0111, 4);
        assert_eq!(hops.iter().find(|h| h.0 == 0b1110).unwrap().1, 0.5);
    }

    #[test]
    fn free_fermion_energies() {
        let h = xxz_hamiltonian(4, 0.0).unwrap();
        let gs = ground_state(&h, SolverMethod::Dense, 1e-10, 0).unwrap();
        assert!((gs.energy + 2f64.sqrt()).abs() < 1e-12);
        for n in [8usize, 12] {
            let h = xxz_hamiltonian(n, 0.0).unwrap();
            let gs = ground_state(&h, SolverMethod::Lanczos, 1e-10, 1).unwrap();
            assert!((gs.energy - free_fermion_energy(n).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        for delta in [-0.5, 0.0, 0.5, 0.7, 1.0] {
            let h = xxz_hamiltonian(8, delta).unwrap();
            let a = ground_state(&h, SolverMethod::Lanczos, 1e-10, 7).unwrap();
            let b = ground_state(&h, SolverMethod::Dense, 1e-10, 7).unwrap();
            assert!((a.energy - b.energy).abs() < 1e-10);
            let overlap: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-9);
            assert!((a.gap - b.gap).abs() < 1e-6, "{} {}", a.gap, b.gap);
        }
    }

    #[test]
    fn degenerate_sizes_rejected() {
        let h = xxz_hamiltonian(10, 0.5).unwrap();
        assert!(matches!(
            ground_state(&h, SolverMethod::Lanczos, 1e-10, 0),
            Err(Error::Degenerate { n: 10 })
        ));
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let h = xxz_hamiltonian(10, 0.3).unwrap();
        let dim = h.basis().len();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let (mut hx, mut hy) = (vec![0.0; dim], vec![0.0; dim]);
        h.apply(&x, &mut hx);
        h.apply(&y, &mut hy);
        let lhs: f64 = x.iter().zip(&hy).map(|(a, b)| a * b).sum();
        let rhs: f64 = hx.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn translation_by_two_preserves_spectrum() {
        let h = xxz_hamiltonian(8, 0.4).unwrap();
        let dense = h.to_dense();
        let basis = h.basis();
        let shift = |w: u64| ((w << 2) | (w >> 6)) & 0xff;
        let dim = basis.len();
        let relabeled = DMatrix::from_fn(dim, dim, |r, c| {
            let rr = basis.index(shift(basis.states()[r])).unwrap();
            let cc = basis.index(shift(basis.states()[c])).unwrap();
            dense[(rr, cc)]
        });
        let mut a: Vec<f64> = SymmetricEigen::new(dense)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        let mut b: Vec<f64> = SymmetricEigen::new(relabeled)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn large_anisotropy_approaches_neel() {
        let h = xxz_hamiltonian(8, 50.0).unwrap();
        let gs = ground_state(&h, SolverMethod::Dense, 1e-10, 0).unwrap();
        let basis = h.basis();
        let a = gs.vector[basis.index(0b0101_0101).unwrap()];
        let b = gs.vector[basis.index(0b1010_1010).unwrap()];
        let overlap = (a + b) / 2f64.sqrt();
        assert!(overlap * overlap > 0.99);
    }

    #[test]
    fn lanczos_is_deterministic() {
        let h = xxz_hamiltonian(12, 0.8).unwrap();
        let a = ground_state(&h, SolverMethod::Lanczos, 1e-10, 42).unwrap();
        let b = ground_state(&h, SolverMethod::Lanczos, 1e-10, 42).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.vector, b.vector);
    }

    #[test]
    fn neel_state_shape() {
        let s = neel_state(4).unwrap();
        let amps = s.amplitudes();
        assert!((amps[0b0101].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amps[0b1010].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
        for site in 0..4 {
            assert!((s.site_occupation(site) - 0.5).abs() < 1e-15);
        }
        assert!(neel_state(5).is_err());
    }
}
