//! Many-body change of single-particle basis on full `2^N` amplitude
//! vectors.
//!
//! A single-body unitary `U` acts on one-particle amplitudes as
//! `psi'_j = sum_x U_{jx} psi_x`; on many-body amplitudes it acts through
//! minors, `B_m = sum_n det(U_{m,n}) C_n`. Two routes compute this: a
//! nearest-neighbour Givens factorization lifted word by word, and the
//! determinant formula itself (small sectors only, used as an oracle).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, words_with_popcount};
use crate::error::{invalid, Error, Result};
use crate::modes::{total_momentum_numerator, Boundary, ModeConfig, MomentumGrid};

/// Largest chain held as a full amplitude vector.
pub const MAX_STATE_SITES: usize = 22;
/// Largest chain accepted by the determinant route.
pub const MAX_DETERMINANT_SITES: usize = 12;
/// Unitarity residual above which a matrix is rejected.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Amplitudes at or below this modulus count as zero in diagnostics.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Single-particle basis an amplitude vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Position,
    Momentum(Boundary),
    Intermediate,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Position => "position",
            Basis::Momentum(_) => "momentum",
            Basis::Intermediate => "intermediate",
        }
    }

    /// Label byte used by the state checkpoint format.
    pub fn code(self) -> u8 {
        match self {
            Basis::Position => 0,
            Basis::Momentum(Boundary::Antiperiodic) => 1,
            Basis::Momentum(Boundary::Periodic) => 2,
            Basis::Intermediate => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Basis::Position),
            1 => Some(Basis::Momentum(Boundary::Antiperiodic)),
            2 => Some(Basis::Momentum(Boundary::Periodic)),
            3 => Some(Basis::Intermediate),
            _ => None,
        }
    }
}

/// Normalized amplitude vector indexed by occupation word.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyState {
    sites: usize,
    basis: Basis,
    amps: Vec<Complex64>,
    sector: Option<usize>,
}

impl ManyBodyState {
    /// Validates length, normalization (to `1e-10`) and the sector zero
    /// pattern.
    pub fn new(
        sites: usize,
        basis: Basis,
        amps: Vec<Complex64>,
        sector: Option<usize>,
    ) -> Result<Self> {
        if sites == 0 || sites > MAX_STATE_SITES {
            return Err(Error::SizeLimit(format!(
                "amplitude vectors support 1..={MAX_STATE_SITES} sites, got {sites}"
            )));
        }
        if amps.len() != 1usize << sites {
            return invalid(format!(
                "expected {} amplitudes for {sites} sites, got {}",
                1usize << sites,
                amps.len()
            ));
        }
        if let Some(n) = sector {
            if n > sites {
                return invalid(format!("sector {n} exceeds {sites} sites"));
            }
            let stray = amps
                .iter()
                .enumerate()
                .any(|(w, a)| (w as u64).count_ones() as usize != n && *a != ZERO);
            if stray {
                return invalid(format!("nonzero amplitude outside the {n}-particle sector"));
            }
        }
        let state = Self {
            sites,
            basis,
            amps,
            sector,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return invalid(format!("state is not normalized (norm {norm})"));
        }
        Ok(state)
    }

    /// Like [`ManyBodyState::new`] but rescales the amplitudes first.
    pub fn normalized(
        sites: usize,
        basis: Basis,
        mut amps: Vec<Complex64>,
        sector: Option<usize>,
    ) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(sites, basis, amps, sector)
    }

    /// Single occupation word with unit amplitude.
    pub fn basis_state(sites: usize, basis: Basis, word: u64) -> Result<Self> {
        if sites > MAX_STATE_SITES || word & !mask(sites) != 0 {
            return invalid(format!("word {word:#b} does not fit {sites} sites"));
        }
        let mut amps = vec![ZERO; 1usize << sites];
        amps[word as usize] = Complex64::new(1.0, 0.0);
        Self::new(sites, basis, amps, Some(word.count_ones() as usize))
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// `<n_j>` for mode (or site) `j`.
    pub fn site_occupation(&self, j: usize) -> f64 {
        self.occupations()[j]
    }

    /// `<n_j>` for every mode.
    pub fn occupations(&self) -> Vec<f64> {
        let n = self.sites;
        let partial: Vec<Vec<f64>> = self
            .amps
            .par_chunks(1 << 12)
            .enumerate()
            .map(|(c, chunk)| {
                let mut occ = vec![0.0; n];
                for (o, a) in chunk.iter().enumerate() {
                    let p = a.norm_sqr();
                    if p == 0.0 {
                        continue;
                    }
                    let mut w = ((c << 12) + o) as u64;
                    while w != 0 {
                        occ[w.trailing_zeros() as usize] += p;
                        w &= w - 1;
                    }
                }
                occ
            })
            .collect();
        let mut occ = vec![0.0; n];
        for part in partial {
            occ.iter_mut().zip(part).for_each(|(t, p)| *t += p);
        }
        occ
    }

    /// Same amplitudes under a different basis label.
    pub fn relabeled(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    let partial: Vec<f64> = v
        .par_chunks(1 << 13)
        .map(|c| c.iter().map(|a| a.norm_sqr()).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

/// `<n_j>` for every mode of a state.
pub fn mode_occupations(state: &ManyBodyState) -> Vec<f64> {
    state.occupations()
}

/// Seeded random state with a fixed particle number.
pub fn random_sector_state(
    sites: usize,
    particles: usize,
    basis: Basis,
    seed: u64,
) -> Result<ManyBodyState> {
    if sites > MAX_STATE_SITES {
        return Err(Error::SizeLimit(format!("{sites} sites")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = vec![ZERO; 1usize << sites];
    for w in words_with_popcount(sites, particles) {
        amps[w as usize] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    ManyBodyState::normalized(sites, basis, amps, Some(particles))
}

/// Seeded random state with no particle-number structure.
pub fn random_state(sites: usize, basis: Basis, seed: u64) -> Result<ManyBodyState> {
    if sites > MAX_STATE_SITES {
        return Err(Error::SizeLimit(format!("{sites} sites")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1usize << sites)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    ManyBodyState::normalized(sites, basis, amps, None)
}

/// `max_i |a_i - e^{i phi} b_i|` with `phi` aligning the overlap phase.
pub fn max_difference_up_to_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// One-particle basis change between two labelled bases.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleBodyUnitary {
    matrix: DMatrix<Complex64>,
    from: Basis,
    to: Basis,
}

impl SingleBodyUnitary {
    pub fn new(matrix: DMatrix<Complex64>, from: Basis, to: Basis) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return invalid("single-body unitary must be a nonempty square matrix");
        }
        Ok(Self { matrix, from, to })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn sites(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn from_basis(&self) -> Basis {
        self.from
    }

    pub fn to_basis(&self) -> Basis {
        self.to
    }

    /// `max |U^dagger U - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.sites();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// The inverse change of basis.
    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            from: self.to,
            to: self.from,
        }
    }
}

/// `U_{jx} = exp(-i k_j x) / sqrt N` with `x = 1..N`, rows in grid order.
pub fn fourier_matrix(grid: &MomentumGrid) -> SingleBodyUnitary {
    let n = grid.len();
    let norm = 1.0 / (n as f64).sqrt();
    let matrix = DMatrix::from_fn(n, n, |j, x| {
        // exact phase from the integer numerator
        let q = (grid.numerator(j) * (x as i64 + 1)).rem_euclid(2 * n as i64);
        Complex64::from_polar(norm, -(q as f64) * PI / n as f64)
    });
    SingleBodyUnitary {
        matrix,
        from: Basis::Position,
        to: Basis::Momentum(grid.boundary()),
    }
}

/// Seeded Haar-like random unitary (QR of a complex random matrix).
pub fn random_unitary(n: usize, seed: u64) -> SingleBodyUnitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let q = m.qr().q();
    SingleBodyUnitary {
        matrix: q,
        from: Basis::Intermediate,
        to: Basis::Intermediate,
    }
}

/// A 2x2 amplitude map on modes `(p, p + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub mode: usize,
    pub matrix: [[Complex64; 2]; 2],
}

impl Rotation {
    pub fn determinant(&self) -> Complex64 {
        let g = &self.matrix;
        g[0][0] * g[1][1] - g[0][1] * g[1][0]
    }
}

/// `U = D R_K ... R_1`: rotations are applied first to last, then the
/// diagonal phases.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensPlan {
    pub sites: usize,
    pub rotations: Vec<Rotation>,
    pub phases: Vec<Complex64>,
}

impl GivensPlan {
    /// Multiplies the plan back out into an `N x N` matrix.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::<Complex64>::identity(self.sites, self.sites);
        for r in &self.rotations {
            let g = &r.matrix;
            for c in 0..self.sites {
                let a = m[(r.mode, c)];
                let b = m[(r.mode + 1, c)];
                m[(r.mode, c)] = g[0][0] * a + g[0][1] * b;
                m[(r.mode + 1, c)] = g[1][0] * a + g[1][1] * b;
            }
        }
        for (i, ph) in self.phases.iter().enumerate() {
            for c in 0..self.sites {
                m[(i, c)] *= ph;
            }
        }
        m
    }
}

/// Factorizes `U` into nearest-neighbour rotations and phases.
///
/// Column rotations on `(j, j + 1)` clear row `r` left of the diagonal,
/// from the last row up, so `U G_1 ... G_K = D` and
/// `U = D G_K^dagger ... G_1^dagger`.
pub fn givens_decompose(u: &SingleBodyUnitary) -> Result<GivensPlan> {
    let residual = u.unitarity_residual();
    if residual > UNITARITY_TOL {
        return Err(Error::Domain(format!(
            "matrix is not unitary (residual {residual:.3e})"
        )));
    }
    let n = u.sites();
    let mut w = u.matrix.clone();
    let mut rotations = Vec::with_capacity(n * (n - 1) / 2);
    for r in (1..n).rev() {
        for j in 0..r {
            let x = w[(r, j)];
            if x == ZERO {
                continue;
            }
            let y = w[(r, j + 1)];
            let rho = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let g = [[y / rho, x.conj() / rho], [-x / rho, y.conj() / rho]];
            for i in 0..n {
                let a = w[(i, j)];
                let b = w[(i, j + 1)];
                w[(i, j)] = a * g[0][0] + b * g[1][0];
                w[(i, j + 1)] = a * g[0][1] + b * g[1][1];
            }
            w[(r, j)] = ZERO;
            // amplitude map of G^dagger
            rotations.push(Rotation {
                mode: j,
                matrix: [
                    [g[0][0].conj(), g[1][0].conj()],
                    [g[0][1].conj(), g[1][1].conj()],
                ],
            });
        }
    }
    let phases = (0..n).map(|i| w[(i, i)]).collect();
    Ok(GivensPlan {
        sites: n,
        rotations,
        phases,
    })
}

/// Lifts one nearest-neighbour rotation to the many-body amplitudes.
///
/// Words with exactly one of the bits `p, p+1` set mix through the 2x2
/// map; words with both set pick up its determinant. Adjacent modes carry
/// no fermionic string.
pub fn apply_rotation(amps: &mut [Complex64], rot: &Rotation) {
    let p = rot.mode;
    let g = rot.matrix;
    let det = rot.determinant();
    let stride = 4usize << p;
    let chunk = stride.max(1 << 14).min(amps.len());
    let lo_bit = 1usize << p;
    let hi_bit = 2usize << p;
    amps.par_chunks_mut(chunk).for_each(|block| {
        for start in (0..block.len()).step_by(stride) {
            for off in 0..lo_bit {
                let w = start + off;
                let a = block[w | lo_bit];
                let b = block[w | hi_bit];
                block[w | lo_bit] = g[0][0] * a + g[0][1] * b;
                block[w | hi_bit] = g[1][0] * a + g[1][1] * b;
                block[w | lo_bit | hi_bit] *= det;
            }
        }
    });
}

fn apply_phases(amps: &mut [Complex64], phases: &[Complex64]) {
    amps.par_chunks_mut(1 << 12)
        .enumerate()
        .for_each(|(c, chunk)| {
            for (o, a) in chunk.iter_mut().enumerate() {
                let mut w = ((c << 12) + o) as u64;
                while w != 0 {
                    *a *= phases[w.trailing_zeros() as usize];
                    w &= w - 1;
                }
            }
        });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformMethod {
    Givens,
    Determinant,
}

fn check_compatible(state: &ManyBodyState, u: &SingleBodyUnitary) -> Result<()> {
    if u.sites() != state.sites {
        return invalid(format!(
            "unitary acts on {} modes, state has {}",
            u.sites(),
            state.sites
        ));
    }
    if u.from != state.basis {
        return Err(Error::BasisMismatch {
            expected: u.from.as_str(),
            found: state.basis.as_str(),
        });
    }
    Ok(())
}

/// Re-expresses `state` in the basis reached by `u`.
pub fn transform(
    state: &ManyBodyState,
    u: &SingleBodyUnitary,
    method: TransformMethod,
) -> Result<ManyBodyState> {
    check_compatible(state, u)?;
    let amps = match method {
        TransformMethod::Givens => {
            let plan = givens_decompose(u)?;
            let mut amps = state.amps.clone();
            for rot in &plan.rotations {
                apply_rotation(&mut amps, rot);
                debug_assert!((norm_sqr(&amps) - 1.0).abs() < 1e-9);
            }
            apply_phases(&mut amps, &plan.phases);
            amps
        }
        TransformMethod::Determinant => determinant_transform(state, u)?,
    };
    let out = ManyBodyState {
        sites: state.sites,
        basis: u.to,
        amps,
        sector: state.sector,
    };
    let norm = out.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "transform lost normalization ({norm})"
        )));
    }
    Ok(out)
}

fn determinant_transform(state: &ManyBodyState, u: &SingleBodyUnitary) -> Result<Vec<Complex64>> {
    let n = state.sites;
    if n > MAX_DETERMINANT_SITES {
        return Err(Error::SizeLimit(format!(
            "determinant transform limited to {MAX_DETERMINANT_SITES} sites, got {n}"
        )));
    }
    let Some(particles) = state.sector else {
        return invalid("determinant transform needs a state with fixed particle number");
    };
    let words = words_with_popcount(n, particles);
    let sources: Vec<(Vec<usize>, Complex64)> = words
        .iter()
        .map(|&w| (occupied(w), state.amps[w as usize]))
        .filter(|(_, c)| *c != ZERO)
        .collect();
    let targets: Vec<Complex64> = words
        .par_iter()
        .map(|&m| {
            let rows = occupied(m);
            sources
                .iter()
                .map(|(cols, c)| {
                    let minor =
                        DMatrix::from_fn(particles, particles, |a, b| u.matrix[(rows[a], cols[b])]);
                    minor.determinant() * c
                })
                .sum()
        })
        .collect();
    let mut amps = vec![ZERO; 1usize << n];
    for (&m, b) in words.iter().zip(targets) {
        amps[m as usize] = b;
    }
    Ok(amps)
}

fn occupied(mut w: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(w.count_ones() as usize);
    while w != 0 {
        out.push(w.trailing_zeros() as usize);
        w &= w - 1;
    }
    out
}

/// Largest `|B_m|` over words whose total momentum is not `0 mod 2 pi`.
pub fn momentum_residual(state: &ManyBodyState) -> Result<f64> {
    let Basis::Momentum(boundary) = state.basis else {
        return Err(Error::BasisMismatch {
            expected: "momentum",
            found: state.basis.as_str(),
        });
    };
    let grid = MomentumGrid::new(state.sites, boundary)?;
    let worst = state
        .amps
        .par_iter()
        .enumerate()
        .filter(|(w, _)| total_momentum_numerator(ModeConfig(*w as u64), &grid) != 0)
        .map(|(_, a)| a.norm())
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
