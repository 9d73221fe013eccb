//! Entanglement entropies of momentum-mode blocks of explicit many-body
//! states.
//!
//! Modes are reordered so the block comes first. Each word picks up the
//! sign of that permutation restricted to its occupied modes, after which
//! the amplitudes are reshaped into a block x complement matrix. States
//! with a fixed particle number split this matrix into one piece per
//! number of particles inside the block.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{binomial, words_with_popcount, Binomial};
use crate::entropy::{validate_alphas, EntropyResult};
use crate::error::{invalid, Error, Result};
use crate::mbft::{Basis, ManyBodyState};
use crate::modes::{make_block, BlockFamily, Boundary, ModeBlock, MomentumGrid};

/// Largest side of the reduced density matrix, in modes.
pub const MAX_REDUCED_MODES: usize = 14;
/// Largest chain searched exhaustively by [`minimax_entropy`].
pub const MAX_EXHAUSTIVE_SITES: usize = 12;
/// Number of seeded restarts of the heuristic minimax search.
pub const MINIMAX_RESTARTS: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EntropyMethod {
    /// Singular values of the block x complement amplitude matrix.
    #[default]
    Schmidt,
    /// Eigenvalues of the block reduced density matrix.
    Rdm,
}

/// The state's amplitudes grouped by block occupation.
struct Reshaped {
    /// One dense matrix per sector (or a single one for states without a
    /// fixed particle number).
    pieces: Vec<DMatrix<Complex64>>,
}

fn momentum_grid_of(state: &ManyBodyState) -> Result<MomentumGrid> {
    match state.basis() {
        Basis::Momentum(b) => MomentumGrid::new(state.sites(), b),
        other => Err(Error::BasisMismatch {
            expected: "momentum",
            found: other.as_str(),
        }),
    }
}

/// Splits `word` into (block word, complement word, reordering sign).
struct Splitter {
    block: Vec<usize>,
    complement: Vec<usize>,
    /// `below[i]`: mask of complement modes with index below `block[i]`.
    below: Vec<u64>,
    /// `later_smaller[i]`: mask of block modes listed after `block[i]`
    /// with a smaller index.
    later_smaller: Vec<u64>,
}

impl Splitter {
    fn new(block: &[usize], n: usize) -> Self {
        let member = block.iter().fold(0u64, |m, &j| m | (1 << j));
        let complement: Vec<usize> = (0..n).filter(|&j| member & (1 << j) == 0).collect();
        let below = block
            .iter()
            .map(|&j| {
                complement
                    .iter()
                    .filter(|&&c| c < j)
                    .fold(0u64, |m, &c| m | (1 << c))
            })
            .collect();
        let later_smaller = (0..block.len())
            .map(|i| {
                block[i + 1..]
                    .iter()
                    .filter(|&&c| c < block[i])
                    .fold(0u64, |m, &c| m | (1 << c))
            })
            .collect();
        Self {
            block: block.to_vec(),
            complement,
            below,
            later_smaller,
        }
    }

    fn split(&self, word: u64) -> (u64, u64, bool) {
        let mut a = 0u64;
        let mut swaps = 0u32;
        for (i, &j) in self.block.iter().enumerate() {
            if word & (1 << j) != 0 {
                a |= 1 << i;
                swaps += (word & (self.below[i] | self.later_smaller[i])).count_ones();
            }
        }
        let mut b = 0u64;
        for (i, &c) in self.complement.iter().enumerate() {
            if word & (1 << c) != 0 {
                b |= 1 << i;
            }
        }
        (a, b, swaps % 2 == 1)
    }
}

fn reshape(state: &ManyBodyState, block: &[usize]) -> Reshaped {
    let n = state.sites();
    let l = block.len();
    let splitter = Splitter::new(block, n);
    let amps = state.amplitudes();
    match state.sector() {
        Some(particles) => {
            let binom = Binomial::new(n);
            let lo = particles.saturating_sub(n - l);
            let hi = particles.min(l);
            let mut pieces: Vec<DMatrix<Complex64>> = (lo..=hi)
                .map(|pa| {
                    DMatrix::zeros(
                        binomial(l, pa) as usize,
                        binomial(n - l, particles - pa) as usize,
                    )
                })
                .collect();
            for w in words_with_popcount(n, particles) {
                let amp = amps[w as usize];
                if amp == ZERO {
                    continue;
                }
                let (a, b, odd) = splitter.split(w);
                let piece = &mut pieces[a.count_ones() as usize - lo];
                piece[(binom.rank(a), binom.rank(b))] = if odd { -amp } else { amp };
            }
            Reshaped { pieces }
        }
        None => {
            let mut m = DMatrix::zeros(1usize << l, 1usize << (n - l));
            for (w, &amp) in amps.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let (a, b, odd) = splitter.split(w as u64);
                m[(a as usize, b as usize)] = if odd { -amp } else { amp };
            }
            Reshaped { pieces: vec![m] }
        }
    }
}

fn schmidt_weights(pieces: &[DMatrix<Complex64>]) -> Vec<f64> {
    pieces
        .iter()
        .filter(|m| m.nrows() > 0 && m.ncols() > 0)
        .flat_map(|m| {
            let sv = if m.nrows() <= m.ncols() {
                m.clone().singular_values()
            } else {
                m.adjoint().singular_values()
            };
            sv.iter().map(|s| s * s).collect::<Vec<_>>()
        })
        .collect()
}

fn rdm_weights(pieces: &[DMatrix<Complex64>]) -> Vec<f64> {
    pieces
        .iter()
        .filter(|m| m.nrows() > 0 && m.ncols() > 0)
        .flat_map(|m| {
            let rho = m * m.adjoint();
            SymmetricEigen::new(rho)
                .eigenvalues
                .iter()
                .copied()
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Entropies of `block` in a momentum-basis state.
pub fn block_entropy_state(
    state: &ManyBodyState,
    block: &ModeBlock,
    alphas: &[f64],
    method: EntropyMethod,
) -> Result<EntropyResult> {
    momentum_grid_of(state)?;
    block_entropy_indices(state, block.indices(), alphas, method)
}

/// Entropies of an explicit list of modes (in any basis label).
pub fn block_entropy_indices(
    state: &ManyBodyState,
    block: &[usize],
    alphas: &[f64],
    method: EntropyMethod,
) -> Result<EntropyResult> {
    validate_alphas(alphas)?;
    let n = state.sites();
    let l = block.len();
    if l == 0 || l > n {
        return invalid(format!("block of {l} modes on {n} modes"));
    }
    let mut seen = 0u64;
    for &j in block {
        if j >= n || seen & (1 << j) != 0 {
            return invalid(format!("bad or repeated mode index {j}"));
        }
        seen |= 1 << j;
    }
    let limit_side = match method {
        EntropyMethod::Rdm => l,
        EntropyMethod::Schmidt => l.min(n - l),
    };
    if limit_side > MAX_REDUCED_MODES {
        return Err(Error::SizeLimit(format!(
            "{l}-mode block exceeds the {MAX_REDUCED_MODES}-mode limit for {method:?}"
        )));
    }
    let reshaped = reshape(state, block);
    let weights = match method {
        EntropyMethod::Schmidt => schmidt_weights(&reshaped.pieces),
        EntropyMethod::Rdm => rdm_weights(&reshaped.pieces),
    };
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("Schmidt weights sum to {total}")));
    }
    Ok(EntropyResult::from_weights(&weights, alphas))
}

/// One block of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    /// `n` for the P and E families, `k` for pairs.
    pub parameter: f64,
    pub block: Vec<usize>,
    pub entropy: EntropyResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub family: BlockFamily,
    pub points: Vec<ProfilePoint>,
}

/// Entropy of every block of one family: `P_n` for `n = 1..N/2`, `p_k` for
/// every positive `k`, `E_n` for `n = 1..N`.
pub fn entropy_scan(
    state: &ManyBodyState,
    family: BlockFamily,
    k_fermi: f64,
    alphas: &[f64],
) -> Result<EntropyProfile> {
    let grid = momentum_grid_of(state)?;
    let n = grid.len();
    let blocks: Vec<(f64, ModeBlock)> = match family {
        BlockFamily::Positive => (1..=grid.positive_indices().len())
            .map(|m| Ok((m as f64, make_block(&grid, family, m, k_fermi)?)))
            .collect::<Result<_>>()?,
        BlockFamily::Pair => grid
            .positive_indices()
            .into_iter()
            .map(|j| Ok((grid.momentum(j), ModeBlock::pair_at(&grid, j)?)))
            .collect::<Result<_>>()?,
        BlockFamily::Energy => (1..=n)
            .map(|m| Ok((m as f64, make_block(&grid, family, m, k_fermi)?)))
            .collect::<Result<_>>()?,
        BlockFamily::Custom => return invalid("custom blocks have no scan order"),
    };
    let points = blocks
        .par_iter()
        .map(|(parameter, block)| {
            Ok(ProfilePoint {
                parameter: *parameter,
                block: block.indices().to_vec(),
                entropy: block_entropy_state(state, block, alphas, EntropyMethod::Schmidt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyProfile { family, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimaxMode {
    Exhaustive,
    /// Greedy swap search from the `E_n` block plus seeded random starts.
    Heuristic {
        seed: u64,
    },
}

/// Minimum entropy found among blocks of one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeMinimum {
    pub size: usize,
    pub block: Vec<usize>,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    /// Block size attaining the maximum of the minima.
    pub size: usize,
    pub block: Vec<usize>,
    /// `S_M`, nats.
    pub value: f64,
    pub per_size: Vec<SizeMinimum>,
    /// Minima are upper bounds rather than exact values.
    pub heuristic: bool,
}

fn vn(state: &ManyBodyState, block: &[usize]) -> Result<f64> {
    Ok(block_entropy_indices(state, block, &[], EntropyMethod::Schmidt)?.vn)
}

fn indices_of(word: u64) -> Vec<usize> {
    (0..64).filter(|&j| word & (1 << j) != 0).collect()
}

fn exhaustive_minimum(state: &ManyBodyState, size: usize) -> Result<SizeMinimum> {
    let words = words_with_popcount(state.sites(), size);
    let values = words
        .par_iter()
        .map(|&w| vn(state, &indices_of(w)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] - 1e-12 {
            best = i;
        }
    }
    Ok(SizeMinimum {
        size,
        block: indices_of(words[best]),
        entropy: values[best],
    })
}

fn greedy_descent(state: &ManyBodyState, mut block: Vec<usize>) -> Result<(Vec<usize>, f64)> {
    let n = state.sites();
    let mut current = vn(state, &block)?;
    loop {
        let complement: Vec<usize> = (0..n).filter(|j| !block.contains(j)).collect();
        let moves: Vec<(usize, usize)> = (0..block.len())
            .flat_map(|i| complement.iter().map(move |&c| (i, c)))
            .collect();
        let trials = moves
            .par_iter()
            .map(|&(i, c)| {
                let mut b = block.clone();
                b[i] = c;
                vn(state, &b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut best: Option<usize> = None;
        for (m, &v) in trials.iter().enumerate() {
            if v < current - 1e-12 && best.is_none_or(|b| v < trials[b] - 1e-12) {
                best = Some(m);
            }
        }
        match best {
            Some(m) => {
                let (i, c) = moves[m];
                block[i] = c;
                current = trials[m];
            }
            None => {
                block.sort_unstable();
                return Ok((block, current));
            }
        }
    }
}

fn heuristic_minimum(state: &ManyBodyState, size: usize, seed: u64) -> Result<SizeMinimum> {
    let grid = momentum_grid_of(state)?;
    let k_fermi = std::f64::consts::FRAC_PI_2;
    let mut starts = vec![ModeBlock::energy(&grid, size, k_fermi)?.indices().to_vec()];
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut all: Vec<usize> = (0..grid.len()).collect();
    while starts.len() < MINIMAX_RESTARTS {
        all.shuffle(&mut rng);
        starts.push(all[..size].to_vec());
    }
    let mut best: Option<SizeMinimum> = None;
    for start in starts {
        let (block, entropy) = greedy_descent(state, start)?;
        if best.as_ref().is_none_or(|b| entropy < b.entropy - 1e-12) {
            best = Some(SizeMinimum {
                size,
                block,
                entropy,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `S_M = max_n min_{|B| = n} S(B)` over `n = 1..=n_max`.
pub fn minimax_entropy(
    state: &ManyBodyState,
    n_max: usize,
    mode: MinimaxMode,
) -> Result<MinimaxResult> {
    momentum_grid_of(state)?;
    let n = state.sites();
    if n_max == 0 || n_max > n {
        return invalid(format!("block size cap must be in 1..={n}, got {n_max}"));
    }
    if mode == MinimaxMode::Exhaustive && n > MAX_EXHAUSTIVE_SITES {
        return Err(Error::SizeLimit(format!(
            "exhaustive minimax limited to {MAX_EXHAUSTIVE_SITES} modes; use the heuristic search"
        )));
    }
    let per_size = (1..=n_max)
        .map(|size| match mode {
            MinimaxMode::Exhaustive => exhaustive_minimum(state, size),
            MinimaxMode::Heuristic { seed } => heuristic_minimum(state, size, seed),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut top = 0;
    for (i, m) in per_size.iter().enumerate() {
        if m.entropy > per_size[top].entropy + 1e-12 {
            top = i;
        }
    }
    Ok(MinimaxResult {
        size: per_size[top].size,
        block: per_size[top].block.clone(),
        value: per_size[top].entropy,
        per_size: per_size.clone(),
        heuristic: matches!(mode, MinimaxMode::Heuristic { .. }),
    })
}

/// Closed-form momentum amplitudes of the Néel state and the entropy
/// catalogue derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeelReference {
    pub sites: usize,
    /// Normalized amplitudes on the antiperiodic grid, indexed by word.
    #[serde(skip)]
    pub amplitudes: Vec<Complex64>,
    pub nonzero: usize,
    /// `S(p_k)`.
    pub pair: f64,
    /// `S` of two modes with different `|k|`.
    pub two_unequal: f64,
    /// `S(E_n)`.
    pub energy: f64,
    /// `(n, S(P_n))` for `n = 1..=N/2`.
    pub positive: Vec<(usize, f64)>,
    /// The alternative closed form `(N - 1) ln 2` for `S(P_{N/2})`, which
    /// exceeds the `(N/2) ln 2` dimension bound.
    pub printed_half: f64,
}

/// Momenta `k_1 < ... < k_N` with `k_j = -k_{N+1-j}`; level `j <= N/2`
/// has occupation `m_j`, level `N+1-j` has `1 - m_j`, and
/// `C = Even(sum m) (-1)^(m_2 + m_4 + ...)`.
pub fn neel_reference(sites: usize) -> Result<NeelReference> {
    if sites == 0 || sites % 4 != 0 {
        return Err(Error::Precondition(format!(
            "Néel reference needs N a multiple of 4, got {sites}"
        )));
    }
    if sites > crate::mbft::MAX_STATE_SITES {
        return Err(Error::SizeLimit(format!("{sites} sites")));
    }
    let half = sites / 2;
    let count = 1usize << (half - 1);
    let norm = 1.0 / (count as f64).sqrt();
    let mut amplitudes = vec![ZERO; 1usize << sites];
    for m in 0u64..(1 << half) {
        if m.count_ones() % 2 != 0 {
            continue;
        }
        let mut word = 0u64;
        let mut sign = 1.0;
        for j in 0..half {
            let occ = (m >> j) & 1;
            if occ == 1 {
                word |= 1 << j;
                // 1-based even index
                if j % 2 == 1 {
                    sign = -sign;
                }
            } else {
                word |= 1 << (sites - 1 - j);
            }
        }
        amplitudes[word as usize] = Complex64::new(sign * norm, 0.0);
    }
    let positive = (1..=half)
        .map(|n| {
            (
                n,
                if n < half {
                    n as f64 * LN_2
                } else {
                    (half - 1) as f64 * LN_2
                },
            )
        })
        .collect();
    Ok(NeelReference {
        sites,
        amplitudes,
        nonzero: count,
        pair: LN_2,
        two_unequal: 2.0 * LN_2,
        energy: LN_2,
        positive,
        printed_half: (sites - 1) as f64 * LN_2,
    })
}

/// The closed-form amplitudes as a momentum-basis state.
pub fn neel_reference_state(sites: usize) -> Result<ManyBodyState> {
    let r = neel_reference(sites)?;
    ManyBodyState::new(
        sites,
        Basis::Momentum(Boundary::Antiperiodic),
        r.amplitudes,
        Some(sites / 2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::neel_state;
    use crate::mbft::{
        fourier_matrix, random_sector_state, random_state, transform, TransformMethod,
    };
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const MOM: Basis = Basis::Momentum(Boundary::Antiperiodic);

    fn neel_momentum(n: usize) -> ManyBodyState {
        let grid = MomentumGrid::new(n, Boundary::Antiperiodic).unwrap();
        transform(
            &neel_state(n).unwrap(),
            &fourier_matrix(&grid),
            TransformMethod::Givens,
        )
        .unwrap()
    }

    #[test]
    fn product_states_have_no_entanglement() {
        let s = ManyBodyState::basis_state(8, MOM, 0b1011_0010).unwrap();
        for block in [vec![0], vec![1, 5], vec![7, 2, 4], vec![0, 1, 2, 3, 4]] {
            for method in [EntropyMethod::Schmidt, EntropyMethod::Rdm] {
                let e = block_entropy_indices(&s, &block, &[2.0], method).unwrap();
                assert!(e.vn.abs() <= 1e-12);
                assert_eq!(e.schmidt_count, 1);
            }
        }
    }

    #[test]
    fn reorder_sign_matters() {
        // equal weights on {0,1}, {0,3}, {1,2}, {2,3}; splitting off {0, 2}
        // moves mode 2 past mode 1 in {1,2} only, which makes the 2x2
        // coefficient matrix orthogonal instead of rank one
        let mut amps = vec![ZERO; 16];
        for w in [0b0011, 0b1001, 0b0110, 0b1100] {
            amps[w] = Complex64::new(0.5, 0.0);
        }
        let s = ManyBodyState::new(4, MOM, amps, Some(2)).unwrap();
        for method in [EntropyMethod::Schmidt, EntropyMethod::Rdm] {
            let e = block_entropy_indices(&s, &[0, 2], &[], method).unwrap();
            assert!((e.vn - LN_2).abs() < 1e-12);
            let e = block_entropy_indices(&s, &[2, 0], &[], method).unwrap();
            assert!((e.vn - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_and_rdm_agree() {
        for seed in 0..4 {
            let s = random_sector_state(12, 6, MOM, seed).unwrap();
            for block in [vec![0, 3, 7], vec![11, 2, 5, 6, 1, 9]] {
                let a =
                    block_entropy_indices(&s, &block, &[0.5, 2.0], EntropyMethod::Schmidt).unwrap();
                let b = block_entropy_indices(&s, &block, &[0.5, 2.0], EntropyMethod::Rdm).unwrap();
                assert!((a.vn - b.vn).abs() <= 1e-10);
                for (x, y) in a.renyi.iter().zip(&b.renyi) {
                    assert!((x.1 - y.1).abs() <= 1e-10);
                }
            }
        }
        let s = random_state(8, MOM, 3).unwrap();
        let a = block_entropy_indices(&s, &[1, 4, 6], &[], EntropyMethod::Schmidt).unwrap();
        let b = block_entropy_indices(&s, &[1, 4, 6], &[], EntropyMethod::Rdm).unwrap();
        assert!((a.vn - b.vn).abs() <= 1e-10);
    }

    #[test]
    fn needs_momentum_basis() {
        let s = random_sector_state(6, 3, Basis::Position, 0).unwrap();
        let grid = MomentumGrid::new(6, Boundary::Antiperiodic).unwrap();
        let block = ModeBlock::pair_at(&grid, 0).unwrap();
        assert!(matches!(
            block_entropy_state(&s, &block, &[], EntropyMethod::Schmidt),
            Err(Error::BasisMismatch { .. })
        ));
    }

    #[test]
    fn size_limits() {
        let s = random_sector_state(16, 2, MOM, 0).unwrap();
        let block: Vec<usize> = (0..15).collect();
        assert!(block_entropy_indices(&s, &block, &[], EntropyMethod::Schmidt).is_ok());
        assert!(matches!(
            block_entropy_indices(&s, &block, &[], EntropyMethod::Rdm),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn neel_reference_structure() {
        let r = neel_reference(8).unwrap();
        let nonzero: Vec<f64> = r
            .amplitudes
            .iter()
            .filter(|a| a.norm() > 0.0)
            .map(|a| a.norm())
            .collect();
        assert_eq!(nonzero.len(), 8);
        assert!(nonzero.iter().all(|a| (a - nonzero[0]).abs() < 1e-15));
        assert!((r.positive[3].1 - 3.0 * LN_2).abs() < 1e-15);
        assert!((r.positive[1].1 - 2.0 * LN_2).abs() < 1e-15);
        assert!(neel_reference(6).is_err());
    }

    #[test]
    fn neel_positive_blocks() {
        let s = neel_momentum(8);
        let grid = MomentumGrid::new(8, Boundary::Antiperiodic).unwrap();
        for n in 1..=3 {
            let b = ModeBlock::positive(&grid, n, FRAC_PI_2).unwrap();
            let e = block_entropy_state(&s, &b, &[], EntropyMethod::Schmidt).unwrap();
            assert!((e.vn - n as f64 * LN_2).abs() < 1e-9);
        }
        let b = ModeBlock::positive(&grid, 4, FRAC_PI_2).unwrap();
        let e = block_entropy_state(&s, &b, &[], EntropyMethod::Schmidt).unwrap();
        assert!((e.vn - 3.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn scan_shapes() {
        let s = random_sector_state(8, 4, MOM, 1).unwrap();
        let p = entropy_scan(&s, BlockFamily::Positive, FRAC_PI_2, &[]).unwrap();
        assert_eq!(p.points.len(), 4);
        let e = entropy_scan(&s, BlockFamily::Energy, FRAC_PI_2, &[]).unwrap();
        assert_eq!(e.points.len(), 8);
        assert!(e.points[7].entropy.vn < 1e-12);
        let q = entropy_scan(&s, BlockFamily::Pair, FRAC_PI_2, &[]).unwrap();
        assert_eq!(q.points.len(), 4);
        assert!(q.points.windows(2).all(|w| w[0].parameter < w[1].parameter));
    }

    #[test]
    fn minimax_on_product_state() {
        let s = ManyBodyState::basis_state(6, MOM, 0b010110).unwrap();
        let r = minimax_entropy(&s, 6, MinimaxMode::Exhaustive).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(!r.heuristic);
    }

    #[test]
    fn heuristic_bounds_exhaustive() {
        let s = random_sector_state(8, 4, MOM, 2).unwrap();
        let exact = minimax_entropy(&s, 4, MinimaxMode::Exhaustive).unwrap();
        let heur = minimax_entropy(&s, 4, MinimaxMode::Heuristic { seed: 1 }).unwrap();
        for (a, b) in exact.per_size.iter().zip(&heur.per_size) {
            assert!(b.entropy >= a.entropy - 1e-12);
        }
        assert!(heur.heuristic);
        let big = random_sector_state(14, 7, MOM, 0).unwrap();
        assert!(matches!(
            minimax_entropy(&big, 3, MinimaxMode::Exhaustive),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn minimax_invariant_under_relabeling() {
        // swapping two mode labels permutes words and flips signs by the
        // number of occupied modes strictly between them
        let s = random_sector_state(8, 4, MOM, 7).unwrap();
        let (x, y) = (1usize, 5usize);
        let mut amps = vec![ZERO; 256];
        for (w, &a) in s.amplitudes().iter().enumerate() {
            let w = w as u64;
            let bx = (w >> x) & 1;
            let by = (w >> y) & 1;
            let mut t = w;
            let mut sign = 1.0;
            if bx != by {
                t ^= (1 << x) | (1 << y);
                let between = (w >> (x + 1)) & ((1 << (y - x - 1)) - 1);
                if between.count_ones() % 2 == 1 {
                    sign = -1.0;
                }
            }
            amps[t as usize] = a * sign;
        }
        let t = ManyBodyState::new(8, MOM, amps, Some(4)).unwrap();
        let a = minimax_entropy(&s, 8, MinimaxMode::Exhaustive).unwrap();
        let b = minimax_entropy(&t, 8, MinimaxMode::Exhaustive).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
        for (p, q) in a.per_size.iter().zip(&b.per_size) {
            assert!((p.entropy - q.entropy).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn complement_symmetry(seed in 0u64..10_000, raw in proptest::collection::vec(0usize..10, 1..9)) {
            let s = random_sector_state(10, 5, MOM, seed).unwrap();
            let mut block: Vec<usize> = Vec::new();
            for j in raw { if !block.contains(&j) { block.push(j); } }
            let comp: Vec<usize> = (0..10).filter(|j| !block.contains(j)).collect();
            prop_assume!(!comp.is_empty());
            let a = block_entropy_indices(&s, &block, &[], EntropyMethod::Schmidt).unwrap();
            let b = block_entropy_indices(&s, &comp, &[], EntropyMethod::Schmidt).unwrap();
            prop_assert!((a.vn - b.vn).abs() <= 1e-10);
        }

        #[test]
        fn internal_order_is_irrelevant(seed in 0u64..10_000, rot in 0usize..4) {
            let s = random_state(8, MOM, seed).unwrap();
            let mut block = vec![6usize, 1, 3, 4];
            let base = block_entropy_indices(&s, &block, &[], EntropyMethod::Rdm).unwrap().vn;
            block.rotate_left(rot);
            block.swap(0, 3);
            let other = block_entropy_indices(&s, &block, &[], EntropyMethod::Rdm).unwrap().vn;
            prop_assert!((base - other).abs() <= 1e-10);
        }

        #[test]
        fn bounded_and_monotone(seed in 0u64..10_000, l in 1usize..8) {
            let s = random_sector_state(8, 4, MOM, seed).unwrap();
            let block: Vec<usize> = (0..l).collect();
            let e = block_entropy_indices(&s, &block, &[0.5, 2.0, 3.0], EntropyMethod::Schmidt).unwrap();
            prop_assert!(e.vn >= 0.0);
            prop_assert!(e.vn <= l.min(8 - l) as f64 * LN_2 + 1e-12);
            prop_assert!(e.renyi[0].1 >= e.vn - 1e-10);
            prop_assert!(e.vn >= e.renyi[1].1 - 1e-10);
            prop_assert!(e.renyi[1].1 >= e.renyi[2].1 - 1e-10);
        }

        #[test]
        fn paired_blocks_of_paired_states_vanish(seed in 0u64..10_000, pick in 0usize..4) {
            // prod_k (u_k + v_k b+_k b+_-k)|0>, written in ascending mode order
            use rand::Rng;
            let grid = MomentumGrid::new(8, Boundary::Antiperiodic).unwrap();
            let pos = grid.positive_indices();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let uv: Vec<(Complex64, Complex64)> = pos
                .iter()
                .map(|_| {
                    (
                        Complex64::new(rng.random::<f64>() + 0.1, 0.0),
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    )
                })
                .collect();
            let mut amps = vec![ZERO; 256];
            for filled in 0u32..16 {
                let mut order = Vec::new();
                let mut amp = Complex64::new(1.0, 0.0);
                for (p, &j) in pos.iter().enumerate() {
                    if filled & (1 << p) != 0 {
                        order.push(j);
                        order.push(grid.partner(j));
                        amp *= uv[p].1;
                    } else {
                        amp *= uv[p].0;
                    }
                }
                let inversions: usize = (0..order.len())
                    .map(|a| (a + 1..order.len()).filter(|&b| order[a] > order[b]).count())
                    .sum();
                let word = order.iter().fold(0u64, |w, &j| w | (1 << j));
                amps[word as usize] = if inversions % 2 == 1 { -amp } else { amp };
            }
            let s = ManyBodyState::normalized(8, MOM, amps, None).unwrap();
            let block = vec![pos[pick], grid.partner(pos[pick]), pos[(pick + 1) % 4], grid.partner(pos[(pick + 1) % 4])];
            let e = block_entropy_indices(&s, &block, &[], EntropyMethod::Schmidt).unwrap();
            prop_assert!(e.vn <= 1e-10);
            // one broken pair gives a nonzero entropy
            let single = block_entropy_indices(&s, &[pos[pick]], &[], EntropyMethod::Schmidt).unwrap();
            prop_assert!(single.vn > 1e-6);
        }
    }
}
