//! Momentum grids, occupation words and the block families used to carve
//! momentum space (positive blocks `P_n`, opposite pairs `p_k`, energy
//! shells `E_n`).
//!
//! Every momentum on a grid of `N` sites is a rational multiple of `pi`,
//! `k_j = q_j * pi / N` with an integer numerator `q_j`. All equality tests
//! between momenta go through these numerators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest grid size.
pub const MAX_SITES: usize = 1 << 24;
/// Largest number of modes an occupation word or block mask can address.
pub const MAX_WORD_MODES: usize = 64;

/// Boundary condition of the fermionic chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// `k = 2 pi j / N`, contains 0 and pi.
    Periodic,
    /// `k = (2p + 1) pi / N`, never contains 0 or pi.
    Antiperiodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "pbc",
            Boundary::Antiperiodic => "apbc",
        }
    }
}

/// Allowed momenta of an `N`-site ring, sorted ascending in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumGrid {
    sites: usize,
    boundary: Boundary,
    numerators: Vec<i64>,
}

impl MomentumGrid {
    /// Builds the grid for an even number of sites `n >= 2`.
    pub fn new(n: usize, boundary: Boundary) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return invalid(format!("grid size must be even and >= 2, got {n}"));
        }
        if n > MAX_SITES {
            return Err(Error::SizeLimit(format!(
                "grid size {n} exceeds {MAX_SITES}"
            )));
        }
        let half = (n / 2) as i64;
        let numerators = match boundary {
            // 2j for j = -N/2+1 ..= N/2
            Boundary::Periodic => (-half + 1..=half).map(|j| 2 * j).collect(),
            // 2p+1 for p = -N/2 ..= N/2-1
            Boundary::Antiperiodic => (-half..half).map(|p| 2 * p + 1).collect(),
        };
        Ok(Self {
            sites: n,
            boundary,
            numerators,
        })
    }

    pub fn len(&self) -> usize {
        self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.sites == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Integer numerator `q_j` with `k_j = q_j pi / N`.
    pub fn numerator(&self, j: usize) -> i64 {
        self.numerators[j]
    }

    pub fn momentum(&self, j: usize) -> f64 {
        self.numerators[j] as f64 * PI / self.sites as f64
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.sites).map(|j| self.momentum(j)).collect()
    }

    /// Grid index holding numerator `q` (reduced into `(-N, N]`).
    pub fn index_of_numerator(&self, q: i64) -> Option<usize> {
        let q = reduce_numerator(q, self.sites);
        self.numerators.binary_search(&q).ok()
    }

    /// Grid index of the momentum `k`, matched to within `1e-9`.
    pub fn index_of(&self, k: f64) -> Option<usize> {
        let scaled = k * self.sites as f64 / PI;
        let q = scaled.round();
        if (scaled - q).abs() > 1e-9 * self.sites as f64 {
            return None;
        }
        self.index_of_numerator(q as i64)
    }

    /// Index of `-k_j` (modes at 0 and pi are their own partners).
    pub fn partner(&self, j: usize) -> usize {
        self.index_of_numerator(-self.numerators[j])
            .expect("grids are closed under k -> -k")
    }

    pub fn is_self_paired(&self, j: usize) -> bool {
        self.partner(j) == j
    }

    /// Indices with `0 < k <= pi`, ascending in `k`.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.sites)
            .filter(|&j| self.numerators[j] > 0)
            .collect()
    }
}

fn reduce_numerator(q: i64, n: usize) -> i64 {
    let two_n = 2 * n as i64;
    let mut r = q.rem_euclid(two_n);
    if r > n as i64 {
        r -= two_n;
    }
    r
}

/// Occupation word: bit `j` is the occupation of grid index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ModeConfig(pub u64);

impl ModeConfig {
    pub fn from_indices(indices: &[usize]) -> Self {
        Self(indices.iter().fold(0u64, |w, &j| w | (1u64 << j)))
    }

    pub fn is_occupied(self, j: usize) -> bool {
        (self.0 >> j) & 1 == 1
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }
}

/// Sum of the occupied momentum numerators, reduced into `(-N, N]`.
pub fn total_momentum_numerator(config: ModeConfig, grid: &MomentumGrid) -> i64 {
    let mut w = config.0;
    let mut total = 0i64;
    while w != 0 {
        let j = w.trailing_zeros() as usize;
        total += grid.numerator(j);
        w &= w - 1;
    }
    reduce_numerator(total, grid.len())
}

/// `sum_j m_j k_j` reduced into `(-pi, pi]`.
pub fn total_momentum(config: ModeConfig, grid: &MomentumGrid) -> f64 {
    total_momentum_numerator(config, grid) as f64 * PI / grid.len() as f64
}

/// Family a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockFamily {
    /// `P_n`: n positive momenta closest to `+k_F`.
    Positive,
    /// `p_k`: the pair `{k, -k}`.
    Pair,
    /// `E_n`: n momenta whose `|k|` is closest to `k_F`.
    Energy,
    Custom,
}

impl BlockFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockFamily::Positive => "P",
            BlockFamily::Pair => "pair",
            BlockFamily::Energy => "E",
            BlockFamily::Custom => "custom",
        }
    }
}

/// A set of grid indices (in selection order) plus its family tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBlock {
    indices: Vec<usize>,
    family: BlockFamily,
}

impl ModeBlock {
    /// A block from explicit indices; they must be distinct and on the grid.
    pub fn custom(grid: &MomentumGrid, indices: Vec<usize>) -> Result<Self> {
        Self::checked(grid, indices, BlockFamily::Custom)
    }

    fn checked(grid: &MomentumGrid, indices: Vec<usize>, family: BlockFamily) -> Result<Self> {
        if indices.is_empty() {
            return invalid("a block needs at least one mode");
        }
        let mut seen = vec![false; grid.len()];
        for &j in &indices {
            if j >= grid.len() {
                return invalid(format!("mode index {j} outside grid of {}", grid.len()));
            }
            if seen[j] {
                return invalid(format!("mode index {j} repeated"));
            }
            seen[j] = true;
        }
        Ok(Self { indices, family })
    }

    /// `P_n`: the `n` positive momenta closest to `+k_F`; ties go to the
    /// smaller momentum.
    pub fn positive(grid: &MomentumGrid, n: usize, k_fermi: f64) -> Result<Self> {
        let mut candidates = grid.positive_indices();
        if n == 0 || n > candidates.len() {
            return invalid(format!(
                "P block size must be in 1..={}, got {n}",
                candidates.len()
            ));
        }
        candidates.sort_by(|&a, &b| {
            let da = (grid.momentum(a) - k_fermi).abs();
            let db = (grid.momentum(b) - k_fermi).abs();
            da.total_cmp(&db)
                .then(grid.numerator(a).cmp(&grid.numerator(b)))
        });
        candidates.truncate(n);
        Self::checked(grid, candidates, BlockFamily::Positive)
    }

    /// `p_k` for the pair containing grid index `j`.
    pub fn pair_at(grid: &MomentumGrid, j: usize) -> Result<Self> {
        if j >= grid.len() {
            return invalid(format!("mode index {j} outside grid of {}", grid.len()));
        }
        let partner = grid.partner(j);
        let indices = if partner == j {
            vec![j]
        } else {
            vec![j, partner]
        };
        Self::checked(grid, indices, BlockFamily::Pair)
    }

    /// `p_k` for the momentum `k`, which must lie on the grid.
    pub fn pair(grid: &MomentumGrid, k: f64) -> Result<Self> {
        match grid.index_of(k) {
            Some(j) => Self::pair_at(grid, j),
            None => invalid(format!("pair momentum {k} is not on the grid")),
        }
    }

    /// `E_n`: the `n` momenta minimizing `||k| - k_F|`; ties are broken by
    /// smaller `|k|`, then positive before negative.
    pub fn energy(grid: &MomentumGrid, n: usize, k_fermi: f64) -> Result<Self> {
        if n == 0 || n > grid.len() {
            return invalid(format!(
                "E block size must be in 1..={}, got {n}",
                grid.len()
            ));
        }
        let mut order = energy_order(grid, k_fermi);
        order.truncate(n);
        Self::checked(grid, order, BlockFamily::Energy)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn family(&self) -> BlockFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Occupation-word mask; only meaningful on grids of at most
    /// [`MAX_WORD_MODES`] modes.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.indices.iter().all(|&j| j < MAX_WORD_MODES));
        ModeConfig::from_indices(&self.indices).0
    }

    /// `member[j]` is true for block modes.
    pub fn membership(&self, n_modes: usize) -> Vec<bool> {
        let mut member = vec![false; n_modes];
        for &j in &self.indices {
            member[j] = true;
        }
        member
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    /// Remaining grid indices, ascending.
    pub fn complement(&self, n_modes: usize) -> Vec<usize> {
        let member = self.membership(n_modes);
        (0..n_modes).filter(|&j| !member[j]).collect()
    }
}

/// Grid indices sorted by `(||k| - k_F|, |k|, positive first)`.
pub fn energy_order(grid: &MomentumGrid, k_fermi: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        let (qa, qb) = (grid.numerator(a), grid.numerator(b));
        let da = (grid.momentum(a).abs() - k_fermi).abs();
        let db = (grid.momentum(b).abs() - k_fermi).abs();
        da.total_cmp(&db)
            .then(qa.abs().cmp(&qb.abs()))
            .then(qb.signum().cmp(&qa.signum()))
    });
    order
}

/// Dispatches on the family tag. For [`BlockFamily::Pair`], `k` is the
/// momentum of the pair and `n` is ignored; otherwise `k` is the Fermi
/// momentum.
pub fn make_block(grid: &MomentumGrid, family: BlockFamily, n: usize, k: f64) -> Result<ModeBlock> {
    match family {
        BlockFamily::Positive => ModeBlock::positive(grid, n, k),
        BlockFamily::Pair => ModeBlock::pair(grid, k),
        BlockFamily::Energy => ModeBlock::energy(grid, n, k),
        BlockFamily::Custom => invalid("custom blocks are built from explicit indices"),
    }
}
