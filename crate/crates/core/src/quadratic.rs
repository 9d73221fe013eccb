//! Exact solution of the generalized XY chain (and its Ising limit) in
//! momentum space.
//!
//! After Jordan–Wigner and Fourier transforms the chain is quadratic in the
//! momentum fermions, with `A_j = J - cos k_j` and `B_j = -gamma sin k_j`.
//! A Bogoliubov rotation mixes only `k` with `-k`, so the reduced density
//! matrix of any block is a product of two-level spectra coming from the
//! pairs the block splits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, validate_alphas, EntropyResult};
use crate::error::{invalid, Result};
use crate::modes::{Boundary, ModeBlock, MomentumGrid};
use crate::quadrature::integrate;

/// Absolute tolerance of the thermodynamic-limit integrals.
pub const QUADRATURE_TOL: f64 = 1e-11;

/// Transverse field `J` and anisotropy `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticModel {
    pub field: f64,
    pub anisotropy: f64,
}

impl QuadraticModel {
    pub fn new(field: f64, anisotropy: f64) -> Self {
        Self { field, anisotropy }
    }

    /// Ising chain in a transverse field (`gamma = 1`).
    pub fn ising(field: f64) -> Self {
        Self::new(field, 1.0)
    }

    pub fn a_coefficient(&self, k: f64) -> f64 {
        self.field - k.cos()
    }

    pub fn b_coefficient(&self, k: f64) -> f64 {
        -self.anisotropy * k.sin()
    }

    /// `u^2(k) = (1 + A/E) / 2`. A zero-energy mode is taken as empty
    /// (`u^2 = 1`), which keeps the `gamma = 0` ground state a product state.
    pub fn u2(&self, k: f64) -> f64 {
        let a = self.a_coefficient(k);
        let b = self.b_coefficient(k);
        let e = a.hypot(b);
        if e == 0.0 {
            1.0
        } else {
            0.5 * (1.0 + a / e)
        }
    }

    /// Entropy contributed by a split `(k, -k)` pair in an even state.
    pub fn mode_entropy(&self, k: f64) -> f64 {
        binary_entropy(self.u2(k))
    }
}

/// Per-mode Bogoliubov data on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BogoliubovSolution {
    pub grid: MomentumGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub energy: Vec<f64>,
    pub u2: Vec<f64>,
    pub v2: Vec<f64>,
    /// Ground-state fermion number `sum_j v_j^2`.
    pub n_f: f64,
}

pub fn bogoliubov(model: &QuadraticModel, grid: &MomentumGrid) -> BogoliubovSolution {
    let n = grid.len();
    let mut sol = BogoliubovSolution {
        grid: grid.clone(),
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        energy: Vec::with_capacity(n),
        u2: Vec::with_capacity(n),
        v2: Vec::with_capacity(n),
        n_f: 0.0,
    };
    for j in 0..n {
        let k = grid.momentum(j);
        let a = model.a_coefficient(k);
        let b = model.b_coefficient(k);
        let u2 = model.u2(k);
        sol.a.push(a);
        sol.b.push(b);
        sol.energy.push(a.hypot(b));
        sol.u2.push(u2);
        sol.v2.push(1.0 - u2);
    }
    sol.n_f = sol.v2.iter().sum();
    sol
}

/// Occupations `theta_j` of the Bogoliubov modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaState {
    pub theta: Vec<bool>,
    pub even: bool,
}

impl ThetaState {
    /// The Bogoliubov vacuum, i.e. the ground state.
    pub fn ground(grid: &MomentumGrid) -> Self {
        Self {
            theta: vec![false; grid.len()],
            even: true,
        }
    }

    pub fn new(grid: &MomentumGrid, theta: Vec<bool>) -> Result<Self> {
        if theta.len() != grid.len() {
            return invalid(format!(
                "theta has {} entries for a grid of {}",
                theta.len(),
                grid.len()
            ));
        }
        let even = (0..grid.len()).all(|j| theta[j] == theta[grid.partner(j)]);
        Ok(Self { theta, even })
    }
}

/// Block entropy from the diagonal reduced correlation matrix
/// `lambda_j = u_j^2 theta_j + v_j^2 (1 - theta_{-j})`.
///
/// Pairs fully inside the block, and the self-paired modes at 0 and pi,
/// contribute nothing.
pub fn block_entropy_quadratic(
    sol: &BogoliubovSolution,
    theta: &ThetaState,
    block: &ModeBlock,
    alphas: &[f64],
) -> Result<EntropyResult> {
    validate_alphas(alphas)?;
    let grid = &sol.grid;
    if theta.theta.len() != grid.len() {
        return invalid("theta state does not match the grid");
    }
    if let Some(j) = block.indices().iter().find(|&&j| j >= grid.len()) {
        return invalid(format!("mode {j} not on the grid"));
    }
    let member = block.membership(grid.len());
    let mut lambdas = Vec::new();
    for &j in block.indices() {
        let partner = grid.partner(j);
        if partner == j || member[partner] {
            continue;
        }
        let own = if theta.theta[j] { 1.0 } else { 0.0 };
        let other = if theta.theta[partner] { 1.0 } else { 0.0 };
        lambdas.push(sol.u2[j] * own + sol.v2[j] * (1.0 - other));
    }
    Ok(EntropyResult::from_mode_occupations(&lambdas, alphas))
}

/// Entropy contributed by the pair `(k, -k)` in the Ising ground state:
/// `H2(1/2 + (J - cos k) / (2 sqrt((J - cos k)^2 + sin^2 k)))`.
pub fn itf_pair_entropy(k: f64, field: f64) -> f64 {
    QuadraticModel::ising(field).mode_entropy(k)
}

/// Momentum where the Ising pair entropy peaks. For `J <= 1` it is
/// `arccos J` and the peak value is `ln 2`.
pub fn itf_critical_momentum(field: f64) -> Option<f64> {
    (field.abs() <= 1.0).then(|| field.acos())
}

/// `lim S(P_{N/2}) / N = (1 / 2 pi) int_0^pi s(k) dk`.
pub fn thermo_entropy_per_site(field: f64, anisotropy: f64) -> f64 {
    let model = QuadraticModel::new(field, anisotropy);
    let (value, _) = integrate(|k| model.mode_entropy(k), 0.0, PI, QUADRATURE_TOL);
    value / (2.0 * PI)
}

/// `S(P_{N/2})` of the ground state on the antiperiodic grid: one term per
/// positive momentum `(2p + 1) pi / N`.
pub fn positive_half_entropy(model: &QuadraticModel, n: usize) -> Result<f64> {
    let grid = MomentumGrid::new(n, Boundary::Antiperiodic)?;
    Ok(grid
        .positive_indices()
        .into_iter()
        .map(|j| model.mode_entropy(grid.momentum(j)))
        .sum())
}

/// Finite-size entropy per site `s_N = S(P_{N/2}) / N`.
pub fn entropy_per_site(model: &QuadraticModel, n: usize) -> Result<f64> {
    Ok(positive_half_entropy(model, n)? / n as f64)
}

/// Approximation to `S(P_{N/2})` of the Ising chain that keeps the lowest
/// mode `pi / N` exactly and replaces the rest of the sum by an integral.
pub fn single_mode_approx(field: f64, n: usize) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return invalid(format!("N must be even and >= 2, got {n}"));
    }
    let model = QuadraticModel::ising(field);
    let nf = n as f64;
    let lowest = model.mode_entropy(PI / nf);
    let (tail, _) = integrate(|k| model.mode_entropy(k), 2.0 * PI / nf, PI, QUADRATURE_TOL);
    Ok(lowest + nf / (2.0 * PI) * tail)
}

/// One row of the finite-size collapse table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub n: usize,
    pub field: f64,
    /// `N (J - 1)`
    pub scaled_field: f64,
    pub s_n: f64,
    /// `s_N(J) - s_0(J)`
    pub s_tilde: f64,
}

pub fn collapse_row(n: usize, field: f64) -> Result<CollapseRow> {
    let s_n = entropy_per_site(&QuadraticModel::ising(field), n)?;
    let s0 = thermo_entropy_per_site(field, 1.0);
    Ok(CollapseRow {
        n,
        field,
        scaled_field: n as f64 * (field - 1.0),
        s_n,
        s_tilde: s_n - s0,
    })
}

/// Collapse table for every `(N, J)`, sorted by `(N, J)`.
pub fn scaling_collapse(sizes: &[usize], fields: &[f64]) -> Result<Vec<CollapseRow>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut fields = fields.to_vec();
    fields.sort_by(f64::total_cmp);
    let jobs: Vec<(usize, f64)> = sizes
        .iter()
        .flat_map(|&n| fields.iter().map(move |&j| (n, j)))
        .collect();
    jobs.par_iter().map(|&(n, j)| collapse_row(n, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::BlockFamily;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, LN_2};

    fn h2_quarter() -> f64 {
        // independent closed form: H2(1/4) = 2 ln 2 - (3/4) ln 3
        2.0 * LN_2 - 0.75 * 3f64.ln()
    }

    #[test]
    fn coefficients_at_symmetric_points() {
        let m = QuadraticModel::new(0.0, 1.0);
        let g = MomentumGrid::new(4, Boundary::Periodic).unwrap();
        let sol = bogoliubov(&m, &g);
        let j = g.index_of(FRAC_PI_2).unwrap();
        assert!(sol.a[j].abs() < 1e-15);
        assert!((sol.b[j] + 1.0).abs() < 1e-15);
        assert!((sol.energy[j] - 1.0).abs() < 1e-15);
        assert!((sol.u2[j] - 0.5).abs() < 1e-15);

        let g = MomentumGrid::new(6, Boundary::Periodic).unwrap();
        let sol = bogoliubov(&m, &g);
        let j = g.index_of(FRAC_PI_3).unwrap();
        assert!((sol.a[j] + 0.5).abs() < 1e-15);
        assert!((sol.b[j] + 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((sol.energy[j] - 1.0).abs() < 1e-15);
        assert!((sol.u2[j] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn xx_chain_is_a_product_state() {
        let m = QuadraticModel::new(0.0, 0.0);
        for n in [8usize, 12, 20] {
            for bc in [Boundary::Periodic, Boundary::Antiperiodic] {
                let g = MomentumGrid::new(n, bc).unwrap();
                let sol = bogoliubov(&m, &g);
                for j in 0..n {
                    assert!(sol.u2[j] == 0.0 || sol.u2[j] == 1.0, "u2 = {}", sol.u2[j]);
                }
                let theta = ThetaState::ground(&g);
                for len in 1..=n / 2 {
                    let b = ModeBlock::positive(&g, len, FRAC_PI_2).unwrap();
                    let s = block_entropy_quadratic(&sol, &theta, &b, &[2.0]).unwrap();
                    assert_eq!(s.vn, 0.0);
                }
            }
        }
    }

    #[test]
    fn ising_block_entropies() {
        let g = MomentumGrid::new(6, Boundary::Periodic).unwrap();
        let sol = bogoliubov(&QuadraticModel::ising(0.0), &g);
        let theta = ThetaState::ground(&g);
        let pair = ModeBlock::pair(&g, FRAC_PI_3).unwrap();
        assert_eq!(
            block_entropy_quadratic(&sol, &theta, &pair, &[])
                .unwrap()
                .vn,
            0.0
        );
        let single = ModeBlock::custom(&g, vec![g.index_of(FRAC_PI_3).unwrap()]).unwrap();
        let s = block_entropy_quadratic(&sol, &theta, &single, &[2.0]).unwrap();
        assert!((s.vn - h2_quarter()).abs() < 1e-14);
        assert!((s.vn - 0.562335).abs() < 1e-6);
        // S_2 = -ln(1/16 + 9/16)
        assert!((s.renyi[0].1 + (10.0f64 / 16.0).ln()).abs() < 1e-14);
        assert!(block_entropy_quadratic(&sol, &theta, &single, &[1.0]).is_err());
    }

    #[test]
    fn large_anisotropy_saturates() {
        let g = MomentumGrid::new(100, Boundary::Antiperiodic).unwrap();
        let sol = bogoliubov(&QuadraticModel::new(0.0, 1e4), &g);
        let b = crate::modes::make_block(&g, BlockFamily::Positive, 50, FRAC_PI_2).unwrap();
        let s = block_entropy_quadratic(&sol, &ThetaState::ground(&g), &b, &[]).unwrap();
        assert!((s.vn - 50.0 * LN_2).abs() < 1e-3 * 50.0 * LN_2);
    }

    #[test]
    fn pair_entropy_examples() {
        assert!((itf_pair_entropy(0.5f64.acos(), 0.5) - LN_2).abs() < 1e-12);
        assert!((itf_pair_entropy(FRAC_PI_2, 0.0) - LN_2).abs() < 1e-15);
        assert!((itf_pair_entropy(FRAC_PI_3, 0.0) - h2_quarter()).abs() < 1e-14);
    }

    #[test]
    fn pair_entropy_peak() {
        for i in 0..=20 {
            let field = i as f64 * 0.05;
            let kc = itf_critical_momentum(field).unwrap();
            if kc > 0.0 {
                assert!((itf_pair_entropy(kc, field) - LN_2).abs() < 1e-10);
            }
        }
        for field in [1.05, 1.3, 2.0, 4.0] {
            let best = (1..20000)
                .map(|i| itf_pair_entropy(i as f64 * PI / 20000.0, field))
                .fold(0.0, f64::max);
            assert!(best < LN_2 - 1e-6, "J = {field}: {best}");
        }
    }

    #[test]
    fn thermodynamic_plateau() {
        let s0 = LN_2 - 0.5;
        for field in [0.0, 0.3, 0.5, 0.9, 1.0] {
            assert!((thermo_entropy_per_site(field, 1.0) - s0).abs() < 1e-9);
        }
        // Riemann-sum oracle at large N
        let field = 2.0;
        let model = QuadraticModel::ising(field);
        let n = 4000usize;
        let sum: f64 = (0..n / 2)
            .map(|p| model.mode_entropy((2 * p + 1) as f64 * PI / n as f64))
            .sum::<f64>()
            / n as f64;
        let thermo = thermo_entropy_per_site(field, 1.0);
        assert!(thermo < s0);
        assert!((thermo - sum).abs() < 1e-6, "{thermo} vs {sum}");
    }

    #[test]
    fn single_mode_tracks_exact_sum() {
        let n = 200;
        let exact = positive_half_entropy(&QuadraticModel::ising(0.0), n).unwrap();
        let approx = single_mode_approx(0.0, n).unwrap();
        assert!((approx - exact).abs() < 0.01 * exact);
        // at the critical point the lowest mode tends to H2(1/2)
        let lowest = QuadraticModel::ising(1.0).mode_entropy(PI / 1e6);
        assert!((lowest - LN_2).abs() < 1e-10);
        assert!(single_mode_approx(1.0, 7).is_err());
    }

    #[test]
    fn single_mode_peak_position() {
        let n = 200;
        let fields: Vec<f64> = (0..=400).map(|i| 0.8 + i as f64 * 1e-3).collect();
        let argmax = |f: &dyn Fn(f64) -> f64| {
            let mut best = (0, f64::MIN);
            for (i, &j) in fields.iter().enumerate() {
                let v = f(j);
                if v > best.1 {
                    best = (i, v);
                }
            }
            best.0
        };
        let exact = argmax(&|j| positive_half_entropy(&QuadraticModel::ising(j), n).unwrap());
        let approx = argmax(&|j| single_mode_approx(j, n).unwrap());
        assert!(exact.abs_diff(approx) <= 2, "{exact} vs {approx}");
    }

    #[test]
    fn collapse_table_shape() {
        let rows = scaling_collapse(&[200, 100], &[1.0, 0.5]).unwrap();
        let keys: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.field)).collect();
        assert_eq!(keys, vec![(100, 0.5), (100, 1.0), (200, 0.5), (200, 1.0)]);
        assert!((rows[1].s_tilde - rows[3].s_tilde).abs() < 5e-3);
        // deep in the ordered phase the finite-size correction vanishes
        let deep = collapse_row(200, 1.0 - 200.0 / 200.0).unwrap();
        assert!(deep.s_tilde.abs() < 1e-6);
    }

    #[test]
    fn fermion_number_decreases_with_field() {
        let g = MomentumGrid::new(64, Boundary::Antiperiodic).unwrap();
        let counts: Vec<f64> = (0..=200)
            .map(|i| bogoliubov(&QuadraticModel::ising(i as f64 * 0.01), &g).n_f)
            .collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    proptest! {
        #[test]
        fn bogoliubov_invariants(field in -3.0f64..3.0, gamma in -3.0f64..3.0, half in 1usize..40) {
            let g = MomentumGrid::new(2 * half, Boundary::Antiperiodic).unwrap();
            let sol = bogoliubov(&QuadraticModel::new(field, gamma), &g);
            for j in 0..g.len() {
                prop_assert!((sol.u2[j] + sol.v2[j] - 1.0).abs() < 1e-12);
                prop_assert!((sol.energy[j].powi(2) - sol.a[j].powi(2) - sol.b[j].powi(2)).abs() < 1e-12);
                prop_assert!((sol.u2[j] - sol.u2[g.partner(j)]).abs() < 1e-12);
            }
        }

        #[test]
        fn even_states_share_entropies(field in 0.0f64..2.0, gamma in 0.1f64..2.0, flips in any::<u32>(), len in 1usize..8) {
            let g = MomentumGrid::new(16, Boundary::Antiperiodic).unwrap();
            let sol = bogoliubov(&QuadraticModel::new(field, gamma), &g);
            let mut theta = vec![false; 16];
            for j in 0..16 {
                let pair_id = g.numerator(j).unsigned_abs() as u32;
                theta[j] = (flips >> (pair_id % 32)) & 1 == 1;
            }
            let excited = ThetaState::new(&g, theta).unwrap();
            prop_assert!(excited.even);
            let block = ModeBlock::positive(&g, len, FRAC_PI_2).unwrap();
            let a = block_entropy_quadratic(&sol, &ThetaState::ground(&g), &block, &[2.0]).unwrap();
            let b = block_entropy_quadratic(&sol, &excited, &block, &[2.0]).unwrap();
            prop_assert!((a.vn - b.vn).abs() < 1e-12);
            prop_assert!((a.renyi[0].1 - b.renyi[0].1).abs() < 1e-12);
        }

        #[test]
        fn positive_blocks_grow(field in 0.0f64..2.5) {
            let g = MomentumGrid::new(40, Boundary::Antiperiodic).unwrap();
            let sol = bogoliubov(&QuadraticModel::ising(field), &g);
            let theta = ThetaState::ground(&g);
            let mut last = 0.0;
            for n in 1..=20 {
                let b = ModeBlock::positive(&g, n, FRAC_PI_2).unwrap();
                let s = block_entropy_quadratic(&sol, &theta, &b, &[]).unwrap().vn;
                prop_assert!(s >= last - 1e-15);
                last = s;
            }
        }

        #[test]
        fn renyi_approaches_von_neumann(lams in proptest::collection::vec(0.0f64..1.0, 1..12)) {
            let r = EntropyResult::from_mode_occupations(&lams, &[1.001]);
            prop_assert!((r.renyi[0].1 - r.vn).abs() <= 1e-3 * (1.0 + r.vn));
        }
    }
}
