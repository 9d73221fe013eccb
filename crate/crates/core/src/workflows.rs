//! End-to-end pipelines shared by the command line, the examples and the
//! acceptance tests.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ed::{ground_state, xxz_hamiltonian, GroundStateResult, SolverMethod};
use crate::error::Result;
use crate::fitkit::{fit_model, luttinger, occupation_points, FitModel, FitResult};
use crate::mbft::{fourier_matrix, transform, ManyBodyState, TransformMethod};
use crate::modes::{BlockFamily, Boundary, ModeBlock, MomentumGrid};
use crate::rdm::{block_entropy_state, entropy_scan, EntropyMethod, EntropyProfile};

/// Fermi momentum at half filling.
pub const K_FERMI: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolverMethod,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Lanczos,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// XXZ ground state in both the position and the momentum basis.
#[derive(Debug, Clone)]
pub struct XxzMomentumState {
    pub ground: GroundStateResult,
    pub grid: MomentumGrid,
    pub state: ManyBodyState,
}

pub fn xxz_momentum_state(
    sites: usize,
    delta: f64,
    opts: &SolveOptions,
) -> Result<XxzMomentumState> {
    let h = xxz_hamiltonian(sites, delta)?;
    let ground = ground_state(&h, opts.method, opts.tol, opts.seed)?;
    let grid = MomentumGrid::new(sites, Boundary::Antiperiodic)?;
    let state = transform(
        &ground.to_state()?,
        &fourier_matrix(&grid),
        TransformMethod::Givens,
    )?;
    Ok(XxzMomentumState {
        ground,
        grid,
        state,
    })
}

/// One row of a size scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeScanRow {
    pub n: usize,
    pub delta: f64,
    pub energy: f64,
    /// `S(P_{N/2})`
    pub s_p_half: f64,
    /// `max_n S(E_n)`
    pub s_max: f64,
    /// `n` attaining `s_max` (smallest on ties).
    pub n_at_max: usize,
    pub low_gap: bool,
}

pub fn size_scan_row(sites: usize, delta: f64, opts: &SolveOptions) -> Result<SizeScanRow> {
    let xs = xxz_momentum_state(sites, delta, opts)?;
    let half = ModeBlock::positive(&xs.grid, sites / 2, K_FERMI)?;
    let s_p_half = block_entropy_state(&xs.state, &half, &[], EntropyMethod::Schmidt)?.vn;
    let profile = entropy_scan(&xs.state, BlockFamily::Energy, K_FERMI, &[])?;
    let mut s_max = f64::NEG_INFINITY;
    let mut n_at_max = 0;
    for p in &profile.points {
        if p.entropy.vn > s_max + 1e-12 {
            s_max = p.entropy.vn;
            n_at_max = p.parameter as usize;
        }
    }
    Ok(SizeScanRow {
        n: sites,
        delta,
        energy: xs.ground.energy,
        s_p_half,
        s_max,
        n_at_max,
        low_gap: xs.ground.low_gap,
    })
}

/// Rows for every `(N, Delta)` pair, sorted by `(N, Delta)`.
pub fn size_scan(sizes: &[usize], deltas: &[f64], opts: &SolveOptions) -> Result<Vec<SizeScanRow>> {
    let jobs: Vec<(usize, f64)> = sizes
        .iter()
        .flat_map(|&n| deltas.iter().map(move |&d| (n, d)))
        .collect();
    jobs.par_iter()
        .map(|&(n, d)| size_scan_row(n, d, opts))
        .collect()
}

/// Momentum occupations of the XXZ ground state with the Luttinger
/// comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationReport {
    pub n: usize,
    pub delta: f64,
    pub momenta: Vec<f64>,
    pub occupations: Vec<f64>,
    pub fit: FitResult,
    /// Prediction from the Luttinger parameter, when `Delta` is critical.
    pub alpha_theory: Option<f64>,
}

pub fn occupation_report(
    sites: usize,
    delta: f64,
    opts: &SolveOptions,
) -> Result<OccupationReport> {
    let xs = xxz_momentum_state(sites, delta, opts)?;
    let occupations = xs.state.occupations();
    let pts = occupation_points(&xs.grid, &occupations, K_FERMI)?;
    let fit = fit_model(&pts, FitModel::Power, None)?;
    Ok(OccupationReport {
        n: sites,
        delta,
        momenta: xs.grid.momenta(),
        occupations,
        fit,
        alpha_theory: luttinger(delta).ok().map(|l| l.alpha),
    })
}

/// `(|k - k_F|, S(p_k))` from a pair profile, averaged over momenta at the
/// same distance from `k_F`.
pub fn pair_fit_points(profile: &EntropyProfile, k_fermi: f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = profile
        .points
        .iter()
        .map(|p| ((p.parameter - k_fermi).abs(), p.entropy.vn))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for (x, y) in sorted {
        match out.last_mut() {
            Some(last) if (last.0 - x).abs() < 1e-9 => {
                last.1 += y;
                last.2 += 1;
            }
            _ => out.push((x, y, 1)),
        }
    }
    out.into_iter().map(|(x, y, c)| (x, y / c as f64)).collect()
}

/// Inclusive `start:stop:step` range with the endpoint snapped when it is
/// within a small fraction of a step.
pub fn float_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}
