//! Size scaling of the XXZ momentum-space entropies: the linear growth of
//! `S(P_{N/2})`, its power law in Delta, and the slow growth of the
//! energy-block maximum compared across two scaling models.

use momentum_entanglement::fitkit::{fit_model, FitModel};
use momentum_entanglement::workflows::{size_scan, SolveOptions};

fn main() -> momentum_entanglement::Result<()> {
    let sizes = [8, 12, 16, 20];
    let deltas = [0.2, 0.4, 0.6, 0.8];
    let rows = size_scan(&sizes, &deltas, &SolveOptions::default())?;
    println!(" N   Delta   S(P_N/2)   S_max   n*");
    for r in &rows {
        println!(
            "{:2} {:6.2} {:10.6} {:8.5} {:3}",
            r.n, r.delta, r.s_p_half, r.s_max, r.n_at_max
        );
    }

    for &d in &deltas {
        let pick =
            |f: fn(&momentum_entanglement::workflows::SizeScanRow) -> f64| -> Vec<(f64, f64)> {
                rows.iter()
                    .filter(|r| r.delta == d)
                    .map(|r| (r.n as f64, f(r)))
                    .collect()
            };
        let linear = fit_model(&pick(|r| r.s_p_half), FitModel::Linear, None)?;
        let smax = pick(|r| r.s_max);
        let log = fit_model(&smax, FitModel::LogCorrection, None)?;
        let power = fit_model(&smax, FitModel::Power, None)?;
        println!(
            "Delta {d}: linear R^2 {:.6}; S_max theta {:.4} (rss {:.2e}) vs power rss {:.2e}",
            linear.r_squared,
            log.param("theta"),
            log.rss,
            power.rss
        );
    }

    let largest = *sizes.last().unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n == largest)
        .map(|r| (r.delta, r.s_p_half))
        .collect();
    let fit = fit_model(&pts, FitModel::Power, None)?;
    println!("N = {largest}: S(P_N/2) ~ Delta^{:.3}", fit.param("b"));
    Ok(())
}
