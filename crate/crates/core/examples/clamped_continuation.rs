//! Minima of F_eps over clamped curves, solved by continuation from large
//! to small eps and finished with the Sadowsky functional. The minima
//! decrease towards the Sadowsky minimum roughly like eps².
//!
//!     cargo run --release --example clamped_continuation

use nalgebra::Vector3;
use ribbonlim::gamma_lab::{minimizer_convergence, SolveOutcome};
use ribbonlim::shapes;
use ribbonlim::solver::{minimize, EnergyKind, ObjectiveConfig, SolveOptions};

fn main() -> ribbonlim::Result<()> {
    let start = shapes::bumped_clamped_helix(Vector3::new(0.0, 0.3, 0.4), 10)?;
    let cfg = ObjectiveConfig::new(EnergyKind::Sadowsky);
    let opts = SolveOptions::default();

    let (_, plain) = minimize(&start, &cfg, &opts)?;
    println!(
        "Sadowsky alone: F = {:.10} in {} iterations ({:?})",
        plain.final_energy.value(),
        plain.iterations,
        plain.stop_reason
    );

    let t0 = std::time::Instant::now();
    let r = minimizer_convergence(&start, &[0.02, 0.01, 0.005, 0.0025], &cfg, &opts)?;
    for ((eps, m), gap) in r.eps_grid.iter().zip(&r.minima).zip(&r.gaps) {
        match m {
            SolveOutcome::Solved { objective, iterations, .. } => {
                println!("eps {eps:<7} m = {objective:.10}  gap {:.3e}  ({iterations} it)", gap.unwrap_or(f64::NAN))
            }
            SolveOutcome::Failed { error_kind, .. } => println!("eps {eps:<7} failed: {error_kind}"),
        }
    }
    println!("m0 = {:.10}", r.sadowsky.objective().unwrap_or(f64::NAN));
    println!(
        "monotone {}  bounded below {}  rate {:?}  ({:.2?})",
        r.monotone,
        r.bounded_below,
        r.fitted_rate,
        t0.elapsed()
    );
    Ok(())
}
