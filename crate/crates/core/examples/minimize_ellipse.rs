//! Sadowsky minimization over closed curves of fixed length, starting from
//! an ellipse of axis ratio 1.5. The minimizer is the round circle, 4π².
//!
//!     cargo run --release --example minimize_ellipse

use std::f64::consts::PI;

use ribbonlim::shapes;
use ribbonlim::solver::{minimize, EnergyKind, ObjectiveConfig, SolveOptions};

fn main() -> ribbonlim::Result<()> {
    let start = shapes::ellipse(1.5, 1.0)?;
    let cfg = ObjectiveConfig::new(EnergyKind::Sadowsky);
    let t0 = std::time::Instant::now();
    let (best, report) = minimize(&start, &cfg, &SolveOptions::default())?;

    for h in &report.history {
        println!("{:>3}  {:.15}  |g| {:.3e}", h.iteration, h.energy, h.grad_norm);
    }
    let target = 4.0 * PI * PI;
    println!(
        "\n{:?} after {} iterations ({:.2?})",
        report.stop_reason,
        report.iterations,
        t0.elapsed()
    );
    println!("F = {:.15}, 4π² = {target:.15}, rel {:.1e}", report.final_energy.value(), report.final_energy.value() / target - 1.0);
    println!("constraints: {:?}", report.constraint_residuals);

    // axis ratio of the result
    let radii: Vec<f64> = (0..64).map(|i| best.position(i as f64 / 64.0).xy().norm()).collect();
    let (lo, hi) = radii.iter().fold((f64::MAX, 0.0_f64), |(l, h), r| (l.min(*r), h.max(*r)));
    println!("radius range [{lo:.12}, {hi:.12}]");
    Ok(())
}
