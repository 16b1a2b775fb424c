//! Where F_eps stops being finite. For a curve with max |η'| = M the kernel
//! argument reaches 2 at eps = 2/M.
//!
//!     cargo run --release --example blowup

use std::f64::consts::PI;

use ribbonlim::energy::{blowup_scan, wunderlich_energy, BLOWUP_GRID};
use ribbonlim::{shapes, EnergyValue, QuadratureScheme};

fn main() -> ribbonlim::Result<()> {
    let amplitude = 0.2;
    let c = shapes::eta_sinusoid(6.0, 0.3, amplitude, 48)?;
    let m = 2.0 * PI * amplitude;
    let crit = 2.0 / m;
    println!("M = {m:.12}, 2/M = {crit:.12}");

    let quad = QuadratureScheme::default();
    for f in [0.5, 0.9, 0.999, 1.0, 1.001, 1.01, 1.5, 3.0] {
        let eps = f * crit;
        match wunderlich_energy(&c, eps, &quad)? {
            EnergyValue::Finite { value, warnings } => {
                println!("eps = {f:<5}·2/M  finite {value:.10}  ({} grazing nodes)", warnings.len())
            }
            EnergyValue::Infinite { blowup } => println!(
                "eps = {f:<5}·2/M  infinite, measure ≈ {:.4}, first at t = {:.4}",
                blowup.measure_estimate, blowup.first_t
            ),
        }
    }
    let scan = blowup_scan(&c, 3.0 * crit, BLOWUP_GRID)?;
    println!("scan at 3/M: measure {:.4}, isolated hits {}", scan.measure_estimate, scan.isolated.len());
    Ok(())
}
