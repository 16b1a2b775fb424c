//! F_eps on a decreasing eps grid: monotone decrease to F and a quadratic
//! gap whose prefactor is predicted by (1/12) ∫ κ²(1+η²)² η'² ds.
//!
//!     cargo run --release --example gamma_sweep

use ribbonlim::gamma_lab::eps_sweep;
use ribbonlim::shapes::{self, TorsionModulated};
use ribbonlim::QuadratureScheme;

fn main() -> ribbonlim::Result<()> {
    let grid = [0.2, 0.1, 0.04, 0.03, 0.02, 0.015, 0.01, 0.0075, 0.005];
    let curves = [
        ("default", TorsionModulated::default()),
        (
            "wavy",
            TorsionModulated {
                radius: 0.14,
                pitch: 0.04,
                turns: 0.9,
                modulation: 0.012,
                modulation_waves: 0.8,
            },
        ),
    ];
    for (name, p) in curves {
        let c = shapes::torsion_modulated(&p, 48)?;
        let r = eps_sweep(&c, &grid, &QuadratureScheme::default())?;
        println!("{name}: F = {:.12}, monotone {}", r.f_limit, r.monotone);
        for (e, g) in r.eps_grid.iter().zip(&r.gaps) {
            println!("  eps {e:<7} gap {:.6e}", g.unwrap_or(f64::INFINITY));
        }
        println!(
            "  rate {:.4}  prefactor {:.6e}  predicted {:.6e}\n",
            r.fitted_rate.unwrap_or(f64::NAN),
            r.fitted_prefactor.unwrap_or(f64::NAN),
            r.predicted_prefactor
        );
    }

    // eta' = 0: all gaps vanish and no rate is fitted
    let helix = shapes::helix_unit_speed(0.5, 0.3, 1.0, 32)?;
    let r = eps_sweep(&helix, &grid, &QuadratureScheme::default())?;
    println!("helix: degenerate {} rate {:?}", r.degenerate, r.fitted_rate);
    Ok(())
}
