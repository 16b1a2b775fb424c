//! Curves with isolated curvature zeros: an open arc with one simple zero
//! and a closed loop whose principal normal flips once (odd framing).
//!
//!     cargo run --release --example inflection_curves

use ribbonlim::gamma_lab::{curvature_zeros, inflection_test_curve, InflectionKind};
use ribbonlim::energy::{regularized_sadowsky_energy, sadowsky_energy};
use ribbonlim::QuadratureScheme;

fn main() -> ribbonlim::Result<()> {
    let quad = QuadratureScheme::default();
    for kind in [
        InflectionKind::single_zero(),
        InflectionKind::SingleZero { k: 2.0, delta: 1.0, t_star: 0.3 },
        InflectionKind::mobius_like(),
        InflectionKind::MobiusLike { beta: 0.2, gamma: 0.5 },
    ] {
        let c = inflection_test_curve(kind)?;
        println!("{kind:?}");
        println!("  zeros {:?}  normal flips {}  odd framing {}", c.zeros, c.normal_flips, c.odd_framing());
        println!("  rescan {:?}", curvature_zeros(&c.curve, 4096));
        match sadowsky_energy(&c.curve, &quad) {
            Ok(v) => println!("  F = {:?}", v.value()),
            Err(e) => println!("  F: {e}"),
        }
        for km in [0.1, 0.01] {
            println!("  F with kappa_m {km}: {:.8}", regularized_sadowsky_energy(&c.curve, km, &quad)?.value());
        }
    }
    Ok(())
}
