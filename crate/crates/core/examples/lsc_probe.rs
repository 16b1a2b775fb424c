//! Energies along curves u_n → u that converge in C² while their third
//! derivatives keep oscillating. The semicontinuity margin
//! liminf F(u_n) − F(u) should not be negative.
//!
//!     cargo run --release --example lsc_probe

use ribbonlim::gamma_lab::{
    inflection_test_curve, lsc_probe, InflectionKind, PerturbationKind, ProbeConfig, ProbeSequence,
};
use ribbonlim::shapes::{self, TorsionModulated};
use ribbonlim::QuadratureScheme;

fn show(name: &str, seq: &ProbeSequence, cfg: &ProbeConfig) -> ribbonlim::Result<()> {
    let r = lsc_probe(seq, cfg)?;
    println!("{name}: F(base) = {:.10}", r.base_energy);
    for m in &r.members {
        println!("  f {:>3}  a {:.3e}  F {:.10}", m.frequency, m.amplitude, m.energy);
    }
    println!("  margin {:.6e}  holds {}\n", r.margin, r.lsc_holds);
    Ok(())
}

fn main() -> ribbonlim::Result<()> {
    let freqs = vec![2, 3, 5, 8, 13, 21];
    let quad = QuadratureScheme::default();
    let plain = ProbeConfig { kappa_m: None, quad };

    let circle = shapes::unit_circle();
    let seq = ProbeSequence::cubic_decay(circle, PerturbationKind::CoefficientOscillation, 0.05, freqs.clone())?;
    show("circle, coefficient oscillation", &seq, &plain)?;

    let helix = shapes::torsion_modulated(&TorsionModulated::default(), 48)?;
    let seq = ProbeSequence::cubic_decay(helix, PerturbationKind::TorsionOscillation, 0.02, freqs.clone())?;
    show("torsion-modulated helix, torsion oscillation", &seq, &plain)?;

    // a base with an inflection point needs the curvature floor
    let base = inflection_test_curve(InflectionKind::single_zero())?;
    println!("single-zero base: zeros at {:?}", base.zeros);
    let seq = ProbeSequence::cubic_decay(base.curve, PerturbationKind::TorsionOscillation, 0.05, freqs)?;
    show("single inflection, kappa_m = 0.01", &seq, &ProbeConfig { kappa_m: Some(0.01), quad })?;
    Ok(())
}
