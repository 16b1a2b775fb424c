//! Frenet quantities and the three one-dimensional energies of a few
//! centerlines.
//!
//!     cargo run --release --example frenet_energies

use ribbonlim::energy::{gamma_gap_prediction, regularized_sadowsky_energy, sadowsky_energy, wunderlich_energy};
use ribbonlim::shapes::{self, TorsionModulated};
use ribbonlim::{eval_g, QuadratureScheme};

fn main() -> ribbonlim::Result<()> {
    let quad = QuadratureScheme::default();

    // the kernel: g(0) = 1, g(1) = ln 3, g -> inf at |x| = 2
    for x in [0.0, 0.5, 1.0, 1.9, 1.999, 2.0] {
        println!("g({x:>5}) = {:.15}", eval_g(x));
    }

    // helix of radius a (unit length): kappa = a/c², tau = b/c², F = 1/a²
    let (a, b) = (0.5, 0.3);
    let helix = shapes::helix_unit_speed(a, b, 1.0, 32)?;
    let s = helix.frenet_sample(0.4)?;
    let c2 = a * a + b * b;
    println!("\nhelix a={a} b={b}");
    println!("  kappa {:.15}  (a/c² = {:.15})", s.kappa, a / c2);
    println!("  tau   {:.15}  (b/c² = {:.15})", s.tau, b / c2);
    println!("  eta' {:.3e}", s.eta_prime);
    println!("  F     {:.12}  (1/a² = {})", sadowsky_energy(&helix, &quad)?.value(), 1.0 / (a * a));
    println!("  F_0.2 {:.12}", wunderlich_energy(&helix, 0.2, &quad)?.value());

    let circle = shapes::unit_circle();
    println!("\nunit circle F = {:.12} (4π² = {:.12})", sadowsky_energy(&circle, &quad)?.value(), 4.0 * std::f64::consts::PI.powi(2));

    // eta' != 0 here, so F_eps > F and the gap is about eps² P
    let c = shapes::torsion_modulated(&TorsionModulated::default(), 48)?;
    let f = sadowsky_energy(&c, &quad)?.value();
    let p = gamma_gap_prediction(&c, &quad)?;
    println!("\ntorsion-modulated helix: F = {f:.10}, P = {p:.6e}");
    for eps in [0.04, 0.02, 0.01] {
        let fe = wunderlich_energy(&c, eps, &quad)?.value();
        println!("  eps {eps:<5} F_eps - F = {:.6e}   eps² P = {:.6e}", fe - f, eps * eps * p);
    }
    println!("  regularized (kappa_m = 1) {:.10}", regularized_sadowsky_energy(&c, 1.0, &quad)?.value());

    // a straight segment has no Frenet frame
    let seg = shapes::segment(nalgebra::Vector3::zeros(), nalgebra::Vector3::x())?;
    match sadowsky_energy(&seg, &quad) {
        Err(e) => println!("\nsegment: {e}"),
        Ok(v) => println!("\nsegment: unexpectedly {v:?}"),
    }
    Ok(())
}
