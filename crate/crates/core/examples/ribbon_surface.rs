//! The rectifying developable of a centerline: mesh, principal curvature
//! and the width-integrated energy against its one-dimensional reduction.
//!
//!     cargo run --release --example ribbon_surface [out_dir]

use std::path::PathBuf;

use ribbonlim::energy::wunderlich_energy;
use ribbonlim::shapes::{self, TorsionModulated};
use ribbonlim::surface::{build_mesh, principal_curvature, surface_energy};
use ribbonlim::{io, QuadratureScheme};

fn main() -> ribbonlim::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let c = shapes::torsion_modulated(
        &TorsionModulated {
            modulation: 0.012,
            ..Default::default()
        },
        48,
    )?;
    let quads = (QuadratureScheme::default(), QuadratureScheme::new(2, 16)?);

    for eps in [0.05, 0.1, 0.2] {
        let two_d = surface_energy(&c, eps, &quads)?.value();
        let one_d = wunderlich_energy(&c, eps, &quads.0)?.value();
        println!("eps {eps:<4}  2D {two_d:.12}  1D {one_d:.12}  rel {:.2e}", (two_d - one_d).abs() / one_d);
    }

    let s = c.frenet_sample(0.25)?;
    for v in [-0.05, 0.0, 0.05] {
        println!("kappa1(t=0.25, v={v:+}) = {:.9}", principal_curvature(&s, v)?);
    }

    let mesh = build_mesh(&c, 0.1, 160, 9)?;
    println!(
        "mesh: {} vertices, {} faces, max angle defect {:.2e}",
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.max_angle_defect()
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|e| ribbonlim::RibbonError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        io::write_atomic(&dir.join("ribbon.obj"), io::mesh_obj(&mesh).as_bytes())?;
        io::write_atomic(&dir.join("kappa1.csv"), io::kappa1_csv(&mesh).as_bytes())?;
        println!("wrote {}/ribbon.obj and kappa1.csv", dir.display());
    }
    Ok(())
}
