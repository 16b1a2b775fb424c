//! Curve JSON round trip and the command line driven from code.
//!
//!     cargo run --release --example curve_files

use ribbonlim::{cli, io, shapes};

fn main() -> ribbonlim::Result<()> {
    let dir = std::env::temp_dir().join(format!("ribbonlim-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| ribbonlim::RibbonError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;

    let c = shapes::torsion_modulated(&Default::default(), 24)?;
    let path = dir.join("tm.json");
    io::write_curve(&path, &c)?;
    let back = io::read_curve(&path)?;
    println!("round trip exact: {}", back.coefficients() == c.coefficients());

    let out = dir.join("sweep");
    let code = cli::main_with_args([
        "ribbonlim",
        "gamma-sweep",
        "--curve",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    println!("gamma-sweep exit {code}");
    print!("{}", io::read_to_string(&out.join("sweep.csv"))?);

    let seg = dir.join("seg");
    cli::main_with_args(["ribbonlim", "make-curve", "--shape", "segment", "--out", seg.to_str().unwrap()]);
    let code = cli::main_with_args([
        "ribbonlim",
        "eval",
        "--curve",
        seg.join("curve.json").to_str().unwrap(),
        "--out",
        seg.to_str().unwrap(),
    ]);
    println!("eval on a segment exits {code}: {}", io::read_to_string(&seg.join("error.json"))?);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
