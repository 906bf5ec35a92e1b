//! POD spectrum of a step run, written as CSV, with the truncation
//! identity checked on a few ranks.

use pod_dg::config::RunConfig;
use pod_dg::fom::run_fom;
use pod_dg::io::write_spectrum_csv;
use pod_dg::pod::{build_basis, energy_fraction, numerical_rank, projection_residual};

fn main() -> pod_dg::Result<()> {
    let mut cfg = RunConfig::step_case(200);
    cfg.snapshot_count = 201;
    let out = run_fom(&cfg.fom_config()?)?;
    let snaps = &out.snapshots;

    let basis = build_basis(snaps, 30)?;
    let lam = basis.eigenvalues();
    println!("numerical rank {}", numerical_rank(lam));
    for r in [1, 5, 10, 20, 30] {
        let tail: f64 = lam[r..].iter().sum();
        let resid = projection_residual(snaps, &basis, r)?;
        println!(
            "r = {r:2}: energy {:.4}%  tail {tail:.4e}  residual {resid:.4e}",
            100.0 * energy_fraction(lam, r)?
        );
    }

    let path = std::env::temp_dir().join("pod_spectrum.csv");
    write_spectrum_csv(&path, lam)?;
    println!("spectrum written to {}", path.display());
    Ok(())
}
