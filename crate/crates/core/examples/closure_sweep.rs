//! Final-time error of the convective closure over a range of `c1`.

use pod_dg::config::RunConfig;
use pod_dg::fom::run_fom;
use pod_dg::metrics::l2_error;
use pod_dg::pod::build_basis;
use pod_dg::rom::{build_offline, project_initial, run_rom, Closure};

fn main() -> pod_dg::Result<()> {
    let cfg = RunConfig::step_case(400);
    let out = run_fom(&cfg.fom_config()?)?;
    let basis = build_basis(&out.snapshots, 20)?;
    let ops = build_offline(&basis, cfg.nu)?;
    let a0 = project_initial(&out.snapshots.fields()[0], &basis)?;
    let reference = out.snapshots.fields().last().unwrap();

    let err = |closure: Closure| -> pod_dg::Result<f64> {
        let traj = run_rom(&ops, &a0, cfg.dt, cfg.t_end, closure)?;
        l2_error(&basis.reconstruct(traj.last()), reference)
    };

    println!("{:>10}  {:>10}", "c1", "final l2");
    println!("{:>10}  {:10.4e}", "plain", err(Closure::plain())?);
    for c1 in [1e1, 1e2, 3e2, 1e3, 3e3, 1e4, 1e5] {
        println!("{c1:10.1e}  {:10.4e}", err(Closure::convective(c1)?)?);
    }
    Ok(())
}
