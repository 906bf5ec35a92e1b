//! Full pipeline on step data: full-order run, POD basis, and the three
//! reduced models compared against the stored snapshots.
//!
//! ```text
//! cargo run --release --example step_pipeline -- [n_elems] [rank]
//! ```

use pod_dg::config::RunConfig;
use pod_dg::fom::run_fom;
use pod_dg::metrics::error_series;
use pod_dg::pod::build_basis;
use pod_dg::rom::{build_offline, project_initial, run_rom, Closure};

fn main() -> pod_dg::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(400, |s| s.parse().expect("n_elems"));
    let r: usize = args.next().map_or(20, |s| s.parse().expect("rank"));

    let cfg = RunConfig::step_case(n);
    let fom_cfg = cfg.fom_config()?;
    let t = std::time::Instant::now();
    let out = run_fom(&fom_cfg)?;
    println!(
        "fom: {n} elements, {} steps, {} snapshots in {:.2?}",
        cfg.steps()?,
        out.snapshots.len(),
        t.elapsed()
    );

    let basis = build_basis(&out.snapshots, r)?;
    println!("pod: r = {r} keeps {:.2}% of the fluctuation energy", 100.0 * basis.cumulative_energy()[r - 1]);

    let ops = build_offline(&basis, cfg.nu)?;
    let a0 = project_initial(&out.snapshots.fields()[0], &basis)?;
    let stride = cfg.stride()?;

    for (name, closure) in [
        ("plain", Closure::plain()),
        ("C  c1=1e3", Closure::convective(1e3)?),
        ("CD c1=1e3 c2=1e-2", Closure::convective_diffusive(1e3, 1e-2)?),
    ] {
        let traj = run_rom(&ops, &a0, cfg.dt, cfg.t_end, closure)?;
        let (times, fields) = traj.reconstruct(&basis, stride);
        let s = error_series(out.snapshots.fields(), &fields, out.snapshots.times(), &times)?;
        let mid = s.len() / 2;
        println!(
            "{name:>18}: l2 t=0 {:.3e}  t={:.2} {:.3e}  t={:.2} {:.3e}",
            s.l2[0],
            s.times[mid],
            s.l2[mid],
            s.times[s.len() - 1],
            s.l2[s.len() - 1]
        );
    }
    Ok(())
}
