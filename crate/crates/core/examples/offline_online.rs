//! Offline tensor cost against online step cost as the rank grows.

use std::time::Instant;

use pod_dg::config::RunConfig;
use pod_dg::fom::run_fom;
use pod_dg::pod::build_basis;
use pod_dg::rom::{build_offline, project_initial, run_rom, Closure};

fn main() -> pod_dg::Result<()> {
    let cfg = RunConfig::step_case(1000);
    let t = Instant::now();
    let out = run_fom(&cfg.fom_config()?)?;
    let fom_time = t.elapsed();
    println!("fom {} steps: {fom_time:.2?}", cfg.steps()?);

    for r in [5, 10, 20, 40] {
        let basis = build_basis(&out.snapshots, r)?;
        let t = Instant::now();
        let ops = build_offline(&basis, cfg.nu)?;
        let offline = t.elapsed();
        let a0 = project_initial(&out.snapshots.fields()[0], &basis)?;
        let t = Instant::now();
        run_rom(&ops, &a0, cfg.dt, cfg.t_end, Closure::convective(1e3)?)?;
        let online = t.elapsed();
        println!(
            "r = {r:2}: offline {offline:.2?}, online {online:.2?} ({:.0}x faster than the fom)",
            fom_time.as_secs_f64() / online.as_secs_f64()
        );
    }
    Ok(())
}
