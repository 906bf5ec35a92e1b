//! Steepening Gaussian pulse: energy decay of the full model and how many
//! modes it takes to hold a given share of the snapshot energy.

use pod_dg::fom::{run_fom, FomConfig, InitialCondition};
use pod_dg::pod::build_basis;
use pod_dg::Mesh1D;

fn main() -> pod_dg::Result<()> {
    let mesh = Mesh1D::unit(300)?;
    let cfg = FomConfig {
        mesh,
        degree: 2,
        nu: 1e-3,
        dt: 0.1 * mesh.h(),
        t_end: 0.6,
        ic: InitialCondition::Gaussian {
            amplitude: 1.0,
            center: 0.3,
            sharpness: 200.0,
        },
        snapshot_stride: 10,
        convection: true,
    };
    let out = run_fom(&cfg)?;
    for rec in out.energy.iter().step_by((out.energy.len() / 6).max(1)) {
        println!("step {:5}  t = {:.3}  energy {:.6e}", rec.step, rec.t, rec.energy);
    }

    let basis = build_basis(&out.snapshots, 1)?;
    let cum = basis.cumulative_energy();
    for target in [0.9, 0.99, 0.999] {
        let r = cum.iter().position(|&c| c >= target).map_or(cum.len(), |i| i + 1);
        println!("{:5.1}% of the energy needs {r} modes", 100.0 * target);
    }
    Ok(())
}
