//! Pure diffusion of a sine wave: L2 error against the exact decay and the
//! observed order under mesh refinement.

use std::f64::consts::PI;

use pod_dg::discretization::project_function;
use pod_dg::fom::{run_fom, FomConfig, InitialCondition};
use pod_dg::metrics::l2_error_fn;
use pod_dg::Mesh1D;

fn main() -> pod_dg::Result<()> {
    let t_end = 0.01;
    let decay = (-4.0 * PI * PI * t_end).exp();
    for k in 1..=3 {
        println!("degree {k}");
        let mut prev: Option<f64> = None;
        for n in [8, 16, 32, 64] {
            let mesh = Mesh1D::unit(n)?;
            let cfg = FomConfig {
                mesh,
                degree: k,
                nu: 1.0,
                dt: 2e-6,
                t_end,
                ic: InitialCondition::Field(project_function(mesh, k, |x| (2.0 * PI * x).sin())),
                snapshot_stride: 5000,
                convection: false,
            };
            let u = run_fom(&cfg)?.final_state.u;
            let e = l2_error_fn(&u, |x| decay * (2.0 * PI * x).sin(), 2 * k + 8);
            match prev {
                Some(p) => println!("  n = {n:3}  error {e:.3e}  order {:.2}", (p / e).log2()),
                None => println!("  n = {n:3}  error {e:.3e}"),
            }
            prev = Some(e);
        }
    }
    Ok(())
}
