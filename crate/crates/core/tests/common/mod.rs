#![allow(dead_code)]

use std::io::Write;

use pod_dg::fom::{run_fom, FomConfig, FomOutput, InitialCondition};
use pod_dg::linalg::{lu_solve, Mat};
use pod_dg::pod::PodBasis;
use pod_dg::rom::{central_convection_apply, dg_viscous_apply};
use pod_dg::{FeField, Mesh1D};

/// Print a result line outside the test harness capture.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {id} ({name}): {} {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

/// 64 elements, k = 2, ν = 1e-2, Δt = 1e-3, 200 steps, every 4th step stored.
pub fn coarse_run() -> FomOutput {
    let cfg = FomConfig {
        mesh: Mesh1D::unit(64).unwrap(),
        degree: 2,
        nu: 1e-2,
        dt: 1e-3,
        t_end: 0.2,
        ic: InitialCondition::step(),
        snapshot_stride: 4,
        convection: true,
    };
    run_fom(&cfg).unwrap()
}

/// `∫ u v` from the modal coefficients, mass `h / (2i + 1)` per mode.
pub fn mass(u: &FeField, v: &FeField) -> f64 {
    let h = u.mesh().h();
    let m = u.n_modes();
    let mut s = 0.0;
    for e in 0..u.mesh().n_elems() {
        for i in 0..m {
            s += u.element(e)[i] * v.element(e)[i] * h / (2 * i + 1) as f64;
        }
    }
    s
}

fn combine(basis: &PodBasis, x: &[f64]) -> FeField {
    let mut f = FeField::zeros(*basis.mean().mesh(), basis.mean().degree());
    for (c, p) in x.iter().zip(basis.modes()) {
        for (a, b) in f.coeffs_mut().iter_mut().zip(p.coeffs()) {
            *a += c * b;
        }
    }
    f
}

fn plus(a: &FeField, b: &FeField, s: f64) -> FeField {
    a.lin_comb(1.0, b, s).unwrap()
}

fn tested(vec: &[f64], basis: &PodBasis) -> Vec<f64> {
    basis
        .modes()
        .iter()
        .map(|p| vec.iter().zip(p.coeffs()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Galerkin CNAB on the span of the modes, with every operator applied to
/// full finite element fields and tested against each mode:
///
/// `M(ǔⁿ - ǔⁿ⁻¹, φ)/Δt + C̃(ũ, ũ, φ) + ν B(ū + (ǔⁿ + ǔⁿ⁻¹)/2, φ) = 0`.
pub fn fe_space_trajectory(basis: &PodBasis, nu: f64, dt: f64, steps: usize, a0: &[f64]) -> Vec<Vec<f64>> {
    let r = basis.rank();
    let phi = basis.modes();
    let ubar = basis.mean();
    let gram = Mat::from_fn(r, r, |i, j| mass(&phi[i], &phi[j]));
    let stiff: Vec<Vec<f64>> = phi.iter().map(|p| tested(&dg_viscous_apply(p), basis)).collect();
    let mut lhs = gram.scaled(1.0 / dt);
    for j in 0..r {
        for i in 0..r {
            // row = test function i, column = trial mode j
            lhs[(i, j)] += 0.5 * nu * stiff[j][i];
        }
    }
    let mut traj = vec![a0.to_vec()];
    let mut cur = combine(basis, a0);
    let mut prev: Option<FeField> = None;
    for _ in 0..steps {
        let fluct = match &prev {
            None => cur.clone(),
            Some(p) => cur.lin_comb(1.5, p, -0.5).unwrap(),
        };
        let full = plus(ubar, &fluct, 1.0);
        let conv = tested(&central_convection_apply(&full, &full).unwrap(), basis);
        let half = plus(ubar, &cur, 0.5);
        let visc = tested(&dg_viscous_apply(&half), basis);
        let rhs: Vec<f64> = (0..r)
            .map(|j| mass(&cur, &phi[j]) / dt - conv[j] - nu * visc[j])
            .collect();
        let x = lu_solve(&lhs, &rhs).unwrap();
        prev = Some(cur);
        cur = combine(basis, &x);
        traj.push(x);
    }
    traj
}
