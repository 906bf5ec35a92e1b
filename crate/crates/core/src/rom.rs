//! POD-DG reduced model: offline operators and the online CNAB stepper with
//! the optional convective (`CX`) and diffusive (`BX`) closure terms.

use rayon::prelude::*;

use crate::discretization::{dot, FeField, RefElement};
use crate::error::{Error, Result};
use crate::fom::{convection_with, mass_inner, Flux};
use crate::linalg::{DenseLU, Mat};
use crate::pod::PodBasis;

/// Largest supported reduced dimension.
pub const MAX_RANK: usize = 100;

/// Symmetric interior penalty form `B^dg(u, ·)` tested against every basis
/// function, penalty `4k²/h`, periodic facets included.
pub fn dg_viscous_apply(u: &FeField) -> Vec<f64> {
    let re = RefElement::new(u.degree());
    viscous_apply_with(&re, u)
}

fn viscous_apply_with(re: &RefElement, u: &FeField) -> Vec<f64> {
    let mesh = u.mesh();
    let m = u.n_modes();
    let h = mesh.h();
    let k = re.degree as f64;
    let tau = 4.0 * k * k / h;
    let d = 2.0 / h;
    // element stiffness (2/h) ∫ P_i' P_j' dξ
    let stiff = Mat::from_fn(m, m, |i, j| {
        d * re
            .quad
            .weights
            .iter()
            .zip(&re.dvals)
            .map(|(w, dv)| w * dv[i] * dv[j])
            .sum::<f64>()
    });
    let mut out = vec![0.0; u.n_dofs()];
    for (ue, oe) in u.coeffs().chunks_exact(m).zip(out.chunks_exact_mut(m)) {
        for (i, o) in oe.iter_mut().enumerate() {
            *o = dot(stiff.row(i), ue);
        }
    }
    for f in 0..mesh.n_facets() {
        let l = mesh.left_element(f);
        let r = mesh.right_element(f);
        let (ul, ur) = (u.element(l), u.element(r));
        let jump = dot(ul, &re.right) - dot(ur, &re.left);
        let avg_du = 0.5 * d * (dot(ul, &re.dright) + dot(ur, &re.dleft));
        for i in 0..m {
            // ⟦v⟧ = v_L(1) - v_R(-1)
            out[l * m + i] += (tau * jump - avg_du) * re.right[i] - 0.5 * d * re.dright[i] * jump;
            out[r * m + i] -= (tau * jump - avg_du) * re.left[i] + 0.5 * d * re.dleft[i] * jump;
        }
    }
    out
}

/// `B^dg(u, v)`
pub fn dg_viscous(u: &FeField, v: &FeField) -> Result<f64> {
    u.check_compatible(v)?;
    Ok(dot(&dg_viscous_apply(u), v.coeffs()))
}

/// Central-flux convection `C̃(w, u, ·)` against every basis function.
pub fn central_convection_apply(w: &FeField, u: &FeField) -> Result<Vec<f64>> {
    w.check_compatible(u)?;
    let re = RefElement::new(w.degree());
    Ok(convection_with(&re, w, u, Flux::Central))
}

/// `C̃(w, u, v) = -½ Σ_K [∫ w u v' - Σ_∂K {w}{u} n v]`
pub fn central_convection(w: &FeField, u: &FeField, v: &FeField) -> Result<f64> {
    w.check_compatible(v)?;
    Ok(dot(&central_convection_apply(w, u)?, v.coeffs()))
}

/// Jump `u_L(1) - u_R(-1)` at every facet.
pub fn facet_jumps(u: &FeField) -> Vec<f64> {
    let mesh = u.mesh();
    (0..mesh.n_facets())
        .map(|f| u.trace_right(mesh.left_element(f)) - u.trace_left(mesh.right_element(f)))
        .collect()
}

/// Offline reduced operators. Matrices are indexed `[trial][test]` where the
/// distinction matters; `c` holds `C̃(φ_i, φ_j, φ_k)` at `(i*r + j)*r + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RomOperators {
    pub r: usize,
    pub nu: f64,
    pub c0: Vec<f64>,
    pub b0: Vec<f64>,
    pub c1: Mat,
    pub b: Mat,
    pub c: Vec<f64>,
    pub cx: Mat,
    pub bx: Mat,
    /// `M_h(φ_i, φ_j)`; the identity for a POD basis.
    pub gram: Mat,
}

impl RomOperators {
    /// All-zero operators with identity Gram matrix.
    pub fn zeros(r: usize, nu: f64) -> Self {
        Self {
            r,
            nu,
            c0: vec![0.0; r],
            b0: vec![0.0; r],
            c1: Mat::zeros(r, r),
            b: Mat::zeros(r, r),
            c: vec![0.0; r * r * r],
            cx: Mat::zeros(r, r),
            bx: Mat::zeros(r, r),
            gram: Mat::identity(r),
        }
    }

    pub fn c_entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.r + j) * self.r + k]
    }

    /// `BX_ik = (k/r)² B_ik` with 1-based `k`.
    pub fn diffusive_closure(b: &Mat) -> Mat {
        let r = b.cols();
        Mat::from_fn(b.rows(), r, |i, k| {
            let s = (k + 1) as f64 / r as f64;
            s * s * b[(i, k)]
        })
    }

    /// `B̃ = νB + c1 CX + c2 BX`
    pub fn effective_viscous(&self, c1: f64, c2: f64) -> Mat {
        let mut bt = self.b.scaled(self.nu);
        bt.add_scaled(c1, &self.cx);
        bt.add_scaled(c2, &self.bx);
        bt
    }

    /// Explicit part `C0 + C1 ã + ãCã + νB0`, tested against each mode.
    pub fn explicit_terms(&self, at: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut out: Vec<f64> = self
            .c0
            .iter()
            .zip(&self.b0)
            .map(|(c, b)| c + self.nu * b)
            .collect();
        for (o, l) in out.iter_mut().zip(self.c1.matvec_t(at)) {
            *o += l;
        }
        for i in 0..r {
            for j in 0..r {
                let s = at[i] * at[j];
                let blk = &self.c[(i * r + j) * r..(i * r + j + 1) * r];
                for (o, c) in out.iter_mut().zip(blk) {
                    *o += s * c;
                }
            }
        }
        out
    }
}

/// Assemble every offline object from a basis.
pub fn build_offline(basis: &PodBasis, nu: f64) -> Result<RomOperators> {
    let r = basis.rank();
    if r > MAX_RANK {
        return Err(Error::config("rank", format!("at most {MAX_RANK} modes are supported, got {r}")));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::config("nu", format!("must be finite and >= 0, got {nu}")));
    }
    let phi = basis.modes();
    let ubar = basis.mean();
    let re = RefElement::new(ubar.degree());
    let conv = |w: &FeField, u: &FeField| convection_with(&re, w, u, Flux::Central);

    let conv_mean = conv(ubar, ubar);
    let visc_mean = viscous_apply_with(&re, ubar);
    let c0: Vec<f64> = phi.iter().map(|p| dot(&conv_mean, p.coeffs())).collect();
    let b0: Vec<f64> = phi.iter().map(|p| dot(&visc_mean, p.coeffs())).collect();

    let visc: Vec<Vec<f64>> = phi.par_iter().map(|p| viscous_apply_with(&re, p)).collect();
    let b = Mat::from_fn(r, r, |i, j| dot(&visc[i], phi[j].coeffs()));

    let lin: Vec<Vec<f64>> = phi
        .par_iter()
        .map(|p| {
            let mut v = conv(ubar, p);
            for (a, c) in v.iter_mut().zip(conv(p, ubar)) {
                *a += c;
            }
            v
        })
        .collect();
    let c1 = Mat::from_fn(r, r, |i, j| dot(&lin[i], phi[j].coeffs()));

    let c: Vec<f64> = (0..r * r)
        .into_par_iter()
        .flat_map_iter(|ij| {
            let v = conv(&phi[ij / r], &phi[ij % r]);
            phi.iter().map(move |p| dot(&v, p.coeffs())).collect::<Vec<_>>()
        })
        .collect();

    let jumps: Vec<Vec<f64>> = phi.iter().map(facet_jumps).collect();
    let cx = Mat::from_fn(r, r, |i, k| dot(&jumps[i], &jumps[k]));
    let bx = RomOperators::diffusive_closure(&b);
    let gram = Mat::from_fn(r, r, |i, j| mass_inner(&phi[i], &phi[j]).expect("basis shares one mesh"));
    Ok(RomOperators {
        r,
        nu,
        c0,
        b0,
        c1,
        b,
        c,
        cx,
        bx,
        gram,
    })
}

/// `a_j(0) = M_h(u0 - ū, φ_j)`
pub fn project_initial(u0: &FeField, basis: &PodBasis) -> Result<Vec<f64>> {
    let fluct = u0.lin_comb(1.0, basis.mean(), -1.0)?;
    basis.modes().iter().map(|p| mass_inner(&fluct, p)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureModel {
    /// Plain POD-DG.
    Plain,
    /// Convective closure only.
    C,
    /// Convective and diffusive closure.
    Cd,
}

impl std::str::FromStr for ClosureModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(ClosureModel::Plain),
            "c" => Ok(ClosureModel::C),
            "cd" => Ok(ClosureModel::Cd),
            other => Err(Error::config("model", format!("expected plain, c or cd, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for ClosureModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClosureModel::Plain => "plain",
            ClosureModel::C => "c",
            ClosureModel::Cd => "cd",
        })
    }
}

/// Closure model together with its constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Closure {
    pub model: ClosureModel,
    pub c1: f64,
    pub c2: f64,
}

impl Closure {
    pub fn plain() -> Self {
        Self {
            model: ClosureModel::Plain,
            c1: 0.0,
            c2: 0.0,
        }
    }

    pub fn convective(c1: f64) -> Result<Self> {
        Self::new(ClosureModel::C, c1, 0.0)
    }

    pub fn convective_diffusive(c1: f64, c2: f64) -> Result<Self> {
        Self::new(ClosureModel::Cd, c1, c2)
    }

    /// Validated constructor; constants not used by `model` are dropped.
    pub fn new(model: ClosureModel, c1: f64, c2: f64) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::config(name, format!("model {model} needs a positive value, got {v}")))
            }
        };
        Ok(match model {
            ClosureModel::Plain => Self::plain(),
            ClosureModel::C => Self {
                model,
                c1: positive("c1", c1)?,
                c2: 0.0,
            },
            ClosureModel::Cd => Self {
                model,
                c1: positive("c1", c1)?,
                c2: positive("c2", c2)?,
            },
        })
    }
}

/// Online state: `aⁿ`, `aⁿ⁻¹` and the clock.
#[derive(Clone, Debug, PartialEq)]
pub struct RomState {
    pub a: Vec<f64>,
    pub a_prev: Option<Vec<f64>>,
    pub step: usize,
    pub t: f64,
}

impl RomState {
    pub fn initial(a0: Vec<f64>) -> Self {
        Self {
            a: a0,
            a_prev: None,
            step: 0,
            t: 0.0,
        }
    }
}

/// CNAB stepper with the left-hand matrix factored once.
///
/// `(I/Δt + ½B̃) aⁿ = (I/Δt - ½B̃) aⁿ⁻¹ - (C0 + C1 ã + ãCã + νB0)`,
/// `ã = 3/2 aⁿ⁻¹ - 1/2 aⁿ⁻²` and `ã = a⁰` on the first step.
#[derive(Clone, Debug)]
pub struct RomStepper<'a> {
    ops: &'a RomOperators,
    dt: f64,
    lhs: DenseLU,
    rhs: Mat,
}

impl<'a> RomStepper<'a> {
    pub fn new(ops: &'a RomOperators, dt: f64, closure: Closure) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {dt}")));
        }
        let bt = ops.effective_viscous(closure.c1, closure.c2);
        let mut lhs = Mat::identity(ops.r).scaled(1.0 / dt);
        let mut rhs = lhs.clone();
        lhs.add_scaled(0.5, &bt);
        rhs.add_scaled(-0.5, &bt);
        Ok(Self {
            ops,
            dt,
            lhs: DenseLU::factor(&lhs)?,
            rhs,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &RomState) -> RomState {
        let at: Vec<f64> = match &state.a_prev {
            None => state.a.clone(),
            Some(p) => state.a.iter().zip(p).map(|(a, b)| 1.5 * a - 0.5 * b).collect(),
        };
        let mut b = self.rhs.matvec(&state.a);
        for (x, e) in b.iter_mut().zip(self.ops.explicit_terms(&at)) {
            *x -= e;
        }
        let step = state.step + 1;
        RomState {
            a: self.lhs.solve(&b),
            a_prev: Some(state.a.clone()),
            step,
            t: step as f64 * self.dt,
        }
    }
}

/// One step without a cached factorisation.
pub fn rom_step(state: &RomState, ops: &RomOperators, dt: f64, closure: Closure) -> Result<RomState> {
    Ok(RomStepper::new(ops, dt, closure)?.step(state))
}

/// Coefficients `aⁿ` for every step `n = 0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct RomTrajectory {
    pub dt: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl RomTrajectory {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn last(&self) -> &[f64] {
        self.coeffs.last().expect("trajectory holds a⁰")
    }

    /// `ū + Σ a_j φ_j` at every `stride`-th step, including step 0.
    pub fn reconstruct(&self, basis: &PodBasis, stride: usize) -> (Vec<f64>, Vec<FeField>) {
        let stride = stride.max(1);
        (0..self.len())
            .step_by(stride)
            .map(|n| (self.time(n), basis.reconstruct(&self.coeffs[n])))
            .unzip()
    }
}

/// March `a0` to `t_end`.
pub fn run_rom(ops: &RomOperators, a0: &[f64], dt: f64, t_end: f64, closure: Closure) -> Result<RomTrajectory> {
    if a0.len() != ops.r {
        return Err(Error::Dimension(format!("{} initial coefficients for rank {}", a0.len(), ops.r)));
    }
    let steps = crate::fom::steps_for(t_end, dt)?;
    let stepper = RomStepper::new(ops, dt, closure)?;
    let mut state = RomState::initial(a0.to_vec());
    let mut coeffs = Vec::with_capacity(steps + 1);
    coeffs.push(state.a.clone());
    for _ in 0..steps {
        state = stepper.step(&state);
        coeffs.push(state.a.clone());
    }
    Ok(RomTrajectory { dt, coeffs })
}
