//! Full-order IMEX HDG/DG solver for the periodic viscous Burgers equation.
//!
//! Unknowns are the modal field `u` on every element and one trace value `û`
//! per vertex. Convection uses the upwind DG form and is treated explicitly
//! by second-order Adams-Bashforth extrapolation; mass and HDG diffusion are
//! treated by Crank-Nicolson. The implicit matrix does not change in time,
//! so its static condensation onto the vertices is factored once.

use crate::discretization::{FeField, Mesh1D, RefElement, SkeletonField};
use crate::error::{Error, Result};
use crate::linalg::{CyclicBandSystem, DenseLU, Mat};
use crate::pod::SnapshotSet;

/// Initial data for a run.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `left` for `x < location`, `right` otherwise.
    Step { location: f64, left: f64, right: f64 },
    /// `amplitude * exp(-sharpness * (x - center)^2)`
    Gaussian {
        amplitude: f64,
        center: f64,
        sharpness: f64,
    },
    /// A field already in the discrete space.
    Field(FeField),
}

impl InitialCondition {
    /// Unit step down at `x = 0.5`.
    pub fn step() -> Self {
        InitialCondition::Step {
            location: 0.5,
            left: 1.0,
            right: 0.0,
        }
    }

    /// `exp(-200 (x - 0.3)^2)`
    pub fn gaussian() -> Self {
        InitialCondition::Gaussian {
            amplitude: 1.0,
            center: 0.3,
            sharpness: 200.0,
        }
    }

    /// Elementwise L2 projection onto the degree-`k` broken space.
    pub fn project(&self, mesh: Mesh1D, degree: usize) -> Result<FeField> {
        match self {
            InitialCondition::Step {
                location,
                left,
                right,
            } => Ok(project_step(mesh, degree, *location, *left, *right)),
            InitialCondition::Gaussian {
                amplitude,
                center,
                sharpness,
            } => {
                let len = mesh.length();
                Ok(crate::discretization::project_function(mesh, degree, |x| {
                    // periodic image closest to the centre
                    let mut d = x - center;
                    d -= len * (d / len).round();
                    amplitude * (-sharpness * d * d).exp()
                }))
            }
            InitialCondition::Field(f) => {
                if f.mesh() != &mesh || f.degree() != degree {
                    return Err(Error::MeshMismatch(
                        "initial field does not live on the configured mesh".into(),
                    ));
                }
                Ok(f.clone())
            }
        }
    }
}

fn project_step(mesh: Mesh1D, degree: usize, location: f64, left: f64, right: f64) -> FeField {
    let mut out = FeField::zeros(mesh, degree);
    for e in 0..mesh.n_elems() {
        let xs = mesh.to_reference(e, location);
        let c = out.element_mut(e);
        if xs >= 1.0 - 1e-12 {
            c[0] = left;
        } else if xs <= -1.0 + 1e-12 {
            c[0] = right;
        } else {
            // ∫_{-1}^{xs} P_i = (P_{i+1}(xs) - P_{i-1}(xs)) / (2i + 1), i >= 1
            let (p, _) = crate::discretization::legendre_all(degree + 1, xs);
            for (i, ci) in c.iter_mut().enumerate() {
                let below = if i == 0 {
                    xs + 1.0
                } else {
                    (p[i + 1] - p[i - 1]) / (2.0 * i as f64 + 1.0)
                };
                let total = if i == 0 { 2.0 } else { 0.0 };
                let integral = left * below + right * (total - below);
                *ci = integral / RefElement::mode_norm(i);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FomConfig {
    pub mesh: Mesh1D,
    pub degree: usize,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub ic: InitialCondition,
    /// Keep every `snapshot_stride`-th state, starting with `n = 0`.
    pub snapshot_stride: usize,
    /// Disable to run pure diffusion.
    pub convection: bool,
}

impl FomConfig {
    /// Number of time steps `M = T / Δt`; rejects non-integral ratios.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_end, self.dt)
    }

    pub fn validate(&self) -> Result<usize> {
        if self.degree < 1 {
            return Err(Error::config("degree", "the HDG penalty 4k²/h needs k >= 1"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::config("nu", format!("must be finite and >= 0, got {}", self.nu)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("snapshot_stride", "must be >= 1"));
        }
        self.steps()
    }
}

/// `M = t_end / dt`, which must be a positive integer up to rounding.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", format!("must be positive, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::config("t_end", format!("must be positive, got {t_end}")));
    }
    let ratio = t_end / dt;
    let m = ratio.round();
    if (ratio - m).abs() > 1e-9 * ratio.max(1.0) || m < 1.0 {
        return Err(Error::config(
            "dt",
            format!("t_end / dt = {ratio} is not an integer number of steps"),
        ));
    }
    Ok(m as usize)
}

/// `M_h(u, v)` with the diagonal modal mass `h / (2i + 1)`.
pub fn mass_inner(u: &FeField, v: &FeField) -> Result<f64> {
    u.check_compatible(v)?;
    let wts = mode_weights(u);
    Ok(u
        .coeffs()
        .chunks_exact(wts.len())
        .zip(v.coeffs().chunks_exact(wts.len()))
        .map(|(a, b)| a.iter().zip(b).zip(&wts).map(|((x, y), w)| x * y * w).sum::<f64>())
        .sum())
}

/// Per-mode mass `h / (2i + 1)`.
fn mode_weights(u: &FeField) -> Vec<f64> {
    let h = u.mesh().h();
    (0..u.n_modes()).map(|i| h / (2.0 * i as f64 + 1.0)).collect()
}

/// `M_h(u, ·)` against every basis function.
pub fn mass_apply(u: &FeField) -> Vec<f64> {
    let wts = mode_weights(u);
    let mut out = u.coeffs().to_vec();
    for blk in out.chunks_exact_mut(wts.len()) {
        for (c, w) in blk.iter_mut().zip(&wts) {
            *c *= w;
        }
    }
    out
}

/// Discrete energy `M_h(u, u)`.
pub fn energy(u: &FeField) -> f64 {
    mass_inner(u, u).expect("a field is compatible with itself")
}

/// Upwind DG convection `C_h^dg(w, u, ·)` tested against every basis function.
///
/// Volume part `-½ ∫ w u v'`; facet part `½ {w} u⁻ n v` on both sides, with
/// `u⁻` taken from the left element when `{w} >= 0`.
pub fn upwind_convection(w: &FeField, u: &FeField) -> Result<Vec<f64>> {
    w.check_compatible(u)?;
    let re = RefElement::new(w.degree());
    Ok(convection_with(&re, w, u, Flux::Upwind))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Flux {
    Upwind,
    Central,
}

pub(crate) fn convection_with(re: &RefElement, w: &FeField, u: &FeField, flux: Flux) -> Vec<f64> {
    let mesh = w.mesh();
    let m = w.n_modes();
    let nq = re.quad.len();
    let vals: Vec<f64> = re.vals.concat();
    // -½ w_q P_i'(ξ_q)
    let dvals: Vec<f64> = re
        .dvals
        .iter()
        .zip(&re.quad.weights)
        .flat_map(|(d, wq)| d.iter().map(move |p| -0.5 * wq * p))
        .collect();
    let mut out = vec![0.0; w.n_dofs()];
    let blocks = w.coeffs().chunks_exact(m).zip(u.coeffs().chunks_exact(m));
    for ((we, ue), oe) in blocks.zip(out.chunks_exact_mut(m)) {
        for q in 0..nq {
            let p = &vals[q * m..(q + 1) * m];
            let mut wq = 0.0;
            let mut uq = 0.0;
            for i in 0..m {
                wq += we[i] * p[i];
                uq += ue[i] * p[i];
            }
            let s = wq * uq;
            for (o, dp) in oe.iter_mut().zip(&dvals[q * m..(q + 1) * m]) {
                *o += s * dp;
            }
        }
    }
    // traces: right end sums the modes, left end alternates signs
    let n = mesh.n_elems();
    let mut wr = vec![0.0; n];
    let mut wl = vec![0.0; n];
    let mut ur = vec![0.0; n];
    let mut ul = vec![0.0; n];
    for e in 0..n {
        let (we, ue) = (w.element(e), u.element(e));
        for i in 0..m {
            wr[e] += we[i];
            ur[e] += ue[i];
            wl[e] += we[i] * re.left[i];
            ul[e] += ue[i] * re.left[i];
        }
    }
    for f in 0..mesh.n_facets() {
        let l = mesh.left_element(f);
        let r = mesh.right_element(f);
        let wavg = 0.5 * (wr[l] + wl[r]);
        let uf = match flux {
            Flux::Upwind => {
                if wavg >= 0.0 {
                    ur[l]
                } else {
                    ul[r]
                }
            }
            Flux::Central => 0.5 * (ur[l] + ul[r]),
        };
        let g = 0.5 * wavg * uf;
        for i in 0..m {
            out[l * m + i] += g * re.right[i];
            out[r * m + i] -= g * re.left[i];
        }
    }
    out
}

/// Element-local HDG diffusion matrix on `[u_0..u_k, û_left, û_right]`.
///
/// `∫u'v' - Σ u'n (v - v̂) - Σ v'n (u - û) + (4k²/h) Σ (u - û)(v - v̂)`.
pub fn hdg_local_matrix(re: &RefElement, h: f64) -> Mat {
    let m = re.n_modes();
    let n = m + 2;
    let k = re.degree as f64;
    let tau = 4.0 * k * k / h;
    let mut b = Mat::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let s: f64 = (0..re.quad.len())
                .map(|q| re.quad.weights[q] * re.dvals[q][i] * re.dvals[q][j])
                .sum();
            b[(i, j)] = 2.0 / h * s;
        }
    }
    // sides: (normal, trace values, reference derivative values, hat index)
    let sides = [(-1.0, &re.left, &re.dleft, m), (1.0, &re.right, &re.dright, m + 1)];
    for (normal, tr, dtr, hat) in sides {
        // jump functional t: (u - û), flux functional g: n u'
        let mut t = vec![0.0; n];
        let mut g = vec![0.0; n];
        t[..m].copy_from_slice(tr);
        t[hat] = -1.0;
        for i in 0..m {
            g[i] = normal * 2.0 / h * dtr[i];
        }
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] += -t[i] * g[j] - g[i] * t[j] + tau * t[i] * t[j];
            }
        }
    }
    b
}

/// `M_h/Δt + (ν/2) B_h^hdg`, statically condensed onto the vertex traces.
#[derive(Clone, Debug)]
pub struct CondensedOperator {
    mesh: Mesh1D,
    degree: usize,
    nu: f64,
    dt: f64,
    re: RefElement,
    /// Local HDG matrix (identical on every element of a uniform mesh).
    b_local: Mat,
    /// Local implicit matrix.
    a_local: Mat,
    /// `A_uu⁻¹`
    auu_inv: Mat,
    /// `A_uu⁻¹ A_uλ`, `(k+1) × 2`
    auu_inv_aul: Mat,
    /// `A_λu A_uu⁻¹`, `2 × (k+1)`
    alu_auu_inv: Mat,
    /// `None` when `ν = 0`: the traces decouple.
    schur: Option<CyclicBandSystem>,
    /// Element Schur complement `A_λλ - A_λu A_uu⁻¹ A_uλ`.
    schur_local: Mat,
}

/// Assemble and factor the implicit CNAB operator.
pub fn hdg_diffusion_assemble(mesh: Mesh1D, degree: usize, nu: f64, dt: f64) -> Result<CondensedOperator> {
    if degree < 1 {
        return Err(Error::config("degree", "the HDG penalty 4k²/h needs k >= 1"));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::config("nu", format!("must be finite and >= 0, got {nu}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", format!("must be positive, got {dt}")));
    }
    let re = RefElement::new(degree);
    let m = re.n_modes();
    let h = mesh.h();
    let b_local = hdg_local_matrix(&re, h);
    let mut a_local = b_local.scaled(0.5 * nu);
    for i in 0..m {
        a_local[(i, i)] += h / (2.0 * i as f64 + 1.0) / dt;
    }
    let a_uu = Mat::from_fn(m, m, |i, j| a_local[(i, j)]);
    let aul = Mat::from_fn(m, 2, |i, j| a_local[(i, m + j)]);
    let alu = Mat::from_fn(2, m, |i, j| a_local[(m + i, j)]);
    let all = Mat::from_fn(2, 2, |i, j| a_local[(m + i, m + j)]);
    let auu = DenseLU::factor(&a_uu).map_err(|_| Error::SingularPivot { block: 0 })?;
    let auu_inv = auu.inverse();
    let auu_inv_aul = auu_inv.matmul(&aul);
    let alu_auu_inv = alu.matmul(&auu_inv);
    let mut schur_local = all;
    schur_local.add_scaled(-1.0, &alu.matmul(&auu_inv_aul));

    let schur = if nu > 0.0 {
        let n = mesh.n_facets();
        // local index 0 = left trace, 1 = right trace
        let (ll, lr, rl, rr) = (
            schur_local[(0, 0)],
            schur_local[(0, 1)],
            schur_local[(1, 0)],
            schur_local[(1, 1)],
        );
        let diag = vec![rr + ll; n];
        let sub = vec![rl; n];
        let sup = vec![lr; n];
        Some(CyclicBandSystem::factor_scalar(&diag, &sub, &sup)?)
    } else {
        None
    };
    Ok(CondensedOperator {
        mesh,
        degree,
        nu,
        dt,
        re,
        b_local,
        a_local,
        auu_inv,
        auu_inv_aul,
        alu_auu_inv,
        schur,
        schur_local,
    })
}

impl CondensedOperator {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn reference(&self) -> &RefElement {
        &self.re
    }

    pub fn local_hdg(&self) -> &Mat {
        &self.b_local
    }

    pub fn local_schur(&self) -> &Mat {
        &self.schur_local
    }

    fn check(&self, u: &FeField, uhat: &SkeletonField) -> Result<()> {
        self.mesh.check_same(u.mesh())?;
        self.mesh.check_same(uhat.mesh())?;
        if u.degree() != self.degree {
            return Err(Error::MeshMismatch(format!(
                "field degree {} vs operator degree {}",
                u.degree(),
                self.degree
            )));
        }
        Ok(())
    }

    fn apply_local(&self, mat: &Mat, u: &FeField, uhat: &SkeletonField) -> (Vec<f64>, Vec<f64>) {
        let m = self.re.n_modes();
        let w = m + 2;
        let a = mat.as_slice();
        let hat = uhat.values();
        let mut out_u = vec![0.0; u.n_dofs()];
        let mut out_hat = vec![0.0; self.mesh.n_facets()];
        for (e, (ue, oe)) in u.coeffs().chunks_exact(m).zip(out_u.chunks_exact_mut(m)).enumerate() {
            let fl = e;
            let fr = self.mesh.right_facet(e);
            let row = |r: usize| {
                let ar = &a[r * w..(r + 1) * w];
                ar[..m].iter().zip(ue).map(|(x, y)| x * y).sum::<f64>() + ar[m] * hat[fl] + ar[m + 1] * hat[fr]
            };
            for (i, o) in oe.iter_mut().enumerate() {
                *o = row(i);
            }
            out_hat[fl] += row(m);
            out_hat[fr] += row(m + 1);
        }
        (out_u, out_hat)
    }

    /// `B_h^hdg((u, û), ·)` tested against every `(v, v̂)`.
    pub fn diffusion_apply(&self, u: &FeField, uhat: &SkeletonField) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(u, uhat)?;
        Ok(self.apply_local(&self.b_local, u, uhat))
    }

    /// `(M_h/Δt + (ν/2) B_h^hdg)((u, û), ·)`.
    pub fn implicit_apply(&self, u: &FeField, uhat: &SkeletonField) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(u, uhat)?;
        Ok(self.apply_local(&self.a_local, u, uhat))
    }

    /// Solve the implicit system for `(u, û)` by static condensation.
    pub fn solve(&self, rhs_u: &[f64], rhs_hat: &[f64]) -> Result<(FeField, SkeletonField)> {
        let m = self.re.n_modes();
        let n = self.mesh.n_elems();
        if rhs_u.len() != n * m || rhs_hat.len() != self.mesh.n_facets() {
            return Err(Error::Dimension("right-hand side does not match the mesh".into()));
        }
        let inv = self.auu_inv.as_slice();
        // A_uu⁻¹ f_e, element by element
        let mut u = FeField::zeros(self.mesh, self.degree);
        for (fe, ue) in rhs_u.chunks_exact(m).zip(u.coeffs_mut().chunks_exact_mut(m)) {
            for (i, o) in ue.iter_mut().enumerate() {
                *o = inv[i * m..(i + 1) * m].iter().zip(fe).map(|(a, b)| a * b).sum();
            }
        }
        let uhat = match &self.schur {
            Some(schur) => {
                let c = self.alu_auu_inv.as_slice();
                let mut g = rhs_hat.to_vec();
                for (e, fe) in rhs_u.chunks_exact(m).enumerate() {
                    let fr = self.mesh.right_facet(e);
                    g[e] -= c[..m].iter().zip(fe).map(|(a, b)| a * b).sum::<f64>();
                    g[fr] -= c[m..].iter().zip(fe).map(|(a, b)| a * b).sum::<f64>();
                }
                let hat = schur.solve(&g);
                let d = self.auu_inv_aul.as_slice();
                for (e, ue) in u.coeffs_mut().chunks_exact_mut(m).enumerate() {
                    let (l, r) = (hat[e], hat[self.mesh.right_facet(e)]);
                    for (i, o) in ue.iter_mut().enumerate() {
                        *o -= d[2 * i] * l + d[2 * i + 1] * r;
                    }
                }
                SkeletonField::from_values(self.mesh, hat)?
            }
            None => SkeletonField::trace_average(&u),
        };
        Ok((u, uhat))
    }
}

/// Time-level data carried between CNAB steps.
#[derive(Clone, Debug)]
pub struct FomState {
    /// `u^n`
    pub u: FeField,
    /// `u^{n-1}`; `None` before the first step.
    pub u_prev: Option<FeField>,
    pub uhat: SkeletonField,
    pub step: usize,
    pub t: f64,
}

impl FomState {
    /// Initial state; `û⁰` is the facet average of the traces of `u⁰`.
    pub fn initial(u0: FeField) -> Self {
        let uhat = SkeletonField::trace_average(&u0);
        Self {
            u: u0,
            u_prev: None,
            uhat,
            step: 0,
            t: 0.0,
        }
    }
}

/// One CNAB step.
///
/// `ũ = 3/2 uⁿ⁻¹ - 1/2 uⁿ⁻²` (or `u⁰` on the first step), then
/// `(M/Δt + ν/2 B) (uⁿ, ûⁿ) = M uⁿ⁻¹/Δt - ν/2 B (uⁿ⁻¹, ûⁿ⁻¹) - C(ũ, ũ, ·)`.
pub fn cnab_step(state: &FomState, op: &CondensedOperator, convection: bool) -> Result<FomState> {
    let u = &state.u;
    let (bu, bhat) = op.diffusion_apply(u, &state.uhat)?;
    let mut rhs_u = mass_apply(u);
    let inv_dt = 1.0 / op.dt;
    let half_nu = 0.5 * op.nu;
    for (r, b) in rhs_u.iter_mut().zip(&bu) {
        *r = *r * inv_dt - half_nu * b;
    }
    if convection {
        let conv = match &state.u_prev {
            None => convection_with(&op.re, u, u, Flux::Upwind),
            Some(prev) => {
                let tilde = u.lin_comb(1.5, prev, -0.5)?;
                convection_with(&op.re, &tilde, &tilde, Flux::Upwind)
            }
        };
        for (r, c) in rhs_u.iter_mut().zip(&conv) {
            *r -= c;
        }
    }
    let rhs_hat: Vec<f64> = bhat.iter().map(|b| -half_nu * b).collect();
    let (un, uhat) = op.solve(&rhs_u, &rhs_hat)?;
    let step = state.step + 1;
    Ok(FomState {
        u: un,
        u_prev: Some(state.u.clone()),
        uhat,
        step,
        t: step as f64 * op.dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct FomOutput {
    pub snapshots: SnapshotSet,
    /// Energy at every stored step.
    pub energy: Vec<EnergyRecord>,
    pub final_state: FomState,
}

/// Run the full-order model from the projected initial condition to `t_end`,
/// keeping every `snapshot_stride`-th state including `n = 0`.
pub fn run_fom(cfg: &FomConfig) -> Result<FomOutput> {
    run_fom_with(cfg, |_| {})
}

/// [`run_fom`] with a callback invoked after every step.
pub fn run_fom_with(cfg: &FomConfig, mut on_step: impl FnMut(&FomState)) -> Result<FomOutput> {
    let steps = cfg.validate()?;
    let op = hdg_diffusion_assemble(cfg.mesh, cfg.degree, cfg.nu, cfg.dt)?;
    let u0 = cfg.ic.project(cfg.mesh, cfg.degree)?;
    let mut state = FomState::initial(u0);
    let mut fields = vec![state.u.clone()];
    let mut times = vec![0.0];
    let mut energy_series = vec![EnergyRecord {
        step: 0,
        t: 0.0,
        energy: energy(&state.u),
    }];
    for _ in 0..steps {
        state = cnab_step(&state, &op, cfg.convection)?;
        on_step(&state);
        if state.step % cfg.snapshot_stride == 0 {
            fields.push(state.u.clone());
            times.push(state.t);
            energy_series.push(EnergyRecord {
                step: state.step,
                t: state.t,
                energy: energy(&state.u),
            });
        }
    }
    Ok(FomOutput {
        snapshots: SnapshotSet::new(fields, times)?,
        energy: energy_series,
        final_state: state,
    })
}
