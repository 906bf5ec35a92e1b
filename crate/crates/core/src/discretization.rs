//! Uniform periodic 1D mesh, modal Legendre basis, Gauss-Legendre quadrature
//! and the broken polynomial field containers used by every other module.
//!
//! Element `e` spans `[x0 + e h, x0 + (e + 1) h]`. Facet `f` is the vertex at
//! `x0 + f h`; its left neighbour is element `f - 1` (wrapping to the last
//! element for `f = 0`) and its right neighbour is element `f`.

use crate::error::{Error, Result};

/// Uniform periodic partition of `[x0, x1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    x0: f64,
    x1: f64,
    n_elems: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(x0: f64, x1: f64, n_elems: usize) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
            return Err(Error::InvalidMesh(format!(
                "domain endpoints must satisfy x0 < x1, got [{x0}, {x1}]"
            )));
        }
        if n_elems < 2 {
            return Err(Error::InvalidMesh(format!(
                "a periodic mesh needs at least 2 elements, got {n_elems}"
            )));
        }
        Ok(Self {
            x0,
            x1,
            n_elems,
            h: (x1 - x0) / n_elems as f64,
        })
    }

    /// The unit interval with `n_elems` elements.
    pub fn unit(n_elems: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n_elems)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    /// Number of facets; equals the number of elements under periodicity.
    pub fn n_facets(&self) -> usize {
        self.n_elems
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn facet_x(&self, f: usize) -> f64 {
        self.x0 + f as f64 * self.h
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let a = self.x0 + e as f64 * self.h;
        (a, a + self.h)
    }

    #[inline]
    pub fn left_element(&self, facet: usize) -> usize {
        if facet == 0 {
            self.n_elems - 1
        } else {
            facet - 1
        }
    }

    #[inline]
    pub fn right_element(&self, facet: usize) -> usize {
        facet
    }

    /// Facet on the right end of element `e`.
    #[inline]
    pub fn right_facet(&self, e: usize) -> usize {
        if e + 1 == self.n_elems {
            0
        } else {
            e + 1
        }
    }

    /// Affine map from element `e` to the reference interval `[-1, 1]`.
    pub fn to_reference(&self, e: usize, x: f64) -> f64 {
        let (a, _) = self.element_bounds(e);
        2.0 * (x - a) / self.h - 1.0
    }

    pub fn from_reference(&self, e: usize, xi: f64) -> f64 {
        let (a, _) = self.element_bounds(e);
        a + 0.5 * (xi + 1.0) * self.h
    }

    /// Element containing `x`; a vertex belongs to the element on its right.
    /// Points outside the domain are wrapped periodically.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let len = self.length();
        let mut y = (x - self.x0) % len;
        if y < 0.0 {
            y += len;
        }
        let e = ((y / self.h).floor() as usize).min(self.n_elems - 1);
        (e, self.to_reference(e, self.x0 + y))
    }

    pub(crate) fn check_same(&self, other: &Mesh1D) -> Result<()> {
        if self != other {
            return Err(Error::MeshMismatch(format!(
                "{} elements on [{}, {}] vs {} elements on [{}, {}]",
                self.n_elems, self.x0, self.x1, other.n_elems, other.x0, other.x1
            )));
        }
        Ok(())
    }
}

/// Legendre polynomials `P_0..=P_k` and their derivatives at `xi`, by the
/// three-term recurrence. `xi` is clamped to `[-1, 1]`.
pub fn legendre_all(k: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let x = xi.clamp(-1.0, 1.0);
    let mut p = vec![0.0; k + 1];
    let mut dp = vec![0.0; k + 1];
    p[0] = 1.0;
    if k >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for n in 1..k {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        dp[n + 1] = dp[n - 1] + (2.0 * nf + 1.0) * p[n];
    }
    (p, dp)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `q`-point Gauss-Legendre rule. Nodes are the roots of `P_q`, found by
/// Newton iteration from Chebyshev initial guesses.
pub fn gauss_rule(q: usize) -> QuadRule {
    assert!(q >= 1, "quadrature needs at least one point");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    // roots are symmetric; compute the upper half and mirror
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_pair(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[q - 1 - i] = -x;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    nodes.reverse();
    weights.reverse();
    QuadRule { nodes, weights }
}

fn legendre_pair(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for n in 1..q {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * x * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Number of quadrature points used throughout for degree `k`.
pub fn quad_points(k: usize) -> usize {
    2 * k + 2
}

/// Legendre values and derivatives tabulated at the quadrature points and
/// at the two endpoints of the reference element.
#[derive(Clone, Debug)]
pub struct RefElement {
    pub degree: usize,
    pub quad: QuadRule,
    /// `vals[q][i] = P_i(xi_q)`
    pub vals: Vec<Vec<f64>>,
    /// `dvals[q][i] = P_i'(xi_q)` (reference derivative)
    pub dvals: Vec<Vec<f64>>,
    /// `P_i(-1)`
    pub left: Vec<f64>,
    /// `P_i(+1)`
    pub right: Vec<f64>,
    pub dleft: Vec<f64>,
    pub dright: Vec<f64>,
}

impl RefElement {
    pub fn new(degree: usize) -> Self {
        Self::with_quadrature(degree, gauss_rule(quad_points(degree)))
    }

    pub fn with_quadrature(degree: usize, quad: QuadRule) -> Self {
        let (vals, dvals) = quad
            .nodes
            .iter()
            .map(|&x| legendre_all(degree, x))
            .unzip();
        let (left, dleft) = legendre_all(degree, -1.0);
        let (right, dright) = legendre_all(degree, 1.0);
        Self {
            degree,
            quad,
            vals,
            dvals,
            left,
            right,
            dleft,
            dright,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    /// Reference mass `∫ P_i^2 dxi = 2 / (2i + 1)`.
    pub fn mode_norm(i: usize) -> f64 {
        2.0 / (2.0 * i as f64 + 1.0)
    }
}

/// Modal DG field: `coeffs[e * (k + 1) + i]` multiplies `P_i` on element `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeField {
    mesh: Mesh1D,
    degree: usize,
    coeffs: Vec<f64>,
}

impl FeField {
    pub fn zeros(mesh: Mesh1D, degree: usize) -> Self {
        Self {
            mesh,
            degree,
            coeffs: vec![0.0; mesh.n_elems() * (degree + 1)],
        }
    }

    pub fn constant(mesh: Mesh1D, degree: usize, c: f64) -> Self {
        let mut f = Self::zeros(mesh, degree);
        for e in 0..mesh.n_elems() {
            f.element_mut(e)[0] = c;
        }
        f
    }

    pub fn from_coeffs(mesh: Mesh1D, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.n_elems() * (degree + 1);
        if coeffs.len() != expected {
            return Err(Error::MeshMismatch(format!(
                "coefficient vector has length {}, expected {expected}",
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh,
            degree,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn element(&self, e: usize) -> &[f64] {
        let m = self.n_modes();
        &self.coeffs[e * m..(e + 1) * m]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let m = self.n_modes();
        &mut self.coeffs[e * m..(e + 1) * m]
    }

    /// Value at `xi` in the reference coordinate of element `e`.
    pub fn eval_local(&self, e: usize, xi: f64) -> f64 {
        let (p, _) = legendre_all(self.degree, xi);
        dot(self.element(e), &p)
    }

    /// Trace at the left end (`xi = -1`) of element `e`.
    pub fn trace_left(&self, e: usize) -> f64 {
        self.element(e)
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { *c } else { -*c })
            .sum()
    }

    /// Trace at the right end (`xi = +1`) of element `e`.
    pub fn trace_right(&self, e: usize) -> f64 {
        self.element(e).iter().sum()
    }

    pub fn check_compatible(&self, other: &FeField) -> Result<()> {
        self.mesh.check_same(&other.mesh)?;
        if self.degree != other.degree {
            return Err(Error::MeshMismatch(format!(
                "polynomial degree {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &FeField) -> Result<()> {
        self.check_compatible(x)?;
        for (a, b) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= alpha);
    }

    /// `alpha * self + beta * other`
    pub fn lin_comb(&self, alpha: f64, other: &FeField, beta: f64) -> Result<FeField> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(FeField {
            mesh: self.mesh,
            degree: self.degree,
            coeffs,
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Point evaluation of a field. At a vertex the trace from the element on
/// the right is returned.
pub fn eval_field(f: &FeField, x: f64) -> f64 {
    let (e, xi) = f.mesh().locate(x);
    f.eval_local(e, xi)
}

/// One scalar per periodic vertex (the HDG trace unknown).
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonField {
    mesh: Mesh1D,
    vals: Vec<f64>,
}

impl SkeletonField {
    pub fn zeros(mesh: Mesh1D) -> Self {
        Self {
            mesh,
            vals: vec![0.0; mesh.n_facets()],
        }
    }

    pub fn from_values(mesh: Mesh1D, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != mesh.n_facets() {
            return Err(Error::MeshMismatch(format!(
                "skeleton field has {} values, mesh has {} facets",
                vals.len(),
                mesh.n_facets()
            )));
        }
        Ok(Self { mesh, vals })
    }

    /// Facet-wise average of the two adjacent traces of `u`.
    pub fn trace_average(u: &FeField) -> Self {
        let mesh = *u.mesh();
        let vals = (0..mesh.n_facets())
            .map(|f| 0.5 * (u.trace_right(mesh.left_element(f)) + u.trace_left(mesh.right_element(f))))
            .collect();
        Self { mesh, vals }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Elementwise L2 projection of `f` onto the degree-`k` broken space.
pub fn project_function(mesh: Mesh1D, degree: usize, f: impl Fn(f64) -> f64) -> FeField {
    let re = RefElement::new(degree);
    let mut out = FeField::zeros(mesh, degree);
    for e in 0..mesh.n_elems() {
        let vals: Vec<f64> = re.quad.nodes.iter().map(|&xi| f(mesh.from_reference(e, xi))).collect();
        let c = out.element_mut(e);
        for (i, ci) in c.iter_mut().enumerate() {
            let s: f64 = (0..re.quad.len())
                .map(|q| re.quad.weights[q] * vals[q] * re.vals[q][i])
                .sum();
            *ci = s / RefElement::mode_norm(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mesh_basics() {
        let m = Mesh1D::new(0.0, 1.0, 4).unwrap();
        assert_eq!(m.h(), 0.25);
        let facets: Vec<f64> = (0..m.n_facets()).map(|f| m.facet_x(f)).collect();
        assert_eq!(facets, vec![0.0, 0.25, 0.5, 0.75]);
        let m2 = Mesh1D::new(0.0, 1.0, 2).unwrap();
        assert_eq!(m2.left_element(0), 1);
        assert_eq!(m2.right_element(0), 0);
        assert!(Mesh1D::new(0.0, 1.0, 1).is_err());
        assert!(Mesh1D::new(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn legendre_endpoint_values() {
        assert_eq!(legendre_all(2, 1.0).0, vec![1.0, 1.0, 1.0]);
        assert_eq!(legendre_all(2, 0.0).0, vec![1.0, 0.0, -0.5]);
        assert_eq!(legendre_all(3, -1.0).0, vec![1.0, -1.0, 1.0, -1.0]);
        // clamped
        assert_eq!(legendre_all(3, -1.0 - 1e-13).0, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn legendre_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-1.0..=1.0);
            for k in 3..=8 {
                let (p, dp) = legendre_all(k, x);
                let closed = [1.0, x, 0.5 * (3.0 * x * x - 1.0), 0.5 * (5.0 * x * x * x - 3.0 * x)];
                let dclosed = [0.0, 1.0, 3.0 * x, 0.5 * (15.0 * x * x - 3.0)];
                for i in 0..4 {
                    assert!((p[i] - closed[i]).abs() <= 1e-13);
                    assert!((dp[i] - dclosed[i]).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn gauss_small_rules() {
        let r1 = gauss_rule(1);
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r2 = gauss_rule(2);
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes[0] + s).abs() < 1e-15 && (r2.nodes[1] - s).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15 && (r2.weights[1] - 1.0).abs() < 1e-15);
        let r3 = gauss_rule(3);
        assert!((r3.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn gauss_exact_for_monomials() {
        for q in 1..=20 {
            let rule = gauss_rule(q);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for d in 0..=(2 * q - 1) {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(d as i32));
                let err = if exact == 0.0 { got.abs() } else { ((got - exact) / exact).abs() };
                assert!(err <= 1e-12, "q={q} d={d} err={err}");
            }
        }
    }

    #[test]
    fn element_mass_is_diagonal() {
        let h = 0.37;
        for k in 0..=6 {
            let re = RefElement::new(k);
            for i in 0..=k {
                for j in 0..=k {
                    let m: f64 = (0..re.quad.len())
                        .map(|q| re.quad.weights[q] * re.vals[q][i] * re.vals[q][j] * h / 2.0)
                        .sum();
                    let exact = if i == j { h / 2.0 * RefElement::mode_norm(i) } else { 0.0 };
                    assert!((m - exact).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn eval_constant_and_linear() {
        let mesh = Mesh1D::unit(5).unwrap();
        let f = FeField::constant(mesh, 3, 2.5);
        for x in [0.0, 0.1, 0.33, 0.6, 0.99] {
            assert_eq!(eval_field(&f, x), 2.5);
        }
        let mut g = FeField::zeros(mesh, 2);
        g.element_mut(2)[1] = 1.0;
        for x in [0.41, 0.5, 0.59] {
            let xi = mesh.to_reference(2, x);
            assert!((eval_field(&g, x) - xi).abs() < 1e-14);
        }
        // vertex convention: value from the element on the right
        let mut s = FeField::zeros(mesh, 1);
        s.element_mut(1)[0] = 7.0;
        assert_eq!(eval_field(&s, mesh.facet_x(1)), 7.0);
    }

    #[test]
    fn eval_matches_horner_oracle() {
        // Horner evaluation of the monomial expansion of each Legendre polynomial.
        fn monomial_coeffs(k: usize) -> Vec<Vec<f64>> {
            let mut p = vec![vec![1.0], vec![0.0, 1.0]];
            for n in 1..k {
                let nf = n as f64;
                let mut next = vec![0.0; n + 2];
                for (d, c) in p[n].iter().enumerate() {
                    next[d + 1] += (2.0 * nf + 1.0) * c / (nf + 1.0);
                }
                for (d, c) in p[n - 1].iter().enumerate() {
                    next[d] -= nf * c / (nf + 1.0);
                }
                p.push(next);
            }
            p.truncate(k + 1);
            p
        }
        let k = 5;
        let mono = monomial_coeffs(k);
        let mesh = Mesh1D::unit(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..mesh.n_elems() * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = FeField::from_coeffs(mesh, k, coeffs).unwrap();
        let rule = gauss_rule(quad_points(k));
        for e in 0..mesh.n_elems() {
            for &xi in &rule.nodes {
                let x = mesh.from_reference(e, xi);
                let mut expect = 0.0;
                for (i, c) in f.element(e).iter().enumerate() {
                    let h = mono[i].iter().rev().fold(0.0, |acc, a| acc * xi + a);
                    expect += c * h;
                }
                assert!((eval_field(&f, x) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_average_of_continuous_field() {
        let mesh = Mesh1D::unit(4).unwrap();
        let f = FeField::constant(mesh, 2, 3.0);
        let s = SkeletonField::trace_average(&f);
        assert_eq!(s.values(), &[3.0; 4]);
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = Mesh1D::new(-1.0, 2.0, 3).unwrap();
        let f = project_function(mesh, 3, |x| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x);
        for x in [-0.9, -0.2, 0.4, 1.1, 1.9] {
            let exact = 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
            assert!((eval_field(&f, x) - exact).abs() < 1e-12);
        }
    }
}
