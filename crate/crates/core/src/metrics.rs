//! L2 / L1 error norms and their time series.

use rayon::prelude::*;

use crate::discretization::{gauss_rule, quad_points, FeField, QuadRule};
use crate::error::{Error, Result};

fn integrate_diff(f: &FeField, g: &FeField, rule: &QuadRule, p: impl Fn(f64) -> f64) -> Result<f64> {
    f.check_compatible(g)?;
    let mesh = f.mesh();
    let jac = mesh.h() / 2.0;
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * p(f.eval_local(e, *x) - g.eval_local(e, *x));
        }
    }
    Ok(acc * jac)
}

/// `‖f − g‖_{L2}` with the `2k+2` point Gauss rule.
pub fn l2_error(f: &FeField, g: &FeField) -> Result<f64> {
    let rule = gauss_rule(quad_points(f.degree()));
    Ok(integrate_diff(f, g, &rule, |d| d * d)?.sqrt())
}

/// `‖f − g‖_{L1}`; the quadrature of `|·|` is approximate near sign changes.
pub fn l1_error(f: &FeField, g: &FeField) -> Result<f64> {
    let rule = gauss_rule(quad_points(f.degree()));
    integrate_diff(f, g, &rule, f64::abs)
}

/// L2 distance to an analytic function using a `q`-point rule per element.
pub fn l2_error_fn(f: &FeField, exact: impl Fn(f64) -> f64, q: usize) -> f64 {
    let rule = gauss_rule(q);
    let mesh = f.mesh();
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let d = f.eval_local(e, *x) - exact(mesh.from_reference(e, *x));
            acc += w * d * d;
        }
    }
    (acc * mesh.h() / 2.0).sqrt()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub l1: Vec<f64>,
}

impl ErrorSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| {
            (self.times[a] - t)
                .abs()
                .partial_cmp(&(self.times[b] - t).abs())
                .unwrap()
        })
    }
}

/// Time grids agree when every pair matches to `1e-9` relative to the span.
pub fn check_grids(left: &[f64], right: &[f64]) -> Result<()> {
    let span = left
        .iter()
        .chain(right)
        .fold(0.0f64, |m, t| m.max(t.abs()))
        .max(1.0);
    for i in 0..left.len().max(right.len()) {
        match (left.get(i), right.get(i)) {
            (Some(&a), Some(&b)) if (a - b).abs() <= 1e-9 * span => {}
            (a, b) => {
                return Err(Error::GridMismatch {
                    index: i,
                    left: a.copied().unwrap_or(f64::NAN),
                    right: b.copied().unwrap_or(f64::NAN),
                })
            }
        }
    }
    Ok(())
}

/// Per-sample errors between two trajectories on the same time grid.
pub fn error_series(fom: &[FeField], rom: &[FeField], fom_times: &[f64], rom_times: &[f64]) -> Result<ErrorSeries> {
    check_grids(fom_times, rom_times)?;
    if fom.len() != fom_times.len() || rom.len() != rom_times.len() {
        return Err(Error::Dimension("trajectory and time grid lengths differ".into()));
    }
    let pairs: Vec<(f64, f64)> = fom
        .par_iter()
        .zip(rom)
        .map(|(f, g)| Ok((l2_error(f, g)?, l1_error(f, g)?)))
        .collect::<Result<_>>()?;
    let (l2, l1) = pairs.into_iter().unzip();
    Ok(ErrorSeries {
        times: fom_times.to_vec(),
        l2,
        l1,
    })
}
