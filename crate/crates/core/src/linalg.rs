//! Dense linear algebra for the pipeline: a row-major matrix, partial-pivoting
//! LU, a cyclic Jacobi symmetric eigensolver and a factor-once solver for
//! periodic block-tridiagonal systems.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self {
            rows: n,
            cols: m,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ x`
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out.row_mut(i).iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &Mat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| alpha * a).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest `|A - Aᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct DenseLU {
    lu: Mat,
    perm: Vec<usize>,
}

impl DenseLU {
    pub fn factor(a: &Mat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = a.max_abs() * f64::EPSILON * n as f64;
        for col in 0..n {
            let (piv, pval) = (col..n)
                .map(|r| (r, lu[(r, col)].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pval <= tiny || pval == 0.0 {
                return Err(Error::Singular { column: col });
            }
            if piv != col {
                perm.swap(piv, col);
                for j in 0..n {
                    lu.data.swap(piv * n + j, col * n + j);
                }
            }
            let d = lu[(col, col)];
            for r in col + 1..n {
                let f = lu[(r, col)] / d;
                lu[(r, col)] = f;
                if f != 0.0 {
                    for j in col + 1..n {
                        lu.data[r * n + j] -= f * lu.data[col * n + j];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solve for every column of `b`.
    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let mut out = Mat::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn inverse(&self) -> Mat {
        self.solve_mat(&Mat::identity(self.dim()))
    }
}

pub fn lu_solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows, right-hand side has {} entries",
            a.rows(),
            b.len()
        )));
    }
    Ok(DenseLU::factor(a)?.solve(b))
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: Mat,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-14;

/// Cyclic Jacobi eigensolver.
///
/// The input is symmetrised by averaging. Sweeps run until the off-diagonal
/// Frobenius norm drops below `1e-14 |A|_F`. Each eigenvector is signed so
/// that its largest-magnitude entry is positive; ties in the eigenvalue
/// order keep the original index order.
pub fn sym_eigen(a: &Mat) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let amax = a.max_abs();
    if a.asymmetry() > 1e-10 * amax {
        return Err(Error::Dimension(format!(
            "matrix is not symmetric (asymmetry {:e})",
            a.asymmetry()
        )));
    }
    let mut m = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    // rows of `vt` are the eigenvectors, so rotations touch contiguous memory
    let mut vt = Mat::identity(n);
    let norm = m.frobenius_norm();
    let off_norm = |m: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= JACOBI_TOL * norm || norm == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // negligible relative to both diagonal entries
                if sweeps > 4 && app.abs() + 100.0 * apq.abs() == app.abs() && aqq.abs() + 100.0 * apq.abs() == aqq.abs() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    m[(k, p)] = nkp;
                    m[(p, k)] = nkp;
                    m[(k, q)] = nkq;
                    m[(q, k)] = nkq;
                }
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                let (rp, rq) = two_rows(&mut vt, p, q);
                for (vp, vq) in rp.iter_mut().zip(rq.iter_mut()) {
                    let a = *vp;
                    let b = *vq;
                    *vp = c * a - s * b;
                    *vq = s * a + c * b;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order on ties
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let mut eigenvectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = vt.row(src);
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
        let sign = if v[imax] < 0.0 { -1.0 } else { 1.0 };
        for (row, x) in v.iter().enumerate() {
            eigenvectors[(row, col)] = sign * x;
        }
    }
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

fn two_rows(m: &mut Mat, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let cols = m.cols;
    let (head, tail) = m.data.split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}

/// Periodic block-tridiagonal matrix, factored once.
///
/// Block row `i` holds `lower[i] = A[i][i-1]`, `diag[i] = A[i][i]` and
/// `upper[i] = A[i][i+1]`, with indices taken modulo `n_blocks`, so
/// `lower[0]` and `upper[n-1]` are the corner blocks. The open chain is
/// factored by block LU and the corners are restored by a Sherman-Morrison-
/// Woodbury correction of rank `b`. Systems with two blocks, where the
/// corners coincide with the off-diagonals, fall back to dense LU.
#[derive(Clone, Debug)]
pub struct CyclicBandSystem {
    n_blocks: usize,
    block: usize,
    kind: CyclicKind,
}

#[derive(Clone, Debug)]
enum CyclicKind {
    Dense(DenseLU),
    Woodbury(Box<WoodburyFactors>),
}

#[derive(Clone, Debug)]
struct WoodburyFactors {
    /// Blocks stored flat, `b*b` row-major per block.
    lower: Vec<f64>,
    /// Inverses of the Schur pivots `D'_i` of the open chain.
    pivot_inv: Vec<f64>,
    /// `D'_i^{-1} U_i`
    pivot_upper: Vec<f64>,
    /// Corner block `A[0][n-1]` scaled by `1/gamma`.
    top_right: Mat,
    /// `T^{-1} U`, n blocks of b×b.
    z: Vec<f64>,
    capacitance: DenseLU,
}

fn flatten(blocks: &[Mat]) -> Vec<f64> {
    blocks.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
}

/// `y -= M x` for a flat b×b block.
#[inline]
fn block_sub_mul(y: &mut [f64], m: &[f64], x: &[f64]) {
    let b = y.len();
    for r in 0..b {
        let row = &m[r * b..(r + 1) * b];
        y[r] -= row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
    }
}

impl CyclicBandSystem {
    pub fn factor(diag: Vec<Mat>, lower: Vec<Mat>, upper: Vec<Mat>) -> Result<Self> {
        let n = diag.len();
        if n < 2 || lower.len() != n || upper.len() != n {
            return Err(Error::Dimension(format!(
                "cyclic system needs at least 2 blocks and matching band lengths (diag {}, lower {}, upper {})",
                n,
                lower.len(),
                upper.len()
            )));
        }
        let b = diag[0].rows();
        if diag.iter().chain(&lower).chain(&upper).any(|m| m.rows() != b || m.cols() != b) {
            return Err(Error::Dimension("all blocks must be square of equal size".into()));
        }
        if n == 2 {
            let dense = assemble_dense(&diag, &lower, &upper);
            let lu = DenseLU::factor(&dense).map_err(|e| match e {
                Error::Singular { column } => Error::SingularPivot { block: column / b },
                e => e,
            })?;
            return Ok(Self {
                n_blocks: n,
                block: b,
                kind: CyclicKind::Dense(lu),
            });
        }

        let gamma = {
            let d = diag[0].max_abs();
            if d > 0.0 {
                -d
            } else {
                -1.0
            }
        };
        let corner_tr = upper[n - 1].clone(); // A[n-1][0]
        let corner_tr_top = &lower[0]; // A[0][n-1]
        // T = A - U Vᵀ with U = [gamma I; 0; ...; A[n-1][0]], Vᵀ = [I, 0, ..., A[0][n-1] / gamma]
        let mut tdiag = diag.clone();
        for i in 0..b {
            tdiag[0][(i, i)] -= gamma;
        }
        let top_right = corner_tr_top.scaled(1.0 / gamma);
        tdiag[n - 1].add_scaled(-1.0, &corner_tr.matmul(&top_right));

        let mut pivot_inv = Vec::with_capacity(n);
        let mut pivot_upper = Vec::with_capacity(n);
        let mut prev: Option<Mat> = None;
        for i in 0..n {
            let mut d = tdiag[i].clone();
            if let Some(pu) = &prev {
                // D_i - L_i D'_{i-1}^{-1} U_{i-1}
                d.add_scaled(-1.0, &lower[i].matmul(pu));
            }
            let lu = DenseLU::factor(&d).map_err(|_| Error::SingularPivot { block: i })?;
            let pu = lu.solve_mat(&upper[i]);
            pivot_inv.push(lu.inverse());
            pivot_upper.push(pu.clone());
            prev = Some(pu);
        }
        let mut fac = WoodburyFactors {
            lower: flatten(&lower),
            pivot_inv: flatten(&pivot_inv),
            pivot_upper: flatten(&pivot_upper),
            top_right,
            z: Vec::new(),
            capacitance: DenseLU::factor(&Mat::identity(b))?,
        };
        // Z = T^{-1} U, one column of U at a time
        let mut z = vec![0.0; n * b * b];
        for col in 0..b {
            let mut u = vec![0.0; n * b];
            u[col] = gamma;
            for r in 0..b {
                u[(n - 1) * b + r] = corner_tr[(r, col)];
            }
            fac.chain_solve(&mut u, b);
            for blk in 0..n {
                for r in 0..b {
                    z[blk * b * b + r * b + col] = u[blk * b + r];
                }
            }
        }
        // I + Vᵀ Z
        let z0 = Mat::from_vec(b, b, z[..b * b].to_vec());
        let zl = Mat::from_vec(b, b, z[(n - 1) * b * b..].to_vec());
        let mut cap = Mat::identity(b);
        cap.add_scaled(1.0, &z0);
        cap.add_scaled(1.0, &fac.top_right.matmul(&zl));
        fac.capacitance = DenseLU::factor(&cap).map_err(|_| Error::SingularPivot { block: n - 1 })?;
        fac.z = z;
        Ok(Self {
            n_blocks: n,
            block: b,
            kind: CyclicKind::Woodbury(Box::new(fac)),
        })
    }

    /// Scalar periodic tridiagonal system: `sub[i] = A[i][i-1]`,
    /// `sup[i] = A[i][i+1]` (indices modulo n).
    pub fn factor_scalar(diag: &[f64], sub: &[f64], sup: &[f64]) -> Result<Self> {
        let wrap = |v: &[f64]| v.iter().map(|&x| Mat::from_vec(1, 1, vec![x])).collect();
        Self::factor(wrap(diag), wrap(sub), wrap(sup))
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n_blocks * self.block);
        match &self.kind {
            CyclicKind::Dense(lu) => lu.solve(rhs),
            CyclicKind::Woodbury(f) => {
                let b = self.block;
                let n = self.n_blocks;
                let mut x = rhs.to_vec();
                f.chain_solve(&mut x, b);
                // Vᵀ y
                let mut vy: Vec<f64> = x[..b].to_vec();
                let tr = f.top_right.matvec(&x[(n - 1) * b..]);
                for (a, t) in vy.iter_mut().zip(tr) {
                    *a += t;
                }
                let w = f.capacitance.solve(&vy);
                for (xb, zb) in x.chunks_exact_mut(b).zip(f.z.chunks_exact(b * b)) {
                    block_sub_mul(xb, zb, &w);
                }
                x
            }
        }
    }
}

impl WoodburyFactors {
    /// In-place solve with the open-chain matrix `T` by block forward/back
    /// substitution.
    fn chain_solve(&self, x: &mut [f64], b: usize) {
        let n = x.len() / b;
        let bb = b * b;
        let mut g = vec![0.0; b];
        for i in 0..n {
            g.copy_from_slice(&x[i * b..(i + 1) * b]);
            if i > 0 {
                block_sub_mul(&mut g, &self.lower[i * bb..(i + 1) * bb], &x[(i - 1) * b..i * b]);
            }
            let inv = &self.pivot_inv[i * bb..(i + 1) * bb];
            for r in 0..b {
                x[i * b + r] = inv[r * b..(r + 1) * b].iter().zip(&g).map(|(a, c)| a * c).sum();
            }
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * b);
            block_sub_mul(&mut head[i * b..], &self.pivot_upper[i * bb..(i + 1) * bb], &tail[..b]);
        }
    }
}

/// Dense assembly of a periodic block-tridiagonal matrix (blocks summed where
/// they coincide).
pub fn assemble_dense(diag: &[Mat], lower: &[Mat], upper: &[Mat]) -> Mat {
    let n = diag.len();
    let b = diag[0].rows();
    let mut a = Mat::zeros(n * b, n * b);
    let mut add = |bi: usize, bj: usize, m: &Mat| {
        for r in 0..b {
            for c in 0..b {
                a[(bi * b + r, bj * b + c)] += m[(r, c)];
            }
        }
    };
    for i in 0..n {
        add(i, i, &diag[i]);
        add(i, (i + n - 1) % n, &lower[i]);
        add(i, (i + 1) % n, &upper[i]);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn eigen_2x2() {
        let e = sym_eigen(&Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_identity() {
        let e = sym_eigen(&Mat::identity(5)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 1.0));
        assert_eq!(e.eigenvectors, Mat::identity(5));
    }

    #[test]
    fn eigen_reconstructs_random_50() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_sym(50, &mut rng);
        let e = sym_eigen(&a).unwrap();
        let w = &e.eigenvectors;
        let wtw = w.transpose().matmul(w);
        let mut ortho: f64 = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                let d = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((wtw[(i, j)] - d).abs());
            }
        }
        assert!(ortho <= 1e-10);
        let lam = Mat::from_fn(50, 50, |i, j| if i == j { e.eigenvalues[i] } else { 0.0 });
        let rec = w.matmul(&lam).matmul(&w.transpose());
        let mut diff = rec.clone();
        diff.add_scaled(-1.0, &a);
        assert!(diff.max_abs() <= 1e-10);
        for j in 0..50 {
            let v = w.column(j);
            let av = a.matvec(&v);
            let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - e.eigenvalues[j] * y).powi(2)).sum::<f64>().sqrt();
            assert!(res <= 1e-10 * a.frobenius_norm());
        }
        for win in e.eigenvalues.windows(2) {
            assert!(win[0] >= win[1]);
        }
        assert!((e.eigenvalues.iter().sum::<f64>() - a.trace()).abs() <= 1e-10 * a.trace().abs().max(1.0));
    }

    #[test]
    fn eigen_sign_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_sym(12, &mut rng);
        let e = sym_eigen(&a).unwrap();
        for j in 0..12 {
            let v = e.eigenvectors.column(j);
            let m = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
            assert!(m > 0.0);
        }
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        assert!(sym_eigen(&Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]])).is_err());
    }

    #[test]
    fn spd_eigenvalues_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = Mat::from_fn(30, 8, |_, _| rng.gen_range(-1.0..1.0));
        let a = b.matmul(&b.transpose());
        let e = sym_eigen(&a).unwrap();
        let lmax = e.eigenvalues[0];
        assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10 * lmax));
    }

    #[test]
    fn lu_trivial() {
        assert_eq!(lu_solve(&Mat::identity(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let a = Mat::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(lu_solve(&a, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        let s = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(lu_solve(&s, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn lu_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Mat::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        let ax = a.matvec(&x);
        let res = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res <= 1e-11 * (a.frobenius_norm() * xn + bn));
    }

    #[test]
    fn cyclic_laplacian_vs_dense() {
        let n = 17;
        let diag = vec![2.0 + 1e-3; n];
        let off = vec![-1.0; n];
        let sys = CyclicBandSystem::factor_scalar(&diag, &off, &off).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = sys.solve(&rhs);
        let wrap = |v: &[f64]| v.iter().map(|&x| Mat::from_vec(1, 1, vec![x])).collect::<Vec<_>>();
        let dense = assemble_dense(&wrap(&diag), &wrap(&off), &wrap(&off));
        let xd = lu_solve(&dense, &rhs).unwrap();
        for (a, b) in x.iter().zip(&xd) {
            assert!((a - b).abs() <= 1e-11 * xd.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn cyclic_identity_blocks() {
        let n = 5;
        let sys = CyclicBandSystem::factor(vec![Mat::identity(3); n], vec![Mat::zeros(3, 3); n], vec![Mat::zeros(3, 3); n]).unwrap();
        let rhs: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let x = sys.solve(&rhs);
        for (a, b) in x.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cyclic_two_blocks_wrap() {
        // corners coincide with the off-diagonals
        let sys = CyclicBandSystem::factor_scalar(&[4.0, 5.0], &[1.0, 0.5], &[2.0, 0.25]).unwrap();
        let dense = Mat::from_rows(&[&[4.0, 3.0], &[0.75, 5.0]]);
        let x = sys.solve(&[1.0, 2.0]);
        let xd = lu_solve(&dense, &[1.0, 2.0]).unwrap();
        assert!((x[0] - xd[0]).abs() < 1e-14 && (x[1] - xd[1]).abs() < 1e-14);
    }

    #[test]
    fn cyclic_singular_names_block() {
        let z = vec![Mat::zeros(1, 1); 4];
        let err = CyclicBandSystem::factor(z.clone(), z.clone(), z).unwrap_err();
        assert!(matches!(err, Error::SingularPivot { .. }));
    }

    fn random_cyclic(n: usize, b: usize, seed: u64) -> (Vec<Mat>, Vec<Mat>, Vec<Mat>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rnd = |dom: f64| {
            Mat::from_fn(b, b, |i, j| rng.gen_range(-1.0..1.0) + if i == j { dom } else { 0.0 })
        };
        let diag = (0..n).map(|_| rnd(4.0 * b as f64)).collect();
        let lower = (0..n).map(|_| rnd(0.0)).collect();
        let upper = (0..n).map(|_| rnd(0.0)).collect();
        (diag, lower, upper)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn cyclic_matches_dense(n in 2usize..=21, b in 1usize..=3, seed in 0u64..1000) {
            let (d, l, u) = random_cyclic(n, b, seed);
            let dense = assemble_dense(&d, &l, &u);
            let sys = CyclicBandSystem::factor(d, l, u).unwrap();
            let rhs: Vec<f64> = (0..n * b).map(|i| ((i * 7 + 3) as f64).sin()).collect();
            let x = sys.solve(&rhs);
            let xd = lu_solve(&dense, &rhs).unwrap();
            let scale = xd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, c) in x.iter().zip(&xd) {
                prop_assert!((a - c).abs() <= 1e-10 * scale);
            }
        }
    }
}
