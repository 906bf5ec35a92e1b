//! Method-of-snapshots POD in the `M_h` inner product.
//!
//! Snapshots are split into their time mean and fluctuations, the
//! fluctuation correlation matrix `C_ij = M_h(ǔ^i, ǔ^j)` is diagonalised,
//! and mode `j` is `φ_j = λ_j^{-1/2} Σ_n w^j_n ǔ^n` summed over all snapshots.

use rayon::prelude::*;

use crate::discretization::FeField;
use crate::error::{Error, Result};
use crate::fom::{mass_apply, mass_inner};
use crate::linalg::{sym_eigen, Mat};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Stored full-order fields with their sample times and time mean.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    fields: Vec<FeField>,
    times: Vec<f64>,
    mean: FeField,
}

impl SnapshotSet {
    pub fn new(fields: Vec<FeField>, times: Vec<f64>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Dimension("snapshot set is empty".into()))?;
        if fields.len() != times.len() {
            return Err(Error::Dimension(format!(
                "{} snapshots but {} sample times",
                fields.len(),
                times.len()
            )));
        }
        for f in &fields[1..] {
            first.check_compatible(f)?;
        }
        let mut mean = FeField::zeros(*first.mesh(), first.degree());
        let inv = 1.0 / fields.len() as f64;
        for f in &fields {
            mean.axpy(inv, f)?;
        }
        Ok(Self { fields, times, mean })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[FeField] {
        &self.fields
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn mean(&self) -> &FeField {
        &self.mean
    }

    /// `ǔ^n = u^n - ū`
    pub fn fluctuation(&self, n: usize) -> FeField {
        self.fields[n]
            .lin_comb(1.0, &self.mean, -1.0)
            .expect("snapshots share one discretisation")
    }

    pub fn into_fields(self) -> Vec<FeField> {
        self.fields
    }
}

/// `C_ij = M_h(ǔ^i, ǔ^j)`, assembled from the upper triangle.
pub fn correlation_matrix(snaps: &SnapshotSet) -> Result<Mat> {
    let s = snaps.len();
    if s < 2 {
        return Err(Error::Dimension(format!("correlation needs at least 2 snapshots, got {s}")));
    }
    let fluct: Vec<Vec<f64>> = (0..s)
        .into_par_iter()
        .map(|n| snaps.fluctuation(n).into_coeffs())
        .collect();
    let weighted: Vec<Vec<f64>> = (0..s)
        .into_par_iter()
        .map(|n| {
            let f = FeField::from_coeffs(*snaps.mean().mesh(), snaps.mean().degree(), fluct[n].clone())
                .expect("same layout");
            mass_apply(&f)
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..s)
        .into_par_iter()
        .map(|i| {
            (i..s)
                .map(|j| weighted[i].iter().zip(&fluct[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let mut c = Mat::zeros(s, s);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            c[(i, i + off)] = v;
            c[(i + off, i)] = v;
        }
    }
    Ok(c)
}

/// `Σ_{j≤r} λ_j / Σ_j max(λ_j, 0)`
pub fn energy_fraction(eigenvalues: &[f64], r: usize) -> Result<f64> {
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    Ok(eigenvalues.iter().take(r).sum::<f64>() / total)
}

/// Number of eigenvalues above `RANK_CUTOFF * λ_1`.
pub fn numerical_rank(eigenvalues: &[f64]) -> usize {
    let l1 = eigenvalues.first().copied().unwrap_or(0.0);
    if l1 <= 0.0 {
        return 0;
    }
    eigenvalues.iter().take_while(|&&l| l > RANK_CUTOFF * l1).count()
}

/// Leading POD modes, the full spectrum and the snapshot mean.
#[derive(Clone, Debug)]
pub struct PodBasis {
    modes: Vec<FeField>,
    eigenvalues: Vec<f64>,
    mean: FeField,
}

impl PodBasis {
    /// Assemble from parts; modes must share the mean's discretisation.
    pub fn from_parts(mean: FeField, modes: Vec<FeField>, eigenvalues: Vec<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Dimension("a basis needs at least one mode".into()));
        }
        for m in &modes {
            mean.check_compatible(m)?;
        }
        Ok(Self {
            modes,
            eigenvalues,
            mean,
        })
    }

    pub fn rank(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[FeField] {
        &self.modes
    }

    pub fn mean(&self) -> &FeField {
        &self.mean
    }

    /// The whole correlation spectrum, not only the retained part.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Cumulative energy fraction for every prefix of the spectrum.
    pub fn cumulative_energy(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().map(|l| l.max(0.0)).sum();
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|l| {
                acc += l;
                if total > 0.0 {
                    acc / total
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `ū + Σ a_j φ_j`
    pub fn reconstruct(&self, a: &[f64]) -> FeField {
        let mut f = self.mean.clone();
        for (aj, phi) in a.iter().zip(&self.modes) {
            f.axpy(*aj, phi).expect("basis shares one discretisation");
        }
        f
    }

    /// Basis restricted to its first `r` modes.
    pub fn truncate(&self, r: usize) -> Result<PodBasis> {
        if r == 0 || r > self.rank() {
            return Err(Error::RankExceeded {
                requested: r,
                usable: self.rank(),
            });
        }
        Ok(PodBasis {
            modes: self.modes[..r].to_vec(),
            eigenvalues: self.eigenvalues.clone(),
            mean: self.mean.clone(),
        })
    }
}

/// Build the first `r` POD modes of a snapshot set.
pub fn build_basis(snaps: &SnapshotSet, r: usize) -> Result<PodBasis> {
    let c = correlation_matrix(snaps)?;
    let eig = sym_eigen(&c)?;
    basis_from_eigen(snaps, &eig.eigenvalues, &eig.eigenvectors, r)
}

/// Mode construction from a precomputed eigendecomposition of the
/// correlation matrix.
pub fn basis_from_eigen(snaps: &SnapshotSet, eigenvalues: &[f64], eigenvectors: &Mat, r: usize) -> Result<PodBasis> {
    let usable = numerical_rank(eigenvalues);
    if r == 0 || r > usable {
        return Err(Error::RankExceeded { requested: r, usable });
    }
    let s = snaps.len();
    let mesh = *snaps.mean().mesh();
    let k = snaps.mean().degree();
    let modes: Vec<FeField> = (0..r)
        .into_par_iter()
        .map(|j| {
            let mut phi = FeField::zeros(mesh, k);
            for n in 0..s {
                let w = eigenvectors[(n, j)];
                // ǔ^n = u^n - ū, accumulated as two axpys
                phi.axpy(w, &snaps.fields()[n]).expect("same layout");
                phi.axpy(-w, snaps.mean()).expect("same layout");
            }
            phi.scale(1.0 / eigenvalues[j].sqrt());
            phi
        })
        .collect();
    PodBasis::from_parts(snaps.mean().clone(), modes, eigenvalues.to_vec())
}

/// `Σ_n |ǔ^n - Π_r ǔ^n|²` in the `M_h` norm, with `Π_r` the `M_h`-orthogonal
/// projection onto the span of the first `r` modes.
pub fn projection_residual(snaps: &SnapshotSet, basis: &PodBasis, r: usize) -> Result<f64> {
    let modes = &basis.modes()[..r.min(basis.rank())];
    (0..snaps.len())
        .into_par_iter()
        .map(|n| {
            let mut res = snaps.fluctuation(n);
            let coeffs: Vec<f64> = modes.iter().map(|phi| mass_inner(&res, phi)).collect::<Result<_>>()?;
            for (c, phi) in coeffs.iter().zip(modes) {
                res.axpy(-c, phi)?;
            }
            mass_inner(&res, &res)
        })
        .sum::<Result<f64>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{gauss_rule, Mesh1D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(mesh: Mesh1D, k: usize, rng: &mut ChaCha8Rng) -> FeField {
        let c = (0..mesh.n_elems() * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FeField::from_coeffs(mesh, k, c).unwrap()
    }

    fn random_set(n: usize, rng: &mut ChaCha8Rng) -> SnapshotSet {
        let mesh = Mesh1D::unit(6).unwrap();
        let fields: Vec<FeField> = (0..n).map(|_| random_field(mesh, 2, rng)).collect();
        SnapshotSet::new(fields, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn mean_removal_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = random_set(9, &mut rng);
        let mut sum = FeField::zeros(*set.mean().mesh(), 2);
        for n in 0..set.len() {
            sum.axpy(1.0, &set.fluctuation(n)).unwrap();
        }
        let scale = set.fields().iter().map(|f| f.max_abs_coeff()).fold(0.0, f64::max);
        assert!(sum.max_abs_coeff() <= 1e-10 * scale);
    }

    #[test]
    fn identical_snapshots_give_zero_correlation() {
        let mesh = Mesh1D::unit(4).unwrap();
        let f = FeField::constant(mesh, 1, 2.0);
        let set = SnapshotSet::new(vec![f.clone(), f.clone(), f], vec![0.0, 1.0, 2.0]).unwrap();
        let c = correlation_matrix(&set).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert!(matches!(build_basis(&set, 1), Err(Error::RankExceeded { usable: 0, .. })));
    }

    #[test]
    fn two_symmetric_snapshots() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mesh = Mesh1D::unit(5).unwrap();
        let ubar = random_field(mesh, 2, &mut rng);
        let v = random_field(mesh, 2, &mut rng);
        let set = SnapshotSet::new(
            vec![ubar.lin_comb(1.0, &v, 1.0).unwrap(), ubar.lin_comb(1.0, &v, -1.0).unwrap()],
            vec![0.0, 1.0],
        )
        .unwrap();
        let m = mass_inner(&v, &v).unwrap();
        let c = correlation_matrix(&set).unwrap();
        let expect = [[m, -m], [-m, m]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c[(i, j)] - expect[i][j]).abs() < 1e-13);
            }
        }
        let basis = build_basis(&set, 1).unwrap();
        let phi = &basis.modes()[0];
        assert!((mass_inner(phi, phi).unwrap() - 1.0).abs() < 1e-12);
        // φ = ±v / |v|
        let dot = mass_inner(phi, &v).unwrap();
        assert!((dot.abs() - m.sqrt()).abs() < 1e-12);
        assert!(build_basis(&set, 2).is_err());
    }

    #[test]
    fn correlation_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let set = random_set(10, &mut rng);
        let c = correlation_matrix(&set).unwrap();
        let mesh = *set.mean().mesh();
        let rule = gauss_rule(7);
        for i in 0..10 {
            for j in 0..10 {
                let (fi, fj) = (set.fluctuation(i), set.fluctuation(j));
                let mut q = 0.0;
                for e in 0..mesh.n_elems() {
                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                        q += w * mesh.h() / 2.0 * fi.eval_local(e, *x) * fj.eval_local(e, *x);
                    }
                }
                assert!((c[(i, j)] - q).abs() < 1e-12);
            }
        }
        assert_eq!(c.asymmetry(), 0.0);
    }

    #[test]
    fn basis_is_orthonormal_and_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let set = random_set(12, &mut rng);
        let c = correlation_matrix(&set).unwrap();
        let basis = build_basis(&set, 8).unwrap();
        let lam = basis.eigenvalues();
        assert!((lam.iter().sum::<f64>() - c.trace()).abs() <= 1e-10 * c.trace());
        for i in 0..8 {
            for j in 0..8 {
                let g = mass_inner(&basis.modes()[i], &basis.modes()[j]).unwrap();
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((g - d).abs() <= 1e-8);
            }
        }
        for r in 1..=8 {
            let res = projection_residual(&set, &basis, r).unwrap();
            let tail: f64 = lam[r..].iter().sum();
            assert!((res - tail).abs() <= 1e-8 * tail.max(1e-300), "r={r}: {res} vs {tail}");
        }
    }

    #[test]
    fn spectrum_is_invariant_under_reordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let set = random_set(8, &mut rng);
        let mut fields = set.fields().to_vec();
        fields.reverse();
        let rev = SnapshotSet::new(fields, set.times().to_vec()).unwrap();
        let a = build_basis(&set, 3).unwrap();
        let b = build_basis(&rev, 3).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() <= 1e-10 * a.eigenvalues()[0]);
        }
        for j in 0..3 {
            let d = mass_inner(&a.modes()[j], &b.modes()[j]).unwrap();
            assert!((d.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn energy_fraction_examples() {
        assert_eq!(energy_fraction(&[3.0, 1.0], 1).unwrap(), 0.75);
        assert_eq!(energy_fraction(&[3.0, 1.0], 2).unwrap(), 1.0);
        assert!(matches!(energy_fraction(&[0.0, 0.0], 1), Err(Error::ZeroSpectrum)));
        // negative round-off does not inflate the total
        assert_eq!(energy_fraction(&[3.0, 1.0, -1e-18], 2).unwrap(), 1.0 - 1e-18 / 4.0);
    }
}
