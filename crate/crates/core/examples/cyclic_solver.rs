//! Periodic block-tridiagonal solve checked against a dense LU.

use pod_dg::linalg::{assemble_dense, lu_solve, CyclicBandSystem, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pod_dg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, b) in [(3, 1), (8, 2), (50, 3)] {
        let mut block = |shift: f64| Mat::from_fn(b, b, |i, j| rng.gen_range(-1.0..1.0) + if i == j { shift } else { 0.0 });
        let diag: Vec<Mat> = (0..n).map(|_| block(6.0)).collect();
        let lower: Vec<Mat> = (0..n).map(|_| block(0.0)).collect();
        let upper: Vec<Mat> = (0..n).map(|_| block(0.0)).collect();
        let dense = assemble_dense(&diag, &lower, &upper);
        let rhs: Vec<f64> = (0..n * b).map(|i| (i as f64).cos()).collect();

        let sys = CyclicBandSystem::factor(diag, lower, upper)?;
        let x = sys.solve(&rhs);
        let y = lu_solve(&dense, &rhs)?;
        let gap = x.iter().zip(&y).fold(0.0f64, |m, (a, c)| m.max((a - c).abs()));
        println!("{n:3} blocks of {b}x{b}: max difference from dense LU {gap:.2e}");
    }
    Ok(())
}
