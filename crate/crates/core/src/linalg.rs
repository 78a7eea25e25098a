//! Small dense matrix helpers on row-major slices.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

/// `a·b` for row-major `r×k` and `k×c` matrices.
pub fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize, out: &mut [f64]) {
    for i in 0..r {
        for j in 0..c {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i * k + l] * b[l * c + j];
            }
            out[i * c + j] = s;
        }
    }
}

/// Largest singular value of a row-major `r×c` matrix.
pub fn op_norm(a: &[f64], r: usize, c: usize) -> f64 {
    match (r, c) {
        (1, _) | (_, 1) => a.iter().map(|x| x * x).sum::<f64>().sqrt(),
        (2, 2) => {
            let (p, q, s, t) = (a[0], a[1], a[2], a[3]);
            let u = (p + t).hypot(s - q);
            let v = (p - t).hypot(q + s);
            0.5 * (u + v)
        }
        _ => {
            // eigenvalues of the smaller Gram matrix
            let (n, gram) = if r <= c {
                let mut g = vec![0.0; r * r];
                for i in 0..r {
                    for j in 0..r {
                        g[i * r + j] = (0..c).map(|l| a[i * c + l] * a[j * c + l]).sum();
                    }
                }
                (r, g)
            } else {
                let mut g = vec![0.0; c * c];
                for i in 0..c {
                    for j in 0..c {
                        g[i * c + j] = (0..r).map(|l| a[l * c + i] * a[l * c + j]).sum();
                    }
                }
                (c, g)
            };
            let top = if n == 3 {
                Matrix3::from_row_slice(&gram)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .fold(0.0, f64::max)
            } else {
                SymmetricEigen::new(DMatrix::from_row_slice(n, n, &gram))
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(0.0, f64::max)
            };
            top.max(0.0).sqrt()
        }
    }
}

/// Eigenvalues (ascending) and matching unit eigenvectors (columns) of a symmetric matrix.
pub fn sym_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `U f(Λ) Uᵀ` for a symmetric matrix.
pub fn sym_apply(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, u) = sym_eigen(a);
    let n = a.nrows();
    let mut d = DMatrix::zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = f(*v);
    }
    &u * d * u.transpose()
}

/// Rotation by `theta` in the plane.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn svd_norm(a: &[f64], r: usize, c: usize) -> f64 {
        DMatrix::from_row_slice(r, c, a)
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    #[test]
    fn op_norm_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (r, c) in [(1, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2), (3, 3), (4, 4)] {
            for _ in 0..50 {
                let a: Vec<f64> = (0..r * c).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let got = op_norm(&a, r, c);
                let want = svd_norm(&a, r, c);
                assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{r}x{c}");
            }
        }
    }

    #[test]
    fn sym_apply_inverse_sqrt() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sym_apply(&a, f64::sqrt);
        assert!((&s * &s - &a).abs().max() < 1e-12);
    }
}
