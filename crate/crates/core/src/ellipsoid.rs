//! Minimum-volume enclosing ellipsoid of a centrally symmetric point set.
//!
//! Khachiyan's barycentric ascent with Todd–Yildirim away steps. For the set
//! `{±q_i}` the optimal ellipsoid is centered, `E = {v : vᵀX⁻¹v ≤ d}` with
//! `X = Σ u_i q_i q_iᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mvee {
    /// `X = Σ u_i q_i q_iᵀ`.
    pub shape: DMatrix<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Mvee {
    /// `M₀` with `E = {v : |M₀v| ≤ 1}`, i.e. `M₀ = (X⁻¹/d)^{1/2}`.
    pub fn unit_ball_map(&self) -> Result<DMatrix<f64>> {
        let d = self.shape.nrows() as f64;
        let (vals, _) = crate::linalg::sym_eigen(&self.shape);
        if vals[0] <= 0.0 {
            return Err(Error::DegenerateSample("ellipsoid shape is singular".into()));
        }
        Ok(crate::linalg::sym_apply(&self.shape, |l| (1.0 / (l * d)).sqrt()))
    }
}

fn leverages(points: &[DVector<f64>], xinv: &DMatrix<f64>) -> Vec<f64> {
    points.iter().map(|q| q.dot(&(xinv * q))).collect()
}

fn shape(points: &[DVector<f64>], u: &[f64], d: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(d, d);
    for (q, &w) in points.iter().zip(u) {
        if w > 0.0 {
            x.ger(w, q, q, 1.0);
        }
    }
    x
}

/// Centered MVEE of `{±q_i}`; stops when `max κ ≤ (1+tol)d` and `min_{u_i>0} κ ≥ (1−tol)d`.
pub fn mvee_centered(points: &[DVector<f64>], tol: f64, max_iter: usize) -> Result<Mvee> {
    let d = points
        .first()
        .ok_or_else(|| Error::DegenerateSample("empty point set".into()))?
        .len();
    let n = points.len();
    let mut u = vec![1.0 / n as f64; n];
    let mut x = shape(points, &u, d);
    let df = d as f64;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let xinv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateSample("sample does not span ℝᵈ".into()))?;
        let (vals, _) = crate::linalg::sym_eigen(&x);
        if vals[0] <= 1e-14 * vals[d - 1] {
            return Err(Error::DegenerateSample("sample does not span ℝᵈ".into()));
        }
        let k = leverages(points, &xinv);
        let (jmax, kmax) = k
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let (jmin, kmin) = k
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        if kmax <= (1.0 + tol) * df && kmin >= (1.0 - tol) * df {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;
        let (j, kj) = if kmax - df >= df - kmin { (jmax, kmax) } else { (jmin, kmin) };
        let mut alpha = (kj - df) / (df * (kj - 1.0));
        if alpha < 0.0 {
            alpha = alpha.max(-u[j] / (1.0 - u[j]));
        }
        for w in u.iter_mut() {
            *w *= 1.0 - alpha;
        }
        u[j] += alpha;
        if u[j] < 1e-300 {
            u[j] = 0.0;
        }
        // periodic rebuild guards against drift from the rank-one updates
        if iterations % 64 == 0 {
            x = shape(points, &u, d);
        } else {
            x *= 1.0 - alpha;
            x.ger(alpha, &points[j], &points[j], 1.0);
        }
    }
    Ok(Mvee {
        shape: shape(points, &u, d),
        weights: u,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_vertices_give_circle() {
        let pts = vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![1.0, -1.0])];
        let e = mvee_centered(&pts, 1e-12, 10_000).unwrap();
        let m0 = e.unit_ball_map().unwrap();
        let want = DMatrix::identity(2, 2) / 2f64.sqrt();
        assert!((m0 - want).abs().max() < 1e-9);
    }

    #[test]
    fn rank_deficient_rejected() {
        let pts = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![2.0, 0.0])];
        assert!(matches!(
            mvee_centered(&pts, 1e-9, 100),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn ellipse_points_reproduce_ellipse() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let pts: Vec<_> = (0..64)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 64.0;
                let u = DVector::from_vec(vec![t.cos(), t.sin()]);
                let r = (&a * &u).norm();
                u / r
            })
            .collect();
        let e = mvee_centered(&pts, 1e-9, 100_000).unwrap();
        assert!(e.converged);
        let m0 = e.unit_ball_map().unwrap();
        assert!((m0 - a).abs().max() < 1e-6);
    }
}
