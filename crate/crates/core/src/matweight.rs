//! Pointwise spectral algebra of matrix weights and reducing operators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ellipsoid::mvee_centered;
use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::field::{MatrixField, ScalarField};
use crate::grid::Cube;
use crate::linalg;
use crate::varnorm::{NormOptions, Terms};

/// Smallest eigenvalue accepted by [`inverse`].
pub const SINGULAR_EIGENVALUE: f64 = 1e-14;
pub const FIT_TOL: f64 = 1e-9;
const FIT_MAX_ITER: usize = 200_000;

/// Largest eigenvalue (in modulus) per cell.
pub fn op_norm(w: &MatrixField) -> ScalarField {
    let d = w.dim();
    let values = (0..w.cell_count())
        .map(|c| linalg::op_norm(w.slice(c), d, d))
        .collect();
    ScalarField::new(w.grid(), values).expect("one value per cell")
}

/// Per-cell eigendecomposition `W = U Λ Uᵀ` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralField {
    d: usize,
    vectors: Vec<DMatrix<f64>>,
    values: Vec<DVector<f64>>,
}

impl SpectralField {
    pub fn u(&self, cell: usize) -> &DMatrix<f64> {
        &self.vectors[cell]
    }

    pub fn lambda(&self, cell: usize) -> &DVector<f64> {
        &self.values[cell]
    }

    pub fn reconstruct(&self, cell: usize) -> DMatrix<f64> {
        let u = &self.vectors[cell];
        u * DMatrix::from_diagonal(&self.values[cell]) * u.transpose()
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

pub fn eigendecompose(w: &MatrixField) -> SpectralField {
    let mut vectors = Vec::with_capacity(w.cell_count());
    let mut values = Vec::with_capacity(w.cell_count());
    for c in 0..w.cell_count() {
        let (vals, u) = linalg::sym_eigen(&w.at(c));
        vectors.push(u);
        values.push(DVector::from_vec(vals));
    }
    SpectralField {
        d: w.dim(),
        vectors,
        values,
    }
}

/// Pointwise inverse through reciprocal eigenvalues.
pub fn inverse(w: &MatrixField) -> Result<MatrixField> {
    let d = w.dim();
    let mut out = Vec::with_capacity(w.values().len());
    for c in 0..w.cell_count() {
        if d == 1 {
            let v = w.slice(c)[0];
            if v <= SINGULAR_EIGENVALUE {
                return Err(Error::SingularWeight {
                    cell: c,
                    detail: format!("value {v:e}"),
                });
            }
            out.push(1.0 / v);
            continue;
        }
        let (vals, u) = linalg::sym_eigen(&w.at(c));
        if vals[0] <= SINGULAR_EIGENVALUE {
            return Err(Error::SingularWeight {
                cell: c,
                detail: format!("smallest eigenvalue {:e}", vals[0]),
            });
        }
        let inv = &u * DMatrix::from_diagonal(&DVector::from_iterator(d, vals.iter().map(|l| 1.0 / l))) * u.transpose();
        for i in 0..d {
            for j in 0..d {
                out.push(inv[(i, j)]);
            }
        }
    }
    MatrixField::new(w.grid(), d, out)
}

/// `v ↦ |Q|^{-1/p_Q} ‖ |W(·)v| χ_Q ‖_{p(·)}`.
#[derive(Debug, Clone)]
pub struct NormSampler<'a> {
    w: &'a MatrixField,
    p: &'a ExponentFunction,
    cells: Vec<usize>,
    scale: f64,
    opts: NormOptions,
}

impl<'a> NormSampler<'a> {
    pub fn new(w: &'a MatrixField, p: &'a ExponentFunction, q: &Cube) -> Result<Self> {
        let cells = q.cells(w.grid());
        if cells.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let measure = cells.len() as f64 * w.grid().cell_volume();
        let p_q = p.harmonic_mean_cells(&cells)?;
        Ok(Self {
            w,
            p,
            cells,
            scale: measure.powf(-1.0 / p_q),
            opts: NormOptions::precise(),
        })
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        let mut t = Terms::with_capacity(self.cells.len());
        for &c in &self.cells {
            t.push(self.w.apply_norm(c, v), self.p.value(c));
        }
        let g = self.w.grid();
        self.scale * t.norm(g.cell_volume(), g.volume(), &self.opts).value
    }
}

/// Fitting directions: `πi/64` in the plane, 512 Fibonacci points on the sphere.
pub fn fit_directions(d: usize) -> Result<Vec<DVector<f64>>> {
    match d {
        1 => Ok(vec![DVector::from_vec(vec![1.0])]),
        2 => Ok((0..64)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 64.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect()),
        3 => {
            let n = 512;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect())
        }
        _ => Err(Error::InvalidInput(format!(
            "ellipsoid fitting supports d = 1, 2, 3, got {d}"
        ))),
    }
}

/// Uniformly random unit directions from a seeded generator.
pub fn random_directions(d: usize, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v = match d {
            1 => vec![1.0],
            2 => {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                vec![t.cos(), t.sin()]
            }
            3 => {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                vec![r * phi.cos(), r * phi.sin(), z]
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "direction sampling supports d = 1, 2, 3, got {d}"
                )))
            }
        };
        out.push(DVector::from_vec(v));
    }
    Ok(out)
}

/// Empirical range of `|Mv| / ⟨r⟩(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub min: f64,
    pub max: f64,
}

pub fn sandwich(
    m: &DMatrix<f64>,
    r: &dyn Fn(&[f64]) -> f64,
    directions: &[DVector<f64>],
) -> Result<Sandwich> {
    let mut s = Sandwich {
        min: f64::INFINITY,
        max: 0.0,
    };
    for u in directions {
        let ru = r(u.as_slice());
        if !(ru > 0.0 && ru.is_finite()) {
            return Err(Error::DegenerateSample(format!("⟨r⟩ = {ru} on a unit direction")));
        }
        let ratio = (m * u).norm() / ru;
        s.min = s.min.min(ratio);
        s.max = s.max.max(ratio);
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct JohnFit {
    /// The fitted matrix, with `⟨r⟩(v) ≤ |Mv| ≤ √d·⟨r⟩(v)` on the sample.
    pub m: DMatrix<f64>,
    /// `E = {v : |M₀v| ≤ 1}` encloses the sampled unit sphere of `⟨r⟩`.
    pub m0: DMatrix<f64>,
    pub certificate: Sandwich,
    pub iterations: usize,
}

/// Fits an SPD matrix to a symmetric norm sampled along [`fit_directions`].
///
/// The Löwner ellipsoid of the sampled unit sphere gives `M₀` with ratios
/// `|M₀u|/⟨r⟩(u)` in `[1/√d, 1]`. The returned `M = s·M₀` uses the scale that puts the
/// sampled range symmetrically (in log scale) inside `[1, √d]`, which leaves room on
/// both sides for directions between the samples. For `d = 1` the fit is exact.
pub fn john_fit(r: &dyn Fn(&[f64]) -> f64, d: usize) -> Result<JohnFit> {
    let dirs = fit_directions(d)?;
    if d == 1 {
        let v = r(&[1.0]);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateSample(format!("⟨r⟩(1) = {v}")));
        }
        let m = DMatrix::from_element(1, 1, v);
        return Ok(JohnFit {
            m0: m.clone(),
            m,
            certificate: Sandwich { min: 1.0, max: 1.0 },
            iterations: 0,
        });
    }
    let mut points = Vec::with_capacity(dirs.len());
    for u in &dirs {
        let ru = r(u.as_slice());
        if !(ru > 0.0 && ru.is_finite()) {
            return Err(Error::DegenerateSample(format!("⟨r⟩ = {ru} on a unit direction")));
        }
        points.push(u / ru);
    }
    let e = mvee_centered(&points, FIT_TOL, FIT_MAX_ITER)?;
    let mut m0 = e.unit_ball_map()?;
    let reach = points.iter().map(|q| (&m0 * q).norm()).fold(0.0, f64::max);
    if reach > 1.0 {
        m0 /= reach;
    }
    let base = sandwich(&m0, r, &dirs)?;
    let s = ((d as f64).sqrt() / (base.min * base.max)).sqrt();
    let m = &m0 * s;
    Ok(JohnFit {
        certificate: Sandwich {
            min: base.min * s,
            max: base.max * s,
        },
        m,
        m0,
        iterations: e.iterations,
    })
}

#[derive(Debug, Clone)]
pub struct ReducingOperator {
    pub cube: Cube,
    pub m: DMatrix<f64>,
    pub certificate: Sandwich,
}

/// The reducing operator of `⟨r⟩_{p(·),Q}`.
pub fn reducing_operator(w: &MatrixField, p: &ExponentFunction, q: &Cube) -> Result<ReducingOperator> {
    let sampler = NormSampler::new(w, p, q)?;
    let fit = john_fit(&|v| sampler.eval(v), w.dim())?;
    Ok(ReducingOperator {
        cube: q.clone(),
        m: fit.m,
        certificate: fit.certificate,
    })
}

/// The reducing operator of `⟨r*⟩_{p'(·),Q}` built from `W⁻¹`.
pub fn dual_reducing_operator(w: &MatrixField, p: &ExponentFunction, q: &Cube) -> Result<ReducingOperator> {
    let winv = inverse(w)?;
    reducing_operator(&winv, &p.conjugate(), q)
}

/// Sandwich range of a reducing operator on fresh random directions.
pub fn held_out_certificate(
    w: &MatrixField,
    p: &ExponentFunction,
    op: &ReducingOperator,
    count: usize,
    seed: u64,
) -> Result<Sandwich> {
    let sampler = NormSampler::new(w, p, &op.cube)?;
    let dirs = random_directions(w.dim(), count, seed)?;
    sandwich(&op.m, &|v| sampler.eval(v), &dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn spectral_examples() {
        let g = Grid::unit(1, 4).unwrap();
        let w = MatrixField::constant(&g, &diag(&[2.0, 3.0]));
        assert!(op_norm(&w).values().iter().all(|&v| (v - 3.0).abs() < 1e-15));
        let id = MatrixField::identity(&g, 2);
        assert_eq!(inverse(&id).unwrap(), id);
        let e = eigendecompose(&id);
        assert!((e.u(0).clone().abs() - DMatrix::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn singular_cell_named() {
        let g = Grid::unit(1, 4).unwrap();
        let w = MatrixField::from_fn(&g, 2, |x| if x[0] > 0.5 && x[0] < 0.7 { diag(&[1.0, 0.0]) } else { diag(&[1.0, 1.0]) }).unwrap();
        assert!(matches!(inverse(&w), Err(Error::SingularWeight { cell: 2, .. })));
    }

    #[test]
    fn ellipsoidal_norm_recovered() {
        let a = diag(&[1.0, 2.0]);
        let fit = john_fit(&|v| (&a * DVector::from_column_slice(v)).norm(), 2).unwrap();
        assert!((&fit.m0 - &a).abs().max() < 1e-6);
        assert!(fit.certificate.min >= 1.0 - 1e-12);
        assert!(fit.certificate.max <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn sup_norm_square() {
        let fit = john_fit(&|v| v[0].abs().max(v[1].abs()), 2).unwrap();
        let want = DMatrix::identity(2, 2) / 2f64.sqrt();
        assert!((&fit.m0 - want).abs().max() < 1e-6);
        assert_abs_diff_eq!(fit.certificate.max, 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(fit.certificate.min, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn one_dimensional_reduction_is_exact() {
        let g = Grid::unit(1, 64).unwrap();
        let w = MatrixField::from_scalar(&ScalarField::from_fn(&g, |x| x[0]));
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let q = Cube::new(&[0.0], 1.0).unwrap();
        let r = reducing_operator(&w, &p, &q).unwrap();
        // midpoint rule for ∫x² on 64 cells
        let oracle = ((1.0 / 3.0 - 1.0 / (12.0 * 64.0 * 64.0)) as f64).sqrt();
        assert_abs_diff_eq!(r.m[(0, 0)], oracle, epsilon = 1e-12);
        assert!((r.m[(0, 0)] - 1.0 / 3f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn scalar_multiple_of_identity() {
        let g = Grid::unit(2, 8).unwrap();
        let p = ExponentFunction::constant(&g, 3.0).unwrap();
        let w = MatrixField::constant(&g, &(DMatrix::identity(2, 2) * 5.0));
        let q = Cube::new(&[0.0, 0.0], 1.0).unwrap();
        let r = reducing_operator(&w, &p, &q).unwrap();
        let want = DMatrix::identity(2, 2) * 5.0 * 2f64.powf(0.25);
        assert!((&r.m - want).abs().max() < 1e-8);
        let dual = dual_reducing_operator(&MatrixField::identity(&g, 2), &p, &q).unwrap();
        let primal = reducing_operator(&MatrixField::identity(&g, 2), &p, &q).unwrap();
        assert!((&dual.m - &primal.m).abs().max() < 1e-8);
    }

    #[test]
    fn fewer_than_full_rank_rejected() {
        assert!(john_fit(&|v| v[0].abs(), 2).is_err());
    }
}
