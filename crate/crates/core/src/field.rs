//! Piecewise-constant fields on a [`Grid`]: scalar, vector and matrix valued.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, Point};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> f64) -> Self {
        let values = grid.centers().iter().map(f).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.cell_count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same(self.len(), other.len())?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Copy of the field that vanishes outside the given cells.
    pub fn restrict(&self, cells: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for &i in cells {
            values[i] = self.values[i];
        }
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A field with values in ℝᵈ, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    d: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: &Grid, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("vector dimension must be positive".into()));
        }
        if values.len() != grid.cell_count() * d {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count() * d,
                found: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            d,
            values,
        })
    }

    pub fn zeros(grid: &Grid, d: usize) -> Self {
        Self {
            grid: grid.clone(),
            d,
            values: vec![0.0; grid.cell_count() * d],
        }
    }

    pub fn from_fn(grid: &Grid, d: usize, f: impl Fn(&Point) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.cell_count() * d);
        for p in grid.centers() {
            let v = f(&p);
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            values.extend(v);
        }
        Ok(Self {
            grid: grid.clone(),
            d,
            values,
        })
    }

    /// Stacks scalar fields as components.
    pub fn from_components(components: &[ScalarField]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("no components".into()))?;
        let d = components.len();
        let n = first.len();
        for c in components {
            check_same(n, c.len())?;
        }
        let mut values = Vec::with_capacity(n * d);
        for i in 0..n {
            for c in components {
                values.push(c.values[i]);
            }
        }
        Ok(Self {
            grid: first.grid.clone(),
            d,
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cell_count(&self) -> usize {
        self.values.len() / self.d
    }

    pub fn at(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.d..(cell + 1) * self.d]
    }

    pub fn at_mut(&mut self, cell: usize) -> &mut [f64] {
        &mut self.values[cell * self.d..(cell + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().skip(i).step_by(self.d).copied().collect(),
        }
    }

    /// Pointwise Euclidean length.
    pub fn pointwise_norm(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .chunks(self.d)
                .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
                .collect(),
        }
    }

    /// Pointwise ℓ¹ length.
    pub fn pointwise_l1(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .chunks(self.d)
                .map(|v| v.iter().map(|x| x.abs()).sum())
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            d: self.d,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        check_same(self.values.len(), other.values.len())?;
        Ok(Self {
            grid: self.grid.clone(),
            d: self.d,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Multiplies every vector by the scalar field value of its cell.
    pub fn mul_scalar_field(&self, s: &ScalarField) -> Result<Self> {
        check_same(self.cell_count(), s.len())?;
        let mut out = self.clone();
        for (i, chunk) in out.values.chunks_mut(self.d).enumerate() {
            for v in chunk {
                *v *= s.values[i];
            }
        }
        Ok(out)
    }

    pub fn restrict(&self, cells: &[usize]) -> Self {
        let mut out = Self::zeros(&self.grid, self.d);
        for &i in cells {
            out.at_mut(i).copy_from_slice(self.at(i));
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// A field of symmetric d×d matrices, stored row-major per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    grid: Grid,
    d: usize,
    values: Vec<f64>,
}

impl MatrixField {
    /// Validates symmetry (entrywise, relative to the cell's largest entry) and symmetrizes.
    pub fn new(grid: &Grid, d: usize, mut values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        let dd = d * d;
        if values.len() != grid.cell_count() * dd {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count() * dd,
                found: values.len(),
            });
        }
        for (cell, m) in values.chunks_mut(dd).enumerate() {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite matrix entry at cell {cell}")));
            }
            let scale = m.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            for i in 0..d {
                for j in (i + 1)..d {
                    let (a, b) = (m[i * d + j], m[j * d + i]);
                    if (a - b).abs() > SYMMETRY_TOL * scale {
                        return Err(Error::InvalidInput(format!(
                            "matrix at cell {cell} is not symmetric"
                        )));
                    }
                    let s = 0.5 * (a + b);
                    m[i * d + j] = s;
                    m[j * d + i] = s;
                }
            }
        }
        Ok(Self {
            grid: grid.clone(),
            d,
            values,
        })
    }

    pub fn from_fn(grid: &Grid, d: usize, f: impl Fn(&Point) -> DMatrix<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.cell_count() * d * d);
        for p in grid.centers() {
            let m = f(&p);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
            for i in 0..d {
                for j in 0..d {
                    values.push(m[(i, j)]);
                }
            }
        }
        Self::new(grid, d, values)
    }

    pub fn identity(grid: &Grid, d: usize) -> Self {
        Self::constant(grid, &DMatrix::identity(d, d))
    }

    /// Constant field; the matrix is assumed symmetric.
    pub fn constant(grid: &Grid, m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        let cell: Vec<f64> = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
        Self {
            grid: grid.clone(),
            d,
            values: cell.repeat(grid.cell_count()),
        }
    }

    /// The 1×1 field of a scalar weight.
    pub fn from_scalar(w: &ScalarField) -> Self {
        Self {
            grid: w.grid.clone(),
            d: 1,
            values: w.values.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cell_count(&self) -> usize {
        self.values.len() / (self.d * self.d)
    }

    /// Row-major entries of the matrix at `cell`.
    pub fn slice(&self, cell: usize) -> &[f64] {
        let dd = self.d * self.d;
        &self.values[cell * dd..(cell + 1) * dd]
    }

    pub fn at(&self, cell: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, self.slice(cell))
    }

    /// `W(x)·v` at a cell.
    pub fn apply(&self, cell: usize, v: &[f64]) -> Vec<f64> {
        let m = self.slice(cell);
        (0..self.d)
            .map(|i| (0..self.d).map(|j| m[i * self.d + j] * v[j]).sum())
            .collect()
    }

    /// `|W(x)v|` at a cell.
    pub fn apply_norm(&self, cell: usize, v: &[f64]) -> f64 {
        let m = self.slice(cell);
        let mut s = 0.0;
        for i in 0..self.d {
            let r: f64 = (0..self.d).map(|j| m[i * self.d + j] * v[j]).sum();
            s += r * r;
        }
        s.sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            d: self.d,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `Uᵀ W(x) U` for a constant matrix `U`.
    pub fn conjugate_by(&self, u: &DMatrix<f64>) -> Result<Self> {
        if u.nrows() != self.d || u.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: u.nrows(),
            });
        }
        let mut values = Vec::with_capacity(self.values.len());
        for cell in 0..self.cell_count() {
            let m = u.transpose() * self.at(cell) * u;
            for i in 0..self.d {
                for j in 0..self.d {
                    values.push(m[(i, j)]);
                }
            }
        }
        Self::new(&self.grid, self.d, values)
    }

    /// Applies the field cellwise to a vector field.
    pub fn apply_field(&self, f: &VectorField) -> Result<VectorField> {
        if f.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: f.dim(),
            });
        }
        check_same(self.cell_count(), f.cell_count())?;
        let mut values = Vec::with_capacity(f.values().len());
        for cell in 0..self.cell_count() {
            values.extend(self.apply(cell, f.at(cell)));
        }
        VectorField::new(&self.grid, self.d, values)
    }

    /// Pointwise `|W(x) f(x)|`.
    pub fn weighted_length(&self, f: &VectorField) -> Result<ScalarField> {
        if f.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: f.dim(),
            });
        }
        check_same(self.cell_count(), f.cell_count())?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: (0..self.cell_count())
                .map(|c| self.apply_norm(c, f.at(c)))
                .collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dvector(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}
