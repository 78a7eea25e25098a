//! Experiment configuration read from a TOML file.
//!
//! ```toml
//! seed = 7
//!
//! [grid]
//! dim = 1
//! lower = 0.0
//! upper = 1.0
//! cells = 64
//! offset = true          # shift the box by h/2, away from the origin
//!
//! [exponent]
//! kind = "affine"        # constant | affine | sine | step | table
//! base = 2.0
//! slope = 0.5
//!
//! [weight]
//! kind = "power"         # identity | power | diagonal | rotating | table
//! a = 0.25
//!
//! [family]
//! levels = [0, 3]
//! shifted = false
//!
//! [function]
//! kind = "jump"          # constant | random | abs | jump | gaussian | table
//! ```
//!
//! Sections `schedule`, `hw`, `truncate`, `avgbound` and `suite` hold the
//! parameters of the matching subcommand. Every field is listed in the README.

use std::path::{Path, PathBuf};

use matvar::exponent::ExponentFunction;
use matvar::field::{MatrixField, VectorField};
use matvar::grid::{dyadic_cubes, shifted_dyadic_cubes, CubeFamily, Grid, Point};
use matvar::muckenhoupt::{make_diagonal_weight, make_power_weight, make_rotating_weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub exponent: ExponentSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub family: FamilySpec,
    #[serde(default)]
    pub function: FunctionSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub hw: HwSpec,
    #[serde(default)]
    pub truncate: TruncateSpec,
    #[serde(default)]
    pub avgbound: AvgboundSpec,
    #[serde(default)]
    pub suite: SuiteSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(default)]
    pub lower: f64,
    #[serde(default = "one")]
    pub upper: f64,
    pub cells: usize,
    #[serde(default)]
    pub offset: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            lower: 0.0,
            upper: 1.0,
            cells: 64,
            offset: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant { value: f64 },
    /// `base + slope·x₀`.
    Affine { base: f64, slope: f64 },
    /// `base + amplitude·sin(frequency·x₀)`.
    Sine { base: f64, amplitude: f64, frequency: f64 },
    /// `below` for `x₀ < at`, `above` otherwise.
    Step { at: f64, below: f64, above: f64 },
    Table { values: Vec<f64> },
}

impl Default for ExponentSpec {
    fn default() -> Self {
        Self::Constant { value: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Identity {
        #[serde(default = "one_usize")]
        d: usize,
    },
    /// `|x|^a·I_d`.
    Power {
        a: f64,
        #[serde(default = "one_usize")]
        d: usize,
    },
    /// `diag(|x|^{a_1}, …, |x|^{a_d})`.
    Diagonal { exponents: Vec<f64> },
    /// `R(θ) diag(|x|^a, |x|^b) R(θ)ᵀ` with `θ = rate·x₀`.
    Rotating { a: f64, b: f64, rate: f64 },
    /// Row-major `d×d` blocks, one per cell.
    Table { d: usize, values: Vec<f64> },
}

fn one_usize() -> usize {
    1
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self::Identity { d: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_levels")]
    pub levels: [u32; 2],
    #[serde(default)]
    pub shifted: bool,
}

fn default_levels() -> [u32; 2] {
    [0, 3]
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            shifted: false,
        }
    }
}

/// Test functions. Component `i` of a `d`-vector field is the base profile divided by `i+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// Independent uniform values in `[−1, 1]`; needs a seed.
    Random,
    /// `|x₀ − center|`.
    Abs { center: f64 },
    /// `sin²(πx₀)(1 + jump·χ_{x₀ > at})`.
    Jump { at: f64, jump: f64 },
    /// `exp(−|x|²/2)`.
    Gaussian,
    /// Cell-major values, `d` per cell.
    Table { values: Vec<f64> },
}

impl Default for FunctionSpec {
    fn default() -> Self {
        Self::Jump { at: 0.5, jump: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Defaults to `2h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
}

fn default_t0() -> f64 {
    0.25
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            t0: default_t0(),
            t_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HwSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_shells")]
    pub shells: usize,
    #[serde(default = "default_halvings")]
    pub max_halvings: usize,
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_shells() -> usize {
    3
}

fn default_halvings() -> usize {
    20
}

impl Default for HwSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            shells: default_shells(),
            max_halvings: default_halvings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncateSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_ks")]
    pub ks: Vec<f64>,
}

fn default_ks() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
}

impl Default for TruncateSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            ks: default_ks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvgboundSpec {
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    50
}

impl Default for AvgboundSpec {
    fn default() -> Self {
        Self {
            trials: default_trials(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    /// Constant in the Hölder check.
    #[serde(default = "default_holder")]
    pub holder_constant: f64,
}

fn default_holder() -> f64 {
    4.0
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            holder_constant: default_holder(),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: None,
            grid: GridSpec::default(),
            exponent: ExponentSpec::default(),
            weight: WeightSpec::default(),
            family: FamilySpec::default(),
            function: FunctionSpec::default(),
            schedule: ScheduleSpec::default(),
            hw: HwSpec::default(),
            truncate: TruncateSpec::default(),
            avgbound: AvgboundSpec::default(),
            suite: SuiteSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The config as TOML, used for the manifest echo.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Static checks that do not need the numerical modules.
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if !(1..=3).contains(&g.dim) {
            return Err(field_err("grid.dim", format!("must be 1, 2 or 3, got {}", g.dim)));
        }
        if g.cells < 2 {
            return Err(field_err("grid.cells", format!("must be at least 2, got {}", g.cells)));
        }
        let [lo, hi] = self.family.levels;
        if lo > hi {
            return Err(field_err("family.levels", format!("[{lo}, {hi}] is not increasing")));
        }
        if !g.cells.is_multiple_of(1usize << hi.min(62)) || hi >= 62 {
            return Err(field_err(
                "family.levels",
                format!("dyadic level {hi} needs cells divisible by 2^{hi}, got {}", g.cells),
            ));
        }
        if self.family.shifted && hi >= 1 && !g.cells.is_multiple_of(1usize << (hi + 1).min(62)) {
            return Err(field_err(
                "family.shifted",
                format!("shifted level {hi} needs cells divisible by 2^{}", hi + 1),
            ));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid, CliError> {
        let g = &self.grid;
        let (lo, hi) = if g.offset {
            let h = (g.upper - g.lower) / g.cells as f64;
            (g.lower + 0.5 * h, g.upper + 0.5 * h)
        } else {
            (g.lower, g.upper)
        };
        Grid::new(&vec![lo; g.dim], &vec![hi; g.dim], g.cells).map_err(|e| field_err("grid", e.to_string()))
    }

    pub fn build_exponent(&self, grid: &Grid) -> Result<ExponentFunction, CliError> {
        let p = match &self.exponent {
            ExponentSpec::Constant { value } => ExponentFunction::constant(grid, *value),
            ExponentSpec::Affine { base, slope } => ExponentFunction::from_fn(grid, |x| base + slope * x[0]),
            ExponentSpec::Sine {
                base,
                amplitude,
                frequency,
            } => ExponentFunction::from_fn(grid, |x| base + amplitude * (frequency * x[0]).sin()),
            ExponentSpec::Step { at, below, above } => {
                ExponentFunction::from_fn(grid, |x| if x[0] < *at { *below } else { *above })
            }
            ExponentSpec::Table { values } => ExponentFunction::new(grid, values.clone()),
        };
        p.map_err(|e| field_err("exponent", e.to_string()))
    }

    pub fn weight_dim(&self) -> usize {
        match &self.weight {
            WeightSpec::Identity { d } | WeightSpec::Power { d, .. } | WeightSpec::Table { d, .. } => *d,
            WeightSpec::Diagonal { exponents } => exponents.len(),
            WeightSpec::Rotating { .. } => 2,
        }
    }

    pub fn build_weight(&self, grid: &Grid) -> Result<MatrixField, CliError> {
        let err = |e: matvar::Error| field_err("weight", e.to_string());
        match &self.weight {
            WeightSpec::Identity { d } => {
                check_d(*d)?;
                Ok(MatrixField::identity(grid, *d))
            }
            WeightSpec::Power { a, d } => {
                check_d(*d)?;
                if *d == 1 {
                    Ok(MatrixField::from_scalar(&make_power_weight(grid, *a).map_err(err)?))
                } else {
                    make_diagonal_weight(grid, &vec![*a; *d]).map_err(err)
                }
            }
            WeightSpec::Diagonal { exponents } => {
                check_d(exponents.len())?;
                make_diagonal_weight(grid, exponents).map_err(err)
            }
            WeightSpec::Rotating { a, b, rate } => make_rotating_weight(grid, |x: &Point| rate * x[0], *a, *b).map_err(err),
            WeightSpec::Table { d, values } => {
                check_d(*d)?;
                MatrixField::new(grid, *d, values.clone()).map_err(err)
            }
        }
    }

    pub fn build_family(&self, grid: &Grid) -> Result<CubeFamily, CliError> {
        let [lo, hi] = self.family.levels;
        let mut parts = Vec::new();
        for level in lo..=hi {
            let fam = if self.family.shifted && level > 0 {
                shifted_dyadic_cubes(grid, level)
            } else {
                dyadic_cubes(grid, level)
            };
            parts.push(fam.map_err(|e| field_err("family", e.to_string()))?);
        }
        Ok(CubeFamily::concat(&parts))
    }

    /// The configured test function with `d` components; `seed` drives the random kind.
    pub fn build_function(&self, grid: &Grid, d: usize, seed: Option<u64>) -> Result<VectorField, CliError> {
        let err = |e: matvar::Error| field_err("function", e.to_string());
        let scaled = |base: &dyn Fn(&Point) -> f64| {
            VectorField::from_fn(grid, d, |x| (0..d).map(|i| base(x) / (i + 1) as f64).collect())
        };
        match &self.function {
            FunctionSpec::Constant { value } => scaled(&|_| *value).map_err(err),
            FunctionSpec::Abs { center } => scaled(&|x| (x[0] - center).abs()).map_err(err),
            FunctionSpec::Jump { at, jump } => scaled(&|x| {
                let s = (std::f64::consts::PI * x[0]).sin();
                s * s * (1.0 + if x[0] > *at { *jump } else { 0.0 })
            })
            .map_err(err),
            FunctionSpec::Gaussian => scaled(&|x| (-0.5 * grid.norm(x).powi(2)).exp()).map_err(err),
            FunctionSpec::Random => {
                let seed = seed.ok_or_else(|| field_err("seed", "the random function needs a seed".into()))?;
                Ok(random_field(grid, d, seed))
            }
            FunctionSpec::Table { values } => VectorField::new(grid, d, values.clone()).map_err(err),
        }
    }
}

fn check_d(d: usize) -> Result<(), CliError> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(field_err("weight.d", format!("must be 1, 2 or 3, got {d}")))
    }
}

fn field_err(field: &str, msg: String) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

/// Uniform values in `[−1, 1]` from a ChaCha8 stream.
pub fn random_field(grid: &Grid, d: usize, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.cell_count() * d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    VectorField::new(grid, d, values).expect("length matches the grid")
}
