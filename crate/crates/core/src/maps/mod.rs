//! Control-to-state maps `S: u ↦ y`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{check_dim, Error, Result};

pub mod pde;

pub use pde::{
    affinity_counterexample_controls, solve_obstacle_lcp, solve_parabolic_obstacle,
    solve_semilinear, Mesh1D, ParabolicGrid, ParabolicObstacleMap, SemilinearConfig, SemilinearMap,
    SemilinearSolve, Tridiagonal,
};

/// Evaluation contract for a control-to-state map.
///
/// Implementations must be reentrant: the solvers evaluate the same map from
/// several threads at once.
pub trait ControlToStateMap: Send + Sync + fmt::Debug {
    /// Short registry name, e.g. `"abs"`.
    fn name(&self) -> &str;

    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Declared metadata only; never inferred from evaluations.
    fn is_affine(&self) -> bool {
        false
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>>;
}

pub type SharedMap = Arc<dyn ControlToStateMap>;

/// Names accepted by the scenario loader.
pub const MAP_NAMES: [&str; 5] = [
    "affine",
    "abs",
    "square",
    "semilinear1d",
    "parabolic-obstacle",
];

/// `u ↦ K u + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    rows: usize,
    cols: usize,
    /// Row-major.
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(rows: usize, cols: usize, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "matrix",
                "affine map needs positive dimensions",
            ));
        }
        check_dim("affine matrix entries", rows * cols, matrix.len())?;
        check_dim("affine offset", rows, offset.len())?;
        Ok(AffineMap {
            rows,
            cols,
            matrix,
            offset,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], offset: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for r in rows {
            check_dim("affine matrix row", cols, r.len())?;
        }
        AffineMap::new(rows.len(), cols, rows.concat(), offset)
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        AffineMap {
            rows: dim,
            cols: dim,
            matrix,
            offset: vec![0.0; dim],
        }
    }
}

pub fn eval_affine(m: &AffineMap, u: &[f64]) -> Result<Vec<f64>> {
    check_dim("eval_affine", m.cols, u.len())?;
    Ok(m.matrix
        .chunks(m.cols)
        .zip(&m.offset)
        .map(|(row, c)| row.iter().zip(u).map(|(k, x)| k * x).sum::<f64>() + c)
        .collect())
}

impl ControlToStateMap for AffineMap {
    fn name(&self) -> &str {
        "affine"
    }

    fn input_dim(&self) -> usize {
        self.cols
    }

    fn output_dim(&self) -> usize {
        self.rows
    }

    fn is_affine(&self) -> bool {
        true
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        eval_affine(self, u)
    }
}

pub fn eval_abs(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| x.abs()).collect()
}

pub fn eval_square(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| x * x).collect()
}

/// Componentwise `|u|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbsMap {
    pub dim: usize,
}

impl ControlToStateMap for AbsMap {
    fn name(&self) -> &str {
        "abs"
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim("abs map", self.dim, u.len())?;
        Ok(eval_abs(u))
    }
}

/// Componentwise `u²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareMap {
    pub dim: usize,
}

impl ControlToStateMap for SquareMap {
    fn name(&self) -> &str {
        "square"
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim("square map", self.dim, u.len())?;
        Ok(eval_square(u))
    }
}

/// Memoizes evaluations of an expensive map, keyed by the exact bit
/// pattern of the control.
pub struct CachedMap<M> {
    inner: M,
    capacity: usize,
    cache: Mutex<HashMap<Vec<u64>, Vec<f64>>>,
}

impl<M: ControlToStateMap> CachedMap<M> {
    pub fn new(inner: M, capacity: usize) -> Self {
        CachedMap {
            inner,
            capacity,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn cached_len(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }
}

impl<M: ControlToStateMap> fmt::Debug for CachedMap<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CachedMap")
            .field("inner", &self.inner)
            .field("capacity", &self.capacity)
            .finish()
    }
}

impl<M: ControlToStateMap> ControlToStateMap for CachedMap<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn is_affine(&self) -> bool {
        self.inner.is_affine()
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let key: Vec<u64> = u.iter().map(|x| x.to_bits()).collect();
        if let Some(y) = self.cache.lock().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(y);
        }
        let y = self.inner.eval(u)?;
        if let Ok(mut cache) = self.cache.lock() {
            // Crude eviction: the cache only has to keep scans affordable.
            if cache.len() >= self.capacity {
                cache.clear();
            }
            cache.insert(key, y.clone());
        }
        Ok(y)
    }
}
