//! JSON scenario files: a map, a tracking problem, solver settings and one
//! experiment.
//!
//! ```json
//! {
//!   "name": "abs-ridge",
//!   "map": { "kind": "abs", "dim": 1 },
//!   "problem": { "y_d": [1.0], "u_d": [0.0], "p": 2, "nu": 1 },
//!   "solver": { "n_starts": 64, "seed": 1, "bounds": { "lo": -2, "hi": 2 } },
//!   "experiment": { "kind": "solve" }
//! }
//! ```
//!
//! Vectors are given either explicitly or as a profile,
//! `{"profile": "sine", "amplitude": a}` (`a·sin(πx)` at the node
//! coordinates of the space) or `{"profile": "constant", "value": c}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::explorer::{
    affinity_defect, chebyshev_scan, discontinuity_witness, find_nonunique_target,
    linearity_defect, linf_demo, semilinear_default_path, symmetric_path, tikhonov_sweep,
    verify_segment_uniqueness, LinfDemoReport, NonuniqueTarget, OracleCheck, ScanAxis, ScanReport,
    SegmentReport, SweepRow, TargetGrid, TargetPath, WitnessReport,
};
use crate::maps::{
    affinity_counterexample_controls, AbsMap, AffineMap, Mesh1D, ParabolicGrid,
    ParabolicObstacleMap, SemilinearConfig, SemilinearMap, SharedMap, SquareMap,
};
use crate::problem::{rescale_nu, TargetTuple, TrackingProblem};
use crate::report::{multistart_csv, scan_csv, to_json_string, write_file};
use crate::solver::{
    multistart, Bounds, ClusterOptions, LocalOptions, MultistartOptions, MultistartReport,
};
use crate::spaces::{GridNorm, Norm, WeightedNorm};

/// Experiment names accepted in `experiment.kind`.
pub const EXPERIMENT_NAMES: [&str; 8] = [
    "solve",
    "scan",
    "find-nonunique",
    "segment",
    "witness",
    "affinity",
    "sweep-nu",
    "linf-demo",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub map: MapSpec,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
    Abs {
        dim: usize,
    },
    Square {
        dim: usize,
    },
    #[serde(rename = "semilinear1d")]
    Semilinear1d {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        newton_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iter: Option<usize>,
    },
    ParabolicObstacle {
        n: usize,
        n_t: usize,
        t_final: f64,
        /// Half-open range of interior node indices carrying the control.
        control_window: [usize; 2],
        psi: VectorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psor_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psor_max_iter: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Values(Vec<f64>),
    Profile(Profile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Sine { amplitude: f64 },
    Constant { value: f64 },
}

impl VectorSpec {
    pub fn zero() -> Self {
        VectorSpec::Profile(Profile::Constant { value: 0.0 })
    }

    /// Materializes the vector on a space with the given node coordinates.
    pub fn resolve(&self, what: &str, coords: &[f64]) -> Result<Vec<f64>> {
        let v = match self {
            VectorSpec::Values(v) => {
                if v.len() != coords.len() {
                    return Err(Error::Scenario(format!(
                        "{what} has {} entries, the space has dimension {}",
                        v.len(),
                        coords.len()
                    )));
                }
                v.clone()
            }
            VectorSpec::Profile(Profile::Sine { amplitude }) => coords
                .iter()
                .map(|x| amplitude * (std::f64::consts::PI * x).sin())
                .collect(),
            VectorSpec::Profile(Profile::Constant { value }) => vec![*value; coords.len()],
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Scenario(format!("{what} has non-finite entries")));
        }
        Ok(v)
    }
}

fn zero_vector() -> VectorSpec {
    VectorSpec::zero()
}

fn default_p() -> f64 {
    2.0
}

fn default_nu() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub y_d: VectorSpec,
    #[serde(default = "zero_vector")]
    pub u_d: VectorSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Tikhonov weight, folded into the control norm.
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Defaults to Euclidean for finite-dimensional maps and to the grid
    /// norm for discretized PDE maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_norm: Option<NormSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_norm: Option<NormSpec>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    /// `√(scale·xᵀx)`.
    Euclidean {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `√(scale·xᵀWx)`.
    Weighted {
        weight: Vec<Vec<f64>>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `(scale·h·Σ|xᵢ|^q)^{1/q}`, `h` taken from the discretization.
    Grid {
        #[serde(default = "one")]
        scale: f64,
        /// Defaults to the problem exponent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundsSpec {
    Uniform { lo: f64, hi: f64 },
    Explicit { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub n_starts: usize,
    #[serde(default)]
    pub seed: u64,
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub local: LocalOptions,
    #[serde(default)]
    pub cluster: ClusterOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Explicit {
        start: TargetSpec,
        end: TargetSpec,
    },
    /// `u_d` from `−w` to `w` in every component at the problem's `y_d`.
    Symmetric {
        half_width: f64,
    },
    /// The sine-profile path of the semilinear map; `weight_ratio` (control
    /// over state weight) defaults to the problem's `nu`.
    SemilinearSine {
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight_ratio: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub y_d: VectorSpec,
    pub u_d: VectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub label: String,
    #[serde(default = "zero_vector")]
    pub y_d: VectorSpec,
    #[serde(default = "zero_vector")]
    pub u_d: VectorSpec,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

fn default_bisect_tol() -> f64 {
    1e-10
}

fn default_t_values() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn default_t_sequence() -> Vec<f64> {
    (1..=8).map(|n| 0.5f64.powi(n)).collect()
}

fn default_oracle_tol() -> f64 {
    1e-6
}

fn default_lambdas() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn default_resolution() -> usize {
    301
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    Solve,
    Scan {
        axes: Vec<AxisSpec>,
    },
    FindNonunique {
        path: PathSpec,
        #[serde(default = "default_bisect_tol")]
        bisect_tol: f64,
    },
    Segment {
        path: PathSpec,
        #[serde(default = "default_bisect_tol")]
        bisect_tol: f64,
        #[serde(default = "default_t_values")]
        t_values: Vec<f64>,
        /// Grid points per dimension of the brute-force cross-check; off
        /// when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle_points: Option<usize>,
        #[serde(default = "default_oracle_tol")]
        oracle_tol: f64,
    },
    Witness {
        path: PathSpec,
        #[serde(default = "default_bisect_tol")]
        bisect_tol: f64,
        #[serde(default = "default_t_sequence")]
        t_sequence: Vec<f64>,
    },
    /// Either `u1` and `u2`, or `z` for the semilinear pair
    /// `u₁ = 2(−Δ_h z + z)`, `u₂ = 2Δ_h z`.
    Affinity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u1: Option<VectorSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u2: Option<VectorSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<VectorSpec>,
        #[serde(default = "default_lambdas")]
        lambdas: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        alphas: Vec<f64>,
    },
    SweepNu {
        nus: Vec<f64>,
    },
    LinfDemo {
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Solve => "solve",
            ExperimentSpec::Scan { .. } => "scan",
            ExperimentSpec::FindNonunique { .. } => "find-nonunique",
            ExperimentSpec::Segment { .. } => "segment",
            ExperimentSpec::Witness { .. } => "witness",
            ExperimentSpec::Affinity { .. } => "affinity",
            ExperimentSpec::SweepNu { .. } => "sweep-nu",
            ExperimentSpec::LinfDemo { .. } => "linf-demo",
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        ScenarioConfig::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> Result<String> {
        let canonical = to_json_string(self)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    /// Builds everything the experiment needs without running it.
    pub fn prepare(&self) -> Result<Prepared> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        {
            return Err(Error::Scenario(format!(
                "name {:?} must be nonempty and use only letters, digits, '-', '_' or '.'",
                self.name
            )));
        }
        let space = Space::from_map(&self.map)?;
        let problem = self.problem.build(&space)?;
        let opts = self.solver.build(problem.dim())?;
        let prepared = Prepared {
            space,
            problem,
            opts,
        };
        prepared.check_experiment(&self.experiment, &self.problem)?;
        Ok(prepared)
    }
}

/// Node coordinates and grid measures of a map's state and control spaces.
#[derive(Debug, Clone)]
pub struct Space {
    pub map: SharedMap,
    pub state_coords: Vec<f64>,
    pub control_coords: Vec<f64>,
    /// `(state measure, control measure)` for grid norms.
    pub grid_measure: Option<(f64, f64)>,
    pub mesh: Option<Mesh1D>,
}

fn unit_coords(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

impl Space {
    pub fn from_map(spec: &MapSpec) -> Result<Self> {
        let finite = |map: SharedMap| -> Result<Space> {
            if map.input_dim() == 0 || map.output_dim() == 0 {
                return Err(Error::Scenario("map dimension must be positive".into()));
            }
            Ok(Space {
                state_coords: unit_coords(map.output_dim()),
                control_coords: unit_coords(map.input_dim()),
                map,
                grid_measure: None,
                mesh: None,
            })
        };
        match spec {
            MapSpec::Affine { matrix, offset } => {
                let rows = matrix.len();
                let offset = offset.clone().unwrap_or_else(|| vec![0.0; rows]);
                finite(Arc::new(AffineMap::from_rows(matrix, offset)?))
            }
            MapSpec::Abs { dim } => finite(Arc::new(AbsMap { dim: *dim })),
            MapSpec::Square { dim } => finite(Arc::new(SquareMap { dim: *dim })),
            MapSpec::Semilinear1d {
                n,
                newton_tol,
                max_iter,
            } => {
                let mesh = Mesh1D::new(*n)?;
                let mut config = SemilinearConfig::new(mesh);
                if let Some(t) = newton_tol {
                    config.newton_tol = *t;
                }
                if let Some(m) = max_iter {
                    config.max_iter = *m;
                }
                config.validate()?;
                Ok(Space {
                    map: Arc::new(SemilinearMap { config }),
                    state_coords: mesh.nodes(),
                    control_coords: mesh.nodes(),
                    grid_measure: Some((mesh.h(), mesh.h())),
                    mesh: Some(mesh),
                })
            }
            MapSpec::ParabolicObstacle {
                n,
                n_t,
                t_final,
                control_window,
                psi,
                psor_tol,
                psor_max_iter,
            } => {
                let mesh = Mesh1D::new(*n)?;
                let nodes = mesh.nodes();
                let psi = psi.resolve("psi", &nodes)?;
                let window = control_window[0]..control_window[1];
                let grid = ParabolicGrid::new(mesh, *t_final, *n_t, window.clone(), psi)?;
                let mut map = ParabolicObstacleMap::new(grid);
                if let Some(t) = psor_tol {
                    if !(*t > 0.0) {
                        return Err(Error::Scenario("psor_tol must be positive".into()));
                    }
                    map.psor_tol = *t;
                }
                if let Some(m) = psor_max_iter {
                    map.psor_max_iter = *m;
                }
                let tau = map.grid.tau();
                let control_coords = (0..*n_t)
                    .flat_map(|_| nodes[window.clone()].to_vec())
                    .collect();
                Ok(Space {
                    map: Arc::new(map),
                    state_coords: nodes,
                    control_coords,
                    grid_measure: Some((mesh.h(), tau * mesh.h())),
                    mesh: Some(mesh),
                })
            }
        }
    }
}

impl NormSpec {
    fn build(&self, dim: usize, measure: Option<f64>, p: f64) -> Result<Norm> {
        Ok(match self {
            NormSpec::Euclidean { scale } => WeightedNorm::identity(dim, *scale)?.into(),
            NormSpec::Weighted { weight, scale } => {
                if weight.len() != dim {
                    return Err(Error::Scenario(format!(
                        "weight matrix has {} rows, the space has dimension {dim}",
                        weight.len()
                    )));
                }
                WeightedNorm::from_rows(weight, *scale)?.into()
            }
            NormSpec::Grid { scale, exponent } => {
                let h = measure
                    .ok_or_else(|| Error::Scenario("grid norms need a discretized map".into()))?;
                GridNorm::with_scale(h, exponent.unwrap_or(p), *scale)?.into()
            }
        })
    }
}

impl ProblemSpec {
    fn build(&self, space: &Space) -> Result<TrackingProblem> {
        let y_d = self.y_d.resolve("y_d", &space.state_coords)?;
        let u_d = self.u_d.resolve("u_d", &space.control_coords)?;
        let default = if space.grid_measure.is_some() {
            NormSpec::Grid {
                scale: 1.0,
                exponent: None,
            }
        } else {
            NormSpec::Euclidean { scale: 1.0 }
        };
        let state = self.state_norm.as_ref().unwrap_or(&default).build(
            y_d.len(),
            space.grid_measure.map(|m| m.0),
            self.p,
        )?;
        let control = self.control_norm.as_ref().unwrap_or(&default).build(
            u_d.len(),
            space.grid_measure.map(|m| m.1),
            self.p,
        )?;
        let base = TrackingProblem::new(
            Arc::clone(&space.map),
            TargetTuple::new(y_d, u_d),
            self.p,
            state,
            control,
        )?;
        rescale_nu(&base, self.nu)
    }
}

impl SolverSpec {
    fn build(&self, dim: usize) -> Result<MultistartOptions> {
        let bounds = match &self.bounds {
            BoundsSpec::Uniform { lo, hi } => Bounds::uniform(dim, *lo, *hi)?,
            BoundsSpec::Explicit { lower, upper } => Bounds::new(lower.clone(), upper.clone())?,
        };
        if bounds.dim() != dim {
            return Err(Error::Scenario(format!(
                "bounds have dimension {}, the control space has dimension {dim}",
                bounds.dim()
            )));
        }
        if self.n_starts == 0 {
            return Err(Error::Scenario("n_starts must be at least 1".into()));
        }
        self.local.validate()?;
        let c = &self.cluster;
        if !(c.tol_u > 0.0 && c.tol_j > 0.0) {
            return Err(Error::Scenario(
                "cluster tolerances must be positive".into(),
            ));
        }
        Ok(MultistartOptions {
            n_starts: self.n_starts,
            seed: self.seed,
            bounds,
            local: self.local,
            cluster: self.cluster,
        })
    }
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub space: Space,
    pub problem: TrackingProblem,
    pub opts: MultistartOptions,
}

fn check_unit_interval(name: &str, values: &[f64], open: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Scenario(format!("{name} is empty")));
    }
    for &t in values {
        let ok = if open {
            t > 0.0 && t < 1.0
        } else {
            (0.0..=1.0).contains(&t)
        };
        if !ok {
            return Err(Error::Scenario(format!("{name} entry {t} is out of range")));
        }
    }
    Ok(())
}

impl Prepared {
    fn path(&self, spec: &PathSpec, problem: &ProblemSpec) -> Result<TargetPath> {
        let target = |t: &TargetSpec| -> Result<TargetTuple> {
            Ok(TargetTuple::new(
                t.y_d.resolve("path y_d", &self.space.state_coords)?,
                t.u_d.resolve("path u_d", &self.space.control_coords)?,
            ))
        };
        match spec {
            PathSpec::Explicit { start, end } => Ok(TargetPath {
                start: target(start)?,
                end: target(end)?,
            }),
            PathSpec::Symmetric { half_width } => {
                if !(*half_width > 0.0) {
                    return Err(Error::Scenario("half_width must be positive".into()));
                }
                if self.problem.target().y_d.len() != self.problem.dim() {
                    return Err(Error::Scenario(
                        "symmetric paths need equal state and control dimensions".into(),
                    ));
                }
                Ok(symmetric_path(
                    self.problem.target().y_d.clone(),
                    *half_width,
                ))
            }
            PathSpec::SemilinearSine {
                amplitude,
                weight_ratio,
            } => {
                let mesh = match (&self.space.mesh, self.space.map.name()) {
                    (Some(m), "semilinear1d") => *m,
                    _ => {
                        return Err(Error::Scenario(
                            "semilinear_sine paths need the semilinear1d map".into(),
                        ))
                    }
                };
                let ratio = weight_ratio.unwrap_or(problem.nu);
                if !(ratio > 0.0 && amplitude.is_finite() && *amplitude > 0.0) {
                    return Err(Error::Scenario(
                        "semilinear_sine needs positive amplitude and weight_ratio".into(),
                    ));
                }
                Ok(semilinear_default_path(&mesh, ratio, *amplitude))
            }
        }
    }

    fn check_experiment(&self, exp: &ExperimentSpec, problem: &ProblemSpec) -> Result<()> {
        match exp {
            ExperimentSpec::Solve => {}
            ExperimentSpec::Scan { axes } => {
                if axes.is_empty() || axes.len() > 2 {
                    return Err(Error::Scenario("scan needs one or two axes".into()));
                }
                for a in axes {
                    if a.count == 0 || !(a.lo <= a.hi) {
                        return Err(Error::Scenario(format!("axis {} is empty", a.label)));
                    }
                }
                self.grid(axes)?;
            }
            ExperimentSpec::FindNonunique { path, bisect_tol } => {
                self.path(path, problem)?;
                check_positive("bisect_tol", *bisect_tol)?;
            }
            ExperimentSpec::Segment {
                path,
                bisect_tol,
                t_values,
                oracle_points,
                oracle_tol,
            } => {
                self.path(path, problem)?;
                check_positive("bisect_tol", *bisect_tol)?;
                check_unit_interval("t_values", t_values, true)?;
                if let Some(m) = oracle_points {
                    if *m < 2 {
                        return Err(Error::Scenario("oracle_points must be at least 2".into()));
                    }
                }
                check_positive("oracle_tol", *oracle_tol)?;
            }
            ExperimentSpec::Witness {
                path,
                bisect_tol,
                t_sequence,
            } => {
                self.path(path, problem)?;
                check_positive("bisect_tol", *bisect_tol)?;
                check_unit_interval("t_sequence", t_sequence, true)?;
            }
            ExperimentSpec::Affinity {
                u1,
                u2,
                z,
                lambdas,
                alphas: _,
            } => {
                check_unit_interval("lambdas", lambdas, false)?;
                self.affinity_controls(u1, u2, z)?;
            }
            ExperimentSpec::SweepNu { nus } => {
                if nus.is_empty() {
                    return Err(Error::Scenario("nus is empty".into()));
                }
                for &nu in nus {
                    check_positive("nus", nu)?;
                }
            }
            ExperimentSpec::LinfDemo { resolution } => {
                if *resolution < 100 {
                    return Err(Error::Scenario("resolution must be at least 100".into()));
                }
            }
        }
        Ok(())
    }

    fn grid(&self, axes: &[AxisSpec]) -> Result<TargetGrid> {
        let axes = axes
            .iter()
            .map(|a| -> Result<ScanAxis> {
                let dir = TargetTuple::new(
                    a.y_d.resolve("axis y_d", &self.space.state_coords)?,
                    a.u_d.resolve("axis u_d", &self.space.control_coords)?,
                );
                Ok(ScanAxis::linspace(
                    a.label.clone(),
                    dir,
                    a.lo,
                    a.hi,
                    a.count,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TargetGrid {
            base: self.problem.target().clone(),
            axes,
        })
    }

    fn affinity_controls(
        &self,
        u1: &Option<VectorSpec>,
        u2: &Option<VectorSpec>,
        z: &Option<VectorSpec>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let coords = &self.space.control_coords;
        match (u1, u2, z) {
            (Some(a), Some(b), None) => Ok((a.resolve("u1", coords)?, b.resolve("u2", coords)?)),
            (None, None, Some(z)) => {
                let mesh = match (&self.space.mesh, self.space.map.name()) {
                    (Some(m), "semilinear1d") => *m,
                    _ => return Err(Error::Scenario("z needs the semilinear1d map".into())),
                };
                affinity_counterexample_controls(&z.resolve("z", coords)?, &mesh)
            }
            _ => Err(Error::Scenario(
                "affinity needs either u1 and u2, or z".into(),
            )),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Scenario(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityResult {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub affinity_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearity_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentResult {
    Solve(MultistartReport),
    Scan(ScanReport),
    FindNonunique(NonuniqueTarget),
    Segment {
        ridge: NonuniqueTarget,
        first: SegmentReport,
        second: SegmentReport,
    },
    Witness {
        ridge: NonuniqueTarget,
        witness: WitnessReport,
    },
    Affinity(AffinityResult),
    SweepNu {
        rows: Vec<SweepRow>,
    },
    LinfDemo(LinfDemoReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub experiment: String,
    pub provenance: Provenance,
    pub result: ExperimentResult,
}

/// Runs the experiment of a scenario. The report depends only on the
/// configuration.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let prep = config.prepare()?;
    let prob = &prep.problem;
    let opts = &prep.opts;
    let ridge = |path: &PathSpec, tol: f64| -> Result<(NonuniqueTarget, TrackingProblem)> {
        let path = prep.path(path, &config.problem)?;
        let start = prob.with_target(path.start.clone())?;
        let r = find_nonunique_target(&start, &path, opts, tol)?;
        let at_ridge = prob.with_target(r.target.clone())?;
        Ok((r, at_ridge))
    };
    let result = match &config.experiment {
        ExperimentSpec::Solve => ExperimentResult::Solve(multistart(prob, opts)?),
        ExperimentSpec::Scan { axes } => {
            ExperimentResult::Scan(chebyshev_scan(prob, &prep.grid(axes)?, opts)?)
        }
        ExperimentSpec::FindNonunique { path, bisect_tol } => {
            ExperimentResult::FindNonunique(ridge(path, *bisect_tol)?.0)
        }
        ExperimentSpec::Segment {
            path,
            bisect_tol,
            t_values,
            oracle_points,
            oracle_tol,
        } => {
            let (r, at_ridge) = ridge(path, *bisect_tol)?;
            let oracle = oracle_points.map(|m| OracleCheck {
                points_per_dim: m,
                tol: *oracle_tol,
            });
            let (first, second) =
                verify_segment_uniqueness(&at_ridge, &r.pair, t_values, opts, oracle.as_ref())?;
            ExperimentResult::Segment {
                ridge: r,
                first,
                second,
            }
        }
        ExperimentSpec::Witness {
            path,
            bisect_tol,
            t_sequence,
        } => {
            let (r, at_ridge) = ridge(path, *bisect_tol)?;
            let witness = discontinuity_witness(&at_ridge, &r.pair, t_sequence, opts)?;
            ExperimentResult::Witness { ridge: r, witness }
        }
        ExperimentSpec::Affinity {
            u1,
            u2,
            z,
            lambdas,
            alphas,
        } => {
            let (a, b) = prep.affinity_controls(u1, u2, z)?;
            let map = prob.map().as_ref();
            let defect = affinity_defect(map, prob.state_norm(), &a, &b, lambdas)?;
            let lin = if alphas.is_empty() {
                None
            } else {
                Some(linearity_defect(map, prob.state_norm(), &a, alphas)?)
            };
            ExperimentResult::Affinity(AffinityResult {
                u1: a,
                u2: b,
                lambdas: lambdas.clone(),
                affinity_defect: defect,
                linearity_defect: lin,
            })
        }
        ExperimentSpec::SweepNu { nus } => {
            // The sweep applies each ν to the unweighted problem.
            let base = rescale_nu(prob, 1.0 / config.problem.nu)?;
            ExperimentResult::SweepNu {
                rows: tikhonov_sweep(&base, nus, opts)?,
            }
        }
        ExperimentSpec::LinfDemo { resolution } => {
            ExperimentResult::LinfDemo(linf_demo(*resolution)?)
        }
    };
    Ok(ScenarioReport {
        scenario: config.name.clone(),
        experiment: config.experiment.name().to_string(),
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: config.hash()?,
            seed: config.solver.seed,
        },
        result,
    })
}

/// Key numbers of a report, one per line.
pub fn summarize(report: &ScenarioReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", report.scenario);
    let _ = writeln!(s, "experiment: {}", report.experiment);
    let _ = writeln!(s, "seed: {}", report.provenance.seed);
    let _ = writeln!(s, "config sha256: {}", report.provenance.config_sha256);
    let ridge_lines = |s: &mut String, r: &NonuniqueTarget| {
        let _ = writeln!(s, "ridge parameter: {:.12}", r.s);
        let _ = writeln!(
            s,
            "objective values: {:.12e} / {:.12e}",
            r.pair.j_first, r.pair.j_second
        );
        let _ = writeln!(s, "objective gap: {:.3e}", r.objective_gap);
        let _ = writeln!(s, "control separation: {:.6e}", r.control_separation);
        let _ = writeln!(s, "graph separation: {:.6e}", r.graph_separation);
    };
    match &report.result {
        ExperimentResult::Solve(r) => {
            let _ = writeln!(s, "converged starts: {}/{}", r.converged_starts, r.n_starts);
            let _ = writeln!(s, "clusters: {} ({} global)", r.clusters.len(), r.n_global);
            for c in r.global_clusters() {
                let _ = writeln!(s, "  J = {:.12e} at {}", c.j, preview(&c.representative));
            }
        }
        ExperimentResult::Scan(r) => {
            let _ = writeln!(s, "targets scanned: {}", r.cells.len());
            let _ = writeln!(
                s,
                "targets with several minimizers: {}",
                r.exceptional_set.len()
            );
        }
        ExperimentResult::FindNonunique(r) => ridge_lines(&mut s, r),
        ExperimentResult::Segment {
            ridge,
            first,
            second,
        } => {
            ridge_lines(&mut s, ridge);
            let _ = writeln!(
                s,
                "segment towards first solution unique: {}",
                first.verdict
            );
            let _ = writeln!(
                s,
                "segment towards second solution unique: {}",
                second.verdict
            );
        }
        ExperimentResult::Witness { ridge, witness } => {
            ridge_lines(&mut s, ridge);
            let _ = writeln!(
                s,
                "no continuous selection: {}",
                witness.no_continuous_selection
            );
        }
        ExperimentResult::Affinity(a) => {
            let _ = writeln!(s, "affinity defect: {:.6e}", a.affinity_defect);
            if let Some(l) = a.linearity_defect {
                let _ = writeln!(s, "linearity defect: {l:.6e}");
            }
        }
        ExperimentResult::SweepNu { rows } => {
            for r in rows {
                let _ = writeln!(
                    s,
                    "nu = {}: {} global minimizers, J = {:.12e}",
                    r.nu, r.global_clusters, r.j_best
                );
            }
        }
        ExperimentResult::LinfDemo(r) => {
            let _ = writeln!(s, "best value: {:.12e} at {:?}", r.j_best, r.u_best);
            let _ = writeln!(s, "near-optimal grid points: {}", r.near_optimal.len());
            let _ = writeln!(s, "of which on the segment: {}", r.segment_hits);
        }
    }
    s
}

fn preview(v: &[f64]) -> String {
    if v.len() <= 4 {
        format!("{v:?}")
    } else {
        format!(
            "[{}, {}, …, {}] ({} entries)",
            v[0],
            v[1],
            v[v.len() - 1],
            v.len()
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ScenarioReport,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs a scenario and writes `<name>.json`, a CSV table where one applies,
/// and a human-readable `<name>.summary.txt` into `out_dir`.
///
/// Wall-clock time appears only in the summary file, so the JSON and CSV
/// outputs are byte-identical across runs.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput> {
    let started = Instant::now();
    let report = execute(config)?;
    let elapsed = started.elapsed();
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    let json_path = out_dir.join(format!("{}.json", config.name));
    write_file(&json_path, &to_json_string(&report)?)?;
    files.push(json_path);
    let csv = match &report.result {
        ExperimentResult::Solve(r) => Some(multistart_csv(r)?),
        ExperimentResult::Scan(r) => Some(scan_csv(r)?),
        _ => None,
    };
    if let Some(csv) = csv {
        let p = out_dir.join(format!("{}.csv", config.name));
        write_file(&p, &csv)?;
        files.push(p);
    }
    let mut summary = summarize(&report);
    let _ = writeln!(summary, "wall clock: {:.3} s", elapsed.as_secs_f64());
    let p = out_dir.join(format!("{}.summary.txt", config.name));
    write_file(&p, &summary)?;
    files.push(p);
    Ok(RunOutput {
        report,
        files,
        summary,
    })
}
