//! Experiments around nonuniqueness and instability of tracking problems.
//!
//! A tracking problem is the metric projection of `(y_d, u_d)` onto the
//! graph `M = {(S(u), u)}` in the product norm. The graph is convex exactly
//! when `S` is affine, which [`affinity_defect`] and [`linearity_defect`]
//! measure. For non-affine maps there are targets with several projections;
//! [`find_nonunique_target`] locates one by ridge bisection along a target
//! path. Moving the target from such a ridge point towards either solution
//! keeps that solution as the unique minimizer ([`verify_segment_uniqueness`]),
//! so two target sequences with a common limit have solution sequences with
//! different limits ([`discontinuity_witness`]).

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::maps::{ControlToStateMap, Mesh1D};
use crate::problem::{lerp, rescale_nu, TargetTuple, TrackingProblem};
use crate::solver::{
    grid_coordinate, grid_oracle, local_minimize, map_indexed, multistart, oracle_clusters,
    LocalOptions, LocalSolveResult, MultistartOptions,
};
use crate::spaces::{product_norm, Norm};

/// `max_λ ‖S(λu₁ + (1−λ)u₂) − λS(u₁) − (1−λ)S(u₂)‖`.
pub fn affinity_defect(
    map: &dyn ControlToStateMap,
    norm: &Norm,
    u1: &[f64],
    u2: &[f64],
    lambdas: &[f64],
) -> Result<f64> {
    check_dim("affinity_defect u2", u1.len(), u2.len())?;
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::invalid("lambda", format!("{l} is outside [0, 1]")));
    }
    let s1 = map.eval(u1)?;
    let s2 = map.eval(u2)?;
    let mut defect: f64 = 0.0;
    for &l in lambdas {
        let mix = lerp(u2, u1, l);
        let s = map.eval(&mix)?;
        let chord = lerp(&s2, &s1, l);
        defect = defect.max(norm.distance(&s, &chord)?);
    }
    Ok(defect)
}

/// `max_α ‖L(αu) − αL(u)‖` with `L(v) = S(v) − S(0)`.
pub fn linearity_defect(
    map: &dyn ControlToStateMap,
    norm: &Norm,
    u: &[f64],
    alphas: &[f64],
) -> Result<f64> {
    let s0 = map.eval(&vec![0.0; u.len()])?;
    let lin = |v: &[f64]| -> Result<Vec<f64>> {
        Ok(map.eval(v)?.iter().zip(&s0).map(|(a, b)| a - b).collect())
    };
    let lu = lin(u)?;
    let mut defect: f64 = 0.0;
    for &a in alphas {
        let scaled: Vec<f64> = u.iter().map(|x| a * x).collect();
        let l_scaled = lin(&scaled)?;
        let a_lu: Vec<f64> = lu.iter().map(|x| a * x).collect();
        defect = defect.max(norm.distance(&l_scaled, &a_lu)?);
    }
    Ok(defect)
}

/// Straight line `s ↦ (1 − s)·start + s·end` in target space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPath {
    pub start: TargetTuple,
    pub end: TargetTuple,
}

impl TargetPath {
    pub fn at(&self, s: f64) -> Result<TargetTuple> {
        self.start.lerp(&self.end, s)
    }
}

/// Path through `u_d = 0` at fixed `y_d`, the natural ridge crossing for
/// even maps.
pub fn symmetric_path(y_d: Vec<f64>, half_width: f64) -> TargetPath {
    let dim = y_d.len();
    TargetPath {
        start: TargetTuple::new(y_d.clone(), vec![-half_width; dim]),
        end: TargetTuple::new(y_d, vec![half_width; dim]),
    }
}

/// Default ridge path for the semilinear map.
///
/// Along `sin(πx)` the discrete map is `a·sin ↦ k±·a·sin` with
/// `k₊ = 1/(λ_h + 1)` for `a > 0` and `k₋ = 1/λ_h` for `a < 0`, `λ_h` the
/// first eigenvalue of `−Δ_h`. For `y_d = −A·sin` and `u_d = d·A·sin` both
/// branches have interior local minima while `ν·d ∈ (k₊, k₋)`, `ν` being the
/// ratio of control to state weight; the path covers the middle 60% of that
/// window, where the two branch values cross.
pub fn semilinear_default_path(mesh: &Mesh1D, nu: f64, amplitude: f64) -> TargetPath {
    let h = mesh.h();
    let lam = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let (kp, km) = (1.0 / (lam + 1.0), 1.0 / lam);
    let d_lo = (kp + 0.2 * (km - kp)) / nu;
    let d_hi = (kp + 0.8 * (km - kp)) / nu;
    let y_d = mesh.sine(-amplitude);
    TargetPath {
        start: TargetTuple::new(y_d.clone(), mesh.sine(d_lo * amplitude)),
        end: TargetTuple::new(y_d, mesh.sine(d_hi * amplitude)),
    }
}

/// A graph point `(S(u), u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPair {
    pub first: GraphPoint,
    pub second: GraphPoint,
    pub j_first: f64,
    pub j_second: f64,
}

impl SolutionPair {
    pub fn control_separation(&self, prob: &TrackingProblem) -> Result<f64> {
        prob.control_norm().distance(&self.first.u, &self.second.u)
    }

    pub fn graph_separation(&self, prob: &TrackingProblem) -> Result<f64> {
        prob.graph_distance(&self.first.y, &self.first.u, &self.second.y, &self.second.u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonuniqueTarget {
    /// Path parameter of the ridge point.
    pub s: f64,
    pub target: TargetTuple,
    pub pair: SolutionPair,
    pub objective_gap: f64,
    pub control_separation: f64,
    pub graph_separation: f64,
    pub bisection_steps: usize,
    /// Global cluster count of the certifying multistart at the ridge.
    pub certified_global_clusters: usize,
    pub certified_best_j: f64,
}

fn solve_from(
    prob: &TrackingProblem,
    u0: &[f64],
    local: &LocalOptions,
) -> Result<LocalSolveResult> {
    local_minimize(prob, u0, local)
}

/// Locates a target with two distinct global minimizers on `path`.
///
/// Both endpoints must have a single global cluster. The two endpoint
/// minimizers are continued as local minimizers across the path (warm
/// started from the nearest bracketing point); the path parameter where
/// their objective values cross is bisected down to `bisect_tol`. A final
/// multistart at the ridge target certifies that no third basin is lower.
pub fn find_nonunique_target(
    prob: &TrackingProblem,
    path: &TargetPath,
    opts: &MultistartOptions,
    bisect_tol: f64,
) -> Result<NonuniqueTarget> {
    if !(bisect_tol > 0.0) {
        return Err(Error::invalid("bisect_tol", "must be positive"));
    }
    let tol_u = opts.cluster.tol_u;
    let tol_j = opts.cluster.tol_j;
    let norm = prob.control_norm();
    let at = |s: f64| -> Result<TrackingProblem> { prob.with_target(path.at(s)?) };

    let endpoint = |s: f64| -> Result<Vec<f64>> {
        let report =
            multistart(&at(s)?, opts).map_err(|e| e.context(format!("multistart at s = {s}")))?;
        if report.n_global != 1 {
            return Err(Error::invalid(
                "path",
                format!(
                    "endpoint s = {s} has {} global minimizers, expected one",
                    report.n_global
                ),
            ));
        }
        Ok(report.best().representative.clone())
    };
    let a0 = endpoint(0.0)?;
    let b1 = endpoint(1.0)?;
    let spread = a0
        .iter()
        .zip(&b1)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if spread == 0.0 {
        return Err(Error::NoBasinJump(
            "both endpoints have the same minimizer".into(),
        ));
    }
    let local = LocalOptions {
        max_step: Some(
            opts.local
                .max_step
                .map_or(0.25 * spread, |m| m.min(0.25 * spread)),
        ),
        ..opts.local
    };

    let branches =
        |s: f64, from_a: &[f64], from_b: &[f64]| -> Result<(LocalSolveResult, LocalSolveResult)> {
            let p = at(s)?;
            let a = solve_from(&p, from_a, &local)?;
            let b = solve_from(&p, from_b, &local)?;
            if norm.distance(&a.u_star, &b.u_star)? <= tol_u {
                return Err(Error::NoBasinJump(format!(
                    "the endpoint minimizers fall into the same basin at s = {s}"
                )));
            }
            Ok((a, b))
        };
    let (a_lo, b_lo) = branches(0.0, &a0, &b1)?;
    let (a_hi, b_hi) = branches(1.0, &a0, &b1)?;
    let gap = |a: &LocalSolveResult, b: &LocalSolveResult| a.j_star - b.j_star;
    if !(gap(&a_lo, &b_lo) < 0.0 && gap(&a_hi, &b_hi) > 0.0) {
        return Err(Error::NoBasinJump(
            "objective values of the two branches do not cross along the path".into(),
        ));
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut a_lo, mut b_hi) = (a_lo.u_star, b_hi.u_star);
    let mut steps = 0;
    let mut last = None;
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        let (a, b) = branches(mid, &a_lo, &b_hi)?;
        steps += 1;
        let d = gap(&a, &b);
        if d < 0.0 {
            lo = mid;
            a_lo = a.u_star.clone();
        } else {
            hi = mid;
            b_hi = b.u_star.clone();
        }
        last = Some((mid, a, b));
        if d == 0.0 {
            break;
        }
    }
    let (s, a, b) = match last {
        Some(v) => v,
        None => {
            let (a, b) = branches(0.5, &a_lo, &b_hi)?;
            (0.5, a, b)
        }
    };
    let objective_gap = (a.j_star - b.j_star).abs();
    if objective_gap > tol_j {
        return Err(Error::NonConvergence {
            solver: "ridge bisection",
            iterations: steps,
            residual: objective_gap,
            context: Some(format!("objective gap at s = {s}")),
        });
    }

    let ridge = at(s)?;
    let check =
        multistart(&ridge, opts).map_err(|e| e.context("certifying multistart at the ridge"))?;
    let best = check.best().j;
    if a.j_star.max(b.j_star) > best + tol_j {
        return Err(Error::NoBasinJump(format!(
            "a third basin with J = {best:.6e} lies below the ridge pair at s = {s}"
        )));
    }

    let pair = SolutionPair {
        first: GraphPoint {
            y: ridge.state(&a.u_star)?,
            u: a.u_star,
        },
        second: GraphPoint {
            y: ridge.state(&b.u_star)?,
            u: b.u_star,
        },
        j_first: a.j_star,
        j_second: b.j_star,
    };
    Ok(NonuniqueTarget {
        s,
        target: ridge.target().clone(),
        control_separation: pair.control_separation(&ridge)?,
        graph_separation: pair.graph_separation(&ridge)?,
        pair,
        objective_gap,
        bisection_steps: steps,
        certified_global_clusters: check.n_global,
        certified_best_j: best,
    })
}

/// `t·(ȳ, ū) + (1 − t)·(y_d, u_d)`.
pub fn segment_target(t: f64, solution: &GraphPoint, target: &TargetTuple) -> Result<TargetTuple> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("{t} is outside [0, 1]")));
    }
    target.lerp(
        &TargetTuple {
            y_d: solution.y.clone(),
            u_d: solution.u.clone(),
        },
        t,
    )
}

/// Brute-force cross-check settings for low-dimensional problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub points_per_dim: usize,
    /// Near-optimality threshold `J ≤ J_best + tol`.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub j_best: f64,
    pub clusters: usize,
    /// Largest coordinate offset between the oracle optimum and the expected
    /// solution, in grid cells.
    pub offset_cells: f64,
    pub agrees: bool,
}

fn oracle_verdict(
    prob: &TrackingProblem,
    opts: &MultistartOptions,
    check: &OracleCheck,
    expected: &[f64],
) -> Result<OracleVerdict> {
    let r = grid_oracle(prob, &opts.bounds, check.points_per_dim, check.tol)?;
    let reps = oracle_clusters(&r);
    let offset_cells = reps
        .first()
        .map(|p| {
            p.u.iter()
                .zip(expected)
                .zip(&r.spacing)
                .map(|((a, b), h)| (a - b).abs() / h)
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    Ok(OracleVerdict {
        j_best: r.j_best,
        clusters: reps.len(),
        offset_cells,
        agrees: reps.len() == 1 && offset_cells <= 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPoint {
    pub t: f64,
    pub global_clusters: usize,
    pub representative: Vec<f64>,
    pub j: f64,
    /// Control-norm distance to the endpoint solution.
    pub distance: f64,
    pub oracle: Option<OracleVerdict>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub t_values: Vec<f64>,
    pub expected: Vec<f64>,
    pub points: Vec<SegmentPoint>,
    pub verdict: bool,
}

fn check_pair(prob: &TrackingProblem, pair: &SolutionPair, opts: &MultistartOptions) -> Result<()> {
    let gap = (pair.j_first - pair.j_second).abs();
    let sep = pair.control_separation(prob)?;
    if gap > opts.cluster.tol_j || sep <= opts.cluster.tol_u {
        return Err(Error::invalid(
            "pair",
            format!("not a certified pair (objective gap {gap:.3e}, separation {sep:.3e})"),
        ));
    }
    Ok(())
}

fn segment_point(
    prob: &TrackingProblem,
    solution: &GraphPoint,
    t: f64,
    opts: &MultistartOptions,
    oracle: Option<&OracleCheck>,
) -> Result<SegmentPoint> {
    let p = prob.with_target(segment_target(t, solution, prob.target())?)?;
    let report = multistart(&p, opts).map_err(|e| e.context(format!("multistart at t = {t}")))?;
    let best = report.best();
    let distance = prob
        .control_norm()
        .distance(&best.representative, &solution.u)?;
    let oracle = match oracle {
        Some(c) if p.dim() <= 2 => Some(oracle_verdict(&p, opts, c, &solution.u)?),
        _ => None,
    };
    let pass = report.n_global == 1
        && distance <= opts.cluster.tol_u
        && oracle.as_ref().is_none_or(|o| o.agrees);
    Ok(SegmentPoint {
        t,
        global_clusters: report.n_global,
        representative: best.representative.clone(),
        j: best.j,
        distance,
        oracle,
        pass,
    })
}

fn segment_report(
    prob: &TrackingProblem,
    solution: &GraphPoint,
    t_list: &[f64],
    opts: &MultistartOptions,
    oracle: Option<&OracleCheck>,
) -> Result<SegmentReport> {
    let points = t_list
        .iter()
        .map(|&t| segment_point(prob, solution, t, opts, oracle))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentReport {
        t_values: t_list.to_vec(),
        expected: solution.u.clone(),
        verdict: points.iter().all(|p| p.pass),
        points,
    })
}

/// For each `t` and each solution of the pair, solves the problem at the
/// segment target between the ridge target (the target of `prob`) and that
/// solution, and checks that the solution is the unique global minimizer.
pub fn verify_segment_uniqueness(
    prob: &TrackingProblem,
    pair: &SolutionPair,
    t_list: &[f64],
    opts: &MultistartOptions,
    oracle: Option<&OracleCheck>,
) -> Result<(SegmentReport, SegmentReport)> {
    check_pair(prob, pair, opts)?;
    if let Some(t) = t_list.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::invalid(
            "t",
            format!("{t} is outside the open interval (0, 1)"),
        ));
    }
    Ok((
        segment_report(prob, &pair.first, t_list, opts, oracle)?,
        segment_report(prob, &pair.second, t_list, opts, oracle)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub t: f64,
    /// Product-norm distance of the segment targets to the ridge target.
    pub target_distance_first: f64,
    pub target_distance_second: f64,
    pub solution_first: Vec<f64>,
    pub solution_second: Vec<f64>,
    pub unique_first: bool,
    pub unique_second: bool,
    /// Product-norm distance between the two computed solutions.
    pub branch_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub pair_separation: f64,
    pub rows: Vec<WitnessRow>,
    pub targets_converge: bool,
    pub branches_constant: bool,
    /// True when the rows exhibit two target sequences with a common limit
    /// whose unique solutions stay a fixed distance apart.
    pub no_continuous_selection: bool,
}

/// Two target sequences converging to the ridge target whose unique
/// minimizers stay pinned at the two different solutions of the pair.
pub fn discontinuity_witness(
    prob: &TrackingProblem,
    pair: &SolutionPair,
    t_sequence: &[f64],
    opts: &MultistartOptions,
) -> Result<WitnessReport> {
    check_pair(prob, pair, opts)?;
    if t_sequence.is_empty() {
        return Err(Error::invalid("t_sequence", "empty sequence"));
    }
    if let Some(t) = t_sequence.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::invalid(
            "t_sequence",
            format!("{t} is outside (0, 1)"),
        ));
    }
    if t_sequence.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("t_sequence", "must be nonincreasing"));
    }
    let target = prob.target();
    let tol_u = opts.cluster.tol_u;
    let dist_to_target = |tt: &TargetTuple| -> Result<f64> {
        product_norm(
            prob.state_norm().distance(&tt.y_d, &target.y_d)?,
            prob.control_norm().distance(&tt.u_d, &target.u_d)?,
            prob.p(),
        )
    };
    let pair_separation = pair.graph_separation(prob)?;
    let mut rows = Vec::with_capacity(t_sequence.len());
    for &t in t_sequence {
        let first = segment_point(prob, &pair.first, t, opts, None)?;
        let second = segment_point(prob, &pair.second, t, opts, None)?;
        let ya = prob.state(&first.representative)?;
        let yb = prob.state(&second.representative)?;
        rows.push(WitnessRow {
            t,
            target_distance_first: dist_to_target(&segment_target(t, &pair.first, target)?)?,
            target_distance_second: dist_to_target(&segment_target(t, &pair.second, target)?)?,
            branch_gap: prob.graph_distance(
                &ya,
                &first.representative,
                &yb,
                &second.representative,
            )?,
            unique_first: first.pass,
            unique_second: second.pass,
            solution_first: first.representative,
            solution_second: second.representative,
        });
    }
    let strictly_decreasing =
        |f: fn(&WitnessRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let targets_converge = (rows.len() < 2
        || (strictly_decreasing(|r| r.target_distance_first)
            && strictly_decreasing(|r| r.target_distance_second)))
        && t_sequence.len() == rows.len();
    let mut branches_constant = true;
    for r in &rows {
        branches_constant &= prob
            .control_norm()
            .distance(&r.solution_first, &pair.first.u)?
            <= tol_u
            && prob
                .control_norm()
                .distance(&r.solution_second, &pair.second.u)?
                <= tol_u;
    }
    let no_continuous_selection = targets_converge
        && branches_constant
        && rows.iter().all(|r| r.unique_first && r.unique_second)
        && pair_separation > tol_u;
    Ok(WitnessReport {
        pair_separation,
        rows,
        targets_converge,
        branches_constant,
        no_continuous_selection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: f64,
    pub global_clusters: usize,
    pub j_best: f64,
    pub representatives: Vec<Vec<f64>>,
}

/// Global cluster structure of `‖S(u) − y_d‖^p + ν‖u − u_d‖^p` for each `ν`.
pub fn tikhonov_sweep(
    base: &TrackingProblem,
    nus: &[f64],
    opts: &MultistartOptions,
) -> Result<Vec<SweepRow>> {
    nus.iter()
        .map(|&nu| {
            let p = rescale_nu(base, nu)?;
            let r =
                multistart(&p, opts).map_err(|e| e.context(format!("multistart at ν = {nu}")))?;
            Ok(SweepRow {
                nu,
                global_clusters: r.n_global,
                j_best: r.best().j,
                representatives: r
                    .global_clusters()
                    .iter()
                    .map(|c| c.representative.clone())
                    .collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub label: String,
    /// Target displacement per unit coordinate.
    pub direction: TargetTuple,
    pub values: Vec<f64>,
}

impl ScanAxis {
    /// `count` equally spaced values in `[lo, hi]`.
    pub fn linspace(
        label: impl Into<String>,
        direction: TargetTuple,
        lo: f64,
        hi: f64,
        count: usize,
    ) -> Self {
        ScanAxis {
            label: label.into(),
            direction,
            values: (0..count)
                .map(|i| grid_coordinate(lo, hi, i, count))
                .collect(),
        }
    }
}

/// Targets `base + Σ cₖ·directionₖ` over the tensor grid of axis values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetGrid {
    pub base: TargetTuple,
    pub axes: Vec<ScanAxis>,
}

impl TargetGrid {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis coordinates of cell `flat` (last axis fastest).
    pub fn coords(&self, mut flat: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            c[k] = axis.values[flat % axis.values.len()];
            flat /= axis.values.len();
        }
        c
    }

    pub fn target(&self, coords: &[f64]) -> TargetTuple {
        let mut t = self.base.clone();
        for (axis, c) in self.axes.iter().zip(coords) {
            for (y, d) in t.y_d.iter_mut().zip(&axis.direction.y_d) {
                *y += c * d;
            }
            for (u, d) in t.u_d.iter_mut().zip(&axis.direction.u_d) {
                *u += c * d;
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub coords: Vec<f64>,
    pub multiplicity: usize,
    pub j_best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub labels: Vec<String>,
    pub cells: Vec<ScanCell>,
    /// Coordinates of the cells with multiplicity ≥ 2.
    pub exceptional_set: Vec<Vec<f64>>,
}

/// Number of global minimizers at every target of the grid.
pub fn chebyshev_scan(
    prob: &TrackingProblem,
    grid: &TargetGrid,
    opts: &MultistartOptions,
) -> Result<ScanReport> {
    if grid.axes.is_empty() || grid.axes.len() > 2 {
        return Err(Error::invalid("target_grid", "scan needs one or two axes"));
    }
    if grid.is_empty() {
        return Err(Error::invalid("target_grid", "empty axis"));
    }
    for a in &grid.axes {
        check_dim(
            "scan direction state",
            prob.target().y_d.len(),
            a.direction.y_d.len(),
        )?;
        check_dim(
            "scan direction control",
            prob.target().u_d.len(),
            a.direction.u_d.len(),
        )?;
    }
    let cells = map_indexed(grid.len(), |flat| -> Result<ScanCell> {
        let coords = grid.coords(flat);
        let p = prob.with_target(grid.target(&coords))?;
        let r = multistart(&p, opts).map_err(|e| e.context(format!("multistart at {coords:?}")))?;
        Ok(ScanCell {
            coords,
            multiplicity: r.n_global,
            j_best: r.best().j,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        labels: grid.axes.iter().map(|a| a.label.clone()).collect(),
        exceptional_set: cells
            .iter()
            .filter(|c| c.multiplicity >= 2)
            .map(|c| c.coords.clone())
            .collect(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinfDemoReport {
    pub resolution: usize,
    pub j_best: f64,
    pub u_best: [f64; 2],
    pub near_optimal: Vec<[f64; 2]>,
    /// Near-optimal grid points on `{(0.5, s) : |s| ≤ 0.5}`.
    pub segment_hits: usize,
}

/// Tolerance defining the near-optimal set of [`linf_demo`].
pub const LINF_NEAR_OPTIMAL_TOL: f64 = 1e-6;

/// `‖(1, 0) − u‖∞² + ‖u‖∞²` with the identity as control-to-state map.
pub fn linf_objective(u: [f64; 2]) -> f64 {
    let ey = (1.0 - u[0]).abs().max(u[1].abs());
    let eu = u[0].abs().max(u[1].abs());
    ey * ey + eu * eu
}

/// Brute-force scan of [`linf_objective`] over `[−1.5, 1.5]²`.
///
/// The max-norm is neither uniformly convex nor uniformly smooth, and even
/// with `S = id` the minimizers form a continuum.
pub fn linf_demo(resolution: usize) -> Result<LinfDemoReport> {
    if resolution < 100 {
        return Err(Error::invalid(
            "resolution",
            format!("need at least 100 points per axis, got {resolution}"),
        ));
    }
    let point = |i: usize, j: usize| {
        [
            grid_coordinate(-1.5, 1.5, i, resolution),
            grid_coordinate(-1.5, 1.5, j, resolution),
        ]
    };
    let mut j_best = f64::INFINITY;
    let mut u_best = [0.0; 2];
    for i in 0..resolution {
        for j in 0..resolution {
            let u = point(i, j);
            let v = linf_objective(u);
            if v < j_best {
                j_best = v;
                u_best = u;
            }
        }
    }
    let mut near_optimal = Vec::new();
    for i in 0..resolution {
        for j in 0..resolution {
            let u = point(i, j);
            if linf_objective(u) <= j_best + LINF_NEAR_OPTIMAL_TOL {
                near_optimal.push(u);
            }
        }
    }
    let segment_hits = near_optimal
        .iter()
        .filter(|u| (u[0] - 0.5).abs() < 1e-12 && u[1].abs() <= 0.5 + 1e-12)
        .count();
    Ok(LinfDemoReport {
        resolution,
        j_best,
        u_best,
        near_optimal,
        segment_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{
        affinity_counterexample_controls, AbsMap, AffineMap, SemilinearMap, SquareMap,
    };
    use crate::problem::euclidean_problem;
    use crate::solver::Bounds;
    use crate::spaces::{GridNorm, WeightedNorm};

    fn euclid(dim: usize) -> Norm {
        WeightedNorm::identity(dim, 1.0).unwrap().into()
    }

    fn opts_1d(lo: f64, hi: f64) -> MultistartOptions {
        MultistartOptions::new(64, 11, Bounds::uniform(1, lo, hi).unwrap())
    }

    #[test]
    fn affinity_defect_examples() {
        let aff =
            AffineMap::from_rows(&[vec![2.0, -1.0], vec![0.5, 3.0]], vec![1.0, -2.0]).unwrap();
        let d = affinity_defect(
            &aff,
            &euclid(2),
            &[1.0, 2.0],
            &[-3.0, 0.5],
            &[0.0, 0.3, 0.5, 1.0],
        )
        .unwrap();
        assert!(d <= 1e-12);
        let d = affinity_defect(&AbsMap { dim: 1 }, &euclid(1), &[-1.0], &[1.0], &[0.5]).unwrap();
        assert_eq!(d, 1.0);
        assert!(affinity_defect(&AbsMap { dim: 1 }, &euclid(1), &[-1.0], &[1.0], &[1.5]).is_err());
    }

    #[test]
    fn semilinear_affinity_defect_with_counterexample_controls() {
        let map = SemilinearMap::new(199).unwrap();
        let mesh = map.mesh();
        let z = mesh.sine(1.0);
        let (u1, u2) = affinity_counterexample_controls(&z, &mesh).unwrap();
        let norm: Norm = GridNorm::new(mesh.h(), 2.0).unwrap().into();
        let d = affinity_defect(&map, &norm, &u1, &u2, &[0.5]).unwrap();
        // Independent route: S(z) by fixed-point iteration y ← (−Δ_h + I)⁻¹(z − max(0,y) + y)
        // converges here since z > 0 makes the state positive.
        let m = mesh.shifted_neg_laplacian(1.0);
        let mut y: Vec<f64> = vec![0.0; mesh.n()];
        for _ in 0..200 {
            let rhs: Vec<f64> = z
                .iter()
                .zip(&y)
                .map(|(zi, &yi)| zi - yi.max(0.0) + yi)
                .collect();
            y = m.solve(&rhs).unwrap();
        }
        let oracle = norm.norm(&y).unwrap();
        assert!((d - oracle).abs() < 1e-10, "{d} vs {oracle}");
        // ‖z‖ = √½ for the discrete sine, and S(z) = z/(λ_h + 1).
        assert!((d - 0.065053).abs() < 1e-5, "{d}");
        assert!(d > 0.05);
    }

    #[test]
    fn linearity_defect_examples() {
        let aff = AffineMap::from_rows(&[vec![2.0]], vec![7.0]).unwrap();
        assert!(linearity_defect(&aff, &euclid(1), &[1.3], &[-2.0, 0.5, 3.0]).unwrap() <= 1e-12);
        assert_eq!(
            linearity_defect(&AbsMap { dim: 1 }, &euclid(1), &[1.0], &[-1.0]).unwrap(),
            2.0
        );
        assert_eq!(
            linearity_defect(&SquareMap { dim: 1 }, &euclid(1), &[1.0], &[2.0]).unwrap(),
            2.0
        );
    }

    #[test]
    fn find_nonunique_abs_and_square() {
        for (map_sq, expected) in [(false, 0.5), (true, 0.5f64.sqrt())] {
            let prob = if map_sq {
                euclidean_problem(SquareMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap()
            } else {
                euclidean_problem(AbsMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap()
            };
            let path = symmetric_path(vec![1.0], 0.2);
            let r = find_nonunique_target(&prob, &path, &opts_1d(-2.0, 2.0), 1e-10).unwrap();
            assert!(r.target.u_d[0].abs() < 1e-9, "{:?}", r.target);
            assert!(r.objective_gap <= 1e-7);
            let mut us = [r.pair.first.u[0], r.pair.second.u[0]];
            us.sort_by(f64::total_cmp);
            assert!((us[0] + expected).abs() < 1e-6 && (us[1] - expected).abs() < 1e-6);
            assert_eq!(r.certified_global_clusters, 2);
        }
    }

    #[test]
    fn find_nonunique_affine_fails() {
        let prob =
            euclidean_problem(AffineMap::identity(1), vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let err = find_nonunique_target(
            &prob,
            &symmetric_path(vec![1.0], 0.2),
            &opts_1d(-2.0, 2.0),
            1e-10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoBasinJump(_)), "{err}");
        assert!(err
            .to_string()
            .contains("path does not cross the exceptional set"));
    }

    #[test]
    fn segment_target_examples() {
        let sol = GraphPoint {
            y: vec![0.5],
            u: vec![0.5],
        };
        let target = TargetTuple::new(vec![1.0], vec![0.0]);
        assert_eq!(segment_target(0.0, &sol, &target).unwrap(), target);
        assert_eq!(
            segment_target(1.0, &sol, &target).unwrap(),
            TargetTuple::new(vec![0.5], vec![0.5])
        );
        assert_eq!(
            segment_target(0.5, &sol, &target).unwrap(),
            TargetTuple::new(vec![0.75], vec![0.25])
        );
        assert!(segment_target(1.5, &sol, &target).is_err());
    }

    fn abs_pair() -> (TrackingProblem, SolutionPair) {
        let prob = euclidean_problem(AbsMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let pair = SolutionPair {
            first: GraphPoint {
                y: vec![0.5],
                u: vec![0.5],
            },
            second: GraphPoint {
                y: vec![0.5],
                u: vec![-0.5],
            },
            j_first: 0.5,
            j_second: 0.5,
        };
        (prob, pair)
    }

    #[test]
    fn segment_uniqueness_abs() {
        let (prob, pair) = abs_pair();
        let ts: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let check = OracleCheck {
            points_per_dim: 4001,
            tol: 1e-6,
        };
        let (a, b) =
            verify_segment_uniqueness(&prob, &pair, &ts, &opts_1d(-2.0, 2.0), Some(&check))
                .unwrap();
        assert!(a.verdict && b.verdict);
        assert!(a
            .points
            .iter()
            .all(|p| (p.representative[0] - 0.5).abs() < 1e-4));
        assert!(b
            .points
            .iter()
            .all(|p| (p.representative[0] + 0.5).abs() < 1e-4));
        // The ridge itself (t = 0) is excluded; it has two minimizers.
        assert!(
            verify_segment_uniqueness(&prob, &pair, &[0.0], &opts_1d(-2.0, 2.0), None).is_err()
        );
        let ridge = multistart(&prob, &opts_1d(-2.0, 2.0)).unwrap();
        assert_eq!(ridge.n_global, 2);
    }

    #[test]
    fn witness_abs() {
        let (prob, pair) = abs_pair();
        let ts: Vec<f64> = (1..=8).map(|n| 0.5f64.powi(n)).collect();
        let w = discontinuity_witness(&prob, &pair, &ts, &opts_1d(-2.0, 2.0)).unwrap();
        assert!(w.no_continuous_selection);
        for pair in w.rows.windows(2) {
            let ratio = pair[1].target_distance_first / pair[0].target_distance_first;
            assert!((ratio - 0.5).abs() < 1e-12);
        }
        assert!(w.rows.iter().all(|r| (r.branch_gap - 1.0).abs() < 1e-4));
        let constant =
            discontinuity_witness(&prob, &pair, &[0.5, 0.5], &opts_1d(-2.0, 2.0)).unwrap();
        assert!(constant
            .rows
            .iter()
            .all(|r| r.unique_first && r.unique_second));
        assert!(!constant.targets_converge);
    }

    #[test]
    fn witness_rejects_uncertified_pair() {
        let (prob, mut pair) = abs_pair();
        pair.j_second = 0.6;
        assert!(discontinuity_witness(&prob, &pair, &[0.5], &opts_1d(-2.0, 2.0)).is_err());
    }

    #[test]
    fn tikhonov_sweep_abs_and_affine() {
        let base = euclidean_problem(AbsMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let rows = tikhonov_sweep(&base, &[0.5, 1.0, 2.0, 10.0], &opts_1d(-2.0, 2.0)).unwrap();
        for row in rows {
            assert_eq!(row.global_clusters, 2);
            for r in &row.representatives {
                assert!((r[0].abs() - 1.0 / (1.0 + row.nu)).abs() < 1e-6);
            }
        }
        let aff =
            euclidean_problem(AffineMap::identity(1), vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let rows = tikhonov_sweep(&aff, &[0.5, 1.0, 2.0, 10.0], &opts_1d(-2.0, 2.0)).unwrap();
        assert!(rows.iter().all(|r| r.global_clusters == 1));
    }

    #[test]
    fn chebyshev_scan_abs_and_affine() {
        let grid = TargetGrid {
            base: TargetTuple::new(vec![0.0], vec![0.0]),
            axes: vec![
                ScanAxis::linspace("y_d", TargetTuple::new(vec![1.0], vec![0.0]), 0.5, 1.5, 5),
                ScanAxis::linspace("u_d", TargetTuple::new(vec![0.0], vec![1.0]), -0.5, 0.5, 5),
            ],
        };
        let prob = euclidean_problem(AbsMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let opts = MultistartOptions::new(24, 5, Bounds::uniform(1, -2.0, 2.0).unwrap());
        let r = chebyshev_scan(&prob, &grid, &opts).unwrap();
        assert_eq!(r.cells.len(), 25);
        assert_eq!(r.exceptional_set.len(), 5);
        assert!(r.exceptional_set.iter().all(|c| c[1] == 0.0 && c[0] > 0.0));
        let aff =
            euclidean_problem(AffineMap::identity(1), vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let r = chebyshev_scan(&aff, &grid, &opts).unwrap();
        assert!(r.exceptional_set.is_empty());
    }

    #[test]
    fn linf_demo_examples() {
        let r = linf_demo(301).unwrap();
        assert!((r.j_best - 0.5).abs() < 1e-6);
        assert!((r.u_best[0] - 0.5).abs() < 1e-12);
        assert!(r.segment_hits >= 50);
        assert!(r.near_optimal.iter().any(|u| u == &[0.5, 0.5]));
        assert!(!r
            .near_optimal
            .iter()
            .any(|u| (u[0] - 0.5).abs() < 1e-12 && (u[1] - 0.6).abs() < 1e-9));
        assert!((linf_objective([0.5, 0.6]) - 0.72).abs() < 1e-12);
        assert!(linf_demo(50).is_err());
    }
}
