//! Local descent, deterministic multistart, minimizer clustering and a
//! brute-force grid oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problem::{gradient_fd, objective, TrackingProblem, DEFAULT_FD_STEP};
use crate::spaces::Norm;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// The output is always in index order.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalOptions {
    pub grad_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Upper bound on the Euclidean length of a single step. Keeps warm
    /// started solves inside the basin they start in.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            grad_tol: 1e-8,
            step_tol: 1e-12,
            max_iter: 5000,
            fd_step: DEFAULT_FD_STEP,
            armijo: 1e-4,
            max_step: None,
        }
    }
}

impl LocalOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("step_tol", self.step_tol),
            ("fd_step", self.fd_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::invalid("armijo", "must lie in (0, 1)"));
        }
        if let Some(m) = self.max_step {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::invalid(
                    "max_step",
                    format!("must be positive, got {m}"),
                ));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSolveResult {
    pub u_star: Vec<f64>,
    pub j_star: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    /// Objective value at the start and after every accepted step.
    pub trace: Vec<f64>,
}

/// Steepest descent with central-difference gradients and Armijo
/// backtracking (halving).
///
/// Stops when `‖∇J‖₂ ≤ grad_tol`, or when backtracking shrinks the step
/// length `t‖∇J‖` below `step_tol`; both count as converged. Trial points
/// with a non-finite objective are rejected like any other failed trial.
pub fn local_minimize(
    prob: &TrackingProblem,
    u0: &[f64],
    opts: &LocalOptions,
) -> Result<LocalSolveResult> {
    opts.validate()?;
    check_dim("start point", prob.dim(), u0.len())?;
    if u0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("in start point".into()));
    }
    let mut u = u0.to_vec();
    let mut j = objective(prob, &u)?;
    if !j.is_finite() {
        return Err(Error::NonFinite("at start point".into()));
    }
    let mut trace = vec![j];
    let mut trial: f64 = 1.0;
    let mut grad_norm = f64::INFINITY;

    for it in 0..opts.max_iter {
        let g = gradient_fd(prob, &u, opts.fd_step)?;
        grad_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if grad_norm <= opts.grad_tol {
            return Ok(LocalSolveResult {
                u_star: u,
                j_star: j,
                iterations: it,
                converged: true,
                grad_norm,
                trace,
            });
        }
        let slope = grad_norm * grad_norm;
        let mut t = match opts.max_step {
            Some(m) => trial.min(m / grad_norm),
            None => trial,
        };
        loop {
            let cand: Vec<f64> = u.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            let jc = objective(prob, &cand)?;
            // Strict decrease: below rounding level Armijo alone accepts null steps forever.
            if jc.is_finite() && jc < j && jc <= j - opts.armijo * t * slope {
                u = cand;
                j = jc;
                trace.push(j);
                trial = 2.0 * t;
                break;
            }
            t *= 0.5;
            if t * grad_norm < opts.step_tol {
                return Ok(LocalSolveResult {
                    u_star: u,
                    j_star: j,
                    iterations: it + 1,
                    converged: true,
                    grad_norm,
                    trace,
                });
            }
        }
    }
    Ok(LocalSolveResult {
        u_star: u,
        j_star: j,
        iterations: opts.max_iter,
        converged: false,
        grad_norm,
        trace,
    })
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim("box upper bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::invalid("box", "empty box"));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(
                    "box",
                    format!("coordinate {i}: [{lo}, {hi}] is not a bounded interval"),
                ));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// The same interval in every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Bounds::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterOptions {
    pub tol_u: f64,
    pub tol_j: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            tol_u: 1e-4,
            tol_j: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartOptions {
    pub n_starts: usize,
    pub seed: u64,
    pub bounds: Bounds,
    #[serde(default)]
    pub local: LocalOptions,
    #[serde(default)]
    pub cluster: ClusterOptions,
}

impl MultistartOptions {
    pub fn new(n_starts: usize, seed: u64, bounds: Bounds) -> Self {
        MultistartOptions {
            n_starts,
            seed,
            bounds,
            local: LocalOptions::default(),
            cluster: ClusterOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Member with the lowest objective value.
    pub representative: Vec<f64>,
    pub j: f64,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Sorted by objective value, so the global clusters form a prefix.
    pub clusters: Vec<Cluster>,
    pub n_global: usize,
}

impl Clustering {
    pub fn global_clusters(&self) -> &[Cluster] {
        &self.clusters[..self.n_global]
    }

    pub fn best(&self) -> &Cluster {
        &self.clusters[0]
    }
}

/// Greedy clustering by control-norm distance.
///
/// Candidates are visited in order of increasing objective value; each joins
/// the first cluster whose representative lies within `tol_u`, otherwise it
/// opens a new one. Clusters with `J ≤ J_best + tol_j` are global.
pub fn cluster_minimizers(
    points: &[(Vec<f64>, f64)],
    norm: &Norm,
    opts: &ClusterOptions,
) -> Result<Clustering> {
    if points.is_empty() {
        return Err(Error::invalid("results", "nothing to cluster"));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].1.total_cmp(&points[b].1).then(a.cmp(&b)));
    let mut clusters: Vec<Cluster> = Vec::new();
    'outer: for i in order {
        let (u, j) = &points[i];
        for c in clusters.iter_mut() {
            if norm.distance(&c.representative, u)? <= opts.tol_u {
                c.members += 1;
                continue 'outer;
            }
        }
        clusters.push(Cluster {
            representative: u.clone(),
            j: *j,
            members: 1,
        });
    }
    let best = clusters[0].j;
    let n_global = clusters
        .iter()
        .take_while(|c| c.j <= best + opts.tol_j)
        .count();
    Ok(Clustering { clusters, n_global })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartReport {
    pub seed: u64,
    pub n_starts: usize,
    pub converged_starts: usize,
    pub failed_starts: usize,
    pub total_iterations: usize,
    pub clusters: Vec<Cluster>,
    pub n_global: usize,
}

impl MultistartReport {
    pub fn global_clusters(&self) -> &[Cluster] {
        &self.clusters[..self.n_global]
    }

    pub fn best(&self) -> &Cluster {
        &self.clusters[0]
    }
}

/// Start point `index` of a multistart run: uniform in the box, drawn from a
/// ChaCha stream keyed by `(seed, index)`.
pub fn start_point(bounds: &Bounds, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
        .collect()
}

/// Runs [`local_minimize`] from `n_starts` seeded start points and clusters
/// the converged results.
///
/// Results do not depend on thread scheduling: start points are keyed by
/// index and reports are assembled in index order.
pub fn multistart(prob: &TrackingProblem, opts: &MultistartOptions) -> Result<MultistartReport> {
    if opts.n_starts == 0 {
        return Err(Error::invalid("n_starts", "need at least one start"));
    }
    check_dim("multistart box", prob.dim(), opts.bounds.dim())?;
    opts.local.validate()?;
    let results = map_indexed(opts.n_starts, |i| {
        let u0 = start_point(&opts.bounds, opts.seed, i);
        local_minimize(prob, &u0, &opts.local)
    });

    let mut points = Vec::new();
    let mut failed = 0;
    let mut total_iterations = 0;
    let mut last_error = None;
    for r in results {
        match r {
            Ok(res) => {
                total_iterations += res.iterations;
                if res.converged {
                    points.push((res.u_star, res.j_star));
                } else {
                    failed += 1;
                    last_error = Some(format!(
                        "max_iter reached with gradient norm {:.3e}",
                        res.grad_norm
                    ));
                }
            }
            Err(e) => {
                failed += 1;
                last_error = Some(e.to_string());
            }
        }
    }
    if points.is_empty() {
        return Err(Error::AllStartsFailed {
            starts: opts.n_starts,
            last: last_error.unwrap_or_default(),
        });
    }
    let clustering = cluster_minimizers(&points, prob.control_norm(), &opts.cluster)?;
    Ok(MultistartReport {
        seed: opts.seed,
        n_starts: opts.n_starts,
        converged_starts: points.len(),
        failed_starts: failed,
        total_iterations,
        clusters: clustering.clusters,
        n_global: clustering.n_global,
    })
}

/// Dimension cap for exhaustive grid evaluation.
pub const ORACLE_MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub u: Vec<f64>,
    pub j: f64,
    /// Multi-index on the tensor grid.
    pub index: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub u_best: Vec<f64>,
    pub j_best: f64,
    pub spacing: Vec<f64>,
    /// Every grid point with `J ≤ J_best + tol`, in grid order.
    pub near_optimal: Vec<OraclePoint>,
}

/// Grid coordinate `lo + (hi − lo)·i/(m − 1)`; symmetric boxes give
/// symmetric grids containing 0 exactly when `m` is odd.
pub fn grid_coordinate(lo: f64, hi: f64, i: usize, m: usize) -> f64 {
    if m == 1 {
        return 0.5 * (lo + hi);
    }
    lo + (hi - lo) * (i as f64 / (m - 1) as f64)
}

/// Exhaustive objective evaluation on a tensor grid with `points_per_dim`
/// points per axis.
pub fn grid_oracle(
    prob: &TrackingProblem,
    bounds: &Bounds,
    points_per_dim: usize,
    tol: f64,
) -> Result<OracleResult> {
    let dim = prob.dim();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::invalid(
            "dimension",
            format!("grid oracle supports at most {ORACLE_MAX_DIM} controls, problem has {dim}"),
        ));
    }
    check_dim("oracle box", dim, bounds.dim())?;
    if points_per_dim < 2 {
        return Err(Error::invalid(
            "points_per_dim",
            "need at least 2 points per axis",
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", "must be nonnegative"));
    }
    let m = points_per_dim;
    let total = m.pow(dim as u32);
    let index_of = |mut flat: usize| -> Vec<usize> {
        let mut idx = vec![0; dim];
        for k in (0..dim).rev() {
            idx[k] = flat % m;
            flat /= m;
        }
        idx
    };
    let point_of = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| grid_coordinate(bounds.lower[k], bounds.upper[k], i, m))
            .collect()
    };
    let values = map_indexed(total, |flat| objective(prob, &point_of(&index_of(flat))));
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let (best_flat, j_best) = values.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bj), (i, &j)| if j < bj { (i, j) } else { (bi, bj) },
    );
    if !j_best.is_finite() {
        return Err(Error::NonFinite("everywhere on the oracle grid".into()));
    }
    let near_optimal = values
        .iter()
        .enumerate()
        .filter(|(_, &j)| j <= j_best + tol)
        .map(|(flat, &j)| {
            let index = index_of(flat);
            OraclePoint {
                u: point_of(&index),
                j,
                index,
            }
        })
        .collect();
    Ok(OracleResult {
        u_best: point_of(&index_of(best_flat)),
        j_best,
        spacing: (0..dim)
            .map(|k| (bounds.upper[k] - bounds.lower[k]) / (m - 1) as f64)
            .collect(),
        near_optimal,
    })
}

/// Groups near-optimal grid points into connected components (grid
/// neighbours, diagonals included); each component is represented by its
/// lowest point.
pub fn oracle_clusters(result: &OracleResult) -> Vec<OraclePoint> {
    let pts = &result.near_optimal;
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            let adjacent = pts[a]
                .index
                .iter()
                .zip(&pts[b].index)
                .all(|(x, y)| x.abs_diff(*y) <= 1);
            if adjacent {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut best: Vec<Option<usize>> = vec![None; pts.len()];
    for i in 0..pts.len() {
        let r = find(&mut parent, i);
        match best[r] {
            Some(k) if pts[k].j <= pts[i].j => {}
            _ => best[r] = Some(i),
        }
    }
    best.into_iter().flatten().map(|i| pts[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{AbsMap, AffineMap, SquareMap};
    use crate::problem::euclidean_problem;
    use crate::spaces::WeightedNorm;

    fn abs_problem(nu: f64) -> TrackingProblem {
        euclidean_problem(AbsMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, nu).unwrap()
    }

    #[test]
    fn local_minimize_finds_both_abs_basins() {
        let prob = abs_problem(1.0);
        let opts = LocalOptions::default();
        let pos = local_minimize(&prob, &[0.3], &opts).unwrap();
        let neg = local_minimize(&prob, &[-0.3], &opts).unwrap();
        assert!(pos.converged && neg.converged);
        assert!((pos.u_star[0] - 0.5).abs() < 1e-6);
        assert!((neg.u_star[0] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn local_minimize_affine_normal_equation() {
        for (y_d, u_d, u0) in [(2.0, 0.0, 5.0), (-1.0, 3.0, -4.0), (0.3, 0.1, 0.0)] {
            let prob =
                euclidean_problem(AffineMap::identity(1), vec![y_d], vec![u_d], 2.0, 1.0).unwrap();
            let r = local_minimize(&prob, &[u0], &LocalOptions::default()).unwrap();
            assert!(r.converged);
            assert!((r.u_star[0] - 0.5 * (y_d + u_d)).abs() < 1e-6);
        }
    }

    #[test]
    fn armijo_steps_never_increase_objective() {
        let prob = euclidean_problem(
            SquareMap { dim: 2 },
            vec![1.0, 0.4],
            vec![0.1, -0.2],
            2.0,
            0.5,
        )
        .unwrap();
        let r = local_minimize(&prob, &[1.7, -1.3], &LocalOptions::default()).unwrap();
        assert!(r.trace.len() > 2);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn local_minimize_rejects_non_finite_start() {
        let prob = abs_problem(1.0);
        assert!(local_minimize(&prob, &[f64::NAN], &LocalOptions::default()).is_err());
    }

    #[test]
    fn max_iter_reports_not_converged() {
        let prob = abs_problem(1.0);
        let opts = LocalOptions {
            max_iter: 1,
            ..LocalOptions::default()
        };
        let r = local_minimize(&prob, &[1.7], &opts).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn multistart_abs_two_global_clusters() {
        let prob = abs_problem(1.0);
        let opts = MultistartOptions::new(64, 7, Bounds::uniform(1, -2.0, 2.0).unwrap());
        let rep = multistart(&prob, &opts).unwrap();
        assert_eq!(rep.n_global, 2);
        let mut us: Vec<f64> = rep
            .global_clusters()
            .iter()
            .map(|c| c.representative[0])
            .collect();
        us.sort_by(f64::total_cmp);
        assert!((us[0] + 0.5).abs() < 1e-6 && (us[1] - 0.5).abs() < 1e-6);
        let g = rep.global_clusters();
        assert!((g[0].j - 0.5).abs() < 1e-9 && (g[1].j - 0.5).abs() < 1e-9);
    }

    #[test]
    fn multistart_square_two_global_clusters() {
        let prob = euclidean_problem(SquareMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let opts = MultistartOptions::new(64, 3, Bounds::uniform(1, -2.0, 2.0).unwrap());
        let rep = multistart(&prob, &opts).unwrap();
        assert_eq!(rep.n_global, 2);
        for c in rep.global_clusters() {
            assert!((c.representative[0].abs() - 0.5f64.sqrt()).abs() < 1e-6);
            assert!((c.j - 0.75).abs() < 1e-6);
        }
    }

    #[test]
    fn multistart_affine_single_cluster() {
        let prob =
            euclidean_problem(AffineMap::identity(1), vec![2.0], vec![-1.0], 2.0, 1.0).unwrap();
        let opts = MultistartOptions::new(32, 1, Bounds::uniform(1, -3.0, 3.0).unwrap());
        let rep = multistart(&prob, &opts).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert!((rep.best().representative[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn multistart_is_deterministic() {
        let prob = euclidean_problem(
            SquareMap { dim: 2 },
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            2.0,
            1.0,
        )
        .unwrap();
        let opts = MultistartOptions::new(24, 99, Bounds::uniform(2, -2.0, 2.0).unwrap());
        let a = multistart(&prob, &opts).unwrap();
        let b = multistart(&prob, &opts).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn multistart_input_errors() {
        let prob = abs_problem(1.0);
        let mut opts = MultistartOptions::new(0, 1, Bounds::uniform(1, -1.0, 1.0).unwrap());
        assert!(multistart(&prob, &opts).is_err());
        opts.n_starts = 4;
        opts.bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        assert!(multistart(&prob, &opts).is_err());
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
    }

    #[test]
    fn start_points_depend_only_on_seed_and_index() {
        let b = Bounds::uniform(3, -1.0, 1.0).unwrap();
        assert_eq!(start_point(&b, 5, 2), start_point(&b, 5, 2));
        assert_ne!(start_point(&b, 5, 2), start_point(&b, 5, 3));
        assert_ne!(start_point(&b, 5, 2), start_point(&b, 6, 2));
        assert!(start_point(&b, 5, 2)
            .iter()
            .all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn clustering_examples() {
        let norm: Norm = WeightedNorm::identity(1, 1.0).unwrap().into();
        let opts = ClusterOptions::default();
        let c = cluster_minimizers(
            &[(vec![0.5000001], 0.5), (vec![0.4999999], 0.5)],
            &norm,
            &opts,
        )
        .unwrap();
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.clusters[0].members, 2);
        let c = cluster_minimizers(&[(vec![0.5], 0.5), (vec![-0.5], 0.5)], &norm, &opts).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert_eq!(c.n_global, 2);
        let c =
            cluster_minimizers(&[(vec![0.5], 0.5), (vec![-0.5], 0.5002)], &norm, &opts).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert_eq!(c.n_global, 1);
        assert_eq!(c.global_clusters()[0].representative, vec![0.5]);
        assert!(cluster_minimizers(&[], &norm, &opts).is_err());
    }

    #[test]
    fn oracle_examples() {
        let prob = abs_problem(1.0);
        let r = grid_oracle(&prob, &Bounds::uniform(1, -1.0, 1.0).unwrap(), 4001, 1e-9).unwrap();
        assert!((r.j_best - 0.5).abs() < 1e-12);
        let reps = oracle_clusters(&r);
        assert_eq!(reps.len(), 2);
        assert!(reps.iter().any(|p| (p.u[0] - 0.5).abs() < 1e-12));
        assert!(reps.iter().any(|p| (p.u[0] + 0.5).abs() < 1e-12));

        let id = euclidean_problem(AffineMap::identity(1), vec![2.0], vec![0.0], 2.0, 1.0).unwrap();
        let r = grid_oracle(&id, &Bounds::uniform(1, -3.0, 3.0).unwrap(), 601, 0.0).unwrap();
        assert!((r.u_best[0] - 1.0).abs() < 1e-12);

        let sq = euclidean_problem(SquareMap { dim: 1 }, vec![1.0], vec![0.0], 2.0, 1.0).unwrap();
        let r = grid_oracle(&sq, &Bounds::uniform(1, -2.0, 2.0).unwrap(), 4001, 1e-6).unwrap();
        let reps = oracle_clusters(&r);
        assert_eq!(reps.len(), 2);
        for p in reps {
            assert!((p.u[0].abs() - 0.5f64.sqrt()).abs() <= r.spacing[0]);
        }
    }

    #[test]
    fn oracle_dimension_guard() {
        let prob =
            euclidean_problem(AbsMap { dim: 4 }, vec![1.0; 4], vec![0.0; 4], 2.0, 1.0).unwrap();
        assert!(grid_oracle(&prob, &Bounds::uniform(4, -1.0, 1.0).unwrap(), 5, 0.0).is_err());
    }
}
