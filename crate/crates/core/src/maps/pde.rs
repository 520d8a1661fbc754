//! Finite-difference control-to-state maps on `Ω = (0, 1)`.
//!
//! * [`solve_semilinear`]: `−y″ + max(0, y) = u`, homogeneous Dirichlet data,
//!   semismooth Newton with an active-set generalized derivative.
//! * [`solve_parabolic_obstacle`]: the evolution obstacle problem
//!   `∂ₜy − y″ ≥ Bu`, `y ≥ ψ`, with complementarity, `y(0) = 0`, observed at
//!   the final time. Implicit Euler in time; each step is a tridiagonal LCP
//!   solved by projected Gauss–Seidel.
//!
//! All vectors hold interior nodal values only; boundary nodes are zero.

use std::ops::Range;

use crate::error::{check_dim, Error, Result};
use crate::maps::ControlToStateMap;

/// Uniform grid of `n` interior nodes on `(0, 1)`, `h = 1/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    n: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(
                "n",
                format!("need at least 2 interior nodes, got {n}"),
            ));
        }
        Ok(Mesh1D {
            n,
            h: 1.0 / (n as f64 + 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior node coordinates `xᵢ = i·h`, `i = 1..=n`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|i| i as f64 * self.h).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }

    /// Nodal samples of `amplitude · sin(πx)`.
    pub fn sine(&self, amplitude: f64) -> Vec<f64> {
        self.sample(|x| amplitude * (std::f64::consts::PI * x).sin())
    }

    /// `(−Δ_h v)ᵢ = (−vᵢ₋₁ + 2vᵢ − vᵢ₊₁)/h²` with zero boundary values.
    pub fn neg_laplacian(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("neg_laplacian", self.n, v.len())?;
        let inv_h2 = 1.0 / (self.h * self.h);
        Ok((0..self.n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < self.n { v[i + 1] } else { 0.0 };
                (2.0 * v[i] - left - right) * inv_h2
            })
            .collect())
    }

    /// `shift·I − Δ_h` as a tridiagonal matrix.
    pub fn shifted_neg_laplacian(&self, shift: f64) -> Tridiagonal {
        let inv_h2 = 1.0 / (self.h * self.h);
        Tridiagonal {
            lower: vec![-inv_h2; self.n - 1],
            diag: vec![2.0 * inv_h2 + shift; self.n],
            upper: vec![-inv_h2; self.n - 1],
        }
    }
}

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Sub-diagonal, length `n − 1`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, length `n − 1`.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::invalid("matrix", "empty tridiagonal matrix"));
        }
        check_dim("tridiagonal sub-diagonal", n - 1, self.lower.len())?;
        check_dim("tridiagonal super-diagonal", n - 1, self.upper.len())?;
        if self.diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::invalid(
                "matrix",
                "diagonal entries must be positive",
            ));
        }
        Ok(())
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm. Stable for the diagonally dominant matrices used here.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.dim();
        check_dim("tridiagonal solve", n, rhs.len())?;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0];
        c[0] = if n > 1 { self.upper[0] / denom } else { 0.0 };
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::invalid("matrix", "zero pivot in tridiagonal solve"));
            }
            if i + 1 < n {
                c[i] = self.upper[i] / denom;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemilinearConfig {
    pub mesh: Mesh1D,
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl SemilinearConfig {
    pub fn new(mesh: Mesh1D) -> Self {
        SemilinearConfig {
            mesh,
            newton_tol: 1e-10,
            max_iter: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::invalid("newton_tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemilinearSolve {
    pub state: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm of `−Δ_h y + max(0, y) − u`.
    pub residual: f64,
}

/// Sup-norm residual of the discrete semilinear equation.
pub fn semilinear_residual(mesh: &Mesh1D, y: &[f64], u: &[f64]) -> Result<f64> {
    let ay = mesh.neg_laplacian(y)?;
    Ok(ay
        .iter()
        .zip(y)
        .zip(u)
        .map(|((a, yi), ui)| (a + yi.max(0.0) - ui).abs())
        .fold(0.0, f64::max))
}

/// Solves `−Δ_h y + max(0, y) = u` by semismooth Newton.
///
/// The generalized derivative of `max(0, ·)` is taken as 1 on `{y ≥ 0}` and
/// 0 elsewhere. Because the equation is piecewise linear, a Newton step from
/// `y` is the linear solve `(−Δ_h + D(y)) y⁺ = u` with `D` the active-set
/// indicator, and the iteration terminates once the active set repeats.
///
/// Convergence is declared when the residual is below `newton_tol`, or when
/// the active set is stationary and the residual has reached the rounding
/// floor of the stencil (relevant only on very fine meshes, where `4/h²`
/// amplifies round-off past `newton_tol`).
pub fn solve_semilinear(u: &[f64], cfg: &SemilinearConfig) -> Result<SemilinearSolve> {
    cfg.validate()?;
    let mesh = cfg.mesh;
    check_dim("solve_semilinear control", mesh.n, u.len())?;
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("in semilinear control".into()));
    }
    let base = mesh.shifted_neg_laplacian(0.0);
    let op_norm = 4.0 / (mesh.h * mesh.h);
    let u_max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut active = vec![true; mesh.n];
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let mut jac = base.clone();
        for (d, a) in jac.diag.iter_mut().zip(&active) {
            if *a {
                *d += 1.0;
            }
        }
        let y = jac.solve(u)?;
        residual = semilinear_residual(&mesh, &y, u)?;
        let next: Vec<bool> = y.iter().map(|v| *v >= 0.0).collect();
        let y_max = y.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = 32.0 * f64::EPSILON * (op_norm * y_max + u_max);
        if residual <= cfg.newton_tol || (next == active && residual <= floor) {
            return Ok(SemilinearSolve {
                state: y,
                iterations: it,
                residual,
            });
        }
        active = next;
    }
    Err(Error::NonConvergence {
        solver: "semismooth Newton",
        iterations: cfg.max_iter,
        residual,
        context: None,
    })
}

/// The two controls `u₁ = 2(−Δ_h z + z)` and `u₂ = 2Δ_h z` whose states are
/// `2z` and `−2z` while their midpoint `z` has a state different from 0.
pub fn affinity_counterexample_controls(z: &[f64], mesh: &Mesh1D) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim("counterexample profile", mesh.n, z.len())?;
    if let Some(i) = z.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::invalid(
            "z",
            format!(
                "profile must be positive on every interior node (node {i} is {})",
                z[i]
            ),
        ));
    }
    let lap = mesh.neg_laplacian(z)?;
    let u1 = lap.iter().zip(z).map(|(l, zi)| 2.0 * (l + zi)).collect();
    let u2 = lap.iter().map(|l| -2.0 * l).collect();
    Ok((u1, u2))
}

/// `u ↦ y` for the semilinear equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemilinearMap {
    pub config: SemilinearConfig,
}

impl SemilinearMap {
    pub fn new(n: usize) -> Result<Self> {
        Ok(SemilinearMap {
            config: SemilinearConfig::new(Mesh1D::new(n)?),
        })
    }

    pub fn mesh(&self) -> Mesh1D {
        self.config.mesh
    }
}

impl ControlToStateMap for SemilinearMap {
    fn name(&self) -> &str {
        "semilinear1d"
    }

    fn input_dim(&self) -> usize {
        self.config.mesh.n
    }

    fn output_dim(&self) -> usize {
        self.config.mesh.n
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        solve_semilinear(u, &self.config).map(|s| s.state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution {
    pub y: Vec<f64>,
    pub sweeps: usize,
    /// `‖min(y − ψ, My + q)‖∞`.
    pub residual: f64,
}

/// Natural residual `‖min(y − ψ, My + q)‖∞` of the obstacle LCP.
pub fn lcp_residual(m: &Tridiagonal, q: &[f64], psi: &[f64], y: &[f64]) -> f64 {
    m.mul(y)
        .iter()
        .zip(q)
        .zip(y.iter().zip(psi))
        .map(|((my, qi), (yi, pi))| (yi - pi).min(my + qi).abs())
        .fold(0.0, f64::max)
}

/// Finds `y ≥ ψ` with `My + q ≥ 0` and `(y − ψ)ᵀ(My + q) = 0` by projected
/// Gauss–Seidel, started from `max(ψ, 0)`.
///
/// Stops once the natural residual `‖min(y − ψ, My + q)‖∞` is at most `tol`.
pub fn solve_obstacle_lcp(
    m: &Tridiagonal,
    q: &[f64],
    psi: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<LcpSolution> {
    let start: Vec<f64> = psi.iter().map(|p| p.max(0.0)).collect();
    projected_gauss_seidel(m, q, psi, start, tol, max_iter)
}

fn projected_gauss_seidel(
    m: &Tridiagonal,
    q: &[f64],
    psi: &[f64],
    mut y: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<LcpSolution> {
    m.validate()?;
    let n = m.dim();
    check_dim("lcp q", n, q.len())?;
    check_dim("lcp psi", n, psi.len())?;
    check_dim("lcp start", n, y.len())?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    for (yi, pi) in y.iter_mut().zip(psi) {
        *yi = yi.max(*pi);
    }
    let mut residual = lcp_residual(m, q, psi, &y);
    if residual <= tol {
        return Ok(LcpSolution {
            y,
            sweeps: 0,
            residual,
        });
    }
    for sweep in 1..=max_iter {
        for i in 0..n {
            let mut r = q[i];
            if i > 0 {
                r += m.lower[i - 1] * y[i - 1];
            }
            if i + 1 < n {
                r += m.upper[i] * y[i + 1];
            }
            y[i] = psi[i].max(-r / m.diag[i]);
        }
        residual = lcp_residual(m, q, psi, &y);
        if residual <= tol {
            return Ok(LcpSolution {
                y,
                sweeps: sweep,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "projected Gauss-Seidel",
        iterations: max_iter,
        residual,
        context: None,
    })
}

/// Space-time discretization of the parabolic obstacle problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicGrid {
    mesh: Mesh1D,
    t_final: f64,
    n_t: usize,
    /// Interior node indices (0-based) of the control subdomain `D`.
    window: Range<usize>,
    psi: Vec<f64>,
}

impl ParabolicGrid {
    pub fn new(
        mesh: Mesh1D,
        t_final: f64,
        n_t: usize,
        window: Range<usize>,
        psi: Vec<f64>,
    ) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::invalid(
                "t_final",
                format!("must be positive, got {t_final}"),
            ));
        }
        if n_t == 0 {
            return Err(Error::invalid("n_t", "need at least one time step"));
        }
        if window.start >= window.end || window.end > mesh.n {
            return Err(Error::invalid(
                "control_window",
                format!(
                    "{window:?} is not a nonempty range of interior nodes 0..{}",
                    mesh.n
                ),
            ));
        }
        check_dim("obstacle", mesh.n, psi.len())?;
        if let Some(i) = psi.iter().position(|p| !(*p <= 0.0)) {
            return Err(Error::invalid(
                "psi",
                format!("obstacle must be ≤ 0 everywhere (node {i} is {})", psi[i]),
            ));
        }
        Ok(ParabolicGrid {
            mesh,
            t_final,
            n_t,
            window,
            psi,
        })
    }

    pub fn mesh(&self) -> Mesh1D {
        self.mesh
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.n_t as f64
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Number of control unknowns: one per time step and window node.
    pub fn control_len(&self) -> usize {
        self.n_t * self.window.len()
    }

    /// Extension by zero of the step-`k` control slice to all interior nodes.
    pub fn embed(&self, u: &[f64], k: usize) -> Vec<f64> {
        let w = self.window.len();
        let mut full = vec![0.0; self.mesh.n];
        full[self.window.clone()].copy_from_slice(&u[k * w..(k + 1) * w]);
        full
    }
}

/// Final-time state `y(T)` of the parabolic obstacle problem.
///
/// `u` is time-major: entry `k·|D| + j` is the control at step `k + 1` on the
/// `j`-th window node. Each implicit Euler step solves the LCP with
/// `M = I/τ − Δ_h` and `q = −(y_prev/τ + B u_k)`, warm-started from the
/// previous state.
pub fn solve_parabolic_obstacle(
    u: &[f64],
    grid: &ParabolicGrid,
    psor_tol: f64,
    psor_max_iter: usize,
) -> Result<Vec<f64>> {
    check_dim("parabolic control", grid.control_len(), u.len())?;
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("in parabolic control".into()));
    }
    let tau = grid.tau();
    let m = grid.mesh.shifted_neg_laplacian(1.0 / tau);
    let mut y = vec![0.0; grid.mesh.n];
    for k in 0..grid.n_t {
        let force = grid.embed(u, k);
        let q: Vec<f64> = y
            .iter()
            .zip(&force)
            .map(|(yp, f)| -(yp / tau + f))
            .collect();
        let sol =
            projected_gauss_seidel(&m, &q, &grid.psi, y, psor_tol, psor_max_iter).map_err(|e| {
                match e {
                    Error::NonConvergence {
                        solver,
                        iterations,
                        residual,
                        ..
                    } => Error::NonConvergence {
                        solver,
                        iterations,
                        residual,
                        context: Some(format!("time step {} of {}", k + 1, grid.n_t)),
                    },
                    other => other,
                }
            })?;
        y = sol.y;
    }
    Ok(y)
}

/// `u ↦ y(T)` for the parabolic obstacle problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicObstacleMap {
    pub grid: ParabolicGrid,
    pub psor_tol: f64,
    pub psor_max_iter: usize,
}

impl ParabolicObstacleMap {
    pub fn new(grid: ParabolicGrid) -> Self {
        ParabolicObstacleMap {
            grid,
            psor_tol: 1e-10,
            psor_max_iter: 100_000,
        }
    }
}

impl ControlToStateMap for ParabolicObstacleMap {
    fn name(&self) -> &str {
        "parabolic-obstacle"
    }

    fn input_dim(&self) -> usize {
        self.grid.control_len()
    }

    fn output_dim(&self) -> usize {
        self.grid.mesh.n
    }

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        solve_parabolic_obstacle(u, &self.grid, self.psor_tol, self.psor_max_iter)
    }
}
