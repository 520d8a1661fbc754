//! Tracking problems `min ‖S(u) − y_d‖^p + ‖u − u_d‖^p`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::maps::{ControlToStateMap, SharedMap};
use crate::spaces::{check_exponent, product_norm, Norm};

/// Default central-difference step for [`gradient_fd`].
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Desired state and desired control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTuple {
    pub y_d: Vec<f64>,
    pub u_d: Vec<f64>,
}

impl TargetTuple {
    pub fn new(y_d: Vec<f64>, u_d: Vec<f64>) -> Self {
        TargetTuple { y_d, u_d }
    }

    /// `(1 − s)·self + s·other`.
    pub fn lerp(&self, other: &TargetTuple, s: f64) -> Result<TargetTuple> {
        check_dim("target state", self.y_d.len(), other.y_d.len())?;
        check_dim("target control", self.u_d.len(), other.u_d.len())?;
        Ok(TargetTuple {
            y_d: lerp(&self.y_d, &other.y_d, s),
            u_d: lerp(&self.u_d, &other.u_d, s),
        })
    }
}

pub(crate) fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - s) * x + s * y)
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrackingProblem {
    map: SharedMap,
    target: TargetTuple,
    p: f64,
    state_norm: Norm,
    control_norm: Norm,
}

impl TrackingProblem {
    pub fn new(
        map: SharedMap,
        target: TargetTuple,
        p: f64,
        state_norm: Norm,
        control_norm: Norm,
    ) -> Result<Self> {
        check_exponent("p", p)?;
        check_dim("desired state", map.output_dim(), target.y_d.len())?;
        check_dim("desired control", map.input_dim(), target.u_d.len())?;
        if let Some(d) = state_norm.fixed_dim() {
            check_dim("state norm", map.output_dim(), d)?;
        }
        if let Some(d) = control_norm.fixed_dim() {
            check_dim("control norm", map.input_dim(), d)?;
        }
        Ok(TrackingProblem {
            map,
            target,
            p,
            state_norm,
            control_norm,
        })
    }

    pub fn map(&self) -> &SharedMap {
        &self.map
    }

    pub fn target(&self) -> &TargetTuple {
        &self.target
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn state_norm(&self) -> &Norm {
        &self.state_norm
    }

    pub fn control_norm(&self) -> &Norm {
        &self.control_norm
    }

    pub fn dim(&self) -> usize {
        self.map.input_dim()
    }

    /// Same problem, different target.
    pub fn with_target(&self, target: TargetTuple) -> Result<Self> {
        TrackingProblem::new(
            Arc::clone(&self.map),
            target,
            self.p,
            self.state_norm.clone(),
            self.control_norm.clone(),
        )
    }

    pub fn state(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim("control", self.dim(), u.len())?;
        self.map.eval(u)
    }

    pub fn objective(&self, u: &[f64]) -> Result<f64> {
        objective(self, u)
    }

    /// Objective value given a precomputed state `y = S(u)`.
    pub fn objective_with_state(&self, y: &[f64], u: &[f64]) -> Result<f64> {
        let ey = self.state_norm.distance(y, &self.target.y_d)?;
        let eu = self.control_norm.distance(u, &self.target.u_d)?;
        Ok(ey.powf(self.p) + eu.powf(self.p))
    }

    /// Product-norm distance between two graph points `(S(a), a)` and `(S(b), b)`.
    pub fn graph_distance(&self, ya: &[f64], a: &[f64], yb: &[f64], b: &[f64]) -> Result<f64> {
        product_norm(
            self.state_norm.distance(ya, yb)?,
            self.control_norm.distance(a, b)?,
            self.p,
        )
    }
}

/// `‖S(u) − y_d‖^p + ‖u − u_d‖^p` in the problem's norms.
pub fn objective(prob: &TrackingProblem, u: &[f64]) -> Result<f64> {
    let y = prob
        .state(u)
        .map_err(|e| e.context(format!("evaluating {} map", prob.map.name())))?;
    prob.objective_with_state(&y, u)
}

/// Recasts `‖S(u) − y_d‖^p + ν‖u − u_d‖^p` as a plain tracking problem by
/// folding `ν` into the control norm.
pub fn rescale_nu(prob: &TrackingProblem, nu: f64) -> Result<TrackingProblem> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid("nu", format!("must be positive, got {nu}")));
    }
    TrackingProblem::new(
        Arc::clone(&prob.map),
        prob.target.clone(),
        prob.p,
        prob.state_norm.clone(),
        prob.control_norm.powered_rescale(nu, prob.p)?,
    )
}

/// Central-difference gradient; costs `2·dim` objective evaluations.
pub fn gradient_fd(prob: &TrackingProblem, u: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(
            "step",
            format!("must be positive, got {step}"),
        ));
    }
    check_dim("gradient point", prob.dim(), u.len())?;
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("in gradient point".into()));
    }
    let mut probe = u.to_vec();
    let mut grad = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        probe[i] = u[i] + step;
        let fp = objective(prob, &probe)?;
        probe[i] = u[i] - step;
        let fm = objective(prob, &probe)?;
        probe[i] = u[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFinite(format!("at gradient probe {i}")));
        }
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(grad)
}

/// Convenience constructor for problems with Euclidean-type weighted norms.
pub fn euclidean_problem(
    map: impl ControlToStateMap + 'static,
    y_d: Vec<f64>,
    u_d: Vec<f64>,
    p: f64,
    nu: f64,
) -> Result<TrackingProblem> {
    use crate::spaces::WeightedNorm;
    let state = WeightedNorm::identity(map.output_dim(), 1.0)?;
    let control = WeightedNorm::identity(map.input_dim(), 1.0)?;
    let base = TrackingProblem::new(
        Arc::new(map),
        TargetTuple::new(y_d, u_d),
        p,
        state.into(),
        control.into(),
    )?;
    rescale_nu(&base, nu)
}
