//! WebAssembly entry points for the static page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, or throws a
//! string on invalid input. The plain Rust functions behind the exports are
//! public so they can be tested natively.

use serde::Serialize;
use tracklab::explorer::{affinity_defect, chebyshev_scan, tikhonov_sweep, ScanAxis, TargetGrid};
use tracklab::maps::{affinity_counterexample_controls, SemilinearMap};
use tracklab::problem::euclidean_problem;
use tracklab::spaces::GridNorm;
use tracklab::{
    AbsMap, Bounds, ControlToStateMap, MultistartOptions, SquareMap, TargetTuple, TrackingProblem,
};
use wasm_bindgen::prelude::*;

const SEED: u64 = 2024;

fn scalar_problem(map: &str, y_d: f64, u_d: f64, nu: f64) -> Result<TrackingProblem, String> {
    let prob = match map {
        "abs" => euclidean_problem(AbsMap { dim: 1 }, vec![y_d], vec![u_d], 2.0, nu),
        "square" => euclidean_problem(SquareMap { dim: 1 }, vec![y_d], vec![u_d], 2.0, nu),
        other => return Err(format!("unknown map {other:?}; use \"abs\" or \"square\"")),
    };
    prob.map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CurvePoint {
    nu: f64,
    j: f64,
    minimizers: Vec<f64>,
}

/// Global minimizers of `(S(u) − y_d)² + ν(u − u_d)²` for `count`
/// log-spaced weights in `[nu_min, nu_max]`.
pub fn tikhonov_curve_json(
    map: &str,
    y_d: f64,
    u_d: f64,
    nu_min: f64,
    nu_max: f64,
    count: usize,
) -> Result<String, String> {
    if !(nu_min > 0.0 && nu_max >= nu_min) || count == 0 || count > 200 {
        return Err("need 0 < nu_min ≤ nu_max and 1 ≤ count ≤ 200".into());
    }
    let base = scalar_problem(map, y_d, u_d, 1.0)?;
    let nus: Vec<f64> = (0..count)
        .map(|i| {
            let s = if count == 1 {
                0.0
            } else {
                i as f64 / (count - 1) as f64
            };
            nu_min * (nu_max / nu_min).powf(s)
        })
        .collect();
    let opts = MultistartOptions::new(
        24,
        SEED,
        Bounds::uniform(1, -3.0, 3.0).map_err(|e| e.to_string())?,
    );
    let rows = tikhonov_sweep(&base, &nus, &opts).map_err(|e| e.to_string())?;
    let points: Vec<CurvePoint> = rows
        .into_iter()
        .map(|r| CurvePoint {
            nu: r.nu,
            j: r.j_best,
            minimizers: r.representatives.into_iter().map(|u| u[0]).collect(),
        })
        .collect();
    to_json(&points)
}

#[derive(Serialize)]
struct Heatmap {
    y_d: Vec<f64>,
    u_d: Vec<f64>,
    /// Row-major over `y_d`, then `u_d`.
    multiplicity: Vec<usize>,
}

/// Number of global minimizers over a `resolution × resolution` grid of
/// targets `(y_d, u_d)`.
pub fn multiplicity_heatmap_json(
    map: &str,
    nu: f64,
    y_lo: f64,
    y_hi: f64,
    u_lo: f64,
    u_hi: f64,
    resolution: usize,
) -> Result<String, String> {
    if !(2..=60).contains(&resolution) || !(y_lo < y_hi && u_lo < u_hi) {
        return Err("need nonempty ranges and 2 ≤ resolution ≤ 60".into());
    }
    let prob = scalar_problem(map, 0.0, 0.0, nu)?;
    let grid = TargetGrid {
        base: TargetTuple::new(vec![0.0], vec![0.0]),
        axes: vec![
            ScanAxis::linspace(
                "y_d",
                TargetTuple::new(vec![1.0], vec![0.0]),
                y_lo,
                y_hi,
                resolution,
            ),
            ScanAxis::linspace(
                "u_d",
                TargetTuple::new(vec![0.0], vec![1.0]),
                u_lo,
                u_hi,
                resolution,
            ),
        ],
    };
    let reach = 2.0 + y_hi.abs().max(y_lo.abs()).sqrt() + u_hi.abs().max(u_lo.abs());
    let opts = MultistartOptions::new(
        16,
        SEED,
        Bounds::uniform(1, -reach, reach).map_err(|e| e.to_string())?,
    );
    let report = chebyshev_scan(&prob, &grid, &opts).map_err(|e| e.to_string())?;
    to_json(&Heatmap {
        y_d: grid.axes[0].values.clone(),
        u_d: grid.axes[1].values.clone(),
        multiplicity: report.cells.iter().map(|c| c.multiplicity).collect(),
    })
}

#[derive(Serialize)]
struct Counterexample {
    x: Vec<f64>,
    state_u1: Vec<f64>,
    state_u2: Vec<f64>,
    state_midpoint: Vec<f64>,
    chord_midpoint: Vec<f64>,
    defect: f64,
}

/// States of the semilinear equation for the controls `u₁ = 2(−Δ_h z + z)`,
/// `u₂ = 2Δ_h z` with `z = amplitude·sin(πx)`, their midpoint control, and
/// the chord midpoint.
pub fn semilinear_counterexample_json(n: usize, amplitude: f64) -> Result<String, String> {
    if !(3..=2000).contains(&n) || !amplitude.is_finite() {
        return Err("need 3 ≤ n ≤ 2000 and a finite amplitude".into());
    }
    let map = SemilinearMap::new(n).map_err(|e| e.to_string())?;
    let mesh = map.mesh();
    let z = mesh.sine(amplitude);
    let (u1, u2) = affinity_counterexample_controls(&z, &mesh).map_err(|e| e.to_string())?;
    let mid: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| 0.5 * (a + b)).collect();
    let s1 = map.eval(&u1).map_err(|e| e.to_string())?;
    let s2 = map.eval(&u2).map_err(|e| e.to_string())?;
    let sm = map.eval(&mid).map_err(|e| e.to_string())?;
    let norm = GridNorm::new(mesh.h(), 2.0)
        .map_err(|e| e.to_string())?
        .into();
    let defect = affinity_defect(&map, &norm, &u1, &u2, &[0.5]).map_err(|e| e.to_string())?;
    to_json(&Counterexample {
        x: mesh.nodes(),
        chord_midpoint: s1.iter().zip(&s2).map(|(a, b)| 0.5 * (a + b)).collect(),
        state_u1: s1,
        state_u2: s2,
        state_midpoint: sm,
        defect,
    })
}

#[wasm_bindgen]
pub fn tikhonov_curve(
    map: &str,
    y_d: f64,
    u_d: f64,
    nu_min: f64,
    nu_max: f64,
    count: usize,
) -> Result<String, JsValue> {
    tikhonov_curve_json(map, y_d, u_d, nu_min, nu_max, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn multiplicity_heatmap(
    map: &str,
    nu: f64,
    y_lo: f64,
    y_hi: f64,
    u_lo: f64,
    u_hi: f64,
    resolution: usize,
) -> Result<String, JsValue> {
    multiplicity_heatmap_json(map, nu, y_lo, y_hi, u_lo, u_hi, resolution)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn semilinear_counterexample(n: usize, amplitude: f64) -> Result<String, JsValue> {
    semilinear_counterexample_json(n, amplitude).map_err(|e| JsValue::from_str(&e))
}
