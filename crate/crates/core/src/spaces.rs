//! Norms on the discrete state and control spaces.
//!
//! Finite-dimensional instances use weighted quadratic norms
//! `(scale * xᵀ W x)^{1/2}`; nodal PDE states and controls use a discrete
//! `L^p` norm with a rectangle weight per interior node. The product norm
//! `(‖y‖^p + ‖u‖^p)^{1/p}` turns the tracking problem into a metric
//! projection onto the graph of the control-to-state map.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Checks that an exponent lies in the admissible range `(1, ∞)`.
pub fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::invalid(
            name,
            format!("exponent must lie in the admissible range p ∈ (1, ∞), got {p}"),
        ));
    }
    Ok(())
}

/// Quadratic norm `x ↦ (scale · xᵀ W x)^{1/2}` with a symmetric positive
/// definite weight `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightedNormRepr", into = "WeightedNormRepr")]
pub struct WeightedNorm {
    dim: usize,
    /// Row-major `dim × dim` weight.
    weight: Vec<f64>,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct WeightedNormRepr {
    weight: Vec<Vec<f64>>,
    scale: f64,
}

impl TryFrom<WeightedNormRepr> for WeightedNorm {
    type Error = Error;

    fn try_from(r: WeightedNormRepr) -> Result<Self> {
        WeightedNorm::from_rows(&r.weight, r.scale)
    }
}

impl From<WeightedNorm> for WeightedNormRepr {
    fn from(n: WeightedNorm) -> Self {
        WeightedNormRepr {
            weight: n.weight.chunks(n.dim).map(<[f64]>::to_vec).collect(),
            scale: n.scale,
        }
    }
}

impl WeightedNorm {
    /// Builds a norm from a row-major weight matrix.
    ///
    /// Fails if the matrix is not square, not symmetric to within `1e-12`,
    /// or if a Cholesky factorization breaks down.
    pub fn new(dim: usize, weight: Vec<f64>, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid(
                "weight_matrix",
                "dimension must be positive",
            ));
        }
        check_dim("weight matrix entries", dim * dim, weight.len())?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be positive, got {scale}"),
            ));
        }
        if weight.iter().any(|w| !w.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (weight[i * dim + j], weight[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::NotPositiveDefinite(format!(
                        "entries ({i},{j}) = {a} and ({j},{i}) = {b} differ"
                    )));
                }
            }
        }
        cholesky(dim, &weight)?;
        Ok(WeightedNorm { dim, weight, scale })
    }

    pub fn from_rows(rows: &[Vec<f64>], scale: f64) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            check_dim("weight matrix row", dim, row.len())?;
        }
        WeightedNorm::new(dim, rows.concat(), scale)
    }

    pub fn identity(dim: usize, scale: f64) -> Result<Self> {
        let mut weight = vec![0.0; dim * dim];
        for i in 0..dim {
            weight[i * dim + i] = 1.0;
        }
        WeightedNorm::new(dim, weight, scale)
    }

    pub fn diagonal(diag: &[f64], scale: f64) -> Result<Self> {
        let dim = diag.len();
        let mut weight = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            weight[i * dim + i] = *d;
        }
        WeightedNorm::new(dim, weight, scale)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        WeightedNorm::new(self.dim, self.weight.clone(), scale)
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        weighted_norm(x, self)
    }
}

/// `(scale · xᵀ W x)^{1/2}`.
pub fn weighted_norm(x: &[f64], n: &WeightedNorm) -> Result<f64> {
    check_dim("weighted_norm", n.dim, x.len())?;
    let mut quad = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let row = &n.weight[i * n.dim..(i + 1) * n.dim];
        let wx: f64 = row.iter().zip(x).map(|(w, xj)| w * xj).sum();
        quad += xi * wx;
    }
    // Rounding can push an SPD form of a tiny vector slightly negative.
    Ok((n.scale * quad).max(0.0).sqrt())
}

fn cholesky(dim: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            d -= l[j * dim + k] * l[j * dim + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "non-positive pivot {d:.3e} at column {j}"
            )));
        }
        let d = d.sqrt();
        l[j * dim + j] = d;
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / d;
        }
    }
    Ok(l)
}

/// Discrete `L^p` norm `(scale · h · Σ|vᵢ|^p)^{1/p}` over interior nodes.
///
/// `h` is the measure attached to each node: the mesh width for spatial
/// fields, or `τ·h` for space-time controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridNormRepr", into = "GridNormRepr")]
pub struct GridNorm {
    h: f64,
    p: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct GridNormRepr {
    h: f64,
    p: f64,
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<GridNormRepr> for GridNorm {
    type Error = Error;

    fn try_from(r: GridNormRepr) -> Result<Self> {
        GridNorm::with_scale(r.h, r.p, r.scale)
    }
}

impl From<GridNorm> for GridNormRepr {
    fn from(g: GridNorm) -> Self {
        GridNormRepr {
            h: g.h,
            p: g.p,
            scale: g.scale,
        }
    }
}

impl GridNorm {
    pub fn new(h: f64, p: f64) -> Result<Self> {
        GridNorm::with_scale(h, p, 1.0)
    }

    pub fn with_scale(h: f64, p: f64, scale: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid(
                "h",
                format!("mesh width must be positive, got {h}"),
            ));
        }
        check_exponent("p", p)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be positive, got {scale}"),
            ));
        }
        Ok(GridNorm { h, p, scale })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        grid_norm(v, self)
    }
}

/// `(scale · h · Σᵢ|vᵢ|^p)^{1/p}`; boundary nodes are not part of `v`.
pub fn grid_norm(v: &[f64], g: &GridNorm) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::invalid("v", "grid norm of an empty grid"));
    }
    let sum: f64 = v.iter().map(|x| x.abs().powf(g.p)).sum();
    Ok((g.scale * g.h * sum).powf(1.0 / g.p))
}

/// `(ny^p + nu^p)^{1/p}`, the norm on the product of state and control spaces.
pub fn product_norm(ny: f64, nu: f64, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    if !(ny >= 0.0 && nu >= 0.0) {
        return Err(Error::invalid(
            "norm",
            format!("factor norms must be nonnegative, got ({ny}, {nu})"),
        ));
    }
    let m = ny.max(nu);
    if m == 0.0 || m.is_infinite() {
        return Ok(m);
    }
    // Factor out the larger argument so large p does not overflow.
    Ok(m * ((ny / m).powf(p) + (nu / m).powf(p)).powf(1.0 / p))
}

/// Either kind of norm a tracking problem can measure states or controls in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    Weighted(WeightedNorm),
    Grid(GridNorm),
}

impl Norm {
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        match self {
            Norm::Weighted(w) => weighted_norm(x, w),
            Norm::Grid(g) => grid_norm(x, g),
        }
    }

    /// Distance `‖a − b‖`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim("distance", a.len(), b.len())?;
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// Returns a norm with `‖·‖_new^p = factor · ‖·‖_old^p`.
    pub fn powered_rescale(&self, factor: f64, p: f64) -> Result<Norm> {
        Ok(match self {
            // The scale sits under a square root.
            Norm::Weighted(w) => Norm::Weighted(w.with_scale(w.scale * factor.powf(2.0 / p))?),
            // The scale sits under a `1/q` root.
            Norm::Grid(g) => Norm::Grid(GridNorm::with_scale(
                g.h,
                g.p,
                g.scale * factor.powf(g.p / p),
            )?),
        })
    }

    /// Dimension the norm is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Norm::Weighted(w) => Some(w.dim),
            Norm::Grid(_) => None,
        }
    }
}

impl From<WeightedNorm> for Norm {
    fn from(w: WeightedNorm) -> Self {
        Norm::Weighted(w)
    }
}

impl From<GridNorm> for Norm {
    fn from(g: GridNorm) -> Self {
        Norm::Grid(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn weighted_norm_examples() {
        let id = WeightedNorm::identity(2, 1.0).unwrap();
        assert_eq!(weighted_norm(&[1.0, 0.0], &id).unwrap(), 1.0);
        assert_eq!(weighted_norm(&[0.0, 0.0], &id).unwrap(), 0.0);
        let d = WeightedNorm::diagonal(&[2.0, 8.0], 0.5).unwrap();
        assert_relative_eq!(
            weighted_norm(&[1.0, 1.0], &d).unwrap(),
            5f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn weighted_norm_rejects_bad_input() {
        let id = WeightedNorm::identity(2, 1.0).unwrap();
        assert!(matches!(
            weighted_norm(&[1.0], &id),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            WeightedNorm::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]], 1.0),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            WeightedNorm::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]], 1.0),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(WeightedNorm::identity(2, 0.0).is_err());
    }

    #[test]
    fn product_norm_examples() {
        assert_relative_eq!(product_norm(3.0, 4.0, 2.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_eq!(product_norm(2.5, 0.0, 3.0).unwrap(), 2.5);
        assert_relative_eq!(
            product_norm(1.0, 1.0, 4.0).unwrap(),
            2f64.powf(0.25),
            epsilon = 1e-15
        );
        assert!(product_norm(1.0, 1.0, 1.0).is_err());
        assert!(product_norm(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn grid_norm_examples() {
        for &n in &[1usize, 9, 99] {
            for &p in &[1.5, 2.0, 3.0] {
                let h = 1.0 / (n as f64 + 1.0);
                let g = GridNorm::new(h, p).unwrap();
                let expected = (n as f64 / (n as f64 + 1.0)).powf(1.0 / p);
                assert_relative_eq!(
                    grid_norm(&vec![1.0; n], &g).unwrap(),
                    expected,
                    epsilon = 1e-14
                );
                assert_eq!(grid_norm(&vec![0.0; n], &g).unwrap(), 0.0);
            }
        }
        assert!(grid_norm(&[], &GridNorm::new(0.5, 2.0).unwrap()).is_err());
    }

    #[test]
    fn grid_norm_of_sine_matches_integral() {
        let n = 999;
        let h = 1.0 / (n as f64 + 1.0);
        let v: Vec<f64> = (1..=n)
            .map(|i| (std::f64::consts::PI * i as f64 * h).sin())
            .collect();
        let g = GridNorm::new(h, 2.0).unwrap();
        assert!((grid_norm(&v, &g).unwrap() - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn powered_rescale_multiplies_pth_power() {
        let w: Norm = WeightedNorm::diagonal(&[1.0, 3.0], 0.5).unwrap().into();
        let g: Norm = GridNorm::new(0.1, 3.0).unwrap().into();
        for p in [1.5, 2.0, 4.0] {
            let x = [0.3, -1.2];
            let ws = w.powered_rescale(7.0, p).unwrap();
            let gs = g.powered_rescale(7.0, p).unwrap();
            assert_relative_eq!(
                ws.norm(&x).unwrap().powf(p),
                7.0 * w.norm(&x).unwrap().powf(p),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                gs.norm(&x).unwrap().powf(p),
                7.0 * g.norm(&x).unwrap().powf(p),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn weighted_norm_serde_validates() {
        let json = r#"{"kind":"weighted","weight":[[2.0,0.5],[0.5,1.0]],"scale":0.5}"#;
        let n: Norm = serde_json::from_str(json).unwrap();
        assert_eq!(n.fixed_dim(), Some(2));
        let bad = r#"{"kind":"weighted","weight":[[1.0,2.0],[2.0,1.0]],"scale":1.0}"#;
        assert!(serde_json::from_str::<Norm>(bad).is_err());
    }

    fn spd3() -> WeightedNorm {
        WeightedNorm::from_rows(
            &[
                vec![4.0, 1.0, 0.5],
                vec![1.0, 3.0, -0.2],
                vec![0.5, -0.2, 2.0],
            ],
            0.7,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn homogeneity(x in prop::collection::vec(-10.0f64..10.0, 3), a in -5.0f64..5.0) {
            let n = spd3();
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let lhs = weighted_norm(&ax, &n).unwrap();
            let rhs = a.abs() * weighted_norm(&x, &n).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn triangle_inequality(
            x in prop::collection::vec(-10.0f64..10.0, 3),
            y in prop::collection::vec(-10.0f64..10.0, 3),
        ) {
            let n = spd3();
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let lhs = weighted_norm(&s, &n).unwrap();
            let rhs = weighted_norm(&x, &n).unwrap() + weighted_norm(&y, &n).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn product_norm_triangle_and_monotone(
            a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0, d in 0.0f64..10.0,
            p in 1.01f64..8.0,
        ) {
            let lhs = product_norm(a + c, b + d, p).unwrap();
            let rhs = product_norm(a, b, p).unwrap() + product_norm(c, d, p).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
            prop_assert!(product_norm(a + c, b, p).unwrap() >= product_norm(a, b, p).unwrap() - 1e-12);
            prop_assert!(product_norm(a, b + d, p).unwrap() >= product_norm(a, b, p).unwrap() - 1e-12);
        }

        #[test]
        fn identity_weight_is_euclidean(x in prop::collection::vec(-10.0f64..10.0, 1..6)) {
            // scale ½·2 = 1
            let n = WeightedNorm::identity(x.len(), 0.5 * 2.0).unwrap();
            let e = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((weighted_norm(&x, &n).unwrap() - e).abs() <= 1e-12 * e.max(1.0));
        }
    }
}
