//! Norms on `R^n` and the unit balls they define.
//!
//! Two families are supported: `ℓp` norms for `1 ≤ p ≤ ∞` and polytopal
//! norms given by support functionals, `|x| = max_k |⟨a_k, x⟩|`. The unit
//! ball of a polytopal norm is the centrally symmetric polytope
//! `{x : |⟨a_k, x⟩| ≤ 1 for all k}`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_TOL};

/// Largest dimension for which the circumscribed box of a polytopal ball is
/// computed by linear programming.
pub const POLYTOPE_BOX_MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// `ℓp` with finite `p ≥ 1`.
    Lp(f64),
    /// The maximum norm.
    LInf,
    /// `|x| = max_k |⟨a_k, x⟩|` over the listed functionals.
    Polytopal(Vec<Vec<f64>>),
}

/// A norm on `R^dim`. Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawNormSpec", into = "RawNormSpec")]
pub struct NormSpec {
    dim: usize,
    kind: NormKind,
    /// Half-widths of the smallest axis-aligned box containing the unit ball.
    half_widths: Option<Vec<f64>>,
}

impl PartialEq for NormSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kind == other.kind
    }
}

impl NormSpec {
    pub fn new(dim: usize, kind: NormKind) -> Result<Self> {
        if dim < 2 {
            return Err(Error::input(format!("dimension must be at least 2, got {dim}")));
        }
        let half_widths = match &kind {
            NormKind::Lp(p) => {
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::input(format!(
                        "lp exponent must be a finite real >= 1 (use LInf for p = inf), got {p}"
                    )));
                }
                Some(vec![1.0; dim])
            }
            NormKind::LInf => Some(vec![1.0; dim]),
            NormKind::Polytopal(functionals) => {
                validate_functionals(dim, functionals)?;
                if dim <= POLYTOPE_BOX_MAX_DIM {
                    Some(polytope_half_widths(dim, functionals)?)
                } else {
                    None
                }
            }
        };
        Ok(NormSpec { dim, kind, half_widths })
    }

    /// `ℓp` norm; an infinite `p` selects the maximum norm.
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Self::linf(dim)
        } else {
            Self::new(dim, NormKind::Lp(p))
        }
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::LInf)
    }

    pub fn polytopal(dim: usize, functionals: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(dim, NormKind::Polytopal(functionals))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn is_linf(&self) -> bool {
        matches!(self.kind, NormKind::LInf)
    }

    /// Half-widths of the circumscribed axis-aligned box of the unit ball,
    /// or `None` for polytopal norms above [`POLYTOPE_BOX_MAX_DIM`].
    pub fn bounding_half_widths(&self) -> Option<&[f64]> {
        self.half_widths.as_deref()
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    /// Evaluates `|x|`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates `|x|` without checking the length of `x`.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            NormKind::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::Lp(p) => lp_norm(x, *p),
            NormKind::Polytopal(functionals) => functionals
                .iter()
                .map(|a| dot(a, x).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `|x − y|` without allocating.
    pub fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            NormKind::LInf => x
                .iter()
                .zip(y)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
            NormKind::Lp(p) if *p == 1.0 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            _ => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                self.eval_unchecked(&diff)
            }
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// `|x| ≤ 1 + tol`.
    pub fn in_unit_ball(&self, x: &[f64], tol: f64) -> Result<bool> {
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::input(format!("tolerance must be nonnegative, got {tol}")));
        }
        Ok(self.eval(x)? <= 1.0 + tol)
    }

    /// Membership with the default tolerance.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.in_unit_ball(x, DEFAULT_TOL)
    }

    /// Pairwise distances `D[i][j] = |x_i − x_j|`.
    pub fn distance_matrix(&self, points: &[Vec<f64>]) -> Result<DistanceMatrix> {
        for p in points {
            self.check_dim(p)?;
        }
        let k = points.len();
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            for j in (i + 1)..k {
                let d = self.distance_unchecked(&points[i], &points[j]);
                data[i * k + j] = d;
                data[j * k + i] = d;
            }
        }
        Ok(DistanceMatrix { size: k, data })
    }
}

/// Dense symmetric matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    /// `D v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.size).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ D v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(&self.apply(v), v)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // Scale by the largest entry so the power sum cannot overflow.
    let scale = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

fn validate_functionals(dim: usize, functionals: &[Vec<f64>]) -> Result<()> {
    if functionals.is_empty() {
        return Err(Error::input("polytopal norm needs at least one functional"));
    }
    for (k, a) in functionals.iter().enumerate() {
        if a.len() != dim {
            return Err(Error::input(format!(
                "functional {k} has length {}, expected {dim}",
                a.len()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("functional {k} has a non-finite entry")));
        }
    }
    let flat: Vec<f64> = functionals.iter().flatten().copied().collect();
    let matrix = DMatrix::from_row_slice(functionals.len(), dim, &flat);
    let scale = flat.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let rank = matrix.rank(1e-12 * scale.max(1.0) * dim as f64);
    if rank < dim {
        return Err(Error::input(format!(
            "functionals span a subspace of rank {rank} < {dim}; not a norm"
        )));
    }
    Ok(())
}

/// Maximizes `x_j` over `{x : |⟨a_k, x⟩| ≤ 1}` for every coordinate `j`.
fn polytope_half_widths(dim: usize, functionals: &[Vec<f64>]) -> Result<Vec<f64>> {
    (0..dim)
        .map(|j| {
            let mut problem = Problem::new(OptimizationDirection::Maximize);
            let vars: Vec<_> = (0..dim)
                .map(|i| {
                    let obj = if i == j { 1.0 } else { 0.0 };
                    problem.add_var(obj, (f64::NEG_INFINITY, f64::INFINITY))
                })
                .collect();
            for a in functionals {
                let expr: Vec<_> = vars.iter().copied().zip(a.iter().copied()).collect();
                problem.add_constraint(expr.as_slice(), ComparisonOp::Le, 1.0);
                problem.add_constraint(expr.as_slice(), ComparisonOp::Ge, -1.0);
            }
            let solution = problem
                .solve()
                .map_err(|e| Error::input(format!("bounding box LP failed: {e}")))?;
            Ok(solution.objective())
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct RawNormSpec {
    dim: usize,
    kind: RawKind,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawKind {
    Lp(PValue),
    Polytopal(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PValue {
    Finite(f64),
    Named(String),
}

impl TryFrom<RawNormSpec> for NormSpec {
    type Error = Error;

    fn try_from(raw: RawNormSpec) -> Result<Self> {
        let kind = match raw.kind {
            RawKind::Lp(PValue::Finite(p)) => NormKind::Lp(p),
            RawKind::Lp(PValue::Named(s)) if matches!(s.as_str(), "inf" | "infinity") => {
                NormKind::LInf
            }
            RawKind::Lp(PValue::Named(s)) => {
                return Err(Error::input(format!("unrecognized lp exponent {s:?}")))
            }
            RawKind::Polytopal(f) => NormKind::Polytopal(f),
        };
        NormSpec::new(raw.dim, kind)
    }
}

impl From<NormSpec> for RawNormSpec {
    fn from(ns: NormSpec) -> Self {
        let kind = match ns.kind {
            NormKind::Lp(p) => RawKind::Lp(PValue::Finite(p)),
            NormKind::LInf => RawKind::Lp(PValue::Named("inf".into())),
            NormKind::Polytopal(f) => RawKind::Polytopal(f),
        };
        RawNormSpec { dim: ns.dim, kind }
    }
}
