//! Explicit coverings of the unit ball by homothets `c + rK`, their
//! verification, and the bound they certify for a given measure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{covering_bound_generic, BoundReport, Theorem};
use crate::delta::delta_discrete;
use crate::measures::{sign_vector, DiscreteMeasure, SamplerMethod, SamplerSpec};
use crate::norms::NormSpec;
use crate::sum::NeumaierSum;
use crate::{Error, Result, DEFAULT_TOL};

/// Largest dimension accepted by grid verification.
pub const GRID_MAX_DIM: usize = 6;
/// Largest number of grid points accepted by grid verification.
pub const GRID_MAX_POINTS: f64 = 1e8;
/// Largest dimension for [`cube_cover`].
pub const CUBE_COVER_MAX_DIM: usize = 25;

const VERIFY_CHUNK: u64 = 1 << 14;

/// The set `center + ratio · K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Homothet {
    pub center: Vec<f64>,
    pub ratio: f64,
}

impl Homothet {
    /// `|x − c| ≤ r + tol`.
    pub fn contains(&self, ns: &NormSpec, x: &[f64], tol: f64) -> bool {
        ns.distance_unchecked(x, &self.center) <= self.ratio + tol
    }
}

/// Homothets of a common ratio, in the order used for partitioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovering", into = "RawCovering")]
pub struct Covering {
    norm: NormSpec,
    homothets: Vec<Homothet>,
    claimed_complete: bool,
}

#[derive(Serialize, Deserialize)]
struct RawCovering {
    norm: NormSpec,
    ratio: f64,
    centers: Vec<Vec<f64>>,
    #[serde(default)]
    claimed_complete: bool,
}

impl TryFrom<RawCovering> for Covering {
    type Error = Error;

    fn try_from(raw: RawCovering) -> Result<Self> {
        let mut c = Covering::new(raw.norm, raw.ratio, raw.centers)?;
        c.claimed_complete = raw.claimed_complete;
        Ok(c)
    }
}

impl From<Covering> for RawCovering {
    fn from(c: Covering) -> Self {
        RawCovering {
            ratio: c.ratio(),
            centers: c.homothets.into_iter().map(|h| h.center).collect(),
            norm: c.norm,
            claimed_complete: c.claimed_complete,
        }
    }
}

impl Covering {
    /// A family of homothets `centers[i] + ratio · K`. Completeness is not
    /// checked here; see [`verify_cover`].
    pub fn new(norm: NormSpec, ratio: f64, centers: Vec<Vec<f64>>) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::input(format!("homothet ratio must lie in (0, 1), got {ratio}")));
        }
        if centers.is_empty() {
            return Err(Error::input("a covering needs at least one homothet"));
        }
        for c in &centers {
            norm.check_dim(c)?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("homothet center has a non-finite coordinate"));
            }
        }
        let homothets = centers.into_iter().map(|center| Homothet { center, ratio }).collect();
        Ok(Covering { norm, homothets, claimed_complete: false })
    }

    pub fn with_claimed_complete(mut self, claimed: bool) -> Self {
        self.claimed_complete = claimed;
        self
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn homothets(&self) -> &[Homothet] {
        &self.homothets
    }

    pub fn claimed_complete(&self) -> bool {
        self.claimed_complete
    }

    /// Number of homothets `s`.
    pub fn count(&self) -> usize {
        self.homothets.len()
    }

    pub fn ratio(&self) -> f64 {
        self.homothets[0].ratio
    }

    /// Index of the first homothet containing `x`.
    pub fn first_containing(&self, x: &[f64]) -> Option<usize> {
        self.homothets.iter().position(|h| h.contains(&self.norm, x, DEFAULT_TOL))
    }

    /// Copy without homothet `index`.
    pub fn without(&self, index: usize) -> Result<Self> {
        let mut homothets = self.homothets.clone();
        if index >= homothets.len() || homothets.len() == 1 {
            return Err(Error::input("cannot remove that homothet"));
        }
        homothets.remove(index);
        Ok(Covering { norm: self.norm.clone(), homothets, claimed_complete: false })
    }
}

/// The maximum-norm ball cut into its `2^n` half-size cubes: centers
/// `(±½, …, ±½)`, ratio `½`.
pub fn cube_cover(n: usize) -> Result<Covering> {
    if !(2..=CUBE_COVER_MAX_DIM).contains(&n) {
        return Err(Error::input(format!(
            "cube cover dimension must lie in 2..={CUBE_COVER_MAX_DIM}, got {n}"
        )));
    }
    let centers = (0..1usize << n)
        .map(|mask| sign_vector(n, mask).into_iter().map(|v| 0.5 * v).collect())
        .collect();
    Ok(Covering::new(NormSpec::linf(n)?, 0.5, centers)?.with_claimed_complete(true))
}

/// Four homothets of ratio `√2/2` covering the square `[−1, 1]²`, one in each
/// corner.
pub fn planar_linf_cover() -> Covering {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let o = 1.0 - r;
    let centers = vec![vec![o, o], vec![o, -o], vec![-o, o], vec![-o, -o]];
    Covering::new(NormSpec::linf(2).expect("valid"), r, centers)
        .expect("valid")
        .with_claimed_complete(true)
}

/// Four homothets of ratio `√2/2` covering the cross-polytope
/// `|x₁| + |x₂| ≤ 1`, one at each vertex.
pub fn planar_l1_cover() -> Covering {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let o = 1.0 - r;
    let centers = vec![vec![o, 0.0], vec![0.0, o], vec![-o, 0.0], vec![0.0, -o]];
    Covering::new(NormSpec::lp(2, 1.0).expect("valid"), r, centers)
        .expect("valid")
        .with_claimed_complete(true)
}

/// `ln((1 + 1/r)^n Θ)`: logarithm of the number of homothets of ratio `r`
/// sufficient to cover any centrally symmetric body whose translative
/// covering density is at most `Θ`.
pub fn translative_cover_ln_count(n: f64, r: f64, theta: f64) -> f64 {
    n * (1.0 / r).ln_1p() + theta.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// Closed axis-aligned grid of the given spacing over the circumscribed box.
    Grid { resolution: f64 },
    /// Ball-uniform sample points.
    Sample { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verified: bool,
    /// Lowest-index checked point of `K` not covered by any homothet.
    pub witness: Option<Vec<f64>>,
    pub points_checked: u64,
    /// `true` for grid mode; sample mode only reports absence of a
    /// counterexample.
    pub exhaustive: bool,
    pub statement: String,
}

/// Checks that every probed point of `K` lies in some homothet.
pub fn verify_cover(c: &Covering, mode: VerifyMode) -> Result<VerifyReport> {
    match mode {
        VerifyMode::Grid { resolution } => verify_grid(c, resolution),
        VerifyMode::Sample { count, seed } => verify_sample(c, count, seed),
    }
}

fn verify_grid(c: &Covering, resolution: f64) -> Result<VerifyReport> {
    let ns = c.norm();
    let n = ns.dim();
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::input(format!("grid resolution must be positive, got {resolution}")));
    }
    if n > GRID_MAX_DIM {
        return Err(Error::input(format!(
            "grid verification supports dimension <= {GRID_MAX_DIM}, got {n}"
        )));
    }
    let half = ns
        .bounding_half_widths()
        .ok_or_else(|| Error::input("no bounding box for this norm"))?
        .to_vec();
    let axis: Vec<u64> = half
        .iter()
        .map(|h| (2.0 * h / resolution - 1e-9).ceil().max(1.0) as u64 + 1)
        .collect();
    let total_f: f64 = axis.iter().map(|&m| m as f64).product();
    if total_f > GRID_MAX_POINTS {
        return Err(Error::GridTooLarge { points: total_f, cap: GRID_MAX_POINTS });
    }
    let total = total_f as u64;
    let point = |mut index: u64, out: &mut [f64]| {
        for j in 0..n {
            let k = index % axis[j];
            index /= axis[j];
            out[j] = -half[j] + 2.0 * half[j] * k as f64 / (axis[j] - 1) as f64;
        }
    };

    let chunks = total.div_ceil(VERIFY_CHUNK);
    let parts: Vec<(u64, Option<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut x = vec![0.0; n];
            let mut checked = 0;
            let mut first = None;
            for i in chunk * VERIFY_CHUNK..((chunk + 1) * VERIFY_CHUNK).min(total) {
                point(i, &mut x);
                if ns.eval_unchecked(&x) > 1.0 + DEFAULT_TOL {
                    continue;
                }
                checked += 1;
                if first.is_none() && c.first_containing(&x).is_none() {
                    first = Some(i);
                }
            }
            (checked, first)
        })
        .collect();
    let points_checked = parts.iter().map(|p| p.0).sum();
    let witness = parts.iter().find_map(|p| p.1).map(|i| {
        let mut x = vec![0.0; n];
        point(i, &mut x);
        x
    });
    let verified = witness.is_none();
    let statement = if verified {
        format!("all {points_checked} grid points of K at spacing {resolution} are covered")
    } else {
        format!("uncovered grid point found among {points_checked} points of K")
    };
    Ok(VerifyReport { verified, witness, points_checked, exhaustive: true, statement })
}

fn verify_sample(c: &Covering, count: u64, seed: u64) -> Result<VerifyReport> {
    if count == 0 {
        return Err(Error::input("sample count must be positive"));
    }
    let spec = SamplerSpec::new(c.norm().clone(), SamplerMethod::Ball, seed)?;
    let points = spec.sample(count as usize)?;
    let witness = points.par_iter().find_first(|x| c.first_containing(x).is_none()).cloned();
    let verified = witness.is_none();
    let statement = if verified {
        format!("no counterexample in {count} samples (seed {seed})")
    } else {
        format!("uncovered sample point found (seed {seed})")
    };
    Ok(VerifyReport { verified, witness, points_checked: count, exhaustive: false, statement })
}

/// Masses of the greedy pieces `L_i = (K ∩ K_i) ∖ (K_1 ∪ … ∪ K_{i−1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// `v_i`, indexed like the covering's homothets.
    pub masses: Vec<f64>,
    /// Mass of atoms lying in no homothet.
    pub leftover: f64,
    /// For each atom, the homothet it was assigned to.
    pub assignment: Vec<Option<usize>>,
}

/// Assigns every atom to the lowest-index homothet containing it (gauge
/// tolerance `1e−9`) and totals the weights per homothet.
pub fn partition_masses(c: &Covering, m: &DiscreteMeasure) -> Result<Partition> {
    if m.dim() != c.norm().dim() {
        return Err(Error::DimensionMismatch { expected: c.norm().dim(), found: m.dim() });
    }
    let assignment: Vec<Option<usize>> = m.atoms().iter().map(|x| c.first_containing(x)).collect();
    let mut sums = vec![NeumaierSum::new(); c.count()];
    let mut leftover = NeumaierSum::new();
    for (slot, &w) in assignment.iter().zip(m.weights()) {
        match slot {
            Some(i) => sums[*i].add(w),
            None => leftover.add(w),
        }
    }
    Ok(Partition {
        masses: sums.iter().map(NeumaierSum::value).collect(),
        leftover: leftover.value(),
        assignment,
    })
}

/// `Δ(m) ≤ 2 − (2 − 2r) Σ v_i²` for a covering that contains every atom.
///
/// The report also carries the measure-free relaxation
/// `2 − (2 − 2r)/s` (`relaxation`), the exact `Δ(m)` (`delta`), and `Σ v_i²`.
pub fn certified_bound(c: &Covering, m: &DiscreteMeasure) -> Result<BoundReport> {
    m.check_support(c.norm())?;
    let partition = partition_masses(c, m)?;
    if let Some(index) = partition.assignment.iter().position(Option::is_none) {
        return Err(Error::CertificateInvalid { index, atom: m.atoms()[index].clone() });
    }
    let r = c.ratio();
    let s = c.count() as u64;
    let sum_sq: f64 = partition.masses.iter().map(|v| v * v).collect::<NeumaierSum>().value();
    let value = 2.0 - (2.0 - 2.0 * r) * sum_sq;
    let delta = delta_discrete(c.norm(), m)?.value;
    if delta > value + 1e-12 {
        return Err(Error::domain(format!(
            "certified bound {value} is below the exact value {delta}"
        )));
    }
    let params = [
        ("s", s as f64),
        ("r", r),
        ("sum_sq", sum_sq),
        ("relaxation", covering_bound_generic(s, r)?),
        ("delta", delta),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(BoundReport {
        theorem: Theorem::CoveringCertificate,
        n: c.norm().dim() as u64,
        params,
        value,
        strict: false,
        theta_variant: None,
        ratio: None,
    })
}
