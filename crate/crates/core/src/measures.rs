//! Finitely supported probability measures on the unit ball and seeded
//! samplers for continuous reference measures.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::norms::{NormKind, NormSpec};
use crate::sum::compensated_sum;
use crate::{Error, Result, DEFAULT_TOL};

/// Atom-count limit above which [`uniform_vertex_measure`] refuses to build.
pub const VERTEX_ATOM_LIMIT: usize = 1 << 26;

/// Points per substream of a sampler.
pub const CHUNK_LEN: usize = 1024;

/// Rejection window for polytopal samplers; `1 / REJECTION_WINDOW` must stay
/// below [`MIN_ACCEPTANCE_RATE`].
pub const REJECTION_WINDOW: u64 = 10_000_000;

/// Acceptance rate below which rejection sampling is declared infeasible.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-6;

/// Relative slack within which weight sums are rescaled to one.
const RENORMALIZE_TOL: f64 = 1e-9;

/// A probability measure with finitely many atoms.
///
/// Weights are nonnegative and sum to one. Atoms are pairwise distinct;
/// bitwise-equal atoms are merged on construction and their weights added.
/// Membership of the atoms in a particular unit ball is checked with
/// [`DiscreteMeasure::check_support`] or enforced by [`DiscreteMeasure::on`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms, raw.weights)
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::input("a measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::input(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("atom {i} has a non-finite coordinate")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::input(format!("weights must be finite and nonnegative, got {w}")));
        }
        // Sorted so the normalization does not depend on atom order.
        let mut sorted = weights.clone();
        sorted.sort_by(f64::total_cmp);
        let total = compensated_sum(&sorted);
        if (total - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::input(format!("weights sum to {total}, not 1")));
        }

        let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(atoms.len());
        let mut merged_atoms = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (a, w) in atoms.into_iter().zip(weights) {
            let key: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
            match index.get(&key) {
                Some(&i) => merged_weights[i] += w,
                None => {
                    index.insert(key, merged_atoms.len());
                    merged_atoms.push(a);
                    merged_weights.push(w);
                }
            }
        }
        if total != 1.0 {
            for w in &mut merged_weights {
                *w /= total;
            }
        }
        Ok(DiscreteMeasure { atoms: merged_atoms, weights: merged_weights })
    }

    /// Builds a measure and checks that it is supported in the unit ball of `ns`.
    pub fn on(ns: &NormSpec, atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(atoms, weights)?;
        m.check_support(ns)?;
        Ok(m)
    }

    /// Equal weights on the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let k = atoms.len();
        Self::new(atoms, vec![1.0 / k.max(1) as f64; k])
    }

    /// Unit mass at a single point.
    pub fn point_mass(x: Vec<f64>) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    /// Fails unless every atom lies in the unit ball of `ns` (default tolerance).
    pub fn check_support(&self, ns: &NormSpec) -> Result<()> {
        if self.dim() != ns.dim() {
            return Err(Error::DimensionMismatch { expected: ns.dim(), found: self.dim() });
        }
        for (i, a) in self.atoms.iter().enumerate() {
            let g = ns.eval_unchecked(a);
            if g > 1.0 + DEFAULT_TOL {
                return Err(Error::input(format!(
                    "atom {i} has norm {g}, outside the unit ball"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform measure on the `2^n` vertices `(±1, …, ±1)` of the cube.
pub fn uniform_vertex_measure(n: usize) -> Result<DiscreteMeasure> {
    uniform_vertex_measure_with_limit(n, VERTEX_ATOM_LIMIT)
}

/// As [`uniform_vertex_measure`], refusing when `2^n ≥ atom_limit`.
pub fn uniform_vertex_measure_with_limit(n: usize, atom_limit: usize) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::input(format!("dimension must be at least 2, got {n}")));
    }
    if n >= usize::BITS as usize - 1 || (1usize << n) >= atom_limit {
        return Err(Error::input(format!(
            "2^{n} vertex atoms exceed the limit of {atom_limit}"
        )));
    }
    let count = 1usize << n;
    let atoms: Vec<Vec<f64>> = (0..count).map(|mask| sign_vector(n, mask)).collect();
    // Sign vectors are distinct, so no merging pass is needed.
    Ok(DiscreteMeasure { atoms, weights: vec![1.0 / count as f64; count] })
}

/// Vertex of the cube whose bit `i` in `mask` selects `−1` for coordinate `i`.
pub fn sign_vector(n: usize, mask: usize) -> Vec<f64> {
    (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMethod {
    /// Uniform on the cube vertices; maximum norm only.
    Vertex,
    /// Uniform (Lebesgue) on the unit ball.
    Ball,
    /// Cone measure on the unit sphere: a ball-uniform point pushed radially
    /// to the boundary.
    Boundary,
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(SamplerMethod::Vertex),
            "ball" => Ok(SamplerMethod::Ball),
            "boundary" => Ok(SamplerMethod::Boundary),
            other => Err(Error::input(format!("unknown sampler {other:?}"))),
        }
    }
}

/// A seeded sampler on the unit ball of a norm.
///
/// Points are produced in chunks of [`CHUNK_LEN`]; chunk `c` is drawn from
/// its own ChaCha8 stream keyed by `(seed, c)`, so any chunk can be generated
/// independently and results do not depend on how chunks are scheduled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub norm: NormSpec,
    pub method: SamplerMethod,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(norm: NormSpec, method: SamplerMethod, seed: u64) -> Result<Self> {
        if method == SamplerMethod::Vertex && !norm.is_linf() {
            return Err(Error::input("vertex sampler requires the maximum norm"));
        }
        if matches!(norm.kind(), NormKind::Polytopal(_)) && norm.bounding_half_widths().is_none() {
            return Err(Error::input(format!(
                "polytopal sampling is limited to dimension {}",
                crate::norms::POLYTOPE_BOX_MAX_DIM
            )));
        }
        Ok(SamplerSpec { norm, method, seed })
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    /// Generator for substream `stream`.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Draws one point into `out`, which must have length `dim`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match self.method {
            SamplerMethod::Vertex => {
                for v in out.iter_mut() {
                    *v = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
                Ok(())
            }
            SamplerMethod::Ball => self.draw_ball(rng, out),
            SamplerMethod::Boundary => self.draw_boundary(rng, out),
        }
    }

    fn draw_ball<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match self.norm.kind() {
            NormKind::LInf => {
                for v in out.iter_mut() {
                    *v = rng.random_range(-1.0..=1.0);
                }
                Ok(())
            }
            NormKind::Lp(p) => {
                // Generalized-Gaussian radial construction: with g_i of density
                // ∝ exp(−|t|^p) and an independent Exp(1) variable w,
                // g / (Σ|g_i|^p + w)^{1/p} is uniform on the ℓp ball.
                let sum = fill_generalized_gaussian(rng, *p, out);
                let w: f64 = Exp1.sample(rng);
                let scale = (sum + w).powf(1.0 / p);
                out.iter_mut().for_each(|v| *v /= scale);
                Ok(())
            }
            NormKind::Polytopal(_) => self.draw_rejection(rng, out),
        }
    }

    fn draw_boundary<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match self.norm.kind() {
            NormKind::LInf => {
                let n = out.len();
                let face = rng.random_range(0..n);
                for v in out.iter_mut() {
                    *v = rng.random_range(-1.0..=1.0);
                }
                out[face] = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Ok(())
            }
            NormKind::Lp(p) => loop {
                let sum = fill_generalized_gaussian(rng, *p, out);
                if sum > 0.0 {
                    let g = self.norm.eval_unchecked(out);
                    out.iter_mut().for_each(|v| *v /= g);
                    return Ok(());
                }
            },
            NormKind::Polytopal(_) => loop {
                self.draw_rejection(rng, out)?;
                let g = self.norm.eval_unchecked(out);
                if g > 0.0 {
                    out.iter_mut().for_each(|v| *v /= g);
                    return Ok(());
                }
            },
        }
    }

    fn draw_rejection<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let half = self
            .norm
            .bounding_half_widths()
            .expect("sampler construction checks the bounding box");
        // No acceptance in a full window means the rate is below
        // 1 / REJECTION_WINDOW, itself below MIN_ACCEPTANCE_RATE.
        for _ in 0..REJECTION_WINDOW {
            for (v, h) in out.iter_mut().zip(half) {
                *v = rng.random_range(-*h..=*h);
            }
            if self.norm.eval_unchecked(out) <= 1.0 {
                return Ok(());
            }
        }
        Err(Error::SamplerInfeasible { trials: REJECTION_WINDOW, rate: 0.0 })
    }

    /// The `CHUNK_LEN` points of chunk `chunk`.
    pub fn chunk(&self, chunk: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = self.stream(chunk);
        (0..CHUNK_LEN)
            .map(|_| {
                let mut x = vec![0.0; self.dim()];
                self.draw_into(&mut rng, &mut x)?;
                Ok(x)
            })
            .collect()
    }

    /// The first `count` points of the sample stream.
    pub fn sample(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::input("sample count must be positive"));
        }
        let chunks = count.div_ceil(CHUNK_LEN) as u64;
        let parts: Vec<Vec<Vec<f64>>> =
            (0..chunks).into_par_iter().map(|c| self.chunk(c)).collect::<Result<_>>()?;
        let mut points: Vec<Vec<f64>> = parts.into_iter().flatten().collect();
        points.truncate(count);
        Ok(points)
    }
}

/// Fills `out` with independent draws of density `∝ exp(−|t|^p)` and returns
/// `Σ|out_i|^p`.
fn fill_generalized_gaussian<R: Rng + ?Sized>(rng: &mut R, p: f64, out: &mut [f64]) -> f64 {
    let gamma = Gamma::new(1.0 / p, 1.0).expect("shape 1/p is positive for p >= 1");
    let mut sum = 0.0;
    for v in out.iter_mut() {
        let y: f64 = gamma.sample(rng);
        sum += y;
        let magnitude = y.powf(1.0 / p);
        *v = if rng.random::<bool>() { magnitude } else { -magnitude };
    }
    sum
}

/// Convenience wrapper: `count` points from a sampler.
pub fn sample_ball(spec: &SamplerSpec, count: usize) -> Result<Vec<Vec<f64>>> {
    spec.sample(count)
}
