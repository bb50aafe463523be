//! The averaged self-distance `Δ(ν) = ∫∫ |x − y| dν(x) dν(y)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::measures::{DiscreteMeasure, SamplerSpec, CHUNK_LEN};
use crate::norms::NormSpec;
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// An exact value of `Δ` (`samples == 0`, `stderr == 0`) or a Monte Carlo
/// estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DeltaEstimate {
    pub fn exact(value: f64) -> Self {
        DeltaEstimate { value, stderr: 0.0, samples: 0, seed: None }
    }

    pub fn is_exact(&self) -> bool {
        self.samples == 0
    }
}

/// Exact `Δ` of a discrete measure: `Σ_i Σ_j v_i v_j |x_i − x_j|`.
///
/// Atoms are first put in a canonical order (lexicographic on coordinates,
/// then weight), so the result does not depend on the order the measure was
/// built in. Row `i` of the upper triangle is summed with compensation,
/// the row sums are combined with compensation in index order, and the
/// total is doubled. Rows are evaluated in parallel but the partition and
/// combination order are fixed, so the thread count never changes the value.
pub fn delta_discrete(ns: &NormSpec, m: &DiscreteMeasure) -> Result<DeltaEstimate> {
    m.check_support(ns)?;
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&a, &b| {
        let (xa, xb) = (&m.atoms()[a], &m.atoms()[b]);
        xa.iter()
            .zip(xb)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(m.weights()[a].total_cmp(&m.weights()[b]))
    });
    let atoms: Vec<&[f64]> = order.iter().map(|&i| m.atoms()[i].as_slice()).collect();
    let weights: Vec<f64> = order.iter().map(|&i| m.weights()[i]).collect();

    let rows: Vec<NeumaierSum> = (0..atoms.len())
        .into_par_iter()
        .map(|i| {
            let mut row = NeumaierSum::new();
            let wi = weights[i];
            if wi == 0.0 {
                return row;
            }
            for j in (i + 1)..atoms.len() {
                row.add(wi * weights[j] * ns.distance_unchecked(atoms[i], atoms[j]));
            }
            row
        })
        .collect();
    let mut total = NeumaierSum::new();
    for row in &rows {
        total.merge(row);
    }
    let value = (2.0 * total.value()).clamp(0.0, 2.0);
    Ok(DeltaEstimate::exact(value))
}

/// Running mean and centered second moment, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }
}

/// Monte Carlo estimate of `Δ` for the sampler's measure.
///
/// Pair `i` uses two fresh points; pairs are drawn in chunks of
/// [`CHUNK_LEN`], chunk `c` from substream `c`. Chunk statistics are merged
/// in chunk order, so the estimate depends only on `(spec, pairs)`.
pub fn delta_monte_carlo(spec: &SamplerSpec, pairs: u64) -> Result<DeltaEstimate> {
    if pairs < 2 {
        return Err(Error::input(format!("need at least 2 pairs, got {pairs}")));
    }
    let chunk = CHUNK_LEN as u64;
    let chunks = pairs.div_ceil(chunk);
    let dim = spec.dim();
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = spec.stream(c);
            let len = chunk.min(pairs - c * chunk);
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            let mut moments = Moments::default();
            for _ in 0..len {
                spec.draw_into(&mut rng, &mut x)?;
                spec.draw_into(&mut rng, &mut y)?;
                moments.push(spec.norm.distance_unchecked(&x, &y));
            }
            Ok(moments)
        })
        .collect::<Result<_>>()?;
    let mut total = Moments::default();
    for part in &parts {
        total.merge(part);
    }
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(DeltaEstimate {
        value: total.mean,
        stderr: (variance / total.count as f64).sqrt(),
        samples: total.count,
        seed: Some(spec.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{uniform_vertex_measure, SamplerMethod};

    #[test]
    fn vertex_measure_examples() {
        let ns = NormSpec::linf(2).unwrap();
        let d = delta_discrete(&ns, &uniform_vertex_measure(2).unwrap()).unwrap();
        assert_eq!(d.value, 1.5);
        assert!(d.is_exact());
        assert_eq!(d.stderr, 0.0);
        let ns = NormSpec::linf(3).unwrap();
        assert_eq!(delta_discrete(&ns, &uniform_vertex_measure(3).unwrap()).unwrap().value, 1.75);
    }

    #[test]
    fn point_mass_has_zero_self_distance() {
        for ns in [NormSpec::lp(3, 2.0).unwrap(), NormSpec::linf(3).unwrap()] {
            let m = DiscreteMeasure::point_mass(vec![0.1, -0.2, 0.3]).unwrap();
            assert_eq!(delta_discrete(&ns, &m).unwrap().value, 0.0);
        }
    }

    #[test]
    fn rejects_mismatched_or_unsupported_measures() {
        let ns = NormSpec::linf(3).unwrap();
        assert!(matches!(
            delta_discrete(&ns, &uniform_vertex_measure(2).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        let ns = NormSpec::lp(2, 2.0).unwrap();
        assert!(delta_discrete(&ns, &uniform_vertex_measure(2).unwrap()).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let spec = SamplerSpec::new(NormSpec::lp(3, 1.5).unwrap(), SamplerMethod::Ball, 99).unwrap();
        let a = delta_monte_carlo(&spec, 2).unwrap();
        let b = delta_monte_carlo(&spec, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 2);
        assert_eq!(a.seed, Some(99));
        assert!(delta_monte_carlo(&spec, 1).is_err());
        assert!(delta_monte_carlo(&spec, 0).is_err());
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..123].iter().for_each(|&x| a.push(x));
        xs[123..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count, whole.count);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.m2 - whole.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn estimate_json_shape() {
        let s = serde_json::to_string(&DeltaEstimate::exact(1.5)).unwrap();
        assert_eq!(s, r#"{"value":1.5,"stderr":0.0,"samples":0}"#);
    }
}
