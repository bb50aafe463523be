#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use selfdist::{DiscreteMeasure, NormSpec};

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// A symmetric polytope norm from `n + extra` Gaussian functionals.
pub fn random_polytopal<R: Rng>(rng: &mut R, n: usize, extra: usize) -> NormSpec {
    loop {
        let functionals: Vec<Vec<f64>> = (0..n + extra)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        if let Ok(ns) = NormSpec::polytopal(n, functionals) {
            return ns;
        }
    }
}

pub fn standard_norms(n: usize) -> Vec<NormSpec> {
    vec![
        NormSpec::linf(n).unwrap(),
        NormSpec::lp(n, 1.0).unwrap(),
        NormSpec::lp(n, 2.0).unwrap(),
    ]
}

/// Pulls `x` back into the unit ball by radial scaling.
pub fn retract(ns: &NormSpec, mut x: Vec<f64>) -> Vec<f64> {
    let g = ns.eval(&x).unwrap();
    if g > 1.0 {
        for v in &mut x {
            *v /= g;
        }
        // Guard against the quotient landing an ulp outside.
        let mut shrink = 1e-15;
        while ns.eval(&x).unwrap() > 1.0 {
            for v in &mut x {
                *v *= 1.0 - shrink;
            }
            shrink *= 2.0;
        }
    }
    x
}

/// Points drawn from the bounding box of `K` and retracted into `K`.
pub fn random_atoms<R: Rng>(rng: &mut R, ns: &NormSpec, k: usize) -> Vec<Vec<f64>> {
    let h = ns.bounding_half_widths().expect("bounded norm").to_vec();
    (0..k)
        .map(|_| {
            let x = h.iter().map(|&w| rng.random_range(-w..=w)).collect();
            retract(ns, x)
        })
        .collect()
}

pub fn random_measure<R: Rng>(rng: &mut R, ns: &NormSpec, k: usize) -> DiscreteMeasure {
    let atoms = random_atoms(rng, ns, k);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    DiscreteMeasure::new(atoms, weights).unwrap()
}
