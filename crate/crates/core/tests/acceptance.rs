//! End-to-end acceptance checks. Run with `cargo test --test acceptance`.
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::{E, SQRT_2};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfdist::bounds::{
    bound_dim2, bound_highdim, conjectured_bound, covering_bound_generic, f_of_n_real,
    fixed_point_bound, proven_bound, theta_eq1_optimized, theta_n, DIM2_RATIO,
};
use selfdist::covering::{certified_bound, cube_cover, partition_masses, verify_cover};
use selfdist::delta::{delta_discrete, delta_monte_carlo};
use selfdist::measures::uniform_vertex_measure;
use selfdist::optimize::{
    brute_force_weights, maximize_weights, multiplicative_ascent, perturb_atoms_with,
    InnerSettings, OptimizationResult,
};
use selfdist::{
    Covering, DiscreteMeasure, NormSpec, Ratio, SamplerMethod, SamplerSpec, ThetaVariant,
    VerifyMode,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn vertex_example() -> Check {
    let start = Instant::now();
    let ns_max = 12;
    let mut worst: f64 = 0.0;
    for n in 2..=ns_max {
        let ns = NormSpec::linf(n).unwrap();
        let m = uniform_vertex_measure(n).unwrap();
        let got = delta_discrete(&ns, &m).map_err(|e| e.to_string())?.value;
        // Distinct vertices are at distance 2, so Δ = 2(1 − Σv²).
        let expected = 2.0 * (1.0 - 1.0 / (1u64 << n) as f64);
        let err = (got - expected).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("n={n}: {got} vs {expected}"))?;
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("n=2..{ns_max}, max error {worst:.1e}, {:.2?}", start.elapsed()))
}

fn planar_constants() -> Check {
    let (weak, refined) = bound_dim2();
    let weak_exact = 1.5 + SQRT_2 / 4.0;
    let refined_exact = 48.0 / 31.0 + 6.0 * SQRT_2 / 31.0;
    ensure((weak.value - weak_exact).abs() <= 1e-12, || format!("weak {}", weak.value))?;
    ensure((refined.value - refined_exact).abs() <= 1e-12, || format!("refined {}", refined.value))?;
    ensure(format!("{:.7}", refined.value) == "1.8221059", || "refined prefix".into())?;
    ensure(format!("{:.7}", weak.value) == "1.8535534", || "weak prefix".into())?;
    let fp = fixed_point_bound(4, DIM2_RATIO).map_err(|e| e.to_string())?;
    let identity = (2.0 * 4.0 - 2.0) / (4.0 - SQRT_2 / 2.0);
    ensure((fp - identity).abs() <= 1e-15, || format!("fixed point {fp} vs {identity}"))?;
    ensure((fp - refined_exact).abs() <= 1e-15, || format!("closed forms differ: {fp}"))?;
    Ok(format!("weak {:.13}, fixed point {:.13}", weak.value, refined.value))
}

fn density_chain() -> Check {
    let start = Instant::now();
    let mut worst_residual: f64 = 0.0;
    for n in 3..=1000u64 {
        let opt = theta_eq1_optimized(n as f64).map_err(|e| e.to_string())?;
        let nf = n as f64;
        let residual = (nf * opt.eta * (1.0 / opt.eta).ln() - 1.0).abs();
        worst_residual = worst_residual.max(residual);
        ensure(residual < 1e-8, || format!("n={n}: residual {residual:e}"))?;
        let t = |v| theta_n(n, v).map_err(|e| e.to_string());
        let (e1, e2, e3, e4) = (
            t(ThetaVariant::Eq1Optimized)?,
            t(ThetaVariant::Eq2Explicit)?,
            t(ThetaVariant::Eq3)?,
            t(ThetaVariant::Eq4)?,
        );
        ensure(e1 == opt.value, || format!("n={n}: theta_n disagrees with optimizer"))?;
        ensure(e1 <= e2 && e2 < e3 && e3 < e4, || {
            format!("n={n}: chain broken {e1} {e2} {e3} {e4}")
        })?;
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("n=3..1000, max residual {worst_residual:.1e}, {:.2?}", start.elapsed()))
}

fn highdim_consistency() -> Check {
    let mut worst: f64 = 0.0;
    for n in 3..=200u64 {
        for variant in ThetaVariant::ALL {
            let get = |ratio| bound_highdim(n, variant, ratio).map_err(|e| e.to_string());
            let (opt, simpl) = (get(Ratio::Optimal)?, get(Ratio::Simplified)?);
            let p = |r: &selfdist::BoundReport, k: &str| r.param(k).ok_or(format!("missing {k}"));
            let closed = p(&simpl, "value_closed_form")?;
            let (d, d_closed) = (p(&simpl, "deficit")?, p(&simpl, "deficit_closed_form")?);
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
            worst = worst.max(rel(d, d_closed));
            ensure(rel(simpl.value, closed) <= 1e-12 && rel(d, d_closed) <= 1e-12, || {
                format!("n={n} {variant:?}: forms {}/{closed}, deficits {d}/{d_closed}", simpl.value)
            })?;
            let d_opt = p(&opt, "deficit")?;
            ensure(opt.value <= simpl.value && d_opt >= d, || {
                format!("n={n} {variant:?}: optimal {} above simplified {}", opt.value, simpl.value)
            })?;
            // The value itself rounds to 2 for large n; the deficit carries the strictness.
            let floor_gap = (1.0 - n as f64).exp2();
            for (r, gap) in [(&opt, d_opt), (&simpl, d)] {
                ensure(r.value <= 2.0 && gap > 0.0, || format!("n={n}: not below 2"))?;
                ensure(r.value >= conjectured_bound(n) && gap <= floor_gap, || {
                    format!("n={n}: below the vertex value, deficit {gap:e}")
                })?;
            }
        }
    }
    Ok(format!("n=3..200, all variants, max form disagreement {worst:.1e}"))
}

fn asymptotics() -> Check {
    let start = Instant::now();
    // High-precision reference values for g(n) = f(n)·e·n²·ln n / 2 with the Eq4 density.
    let reference = [
        (1e3, 0.49835),
        (1e4, 0.56047),
        (1e6, 0.64434),
        (1e9, 0.72070),
        (1e12, 0.76860),
        (1e18, 0.82611),
        (1e24, 0.85979),
    ];
    let mut prev = 0.0;
    let mut line = Vec::new();
    for (n, expected) in reference {
        let f = f_of_n_real(n, ThetaVariant::Eq4).map_err(|e| e.to_string())?;
        let g = f * E * n * n * n.ln() / 2.0;
        ensure((g - expected).abs() < 1e-5, || format!("n={n:e}: g={g}, reference {expected}"))?;
        ensure(g > prev && g > 0.0 && g < 1.0, || format!("n={n:e}: g={g} after {prev}"))?;
        ensure(n < 1e4 || g > 0.5, || format!("n={n:e}: g={g} not above 0.5"))?;
        prev = g;
        line.push(format!("{n:e}:{g:.4}"));
    }
    within(Duration::from_secs(1), start)?;
    Ok(line.join(" "))
}

fn random_covering<R: Rng>(rng: &mut R, ns: &NormSpec) -> Covering {
    let s = rng.random_range(2..=8);
    let r = rng.random_range(0.2..0.95);
    let centers = random_atoms(rng, ns, s);
    Covering::new(ns.clone(), r, centers).unwrap()
}

fn random_norm<R: Rng>(rng: &mut R, n: usize) -> NormSpec {
    match rng.random_range(0..4) {
        0 => NormSpec::linf(n).unwrap(),
        1 => NormSpec::lp(n, 1.0).unwrap(),
        2 => NormSpec::lp(n, 2.0).unwrap(),
        _ => {
            let extra = rng.random_range(0..4);
            random_polytopal(rng, n, extra)
        }
    }
}

fn covering_soundness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pairs = 0;
    let mut tightest = f64::INFINITY;
    while pairs < 200 {
        let n = rng.random_range(2..=4);
        let ns = random_norm(&mut rng, n);
        let cover = random_covering(&mut rng, &ns);
        // Keep only atoms that some homothet contains.
        let k = rng.random_range(1..=12);
        let mut atoms = Vec::new();
        for _ in 0..1000 {
            if atoms.len() == k {
                break;
            }
            let x = random_atoms(&mut rng, &ns, 1).pop().unwrap();
            if cover.first_containing(&x).is_some() {
                atoms.push(x);
            }
        }
        if atoms.is_empty() {
            continue;
        }
        let raw: Vec<f64> = (0..atoms.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let m = DiscreteMeasure::new(atoms, raw.iter().map(|w| w / total).collect()).unwrap();
        let part = partition_masses(&cover, &m).map_err(|e| e.to_string())?;
        ensure(part.leftover == 0.0, || format!("pair {pairs}: leftover {}", part.leftover))?;
        let delta = delta_discrete(&ns, &m).map_err(|e| e.to_string())?.value;
        let cert = certified_bound(&cover, &m).map_err(|e| e.to_string())?.value;
        let generic = covering_bound_generic(cover.count() as u64, cover.ratio())
            .map_err(|e| e.to_string())?;
        ensure(delta <= cert && cert <= generic + 1e-12, || {
            format!("pair {pairs}: delta {delta}, certified {cert}, generic {generic}")
        })?;
        tightest = tightest.min(cert - delta);
        pairs += 1;
    }
    for n in 2..=4 {
        let report = verify_cover(&cube_cover(n).unwrap(), VerifyMode::Grid { resolution: 0.05 })
            .map_err(|e| e.to_string())?;
        ensure(report.verified && report.exhaustive, || format!("cube cover n={n}: {}", report.statement))?;
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{pairs} pairs, min slack {tightest:.2e}; cube covers n=2..4 verified, {:.2?}", start.elapsed()))
}

fn optimizer_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for instance in 0..50 {
        let n = rng.random_range(2..=3);
        let ns = random_norm(&mut rng, n);
        let k = rng.random_range(1..=4);
        let atoms = random_atoms(&mut rng, &ns, k);
        let fast = maximize_weights(&ns, &atoms, 8, 20_000, instance).map_err(|e| e.to_string())?;
        let brute = brute_force_weights(&ns, &atoms, 200).map_err(|e| e.to_string())?;
        let diff = (fast.best_value - brute.best_value).abs();
        worst = worst.max(diff);
        ensure(diff <= 0.02, || {
            format!("instance {instance}: {} vs oracle {}", fast.best_value, brute.best_value)
        })?;
    }
    let mut steps = 0;
    for trial in 0..50u64 {
        let n = rng.random_range(2..=4);
        let ns = random_norm(&mut rng, n);
        let k = rng.random_range(2..=16);
        let d = ns.distance_matrix(&random_atoms(&mut rng, &ns, k)).unwrap();
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let run = multiplicative_ascent(&d, raw.iter().map(|w| w / total).collect(), 2000, true);
        for (i, w) in run.trace.windows(2).enumerate() {
            ensure(w[1] >= w[0] * (1.0 - 1e-14), || {
                format!("trial {trial} step {i}: {} -> {}", w[0], w[1])
            })?;
        }
        steps += run.trace.len() - 1;
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("50 instances, max gap {worst:.2e}; {steps} monotone steps, {:.2?}", start.elapsed()))
}

fn dump_counterexample(tag: &str, result: &OptimizationResult, ns: &NormSpec) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("counterexamples");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{tag}.json"));
    let body = serde_json::json!({ "norm": ns, "result": result });
    std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

fn conjecture_probe() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut runs = 0u64;
    let mut closest = f64::INFINITY;
    let mut violations = Vec::new();
    let mut check = |tag: String, ns: &NormSpec, result: &OptimizationResult| {
        let n = ns.dim() as u64;
        let conj = conjectured_bound(n);
        let proven = proven_bound(n, ThetaVariant::Eq1Optimized).unwrap();
        closest = closest.min(conj - result.best_value);
        if result.best_value > conj + 1e-9 || result.best_value > proven + 1e-9 {
            let path = dump_counterexample(&tag, result, ns);
            violations.push(format!("{tag}: {} -> {}", result.best_value, path.display()));
        }
    };
    for n in 2..=4usize {
        for family in 0..4 {
            for i in 0..85u64 {
                let ns = match family {
                    0 => NormSpec::linf(n).unwrap(),
                    1 => NormSpec::lp(n, 1.0).unwrap(),
                    2 => NormSpec::lp(n, 2.0).unwrap(),
                    _ => {
                        let extra = rng.random_range(0..5);
                        random_polytopal(&mut rng, n, extra)
                    }
                };
                let k = rng.random_range(2..=(1 << n) + 4);
                let mut atoms = random_atoms(&mut rng, &ns, k);
                // Half of the runs also try extreme points of the bounding box.
                if i % 2 == 0 {
                    for a in &mut atoms {
                        for v in a.iter_mut() {
                            *v = v.signum();
                        }
                        *a = retract(&ns, a.clone());
                    }
                }
                let result = maximize_weights(&ns, &atoms, 3, 5000, i).map_err(|e| e.to_string())?;
                check(format!("n{n}_f{family}_{i}"), &ns, &result);
                runs += 1;
            }
        }
        for i in 0..8u64 {
            let ns = random_norm(&mut rng, n);
            let start = DiscreteMeasure::uniform(random_atoms(&mut rng, &ns, 1 << n)).unwrap();
            let inner = InnerSettings { restarts: 2, max_iters: 2000 };
            let result = perturb_atoms_with(&ns, &start, 40, 0.3, i, inner).map_err(|e| e.to_string())?;
            check(format!("n{n}_perturb_{i}"), &ns, &result);
            runs += 1;
        }
    }
    ensure(violations.is_empty(), || format!("counterexamples: {}", violations.join("; ")))?;
    ensure(runs >= 1000, || format!("only {runs} runs"))?;
    Ok(format!("{runs} runs, closest approach to 2(1-2^-n): {closest:.2e}, {:.2?}", start.elapsed()))
}

/// `E max(|D₁|, |D₂|)` for independent differences of uniform coordinates on
/// `[−1, 1]`: `|D|` has CDF `u − u²/4` on `[0, 2]`, so the mean is
/// `∫₀² 1 − F(u)² du`, integrated here by composite Simpson.
fn linf_square_constant() -> f64 {
    let f = |u: f64| {
        let c = u - u * u / 4.0;
        1.0 - c * c
    };
    let steps = 2000;
    let h = 2.0 / steps as f64;
    let mut acc = f(0.0) + f(2.0);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn monte_carlo_calibration() -> Check {
    let start = Instant::now();
    let quad = linf_square_constant();
    let target = 14.0 / 15.0;
    ensure((quad - target).abs() < 1e-12, || format!("quadrature gives {quad}"))?;
    let ns = NormSpec::linf(2).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let spec = SamplerSpec::new(ns.clone(), SamplerMethod::Ball, seed).unwrap();
        let est = delta_monte_carlo(&spec, 1_000_000).map_err(|e| e.to_string())?;
        let z = (est.value - target).abs() / est.stderr;
        worst = worst.max(z);
        ensure(z <= 4.0, || format!("seed {seed}: {} is {z:.2} standard errors off", est.value))?;
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("quadrature {quad:.15}, 20/20 seeds, max |z| {worst:.2}, {:.2?}", start.elapsed()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("vertex example", vertex_example),
        ("planar constants", planar_constants),
        ("density chain", density_chain),
        ("high-dimensional bound", highdim_consistency),
        ("asymptotics of f", asymptotics),
        ("covering soundness", covering_soundness),
        ("optimizer vs oracle", optimizer_oracle),
        ("conjecture probe", conjecture_probe),
        ("monte carlo calibration", monte_carlo_calibration),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
