//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zeno::harness::{builtin, builtin_scenarios, run_sweep, Dynamics, Measurement, ScenarioConfig};
use zeno::lindblad::GeneratorPath;
use zeno::random::{random_channel, random_gapped_channel, random_gkls};
use zeno::spectral::{
    gap_projector, power_limit_projector, projector_derivative, riesz_contour, riesz_schur, spectrum_report,
    CLUSTER_RADIUS,
};
use zeno::superop::{
    apply, c, choi_matrix, classify_map, expm_superop, kraus_to_superop, norm_1to1_estimate, rank1_lower_bound,
    trace_norm, CMatrix, KrausSet, SuperOp, ONE, ZERO,
};
use zeno::timedep::{
    intercepted_product, lemma4_bound, propagate, telescoping_check, zeno_limit_timedep, InterceptedConfig,
};
use zeno::zeno_static::{central_quantity, chernoff_gap, generator_variants, zeno_product, ZenoStaticScenario};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() <= secs, format!("took {:.2}s, budget {secs}s", elapsed.as_secs_f64()))
}

fn pinching() -> SuperOp {
    SuperOp::new(2, CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ZERO, ZERO, ONE]))).unwrap()
}

fn static_scenario(cfg: &ScenarioConfig) -> ZenoStaticScenario {
    let Dynamics::Static(g) = &cfg.dynamics else { panic!("{} is not static", cfg.name) };
    ZenoStaticScenario::new(cfg.measurement.superop(), g.superop().clone(), cfg.t, cfg.gap_min).unwrap()
}

fn path_of(cfg: &ScenarioConfig) -> GeneratorPath {
    let Dynamics::Path(p) = &cfg.dynamics else { panic!("{} is not time-dependent", cfg.name) };
    p.clone()
}

fn classic_zeno() -> Outcome {
    let start = Instant::now();
    let cfg = builtin("classic_zeno").map_err(|e| e.to_string())?;
    let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let errors: Vec<f64> = result.records.iter().map(|r| r.error).collect();
    // The limit is the pinching itself, so the error can be recomputed
    // without the library's limit.
    let s = static_scenario(&cfg);
    for r in &result.records {
        let direct = zeno_product(&s, r.n).unwrap().distance(&pinching());
        ensure((direct - r.error).abs() <= 1e-12, format!("n = {}: {direct} vs {}", r.n, r.error))?;
    }
    ensure(errors.windows(2).all(|w| w[1] < w[0]), "errors not strictly decreasing")?;
    let (first, last) = (errors[0], *errors.last().unwrap());
    ensure(result.records.last().unwrap().n == 1024 && result.records[0].n == 4, "sweep must span 4..1024")?;
    ensure(last <= 1e-2, format!("error(1024) = {last:.3e}"))?;
    ensure(last <= first / 50.0, format!("error(1024) = {last:.3e} > error(4)/50 = {:.3e}", first / 50.0))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("error(4) = {first:.3e}, error(1024) = {last:.3e}"))
}

fn chernoff() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let d = 2 + (seed as usize % 2);
        let ch = kraus_to_superop(&random_channel(&mut rng, d, 2));
        for n in [1, 2, 4, 8, 16, 32, 64] {
            let g = chernoff_gap(&ch, n, seed).map_err(|e| e.to_string())?;
            // Independent right-hand side: √n·√d·σ_max(C − 𝟙).
            let shifted = &ch - &SuperOp::identity(d);
            let sigma = shifted.matrix().clone().singular_values().max();
            let rhs = (n as f64).sqrt() * (d as f64).sqrt() * sigma;
            ensure((rhs - g.rhs).abs() <= 1e-12 * rhs.max(1.0), format!("rhs mismatch seed {seed}"))?;
            ensure(g.lhs_lower <= rhs + 1e-9, format!("seed {seed} n {n}: {} > {rhs}", g.lhs_lower))?;
            worst = worst.max(g.lhs_lower - rhs);
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("700 cases, max(lhs - rhs) = {worst:.3e}"))
}

fn projectors() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let d = 2 + (seed as usize % 2);
        let (_, m) = random_gapped_channel(&mut rng, d, 0.5);
        let report = spectrum_report(&m, 0.05).map_err(|e| e.to_string())?;
        let ps = [
            riesz_contour(&m, &report.outer_contour()).map_err(|e| e.to_string())?,
            riesz_schur(&m, c(1.0, 0.0), CLUSTER_RADIUS).map_err(|e| e.to_string())?,
            power_limit_projector(&m, 1e-13, 64).map_err(|e| e.to_string())?,
        ];
        for i in 0..3 {
            for j in i + 1..3 {
                let dist = ps[i].proj.distance(&ps[j].proj);
                worst = worst.max(dist);
                ensure(dist <= 1e-8, format!("seed {seed}: methods {i},{j} differ by {dist:.3e}"))?;
            }
            let p = &ps[i].proj;
            let idem = p.compose(p).distance(p);
            ensure(idem <= 1e-10, format!("seed {seed}: idempotency {idem:.3e}"))?;
            ensure(classify_map(p, 1e-7).is_operation(), format!("seed {seed}: not a quantum operation"))?;
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("50 operations, max pairwise distance {worst:.3e}"))
}

fn lemma4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let path = GeneratorPath::linear(random_gkls(&mut rng, 2), random_gkls(&mut rng, 2), 1.0).unwrap();
    let l = path.lipschitz_bound();
    let mut count = 0;
    for t in [0.0, 0.3, 0.6] {
        for s in [0.0, 0.3, 0.6] {
            for delta in [0.1, 0.05, 0.025] {
                let b = lemma4_bound(&path, t, s, delta, 4).map_err(|e| e.to_string())?;
                let rhs = l * (delta * f64::abs(t - s) + delta * delta / 2.0);
                ensure(b.lhs_lower <= rhs + 1e-8, format!("(t, s, δ) = ({t}, {s}, {delta}): {} > {rhs}", b.lhs_lower))?;
                count += 1;
            }
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("{count} grid points, L = {l:.4}"))
}

fn telescoping() -> Outcome {
    let start = Instant::now();
    let cfg = builtin("timedep_drive").map_err(|e| e.to_string())?;
    let path = path_of(&cfg);
    let mut lines = Vec::new();
    for m in [2, 4, 8] {
        let ic =
            InterceptedConfig::new(cfg.measurement.superop(), path.clone(), 64 * m, m).map_err(|e| e.to_string())?;
        let r = telescoping_check(&ic, 1).map_err(|e| e.to_string())?;
        let bound = 3.0 * path.lipschitz_bound() / m as f64;
        ensure(r.dist_lower <= bound, format!("m = {m}: {} > {bound}", r.dist_lower))?;
        lines.push(format!("m={m}: {:.2e}<={bound:.2e}", r.dist_lower));
    }
    within(start.elapsed(), 60.0)?;
    Ok(lines.join(", "))
}

fn time_dependent_zeno() -> Outcome {
    let start = Instant::now();
    let cfg = builtin("timedep_drive").map_err(|e| e.to_string())?;
    let path = path_of(&cfg);
    let m = cfg.measurement.superop();
    let rho0 = cfg.initial_state.clone().unwrap();
    let (_, p) = gap_projector(&m, cfg.gap_min).map_err(|e| e.to_string())?;
    let limit = zeno_limit_timedep(&p.proj, &path, 1e-10).map_err(|e| e.to_string())?;
    let target = apply(&limit, rho0.op()).unwrap();
    // Both Hamiltonians and the dephasing vanish under P𝓛P, so ρ̃(1) = P(ρ₀) = ρ₀.
    ensure((target.matrix() - rho0.op().matrix()).norm() <= 1e-10, "limit state is not P(ρ₀)")?;
    let mut errors = Vec::new();
    for n in [8, 16, 32, 64, 128, 256, 512] {
        let tn = intercepted_product(&InterceptedConfig::new(m.clone(), path.clone(), n, 1).unwrap())
            .map_err(|e| e.to_string())?;
        let out = apply(&tn, rho0.op()).unwrap();
        errors.push(trace_norm(&(out.matrix() - target.matrix())));
    }
    ensure(errors.windows(2).all(|w| w[1] <= 1.1 * w[0]), format!("not non-increasing: {errors:?}"))?;
    let (first, last) = (errors[0], *errors.last().unwrap());
    ensure(last <= first / 10.0, format!("final {last:.3e} > initial/10 {:.3e}", first / 10.0))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("error(8) = {first:.3e}, error(512) = {last:.3e}"))
}

fn projector_derivative_identity() -> Outcome {
    let cfg = builtin("damped_rabi").map_err(|e| e.to_string())?;
    let s = static_scenario(&cfg);
    let m = s.measurement();
    let l = s.generator().scale(cfg.t);
    let dp = projector_derivative(m, &l, 1e-4).map_err(|e| e.to_string())?;
    let p = s.projector();
    let gap = dp.distance(&(&p.compose(&dp) + &dp.compose(p)));
    ensure(gap <= 1e-5, format!("‖P′ − (PP′ + P′P)‖ = {gap:.3e}"))?;
    ensure(dp.proxy_norm() > 1e-3, "P′ vanishes, identity is vacuous")?;
    Ok(format!("‖P′ − (PP′ + P′P)‖ = {gap:.3e}, ‖P′‖ = {:.3}", dp.proxy_norm()))
}

fn variants() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let d = 2 + (seed as usize % 2);
        let (_, m) = random_gapped_channel(&mut rng, d, 0.5);
        let l = random_gkls(&mut rng, d);
        let (_, p) = gap_projector(&m, 0.05).map_err(|e| e.to_string())?;
        let v = generator_variants(&p.proj, l.superop()).map_err(|e| e.to_string())?;
        // Recompute the three exponentials here rather than trusting the report.
        let maps: Vec<SuperOp> =
            [&v.plp, &v.pl, &v.shifted].iter().map(|g| expm_superop(g, 1.0).unwrap().compose(&p.proj)).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max(maps[i].distance(&maps[j]));
            }
        }
        worst = worst.max(v.max_distance);
    }
    ensure(worst <= 1e-10, format!("max pairwise distance {worst:.3e}"))?;
    Ok(format!("20 pairs, max pairwise distance {worst:.3e}"))
}

fn central_limit() -> Outcome {
    let cfg = builtin("damped_rabi").map_err(|e| e.to_string())?;
    let s = static_scenario(&cfg);
    let p = s.projector();
    let target = p.compose(&s.generator().scale(cfg.t)).compose(p);
    let at = |n| central_quantity(&s, n).map(|q| q.distance(&target)).map_err(|e| e.to_string());
    let (d16, d1024) = (at(16)?, at(1024)?);
    ensure(d1024 <= d16 / 10.0, format!("{d1024:.3e} > {d16:.3e}/10"))?;
    Ok(format!("distance(16) = {d16:.3e}, distance(1024) = {d1024:.3e}"))
}

/// `J = Σᵢⱼ (Σₖ Kₖ|i⟩⟨j|Kₖ†) ⊗ |i⟩⟨j|` assembled from the Kraus operators.
fn choi_from_kraus(k: &KrausSet) -> CMatrix {
    let d = k.dim();
    let mut j = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(a, b)] = ONE;
            let out: CMatrix = k.ops().iter().map(|op| op * &e * op.adjoint()).fold(CMatrix::zeros(d, d), |x, y| x + y);
            for r in 0..d {
                for s in 0..d {
                    j[(r * d + a, s * d + b)] = out[(r, s)];
                }
            }
        }
    }
    j
}

fn structural() -> Outcome {
    let mut channels: Vec<KrausSet> = builtin_scenarios()
        .into_iter()
        .filter_map(|s| match s.measurement {
            Measurement::Kraus(k) => Some(k),
            Measurement::Superop(_) => None,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..20 {
        channels.push(random_channel(&mut rng, 2 + k % 2, 1 + k % 4));
    }
    let mut min_eig = f64::INFINITY;
    for (idx, k) in channels.iter().enumerate() {
        let t = kraus_to_superop(k);
        let j = choi_from_kraus(k);
        ensure((&j - choi_matrix(&t)).norm() <= 1e-12, format!("channel {idx}: Choi mismatch"))?;
        let eig = j.symmetric_eigen().eigenvalues.min();
        min_eig = min_eig.min(eig);
        ensure(eig >= -1e-10, format!("channel {idx}: Choi eigenvalue {eig:.3e}"))?;
        let d = k.dim();
        let completeness: CMatrix = k.ops().iter().map(|op| op.adjoint() * op).fold(CMatrix::zeros(d, d), |x, y| x + y);
        let tp = (completeness - CMatrix::identity(d, d)).norm();
        ensure(tp <= 1e-10, format!("channel {idx}: trace defect {tp:.3e}"))?;
        let est = norm_1to1_estimate(&t, 6, 25, idx as u64);
        ensure(
            est.lower >= 1.0 - 1e-9 && est.lower <= est.upper,
            format!("channel {idx}: norm bounds [{}, {}]", est.lower, est.upper),
        )?;
    }
    let tol = 1e-9;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let path = GeneratorPath::linear(random_gkls(&mut rng, 2), random_gkls(&mut rng, 2), 1.0).unwrap();
        ensure(propagate(&path, 0.3, 0.3, tol).unwrap() == SuperOp::identity(2), "T[t,t] is not the identity")?;
        let a = propagate(&path, 0.0, 0.4, tol).map_err(|e| e.to_string())?;
        let b = propagate(&path, 0.4, 1.0, tol).map_err(|e| e.to_string())?;
        let ab = propagate(&path, 0.0, 1.0, tol).map_err(|e| e.to_string())?;
        let gap = b.compose(&a).distance(&ab);
        ensure(gap <= 3.0 * tol, format!("cocycle defect {gap:.3e}"))?;
        ensure(classify_map(&ab, 1e-7).is_channel(), "propagator is not a channel")?;
        ensure(rank1_lower_bound(&ab, seed) >= 1.0 - 1e-9, "propagator norm below 1")?;
    }
    Ok(format!("{} channels, min Choi eigenvalue {min_eig:.3e}; 5 propagator paths", channels.len()))
}

fn cli_golden() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_zeno");
    let dir = std::env::temp_dir().join(format!("zeno-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let out = dir.join("r.csv");
    let status = Command::new(exe)
        .args(["run", "--scenario", "classic_zeno", "--seed", "7", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), format!("run exited with {}", status.status))?;
    let produced = std::fs::read(&out).map_err(|e| e.to_string())?;
    let golden = include_bytes!("fixtures/classic_zeno_seed7.csv");
    ensure(produced == golden, "CSV differs from the frozen fixture")?;
    let check = Command::new(exe).args(["check", "--suite", "all"]).output().map_err(|e| e.to_string())?;
    ensure(check.status.success(), format!("check exited with {}", check.status))?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} bytes identical; check --suite all exit 0", produced.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("classic Zeno convergence", classic_zeno),
        ("Chernoff inequality", chernoff),
        ("projector cross-validation", projectors),
        ("piecewise-constant generator bound", lemma4),
        ("telescoping bound 3L/m", telescoping),
        ("time-dependent Zeno convergence", time_dependent_zeno),
        ("projector derivative identity", projector_derivative_identity),
        ("generator variants", variants),
        ("n(C - 1) limit", central_limit),
        ("structural suite", structural),
        ("CLI golden files", cli_golden),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.2}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
