//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line per criterion and exits nonzero if any of them fails.

use std::cmp::Ordering;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oavi::evaluation::mse;
use oavi::harness::{
    fit_pipeline, load_csv, run_experiment, run_experiment_on, strip_timing, ExperimentConfig, FitTemplate, Grids,
    HyperParams, SerializedModel,
};
use oavi::monomials::terms_of_degree;
use oavi::pipeline::SparsityStats;
use oavi::solvers::{agd_solve, fw_solve, pfw_solve};
use oavi::{
    check_maximality, deglex_compare, fit, oracle_call, EvaluationCache, GeneratorSet, OaviConfig, OracleKind,
    OracleProblem, PointSet, Polynomial, Region, Term,
};

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn iris_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
}

fn random_points(rng: &mut ChaCha8Rng, m: usize, n: usize) -> PointSet<f64> {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Term order and algebra

fn reference_order(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
    if da != db {
        return da.cmp(&db);
    }
    for (x, y) in a.iter().zip(b) {
        if x != y {
            // larger exponent on the earlier variable is the smaller term
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

fn criterion_1() -> Outcome {
    const CASES: u32 = 10_000;
    let start = Instant::now();
    let mut runner = TestRunner::new(ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let strategy = (1usize..=5).prop_flat_map(|n| {
        let term = proptest::collection::vec(0u32..5, n);
        (term.clone(), term.clone(), term)
    });
    runner
        .run(&strategy, |(a, b, c)| {
            let (ta, tb, tc) = (Term::new(a.clone()), Term::new(b.clone()), Term::new(c.clone()));
            let ab = deglex_compare(&ta, &tb).unwrap();
            let ba = deglex_compare(&tb, &ta).unwrap();
            let bc = deglex_compare(&tb, &tc).unwrap();
            let ac = deglex_compare(&ta, &tc).unwrap();
            prop_assert_eq!(ab, reference_order(&a, &b));
            prop_assert_eq!(ab, ba.reverse());
            prop_assert_eq!(ab == Ordering::Equal, ta == tb);
            if ab != Ordering::Greater && bc != Ordering::Greater {
                prop_assert_ne!(ac, Ordering::Greater);
            }
            let one = Term::one(a.len());
            prop_assert_ne!(deglex_compare(&one, &ta).unwrap(), Ordering::Greater);
            let (ac_prod, bc_prod) = (ta.multiply(&tc).unwrap(), tb.multiply(&tc).unwrap());
            prop_assert_eq!(deglex_compare(&ac_prod, &bc_prod).unwrap(), ab);
            prop_assert!(ta.divides(&ac_prod).unwrap());
            if ta.divides(&tb).unwrap() && tb.divides(&ta).unwrap() {
                prop_assert_eq!(&ta, &tb);
            }
            if ta.divides(&tb).unwrap() {
                prop_assert_ne!(ab, Ordering::Greater);
            }
            Ok(())
        })
        .map_err(|e| format!("property failure: {e}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}, limit 5 s")
    })?;
    Ok(format!("{CASES} cases, {:.2} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 2. Solver accuracy

struct Instance {
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    lambda: f64,
    radius: f64,
}

fn random_instance(rng: &mut ChaCha8Rng, lambda: f64) -> Instance {
    let m = rng.gen_range(2..=50);
    let k = rng.gen_range(1..=20);
    let columns = (0..k)
        .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let target = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let radius = [1.0, 3.0, 49.0][rng.gen_range(0..3)];
    Instance {
        columns,
        target,
        lambda,
        radius,
    }
}

fn design(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let m = columns[0].len();
    DMatrix::from_fn(m, columns.len(), |i, j| columns[j][i])
}

/// Minimizer of `(1/m)||Av + b||^2 + (lambda/2)||v||^2` from the normal
/// equations `(2/m A^T A + lambda I) v = -(2/m) A^T b`.
fn normal_equations(columns: &[Vec<f64>], target: &[f64], lambda: f64) -> Vec<f64> {
    let a = design(columns);
    let m = target.len() as f64;
    let b = DVector::from_column_slice(target);
    let k = columns.len();
    let lhs = a.transpose() * &a * (2.0 / m) + DMatrix::identity(k, k) * lambda;
    let rhs = -(a.transpose() * b) * (2.0 / m);
    let v = lhs.svd(true, true).solve(&rhs, 1e-13).unwrap();
    v.iter().copied().collect()
}

fn project_l2(v: &mut [f64], r: f64) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > r {
        v.iter_mut().for_each(|x| *x *= r / n);
    }
}

fn project_l1(v: &mut [f64], r: f64) {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= r {
        return;
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - r) / (j as f64 + 1.0);
        if uj > t {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = x.signum() * (x.abs() - theta).max(0.0));
}

/// Accelerated projected gradient with adaptive restart, `iters` steps of
/// size `1/L`.
fn projected_gradient(p: &OracleProblem<f64>, project: impl Fn(&mut [f64]), iters: usize) -> Vec<f64> {
    let k = p.dim();
    let m = p.points() as f64;
    let a = design(p.columns());
    let q = a.transpose() * &a;
    let qm = q.clone() * (2.0 / m) + DMatrix::identity(k, k) * p.lambda;
    let lip = qm.symmetric_eigenvalues().max().max(1e-12);
    let atb = a.transpose() * DVector::from_column_slice(p.target());
    let lin = atb * (2.0 / m);
    let grad = |v: &DVector<f64>| &qm * v + &lin;
    let value = |v: &DVector<f64>| 0.5 * v.dot(&(&qm * v)) + lin.dot(v);

    let mut x = DVector::<f64>::zeros(k);
    project(x.as_mut_slice());
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = value(&x);
    for _ in 0..iters {
        let mut next = &y - grad(&y) / lip;
        project(next.as_mut_slice());
        let fnext = value(&next);
        if fnext > fx {
            y = x.clone();
            t = 1.0;
            continue;
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &x) * ((t - 1.0) / tn);
        x = next;
        fx = fnext;
        t = tn;
    }
    x.iter().copied().collect()
}

fn criterion_2() -> Outcome {
    const INSTANCES: usize = 200;
    const EPS: f64 = 1e-6;
    const REFERENCE_ITERS: usize = 100_000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..INSTANCES {
        let inst = random_instance(&mut rng, if i % 2 == 0 { 0.0 } else { 0.5 });
        let base = OracleProblem::new(inst.columns.clone(), inst.target.clone())
            .unwrap()
            .lambda(inst.lambda)
            .epsilon(EPS)
            .max_iterations(REFERENCE_ITERS);

        let opt = base
            .objective(&normal_equations(&inst.columns, &inst.target, inst.lambda))
            .unwrap();
        let agd = agd_solve(&base).unwrap();
        let diff = (agd.objective - opt).abs();
        worst = worst.max(diff);
        ensure(diff <= EPS, || {
            format!("instance {i}: agd {} vs optimum {opt}", agd.objective)
        })?;

        let r = inst.radius;
        let l1 = base.clone().region(Region::L1Ball { radius: r });
        let reference = l1
            .objective(&projected_gradient(&l1, |v| project_l1(v, r), REFERENCE_ITERS))
            .unwrap();
        let pfw = pfw_solve(&l1, 0).unwrap();
        let diff = (pfw.objective - reference).abs();
        worst = worst.max(diff);
        ensure(diff <= EPS, || {
            format!("instance {i}: pfw {} vs reference {reference}", pfw.objective)
        })?;
        let norm: f64 = pfw.coefficients.iter().map(|c| c.abs()).sum();
        ensure(norm <= r * (1.0 + 1e-12), || {
            format!("instance {i}: pfw left the ball ({norm} > {r})")
        })?;

        let l2 = base.clone().region(Region::L2Ball { radius: r });
        let reference = l2
            .objective(&projected_gradient(&l2, |v| project_l2(v, r), REFERENCE_ITERS))
            .unwrap();
        let fw = fw_solve(&l2).unwrap();
        let diff = (fw.objective - reference).abs();
        worst = worst.max(diff);
        ensure(diff <= EPS, || {
            format!("instance {i}: fw {} vs reference {reference}", fw.objective)
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}, limit 60 s")
    })?;
    Ok(format!(
        "{INSTANCES} instances, worst deviation {worst:.2e}, {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 3. Vanishing certificate

fn ascending_terms(n: usize, max_degree: u32) -> Vec<Term> {
    let mut terms: Vec<Term> = (0..=max_degree).flat_map(|d| terms_of_degree(n, d)).collect();
    terms.sort();
    terms
}

fn criterion_3() -> Outcome {
    const INSTANCES: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let terms = ascending_terms(2, 3);
    let (mut vanishing, mut not_vanishing) = (0, 0);
    for i in 0..INSTANCES {
        let m = rng.gen_range(10..=30);
        let k = rng.gen_range(1..=6);
        let points = random_points(&mut rng, m, 2);
        let order_ideal = &terms[..k];
        let leading = &terms[k];
        let mut cache = EvaluationCache::new();
        let columns: Vec<Vec<f64>> = order_ideal
            .iter()
            .map(|t| cache.ensure_term(t, &points).unwrap().to_vec())
            .collect();
        let target = cache.ensure_term(leading, &points).unwrap().to_vec();
        let v = normal_equations(&columns, &target, 0.0);
        let reference = OracleProblem::new(columns, target).unwrap().objective(&v).unwrap();
        let psi = reference * 4f64.powf(rng.gen_range(-1.0..1.0));
        let cfg = OaviConfig::new(psi).oracle(OracleKind::Agd);
        let out = oracle_call(&points, order_ideal, leading, &cfg, &mut cache).unwrap();
        let expected = reference <= psi;
        ensure(out.vanishes(psi) == expected, || {
            format!(
                "instance {i}: optimum {reference:e}, psi {psi:e}, returned objective {:e}",
                out.objective
            )
        })?;
        ensure(out.polynomial.leading_coefficient() == 1.0, || {
            format!("instance {i}: leading coefficient")
        })?;
        if expected {
            vanishing += 1;
        } else {
            not_vanishing += 1;
        }
    }
    Ok(format!(
        "{INSTANCES} instances agree ({vanishing} vanishing, {not_vanishing} not)"
    ))
}

// ---------------------------------------------------------------------------
// 4-6. Fits on random data

struct RandomFit {
    points: PointSet<f64>,
    cfg: OaviConfig<f64>,
    result: GeneratorSet<f64>,
}

fn random_fits(oracle: OracleKind) -> Vec<RandomFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..50)
        .map(|i| {
            let m = rng.gen_range(1..=60);
            let n = rng.gen_range(1..=4);
            let points = random_points(&mut rng, m, n);
            let psi = if i % 2 == 0 { 1e-3 } else { 1e-2 };
            let cfg = OaviConfig::new(psi).oracle(oracle);
            let result = fit(&points, &cfg).unwrap();
            RandomFit { points, cfg, result }
        })
        .collect()
}

fn check_bounds(fits: &[RandomFit], label: &str) -> std::result::Result<(), String> {
    for (i, f) in fits.iter().enumerate() {
        let (m, n) = (f.points.len(), f.points.dim());
        let (o, g) = (f.result.order_ideal().len(), f.result.generators().len());
        ensure(!f.result.stats.degree_cap_hit, || {
            format!("{label} dataset {i}: degree cap reached")
        })?;
        ensure(o <= m, || format!("{label} dataset {i}: |O| = {o} > m = {m}"))?;
        ensure(g <= o * n, || {
            format!("{label} dataset {i}: |G| = {g} > |O| n = {}", o * n)
        })?;
    }
    Ok(())
}

fn criterion_4(fits: &[RandomFit], l1_fits: &[RandomFit]) -> Outcome {
    check_bounds(fits, "agd")?;
    check_bounds(l1_fits, "pfw")?;
    let max_degree = fits
        .iter()
        .map(|f| f.result.stats.max_degree_reached)
        .max()
        .unwrap_or(0);
    Ok(format!(
        "50 datasets x 2 oracles, highest degree visited {max_degree}, all bounds hold"
    ))
}

fn criterion_5(fits: &[RandomFit]) -> Outcome {
    for (i, f) in fits.iter().enumerate() {
        let ok = check_maximality(&f.result, &f.points, &f.cfg).unwrap();
        ensure(ok, || {
            format!("dataset {i}: an order-ideal term is approximately vanishing")
        })?;
    }
    Ok(format!("{} fits maximal", fits.len()))
}

fn l1_violations(result: &GeneratorSet<f64>, tau: f64) -> usize {
    result
        .generators()
        .iter()
        .filter(|g| g.coefficients().iter().map(|c| c.abs()).sum::<f64>() > (tau - 1.0) * (1.0 + 1e-12))
        .count()
}

fn criterion_6(l1_fits: &[RandomFit], extra: &[VarietyFit]) -> Outcome {
    let mut generators = 0;
    let mut violations = 0;
    for f in l1_fits {
        generators += f.result.generators().len();
        violations += l1_violations(&f.result, f.cfg.tau);
    }
    for f in extra {
        generators += f.result.generators().len();
        violations += l1_violations(&f.result, f.cfg.tau);
    }
    ensure(violations == 0, || {
        format!("{violations} of {generators} generators exceed tau - 1")
    })?;
    Ok(format!(
        "{generators} generators over {} fits, 0 violations",
        l1_fits.len() + extra.len()
    ))
}

// ---------------------------------------------------------------------------
// 7. Recovery of circle and parabola equations

fn circle(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![0.2 + 0.7 * a.cos(), -0.1 + 0.7 * a.sin()]
        })
        .collect()
}

fn parabola(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            let x: f64 = rng.gen_range(-1.0..1.0);
            vec![x, 0.9 * x * x - 0.5]
        })
        .collect()
}

type Sampler = fn(&mut ChaCha8Rng, usize) -> Vec<Vec<f64>>;

struct VarietyFit {
    name: &'static str,
    train: PointSet<f64>,
    held_out: Vec<Vec<f64>>,
    cfg: OaviConfig<f64>,
    result: GeneratorSet<f64>,
}

fn variety_fits() -> Vec<VarietyFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samplers: [(&'static str, Sampler); 2] = [("circle", circle), ("parabola", parabola)];
    samplers
        .into_iter()
        .map(|(name, sample)| {
            let train = PointSet::from_rows(&sample(&mut rng, 20)).unwrap();
            let held_out = sample(&mut rng, 100);
            let cfg = OaviConfig::new(1e-10);
            let result = fit(&train, &cfg).unwrap();
            VarietyFit {
                name,
                train,
                held_out,
                cfg,
                result,
            }
        })
        .collect()
}

fn criterion_7(fits: &[VarietyFit]) -> Outcome {
    let mut found = Vec::new();
    for f in fits {
        let mut best: Option<(f64, f64)> = None;
        for g in f.result.generators().iter().filter(|g| g.degree() == 2) {
            let train_mse = mse(g, &f.train).unwrap();
            let mean_abs = f.held_out.iter().map(|p| g.evaluate_at(p).abs()).sum::<f64>() / f.held_out.len() as f64;
            if train_mse <= 1e-8 && mean_abs <= 1e-3 && best.is_none_or(|(_, b)| mean_abs < b) {
                best = Some((train_mse, mean_abs));
            }
        }
        let (train_mse, mean_abs) = best.ok_or_else(|| format!("{}: no degree-2 generator vanishes", f.name))?;
        found.push(format!("{} mse {train_mse:.1e} held-out {mean_abs:.1e}", f.name));
    }
    Ok(found.join("; "))
}

// ---------------------------------------------------------------------------
// 8. Pairwise Frank-Wolfe convergence

fn criterion_8() -> Outcome {
    const INSTANCES: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut max_iters = 0;
    for i in 0..INSTANCES {
        let inst = random_instance(&mut rng, if i % 2 == 0 { 0.0 } else { 0.5 });
        let p = OracleProblem::new(inst.columns, inst.target)
            .unwrap()
            .lambda(inst.lambda)
            .region(Region::L1Ball { radius: inst.radius })
            .epsilon(1e-8)
            .max_iterations(10_000)
            .stall_tolerance(0.0)
            .record_trace(true);
        let sol = pfw_solve(&p, 0).unwrap();
        let gap = sol.gap.unwrap();
        ensure(gap <= 1e-8, || {
            format!(
                "instance {i}: gap {gap:e} after {} iterations ({:?})",
                sol.iterations, sol.termination
            )
        })?;
        for (t, w) in sol.trace.windows(2).enumerate() {
            let slack = 1e-12 * w[0].abs().max(1e-300);
            ensure(w[1] <= w[0] + slack, || {
                format!("instance {i}: objective rose at iteration {t}")
            })?;
        }
        max_iters = max_iters.max(sol.iterations);
    }
    Ok(format!("{INSTANCES} instances, at most {max_iters} iterations"))
}

// ---------------------------------------------------------------------------
// 9. Iris

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(iris_path(), "species");
    let outcome = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mean = &outcome.report.mean;
    let summary = format!(
        "{} reps, mean test error {:.2}% (std {:.2}), {:.0} s",
        outcome.report.repetitions.len(),
        mean.test_error,
        mean.test_error_std,
        elapsed.as_secs_f64()
    );
    ensure(outcome.report.repetitions.len() == 10, || {
        format!("{summary}: expected 10 reps")
    })?;
    ensure(mean.test_error <= 10.0, || format!("{summary}: error above 10%"))?;
    ensure(elapsed <= Duration::from_secs(300), || {
        format!("{summary}: over 5 minutes")
    })?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// 10. Sparsity, determinism and model round trip

fn poly(coeffs: &[f64]) -> Polynomial<f64> {
    let terms = ascending_terms(2, 3);
    let k = coeffs.len();
    Polynomial::new(terms[..k].to_vec(), coeffs.to_vec(), terms[k].clone()).unwrap()
}

fn criterion_10() -> Outcome {
    let s = SparsityStats::of(&poly(&[0.0, 0.5, 0.0]));
    ensure((s.entries, s.zeros, s.nonzeros) == (3, 2, 1), || {
        format!("single generator counts {s:?}")
    })?;
    ensure(s.sparsity == 2.0 / 3.0, || {
        format!("single generator sparsity {}", s.sparsity)
    })?;
    let dense = SparsityStats::of(&poly(&[0.3, -1.0, 2.0, 1e-3]));
    ensure(dense.sparsity == 0.0, || format!("dense sparsity {}", dense.sparsity))?;
    let pair = [poly(&[0.0, 1.0]), poly(&[1.0, 2.0, 3.0])];
    let s = SparsityStats::over(&pair);
    ensure((s.entries, s.zeros) == (5, 1) && s.sparsity == 1.0 / 5.0, || {
        format!("pair {s:?}")
    })?;

    let dataset = load_csv(iris_path(), "species").map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::new(iris_path(), "species");
    cfg.reps = 1;
    cfg.seed = 17;
    cfg.grids = Grids {
        psi: vec![0.05, 0.01],
        lambda: vec![0.0, 0.1],
        c: vec![1.0, 10.0],
    };
    let report = |cfg: &ExperimentConfig| -> std::result::Result<String, String> {
        let outcome = run_experiment_on(cfg, &dataset).map_err(|e| e.to_string())?;
        let mut value = serde_json::to_value(&outcome.report).map_err(|e| e.to_string())?;
        for rep in &outcome.report.repetitions {
            let m = &rep.metrics;
            ensure(m.sparsity.nonzeros + m.sparsity.zeros == m.sparsity.entries, || {
                "g_n + g_z != g_e".into()
            })?;
            ensure((0.0..=1.0).contains(&m.sparsity.sparsity), || {
                "sparsity outside [0, 1]".into()
            })?;
        }
        strip_timing(&mut value);
        serde_json::to_string(&value).map_err(|e| e.to_string())
    };
    let first = report(&cfg)?;
    let second = report(&cfg)?;
    ensure(first == second, || "reports differ beyond timing".into())?;

    let params = HyperParams {
        psi: 0.01,
        lambda: 0.1,
        c: 1.0,
    };
    let fitted = fit_pipeline(
        &dataset.data,
        &dataset.feature_names,
        &FitTemplate::default(),
        params,
        true,
    )
    .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    fitted.model.save(&path).map_err(|e| e.to_string())?;
    let loaded = SerializedModel::load(&path).map_err(|e| e.to_string())?;
    ensure(loaded == fitted.model, || "loaded model differs".into())?;
    let text = fitted.model.to_json().map_err(|e| e.to_string())?;
    ensure(loaded.to_json().map_err(|e| e.to_string())? == text, || {
        "re-serialized JSON differs".into()
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let scaler = fitted.transformer.scaler();
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            (0..scaler.dim())
                .map(|j| {
                    let (lo, hi) = (scaler.mins()[j], scaler.maxs()[j]);
                    let pad = 0.1 * (hi - lo);
                    rng.gen_range(lo - pad..hi + pad)
                })
                .collect()
        })
        .collect();
    let points = PointSet::from_rows(&rows).unwrap();
    let before = fitted.transformer.transform(&points).map_err(|e| e.to_string())?;
    let after = loaded.transform(&points).map_err(|e| e.to_string())?;
    ensure(before.dim() == after.dim(), || "feature dimension differs".into())?;
    for (a, b) in before.columns().iter().zip(after.columns()) {
        ensure(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()), || {
            "features differ".into()
        })?;
    }
    Ok(format!(
        "hand examples exact, report deterministic, model round trip bit-exact ({} features)",
        before.dim()
    ))
}

// ---------------------------------------------------------------------------

fn run(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("criterion {number:>2} {name}: PASS ({detail}) [{secs:.1} s]");
            true
        }
        Err(detail) => {
            println!("criterion {number:>2} {name}: FAIL ({detail}) [{secs:.1} s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run(1, "term order and algebra", criterion_1);
    ok &= run(2, "oracle accuracy", criterion_2);
    ok &= run(3, "vanishing certificate", criterion_3);

    let agd_fits = random_fits(OracleKind::Agd);
    let pfw_fits = random_fits(OracleKind::Pfw);
    let varieties = variety_fits();
    ok &= run(4, "termination and size bounds", || criterion_4(&agd_fits, &pfw_fits));
    ok &= run(5, "maximality", || criterion_5(&agd_fits));
    ok &= run(6, "l1-bounded generators", || criterion_6(&pfw_fits, &varieties));
    ok &= run(7, "circle and parabola recovery", || criterion_7(&varieties));
    ok &= run(8, "pairwise Frank-Wolfe convergence", criterion_8);
    ok &= run(9, "iris end to end", criterion_9);
    ok &= run(10, "sparsity, determinism, round trip", criterion_10);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
