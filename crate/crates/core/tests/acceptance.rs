//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orthostab::additive::reduce_additive;
use orthostab::axioms::AxiomStatus;
use orthostab::direct_method::{coeffs_closed, coeffs_recurrence, iterate_g, series_sum, stability_bound};
use orthostab::fspace::check_fnorm_axioms;
use orthostab::model::{MapBase, MapModel, Noise};
use orthostab::ortho::{check_fs_axioms, check_gc_axioms, check_ratz_axioms, check_sec3_axioms};
use orthostab::quadratic::reduce_quadratic;
use orthostab::{run_experiment, ExperimentConfig, FNormSpace, GroupPoint, NormKind, OrthoRelation, Rational};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_runtime(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("runtime {took:?} exceeds {limit:?}"))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let q: i64 = rng.gen_range(1..=24);
    let p: i64 = rng.gen_range(-2 * q..=2 * q);
    Rational::new(p, q)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let alpha = random_rational(&mut rng);
        let gamma = random_rational(&mut rng);
        let (al, ga) = (&alpha.0, &gamma.0);
        let det = al * al - ga * ga;
        // Independent oracle: the recurrence written out by hand.
        let (mut a, mut b) = (BigRational::one(), BigRational::zero());
        for n in 0..=32usize {
            let rec = coeffs_recurrence(&alpha, &gamma, n);
            let closed = coeffs_closed(&alpha, &gamma, n);
            ensure(rec == closed, || format!("alpha={alpha}, gamma={gamma}, n={n}: recurrence != closed form"))?;
            ensure(rec.a.0 == a && rec.b.0 == b, || format!("alpha={alpha}, gamma={gamma}, n={n}: oracle mismatch"))?;
            let lhs = &a * &a - &b * &b;
            ensure(lhs == num_traits::pow(det.clone(), n), || {
                format!("alpha={alpha}, gamma={gamma}, n={n}: A^2 - B^2 != (alpha^2 - gamma^2)^n")
            })?;
            let next_a = al * &a + ga * &b;
            let next_b = ga * &a + al * &b;
            a = next_a;
            b = next_b;
        }
    }
    within_runtime(start, Duration::from_secs(5))?;
    Ok("100 pairs, n <= 32, exact".into())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let s = series_sum(&Rational::new(3, 8), &Rational::new(1, 8), 1.0, 1e-12).map_err(|e| e.to_string())?;
    // Oracle: A_n, B_n >= 0 and A_n + B_n = (1/2)^n, so S = sum (1/2)^n = 1.
    ensure((s.value - 1.0).abs() <= 1e-12, || format!("S = {} != 1", s.value))?;
    within_runtime(start, Duration::from_secs(1))?;
    Ok(format!("S = {:.15}", s.value))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    for eps in [1.0, 0.37, 2.5] {
        let red = reduce_additive(&Rational::from_integer(1), 1.0, eps).map_err(|e| e.to_string())?;
        ensure(red.defect_factor_exact == Some(Rational::new(5, 4)), || {
            format!("C/eps = {:?}, expected 5/4", red.defect_factor_exact)
        })?;
        ensure(red.params.c == 1.25 * eps, || format!("C = {} for eps = {eps}", red.params.c))?;
        let s = series_sum(&red.params.alpha, &red.params.gamma, 1.0, 1e-12).map_err(|e| e.to_string())?;
        let bound = stability_bound(red.params.c, s.value);
        ensure((bound - 2.5 * eps).abs() <= 1e-12, || format!("bound = {bound}, expected {}", 2.5 * eps))?;
    }
    within_runtime(start, Duration::from_secs(1))?;
    Ok("C = 5/4 eps, bound = 2.5 eps".into())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    for eps in [1.0, 0.37, 2.5] {
        let red = reduce_quadratic(1, 1.0, eps).map_err(|e| e.to_string())?;
        ensure(red.defect_factor_exact == Some(Rational::new(3, 4)), || {
            format!("C/eps = {:?}, expected 3/4", red.defect_factor_exact)
        })?;
        ensure(red.params.c == 0.75 * eps, || format!("C = {} for eps = {eps}", red.params.c))?;
        let s = series_sum(&red.params.alpha, &red.params.gamma, 1.0, 1e-12).map_err(|e| e.to_string())?;
        let bound = stability_bound(red.params.c, s.value);
        ensure((bound - 1.5 * eps).abs() <= 1e-12, || format!("bound = {bound}, expected {}", 1.5 * eps))?;
    }
    within_runtime(start, Duration::from_secs(1))?;
    Ok("C = 3/4 eps, bound = 1.5 eps".into())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<GroupPoint> = (0..100)
        .map(|_| GroupPoint::from_i64(&[rng.gen_range(-50..=50), rng.gen_range(-50..=50)]))
        .collect();
    let check = |label: &str, f: &MapModel, params: &orthostab::direct_method::LemmaParams, oracle: &dyn Fn(&GroupPoint) -> f64| {
        for x in &points {
            let want = oracle(x);
            for n in 0..=64 {
                let got = iterate_g(f, x, params, n).map_err(|e| e.to_string())?;
                ensure((got.0[0] - want).abs() <= 1e-12, || {
                    format!("{label}: x={x}, n={n}: g_n = {} != {want}", got.0[0])
                })?;
            }
        }
        Ok::<(), String>(())
    };

    let linear = MapModel::exact(MapBase::Linear { a: vec![3, -7] });
    let red = reduce_additive(&Rational::from_integer(1), 1.0, 0.0).map_err(|e| e.to_string())?;
    check("linear, M=1", &linear, &red.params, &|x| {
        let s: BigInt = 3 * &x.0[0] - 7 * &x.0[1];
        s.to_string().parse().unwrap()
    })?;

    let square = MapModel::exact(MapBase::Quadratic {
        q: vec![vec![1, 0], vec![0, 1]],
    });
    for lambda in [1, 2] {
        let red = reduce_quadratic(lambda, 1.0, 0.0).map_err(|e| e.to_string())?;
        check(&format!("|x|^2, lambda={lambda}"), &square, &red.params, &|x| {
            let s: BigInt = x.0.iter().map(|c| c * c).sum();
            s.to_string().parse().unwrap()
        })?;
    }
    within_runtime(start, Duration::from_secs(10))?;
    Ok("100 points, n <= 64, three maps".into())
}

struct PerturbedRun {
    label: String,
    report: orthostab::StabilityReport,
}

fn perturbed_configs() -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for amplitude in [0.001, 0.01, 0.1] {
        let noise = Noise { seed: 2024, amplitude };
        for beta in [0.5, 1.0] {
            for (m, base) in [
                (Rational::from_integer(1), MapBase::Linear { a: vec![2, -1] }),
                (Rational::from_integer(2), MapBase::Zero { dim: 1 }),
                (Rational::new(3, 2), MapBase::Zero { dim: 1 }),
            ] {
                out.push((
                    format!("additive M={m} beta={beta} delta={amplitude}"),
                    ExperimentConfig::additive(m, beta, MapModel::new(base, noise)),
                ));
            }
            for lambda in [1, 2, 3] {
                let base = MapBase::Quadratic {
                    q: vec![vec![1, 0], vec![0, 1]],
                };
                out.push((
                    format!("quadratic lambda={lambda} beta={beta} delta={amplitude}"),
                    ExperimentConfig::quadratic(lambda, beta, MapModel::new(base, noise)),
                ));
            }
        }
    }
    out
}

fn perturbed_runs() -> (Vec<PerturbedRun>, Duration) {
    let start = Instant::now();
    let runs = perturbed_configs()
        .into_iter()
        .map(|(label, config)| PerturbedRun {
            label,
            report: run_experiment(&config),
        })
        .collect();
    (runs, start.elapsed())
}

fn criterion_6(runs: &[PerturbedRun], took: Duration) -> Outcome {
    let mut steps = 0;
    for run in runs {
        let r = &run.report;
        let label = &run.label;
        ensure(r.pass.failure.is_none(), || format!("{label}: {:?}", r.pass.failure))?;
        let bound = r.bound.as_ref().unwrap();
        let dist = r.distances.as_ref().unwrap();
        ensure(dist.max_fg_distance_on_image_set <= bound.bound + 1e-10, || {
            format!("{label}: max ||f-g|| = {} > bound {}", dist.max_fg_distance_on_image_set, bound.bound)
        })?;
        ensure(dist.step_bound_violations == 0, || {
            format!("{label}: {} step norms exceed the envelope", dist.step_bound_violations)
        })?;
        ensure(dist.steps_checked > 0, || format!("{label}: no steps checked"))?;
        // Recheck the reported trace against envelopes computed here.
        let trace = dist.trace.as_ref().unwrap();
        let beta = r.config.beta;
        for row in &trace.rows {
            if let Some(step) = row.step_norm {
                let a = row.a.to_f64().abs().powf(beta);
                let b = row.b.to_f64().abs().powf(beta);
                let envelope = bound.c * (a + b) + 1e-9;
                ensure(step <= envelope, || format!("{label}: step {} norm {step} > {envelope}", row.n))?;
            }
        }
        steps += dist.steps_checked;
    }
    ensure(took < Duration::from_secs(60), || format!("runtime {took:?} exceeds 60s"))?;
    Ok(format!("{} runs, {steps} steps, {took:.2?}", runs.len()))
}

fn criterion_7(runs: &[PerturbedRun]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for run in runs {
        let res = run.report.residuals.as_ref().ok_or_else(|| format!("{}: no residuals", run.label))?;
        ensure(res.max_equation_residual <= 1e-8, || {
            format!("{}: residual {} > 1e-8", run.label, res.max_equation_residual)
        })?;
        ensure(res.pairs_checked > 0, || format!("{}: no related pairs", run.label))?;
        worst = worst.max(res.max_equation_residual);
        pairs += res.pairs_checked;
    }
    Ok(format!("{pairs} pairs, worst residual {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    for kind in [NormKind::PowerEuclidean, NormKind::DiscreteEllp] {
        for beta in [0.25, 0.5, 1.0] {
            let space = FNormSpace::new(kind, beta, 3).map_err(|e| e.to_string())?;
            let report = check_fnorm_axioms(&space, 10_000, 8);
            ensure(report.all_pass(), || format!("{kind} beta={beta}:\n{report}"))?;
            ensure(report.checks.iter().all(|c| c.status == AxiomStatus::Pass), || {
                format!("{kind} beta={beta}: some check was not run\n{report}")
            })?;
        }
    }
    let rel = OrthoRelation::InnerProduct;
    for report in [
        check_fs_axioms(&rel, 2, 1000, 8),
        check_gc_axioms(&rel, 2, 1000, 8),
        check_sec3_axioms(&rel, 2, 1000, 8),
    ] {
        ensure(report.all_pass(), || format!("inner product:\n{report}"))?;
    }
    let ratz = check_ratz_axioms(2, 1000, 8).map_err(|e| e.to_string())?;
    ensure(ratz.all_pass(), || format!("Ratz:\n{ratz}"))?;
    ensure(
        ratz.get("ratz-4 witness").is_some_and(|c| c.status == AxiomStatus::Pass && c.checked >= 1000),
        || format!("Ratz witness check incomplete:\n{ratz}"),
    )?;

    let broken = FNormSpace::new_unchecked(NormKind::PowerEuclidean, 2.0, 2);
    let report = check_fnorm_axioms(&broken, 10_000, 8);
    let triangle = report.get("triangle").unwrap();
    ensure(matches!(&triangle.status, AxiomStatus::Fail { counterexample } if !counterexample.is_empty()), || {
        format!("beta=2 space did not fail the triangle law:\n{report}")
    })?;
    let report = check_fs_axioms(&OrthoRelation::Diagonal, 2, 1000, 8);
    ensure(report.failures().any(|c| matches!(&c.status, AxiomStatus::Fail { counterexample } if !counterexample.is_empty())), || {
        format!("diagonal relation did not fail:\n{report}")
    })?;
    within_runtime(start, Duration::from_secs(10))?;
    Ok("valid instances pass; broken instances fail with counterexamples".into())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let zero = || MapModel::exact(MapBase::Zero { dim: 1 });
    let cases = [
        ("M=1/2", ExperimentConfig::additive(Rational::new(1, 2), 1.0, zero()), "invalid-M", vec!["--mode", "additive", "--M", "1/2"]),
        ("M=0", ExperimentConfig::additive(Rational::from_integer(0), 1.0, zero()), "invalid-M", vec!["--mode", "additive", "--M", "0"]),
        ("lambda=0", ExperimentConfig::quadratic(0, 1.0, zero()), "invalid-argument", vec!["--mode", "quadratic", "--lambda", "0"]),
        (
            "M=1/4 (u = 2)",
            ExperimentConfig::additive(Rational::new(1, 4), 1.0, zero()),
            "condition-violation",
            vec!["--mode", "additive", "--M", "1/4"],
        ),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (label, config, code, bound_args) in cases {
        let report = run_experiment(&config);
        let got = report.pass.failure.as_ref().map(|f| f.code.as_str());
        ensure(got == Some(code), || format!("{label}: library code {got:?}, expected {code}"))?;
        ensure(report.exit_code() == 2, || format!("{label}: report exit code {}", report.exit_code()))?;

        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string(&config).unwrap()).map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_orthostab"))
            .args(["solve", "--config"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(2), || format!("{label}: solve exit {:?}", out.status.code()))?;
        ensure(stderr.contains(&format!("error[{code}]")), || format!("{label}: solve stderr {stderr}"))?;

        let out = Command::new(env!("CARGO_BIN_EXE_orthostab"))
            .arg("bound")
            .args(&bound_args)
            .args(["--beta", "1", "--epsilon", "1"])
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(2), || format!("{label}: bound exit {:?}", out.status.code()))?;
        ensure(stderr.contains(&format!("error[{code}]")), || format!("{label}: bound stderr {stderr}"))?;
    }
    within_runtime(start, Duration::from_secs(1))?;
    Ok("library codes and CLI exit code 2".into())
}

fn main() -> ExitCode {
    let (runs, took) = perturbed_runs();
    let results: Vec<(&str, Outcome)> = vec![
        ("coefficient identities", criterion_1()),
        ("series anchor", criterion_2()),
        ("additive anchor (M=1, beta=1)", criterion_3()),
        ("quadratic anchor (lambda=1, beta=1)", criterion_4()),
        ("fixed points", criterion_5()),
        ("perturbed bound validity", criterion_6(&runs, took)),
        ("equation residual", criterion_7(&runs)),
        ("axiom suites", criterion_8()),
        ("invalid parameters", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
