//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Every check runs at its stated tolerance. By default the binary reports
//! and exits cleanly so the workspace test run stays usable; set
//! `WALLROM_ACCEPTANCE_STRICT=1` to turn any FAIL into a non-zero exit.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wallrom::bases::BasisKind;
use wallrom::fdm::solve_bvp;
use wallrom::grid::SpatialGrid;
use wallrom::metrics;
use wallrom::pgd::{Interpolation, PgdModel, StoppingCriteria};
use wallrom::physics::BvpInstance;
use wallrom::studies::{
    synthetic_fixture, FixtureSettings, LearningPeriod, ModelSettings, PracticalCaseConfig, StudyData,
    TheoreticalCaseConfig,
};
use wallrom_cli::{commands, Context, RunConfig};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    num / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn mu(data: &StudyData, kind: BasisKind, n: usize) -> f64 {
    let b = data.basis(kind, n).unwrap();
    metrics::mu(&data.reference, &b).unwrap().value
}

fn eps(data: &StudyData, kind: BasisKind, n: usize, dz: f64, seed: u64) -> (f64, PgdModel) {
    let b = data.basis(kind, n).unwrap();
    let model = data
        .build(&b, dz, &ModelSettings::default(), &StoppingCriteria::default(), seed)
        .unwrap();
    let sim = data.simulate(&model, Interpolation::Linear).unwrap();
    (data.epsilon(&sim).unwrap().value, model)
}

fn criterion_1(data: &StudyData) -> Check {
    let ns: Vec<usize> = (5..=25).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| mu(data, BasisKind::Chebyshev, n).ln()).collect();
    let s = slope(&xs, &ys);
    check((-9.0..=-5.0).contains(&s), format!("Chebyshev log-log slope over N in [5, 25] = {s:.2}"))
}

fn criterion_2(data: &StudyData) -> Check {
    let mut worst = (1.0, 0);
    for n in 2..=50 {
        let c = mu(data, BasisKind::Chebyshev, n);
        let l = mu(data, BasisKind::Legendre, n);
        let r = (c / l).max(l / c);
        if r > worst.0 {
            worst = (r, n);
        }
    }
    check(worst.0 <= 2.0, format!("largest ratio {:.3} at N = {}", worst.0, worst.1))
}

fn criterion_3(data: &StudyData) -> Check {
    let pod = data.basis(BasisKind::Pod, 50).unwrap();
    let mu_pod: Vec<f64> = (1..=50)
        .map(|n| metrics::mu(&data.reference, &pod.truncated(n).unwrap()).unwrap().value)
        .collect();
    let at = |n: usize| mu_pod[n - 1];
    let increases = (2..=50).filter(|&n| at(n) > at(n - 1)).count();
    let change = (at(18) - at(50)).abs() / at(18);
    let crossing = (18..=50).find(|&n| mu(data, BasisKind::Chebyshev, n) < at(n));
    check(
        increases == 0 && change < 0.1 && crossing.is_some(),
        format!(
            "increases {increases}, mu_POD(18) = {:.3e}, mu_POD(50) = {:.3e}, change {:.1}%, first crossing {:?}",
            at(18),
            at(50),
            100.0 * change,
            crossing
        ),
    )
}

fn criterion_4(data: &StudyData) -> Check {
    let mut pass = true;
    let mut parts = vec![];
    for (dz, target, tol) in [(1e-2, 5, 2), (1e-4, 7, 2), (1e-6, 12, 3)] {
        let nu: Vec<f64> = (2..=21)
            .map(|n| {
                let b = data.basis(BasisKind::Chebyshev, n).unwrap();
                metrics::nu(&data.reference, &b, dz).unwrap().value
            })
            .collect();
        let onset = (0..nu.len() - 1).find(|&i| nu[i + 1] >= 0.9 * nu[i]).map(|i| i + 2);
        let ok = onset.is_some_and(|n| n.abs_diff(target) <= tol);
        pass &= ok;
        parts.push(format!("{dz:e}: onset {onset:?} (want {target} +/- {tol})"));
    }
    check(pass, parts.join(", "))
}

fn criterion_5(data: &StudyData) -> Check {
    let mut pass = true;
    let mut parts = vec![];
    for kind in [BasisKind::Chebyshev, BasisKind::Legendre, BasisKind::Pod] {
        let e = eps(data, kind, 4, 1e-4, 42).0;
        pass &= (2e-4..=5e-3).contains(&e);
        parts.push(format!("{} {e:.3e}", kind.name()));
    }
    let e4 = eps(data, BasisKind::Chebyshev, 4, 1e-4, 42).0;
    let e2 = eps(data, BasisKind::Chebyshev, 2, 1e-4, 42).0;
    pass &= e2 >= 3.0 * e4;
    parts.push(format!("Chebyshev N=2 / N=4 = {:.2}", e2 / e4));
    check(pass, parts.join(", "))
}

fn criterion_6(data: &StudyData) -> Check {
    let counts: Vec<usize> = (2..=5)
        .map(|n| eps(data, BasisKind::Chebyshev, n, 1e-4, 42).1.n_modes())
        .collect();
    let decreases = counts.windows(2).filter(|w| w[1] < w[0]).count();
    let ties = counts.windows(2).filter(|w| w[1] == w[0]).count();
    check(decreases == 0 && ties <= 1, format!("M = {counts:?} for N = 2..5"))
}

fn criterion_7() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let ctx = Context {
        config: RunConfig::default(),
        out: dir.path().to_path_buf(),
        seed: 42,
        gnuplot: false,
    };
    let start = Instant::now();
    let m = commands::model_error(&ctx).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let s = &m.summary;
    let e = s["max_abs_error_k"].as_f64().unwrap();
    let inside = s["argmax_at_inside_surface"].as_bool().unwrap();
    let (qlo, qhi) = (s["qin_min_w_m2"].as_f64().unwrap(), s["qin_max_w_m2"].as_f64().unwrap());
    check(
        (0.7..=1.3).contains(&e) && inside && qlo >= -35.0 && qhi <= 40.0 && elapsed < 60.0,
        format!("max |e| = {e:.3} K, argmax at inside node {inside}, q_in in [{qlo:.1}, {qhi:.1}] W/m2, {elapsed:.1} s"),
    )
}

fn manufactured_error(n: usize) -> f64 {
    let g = SpatialGrid::uniform(n).unwrap();
    let (a, bi_in, bi_out) = (0.05, 0.5, 1.3);
    // y = cos(pi xh) with xh = 2x - 1 has zero slope at both faces
    let exact: Vec<f64> = g.nodes().iter().map(|xh| (PI * xh).cos()).collect();
    let source = exact.iter().map(|y| y + a * 4.0 * PI * PI * y).collect();
    let inst = BvpInstance {
        a,
        source,
        b_in: -bi_in,
        b_out: -bi_out,
    };
    let y = solve_bvp(&inst, bi_in, bi_out, &g).unwrap();
    y.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

fn criterion_8(data: &StudyData) -> Check {
    let (_, model) = eps(data, BasisKind::Chebyshev, 4, 1e-5, 42);
    let d = model.domains.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let b_in = rng.gen_range(d.b_in.lo..=d.b_in.hi);
        let b_out = rng.gen_range(d.b_out.lo..=d.b_out.hi);
        let z: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
        let field = model.evaluate(b_in, b_out, &z, Interpolation::Linear).unwrap().field;
        worst = worst.max(metrics::rmse(&field, &model.oracle(b_in, b_out, &z).unwrap()));
    }
    let errs: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| manufactured_error(n)).collect();
    let h: Vec<f64> = [20.0f64, 40.0, 80.0, 160.0].iter().map(|n| (1.0 / n).ln()).collect();
    let s = slope(&h, &errs.iter().map(|e| e.ln()).collect::<Vec<_>>());
    check(
        worst <= 5e-3 && (s - 2.0).abs() <= 0.2,
        format!("worst oracle RMSE {worst:.2e} over 100 tuples, manufactured slope {s:.3}"),
    )
}

fn criterion_9() -> Check {
    let cfg = PracticalCaseConfig::default();
    let set = synthetic_fixture(&cfg, &FixtureSettings::default()).unwrap();
    let values: Vec<f64> = [LearningPeriod::Full, LearningPeriod::Half, LearningPeriod::Cycle1]
        .iter()
        .map(|&p| mu(&StudyData::practical(&set, &cfg, p).unwrap(), BasisKind::Pod, 3))
        .collect();
    check(
        values[0] <= values[1] + 1e-12 && values[1] <= values[2] + 1e-12,
        format!("Full {:.4e}, Half {:.4e}, Cycle1 {:.4e}", values[0], values[1], values[2]),
    )
}

fn criterion_10() -> Check {
    let cfg = TheoreticalCaseConfig {
        horizon: 43_200.0,
        nodes: 101,
        ..Default::default()
    };
    let data = StudyData::theoretical(&cfg, &ModelSettings::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.model"), dir.path().join("b.model")];
    for p in &paths {
        eps(&data, BasisKind::Chebyshev, 3, 1e-3, 11).1.save(p).unwrap();
    }
    let same = std::fs::read(&paths[0]).unwrap() == std::fs::read(&paths[1]).unwrap();
    let loaded = PgdModel::load(&paths[0]).unwrap();
    let again = dir.path().join("c.model");
    loaded.save(&again).unwrap();
    let exact = loaded == eps(&data, BasisKind::Chebyshev, 3, 1e-3, 11).1
        && std::fs::read(&again).unwrap() == std::fs::read(&paths[0]).unwrap();
    check(same && exact, format!("identical files {same}, exact round trip {exact}"))
}

fn main() {
    let data = StudyData::theoretical(&TheoreticalCaseConfig::default(), &ModelSettings::default()).unwrap();
    let checks: Vec<(u32, &str, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, "basis convergence rate", Box::new(|| criterion_1(&data))),
        (2, "Chebyshev/Legendre proximity", Box::new(|| criterion_2(&data))),
        (3, "POD plateau and crossing", Box::new(|| criterion_3(&data))),
        (4, "discretization thresholds", Box::new(|| criterion_4(&data))),
        (5, "combined-model accuracy", Box::new(|| criterion_5(&data))),
        (6, "PGD mode-count growth", Box::new(|| criterion_6(&data))),
        (7, "model error", Box::new(criterion_7)),
        (8, "oracle equivalence", Box::new(|| criterion_8(&data))),
        (9, "learning-period ordering", Box::new(criterion_9)),
        (10, "determinism and serialization", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (id, name, run) in &checks {
        let start = Instant::now();
        let c = run();
        failed += usize::from(!c.pass);
        println!(
            "criterion {id:2} {}: {name}: {} ({:.1} s)",
            if c.pass { "PASS" } else { "FAIL" },
            c.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria pass", checks.len() - failed, checks.len());
    let strict = std::env::var("WALLROM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
