//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use pairpose::bench::{
    generate_scene, median, run_trials, write_trials_csv, OutlierType, PoseMode, RunOptions, SceneConfig,
};
use pairpose::geometry::{angle_between, angle_between9, embed_rotation};
use pairpose::oracle::{grid_rotation_search, sweep_1d_consensus, GridSpec};
use pairpose::rotation::{bounds_hartley, bounds_linear, consensus_count, derive_tau, linear_margin};
use pairpose::translation::vote_axis;
use pairpose::{
    build_pairs, solve_rotation, AxisAngle, BoundKind, Correspondence, PairConstraint, PairingMode, PairingStrategy,
    RotationCube, RotationSearchConfig, SolverConfig, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Scenes use random poses: the search starts from the identity, which would
// flatter an identity ground truth.

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn noise_free_exactness() -> Outcome {
    let scene = SceneConfig {
        n_points: 100,
        outlier_ratio: 0.0,
        noise_sigma_px: 0.0,
        pose_mode: PoseMode::RandomPose(0),
        ..Default::default()
    };
    let solver = SolverConfig::default().with_delta(1e-5);
    let options = RunOptions { trials: 20, master_seed: 101, parallel: false, ..Default::default() };
    let results = run_trials(&scene, &solver, &options);
    let good = results
        .iter()
        .filter(|r| {
            r.error.is_none() && r.e_rot < 1e-3 && r.e_trans < 1e-3 && r.certified && r.rot_ms + r.trans_ms < 5e3
        })
        .count();
    let max = |f: fn(&pairpose::bench::TrialResult) -> f64| results.iter().map(f).fold(0.0, f64::max);
    outcome(
        good == 20,
        format!(
            "{good}/20 exact and certified; max e_rot {:.2e}, max e_trans {:.2e}, max time {:.1} ms",
            max(|r| r.e_rot),
            max(|r| r.e_trans),
            max(|r| r.rot_ms + r.trans_ms)
        ),
    )
}

fn robustness_grid(master_seed: u64, parallel: bool) -> Vec<(String, Vec<pairpose::bench::TrialResult>)> {
    let mut cells = Vec::new();
    for kind in [BoundKind::HartleyKahl, BoundKind::LinearEmbedding] {
        for outlier_type in [OutlierType::Type1, OutlierType::Type2] {
            for ratio in [0.1, 0.25, 0.4] {
                let scene = SceneConfig {
                    n_points: 200,
                    outlier_ratio: ratio,
                    outlier_type,
                    noise_sigma_px: 1.0,
                    pose_mode: PoseMode::RandomPose(0),
                    ..Default::default()
                };
                let mut solver = SolverConfig::default();
                solver.rotation.bound_kind = kind;
                let options = RunOptions { trials: 20, master_seed, parallel, ..Default::default() };
                let label = format!("{kind}/type{}/{:.0}%", outlier_type.code(), ratio * 100.0);
                cells.push((label, run_trials(&scene, &solver, &options)));
            }
        }
    }
    cells
}

fn grid_csv(cells: &[(String, Vec<pairpose::bench::TrialResult>)]) -> Vec<u8> {
    let all: Vec<_> = cells.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let mut out = Vec::new();
    write_trials_csv(&mut out, &all, false).expect("in-memory write");
    out
}

const ROBUSTNESS_SEED: u64 = 2024;

fn robustness(cells: &[(String, Vec<pairpose::bench::TrialResult>)]) -> Outcome {
    let mut worst = (String::new(), usize::MAX);
    for (label, results) in cells {
        let ok = results.iter().filter(|r| r.success).count();
        if ok < worst.1 {
            worst = (label.clone(), ok);
        }
    }
    let failing: Vec<_> = cells
        .iter()
        .filter(|(_, r)| r.iter().filter(|t| t.success).count() * 10 < r.len() * 9)
        .map(|(l, _)| l.as_str())
        .collect();
    outcome(
        failing.is_empty(),
        format!("{} cells; worst {} at {}/20; below 90%: {:?}", cells.len(), worst.0, worst.1, failing),
    )
}

fn optimality() -> Outcome {
    // 6 of 24 points are outliers; HalfN pairing gives m = 12.
    // δ exceeds the π/64 grid covering radius √3·π/128 ≈ 0.0425.
    let delta = 0.045;
    let grid = GridSpec { resolution: PI / 64.0 };
    let mut at_least = 0;
    let mut equal_noise_free = 0;
    let mut gaps = Vec::new();
    for seed in 0..20u64 {
        for noise in [1.0, 0.0] {
            let cfg = SceneConfig {
                n_points: 24,
                outlier_ratio: 0.25,
                noise_sigma_px: noise,
                pose_mode: PoseMode::RandomPose(seed),
                rng_seed: seed,
                ..Default::default()
            };
            let scene = generate_scene(&cfg).expect("scene");
            let pairs =
                build_pairs(&scene.corrs, &PairingStrategy::new(PairingMode::HalfN, seed)).expect("pairs").pairs;
            assert!(pairs.len() <= 15);
            let report = solve_rotation(&pairs, &RotationSearchConfig { delta, ..Default::default() }).expect("bnb");
            let (_, grid_count) = grid_rotation_search(&pairs, delta, grid).expect("grid");
            let ok = report.certified && report.best_count >= grid_count;
            if noise == 0.0 {
                if report.certified && report.best_count == grid_count {
                    equal_noise_free += 1;
                } else {
                    gaps.push(format!("seed {seed}: bnb {} grid {}", report.best_count, grid_count));
                }
            } else if ok {
                at_least += 1;
            }
        }
    }
    outcome(
        at_least == 20 && equal_noise_free == 20,
        format!("bnb >= grid {at_least}/20 (noisy); equal {equal_noise_free}/20 (noise-free); mismatches {gaps:?}"),
    )
}

fn bound_ordering() -> Outcome {
    let scene = SceneConfig {
        n_points: 200,
        outlier_ratio: 0.25,
        outlier_type: OutlierType::Type1,
        pose_mode: PoseMode::RandomPose(0),
        ..Default::default()
    };
    let options = RunOptions { trials: 20, master_seed: 404, ..Default::default() };
    let run = |kind| {
        let mut solver = SolverConfig::default();
        solver.rotation.bound_kind = kind;
        run_trials(&scene, &solver, &options)
    };
    let hartley = run(BoundKind::HartleyKahl);
    let linear = run(BoundKind::LinearEmbedding);
    let wins = hartley
        .iter()
        .zip(&linear)
        .filter(|(h, l)| h.certified && l.certified && h.rot_iterations <= l.rot_iterations)
        .count();
    let med = |r: &[pairpose::bench::TrialResult]| {
        median(&r.iter().map(|t| t.rot_iterations as f64).collect::<Vec<_>>()).unwrap_or(f64::NAN)
    };
    outcome(
        wins * 5 >= 20 * 4,
        format!("hartley <= linear in {wins}/20; median iterations {} vs {}", med(&hartley), med(&linear)),
    )
}

fn scalability() -> Outcome {
    let median_ms = |n| {
        let scene = SceneConfig {
            n_points: n,
            outlier_ratio: 0.1,
            outlier_type: OutlierType::Type1,
            pose_mode: PoseMode::RandomPose(0),
            ..Default::default()
        };
        let options = RunOptions { trials: 20, master_seed: 505, parallel: false, ..Default::default() };
        let results = run_trials(&scene, &SolverConfig::default(), &options);
        median(&results.iter().map(|r| r.rot_ms).collect::<Vec<_>>()).unwrap_or(f64::INFINITY)
    };
    let small = median_ms(500);
    let large = median_ms(2000);
    let ratio = large / small;
    outcome(ratio <= 8.0 && large <= 1000.0, format!("t(500) {small:.1} ms, t(2000) {large:.1} ms, ratio {ratio:.2}"))
}

fn vote_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut agree = 0;
    let mut first_miss = None;
    for case in 0..1000 {
        let n = rng.random_range(1..=500);
        let eps = 10f64.powf(rng.random_range(-3.0..0.5));
        let clusters: Vec<f64> = (0..rng.random_range(1..6)).map(|_| rng.random_range(-20.0..20.0)).collect();
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    clusters[rng.random_range(0..clusters.len())] + rng.random_range(-2.0 * eps..2.0 * eps)
                } else {
                    rng.random_range(-30.0..30.0)
                }
            })
            .collect();
        let vote = vote_axis(&values, eps, 100_000).expect("vote");
        let (_, sweep) = sweep_1d_consensus(&values, eps).expect("sweep");
        if vote.consensus == sweep {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!("case {case}: vote {} sweep {sweep}", vote.consensus));
        }
    }
    outcome(agree == 1000, format!("{agree}/1000 agree; first mismatch {first_miss:?}"))
}

fn random_constraints(rng: &mut ChaCha8Rng, m: usize) -> Vec<PairConstraint> {
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let mut draw = |id| {
            let p = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let q = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            Correspondence::new(id, p, q)
        };
        if let (Ok(a), Ok(b)) = (draw(0), draw(1)) {
            if let Some(c) = PairConstraint::from_correspondences(&a, &b, (0, 1)) {
                out.push(c);
            }
        }
    }
    out
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn bound_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut hk, mut lin, mut arc, mut alpha) = (0usize, 0usize, 0usize, 0usize);
    let mut samples = 0usize;
    for _ in 0..1000 {
        let sigma = PI / 2f64.powi(rng.random_range(0..9));
        let center = Vec3::from_fn(|_, _| rng.random_range(-PI + sigma..=PI - sigma));
        let cube = RotationCube::new(AxisAngle(center), sigma);
        let m = rng.random_range(1..60);
        let constraints = random_constraints(&mut rng, m);
        let delta = rng.random_range(0.001..0.3);
        let tau = derive_tau(delta);
        let (hk_upper, _) = bounds_hartley(&constraints, &cube, delta);
        let (lin_upper, _) = bounds_linear(&constraints, &cube, tau);
        let r0 = cube.center.to_matrix();
        let x0 = embed_rotation(&r0);
        let margin = linear_margin(sigma);

        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < 200 && attempts < 200_000 {
            attempts += 1;
            let offset = Vec3::from_fn(|_, _| rng.random_range(-sigma..=sigma));
            let r = center + offset;
            if r.norm() > PI {
                continue;
            }
            accepted += 1;
            let rm = AxisAngle(r).to_matrix();
            let count = consensus_count(&constraints, &rm, delta);
            hk += usize::from(count > hk_upper);
            lin += usize::from(count > lin_upper);
            let u = random_unit(&mut rng);
            let a = angle_between(&(rm * u), &(r0 * u)).expect("nonzero");
            arc += usize::from(a > 3f64.sqrt() * sigma + 1e-12);
            alpha += usize::from(angle_between9(&embed_rotation(&rm), &x0) > margin + 1e-12);
        }
        samples += accepted;
    }
    outcome(
        hk + lin + arc + alpha == 0,
        format!("{samples} samples; violations: hartley {hk}, linear {lin}, arc bound {arc}, alpha bound {alpha}"),
    )
}

fn determinism(first: &[u8]) -> Outcome {
    let second = grid_csv(&robustness_grid(ROBUSTNESS_SEED, true));
    outcome(first == second, format!("{} bytes, identical: {}", first.len(), first == second))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |name: &str, started: Instant, o: Outcome| {
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    report("1 noise-free exactness", t, noise_free_exactness());

    let t = Instant::now();
    let cells = robustness_grid(ROBUSTNESS_SEED, true);
    let csv = grid_csv(&cells);
    report("2 robustness", t, robustness(&cells));

    let t = Instant::now();
    report("3 optimality vs grid", t, optimality());
    let t = Instant::now();
    report("4 bound ordering", t, bound_ordering());
    let t = Instant::now();
    report("5 scalability", t, scalability());
    let t = Instant::now();
    report("6 vote exactness", t, vote_exactness());
    let t = Instant::now();
    report("7 bound soundness", t, bound_soundness());
    let t = Instant::now();
    report("8 determinism", t, determinism(&csv));

    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
