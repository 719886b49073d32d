use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pairpose::bench::{
    generate_scene, median, read_correspondences, run_trials, success_rate, write_correspondences, write_trace_csv,
    write_trials_csv, OutlierType, PoseMode, RecordFormat, RunOptions, SceneConfig, SuccessCriterion,
};
use pairpose::geometry::matrix_to_axis_angle;
use pairpose::{estimate_pose, BoundKind, PairingMode, PoseError, SolverConfig};

/// Exit code for unreadable or malformed input.
const EXIT_INPUT: u8 = 1;
/// Exit code when the solver fails on valid input.
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pairpose", version, about = "Robust absolute camera pose from 2D-3D correspondences")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    bench: BenchArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run synthetic trials and write per-trial CSV (the default command).
    Bench(BenchArgs),
    /// Estimate the pose for a correspondence file.
    Solve(SolveArgs),
    /// Write a synthetic scene as a correspondence file.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Inlier threshold on the pairwise orthogonality residual, radians.
    #[arg(long, default_value_t = 0.015)]
    delta: f64,
    /// Translation inlier width; defaults to a fraction of the scene extent.
    #[arg(long = "epsilon-t")]
    epsilon_t: Option<f64>,
    #[arg(long, default_value = "hartley")]
    bound: BoundKind,
    /// half, augmented:K or all.
    #[arg(long, default_value = "half")]
    pairing: PairingMode,
    /// Rotation search iteration budget.
    #[arg(long = "max-iter", default_value_t = 200_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default().with_delta(self.delta);
        cfg.translation.epsilon = self.epsilon_t;
        cfg.rotation.bound_kind = self.bound;
        cfg.rotation.max_iterations = self.max_iter;
        cfg.pairing.mode = self.pairing;
        cfg
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PoseArg {
    Identity,
    Random,
}

#[derive(Args, Debug, Clone)]
struct SceneArgs {
    /// Number of correspondences, outliers included.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long = "outlier-ratio", default_value_t = 0.1)]
    outlier_ratio: f64,
    /// 1: world points in the scene box; 2: world points in the unit cube.
    #[arg(long = "outlier-type", default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    outlier_type: u8,
    /// Gaussian pixel noise standard deviation.
    #[arg(long = "noise-px", default_value_t = 1.0)]
    noise_px: f64,
    #[arg(long, value_enum, default_value_t = PoseArg::Identity)]
    pose: PoseArg,
}

impl SceneArgs {
    fn config(&self, seed: u64) -> SceneConfig {
        SceneConfig {
            n_points: self.n,
            outlier_ratio: self.outlier_ratio,
            outlier_type: OutlierType::from_code(self.outlier_type).unwrap_or(OutlierType::Type1),
            noise_sigma_px: self.noise_px,
            pose_mode: match self.pose {
                PoseArg::Identity => PoseMode::IdentityPose,
                PoseArg::Random => PoseMode::RandomPose(seed),
            },
            rng_seed: seed,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct BenchArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Master seed; every trial seed derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial CSV output; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Bound trace of the first trial's rotation search.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Fill the timing columns. Off by default so reruns are byte-identical.
    #[arg(long)]
    timings: bool,
    /// Rotation error below which a trial counts as a success, radians.
    #[arg(long = "max-rot-error", default_value_t = 0.1)]
    max_rot_error: f64,
    /// Relative translation error below which a trial counts as a success.
    #[arg(long = "max-trans-error", default_value_t = 0.2)]
    max_trans_error: f64,
    /// Run trials one after another instead of on all cores.
    #[arg(long)]
    serial: bool,
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// Correspondence file: `px py pz bx by bz` per line, or `px py pz u v` with --pixels.
    file: PathBuf,
    /// Records carry pixel coordinates instead of bearings.
    #[arg(long, requires = "focal")]
    pixels: bool,
    #[arg(long)]
    focal: Option<f64>,
    /// Principal point; defaults to 0.
    #[arg(long, default_value_t = 0.0)]
    cx: f64,
    #[arg(long, default_value_t = 0.0)]
    cy: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed for the random pairing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GenerateArgs {
    /// Destination correspondence file.
    path: PathBuf,
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn validate_solver(args: &SolverArgs) -> anyhow::Result<()> {
    if !(args.delta > 0.0 && args.delta < std::f64::consts::FRAC_PI_2) {
        bail!("--delta must lie in (0, pi/2), got {}", args.delta);
    }
    if let Some(eps) = args.epsilon_t {
        if !(eps > 0.0) {
            bail!("--epsilon-t must be positive, got {eps}");
        }
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    validate_solver(&args.solver)?;
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let scene = args.scene.config(0);
    scene.validate()?;
    let options = RunOptions {
        trials: args.trials,
        master_seed: args.seed,
        criterion: SuccessCriterion {
            max_rotation_error: args.max_rot_error,
            max_translation_error: args.max_trans_error,
        },
        keep_first_trace: args.trace.is_some(),
        parallel: !args.serial,
    };
    let results = run_trials(&scene, &args.solver.config(), &options);

    let mut out = open_output(args.csv.as_deref())?;
    write_trials_csv(&mut out, &results, args.timings)?;
    out.flush()?;

    if let (Some(path), Some(trace)) = (&args.trace, results.first().and_then(|r| r.trace.as_ref())) {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
        write_trace_csv(&mut w, trace)?;
        w.flush()?;
    }

    let column = |f: fn(&pairpose::bench::TrialResult) -> f64| {
        median(&results.iter().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN)
    };
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} trials, success rate {:.1}%, median e_rot {:.4} rad, median e_trans {:.4}, median rotation {:.2} ms, median iterations {}{}",
        results.len(),
        100.0 * success_rate(&results),
        column(|r| r.e_rot),
        column(|r| r.e_trans),
        column(|r| r.rot_ms),
        column(|r| r.rot_iterations as f64),
        if failed > 0 { format!(", {failed} solver errors") } else { String::new() }
    );
    Ok(())
}

enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
}

fn solve(args: &SolveArgs) -> Result<(), Failure> {
    validate_solver(&args.solver).map_err(Failure::Input)?;
    let format = match (args.pixels, args.focal) {
        (true, Some(focal)) => RecordFormat::Pixels { focal, cx: args.cx, cy: args.cy },
        _ => RecordFormat::Bearings,
    };
    let corrs = read_correspondences(&args.file, format)
        .with_context(|| format!("cannot read correspondences from {}", args.file.display()))
        .map_err(Failure::Input)?;

    let mut cfg = args.solver.config();
    cfg.pairing.rng_seed = args.seed;
    let est = estimate_pose(&corrs, &cfg).map_err(|e| match e {
        PoseError::InvalidConfig(_) => Failure::Input(e.into()),
        other => Failure::Solver(other.into()),
    })?;
    if est.pair_count < 3 {
        eprintln!(
            "warning: only {} pairwise constraint(s); the pose is poorly determined and may not be unique",
            est.pair_count
        );
    }
    if !est.rotation.certified {
        eprintln!("warning: rotation search stopped before certifying optimality");
    }

    let pairs = pairpose::build_pairs(&corrs, &cfg.pairing).map_err(|e| Failure::Solver(e.into()))?.pairs;
    let inliers: BTreeSet<usize> = est
        .rotation
        .inlier_constraint_ids
        .iter()
        .flat_map(|&k| [corrs[pairs[k].source.0].id, corrs[pairs[k].source.1].id])
        .collect();

    let write = || -> anyhow::Result<()> {
        let mut out = open_output(args.output.as_deref())?;
        let r = est.pose.rotation;
        let t = est.pose.translation;
        let aa = matrix_to_axis_angle(&r).0;
        writeln!(out, "rotation")?;
        for i in 0..3 {
            writeln!(out, "  {:.12} {:.12} {:.12}", r[(i, 0)], r[(i, 1)], r[(i, 2)])?;
        }
        writeln!(out, "axis_angle {:.12} {:.12} {:.12}", aa.x, aa.y, aa.z)?;
        writeln!(out, "translation {:.12} {:.12} {:.12}", t.x, t.y, t.z)?;
        writeln!(
            out,
            "consensus {}/{} constraints, certified {}, iterations {}",
            est.rotation.best_count, est.pair_count, est.rotation.certified, est.rotation.iterations
        )?;
        let ids: Vec<String> = inliers.iter().map(|i| i.to_string()).collect();
        writeln!(out, "inliers {}", ids.join(" "))?;
        out.flush()?;
        Ok(())
    };
    write().map_err(Failure::Input)
}

fn generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let scene = generate_scene(&args.scene.config(args.seed))?;
    let mut w =
        BufWriter::new(File::create(&args.path).with_context(|| format!("cannot create {}", args.path.display()))?);
    write_correspondences(&mut w, &scene.corrs)?;
    w.flush()?;

    let r = scene.ground_truth.rotation;
    let t = scene.ground_truth.translation;
    let aa = matrix_to_axis_angle(&r).0;
    println!("axis_angle {} {} {}", aa.x, aa.y, aa.z);
    println!("translation {} {} {}", t.x, t.y, t.z);
    let outliers: Vec<String> =
        scene.inlier_mask.iter().enumerate().filter(|(_, &m)| !m).map(|(i, _)| i.to_string()).collect();
    println!("outliers {}", outliers.join(" "));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command.unwrap_or(Command::Bench(cli.bench)) {
        Command::Bench(args) => bench(&args).map_err(Failure::Input),
        Command::Solve(args) => solve(&args),
        Command::Generate(args) => generate(&args).map_err(Failure::Input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e:#}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
