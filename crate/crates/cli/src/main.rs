//! Command-line front end: design sequence sets, dump correlation
//! metrics, and run the radar imaging experiment.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psl_core::io;
use psl_core::radar::{
    compress, estimate_capon, estimate_ls, image_mse, magnitude_image, simulate_received,
    ArrayGeometry, RadarScene,
};
use psl_core::{
    build_surrogate, correlate_all_fft, design, init_random, Error, LagConstraintSet, MdaConfig,
    SolverConfig, StepRule,
};

#[derive(Parser)]
#[command(
    name = "psl",
    about = "Design constant-modulus sequence sets with minimal peak sidelobe level",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the peak-sidelobe-level minimizer and write the designed set.
    Design(DesignArgs),
    /// Compute correlation magnitudes and metrics for a sequence file.
    Correlate(CorrelateArgs),
    /// Simulate the angle-range imaging experiment for a sequence file.
    Radar(RadarArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Number of sequences.
    #[arg(long = "L", value_name = "L")]
    l: usize,
    /// Sequence length.
    #[arg(long = "M", value_name = "M")]
    m: usize,
    /// Outer iteration budget.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Relative peak-level change that stops the loop.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Seed for the random-phase initialization.
    #[arg(long, default_value_t = 0, conflicts_with = "seeds")]
    seed: u64,
    /// Comma-separated seed sweep; each seed runs in its own subdirectory.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Worker threads for seed sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Start from this sequence file instead of random phases.
    #[arg(long, value_name = "FILE")]
    init_file: Option<PathBuf>,
    /// Inner step-size scale.
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// Inner iteration budget per outer step.
    #[arg(long, default_value_t = 200)]
    inner_iters: usize,
    /// Step-size schedule for the inner solver.
    #[arg(long, value_enum, default_value_t = StepRuleArg::InvSqrt)]
    step_rule: StepRuleArg,
    /// Eigenvalue-bound mode for the surrogate.
    #[arg(long, value_enum, default_value_t = EigenModeArg::Spectral)]
    eigen_mode: EigenModeArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Sequence file to analyze.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RadarArgs {
    /// Sequence file to probe with.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Scene file (grid form or ASCII mask form).
    #[arg(long, value_name = "FILE", conflicts_with = "random_scene")]
    scene: Option<PathBuf>,
    /// Draw a sparse random scene instead of reading one.
    #[arg(long)]
    random_scene: bool,
    /// Range bins for the random scene.
    #[arg(long = "Q", default_value_t = 20)]
    q: usize,
    /// Scan angles for the random scene.
    #[arg(long = "P", default_value_t = 21)]
    p: usize,
    /// Seed for scene reflectivities and receiver noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which reflectivity estimator(s) to run.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Both)]
    estimator: EstimatorArg,
    /// Signal-to-noise ratio in dB; overrides the scene noise variance.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Transmitter count the sequence file must match.
    #[arg(long, default_value_t = 4)]
    num_tx: usize,
    /// Receiver count.
    #[arg(long, default_value_t = 4)]
    num_rx: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory; defaults to $PSL_OUT_DIR or the working directory.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Verbosity; repeat for debug dumps (-vv writes inner traces).
    #[arg(short, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepRuleArg {
    InvSqrt,
    Constant,
}

#[derive(Clone, Copy, ValueEnum)]
enum EigenModeArg {
    Spectral,
    Power,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EstimatorArg {
    Ls,
    Capon,
    Both,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Argument(_) | Error::Parse(_) => 2,
        Error::Numeric(_) | Error::Io(_) => 3,
    }
}

fn out_dir(args: &OutArgs) -> PathBuf {
    args.out_dir.clone().unwrap_or_else(|| {
        std::env::var_os("PSL_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design(args) => cmd_design(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Radar(args) => cmd_radar(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn solver_config(args: &DesignArgs, seed: u64) -> SolverConfig {
    SolverConfig {
        l: args.l,
        m: args.m,
        max_outer_iters: args.iters,
        eps: args.eps,
        seed,
        mda: MdaConfig {
            max_inner_iters: args.inner_iters,
            gamma0: args.gamma0,
            step_rule: match args.step_rule {
                StepRuleArg::InvSqrt => StepRule::InvSqrt,
                StepRuleArg::Constant => StepRule::Constant,
            },
            collect_trace: args.out.verbose >= 2,
            ..MdaConfig::default()
        },
        eigen_mode: match args.eigen_mode {
            EigenModeArg::Spectral => psl_core::EigenMode::SpectralBoundD,
            EigenModeArg::Power => psl_core::EigenMode::PowerIterationD,
        },
    }
}

fn run_one_design(args: &DesignArgs, seed: u64, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let cfg = solver_config(args, seed);
    let initial = match &args.init_file {
        Some(path) => {
            let set = io::read_sequence_json(path)?;
            if set.num_sequences() != args.l || set.length() != args.m {
                return Err(Error::Argument(format!(
                    "init file is ({}, {}), flags say ({}, {})",
                    set.num_sequences(),
                    set.length(),
                    args.l,
                    args.m
                )));
            }
            set
        }
        None => init_random(args.l, args.m, seed)?,
    };

    let k_set = LagConstraintSet::full(args.l, args.m)?;
    if args.out.verbose >= 2 {
        let table = correlate_all_fft(&initial);
        let sys = build_surrogate(&initial, &k_set, &table, cfg.eigen_mode)?;
        io::write_surrogate_debug_csv(&dir.join("surrogate_debug.csv"), &sys, &table)?;
    }

    let trace = design(&cfg, &initial)?;
    let table = correlate_all_fft(&trace.final_set);
    let mut metrics = io::MetricsSummary::from_table(&table, &k_set)?;
    metrics.status = Some(trace.status.to_string());
    metrics.seed = Some(seed);
    metrics.iterations = Some(trace.records.last().map(|r| r.iter).unwrap_or(0));

    io::write_sequence_json(&dir.join("sequences.json"), &trace.final_set)?;
    io::write_trace_csv(&dir.join("trace.csv"), &trace)?;
    io::write_correlation_csv(&dir.join("correlation.csv"), &table)?;
    io::write_metrics_json(&dir.join("metrics.json"), &metrics)?;
    if args.out.verbose >= 2 {
        io::write_inner_trace_csv(&dir.join("inner_trace.csv"), &trace.inner_trace)?;
    }

    println!(
        "seed {seed}: psl {:.6} isl {:.6} status {} after {} iterations -> {}",
        metrics.psl,
        metrics.isl,
        trace.status,
        metrics.iterations.unwrap(),
        dir.display()
    );
    Ok(())
}

fn cmd_design(args: DesignArgs) -> Result<(), Error> {
    if args.l == 0 || args.m < 2 {
        return Err(Error::Argument("need L >= 1 and M >= 2".into()));
    }
    if args.jobs == 0 {
        return Err(Error::Argument("jobs must be positive".into()));
    }
    let base = out_dir(&args.out);
    let seeds = if args.seeds.is_empty() {
        vec![args.seed]
    } else {
        args.seeds.clone()
    };
    if seeds.len() == 1 {
        return run_one_design(&args, seeds[0], &base);
    }

    // Seed sweep: independent workers, one subdirectory per seed.
    let mut result: Result<(), Error> = Ok(());
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in seeds.chunks(seeds.len().div_ceil(args.jobs)) {
            let args_ref = &args;
            let base_ref = &base;
            handles.push(scope.spawn(move || -> Result<(), Error> {
                for &seed in chunk {
                    run_one_design(args_ref, seed, &base_ref.join(format!("seed_{seed}")))?;
                }
                Ok(())
            }));
        }
        for handle in handles {
            if let Err(err) = handle.join().expect("design worker panicked") {
                result = Err(err);
            }
        }
    });
    result
}

fn cmd_correlate(args: CorrelateArgs) -> Result<(), Error> {
    let set = io::read_sequence_json(&args.input)?;
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;
    let k_set = LagConstraintSet::full(set.num_sequences(), set.length())?;
    let table = correlate_all_fft(&set);
    let metrics = io::MetricsSummary::from_table(&table, &k_set)?;
    io::write_correlation_csv(&dir.join("correlation.csv"), &table)?;
    io::write_metrics_json(&dir.join("metrics.json"), &metrics)?;
    println!(
        "psl {:.6} isl {:.6} argmax ({}, {}, {}) -> {}",
        metrics.psl,
        metrics.isl,
        metrics.argmax_i,
        metrics.argmax_j,
        metrics.argmax_k,
        dir.display()
    );
    Ok(())
}

fn cmd_radar(args: RadarArgs) -> Result<(), Error> {
    let set = io::read_sequence_json(&args.input)?;
    let geom = ArrayGeometry {
        num_tx: args.num_tx,
        num_rx: args.num_rx,
        ..ArrayGeometry::default()
    };
    if set.num_sequences() != geom.num_tx {
        return Err(Error::Argument(format!(
            "sequence file has L = {}, geometry expects {} transmitters",
            set.num_sequences(),
            geom.num_tx
        )));
    }
    let dir = out_dir(&args.out);
    std::fs::create_dir_all(&dir)?;

    let mut scene = match &args.scene {
        Some(path) => io::read_scene_json(path, args.seed)?,
        None => {
            if !args.random_scene {
                return Err(Error::Argument(
                    "either --scene FILE or --random-scene is required".into(),
                ));
            }
            RadarScene::random_sparse(args.q, args.p, -40.0, 40.0, 0.1, 1e-3, args.seed)?
        }
    };
    if let Some(snr) = args.snr_db {
        scene.sigma2 = 10f64.powf(-snr / 10.0);
    }
    if args.scene.is_none() {
        io::write_scene_json(&dir.join("scene.json"), &scene)?;
    }

    let q_bins = scene.num_range_bins();
    let received = simulate_received(&scene, &geom, &set, args.seed)?;
    let compressed = compress(&received, &set, q_bins)?;
    io::write_image_csv(&dir.join("image_true.csv"), &magnitude_image(&scene.beta))?;

    let mut summary = String::from("estimator,mse\n");
    if args.estimator != EstimatorArg::Capon {
        let image = estimate_ls(&compressed, &geom, &scene.theta_deg);
        let mse = image_mse(&image, &scene.beta);
        io::write_image_csv(&dir.join("image_ls.csv"), &magnitude_image(&image))?;
        summary.push_str(&format!("ls,{mse}\n"));
        println!("ls mse {mse:.6e} (seed {})", args.seed);
    }
    if args.estimator != EstimatorArg::Ls {
        let image = estimate_capon(&compressed, &geom, &scene.theta_deg)?;
        let mse = image_mse(&image, &scene.beta);
        io::write_image_csv(&dir.join("image_capon.csv"), &magnitude_image(&image))?;
        summary.push_str(&format!("capon,{mse}\n"));
        println!("capon mse {mse:.6e} (seed {})", args.seed);
    }
    std::fs::write(dir.join("mse_summary.csv"), summary)?;
    println!("outputs -> {}", dir.display());
    Ok(())
}
