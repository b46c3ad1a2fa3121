use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use gridsparse::admm::{InnerSolverConfig, SolverConfig};
use gridsparse::attack::{
    build_projection, collective_sparse_attack, distributed_sparse_attack, random_sparse_vector,
    strategic_lasso_attack, strategic_selective_attack, targeted_lasso_attack,
    targeted_selective_attack, AttackSpec, AttackVector, StrategicConfig,
};
use gridsparse::detection::{run_detection, tau_threshold};
use gridsparse::estimation::{
    collaborative_state_estimate, distributed_state_estimate, wls_estimate, MeasurementSnapshot,
    StateEstimate,
};
use gridsparse::experiment::{emit_csv, lambda_max, partition_indices, run_experiment, ExperimentConfig};
use gridsparse::grid::{
    build_dc_jacobian, load_case, structure_report, MeasurementModel, MeasurementScheme,
    DEFAULT_NOISE_SIGMA, DEFAULT_RANK_TOLERANCE,
};
use gridsparse::partition::Axis;
use gridsparse::Error;

#[derive(Parser)]
#[command(name = "gridsparse", version, about = "Sparse FDI attacks and ADMM state estimation on DC grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a test system.
    Grid {
        #[command(subcommand)]
        action: GridAction,
    },
    /// Construct an attack vector and print it as JSON.
    Attack(AttackArgs),
    /// Estimate the state from a measurement vector.
    Estimate(EstimateArgs),
    /// Run the residual test on a measurement vector and an estimate.
    Detect(DetectArgs),
    /// Run a Monte-Carlo sweep and write CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GridAction {
    /// Print dimensions, rank and sparsity of the default Jacobian.
    Info { case: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackChoice {
    Tla,
    Tsa,
    Sla,
    Ssa,
    Distributed,
    Collective,
}

#[derive(clap::Args)]
struct AttackArgs {
    kind: AttackChoice,
    /// Bundled system name (ieee57, ...) or case file path.
    #[arg(long)]
    case: String,
    /// Sparsity level.
    #[arg(long, conflicts_with = "kn")]
    k: Option<usize>,
    /// Sparsity as a fraction of the meter count.
    #[arg(long)]
    kn: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Cluster count for distributed and collective attacks.
    #[arg(long = "G", default_value_t = 1)]
    g: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regularization as a fraction of λ_max.
    #[arg(long = "C", default_value_t = 0.5)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorChoice {
    Wls,
    Distributed,
    Collaborative,
}

#[derive(clap::Args)]
struct EstimateArgs {
    method: EstimatorChoice,
    #[arg(long)]
    case: String,
    /// JSON array (inline or file) or a file holding `{"z": [...]}`.
    #[arg(long)]
    z: String,
    #[arg(long = "G", default_value_t = 1)]
    g: usize,
    #[arg(long = "C", default_value_t = 0.5)]
    c: f64,
}

#[derive(clap::Args)]
struct DetectArgs {
    #[arg(long)]
    case: String,
    #[arg(long)]
    z: String,
    /// JSON array (inline or file) or a state-estimate JSON file.
    #[arg(long)]
    xhat: String,
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA)]
    sigma: f64,
}

enum Failure {
    Lib(Error),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors; 2 is reserved for non-convergence
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => {
            eprintln!("error: solver did not converge");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Grid {
            action: GridAction::Info { case },
        } => {
            let grid = load_case(&case)?;
            let model = build_dc_jacobian(&grid, &MeasurementScheme::Default)?;
            #[derive(Serialize)]
            struct Info {
                name: String,
                buses: usize,
                branches: usize,
                #[serde(flatten)]
                structure: gridsparse::grid::StructureReport,
            }
            print_json(&Info {
                name: grid.name().to_string(),
                buses: grid.bus_count(),
                branches: grid.branch_count(),
                structure: structure_report(&model, DEFAULT_RANK_TOLERANCE),
            })
        }
        Command::Attack(args) => attack(args),
        Command::Estimate(args) => {
            let model = model_for(&args.case, DEFAULT_NOISE_SIGMA)?;
            let z = read_vector(&args.z, "z")?;
            let snapshot = MeasurementSnapshot::new(&model, z)?;
            let solver = SolverConfig::default().with_lambda(args.c * lambda_max(model.h(), &snapshot.z)?);
            let estimate = match args.method {
                EstimatorChoice::Wls => wls_estimate(&model, &snapshot)?,
                EstimatorChoice::Distributed => {
                    let p = partition_indices(model.n_measurements(), args.g, Axis::Rows)?;
                    distributed_state_estimate(&model, &snapshot, &p, &solver)?
                }
                EstimatorChoice::Collaborative => {
                    let p = partition_indices(model.n_states(), args.g, Axis::Columns)?;
                    collaborative_state_estimate(&model, &snapshot, &p, &solver, &InnerSolverConfig::default())?
                }
            };
            print_json(&estimate)?;
            converged(estimate.solver.converged)
        }
        Command::Detect(args) => {
            let model = model_for(&args.case, args.sigma)?;
            let snapshot = MeasurementSnapshot::new(&model, read_vector(&args.z, "z")?)?;
            let x_hat = read_vector(&args.xhat, "x_hat")?;
            let estimate = StateEstimate {
                method: gridsparse::estimation::EstimationMethod::Wls,
                x_hat,
                per_cluster: None,
                solver: Default::default(),
            };
            let tau = tau_threshold(&model, args.sigma, model.noise_variances())?;
            print_json(&run_detection(&model, &snapshot, &estimate, tau)?)
        }
        Command::Experiment { config, out } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let result = run_experiment(&cfg)?;
            emit_csv(&result, &out)?;
            eprintln!("wrote {} rows to {} (config {})", result.rows.len(), out.display(), &result.config_hash[..12]);
            Ok(())
        }
    }
}

fn attack(args: AttackArgs) -> Result<(), Failure> {
    let model = model_for(&args.case, DEFAULT_NOISE_SIGMA)?;
    let h = model.h();
    let (n, d) = h.shape();
    let k = match (args.k, args.kn) {
        (Some(k), _) => k,
        (None, Some(kn)) if (0.0..=1.0).contains(&kn) => (kn * n as f64).round() as usize,
        (None, Some(kn)) => return Err(Error::InvalidArgument(format!("--kn {kn} outside [0, 1]")).into()),
        (None, None) => (n / 10).max(1),
    };
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds N = {n}")).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let x = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let z = h * x;
    let solver = SolverConfig::default();

    let vector: AttackVector = match args.kind {
        AttackChoice::Tla | AttackChoice::Tsa => {
            let targeted: BTreeMap<usize, f64> = sample(&mut rng, d, 2.min(d - 1))
                .into_iter()
                .map(|j| (j, StandardNormal.sample(&mut rng)))
                .collect();
            let mut spec = AttackSpec {
                targeted,
                ..AttackSpec::default()
            };
            let pair = build_projection(h, &spec.off_target(d), &spec.targeted)?;
            let cfg = solver.with_lambda(args.c * lambda_max(&pair.b, &pair.y)?);
            if matches!(args.kind, AttackChoice::Tla) {
                targeted_lasso_attack(h, &spec, &cfg)?
            } else {
                spec.sparsity_k = Some(k);
                targeted_selective_attack(h, &spec, &cfg)?
            }
        }
        AttackChoice::Sla | AttackChoice::Ssa => {
            let attacked: Vec<usize> = sample(&mut rng, n, k).into_vec();
            let secure: Vec<usize> = (0..n).filter(|i| !attacked.contains(i)).collect();
            let cfg = StrategicConfig {
                lambda_ratio: args.c,
                ..StrategicConfig::default()
            };
            if matches!(args.kind, AttackChoice::Sla) {
                strategic_lasso_attack(h, &secure, args.psi, &cfg)?
            } else {
                strategic_selective_attack(h, &secure, k.min(d - 1), args.psi, &cfg)?
            }
        }
        AttackChoice::Distributed | AttackChoice::Collective => {
            let target = random_sparse_vector(&mut rng, n, k, z.mean(), z.variance())?;
            let cfg = solver.with_lambda(args.c * lambda_max(h, &target)?);
            if matches!(args.kind, AttackChoice::Distributed) {
                let p = partition_indices(n, args.g, Axis::Rows)?;
                distributed_sparse_attack(h, &target, &p, &cfg)?
            } else {
                let p = partition_indices(d, args.g, Axis::Columns)?;
                collective_sparse_attack(h, &target, &p, &cfg, &InnerSolverConfig::default())?
            }
        }
    };

    let text = serde_json::to_string_pretty(&vector).map_err(|e| Error::Serde(e.to_string()))?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => emit(&text),
    }
    if vector.leak_warning {
        log::warn!("attack leaks into secure meters");
    }
    converged(vector.solver.converged)
}

fn converged(ok: bool) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn model_for(case: &str, sigma: f64) -> Result<MeasurementModel, Error> {
    build_dc_jacobian(&load_case(case)?, &MeasurementScheme::Default)?.with_noise_sigma(sigma)
}

/// Accepts an inline JSON array, a file with an array, or a file with an
/// object holding the array under `field`.
fn read_vector(arg: &str, field: &str) -> Result<DVector<f64>, Error> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::Io {
            path: arg.into(),
            source: e,
        })?
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let array = match &value {
        serde_json::Value::Object(map) => map.get(field).cloned(),
        other => Some(other.clone()),
    }
    .ok_or_else(|| Error::Validation(format!("missing '{field}' array")))?;
    let values: Vec<f64> = serde_json::from_value(array).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(DVector::from_vec(values))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    emit(&text);
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe (`| head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
