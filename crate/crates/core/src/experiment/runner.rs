use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::clusters::{choose_clusters, partition_indices};
use super::config::{ExperimentConfig, ExperimentMode};
use crate::admm::{InnerSolverConfig, SolverConfig};
use crate::attack::{
    attack_from_projection, build_projection, collective_sparse_attack, distributed_sparse_attack,
    random_sparse_vector, strategic_lasso_attack, strategic_selective_attack, StrategicConfig,
};
use crate::detection::{
    attack_error, confusion, metrics, run_detection, tau_threshold, ConstructionTally, DEFAULT_ZERO_TOL,
};
use crate::error::{Error, Result};
use crate::estimation::{
    collaborative_state_estimate, distributed_state_estimate, MeasurementSnapshot, StateEstimate,
    EstimationMethod,
};
use crate::grid::{build_dc_jacobian, MeasurementModel, MeasurementScheme};
use crate::partition::Axis;

pub const CSV_HEADER: [&str; 9] = ["system", "mode", "G", "k_over_N", "metric", "mean", "std", "n", "seed"];

/// `‖Hᵀv‖∞`, the smallest `λ` for which the LASSO fit of `v` is zero.
pub fn lambda_max(h: &DMatrix<f64>, v: &DVector<f64>) -> Result<f64> {
    if v.len() != h.nrows() {
        return Err(Error::Dimension(format!(
            "vector of length {} for {} rows",
            v.len(),
            h.nrows()
        )));
    }
    Ok(h.tr_mul(v).amax())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k_over_n: f64,
    pub g: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub system: String,
    pub mode: ExperimentMode,
    pub seed: u64,
    /// SHA-256 of the canonical JSON form of the config.
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    /// Rows for one metric, in grid order.
    pub fn metric<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == name)
    }
}

type Metrics = Vec<(&'static str, Option<f64>)>;

struct Outcome {
    g: usize,
    metrics: Metrics,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    model: MeasurementModel,
    solver: SolverConfig,
    tau: f64,
}

/// Runs the sweep. Each realization draws from its own ChaCha stream
/// (grid index in the high word, realization index in the low word), so
/// results do not depend on scheduling. A grid point where any
/// realization fails is reported as a single `failure` row.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let case = config.system.load()?;
    let model = build_dc_jacobian(&case, &MeasurementScheme::Default)?.with_noise_sigma(config.noise_sigma)?;
    let tau = match config.mode {
        ExperimentMode::RandomAttackDetectDistributed | ExperimentMode::RandomAttackDetectCollaborative => {
            tau_threshold(&model, config.noise_sigma, model.noise_variances())?
        }
        _ => 0.0,
    };
    let ctx = Context {
        cfg: config,
        solver: config.solver(),
        model,
        tau,
    };
    let n = ctx.model.n_measurements();

    let mut rows = Vec::new();
    for (gi, &kn) in config.k_over_n_grid.iter().enumerate() {
        let k = ((kn * n as f64).round() as usize).min(n);
        let outcomes: Vec<Result<Outcome>> = (0..config.realizations)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(((gi as u64) << 32) | r as u64);
                realization(&ctx, k, &mut rng)
            })
            .collect();
        rows.extend(aggregate(kn, outcomes));
    }

    let canonical = serde_json::to_string(config).map_err(|e| Error::Serde(e.to_string()))?;
    Ok(ExperimentResult {
        system: config.system.to_string(),
        mode: config.mode,
        seed: config.seed,
        config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
        rows,
    })
}

fn aggregate(kn: f64, outcomes: Vec<Result<Outcome>>) -> Vec<ResultRow> {
    let total = outcomes.len();
    let failures: Vec<String> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().err().map(|e| e.to_string()))
        .collect();
    if !failures.is_empty() {
        log::warn!("k/N = {kn}: {} of {total} realizations failed: {}", failures.len(), failures[0]);
        return vec![ResultRow {
            k_over_n: kn,
            g: 0,
            metric: "failure".into(),
            mean: failures.len() as f64 / total as f64,
            std: 0.0,
            n: failures.len(),
        }];
    }
    let mut buckets: BTreeMap<(usize, &'static str), Vec<f64>> = BTreeMap::new();
    for outcome in outcomes.into_iter().flatten() {
        for (name, value) in outcome.metrics {
            let bucket = buckets.entry((outcome.g, name)).or_default();
            if let Some(v) = value {
                bucket.push(v);
            }
        }
    }
    buckets
        .into_iter()
        .map(|((g, name), values)| {
            let (mean, std) = mean_std(&values);
            ResultRow {
                k_over_n: kn,
                g,
                metric: name.to_string(),
                mean,
                std,
                n: values.len(),
            }
        })
        .collect()
}

/// Sample mean and standard deviation (`n − 1` denominator; 0 for fewer
/// than two values, NaN mean for none).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn flag(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

fn realization(ctx: &Context, k: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let h = ctx.model.h();
    let (n, d) = h.shape();
    let x = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut *rng));
    let noise = DVector::from_fn(n, |_, _| {
        let e: f64 = StandardNormal.sample(&mut *rng);
        e * cfg.noise_sigma
    });
    let z = h * x + noise;
    let (amp_mean, amp_var) = (z.mean(), z.variance());

    match cfg.mode {
        ExperimentMode::Tla | ExperimentMode::Tsa => {
            let targeted: BTreeMap<usize, f64> = sample(rng, d, cfg.targeted.min(d - 1))
                .into_iter()
                .map(|j| (j, 1.0))
                .collect();
            let off: Vec<usize> = (0..d).filter(|j| !targeted.contains_key(j)).collect();
            let reference = random_sparse_vector(rng, n, k, amp_mean, amp_var)?;
            let pair = build_projection(h, &off, &targeted)?.retarget(&reference)?;
            let lambda = cfg.c * lambda_max(&pair.b, &pair.y)?;
            let budget = (cfg.mode == ExperimentMode::Tsa).then_some(k);
            let attack = attack_from_projection(h, &pair, budget, &ctx.solver.with_lambda(lambda))?;
            Ok(Outcome {
                g: 1,
                metrics: construction_metrics(&attack.a, &reference, attack.solver.converged)?,
            })
        }
        ExperimentMode::Sla | ExperimentMode::Ssa => {
            let attacked: BTreeSet<usize> = sample(rng, n, k).into_iter().collect();
            let secure: Vec<usize> = (0..n).filter(|i| !attacked.contains(i)).collect();
            let reference = DVector::from_fn(n, |i, _| if attacked.contains(&i) { 1.0 } else { 0.0 });
            let strategic = StrategicConfig {
                solver: ctx.solver,
                lambda_ratio: cfg.c,
                ..StrategicConfig::default()
            };
            let attack = if cfg.mode == ExperimentMode::Sla {
                strategic_lasso_attack(h, &secure, cfg.psi, &strategic)?
            } else {
                strategic_selective_attack(h, &secure, k.min(d - 1), cfg.psi, &strategic)?
            };
            let mut metrics = construction_metrics(&attack.a, &reference, attack.solver.converged)?;
            metrics.push(("leak_free", flag(!attack.leak_warning)));
            Ok(Outcome { g: 1, metrics })
        }
        ExperimentMode::RandomAttackDetectDistributed | ExperimentMode::RandomAttackDetectCollaborative => {
            let a = random_sparse_vector(rng, n, k, amp_mean, amp_var)?;
            let attacked: BTreeSet<usize> = (0..n).filter(|&i| a[i] != 0.0).collect();
            let snapshot = MeasurementSnapshot::new(&ctx.model, z + &a)?;
            let solver = ctx.solver.with_lambda(cfg.c * lambda_max(h, &snapshot.z)?);
            let (g, estimate) = if cfg.mode == ExperimentMode::RandomAttackDetectDistributed {
                let g = choose_clusters(n, cfg.g_policy, rng)?;
                let p = partition_indices(n, g, Axis::Rows)?;
                (g, distributed_state_estimate(&ctx.model, &snapshot, &p, &solver)?)
            } else {
                let g = choose_clusters(d, cfg.g_policy, rng)?;
                let p = partition_indices(d, g, Axis::Columns)?;
                let inner = InnerSolverConfig::default();
                (g, collaborative_state_estimate(&ctx.model, &snapshot, &p, &solver, &inner)?)
            };
            let detection = run_detection(&ctx.model, &snapshot, &estimate, ctx.tau)?;
            let scores = metrics(&confusion(&detection.attacked_mask, &attacked));
            Ok(Outcome {
                g,
                metrics: vec![
                    ("accuracy", scores.accuracy),
                    ("converged", flag(estimate.solver.converged)),
                    ("precision", scores.precision),
                    ("recall", scores.recall),
                ],
            })
        }
        ExperimentMode::DistributedAttack | ExperimentMode::CollectiveAttack => {
            let target = random_sparse_vector(rng, n, k, amp_mean, amp_var)?;
            let solver = ctx.solver.with_lambda(cfg.c * lambda_max(h, &target)?);
            let (g, attack) = if cfg.mode == ExperimentMode::DistributedAttack {
                let g = choose_clusters(n, cfg.g_policy, rng)?;
                let p = partition_indices(n, g, Axis::Rows)?;
                (g, distributed_sparse_attack(h, &target, &p, &solver)?)
            } else {
                let g = choose_clusters(d, cfg.g_policy, rng)?;
                let p = partition_indices(d, g, Axis::Columns)?;
                (g, collective_sparse_attack(h, &target, &p, &solver, &InnerSolverConfig::default())?)
            };
            let c = attack.c.clone().expect("cooperative attacks carry c");
            let estimate = StateEstimate {
                method: EstimationMethod::Wls,
                x_hat: c,
                per_cluster: None,
                solver: attack.solver,
            };
            let error = attack_error(&ctx.model, &MeasurementSnapshot::new(&ctx.model, target.clone())?, &estimate)?;
            let mut metrics = construction_metrics(&attack.a, &target, attack.solver.converged)?;
            metrics.push(("error", Some(error.mean())));
            Ok(Outcome { g, metrics })
        }
    }
}

fn construction_metrics(constructed: &DVector<f64>, reference: &DVector<f64>, converged: bool) -> Result<Metrics> {
    let mut tally = ConstructionTally::default();
    tally.add(constructed, reference, DEFAULT_ZERO_TOL)?;
    let p = tally.probabilities();
    Ok(vec![
        ("converged", flag(converged)),
        ("pr_nonzero", p.p_nonzero),
        ("pr_zero", p.p_zero),
    ])
}

/// Writes the result as CSV with the fixed column set.
pub fn write_csv<W: Write>(result: &ExperimentResult, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Serde(e.to_string());
    out.write_record(CSV_HEADER).map_err(to_err)?;
    let mode = result.mode.to_string();
    let seed = result.seed.to_string();
    for row in &result.rows {
        out.write_record([
            result.system.as_str(),
            mode.as_str(),
            &row.g.to_string(),
            &row.k_over_n.to_string(),
            &row.metric,
            &row.mean.to_string(),
            &row.std.to_string(),
            &row.n.to_string(),
            seed.as_str(),
        ])
        .map_err(to_err)?;
    }
    out.flush().map_err(|e| Error::Serde(e.to_string()))
}

pub fn emit_csv(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Serde(msg) => Error::io(path, std::io::Error::other(msg)),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{GPolicy, SystemSpec};
    use crate::grid::IeeeSystem;

    fn small(mode: ExperimentMode) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(SystemSpec::Ieee(IeeeSystem::Ieee9), mode, vec![0.2, 0.6]);
        cfg.realizations = 3;
        cfg.seed = 7;
        cfg
    }

    fn csv_of(result: &ExperimentResult) -> String {
        let mut buf = Vec::new();
        write_csv(result, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn lambda_max_examples() {
        let h = DMatrix::identity(2, 2);
        assert_eq!(lambda_max(&h, &DVector::from_column_slice(&[3.0, -4.0])).unwrap(), 4.0);
        assert_eq!(lambda_max(&h, &DVector::zeros(2)).unwrap(), 0.0);
        assert!(lambda_max(&h, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn every_mode_runs_and_is_deterministic() {
        for mode in [
            ExperimentMode::Tla,
            ExperimentMode::Tsa,
            ExperimentMode::Sla,
            ExperimentMode::Ssa,
            ExperimentMode::RandomAttackDetectDistributed,
            ExperimentMode::RandomAttackDetectCollaborative,
            ExperimentMode::DistributedAttack,
            ExperimentMode::CollectiveAttack,
        ] {
            let mut cfg = small(mode);
            cfg.g_policy = GPolicy::PrimeDivisorRandom;
            let first = run_experiment(&cfg).unwrap();
            assert!(!first.rows.is_empty(), "{mode}");
            assert!(first.rows.iter().all(|r| r.metric != "failure"), "{mode}: {:?}", first.rows);
            let second = run_experiment(&cfg).unwrap();
            assert_eq!(csv_of(&first), csv_of(&second));
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let result = ExperimentResult {
            system: "ieee9".into(),
            mode: ExperimentMode::Tla,
            seed: 0,
            config_hash: String::new(),
            rows: vec![],
        };
        assert_eq!(csv_of(&result), "system,mode,G,k_over_N,metric,mean,std,n,seed\n");
    }
}
