//! Subcommand implementations. Each one assembles its config, runs the
//! corresponding library operation, and writes `log.csv`, `result.json`
//! (`{"subcommand", "seed", "scalars": {...}}`), and — where samples exist —
//! `samples.csv`/`samples.svg` plus the serialized networks, all under the
//! output directory.

use crate::config::{build, classify, config_error, runtime, CliError};
use crate::svg::emit_svg_scatter;
use crate::RunArgs;
use choquet_core::oracle::{analytic_same_mean, analytic_same_variance, bump_f_g, BumpDensity, BumpMode, BumpSpec, DEFAULT_GRID, MAX_ATOMS};
use choquet_core::rng::{self, streams};
use choquet_core::{
    d_ct_discrepancy, energy_distance, estimate_vdc, gradient_pushforward, lp_vdc_discrete,
    rate_experiment, train_ct_gan, train_dominance_gan, train_portfolio, train_wgan,
    write_trace_csv, CriticConfig, EmpiricalMeasure, GanConfig, GanResult, Lipschitz, NetShape,
    PortfolioConfig, RateConfig, ResidualMaxoutNet, Sampler, TrainLog,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

fn prepare_out(args: &RunArgs) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(args.out.clone())
}

fn write_result(
    out: &Path,
    subcommand: &str,
    seed: u64,
    scalars: Vec<(String, f64)>,
) -> Result<(), CliError> {
    let mut map = serde_json::Map::new();
    for (k, v) in scalars {
        map.insert(k, json!(v));
    }
    let doc = json!({"subcommand": subcommand, "seed": seed, "scalars": map});
    let text = serde_json::to_string_pretty(&doc).map_err(runtime)?;
    fs::write(out.join("result.json"), text + "\n").map_err(runtime)
}

/// Pull the named columns out of a log's last row.
fn final_scalars(log: &TrainLog, names: &[&str]) -> Vec<(String, f64)> {
    names
        .iter()
        .filter_map(|n| log.last(n).map(|v| (n.to_string(), v)))
        .collect()
}

pub fn portfolio(args: &RunArgs) -> Result<(), CliError> {
    let cfg: PortfolioConfig = build(&PortfolioConfig::default(), args)?;
    cfg.validate().map_err(classify)?;
    let out = prepare_out(args)?;
    let res = train_portfolio(&cfg).map_err(classify)?;
    res.log.write_csv(&out.join("log.csv")).map_err(classify)?;
    fs::write(out.join("critic.json"), res.critic.to_json()).map_err(runtime)?;
    let mut scalars = vec![("z_final".to_string(), res.z)];
    scalars.extend(final_scalars(
        &res.log,
        &["portfolio_mean", "benchmark_mean", "penalty"],
    ));
    write_result(&out, "portfolio", cfg.seed, scalars)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetKind {
    EightGaussians,
    SwissRoll,
    UniformBox,
}

fn build_target(
    kind: TargetKind,
    noise: f64,
    csv: &Option<PathBuf>,
    dim: usize,
    seed: u64,
) -> Result<Sampler, CliError> {
    let s = rng::derive(seed, streams::REAL);
    if let Some(path) = csv {
        let cloud = EmpiricalMeasure::from_csv(path).map_err(classify)?;
        if cloud.dim() != dim {
            return Err(config_error(format!(
                "target csv is {}-dimensional, the generator emits {dim}",
                cloud.dim()
            )));
        }
        return Ok(Sampler::point_cloud(cloud, s));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(config_error(format!("target_noise must be >= 0, got {noise}")));
    }
    Ok(match kind {
        TargetKind::EightGaussians => Sampler::eight_gaussians(s),
        TargetKind::SwissRoll => Sampler::swiss_roll(noise, s),
        TargetKind::UniformBox => Sampler::uniform_box(vec![(-1.0, 1.0); dim], s),
    })
}

/// A 512-point cloud from the generator under fresh standard-normal latents.
fn generator_cloud(gen: &ResidualMaxoutNet, n: usize, seed: u64) -> EmpiricalMeasure {
    let base = Sampler::gaussian_mixture(
        vec![vec![0.0; gen.shape().latent]],
        1.0,
        rng::derive(seed, streams::EVAL),
    );
    Sampler::pushforward(gen.clone(), base).sample_batch(n)
}

fn write_nets(out: &Path, res: &GanResult) -> Result<(), CliError> {
    fs::write(out.join("generator.json"), res.generator.to_json()).map_err(runtime)?;
    for (name, net) in [
        ("discriminator.json", &res.discriminator),
        ("critic.json", &res.critic),
        ("critic2.json", &res.critic2),
    ] {
        if let Some(net) = net {
            fs::write(out.join(name), net.to_json()).map_err(runtime)?;
        }
    }
    Ok(())
}

fn write_samples(
    out: &Path,
    target: &mut Sampler,
    gen: &ResidualMaxoutNet,
    seed: u64,
) -> Result<(EmpiricalMeasure, EmpiricalMeasure), CliError> {
    let generated = generator_cloud(gen, 512, seed);
    let reference = target.sample_batch(512);
    generated.to_csv(out.join("samples.csv")).map_err(classify)?;
    if generated.dim() == 2 {
        emit_svg_scatter(&reference, Some(&generated), &out.join("samples.svg"))
            .map_err(classify)?;
    }
    Ok((generated, reference))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CtGanJob {
    target: TargetKind,
    /// Swiss-roll jitter; ignored by the other targets.
    target_noise: f64,
    /// CSV point cloud replacing the synthetic target when set.
    target_csv: Option<PathBuf>,
    #[serde(flatten)]
    gan: GanConfig,
}

pub fn ct_gan(args: &RunArgs) -> Result<(), CliError> {
    let defaults = CtGanJob {
        target: TargetKind::SwissRoll,
        target_noise: 0.05,
        target_csv: None,
        gan: GanConfig::ct_defaults(),
    };
    let job: CtGanJob = build(&defaults, args)?;
    let out = prepare_out(args)?;
    let mut target = build_target(
        job.target,
        job.target_noise,
        &job.target_csv,
        job.gan.gen_shape.output,
        job.gan.seed,
    )?;
    let res = train_ct_gan(&mut target, &job.gan).map_err(classify)?;
    res.log.write_csv(&out.join("log.csv")).map_err(classify)?;
    write_nets(&out, &res)?;
    let (generated, reference) = write_samples(&out, &mut target, &res.generator, job.gan.seed)?;
    let mut scalars = final_scalars(
        &res.log,
        &["witness_fwd", "witness_rev", "ct_estimate", "gen_objective"],
    );
    scalars.push((
        "energy_distance".to_string(),
        energy_distance(&reference, &generated),
    ));
    write_result(&out, "ct-gan", job.gan.seed, scalars)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DominanceJob {
    target: TargetKind,
    target_noise: f64,
    target_csv: Option<PathBuf>,
    /// Serialized baseline generator. When unset, a baseline is first
    /// trained with the plain WGAN objective under a derived seed and saved
    /// to `baseline.json`.
    baseline: Option<PathBuf>,
    #[serde(flatten)]
    gan: GanConfig,
}

pub fn dominance_gan(args: &RunArgs) -> Result<(), CliError> {
    let defaults = DominanceJob {
        target: TargetKind::EightGaussians,
        target_noise: 0.05,
        target_csv: None,
        baseline: None,
        gan: GanConfig::dominance_defaults(),
    };
    let job: DominanceJob = build(&defaults, args)?;
    let out = prepare_out(args)?;
    let out_dim = job.gan.gen_shape.output;

    let baseline = match &job.baseline {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            ResidualMaxoutNet::from_json(&text).map_err(classify)?
        }
        None => {
            let bcfg = GanConfig {
                seed: rng::derive(job.gan.seed, 21),
                ..job.gan.clone()
            };
            let mut bt =
                build_target(job.target, job.target_noise, &job.target_csv, out_dim, bcfg.seed)?;
            let trained = train_wgan(&mut bt, &bcfg).map_err(classify)?.generator;
            fs::write(out.join("baseline.json"), trained.to_json()).map_err(runtime)?;
            trained
        }
    };

    let mut target = build_target(
        job.target,
        job.target_noise,
        &job.target_csv,
        out_dim,
        job.gan.seed,
    )?;
    let res = train_dominance_gan(&mut target, &baseline, &job.gan).map_err(classify)?;
    res.log.write_csv(&out.join("log.csv")).map_err(classify)?;
    write_nets(&out, &res)?;
    let (generated, reference) = write_samples(&out, &mut target, &res.generator, job.gan.seed)?;

    let mut scalars = final_scalars(
        &res.log,
        &["wgan_loss", "gp_term", "vdc_witness", "vdc_penalty", "gen_objective"],
    );
    // Second moments of both generators under one latent batch: dominance
    // in the convex order forces the trained moment at least up to the
    // baseline's.
    let baseline_cloud = generator_cloud(&baseline, 512, job.gan.seed);
    scalars.push(("m2_generated".to_string(), generated.second_moment()));
    scalars.push(("m2_baseline".to_string(), baseline_cloud.second_moment()));
    scalars.push((
        "energy_distance".to_string(),
        energy_distance(&reference, &generated),
    ));
    write_result(&out, "dominance-gan", job.gan.seed, scalars)
}

pub fn rates(args: &RunArgs) -> Result<(), CliError> {
    let cfg: RateConfig = build(&RateConfig::default(), args)?;
    cfg.validate().map_err(classify)?;
    let out = prepare_out(args)?;
    let res = rate_experiment(&cfg).map_err(classify)?;

    let mut columns = vec!["n".to_string(), "mean".to_string(), "median".to_string()];
    for t in 0..cfg.trials {
        columns.push(format!("trial_{t}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut log = TrainLog::new(&column_refs);
    for p in &res.points {
        let mut row = vec![p.n as f64, p.mean, p.median];
        row.extend_from_slice(&p.estimates);
        log.push(row);
    }
    log.write_csv(&out.join("log.csv")).map_err(classify)?;

    let mut scalars = vec![("slope".to_string(), res.slope)];
    for p in &res.points {
        scalars.push((format!("mean_n{}", p.n), p.mean));
    }
    write_result(&out, "rates", cfg.seed, scalars)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OracleJob {
    /// "epanechnikov" or "triangular".
    density: String,
    /// "shift" (same variance) or "scale" (same mean).
    mode: String,
    a: f64,
    gradient_bound: f64,
    /// Rows of the quadrature table written to log.csv.
    grid_points: usize,
    seed: u64,
}

pub fn oracle_check(args: &RunArgs) -> Result<(), CliError> {
    let defaults = OracleJob {
        density: "epanechnikov".into(),
        mode: "shift".into(),
        a: 0.3,
        gradient_bound: 1.0,
        grid_points: DEFAULT_GRID,
        seed: 0,
    };
    let job: OracleJob = build(&defaults, args)?;
    let density = match job.density.as_str() {
        "epanechnikov" => BumpDensity::Epanechnikov,
        "triangular" => BumpDensity::Triangular,
        other => {
            return Err(config_error(format!(
                "unknown density `{other}` (epanechnikov or triangular)"
            )))
        }
    };
    if job.grid_points < 3 {
        return Err(config_error("grid_points must be at least 3".to_string()));
    }
    let c = job.gradient_bound;

    let (mode, scalars) = match job.mode.as_str() {
        "shift" => {
            let v = analytic_same_variance(density, job.a, c).map_err(classify)?;
            (
                BumpMode::Shift(job.a),
                vec![
                    ("a".to_string(), job.a),
                    ("gradient_bound".to_string(), c),
                    ("vdc".to_string(), v.vdc),
                    ("dct_directed".to_string(), v.dct_directed),
                    ("d_ct".to_string(), v.d_ct),
                ],
            )
        }
        "scale" => {
            let v = analytic_same_mean(density, job.a, c).map_err(classify)?;
            (
                BumpMode::Scale(job.a),
                vec![
                    ("a".to_string(), job.a),
                    ("gradient_bound".to_string(), c),
                    ("vdc_plus_minus".to_string(), v.vdc_plus_minus),
                    ("vdc_minus_plus".to_string(), v.vdc_minus_plus),
                    ("dct_plus_minus".to_string(), v.dct_plus_minus),
                    ("dct_minus_plus".to_string(), v.dct_minus_plus),
                    ("d_ct".to_string(), v.d_ct),
                    ("degenerate".to_string(), f64::from(v.degenerate)),
                ],
            )
        }
        other => return Err(config_error(format!("unknown mode `{other}` (shift or scale)"))),
    };

    let out = prepare_out(args)?;
    let mut spec = BumpSpec::new(density, mode).map_err(classify)?;
    spec.grid_points = job.grid_points;
    let table = bump_f_g(&spec);
    let mut csv = String::from("x,f,g\n");
    for i in 0..table.xs.len() {
        csv.push_str(&format!("{},{},{}\n", table.xs[i], table.f[i], table.g[i]));
    }
    fs::write(out.join("log.csv"), csv).map_err(runtime)?;
    write_result(&out, "oracle-check", job.seed, scalars)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VdcJob {
    plus_csv: String,
    minus_csv: String,
    /// Critic settings; when omitted a per-dimension default is used. Its
    /// seed is replaced by the job seed either way.
    critic: Option<CriticConfig>,
    seed: u64,
}

pub fn vdc(args: &RunArgs) -> Result<(), CliError> {
    let defaults = VdcJob {
        plus_csv: String::new(),
        minus_csv: String::new(),
        critic: None,
        seed: 0,
    };
    let job: VdcJob = build(&defaults, args)?;
    for (key, val) in [("plus_csv", &job.plus_csv), ("minus_csv", &job.minus_csv)] {
        if val.is_empty() {
            return Err(config_error(format!(
                "missing config key `{key}` (path to a CSV point set)"
            )));
        }
    }
    let plus = EmpiricalMeasure::from_csv(&job.plus_csv).map_err(classify)?;
    let minus = EmpiricalMeasure::from_csv(&job.minus_csv).map_err(classify)?;
    let dim = plus.dim();

    let mut critic = match job.critic {
        Some(c) => c,
        None if dim == 1 => CriticConfig::default_1d(),
        None => CriticConfig {
            shape: NetShape::new(vec![dim, 16, 16], 2).map_err(classify)?,
            ..CriticConfig::default_2d()
        },
    };
    critic.seed = job.seed;

    let out = prepare_out(args)?;
    let est = estimate_vdc(&plus, &minus, &critic).map_err(classify)?;
    write_trace_csv(&out.join("log.csv"), &est.trace).map_err(classify)?;
    fs::write(out.join("critic.json"), est.critic.to_json()).map_err(runtime)?;

    let push_plus = gradient_pushforward(&est.critic, &plus).map_err(classify)?;
    push_plus.to_csv(out.join("samples.csv")).map_err(classify)?;
    if dim == 2 {
        let push_minus = gradient_pushforward(&est.critic, &minus).map_err(classify)?;
        emit_svg_scatter(&push_plus, Some(&push_minus), &out.join("samples.svg"))
            .map_err(classify)?;
    }

    let mut scalars = vec![
        ("vdc".to_string(), est.value),
        (
            "dct_directed".to_string(),
            d_ct_discrepancy(est.value, &plus, &minus),
        ),
    ];
    // With a hard gradient bound and a small 1-D support, the dense LP gives
    // the exact value next to the estimate.
    if dim == 1 {
        if let Lipschitz::Hard(c) = critic.profile.lipschitz {
            let mut atoms: Vec<f64> = (0..plus.len())
                .map(|i| plus.point(i)[0])
                .chain((0..minus.len()).map(|i| minus.point(i)[0]))
                .collect();
            atoms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            atoms.dedup();
            if atoms.len() <= MAX_ATOMS {
                let sol = lp_vdc_discrete(&plus, &minus, c).map_err(classify)?;
                scalars.push(("lp_vdc".to_string(), sol.value));
            }
        }
    }
    write_result(&out, "vdc", job.seed, scalars)
}
