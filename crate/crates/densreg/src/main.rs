//! Experiment CLI. Subcommands read a plain `key = value` config file
//! (`#` starts a comment) with optional flag overrides; artifacts land in
//! the output directory. Exit code 0 on success, 1 with a one-line
//! diagnostic otherwise.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use densreg::cover::{exponent_sweep, write_cover_csv};
use densreg::density::{fit_density, SmoothingKernel};
use densreg::error::{Error, Result};
use densreg::harness::{
    compare_supervised, emit, emit_compare, run_experiment, ExperimentConfig, GeneratorConfig,
    HRule,
};
use densreg::metric::{build_graph, MetricParams};
use densreg::synth::{Dataset, SwissRollConfig, TendrilConfig};
use densreg::util::fmt_g12;

#[derive(Parser)]
#[command(name = "densreg", about = "Density-sensitive semisupervised regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `out` key, else "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap repetitions at 50 for a quick pass.
    #[arg(long)]
    fast: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep (n, alpha) cells and write risk.csv / risk.svg.
    Simulate(Common),
    /// Simulate plus a supervised baseline; adds supervised.csv / ratio.csv.
    Compare(Common),
    /// Greedy covering numbers over a radius sweep; writes cover.csv.
    Cover(Common),
    /// Dump all pairwise graph distances to distance.csv.
    Distance(Common),
}

/// Flat key-value view of a config file.
struct Config {
    values: HashMap<String, String>,
}

impl Config {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::InvalidConfig(format!("cannot parse `{key} = {v}`"))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::InvalidConfig(format!("missing required key `{key}`")))
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| {
                        Error::InvalidConfig(format!("cannot parse `{key}` entry `{s}`"))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn require_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.list(key)?
            .ok_or_else(|| Error::InvalidConfig(format!("missing required key `{key}`")))
    }
}

fn generator_from(cfg: &Config, seed: u64) -> Result<GeneratorConfig> {
    let kind = cfg.raw("generator").unwrap_or("swiss_roll");
    match kind {
        "swiss_roll" => {
            let defaults = SwissRollConfig::default();
            Ok(GeneratorConfig::SwissRoll(SwissRollConfig {
                n_total: cfg.or("n_total", defaults.n_total)?,
                jitter_sd: cfg.or("jitter_sd", defaults.jitter_sd)?,
                noise_sd: cfg.or("noise_sd", defaults.noise_sd)?,
                seed,
                ..defaults
            }))
        }
        "tendril" => {
            let dim: usize = cfg.or("dim", 2)?;
            let epsilon: f64 = cfg.or("epsilon", 0.25)?;
            let lipschitz: f64 = cfg.or("lipschitz", 8.0)?;
            let omega_text = cfg.raw("omega").unwrap_or("alternating");
            let config = if omega_text == "alternating" {
                TendrilConfig::alternating(dim, epsilon, lipschitz, seed)?
            } else {
                let omega = omega_text
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        _ => Err(Error::InvalidConfig(format!(
                            "omega must be `alternating` or a 0/1 string, got `{omega_text}`"
                        ))),
                    })
                    .collect::<Result<Vec<u8>>>()?;
                TendrilConfig {
                    dim,
                    epsilon,
                    omega,
                    lipschitz,
                    seed,
                }
            };
            Ok(GeneratorConfig::Tendril {
                config,
                n_total: cfg.or("n_total", 400)?,
            })
        }
        other => Err(Error::InvalidConfig(format!("unknown generator `{other}`"))),
    }
}

fn experiment_from(cfg: &Config, common: &Common) -> Result<ExperimentConfig> {
    let master_seed = common.seed.unwrap_or(cfg.or("seed", 0)?);
    let mut repetitions: usize = cfg.or("repetitions", 300)?;
    if common.fast {
        repetitions = repetitions.min(50);
    }
    let h_rule = match (cfg.parse::<f64>("h")?, cfg.list::<f64>("h_grid")?) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig("set either `h` or `h_grid`, not both".into()))
        }
        (Some(h), None) => HRule::Fixed(h),
        (None, Some(hs)) => HRule::Cv { hs },
        (None, None) => return Err(Error::InvalidConfig("missing `h` or `h_grid`".into())),
    };
    Ok(ExperimentConfig {
        generator: generator_from(cfg, master_seed)?,
        n_grid: cfg.require_list("n_grid")?,
        alpha_grid: cfg.require_list("alpha_grid")?,
        repetitions,
        metric_params: MetricParams {
            alpha: 0.0,
            k_neighbors: cfg.or("k", 20)?,
            quadrature_segments: cfg.or("segments", 16)?,
        },
        sigma: cfg.require("sigma")?,
        h_rule,
        master_seed,
    })
}

fn out_dir(cfg: &Config, common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.raw("out").unwrap_or("out")))
}

/// Draws one dataset and builds its metric graph over all points; shared by
/// `cover` and `distance`.
fn single_graph(cfg: &Config, common: &Common) -> Result<(Dataset, densreg::metric::MetricGraph)> {
    let seed = common.seed.unwrap_or(cfg.or("seed", 0)?);
    let generator = generator_from(cfg, seed)?;
    let dataset = match &generator {
        GeneratorConfig::SwissRoll(sw) => densreg::synth::swiss_roll(sw, 1)?,
        GeneratorConfig::Tendril { config, n_total } => {
            densreg::synth::tendril_sample(config, *n_total, 1)?
        }
    };
    let mut points = dataset.unlabeled.points.clone();
    points.extend(dataset.labeled.xs.iter().cloned());
    let density = fit_density(points.clone(), SmoothingKernel::Boxcar, cfg.require("sigma")?)?;
    let params = MetricParams {
        alpha: cfg.or("alpha", 0.0)?,
        k_neighbors: cfg.or("k", 20)?,
        quadrature_segments: cfg.or("segments", 16)?,
    };
    let graph = build_graph(density, points, params)?;
    Ok((dataset, graph))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = Config::load(&common.config)?;
            let experiment = experiment_from(&cfg, &common)?;
            let report = run_experiment(&experiment)?;
            let dir = out_dir(&cfg, &common);
            emit(&report, &dir)?;
            println!(
                "wrote {} rows to {} in {:.1}s",
                report.rows.len(),
                dir.join("risk.csv").display(),
                report.wall_seconds
            );
        }
        Command::Compare(common) => {
            let cfg = Config::load(&common.config)?;
            let experiment = experiment_from(&cfg, &common)?;
            let report = compare_supervised(&experiment)?;
            let dir = out_dir(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            emit_compare(&report, &dir)?;
            println!(
                "wrote {} ratio rows to {}",
                report.ratios.len(),
                dir.join("ratio.csv").display()
            );
        }
        Command::Cover(common) => {
            let cfg = Config::load(&common.config)?;
            let radii: Vec<f64> = cfg.require_list("radii")?;
            let (_, graph) = single_graph(&cfg, &common)?;
            let sweep = exponent_sweep(&graph, &radii)?;
            let dir = out_dir(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            write_cover_csv(&sweep, &dir.join("cover.csv"))?;
            println!(
                "wrote {} radii to {}; fitted exponent {}",
                sweep.sweep.len(),
                dir.join("cover.csv").display(),
                fmt_g12(sweep.exponent_fit)
            );
        }
        Command::Distance(common) => {
            let cfg = Config::load(&common.config)?;
            let (_, graph) = single_graph(&cfg, &common)?;
            let dir = out_dir(&cfg, &common);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("distance.csv");
            let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(out, "i,j,distance")?;
            let n = graph.num_nodes();
            for i in 0..n {
                let dist = graph.distances_from(i);
                for (j, d) in dist.iter().enumerate().skip(i + 1) {
                    writeln!(out, "{i},{j},{}", fmt_g12(*d))?;
                }
            }
            drop(out);
            println!("wrote {} pairs to {}", n * (n - 1) / 2, path.display());
        }
    }
    Ok(())
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
