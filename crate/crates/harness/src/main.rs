use clap::{Args, Parser, Subcommand};
use ldpd_core::sim::{Density, SceneSnapshot};
use ldpd_harness::*;
use ldpd_marl::Checkpoint;
use rand::SeedableRng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ldpd", version, about = "Teacher-guided multi-agent training for on-ramp merging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct LlmArgs {
    /// Chat-completions base URL.
    #[arg(long)]
    llm_endpoint: Option<String>,
    #[arg(long)]
    llm_model: Option<String>,
    /// live, record or replay.
    #[arg(long)]
    llm_mode: Option<String>,
    /// JSONL session store used by record and replay.
    #[arg(long)]
    llm_store: Option<PathBuf>,
    /// Ask the model once per CAV instead of once per scene.
    #[arg(long)]
    llm_per_cav: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Key-value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<u8>,
    #[arg(long)]
    density: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// oracle or llm.
    #[arg(long)]
    backend: Option<String>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Train students for every configured seed.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        teaching_episodes: Option<usize>,
        #[arg(long)]
        self_episodes: Option<usize>,
        /// Output directory; existing checkpoints there are resumed.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Stop after this many total episodes per seed.
        #[arg(long)]
        until: Option<usize>,
    },
    /// Evaluate trained checkpoints on held-out episodes.
    Evaluate {
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        /// Defaults to the training scenario.
        #[arg(long)]
        scenario: Option<u8>,
        /// Defaults to the training density.
        #[arg(long)]
        density: Option<Density>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
        #[arg(long, default_value = "report")]
        stem: String,
        /// Also write one JSONL action trace per episode here.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Evaluate checkpoints at another density of their training scenario.
    CrossValidate {
        #[arg(long = "checkpoint", required = true)]
        checkpoints: Vec<PathBuf>,
        /// Density to apply; repeat for several.
        #[arg(long = "density", required = true)]
        densities: Vec<Density>,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
        #[arg(long, default_value = "cross")]
        stem: String,
    },
    /// Run the teacher on one scene snapshot and print its decision.
    Teach {
        #[arg(long)]
        scene: PathBuf,
        /// Seed of the priority tie-break noise.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Re-simulate a JSONL action trace and print the episode metrics.
    Replay {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Print the effective configuration.
    Config {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
}

fn experiment(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let mut set = |k: &str, v: &str| cfg.set(k, v).map_err(HarnessError::Config);
    if let Some(v) = args.scenario {
        set("scenario", &v.to_string())?;
    }
    for (k, v) in [("density", &args.density), ("seeds", &args.seeds), ("backend", &args.backend)] {
        if let Some(v) = v {
            set(k, v)?;
        }
    }
    let l = &args.llm;
    for (k, v) in [("llm_endpoint", &l.llm_endpoint), ("llm_model", &l.llm_model), ("llm_mode", &l.llm_mode)] {
        if let Some(v) = v {
            set(k, v)?;
        }
    }
    if let Some(p) = &l.llm_store {
        set("llm_store", &p.display().to_string())?;
    }
    if l.llm_per_cav {
        set("llm_per_cav", "true")?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| HarnessError::Config(format!("expected key=value, got {kv:?}")))?;
        set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { exp, teaching_episodes, self_episodes, out, until } => {
            let mut cfg = experiment(&exp)?;
            if let Some(n) = teaching_episodes {
                cfg.train.teaching_episodes = n;
            }
            if let Some(n) = self_episodes {
                cfg.train.self_episodes = n;
            }
            let o = run_training_until(&cfg, &out, until)?;
            for r in &o.runs {
                println!("seed {}: {} episodes (resumed at {}), checkpoint {}", r.seed, r.episodes, r.resumed_at, r.checkpoint.display());
            }
            match &o.report {
                Some(f) => println!("report: {}", f.csv.display()),
                None => println!("training incomplete; rerun to resume"),
            }
        }
        Command::Evaluate { checkpoints, scenario, density, episodes, seed, out, stem, trace_dir } => {
            let mut rows = Vec::new();
            for p in &checkpoints {
                let ck = Checkpoint::load(p)?;
                let scenario = scenario.unwrap_or(ck.config.env.scenario_id);
                let density = density.unwrap_or(ck.config.env.density);
                rows.push(evaluate(&ck, scenario, density, episodes, seed)?);
                if let Some(dir) = &trace_dir {
                    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
                    let env = ldpd_core::sim::EnvConfig { scenario_id: scenario, density, ..ck.config.env.clone() };
                    for (j, s) in eval_episode_seeds(seed, episodes).into_iter().enumerate() {
                        let (lines, _) = record_trace(&ck.agents, &env, s)?;
                        write_trace(&lines, &dir.join(format!("seed-{}-episode-{j}.jsonl", ck.config.seed)))?;
                    }
                }
            }
            let f = emit_report(&rows, &out, &stem)?;
            print!("{}", Report::new(rows)?.to_csv()?);
            eprintln!("wrote {} and {}", f.csv.display(), f.json.display());
        }
        Command::CrossValidate { checkpoints, densities, episodes, seed, out, stem } => {
            let mut rows = Vec::new();
            for p in &checkpoints {
                let ck = Checkpoint::load(p)?;
                for d in &densities {
                    rows.push(cross_validate(&ck, *d, episodes, seed)?);
                }
            }
            let f = emit_report(&rows, &out, &stem)?;
            print!("{}", Report::new(rows)?.to_csv()?);
            eprintln!("wrote {} and {}", f.csv.display(), f.json.display());
        }
        Command::Teach { scene, seed, exp } => {
            let cfg = experiment(&exp)?;
            let text = std::fs::read_to_string(&scene).map_err(HarnessError::io(&scene))?;
            let env = SceneSnapshot::from_json(&text)?.into_env()?;
            let mut teacher = make_teacher(&cfg, open_store(&cfg)?)?;
            let d = teacher.decide(&env, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            println!("{}", serde_json::to_string_pretty(&d.to_json())?);
        }
        Command::Replay { trace } => {
            let m = replay_trace(&read_trace(&trace)?)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
        }
        Command::Config { exp } => print!("{}", experiment(&exp)?.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
