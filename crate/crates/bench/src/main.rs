use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use longhot_bench::dump::write_dump;
use longhot_bench::report::{summary_table, sweep_csv, sweep_row, SuiteReport};
use longhot_bench::runner::{run_episodes, RunSpec};
use longhot_bench::scene_io::{load_scene, save_scene, SceneSet};
use longhot_bench::suite::SuiteFile;
use longhot_bench::sweep::{self, Axis, SweepBase};
use longhot_bench::trace::{read_trace, verify, write_trace, TraceHeader, Verdict};
use longhot_bench::ConfigError;
use longhot_core::policy::{EpisodeRun, HtpConfig, Variant};
use longhot_core::world::generate_scene;
use longhot_core::{rng, EnvConfig, Episode, LevelParams, SceneSpec};

#[derive(Parser)]
#[command(name = "longhot", version, about = "Long-horizon object transport benchmark")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "LONGHOT_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate procedural scenes into <out>/scenes.
    GenScenes {
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Scene side length in meters.
        #[arg(long, default_value_t = 30.0)]
        extent: f64,
        #[arg(long, default_value_t = 6)]
        rooms: usize,
        #[arg(long, default_value_t = 1.0)]
        corridor: f64,
        #[arg(long, default_value_t = 0.03)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scene ids are this prefix plus an index.
        #[arg(long, default_value = "s")]
        prefix: String,
    },
    /// Sample an episode suite over a scene directory.
    GenEpisodes {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Suite file to write; defaults to <out>/suite.json.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a policy over a suite and write the report, optionally with traces and dumps.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// Scene directory; defaults to <out>/scenes.
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
        /// Write one JSONL trace per episode into <out>/traces.
        #[arg(long)]
        traces: bool,
        /// Dump the final map and graph of these episode indices into <out>/dump.
        #[arg(long, value_delimiter = ',')]
        dump: Vec<usize>,
    },
    /// Run one report per value of an axis and merge them into <out>/sweep.csv.
    Sweep {
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        suite: SuiteArgs,
        /// Variants to run at every value.
        #[arg(long, value_delimiter = ',', default_value = "FULL")]
        variants: Vec<Variant>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Re-execute a trace and compare it step by step.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scene: PathBuf,
    },
    /// Summarize report files (or directories holding report.json).
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also write the summaries as long-format CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// Scene directory; defaults to <out>/scenes.
    #[arg(long)]
    scenes: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    level: String,
    /// Overrides the number of targets of the level.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, default_value = "FULL")]
    variant: Variant,
    /// Probability of a random move during object navigation.
    #[arg(long, default_value_t = 0.0)]
    noise_p: f64,
    /// A pickup with nothing in range ends the episode.
    #[arg(long)]
    strict: bool,
    /// Scripted baseline: pick up whenever any closeness exceeds this.
    #[arg(long)]
    greedy_pickup: Option<f64>,
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    #[arg(long, default_value_t = 200)]
    t_p: u32,
    #[arg(long, default_value_t = 2500)]
    t_max: u32,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    parallelism: Option<usize>,
}

impl PolicyArgs {
    fn spec(&self) -> Result<RunSpec, ConfigError> {
        let htp = HtpConfig {
            variant: self.variant,
            closeness_threshold: self.threshold,
            t_p: self.t_p,
            nav_noise_p: self.noise_p,
            greedy_pickup: self.greedy_pickup,
            ..HtpConfig::default()
        };
        let env = EnvConfig { t_max: self.t_max, strict: self.strict, ..EnvConfig::default() };
        let parallelism = self.parallelism.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let spec = RunSpec { htp, env, parallelism };
        spec.validate()?;
        Ok(spec)
    }
}

impl SuiteArgs {
    fn level(&self) -> Result<LevelParams, ConfigError> {
        let level = LevelParams::by_name(&self.level).ok_or_else(|| ConfigError::Invalid(format!("unknown level {:?}", self.level)))?;
        Ok(match self.k {
            Some(k) => level.with_k(k),
            None => level,
        })
    }

    fn scene_dir(&self, out: &Path) -> PathBuf {
        self.scenes.clone().unwrap_or_else(|| out.join("scenes"))
    }
}

/// Writes traces and dumps from worker threads.
struct Artifacts<'a> {
    env: &'a EnvConfig,
    traces: Option<PathBuf>,
    dump: Option<(PathBuf, &'a [usize])>,
}

impl Artifacts<'_> {
    fn store(&self, i: usize, ep: &Episode, run: &EpisodeRun) -> Result<(), String> {
        let stem = format!("ep{i:04}");
        if let Some(dir) = &self.traces {
            let header = TraceHeader { episode: ep.clone(), env: self.env.clone() };
            write_trace(&dir.join(format!("{stem}.jsonl")), &header, &run.trace).map_err(|e| e.to_string())?;
        }
        if let Some((dir, which)) = &self.dump {
            if which.contains(&i) {
                write_dump(dir, &stem, &run.map, &run.graph).map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}

fn mkdir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.out;
    match cli.cmd {
        Cmd::GenScenes { count, extent, rooms, corridor, density, seed, prefix } => {
            let spec = SceneSpec { extent_m: extent, room_count: rooms, corridor_width_m: corridor, obstacle_density: density, ..SceneSpec::default() };
            let dir = out.join("scenes");
            mkdir(&dir)?;
            for i in 0..count {
                let id = format!("{prefix}{i}");
                let grid = generate_scene(rng::derive(seed, i as u64), &spec).map_err(|e| ConfigError::Invalid(format!("scene {id}: {e}")))?;
                let path = dir.join(format!("{id}.json"));
                save_scene(&path, &id, &grid)?;
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::GenEpisodes { suite, output } => {
            let scenes = SceneSet::load_dir(&suite.scene_dir(&out))?;
            let file = SuiteFile::generate(&scenes, &suite.level()?, suite.count, suite.seed)?;
            let path = output.unwrap_or_else(|| out.join("suite.json"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                mkdir(parent)?;
            }
            file.save(&path)?;
            println!("{} ({} episodes)", path.display(), file.episodes.len());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { suite, scenes, policy, traces, dump } => {
            let spec = policy.spec()?;
            let file = SuiteFile::load(&suite)?;
            let scenes = SceneSet::load_dir(&scenes.unwrap_or_else(|| out.join("scenes")))?;
            file.check_scenes(&scenes)?;
            mkdir(&out)?;
            let art = Artifacts {
                env: &spec.env,
                traces: traces.then(|| out.join("traces")),
                dump: (!dump.is_empty()).then(|| (out.join("dump"), dump.as_slice())),
            };
            if let Some(d) = &art.traces {
                mkdir(d)?;
            }
            let t0 = Instant::now();
            let rows = run_episodes(&file.episodes, &scenes, &spec, &|i, ep, run| art.store(i, ep, run));
            let report = SuiteReport::new(&spec, &file.episodes, &scenes, file.seed, rows);
            report.write(&out)?;
            print!("{}", summary_table(&[(out.display().to_string(), report.clone())]));
            eprintln!("{} episodes in {:.1}s", report.episodes, t0.elapsed().as_secs_f64());
            Ok(exit_for(&report))
        }
        Cmd::Sweep { axis, values, suite, variants, policy } => {
            let spec = policy.spec()?;
            let base = SweepBase {
                scenes: SceneSet::load_dir(&suite.scene_dir(&out))?,
                level: suite.level()?,
                count: suite.count,
                seed: suite.seed,
                spec,
                variants,
            };
            let points = sweep::plan(&base, axis, &values)?;
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            let mut errors = false;
            for p in &points {
                let report = sweep::run_point(&base, p, &|_, _, _| Ok(()));
                let name = format!("{axis}_{}_{}", p.value, report.variant);
                report.write(&out.join(&name))?;
                rows.push(sweep_row(&axis.to_string(), &p.value, &report));
                errors |= report.errors > 0;
                reports.push((name, report));
            }
            mkdir(&out)?;
            let path = out.join("sweep.csv");
            fs::write(&path, sweep_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", summary_table(&reports));
            Ok(if errors { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Cmd::Replay { trace, scene } => {
            let (header, records) = read_trace(&trace)?;
            let (id, grid) = load_scene(&scene)?;
            if id != header.episode.scene_id {
                return Err(ConfigError::Invalid(format!("trace is for scene {:?}, got {id:?}", header.episode.scene_id)).into());
            }
            match verify(&header, &records, &grid)? {
                Verdict::Pass { steps, final_state } => {
                    println!("PASS {steps} steps, delivered {}", final_state.goal_state.delivered.len());
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Fail { step, field } => {
                    println!("FAIL at step {step}: {field}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Report { inputs, csv } => {
            let mut reports = Vec::new();
            for p in inputs {
                let file = if p.is_dir() { p.join("report.json") } else { p.clone() };
                reports.push((p.display().to_string(), SuiteReport::load(&file)?));
            }
            print!("{}", summary_table(&reports));
            if let Some(path) = csv {
                let rows: Vec<_> = reports.iter().map(|(n, r)| sweep_row("report", n, r)).collect();
                fs::write(&path, sweep_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if reports.iter().any(|(_, r)| r.errors > 0) { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
    }
}

fn exit_for(report: &SuiteReport) -> ExitCode {
    if report.errors > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
