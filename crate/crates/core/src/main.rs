use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kinegrf::config::{PipelineConfig, OUTPUT_DIR_ENV};
use kinegrf::pipeline::{self, trial_stem, SynthOptions};
use kinegrf::synth::WalkerParams;
use kinegrf::{Error, Result};

/// Centre of mass, gait events and ground reaction forces from marker data.
#[derive(Parser)]
#[command(name = "kinegrf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whole-body (and optionally segment) CoM trajectory.
    Com(RunArgs),
    /// Heel-strike/toe-off events and foot-height stance intervals.
    Events(RunArgs),
    /// Total and per-limb GRF, events, butterfly diagram, plate comparison.
    Grf(RunArgs),
    /// Kinematic total GRF against force-plate data.
    Validate(RunArgs),
    /// Butterfly diagram only.
    Butterfly(RunArgs),
    /// Write a synthetic walking trial with matching force plates.
    Synth(SynthArgs),
}

/// Every option mirrors the config key of the same name (dashes for
/// underscores) and takes precedence over the config file.
#[derive(Args)]
struct RunArgs {
    /// Marker files; each is processed as a separate trial.
    trials: Vec<PathBuf>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    force_file: Option<String>,
    #[arg(long)]
    table_file: Option<String>,
    #[arg(long)]
    segments_file: Option<String>,
    #[arg(long)]
    mass_kg: Option<String>,
    #[arg(long)]
    height_m: Option<String>,
    #[arg(long)]
    sex: Option<String>,
    #[arg(long)]
    units: Option<String>,
    #[arg(long)]
    cutoff_hz: Option<String>,
    #[arg(long)]
    filter_order: Option<String>,
    #[arg(long)]
    stance_threshold_m: Option<String>,
    #[arg(long)]
    min_period_s: Option<String>,
    #[arg(long)]
    gravity: Option<String>,
    #[arg(long)]
    max_gap_frames: Option<String>,
    #[arg(long)]
    noise_floor_n: Option<String>,
    #[arg(long)]
    butterfly_scale: Option<String>,
    #[arg(long)]
    compensate_bias: Option<String>,
    #[arg(long)]
    segment_coms: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    sacrum_marker: Option<String>,
    #[arg(long)]
    left_heel_marker: Option<String>,
    #[arg(long)]
    right_heel_marker: Option<String>,
    #[arg(long)]
    left_toe_marker: Option<String>,
    #[arg(long)]
    right_toe_marker: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs = [
            ("force_file", &self.force_file),
            ("table_file", &self.table_file),
            ("segments_file", &self.segments_file),
            ("mass_kg", &self.mass_kg),
            ("height_m", &self.height_m),
            ("sex", &self.sex),
            ("units", &self.units),
            ("cutoff_hz", &self.cutoff_hz),
            ("filter_order", &self.filter_order),
            ("stance_threshold_m", &self.stance_threshold_m),
            ("min_period_s", &self.min_period_s),
            ("gravity", &self.gravity),
            ("max_gap_frames", &self.max_gap_frames),
            ("noise_floor_n", &self.noise_floor_n),
            ("butterfly_scale", &self.butterfly_scale),
            ("compensate_bias", &self.compensate_bias),
            ("segment_coms", &self.segment_coms),
            ("output_dir", &self.output_dir),
            ("sacrum_marker", &self.sacrum_marker),
            ("left_heel_marker", &self.left_heel_marker),
            ("right_heel_marker", &self.right_heel_marker),
            ("left_toe_marker", &self.left_toe_marker),
            ("right_toe_marker", &self.right_toe_marker),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then config file, then environment, then flags.
    fn configs(&self) -> Result<Vec<PipelineConfig>> {
        let mut base = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let dir = path.parent().unwrap_or(Path::new("."));
            base.apply_text(&text, Some(dir)).map_err(|e| Error::InFile {
                path: path.clone(),
                source: Box::new(e),
            })?;
        }
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            base.output_dir = PathBuf::from(dir);
        }
        for (key, value) in self.overrides() {
            base.set(key, value, None)?;
        }
        base.validate()?;
        let trials: Vec<PathBuf> = if self.trials.is_empty() {
            base.marker_file.clone().into_iter().collect()
        } else {
            self.trials.clone()
        };
        if trials.is_empty() {
            return Err(Error::Config("no marker file given".into()));
        }
        if trials.len() > 1 && base.force_file.is_some() {
            return Err(Error::Config(
                "force_file applies to a single trial; run trials separately".into(),
            ));
        }
        Ok(trials
            .into_iter()
            .map(|t| PipelineConfig {
                marker_file: Some(t),
                ..base.clone()
            })
            .collect())
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for the generated files.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// File name stem.
    #[arg(long, default_value = "walker")]
    stem: String,
    #[arg(long, default_value_t = 5.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 200.0)]
    marker_rate_hz: f64,
    #[arg(long, default_value_t = 2000.0)]
    force_rate_hz: f64,
    /// Decimal places of marker coordinates (mm).
    #[arg(long, default_value_t = 3)]
    decimals: usize,
}

type Runner = fn(&PipelineConfig, &dyn Fn(&str)) -> Result<Vec<PathBuf>>;

fn run_trials(args: &RunArgs, runner: Runner) -> i32 {
    let configs = match args.configs() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let results: Vec<(String, Result<Vec<PathBuf>>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|config| {
                let stem = config.marker_file.as_deref().map(trial_stem).unwrap_or_default();
                scope.spawn(move || {
                    let log = |msg: &str| eprintln!("[{stem}] {msg}");
                    let result = runner(config, &log);
                    (stem.clone(), result)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial thread panicked"))
            .collect()
    });
    let mut code = 0;
    for (stem, result) in results {
        match result {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(e) => {
                eprintln!("[{stem}] error: {e}");
                if code == 0 {
                    code = e.exit_code();
                }
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Com(a) => run_trials(a, pipeline::run_com),
        Command::Events(a) => run_trials(a, pipeline::run_events),
        Command::Grf(a) => run_trials(a, pipeline::run_grf),
        Command::Validate(a) => run_trials(a, pipeline::run_validate),
        Command::Butterfly(a) => run_trials(a, pipeline::run_butterfly),
        Command::Synth(a) => {
            let opts = SynthOptions {
                params: WalkerParams {
                    duration_s: a.duration_s,
                    sample_rate_hz: a.marker_rate_hz,
                    ..WalkerParams::default()
                },
                output_dir: a.output_dir.clone(),
                stem: a.stem.clone(),
                force_rate_hz: a.force_rate_hz,
                decimals: a.decimals,
            };
            let log = |msg: &str| eprintln!("[{}] {msg}", a.stem);
            match pipeline::run_synth(&opts, &log) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
