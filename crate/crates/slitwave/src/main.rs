use clap::{Args, Parser, Subcommand};
use slitwave::cli::{
    self, compare, pattern_to_csv, pattern_to_svg, read_data_csv, resolve_input,
    resolve_threads, run_scan, run_verify, DataUnit, FileConfig, RunConfig,
};
use slitwave::intensity::{ScanGrid, ScanInput};
use slitwave::slit_modes::Truncation;
use slitwave::Result;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "slitwave",
    about = "Matter-wave double-slit diffraction simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Experiment preset name (ref18 or ref19)
    #[arg(long)]
    preset: Option<String>,

    /// Config file with a full parameter block (flags override file values)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Scan range in meters: LO HI
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    range: Option<Vec<f64>>,

    /// Number of scan points
    #[arg(long)]
    points: Option<usize>,

    /// Intensity formula: coherent | decohered
    #[arg(long)]
    mode: Option<String>,

    /// Normalization: none | peak
    #[arg(long)]
    normalize: Option<String>,

    /// Transverse mode count at the first adaptive step
    #[arg(long)]
    m_max: Option<usize>,

    /// Axial mode count
    #[arg(long)]
    n_max: Option<usize>,

    /// Relative tolerance for the adaptive truncation doubling
    #[arg(long)]
    tail_tol: Option<f64>,

    /// Worker threads (fallback: SLITWAVE_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a diffraction pattern and write it as CSV (and optionally SVG)
    Scan {
        #[command(flatten)]
        engine: EngineArgs,

        /// Output CSV path
        #[arg(long)]
        out: PathBuf,

        /// Optional SVG plot path
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Cross-check closed-form amplitudes against direct numerical propagation
    Verify {
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Compare a computed pattern against digitized experimental data
    Compare {
        #[command(flatten)]
        engine: EngineArgs,

        /// Experimental data CSV (position, counts)
        #[arg(long)]
        data: PathBuf,

        /// Unit of the data position column: um | mm | m
        #[arg(long, default_value = "um")]
        data_unit: String,

        /// Optional SVG plot with the data overlaid
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// List or show the shipped experiment presets
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

fn build_config(engine: &EngineArgs) -> Result<RunConfig> {
    let mut file_cfg = match &engine.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(preset) = &engine.preset {
        file_cfg.preset = Some(preset.clone());
    }
    let input: ScanInput = resolve_input(&file_cfg)?;

    let (s_min, s_max) = match &engine.range {
        Some(r) => (r[0], r[1]),
        None => match (file_cfg.s_min_m, file_cfg.s_max_m) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => (-150e-6, 150e-6),
        },
    };
    let points = engine.points.or(file_cfg.points).unwrap_or(1501);
    let grid = ScanGrid::new(s_min, s_max, points)?;

    let mode_str = engine
        .mode
        .clone()
        .or(file_cfg.mode.clone())
        .unwrap_or_else(|| "decohered".into());
    let norm_str = engine
        .normalize
        .clone()
        .or(file_cfg.normalize.clone())
        .unwrap_or_else(|| "peak".into());

    let defaults = Truncation::default();
    let truncation = Truncation::new(
        engine.m_max.or(file_cfg.m_max).unwrap_or(defaults.m_max),
        engine.n_max.or(file_cfg.n_max).unwrap_or(defaults.n_max),
        engine
            .tail_tol
            .or(file_cfg.tail_tol)
            .unwrap_or(defaults.tail_tol),
    )?;

    Ok(RunConfig {
        input,
        grid,
        mode: cli::parse_mode(&mode_str)?,
        normalization: cli::parse_normalization(&norm_str)?,
        truncation,
    })
}

fn run(cli_args: Cli) -> Result<bool> {
    match cli_args.command {
        Command::Scan { engine, out, svg } => {
            let config = build_config(&engine)?;
            let threads = resolve_threads(engine.threads);
            let (pattern, summary) = run_scan(&config, threads)?;
            std::fs::write(&out, pattern_to_csv(&pattern))?;
            print!("{summary}");
            println!("wrote {}", out.display());
            if let Some(svg_path) = svg {
                std::fs::write(&svg_path, pattern_to_svg(&pattern, None))?;
                println!("wrote {}", svg_path.display());
            }
            Ok(true)
        }
        Command::Verify { engine } => {
            let config = build_config(&engine)?;
            let points = engine.points.unwrap_or(8);
            let threads = resolve_threads(engine.threads);
            let (report, ok) = run_verify(&config.input, points, 1e-6, threads)?;
            print!("{report}");
            println!("verify: {}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
        Command::Compare {
            engine,
            data,
            data_unit,
            svg,
        } => {
            let config = build_config(&engine)?;
            let threads = resolve_threads(engine.threads);
            let unit = DataUnit::parse(&data_unit)?;
            let points = read_data_csv(&data, unit)?;
            let (pattern, summary) = run_scan(&config, threads)?;
            let report = compare(&pattern, &points)?;
            print!("{summary}");
            print!("{}", cli::format_report(&report));
            if let Some(svg_path) = svg {
                std::fs::write(&svg_path, pattern_to_svg(&pattern, Some(&points)))?;
                println!("wrote {}", svg_path.display());
            }
            Ok(true)
        }
        Command::Preset { action } => {
            match action {
                PresetAction::List => println!("{}", cli::preset_list()),
                PresetAction::Show { name } => print!("{}", cli::preset_show(&name)?),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli_args = Cli::parse();
    match run(cli_args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
