//! Subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{MethodName, RunConfig, SweepBlock};
use crate::error::CliError;
use crate::pipeline::{run_one, Manifest, Setup, MANIFEST_FILE, METRICS_FILE};
use crate::report::{compare, RunRecord};
use crate::validate::validate;

#[derive(Debug, Parser)]
#[command(name = "cylris", version, about = "Beam synthesis for cylindrical reconfigurable surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One method at one steering angle.
    Synth(SynthArgs),
    /// Every listed method at every listed angle, plus a comparison table.
    Sweep(SweepArgs),
    /// Special-function, boundary-condition and covariance checks.
    Validate(ValidateArgs),
    /// Merge finished runs into one comparison table.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// manifest.json of an earlier run.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// GA seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Far-field grid size.
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub method: Option<String>,
    /// Steering angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_o: Option<f64>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated steering angles in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi_o: Option<Vec<f64>>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Run directories; sweep directories are searched recursively.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_source(src: &Source) -> Result<RunConfig, CliError> {
    match (&src.config, &src.manifest) {
        (Some(p), _) => RunConfig::load(p),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(p.clone(), e))?;
            let m: Manifest =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            m.config.validate()?;
            Ok(m.config)
        }
        (None, None) => Err(CliError::Config("either --config or --manifest is required".into())),
    }
}

fn apply(cfg: &mut RunConfig, o: &Overrides) {
    if let Some(d) = &o.out {
        cfg.output.directory = d.clone();
    }
    if let Some(s) = o.seed {
        cfg.method.ga.seed = s;
    }
    if let Some(t) = o.threads {
        cfg.output.threads = t;
    }
    if let Some(g) = o.grid_points {
        cfg.output.grid_points = g;
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| CliError::Io(p, e))
}

fn create(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))
}

/// Config of the single run `method` at `phi_o_deg`; this is what its
/// manifest records.
fn single(cfg: &RunConfig, method: MethodName, phi_o_deg: f64) -> RunConfig {
    let mut c = cfg.clone();
    c.method.name = method;
    c.steering.phi_o_deg = vec![phi_o_deg];
    c.sweep = None;
    c
}

fn write_run(dir: &Path, cfg: &RunConfig, files: &std::collections::BTreeMap<&str, String>) -> Result<(), CliError> {
    create(dir)?;
    for (name, text) in files {
        write(dir, name, text)?;
    }
    write(dir, MANIFEST_FILE, &Manifest::new("synth", cfg).render())
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn synth(args: &SynthArgs) -> Result<PathBuf, CliError> {
    let mut cfg = load_source(&args.source)?;
    apply(&mut cfg, &args.overrides);
    if let Some(m) = &args.method {
        cfg.method.name = MethodName::parse(m)?;
    }
    let phi = match (args.phi_o, cfg.steering.phi_o_deg.as_slice()) {
        (Some(p), _) => p,
        (None, [p]) => *p,
        (None, _) => {
            return Err(CliError::Config(
                "synth runs one steering angle; pass --phi-o or list one angle".into(),
            ))
        }
    };
    let cfg = single(&cfg, cfg.method.name, phi);
    cfg.validate()?;
    let setup = Setup::new(&cfg)?;
    let out = with_threads(cfg.output.threads, || run_one(&cfg, &setup, cfg.method.name, phi))??;
    write_run(&cfg.output.directory, &cfg, &out.files)?;
    Ok(cfg.output.directory.clone())
}

/// Subdirectory of one sweep run.
pub fn run_dir_name(method: MethodName, phi_o_deg: f64) -> PathBuf {
    PathBuf::from(method.as_str()).join(format!("phi_{phi_o_deg}"))
}

pub fn sweep(args: &SweepArgs) -> Result<PathBuf, CliError> {
    let mut cfg = load_source(&args.source)?;
    apply(&mut cfg, &args.overrides);
    if let Some(ms) = &args.methods {
        let methods = ms.iter().map(|m| MethodName::parse(m)).collect::<Result<Vec<_>, _>>()?;
        cfg.sweep = Some(SweepBlock { methods });
    }
    if let Some(p) = &args.phi_o {
        cfg.steering.phi_o_deg = p.clone();
    }
    let methods = cfg.sweep_methods();
    cfg.sweep = Some(SweepBlock {
        methods: methods.clone(),
    });
    cfg.validate()?;
    let setup = Setup::new(&cfg)?;
    let root = cfg.output.directory.clone();
    create(&root)?;
    let mut records = Vec::new();
    with_threads(cfg.output.threads, || -> Result<(), CliError> {
        for &m in &methods {
            for &phi in &cfg.steering.phi_o_deg {
                let one = single(&cfg, m, phi);
                let out = run_one(&one, &setup, m, phi)?;
                log::info!("{} at {phi} deg done", m.as_str());
                write_run(&root.join(run_dir_name(m, phi)), &one, &out.files)?;
                records.push(RunRecord::from_output(&one, &out));
            }
        }
        Ok(())
    })??;
    let report = compare(&records)?;
    write(&root, "compare.csv", &report.to_csv()?)?;
    write(&root, "compare.json", &report.to_json())?;
    write(&root, MANIFEST_FILE, &Manifest::new("sweep", &cfg).render())?;
    print!("{}", report.to_text());
    Ok(root)
}

pub fn run_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let mut cfg = load_source(&args.source)?;
    apply(&mut cfg, &args.overrides);
    cfg.validate()?;
    let setup = Setup::new(&cfg)?;
    let report = with_threads(cfg.output.threads, || validate(&cfg, &setup))??;
    print!("{}", report.to_text());
    if let Some(dir) = &args.overrides.out {
        create(dir)?;
        write(dir, "validate.json", &report.to_json())?;
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("validation failed: {}", failed.join(", "))))
    }
}

fn collect_runs(dir: &Path, found: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if dir.join(METRICS_FILE).is_file() {
        found.push(dir.to_path_buf());
        return Ok(());
    }
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(dir.to_path_buf(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect::<Vec<_>>();
    entries.sort();
    for e in entries {
        collect_runs(&e, found)?;
    }
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    let mut dirs = Vec::new();
    for d in &args.dirs {
        collect_runs(d, &mut dirs)?;
    }
    let records = dirs.iter().map(|d| RunRecord::load(d)).collect::<Result<Vec<_>, _>>()?;
    let report = compare(&records)?;
    if let Some(out) = &args.out {
        create(out)?;
        write(out, "compare.csv", &report.to_csv()?)?;
        write(out, "compare.json", &report.to_json())?;
    }
    print!("{}", report.to_text());
    Ok(())
}

/// Dispatch; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let r = match &cli.command {
        Command::Synth(a) => synth(a).map(|_| 0),
        Command::Sweep(a) => sweep(a).map(|_| 0),
        Command::Validate(a) => run_validate(a).map(|_| 0),
        Command::Compare(a) => run_compare(a).map(|_| 0),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

/// Parse `args` (program name first) and dispatch.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            crate::error::EXIT_CONFIG
        }
    }
}
