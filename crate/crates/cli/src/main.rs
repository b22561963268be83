use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beta_lab::commands::{self, CmdError, Run};
use beta_lab::config::{self, ConfigError, Defaults, Format, RunConfig, Settings};

/// Numerical laboratory for beta-symplectic critical surfaces in C^2.
#[derive(Parser)]
#[command(name = "beta-lab", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve rotational profiles and write a CSV table, an SVG plot or a JSON summary.
    Solve(Common),
    /// Solve a beta family; writes one CSV per beta, family.svg and continuity.json into --out.
    Sweep(Common),
    /// Run the profile, asymptotic, PDE and limit checks; exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Scale f' by this factor after solving (negative control).
        #[arg(long, hide = true)]
        corrupt_fp: Option<f64>,
    },
    /// Compare first and second variation routes on seeded bump fields.
    Variation(Common),
    /// Sample the principal symbol on seeded tangent planes and directions.
    Symbol(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Exponent or comma-separated list of exponents.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    /// Anchor radius of the profile.
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r_max: Option<f64>,
    /// Number of radial grid nodes.
    #[arg(long, allow_negative_numbers = true)]
    nodes: Option<usize>,
    /// Number of random samples (symbol pairs, variation fields).
    #[arg(long, allow_negative_numbers = true)]
    samples: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    f0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    g0: Option<f64>,
    /// Output file, or output directory for `sweep`. Defaults to stdout.
    #[arg(long, allow_negative_numbers = true)]
    out: Option<PathBuf>,
    /// csv, svg or json.
    #[arg(long, allow_negative_numbers = true)]
    format: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<u64>,
    /// Configuration file with key=value lines.
    #[arg(long, allow_negative_numbers = true)]
    config: Option<PathBuf>,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings, ConfigError> {
        let mut s = Settings {
            c1: self.c1,
            c2: self.c2,
            eps: self.eps,
            r_max: self.r_max,
            n: self.nodes,
            samples: self.samples,
            f0: self.f0,
            g0: self.g0,
            out: self.out.clone(),
            seed: self.seed,
            ..Settings::default()
        };
        if let Some(b) = &self.beta {
            s.beta = Some(config::parse_beta_list(b)?);
        }
        if let Some(f) = &self.format {
            s.format = Some(f.parse()?);
        }
        for t in &self.tol {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| ConfigError::BadValue { key: "tol".into(), value: t.clone() })?;
            s.set(&format!("tol.{}", k.trim()), v)?;
        }
        Ok(s)
    }

    fn resolve(&self, defaults: Defaults) -> Result<RunConfig, ConfigError> {
        let file = self.config.as_deref().map(Settings::from_file).transpose()?;
        let env = std::env::var(config::SEED_ENV).ok();
        let seed = config::env_seed(env.as_deref())?;
        RunConfig::resolve(config::layer(self.settings()?, seed, file), defaults)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ConfigError> {
    fs::write(path, contents).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))
}

fn emit(run: &Run, cfg: &RunConfig, directory: bool) -> Result<(), ConfigError> {
    if directory {
        let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| ConfigError::Io(format!("{}: {e}", dir.display())))?;
        for a in &run.artifacts {
            write_file(&dir.join(&a.name), &a.contents)?;
        }
    } else {
        for a in &run.artifacts {
            match &cfg.out {
                Some(path) => write_file(path, &a.contents)?,
                None => {
                    let mut out = io::stdout().lock();
                    match out.write_all(a.contents.as_bytes()).and_then(|_| out.flush()) {
                        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                            return Err(ConfigError::Io(format!("stdout: {e}")));
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<Run, CmdError> {
    let (run, cfg, directory) = match cli.command {
        Command::Solve(c) => {
            let cfg = c.resolve(commands::solve_defaults())?;
            (commands::cmd_solve(&cfg)?, cfg, false)
        }
        Command::Sweep(c) => {
            let cfg = c.resolve(commands::sweep_defaults())?;
            if cfg.format != Format::Csv {
                return Err(ConfigError::Invalid("sweep always writes csv, svg and json; drop --format".into()).into());
            }
            (commands::cmd_sweep(&cfg)?, cfg, true)
        }
        Command::Verify { common, corrupt_fp } => {
            let cfg = common.resolve(commands::verify_defaults())?;
            (commands::cmd_verify(&cfg, corrupt_fp)?, cfg, false)
        }
        Command::Variation(c) => {
            let cfg = c.resolve(commands::variation_defaults())?;
            (commands::cmd_variation(&cfg)?, cfg, false)
        }
        Command::Symbol(c) => {
            let cfg = c.resolve(commands::symbol_defaults())?;
            (commands::cmd_symbol(&cfg)?, cfg, false)
        }
    };
    emit(&run, &cfg, directory)?;
    Ok(run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(run) if run.passed => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("error: CheckFailed: at least one check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
