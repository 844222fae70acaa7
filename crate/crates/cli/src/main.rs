use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recon_cli::commands::{self, parse_f64_list, parse_usize_list, DualPictureArgs, Outcome};
use recon_cli::config::{Format, RunConfig};
use recon_cli::{examples, io, CliError};

#[derive(Parser)]
#[command(name = "recon", version, about = "Reconstruction systems: duals, erasures, spectral pictures, optimal potentials")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: text, json or csv.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for the LR tuple cache (overrides RS_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Tolerance override NAME=VALUE (spectrum, dual, projective).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamArgs {
    /// Number of blocks (checked against -k).
    #[arg(short)]
    m: Option<usize>,
    /// Block ranks, comma separated.
    #[arg(short)]
    k: String,
    /// Ambient dimension.
    #[arg(short)]
    d: usize,
    /// Weights, comma separated (default all ones).
    #[arg(short)]
    v: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, bounds, projectivity and irreducibility of a system file.
    Analyze { path: PathBuf },
    /// Erasure of the blocks in J, or every proper subset with --scan.
    Erase {
        path: PathBuf,
        /// 1-based block indices, comma separated.
        #[arg(long = "J", conflicts_with = "scan", required_unless_present = "scan")]
        j: Option<String>,
        #[arg(long)]
        scan: bool,
    },
    /// Interlacing bounds of dual spectra; membership and construction for --mu.
    DualPicture {
        path: PathBuf,
        #[arg(long)]
        mu: Option<String>,
        /// Build a dual with spectrum mu.
        #[arg(long, requires = "mu")]
        construct: bool,
        /// Number of convexity probe trials.
        #[arg(long)]
        probe: Option<usize>,
    },
    /// Horn–Klyachko membership of --mu among projective frame operator spectra.
    OpPicture {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        probe: Option<usize>,
    },
    /// The optimal spectrum and the minimal joint potential.
    Lambda {
        #[command(flatten)]
        params: ParamArgs,
        /// Also build a minimizer and decompose it.
        #[arg(long)]
        construct: bool,
        /// Refuse the descent fallback (default).
        #[arg(long, conflicts_with = "no_certified")]
        certified: bool,
        /// Allow the descent fallback when the inequality system is capped.
        #[arg(long)]
        no_certified: bool,
    },
    /// Majorization of sampled spectra by the optimal spectrum.
    Conjecture {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Write a random projective system file.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        /// Output path (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the example scenarios.
    Examples {
        #[arg(long)]
        only: Option<String>,
    },
}

fn params_of(p: &ParamArgs) -> Result<(recon_core::Parameters, recon_core::Weights), CliError> {
    let k = parse_usize_list(&p.k, "-k")?;
    let v = p.v.as_deref().map(|s| parse_f64_list(s, "-v")).transpose()?;
    commands::parameters(p.m, &k, p.d, v.as_deref())
}

fn config_of(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), std::env::var("RS_CACHE_DIR").ok())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.json {
        cfg.format = Format::Json;
    }
    if let Some(d) = &cli.cache_dir {
        cfg.cache_dir = Some(d.clone());
    }
    for t in &cli.tol {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--tol expects NAME=VALUE, got `{t}`")))?;
        cfg.set(&format!("tol.{}", k.trim()), v.trim())?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut cfg = config_of(cli)?;
    match &cli.command {
        Command::Analyze { path } => commands::analyze(&io::read_system(path)?, &cfg),
        Command::Erase { path, j, scan } => {
            let loaded = io::read_system(path)?;
            if *scan {
                commands::erase_scan(&loaded, &cfg)
            } else {
                let j = parse_usize_list(j.as_deref().unwrap_or_default(), "--J")?;
                commands::erase_one(&loaded, &j, &cfg)
            }
        }
        Command::DualPicture { path, mu, construct, probe } => {
            let loaded = io::read_system(path)?;
            let args = DualPictureArgs {
                mu: mu.as_deref().map(|s| parse_f64_list(s, "--mu")).transpose()?,
                construct: *construct,
                probe: *probe,
            };
            commands::dual_picture_cmd(&loaded, &args, &cfg)
        }
        Command::OpPicture { params, mu, probe } => {
            let (p, w) = params_of(params)?;
            let mu = mu.as_deref().map(|s| parse_f64_list(s, "--mu")).transpose()?;
            commands::op_picture_cmd(&p, &w, mu.as_deref(), *probe, &cfg)
        }
        Command::Lambda { params, construct, certified, no_certified } => {
            let (p, w) = params_of(params)?;
            if *no_certified {
                cfg.certified = false;
            } else if *certified {
                cfg.certified = true;
            }
            commands::lambda_cmd(&p, &w, *construct, &cfg)
        }
        Command::Conjecture { params, samples } => {
            let (p, w) = params_of(params)?;
            commands::conjecture_cmd(&p, &w, *samples, &cfg)
        }
        Command::Sample { params, output } => {
            let (p, w) = params_of(params)?;
            let sys = commands::sample_system(&p, &w, &cfg)?;
            let text = io::format_system(&sys, Some(&w));
            if let Some(path) = output {
                io::write_system(path, &sys, Some(&w))?;
            }
            Ok(Outcome {
                json: io::system_value(&sys, Some(&w)),
                text: if output.is_some() { String::new() } else { text },
                csv: None,
                ok: true,
            })
        }
        Command::Examples { only } => {
            let results = examples::run(&cfg, only.as_deref())?;
            let ok = results.iter().all(|r| r.pass);
            Ok(Outcome {
                json: serde_json::json!({
                    "config": cfg,
                    "scenarios": results,
                    "pass": ok,
                }),
                text: examples::render(&results),
                csv: None,
                ok,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = config_of(&cli).map(|c| c.format).unwrap_or(Format::Text);
    match run(&cli) {
        Ok(out) => {
            let body = match format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&out.json).expect("json output")),
                Format::Csv => out.csv.clone().unwrap_or_else(|| {
                    eprintln!("recon: this command has no CSV rendering; printing text");
                    out.text.clone()
                }),
                Format::Text => out.text.clone(),
            };
            // a closed pipe downstream is not an error
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("recon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
