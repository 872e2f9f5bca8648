use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use tempered_ldg::frac_calculus::{mittag_leffler, tempered_weights};
use tempered_ldg::harness::{self, exit_code, StudyConfig};
use tempered_ldg::{Error, Result, TemperedParams};

#[derive(Parser)]
#[command(
    name = "tldg",
    version,
    about = "LDG solver for time-tempered fractional diffusion"
)]
struct Cli {
    /// INI study configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write CSV output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for study rows (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config section to read (default: the subcommand name).
    #[arg(long, global = true)]
    section: Option<String>,
    /// `key=value` override applied after the config file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run; per-step norms and errors.
    Solve,
    /// Mesh refinement study with tau = h^r.
    ConvergeSpace,
    /// Time-step refinement study on a fixed mesh.
    ConvergeTime,
    /// Norm-decay sweep over alphas x lambdas x taus.
    Stability,
    /// Solution snapshots at the configured times.
    Profile,
    /// Tempered convolution weights as CSV `k,l_k,d_k`.
    Weights(WeightsArgs),
    /// Mittag-Leffler function E_beta(z).
    Ml {
        beta: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
    },
}

#[derive(Args)]
struct WeightsArgs {
    q: usize,
    alpha: f64,
    lambda: f64,
    tau: f64,
    n: usize,
}

fn section_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Solve => "solve",
        Command::ConvergeSpace => "converge-space",
        Command::ConvergeTime => "converge-time",
        Command::Stability => "stability",
        Command::Profile => "profile",
        Command::Weights(_) => "weights",
        Command::Ml { .. } => "ml",
    }
}

fn load_config(cli: &Cli) -> Result<StudyConfig> {
    let section = cli.section.as_deref().unwrap_or(section_name(&cli.command));
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            StudyConfig::from_ini(&text, section)?
        }
        None => StudyConfig::default(),
    };
    for o in &cli.set {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cli: &Cli, csv: &str, table: Option<String>) -> Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, csv)?;
            if let Some(t) = table {
                print!("{t}");
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}

/// Returns whether a stability violation was found.
fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Weights(w) => {
            let params = TemperedParams::new(w.alpha, w.lambda, 1.0)?;
            let cw = tempered_weights::<f64>(w.q, &params, w.tau, w.n)?;
            let mut s = String::from("k,l_k,d_k\n");
            for k in 0..=w.n {
                s.push_str(&format!("{k},{:.16e},{:.16e}\n", cw.l()[k], cw.d()[k]));
            }
            emit(cli, &s, None)?;
            return Ok(false);
        }
        Command::Ml { beta, z } => {
            println!("{:.16e}", mittag_leffler(*beta, *z)?);
            return Ok(false);
        }
        _ => {}
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
    }
    let cfg = load_config(cli)?;
    let stamp = timestamp();
    match cli.command {
        Command::Solve => {
            let s = harness::run_solve(&cfg, &stamp)?;
            emit(cli, &s.to_csv(), None)?;
        }
        Command::ConvergeSpace => {
            let r = harness::run_spatial_study(&cfg, &stamp)?;
            emit(cli, &r.to_csv(), Some(r.to_table()))?;
        }
        Command::ConvergeTime => {
            let r = harness::run_temporal_study(&cfg, &stamp)?;
            emit(cli, &r.to_csv(), Some(r.to_table()))?;
        }
        Command::Stability => {
            let out = harness::run_stability_sweep(&cfg, &stamp)?;
            emit(cli, &out.to_csv(), None)?;
            for r in out.violations() {
                eprintln!(
                    "stability violation: alpha={} lambda={} h={} tau={} ({}), max ||u^n||/||u^0|| = {:.16e}",
                    r.alpha, r.lambda, r.h, r.tau, r.rule, r.max_ratio
                );
            }
            return Ok(!out.all_passed());
        }
        Command::Profile => {
            let p = harness::run_profile(&cfg, &stamp)?;
            emit(cli, &p.to_csv(), None)?;
        }
        Command::Weights(_) | Command::Ml { .. } => unreachable!(),
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(violated) => exit_code(None, violated),
        Err(e) => {
            eprintln!("tldg: {e}");
            match e {
                Error::Domain(_)
                    if matches!(cli.command, Command::Weights(_) | Command::Ml { .. }) =>
                {
                    1
                }
                _ => exit_code(Some(&e), false),
            }
        }
    };
    ExitCode::from(code as u8)
}
