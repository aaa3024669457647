use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dirac_mech::commands::{self, Flow, Format, IntegrateArgs, Outcome, ReachArgs};
use dirac_mech::error::CliError;
use dirac_mech::model::Model;
use dirac_mech::{seed_from_env, verify};

#[derive(Parser)]
#[command(name = "dirac-mech", version, about = "Constraint analysis and dynamics for degenerate Lagrangians")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis report.
    Analyze { model: PathBuf },
    /// Poisson bracket, or Dirac bracket with --dirac.
    Bracket {
        model: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        dirac: bool,
        /// Configuration stratum for the Dirac data.
        #[arg(long)]
        stratum: Option<String>,
    },
    /// Constraint classes per stratum.
    Classify { model: PathBuf },
    /// First class modification f*.
    Modify {
        model: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        stratum: Option<String>,
    },
    /// RK4 trajectory to CSV.
    Integrate {
        model: PathBuf,
        /// Initial values `name=value,...`; omitted momenta are completed on the stratum.
        #[arg(long, required = true)]
        init: Vec<String>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, conflicts_with = "lagrangian")]
        hamiltonian: bool,
        #[arg(long)]
        lagrangian: bool,
        #[arg(long)]
        stratum: Option<String>,
    },
    /// Curve of `{z_dot = y x_dot}` joining two points, to CSV.
    Reach {
        model: PathBuf,
        /// `x,y,z,x_dot,y_dot,z_dot` or `name=value` pairs.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        n_seg: Option<usize>,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Known results and invariant suites.
    Verify { model: PathBuf },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let format = match cli.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Text => Format::Text,
    };
    let seed = seed_from_env()?;
    let done = |stdout: String| Outcome { stdout, error: None };
    match cli.command {
        Command::Analyze { model } => commands::analyze(&Model::load(&model)?, format, seed).map(done),
        Command::Bracket { model, f, g, dirac, stratum } => {
            commands::bracket(&Model::load(&model)?, &f, &g, dirac, stratum.as_deref(), format).map(done)
        }
        Command::Classify { model } => commands::classify(&Model::load(&model)?, format).map(done),
        Command::Modify { model, f, stratum } => commands::modify(&Model::load(&model)?, &f, stratum.as_deref(), format).map(done),
        Command::Integrate { model, init, t, dt, out, hamiltonian: _, lagrangian, stratum } => {
            let args = IntegrateArgs {
                flow: if lagrangian { Flow::Lagrangian } else { Flow::Hamiltonian },
                init: &init,
                t,
                dt,
                stratum: stratum.as_deref(),
                out: out.as_deref(),
            };
            commands::integrate(&Model::load(&model)?, &args, format)
        }
        Command::Reach { model, from, to, n_seg, samples, out } => {
            let args = ReachArgs { from: &from, to: &to, n_seg, samples, out: out.as_deref() };
            commands::reach(&Model::load(&model)?, &args, format).map(done)
        }
        Command::Verify { model } => verify::verify(&Model::load(&model)?, format, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stdout, error) = match run(cli) {
        Ok(o) => (o.stdout, o.error),
        Err(e) => (String::new(), Some(e)),
    };
    let mut out = std::io::stdout().lock();
    if out.write_all(stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(1);
    }
    match error {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {}", e.render());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
