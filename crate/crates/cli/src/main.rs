use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use affine_energy::report::{parse_fraction, run, Command, Format, Input, RunConfig, SweepRange};
use affine_energy::scalar::FieldSpec;
use affine_energy::Error;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "affen", version, about = "Exact energies and incidences of finite sets of affine maps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Generator string such as grid:5 or randaff:100:seed=7
    #[arg(long = "gen", global = true, conflicts_with = "input")]
    generator: Option<String>,

    /// Read the input set from a file instead
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Q or Fp:<prime>
    #[arg(long, global = true, env = "AFFEN_FIELD", default_value = "Q")]
    field: String,

    #[arg(long, global = true, default_value = "csv")]
    format: String,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Size range for sweep, e.g. N=3..10
    #[arg(long, global = true)]
    range: Option<String>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest set the brute-force oracles accept
    #[arg(long, global = true)]
    cap: Option<usize>,

    /// Rich-line threshold in (0, 1]
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// Lines with fewer points than this are poor in the plane classification
    #[arg(long, global = true)]
    cthresh: Option<usize>,

    /// Fraction of |P| a point's line count must reach to be rich
    #[arg(long, global = true)]
    theta: Option<String>,

    /// Seed for random generators that do not name one
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// First shadow line a:b:c (default x = 0)
    #[arg(long, global = true)]
    l1: Option<String>,

    /// Second shadow line a:b:c (default the line at infinity)
    #[arg(long, global = true)]
    l2: Option<String>,

    /// Restrict incidence output to one slice value
    #[arg(long, global = true)]
    slice: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Energies, slice decomposition and bound ratios of a set of maps
    Energy,
    /// Slice sizes and slice energies for every realized value
    Decompose,
    /// Point-plane incidence reduction per slice
    Incidence,
    /// Shadows of a planar point set and the shadow incidence inequality
    Shadow,
    /// Quadrangles and their correspondence with energy quadruples
    Quadrangles,
    /// Rich lines of a grid with their parallel and concurrent structure
    Richlines,
    /// Bound ratios of one set
    Boundcheck,
    /// Bound ratios over a size range
    Sweep,
    /// Compare every fast counter with its brute-force twin
    Oracle,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Energy => Command::Energy,
            Cmd::Decompose => Command::Decompose,
            Cmd::Incidence => Command::Incidence,
            Cmd::Shadow => Command::Shadow,
            Cmd::Quadrangles => Command::Quadrangles,
            Cmd::Richlines => Command::Richlines,
            Cmd::Boundcheck => Command::Boundcheck,
            Cmd::Sweep => Command::Sweep,
            Cmd::Oracle => Command::Oracle,
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig, Error> {
    let field: FieldSpec = cli.field.parse()?;
    let input = match (&cli.generator, &cli.input) {
        (Some(g), None) => Input::Gen(g.clone()),
        (None, Some(p)) => Input::File(p.clone()),
        _ => return Err(Error::Config("give exactly one of --gen or --input".into())),
    };
    let mut cfg = RunConfig::new(field, input);
    cfg.format = cli.format.parse::<Format>()?;
    cfg.output = cli.output.clone();
    cfg.range = cli.range.as_deref().map(str::parse::<SweepRange>).transpose()?;
    cfg.threads = cli.threads;
    cfg.seed = cli.seed;
    cfg.slice = cli.slice.clone();
    if let Some(cap) = cli.cap {
        cfg.cap = cap;
    }
    if let Some(a) = &cli.alpha {
        cfg.alpha = parse_fraction(a)?;
    }
    if let Some(c) = cli.cthresh {
        cfg.cthresh = c;
    }
    if let Some(t) = &cli.theta {
        cfg.theta = parse_fraction(t)?;
    }
    if let Some(l) = &cli.l1 {
        cfg.l1 = l.clone();
    }
    if let Some(l) = &cli.l2 {
        cfg.l2 = l.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = config(&cli).and_then(|cfg| {
        let out = run(cli.command.into(), &cfg)?;
        if cfg.output.is_none() {
            std::io::stdout().write_all(out.report.as_bytes())?;
        }
        Ok(out)
    });
    match outcome {
        Ok(out) => match out.failure {
            None => ExitCode::SUCCESS,
            Some(e) => {
                eprintln!("affen: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Err(e) => {
            eprintln!("affen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
