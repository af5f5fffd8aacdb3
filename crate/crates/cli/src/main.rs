use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use jacring::certify::{generate_certified, sweep_pool};
use jacring::io::instance_to_json;
use jacring::{load_instance, FieldSpec, Instance};
use jacring_cli::{write_csv_summary, write_ndjson, CheckReport, RunOptions, Session, Summary};

#[derive(Parser)]
#[command(name = "jacring", version, about = "Checks on Jacobian rings of open complete intersections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance file (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Primes in the first modular round.
    #[arg(long, default_value_t = 2)]
    primes: usize,
    /// Largest matrix, in cells, a check may build.
    #[arg(long)]
    budget_cells: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Degrees of the F_i, comma separated.
        #[arg(long, value_delimiter = ',')]
        d: Vec<u32>,
        /// Degrees of the G_j, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "")]
        e: Vec<String>,
        /// `Q` or `Fp:<prime>`.
        #[arg(long, default_value = "Q")]
        field: String,
        /// Retry until the draw is certified transversal.
        #[arg(long)]
        certify: bool,
        #[arg(long, default_value_t = 20)]
        attempts: usize,
    },
    /// Dimensions of A_q(l) and B_q(l).
    Dims {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        l: Option<i64>,
        #[arg(long)]
        sweep: bool,
    },
    /// Jacobian ring pieces against Hodge number oracles.
    Hodge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        l: i64,
    },
    /// Multiplication pairing ranks.
    Duality {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sweep: bool,
    },
    /// Koszul complex exactness and multiplication kernels.
    Koszul {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        codim: usize,
        #[arg(long)]
        sweep: bool,
    },
    /// Residue matrix of logarithmic forms.
    Residue {
        #[command(flatten)]
        common: Common,
    },
    /// Transversality certificate.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// All checks, on one instance or on a generated grid.
    Suite {
        #[command(flatten)]
        common: Common,
        /// Run on this many generated certified instances instead.
        #[arg(long)]
        gen_grid: Option<usize>,
        /// Koszul sweeps use every codimension up to this one.
        #[arg(long, default_value_t = 2)]
        codim: usize,
        #[arg(long)]
        degree_cap: Option<usize>,
        /// CSV summary path; defaults to the output path with `.csv` appended.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_field(s: &str) -> Result<FieldSpec> {
    let field = match s {
        "Q" | "q" => FieldSpec::Rationals,
        _ => {
            let p = s
                .strip_prefix("Fp:")
                .or_else(|| s.strip_prefix("fp:"))
                .ok_or_else(|| anyhow!("field must be Q or Fp:<prime>, got {s:?}"))?;
            FieldSpec::PrimeField(p.parse().with_context(|| format!("bad prime {p:?}"))?)
        }
    };
    field.validate()?;
    Ok(field)
}

fn options(common: &Common) -> RunOptions {
    let mut opts = RunOptions {
        seed: common.seed,
        primes: common.primes,
        ..RunOptions::default()
    };
    if let Some(b) = common.budget_cells {
        opts.budget = b;
    }
    opts
}

fn load(common: &Common) -> Result<Instance> {
    let path = common
        .instance
        .as_ref()
        .ok_or_else(|| anyhow!("--instance PATH is required"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_instance(&text).with_context(|| format!("loading {}", path.display()))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// Write the reports and the summary; true iff some report failed.
fn finish(common: &Common, reports: &[CheckReport]) -> Result<bool> {
    let mut buf = Vec::new();
    write_ndjson(&mut buf, reports)?;
    emit(&common.out, &buf)?;
    let summary = Summary::of(reports);
    eprintln!("{}", serde_json::to_string(&serde_json::json!({ "summary": summary, "reports": summary.total() }))?);
    Ok(summary.fail > 0)
}

fn run_checks(common: &Common, opts: RunOptions, f: impl Fn(&Session) -> Vec<CheckReport>) -> Result<bool> {
    let session = Session::new(load(common)?, opts)?;
    finish(common, &f(&session))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            common,
            n,
            d,
            e,
            field,
            certify,
            attempts,
        } => {
            let field = parse_field(&field)?;
            let e: Vec<u32> = e
                .iter()
                .filter(|x| !x.is_empty())
                .map(|x| x.parse().with_context(|| format!("bad degree {x:?}")))
                .collect::<Result<_>>()?;
            let budget = options(&common).budget;
            let inst = if certify {
                generate_certified(n, &d, &e, field, common.seed, attempts, budget)?.instance
            } else {
                let inst = Instance::random(n, &d, &e, field, common.seed)?;
                inst.require_geometric()?;
                inst
            };
            emit(&common.out, instance_to_json(&inst).as_bytes())?;
            Ok(false)
        }
        Command::Dims { common, q, l, sweep } => {
            let opts = RunOptions { sweep, ..options(&common) };
            run_checks(&common, opts, |s| s.dims(q, l))
        }
        Command::Hodge { common, l } => run_checks(&common, options(&common), |s| s.hodge(l)),
        Command::Duality { common, sweep } => {
            let opts = RunOptions { sweep, ..options(&common) };
            run_checks(&common, opts, Session::duality)
        }
        Command::Koszul { common, codim, sweep } => {
            let opts = RunOptions {
                sweep,
                codim,
                ..options(&common)
            };
            run_checks(&common, opts, Session::koszul)
        }
        Command::Residue { common } => run_checks(&common, options(&common), Session::residue),
        Command::Certify { common, degree_cap } => {
            let opts = RunOptions {
                degree_cap,
                ..options(&common)
            };
            run_checks(&common, opts, Session::certify)
        }
        Command::Suite {
            common,
            gen_grid,
            codim,
            degree_cap,
            csv,
        } => {
            let opts = RunOptions {
                codim,
                degree_cap,
                ..options(&common)
            };
            let instances = match (gen_grid, &common.instance) {
                (Some(_), Some(_)) => bail!("give either --instance or --gen-grid"),
                (Some(k), None) => sweep_pool(k, common.seed, opts.budget)?
                    .into_iter()
                    .map(|c| c.instance)
                    .collect(),
                (None, _) => vec![load(&common)?],
            };
            let mut reports = Vec::new();
            for inst in instances {
                reports.extend(Session::new(inst, opts.clone())?.suite());
            }
            let csv_path = csv.or_else(|| common.out.as_ref().map(|p| with_suffix(p, ".csv")));
            match csv_path {
                Some(path) => {
                    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                    write_csv_summary(file, &reports)?;
                }
                None => write_csv_summary(io::stderr(), &reports)?,
            }
            finish(&common, &reports)
        }
    }
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
