use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prolong::dsl::{parse_system, ParseError};
use prolong::forms::first_order_reduction;
use prolong::prolongation::{saturate, SaturateError, SaturateOptions};
use prolong::render::render_triangle;
use prolong::report::{BoundReport, CommutationReport, LeadersReport, Report, SaturationReport, SCHEMA};
use prolong::tower::Tower;
use prolong::verdict::{decide, explain, replay_json, DecideOptions, SystemSpec, Variant, Verdict};

const EXIT_INSOLUBLE: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_SOFTWARE: u8 = 70;

#[derive(Parser)]
#[command(name = "prolong", version, about = "Decide solubility of PDE systems with commuting derivations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a system (several files may run in parallel with --jobs).
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 32)]
        max_height: u32,
        #[arg(long, default_value = "thm1", value_parser = parse_variant)]
        variant: Variant,
        #[command(flatten)]
        out: Output,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include triangle pictures of the witness.
        #[arg(long)]
        triangles: bool,
    },
    /// Saturate to a fixed height.
    Saturate {
        file: PathBuf,
        #[arg(long)]
        height: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Classify the leaders of a presentation.
    Leaders {
        file: PathBuf,
        /// Saturate to this height first.
        #[arg(long)]
        height: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Chain bound and the height s for given m, n, r.
    Bound {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Exterior-form computations.
    Forms {
        #[command(subcommand)]
        command: FormsCommand,
    },
    /// Re-check a certificate or a check report.
    Replay { file: PathBuf },
    /// Print the JSON schema of the reports.
    Schema,
}

#[derive(Subcommand)]
enum FormsCommand {
    /// The linear system forced by commuting derivations on the first-order reduction.
    Commutation {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Clone, Copy)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn load(path: &Path) -> Result<SystemSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))?;
    parse_system(&text).map_err(|e: ParseError| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

macro_rules! json {
    ($value:expr) => {
        serde_json::to_string_pretty($value).expect("reports serialize")
    };
}

fn check_one(path: &Path, options: &DecideOptions, out: Output, triangles: bool) -> Result<(u8, String), Failure> {
    let spec = load(path)?;
    let d = decide(&spec, options).map_err(|e| Failure::new(EXIT_SOFTWARE, format!("{}: {e}", path.display())))?;
    let code = match d.verdict {
        Verdict::Soluble(_) => 0,
        Verdict::Insoluble(_) => EXIT_INSOLUBLE,
        Verdict::Undecided(_) => EXIT_UNDECIDED,
    };
    let text = match out.format {
        Format::Json => json!(&Report::from_decision(&d, triangles)),
        Format::Text => {
            let mut s = explain(&d);
            if triangles {
                for t in Report::from_decision(&d, true).triangles {
                    s.push_str(&format!("{} to height {}:\n", t.unknown, t.height));
                    for row in t.rows {
                        s.push_str(&format!("  {row}\n"));
                    }
                }
            }
            s
        }
    };
    Ok((code, text))
}

fn check(files: &[PathBuf], options: DecideOptions, out: Output, jobs: usize, triangles: bool) -> u8 {
    let jobs = jobs.max(1).min(files.len());
    let mut results: Vec<Option<Result<(u8, String), Failure>>> = (0..files.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = files.len().div_ceil(jobs);
        let handles: Vec<_> = files
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|f| check_one(f, &options, out, triangles)).collect::<Vec<_>>()))
            .collect();
        let mut k = 0;
        for h in handles {
            for r in h.join().expect("worker panicked") {
                results[k] = Some(r);
                k += 1;
            }
        }
    });
    let mut worst = 0;
    for r in results.into_iter().flatten() {
        match r {
            Ok((code, text)) => {
                print!("{text}");
                if !text.ends_with('\n') {
                    println!();
                }
                worst = worst.max(code);
            }
            Err(f) => {
                eprintln!("error: {}", f.message);
                worst = worst.max(f.code);
            }
        }
    }
    worst
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { files, max_height, variant, out, jobs, triangles } => {
            let options = DecideOptions { max_height, variant, ..DecideOptions::default() };
            Ok(check(&files, options, out, jobs, triangles))
        }
        Command::Saturate { file, height, out } => {
            let spec = load(&file)?;
            let naming = spec.naming();
            match saturate(&spec.pres, height, &SaturateOptions::default()) {
                Ok(s) => {
                    match out.format {
                        Format::Json => println!("{}", json!(&SaturationReport::ok(&spec, &s))),
                        Format::Text => {
                            for r in s.added_relations() {
                                println!("added {} = 0", r.display_with(&naming));
                            }
                            for k in 0..spec.pres.n {
                                if let Ok(pic) = render_triangle(&s.tower, k, height) {
                                    println!("{}:", spec.names[k]);
                                    print!("{pic}");
                                }
                            }
                        }
                    }
                    Ok(0)
                }
                Err(SaturateError::Violation(v)) => {
                    match out.format {
                        Format::Json => println!("{}", json!(&SaturationReport::violation(&spec, height, &v.steps))),
                        Format::Text => {
                            for st in &v.steps {
                                println!("added {} = 0", st.relation.display_with(&naming));
                            }
                            println!("violation");
                        }
                    }
                    Ok(EXIT_INSOLUBLE)
                }
                Err(SaturateError::Failed(e)) => Err(Failure::new(EXIT_SOFTWARE, e.to_string())),
            }
        }
        Command::Leaders { file, height, out } => {
            let spec = load(&file)?;
            let diagnostics = spec.pres.validate();
            let tower = match height {
                None => Tower::from_presentation(&spec.pres).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?,
                Some(h) => match saturate(&spec.pres, h, &SaturateOptions::default()) {
                    Ok(s) => s.tower,
                    Err(SaturateError::Violation(_)) => {
                        return Err(Failure::new(EXIT_INSOLUBLE, format!("no tower: saturation to height {h} is inconsistent")))
                    }
                    Err(SaturateError::Failed(e)) => return Err(Failure::new(EXIT_SOFTWARE, e.to_string())),
                },
            };
            let report = LeadersReport::new(&spec, &tower, &diagnostics);
            match out.format {
                Format::Json => println!("{}", json!(&report)),
                Format::Text => {
                    for d in &diagnostics {
                        println!("warning: {d}");
                    }
                    for l in &report.leaders {
                        let mark = if l.minimal { " (minimal)" } else { "" };
                        println!("{} {:?}: {}{mark}", l.slot.unknown, l.slot.index, l.kind);
                    }
                }
            }
            Ok(0)
        }
        Command::Bound { m, n, r, out } => {
            let report = BoundReport::compute(m, n, r).map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
            match out.format {
                Format::Json => println!("{}", json!(&report)),
                Format::Text => {
                    println!("chain bound t = {}", report.chain_bound);
                    println!("s = 2^t·r = {}", report.s);
                }
            }
            Ok(0)
        }
        Command::Forms { command: FormsCommand::Commutation { file, out } } => {
            let spec = load(&file)?;
            let fo = first_order_reduction(&spec.pres).map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
            let report = CommutationReport::compute(&spec, &fo).map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
            match out.format {
                Format::Json => println!("{}", json!(&report)),
                Format::Text => {
                    for row in &report.rows {
                        println!("{row}");
                    }
                    match &report.solution {
                        Some(sol) => {
                            println!("soluble");
                            for s in sol {
                                println!("  {s}");
                            }
                        }
                        None => println!("insoluble"),
                    }
                }
            }
            Ok(if report.soluble { 0 } else { EXIT_INSOLUBLE })
        }
        Command::Replay { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", file.display())))?;
            let cert = match serde_json::from_str::<serde_json::Value>(&text) {
                Ok(serde_json::Value::Object(mut o)) if o.contains_key("certificate") => {
                    o.remove("certificate").map(|c| c.to_string()).unwrap_or_default()
                }
                _ => text,
            };
            if replay_json(&cert) {
                println!("valid");
                Ok(0)
            } else {
                println!("invalid");
                Ok(EXIT_INSOLUBLE)
            }
        }
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
