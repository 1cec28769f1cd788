use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crnf_cli::commands::{self, batch_json, Action, Report, EXIT_INPUT};
use crnf_cli::format::parse_rat;
use crnf_core::Rat;

const DEFAULT_MAX_WEIGHT: u32 = 256;

#[derive(Parser)]
#[command(name = "crnf", version, about = "Exact normal forms for finite-type real hypersurfaces in C^2")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Process several input files, concurrently.
    #[arg(long, global = true)]
    each: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Series files (`-` reads standard input).
    #[arg(required = true)]
    files: Vec<String>,
}

#[derive(Args)]
struct Outputs {
    /// Write the normal form to this file.
    #[arg(long)]
    normal_out: Option<PathBuf>,
    /// Write the normalizing map to this file.
    #[arg(long)]
    map_out: Option<PathBuf>,
}

#[derive(Args)]
struct Targets {
    /// Prescribed value of X_{2k-1,0}.
    #[arg(long = "target-A", requires = "target_b", value_name = "P/Q")]
    target_a: Option<String>,
    /// Prescribed value of X_{2k-1,1}.
    #[arg(long = "target-B", requires = "target_a", value_name = "P/Q")]
    target_b: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Type k, essential type e, invariant L and tube-model verdict.
    Analyze(Inputs),
    /// Normalize to t-normal form.
    Tnormal {
        #[command(flatten)]
        targets: Targets,
        #[command(flatten)]
        outputs: Outputs,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Normalize a rigid hypersurface by a map in z only.
    Rigid {
        #[command(flatten)]
        outputs: Outputs,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Normalize a y-free hypersurface by z* = z + psi(w), w* = w + phi(w).
    Nt {
        #[command(flatten)]
        outputs: Outputs,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// List violated normal-form conditions; exit 1 if any.
    Check {
        /// One of t, rigid, nt, stanton, ko1-nontube, ko1-tube, ko1-half.
        #[arg(long)]
        form: String,
        #[command(flatten)]
        targets: Targets,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Decide equivalence of two univariate tubes through their truncation.
    TubeEquiv { first: String, second: String },
    /// Push a hypersurface forward by a map file.
    Apply {
        #[arg(long)]
        map: String,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Classify the stability group from normal coordinates.
    Classify(Inputs),
    /// Bring a tube-model hypersurface to leading term x^k.
    Prenormalize(Inputs),
}

fn read_input(name: &str) -> Result<String, String> {
    if name == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {}", e))?;
        Ok(s)
    } else {
        std::fs::read_to_string(name).map_err(|e| format!("{}: {}", name, e))
    }
}

fn max_weight() -> Result<u32, String> {
    match std::env::var("CRNF_MAX_WEIGHT") {
        Ok(v) => v.trim().parse().map_err(|_| format!("CRNF_MAX_WEIGHT must be a non-negative integer, found '{}'", v)),
        Err(_) => Ok(DEFAULT_MAX_WEIGHT),
    }
}

fn targets(t: &Targets) -> Result<Option<(Rat, Rat)>, String> {
    match (&t.target_a, &t.target_b) {
        (Some(a), Some(b)) => Ok(Some((parse_rat(a)?, parse_rat(b)?))),
        _ => Ok(None),
    }
}

fn emit(json: bool, items: &[(String, Report)], batch: bool) -> u8 {
    if json {
        let value = if batch { batch_json(items) } else { items[0].1.json() };
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        for (name, report) in items {
            if batch {
                println!("== {} ==", name);
            }
            if report.is_error() {
                eprint!("{}: {}", name, report.text());
            } else {
                print!("{}", report.text());
            }
        }
    }
    items.iter().map(|(_, r)| r.code).max().unwrap_or(0)
}

fn write_outputs(outputs: &Outputs, report: &Report) -> Result<(), String> {
    for (path, key) in [(&outputs.normal_out, "normal_form"), (&outputs.map_out, "map")] {
        if let (Some(path), Some(serde_json::Value::String(text))) = (path, report.get(key)) {
            std::fs::write(path, text).map_err(|e| format!("{}: {}", path.display(), e))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, String> {
    let cap = max_weight()?;
    let (action, inputs, outputs) = match cli.command {
        Command::TubeEquiv { first, second } => {
            let report = commands::tube_equiv(&read_input(&first)?, &read_input(&second)?, cap);
            return Ok(emit(cli.json, &[(format!("{} {}", first, second), report)], false));
        }
        Command::Analyze(inputs) => (Action::Analyze, inputs, None),
        Command::Tnormal { targets: t, outputs, inputs } => (Action::TNormal { targets: targets(&t)? }, inputs, Some(outputs)),
        Command::Rigid { outputs, inputs } => (Action::Rigid, inputs, Some(outputs)),
        Command::Nt { outputs, inputs } => (Action::Nt, inputs, Some(outputs)),
        Command::Check { form, targets: t, inputs } => {
            let kind = commands::parse_form(&form, targets(&t)?).ok_or_else(|| format!("unknown form '{}'", form))?;
            (Action::Check { form: kind }, inputs, None)
        }
        Command::Apply { map, inputs } => (Action::Apply { map: read_input(&map)? }, inputs, None),
        Command::Classify(inputs) => (Action::Classify, inputs, None),
        Command::Prenormalize(inputs) => (Action::Prenormalize, inputs, None),
    };
    let files = inputs.files;
    if files.len() > 1 && !cli.each {
        return Err("several input files need --each".into());
    }
    let writes_files = outputs.as_ref().is_some_and(|o| o.normal_out.is_some() || o.map_out.is_some());
    if cli.each && writes_files {
        return Err("--normal-out and --map-out take a single input".into());
    }
    let texts = files.iter().map(|f| read_input(f)).collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<Report> = std::thread::scope(|s| {
        let handles: Vec<_> = texts.iter().map(|t| s.spawn(|| commands::run(&action, t, cap))).collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    if let (Some(outputs), Some(report)) = (&outputs, reports.first()) {
        if !report.is_error() {
            write_outputs(outputs, report)?;
        }
    }
    let items: Vec<(String, Report)> = files.into_iter().zip(reports).collect();
    Ok(emit(cli.json, &items, cli.each))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            if json {
                println!("{}", serde_json::json!({ "error": message }));
            } else {
                eprintln!("error: {}", message);
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}
