use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zdense::congruence::{decompose_modulus, image_order_mod, predicted_order, prime_power_ladder};
use zdense::density::{primes_for_dense, primes_for_dense_transvection, PiReport};
use zdense::group::{catalog_spec, parse_group, random_group, GenSet, Word, CATALOG_NAMES};
use zdense::params::Params;
use zdense::recognition::is_surjective_mod_p;
use zdense::witness::Witness;
use zdense::Error;

mod corpus;

#[derive(Parser)]
#[command(name = "zdense", version, about = "Exceptional primes and congruence images of dense subgroups of SL(n, Z)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Clone)]
struct Common {
    /// Catalog group as `name:param`, e.g. `rho_F:7`.
    #[arg(long, conflicts_with = "group")]
    catalog: Option<String>,
    /// Group JSON file.
    #[arg(long)]
    group: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    bfs_cap: Option<u64>,
    #[arg(long)]
    orbit_cap: Option<u64>,
    /// Pollard rho iterations per seed.
    #[arg(long)]
    factor_budget: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exceptional primes of a group of prime degree.
    Pi {
        #[command(flatten)]
        common: Common,
    },
    /// Exceptional primes of an even-degree group containing a transvection.
    PiTransvection {
        #[command(flatten)]
        common: Common,
        /// The transvection as a word in the generators, e.g. `g1`.
        #[arg(long)]
        t: Word,
    },
    /// Exact order of the image modulo `m`, with the direct-product
    /// prediction when the level is supplied.
    ImageOrder {
        #[command(flatten)]
        common: Common,
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long)]
        level: Option<u64>,
    },
    /// Orders modulo `p, p^2, ..., p^e`.
    Ladder {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 3)]
        max_e: u32,
    },
    /// Surjectivity verdict at one prime, with certificates.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prime: u64,
    },
    /// Dumps a catalog group as JSON, or lists the catalog.
    Catalog {
        name: Option<String>,
    },
    /// Random subgroup of SL(n, Z) generated by products of elementary matrices.
    RandomGroup {
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Recomputes the built-in corpus of known answers and compares.
    Corpus {
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Only rows of this family (`rho` or `h`).
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-checks every witness of a report against its input group.
    CheckWitness {
        report: PathBuf,
    },
}

struct Failure {
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error }
    }
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    Failure { error: Error::InvalidArgument(e.to_string()) }
}

fn load_group(c: &Common) -> Result<GenSet, Failure> {
    match (&c.catalog, &c.group) {
        (Some(spec), _) => Ok(catalog_spec(spec)?),
        (None, Some(path)) => Ok(parse_group(&fs::read_to_string(path).map_err(io_err)?)?),
        (None, None) => Err(io_err("one of --catalog or --group is required")),
    }
}

fn params_for(c: &Common) -> Params {
    let mut p = Params::with_seed(c.seed);
    if let Some(x) = c.bfs_cap {
        p.bfs_cap = x;
    }
    if let Some(x) = c.orbit_cap {
        p.orbit_cap = x;
    }
    if let Some(x) = c.factor_budget {
        p.factor.rho_iterations = x;
    }
    p
}

fn set_threads(n: Option<usize>) {
    if let Some(n) = n {
        // a second call only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn input_echo(g: &GenSet) -> Value {
    serde_json::from_str(&g.to_json()).expect("group JSON")
}

fn report(command: &str, g: &GenSet, seed: u64, result: Value, witnesses: Vec<&Witness>) -> Value {
    json!({
        "command": command,
        "input": input_echo(g),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "result": result,
        "witnesses": witnesses,
        "errors": [],
    })
}

fn error_report(command: &str, seed: u64, e: &Error) -> Value {
    json!({
        "command": command,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "result": Value::Null,
        "witnesses": [],
        "errors": [{"kind": e.kind(), "message": e.to_string()}],
    })
}

fn pi_text(r: &PiReport) -> String {
    let list = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
    let mut s = format!("pi       = {{{}}}\npi_tilde = {{{}}}\n", list(&r.pi), list(&r.pi_tilde));
    if let Some(p0) = r.p0 {
        s += &format!("p0       = {p0}\n");
    }
    s += &format!("candidates = {{{}}}\n", list(&r.candidates));
    if !r.undetermined.is_empty() {
        s += &format!("undetermined = {{{}}}\n", list(&r.undetermined));
    }
    s
}

fn emit(c: &Common, doc: &Value, text: Option<String>) -> Result<(), Failure> {
    let body = match (c.format, text) {
        (Format::Text, Some(t)) => t,
        _ => serde_json::to_string_pretty(doc).expect("serializable") + "\n",
    };
    match &c.output {
        Some(path) => fs::write(path, body).map_err(io_err),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run_group_command(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Pi { common } => {
            set_threads(common.threads);
            let g = load_group(common)?;
            let r = primes_for_dense(&g, &params_for(common))?;
            let doc = report("pi", &g, common.seed, serde_json::to_value(&r).expect("report"), r.witnesses());
            emit(common, &doc, Some(pi_text(&r)))
        }
        Command::PiTransvection { common, t } => {
            set_threads(common.threads);
            let g = load_group(common)?;
            let r = primes_for_dense_transvection(&g, t, &params_for(common))?;
            let doc = report("pi-transvection", &g, common.seed, serde_json::to_value(&r).expect("report"), r.witnesses());
            emit(common, &doc, Some(pi_text(&r)))
        }
        Command::ImageOrder { common, modulus, level } => {
            let g = load_group(common)?;
            let params = params_for(common);
            let o = image_order_mod(&g, *modulus, &params)?;
            let mut result = serde_json::to_value(&o).expect("order");
            if let Some(level) = level {
                let split = decompose_modulus(*modulus, *level, g.degree())?;
                let ab = split.a * split.b;
                let base = if ab == 1 { 1u32.into() } else { image_order_mod(&g, ab, &params)?.order };
                let predicted = predicted_order(&g, &split, &base);
                result["split"] = serde_json::to_value(split).expect("split");
                result["predicted"] = Value::String(predicted.to_string());
            }
            let text = format!("|image mod {}| = {}\n", modulus, o.order);
            emit(common, &report("image-order", &g, common.seed, result, Vec::new()), Some(text))
        }
        Command::Ladder { common, prime, max_e } => {
            let g = load_group(common)?;
            let l = prime_power_ladder(&g, *prime, *max_e, &params_for(common))?;
            let mut result = serde_json::to_value(&l).expect("ladder");
            result["monotone"] = Value::Bool(l.is_monotone());
            let text = format!(
                "orders = [{}]\nratio exponents = {:?}\n",
                l.orders.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(", "),
                l.exponents
            );
            emit(common, &report("ladder", &g, common.seed, result, Vec::new()), Some(text))
        }
        Command::Certify { common, prime } => {
            let g = load_group(common)?;
            let d = is_surjective_mod_p(&g, *prime, &params_for(common))?;
            let text = format!("p = {}: {:?} ({})\n", d.prime, d.verdict, d.method);
            let doc = report("certify", &g, common.seed, serde_json::to_value(&d).expect("decision"), d.witnesses.iter().collect());
            emit(common, &doc, Some(text))
        }
        _ => unreachable!("handled in main"),
    }
}

fn check_witness(path: &PathBuf) -> Result<bool, Failure> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path).map_err(io_err)?).map_err(|e| Error::Schema(e.to_string()))?;
    let input = doc.get("input").ok_or_else(|| Error::Schema("report has no `input`".into()))?;
    let g = parse_group(&input.to_string())?;
    let ws = doc.get("witnesses").and_then(Value::as_array).cloned().unwrap_or_default();
    let mut ok = true;
    let mut results = Vec::new();
    for w in ws {
        let w: Witness = serde_json::from_value(w).map_err(|e| Error::Schema(e.to_string()))?;
        let v = w.verify(&g)?;
        ok &= v;
        results.push(json!({"claim": w.claim, "verified": v}));
    }
    println!("{}", serde_json::to_string_pretty(&json!({"checked": results.len(), "all_verified": ok, "results": results})).expect("json"));
    Ok(ok)
}

fn exit_for(command: &str, seed: u64, f: Failure) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&error_report(command, seed, &f.error)).expect("json"));
    eprintln!("error: {}", f.error);
    if f.error.signals_not_dense() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Catalog { name } => match name {
            None => {
                for n in CATALOG_NAMES {
                    println!("{n}");
                }
                ExitCode::SUCCESS
            }
            Some(spec) => match catalog_spec(spec) {
                Ok(g) => {
                    println!("{}", g.to_json());
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for("catalog", 0, e.into()),
            },
        },
        Command::RandomGroup { degree, count, seed, steps, bound } => match random_group(*degree, *count, *seed, *steps, *bound) {
            Ok(g) => {
                println!("{}", g.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => exit_for("random-group", *seed, e.into()),
        },
        Command::Corpus { golden, family, seed, threads } => {
            set_threads(*threads);
            match corpus::run(golden.as_deref(), family.as_deref(), *seed) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(f) => exit_for("corpus", *seed, f),
            }
        }
        Command::CheckWitness { report } => match check_witness(report) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(f) => exit_for("check-witness", 0, f),
        },
        other => {
            let (name, seed) = match other {
                Command::Pi { common } => ("pi", common.seed),
                Command::PiTransvection { common, .. } => ("pi-transvection", common.seed),
                Command::ImageOrder { common, .. } => ("image-order", common.seed),
                Command::Ladder { common, .. } => ("ladder", common.seed),
                Command::Certify { common, .. } => ("certify", common.seed),
                _ => unreachable!(),
            };
            match run_group_command(other) {
                Ok(()) => ExitCode::SUCCESS,
                Err(f) => exit_for(name, seed, f),
            }
        }
    }
}
