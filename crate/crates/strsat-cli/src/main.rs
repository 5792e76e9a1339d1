//! Command-line front end: solve `.strf` constraint files, encode 3-CNF
//! instances into string fragments, decode and verify those encodings,
//! run the enumeration oracle, and benchmark the solver back ends.
//!
//! Exit codes follow SAT-competition conventions: 10 satisfiable,
//! 20 unsatisfiable, 30 unknown, 1 error, 0 for commands that do not
//! decide satisfiability.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use strsat::engine::{self, Mode, SolveOptions, Verdict};
use strsat::gen::{self, GenParams};
use strsat::oracle::{self, OracleVerdict};
use strsat::reductions::{
    decode_bool, gen_random_3cnf, reduce, verify_equisat, ReductionFragment, ReductionMode,
};
use strsat::textio::{self, parse_dimacs, parse_model, parse_strf, print_strf, write_dimacs};
use strsat::{Assignment, Formula, SolverConfig};

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_UNKNOWN: u8 = 30;

#[derive(Parser)]
#[command(name = "strsat", version, about = "Bounded string constraint solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability of a constraint file.
    Solve(SolveArgs),
    /// Encode a DIMACS 3-CNF instance into a string fragment.
    Reduce(ReduceArgs),
    /// Read a Boolean assignment back out of a string model.
    Decode(DecodeArgs),
    /// Compare random 3-CNF instances against their encodings.
    VerifyReduction(VerifyArgs),
    /// Decide a constraint file by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Time both solver modes over a family of instances.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Monolithic,
    Staged,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Monolithic => Mode::Monolithic,
            ModeArg::Staged => Mode::Staged,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FragmentArg {
    Ec,
    Etconst,
    Ea,
    Exconst,
    C,
    T,
}

impl From<FragmentArg> for ReductionFragment {
    fn from(f: FragmentArg) -> ReductionFragment {
        match f {
            FragmentArg::Ec => ReductionFragment::Ec,
            FragmentArg::Etconst => ReductionFragment::EtConst,
            FragmentArg::Ea => ReductionFragment::Ea,
            FragmentArg::Exconst => ReductionFragment::ExConst,
            FragmentArg::C => ReductionFragment::C,
            FragmentArg::T => ReductionFragment::T,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Constraint file in `.strf` syntax.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "monolithic")]
    mode: ModeArg,
    /// Override the file's global length cap.
    #[arg(long)]
    max_len: Option<usize>,
    /// Seed recorded in the solver configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the propositional encoding as DIMACS CNF.
    #[arg(long, conflicts_with = "enumerate")]
    dump_cnf: Option<PathBuf>,
    /// Enumerate up to this many distinct models instead of one verdict.
    #[arg(long)]
    enumerate: Option<u64>,
}

#[derive(Args)]
struct ReduceArgs {
    /// DIMACS CNF input; every clause must have exactly three literals.
    input: PathBuf,
    #[arg(long, value_enum)]
    fragment: FragmentArg,
    /// Use the repaired variant of the encoding.
    #[arg(long)]
    repaired: bool,
    /// Output `.strf` path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    /// Model file of `(define-str ...)` lines.
    model: PathBuf,
    /// The DIMACS 3-CNF instance the model's formula encodes.
    cnf: PathBuf,
    #[arg(long, value_enum)]
    fragment: FragmentArg,
    #[arg(long)]
    repaired: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    fragment: FragmentArg,
    #[arg(long)]
    repaired: bool,
    /// Boolean variables per generated instance (at most 16).
    #[arg(long, default_value_t = 4)]
    vars: usize,
    /// Clauses per generated instance.
    #[arg(long, default_value_t = 6)]
    clauses: usize,
    /// Number of instances.
    #[arg(long, default_value_t = 20)]
    count: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    /// Assignment-space budget; larger spaces answer `unknown`.
    #[arg(long)]
    budget: Option<u64>,
    /// Also count every satisfying assignment.
    #[arg(long)]
    count: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BenchFamily {
    Ec,
    Etconst,
    Ea,
    Exconst,
    C,
    T,
    Random,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    family: BenchFamily,
    /// Instance sizes, e.g. `--sizes 4,6,8`.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repaired: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Decode(args) => cmd_decode(args),
        Command::VerifyReduction(args) => cmd_verify_reduction(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn seed_or_env(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("STRSAT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn read_strf(path: &PathBuf) -> Result<(textio::StrfDocument, Formula, SolverConfig)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_strf(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok(parsed)
}

/// Model lines in declaration order; declared variables the solver never
/// saw print as the empty string.
fn render_model(doc: &textio::StrfDocument, model: &Assignment) -> String {
    let mut ordered = Assignment::new();
    for name in doc.declared_names() {
        ordered.set(&name, model.get(&name).unwrap_or(""));
    }
    textio::write_model(&ordered)
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let (doc, formula, mut config) = read_strf(&args.file)?;
    if args.max_len.is_some() {
        config = doc
            .build_config(args.max_len)
            .map_err(|e| anyhow::anyhow!("{}: {e}", args.file.display()))?;
    }
    config.seed = seed_or_env(args.seed);

    if let Some(limit) = args.enumerate {
        let (models, _) = engine::enumerate_models(&formula, &config, limit);
        if models.is_empty() {
            println!("unsat");
            return Ok(EXIT_UNSAT);
        }
        println!("sat");
        println!("models {}", models.len());
        for model in &models {
            print!("{}", render_model(&doc, model));
            println!();
        }
        return Ok(EXIT_SAT);
    }

    let options = SolveOptions {
        mode: args.mode.into(),
        collect_cnf: args.dump_cnf.is_some(),
        ..SolveOptions::default()
    };
    let outcome = engine::solve(&formula, &config, &options);
    if let Some(path) = &args.dump_cnf {
        let cnf = outcome.cnf.as_ref().expect("requested during solve");
        fs::write(path, write_dimacs(cnf))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match outcome.verdict {
        Verdict::Sat(model) => {
            println!("sat");
            if doc.get_model {
                print!("{}", render_model(&doc, &model));
            }
            Ok(EXIT_SAT)
        }
        Verdict::Unsat => {
            println!("unsat");
            Ok(EXIT_UNSAT)
        }
    }
}

fn reduction_mode(repaired: bool) -> ReductionMode {
    if repaired {
        ReductionMode::Repaired
    } else {
        ReductionMode::Verbatim
    }
}

fn read_dimacs(path: &PathBuf) -> Result<textio::CnfInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8> {
    let cnf = read_dimacs(&args.input)?;
    let out = reduce(args.fragment.into(), &cnf, reduction_mode(args.repaired))?;
    let mut text = print_strf(&out.formula, &out.config);
    text.push_str("(check-sat)\n(get-model)\n");
    fs::write(&args.output, text)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "wrote {} ({} variables, {} literals)",
        args.output.display(),
        out.formula.variables().len(),
        out.formula.literals().len()
    );
    Ok(0)
}

fn cmd_decode(args: DecodeArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let model = parse_model(&text)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.model.display()))?;
    let cnf = read_dimacs(&args.cnf)?;
    let out = reduce(args.fragment.into(), &cnf, reduction_mode(args.repaired))?;
    let decoded = decode_bool(&out, &model);
    let mut line = String::from("v");
    for k in 1..=cnf.num_vars {
        let lit = if decoded.get(k) { k as i64 } else { -(k as i64) };
        line.push_str(&format!(" {lit}"));
    }
    line.push_str(" 0");
    println!("{line}");
    if !decoded.satisfies(&cnf) {
        eprintln!("note: decoded assignment does not satisfy the source instance");
    }
    Ok(0)
}

fn cmd_verify_reduction(args: VerifyArgs) -> Result<u8> {
    if args.vars < 3 || args.vars > 16 {
        bail!("--vars must be between 3 and 16 for the exhaustive check");
    }
    let seed = seed_or_env(args.seed);
    let mode = reduction_mode(args.repaired);
    let fragment: ReductionFragment = args.fragment.into();
    println!("instance phi_sat psi_sat decoded_ok equisat");
    let mut forward_failures = 0u64;
    let mut backward_mismatches = 0u64;
    for i in 0..args.count {
        let phi = gen_random_3cnf(args.vars, args.clauses, seed.wrapping_add(i));
        let report = verify_equisat(fragment, &phi, mode)?;
        let decoded = match report.decoded_ok {
            Some(ok) => ok.to_string(),
            None => "n/a".to_string(),
        };
        println!(
            "{i} {} {} {decoded} {}",
            report.phi_sat,
            report.psi_sat,
            report.equisatisfiable()
        );
        if report.phi_sat && !report.psi_sat {
            forward_failures += 1;
        }
        if report.psi_sat && !report.phi_sat {
            backward_mismatches += 1;
        }
    }
    println!(
        "summary forward_failures={forward_failures} backward_mismatches={backward_mismatches}"
    );
    Ok(if forward_failures > 0 { 1 } else { 0 })
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let (doc, formula, mut config) = read_strf(&args.file)?;
    if let Some(budget) = args.budget {
        config.oracle_budget = budget;
    }
    let result = oracle::enumerate_sat(&formula, &config, args.count);
    match result.verdict {
        OracleVerdict::Sat(model) => {
            match result.model_count {
                Some(count) => println!("sat {count}"),
                None => println!("sat"),
            }
            if doc.get_model {
                print!("{}", render_model(&doc, &model));
            }
            Ok(EXIT_SAT)
        }
        OracleVerdict::Unsat => {
            match result.model_count {
                Some(count) => println!("unsat {count}"),
                None => println!("unsat"),
            }
            Ok(EXIT_UNSAT)
        }
        OracleVerdict::BudgetExceeded => {
            println!("unknown");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn bench_instances(args: &BenchArgs, seed: u64) -> Result<Vec<(String, usize, Formula, SolverConfig)>> {
    let mut instances = Vec::new();
    for &size in &args.sizes {
        match args.family {
            BenchFamily::Random => {
                let params = GenParams {
                    max_literals: size.max(1),
                    ..GenParams::default()
                };
                let (formula, config) =
                    gen::random_mixed_from_seed(seed.wrapping_add(size as u64), &params);
                instances.push((format!("random-l{size}"), size, formula, config));
            }
            family => {
                let fragment = match family {
                    BenchFamily::Ec => ReductionFragment::Ec,
                    BenchFamily::Etconst => ReductionFragment::EtConst,
                    BenchFamily::Ea => ReductionFragment::Ea,
                    BenchFamily::Exconst => ReductionFragment::ExConst,
                    BenchFamily::C => ReductionFragment::C,
                    BenchFamily::T => ReductionFragment::T,
                    BenchFamily::Random => unreachable!(),
                };
                let phi = gen_random_3cnf(
                    size.max(3),
                    2 * size,
                    seed.wrapping_add(size as u64),
                );
                let out = reduce(fragment, &phi, reduction_mode(args.repaired))?;
                let name = format!("{}-n{size}", reductions_family_name(fragment));
                instances.push((name, size, out.formula, out.config));
            }
        }
    }
    Ok(instances)
}

fn reductions_family_name(f: ReductionFragment) -> &'static str {
    match f {
        ReductionFragment::Ec => "ec",
        ReductionFragment::EtConst => "etconst",
        ReductionFragment::Ea => "ea",
        ReductionFragment::ExConst => "exconst",
        ReductionFragment::C => "c",
        ReductionFragment::T => "t",
    }
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let seed = seed_or_env(args.seed);
    let instances = bench_instances(&args, seed)?;
    println!("instance,size,mode,verdict,sat_calls,time");
    for (name, size, formula, config) in &instances {
        for (mode, label) in [(Mode::Monolithic, "monolithic"), (Mode::Staged, "staged")] {
            let options = SolveOptions {
                mode,
                ..SolveOptions::default()
            };
            let outcome = engine::solve(formula, config, &options);
            let verdict = if outcome.verdict.is_sat() { "sat" } else { "unsat" };
            println!(
                "{name},{size},{label},{verdict},{},{:.6}",
                outcome.stats.sat_calls,
                outcome.stats.wall_time.as_secs_f64()
            );
        }
    }
    Ok(0)
}
