//! Command-line driver: compile a formula file, benchmark a corpus, or
//! generate one.
//!
//! Exit codes: 0 on success, 1 for input and environment problems (bad
//! flags, unreadable files, parse errors, oracle budgets, timeouts), 2 for
//! internal contract violations and oracle mismatches. The binary in
//! `main.rs` also maps panics to 2.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::cover_cost;
use crate::enumerate::{self, Mode, PrimeSet};
use crate::formula::{parse, Formula};
use crate::oracle;
use crate::shrink::{ShrinkConfig, Strategy};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "primec",
    version,
    about = "Compile a Boolean formula into all of its prime implicants or implicates",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every case in a corpus directory under several shrink
    /// configurations and write a CSV of the results.
    Bench(BenchArgs),
    /// Write a seeded corpus of random formula files.
    GenCorpus(GenArgs),
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Formula file. Identifiers, `!`, `&`, `|`, parentheses, `#` comments.
    #[arg(required = true)]
    pub input: Option<PathBuf>,

    /// What to compile: implicants | implicates.
    #[arg(long, default_value = "implicants", value_parser = parse_mode)]
    pub mode: Mode,

    /// Shrink strategy: multi-order | random | none.
    #[arg(long, default_value = "multi-order", value_parser = parse_strategy)]
    pub strategy: Strategy,

    /// Iterative shrink passes after the basic phase (multi-order).
    #[arg(long, default_value_t = 1)]
    pub iterations: u32,

    /// Shuffle count for the random strategy.
    #[arg(long, default_value_t = 11)]
    pub random_iters: u32,

    /// Seed for the random strategy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Skip the interval split in the basic shrink phase.
    #[arg(long)]
    pub no_interval: bool,

    /// Verify the result against the brute-force oracle and record the
    /// cover cost. Only for small inputs.
    #[arg(long)]
    pub check: bool,

    /// Write the primes here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write run statistics to this path as JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,

    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of formula files.
    pub corpus: PathBuf,

    /// Comma-separated shrink configurations: `<N>it` (multi-order with N
    /// iterations), `random`, or `none`.
    #[arg(long, default_value = "1it,0it,none")]
    pub configs: String,

    #[arg(long, default_value = "implicants", value_parser = parse_mode)]
    pub mode: Mode,

    /// Shuffle count used by the `random` configuration.
    #[arg(long, default_value_t = 11)]
    pub random_iters: u32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-case wall-clock budget in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,

    /// CSV output path. The mean-cost summary is written next to it, with
    /// `.summary` spliced in before the extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Directory to write the corpus into (created if missing).
    pub dir: PathBuf,

    /// Number of cases.
    #[arg(long, default_value_t = 200)]
    pub count: u32,

    /// Variable pool size.
    #[arg(long = "vars", default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=12))]
    pub max_vars: u32,

    /// Maximum connective nesting depth.
    #[arg(long = "depth", default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=10))]
    pub max_depth: u32,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Binary entry point behind `main`. Returns the process exit code.
pub fn entry() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Some(Command::Bench(args)) => bench(args),
        Some(Command::GenCorpus(args)) => gen_corpus(args),
        None => run(&cli.run),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_output(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn shrink_config(strategy: Strategy, iterations: u32, random_iters: u32, seed: u64, interval: bool) -> ShrinkConfig {
    ShrinkConfig {
        strategy,
        bound: match strategy {
            Strategy::Random => random_iters,
            _ => iterations,
        },
        seed,
        interval,
    }
}

/// Compiles one file per the flags, writes primes and stats, and verifies
/// against the oracle when asked.
pub fn run(args: &RunArgs) -> Result<(), Error> {
    let path = args
        .input
        .as_deref()
        .ok_or_else(|| Error::Input("no input file given".to_string()))?;
    let source = read_input(path)?;
    let (f, table) = parse(&source)?;

    let cfg = shrink_config(
        args.strategy,
        args.iterations,
        args.random_iters,
        args.seed,
        !args.no_interval,
    );
    let deadline = args
        .timeout
        .map(|secs| Instant::now() + Duration::from_secs(secs));
    let mut compilation = enumerate::compile(&f, &table, args.mode, &cfg, deadline)?;
    compilation.stats.input = path.display().to_string();

    if args.check {
        let n = table.len();
        verify_against_oracle(&f, n, &compilation.primes)?;
        let denominator = oracle::brute_prime_cover_literals(&f, n)?;
        if denominator > 0 {
            let cost = cover_cost(&compilation.cover, denominator)?;
            if cost < 1.0 {
                return Err(Error::Check(format!(
                    "cover cost {cost} is below 1.0, which a correct cover cannot reach"
                )));
            }
            compilation.stats.cost = Some(cost);
        }
    }

    let rendered = compilation.primes.render(&table);
    match &args.out {
        Some(out) => write_output(out, &rendered)?,
        None => print!("{rendered}"),
    }
    if let Some(stats_path) = &args.stats {
        let json = serde_json::to_string_pretty(&compilation.stats)
            .expect("stats serialize to JSON");
        write_output(stats_path, &format!("{json}\n"))?;
    }
    Ok(())
}

fn verify_against_oracle(f: &Formula, num_vars: usize, primes: &PrimeSet) -> Result<(), Error> {
    match primes {
        PrimeSet::Implicants(terms) => {
            let want = oracle::brute_prime_implicants(f, num_vars)?;
            if terms != &want {
                return Err(Error::Check(format!(
                    "{} implicants computed, oracle has {}",
                    terms.len(),
                    want.len()
                )));
            }
        }
        PrimeSet::Implicates(clauses) => {
            let want = oracle::brute_prime_implicates(f, num_vars)?;
            if clauses != &want {
                return Err(Error::Check(format!(
                    "{} implicates computed, oracle has {}",
                    clauses.len(),
                    want.len()
                )));
            }
        }
    }
    Ok(())
}

const CSV_HEADER: [&str; 14] = [
    "case",
    "mode",
    "strategy",
    "iterations",
    "vars",
    "cover_clauses",
    "cover_literals",
    "primes",
    "solver_calls",
    "shrink_passes",
    "phase1_ms",
    "phase2_ms",
    "cost",
    "status",
];

#[derive(Debug, Clone)]
struct BenchConfig {
    label: String,
    strategy: Strategy,
    bound: u32,
}

fn parse_configs(spec: &str, random_iters: u32) -> Result<Vec<BenchConfig>, Error> {
    let mut configs = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (strategy, bound) = match part {
            "none" => (Strategy::None, 0),
            "random" => (Strategy::Random, random_iters),
            _ => match part.strip_suffix("it").and_then(|n| n.parse::<u32>().ok()) {
                Some(n) => (Strategy::MultiOrder, n),
                None => {
                    return Err(Error::Input(format!(
                        "unknown config `{part}` (use `<N>it`, `random`, or `none`)"
                    )))
                }
            },
        };
        configs.push(BenchConfig {
            label: part.to_string(),
            strategy,
            bound,
        });
    }
    if configs.is_empty() {
        return Err(Error::Input("no configs given".to_string()));
    }
    Ok(configs)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("bench");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.summary.{ext}"),
        None => format!("{stem}.summary"),
    };
    out.with_file_name(name)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Input(format!("csv write: {e}"))
}

/// Benchmarks every formula file in a directory under each configuration.
/// One CSV row per (case, config); mean cover cost per config goes to a
/// sibling summary file.
pub fn bench(args: &BenchArgs) -> Result<(), Error> {
    let configs = parse_configs(&args.configs, args.random_iters)?;

    let mut cases: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .map_err(|source| Error::Io {
            path: args.corpus.display().to_string(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    cases.sort();
    if cases.is_empty() {
        return Err(Error::Input(format!(
            "no formula files in {}",
            args.corpus.display()
        )));
    }

    let file = fs::File::create(&args.out).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    let mut csv = csv::Writer::from_writer(file);
    csv.write_record(CSV_HEADER).map_err(csv_err)?;

    // per config: (cases with a cost, summed cost)
    let mut cost_sums = vec![(0usize, 0.0f64); configs.len()];

    for case in &cases {
        let name = case
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let parsed = read_input(case).and_then(|src| parse(&src).map_err(Error::from));
        for (ci, config) in configs.iter().enumerate() {
            let (f, table) = match &parsed {
                Ok(p) => p,
                Err(_) => {
                    let mut row = vec![name.clone(), args.mode.to_string()];
                    row.extend(std::iter::repeat(String::new()).take(11));
                    row.push("error".to_string());
                    csv.write_record(&row).map_err(csv_err)?;
                    continue;
                }
            };
            let cfg = ShrinkConfig {
                strategy: config.strategy,
                bound: config.bound,
                seed: args.seed,
                interval: true,
            };
            let deadline = Instant::now() + Duration::from_secs(args.timeout);
            let row = match enumerate::compile(f, table, args.mode, &cfg, Some(deadline)) {
                Ok(compilation) => {
                    let s = &compilation.stats;
                    let cost = match oracle::brute_prime_cover_literals(f, table.len()) {
                        Ok(0) | Err(_) => None,
                        Ok(d) => Some(compilation.cover.literal_count() as f64 / d as f64),
                    };
                    if let Some(c) = cost {
                        cost_sums[ci].0 += 1;
                        cost_sums[ci].1 += c;
                    }
                    vec![
                        name.clone(),
                        s.mode.to_string(),
                        config.strategy.as_str().to_string(),
                        config.bound.to_string(),
                        s.vars.to_string(),
                        s.cover_clauses.to_string(),
                        s.cover_literals.to_string(),
                        s.primes.to_string(),
                        s.solver_calls.to_string(),
                        s.shrink_passes.to_string(),
                        s.phase1_ms.to_string(),
                        s.phase2_ms.to_string(),
                        cost.map(|c| format!("{c:.4}")).unwrap_or_default(),
                        "ok".to_string(),
                    ]
                }
                Err(Error::Timeout) => {
                    let mut row = vec![
                        name.clone(),
                        args.mode.to_string(),
                        config.strategy.as_str().to_string(),
                        config.bound.to_string(),
                        table.len().to_string(),
                    ];
                    row.extend(std::iter::repeat(String::new()).take(8));
                    row.push("timeout".to_string());
                    row
                }
                Err(e) => return Err(e),
            };
            csv.write_record(&row).map_err(csv_err)?;
        }
    }
    csv.flush().map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;

    let mut summary = String::from("config,cases,mean_cost\n");
    for (config, (count, sum)) in configs.iter().zip(&cost_sums) {
        let mean = if *count > 0 {
            format!("{:.4}", sum / *count as f64)
        } else {
            String::new()
        };
        summary.push_str(&format!("{},{},{}\n", config.label, count, mean));
    }
    write_output(&summary_path(&args.out), &summary)
}

/// One random formula as source text: nested `&`/`|` groups of two or
/// three children, occasional negations, leaves drawn from the pool.
fn random_formula(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> String {
    if depth == 0 || rng.gen_ratio(1, 5) {
        let v = &vars[rng.gen_range(0..vars.len())];
        return if rng.gen_bool(0.3) {
            format!("!{v}")
        } else {
            v.clone()
        };
    }
    let arity = rng.gen_range(2..=3);
    let children: Vec<String> = (0..arity)
        .map(|_| random_formula(rng, vars, depth - 1))
        .collect();
    let joined = children.join(if rng.gen_bool(0.5) { " & " } else { " | " });
    if rng.gen_bool(0.15) {
        format!("!({joined})")
    } else {
        format!("({joined})")
    }
}

/// Writes `count` random formula files, deterministically per seed.
pub fn gen_corpus(args: &GenArgs) -> Result<(), Error> {
    fs::create_dir_all(&args.dir).map_err(|source| Error::Io {
        path: args.dir.display().to_string(),
        source,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let vars: Vec<String> = (0..args.max_vars).map(|i| format!("x{i}")).collect();
    for i in 0..args.count {
        let depth = rng.gen_range(1..=args.max_depth);
        let src = random_formula(&mut rng, &vars, depth);
        parse(&src).map_err(|e| {
            Error::Contract(format!("generated formula does not parse: {e}"))
        })?;
        let path = args.dir.join(format!("case_{i:03}.bf"));
        write_output(&path, &format!("{src}\n"))?;
    }
    eprintln!("wrote {} files to {}", args.count, args.dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn run_args(input: &Path) -> RunArgs {
        RunArgs {
            input: Some(input.to_path_buf()),
            mode: Mode::Implicants,
            strategy: Strategy::MultiOrder,
            iterations: 1,
            random_iters: 11,
            seed: 0,
            no_interval: false,
            check: false,
            out: None,
            stats: None,
            timeout: None,
        }
    }

    #[test]
    fn run_writes_the_example_implicants() {
        let dir = tmp();
        let input = dir.path().join("ex.bf");
        fs::write(&input, "(a & b) | (!a & c)\n").unwrap();
        let out = dir.path().join("primes.txt");
        let stats = dir.path().join("stats.json");
        let mut args = run_args(&input);
        args.check = true;
        args.out = Some(out.clone());
        args.stats = Some(stats.clone());
        run(&args).unwrap();

        assert_eq!(fs::read_to_string(&out).unwrap(), "a & b\n!a & c\nb & c\n");
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
        for key in [
            "mode",
            "input",
            "vars",
            "cover_clauses",
            "cover_literals",
            "primes",
            "solver_calls",
            "shrink_passes",
            "phase1_ms",
            "phase2_ms",
            "cost",
            "seed",
            "strategy",
            "iterations",
        ] {
            assert!(json.get(key).is_some(), "stats missing key {key}");
        }
        assert_eq!(json["primes"], 3);
        assert!(json["cost"].as_f64().unwrap() >= 1.0);
        assert_eq!(json["strategy"], "multi-order");
    }

    #[test]
    fn run_writes_the_example_implicates() {
        let dir = tmp();
        let input = dir.path().join("ex.bf");
        fs::write(&input, "(a & b) | (!a & c)\n").unwrap();
        let out = dir.path().join("primes.txt");
        let mut args = run_args(&input);
        args.mode = Mode::Implicates;
        args.check = true;
        args.out = Some(out.clone());
        run(&args).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "a | c\n!a | b\nb | c\n");
    }

    #[test]
    fn degenerate_formulas_render_their_constants() {
        let dir = tmp();
        let taut = dir.path().join("taut.bf");
        fs::write(&taut, "a | !a\n").unwrap();
        let unsat = dir.path().join("unsat.bf");
        fs::write(&unsat, "a & !a\n").unwrap();
        let out = dir.path().join("out.txt");

        let mut args = run_args(&taut);
        args.out = Some(out.clone());
        run(&args).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "TRUE\n");

        let mut args = run_args(&unsat);
        args.out = Some(out.clone());
        run(&args).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "");

        let mut args = run_args(&unsat);
        args.mode = Mode::Implicates;
        args.out = Some(out.clone());
        run(&args).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), "FALSE\n");
    }

    #[test]
    fn missing_and_malformed_inputs_exit_with_one() {
        let dir = tmp();
        let missing = run(&run_args(&dir.path().join("nope.bf"))).unwrap_err();
        assert_eq!(missing.exit_code(), 1);

        let bad = dir.path().join("bad.bf");
        fs::write(&bad, "a &&& b\n").unwrap();
        let parse_err = run(&run_args(&bad)).unwrap_err();
        assert_eq!(parse_err.exit_code(), 1);
        assert!(matches!(parse_err, Error::Parse(_)));
    }

    #[test]
    fn oracle_budget_overrun_is_an_input_error() {
        let dir = tmp();
        let input = dir.path().join("wide.bf");
        let wide: Vec<String> = (0..13).map(|i| format!("w{i}")).collect();
        fs::write(&input, format!("{}\n", wide.join(" | "))).unwrap();
        let mut args = run_args(&input);
        args.check = true;
        let err = run(&args).unwrap_err();
        assert!(matches!(err, Error::OracleBudget(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn config_strings_parse_or_reject() {
        let configs = parse_configs("1it,0it,none,random,3it", 11).unwrap();
        let labels: Vec<&str> = configs.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["1it", "0it", "none", "random", "3it"]);
        assert_eq!(configs[0].strategy, Strategy::MultiOrder);
        assert_eq!(configs[0].bound, 1);
        assert_eq!(configs[2].strategy, Strategy::None);
        assert_eq!(configs[3].strategy, Strategy::Random);
        assert_eq!(configs[3].bound, 11);
        assert!(parse_configs("quick", 11).is_err());
        assert!(parse_configs("", 11).is_err());
    }

    #[test]
    fn summary_lands_next_to_the_csv() {
        assert_eq!(
            summary_path(Path::new("/tmp/bench.csv")),
            Path::new("/tmp/bench.summary.csv")
        );
        assert_eq!(summary_path(Path::new("out")), Path::new("out.summary"));
    }

    #[test]
    fn corpus_generation_is_deterministic_and_parseable() {
        let a = tmp();
        let b = tmp();
        for dir in [&a, &b] {
            gen_corpus(&GenArgs {
                dir: dir.path().to_path_buf(),
                count: 12,
                max_vars: 6,
                max_depth: 4,
                seed: 7,
            })
            .unwrap();
        }
        let mut names: Vec<String> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names.len(), 12);
        for name in &names {
            let left = fs::read(a.path().join(name)).unwrap();
            let right = fs::read(b.path().join(name)).unwrap();
            assert_eq!(left, right, "{name} differs between equal seeds");
            parse(std::str::from_utf8(&left).unwrap()).unwrap();
        }
    }

    #[test]
    fn bench_emits_one_row_per_case_and_config() {
        let dir = tmp();
        let corpus = dir.path().join("corpus");
        gen_corpus(&GenArgs {
            dir: corpus.clone(),
            count: 3,
            max_vars: 4,
            max_depth: 3,
            seed: 5,
        })
        .unwrap();
        let out = dir.path().join("bench.csv");
        bench(&BenchArgs {
            corpus,
            configs: "1it,0it".to_string(),
            mode: Mode::Implicants,
            random_iters: 11,
            seed: 0,
            timeout: 30,
            out: out.clone(),
        })
        .unwrap();

        let csv = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));

        let summary = fs::read_to_string(summary_path(&out)).unwrap();
        let sl: Vec<&str> = summary.lines().collect();
        assert_eq!(sl[0], "config,cases,mean_cost");
        assert_eq!(sl.len(), 3);
        assert!(sl[1].starts_with("1it,"));
        assert!(sl[2].starts_with("0it,"));
    }

    #[test]
    fn an_empty_corpus_is_an_input_error() {
        let dir = tmp();
        let err = bench(&BenchArgs {
            corpus: dir.path().to_path_buf(),
            configs: "1it".to_string(),
            mode: Mode::Implicants,
            random_iters: 11,
            seed: 0,
            timeout: 30,
            out: dir.path().join("bench.csv"),
        })
        .unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
