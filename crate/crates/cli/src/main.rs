mod backend;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use qcache::circuit::{parse_qasm, Circuit};
use qcache::cutting::{self, run_wirecut, Manifest};
use qcache::exec::Executor;
use qcache::identity::{circuit_key_timed, explain, DEFAULT_WL_ITERATIONS};
use qcache::qaoa::{de_optimize, QaoaConfig};
use qcache::store::{snapshot, Server};
use qcache::zx::{circuit_to_zx, zx_to_tensor};

use backend::StoreArgs;
use report::RunReport;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_NOT_EQUIVALENT: u8 = 3;

/// Largest circuit `equiv --oracle` will contract.
const ORACLE_MAX_QUBITS: usize = 4;
const ORACLE_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "qcache",
    version,
    about = "Semantic result cache for quantum circuits"
)]
struct Cli {
    /// Weisfeiler-Lehman refinement rounds used for keys.
    #[arg(long, global = true, default_value_t = DEFAULT_WL_ITERATIONS)]
    wl_iterations: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cache key of a circuit file.
    Hash {
        file: PathBuf,
        /// Also dump the reduced diagram and its canonical labelling.
        #[arg(long)]
        explain: bool,
    },
    /// Exit 0 if two circuits get the same key, 3 if not.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Cross-check with dense tensor contraction (at most 4 qubits).
        #[arg(long)]
        oracle: bool,
    },
    /// Run a wire-cutting workload described by a manifest.
    Wirecut {
        manifest: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a grid-snapped QAOA optimization described by a config file.
    Qaoa {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Export, import, inspect or serve a cache store.
    #[command(subcommand)]
    Store(StoreCommand),
}

#[derive(clap::Args)]
struct RunArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Simulate every request; no store is opened.
    #[arg(long)]
    no_cache: bool,
    /// Append the result to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write per-stage timings to this CSV file.
    #[arg(long)]
    timings_csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StoreCommand {
    /// Write every entry to a snapshot file.
    Export {
        path: PathBuf,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Load a snapshot; entries already present are kept.
    Import {
        path: PathBuf,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Print entry count and counters.
    Stats {
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Serve an in-memory store over TCP until killed.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7474")]
        listen: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let wl = cli.wl_iterations;
    match cli.command {
        Command::Hash { file, explain } => cmd_hash(&file, explain, wl),
        Command::Equiv { a, b, oracle } => cmd_equiv(&a, &b, oracle, wl),
        Command::Wirecut { manifest, run } => cmd_wirecut(&manifest, &run, wl),
        Command::Qaoa { config, run } => cmd_qaoa(&config, &run, wl),
        Command::Store(s) => cmd_store(s, wl),
    }
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "qasm") {
        parse_qasm(&src)
    } else {
        Circuit::parse(&src)
    };
    parsed.with_context(|| path.display().to_string())
}

fn cmd_hash(file: &Path, show: bool, wl: u32) -> Result<ExitCode> {
    let c = load_circuit(file)?;
    let (key, _) = circuit_key_timed(&c, wl);
    println!("{}", key.hash);
    println!(
        "qubits {}  interior_spiders {}",
        key.n_qubits, key.interior_spiders
    );
    if show {
        let (g, lg) = explain(&c);
        println!("\nreduced diagram:\n{}", g.dump());
        println!("canonical labelling:\n{}", lg.to_text());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_equiv(a: &Path, b: &Path, oracle: bool, wl: u32) -> Result<ExitCode> {
    let (ca, cb) = (load_circuit(a)?, load_circuit(b)?);
    let (ka, _) = circuit_key_timed(&ca, wl);
    let (kb, _) = circuit_key_timed(&cb, wl);
    let same = ka.hash == kb.hash && ka.metadata_matches(&kb);
    println!("{}  {}", ka.hash, a.display());
    println!("{}  {}", kb.hash, b.display());
    if oracle {
        let n = ca.n_qubits().max(cb.n_qubits());
        if n > ORACLE_MAX_QUBITS {
            bail!("--oracle handles at most {ORACLE_MAX_QUBITS} qubits, got {n}");
        }
        let equal = ca.n_qubits() == cb.n_qubits() && {
            let ta = zx_to_tensor(&circuit_to_zx(&ca)).map_err(|e| anyhow!("{e}"))?;
            let tb = zx_to_tensor(&circuit_to_zx(&cb)).map_err(|e| anyhow!("{e}"))?;
            ta.approx_eq_up_to_scalar(&tb, ORACLE_TOL)
        };
        match (same, equal) {
            (true, false) => bail!("keys match but the unitaries differ"),
            (false, true) => println!("oracle: equal up to global phase (not detected by the key)"),
            (_, true) => println!("oracle: equal up to global phase"),
            (_, false) => println!("oracle: different"),
        }
    }
    if same {
        println!("equivalent");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("not equivalent");
        Ok(ExitCode::from(EXIT_NOT_EQUIVALENT))
    }
}

fn executor(run: &RunArgs, wl: u32, tag: &str) -> Result<(Executor, String)> {
    if run.no_cache {
        return Ok((Executor::uncached(), "none".into()));
    }
    let store = run.store.open()?;
    let name = store.backend().to_string();
    Ok((
        Executor::cached(store).with_wl_iterations(wl).with_tag(tag),
        name,
    ))
}

fn workers(run: &RunArgs) -> usize {
    run.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn append_csv(path: &Path, header: &str, rows: &str) -> Result<()> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    f.write_all(rows.as_bytes())?;
    Ok(())
}

fn finish(report: &RunReport, run: &RunArgs) -> Result<()> {
    print!("{}", report.render());
    if let Some(p) = &run.timings_csv {
        fs::write(p, report.timing_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cmd_wirecut(path: &Path, run: &RunArgs, wl: u32) -> Result<ExitCode> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest = Manifest::parse(&src).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let (c, cuts, observable) = manifest.build()?;
    let (exec, backend) = executor(run, wl, "statevector")?;
    let w = workers(run);
    let r = run_wirecut(&c, &cuts, &observable, &exec, w)?;
    print!("{}", r.summary());
    if let Some(p) = &run.csv {
        append_csv(p, cutting::CSV_HEADER, &format!("{}\n", r.csv_row()))?;
    }
    let config = format!(
        "{}cuts = {}\nworkers = {w}",
        src.lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|l| format!("{}\n", l.trim()))
            .collect::<String>(),
        cuts.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    finish(
        &RunReport {
            workload: r.label.clone(),
            config,
            backend,
            accounting: r.accounting,
            timings: r.timings,
            wall: r.wall,
        },
        run,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_qaoa(path: &Path, run: &RunArgs, wl: u32) -> Result<ExitCode> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = QaoaConfig::parse(&src).with_context(|| path.display().to_string())?;
    let graph = cfg.graph()?;
    let (exec, backend) = executor(run, wl, "maxcut")?;
    let w = workers(run);
    let r = de_optimize(&graph, cfg.p, &cfg.grid, &cfg.de, &exec, w)?;
    println!(
        "{:>4} {:>16} {:>8} {:>8} {:>8}",
        "gen", "best", "calls", "hits", "unique"
    );
    for g in &r.history {
        println!(
            "{:>4} {:>16.10} {:>8} {:>8} {:>8}",
            g.generation, g.best_energy, g.calls, g.hits, g.unique_entries
        );
    }
    let show = |ps: &[qcache::circuit::Phase]| {
        ps.iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!(
        "best {:.10} of {} edges at beta = [{}], gamma = [{}]",
        r.best_energy,
        graph.edges().len(),
        show(&r.best_betas),
        show(&r.best_gammas)
    );
    if let Some(p) = &run.csv {
        fs::write(p, r.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    finish(
        &RunReport {
            workload: format!("qaoa-p{}", cfg.p),
            config: format!("{}workers = {w}", cfg.to_text()),
            backend,
            accounting: r.accounting,
            timings: r.timings,
            wall: r.wall,
        },
        run,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_store(cmd: StoreCommand, wl: u32) -> Result<ExitCode> {
    match cmd {
        StoreCommand::Export { path, store } => {
            let s = store.open_reader()?;
            let n = snapshot::export(s.as_ref(), wl, &path)?;
            println!("exported {n} entries to {}", path.display());
        }
        StoreCommand::Import { path, store } => {
            let s = store.open()?;
            let n = snapshot::import(s.as_ref(), wl, &path)?;
            println!("imported {n} new entries from {}", path.display());
        }
        StoreCommand::Stats { store } => {
            let s = store.open_reader()?;
            let st = s.stats()?;
            println!("backend          {}", s.backend());
            println!("entries          {}", s.entries()?.len());
            println!("calls            {}", st.calls);
            println!("hits             {}", st.hits);
            println!("misses           {}", st.misses);
            println!("stores           {}", st.stores);
            println!("unique_entries   {}", st.unique_entries);
            println!("extra            {}", st.extra_simulations);
        }
        StoreCommand::Serve { listen } => {
            let server = Server::bind(&listen).with_context(|| format!("binding {listen}"))?;
            println!("listening on {}", server.local_addr()?);
            std::io::stdout().flush()?;
            server.run()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }
}
