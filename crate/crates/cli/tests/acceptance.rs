//! Acceptance gate. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line per criterion and exits non-zero on failure.
//!
//! `cargo test --release -p qcache-cli --test acceptance`

// `!(x <= tol)` is deliberate: a NaN measurement must fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitCode, Output, Stdio};
use std::sync::{Arc, Barrier, Mutex};
use std::thread;
use std::time::Instant;

use qcache::circuit::{build_hea, build_random, Phase};
use qcache::corpus::{cut_cases, small_circuits, Relation};
use qcache::cutting::{
    cut_wires, hea_staircase_cuts, instances, reconstruction_terms, run_wirecut,
};
use qcache::exec::{Accounting, Executor};
use qcache::identity::{
    circuit_key, explain, wl_hash, CacheKey, PayloadKind, DEFAULT_WL_ITERATIONS,
};
use qcache::qaoa::{de_optimize, random_graph, DeConfig, Grid, OptimizationReport};
use qcache::rng::PortableRng;
use qcache::sim::{expectation_pauli, simulate};
use qcache::store::snapshot::{self, Snapshot};
use qcache::store::{
    CacheEntry, EmbeddedOptions, EmbeddedStore, MemoryStore, NetworkedStore, Payload, PutOutcome,
    Server, Store,
};
use qcache::zx::{
    circuit_to_zx, full_reduce_observed, measure, zx_to_tensor, EdgeType, Rule, VertexKind, ZxGraph,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

/// Request accounting of one cached run, kept for the identity check.
struct Run {
    label: String,
    requests: u64,
    hits: u64,
    unique: u64,
    extra: u64,
}

struct Ctx {
    bin: PathBuf,
    tmp: tempfile::TempDir,
    runs: Mutex<Vec<Run>>,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.tmp.path().join(name)
    }

    fn record(&self, label: impl Into<String>, a: &Accounting) {
        self.runs.lock().unwrap().push(Run {
            label: label.into(),
            requests: a.requests,
            hits: a.hits,
            unique: a.inserted,
            extra: a.extra,
        });
    }

    fn qcache(&self, args: &[&str]) -> Result<Output, String> {
        let out = Command::new(&self.bin)
            .args(args)
            .env_remove("QCACHE_ADDR")
            .env_remove("QCACHE_DIR")
            .output()
            .map_err(|e| format!("spawning qcache: {e}"))?;
        if !out.status.success() {
            return Err(format!(
                "qcache {} exited with {}: {}",
                args.join(" "),
                out.status,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out)
    }

    /// Runs a CLI workload and records the accounting line of its report.
    fn workload(&self, args: &[&str]) -> Result<(String, Run), String> {
        let out = self.qcache(args)?;
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        let run = parse_report(&text).ok_or_else(|| format!("no report in:\n{text}"))?;
        self.runs.lock().unwrap().push(Run {
            label: args.join(" "),
            ..run
        });
        Ok((text, run))
    }
}

/// Reads `requests N  hits N  misses N  simulations N  unique N  extra N ...`.
fn parse_report(text: &str) -> Option<Run> {
    let line = text.lines().find(|l| l.starts_with("requests "))?;
    let words: Vec<&str> = line.split_whitespace().collect();
    let field = |name: &str| -> Option<u64> {
        let i = words.iter().position(|w| *w == name)?;
        words.get(i + 1)?.parse().ok()
    };
    Some(Run {
        label: String::new(),
        requests: field("requests")?,
        hits: field("hits")?,
        unique: field("unique")?,
        extra: field("extra")?,
    })
}

/// `qcache store serve` on an ephemeral port, killed on drop.
struct CliServer {
    child: Child,
    addr: String,
}

impl CliServer {
    fn start(bin: &Path) -> Result<CliServer, String> {
        let mut child = Command::new(bin)
            .args(["store", "serve", "--listen", "127.0.0.1:0"])
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| format!("spawning server: {e}"))?;
        let mut line = String::new();
        BufReader::new(child.stdout.take().expect("piped"))
            .read_line(&mut line)
            .map_err(|e| e.to_string())?;
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .ok_or_else(|| format!("unexpected server banner {line:?}"))?
            .to_string();
        Ok(CliServer { child, addr })
    }
}

impl Drop for CliServer {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn counting(_: &Ctx) -> Outcome {
    let got: Vec<usize> = [1, 2, 4]
        .iter()
        .map(|&k| 2 * reconstruction_terms(k).len())
        .collect();
    ensure!(got == [16, 128, 8192], "instance counts {got:?}");
    let params = vec![Phase::QUARTER_PI; 8 * 4];
    let c = build_hea(8, 4, &params).map_err(|e| e.to_string())?;
    let cuts = hea_staircase_cuts(8, 4).map_err(|e| e.to_string())?;
    let (_, terms) = cut_wires(&c, &cuts).map_err(|e| e.to_string())?;
    let n = instances(&terms).len();
    ensure!(n == 8192, "4-cut HEA enumerates {n} instances");
    Ok(format!(
        "k=1,2,4 -> {got:?}; 8-qubit 4-layer HEA with 4 cuts -> {n}"
    ))
}

fn reconstruction(ctx: &Ctx) -> Outcome {
    let cases = cut_cases(60, 11).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for case in &cases {
        let state = simulate(&case.circuit).map_err(|e| e.to_string())?;
        let direct = expectation_pauli(&state, &case.observable).map_err(|e| e.to_string())?;
        let exec = Executor::cached(Arc::new(MemoryStore::new()));
        let r = run_wirecut(&case.circuit, &case.cuts, &case.observable, &exec, 2)
            .map_err(|e| e.to_string())?;
        ctx.record(format!("reconstruction {}", r.label), &r.accounting);
        let err = (r.expectation - direct).abs();
        ensure!(
            err <= 1e-9,
            "{}: reconstructed {} vs direct {direct}",
            r.label,
            r.expectation
        );
        worst = worst.max(err);
    }
    Ok(format!("{} circuits, max error {worst:.2e}", cases.len()))
}

/// Adds a disconnected component of 1 to 3 spiders with a nonzero scalar
/// value. Circuit diagrams never have one, so without it scalar removal
/// would go untested.
fn add_scalar_island(g: &mut ZxGraph, rng: &mut PortableRng) {
    loop {
        let mut island = ZxGraph::new();
        let n = 1 + rng.index(3);
        let vs: Vec<usize> = (0..n)
            .map(|_| {
                let kind = [VertexKind::Z, VertexKind::X][rng.index(2)];
                island.add_vertex(kind, Phase::new(rng.index(8) as i64, 4).expect("k/4"))
            })
            .collect();
        for w in vs.windows(2) {
            let et = [EdgeType::Simple, EdgeType::Hadamard][rng.index(2)];
            island.add_edge(w[0], w[1], et);
        }
        let nonzero = zx_to_tensor(&island).is_ok_and(|m| m.norm() > 1e-6);
        if nonzero {
            let ids: Vec<usize> = vs
                .iter()
                .map(|&v| g.add_vertex(island.kind(v), island.phase(v)))
                .collect();
            for (u, v, et) in island.edges() {
                g.add_edge(ids[u], ids[v], et);
            }
            return;
        }
    }
}

fn rewrite_soundness(_: &Ctx) -> Outcome {
    let mut fired: BTreeMap<Rule, usize> = BTreeMap::new();
    let mut worst = 0.0f64;
    let mut diagrams = 0;
    let mut rng = PortableRng::new(77);
    for seed in 0..240u64 {
        let n = 1 + (seed % 4) as usize;
        let c = build_random(n, 3 + (seed % 6) as usize, 7000 + seed).map_err(|e| e.to_string())?;
        let mut g = circuit_to_zx(&c);
        if seed % 3 == 0 {
            add_scalar_island(&mut g, &mut rng);
        }
        let reference = zx_to_tensor(&g).map_err(|e| e.to_string())?;
        let mut last = measure(&g);
        let mut failure = None;
        full_reduce_observed(&mut g, |rule, g: &ZxGraph| {
            if failure.is_some() {
                return;
            }
            let d = zx_to_tensor(g)
                .ok()
                .and_then(|m| reference.distance_up_to_scalar(&m));
            let next = measure(g);
            match d {
                Some(d) if d <= 1e-9 && next < last => worst = worst.max(d),
                Some(d) if d > 1e-9 => failure = Some(format!("{rule} moved the map by {d:e}")),
                None => failure = Some(format!("{rule} produced a zero or invalid map")),
                _ => failure = Some(format!("{rule} did not lower the measure")),
            }
            last = next;
            *fired.entry(rule).or_default() += 1;
        });
        if let Some(f) = failure {
            return Err(format!("{f} on\n{}", c.to_text()));
        }
        let d = reference
            .distance_up_to_scalar(&zx_to_tensor(&g).map_err(|e| e.to_string())?)
            .unwrap_or(f64::INFINITY);
        ensure!(
            d <= 1e-9,
            "full_reduce moved the map by {d:e} on\n{}",
            c.to_text()
        );
        diagrams += 1;
    }
    let silent: Vec<Rule> = Rule::ORDER
        .into_iter()
        .filter(|r| !fired.contains_key(r))
        .collect();
    ensure!(silent.is_empty(), "never exercised: {silent:?}");
    let counts: Vec<String> = fired.iter().map(|(r, n)| format!("{r} {n}")).collect();
    Ok(format!(
        "{diagrams} diagrams, max distance {worst:.1e}; {}",
        counts.join(", ")
    ))
}

fn hash_determinism(ctx: &Ctx) -> Outcome {
    let mut files = Vec::new();
    for i in 0..6u64 {
        let c = if i % 2 == 0 {
            build_random(3 + i as usize, 6, 31 + i)
        } else {
            build_hea(
                4 + i as usize,
                2,
                &vec![Phase::new(i as i64 + 1, 8).unwrap(); 8 + 2 * i as usize],
            )
        }
        .map_err(|e| e.to_string())?;
        let p = ctx.path(&format!("hash{i}.txt"));
        write(&p, &c.to_text())?;
        files.push((p, circuit_key(&c)));
    }
    for (p, key) in &files {
        let a = ctx.qcache(&["hash", s(p)])?.stdout;
        let b = ctx.qcache(&["hash", s(p)])?.stdout;
        ensure!(
            a == b,
            "{} hashed differently across processes",
            p.display()
        );
        let first = String::from_utf8_lossy(&a)
            .lines()
            .next()
            .unwrap_or("")
            .to_string();
        ensure!(
            first == key.hash && first.len() == 16,
            "printed {first:?}, library key {}",
            key.hash
        );
    }
    let mut rng = PortableRng::new(2024);
    let mut changed = 0;
    for trial in 0..500u64 {
        let c = build_random(
            1 + (trial % 6) as usize,
            2 + (trial % 7) as usize,
            500 + trial,
        )
        .map_err(|e| e.to_string())?;
        let (_, lg) = explain(&c);
        let ids: Vec<usize> = lg.nodes.keys().copied().collect();
        let mut targets: Vec<usize> = (0..ids.len()).map(|i| 3 * i + 11).collect();
        rng.shuffle(&mut targets);
        let perm: HashMap<usize, usize> = ids.into_iter().zip(targets).collect();
        let moved = lg.relabeled(|v| perm[&v]);
        if wl_hash(&moved, DEFAULT_WL_ITERATIONS) != wl_hash(&lg, DEFAULT_WL_ITERATIONS) {
            changed += 1;
        }
    }
    ensure!(
        changed == 0,
        "{changed} of 500 permutations changed the hash"
    );
    Ok(format!(
        "{} files identical across two processes; 500 permutations, 0 changes",
        files.len()
    ))
}

fn soundness_sampling(_: &Ctx) -> Outcome {
    let corpus = small_circuits(250, 21);
    let keys: Vec<CacheKey> = corpus.iter().map(|c| circuit_key(&c.circuit)).collect();
    let mut groups: HashMap<&CacheKey, Vec<usize>> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    let tensor =
        |i: usize| zx_to_tensor(&circuit_to_zx(&corpus[i].circuit)).map_err(|e| e.to_string());
    let mut pairs = 0;
    for members in groups.values().filter(|m| m.len() > 1) {
        let reference = tensor(members[0])?;
        for &j in &members[1..] {
            ensure!(
                reference.approx_eq_up_to_scalar(&tensor(j)?, 1e-8),
                "false positive:\n{}\nvs\n{}",
                corpus[members[0]].circuit.to_text(),
                corpus[j].circuit.to_text()
            );
            pairs += 1;
        }
    }
    // Known-equivalent pairs that got different keys.
    let base_of: HashMap<usize, usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, c)| c.relation == Relation::Base)
        .map(|(i, c)| (c.base, i))
        .collect();
    let variants: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus[i].relation == Relation::Equivalent)
        .collect();
    let missed = variants
        .iter()
        .filter(|&&i| keys[i] != keys[base_of[&corpus[i].base]])
        .count();
    Ok(format!(
        "{} circuits, {pairs} equal-key pairs, 0 false positives; false negatives {missed}/{} ({:.1}%)",
        corpus.len(),
        variants.len(),
        100.0 * missed as f64 / variants.len() as f64
    ))
}

const HEA8: &str = "family = hea\nqubits = 8\nlayers = 2\nseed = 1\n";

fn hit_rate(ctx: &Ctx) -> Outcome {
    let manifest = ctx.path("hea8.txt");
    write(&manifest, HEA8)?;
    let server = CliServer::start(&ctx.bin)?;
    let dir = ctx.path("hitrate-db");
    let mut lines = Vec::new();
    for (name, store) in [
        (
            "networked",
            ["--backend", "networked", "--addr", &server.addr],
        ),
        ("embedded", ["--backend", "embedded", "--dir", s(&dir)]),
    ] {
        let mut args = vec!["wirecut", s(&manifest), "--workers", "8"];
        args.extend(store);
        let (_, r) = ctx.workload(&args)?;
        let rate = r.hits as f64 / r.requests as f64;
        ensure!(r.requests == 128, "{name}: {} requests", r.requests);
        ensure!(
            rate >= 0.5 && r.unique <= 64,
            "{name}: hit rate {:.2}%, {} unique",
            100.0 * rate,
            r.unique
        );
        lines.push(format!(
            "{name} {:.2}% hits, {} unique of 128",
            100.0 * rate,
            r.unique
        ));
    }
    Ok(lines.join("; "))
}

fn race(store: Arc<dyn Store>, entry: &CacheEntry) -> usize {
    let barrier = Arc::new(Barrier::new(8));
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let (s, b, e) = (Arc::clone(&store), Arc::clone(&barrier), entry.clone());
            thread::spawn(move || {
                b.wait();
                s.put_if_absent(e).unwrap()
            })
        })
        .collect();
    handles
        .into_iter()
        .map(|h| h.join().unwrap())
        .filter(|&o| o == PutOutcome::Inserted)
        .count()
}

fn compact(i: u64) -> CacheEntry {
    CacheEntry::new(
        CacheKey {
            hash: format!("{:016x}", i.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            n_qubits: 4,
            interior_spiders: (i % 11) as u32,
            payload_kind: PayloadKind::Compact,
        },
        Payload::Compact(i as f64 / 8.0),
        "statevector",
    )
}

fn concurrency(ctx: &Ctx) -> Outcome {
    let server = Server::bind("127.0.0.1:0")
        .and_then(|s| s.spawn())
        .map_err(|e| e.to_string())?;
    let stores: Vec<Arc<dyn Store>> = vec![
        Arc::new(MemoryStore::new()),
        Arc::new(EmbeddedStore::open(ctx.path("race-db")).map_err(|e| e.to_string())?),
        Arc::new(NetworkedStore::connect(server.addr().to_string()).map_err(|e| e.to_string())?),
    ];
    for store in stores {
        let won = race(Arc::clone(&store), &compact(7));
        ensure!(won == 1, "{}: {won} racers inserted", store.backend());
    }
    server.shutdown();

    let manifest = ctx.path("hea8.txt");
    write(&manifest, HEA8)?;
    let cli_server = CliServer::start(&ctx.bin)?;
    let (_, r) = ctx.workload(&[
        "wirecut",
        s(&manifest),
        "--workers",
        "8",
        "--backend",
        "networked",
        "--addr",
        &cli_server.addr,
    ])?;
    ensure!(
        r.extra <= 8,
        "networked wirecut: {} extra simulations",
        r.extra
    );

    let dir = ctx.path("drain-db");
    let mut backlog = 0;
    {
        let opts = EmbeddedOptions {
            wait_for_commit: false,
            ..EmbeddedOptions::default()
        };
        let store = EmbeddedStore::open_with(&dir, opts).map_err(|e| e.to_string())?;
        for i in 0..1000 {
            store.put_if_absent(compact(i)).map_err(|e| e.to_string())?;
            backlog = backlog.max(store.pending());
        }
        store.flush().map_err(|e| e.to_string())?;
    }
    let reopened = EmbeddedStore::open(&dir).map_err(|e| e.to_string())?;
    let lost = (0..1000)
        .filter(|&i| {
            let want = compact(i);
            reopened
                .get(&want.key)
                .ok()
                .flatten()
                .is_none_or(|e| e.key != want.key || e.payload != want.payload)
        })
        .count();
    ensure!(lost == 0, "{lost} of 1000 queued writes lost");
    Ok(format!(
        "1 winner on memory/embedded/networked; networked wirecut extra {}; 1000/1000 queued writes kept (backlog up to {backlog})",
        r.extra
    ))
}

fn snapshot_round_trip(ctx: &Ctx) -> Outcome {
    let manifest = ctx.path("hea8.txt");
    write(&manifest, HEA8)?;
    let server = CliServer::start(&ctx.bin)?;
    let net = ["--backend", "networked", "--addr", server.addr.as_str()];
    let dir = ctx.path("snap-db");
    let emb = ["--backend", "embedded", "--dir", s(&dir)];
    let mut args = vec!["wirecut", s(&manifest), "--workers", "4"];
    args.extend(net);
    ctx.workload(&args)?;

    let (a, b, c, d) = (
        ctx.path("a.qcsnap"),
        ctx.path("b.qcsnap"),
        ctx.path("c.qcsnap"),
        ctx.path("d.qcsnap"),
    );
    for (verb, path, store) in [
        ("export", &a, net),
        ("import", &a, emb),
        ("export", &b, emb),
        ("export", &c, emb),
    ] {
        let mut args = vec!["store", verb, s(path)];
        args.extend(store);
        ctx.qcache(&args)?;
    }
    let mem = MemoryStore::new();
    snapshot::import(&mem, DEFAULT_WL_ITERATIONS, &b).map_err(|e| e.to_string())?;
    snapshot::export(&mem, DEFAULT_WL_ITERATIONS, &d).map_err(|e| e.to_string())?;

    let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
    let bytes = [read(&a)?, read(&b)?, read(&c)?, read(&d)?];
    ensure!(bytes[2] == bytes[1], "double export from embedded differs");
    ensure!(
        bytes.iter().all(|x| *x == bytes[0]),
        "snapshots differ across backends"
    );
    let served = NetworkedStore::connect(server.addr.clone())
        .and_then(|s| s.entries())
        .map_err(|e| e.to_string())?;
    let loaded = Snapshot::read(&b).map_err(|e| e.to_string())?.entries;
    let ids = |es: &[CacheEntry]| es.iter().map(|e| e.id()).collect::<HashSet<_>>();
    ensure!(ids(&served) == ids(&loaded), "key sets differ");
    ensure!(served == loaded, "payloads differ");
    Ok(format!(
        "{} entries networked -> embedded -> memory, {} byte snapshots identical",
        loaded.len(),
        bytes[0].len()
    ))
}

fn qaoa_invariance(ctx: &Ctx) -> Outcome {
    let graph = random_graph(24, 60, 42).map_err(|e| e.to_string())?;
    let cfg = DeConfig {
        population: 50,
        generations: 20,
        ..DeConfig::default()
    };
    let run = |exec: &Executor, workers| -> Result<OptimizationReport, String> {
        de_optimize(&graph, 2, &Grid::COARSE, &cfg, exec, workers).map_err(|e| e.to_string())
    };
    let t0 = Instant::now();
    let baseline = run(&Executor::uncached(), 4)?;
    let server = Server::bind("127.0.0.1:0")
        .and_then(|s| s.spawn())
        .map_err(|e| e.to_string())?;
    let stores: Vec<Arc<dyn Store>> = vec![
        Arc::new(EmbeddedStore::open(ctx.path("qaoa-db")).map_err(|e| e.to_string())?),
        Arc::new(NetworkedStore::connect(server.addr().to_string()).map_err(|e| e.to_string())?),
    ];
    let mut lines = Vec::new();
    for store in stores {
        let backend = store.backend().to_string();
        let r = run(&Executor::cached(store), 4)?;
        ctx.record(format!("qaoa {backend}"), &r.accounting);
        ensure!(
            r.best_energies() == baseline.best_energies()
                && r.best_betas == baseline.best_betas
                && r.best_gammas == baseline.best_gammas,
            "{backend}: trajectory differs from the uncached run"
        );
        ensure!(
            r.history.windows(2).all(|w| w[0].hits <= w[1].hits),
            "{backend}: cumulative hits decrease"
        );
        let last = r.history.last().map_or(0, |g| g.hits);
        ensure!(last > 0, "{backend}: no hits by the final generation");
        lines.push(format!("{backend} {last} hits"));
    }
    server.shutdown();
    Ok(format!(
        "{} generations identical, best {:.6}; {}; {:.0} s",
        baseline.history.len(),
        baseline.best_energy,
        lines.join(", "),
        t0.elapsed().as_secs_f64()
    ))
}

fn overhead_ratio(ctx: &Ctx) -> Outcome {
    // Two staircase cuts on a 34-qubit HEA: fragments of 17 and 19 qubits.
    let manifest = ctx.path("hea34.txt");
    write(
        &manifest,
        "family = hea\nqubits = 34\nlayers = 2\nseed = 5\n",
    )?;
    let dir = ctx.path("overhead-db");
    let (text, _) = ctx.workload(&[
        "wirecut",
        s(&manifest),
        "--workers",
        "1",
        "--backend",
        "embedded",
        "--dir",
        s(&dir),
    ])?;
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("overhead ratio "))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("no overhead ratio in:\n{text}"))?;
    ensure!(ratio <= 0.05, "overhead ratio {ratio}");
    Ok(format!(
        "17/19-qubit subcircuits, embedded: ratio {ratio:.4}"
    ))
}

fn footprint(ctx: &Ctx) -> Outcome {
    let store = EmbeddedStore::open(ctx.path("footprint-db")).map_err(|e| e.to_string())?;
    let empty = store.data_len().map_err(|e| e.to_string())?;
    for i in 0..1000 {
        store.put_if_absent(compact(i)).map_err(|e| e.to_string())?;
    }
    store.flush().map_err(|e| e.to_string())?;
    let grown = store.data_len().map_err(|e| e.to_string())? - empty;
    let overhead = grown as f64 / 1000.0 - 8.0;
    ensure!(
        overhead <= 64.0,
        "{overhead} bytes per entry beyond the payload"
    );
    Ok(format!(
        "{overhead:.1} bytes per entry beyond the 8-byte payload"
    ))
}

fn accounting_identity(ctx: &Ctx) -> Outcome {
    let runs = ctx.runs.lock().unwrap();
    ensure!(!runs.is_empty(), "no cached runs recorded");
    for r in runs.iter() {
        ensure!(
            r.hits + r.unique + r.extra == r.requests,
            "{}: {} + {} + {} != {}",
            r.label,
            r.hits,
            r.unique,
            r.extra,
            r.requests
        );
    }
    Ok(format!("{} cached runs balance exactly", runs.len()))
}

fn main() -> ExitCode {
    let ctx = Ctx {
        bin: PathBuf::from(env!("CARGO_BIN_EXE_qcache")),
        tmp: tempfile::tempdir().expect("temp dir"),
        runs: Mutex::new(Vec::new()),
    };
    let checks: [(&str, fn(&Ctx) -> Outcome); 12] = [
        ("subcircuit counting", counting),
        ("reconstruction identity", reconstruction),
        ("rewrite soundness", rewrite_soundness),
        ("hash determinism and invariance", hash_determinism),
        ("soundness sampling", soundness_sampling),
        ("desk-scale hit rate", hit_rate),
        ("concurrency", concurrency),
        ("snapshot round trip", snapshot_round_trip),
        ("qaoa trajectory invariance", qaoa_invariance),
        ("overhead ratio", overhead_ratio),
        ("embedded footprint", footprint),
        // Last, so that it sees every cached run above.
        ("accounting identity", accounting_identity),
    ];
    // Optional name filters: `cargo test --test acceptance -- hash qaoa`.
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| check(&ctx))).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .map_or("panicked".into(), |m| format!("panicked: {m}")))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<32} {detail}  [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<32} {why}  [{secs:.1} s]");
            }
        }
    }
    if failed == 0 {
        println!("{ran} of {ran} criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {ran} criteria failed");
        ExitCode::FAILURE
    }
}
