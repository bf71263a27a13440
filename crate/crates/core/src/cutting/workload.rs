//! The wire-cutting workload: build a circuit from a manifest, cut it, run
//! every subcircuit instance through an [`Executor`] on a worker pool and
//! reconstruct the observable.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use super::{
    cut_wires, enumerate_subcircuits, fragment_value, instances, parse_observable,
    random_two_block, reconstruct_expectation, result_key, variant_circuit, CutError, CutSpec,
    ReconstructionTerm, Role,
};
use crate::circuit::{build_hea, build_random, quantize_phase, Circuit, Phase};
use crate::exec::{Accounting, Executor, StageTimings};
use crate::rng::PortableRng;
use crate::sim::{expectation_pauli, simulate, Pauli, MAX_QUBITS};

/// Cuts for an `n`-qubit HEA with exactly `layers` layers, one per layer:
/// in layer `l` (from 0) the wire of qubit `n/2 − 1 − l` is cut right after
/// the ladder CX that targets it (or after its RY when it is qubit 0). The
/// upstream fragment is the lower-left staircase.
pub fn hea_staircase_cuts(n_qubits: usize, layers: usize) -> Result<Vec<CutSpec>, CutError> {
    let half = n_qubits / 2;
    if layers == 0 || layers > half {
        return Err(CutError::NoSplit(format!(
            "a staircase over {n_qubits} qubits needs 1..={half} layers, got {layers}"
        )));
    }
    let per_layer = 2 * n_qubits - 1;
    Ok((0..layers)
        .map(|l| {
            let q = half - 1 - l;
            let start = l * per_layer;
            let position = if q == 0 {
                start
            } else {
                start + n_qubits + (q - 1)
            };
            CutSpec { qubit: q, position }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hea,
    Random,
    /// Two random blocks sharing the cut qubits (see
    /// [`super::random_two_block`]).
    Blocks,
}

/// Workload description, one `key = value` per line, `#` comments:
///
/// ```text
/// family = hea            # hea | random | blocks
/// qubits = 8
/// layers = 2              # hea
/// depth = 3               # random, blocks
/// split = 5               # blocks: first block covers 0..split
/// shared = 2              # blocks: qubits shared by both blocks
/// seed = 7
/// cuts = staircase        # staircase (hea), auto (blocks) or q@gate, ...
/// observable = ZZZZZZZZ   # default: Z on every qubit
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub family: Family,
    pub qubits: usize,
    pub layers: usize,
    pub depth: usize,
    pub split: Option<usize>,
    pub shared: usize,
    pub seed: u64,
    pub cuts: Option<Vec<CutSpec>>,
    pub observable: Option<String>,
}

impl Manifest {
    pub fn parse(src: &str) -> Result<Manifest, String> {
        let mut m = Manifest {
            family: Family::Hea,
            qubits: 8,
            layers: 2,
            depth: 3,
            split: None,
            shared: 1,
            seed: 1,
            cuts: None,
            observable: None,
        };
        for (i, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| format!("line {}: {msg}", i + 1);
            let (k, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| err(format!("{k}: {v:?} is not a number")))
            };
            match k {
                "family" => {
                    m.family = match v {
                        "hea" => Family::Hea,
                        "random" => Family::Random,
                        "blocks" => Family::Blocks,
                        _ => return Err(err(format!("unknown family {v:?}"))),
                    }
                }
                "qubits" => m.qubits = num(v)? as usize,
                "layers" => m.layers = num(v)? as usize,
                "depth" => m.depth = num(v)? as usize,
                "split" => m.split = Some(num(v)? as usize),
                "shared" => m.shared = num(v)? as usize,
                "seed" => m.seed = num(v)?,
                "cuts" => {
                    m.cuts = match v {
                        "staircase" | "auto" => None,
                        list => Some(
                            list.split(',')
                                .map(|s| {
                                    let (q, g) = s.trim().split_once('@').ok_or_else(|| {
                                        err(format!("cut {s:?} is not qubit@gate"))
                                    })?;
                                    Ok(CutSpec {
                                        qubit: num(q.trim())? as usize,
                                        position: num(g.trim())? as usize,
                                    })
                                })
                                .collect::<Result<_, String>>()?,
                        ),
                    }
                }
                "observable" => m.observable = Some(v.to_string()),
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        Ok(m)
    }

    /// The circuit, its cuts and the observable.
    pub fn build(&self) -> Result<(Circuit, Vec<CutSpec>, Vec<(usize, Pauli)>), CutError> {
        let (c, implied) = match self.family {
            Family::Hea => {
                let mut rng = PortableRng::new(self.seed);
                let params = (0..self.layers * self.qubits)
                    .map(|_| quantize_phase(rng.next_f64() * 2.0 * PI))
                    .collect::<Result<Vec<Phase>, _>>()?;
                let c = build_hea(self.qubits, self.layers, &params)?;
                let cuts = match &self.cuts {
                    Some(_) => None,
                    None => Some(hea_staircase_cuts(self.qubits, self.layers)?),
                };
                (c, cuts)
            }
            Family::Random => (build_random(self.qubits, self.depth, self.seed)?, None),
            Family::Blocks => {
                let split = self.split.unwrap_or(self.qubits / 2 + self.shared);
                let (c, cuts) =
                    random_two_block(self.qubits, split, self.shared, self.depth, self.seed)?;
                (c, Some(cuts))
            }
        };
        let cuts = match (&self.cuts, implied) {
            (Some(explicit), _) => explicit.clone(),
            (None, Some(cuts)) => cuts,
            (None, None) => {
                return Err(CutError::NoSplit(
                    "this family needs an explicit cut list".into(),
                ))
            }
        };
        let obs = match &self.observable {
            Some(s) => parse_observable(s, self.qubits)?,
            None => (0..self.qubits).map(|q| (q, Pauli::Z)).collect(),
        };
        Ok((c, cuts, obs))
    }
}

#[derive(Clone, Debug)]
pub struct WirecutReport {
    pub label: String,
    pub backend: String,
    pub workers: usize,
    pub qubits: usize,
    pub cuts: usize,
    pub instances: usize,
    pub distinct_upstream: usize,
    pub distinct_downstream: usize,
    pub accounting: Accounting,
    pub expectation: f64,
    /// Expectation of the uncut circuit, when it is small enough to
    /// simulate directly.
    pub direct: Option<f64>,
    pub wall: Duration,
    pub timings: StageTimings,
}

pub const CSV_HEADER: &str =
    "workload,backend,workers,qubits,cuts,instances,hits,misses,unique,extra,simulations,expectation,wall_time";

impl WirecutReport {
    pub fn csv_row(&self) -> String {
        let a = &self.accounting;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.12},{:.6}",
            self.label,
            self.backend,
            self.workers,
            self.qubits,
            self.cuts,
            self.instances,
            a.hits,
            a.misses,
            a.inserted,
            a.extra,
            a.simulations,
            self.expectation,
            self.wall.as_secs_f64()
        )
    }

    pub fn summary(&self) -> String {
        let a = &self.accounting;
        let mut s = String::new();
        let _ = writeln!(s, "workload      {}", self.label);
        let _ = writeln!(
            s,
            "backend       {} ({} workers)",
            self.backend, self.workers
        );
        let _ = writeln!(
            s,
            "cuts          {} on {} qubits: {} instances, {} + {} distinct subcircuits",
            self.cuts,
            self.qubits,
            self.instances,
            self.distinct_upstream,
            self.distinct_downstream
        );
        let _ = writeln!(
            s,
            "cache         hits {}  misses {}  entries {}  extra {}  simulations {}  hit rate {:.2}%",
            a.hits,
            a.misses,
            a.inserted,
            a.extra,
            a.simulations,
            100.0 * a.hit_rate()
        );
        let _ = write!(s, "expectation   {:.12}", self.expectation);
        if let Some(d) = self.direct {
            let _ = write!(
                s,
                "  (uncut {:.12}, |diff| {:.2e})",
                d,
                (d - self.expectation).abs()
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "wall time     {:.3} s", self.wall.as_secs_f64());
        s
    }
}

/// Every instance of [`instances`], reordered so that the first request for
/// each distinct subcircuit comes before any repeat (stable otherwise).
/// Workers taking requests in this order rarely compute the same subcircuit
/// at the same time.
pub fn dispatch_order(terms: &[ReconstructionTerm]) -> Vec<(usize, Role)> {
    let mut seen: HashMap<(Role, Vec<u8>), usize> = HashMap::new();
    let mut ranked: Vec<(usize, (usize, Role))> = instances(terms)
        .into_iter()
        .map(|(t, role)| {
            let code = match role {
                Role::Upstream => super::upstream_code(&terms[t]),
                Role::Downstream => super::downstream_code(&terms[t]),
            };
            let n = seen.entry((role, code)).or_insert(0);
            *n += 1;
            (*n, (t, role))
        })
        .collect();
    ranked.sort_by_key(|&(rank, _)| rank);
    ranked.into_iter().map(|(_, r)| r).collect()
}

/// Runs every one of the `2·8^k` instances through `exec` on `workers`
/// threads and reconstructs `observable`.
pub fn run_wirecut(
    c: &Circuit,
    cuts: &[CutSpec],
    observable: &[(usize, Pauli)],
    exec: &Executor,
    workers: usize,
) -> Result<WirecutReport, CutError> {
    let start = Instant::now();
    let (fp, terms) = cut_wires(c, cuts)?;
    let subs = enumerate_subcircuits(&fp, &terms);
    let mut circuit_of: HashMap<(Role, Vec<u8>), &Circuit> = HashMap::new();
    for s in &subs {
        circuit_of.insert((s.role, s.variant.clone()), &s.circuit);
    }
    let requests = dispatch_order(&terms);
    let workers = workers.max(1);
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let run_one = |t: usize, role: Role| {
        let term = &terms[t];
        let code = match role {
            Role::Upstream => super::upstream_code(term),
            Role::Downstream => super::downstream_code(term),
        };
        let circuit = match circuit_of.get(&(role, code.clone())) {
            Some(c) => (*c).clone(),
            None => variant_circuit(&fp, role, &code),
        };
        let (sv, _) = exec
            .statevector(&circuit)
            .map_err(|e| CutError::MissingResult(format!("{role} {code:?}: {e}")))?;
        let v = fragment_value(&fp, role, term, observable, &sv)?;
        Ok::<_, CutError>((result_key(term, role), v))
    };
    // Workers pull from one shared queue in dispatch order.
    let results: Vec<Result<_, CutError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    while !failed.load(Ordering::Relaxed) {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(&(t, role)) = requests.get(i) else {
                            break;
                        };
                        let r = run_one(t, role);
                        if r.is_err() {
                            failed.store(true, Ordering::Relaxed);
                        }
                        out.push(r);
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("wirecut worker panicked"))
            .collect()
    });
    let mut values = HashMap::new();
    for r in results {
        let (k, v) = r?;
        values.insert(k, v);
    }
    exec.flush()
        .map_err(|e| CutError::MissingResult(format!("flush: {e}")))?;
    let expectation = reconstruct_expectation(&terms, &values)?;
    let wall = start.elapsed();
    let direct = if c.n_qubits() <= MAX_QUBITS {
        Some(expectation_pauli(&simulate(c)?, observable)?)
    } else {
        None
    };
    let up = subs.iter().filter(|s| s.role == Role::Upstream).count();
    Ok(WirecutReport {
        label: c.label().unwrap_or("circuit").to_string(),
        backend: exec
            .store()
            .map(|s| s.backend())
            .unwrap_or("none")
            .to_string(),
        workers,
        qubits: c.n_qubits(),
        cuts: cuts.len(),
        instances: requests.len(),
        distinct_upstream: up,
        distinct_downstream: subs.len() - up,
        accounting: exec.accounting(),
        expectation,
        direct,
        wall,
        timings: exec.timings(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::store::MemoryStore;

    #[test]
    fn staircase_positions() {
        // 8 qubits: a layer is 8 RY then 7 CX.
        let cuts = hea_staircase_cuts(8, 2).unwrap();
        assert_eq!(
            cuts,
            vec![
                CutSpec {
                    qubit: 3,
                    position: 10
                },
                CutSpec {
                    qubit: 2,
                    position: 24
                }
            ]
        );
        assert!(hea_staircase_cuts(8, 5).is_err());
    }

    #[test]
    fn manifest_parsing() {
        let m = Manifest::parse("family = blocks # comment\nqubits=6\nshared = 2\ncuts = auto\n")
            .unwrap();
        assert_eq!((m.family, m.qubits, m.shared), (Family::Blocks, 6, 2));
        let m = Manifest::parse("family = random\ncuts = 1@3, 0@7").unwrap();
        assert_eq!(m.cuts.unwrap().len(), 2);
        let e = Manifest::parse("qubits = 8\nbogus\n").unwrap_err();
        assert!(e.starts_with("line 2"), "{e}");
    }

    #[test]
    fn cached_run_matches_uncached() {
        let m = Manifest::parse("family = hea\nqubits = 6\nlayers = 2\nseed = 3").unwrap();
        let (c, cuts, obs) = m.build().unwrap();
        let plain = run_wirecut(&c, &cuts, &obs, &Executor::uncached(), 1).unwrap();
        let cached = run_wirecut(
            &c,
            &cuts,
            &obs,
            &Executor::cached(Arc::new(MemoryStore::new())),
            2,
        )
        .unwrap();
        assert_eq!(plain.accounting.simulations, 128);
        assert_eq!(plain.accounting.hits, 0);
        assert!((plain.expectation - cached.expectation).abs() < 1e-9);
        assert!((plain.expectation - plain.direct.unwrap()).abs() < 1e-9);
        let a = cached.accounting;
        assert_eq!(a.hits + a.inserted + a.extra, a.requests);
        assert!(a.simulations < 128);
    }
}
