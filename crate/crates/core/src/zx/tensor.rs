//! Dense linear-map evaluation of small diagrams, used as a test oracle.

use num_complex::Complex64;

use super::graph::{EdgeType, VertexKind, ZxGraph};
use super::ZxError;

/// Largest number of boundary legs accepted by [`zx_to_tensor`].
pub const MAX_BOUNDARIES: usize = 12;
/// Largest intermediate factor (in variables) the contraction may build.
pub const MAX_FACTOR_VARS: usize = 22;

/// Dense matrix with `2^#outputs` rows and `2^#inputs` columns. Row `r` has
/// output `k` in bit `k` of `r`; likewise for columns and inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize) -> LinearMap {
        LinearMap {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> LinearMap {
        let mut m = LinearMap::new(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Maximum entrywise distance between the two maps after scaling both to
    /// unit Frobenius norm and aligning their global phase. `None` when the
    /// shapes differ or exactly one of them is zero.
    pub fn distance_up_to_scalar(&self, other: &LinearMap) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 || nb == 0.0 {
            return (na == nb).then_some(0.0);
        }
        // Phase aligning `other` to `self`: arg of <self, other>.
        let inner: Complex64 = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let align = if inner.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            inner.conj() / inner.norm()
        };
        let dist = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a / na - b * align / nb).norm())
            .fold(0.0, f64::max);
        Some(dist)
    }

    pub fn approx_eq_up_to_scalar(&self, other: &LinearMap, tol: f64) -> bool {
        self.distance_up_to_scalar(other).is_some_and(|d| d <= tol)
    }
}

#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    table: Vec<Complex64>,
}

impl Factor {
    fn scalar(value: Complex64) -> Factor {
        Factor {
            vars: Vec::new(),
            table: vec![value],
        }
    }

    /// Entry for a full assignment given as a lookup `var -> bit`.
    fn index_of(&self, bit: impl Fn(usize) -> usize) -> usize {
        self.vars
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (bit(v) << i))
    }
}

fn product(factors: &[Factor], vars: &[usize]) -> Factor {
    let mut table = vec![Complex64::new(1.0, 0.0); 1 << vars.len()];
    for f in factors {
        let pos: Vec<usize> = f
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("var present"))
            .collect();
        for (idx, entry) in table.iter_mut().enumerate() {
            let fi = pos
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &p)| acc | (((idx >> p) & 1) << i));
            *entry *= f.table[fi];
        }
    }
    Factor {
        vars: vars.to_vec(),
        table,
    }
}

fn sum_out(f: &Factor, var: usize) -> Factor {
    let p = f.vars.binary_search(&var).expect("var present");
    let vars: Vec<usize> = f.vars.iter().copied().filter(|&v| v != var).collect();
    let mut table = vec![Complex64::new(0.0, 0.0); 1 << vars.len()];
    for (idx, &val) in f.table.iter().enumerate() {
        let low = idx & ((1 << p) - 1);
        let high = (idx >> (p + 1)) << p;
        table[low | high] += val;
    }
    Factor { vars, table }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Contracts the diagram into a dense matrix (up to an unspecified nonzero
/// scalar convention identical for all graphs).
///
/// X spiders are read as Z spiders with their incident edges toggled. Each Z
/// spider and each boundary becomes one bit variable; simple edges merge
/// variables, Hadamard edges contribute `(−1)^{ab}/√2`, phases contribute
/// `[1, e^{iα}]`. Interior variables are summed out greedily, smallest
/// resulting factor first.
pub fn zx_to_tensor(g: &ZxGraph) -> Result<LinearMap, ZxError> {
    let n_boundary = g.inputs().len() + g.outputs().len();
    if n_boundary > MAX_BOUNDARIES {
        return Err(ZxError::TooLarge(format!(
            "{n_boundary} boundaries exceed the limit of {MAX_BOUNDARIES}"
        )));
    }
    let n = g.next_id();
    let mut parent: Vec<usize> = (0..n).collect();
    let eff = |u: usize, v: usize, et: EdgeType| {
        let flips = [u, v]
            .iter()
            .filter(|&&w| g.kind(w) == VertexKind::X)
            .count();
        if flips % 2 == 1 {
            et.toggled()
        } else {
            et
        }
    };
    for (u, v, et) in g.edges() {
        if eff(u, v, et) == EdgeType::Simple {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut factors: Vec<Factor> = Vec::new();
    for v in g.vertices() {
        let p = g.phase(v);
        if !p.is_zero() {
            let r = find(&mut parent, v);
            factors.push(Factor {
                vars: vec![r],
                table: vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::from_polar(1.0, p.radians()),
                ],
            });
        }
    }
    for (u, v, et) in g.edges() {
        if eff(u, v, et) != EdgeType::Hadamard {
            continue;
        }
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            factors.push(Factor {
                vars: vec![a],
                table: vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            });
        } else {
            let (a, b) = (a.min(b), a.max(b));
            factors.push(Factor {
                vars: vec![a, b],
                table: vec![
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(h, 0.0),
                    Complex64::new(-h, 0.0),
                ],
            });
        }
    }

    let boundary: Vec<usize> = g.inputs().iter().chain(g.outputs()).copied().collect();
    let boundary_classes: std::collections::BTreeSet<usize> =
        boundary.iter().map(|&b| find(&mut parent, b)).collect();
    let mut interior: std::collections::BTreeSet<usize> = g
        .vertices()
        .map(|v| find(&mut parent, v))
        .filter(|r| !boundary_classes.contains(r))
        .collect();

    while !interior.is_empty() {
        // Pick the variable whose elimination builds the smallest factor.
        let mut best: Option<(usize, usize)> = None;
        for &var in &interior {
            let mut scope: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&var))
                .flat_map(|f| f.vars.iter().copied())
                .collect();
            scope.sort_unstable();
            scope.dedup();
            if best.is_none_or(|(size, _)| scope.len() < size) {
                best = Some((scope.len(), var));
            }
        }
        let (size, var) = best.expect("nonempty");
        if size > MAX_FACTOR_VARS {
            return Err(ZxError::TooLarge(format!(
                "contraction needs a factor over {size} variables"
            )));
        }
        interior.remove(&var);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        let mut scope: Vec<usize> = touching
            .iter()
            .flat_map(|f| f.vars.iter().copied())
            .collect();
        scope.sort_unstable();
        scope.dedup();
        let merged = if touching.is_empty() {
            // Unconstrained variable: contributes a factor of 2.
            Factor::scalar(Complex64::new(2.0, 0.0))
        } else {
            sum_out(&product(&touching, &scope), var)
        };
        factors.push(merged);
    }

    let vars: Vec<usize> = boundary_classes.iter().copied().collect();
    if vars.len() > MAX_FACTOR_VARS {
        return Err(ZxError::TooLarge("too many boundary classes".into()));
    }
    let total = product(&factors, &vars);

    let n_in = g.inputs().len();
    let n_out = g.outputs().len();
    let in_class: Vec<usize> = g.inputs().iter().map(|&b| find(&mut parent, b)).collect();
    let out_class: Vec<usize> = g.outputs().iter().map(|&b| find(&mut parent, b)).collect();
    let mut m = LinearMap::new(1 << n_out, 1 << n_in);
    let mut assignment = vec![usize::MAX; n];
    for r in 0..(1usize << n_out) {
        'col: for c in 0..(1usize << n_in) {
            for &cls in &vars {
                assignment[cls] = usize::MAX;
            }
            let legs = out_class
                .iter()
                .enumerate()
                .map(|(k, &cls)| (cls, (r >> k) & 1))
                .chain(
                    in_class
                        .iter()
                        .enumerate()
                        .map(|(k, &cls)| (cls, (c >> k) & 1)),
                );
            for (cls, bit) in legs {
                if assignment[cls] == usize::MAX {
                    assignment[cls] = bit;
                } else if assignment[cls] != bit {
                    continue 'col;
                }
            }
            let idx = total.index_of(|v| assignment[v]);
            m.entries[r * m.cols + c] = total.table[idx];
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate, Phase};
    use crate::zx::circuit_to_zx;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_z_spider_is_identity() {
        let mut g = ZxGraph::new();
        let i = g.add_input();
        let z = g.add_vertex(VertexKind::Z, Phase::ZERO);
        let o = g.add_output();
        g.add_edge(i, z, EdgeType::Simple);
        g.add_edge(z, o, EdgeType::Simple);
        let m = zx_to_tensor(&g).unwrap();
        assert!(m.approx_eq_up_to_scalar(&LinearMap::identity(2), 1e-12));
    }

    #[test]
    fn hadamard_wire_is_hadamard() {
        let mut g = ZxGraph::new();
        let i = g.add_input();
        let o = g.add_output();
        g.add_edge(i, o, EdgeType::Hadamard);
        let m = zx_to_tensor(&g).unwrap();
        let h = LinearMap {
            rows: 2,
            cols: 2,
            entries: vec![c(1.0), c(1.0), c(1.0), c(-1.0)],
        };
        assert!(m.approx_eq_up_to_scalar(&h, 1e-12));
    }

    #[test]
    fn cnot_translation_is_cnot() {
        let g = circuit_to_zx(&Circuit::from_gates(2, [Gate::cx(0, 1)]).unwrap());
        let m = zx_to_tensor(&g).unwrap();
        // Control is qubit 0 (bit 0). |c t> -> |c, t xor c>.
        let mut cx = LinearMap::new(4, 4);
        for col in 0..4usize {
            let row = col ^ ((col & 1) << 1);
            cx.entries[row * 4 + col] = c(1.0);
        }
        assert!(m.approx_eq_up_to_scalar(&cx, 1e-12), "{m:?}");
    }

    #[test]
    fn phases_distinguish_maps() {
        let t = circuit_to_zx(&Circuit::from_gates(1, [Gate::t(0)]).unwrap());
        let tdg = circuit_to_zx(&Circuit::from_gates(1, [Gate::tdg(0)]).unwrap());
        let (a, b) = (zx_to_tensor(&t).unwrap(), zx_to_tensor(&tdg).unwrap());
        assert!(!a.approx_eq_up_to_scalar(&b, 1e-6));
    }

    #[test]
    fn global_phase_is_ignored() {
        let a = LinearMap::identity(2);
        let mut b = LinearMap::identity(2);
        for z in &mut b.entries {
            *z *= Complex64::from_polar(3.0, 1.1);
        }
        assert!(a.approx_eq_up_to_scalar(&b, 1e-12));
    }

    #[test]
    fn boundary_limit_is_enforced() {
        let g = circuit_to_zx(&Circuit::new(7).unwrap());
        assert!(matches!(zx_to_tensor(&g), Err(ZxError::TooLarge(_))));
    }
}
