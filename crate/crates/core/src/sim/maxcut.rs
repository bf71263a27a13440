//! Exact QAOA Max-Cut energies for registers beyond [`super::MAX_QUBITS`].
//!
//! The QAOA state `∏ U_B(β) U_C(γ) H^{⊗n}|0>` is invariant under flipping
//! every qubit, so only the half of the amplitudes with the top qubit clear
//! is stored. The cost layer is diagonal and depends on the basis state only
//! through its cut value; the mixer is applied qubit by qubit in cache-sized
//! tiles. The result agrees with simulating [`build_qaoa_maxcut`] and calling
//! [`super::maxcut_energy`] to rounding error.
//!
//! [`build_qaoa_maxcut`]: crate::circuit::build_qaoa_maxcut

use std::sync::Mutex;

use num_complex::Complex64;

use super::SimError;
use crate::circuit::{MaxCutGraph, Phase};

/// Largest graph accepted (`2^(n−1)` amplitudes are held in memory).
pub const MAX_QAOA_VERTICES: usize = 26;

const BLOCK_BITS: usize = 14;

/// Precomputed cut table for repeated energy evaluations on one graph.
pub struct MaxCutQaoa {
    n: usize,
    n_edges: usize,
    cuts: Vec<u8>,
    // Reused state buffer; a concurrent caller that finds it busy allocates.
    scratch: Mutex<Vec<Complex64>>,
}

impl MaxCutQaoa {
    pub fn new(graph: &MaxCutGraph) -> Result<MaxCutQaoa, SimError> {
        let n = graph.n_vertices();
        if !(2..=MAX_QAOA_VERTICES).contains(&n) {
            return Err(SimError::TooManyQubits {
                n_qubits: n,
                max: MAX_QAOA_VERTICES,
            });
        }
        if graph.edges().len() > u8::MAX as usize {
            return Err(SimError::Payload("more than 255 edges".into()));
        }
        let mut adj = vec![0usize; n];
        for &(a, b) in graph.edges() {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        // Each cut edge is counted once from its endpoint on the 1 side.
        let cuts = (0..1usize << (n - 1))
            .map(|x| {
                let mut c = 0u32;
                let mut ones = x;
                while ones != 0 {
                    let v = ones.trailing_zeros() as usize;
                    c += (adj[v] & !x).count_ones();
                    ones &= ones - 1;
                }
                c as u8
            })
            .collect();
        Ok(MaxCutQaoa {
            n,
            n_edges: graph.edges().len(),
            cuts,
            scratch: Mutex::new(Vec::new()),
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Expected cut size of the depth-`p` QAOA state with the given
    /// (already quantized) angles. The cost layer applies `RZZ(2γ)` on every
    /// edge and the mixer `RX(2β)` on every qubit, with `2γ`, `2β` reduced
    /// mod `2π` exactly as in the circuit.
    ///
    /// Layers are first put through [`reduced_layers`], so parameter vectors
    /// that differ only by removable layers give bit-identical energies.
    pub fn energy(&self, betas: &[Phase], gammas: &[Phase]) -> Result<f64, SimError> {
        if betas.len() != gammas.len() {
            return Err(SimError::Payload(
                "betas and gammas differ in length".into(),
            ));
        }
        let layers = reduced_layers(betas, gammas);
        let half = 1usize << (self.n - 1);
        let amp0 = (1.0 / (1u64 << self.n) as f64).sqrt();
        let mut guard = self.scratch.try_lock().ok();
        let mut own = Vec::new();
        let psi = match guard.as_deref_mut() {
            Some(buf) => buf,
            None => &mut own,
        };
        psi.clear();
        psi.resize(half, Complex64::new(amp0, 0.0));
        for (cost, mixer) in layers {
            let theta_c = cost.radians();
            // exp(−iθ/2 Σ Z_i Z_j) with Σ Z_i Z_j = |E| − 2·cut.
            let phases: Vec<Complex64> = (0..=self.n_edges)
                .map(|cut| {
                    let zz = self.n_edges as f64 - 2.0 * cut as f64;
                    Complex64::from_polar(1.0, -theta_c / 2.0 * zz)
                })
                .collect();
            let theta_b = mixer.radians();
            let (c, s) = ((theta_b / 2.0).cos(), (theta_b / 2.0).sin());
            self.layer(psi, &phases, c, s);
        }
        let e: f64 = psi
            .iter()
            .zip(&self.cuts)
            .map(|(a, &cut)| a.norm_sqr() * cut as f64)
            .sum();
        Ok(2.0 * e)
    }

    fn layer(&self, psi: &mut [Complex64], phases: &[Complex64], c: f64, s: f64) {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
                // SAFETY: the required CPU features were just detected.
                unsafe { self.layer_avx2(psi, phases, c, s) };
                return;
            }
        }
        self.layer_generic(psi, phases, c, s);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2,fma")]
    unsafe fn layer_avx2(&self, psi: &mut [Complex64], phases: &[Complex64], c: f64, s: f64) {
        self.layer_generic(psi, phases, c, s);
    }

    #[inline(always)]
    fn layer_generic(&self, psi: &mut [Complex64], phases: &[Complex64], c: f64, s: f64) {
        let half_bits = self.n - 1;
        let block_bits = BLOCK_BITS.min(half_bits);
        let block = 1usize << block_bits;

        // Cost phases and the mixer on every qubit inside one block while the
        // block is cache resident.
        for (chunk, cuts) in psi.chunks_mut(block).zip(self.cuts.chunks(block)) {
            for (a, &cut) in chunk.iter_mut().zip(cuts) {
                *a *= phases[cut as usize];
            }
            if block_bits < 3 {
                for q in 0..block_bits {
                    let bit = 1usize << q;
                    for pair in chunk.chunks_mut(bit << 1) {
                        let (lo, hi) = pair.split_at_mut(bit);
                        rx_runs(lo, hi, c, s);
                    }
                }
                continue;
            }
            for oct in chunk.chunks_exact_mut(8) {
                rx_low3(oct, c, s);
            }
            for q in (3..block_bits).step_by(3) {
                rx_group(chunk, q, (q + 3).min(block_bits), c, s);
            }
        }

        // Qubits above the block, three per sweep over the whole state.
        for q in (block_bits..half_bits).step_by(3) {
            rx_group(psi, q, (q + 3).min(half_bits), c, s);
        }

        // Top qubit: its partner is the bitwise complement, stored at
        // `x ^ (half − 1)`.
        let mask = psi.len() - 1;
        for x in 0..psi.len() / 2 {
            let y = x ^ mask;
            let (a, b) = (psi[x], psi[y]);
            psi[x] = rx0(a, b, c, s);
            psi[y] = rx0(b, a, c, s);
        }
    }
}

/// Mixer on qubits `lo..hi` (at most three, all `≥ 3`) of `psi`, gathering
/// the `2^(hi−lo)` partner runs of eight amplitudes into registers.
#[inline(always)]
fn rx_group(psi: &mut [Complex64], lo: usize, hi: usize, c: f64, s: f64) {
    let width = hi - lo;
    let span = ((1usize << width) - 1) << lo;
    let n_members = 1usize << width;
    let mut a = [[Complex64::new(0.0, 0.0); 8]; 8];
    for base in (0..psi.len()).step_by(8) {
        if base & span != 0 {
            continue;
        }
        for (m, run) in a.iter_mut().enumerate().take(n_members) {
            let at = base + (m << lo);
            run.copy_from_slice(&psi[at..at + 8]);
        }
        for g in 0..width {
            let gb = 1usize << g;
            for m in 0..n_members {
                if m & gb == 0 {
                    let (x, y) = a.split_at_mut(m | gb);
                    rx_runs(&mut x[m], &mut y[0], c, s);
                }
            }
        }
        for (m, run) in a.iter().enumerate().take(n_members) {
            let at = base + (m << lo);
            psi[at..at + 8].copy_from_slice(run);
        }
    }
}

/// `(2γ_l, 2β_l)` angle pairs of an equivalent, possibly shorter layer
/// sequence for the purpose of measuring in the computational basis.
///
/// Cost layers with angle 0 and mixers with angle 0 or `π` (the latter is
/// `X` on every qubit, which commutes with both layer types and fixes
/// `|+…+>`) are dropped, neighbouring layers of one type are merged, a mixer
/// before the first cost layer is dropped (it only phases `|+…+>`) and so is
/// a cost layer after the last mixer (it is diagonal). Repeats until stable.
pub fn reduced_layers(betas: &[Phase], gammas: &[Phase]) -> Vec<(Phase, Phase)> {
    // (is_cost, angle)
    let mut ops: Vec<(bool, Phase)> = betas
        .iter()
        .zip(gammas)
        .flat_map(|(b, g)| [(true, g.scaled(2)), (false, b.scaled(2))])
        .collect();
    loop {
        let before = ops.len();
        ops.retain(|&(cost, a)| !(a.is_zero() || (!cost && a == Phase::PI)));
        let mut merged: Vec<(bool, Phase)> = Vec::with_capacity(ops.len());
        for op in ops {
            match merged.last_mut() {
                Some(last) if last.0 == op.0 => last.1 += op.1,
                _ => merged.push(op),
            }
        }
        ops = merged;
        while ops.first().is_some_and(|o| !o.0) {
            ops.remove(0);
        }
        while ops.last().is_some_and(|o| o.0) {
            ops.pop();
        }
        if ops.len() == before {
            break;
        }
    }
    ops.chunks_exact(2).map(|w| (w[0].1, w[1].1)).collect()
}

#[inline(always)]
fn rx0(a: Complex64, b: Complex64, c: f64, s: f64) -> Complex64 {
    // c·a − i·s·b
    Complex64::new(c * a.re + s * b.im, c * a.im - s * b.re)
}

/// Mixer on qubits 0, 1 and 2 of eight consecutive amplitudes.
#[inline(always)]
fn rx_low3(v: &mut [Complex64], c: f64, s: f64) {
    let mut a = [Complex64::new(0.0, 0.0); 8];
    a.copy_from_slice(v);
    for bit in [1usize, 2, 4] {
        for i in 0..8 {
            if i & bit == 0 {
                let (x, y) = (a[i], a[i | bit]);
                a[i] = rx0(x, y, c, s);
                a[i | bit] = rx0(y, x, c, s);
            }
        }
    }
    v.copy_from_slice(&a);
}

#[inline(always)]
fn rx_runs(lo: &mut [Complex64], hi: &mut [Complex64], c: f64, s: f64) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = rx0(x, y, c, s);
        *b = rx0(y, x, c, s);
    }
}
