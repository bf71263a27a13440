use num_complex::Complex64;

use super::SimError;
use crate::circuit::{Circuit, Gate, GateKind, MaxCutGraph, Phase};

/// Largest register [`simulate`] accepts.
pub const MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Amplitudes in little-endian order: qubit 0 is the least significant bit
/// of the basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

pub type Matrix2 = [[Complex64; 2]; 2];

/// 2×2 matrix of a one-qubit gate kind.
pub fn one_qubit_matrix(kind: GateKind, param: Option<Phase>) -> Option<Matrix2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = param.map(|p| p.radians()).unwrap_or(0.0);
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let i = Complex64::i();
    let m = match kind {
        GateKind::H => [[ONE * h, ONE * h], [ONE * h, -ONE * h]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -i], [i, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::S => [[ONE, ZERO], [ZERO, i]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -i]],
        GateKind::T => [
            [ONE, ZERO],
            [
                ZERO,
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            ],
        ],
        GateKind::Tdg => [
            [ONE, ZERO],
            [
                ZERO,
                Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            ],
        ],
        GateKind::RX => [[ONE * c, -i * s], [-i * s, ONE * c]],
        GateKind::RY => [[ONE * c, -ONE * s], [ONE * s, ONE * c]],
        GateKind::RZ => [
            [Complex64::from_polar(1.0, -t / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, t / 2.0)],
        ],
        _ => return None,
    };
    Some(m)
}

/// 4×4 matrix of a gate in the basis `|q1 q0>` indexed `q0 + 2·q1`, where
/// `q0` is the gate's first operand.
pub fn gate_matrix(gate: &Gate) -> Vec<Vec<Complex64>> {
    if let Some(m) = one_qubit_matrix(gate.kind(), gate.param()) {
        return m.iter().map(|r| r.to_vec()).collect();
    }
    let mut m = vec![vec![ZERO; 4]; 4];
    let t = gate.param().map(|p| p.radians()).unwrap_or(0.0);
    for col in 0..4usize {
        let (a, b) = (col & 1, col >> 1);
        match gate.kind() {
            GateKind::CX => m[a | ((b ^ a) << 1)][col] = ONE,
            GateKind::CZ => m[col][col] = if a & b == 1 { -ONE } else { ONE },
            GateKind::SWAP => m[b | (a << 1)][col] = ONE,
            GateKind::RZZ => {
                let sign = if a == b { -1.0 } else { 1.0 };
                m[col][col] = Complex64::from_polar(1.0, sign * t / 2.0);
            }
            _ => unreachable!("one-qubit kinds handled above"),
        }
    }
    m
}

impl Statevector {
    /// `|0…0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Statevector {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Statevector { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Statevector, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::Payload(format!(
                "length {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Statevector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, gate: &Gate) {
        let qs = gate.qubits();
        let theta = gate.param().map(|p| p.radians()).unwrap_or(0.0);
        match gate.kind() {
            GateKind::Z => self.phase_one(qs[0], -ONE),
            GateKind::S => self.phase_one(qs[0], Complex64::i()),
            GateKind::Sdg => self.phase_one(qs[0], -Complex64::i()),
            GateKind::T => self.phase_one(
                qs[0],
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            ),
            GateKind::Tdg => self.phase_one(
                qs[0],
                Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            ),
            GateKind::RZ => self.diag_one(
                qs[0],
                Complex64::from_polar(1.0, -theta / 2.0),
                Complex64::from_polar(1.0, theta / 2.0),
            ),
            GateKind::X => self.swap_pairs(qs[0]),
            GateKind::CX => self.cx(qs[0], qs[1]),
            GateKind::CZ => self.cz(qs[0], qs[1]),
            GateKind::SWAP => self.swap(qs[0], qs[1]),
            GateKind::RZZ => self.rzz(qs[0], qs[1], theta),
            kind => {
                let m = one_qubit_matrix(kind, gate.param()).expect("one-qubit kind");
                self.apply_matrix(qs[0], &m);
            }
        }
    }

    /// General one-qubit update over all `(i, i | bit)` pairs.
    pub fn apply_matrix(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn phase_one(&mut self, q: usize, phase: Complex64) {
        let bit = 1usize << q;
        for base in (bit..self.amps.len()).step_by(bit << 1) {
            for a in &mut self.amps[base..base + bit] {
                *a *= phase;
            }
        }
    }

    fn diag_one(&mut self, q: usize, d0: Complex64, d1: Complex64) {
        let bit = 1usize << q;
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for a in &mut self.amps[base..base + bit] {
                *a *= d0;
            }
            for a in &mut self.amps[base + bit..base + 2 * bit] {
                *a *= d1;
            }
        }
    }

    fn swap_pairs(&mut self, q: usize) {
        let bit = 1usize << q;
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                self.amps.swap(i, i | bit);
            }
        }
    }

    fn cx(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, (i ^ ab) | bb);
            }
        }
    }

    /// `exp(−iθ/2 · Z⊗Z)`.
    fn rzz(&mut self, a: usize, b: usize, theta: f64) {
        let same = Complex64::from_polar(1.0, -theta / 2.0);
        let diff = Complex64::from_polar(1.0, theta / 2.0);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((i >> a) ^ (i >> b)) & 1;
            *amp *= if parity == 0 { same } else { diff };
        }
    }

    /// Probability of each basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Little-endian IEEE-754 doubles, interleaved `(re, im)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Statevector, SimError> {
        if !bytes.len().is_multiple_of(16) {
            return Err(SimError::Payload(format!(
                "{} bytes is not a whole number of amplitudes",
                bytes.len()
            )));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Statevector::from_amplitudes(amps)
    }
}

/// Payload size in bytes of an `n`-qubit statevector.
pub fn full_payload_len(n_qubits: usize) -> usize {
    16usize << n_qubits
}

/// Runs `c` on `|0…0>`.
pub fn simulate(c: &Circuit) -> Result<Statevector, SimError> {
    if c.n_qubits() > MAX_QUBITS {
        return Err(SimError::TooManyQubits {
            n_qubits: c.n_qubits(),
            max: MAX_QUBITS,
        });
    }
    let mut sv = Statevector::zero(c.n_qubits());
    for g in c.gates() {
        sv.apply(g);
    }
    Ok(sv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `<sv| P |sv>` for the tensor product of `paulis` (qubits not listed are
/// identity). Repeated qubits are rejected.
pub fn expectation_pauli(sv: &Statevector, paulis: &[(usize, Pauli)]) -> Result<f64, SimError> {
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    let mut n_y = 0u32;
    let mut seen = 0usize;
    for &(q, p) in paulis {
        if q >= sv.n_qubits {
            return Err(SimError::QubitOutOfRange(q));
        }
        if seen & (1 << q) != 0 {
            return Err(SimError::QubitOutOfRange(q));
        }
        seen |= 1 << q;
        match p {
            Pauli::I => {}
            Pauli::X => xmask |= 1 << q,
            Pauli::Z => zmask |= 1 << q,
            Pauli::Y => {
                xmask |= 1 << q;
                zmask |= 1 << q;
                n_y += 1;
            }
        }
    }
    // P|x> = i^{#Y} (−1)^{|x ∧ zmask|} |x ⊕ xmask>.
    let amps = &sv.amps;
    let mut acc = ZERO;
    for (x, &a) in amps.iter().enumerate() {
        let term = amps[x ^ xmask].conj() * a;
        if (x & zmask).count_ones().is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let phase = match n_y % 4 {
        0 => ONE,
        1 => Complex64::i(),
        2 => -ONE,
        _ => -Complex64::i(),
    };
    Ok((acc * phase).re)
}

/// `Σ_edges (1 − <Z_i Z_j>) / 2`, the expected number of cut edges.
pub fn maxcut_energy(sv: &Statevector, g: &MaxCutGraph) -> Result<f64, SimError> {
    if sv.n_qubits != g.n_vertices() {
        return Err(SimError::Dimension {
            state: sv.n_qubits,
            graph: g.n_vertices(),
        });
    }
    let mut e = 0.0;
    for (x, a) in sv.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p != 0.0 {
            e += p * g.cut_value(x as u64) as f64;
        }
    }
    Ok(e)
}
