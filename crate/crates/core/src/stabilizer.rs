//! Pure stabilizer states, Clifford elements and subsystem entropies.
//!
//! Pauli operators use the CHP convention: the bit pair `(x, z)` at a qubit
//! selects `I, X, Z, Y` for `(0,0), (1,0), (0,1), (1,1)`, and a phase
//! exponent `e` multiplies the tensor product by `i^e`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError, Result};
use crate::gf2::{BitMatrix, BitVec, EchelonBasis};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / WORD] >> (i % WORD)) & 1 == 1
}

#[inline]
fn put_bit(words: &mut [u64], i: usize, v: bool) {
    let m = 1u64 << (i % WORD);
    if v {
        words[i / WORD] |= m;
    } else {
        words[i / WORD] &= !m;
    }
}

/// Exponent of `i` picked up by the product `P1 · P2` of two CHP Pauli
/// strings given as packed words.
#[inline]
fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u8 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for i in 0..x1.len() {
        let (a, b, c, d) = (x1[i], z1[i], x2[i], z2[i]);
        let y1 = a & b;
        let xo1 = a & !b;
        let zo1 = !a & b;
        let y2 = c & d;
        let xo2 = c & !d;
        let zo2 = !c & d;
        plus += ((y1 & zo2) | (xo1 & y2) | (zo1 & xo2)).count_ones();
        minus += ((y1 & xo2) | (xo1 & zo2) | (zo1 & y2)).count_ones();
    }
    (plus as i64 - minus as i64).rem_euclid(4) as u8
}

/// Pauli operator `i^phase · ⊗ P_j`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub x: BitVec,
    pub z: BitVec,
    /// Exponent of `i`, in `0..4`.
    pub phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    /// Single-qubit Pauli `X`, `Y` or `Z` at `qubit`.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        let mut p = PauliString::identity(n);
        match letter {
            'X' => p.x.set(qubit, true),
            'Z' => p.z.set(qubit, true),
            'Y' => {
                p.x.set(qubit, true);
                p.z.set(qubit, true);
            }
            'I' => {}
            other => {
                return Err(LabError::Parameter(format!(
                    "unknown Pauli letter {other:?}"
                )))
            }
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn weight(&self) -> usize {
        (0..self.len())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .count()
    }

    /// Hermitian operators carry a real sign.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1` or `-1` for Hermitian operators.
    pub fn sign(&self) -> i8 {
        if self.phase == 2 {
            -1
        } else {
            1
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let g = product_phase(
            self.x.words(),
            self.z.words(),
            other.x.words(),
            other.z.words(),
        );
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        PauliString {
            x,
            z,
            phase: (self.phase + other.phase + g) % 4,
        }
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.len() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' | '_' => {}
                'X' => p.x.set(q, true),
                'Z' => p.z.set(q, true),
                'Y' => {
                    p.x.set(q, true);
                    p.z.set(q, true);
                }
                other => {
                    return Err(LabError::Parameter(format!(
                        "unknown Pauli letter {other:?}"
                    )))
                }
            }
        }
        p.phase = phase;
        Ok(p)
    }
}

/// Named gates with hard-coded tableau rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H,
    S,
    Cnot,
    Cz,
    Swap,
    X,
    Y,
    Z,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz | Gate::Swap => 2,
            _ => 1,
        }
    }
}

/// Rows of Pauli operators over `n` qubits, updated by conjugation.
#[derive(Clone, PartialEq, Eq)]
struct Tableau {
    n: usize,
    stride: usize,
    rows: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Vec<u8>,
}

impl Tableau {
    fn new(n: usize, rows: usize) -> Self {
        let stride = words_for(n);
        Tableau {
            n,
            stride,
            rows,
            x: vec![0; rows * stride],
            z: vec![0; rows * stride],
            phase: vec![0; rows],
        }
    }

    #[inline]
    fn xr(&self, r: usize) -> &[u64] {
        &self.x[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn zr(&self, r: usize) -> &[u64] {
        &self.z[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn xb(&self, r: usize, q: usize) -> bool {
        get_bit(self.xr(r), q)
    }

    #[inline]
    fn zb(&self, r: usize, q: usize) -> bool {
        get_bit(self.zr(r), q)
    }

    #[inline]
    fn set_x(&mut self, r: usize, q: usize, v: bool) {
        let s = self.stride;
        put_bit(&mut self.x[r * s..(r + 1) * s], q, v);
    }

    #[inline]
    fn set_z(&mut self, r: usize, q: usize, v: bool) {
        let s = self.stride;
        put_bit(&mut self.z[r * s..(r + 1) * s], q, v);
    }

    #[inline]
    fn flip_sign(&mut self, r: usize, cond: bool) {
        if cond {
            self.phase[r] = (self.phase[r] + 2) % 4;
        }
    }

    fn row(&self, r: usize) -> PauliString {
        PauliString {
            x: BitVec::from_words(self.n, self.xr(r).to_vec()),
            z: BitVec::from_words(self.n, self.zr(r).to_vec()),
            phase: self.phase[r],
        }
    }

    fn set_row(&mut self, r: usize, p: &PauliString) {
        let s = self.stride;
        self.x[r * s..(r + 1) * s].copy_from_slice(p.x.words());
        self.z[r * s..(r + 1) * s].copy_from_slice(p.z.words());
        self.phase[r] = p.phase;
    }

    fn apply_gate(&mut self, gate: Gate, support: &[usize]) {
        for r in 0..self.rows {
            match gate {
                Gate::H => {
                    let a = support[0];
                    let (x, z) = (self.xb(r, a), self.zb(r, a));
                    self.flip_sign(r, x && z);
                    self.set_x(r, a, z);
                    self.set_z(r, a, x);
                }
                Gate::S => {
                    let a = support[0];
                    let (x, z) = (self.xb(r, a), self.zb(r, a));
                    self.flip_sign(r, x && z);
                    self.set_z(r, a, z ^ x);
                }
                Gate::X => {
                    let a = support[0];
                    let z = self.zb(r, a);
                    self.flip_sign(r, z);
                }
                Gate::Z => {
                    let a = support[0];
                    let x = self.xb(r, a);
                    self.flip_sign(r, x);
                }
                Gate::Y => {
                    let a = support[0];
                    let (x, z) = (self.xb(r, a), self.zb(r, a));
                    self.flip_sign(r, x ^ z);
                }
                Gate::Cnot => {
                    let (a, b) = (support[0], support[1]);
                    let (xa, za, xb, zb) =
                        (self.xb(r, a), self.zb(r, a), self.xb(r, b), self.zb(r, b));
                    self.flip_sign(r, xa && zb && !(xb ^ za));
                    self.set_x(r, b, xb ^ xa);
                    self.set_z(r, a, za ^ zb);
                }
                Gate::Cz => {
                    let (a, b) = (support[0], support[1]);
                    let (xa, za, xb, zb) =
                        (self.xb(r, a), self.zb(r, a), self.xb(r, b), self.zb(r, b));
                    // H(b) CNOT(a,b) H(b), folded into one rule.
                    self.flip_sign(r, xa && xb && (za ^ zb));
                    self.set_z(r, a, za ^ xb);
                    self.set_z(r, b, zb ^ xa);
                }
                Gate::Swap => {
                    let (a, b) = (support[0], support[1]);
                    let (xa, za, xb, zb) =
                        (self.xb(r, a), self.zb(r, a), self.xb(r, b), self.zb(r, b));
                    self.set_x(r, a, xb);
                    self.set_z(r, a, zb);
                    self.set_x(r, b, xa);
                    self.set_z(r, b, za);
                }
            }
        }
    }

    fn apply_clifford(&mut self, c: &CliffordElement, support: &[usize]) {
        let m = c.m;
        let lw = words_for(m);
        let images = c.image_words();
        let mut ax = vec![0u64; lw];
        let mut az = vec![0u64; lw];
        for r in 0..self.rows {
            ax.iter_mut().for_each(|w| *w = 0);
            az.iter_mut().for_each(|w| *w = 0);
            let mut phase = 0u8;
            let mut ys = 0u8;
            for (j, &q) in support.iter().enumerate() {
                let (xq, zq) = (self.xb(r, q), self.zb(r, q));
                if xq && zq {
                    ys += 1;
                }
                if xq {
                    let (ix, iz, ip) = &images[j];
                    phase = (phase + ip + product_phase(&ax, &az, ix, iz)) % 4;
                    for w in 0..lw {
                        ax[w] ^= ix[w];
                        az[w] ^= iz[w];
                    }
                }
                if zq {
                    let (ix, iz, ip) = &images[m + j];
                    phase = (phase + ip + product_phase(&ax, &az, ix, iz)) % 4;
                    for w in 0..lw {
                        ax[w] ^= ix[w];
                        az[w] ^= iz[w];
                    }
                }
            }
            self.phase[r] = (self.phase[r] + phase + ys) % 4;
            for (j, &q) in support.iter().enumerate() {
                self.set_x(r, q, get_bit(&ax, j));
                self.set_z(r, q, get_bit(&az, j));
            }
        }
    }
}

/// Clifford unitary on `m` qubits modulo global phase.
///
/// Row `j < m` of `symplectic` is the image of `X_j`, row `m + j` the image
/// of `Z_j`; each row holds `m` x-bits followed by `m` z-bits. A set
/// `phase_bits[r]` makes the image of generator `r` negative.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordElement {
    pub m: usize,
    pub symplectic: BitMatrix,
    pub phase_bits: BitVec,
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CliffordElement(m={})", self.m)?;
        for r in 0..2 * self.m {
            let gen = if r < self.m { 'X' } else { 'Z' };
            writeln!(f, "  {gen}{} -> {}", r % self.m, self.image(r))?;
        }
        Ok(())
    }
}

/// Symplectic product of two `2m`-bit vectors laid out as `x | z`.
fn symplectic_dot(u: &BitVec, v: &BitVec, m: usize) -> bool {
    let mut acc = false;
    for j in 0..m {
        acc ^= (u.get(j) && v.get(m + j)) ^ (u.get(m + j) && v.get(j));
    }
    acc
}

fn random_in_span<R: Rng + ?Sized>(basis: &[BitVec], len: usize, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    for b in basis {
        if rng.gen::<bool>() {
            v.xor_assign(b);
        }
    }
    v
}

impl CliffordElement {
    pub fn identity(m: usize) -> Self {
        CliffordElement {
            m,
            symplectic: BitMatrix::identity(2 * m),
            phase_bits: BitVec::zeros(2 * m),
        }
    }

    /// Conjugation by a Pauli operator: the images keep their letters and
    /// pick up a sign when they anticommute with `p`.
    pub fn pauli(p: &PauliString) -> Self {
        let m = p.len();
        let mut c = CliffordElement::identity(m);
        for j in 0..m {
            c.phase_bits.set(j, p.z.get(j));
            c.phase_bits.set(m + j, p.x.get(j));
        }
        c
    }

    /// Element realised by a gate sequence on `m` qubits (first gate first).
    pub fn from_gates(m: usize, gates: &[(Gate, Vec<usize>)]) -> Result<Self> {
        let mut t = Tableau::new(m, 2 * m);
        for j in 0..m {
            t.set_x(j, j, true);
            t.set_z(m + j, j, true);
        }
        for (g, s) in gates {
            check_support(m, s, g.arity())?;
            t.apply_gate(*g, s);
        }
        Ok(CliffordElement::from_tableau(&t))
    }

    fn from_tableau(t: &Tableau) -> Self {
        let m = t.n;
        let mut sym = BitMatrix::zeros(2 * m, 2 * m);
        let mut phases = BitVec::zeros(2 * m);
        for r in 0..2 * m {
            for q in 0..m {
                sym.set(r, q, t.xb(r, q));
                sym.set(r, m + q, t.zb(r, q));
            }
            phases.set(r, t.phase[r] == 2);
        }
        CliffordElement {
            m,
            symplectic: sym,
            phase_bits: phases,
        }
    }

    /// Image of generator `r` (`X_r` for `r < m`, else `Z_{r-m}`).
    pub fn image(&self, r: usize) -> PauliString {
        let m = self.m;
        let mut p = PauliString::identity(m);
        for q in 0..m {
            p.x.set(q, self.symplectic.get(r, q));
            p.z.set(q, self.symplectic.get(r, m + q));
        }
        p.phase = if self.phase_bits.get(r) { 2 } else { 0 };
        p
    }

    fn image_words(&self) -> Vec<(Vec<u64>, Vec<u64>, u8)> {
        (0..2 * self.m)
            .map(|r| {
                let p = self.image(r);
                (p.x.words().to_vec(), p.z.words().to_vec(), p.phase)
            })
            .collect()
    }

    /// Whether the rows satisfy the canonical commutation relations.
    pub fn is_symplectic(&self) -> bool {
        let m = self.m;
        let rows: Vec<BitVec> = (0..2 * m).map(|r| self.symplectic.row(r)).collect();
        for a in 0..2 * m {
            for b in 0..2 * m {
                let expected = a != b && a % m == b % m;
                if symplectic_dot(&rows[a], &rows[b], m) != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Uniform draw from the `m`-qubit Clifford group modulo phase.
    ///
    /// Builds the images of `X_j, Z_j` one pair at a time: a uniform nonzero
    /// vector of the current symplectic subspace, a uniform partner with
    /// symplectic product one, then restriction to the complement of the pair.
    pub fn sample_uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 {
            return Err(LabError::Parameter("Clifford sampling needs m >= 1".into()));
        }
        let len = 2 * m;
        let mut basis: Vec<BitVec> = (0..len)
            .map(|i| {
                let mut v = BitVec::zeros(len);
                v.set(i, true);
                v
            })
            .collect();
        let mut sym = BitMatrix::zeros(len, len);
        for i in 0..m {
            let v = loop {
                let v = random_in_span(&basis, len, rng);
                if !v.is_zero() {
                    break v;
                }
            };
            let partner = basis
                .iter()
                .find(|b| symplectic_dot(&v, b, m))
                .cloned()
                .ok_or_else(|| LabError::Invariant("degenerate symplectic subspace".into()))?;
            let mut w = random_in_span(&basis, len, rng);
            if !symplectic_dot(&v, &w, m) {
                w.xor_assign(&partner);
            }
            sym.set_row(i, &v);
            sym.set_row(m + i, &w);

            let mut echelon = EchelonBasis::new(len);
            let mut next = Vec::with_capacity(basis.len().saturating_sub(2));
            for b in &basis {
                let mut p = b.clone();
                if symplectic_dot(b, &w, m) {
                    p.xor_assign(&v);
                }
                if symplectic_dot(b, &v, m) {
                    p.xor_assign(&w);
                }
                if echelon.insert(&p) {
                    next.push(p);
                }
            }
            basis = next;
        }
        let mut phases = BitVec::zeros(len);
        for r in 0..len {
            phases.set(r, rng.gen::<bool>());
        }
        Ok(CliffordElement {
            m,
            symplectic: sym,
            phase_bits: phases,
        })
    }
}

fn check_support(n: usize, support: &[usize], expected: usize) -> Result<()> {
    if support.len() != expected {
        return Err(LabError::Contract(format!(
            "support of size {} where {} was expected",
            support.len(),
            expected
        )));
    }
    for (i, &q) in support.iter().enumerate() {
        if q >= n {
            return Err(LabError::Contract(format!(
                "qubit {q} out of range for {n} qubits"
            )));
        }
        if support[..i].contains(&q) {
            return Err(LabError::Contract(format!("repeated qubit {q} in support")));
        }
    }
    Ok(())
}

/// Pure stabilizer state in destabilizer/stabilizer tableau form.
#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerState {
    t: Tableau,
}

impl fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl StabilizerState {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut t = Tableau::new(n, 2 * n);
        for j in 0..n {
            t.set_x(j, j, true);
            t.set_z(n + j, j, true);
        }
        StabilizerState { t }
    }

    /// State fixed by `n` independent commuting Hermitian generators on
    /// `n` qubits; destabilizers are solved for over GF(2).
    pub fn from_stabilizers(stabs: &[PauliString]) -> Result<Self> {
        let n = stabs.len();
        if stabs.iter().any(|s| s.len() != n || !s.is_hermitian()) {
            return param("need n Hermitian generators on n qubits");
        }
        // Row j pairs with a candidate d as the symplectic product <s_j, d>.
        let mut form = BitMatrix::zeros(n, 2 * n);
        for (j, s) in stabs.iter().enumerate() {
            for q in s.z.iter_ones() {
                form.set(j, q, true);
            }
            for q in s.x.iter_ones() {
                form.set(j, n + q, true);
            }
        }
        let mut destabs = Vec::with_capacity(n);
        for i in 0..n {
            let mut target = BitVec::zeros(n);
            target.set(i, true);
            let bits = form.solve(&target)?.ok_or_else(|| {
                LabError::Parameter("generators are dependent or do not commute".into())
            })?;
            let mut d = PauliString::identity(n);
            for q in bits.iter_ones() {
                if q < n {
                    d.x.set(q, true);
                } else {
                    d.z.set(q - n, true);
                }
            }
            destabs.push(d);
        }
        for i in 0..n {
            for j in i + 1..n {
                if !destabs[j].commutes_with(&destabs[i]) {
                    let mut d = destabs[j].mul(&stabs[i]);
                    d.phase = 0;
                    destabs[j] = d;
                }
            }
        }
        let mut t = Tableau::new(n, 2 * n);
        for (i, d) in destabs.iter().enumerate() {
            t.set_row(i, d);
        }
        for (i, s) in stabs.iter().enumerate() {
            t.set_row(n + i, s);
        }
        let state = StabilizerState { t };
        state.validate().map_err(|_| {
            LabError::Parameter("generators do not define a pure stabilizer state".into())
        })?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.t.n
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.t.row(self.t.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.t.row(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (0..self.n()).map(|i| self.stabilizer(i)).collect()
    }

    pub fn apply_gate(&mut self, gate: Gate, support: &[usize]) -> Result<()> {
        check_support(self.n(), support, gate.arity())?;
        self.t.apply_gate(gate, support);
        Ok(())
    }

    pub fn apply_clifford(&mut self, c: &CliffordElement, support: &[usize]) -> Result<()> {
        check_support(self.n(), support, c.m)?;
        self.t.apply_clifford(c, support);
        Ok(())
    }

    /// Checks commutation relations and symplectic independence.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let rows: Vec<PauliString> = (0..2 * n).map(|r| self.t.row(r)).collect();
        for (r, p) in rows.iter().enumerate() {
            if !p.is_hermitian() {
                return Err(LabError::Invariant(format!(
                    "generator {r} is not Hermitian"
                )));
            }
        }
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let anticommute = !rows[a].commutes_with(&rows[b]);
                let expected = a < n && b == a + n;
                if anticommute != expected {
                    return Err(LabError::Invariant(format!(
                        "generators {a} and {b} violate the commutation pattern"
                    )));
                }
            }
        }
        let mut echelon = EchelonBasis::new(2 * n);
        for p in &rows {
            let mut v = BitVec::zeros(2 * n);
            for q in p.x.iter_ones() {
                v.set(q, true);
            }
            for q in p.z.iter_ones() {
                v.set(n + q, true);
            }
            if !echelon.insert(&v) {
                return Err(LabError::Invariant("generators are dependent".into()));
            }
        }
        Ok(())
    }

    /// Entropy in bits of the reduced state on `subset`.
    pub fn subsystem_entropy(&self, subset: &[usize]) -> Result<usize> {
        let cols = GeneratorColumns::from_state(self);
        cols.entropy(subset)
    }

    /// Tableau dump, one generator per line, stabilizers first.
    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            out.push_str(&format!("S {}\n", self.stabilizer(i)));
        }
        for i in 0..n {
            out.push_str(&format!("D {}\n", self.destabilizer(i)));
        }
        out
    }

    /// Parses the format produced by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut stabs = Vec::new();
        let mut destabs = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (tag, body) = line
                .split_once(' ')
                .ok_or_else(|| LabError::Parameter(format!("malformed line {line:?}")))?;
            let p: PauliString = body.trim().parse()?;
            match tag {
                "S" => stabs.push(p),
                "D" => destabs.push(p),
                _ => return Err(LabError::Parameter(format!("unknown row tag {tag:?}"))),
            }
        }
        let n = stabs.len();
        if destabs.len() != n || stabs.iter().chain(&destabs).any(|p| p.len() != n) {
            return Err(LabError::Parameter("tableau shape mismatch".into()));
        }
        let mut t = Tableau::new(n, 2 * n);
        for (i, p) in destabs.iter().enumerate() {
            t.set_row(i, p);
        }
        for (i, p) in stabs.iter().enumerate() {
            t.set_row(n + i, p);
        }
        let s = StabilizerState { t };
        s.validate()?;
        Ok(s)
    }
}

/// Column-major view of the stabilizer generators.
///
/// Column `x_q` (resp. `z_q`) lists, over the generators, whether the
/// generator has an X (resp. Z) component at qubit `q`. The rank of the
/// columns of a subset equals the rank of the generators restricted to it.
#[derive(Clone, Debug)]
pub struct GeneratorColumns {
    qubits: usize,
    gens: usize,
    stride: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl GeneratorColumns {
    pub fn from_state(state: &StabilizerState) -> Self {
        let n = state.n();
        let stride = words_for(n);
        let mut x = vec![0u64; n * stride];
        let mut z = vec![0u64; n * stride];
        for g in 0..n {
            let row = n + g;
            let xs = BitVec::from_words(n, state.t.xr(row).to_vec());
            for q in xs.iter_ones() {
                put_bit(&mut x[q * stride..(q + 1) * stride], g, true);
            }
            let zs = BitVec::from_words(n, state.t.zr(row).to_vec());
            for q in zs.iter_ones() {
                put_bit(&mut z[q * stride..(q + 1) * stride], g, true);
            }
        }
        GeneratorColumns {
            qubits: n,
            gens: n,
            stride,
            x,
            z,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn empty_basis(&self) -> EchelonBasis {
        EchelonBasis::new(self.gens)
    }

    /// Adds the two columns of every qubit in `subset` to `basis`.
    pub fn extend(&self, basis: &mut EchelonBasis, subset: &[usize]) -> Result<()> {
        let s = self.stride;
        for &q in subset {
            if q >= self.qubits {
                return Err(LabError::Contract(format!(
                    "qubit {q} out of range for {} qubits",
                    self.qubits
                )));
            }
            basis.insert_words(&self.x[q * s..(q + 1) * s]);
            basis.insert_words(&self.z[q * s..(q + 1) * s]);
        }
        Ok(())
    }

    pub fn rank_of(&self, subset: &[usize]) -> Result<usize> {
        let mut b = self.empty_basis();
        self.extend(&mut b, subset)?;
        Ok(b.rank())
    }

    pub fn entropy(&self, subset: &[usize]) -> Result<usize> {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != subset.len() {
            return Err(LabError::Contract("repeated qubit in subset".into()));
        }
        let r = self.rank_of(subset)?;
        r.checked_sub(subset.len())
            .ok_or_else(|| LabError::Invariant("restricted rank below subset size".into()))
    }
}

/// Half the mutual information between `reference` and `erased`.
///
/// Counts logical pairs lost when `erased` is handed to the environment,
/// in steps of one half; zero exactly when the erasure is correctable.
pub fn damage_count(state: &StabilizerState, reference: &[usize], erased: &[usize]) -> Result<f64> {
    ErasureAnalyzer::new(state, reference)?.damage(erased)
}

/// Repeated damage counts against a fixed reference system.
#[derive(Clone, Debug)]
pub struct ErasureAnalyzer {
    cols: GeneratorColumns,
    reference: EchelonBasis,
}

impl ErasureAnalyzer {
    pub fn new(state: &StabilizerState, reference: &[usize]) -> Result<Self> {
        let cols = GeneratorColumns::from_state(state);
        let mut basis = cols.empty_basis();
        cols.extend(&mut basis, reference)?;
        Ok(ErasureAnalyzer {
            cols,
            reference: basis,
        })
    }

    /// `I(R:T)` in bits.
    pub fn mutual_information(&self, erased: &[usize]) -> Result<usize> {
        let rank_t = self.cols.rank_of(erased)?;
        let mut joint = self.reference.clone();
        self.cols.extend(&mut joint, erased)?;
        (self.reference.rank() + rank_t)
            .checked_sub(joint.rank())
            .ok_or_else(|| LabError::Invariant("joint rank exceeds the sum of ranks".into()))
    }

    pub fn damage(&self, erased: &[usize]) -> Result<f64> {
        Ok(self.mutual_information(erased)? as f64 / 2.0)
    }
}
