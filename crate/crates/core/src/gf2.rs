//! Bit-packed linear algebra over GF(2).
//!
//! Rows are packed into 64-bit words, least significant bit first. Padding
//! bits past the last column are kept at zero by every mutating method.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from raw words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitVec { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Whether the two sets share an element.
    pub fn intersects(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    /// Parity of the bitwise AND with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitVec({s})")
    }
}

/// Dense GF(2) matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = BitMatrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVec]) -> Self {
        let cols = rows.first().map_or(0, BitVec::len);
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn from_bools(rows: &[Vec<bool>]) -> Self {
        let v: Vec<BitVec> = rows.iter().map(|r| BitVec::from_bools(r)).collect();
        if v.is_empty() {
            return BitMatrix::zeros(0, 0);
        }
        BitMatrix::from_rows(&v)
    }

    /// Uniformly random matrix.
    pub fn random<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = BitMatrix::zeros(rows, cols);
        for i in 0..rows {
            for w in m.row_words_mut(i) {
                *w = rng.gen();
            }
            m.clear_padding(i);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn clear_padding(&mut self, r: usize) {
        if self.stride > 0 {
            let mask = tail_mask(self.cols);
            let last = r * self.stride + self.stride - 1;
            self.data[last] &= mask;
        }
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.row_words_mut(r).copy_from_slice(v.words());
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row(&mut self, src: usize, dst: usize) {
        let s = self.stride;
        for w in 0..s {
            let v = self.data[src * s + w];
            self.data[dst * s + w] ^= v;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in BitVec::from_words(self.cols, self.row_words(r).to_vec()).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        let mut m = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.set(r, c, true);
                }
            }
            for c in 0..other.cols {
                if other.get(r, c) {
                    m.set(r, self.cols + c, true);
                }
            }
        }
        m
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(LabError::Contract(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for k in row.iter_ones() {
                for w in 0..other.stride {
                    out.data[r * out.stride + w] ^= other.data[k * other.stride + w];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `M x`.
    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.cols {
            return Err(LabError::Contract(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let parity: u32 = self
                .row_words(r)
                .iter()
                .zip(x.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            out.set(r, parity & 1 == 1);
        }
        Ok(out)
    }

    /// In-place Gauss-Jordan elimination; returns the pivot columns.
    ///
    /// After the call the matrix is in reduced row echelon form.
    pub fn eliminate(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, lead);
            for r in 0..self.rows {
                if r != lead && self.get(r, c) {
                    self.xor_row(lead, r);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    /// Rank, eliminating in place.
    pub fn rank_in_place(&mut self) -> usize {
        self.eliminate().len()
    }

    pub fn rank(&self) -> usize {
        self.clone().rank_in_place()
    }

    /// Some `x` with `M x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &BitVec) -> Result<Option<BitVec>> {
        if b.len() != self.rows {
            return Err(LabError::Contract(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                aug.set(r, c, true);
            }
            aug.set(r, self.cols, b.get(r));
        }
        let pivots = aug.eliminate();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = BitVec::zeros(self.cols);
        for (r, &c) in pivots.iter().enumerate() {
            if aug.get(r, self.cols) {
                x.set(c, true);
            }
        }
        Ok(Some(x))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// Incrementally grown row-echelon basis.
///
/// Each stored vector has a distinct lowest set bit, so reducing a candidate
/// walks its set bits upward and touches every stored vector at most once.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    dim: usize,
    stride: usize,
    vectors: Vec<u64>,
    by_pivot: Vec<u32>,
    len: usize,
}

const NO_PIVOT: u32 = u32::MAX;

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        EchelonBasis {
            dim,
            stride: words_for(dim),
            vectors: Vec::new(),
            by_pivot: vec![NO_PIVOT; dim],
            len: 0,
        }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inserts raw words of a vector; returns whether it was independent.
    pub fn insert_words(&mut self, words: &[u64]) -> bool {
        debug_assert_eq!(words.len(), self.stride);
        let mut v: Vec<u64> = words.to_vec();
        let s = self.stride;
        let mut wi = 0;
        while wi < s {
            let w = v[wi];
            if w == 0 {
                wi += 1;
                continue;
            }
            let bit = wi * WORD + w.trailing_zeros() as usize;
            let slot = self.by_pivot[bit];
            if slot == NO_PIVOT {
                self.by_pivot[bit] = self.len as u32;
                self.vectors.extend_from_slice(&v);
                self.len += 1;
                return true;
            }
            let base = slot as usize * s;
            for (j, x) in v.iter_mut().enumerate().skip(wi) {
                *x ^= self.vectors[base + j];
            }
        }
        false
    }

    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        self.insert_words(v.words())
    }

    /// Whether `v` lies in the span.
    pub fn contains(&self, v: &BitVec) -> bool {
        let mut probe = self.clone();
        !probe.insert(v)
    }
}
