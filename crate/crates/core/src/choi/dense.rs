//! Dense statevector oracle for the erasure Choi fidelity.
//!
//! The optimal decoder is found by ascent over Stinespring isometries of
//! the recovery map; the transpose-channel decoder is evaluated in closed
//! form. Both are exponential in the register size.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{encode_epr_state, exact_patterns, EncodedState};
use crate::ensembles::CircuitSpec;
use crate::error::{param, LabError, Result};
use crate::noise::NoiseSpec;
use crate::stabilizer::{PauliString, StabilizerState};

/// Largest physical register accepted by the oracle.
pub const MAX_PHYSICAL: usize = 5;
/// Largest logical register accepted by the oracle.
pub const MAX_LOGICAL: usize = 2;

const ASCENT_STARTS: usize = 4;
const ASCENT_MAX_ITER: usize = 4000;
const ASCENT_TOL: f64 = 1e-15;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// `P |v>` with qubit `q` on bit `q` of the basis index.
pub fn apply_pauli(v: &[C], p: &PauliString) -> Vec<C> {
    let n = p.len();
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    let mut ys = 0u32;
    for q in 0..n {
        let (x, z) = (p.x.get(q), p.z.get(q));
        if x {
            xmask |= 1 << q;
        }
        if z {
            zmask |= 1 << q;
        }
        if x && z {
            ys += 1;
        }
    }
    let global = C::i().powu((p.phase as u32 + ys) % 4);
    let mut out = vec![C::new(0.0, 0.0); v.len()];
    for (b, &amp) in v.iter().enumerate() {
        let sign = if (b & zmask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        out[b ^ xmask] += global * amp * sign;
    }
    out
}

/// Normalised amplitudes of a stabilizer state, up to global phase.
pub fn statevector(state: &StabilizerState) -> Result<Vec<C>> {
    let n = state.n();
    if n > 12 {
        return param(format!("dense statevector capped at 12 qubits, got {n}"));
    }
    let stabs = state.stabilizers();
    for seed in 0..1usize << n {
        let mut v = vec![C::new(0.0, 0.0); 1 << n];
        v[seed] = c(1.0);
        for s in &stabs {
            let sv = apply_pauli(&v, s);
            for (a, b) in v.iter_mut().zip(sv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return Ok(v.into_iter().map(|a| a / norm).collect());
        }
    }
    Err(LabError::Invariant(
        "stabilizer projector annihilates every basis state".into(),
    ))
}

/// Root fidelities of the optimal and the transpose-channel decoder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseFidelity {
    pub optimal: f64,
    pub transpose: f64,
}

impl DenseFidelity {
    /// `1 - F~ >= 1 - F >= (1 - F~)/2` within `tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let (f, ft) = (self.optimal, self.transpose);
        1.0 - ft + tol >= 1.0 - f && 1.0 - f + tol >= (1.0 - ft) / 2.0
    }
}

/// Amplitudes regrouped as `psi[(r, b), t]` for reference `r`, kept
/// physical qubits `b` and erased qubits `t`.
struct Split {
    d_r: usize,
    d_b: usize,
    d_t: usize,
    psi: DMatrix<C>,
}

fn split(enc: &EncodedState, erased: &[usize]) -> Result<Split> {
    let mut is_erased = vec![false; enc.n];
    for &q in erased {
        if q >= enc.n || is_erased[q] {
            return param(format!("invalid erased qubit {q}"));
        }
        is_erased[q] = true;
    }
    let kept: Vec<usize> = (0..enc.n).filter(|&q| !is_erased[q]).collect();
    let v = statevector(&enc.state)?;
    let (d_r, d_b, d_t) = (
        1usize << enc.k,
        1usize << kept.len(),
        1usize << erased.len(),
    );
    let mut psi = DMatrix::from_element(d_r * d_b, d_t, c(0.0));
    for (x, amp) in v.into_iter().enumerate() {
        let r = x & (d_r - 1);
        let pick = |qs: &[usize]| {
            qs.iter().enumerate().fold(0usize, |acc, (i, &q)| {
                acc | ((x >> enc.physical(q) & 1) << i)
            })
        };
        let b = pick(&kept);
        let t = pick(erased);
        psi[(r * d_b + b, t)] = amp;
    }
    Ok(Split { d_r, d_b, d_t, psi })
}

fn polar(g: &DMatrix<C>) -> DMatrix<C> {
    let svd = g.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    u * vt
}

/// `(value, gradient)` of `V -> || (<phi| (x) I) V psi ||^2`.
fn objective(s: &Split, d_e: usize, v: &DMatrix<C>) -> (f64, DMatrix<C>) {
    let scale = 1.0 / (s.d_r as f64).sqrt();
    let mut w = DMatrix::from_element(d_e, s.d_t, c(0.0));
    for j in 0..s.d_r {
        let vj = v.rows(j * d_e, d_e);
        let pj = s.psi.rows(j * s.d_b, s.d_b);
        w += vj * pj;
    }
    w *= c(scale);
    let value = w.iter().map(|a| a.norm_sqr()).sum();
    let mut grad = DMatrix::from_element(s.d_r * d_e, s.d_b, c(0.0));
    for j in 0..s.d_r {
        let pj = s.psi.rows(j * s.d_b, s.d_b);
        let gj = &w * pj.adjoint() * c(scale);
        grad.rows_mut(j * d_e, d_e).copy_from(&gj);
    }
    (value, grad)
}

fn optimal_fidelity_sq(s: &Split) -> f64 {
    let d_e = s.d_b * s.d_r;
    let rows = s.d_r * d_e;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = 0.0f64;
    for start in 0..ASCENT_STARTS {
        let init = if start == 0 {
            DMatrix::from_fn(rows, s.d_b, |r, col| if r == col { c(1.0) } else { c(0.0) })
        } else {
            DMatrix::from_fn(rows, s.d_b, |_, _| {
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        };
        let mut v = polar(&init);
        let (mut value, mut grad) = objective(s, d_e, &v);
        for _ in 0..ASCENT_MAX_ITER {
            v = polar(&grad);
            let (next, g) = objective(s, d_e, &v);
            let gain = next - value;
            value = next;
            grad = g;
            if gain < ASCENT_TOL {
                break;
            }
        }
        best = best.max(value);
    }
    best.min(1.0)
}

fn inverse_sqrt_psd(m: &DMatrix<C>) -> DMatrix<C> {
    let eig = m.clone().symmetric_eigen();
    let mut out = DMatrix::from_element(m.nrows(), m.ncols(), c(0.0));
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-12 {
            let col = eig.eigenvectors.column(i);
            out += col * col.adjoint() * c(1.0 / lambda.sqrt());
        }
    }
    out
}

fn transpose_fidelity_sq(s: &Split) -> f64 {
    let (d_r, d_b, d_t) = (s.d_r, s.d_b, s.d_t);
    let d_l = d_r;
    // Code isometry W[(b, t), l] = sqrt(d_l) psi[(l, b), t].
    let root = (d_l as f64).sqrt();
    let w = DMatrix::from_fn(d_b * d_t, d_l, |row, l| {
        let (b, t) = (row / d_t, row % d_t);
        s.psi[(l * d_b + b, t)] * root
    });
    let p = &w * w.adjoint();
    let np = DMatrix::from_fn(d_b, d_b, |b, b2| {
        (0..d_t).fold(c(0.0), |acc, t| acc + p[(b * d_t + t, b2 * d_t + t)])
    });
    let m = inverse_sqrt_psd(&np);
    let mut phi = DMatrix::from_element(d_r * d_b, d_t, c(0.0));
    for r in 0..d_r {
        let block = &m * s.psi.rows(r * d_b, d_b);
        phi.rows_mut(r * d_b, d_b).copy_from(&block);
    }
    let mut total = 0.0;
    for t0 in 0..d_t {
        for t in 0..d_t {
            let mut a = c(0.0);
            for j in 0..d_l {
                for b in 0..d_b {
                    a += w[(b * d_t + t0, j)].conj() * phi[(j * d_b + b, t)];
                }
            }
            total += a.norm_sqr();
        }
    }
    (total / d_l as f64).min(1.0)
}

fn check_size(enc: &EncodedState) -> Result<()> {
    if enc.n > MAX_PHYSICAL || enc.k > MAX_LOGICAL {
        return param(format!(
            "dense oracle capped at n <= {MAX_PHYSICAL}, k <= {MAX_LOGICAL}; got n = {}, k = {}",
            enc.n, enc.k
        ));
    }
    Ok(())
}

/// Fidelities after erasing the physical qubits in `erased`, with the
/// erasure location known to the decoder.
pub fn erasure_fidelity(enc: &EncodedState, erased: &[usize]) -> Result<DenseFidelity> {
    check_size(enc)?;
    let s = split(enc, erased)?;
    let optimal = optimal_fidelity_sq(&s).sqrt();
    let transpose = transpose_fidelity_sq(&s).sqrt();
    let out = DenseFidelity {
        optimal: optimal.max(transpose),
        transpose,
    };
    if !out.sandwich_holds(1e-9) {
        return Err(LabError::Invariant(format!(
            "transpose-channel sandwich violated: F = {optimal}, F~ = {transpose}"
        )));
    }
    Ok(out)
}

/// Exact Choi errors of one sampled circuit from both decoders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseChoi {
    pub choi_error: f64,
    pub transpose_choi_error: f64,
    pub patterns: usize,
}

/// Samples a circuit from `spec` and averages dense fidelities over every
/// erasure pattern.
pub fn dense_oracle_choi<R: Rng + ?Sized>(
    spec: &CircuitSpec,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DenseChoi> {
    if spec.n_qubits > MAX_PHYSICAL || spec.k() > MAX_LOGICAL {
        return param("size cap exceeded for the dense oracle");
    }
    let enc = encode_epr_state(spec, rng)?;
    let patterns = exact_patterns(noise, enc.n)?
        .ok_or_else(|| LabError::Invariant("small register must enumerate patterns".into()))?;
    let (mut loss, mut loss_tc) = (0.0, 0.0);
    for (set, w) in &patterns {
        let f = erasure_fidelity(&enc, set)?;
        loss += w * (1.0 - f.optimal * f.optimal);
        loss_tc += w * (1.0 - f.transpose * f.transpose);
    }
    Ok(DenseChoi {
        choi_error: loss.clamp(0.0, 1.0).sqrt(),
        transpose_choi_error: loss_tc.clamp(0.0, 1.0).sqrt(),
        patterns: patterns.len(),
    })
}
