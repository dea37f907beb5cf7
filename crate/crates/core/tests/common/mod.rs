#![allow(dead_code)]

use aqec_core::ensembles::{Boundary, CircuitSpec, GateElement, GateSpec, Layer, SPEC_VERSION};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

pub fn reference() -> Value {
    serde_json::from_str(include_str!("../data/reference.json")).expect("reference data")
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + 1e-15
}

/// Layered spec from explicit supports, every gate a fresh uniform Clifford.
pub fn spec_from_layers(n: usize, layers: Vec<Vec<Vec<usize>>>, slots: Vec<usize>) -> CircuitSpec {
    CircuitSpec {
        version: SPEC_VERSION,
        n_qubits: n,
        boundary: Boundary::Open,
        layers: layers
            .into_iter()
            .map(|gates| Layer {
                gates: gates
                    .into_iter()
                    .map(|support| GateSpec {
                        support,
                        element: GateElement::FreshUniform,
                    })
                    .collect(),
                pauli_frame: false,
            })
            .collect(),
        logical_slots: slots,
        family: None,
        xi: None,
        qudit_width: None,
        seed: None,
        rng_algorithm: None,
    }
}

/// Random layers of disjoint gates with supports of one to `max_width` qubits.
pub fn random_layers<R: Rng>(
    n: usize,
    depth: usize,
    max_width: usize,
    rng: &mut R,
) -> Vec<Vec<Vec<usize>>> {
    (0..depth)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut gates = Vec::new();
            let mut rest = &order[..];
            while !rest.is_empty() {
                let w = rng.gen_range(1..=max_width.min(rest.len()));
                if rng.gen_bool(0.7) {
                    let mut g = rest[..w].to_vec();
                    g.sort_unstable();
                    gates.push(g);
                }
                rest = &rest[w..];
            }
            gates
        })
        .collect()
}

pub fn random_slots<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// `E_U tr(rho_{RT}^2)` for the encoded EPR state with every gate drawn from
/// a unitary 2-design, computed in the Pauli basis.
///
/// Pauli digits per qubit: 0 = I, 1 = X, 2 = Y, 3 = Z.
/// Reference qubit `r` is paired with physical qubit `slots[r]`; the
/// remaining physical qubits start in `|0>`.
pub fn pauli_basis_purity(
    n: usize,
    slots: &[usize],
    layers: &[Vec<Vec<usize>>],
    erased: &[usize],
) -> BigRational {
    let k = slots.len();
    let total = k + n;
    assert!(total <= 8, "register too large for the Pauli-basis oracle");
    let size = 1usize << (2 * total);
    let digit = |p: usize, q: usize| (p >> (2 * q)) & 3;
    let mut keep = vec![false; total];
    keep[..k].fill(true);
    for &q in erased {
        keep[k + q] = true;
    }
    let mut w = vec![BigRational::zero(); size];
    for (p, slot) in w.iter_mut().enumerate() {
        if (0..total).all(|q| keep[q] || digit(p, q) == 0) {
            *slot = BigRational::one();
        }
    }
    for layer in layers.iter().rev() {
        for gate in layer {
            let qs: Vec<usize> = gate.iter().map(|&q| k + q).collect();
            let mask: usize = qs.iter().map(|&q| 3usize << (2 * q)).sum();
            let share = BigRational::from_integer(BigInt::from((1i64 << (2 * qs.len())) - 1));
            for base in 0..size {
                if base & mask != 0 {
                    continue;
                }
                let members: Vec<usize> = (1..1usize << (2 * qs.len()))
                    .map(|local| {
                        qs.iter().enumerate().fold(base, |acc, (i, &q)| {
                            acc | ((local >> (2 * i)) & 3) << (2 * q)
                        })
                    })
                    .collect();
                let sum = members
                    .iter()
                    .fold(BigRational::zero(), |acc, &m| acc + &w[m]);
                let each = sum / &share;
                for m in members {
                    w[m] = each.clone();
                }
            }
        }
    }
    let mut paired = vec![None; n];
    for (r, &s) in slots.iter().enumerate() {
        paired[s] = Some(r);
    }
    let in_group = |p: usize| {
        (0..n).all(|s| match paired[s] {
            Some(r) => digit(p, r) == digit(p, k + s),
            None => matches!(digit(p, k + s), 0 | 3),
        })
    };
    let acc = (0..size)
        .filter(|&p| in_group(p))
        .fold(BigRational::zero(), |acc, p| acc + &w[p]);
    acc / BigRational::from_integer(BigInt::one() << (k + erased.len()))
}
