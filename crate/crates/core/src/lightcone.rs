//! Light cones of layered circuits and the depth lower bounds they imply.

use serde::{Deserialize, Serialize};

use crate::ensembles::CircuitSpec;
use crate::error::{param, Result};
use crate::gf2::BitVec;

/// Gate supports per layer plus the logical qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutGraph {
    pub n: usize,
    pub layers: Vec<Vec<Vec<usize>>>,
    pub logical: Vec<usize>,
}

impl LayoutGraph {
    pub fn new(n: usize, layers: Vec<Vec<Vec<usize>>>, logical: Vec<usize>) -> Result<Self> {
        let g = LayoutGraph { n, layers, logical };
        g.validate()?;
        Ok(g)
    }

    pub fn from_spec(spec: &CircuitSpec) -> Result<Self> {
        LayoutGraph::new(spec.n_qubits, spec.supports(), spec.logical_slots.clone())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.n];
            for &q in layer.iter().flatten() {
                if q >= self.n || used[q] {
                    return param(format!("invalid or overlapping qubit {q} in layer {li}"));
                }
                used[q] = true;
            }
        }
        if self.logical.iter().any(|&q| q >= self.n) {
            return param("logical qubit out of range");
        }
        Ok(())
    }

    /// Gate index touching each qubit, per layer.
    fn owners(&self) -> Vec<Vec<Option<usize>>> {
        self.layers
            .iter()
            .map(|layer| {
                let mut own = vec![None; self.n];
                for (gi, g) in layer.iter().enumerate() {
                    for &q in g {
                        own[q] = Some(gi);
                    }
                }
                own
            })
            .collect()
    }

    fn grow(&self, cone: &BitVec, layer: usize, owners: &[Vec<Option<usize>>]) -> BitVec {
        let mut next = cone.clone();
        for q in cone.iter_ones() {
            if let Some(gi) = owners[layer][q] {
                for &r in &self.layers[layer][gi] {
                    next.set(r, true);
                }
            }
        }
        next
    }

    /// Qubits reachable from `q` after the first `upto` layers.
    pub fn forward_cone(&self, q: usize, upto: usize) -> BitVec {
        let owners = self.owners();
        let mut cone = BitVec::zeros(self.n);
        cone.set(q, true);
        for l in 0..upto.min(self.depth()) {
            cone = self.grow(&cone, l, &owners);
        }
        cone
    }
}

/// Forward cones of the logical qubits through the whole circuit, backward
/// cones of every output qubit, and the largest cone size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LightCones {
    pub forward: Vec<BitVec>,
    pub backward: Vec<BitVec>,
    pub max_size: usize,
}

/// Qubits idle in a layer stay in the cone.
pub fn light_cones(layout: &LayoutGraph) -> LightCones {
    let owners = layout.owners();
    let mut forward = Vec::with_capacity(layout.logical.len());
    for &q in &layout.logical {
        let mut cone = BitVec::zeros(layout.n);
        cone.set(q, true);
        for l in 0..layout.depth() {
            cone = layout.grow(&cone, l, &owners);
        }
        forward.push(cone);
    }
    let mut backward = Vec::with_capacity(layout.n);
    for q in 0..layout.n {
        let mut cone = BitVec::zeros(layout.n);
        cone.set(q, true);
        for l in (0..layout.depth()).rev() {
            cone = layout.grow(&cone, l, &owners);
        }
        backward.push(cone);
    }
    let max_size = forward
        .iter()
        .chain(&backward)
        .map(BitVec::count_ones)
        .max()
        .unwrap_or(1)
        .max(1);
    LightCones {
        forward,
        backward,
        max_size,
    }
}

/// Logical qubits with pairwise disjoint forward cones, chosen greedily in
/// index order.
pub fn disjoint_logical_set(layout: &LayoutGraph, cones: &LightCones) -> Vec<usize> {
    let mut order: Vec<usize> = (0..layout.logical.len()).collect();
    order.sort_by_key(|&i| layout.logical[i]);
    let mut union = BitVec::zeros(layout.n);
    let mut chosen = Vec::new();
    for i in order {
        let cone = &cones.forward[i];
        if cone.intersects(&union) {
            continue;
        }
        union.or_assign(cone);
        chosen.push(layout.logical[i]);
    }
    chosen
}

/// Circuit architecture for the depth lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// `D`-dimensional lattice with nearest-neighbour gates.
    Lattice(u32),
    AllToAll,
}

fn cone_side(mode: Architecture, p: f64, d: u64) -> f64 {
    let log_inv_p = -p.log2();
    let d = d as f64;
    match mode {
        Architecture::Lattice(dim) => {
            let dim = dim as f64;
            (2.0 * d).powf(dim) * log_inv_p + 2.0 * dim * (2.0 * d).log2()
        }
        Architecture::AllToAll => d.exp2() * log_inv_p + 2.0 * d,
    }
}

/// Smallest depth compatible with Choi error `eps` for `k` logical qubits
/// under depolarizing noise of strength `p`.
pub fn depth_lower_bound(mode: Architecture, p: f64, eps: f64, k: usize) -> Result<u64> {
    if !(eps > 0.0 && eps < 0.1) {
        return param(format!(
            "theorem hypothesis violated: Choi error {eps} not in (0, 0.1)"
        ));
    }
    if !(p > 0.0 && p <= 1.0) {
        return param(format!("noise strength {p} outside (0, 1]"));
    }
    if k == 0 {
        return param("need at least one logical qubit");
    }
    if mode == Architecture::Lattice(0) {
        return param("lattice dimension must be positive");
    }
    let target = (3.0 / (8.0 * eps * eps)).log2() + (k as f64).log2();
    let holds = |d: u64| cone_side(mode, p, d) >= target;
    if holds(1) {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !holds(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `sqrt(3 |J| p^M / 8)`, clipped to `[0, 1]`.
pub fn choi_floor(layout: &LayoutGraph, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("noise strength {p} outside [0, 1]"));
    }
    let cones = light_cones(layout);
    let j = disjoint_logical_set(layout, &cones).len();
    Ok((3.0 * j as f64 / 8.0 * p.powi(cones.max_size as i32))
        .sqrt()
        .min(1.0))
}
