//! Builders for the random encoder families and the Pauli-twirl wrapper.
//!
//! Builders only fix the gate layout. Gates marked [`GateElement::FreshUniform`]
//! are drawn when a circuit is instantiated, see [`resolve`].

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError, Result};
use crate::stabilizer::{CliffordElement, PauliString};

pub const SPEC_VERSION: u32 = 1;

/// Encoder family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Brickwork,
    DoubleLayer,
    BlockEncoding,
    FullClifford,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Brickwork => "brickwork",
            Family::DoubleLayer => "double-layer",
            Family::BlockEncoding => "block",
            Family::FullClifford => "clifford",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brickwork" => Ok(Family::Brickwork),
            "double-layer" | "double_layer" => Ok(Family::DoubleLayer),
            "block" | "block-encoding" => Ok(Family::BlockEncoding),
            "clifford" | "full-clifford" => Ok(Family::FullClifford),
            other => param(format!("unknown family {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateElement {
    /// Uniform Clifford drawn at instantiation time.
    FreshUniform,
    Fixed(CliffordElement),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSpec {
    pub support: Vec<usize>,
    pub element: GateElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub gates: Vec<GateSpec>,
    /// Set on the single-qubit Pauli layer added by [`pauli_twirl_wrap`].
    #[serde(default)]
    pub pauli_frame: bool,
}

/// Layered circuit over an indexed qubit register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub version: u32,
    pub n_qubits: usize,
    pub boundary: Boundary,
    pub layers: Vec<Layer>,
    pub logical_slots: Vec<usize>,
    #[serde(default)]
    pub family: Option<Family>,
    /// Block-size parameter of blocked families.
    #[serde(default)]
    pub xi: Option<usize>,
    /// Qubits per qudit for brickwork circuits.
    #[serde(default)]
    pub qudit_width: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub rng_algorithm: Option<String>,
}

impl CircuitSpec {
    pub fn k(&self) -> usize {
        self.logical_slots.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Gate supports per layer, without elements.
    pub fn supports(&self) -> Vec<Vec<Vec<usize>>> {
        self.layers
            .iter()
            .map(|l| l.gates.iter().map(|g| g.support.clone()).collect())
            .collect()
    }

    /// Checks index ranges, disjointness inside layers and element sizes.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; n];
            for g in &layer.gates {
                if g.support.is_empty() {
                    return param(format!("empty gate support in layer {li}"));
                }
                for &q in &g.support {
                    if q >= n {
                        return param(format!("qubit {q} out of range in layer {li}"));
                    }
                    if used[q] {
                        return param(format!("overlapping supports at qubit {q} in layer {li}"));
                    }
                    used[q] = true;
                }
                if let GateElement::Fixed(c) = &g.element {
                    if c.m != g.support.len() {
                        return param(format!(
                            "element on {} qubits placed on a {}-qubit support",
                            c.m,
                            g.support.len()
                        ));
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        for &s in &self.logical_slots {
            if s >= n || seen[s] {
                return param(format!("invalid or repeated logical slot {s}"));
            }
            seen[s] = true;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| LabError::Invariant(format!("spec serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CircuitSpec = serde_json::from_str(text)
            .map_err(|e| LabError::Parameter(format!("invalid circuit spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Inputs shared by all builders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleParams {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub family: Family,
    /// Overrides the block size derived from `epsilon`.
    #[serde(default)]
    pub xi: Option<usize>,
}

impl EnsembleParams {
    pub fn new(n: usize, k: usize, epsilon: f64, family: Family) -> Self {
        EnsembleParams {
            n,
            k,
            epsilon,
            family,
            xi: None,
        }
    }

    pub fn with_xi(mut self, xi: usize) -> Self {
        self.xi = Some(xi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("need at least one physical qubit");
        }
        if self.k > self.n {
            return param(format!("k = {} exceeds n = {}", self.k, self.n));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return param(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.family == Family::Brickwork && (self.k == 0 || !self.n.is_multiple_of(self.k)) {
            return param(format!(
                "brickwork needs k | n, got n = {}, k = {}",
                self.n, self.k
            ));
        }
        Ok(())
    }

    /// Block size used by the blocked families.
    pub fn block_size(&self) -> Result<usize> {
        match self.xi {
            Some(0) => param("block size must be positive"),
            Some(x) => Ok(x),
            None => block_size(self.n, self.epsilon),
        }
    }
}

/// `ceil(log2(n / epsilon))`, at least one.
pub fn block_size(n: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) || epsilon >= n as f64 {
        return param(format!("epsilon must lie in (0, n), got {epsilon}"));
    }
    let x = (n as f64 / epsilon).log2();
    Ok(((x - 1e-9).ceil() as usize).max(1))
}

/// `log2((q^2 + 1) / (2q))` for `q = 2^width`, stable for wide qudits.
pub fn brickwork_gap(width: usize) -> f64 {
    let w = width as f64;
    w - 1.0 + (-2.0 * w * std::f64::consts::LN_2).exp().ln_1p() / std::f64::consts::LN_2
}

/// Unrounded brickwork depth for `k` qudits of `n / k` qubits.
pub fn brickwork_depth_real(n: usize, k: usize, epsilon: f64) -> Result<f64> {
    if k == 0 || !n.is_multiple_of(k) {
        return param(format!("brickwork needs k | n, got n = {n}, k = {k}"));
    }
    if !(epsilon > 0.0) || epsilon > n as f64 {
        return param(format!("epsilon must lie in (0, n], got {epsilon}"));
    }
    let gap = brickwork_gap(n / k);
    let e1 = (std::f64::consts::E - 1.0).log2();
    Ok((n as f64 / epsilon).log2() + (n as f64).log2() / gap + e1 / gap + 1.0)
}

pub fn brickwork_depth(n: usize, k: usize, epsilon: f64) -> Result<usize> {
    let d = brickwork_depth_real(n, k, epsilon)?;
    Ok((d - 1e-9).ceil().max(1.0) as usize)
}

/// Regions of width `xi`; the region count is rounded down to an even
/// number and the last region takes the remainder.
pub fn double_layer_regions(n: usize, xi: usize) -> Result<Vec<Range<usize>>> {
    if xi == 0 {
        return param("block size must be positive");
    }
    if xi >= n {
        return param(format!("blocks exceed register: xi = {xi} for n = {n}"));
    }
    let count = (n / xi) & !1;
    if count < 2 {
        return param(format!(
            "register of {n} qubits holds fewer than two regions of {xi}"
        ));
    }
    let mut out: Vec<Range<usize>> = (0..count).map(|i| i * xi..(i + 1) * xi).collect();
    if let Some(last) = out.last_mut() {
        last.end = n;
    }
    Ok(out)
}

/// Logical counts per part, proportional to part sizes, summing to `k`.
pub fn distribute_logical(sizes: &[usize], k: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut out = Vec::with_capacity(sizes.len());
    let mut cum = 0usize;
    let mut prev = 0usize;
    for &s in sizes {
        cum += s;
        let upto = k * cum / total;
        out.push(upto - prev);
        prev = upto;
    }
    out
}

fn slots_in(parts: &[Range<usize>], k: usize) -> Vec<usize> {
    let sizes: Vec<usize> = parts.iter().map(|r| r.len()).collect();
    distribute_logical(&sizes, k)
        .into_iter()
        .zip(parts)
        .flat_map(|(c, r)| r.start..r.start + c)
        .collect()
}

fn fresh(support: Vec<usize>) -> GateSpec {
    GateSpec {
        support,
        element: GateElement::FreshUniform,
    }
}

fn base_spec(n: usize, family: Family, layers: Vec<Layer>, slots: Vec<usize>) -> CircuitSpec {
    CircuitSpec {
        version: SPEC_VERSION,
        n_qubits: n,
        boundary: Boundary::Open,
        layers,
        logical_slots: slots,
        family: Some(family),
        xi: None,
        qudit_width: None,
        seed: None,
        rng_algorithm: None,
    }
}

/// Staggered brickwork of two-qudit gates on `k` qudits with periodic
/// boundary, at the prescribed depth.
pub fn build_brickwork(params: &EnsembleParams) -> Result<CircuitSpec> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    if k % 2 == 1 {
        return param(format!("brickwork needs an even qudit count, got k = {k}"));
    }
    let depth = brickwork_depth(n, k, params.epsilon)?;
    Ok(brickwork_layout(n, k, depth))
}

/// Brickwork layout with an explicit depth.
pub fn brickwork_layout(n: usize, k: usize, depth: usize) -> CircuitSpec {
    let w = n / k;
    let qudit = |i: usize| (i % k) * w..(i % k) * w + w;
    let layers = (0..depth)
        .map(|l| {
            let offset = l % 2;
            let gates = (0..k / 2)
                .map(|i| {
                    let a = 2 * i + offset;
                    fresh(qudit(a).chain(qudit(a + 1)).collect())
                })
                .collect();
            Layer {
                gates,
                pauli_frame: false,
            }
        })
        .collect();
    let slots = (0..k).map(|i| i * w).collect();
    let mut spec = base_spec(n, Family::Brickwork, layers, slots);
    spec.boundary = Boundary::Periodic;
    spec.qudit_width = Some(w);
    spec
}

/// Two layers of `2 xi`-qubit gates offset by one region.
pub fn build_double_layer(params: &EnsembleParams) -> Result<CircuitSpec> {
    params.validate()?;
    let xi = params.block_size()?;
    let regions = double_layer_regions(params.n, xi)?;
    let pair = |a: usize| -> Vec<usize> { (regions[a].start..regions[a + 1].end).collect() };
    let first = (0..regions.len() / 2).map(|i| fresh(pair(2 * i))).collect();
    let second = (0..regions.len() / 2 - 1)
        .map(|i| fresh(pair(2 * i + 1)))
        .collect();
    let layers = vec![
        Layer {
            gates: first,
            pauli_frame: false,
        },
        Layer {
            gates: second,
            pauli_frame: false,
        },
    ];
    let mut spec = base_spec(
        params.n,
        Family::DoubleLayer,
        layers,
        slots_in(&regions, params.k),
    );
    spec.xi = Some(xi);
    Ok(spec)
}

/// One layer of disjoint gates on consecutive blocks of `block_regions * xi` qubits.
pub fn build_block_encoding(params: &EnsembleParams, block_regions: usize) -> Result<CircuitSpec> {
    params.validate()?;
    let xi = params.block_size()?;
    let width = block_regions * xi;
    if width == 0 || !params.n.is_multiple_of(width) {
        return param(format!(
            "block width {width} does not divide n = {}",
            params.n
        ));
    }
    let blocks: Vec<Range<usize>> = (0..params.n / width)
        .map(|i| i * width..(i + 1) * width)
        .collect();
    let gates = blocks.iter().map(|r| fresh(r.clone().collect())).collect();
    let mut spec = base_spec(
        params.n,
        Family::BlockEncoding,
        vec![Layer {
            gates,
            pauli_frame: false,
        }],
        slots_in(&blocks, params.k),
    );
    spec.xi = Some(xi);
    Ok(spec)
}

/// A single uniform Clifford on the whole register.
pub fn build_full_clifford(params: &EnsembleParams) -> Result<CircuitSpec> {
    if params.n == 0 || params.k > params.n {
        return param(format!(
            "invalid register n = {}, k = {}",
            params.n, params.k
        ));
    }
    Ok(base_spec(
        params.n,
        Family::FullClifford,
        vec![Layer {
            gates: vec![fresh((0..params.n).collect())],
            pauli_frame: false,
        }],
        (0..params.k).collect(),
    ))
}

/// Dispatches on `params.family`; block encoding uses four regions per block.
pub fn build(params: &EnsembleParams) -> Result<CircuitSpec> {
    match params.family {
        Family::Brickwork => build_brickwork(params),
        Family::DoubleLayer => build_double_layer(params),
        Family::BlockEncoding => build_block_encoding(params, 4),
        Family::FullClifford => build_full_clifford(params),
    }
}

/// Replaces every fresh gate by a sampled uniform Clifford element.
pub fn resolve<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Result<CircuitSpec> {
    let mut out = spec.clone();
    for layer in &mut out.layers {
        for g in &mut layer.gates {
            if g.element == GateElement::FreshUniform {
                g.element =
                    GateElement::Fixed(CliffordElement::sample_uniform(g.support.len(), rng)?);
            }
        }
    }
    Ok(out)
}

/// Prepends a uniformly random Pauli on every logical slot.
///
/// Wrapping an already wrapped spec multiplies the new Paulis into the
/// existing frame, so the result always carries a single Pauli layer.
pub fn pauli_twirl_wrap<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Result<CircuitSpec> {
    let mut out = spec.clone();
    let k = spec.logical_slots.len();
    let draws: Vec<(bool, bool)> = (0..k).map(|_| (rng.gen(), rng.gen())).collect();
    let wrapped = out.layers.first().is_some_and(|l| l.pauli_frame);
    if !wrapped {
        let gates = spec
            .logical_slots
            .iter()
            .map(|&s| GateSpec {
                support: vec![s],
                element: GateElement::Fixed(CliffordElement::identity(1)),
            })
            .collect();
        out.layers.insert(
            0,
            Layer {
                gates,
                pauli_frame: true,
            },
        );
    }
    let frame = &mut out.layers[0];
    for (slot_index, &slot) in spec.logical_slots.iter().enumerate() {
        let gate = frame
            .gates
            .iter_mut()
            .find(|g| g.support == [slot])
            .ok_or_else(|| LabError::Invariant(format!("Pauli frame lacks slot {slot}")))?;
        let GateElement::Fixed(c) = &gate.element else {
            return Err(LabError::Invariant("Pauli frame gate is not fixed".into()));
        };
        let mut p = PauliString::identity(1);
        p.x.set(0, c.phase_bits.get(1) ^ draws[slot_index].0);
        p.z.set(0, c.phase_bits.get(0) ^ draws[slot_index].1);
        gate.element = GateElement::Fixed(CliffordElement::pauli(&p));
    }
    Ok(out)
}
