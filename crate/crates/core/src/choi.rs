//! Choi error of stabilizer encoders under flagged erasure.
//!
//! A pattern `T` leaves fidelity `2^{-g(T)}`, with `g(T) = I(R:T)/2` the damage
//! count of the encoded EPR state. [`dense`] recomputes the same quantity with
//! optimal and transpose-channel decoders on small registers.

pub mod dense;

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{self, CircuitSpec, EnsembleParams, Family, GateElement};
use crate::error::{param, LabError, Result};
use crate::noise::{sample_erasure_pattern, NoiseSpec};
use crate::stabilizer::{ErasureAnalyzer, Gate, StabilizerState};
use crate::{stream_rng, RNG_ALGORITHM, VERSION};

/// Largest pattern count enumerated exactly.
pub const EXACT_PATTERN_LIMIT: u64 = 10_000;

/// Encoded EPR state over `k` reference qubits followed by `n` physical qubits.
#[derive(Clone, Debug)]
pub struct EncodedState {
    pub state: StabilizerState,
    pub k: usize,
    pub n: usize,
}

impl EncodedState {
    pub fn reference(&self) -> Vec<usize> {
        (0..self.k).collect()
    }

    /// Register index of physical qubit `q`.
    pub fn physical(&self, q: usize) -> usize {
        self.k + q
    }
}

/// Entangles a reference qubit with every logical slot, then applies the
/// circuit; fresh gates are drawn from `rng` in layer order.
pub fn encode_epr_state<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Result<EncodedState> {
    spec.validate()?;
    let k = spec.k();
    let n = spec.n_qubits;
    let resolved = ensembles::resolve(spec, rng)?;
    let mut state = StabilizerState::zero(k + n);
    for (r, &slot) in spec.logical_slots.iter().enumerate() {
        state.apply_gate(Gate::H, &[r])?;
        state.apply_gate(Gate::Cnot, &[r, k + slot])?;
    }
    let mut support = Vec::new();
    for layer in &resolved.layers {
        for g in &layer.gates {
            let GateElement::Fixed(c) = &g.element else {
                return Err(LabError::Invariant("unresolved gate after sampling".into()));
            };
            support.clear();
            support.extend(g.support.iter().map(|&q| k + q));
            state.apply_clifford(c, &support)?;
        }
    }
    Ok(EncodedState { state, k, n })
}

fn log_binomial(n: u64, t: u64) -> f64 {
    let t = t.min(n - t);
    (0..t)
        .map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2())
        .sum()
}

/// Every `t`-subset of `0..n` in lexicographic order.
pub fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if t > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..t).rev().find(|&i| idx[i] < i + n - t) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..t {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Erased positions with their probability.
pub type WeightedPatterns = Vec<(Vec<usize>, f64)>;

/// Weighted erasure patterns, or `None` when there are too many to list.
pub fn exact_patterns(noise: &NoiseSpec, n: usize) -> Result<Option<WeightedPatterns>> {
    match *noise {
        NoiseSpec::ErasureFixedT { t } => {
            if t > n {
                return param(format!("{t} erasures exceed {n} qubits"));
            }
            if log_binomial(n as u64, t as u64) > (EXACT_PATTERN_LIMIT as f64).log2() + 1e-9 {
                return Ok(None);
            }
            let all = combinations(n, t);
            let w = 1.0 / all.len() as f64;
            Ok(Some(all.into_iter().map(|c| (c, w)).collect()))
        }
        NoiseSpec::ErasureIid { p } => {
            noise.validate(Some(n))?;
            if n >= 64 || (1u64 << n) > EXACT_PATTERN_LIMIT {
                return Ok(None);
            }
            let out = (0u64..1 << n)
                .map(|mask| {
                    let set: Vec<usize> = (0..n).filter(|&q| mask >> q & 1 == 1).collect();
                    let w = p.powi(set.len() as i32) * (1.0 - p).powi((n - set.len()) as i32);
                    (set, w)
                })
                .filter(|(_, w)| *w > 0.0)
                .collect();
            Ok(Some(out))
        }
        _ => Err(LabError::Unsupported(format!(
            "{} noise is analytic-only; simulation supports erasure",
            noise.label()
        ))),
    }
}

/// Choi-error estimate for one encoded state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureEstimate {
    pub choi_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Estimated squared Choi fidelity `E_T 4^{-g(T)}`.
    pub fidelity_sq: f64,
    /// Probability of a pattern with `g > 0`.
    pub failure_prob: f64,
    pub patterns: usize,
    pub exact: bool,
}

fn error_from_loss(loss: f64) -> f64 {
    loss.clamp(0.0, 1.0).sqrt()
}

/// Squared fidelity and failure indicator for one pattern of physical qubits.
pub fn pattern_fidelity_sq(
    analyzer: &ErasureAnalyzer,
    enc: &EncodedState,
    erased: &[usize],
    scratch: &mut Vec<usize>,
) -> Result<(f64, bool)> {
    scratch.clear();
    scratch.extend(erased.iter().map(|&q| enc.physical(q)));
    let info = analyzer.mutual_information(scratch)?;
    Ok(((-(info as f64)).exp2(), info > 0))
}

/// Estimates `eps = sqrt(1 - E_T F_T^2)` for the encoded state.
///
/// Patterns are enumerated exactly when there are at most
/// [`EXACT_PATTERN_LIMIT`] of them, otherwise `n_patterns` are sampled and
/// a 95% normal interval for `F^2` is mapped through `sqrt(1 - .)`.
pub fn erasure_choi_error<R: Rng + ?Sized>(
    enc: &EncodedState,
    noise: &NoiseSpec,
    n_patterns: usize,
    rng: &mut R,
) -> Result<ErasureEstimate> {
    if n_patterns == 0 {
        return param("need at least one erasure pattern");
    }
    if !noise.is_erasure() {
        return Err(LabError::Unsupported(format!(
            "{} noise is analytic-only; simulation supports erasure",
            noise.label()
        )));
    }
    noise.validate(Some(enc.n))?;
    let analyzer = ErasureAnalyzer::new(&enc.state, &enc.reference())?;
    let mut scratch = Vec::new();
    if let Some(patterns) = exact_patterns(noise, enc.n)? {
        let (mut loss, mut fail) = (0.0, 0.0);
        for (set, w) in &patterns {
            let (v, failed) = pattern_fidelity_sq(&analyzer, enc, set, &mut scratch)?;
            loss += w * (1.0 - v);
            if failed {
                fail += w;
            }
        }
        let e = error_from_loss(loss);
        return Ok(ErasureEstimate {
            choi_error: e,
            ci_low: e,
            ci_high: e,
            fidelity_sq: 1.0 - loss,
            failure_prob: fail,
            patterns: patterns.len(),
            exact: true,
        });
    }
    let (mut sum, mut sum_sq, mut fails) = (0.0, 0.0, 0usize);
    for _ in 0..n_patterns {
        let set = sample_erasure_pattern(noise, enc.n, rng)?;
        let (v, failed) = pattern_fidelity_sq(&analyzer, enc, &set, &mut scratch)?;
        sum += 1.0 - v;
        sum_sq += (1.0 - v) * (1.0 - v);
        fails += failed as usize;
    }
    let m = n_patterns as f64;
    let mean = sum / m;
    let var = if n_patterns > 1 {
        ((sum_sq - sum * sum / m) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / m).sqrt();
    Ok(ErasureEstimate {
        choi_error: error_from_loss(mean),
        ci_low: error_from_loss(mean - half),
        ci_high: error_from_loss(mean + half),
        fidelity_sq: 1.0 - mean,
        failure_prob: fails as f64 / m,
        patterns: n_patterns,
        exact: false,
    })
}

/// Sampling effort and seeding of an ensemble estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_circuits: usize,
    pub n_patterns: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub bootstrap_resamples: usize,
    /// Prepend a random logical Pauli layer to every circuit.
    pub pauli_twirl: bool,
}

impl SimConfig {
    pub fn new(n_circuits: usize, n_patterns: usize, seed: u64) -> Self {
        SimConfig {
            n_circuits,
            n_patterns,
            seed,
            workers: None,
            bootstrap_resamples: 1000,
            pauli_twirl: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Monte-Carlo estimate of `E_U eps_Choi` with all inputs echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub family: Option<Family>,
    pub n: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub xi: Option<usize>,
    pub noise: NoiseSpec,
    pub n_circuits: usize,
    pub n_patterns_per_circuit: usize,
    pub exact_patterns: bool,
    pub seed: u64,
    pub rng_algorithm: String,
    pub mean_choi_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub std_error: f64,
    pub mean_failure_prob: f64,
    pub bootstrap_resamples: usize,
    pub wall_time_s: f64,
    pub version: String,
}

/// Stream reserved for the bootstrap resampling.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// Percentile bootstrap interval (95%) of the mean of `values`.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 || resamples == 0 {
        return (mean, mean);
    }
    let mut rng = stream_rng(seed, BOOTSTRAP_STREAM);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(0.025).min(mean), at(0.975).max(mean))
}

fn run_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => param("worker count must be positive"),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| LabError::Invariant(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Estimate over circuits drawn from `spec`; circuit `i` uses stream `i`
/// of `config.seed`, so results do not depend on the worker count.
pub fn estimate_spec_choi(
    spec: &CircuitSpec,
    noise: &NoiseSpec,
    config: &SimConfig,
) -> Result<SimReport> {
    let start = Instant::now();
    if config.n_circuits == 0 || config.n_patterns == 0 {
        return param("need at least one circuit and one pattern");
    }
    if !noise.is_erasure() {
        return Err(LabError::Unsupported(format!(
            "{} noise is an analytic-only noise family",
            noise.label()
        )));
    }
    noise.validate(Some(spec.n_qubits))?;
    spec.validate()?;
    let per_circuit: Vec<Result<ErasureEstimate>> = run_pool(config.workers, || {
        (0..config.n_circuits)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(config.seed, i as u64);
                let wrapped;
                let circuit = if config.pauli_twirl {
                    wrapped = ensembles::pauli_twirl_wrap(spec, &mut rng)?;
                    &wrapped
                } else {
                    spec
                };
                let enc = encode_epr_state(circuit, &mut rng)?;
                erasure_choi_error(&enc, noise, config.n_patterns, &mut rng)
            })
            .collect()
    })?;
    let per_circuit: Vec<ErasureEstimate> = per_circuit.into_iter().collect::<Result<_>>()?;
    let errors: Vec<f64> = per_circuit.iter().map(|e| e.choi_error).collect();
    let m = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / m;
    let var = if errors.len() > 1 {
        errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let (ci_low, ci_high) = bootstrap_mean_ci(&errors, config.bootstrap_resamples, config.seed);
    Ok(SimReport {
        family: spec.family,
        n: spec.n_qubits,
        k: spec.k(),
        epsilon: None,
        xi: spec.xi,
        noise: *noise,
        n_circuits: config.n_circuits,
        n_patterns_per_circuit: per_circuit[0].patterns,
        exact_patterns: per_circuit[0].exact,
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        mean_choi_error: mean,
        ci_low,
        ci_high,
        std_error: (var / m).sqrt(),
        mean_failure_prob: per_circuit.iter().map(|e| e.failure_prob).sum::<f64>() / m,
        bootstrap_resamples: config.bootstrap_resamples,
        wall_time_s: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    })
}

/// Builds the family's circuit layout and estimates its expected Choi error.
pub fn estimate_ensemble_choi(
    params: &EnsembleParams,
    noise: &NoiseSpec,
    config: &SimConfig,
) -> Result<SimReport> {
    if !noise.is_erasure() {
        return Err(LabError::Unsupported(format!(
            "{} noise is an analytic-only noise family",
            noise.label()
        )));
    }
    let spec = ensembles::build(params)?;
    let mut report = estimate_spec_choi(&spec, noise, config)?;
    report.epsilon = Some(params.epsilon);
    Ok(report)
}
