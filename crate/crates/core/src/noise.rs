//! Noise descriptors and erasure-pattern sampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, LabError, Result};

/// Probabilities of `I, X, Y, Z` in a single-qubit Pauli channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct PauliVec {
    p_i: f64,
    p_x: f64,
    p_y: f64,
    p_z: f64,
}

impl PauliVec {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let all = [p_i, p_x, p_y, p_z];
        if all.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return param(format!(
                "Pauli probabilities must be nonnegative, got {all:?}"
            ));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > Self::TOLERANCE {
            return param(format!("Pauli probabilities sum to {sum}, not 1"));
        }
        Ok(PauliVec { p_i, p_x, p_y, p_z })
    }

    /// `(p_I, p_X, p_Y, p_Z)`.
    pub fn probs(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }
}

impl TryFrom<[f64; 4]> for PauliVec {
    type Error = LabError;

    fn try_from(p: [f64; 4]) -> Result<Self> {
        PauliVec::new(p[0], p[1], p[2], p[3])
    }
}

impl From<PauliVec> for [f64; 4] {
    fn from(v: PauliVec) -> Self {
        v.probs()
    }
}

/// Noise families with their strength parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    PauliIid { probs: PauliVec },
    Depolarizing { p: f64 },
    ErasureIid { p: f64 },
    ErasureFixedT { t: usize },
    AmplitudeDamping { p: f64 },
    ZzCoupling { p: f64 },
}

fn check_unit(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return param(format!("{name} strength {p} outside [0, 1]"));
    }
    Ok(())
}

impl NoiseSpec {
    /// Checks the strength parameters; `n` binds a fixed erasure count.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        match *self {
            NoiseSpec::PauliIid { .. } => Ok(()),
            NoiseSpec::Depolarizing { p } => check_unit("depolarizing", p),
            NoiseSpec::ErasureIid { p } => check_unit("erasure", p),
            NoiseSpec::AmplitudeDamping { p } => check_unit("amplitude damping", p),
            NoiseSpec::ZzCoupling { p } => check_unit("ZZ coupling", p),
            NoiseSpec::ErasureFixedT { t } => match n {
                Some(n) if t > n => param(format!("{t} erasures exceed {n} qubits")),
                _ => Ok(()),
            },
        }
    }

    pub fn is_erasure(&self) -> bool {
        matches!(
            self,
            NoiseSpec::ErasureIid { .. } | NoiseSpec::ErasureFixedT { .. }
        )
    }

    /// Pauli probabilities for the Pauli-type families.
    pub fn pauli_vec(&self) -> Option<PauliVec> {
        match *self {
            NoiseSpec::PauliIid { probs } => Some(probs),
            NoiseSpec::Depolarizing { p } => to_pauli_vec(p).ok(),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseSpec::PauliIid { .. } => "pauli",
            NoiseSpec::Depolarizing { .. } => "depolarizing",
            NoiseSpec::ErasureIid { .. } => "erasure-iid",
            NoiseSpec::ErasureFixedT { .. } => "erasure-t",
            NoiseSpec::AmplitudeDamping { .. } => "amplitude-damping",
            NoiseSpec::ZzCoupling { .. } => "zz",
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseSpec::PauliIid { probs } => {
                let [a, b, c, d] = probs.probs();
                write!(f, "pauli:{a},{b},{c},{d}")
            }
            NoiseSpec::Depolarizing { p }
            | NoiseSpec::ErasureIid { p }
            | NoiseSpec::AmplitudeDamping { p }
            | NoiseSpec::ZzCoupling { p } => write!(f, "{}:{p}", self.label()),
            NoiseSpec::ErasureFixedT { t } => write!(f, "erasure-t:{t}"),
        }
    }
}

/// Parses `family:value`, e.g. `erasure-iid:0.1`, `erasure-t:12`,
/// `depolarizing:0.05` or `pauli:0.9,0.05,0.03,0.02`.
impl FromStr for NoiseSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| LabError::Parameter(format!("noise {s:?} is not family:value")))?;
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| LabError::Parameter(format!("bad noise strength {v:?}")))
        };
        let spec = match kind.trim() {
            "pauli" => {
                let parts: Vec<f64> = value.split(',').map(num).collect::<Result<_>>()?;
                let [a, b, c, d] = parts[..] else {
                    return param("pauli noise takes four probabilities");
                };
                NoiseSpec::PauliIid {
                    probs: PauliVec::new(a, b, c, d)?,
                }
            }
            "depolarizing" => NoiseSpec::Depolarizing { p: num(value)? },
            "erasure-iid" | "erasure" => NoiseSpec::ErasureIid { p: num(value)? },
            "erasure-t" => NoiseSpec::ErasureFixedT {
                t: value
                    .trim()
                    .parse()
                    .map_err(|_| LabError::Parameter(format!("bad erasure count {value:?}")))?,
            },
            "amplitude-damping" | "amp" => NoiseSpec::AmplitudeDamping { p: num(value)? },
            "zz" => NoiseSpec::ZzCoupling { p: num(value)? },
            other => return param(format!("unknown noise family {other:?}")),
        };
        spec.validate(None)?;
        Ok(spec)
    }
}

/// Pauli vector of the depolarizing channel of strength `p`.
pub fn to_pauli_vec(p: f64) -> Result<PauliVec> {
    check_unit("depolarizing", p)?;
    let q = p / 4.0;
    PauliVec::new(1.0 - 3.0 * q, q, q, q)
}

/// Sorted erased positions among `n` qubits.
pub fn sample_erasure_pattern<R: Rng + ?Sized>(
    noise: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    match *noise {
        NoiseSpec::ErasureIid { p } => {
            check_unit("erasure", p)?;
            Ok((0..n).filter(|_| rng.gen::<f64>() < p).collect())
        }
        NoiseSpec::ErasureFixedT { t } => {
            if t > n {
                return param(format!("{t} erasures exceed {n} qubits"));
            }
            // Partial Fisher-Yates.
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..t {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            idx.truncate(t);
            idx.sort_unstable();
            Ok(idx)
        }
        other => Err(LabError::Unsupported(format!(
            "{} noise has no sampler; it is analytic-only",
            other.label()
        ))),
    }
}
