//! Closed-form rates, Choi-error bounds, baselines and rate curves.
//!
//! Every `2^{-n(...)}` term is carried as a base-2 logarithm until the final
//! root, so evaluations stay finite for registers of millions of qubits.
//! All logarithms are base 2.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::ensembles::{self, Family};
use crate::error::{param, LabError, Result};
use crate::noise::NoiseSpec;

fn lit<T: Float>(x: f64) -> T {
    T::from(x).expect("float literal")
}

/// `-x log2 x` with the `0 log 0 = 0` convention.
fn entropy_term<T: Float>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        -x * x.log2()
    }
}

pub fn binary_entropy<T: Float>(p: T) -> T {
    entropy_term(p) + entropy_term(T::one() - p)
}

/// Binary relative entropy `D(a || b)` in bits.
pub fn relative_entropy<T: Float>(a: T, b: T) -> T {
    let one = T::one();
    let part = |x: T, y: T| {
        if x <= T::zero() {
            T::zero()
        } else {
            x * (x / y).log2()
        }
    };
    part(a, b) + part(one - a, one - b)
}

/// `2 log2(sum_j sqrt(p_j))` over `(p_I, p_X, p_Y, p_Z)`.
pub fn f_of_p<T: Float>(probs: [T; 4]) -> T {
    let s = probs
        .iter()
        .fold(T::zero(), |acc, &p| acc + p.max(T::zero()).sqrt());
    lit::<T>(2.0) * s.log2()
}

/// Shannon entropy of the Pauli distribution.
pub fn h_of_p<T: Float>(probs: [T; 4]) -> T {
    probs
        .iter()
        .fold(T::zero(), |acc, &p| acc + entropy_term(p))
}

/// `log2(2^a + 2^b)` without leaving log space.
pub fn log2_add<T: Float>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lit::<T>(2.0).powf(lo - hi)).ln_1p() / lit::<T>(std::f64::consts::LN_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NonSmooth,
    Smooth,
}

fn strength<T: Float>(noise: &NoiseSpec) -> Result<T> {
    noise.validate(None)?;
    let p = match *noise {
        NoiseSpec::Depolarizing { p }
        | NoiseSpec::ErasureIid { p }
        | NoiseSpec::AmplitudeDamping { p }
        | NoiseSpec::ZzCoupling { p } => p,
        _ => return param(format!("{} noise has no scalar strength", noise.label())),
    };
    Ok(lit(p))
}

fn pauli_probs<T: Float>(noise: &NoiseSpec) -> Option<[T; 4]> {
    noise.pauli_vec().map(|v| v.probs().map(lit))
}

/// `1 - 2 c log2(sqrt(1-p) + sqrt(p))`.
pub fn zz_rate<T: Float>(p: T, c: T) -> T {
    T::one() - lit::<T>(2.0) * c * ((T::one() - p).sqrt() + p.sqrt()).log2()
}

/// Rate below which the expected Choi error decays for the given noise.
///
/// `k_over_n` is needed for ZZ coupling on brickwork circuits. Fixed-count
/// erasure has no rate form; use [`choi_upper_bound`].
pub fn achievable_rate<T: Float>(
    noise: &NoiseSpec,
    regime: Regime,
    family: Family,
    k_over_n: Option<T>,
) -> Result<T> {
    let one = T::one();
    let two = lit::<T>(2.0);
    if regime == Regime::Smooth && family == Family::Brickwork {
        return param("brickwork circuits have no smooth bound");
    }
    if let Some(probs) = pauli_probs::<T>(noise) {
        return Ok(match regime {
            Regime::NonSmooth => one - f_of_p(probs),
            Regime::Smooth => one - h_of_p(probs),
        });
    }
    match *noise {
        NoiseSpec::ErasureIid { .. } => {
            let p = strength::<T>(noise)?;
            Ok(match regime {
                Regime::NonSmooth => one - (one + lit::<T>(3.0) * p).log2(),
                Regime::Smooth => one - two * p,
            })
        }
        NoiseSpec::AmplitudeDamping { .. } => {
            let p = strength::<T>(noise)?;
            Ok(match regime {
                Regime::NonSmooth => -(one / (two - p) + (p / (two - p)).sqrt()).log2(),
                Regime::Smooth => binary_entropy((one - p) / two) - binary_entropy(p / two),
            })
        }
        NoiseSpec::ZzCoupling { .. } => {
            if regime == Regime::Smooth {
                return param("ZZ coupling has no smooth bound");
            }
            let p = strength::<T>(noise)?;
            let c = match family {
                Family::Brickwork => {
                    let r = k_over_n
                        .ok_or_else(|| LabError::Parameter("brickwork ZZ rate needs k/n".into()))?;
                    one + r
                }
                _ => one,
            };
            Ok(zz_rate(p, c))
        }
        NoiseSpec::ErasureFixedT { .. } => Err(LabError::Unsupported(
            "fixed-count erasure has no rate form".into(),
        )),
        _ => Err(LabError::Invariant("unhandled noise family".into())),
    }
}

/// `log2(4 eps^{1-k/n} n^{k/n} / log2(n/eps))`, the block-coupling term of
/// the double-layer bounds.
pub fn log2_coupling_term<T: Float>(n: T, k: T, epsilon: T) -> Result<T> {
    let one = T::one();
    let r = k / n;
    let xi = (n / epsilon).log2();
    if !(xi > T::zero()) {
        return param("epsilon must be below n");
    }
    Ok(lit::<T>(2.0) + (one - r) * epsilon.log2() + r * n.log2() - xi.log2())
}

/// Evaluated bound with every input echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: Family,
    pub noise: NoiseSpec,
    pub n: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub value: f64,
    pub log2_value: f64,
    /// Set when the bound is at least one and says nothing.
    pub vacuous: bool,
    pub formula_id: String,
    /// Base-2 logarithms of the addends under the outer root.
    pub log2_terms: BTreeMap<String, f64>,
    pub rate: Option<f64>,
    pub warnings: Vec<String>,
}

/// Query for [`choi_upper_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub family: Family,
    pub noise: NoiseSpec,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Smoothing parameter; selects the smooth bound when set.
    pub delta: Option<f64>,
    /// Keeps the finite-block factor `1 + 1/xi` in the double-layer ZZ rate.
    pub finite_block: bool,
}

impl BoundQuery {
    pub fn new(family: Family, noise: NoiseSpec, n: usize, k: usize, epsilon: f64) -> Self {
        BoundQuery {
            family,
            noise,
            n,
            k,
            epsilon,
            delta: None,
            finite_block: false,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_finite_block(mut self) -> Self {
        self.finite_block = true;
        self
    }
}

fn check_register(n: usize, k: usize) -> Result<()> {
    if n == 0 || k > n {
        return param(format!("invalid register n = {n}, k = {k}"));
    }
    Ok(())
}

fn check_delta(delta: Option<f64>) -> Result<()> {
    match delta {
        Some(d) if !(d > 0.0 && d < 1.0) => param(format!("delta must lie in (0, 1), got {d}")),
        _ => Ok(()),
    }
}

struct Terms {
    log2_terms: BTreeMap<String, f64>,
    warnings: Vec<String>,
    rate: Option<f64>,
}

impl Terms {
    fn new() -> Self {
        Terms {
            log2_terms: BTreeMap::new(),
            warnings: Vec::new(),
            rate: None,
        }
    }

    fn add(&mut self, name: &str, log2: f64) {
        self.log2_terms.insert(name.to_string(), log2);
    }

    fn log2_sum(&self) -> f64 {
        self.log2_terms
            .values()
            .fold(f64::NEG_INFINITY, |acc, &v| log2_add(acc, v))
    }
}

/// First exponent `-n (rate - k/n [- delta])`, plus a warning when the
/// rate does not exceed `k/n`.
fn decay_exponent(terms: &mut Terms, n: f64, k: f64, rate: f64, delta: f64) -> f64 {
    terms.rate = Some(rate);
    let margin = rate - k / n - delta;
    if margin <= 0.0 {
        terms.warnings.push(format!(
            "encoding rate {:.6} is not below the achievable rate {:.6}",
            k / n,
            rate - delta
        ));
    }
    -n * margin
}

fn finish(
    query: &BoundQuery,
    epsilon: Option<f64>,
    formula_id: String,
    terms: Terms,
    smooth: bool,
) -> BoundReport {
    let inner = terms.log2_sum();
    let log2_value = if let (true, Some(delta)) = (smooth, query.delta) {
        0.5 * log2_add((8.0 * delta).log2(), 0.5 * inner)
    } else {
        0.25 * inner
    };
    let value = log2_value.exp2();
    BoundReport {
        family: query.family,
        noise: query.noise,
        n: query.n,
        k: query.k,
        epsilon,
        delta: query.delta,
        value,
        log2_value,
        vacuous: log2_value >= 0.0,
        formula_id,
        log2_terms: terms.log2_terms,
        rate: terms.rate,
        warnings: terms.warnings,
    }
}

/// Upper bound on the expected Choi error of the random encoders.
///
/// Double-layer and brickwork families use their decoupling corollaries,
/// the global Clifford family uses [`clifford_baseline`]. Side conditions
/// that make a bound decay are reported as warnings.
pub fn choi_upper_bound(query: &BoundQuery) -> Result<BoundReport> {
    let BoundQuery {
        family,
        noise,
        n,
        k,
        epsilon,
        delta,
        finite_block,
    } = *query;
    check_register(n, k)?;
    check_delta(delta)?;
    noise.validate(Some(n))?;
    if family == Family::FullClifford {
        return clifford_baseline(&noise, n, k, delta);
    }
    if family == Family::BlockEncoding {
        return Err(LabError::Unsupported(
            "block encoding has only a lower bound; see block_lower_bound".into(),
        ));
    }
    if !(epsilon > 0.0) || epsilon >= n as f64 {
        return param(format!("epsilon must lie in (0, n), got {epsilon}"));
    }
    let smooth = delta.is_some();
    let regime = if smooth {
        Regime::Smooth
    } else {
        Regime::NonSmooth
    };
    let (nf, kf) = (n as f64, k as f64);
    let mut terms = Terms::new();

    let first = match noise {
        NoiseSpec::ErasureFixedT { t } => {
            if family != Family::DoubleLayer || smooth {
                return Err(LabError::Unsupported(
                    "fixed-count erasure bound exists for non-smooth double-layer circuits only"
                        .into(),
                ));
            }
            let e = -(nf - 2.0 * t as f64 - kf);
            if e >= 0.0 {
                terms
                    .warnings
                    .push("n - 2t - k is not positive; the first addend is at least one".into());
            }
            e
        }
        NoiseSpec::ZzCoupling { p } if family == Family::DoubleLayer && finite_block && !smooth => {
            let xi = ensembles::block_size(n, epsilon)? as f64;
            let rate = zz_rate(p, 1.0 + 1.0 / xi);
            decay_exponent(&mut terms, nf, kf, rate, 0.0)
        }
        _ => {
            let rate = achievable_rate(&noise, regime, family, Some(kf / nf))?;
            decay_exponent(&mut terms, nf, kf, rate, delta.unwrap_or(0.0))
        }
    };
    terms.add("decay", first);

    match family {
        Family::DoubleLayer => {
            terms.add("coupling", log2_coupling_term(nf, kf, epsilon)?);
        }
        Family::Brickwork => {
            if k == 0 {
                return param("brickwork bound needs k >= 1");
            }
            let power = nf / kf - 2.0;
            if power <= 0.0 {
                terms
                    .warnings
                    .push("n/k - 2 is not positive; the coupling term does not decay".into());
            }
            terms.add("coupling", power * (epsilon / kf).log2());
        }
        _ => unreachable!(),
    }
    let id = format!(
        "{family}/{}/{}",
        noise.label(),
        if smooth { "smooth" } else { "non-smooth" }
    );
    Ok(finish(query, Some(epsilon), id, terms, smooth))
}

/// Bound for a uniformly random Clifford encoder on all `n` qubits.
pub fn clifford_baseline(
    noise: &NoiseSpec,
    n: usize,
    k: usize,
    delta: Option<f64>,
) -> Result<BoundReport> {
    check_register(n, k)?;
    check_delta(delta)?;
    noise.validate(Some(n))?;
    let smooth = delta.is_some();
    let regime = if smooth {
        Regime::Smooth
    } else {
        Regime::NonSmooth
    };
    let (nf, kf) = (n as f64, k as f64);
    let mut terms = Terms::new();
    let exponent = match *noise {
        NoiseSpec::ErasureFixedT { t } => {
            if smooth {
                return Err(LabError::Unsupported(
                    "fixed-count erasure has no smooth baseline".into(),
                ));
            }
            -(nf - 2.0 * t as f64 - kf)
        }
        _ => {
            let rate = achievable_rate(noise, regime, Family::FullClifford, None)?;
            decay_exponent(&mut terms, nf, kf, rate, delta.unwrap_or(0.0))
        }
    };
    terms.add("decay", exponent);
    let query = BoundQuery {
        family: Family::FullClifford,
        noise: *noise,
        n,
        k,
        epsilon: f64::NAN,
        delta,
        finite_block: false,
    };
    let id = format!(
        "clifford/{}/{}",
        noise.label(),
        if smooth { "smooth" } else { "non-smooth" }
    );
    Ok(finish(&query, None, id, terms, smooth))
}

/// Lower bound on the block-encoding Choi error, split into its two terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockLowerBound<T> {
    /// `n (eps/n)^{8 D(tau || p)}` with `tau = (1 - k/n)/2`.
    pub term_poly: T,
    /// `(1 - (1 - 1/m)^m) / sqrt 2` with `m = n / (4 xi)` blocks.
    pub term_const: T,
    pub tau: T,
    pub relative_entropy: T,
    pub blocks: T,
}

pub fn block_lower_bound<T: Float>(n: T, k: T, epsilon: T, p: T) -> Result<BlockLowerBound<T>> {
    let one = T::one();
    let two = lit::<T>(2.0);
    if !(n > T::zero()) || k < T::zero() || k > n {
        return param("invalid register for block lower bound");
    }
    let tau = (one - k / n) / two;
    if !(tau > p) {
        return param(format!(
            "outside Chernoff regime: (1 - k/n)/2 = {:?} does not exceed p = {:?}",
            tau.to_f64(),
            p.to_f64()
        ));
    }
    let xi = (n / epsilon).log2();
    if !(xi > T::zero()) {
        return param("epsilon must be below n");
    }
    let d = relative_entropy(tau, p);
    let term_poly = n * (epsilon / n).powf(lit::<T>(8.0) * d);
    let m = n / (lit::<T>(4.0) * xi);
    if m < one {
        return param("fewer than one block of size 4 xi");
    }
    let term_const = (one - (one - one / m).powf(m)) / two.sqrt();
    Ok(BlockLowerBound {
        term_poly,
        term_const,
        tau,
        relative_entropy: d,
        blocks: m,
    })
}

/// Growth exponents of the block lower bound and of the double-layer upper
/// bound's coupling term under `eps = n^{-beta}` and `k = r n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonExponents<T> {
    pub block_lower: T,
    pub double_layer_upper: T,
}

pub fn comparison_exponents<T: Float>(r: T, p: T, beta: T) -> Result<ComparisonExponents<T>> {
    let one = T::one();
    let tau = (one - r) / lit::<T>(2.0);
    if !(tau > p) {
        return param("outside Chernoff regime");
    }
    let d = relative_entropy(tau, p);
    Ok(ComparisonExponents {
        block_lower: one - (one + beta) * lit::<T>(8.0) * d,
        double_layer_upper: ((one - r) * (-beta) + r) / lit::<T>(4.0),
    })
}

/// Layer count of the built circuit for the family.
pub fn depth_formula(family: Family, n: usize, k: usize, epsilon: f64) -> Result<usize> {
    match family {
        Family::Brickwork => ensembles::brickwork_depth(n, k, epsilon),
        Family::DoubleLayer => {
            ensembles::double_layer_regions(n, ensembles::block_size(n, epsilon)?)?;
            Ok(2)
        }
        Family::BlockEncoding | Family::FullClifford => Ok(1),
    }
}

/// Average fidelity from the Choi fidelity of a `k`-qubit code.
pub fn f_ave_from_choi<T: Float>(f_choi: T, k: u32) -> T {
    let d = lit::<T>(2.0).powi(k as i32);
    ((d * f_choi * f_choi + T::one()) / (d + T::one())).sqrt()
}

/// Decoupling theorem shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecouplingVariant<T> {
    /// Double-layer blocked circuit with blocks of `xi` qubits.
    DoubleLayer { xi: u32 },
    /// Brickwork circuit with local dimension `q` at the prescribed depth.
    Brickwork { q: T, n: T, epsilon: T },
}

/// Right-hand side of the non-smooth decoupling theorems for product
/// noise, from per-region collision entropies `H(S_i|E_i)` and `H(S_i|R_i)`.
///
/// Entropies may be `+inf` for noiseless regions.
pub fn decoupling_rhs<T: Float>(
    variant: DecouplingVariant<T>,
    h_se: &[T],
    h_sr: &[T],
) -> Result<T> {
    if h_se.len() != h_sr.len() || h_se.is_empty() {
        return param("entropy lists must be nonempty and of equal length");
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let total = h_se
        .iter()
        .zip(h_sr)
        .fold(T::zero(), |acc, (&a, &b)| acc + a + b);
    let first = two.powf(-total);
    let spread = h_sr
        .iter()
        .fold(T::zero(), |acc, &h| acc.max(two.powf(h)).max(two.powf(-h)));
    let product = h_se.iter().zip(h_sr).fold(one, |acc, (&a, &b)| {
        let s = a + b;
        let w = if s.is_nan() { one } else { two.powf(-s) };
        acc * one.max(w)
    });
    let coupling = match variant {
        DecouplingVariant::DoubleLayer { xi } => {
            if !h_se.len().is_multiple_of(2) {
                return param("double-layer decoupling needs an even region count");
            }
            let s = two.powi(xi as i32);
            let eta = s / (s * s + one);
            let blocks = (h_se.len() / 2) as i32;
            two * ((one + two * eta * spread).powi(blocks - 1) - one)
        }
        DecouplingVariant::Brickwork { q, n, epsilon } => {
            let eta = q / (q * q + one);
            let power = (one / (two * eta * spread)).log2();
            (epsilon / n).powf(power)
        }
    };
    Ok((first + coupling * product).sqrt())
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<T: Float, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return param("bisection bracket does not change sign");
    }
    let neg_at_a = fa < T::zero();
    for _ in 0..500 {
        let mid = (a + b) / lit::<T>(2.0);
        if b - a <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm < T::zero()) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a + b) / lit::<T>(2.0))
}

/// Newton iteration from `x0`.
pub fn newton<T: Float, F: Fn(T) -> T, D: Fn(T) -> T>(
    f: F,
    df: D,
    x0: T,
    tol: T,
    max_iter: usize,
) -> Result<T> {
    let mut x = x0;
    for _ in 0..max_iter {
        let d = df(x);
        if d == T::zero() || !d.is_finite() {
            return Err(LabError::Invariant(
                "Newton step hit a flat derivative".into(),
            ));
        }
        let step = f(x) / d;
        x = x - step;
        if step.abs() <= tol {
            return Ok(x);
        }
    }
    Err(LabError::Invariant(
        "Newton iteration did not converge".into(),
    ))
}

/// Hashing rate `1 - h` of depolarizing noise of strength `p`.
pub fn depolarizing_hashing_rate<T: Float>(p: T) -> T {
    let q = p / lit::<T>(4.0);
    T::one() - h_of_p([T::one() - lit::<T>(3.0) * q, q, q, q])
}

/// Derivative of [`depolarizing_hashing_rate`] in `p`.
pub fn depolarizing_hashing_slope<T: Float>(p: T) -> T {
    let four = lit::<T>(4.0);
    -(lit::<T>(3.0) / four) * ((four - lit::<T>(3.0) * p) / p).log2()
}

/// Depolarizing strength at which the hashing rate vanishes, by bisection
/// and by Newton's method.
pub fn hashing_threshold<T: Float>(tol: T) -> Result<(T, T)> {
    let lo = lit::<T>(1e-3);
    let hi = lit::<T>(0.5);
    let by_bisection = bisect(depolarizing_hashing_rate, lo, hi, tol)?;
    let by_newton = newton(
        depolarizing_hashing_rate,
        depolarizing_hashing_slope,
        lit::<T>(0.2),
        tol,
        100,
    )?;
    Ok((by_bisection, by_newton))
}

pub const RATE_CURVE_COLUMNS: [&str; 8] = [
    "p",
    "pauli_nonsmooth",
    "pauli_hashing",
    "erasure_nonsmooth",
    "erasure_capacity",
    "amp_nonsmooth",
    "amp_smooth",
    "zz_nonsmooth",
];

/// One row per grid point, columns as in [`RATE_CURVE_COLUMNS`], clipped at 0.
pub fn emit_rate_curves<T: Float>(p_grid: &[T]) -> Result<Vec<[T; 8]>> {
    let one = T::one();
    let two = lit::<T>(2.0);
    p_grid
        .iter()
        .map(|&p| {
            if !(p >= T::zero() && p <= one) {
                return param(format!("grid point {:?} outside [0, 1]", p.to_f64()));
            }
            let q = p / lit::<T>(4.0);
            let dep = [one - lit::<T>(3.0) * q, q, q, q];
            let cols = [
                one - f_of_p(dep),
                one - h_of_p(dep),
                one - (one + lit::<T>(3.0) * p).log2(),
                one - two * p,
                -(one / (two - p) + (p / (two - p)).sqrt()).log2(),
                binary_entropy((one - p) / two) - binary_entropy(p / two),
                zz_rate(p, one),
            ];
            let mut row = [p; 8];
            for (slot, v) in row[1..].iter_mut().zip(cols) {
                *slot = v.max(T::zero());
            }
            Ok(row)
        })
        .collect()
}

/// `p = 0, step, ..., last` with exact grid arithmetic.
pub fn uniform_grid(points: usize, last: f64) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0; points];
    }
    (0..points)
        .map(|i| last * i as f64 / (points - 1) as f64)
        .collect()
}

/// C-style `%.{sig}g` formatting.
pub fn format_g(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip(&format!("{:.*}", decimals, x))
    }
}

/// CSV text with a header row, `%.12g` cells and LF line endings.
pub fn rate_curves_csv(rows: &[[f64; 8]]) -> String {
    let mut out = RATE_CURVE_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_g(v, 12)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_g_matches_printf() {
        assert_eq!(format_g(0.5, 12), "0.5");
        assert_eq!(format_g(1.0, 12), "1");
        assert_eq!(format_g(1e-5, 12), "1e-05");
        assert_eq!(format_g(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(format_g(0.0001234, 12), "0.0001234");
        assert_eq!(format_g(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(format_g(-0.25, 3), "-0.25");
    }

    #[test]
    fn log2_add_is_stable() {
        assert!((log2_add(0.0f64, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(log2_add(-1e6f64, 3.0), 3.0);
        assert_eq!(log2_add(f64::NEG_INFINITY, -2.0), -2.0);
    }
}
