//! Second-moment engines over `{I, F}` configurations.
//!
//! Configurations of `n` sites are bitmasks with bit `j` set when site `j`
//! carries the swap label `F`. All engines are generic over [`Scalar`], so
//! the same code runs in `f64` and in exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::ensembles::{distribute_logical, CircuitSpec};
use crate::error::{param, LabError, Result};
use crate::scalar::Scalar;

/// Largest site count handled by the dense configuration vector.
pub const MAX_MARKOV_SITES: usize = 12;

/// `tr(O2 E_U[U^{(2)} O1 U^{(2)dag}])` for a global Haar twirl on `n` qudits.
pub fn haar_second_moment<T: Scalar>(tr1_i: T, tr1_f: T, tr2_i: T, tr2_f: T, n: u32, q: u64) -> T {
    let dim = T::from_u64(q).powi(n);
    let dim2 = dim.clone() * dim.clone();
    let direct = tr1_i.clone() * tr2_i.clone() + tr1_f.clone() * tr2_f.clone();
    let cross = (tr1_i * tr2_f + tr1_f * tr2_i) / dim;
    (direct - cross) / (dim2 - T::one())
}

/// Traces of the two boundary operators against `I`/`F` insertions.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryTraces<T> {
    /// Per-site `(tr(O I), tr(O F))` for product operators.
    Product { o1: Vec<(T, T)>, o2: Vec<(T, T)> },
    /// `tr(O sigma)` for every configuration `sigma`, indexed by bitmask.
    Table { o1: Vec<T>, o2: Vec<T> },
}

impl<T: Scalar> BoundaryTraces<T> {
    pub fn sites(&self) -> Result<usize> {
        match self {
            BoundaryTraces::Product { o1, o2 } => {
                if o1.len() != o2.len() {
                    return param("boundary operators cover different site counts");
                }
                Ok(o1.len())
            }
            BoundaryTraces::Table { o1, o2 } => {
                if o1.len() != o2.len() || !o1.len().is_power_of_two() {
                    return param("trace tables must share a power-of-two length");
                }
                Ok(o1.len().trailing_zeros() as usize)
            }
        }
    }

    /// `tr(O1 sigma)` and `tr(O2 sigma)` for the all-`I` and all-`F` configurations.
    pub fn global(&self) -> Result<[T; 4]> {
        let n = self.sites()?;
        Ok(match self {
            BoundaryTraces::Product { o1, o2 } => {
                let prod = |v: &[(T, T)], f: bool| {
                    v.iter().fold(T::one(), |acc, (i, x)| {
                        acc * if f { x.clone() } else { i.clone() }
                    })
                };
                [
                    prod(o1, false),
                    prod(o1, true),
                    prod(o2, false),
                    prod(o2, true),
                ]
            }
            BoundaryTraces::Table { o1, o2 } => {
                let all = (1usize << n) - 1;
                [
                    o1[0].clone(),
                    o1[all].clone(),
                    o2[0].clone(),
                    o2[all].clone(),
                ]
            }
        })
    }

    fn o1_table(&self, n: usize) -> Vec<T> {
        match self {
            BoundaryTraces::Product { o1, .. } => product_table(o1, n),
            BoundaryTraces::Table { o1, .. } => o1.clone(),
        }
    }

    fn o2_table(&self, n: usize) -> Vec<T> {
        match self {
            BoundaryTraces::Product { o2, .. } => product_table(o2, n),
            BoundaryTraces::Table { o2, .. } => o2.clone(),
        }
    }
}

fn product_table<T: Scalar>(sites: &[(T, T)], n: usize) -> Vec<T> {
    (0..1usize << n)
        .map(|c| {
            sites.iter().enumerate().fold(T::one(), |acc, (j, (i, f))| {
                acc * if c >> j & 1 == 1 {
                    f.clone()
                } else {
                    i.clone()
                }
            })
        })
        .collect()
}

/// Two-site gate layout over `sites` qudits of dimension `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteLayout {
    pub sites: usize,
    pub q: u64,
    pub layers: Vec<Vec<(usize, usize)>>,
}

impl SiteLayout {
    /// Staggered brickwork of `depth` layers on a ring or an open chain.
    pub fn brickwork(sites: usize, q: u64, depth: usize, periodic: bool) -> Self {
        let layers = (0..depth)
            .map(|l| {
                let offset = l % 2;
                (0..sites / 2)
                    .filter_map(|i| {
                        let a = 2 * i + offset;
                        let b = a + 1;
                        if b < sites {
                            Some((a, b))
                        } else if periodic {
                            Some((a % sites, b % sites))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        SiteLayout { sites, q, layers }
    }

    /// Site layout of a brickwork circuit spec; one site per qudit.
    pub fn from_spec(spec: &CircuitSpec) -> Result<Self> {
        let w = spec
            .qudit_width
            .ok_or_else(|| LabError::Parameter("spec carries no qudit width".into()))?;
        if w == 0 || w > 31 || !spec.n_qubits.is_multiple_of(w) {
            return param("qudit width incompatible with register");
        }
        let mut layers = Vec::with_capacity(spec.layers.len());
        for layer in &spec.layers {
            let mut pairs = Vec::new();
            for g in &layer.gates {
                let mut sites: Vec<usize> = g.support.iter().map(|&s| s / w).collect();
                sites.dedup();
                match sites[..] {
                    [a, b] => pairs.push((a, b)),
                    _ => return param("gate does not act on exactly two qudits"),
                }
            }
            layers.push(pairs);
        }
        Ok(SiteLayout {
            sites: spec.n_qubits / w,
            q: 1u64 << w,
            layers,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.sites > MAX_MARKOV_SITES {
            return param(format!(
                "site count {} outside 1..={MAX_MARKOV_SITES}",
                self.sites
            ));
        }
        if self.q < 2 {
            return param("local dimension must be at least 2");
        }
        for layer in &self.layers {
            let mut used = 0usize;
            for &(a, b) in layer {
                if a >= self.sites || b >= self.sites || a == b {
                    return param(format!("invalid site pair ({a}, {b})"));
                }
                if used >> a & 1 == 1 || used >> b & 1 == 1 {
                    return param("overlapping gates in a layer");
                }
                used |= 1 << a | 1 << b;
            }
        }
        Ok(())
    }
}

/// Expansion of `O1` after a layer of single-qudit twirls:
/// `c_gamma = (q^2-1)^{-n} tr(O1 (x)_j g_{gamma_j})`, `g_I = I - F/q`, `g_F = F - I/q`.
pub fn single_site_coefficients<T: Scalar>(o1: &[T], n: usize, q: u64) -> Vec<T> {
    let qf = T::from_u64(q);
    let inv_q = T::one() / qf.clone();
    let mut v = o1.to_vec();
    for j in 0..n {
        let bit = 1usize << j;
        for c in 0..v.len() {
            if c & bit == 0 {
                let a = v[c].clone();
                let b = v[c | bit].clone();
                v[c] = a.clone() - b.clone() * inv_q.clone();
                v[c | bit] = b - a * inv_q.clone();
            }
        }
    }
    let norm = (qf.clone() * qf - T::one()).powi(n as u32);
    v.into_iter().map(|x| x / norm.clone()).collect()
}

/// Applies one two-qudit twirl on sites `(a, b)` to a configuration vector.
pub fn apply_pair<T: Scalar>(v: &mut [T], a: usize, b: usize, eta: &T) {
    let (ba, bb) = (1usize << a, 1usize << b);
    for c in 0..v.len() {
        if c & (ba | bb) != 0 {
            continue;
        }
        let mixed = v[c | ba].clone() + v[c | bb].clone();
        if mixed == T::zero() {
            continue;
        }
        let s = eta.clone() * mixed;
        v[c] = v[c].clone() + s.clone();
        v[c | ba | bb] = v[c | ba | bb].clone() + s;
        v[c | ba] = T::zero();
        v[c | bb] = T::zero();
    }
}

/// Flip weight `q / (q^2 + 1)` of a two-qudit twirl.
pub fn flip_weight<T: Scalar>(q: u64) -> T {
    let qf = T::from_u64(q);
    qf.clone() / (qf.clone() * qf + T::one())
}

/// Configuration weights after all layers, starting from the single-site expansion of `O1`.
pub fn propagate<T: Scalar>(layout: &SiteLayout, traces: &BoundaryTraces<T>) -> Result<Vec<T>> {
    layout.validate()?;
    let n = traces.sites()?;
    if n != layout.sites {
        return param("boundary traces do not match the layout");
    }
    let mut v = single_site_coefficients(&traces.o1_table(n), n, layout.q);
    let eta = flip_weight::<T>(layout.q);
    for layer in &layout.layers {
        for &(a, b) in layer {
            apply_pair(&mut v, a, b, &eta);
        }
    }
    Ok(v)
}

/// Exact `tr(O2 Phi(O1))` for the layered two-qudit twirl, preceded by
/// single-qudit twirls on every site.
pub fn markov_second_moment_exact<T: Scalar>(
    layout: &SiteLayout,
    traces: &BoundaryTraces<T>,
) -> Result<T> {
    let v = propagate(layout, traces)?;
    let o2 = traces.o2_table(layout.sites);
    Ok(v.into_iter()
        .zip(o2)
        .fold(T::zero(), |acc, (w, t)| acc + w * t))
}

/// Closed-form haar value for the same boundary traces.
pub fn haar_for<T: Scalar>(layout: &SiteLayout, traces: &BoundaryTraces<T>) -> Result<T> {
    let [a, b, c, d] = traces.global()?;
    Ok(haar_second_moment(
        a,
        b,
        c,
        d,
        layout.sites as u32,
        layout.q,
    ))
}

/// Absorption probabilities `(to all-I, to all-F)` of the biased walk
/// started with `m` of `n` sites labelled `F`.
pub fn biased_walk_absorption<T: Scalar>(m: u32, n: u32, q: u64) -> Result<(T, T)> {
    if m > n || n == 0 || q < 2 {
        return param(format!("invalid walk: m = {m}, n = {n}, q = {q}"));
    }
    let q2 = T::from_u64(q).powi(2);
    let top = q2.clone().powi(n);
    let to_f = (q2.powi(m) - T::one()) / (top - T::one());
    Ok((T::one() - to_f.clone(), to_f))
}

/// Runs `walks` biased walks on a ring of `n` sites starting from a block of
/// `m` sites labelled `F`; returns how many end in all-`F`.
///
/// Each step picks a random nearest-neighbour pair; a pair with unequal
/// labels becomes `FF` with probability `1/(q^2+1)` and `II` otherwise.
pub fn simulate_biased_walk<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    q: u64,
    walks: usize,
    rng: &mut R,
) -> Result<usize> {
    if m > n || n < 2 || q < 2 {
        return param(format!("invalid walk: m = {m}, n = {n}, q = {q}"));
    }
    let up = 1.0 / ((q * q) as f64 + 1.0);
    let mut absorbed_f = 0;
    let mut sites = vec![false; n];
    for _ in 0..walks {
        for (j, s) in sites.iter_mut().enumerate() {
            *s = j < m;
        }
        let mut count = m;
        while count != 0 && count != n {
            let a = rng.gen_range(0..n);
            let b = (a + 1) % n;
            if sites[a] == sites[b] {
                continue;
            }
            let label = rng.gen::<f64>() < up;
            sites[a] = label;
            sites[b] = label;
            if label {
                count += 1;
            } else {
                count -= 1;
            }
        }
        if count == n {
            absorbed_f += 1;
        }
    }
    Ok(absorbed_f)
}

/// Exact expected purity `E_U tr(rho_{RT}^2)` of reference plus erased
/// qubits for the double-layer ensemble with blocks of `xi` qubits.
///
/// `logical` and `erased` give per-region counts; their length is the even
/// region count.
pub fn block_erasure_transfer<T: Scalar>(xi: u32, logical: &[u32], erased: &[u32]) -> Result<T> {
    let r = logical.len();
    if r < 2 || !r.is_multiple_of(2) || erased.len() != r {
        return param("need matching per-region counts over an even number of regions");
    }
    if logical.iter().chain(erased).any(|&c| c > xi) {
        return param("per-region counts exceed the block size");
    }
    let chain = TransferChain::new(xi, logical, erased);
    Ok(chain.contract(true))
}

/// The all-`I` plus all-`F` contributions of [`block_erasure_transfer`].
pub fn no_wall_terms<T: Scalar>(xi: u32, logical: &[u32], erased: &[u32]) -> Result<T> {
    let r = logical.len();
    if r < 2 || !r.is_multiple_of(2) || erased.len() != r {
        return param("need matching per-region counts over an even number of regions");
    }
    let chain = TransferChain::<T>::new(xi, logical, erased);
    Ok(chain.contract(false))
}

/// Per-region counts for `k` logical qubits spread over `n / xi` regions.
pub fn region_logical_counts(n: usize, k: usize, xi: usize) -> Result<Vec<u32>> {
    if xi == 0 || !n.is_multiple_of(xi) || !(n / xi).is_multiple_of(2) || n / xi < 2 {
        return param(format!(
            "n = {n} is not an even number of regions of size {xi}"
        ));
    }
    if k > n {
        return param("k exceeds n");
    }
    Ok(distribute_logical(&vec![xi; n / xi], k)
        .into_iter()
        .map(|c| c as u32)
        .collect())
}

/// [`block_erasure_transfer`] with `k` logical qubits distributed over the regions.
pub fn block_erasure_transfer_k<T: Scalar>(
    n: usize,
    k: usize,
    xi: usize,
    erased: &[u32],
) -> Result<T> {
    let logical = region_logical_counts(n, k, xi)?;
    block_erasure_transfer(xi as u32, &logical, erased)
}

struct TransferChain<T> {
    /// `(a_i, b_i)` for each first-layer block.
    weights: Vec<(T, T)>,
    /// `(tr(I O_j), tr(F O_j))` for each region.
    region: Vec<(T, T)>,
    eta: T,
}

impl<T: Scalar> TransferChain<T> {
    fn new(xi: u32, logical: &[u32], erased: &[u32]) -> Self {
        let dim = T::pow2(2 * xi as i64);
        let norm = dim.clone() * dim.clone() - T::one();
        let weights = logical
            .chunks(2)
            .map(|pair| {
                let d_r = T::pow2((pair[0] + pair[1]) as i64);
                let a = (T::one() / d_r.clone() - T::one() / dim.clone()) / norm.clone();
                let b = (T::one() - T::one() / (dim.clone() * d_r)) / norm.clone();
                (a, b)
            })
            .collect();
        let region = erased
            .iter()
            .map(|&f| {
                let i = (xi - f) as i64;
                let f = f as i64;
                (T::pow2(2 * i + f), T::pow2(i + 2 * f))
            })
            .collect();
        let s = T::pow2(xi as i64);
        let eta = s.clone() / (s.clone() * s + T::one());
        TransferChain {
            weights,
            region,
            eta,
        }
    }

    fn label(&self, j: usize, f: bool) -> T {
        if f {
            self.region[j].1.clone()
        } else {
            self.region[j].0.clone()
        }
    }

    fn weight(&self, i: usize, f: bool) -> T {
        if f {
            self.weights[i].1.clone()
        } else {
            self.weights[i].0.clone()
        }
    }

    /// With `walls` false only equal-label chains are kept.
    fn contract(&self, walls: bool) -> T {
        let blocks = self.weights.len();
        let mut v = [false, true].map(|f| self.weight(0, f) * self.label(0, f));
        for i in 0..blocks - 1 {
            let (left, right) = (2 * i + 1, 2 * i + 2);
            let same = |f: bool| self.label(left, f) * self.label(right, f);
            let mixed = self.eta.clone() * (same(false) + same(true));
            let mut next = [T::zero(), T::zero()];
            for (to, slot) in next.iter_mut().enumerate() {
                let to_f = to == 1;
                let mut acc = T::zero();
                for from in [false, true] {
                    let g = if from == to_f {
                        same(from)
                    } else if walls {
                        mixed.clone()
                    } else {
                        T::zero()
                    };
                    acc = acc + v[from as usize].clone() * g;
                }
                *slot = acc * self.weight(i + 1, to_f);
            }
            v = next;
        }
        let last = 2 * blocks - 1;
        [false, true].into_iter().fold(T::zero(), |acc, f| {
            acc + v[f as usize].clone() * self.label(last, f)
        })
    }
}

fn binomial_row(n: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..n {
        let next = (row.last().unwrap() * BigInt::from(n - i)) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

fn big_pow(base: &BigRational, e: u32) -> BigRational {
    num_traits::pow(base.clone(), e as usize)
}

/// Whether each coefficient of `(1+az)^m (1+bz)^n` is at most the matching
/// coefficient of `(1+cz)^{m+n}` with `c = (am+bn)/(m+n)`.
pub fn coef_domination_check(a: &BigRational, b: &BigRational, m: u32, n: u32) -> bool {
    if m + n == 0 {
        return true;
    }
    let bm = binomial_row(m);
    let bn = binomial_row(n);
    let total = binomial_row(m + n);
    let mean = (a * BigRational::from_integer(m.into()) + b * BigRational::from_integer(n.into()))
        / BigRational::from_integer((m + n).into());
    let apow: Vec<BigRational> = (0..=m).map(|x| big_pow(a, x)).collect();
    let bpow: Vec<BigRational> = (0..=n).map(|x| big_pow(b, x)).collect();
    (0..=m + n).all(|t| {
        let mut lhs = BigRational::zero();
        for x in t.saturating_sub(n)..=t.min(m) {
            let y = t - x;
            lhs += BigRational::from_integer(&bm[x as usize] * &bn[y as usize])
                * &apow[x as usize]
                * &bpow[y as usize];
        }
        let rhs = BigRational::from_integer(total[t as usize].clone()) * big_pow(&mean, t);
        lhs <= rhs
    })
}

/// Exact `E 4^X` for `X` hypergeometric (population `n`, `t` marked, `m` drawn).
pub fn hypergeom_moment(n: u32, t: u32, m: u32) -> Result<BigRational> {
    if t > n || m > n {
        return param("hypergeometric parameters out of range");
    }
    let bt = binomial_row(t);
    let brest = binomial_row(n - t);
    let bnm = binomial_row(n)[m as usize].clone();
    let mut acc = BigInt::zero();
    for x in m.saturating_sub(n - t)..=t.min(m) {
        acc += (BigInt::one() << (2 * x)) * &bt[x as usize] * &brest[(m - x) as usize];
    }
    Ok(BigRational::new(acc, bnm))
}

/// Whether `E 4^X <= (1 + 3t/n)^m` holds exactly.
pub fn hypergeom_bound_check(n: u32, t: u32, m: u32) -> Result<bool> {
    if n == 0 {
        return param("empty population");
    }
    let lhs = hypergeom_moment(n, t, m)?;
    let base = BigRational::new(BigInt::from(n + 3 * t), BigInt::from(n));
    Ok(lhs <= big_pow(&base, m))
}
