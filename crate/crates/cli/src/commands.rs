//! Subcommand options and their implementations.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use aqec_core::analytics::{
    block_lower_bound, choi_upper_bound, comparison_exponents, emit_rate_curves, rate_curves_csv,
    uniform_grid, BoundQuery, BoundReport, RATE_CURVE_COLUMNS,
};
use aqec_core::choi::{self, SimConfig, SimReport};
use aqec_core::domainwall::{self, BoundaryTraces, SiteLayout};
use aqec_core::ensembles::{self, CircuitSpec, EnsembleParams, Family};
use aqec_core::lightcone::{self, Architecture, LayoutGraph};
use aqec_core::noise::NoiseSpec;
use aqec_core::{stream_rng, Exact};

use crate::config::{Common, EpsSpec, Format};
use crate::output::{self, canonical, envelope};
use crate::CliError;

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

fn parse_family(s: &str) -> Result<Family, CliError> {
    Ok(s.parse()?)
}

fn parse_noise(s: &str) -> Result<NoiseSpec, CliError> {
    Ok(s.parse()?)
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

/// Writes a JSON artifact: the envelope plus `result`.
fn finish_json<T: Serialize>(
    command: &str,
    args: &T,
    common: &Common,
    start: Instant,
    result: Value,
) -> Result<(), CliError> {
    let mut doc = envelope(
        command,
        &echo(args),
        common.seed(),
        start.elapsed().as_secs_f64(),
    );
    doc["result"] = result;
    output::emit(&canonical(&doc)?, common.output.as_deref(), None)
}

/// Writes a CSV artifact; the envelope goes to a sidecar file.
fn finish_csv<T: Serialize>(
    command: &str,
    args: &T,
    common: &Common,
    start: Instant,
    body: &str,
) -> Result<(), CliError> {
    let meta = envelope(
        command,
        &echo(args),
        common.seed(),
        start.elapsed().as_secs_f64(),
    );
    output::emit(body, common.output.as_deref(), Some(&meta))
}

fn register_k(n: usize, k: Option<usize>, rate: Option<f64>) -> Result<usize, CliError> {
    match (k, rate) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --k or --rate".into())),
        (Some(k), None) => Ok(k),
        (None, Some(r)) if (0.0..=1.0).contains(&r) => Ok((r * n as f64).round() as usize),
        (None, Some(r)) => Err(CliError::Lab(aqec_core::LabError::Parameter(format!(
            "rate {r} outside [0, 1]"
        )))),
        (None, None) => Err(CliError::Usage(
            "missing required option --k or --rate".into(),
        )),
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    /// brickwork, double-layer, block or clifford.
    #[arg(long)]
    pub family: Option<String>,
    /// e.g. erasure-iid:0.1, depolarizing:0.05, erasure-t:12, zz:0.01.
    #[arg(long)]
    pub noise: Option<String>,
    /// One or more register sizes.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Encoding rate k/n, rounded to the nearest k.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Error target as a power of n, e.g. n^-1.
    #[arg(long)]
    pub eps_rule: Option<String>,
    /// Smoothing parameter; selects the smooth bound.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Keep the finite-block factor in the double-layer ZZ rate.
    #[arg(long)]
    #[serde(default)]
    pub finite_block: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn bound_record(report: &BoundReport) -> Value {
    json!({
        "family": report.family.to_string(),
        "noise": report.noise.to_string(),
        "n": report.n,
        "k": report.k,
        "epsilon": report.epsilon,
        "delta": report.delta,
        "value": report.value,
        "log2_value": report.log2_value,
        "vacuous": report.vacuous,
        "formula_id": report.formula_id,
    })
}

fn block_record(n: usize, k: usize, eps: f64, noise: &NoiseSpec) -> Result<Value, CliError> {
    let NoiseSpec::ErasureIid { p } = *noise else {
        return Err(CliError::Lab(aqec_core::LabError::Unsupported(
            "block lower bound is stated for i.i.d. erasure".into(),
        )));
    };
    let b = block_lower_bound(n as f64, k as f64, eps, p)?;
    Ok(json!({
        "family": Family::BlockEncoding.to_string(),
        "noise": noise.to_string(),
        "n": n,
        "k": k,
        "epsilon": eps,
        "value": b.term_poly.min(b.term_const),
        "term_poly": b.term_poly,
        "term_const": b.term_const,
        "relative_entropy": b.relative_entropy,
        "blocks": b.blocks,
        "formula_id": "block/erasure-iid/lower",
        "lower_bound": true,
    }))
}

pub fn bounds(args: BoundsArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let family = parse_family(&required(&args.family, "family")?)?;
    let noise = parse_noise(&required(&args.noise, "noise")?)?;
    let ns = required(&args.n, "n")?;
    let eps = EpsSpec::from_options(args.eps, args.eps_rule.as_deref())?;
    let mut records = Vec::new();
    let mut full = Vec::new();
    for &n in &ns {
        let k = register_k(n, args.k, args.rate)?;
        let eps_n = match (family, eps) {
            (Family::FullClifford, e) => e.map(|e| e.at(n)).unwrap_or(f64::NAN),
            (_, Some(e)) => e.at(n),
            (_, None) => {
                return Err(CliError::Usage(
                    "missing required option --eps or --eps-rule".into(),
                ))
            }
        };
        if family == Family::BlockEncoding {
            let r = block_record(n, k, eps_n, &noise)?;
            records.push(r.clone());
            full.push(r);
            continue;
        }
        let mut query = BoundQuery::new(family, noise, n, k, eps_n);
        if let Some(d) = args.delta {
            query = query.with_delta(d);
        }
        if args.finite_block {
            query = query.with_finite_block();
        }
        let report = choi_upper_bound(&query)?;
        records.push(bound_record(&report));
        full.push(serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    match args.common.format.unwrap_or(Format::Json) {
        Format::Json => finish_json("bounds", &args, &args.common, start, Value::Array(full)),
        Format::Csv => {
            let cols = [
                "family",
                "noise",
                "n",
                "k",
                "epsilon",
                "delta",
                "value",
                "log2_value",
                "vacuous",
                "formula_id",
            ];
            finish_csv(
                "bounds",
                &args,
                &args.common,
                start,
                &output::csv(&cols, &records),
            )
        }
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct CurvesArgs {
    /// Grid points from 0 to --max-p inclusive.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub max_p: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn curves(args: CurvesArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let points = args.points.unwrap_or(61);
    let max_p = args.max_p.unwrap_or(0.6);
    if points == 0 {
        return Err(CliError::Lab(aqec_core::LabError::Parameter(
            "need at least one grid point".into(),
        )));
    }
    let rows = emit_rate_curves(&uniform_grid(points, max_p))?;
    match args.common.format.unwrap_or(Format::Csv) {
        Format::Csv => finish_csv(
            "curves",
            &args,
            &args.common,
            start,
            &rate_curves_csv(&rows),
        ),
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|r| {
                    RATE_CURVE_COLUMNS
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), json!(v)))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            finish_json("curves", &args, &args.common, start, Value::Array(records))
        }
    }
}

/// Circuit selection shared by `simulate` and `lightcone`.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct CircuitArgs {
    /// Circuit spec JSON file; replaces the family options.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_rule: Option<String>,
    /// Block size override for the blocked families; without an error
    /// target it sets `eps = n / 2^xi`.
    #[arg(long)]
    pub xi: Option<usize>,
}

enum Circuit {
    Spec(CircuitSpec),
    Ensemble(EnsembleParams),
}

impl CircuitArgs {
    fn resolve(&self) -> Result<Circuit, CliError> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            return Ok(Circuit::Spec(CircuitSpec::from_json(&text)?));
        }
        let family = parse_family(&required(&self.family, "family")?)?;
        let n = required(&self.n, "n")?;
        let k = register_k(n, self.k, self.rate)?;
        let eps = EpsSpec::from_options(self.eps, self.eps_rule.as_deref())?;
        let eps = match (family, eps) {
            (_, Some(e)) => e.at(n),
            (Family::FullClifford, None) => 0.5,
            (_, None) => match self.xi {
                Some(x) if x < 64 => n as f64 / (1u64 << x) as f64,
                _ => {
                    return Err(CliError::Usage(
                        "missing required option --eps, --eps-rule or --xi".into(),
                    ))
                }
            },
        };
        let mut params = EnsembleParams::new(n, k, eps, family);
        if let Some(x) = self.xi {
            params = params.with_xi(x);
        }
        Ok(Circuit::Ensemble(params))
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub circuit: CircuitArgs,
    /// erasure-iid:p or erasure-t:t.
    #[arg(long)]
    pub noise: Option<String>,
    /// Circuits drawn from the ensemble.
    #[arg(long)]
    pub circuits: Option<usize>,
    /// Erasure patterns sampled per circuit when not enumerated exactly.
    #[arg(long)]
    pub patterns: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Prepend a random logical Pauli layer to every circuit.
    #[arg(long)]
    #[serde(default)]
    pub twirl: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn sim_config(
    common: &Common,
    circuits: usize,
    patterns: usize,
    bootstrap: Option<usize>,
) -> Result<SimConfig, CliError> {
    let mut config = SimConfig::new(circuits, patterns, common.seed());
    config.workers = common.workers()?;
    if let Some(b) = bootstrap {
        config.bootstrap_resamples = b;
    }
    Ok(config)
}

/// Report fields without wall time, plus the analytic bound where one exists.
fn sim_record(report: &SimReport, bound: Option<&BoundReport>) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Internal(e.to_string()))?;
    v["noise"] = json!(report.noise.to_string());
    v["family"] = json!(report.family.map(|f| f.to_string()));
    if let Value::Object(m) = &mut v {
        m.remove("wall_time_s");
    }
    v["bound"] = json!(bound.map(|b| b.value));
    v["bound_formula"] = json!(bound.map(|b| b.formula_id.clone()));
    v["below_bound"] = json!(bound.map(|b| report.ci_high < b.value));
    Ok(v)
}

fn matching_bound(report: &SimReport, noise: &NoiseSpec) -> Option<BoundReport> {
    let family = report.family?;
    let eps = report.epsilon.unwrap_or(0.5);
    choi_upper_bound(&BoundQuery::new(family, *noise, report.n, report.k, eps)).ok()
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let noise = parse_noise(&required(&args.noise, "noise")?)?;
    let config = sim_config(
        &args.common,
        args.circuits.unwrap_or(100),
        args.patterns.unwrap_or(1000),
        args.bootstrap,
    )?;
    let config = SimConfig {
        pauli_twirl: args.twirl,
        ..config
    };
    let report = match args.circuit.resolve()? {
        Circuit::Spec(spec) => choi::estimate_spec_choi(&spec, &noise, &config)?,
        Circuit::Ensemble(params) => choi::estimate_ensemble_choi(&params, &noise, &config)?,
    };
    let bound = matching_bound(&report, &noise);
    let record = sim_record(&report, bound.as_ref())?;
    eprintln!(
        "mean eps {:.6} (95% CI {:.6}..{:.6}) over {} circuits{}",
        report.mean_choi_error,
        report.ci_low,
        report.ci_high,
        report.n_circuits,
        bound
            .as_ref()
            .map(|b| format!(", bound {:.6}", b.value))
            .unwrap_or_default()
    );
    match args.common.format.unwrap_or(Format::Json) {
        Format::Json => finish_json("simulate", &args, &args.common, start, record),
        Format::Csv => {
            let cols = [
                "family",
                "noise",
                "n",
                "k",
                "epsilon",
                "xi",
                "n_circuits",
                "n_patterns_per_circuit",
                "seed",
                "mean_choi_error",
                "ci_low",
                "ci_high",
                "std_error",
                "mean_failure_prob",
                "bound",
            ];
            finish_csv(
                "simulate",
                &args,
                &args.common,
                start,
                &output::csv(&cols, &[record]),
            )
        }
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct CompareBlockArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// i.i.d. erasure probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Encoding rate k/n.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Error target exponent: eps = n^-beta.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shared block size; default is the smallest admissible one.
    #[arg(long)]
    pub xi: Option<usize>,
    #[arg(long)]
    pub circuits: Option<usize>,
    #[arg(long)]
    pub patterns: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Smallest block size at least `ceil(log2(n/eps))` whose four-region blocks tile `n`.
pub fn matched_block_size(n: usize, eps: f64) -> Result<usize, CliError> {
    let base = ensembles::block_size(n, eps)?;
    (base..=n / 4)
        .find(|&x| n.is_multiple_of(4 * x))
        .ok_or_else(|| {
            CliError::Lab(aqec_core::LabError::Parameter(format!(
                "no block size >= {base} tiles n = {n} with four regions per block"
            )))
        })
}

pub fn compare_block(args: CompareBlockArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let n = args.n.unwrap_or(240);
    let p = args.p.unwrap_or(0.25);
    let rate = args.rate.unwrap_or(0.2);
    let beta = args.beta.unwrap_or(0.375);
    let k = register_k(n, None, Some(rate))?;
    let eps = (n as f64).powf(-beta);
    let xi = match args.xi {
        Some(x) => x,
        None => matched_block_size(n, eps)?,
    };
    let noise = NoiseSpec::ErasureIid { p };
    let exponents = comparison_exponents(rate, p, beta)?;
    let lower = block_lower_bound(n as f64, k as f64, eps, p)?;
    let upper = choi_upper_bound(&BoundQuery::new(Family::DoubleLayer, noise, n, k, eps))?;
    let config = sim_config(
        &args.common,
        args.circuits.unwrap_or(200),
        args.patterns.unwrap_or(500),
        args.bootstrap,
    )?;
    let run = |family| -> Result<SimReport, CliError> {
        let params = EnsembleParams::new(n, k, eps, family).with_xi(xi);
        Ok(choi::estimate_ensemble_choi(&params, &noise, &config)?)
    };
    let dl = run(Family::DoubleLayer)?;
    let block = run(Family::BlockEncoding)?;
    let result = json!({
        "n": n,
        "k": k,
        "p": p,
        "epsilon": eps,
        "xi": xi,
        "exponents": {
            "block_lower_growth": exponents.block_lower,
            "double_layer_upper_decay": exponents.double_layer_upper,
        },
        "block_lower_bound": {
            "value": lower.term_poly.min(lower.term_const),
            "term_poly": lower.term_poly,
            "term_const": lower.term_const,
        },
        "double_layer_upper_bound": upper.value,
        "double_layer": sim_record(&dl, Some(&upper))?,
        "block": sim_record(&block, None)?,
        "separated": dl.ci_high < block.ci_low,
    });
    finish_json("compare-block", &args, &args.common, start, result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    /// Layered two-qudit twirl against the global Haar value.
    Markov,
    /// Double-layer erasure purity by transfer matrices.
    Transfer,
    /// Absorption of the biased domain-wall walk.
    Walk,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct SecondMomentArgs {
    #[arg(long, value_enum)]
    pub mode: Option<MomentMode>,
    /// Sites of the Markov chain or the walk.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Local dimension.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Open chain instead of a ring.
    #[arg(long)]
    #[serde(default)]
    pub open: bool,
    /// Qubits per region.
    #[arg(long)]
    pub xi: Option<u32>,
    /// Logical qubits per region.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub logical: Option<Vec<u32>>,
    /// Erased qubits per region.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub erased: Option<Vec<u32>>,
    /// Initial F sites of the walk.
    #[arg(long)]
    pub m: Option<u32>,
    /// Simulated walks.
    #[arg(long)]
    pub walks: Option<usize>,
    /// Also evaluate in exact rational arithmetic.
    #[arg(long)]
    #[serde(default)]
    pub exact: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

fn random_traces<R: Rng>(sites: usize, rng: &mut R) -> Vec<(u64, u64)> {
    (0..sites)
        .map(|_| (rng.gen_range(1..=16), rng.gen_range(1..=16)))
        .collect()
}

fn lift<T: aqec_core::scalar::Scalar>(v: &[(u64, u64)]) -> Vec<(T, T)> {
    v.iter()
        .map(|&(a, b)| (T::from_u64(a), T::from_u64(b)))
        .collect()
}

fn exact_json(x: &BigRational) -> Value {
    json!({ "rational": x.to_string(), "value": x.to_f64() })
}

pub fn second_moment(args: SecondMomentArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mode = required(&args.mode, "mode")?;
    let result = match mode {
        MomentMode::Markov => {
            let sites = args.sites.unwrap_or(6);
            let q = args.q.unwrap_or(2);
            let depth = args.depth.unwrap_or(50);
            let layout = SiteLayout::brickwork(sites, q, depth, !args.open);
            let mut rng = stream_rng(args.common.seed(), 0);
            let o1 = random_traces(sites, &mut rng);
            let o2 = random_traces(sites, &mut rng);
            let traces = BoundaryTraces::Product {
                o1: lift::<f64>(&o1),
                o2: lift::<f64>(&o2),
            };
            let markov = domainwall::markov_second_moment_exact(&layout, &traces)?;
            let haar = domainwall::haar_for(&layout, &traces)?;
            let mut r = json!({
                "sites": sites, "q": q, "depth": depth, "periodic": !args.open,
                "o1": o1, "o2": o2,
                "markov": markov, "haar": haar, "residual": (markov - haar).abs(),
            });
            if args.exact {
                let traces = BoundaryTraces::Product {
                    o1: lift::<Exact>(&o1),
                    o2: lift::<Exact>(&o2),
                };
                let m = domainwall::markov_second_moment_exact(&layout, &traces)?;
                let h = domainwall::haar_for(&layout, &traces)?;
                r["markov_exact"] = exact_json(&m);
                r["haar_exact"] = exact_json(&h);
            }
            r
        }
        MomentMode::Transfer => {
            let xi = required(&args.xi, "xi")?;
            let logical = required(&args.logical, "logical")?;
            let erased = required(&args.erased, "erased")?;
            let value: f64 = domainwall::block_erasure_transfer(xi, &logical, &erased)?;
            let walls_off: f64 = domainwall::no_wall_terms(xi, &logical, &erased)?;
            let mut r = json!({
                "xi": xi, "logical": logical, "erased": erased,
                "purity": value, "no_wall_terms": walls_off,
            });
            if args.exact {
                let v: Exact = domainwall::block_erasure_transfer(xi, &logical, &erased)?;
                r["purity_exact"] = exact_json(&v);
            }
            r
        }
        MomentMode::Walk => {
            let sites = args.sites.unwrap_or(4);
            let q = args.q.unwrap_or(2);
            let m = required(&args.m, "m")?;
            let (to_i, to_f): (f64, f64) = domainwall::biased_walk_absorption(m, sites as u32, q)?;
            let mut r = json!({
                "sites": sites, "q": q, "m": m,
                "absorb_identity": to_i, "absorb_swap": to_f,
            });
            if let Some(walks) = args.walks {
                let mut rng = stream_rng(args.common.seed(), 0);
                let hits = domainwall::simulate_biased_walk(m as usize, sites, q, walks, &mut rng)?;
                let freq = hits as f64 / walks as f64;
                r["walks"] = json!(walks);
                r["simulated_swap"] = json!(freq);
                r["sigma"] = json!((to_f * (1.0 - to_f) / walks as f64).sqrt());
            }
            if args.exact {
                let (_, f): (Exact, Exact) =
                    domainwall::biased_walk_absorption(m, sites as u32, q)?;
                r["absorb_swap_exact"] = exact_json(&f);
            }
            r
        }
    };
    finish_json("second-moment", &args, &args.common, start, result)
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct LightconeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub circuit: CircuitArgs,
    /// Depolarizing strength for the floor and the depth table.
    #[arg(long)]
    pub p: Option<f64>,
    /// Choi error target of the depth table.
    #[arg(long)]
    pub target: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn lightcone(args: LightconeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let spec = match args.circuit.resolve()? {
        Circuit::Spec(s) => s,
        Circuit::Ensemble(params) => ensembles::build(&params)?,
    };
    let p = args.p.unwrap_or(0.1);
    let target = args.target.unwrap_or(0.01);
    let layout = LayoutGraph::from_spec(&spec)?;
    let cones = lightcone::light_cones(&layout);
    let j = lightcone::disjoint_logical_set(&layout, &cones);
    let floor = lightcone::choi_floor(&layout, p)?;
    let k = layout.logical.len().max(1);
    let mut table = Vec::new();
    for (label, mode) in [
        ("1d", Architecture::Lattice(1)),
        ("2d", Architecture::Lattice(2)),
        ("3d", Architecture::Lattice(3)),
        ("all-to-all", Architecture::AllToAll),
    ] {
        let d = lightcone::depth_lower_bound(mode, p, target, k)?;
        table.push(json!({ "architecture": label, "min_depth": d }));
    }
    let result = json!({
        "n": layout.n,
        "k": layout.logical.len(),
        "depth": layout.depth(),
        "max_cone": cones.max_size,
        "disjoint_size": j.len(),
        "disjoint_set": j,
        "floor": floor,
        "p": p,
        "target": target,
        "min_depth_table": table,
    });
    finish_json("lightcone", &args, &args.common, start, result)
}
