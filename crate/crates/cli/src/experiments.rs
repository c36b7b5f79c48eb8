//! Named, seeded experiments. Each takes a typed parameter block (unknown keys
//! rejected, defaults filled in) and produces a [`Report`].

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ptlab_core::density::{census_by_class, four_profile_fast, rho_expected, DensityEstimate};
use ptlab_core::graph::{blowup, random_graph, BlowupStructure, Graph};
use ptlab_core::iso::{enumerate_classes, SmallGraphClass};
use ptlab_core::property::{phi_value, pot_from_property, WeightedDensityProperty, BUILTIN_NAME};
use ptlab_core::quasirandom::{
    blowup_farness_inequality, blowup_part_witness, check_pair, f_window_expansions, is_delta_quasirandom,
    member_quasirandomness_audit, per_pair_change_fraction, AuditConfig, Mode, EXACT_LIMIT,
};
use ptlab_core::rational::{binomial, int, parse_rational, ratio, to_f64, to_fraction_string, Rational};
use ptlab_core::seed::{derive_seed, rng_from_seed};
use ptlab_core::tester::{
    double_sampling, double_sampling_marginal_check, estimate_canonical_acceptance, estimate_pot_rejection,
    indistinguishability_experiment, induced_member_fraction, TesterSpec,
};
use ptlab_core::SubgraphFamily;

use crate::commands::{load_property, read_graph};
use crate::report::{verdict, Assertion, Meta, Report};

pub const EXPERIMENTS: &[&str] = &[
    "membership-prob",
    "member-quasirandom",
    "rho-concentration",
    "blowup-farness",
    "indistinguishability",
    "double-sampling",
    "pot-calibration",
];

/// Largest graph any experiment builds.
pub const MAX_ORDER: usize = 512;
/// Largest order enumerated exhaustively.
pub const MAX_EXHAUSTIVE: usize = 7;
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn empty_object() -> Value {
    json!({})
}

impl ExperimentConfig {
    /// Inline JSON (starting with `{`) or a path to a JSON file.
    pub fn load(spec: &str) -> Result<Self> {
        let text = if spec.trim_start().starts_with('{') {
            spec.to_string()
        } else {
            fs::read_to_string(spec).with_context(|| format!("reading config {spec}"))?
        };
        serde_json::from_str(&text).context("parsing experiment config")
    }
}

struct Outcome {
    params: Value,
    analytic: Value,
    empirical: Value,
    stderr: Value,
    assertions: Vec<Assertion>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let seed = cfg.seed;
    let params = cfg.params.clone();
    let out = match cfg.experiment.as_str() {
        "membership-prob" => membership_prob(parse_params(params)?, seed)?,
        "member-quasirandom" => member_quasirandom(parse_params(params)?, seed)?,
        "rho-concentration" => rho_concentration(parse_params(params)?, seed)?,
        "blowup-farness" => blowup_farness(parse_params(params)?, seed)?,
        "indistinguishability" => indistinguishability(parse_params(params)?, seed)?,
        "double-sampling" => double_sampling_shape(parse_params(params)?, seed)?,
        "pot-calibration" => pot_calibration(parse_params(params)?, seed)?,
        other => bail!("unknown experiment {other:?}; known: {}", EXPERIMENTS.join(", ")),
    };
    Ok(Report {
        experiment: cfg.experiment.clone(),
        seed,
        params: out.params,
        analytic: out.analytic,
        empirical: out.empirical,
        stderr: out.stderr,
        verdict: verdict(&out.assertions),
        assertions: out.assertions,
        meta: Meta::now(),
    })
}

fn parse_params<T: DeserializeOwned>(v: Value) -> Result<T> {
    let v = if v.is_null() { json!({}) } else { v };
    serde_json::from_value(v).context("invalid params")
}

fn rat(field: &str, s: &str) -> Result<Rational> {
    parse_rational(s).with_context(|| format!("param {field}: not a rational: {s:?}"))
}

fn frac(r: &Rational) -> Value {
    json!(to_fraction_string(r))
}

fn estimate_json(e: &DensityEstimate) -> Value {
    json!({"hits": e.hits, "trials": e.trials, "point": e.point, "stderr": e.stderr})
}

fn check_order(what: &str, n: usize) -> Result<()> {
    ensure!(n <= MAX_ORDER, "{what} = {n} exceeds the desk-scale limit {MAX_ORDER}");
    Ok(())
}

fn parse_family(names: &[String], order: usize) -> Result<Vec<SmallGraphClass>> {
    let mut out = BTreeSet::new();
    for name in names {
        let c = SmallGraphClass::parse(name)?;
        ensure!(c.order() == order, "family class {name} has order {}, expected {order}", c.order());
        out.insert(c);
    }
    Ok(out.into_iter().collect())
}

/// Each class joins independently with probability 1/2; empty and full draws are redrawn.
fn random_family(order: usize, seed: u64) -> Result<Vec<SmallGraphClass>> {
    let all = enumerate_classes(order)?;
    ensure!(all.len() >= 2, "order {order} has a single class");
    let mut rng = rng_from_seed(seed);
    loop {
        let f: Vec<SmallGraphClass> = all.iter().copied().filter(|_| rng.random::<bool>()).collect();
        if !f.is_empty() && f.len() < all.len() {
            return Ok(f);
        }
    }
}

fn resolve_family(names: &Option<Vec<String>>, order: usize, seed: u64) -> Result<Vec<SmallGraphClass>> {
    match names {
        Some(n) => parse_family(n, order),
        None => random_family(order, seed),
    }
}

fn family_names(f: &[SmallGraphClass]) -> Vec<String> {
    f.iter().map(|c| c.name()).collect()
}

/// The first member of the built-in property among `G(m, 1/2)` draws `derive_seed(seed, i)`.
fn find_member(m: usize, seed: u64, max_draws: u64) -> Result<(Graph, u64)> {
    let p = WeightedDensityProperty::quasirandomness_property();
    (0..max_draws)
        .map(|i| derive_seed(seed, i))
        .map(|s| (random_graph(m, s), s))
        .find(|(g, _)| p.is_member(g))
        .with_context(|| format!("no member among {max_draws} random graphs on {m} vertices"))
}

fn base_graph(base: &Option<PathBuf>, m: usize, seed: u64, max_draws: u64) -> Result<(Graph, Value)> {
    match base {
        Some(path) => {
            let g = read_graph(path)?;
            ensure!(g.order() == m, "base graph has {} vertices but m = {m}", g.order());
            Ok((g, json!({"file": path})))
        }
        None => {
            let (g, s) = find_member(m, seed, max_draws)?;
            Ok((g, json!({"random_seed": s})))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembershipProbParams {
    pub n: usize,
    /// Defaults to exhaustive for `n <= 7`.
    pub exhaustive: Option<bool>,
    pub trials: u64,
}

impl Default for MembershipProbParams {
    fn default() -> Self {
        MembershipProbParams {
            n: 4,
            exhaustive: None,
            trials: DEFAULT_TRIALS,
        }
    }
}

fn membership_prob(mut p: MembershipProbParams, seed: u64) -> Result<Outcome> {
    ensure!(p.n >= 1, "n must be positive");
    check_order("n", p.n)?;
    let exhaustive = *p.exhaustive.get_or_insert(p.n <= MAX_EXHAUSTIVE);
    ensure!(!exhaustive || p.n <= MAX_EXHAUSTIVE, "exhaustive enumeration needs n <= {MAX_EXHAUSTIVE}");
    let property = WeightedDensityProperty::quasirandomness_property();
    let n = p.n;
    let floor = Rational::new(1.into(), (2 * n.pow(4)).into());
    let (members, total) = if exhaustive {
        let total = 1u64 << (n * (n - 1) / 2);
        let members = (0..total)
            .into_par_iter()
            .filter(|&mask| property.is_member(&Graph::from_pair_mask(n, mask)))
            .count() as u64;
        (members, total)
    } else {
        let members = (0..p.trials)
            .into_par_iter()
            .filter(|&i| property.is_member(&random_graph(n, derive_seed(seed, i))))
            .count() as u64;
        (members, p.trials)
    };
    let fraction = ratio(members as i64, total as i64);
    let est = DensityEstimate::from_counts(members, total, seed);
    let assertion = if exhaustive {
        Assertion::new(
            "fraction >= 1/(2n^4)",
            fraction >= floor,
            format!("{members}/{total} vs {}", to_fraction_string(&floor)),
        )
    } else {
        Assertion::new(
            "fraction + 4 stderr >= 1/(2n^4)",
            est.point + 4.0 * est.stderr >= to_f64(&floor),
            format!("{:.6} ± {:.6} vs {:.6}", est.point, est.stderr, to_f64(&floor)),
        )
    };
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({"floor": frac(&floor)}),
        empirical: json!({
            "members": members,
            "graphs": total,
            "fraction": frac(&fraction),
            "fraction_f64": est.point,
            "exhaustive": exhaustive,
        }),
        stderr: if exhaustive { json!(0.0) } else { json!(est.stderr) },
        assertions: vec![assertion],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemberQuasirandomParams {
    pub n: usize,
    pub samples: u64,
    pub members: usize,
    /// Defaults to `8/n`.
    pub gamma_squared: Option<String>,
    /// Also run the δ-quasirandomness check on every member.
    pub delta: Option<String>,
    pub budget: u64,
}

impl Default for MemberQuasirandomParams {
    fn default() -> Self {
        MemberQuasirandomParams {
            n: 32,
            samples: DEFAULT_TRIALS,
            members: 30,
            gamma_squared: None,
            delta: None,
            budget: 100_000,
        }
    }
}

fn member_quasirandom(mut p: MemberQuasirandomParams, seed: u64) -> Result<Outcome> {
    ensure!(p.n >= 4, "n must be at least 4");
    check_order("n", p.n)?;
    let gamma_sq = match &p.gamma_squared {
        Some(s) => rat("gamma_squared", s)?,
        None => ratio(8, p.n as i64),
    };
    ensure!(gamma_sq.is_positive(), "gamma_squared must be positive");
    p.gamma_squared = Some(to_fraction_string(&gamma_sq));
    let cfg = AuditConfig {
        n: p.n,
        samples: p.samples,
        max_members: p.members,
        gamma_squared: gamma_sq.clone(),
        seed,
    };
    let audit = member_quasirandomness_audit(&WeightedDensityProperty::quasirandomness_property(), &cfg)?;
    let mut delta_results = Value::Null;
    if let Some(d) = &p.delta {
        let delta = rat("delta", d)?;
        ensure!(delta.is_positive(), "delta must be positive");
        let mode = if p.n <= EXACT_LIMIT { Mode::Exact } else { Mode::Sampled };
        let passing = audit
            .members
            .iter()
            .map(|m| {
                let g = random_graph(p.n, m.seed);
                is_delta_quasirandom(&g, &delta, mode, p.budget, m.seed).map(|r| r.quasirandom)
            })
            .collect::<ptlab_core::Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&q| q)
            .count();
        delta_results = json!({"mode": mode, "quasirandom_members": passing, "members": audit.members.len()});
    }
    let cgw_pass = audit.members.iter().filter(|m| m.cgw_pass).count();
    let max_scaled = audit
        .members
        .iter()
        .map(|m| m.minimal_gamma * (p.n as f64).sqrt())
        .fold(0.0, f64::max);
    let assertions = vec![
        Assertion::new(
            "enough members",
            audit.members.len() >= p.members,
            format!("{} members in {} draws", audit.members.len(), audit.samples_drawn),
        ),
        Assertion::new("density chain", audit.all_chains_hold, "f(x) <= 2·defect and C4 bound"),
        Assertion::new("edge-density window", audit.all_forced_windows_hold, "forced windows respected"),
        Assertion::new(
            "cgw or scaled minimal gamma",
            audit.members.iter().all(|m| m.cgw_pass || m.minimal_gamma_scaled_ok),
            format!("{cgw_pass} pass at the configured gamma; max minimal gamma·sqrt(n) = {max_scaled:.4}"),
        ),
    ];
    let (upper, lower) = f_window_expansions(&gamma_sq);
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({
            "gamma_squared": frac(&gamma_sq),
            "f_half_plus_gamma": frac(&upper),
            "f_half_minus_gamma": frac(&lower),
        }),
        empirical: json!({
            "samples_drawn": audit.samples_drawn,
            "member_rate": audit.members.len() as f64 / audit.samples_drawn.max(1) as f64,
            "cgw_pass": cgw_pass,
            "max_minimal_gamma_scaled": max_scaled,
            "delta_quasirandom": delta_results,
            "members": audit.members,
        }),
        stderr: Value::Null,
        assertions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhoParams {
    pub n: usize,
    pub graphs: u64,
    pub s: usize,
    pub family: Option<Vec<String>>,
    pub tolerance: String,
    pub min_fraction: String,
}

impl Default for RhoParams {
    fn default() -> Self {
        RhoParams {
            n: 100,
            graphs: 100,
            s: 4,
            family: None,
            tolerance: "1/10".into(),
            min_fraction: "99/100".into(),
        }
    }
}

fn exact_family_density(g: &Graph, family: &[SmallGraphClass]) -> Result<Rational> {
    let s = family[0].order();
    if s == 4 {
        let prof = four_profile_fast(g);
        return Ok(family.iter().map(|c| prof.density(c.as_class4().expect("order 4"))).sum());
    }
    let census = census_by_class(g, s)?;
    let hits: u64 = family.iter().map(|c| census.get(c).copied().unwrap_or(0)).sum();
    Ok(Rational::new(hits.into(), binomial(g.order() as u64, s as u64)))
}

fn rho_concentration(mut p: RhoParams, seed: u64) -> Result<Outcome> {
    ensure!((2..=MAX_EXHAUSTIVE).contains(&p.s), "s must lie in 2..={MAX_EXHAUSTIVE}");
    ensure!(p.n >= p.s, "n must be at least s");
    check_order("n", p.n)?;
    ensure!(p.graphs > 0, "graphs must be positive");
    let tol = rat("tolerance", &p.tolerance)?;
    let need = rat("min_fraction", &p.min_fraction)?;
    let family = resolve_family(&p.family, p.s, derive_seed(seed, u64::MAX))?;
    ensure!(!family.is_empty(), "family must not be empty");
    p.family = Some(family_names(&family));
    let rho = rho_expected(&family)?;
    let densities: Vec<Rational> = (0..p.graphs)
        .into_par_iter()
        .map(|i| exact_family_density(&random_graph(p.n, derive_seed(seed, i)), &family))
        .collect::<Result<_>>()?;
    let within = densities.iter().filter(|d| (*d - &rho).abs() <= tol).count() as u64;
    let values: Vec<f64> = densities.iter().map(to_f64).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len().max(2) - 1) as f64;
    let max_dev = densities.iter().map(|d| to_f64(&(d - &rho).abs())).fold(0.0, f64::max);
    let ok = ratio(within as i64, p.graphs as i64) >= need;
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({"rho": frac(&rho), "rho_f64": to_f64(&rho)}),
        empirical: json!({
            "within_tolerance": within,
            "graphs": p.graphs,
            "mean": mean,
            "max_deviation": max_dev,
            "densities": values,
        }),
        stderr: json!((var / values.len() as f64).sqrt()),
        assertions: vec![Assertion::new(
            "concentration around rho",
            ok,
            format!("{within}/{} within {}", p.graphs, p.tolerance),
        )],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupParams {
    pub m: usize,
    pub k: usize,
    pub delta: String,
    pub epsilon: String,
    pub base: Option<PathBuf>,
    pub max_draws: u64,
}

impl Default for BlowupParams {
    fn default() -> Self {
        BlowupParams {
            m: 16,
            k: 16,
            delta: "1/16".into(),
            epsilon: "1/10".into(),
            base: None,
            max_draws: 10_000,
        }
    }
}

struct FarBlowup {
    base: Graph,
    base_source: Value,
    gamma: Graph,
    structure: BlowupStructure,
}

fn far_blowup(base: &Option<PathBuf>, m: usize, k: usize, seed: u64, max_draws: u64) -> Result<FarBlowup> {
    ensure!(m >= 2 && k >= 1, "need m >= 2 and k >= 1");
    check_order("m·k", m * k)?;
    let (base, base_source) = base_graph(base, m, seed, max_draws)?;
    let (gamma, structure) = blowup(&base, k)?;
    Ok(FarBlowup {
        base,
        base_source,
        gamma,
        structure,
    })
}

fn blowup_farness(p: BlowupParams, seed: u64) -> Result<Outcome> {
    let delta = rat("delta", &p.delta)?;
    ensure!(delta.is_positive(), "delta must be positive");
    let fb = far_blowup(&p.base, p.m, p.k, seed, p.max_draws)?;
    let property = WeightedDensityProperty::quasirandomness_property();
    let base_member = property.is_member(&fb.base);
    let phi = phi_value(&fb.gamma)?;
    let witness = blowup_part_witness(&fb.gamma, &fb.structure, &delta);
    let witness_verified = witness
        .as_ref()
        .is_some_and(|w| check_pair(&fb.gamma, &w.u, &w.v, &delta).is_some());
    let eps = rat("epsilon", &p.epsilon)?;
    ensure!(eps.is_positive(), "epsilon must be positive");
    let inequality = blowup_farness_inequality(p.m as u64, p.k as u64);
    let change = per_pair_change_fraction(p.m as u64);
    let n = p.m * p.k;
    let nn = int((n * n) as i64);
    // pairs any fix must toggle: every part pair moves by at least `change·k²`
    let pairs_needed = Rational::from_integer(binomial(p.m as u64, 2)) * &change * int((p.k * p.k) as i64);
    let pair_threshold = &eps * &nn / int(2);
    let entry_threshold = &eps * &nn;
    let mut assertions = vec![
        Assertion::new("base is a member", base_member, format!("z(G) = {}", to_fraction_string(&property.z_value(&fb.base)))),
        Assertion::new("blowup is a non-member", !property.is_member(&fb.gamma), format!("z = {}", to_fraction_string(&property.z_value(&fb.gamma)))),
        Assertion::new("phi(blowup) > 0", phi.is_positive(), to_fraction_string(&phi)),
        Assertion::new("part-pair witness", witness_verified, format!("delta = {}", p.delta)),
        Assertion::new("farness inequality", inequality, "binom(m,2)·0.4·k² >= 0.1·n²"),
        Assertion::new(
            "epsilon-far (unordered pairs)",
            pairs_needed >= pair_threshold,
            format!("{} pairs needed vs eps·n²/2 = {}", to_fraction_string(&pairs_needed), to_fraction_string(&pair_threshold)),
        ),
    ];
    if p.m >= 10 {
        assertions.push(Assertion::new(
            "per-pair change fraction >= 2/5",
            change >= ratio(2, 5),
            to_fraction_string(&change),
        ));
    }
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({
            "n": n,
            "per_pair_change_fraction": frac(&change),
            "pairs_needed": frac(&pairs_needed),
            "matrix_entries_needed": frac(&(&pairs_needed * int(2))),
            "far_threshold_pairs": frac(&pair_threshold),
            "far_threshold_matrix_entries": frac(&entry_threshold),
            "far_under_pairs_convention": pairs_needed >= pair_threshold,
            "far_under_matrix_convention": &pairs_needed * int(2) >= entry_threshold,
            "farness_lhs": frac(&(Rational::from_integer(binomial(p.m as u64, 2)) * ratio(2, 5) * int((p.k * p.k) as i64))),
            "farness_rhs": frac(&(int((n * n) as i64) * ratio(1, 10))),
        }),
        empirical: json!({
            "base": fb.base_source,
            "base_edges": fb.base.edge_count(),
            "blowup_phi": frac(&phi),
            "blowup_z": frac(&property.z_value(&fb.gamma)),
            "witness": witness,
        }),
        stderr: Value::Null,
        assertions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndistinguishabilityParams {
    pub m: usize,
    pub k: usize,
    pub s: usize,
    pub family: Option<Vec<String>>,
    pub trials: u64,
    pub base: Option<PathBuf>,
}

impl Default for IndistinguishabilityParams {
    fn default() -> Self {
        IndistinguishabilityParams {
            m: 64,
            k: 8,
            s: 4,
            family: None,
            trials: DEFAULT_TRIALS,
            base: None,
        }
    }
}

fn indistinguishability(mut p: IndistinguishabilityParams, seed: u64) -> Result<Outcome> {
    ensure!((2..=MAX_EXHAUSTIVE).contains(&p.s), "s must lie in 2..={MAX_EXHAUSTIVE}");
    check_order("m·k", p.m * p.k)?;
    ensure!(p.trials > 0, "trials must be positive");
    let g = match &p.base {
        Some(path) => read_graph(path)?,
        None => random_graph(p.m, derive_seed(seed, 0)),
    };
    ensure!(g.order() == p.m, "base graph has {} vertices but m = {}", g.order(), p.m);
    let family = resolve_family(&p.family, p.s, derive_seed(seed, 1))?;
    p.family = Some(family_names(&family));
    let fam = SubgraphFamily::classes(family, p.s)?;
    let r = indistinguishability_experiment(&g, p.k, &fam, p.trials, derive_seed(seed, 2))?;
    let assertions = vec![
        Assertion::new(
            "blowup density bound",
            r.density_bound_holds,
            format!(
                "{:.5} <= {:.5} + {:.5} + 5·{:.5}",
                r.blowup_estimate.point, r.base_estimate.point, r.collision_bound, r.combined_stderr
            ),
        ),
        Assertion::new(
            "multi-hit frequency",
            r.collision_bound_holds,
            format!("{:.5} vs bound {:.5}", r.collision_estimate.point, r.collision_bound),
        ),
        Assertion::new(
            "exact collision probability <= bound",
            r.collision_exact <= r.collision_bound,
            format!("{:.6}", r.collision_exact),
        ),
    ];
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({
            "collision_bound": r.collision_bound,
            "collision_exact": r.collision_exact,
            "p_base_exact": r.base_exact,
            "p_blowup_exact": r.blowup_exact,
        }),
        empirical: json!({
            "p_blowup": estimate_json(&r.blowup_estimate),
            "p_base": estimate_json(&r.base_estimate),
            "multi_hit": estimate_json(&r.collision_estimate),
            "conditional_no_collision": estimate_json(&r.conditional_estimate),
            "conditional_law_holds": r.conditional_law_holds,
            "blowup_is_member": r.blowup_is_member,
            "blowup_phi": r.blowup_phi,
        }),
        stderr: json!({"combined": r.combined_stderr}),
        assertions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleSamplingParams {
    pub s: usize,
    pub m: usize,
    pub k: usize,
    pub base: Option<PathBuf>,
    pub family: Option<Vec<String>>,
    pub subset_trials: u64,
    pub sequence_trials: u64,
    pub marginal_trials: u64,
    pub max_member_fraction: String,
    pub level: f64,
    pub max_draws: u64,
    /// Sample sizes for the good-sequence decay table.
    pub decay_sizes: Vec<usize>,
}

impl Default for DoubleSamplingParams {
    fn default() -> Self {
        DoubleSamplingParams {
            s: 3,
            m: 16,
            k: 16,
            base: None,
            family: None,
            subset_trials: 4000,
            sequence_trials: 4000,
            marginal_trials: 20_000,
            max_member_fraction: "1/10".into(),
            level: 0.001,
            max_draws: 10_000,
            decay_sizes: vec![2, 3, 4],
        }
    }
}

fn double_sampling_shape(mut p: DoubleSamplingParams, seed: u64) -> Result<Outcome> {
    ensure!((2..=MAX_EXHAUSTIVE).contains(&p.s), "s must lie in 2..={MAX_EXHAUSTIVE}");
    ensure!(p.level > 0.0 && p.level < 1.0, "level must lie in (0, 1)");
    let max_frac = rat("max_member_fraction", &p.max_member_fraction)?;
    let fb = far_blowup(&p.base, p.m, p.k, derive_seed(seed, 0), p.max_draws)?;
    let outer = p.s.pow(4);
    ensure!(fb.gamma.order() >= outer, "blowup has {} vertices, fewer than s^4 = {outer}", fb.gamma.order());
    let family = resolve_family(&p.family, p.s, derive_seed(seed, 1))?;
    p.family = Some(family_names(&family));
    let tester = TesterSpec::new("rejection family", SubgraphFamily::classes(family, p.s)?);
    let property = WeightedDensityProperty::quasirandomness_property();

    let members = induced_member_fraction(&property, &fb.gamma, outer, p.subset_trials, derive_seed(seed, 2))?;
    let good = good_sequence_fraction(&tester, &fb.gamma, p.sequence_trials, derive_seed(seed, 3))?;
    let accept = estimate_canonical_acceptance(&tester, &fb.gamma, p.sequence_trials, derive_seed(seed, 4))?;
    let mut decay = Vec::new();
    for (j, &size) in p.decay_sizes.iter().enumerate() {
        ensure!((2..=MAX_EXHAUSTIVE).contains(&size), "decay size {size} outside 2..={MAX_EXHAUSTIVE}");
        if fb.gamma.order() < size.pow(4) {
            continue;
        }
        let fam = random_family(size, derive_seed(seed, 100 + j as u64))?;
        let t = TesterSpec::new(format!("random family, s = {size}"), SubgraphFamily::classes(fam.clone(), size)?);
        let g = good_sequence_fraction(&t, &fb.gamma, p.sequence_trials, derive_seed(seed, 200 + j as u64))?;
        let a = estimate_canonical_acceptance(&t, &fb.gamma, p.sequence_trials, derive_seed(seed, 300 + j as u64))?;
        decay.push(json!({
            "s": size,
            "family": family_names(&fam),
            "good_fraction": g.point,
            "bad_fraction": 1.0 - g.point,
            "stderr": g.stderr,
            "canonical_acceptance": a.point,
        }));
    }
    let marginal = double_sampling_marginal_check(&tester, &fb.gamma, p.marginal_trials, derive_seed(seed, 5))?;

    let assertions = vec![
        Assertion::new(
            "member fraction of s^4-subsets",
            Rational::new(members.hits.into(), members.trials.into()) <= max_frac,
            format!("{}/{} vs {}", members.hits, members.trials, p.max_member_fraction),
        ),
        Assertion::new(
            "inner-sequence marginal uniform",
            marginal.passes(p.level),
            format!("min p-value {:.5} over {} tests", marginal.min_p_value(), marginal.position_tests.len() + marginal.set_test.is_some() as usize),
        ),
    ];
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({
            "outer_size": outer,
            "inner_size": p.s * p.s,
            "blowup_z": frac(&property.z_value(&fb.gamma)),
            "canonical_acceptance_exact": tester.acceptance_probability(&fb.gamma).map(|r| to_fraction_string(&r)),
        }),
        empirical: json!({
            "base": fb.base_source,
            "member_fraction": estimate_json(&members),
            "good_sequences": estimate_json(&good),
            "canonical_acceptance": estimate_json(&accept),
            "marginal": marginal,
            "decay": decay,
        }),
        stderr: json!({
            "member_fraction": members.stderr,
            "good_sequences": good.stderr,
            "canonical_acceptance": accept.stderr,
        }),
        assertions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotCalibrationParams {
    pub n: usize,
    pub graphs: u64,
    pub trials: u64,
    /// `thm1.4`, inline JSON, or a path to a property file.
    pub property: String,
    pub normalize: bool,
    pub sigmas: f64,
}

impl Default for PotCalibrationParams {
    fn default() -> Self {
        PotCalibrationParams {
            n: 30,
            graphs: 20,
            trials: DEFAULT_TRIALS,
            property: BUILTIN_NAME.into(),
            normalize: false,
            sigmas: 4.0,
        }
    }
}

fn pot_calibration(p: PotCalibrationParams, seed: u64) -> Result<Outcome> {
    check_order("n", p.n)?;
    ensure!(p.trials > 0 && p.graphs > 0, "graphs and trials must be positive");
    let property = load_property(&p.property)?;
    ensure!(p.n >= property.h, "n must be at least h = {}", property.h);
    let pot = pot_from_property(&property, p.normalize)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut assertions = Vec::new();
    for i in 0..p.graphs {
        let g = random_graph(p.n, derive_seed(seed, 2 * i));
        let exact = pot.rejection_probability(&g);
        let z = to_f64(&exact);
        let sigma = (z * (1.0 - z) / p.trials as f64).sqrt();
        let est = estimate_pot_rejection(&pot, &g, p.trials, derive_seed(seed, 2 * i + 1))?;
        let dev = (est.point - z).abs();
        let ok = if sigma.is_zero() { dev == 0.0 } else { dev <= p.sigmas * sigma };
        worst = worst.max(if sigma.is_zero() { 0.0 } else { dev / sigma });
        assertions.push(Assertion::new(
            format!("graph {i} within {} sigma", p.sigmas),
            ok,
            format!("{:.5} vs {:.5}", est.point, z),
        ));
        rows.push(json!({
            "graph_seed": derive_seed(seed, 2 * i),
            "exact_rejection": to_fraction_string(&exact),
            "empirical": estimate_json(&est),
            "sigma": sigma,
        }));
    }
    Ok(Outcome {
        params: serde_json::to_value(&p)?,
        analytic: json!({"c": frac(&pot.c), "property": property.to_json()}),
        empirical: json!({"graphs": rows, "worst_sigma": worst}),
        stderr: json!(rows.iter().map(|r| r["sigma"].clone()).collect::<Vec<_>>()),
        assertions,
    })
}

/// Fraction of double-sampling runs whose block sequence is good; run `i` uses `derive_seed(seed, i)`.
fn good_sequence_fraction(t: &TesterSpec, g: &Graph, trials: u64, seed: u64) -> Result<DensityEstimate> {
    let good = (0..trials)
        .into_par_iter()
        .map(|i| double_sampling(t, g, derive_seed(seed, i)).map(|d| d.verdict.good))
        .collect::<ptlab_core::Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&g| g)
        .count() as u64;
    Ok(DensityEstimate::from_counts(good, trials, seed))
}

/// Writes the report to `path` and returns whether every assertion passed.
pub fn write_report(report: &Report, path: &Path) -> Result<bool> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, report.to_json_pretty()).with_context(|| format!("writing {}", path.display()))?;
    Ok(report.passed())
}
