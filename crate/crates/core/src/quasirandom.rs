//! Quasirandomness with density 1/2: the cut definition, the edge/four-cycle
//! density condition, and the audit linking membership to both.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{edge_density, kst_defect, t_inj_c4};
use crate::error::{Error, Result};
use crate::graph::{BlowupStructure, Graph};
use crate::property::{phi_value, WeightedDensityProperty};
use crate::rational::{int, ratio, to_f64, to_fraction_string, Rational};
use crate::seed::{derive_seed, rng_from_seed};

pub const EXACT_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

/// Disjoint sets whose bipartite edge count leaves `(1/2 ± δ)|U||V|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub edges: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasirandomReport {
    pub n: usize,
    pub delta: f64,
    pub delta_exact: String,
    pub mode: Mode,
    /// Exact mode: ground truth. Sampled mode: true means no violation was found.
    pub quasirandom: bool,
    pub witness: Option<Witness>,
    pub pairs_checked: u64,
    pub edge_density: String,
    pub c4_density: String,
    pub kst_defect: String,
}

/// Smallest set size allowed by `|U| >= δn`.
pub fn min_part_size(n: usize, delta: &Rational) -> usize {
    let bound = delta * int(n as u64);
    let c = bound.ceil().to_integer();
    if c.is_negative() {
        0
    } else {
        usize::try_from(c).unwrap_or(usize::MAX)
    }
}

fn violates(edges: u64, su: usize, sv: usize, delta: &Rational) -> bool {
    // |e - |U||V|/2| > δ|U||V|  <=>  |2e - |U||V|| > 2δ|U||V|
    let prod = (su * sv) as i64;
    let dev = int((2 * edges as i64 - prod).abs());
    dev > int(2 * prod) * delta
}

/// Checks one disjoint pair against the δ condition.
pub fn check_pair(g: &Graph, u: &[usize], v: &[usize], delta: &Rational) -> Option<Witness> {
    let n = g.order();
    let min = min_part_size(n, delta);
    if u.len() < min || v.len() < min || u.is_empty() || v.is_empty() {
        return None;
    }
    let edges: u64 = u
        .iter()
        .map(|&a| v.iter().filter(|&&b| g.has_edge(a, b)).count() as u64)
        .sum();
    violates(edges, u.len(), v.len(), delta).then(|| Witness {
        u: sorted(u),
        v: sorted(v),
        edges,
    })
}

fn sorted(x: &[usize]) -> Vec<usize> {
    let mut x = x.to_vec();
    x.sort_unstable();
    x
}

/// First violating pair of blowup parts, in lexicographic part order.
pub fn blowup_part_witness(g: &Graph, structure: &BlowupStructure, delta: &Rational) -> Option<Witness> {
    let m = structure.parts.len();
    (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .find_map(|(i, j)| check_pair(g, &structure.parts[i], &structure.parts[j], delta))
}

pub fn is_delta_quasirandom(g: &Graph, delta: &Rational, mode: Mode, budget: u64, seed: u64) -> Result<QuasirandomReport> {
    if delta.is_negative() {
        return Err(Error::InvalidArgument("delta must be nonnegative".into()));
    }
    let (witness, checked) = match mode {
        Mode::Exact => exact_search(g, delta)?,
        Mode::Sampled => sampled_search(g, delta, budget, seed),
    };
    Ok(QuasirandomReport {
        n: g.order(),
        delta: to_f64(delta),
        delta_exact: to_fraction_string(delta),
        mode,
        quasirandom: witness.is_none(),
        witness,
        pairs_checked: checked,
        edge_density: to_fraction_string(&edge_density(g)),
        c4_density: to_fraction_string(&t_inj_c4(g)),
        kst_defect: to_fraction_string(&kst_defect(g)),
    })
}

/// Every unordered pair of disjoint sets, enumerated as (U, V) with the
/// smallest vertex of U ∪ V in U.
fn exact_search(g: &Graph, delta: &Rational) -> Result<(Option<Witness>, u64)> {
    let n = g.order();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            operation: "exact quasirandomness",
            order: n,
            limit: EXACT_LIMIT,
        });
    }
    let min = min_part_size(n, delta).max(1);
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).fold(0u32, |acc, w| acc | 1 << w))
        .collect();
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let mut checked = 0u64;
    for umask in 1..=full {
        let su = umask.count_ones() as usize;
        if su < min {
            continue;
        }
        let low = umask.trailing_zeros();
        // V may only use vertices above U's smallest vertex
        let rest = full & !umask & !((1u32 << (low + 1)) - 1);
        if (rest.count_ones() as usize) < min {
            continue;
        }
        let cnt: Vec<u64> = (0..n).map(|v| (nbr[v] & umask).count_ones() as u64).collect();
        let mut vmask = rest;
        loop {
            let sv = vmask.count_ones() as usize;
            if sv >= min {
                checked += 1;
                let mut edges = 0u64;
                let mut bits = vmask;
                while bits != 0 {
                    edges += cnt[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                if violates(edges, su, sv, delta) {
                    let w = Witness {
                        u: mask_to_vec(umask),
                        v: mask_to_vec(vmask),
                        edges,
                    };
                    return Ok((Some(w), checked));
                }
            }
            if vmask == 0 {
                break;
            }
            vmask = (vmask - 1) & rest;
        }
    }
    Ok((None, checked))
}

fn mask_to_vec(mut m: u32) -> Vec<usize> {
    let mut v = Vec::new();
    while m != 0 {
        v.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    v
}

/// Probes `budget` random disjoint pairs; probe `i` uses `derive_seed(seed, i)`.
/// Returns the violation with the smallest probe index.
fn sampled_search(g: &Graph, delta: &Rational, budget: u64, seed: u64) -> (Option<Witness>, u64) {
    let n = g.order();
    let min = min_part_size(n, delta).max(1);
    let hi = min.max(n / 2);
    if 2 * min > n {
        return (None, 0);
    }
    let found = (0..budget).into_par_iter().find_map_first(|i| {
        let mut rng = rng_from_seed(derive_seed(seed, i));
        let su = rng.random_range(min..=hi.min(n - min));
        let sv = rng.random_range(min..=hi.min(n - su));
        let mut verts: Vec<usize> = (0..n).collect();
        let (chosen, _) = verts.partial_shuffle(&mut rng, su + sv);
        let (u, v) = chosen.split_at(su);
        check_pair(g, u, v, delta).map(|w| (i, w))
    });
    match found {
        Some((i, w)) => (Some(w), i + 1),
        None => (None, budget),
    }
}

/// Constants of the edge/four-cycle criterion. `gamma` is stored squared so
/// that irrational choices such as `sqrt(8/n)` stay exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgwParams {
    pub gamma_squared: String,
    pub n0: usize,
    pub source: CgwSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgwSource {
    Configured,
    DerivedFromSize,
}

impl CgwParams {
    pub fn configured(gamma: &Rational, n0: usize) -> Result<Self> {
        if *gamma <= Rational::zero() || n0 < 4 {
            return Err(Error::InvalidArgument("need gamma > 0 and n0 >= 4".into()));
        }
        Ok(CgwParams {
            gamma_squared: to_fraction_string(&(gamma * gamma)),
            n0,
            source: CgwSource::Configured,
        })
    }

    /// `gamma = sqrt(c / n)`, default `c = 8`.
    pub fn derived_from_size(n: usize, c: &Rational) -> Result<Self> {
        if n < 4 || *c <= Rational::zero() {
            return Err(Error::InvalidArgument("need n >= 4 and c > 0".into()));
        }
        Ok(CgwParams {
            gamma_squared: to_fraction_string(&(c / int(n as u64))),
            n0: 4,
            source: CgwSource::DerivedFromSize,
        })
    }

    pub fn gamma_squared(&self) -> Rational {
        crate::rational::parse_rational(&self.gamma_squared).expect("stored as num/den")
    }
}

/// `t_inj(K2) = 1/2 ± γ` and `t_inj(C4) <= 1/16 + γ`, exactly.
pub fn cgw_check(g: &Graph, gamma: &Rational) -> bool {
    let x = edge_density(g);
    let t = t_inj_c4(g);
    (x - ratio(1, 2)).abs() <= *gamma && t <= ratio(1, 16) + gamma
}

/// [`cgw_check`] for `γ = sqrt(gamma_squared)`, still exact.
pub fn cgw_check_squared(g: &Graph, gamma_squared: &Rational) -> bool {
    let dx = edge_density(g) - ratio(1, 2);
    let dt = t_inj_c4(g) - ratio(1, 16);
    let edge_ok = &dx * &dx <= *gamma_squared;
    let c4_ok = !dt.is_positive() || &dt * &dt <= *gamma_squared;
    edge_ok && c4_ok
}

/// Smallest γ for which [`cgw_check`] passes: `max(|t_inj(K2) - 1/2|, t_inj(C4) - 1/16, 0)`.
pub fn minimal_cgw_gamma(g: &Graph) -> Rational {
    let a = (edge_density(g) - ratio(1, 2)).abs();
    let b = t_inj_c4(g) - ratio(1, 16);
    if a >= b {
        a
    } else {
        b
    }
}

/// `f(x) = 2x^4 - x + 3/8`; convex with its minimum 0 at `x = 1/2`.
pub fn f_window(x: &Rational) -> Rational {
    let x2 = x * x;
    int(2) * &x2 * &x2 - x + ratio(3, 8)
}

/// Closed forms of `f(1/2 + γ)` and `f(1/2 - γ)`.
pub fn f_window_expansions(gamma: &Rational) -> (Rational, Rational) {
    let g2 = gamma * gamma;
    let g3 = &g2 * gamma;
    let g4 = &g2 * &g2;
    let upper = int(2) * &g4 + int(4) * &g3 + int(3) * &g2;
    let lower = int(2) * &g4 - int(4) * &g3 + int(3) * &g2;
    (upper, lower)
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberAudit {
    pub seed: u64,
    pub edge_density: String,
    pub c4_density: String,
    pub phi: String,
    pub kst_defect: String,
    pub n_times_defect: f64,
    pub f_of_density: String,
    /// `f(t_inj(K2)) <= phi + 2·defect <= 2·defect`.
    pub chain_holds: bool,
    /// `t_inj(C4) <= t_inj(K2)/2 - 3/16`.
    pub c4_bound_holds: bool,
    /// Whether `2·defect <= γ²`, which forces the edge-density window.
    pub window_forced: bool,
    /// `|t_inj(K2) - 1/2| <= γ`.
    pub in_window: bool,
    pub cgw_pass: bool,
    pub minimal_gamma: f64,
    /// `minimal_gamma^2 * n <= 100`, i.e. `minimal_gamma * sqrt(n) <= 10`.
    pub minimal_gamma_scaled_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub samples_drawn: u64,
    pub gamma_squared: String,
    pub members: Vec<MemberAudit>,
    pub all_chains_hold: bool,
    pub all_forced_windows_hold: bool,
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub n: usize,
    /// Random graphs drawn at most.
    pub samples: u64,
    /// Stop once this many members are found.
    pub max_members: usize,
    pub gamma_squared: Rational,
    pub seed: u64,
}

/// Rejection-samples members of `G(n, 1/2)` (graph `i` uses `derive_seed(seed, i)`)
/// and checks the density chain on each.
pub fn member_quasirandomness_audit(p: &WeightedDensityProperty, cfg: &AuditConfig) -> Result<AuditReport> {
    if cfg.n < 4 {
        return Err(Error::InvalidArgument("audit needs n >= 4".into()));
    }
    let mut members = Vec::new();
    let mut drawn = 0;
    for i in 0..cfg.samples {
        if members.len() >= cfg.max_members {
            break;
        }
        drawn += 1;
        let seed = derive_seed(cfg.seed, i);
        let g = crate::graph::random_graph(cfg.n, seed);
        if !p.is_member(&g) {
            continue;
        }
        members.push(audit_member(&g, seed, &cfg.gamma_squared)?);
    }
    Ok(AuditReport {
        n: cfg.n,
        samples_drawn: drawn,
        gamma_squared: to_fraction_string(&cfg.gamma_squared),
        all_chains_hold: members.iter().all(|m| m.chain_holds && m.c4_bound_holds),
        all_forced_windows_hold: members.iter().all(|m| !m.window_forced || m.in_window),
        members,
    })
}

pub fn audit_member(g: &Graph, seed: u64, gamma_squared: &Rational) -> Result<MemberAudit> {
    let n = g.order();
    let x = edge_density(g);
    let t = t_inj_c4(g);
    let phi = phi_value(g)?;
    let defect = kst_defect(g);
    let fx = f_window(&x);
    let two_d = int(2) * &defect;
    let dx = &x - ratio(1, 2);
    let min_gamma = minimal_cgw_gamma(g);
    let nn = int(n as u64);
    Ok(MemberAudit {
        seed,
        edge_density: to_fraction_string(&x),
        c4_density: to_fraction_string(&t),
        phi: to_fraction_string(&phi),
        kst_defect: to_fraction_string(&defect),
        n_times_defect: to_f64(&(&defect * &nn)),
        f_of_density: to_fraction_string(&fx),
        chain_holds: fx <= &phi + &two_d && &phi + &two_d <= two_d,
        c4_bound_holds: t <= &x / int(2) - ratio(3, 16),
        window_forced: two_d <= *gamma_squared,
        in_window: &dx * &dx <= *gamma_squared,
        cgw_pass: cgw_check_squared(g, gamma_squared),
        minimal_gamma: to_f64(&min_gamma),
        minimal_gamma_scaled_ok: &min_gamma * &min_gamma * nn <= int(100),
    })
}

/// Fraction of a part pair's `k²` pairs that must change to bring a complete
/// or empty pair into the `(1/2 ± 1/m)` window: `1/2 - 1/m`, at least `2/5` once `m >= 10`.
pub fn per_pair_change_fraction(m: u64) -> Rational {
    ratio(1, 2) - ratio(1, m as i64)
}

/// `binom(m,2) · (2/5)·k² >= (1/10)·(mk)²`, exactly.
pub fn blowup_farness_inequality(m: u64, k: u64) -> bool {
    let lhs = Rational::from_integer(crate::rational::binomial(m, 2)) * ratio(2, 5) * int(k * k);
    let n = BigInt::from(m * k);
    lhs >= Rational::from_integer(&n * &n) * ratio(1, 10)
}
