//! Simulated testers: proximity-oblivious testers, their amplification,
//! canonical testers, double sampling and the blowup experiment.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{four_profile_fast, sample_vertices, DensityEstimate, SubgraphFamily};
use crate::error::{Error, Result};
use crate::graph::{blowup, Graph};
use crate::iso::{class4_of_mask, SmallGraphClass};
use crate::property::{phi_value, PotSpec, WeightedDensityProperty};
use crate::rational::{binomial, int, to_f64, to_fraction_string, Rational};
use crate::seed::{derive_seed, rng_from_seed, LabRng};
use crate::stats::{chi_squared_uniform, ChiSquaredTest};

/// Success probability every tester must reach.
pub const SUCCESS_PROBABILITY: f64 = 2.0 / 3.0;
pub const DEFAULT_KAPPA: u64 = 8;

/// A canonical tester: sample `s` vertices, reject iff the induced subgraph is in the family.
#[derive(Debug, Clone)]
pub struct TesterSpec {
    pub label: String,
    pub rejection: SubgraphFamily,
}

impl TesterSpec {
    pub fn new(label: impl Into<String>, rejection: SubgraphFamily) -> Self {
        TesterSpec {
            label: label.into(),
            rejection,
        }
    }

    pub fn sample_size(&self) -> usize {
        self.rejection.order()
    }

    pub fn accepts_induced(&self, g: &Graph, sample: &[usize]) -> bool {
        !self.rejection.contains_induced(g, sample)
    }

    /// `1 - p(F, G)` exactly, available for four-vertex class families.
    pub fn acceptance_probability(&self, g: &Graph) -> Option<Rational> {
        self.rejection
            .exact_density(&four_profile_fast(g))
            .map(|p| Rational::one() - p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub accepted: bool,
    pub sampled_vertices: Vec<usize>,
    pub seed: u64,
}

/// True with probability exactly `p` whenever the denominator fits in 64 bits.
fn bernoulli(rng: &mut LabRng, p: &Rational) -> bool {
    if p.is_zero() {
        return false;
    }
    if p.is_one() {
        return true;
    }
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(a), Some(b)) => rng.random_range(0..b) < a,
        _ => rng.random::<f64>() < to_f64(p),
    }
}

fn class_of_sample(g: &Graph, sample: &[usize]) -> SmallGraphClass {
    if sample.len() == 4 {
        class4_of_mask(g.induced_mask(sample)).small_class()
    } else {
        SmallGraphClass::of(&g.induced(sample)).expect("sample of at most 8 vertices")
    }
}

/// One POT invocation, replayable from `seed`.
pub fn run_pot(pot: &PotSpec, g: &Graph, seed: u64) -> Result<RunOutcome> {
    let n = g.order();
    if n < pot.h {
        return Err(Error::InvalidArgument(format!("POT samples {} vertices but n = {n}", pot.h)));
    }
    let mut rng = rng_from_seed(seed);
    let mut sample = sample_indices(&mut rng, n, pot.h).into_vec();
    sample.sort_unstable();
    let reject = bernoulli(&mut rng, &pot.reject_probability_of(&class_of_sample(g, &sample)));
    Ok(RunOutcome {
        accepted: !reject,
        sampled_vertices: sample,
        seed,
    })
}

/// Rejection frequency over `trials` runs; run `i` uses `derive_seed(seed, i)`.
pub fn estimate_pot_rejection(pot: &PotSpec, g: &Graph, trials: u64, seed: u64) -> Result<DensityEstimate> {
    if g.order() < pot.h {
        return Err(Error::InvalidArgument(format!("POT samples {} vertices but n = {}", pot.h, g.order())));
    }
    let rejections = (0..trials)
        .into_par_iter()
        .filter(|&i| !run_pot(pot, g, derive_seed(seed, i)).expect("checked order").accepted)
        .count() as u64;
    Ok(DensityEstimate::from_counts(rejections, trials, seed))
}

/// `T` independent POT runs, accepting iff at least `(c - f(ε)/2)·T` accept.
#[derive(Debug, Clone)]
pub struct AmplifiedTester {
    pub pot: PotSpec,
    pub margin: Rational,
    pub repetitions: u64,
    /// Minimum number of accepting runs.
    pub threshold: Rational,
}

pub fn amplify(pot: &PotSpec, eps: &Rational, kappa: &Rational) -> Result<AmplifiedTester> {
    let margin_fn = pot
        .margin
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("POT has no detection margin".into()))?;
    let f = margin_fn(eps);
    if f <= Rational::zero() {
        return Err(Error::InvalidArgument("detection margin must be positive".into()));
    }
    let t = (kappa / (&f * &f)).ceil().to_integer().max(BigInt::one());
    let repetitions = t.to_u64().ok_or_else(|| Error::InvalidArgument("too many repetitions".into()))?;
    let threshold = (&pot.c - &f / int(2)) * int(repetitions);
    Ok(AmplifiedTester {
        pot: pot.clone(),
        margin: f,
        repetitions,
        threshold,
    })
}

impl AmplifiedTester {
    /// Run `j` of the batch uses `derive_seed(seed, j)`.
    pub fn run(&self, g: &Graph, seed: u64) -> Result<bool> {
        let mut accepted = 0u64;
        for j in 0..self.repetitions {
            accepted += run_pot(&self.pot, g, derive_seed(seed, j))?.accepted as u64;
        }
        Ok(int(accepted) >= self.threshold)
    }

    pub fn estimate_acceptance(&self, g: &Graph, trials: u64, seed: u64) -> Result<DensityEstimate> {
        let results: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|i| self.run(g, derive_seed(seed, i)))
            .collect::<Result<_>>()?;
        let acc = results.iter().filter(|&&a| a).count() as u64;
        Ok(DensityEstimate::from_counts(acc, trials, seed))
    }
}

pub fn run_canonical(t: &TesterSpec, g: &Graph, seed: u64) -> Result<RunOutcome> {
    let s = t.sample_size();
    if s > g.order() {
        return Err(Error::InvalidArgument(format!("sample size {s} exceeds n = {}", g.order())));
    }
    let sample = sample_vertices(g.order(), s, seed, 0);
    Ok(RunOutcome {
        accepted: t.accepts_induced(g, &sample),
        sampled_vertices: sample,
        seed,
    })
}

/// Acceptance frequency over `trials` canonical runs; run `i` uses `derive_seed(seed, i)`.
pub fn estimate_canonical_acceptance(t: &TesterSpec, g: &Graph, trials: u64, seed: u64) -> Result<DensityEstimate> {
    if t.sample_size() > g.order() {
        return Err(Error::InvalidArgument("sample size exceeds graph order".into()));
    }
    let acc = (0..trials)
        .into_par_iter()
        .filter(|&i| run_canonical(t, g, derive_seed(seed, i)).expect("checked").accepted)
        .count() as u64;
    Ok(DensityEstimate::from_counts(acc, trials, seed))
}

/// Acceptance bits of `s` blocks; good iff at least half of them accept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceVerdict {
    pub blocks: Vec<bool>,
    pub good: bool,
}

impl SequenceVerdict {
    pub fn from_blocks(blocks: Vec<bool>) -> Self {
        let accepting = blocks.iter().filter(|&&b| b).count();
        let good = 2 * accepting >= blocks.len();
        SequenceVerdict { blocks, good }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleSample {
    pub verdict: SequenceVerdict,
    /// Sorted outer sample of size `s⁴`.
    pub outer: Vec<usize>,
    /// The `s²` inner vertices in draw order; block `i` is `inner[i*s..(i+1)*s]`.
    pub inner: Vec<usize>,
}

fn classify_sequence(t: &TesterSpec, g: &Graph, inner: &[usize]) -> SequenceVerdict {
    let s = t.sample_size();
    let blocks = inner
        .chunks(s)
        .map(|block| {
            let mut b = block.to_vec();
            b.sort_unstable();
            t.accepts_induced(g, &b)
        })
        .collect();
    SequenceVerdict::from_blocks(blocks)
}

/// Draws `U` of size `s⁴` uniformly, then `s²` vertices of `U` without
/// repetition, split into `s` blocks of `s`.
pub fn double_sampling(t: &TesterSpec, g: &Graph, seed: u64) -> Result<DoubleSample> {
    let s = t.sample_size();
    let outer_size = s.pow(4);
    if g.order() < outer_size {
        return Err(Error::InvalidArgument(format!("need n >= s^4 = {outer_size}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut outer = sample_indices(&mut rng, g.order(), outer_size).into_vec();
    outer.sort_unstable();
    let inner = draw_inner(&mut rng, &outer, s * s);
    Ok(DoubleSample {
        verdict: classify_sequence(t, g, &inner),
        outer,
        inner,
    })
}

/// The conditional view: `U` fixed, only the inner sequence is random.
pub fn double_sampling_given_outer(t: &TesterSpec, g: &Graph, outer: &[usize], seed: u64) -> Result<DoubleSample> {
    let s = t.sample_size();
    if outer.len() < s * s {
        return Err(Error::InvalidArgument("outer sample smaller than s^2".into()));
    }
    let mut rng = rng_from_seed(seed);
    let inner = draw_inner(&mut rng, outer, s * s);
    Ok(DoubleSample {
        verdict: classify_sequence(t, g, &inner),
        outer: outer.to_vec(),
        inner,
    })
}

fn draw_inner(rng: &mut LabRng, outer: &[usize], count: usize) -> Vec<usize> {
    let mut pool = outer.to_vec();
    let (chosen, _) = pool.partial_shuffle(rng, count);
    chosen.to_vec()
}

/// Goodness-of-fit of the unconditioned inner sequence against direct sampling without repetition.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalCheck {
    pub trials: u64,
    /// Unordered inner set against the uniform law on `s²`-subsets (only when that table is small).
    pub set_test: Option<ChiSquaredTest>,
    /// Vertex at each inner position against the uniform law on `V(G)`.
    pub position_tests: Vec<ChiSquaredTest>,
}

impl MarginalCheck {
    /// Every test passes at `level`, Bonferroni-corrected over the tests run.
    pub fn passes(&self, level: f64) -> bool {
        let k = self.position_tests.len() + self.set_test.is_some() as usize;
        let per = level / k.max(1) as f64;
        self.set_test.is_none_or(|t| t.passes(per)) && self.position_tests.iter().all(|t| t.passes(per))
    }

    pub fn min_p_value(&self) -> f64 {
        self.position_tests
            .iter()
            .chain(self.set_test.as_ref())
            .map(|t| t.p_value)
            .fold(1.0, f64::min)
    }
}

pub fn double_sampling_marginal_check(t: &TesterSpec, g: &Graph, trials: u64, seed: u64) -> Result<MarginalCheck> {
    let s = t.sample_size();
    let n = g.order();
    let k = s * s;
    let draws: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|i| double_sampling(t, g, derive_seed(seed, i)).map(|d| d.inner))
        .collect::<Result<_>>()?;
    let mut position_counts = vec![vec![0u64; n]; k];
    for d in &draws {
        for (pos, &v) in d.iter().enumerate() {
            position_counts[pos][v] += 1;
        }
    }
    let position_tests = position_counts.iter().map(|c| chi_squared_uniform(c)).collect();
    let cells = binomial(n as u64, k as u64).to_u64().filter(|&c| c >= 2 && c <= trials / 5);
    let set_test = cells.map(|cells| {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::with_capacity(cells as usize);
        let mut counts = vec![0u64; cells as usize];
        let mut next = 0usize;
        for d in &draws {
            let mut key = d.clone();
            key.sort_unstable();
            let slot = *index.entry(key).or_insert_with(|| {
                next += 1;
                next - 1
            });
            counts[slot] += 1;
        }
        chi_squared_uniform(&counts)
    });
    Ok(MarginalCheck {
        trials,
        set_test,
        position_tests,
    })
}

/// Fraction of uniformly random `size`-subsets `U` with `G[U]` in the property.
pub fn induced_member_fraction(
    p: &WeightedDensityProperty,
    g: &Graph,
    size: usize,
    trials: u64,
    seed: u64,
) -> Result<DensityEstimate> {
    if size > g.order() {
        return Err(Error::InvalidArgument("subset larger than the graph".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| p.is_member(&g.induced(&sample_vertices(g.order(), size, seed, i))))
        .count() as u64;
    Ok(DensityEstimate::from_counts(hits, trials, seed))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndistinguishabilityReport {
    pub base_order: usize,
    pub factor: usize,
    pub sample_size: usize,
    pub trials: u64,
    pub seed: u64,
    pub blowup_estimate: DensityEstimate,
    pub base_estimate: DensityEstimate,
    pub blowup_exact: Option<String>,
    pub base_exact: Option<String>,
    /// `binom(s, 2) / m`.
    pub collision_bound: f64,
    /// Exact probability that some part receives two sampled vertices.
    pub collision_exact: f64,
    pub collision_estimate: DensityEstimate,
    /// `P[Γ[S] ∈ F | no part hit twice]`.
    pub conditional_estimate: DensityEstimate,
    pub combined_stderr: f64,
    pub density_bound_holds: bool,
    pub collision_bound_holds: bool,
    /// Conditional estimate within 4σ of the exact base density, when the latter is known.
    pub conditional_law_holds: Option<bool>,
    pub blowup_is_member: bool,
    pub blowup_phi: String,
}

/// Compares `p(F, Γ)` with `p(F, G)` for the `k`-blowup `Γ` of `g` by sampling.
pub fn indistinguishability_experiment(
    g: &Graph,
    k: usize,
    family: &SubgraphFamily,
    trials: u64,
    seed: u64,
) -> Result<IndistinguishabilityReport> {
    let m = g.order();
    let s = family.order();
    let (gamma, structure) = blowup(g, k)?;
    let n = gamma.order();
    if s * s > n || s > m {
        return Err(Error::InvalidArgument(format!("need s^2 <= m·k and s <= m (s = {s}, m = {m}, k = {k})")));
    }
    let base_estimate = crate::density::sample_density(family, g, trials, derive_seed(seed, 1))?;
    let blowup_seed = derive_seed(seed, 2);
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let sample = sample_vertices(n, s, blowup_seed, i);
            let hit = family.contains_induced(&gamma, &sample);
            let mut parts: Vec<usize> = sample.iter().map(|&v| structure.part_of(v)).collect();
            parts.sort_unstable();
            let multi = parts.windows(2).any(|w| w[0] == w[1]);
            (hit, multi)
        })
        .collect();
    let hits = outcomes.iter().filter(|o| o.0).count() as u64;
    let multis = outcomes.iter().filter(|o| o.1).count() as u64;
    let clean_hits = outcomes.iter().filter(|o| o.0 && !o.1).count() as u64;
    let blowup_estimate = DensityEstimate::from_counts(hits, trials, blowup_seed);
    let collision_estimate = DensityEstimate::from_counts(multis, trials, blowup_seed);
    let conditional_estimate = DensityEstimate::from_counts(clean_hits, trials - multis, blowup_seed);

    let collision_bound = to_f64(&Rational::new(binomial(s as u64, 2), BigInt::from(m)));
    // P[no two in one part] = binom(m, s) k^s / binom(n, s)
    let no_collision = Rational::new(
        binomial(m as u64, s as u64) * BigInt::from(k).pow(s as u32),
        binomial(n as u64, s as u64),
    );
    let collision_exact = 1.0 - to_f64(&no_collision);
    let combined_stderr = blowup_estimate.stderr.hypot(base_estimate.stderr);
    let q = collision_bound.min(1.0);
    let collision_sigma = (q * (1.0 - q) / trials as f64).sqrt();

    let base_exact = family.exact_density(&four_profile_fast(g));
    let blowup_exact = family.exact_density(&four_profile_fast(&gamma));
    let conditional_law_holds = base_exact.as_ref().map(|p| {
        let p = to_f64(p);
        let se = (p * (1.0 - p) / conditional_estimate.trials.max(1) as f64).sqrt();
        (conditional_estimate.point - p).abs() <= 4.0 * se
    });

    Ok(IndistinguishabilityReport {
        base_order: m,
        factor: k,
        sample_size: s,
        trials,
        seed,
        density_bound_holds: blowup_estimate.point
            <= base_estimate.point + collision_bound + 5.0 * combined_stderr,
        collision_bound_holds: collision_estimate.point <= collision_bound + 4.0 * collision_sigma,
        blowup_estimate,
        base_estimate,
        blowup_exact: blowup_exact.map(|r| to_fraction_string(&r)),
        base_exact: base_exact.map(|r| to_fraction_string(&r)),
        collision_bound,
        collision_exact,
        collision_estimate,
        conditional_estimate,
        combined_stderr,
        conditional_law_holds,
        blowup_is_member: WeightedDensityProperty::quasirandomness_property().is_member(&gamma),
        blowup_phi: to_fraction_string(&phi_value(&gamma)?),
    })
}
