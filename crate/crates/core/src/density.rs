//! Exact induced densities and the four-vertex census.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso::{aut_count, class4_of_mask, containment4, enumerate_classes, Class4, SmallGraphClass};
use crate::rational::{binomial, binomial_u64, factorial, falling, int, to_fraction_string, Rational};
use crate::seed::{derive_seed, rng_from_seed};

/// Counts of four-vertex subsets inducing each class, indexed by [`Class4::index`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourProfile {
    pub n: usize,
    pub counts: [u64; 11],
}

impl FourProfile {
    pub fn count(&self, c: Class4) -> u64 {
        self.counts[c.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `p(H, G)`; zero when `n < 4`.
    pub fn density(&self, c: Class4) -> Rational {
        if self.n < 4 {
            return Rational::zero();
        }
        Rational::new(BigInt::from(self.count(c)), binomial(self.n as u64, 4))
    }

    /// The profile of the complement graph.
    pub fn complemented(&self) -> FourProfile {
        let mut counts = [0; 11];
        for c in Class4::ALL {
            counts[c.complement().index()] = self.count(c);
        }
        FourProfile { n: self.n, counts }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "classes": Class4::ALL.iter().map(|c| c.name()).collect::<Vec<_>>(),
            "counts": self.counts,
            "densities": Class4::ALL.iter().map(|&c| to_fraction_string(&self.density(c))).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusMode {
    Reference,
    Fast,
}

pub fn four_profile(g: &Graph, mode: CensusMode) -> FourProfile {
    match mode {
        CensusMode::Reference => four_profile_reference(g),
        CensusMode::Fast => four_profile_fast(g),
    }
}

/// Enumerates every 4-subset and classifies it through the 64-entry mask table.
pub fn four_profile_reference(g: &Graph) -> FourProfile {
    let n = g.order();
    let counts = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut local = [0u64; 11];
            for b in a + 1..n {
                let ab = g.has_edge(a, b) as u64;
                for c in b + 1..n {
                    let abc = ab | (g.has_edge(a, c) as u64) << 1 | (g.has_edge(b, c) as u64) << 2;
                    for d in c + 1..n {
                        let mask = abc
                            | (g.has_edge(a, d) as u64) << 3
                            | (g.has_edge(b, d) as u64) << 4
                            | (g.has_edge(c, d) as u64) << 5;
                        local[class4_of_mask(mask).index()] += 1;
                    }
                }
            }
            local
        })
        .reduce(|| [0; 11], add_arrays);
    FourProfile { n, counts }
}

fn add_arrays<const N: usize, T: Copy + std::ops::Add<Output = T>>(a: [T; N], b: [T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] + b[i])
}

/// Non-induced (subgraph) copy counts of every four-vertex class.
///
/// `copies[F]` counts pairs (4-set X, edge subset S of G[X]) with (X, S)
/// isomorphic to F. Only degrees, codegrees and edge counts inside common
/// neighbourhoods are needed, each a word-parallel AND + popcount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphCopies {
    pub n: usize,
    pub copies: [i128; 11],
}

#[derive(Default, Clone, Copy)]
struct VertexSums {
    wedges: i128,        // binom(d, 2)
    stars: i128,         // binom(d, 3)
    pair_c4: i128,       // sum over v != u of binom(codeg, 2)
    edge_diamond: i128,  // sum over neighbours of binom(codeg, 2)
    edge_codeg: i128,    // sum over neighbours of codeg, equals 2 t_u
    edge_paths: i128,    // sum over neighbours of (d_u - 1)(d_v - 1)
    paw: i128,           // t_u (d_u - 2)
    k4_sixfold: i128,    // sum over neighbours v > u of edges inside N(u) & N(v)
}

impl std::ops::Add for VertexSums {
    type Output = VertexSums;
    fn add(self, o: VertexSums) -> VertexSums {
        VertexSums {
            wedges: self.wedges + o.wedges,
            stars: self.stars + o.stars,
            pair_c4: self.pair_c4 + o.pair_c4,
            edge_diamond: self.edge_diamond + o.edge_diamond,
            edge_codeg: self.edge_codeg + o.edge_codeg,
            edge_paths: self.edge_paths + o.edge_paths,
            paw: self.paw + o.paw,
            k4_sixfold: self.k4_sixfold + o.k4_sixfold,
        }
    }
}

fn c2(x: i128) -> i128 {
    x * (x - 1) / 2
}

fn c3(x: i128) -> i128 {
    x * (x - 1) * (x - 2) / 6
}

pub fn subgraph_copies(g: &Graph) -> SubgraphCopies {
    let n = g.order();
    let deg: Vec<i128> = g.degrees().into_iter().map(|d| d as i128).collect();
    let words = g.words_per_row();
    let sums = (0..n)
        .into_par_iter()
        .map(|u| {
            let du = deg[u];
            let mut s = VertexSums {
                wedges: c2(du),
                stars: c3(du),
                ..Default::default()
            };
            let mut common = vec![0u64; words];
            let ru = g.row(u);
            for (v, &dv) in deg.iter().enumerate() {
                if v == u {
                    continue;
                }
                let rv = g.row(v);
                let mut c = 0i128;
                for w in 0..words {
                    common[w] = ru[w] & rv[w];
                    c += common[w].count_ones() as i128;
                }
                s.pair_c4 += c2(c);
                if g.has_edge(u, v) {
                    s.edge_diamond += c2(c);
                    s.edge_codeg += c;
                    s.edge_paths += (du - 1) * (dv - 1);
                    if v > u && c >= 2 {
                        let mut inside = 0i128;
                        for (wi, &word) in common.iter().enumerate() {
                            let mut bits = word;
                            while bits != 0 {
                                let x = wi * 64 + bits.trailing_zeros() as usize;
                                bits &= bits - 1;
                                inside += g
                                    .row(x)
                                    .iter()
                                    .zip(&common)
                                    .map(|(a, b)| (a & b).count_ones() as i128)
                                    .sum::<i128>();
                            }
                        }
                        s.k4_sixfold += inside / 2;
                    }
                }
            }
            s.paw = (s.edge_codeg / 2) * (du - 2);
            s
        })
        .reduce(VertexSums::default, |a, b| a + b);

    let nn = n as i128;
    let m = deg.iter().sum::<i128>() / 2;
    let triangles = sums.edge_codeg / 6;
    let choose4 = if n >= 4 { binomial_u64(n as u64, 4) as i128 } else { 0 };
    let mut copies = [0i128; 11];
    let mut set = |c: Class4, v: i128| copies[c.index()] = v;
    set(Class4::K4c, choose4);
    set(Class4::D4c, if n >= 4 { m * c2(nn - 2) } else { 0 });
    set(Class4::P3, if n >= 4 { sums.wedges * (nn - 3) } else { 0 });
    set(Class4::C4c, c2(m) - sums.wedges);
    set(Class4::K13c, if n >= 4 { triangles * (nn - 3) } else { 0 });
    set(Class4::K13, sums.stars);
    // middle edges are visited from both endpoints; each triangle closes 3 of the counted walks
    set(Class4::P4, sums.edge_paths / 2 - 3 * triangles);
    // every 4-cycle is counted once per diagonal pair and once per orientation of that pair
    set(Class4::C4, sums.pair_c4 / 4);
    set(Class4::P3c, sums.paw);
    set(Class4::D4, sums.edge_diamond / 2);
    set(Class4::K4, sums.k4_sixfold / 6);
    SubgraphCopies { n, copies }
}

/// Induced counts from subgraph copies by back-substitution over the
/// containment table, densest classes first.
pub fn induced_from_copies(sub: &SubgraphCopies) -> FourProfile {
    let mut order = Class4::ALL;
    order.sort_by_key(|c| std::cmp::Reverse(c.edge_count()));
    let mut ind = [0i128; 11];
    for f in order {
        let mut v = sub.copies[f.index()];
        for h in Class4::ALL {
            if h != f && h.edge_count() > f.edge_count() {
                v -= containment4(f, h) as i128 * ind[h.index()];
            }
        }
        debug_assert!(v >= 0, "negative induced count for {f}");
        ind[f.index()] = v;
    }
    FourProfile {
        n: sub.n,
        counts: std::array::from_fn(|i| u64::try_from(ind[i]).expect("induced count fits u64")),
    }
}

pub fn four_profile_fast(g: &Graph) -> FourProfile {
    induced_from_copies(&subgraph_copies(g))
}

/// `p(H, G)`; defined as zero when `n < 4`.
pub fn p_induced(h: Class4, g: &Graph) -> Rational {
    four_profile_fast(g).density(h)
}

/// Patterns accepted by [`t_inj`] and [`t_ind`]: a single edge or a four-vertex graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Edge,
    Four(Class4),
}

impl Pattern {
    pub fn of(h: &Graph) -> Result<Self> {
        match (h.order(), h.edge_count()) {
            (2, 1) => Ok(Pattern::Edge),
            (4, _) => Ok(Pattern::Four(crate::iso::classify4(h)?)),
            (n, m) => Err(Error::UnsupportedPattern(format!("{n} vertices, {m} edges"))),
        }
    }
}

pub fn edge_density(g: &Graph) -> Rational {
    let n = g.order() as u64;
    if n < 2 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(2 * g.edge_count()), BigInt::from(n * (n - 1)))
}

/// Injective homomorphism density, normalised by the falling factorial.
pub fn t_inj(h: &Graph, g: &Graph) -> Result<Rational> {
    match Pattern::of(h)? {
        Pattern::Edge => Ok(edge_density(g)),
        Pattern::Four(c) => Ok(t_inj4(c, &four_profile_fast(g))),
    }
}

/// Induced embedding density, `p(H, G) * aut(H) / h!`.
pub fn t_ind(h: &Graph, g: &Graph) -> Result<Rational> {
    match Pattern::of(h)? {
        Pattern::Edge => Ok(edge_density(g)),
        Pattern::Four(c) => Ok(t_ind4(c, &four_profile_fast(g))),
    }
}

pub fn t_ind4(c: Class4, profile: &FourProfile) -> Rational {
    profile.density(c) * int(c.aut()) / int(24)
}

/// `t_inj(F) = sum over H of containment(F, H) * aut(F) / aut(H) * t_ind(H)`.
pub fn t_inj4(f: Class4, profile: &FourProfile) -> Rational {
    let n = profile.n as u64;
    if n < 4 {
        return Rational::zero();
    }
    let copies: u64 = Class4::ALL
        .iter()
        .map(|&h| containment4(f, h) * profile.count(h))
        .sum();
    Rational::new(BigInt::from(copies) * BigInt::from(f.aut()), falling(n, 4))
}

/// Four-cycle copies straight from codegrees, independent of the census.
pub fn c4_copies_by_codegree(g: &Graph) -> BigInt {
    let n = g.order();
    let mut total = BigInt::zero();
    for u in 0..n {
        let mut acc = 0u128;
        for v in u + 1..n {
            let c = g.codegree(u, v) as u128;
            acc += c * c.saturating_sub(1) / 2;
        }
        total += BigInt::from(acc);
    }
    total / 2
}

/// `t_inj(C4, G)` via codegrees: `8 * #C4 / n^(4)`.
pub fn t_inj_c4(g: &Graph) -> Rational {
    let n = g.order() as u64;
    if n < 4 {
        return Rational::zero();
    }
    Rational::new(c4_copies_by_codegree(g) * 8, falling(n, 4))
}

/// Homomorphism density of an edge, `2m / n^2`.
pub fn t_hom_edge(g: &Graph) -> Rational {
    let n = g.order() as u64;
    if n == 0 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(2 * g.edge_count()), BigInt::from(n * n))
}

/// Homomorphism density of a four-cycle, `sum over ordered (u, v) of codeg^2 / n^4`.
pub fn t_hom_c4(g: &Graph) -> Rational {
    let n = g.order();
    if n == 0 {
        return Rational::zero();
    }
    let mut total = BigInt::zero();
    for u in 0..n {
        let s: u128 = (0..n).map(|v| (g.codegree(u, v) as u128).pow(2)).sum();
        total += BigInt::from(s);
    }
    Rational::new(total, BigInt::from(n as u64).pow(4))
}

/// `max(0, t_inj(K2)^4 - t_inj(C4))`.
pub fn kst_defect(g: &Graph) -> Rational {
    let x = edge_density(g);
    let d = x.clone() * &x * &x * &x - t_inj_c4(g);
    if d > Rational::zero() {
        d
    } else {
        Rational::zero()
    }
}

/// Counts of `order`-subsets by canonical class, by exhaustive enumeration.
pub fn census_by_class(g: &Graph, order: usize) -> Result<BTreeMap<SmallGraphClass, u64>> {
    if order > crate::iso::MAX_SMALL_ORDER {
        return Err(Error::TooLarge {
            operation: "subset census",
            order,
            limit: crate::iso::MAX_SMALL_ORDER,
        });
    }
    let mut cache: HashMap<u64, SmallGraphClass> = HashMap::new();
    let mut out = BTreeMap::new();
    let n = g.order();
    if order > n {
        return Ok(out);
    }
    let mut idx: Vec<usize> = (0..order).collect();
    loop {
        let mask = g.induced_mask(&idx);
        let class = *cache
            .entry(mask)
            .or_insert_with(|| SmallGraphClass::of(&Graph::from_pair_mask(order, mask)).expect("small"));
        *out.entry(class).or_insert(0) += 1;
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    Ok(out)
}

/// Advances a sorted index set to the next combination; false when exhausted.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `p(F, G)` for any class on at most 8 vertices, by enumeration (four-vertex classes use the census).
pub fn p_class(f: SmallGraphClass, g: &Graph) -> Result<Rational> {
    let k = f.order();
    if g.order() < k {
        return Ok(Rational::zero());
    }
    if let Some(c) = f.as_class4() {
        return Ok(p_induced(c, g));
    }
    let census = census_by_class(g, k)?;
    let hits = census.get(&f).copied().unwrap_or(0);
    Ok(Rational::new(BigInt::from(hits), binomial(g.order() as u64, k as u64)))
}

/// `sum over all h'-vertex classes H of p(F, H) * p(H, G)`.
pub fn p_via_intermediate(f: SmallGraphClass, g: &Graph, h_prime: usize) -> Result<Rational> {
    let n = g.order();
    if h_prime < f.order() || !(4..=7).contains(&h_prime) || h_prime > n {
        return Err(Error::InvalidArgument(format!(
            "intermediate order {h_prime} outside {}..={}",
            f.order().max(4),
            n.min(7)
        )));
    }
    let census = census_by_class(g, h_prime)?;
    let denom = binomial(n as u64, h_prime as u64);
    let mut total = Rational::zero();
    for h in enumerate_classes(h_prime)? {
        let count = census.get(&h).copied().unwrap_or(0);
        if count == 0 {
            continue;
        }
        total += p_class(f, &h.graph())? * Rational::new(BigInt::from(count), denom.clone());
    }
    Ok(total)
}

type Predicate = Arc<dyn Fn(&Graph) -> bool + Send + Sync>;

/// A family of `order`-vertex graphs, given by canonical classes or a predicate
/// on the induced subgraph (which must be isomorphism-invariant).
#[derive(Clone)]
pub enum SubgraphFamily {
    Classes { order: usize, classes: BTreeSet<SmallGraphClass> },
    Predicate { order: usize, predicate: Predicate },
}

impl fmt::Debug for SubgraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgraphFamily::Classes { order, classes } => f
                .debug_struct("Classes")
                .field("order", order)
                .field("classes", &classes.iter().map(|c| c.name()).collect::<Vec<_>>())
                .finish(),
            SubgraphFamily::Predicate { order, .. } => f.debug_struct("Predicate").field("order", order).finish(),
        }
    }
}

impl SubgraphFamily {
    pub fn classes(classes: impl IntoIterator<Item = SmallGraphClass>, order: usize) -> Result<Self> {
        let classes: BTreeSet<SmallGraphClass> = classes.into_iter().collect();
        if let Some(c) = classes.iter().find(|c| c.order() != order) {
            return Err(Error::MixedOrders(order, c.order()));
        }
        Ok(SubgraphFamily::Classes { order, classes })
    }

    pub fn four(classes: impl IntoIterator<Item = Class4>) -> Self {
        SubgraphFamily::Classes {
            order: 4,
            classes: classes.into_iter().map(|c| c.small_class()).collect(),
        }
    }

    pub fn predicate(order: usize, f: impl Fn(&Graph) -> bool + Send + Sync + 'static) -> Self {
        SubgraphFamily::Predicate {
            order,
            predicate: Arc::new(f),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            SubgraphFamily::Classes { order, .. } | SubgraphFamily::Predicate { order, .. } => *order,
        }
    }

    /// Whether the subgraph induced on `sample` belongs to the family.
    pub fn contains_induced(&self, g: &Graph, sample: &[usize]) -> bool {
        match self {
            SubgraphFamily::Classes { order: 4, classes } => {
                classes.contains(&class4_of_mask(g.induced_mask(sample)).small_class())
            }
            SubgraphFamily::Classes { classes, .. } => {
                let h = g.induced(sample);
                classes.contains(&SmallGraphClass::of(&h).expect("order at most 8"))
            }
            SubgraphFamily::Predicate { predicate, .. } => predicate(&g.induced(sample)),
        }
    }

    /// Exact `p(F, G)` for class families of order 4, from the census.
    pub fn exact_density(&self, profile: &FourProfile) -> Option<Rational> {
        match self {
            SubgraphFamily::Classes { order: 4, classes } => Some(
                classes
                    .iter()
                    .map(|c| profile.density(c.as_class4().expect("order 4")))
                    .sum(),
            ),
            _ => None,
        }
    }
}

/// Monte Carlo estimate of a probability with its binomial standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub hits: u64,
    pub trials: u64,
    pub point: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl DensityEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        let point = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let stderr = if trials == 0 {
            0.0
        } else {
            (point * (1.0 - point) / trials as f64).sqrt()
        };
        DensityEstimate {
            hits,
            trials,
            point,
            stderr,
            seed,
        }
    }

    pub fn point_exact(&self) -> Rational {
        Rational::new(BigInt::from(self.hits), BigInt::from(self.trials.max(1)))
    }
}

/// Uniform `s`-subset of `0..n` for trial `trial` of a run seeded with `seed`, sorted.
pub fn sample_vertices(n: usize, s: usize, seed: u64, trial: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(derive_seed(seed, trial));
    let mut v = sample_indices(&mut rng, n, s).into_vec();
    v.sort_unstable();
    v
}

/// Estimates `p(F, G)` from `trials` uniform vertex sets of size `s`.
pub fn sample_density(family: &SubgraphFamily, g: &Graph, trials: u64, seed: u64) -> Result<DensityEstimate> {
    let s = family.order();
    if s > g.order() {
        return Err(Error::InvalidArgument(format!(
            "sample size {s} exceeds graph order {}",
            g.order()
        )));
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| family.contains_induced(g, &sample_vertices(g.order(), s, seed, t)))
        .count() as u64;
    Ok(DensityEstimate::from_counts(hits, trials, seed))
}

/// `rho = sum over F of 2^(-binom(s,2)) * s! / aut(F)`, the expected density in `G(n, 1/2)`.
pub fn rho_expected(family: &[SmallGraphClass]) -> Result<Rational> {
    let Some(first) = family.first() else {
        return Ok(Rational::zero());
    };
    let s = first.order();
    let mut total = Rational::zero();
    let pairs = (s * s.saturating_sub(1) / 2) as u32;
    let scale = Rational::new(factorial(s as u64), BigInt::from(2u32).pow(pairs));
    for f in family {
        if f.order() != s {
            return Err(Error::MixedOrders(s, f.order()));
        }
        total += scale.clone() / int(aut_count(&f.graph())?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{blowup, complete, cycle, empty, named_graph, path, random_graph};
    use crate::iso::permutations;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn one() -> Rational {
        <Rational as num_traits::One>::one()
    }

    /// Brute-force injective (or induced) embedding count over all ordered vertex tuples.
    fn brute_t(h: &Graph, g: &Graph, induced: bool) -> Rational {
        let k = h.order();
        let n = g.order();
        let mut hits = 0u64;
        let mut tuple = vec![0usize; k];
        fn rec(h: &Graph, g: &Graph, induced: bool, tuple: &mut Vec<usize>, depth: usize, hits: &mut u64) {
            if depth == h.order() {
                let ok = (0..h.order()).all(|i| {
                    (i + 1..h.order()).all(|j| {
                        let he = h.has_edge(i, j);
                        let ge = g.has_edge(tuple[i], tuple[j]);
                        if induced {
                            he == ge
                        } else {
                            !he || ge
                        }
                    })
                });
                *hits += ok as u64;
                return;
            }
            for v in 0..g.order() {
                if tuple[..depth].contains(&v) {
                    continue;
                }
                tuple[depth] = v;
                rec(h, g, induced, tuple, depth + 1, hits);
            }
        }
        rec(h, g, induced, &mut tuple, 0, &mut hits);
        Rational::new(BigInt::from(hits), falling(n as u64, k as u64))
    }

    #[test]
    fn census_single_graphs() {
        for c in Class4::ALL {
            for mode in [CensusMode::Reference, CensusMode::Fast] {
                let p = four_profile(&c.graph(), mode);
                assert_eq!(p.count(c), 1, "{c} {mode:?}");
                assert_eq!(p.total(), 1);
            }
        }
        assert_eq!(four_profile_fast(&path(3)).counts, [0; 11]);
    }

    #[test]
    fn fast_matches_reference_on_random_graphs() {
        for n in [4usize, 5, 7, 10, 20, 33, 60, 70] {
            for seed in 0..12 {
                let g = random_graph(n, seed * 31 + n as u64);
                assert_eq!(four_profile_fast(&g), four_profile_reference(&g), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn fast_matches_reference_on_structured_graphs() {
        let mut graphs = vec![complete(9), empty(9), cycle(12), path(10)];
        graphs.push(blowup(&cycle(5), 3).unwrap().0);
        graphs.push(blowup(&random_graph(7, 2), 4).unwrap().0);
        for g in graphs {
            assert_eq!(four_profile_fast(&g), four_profile_reference(&g));
        }
    }

    #[test]
    fn densities_sum_to_one_and_are_integral() {
        let g = random_graph(23, 9);
        let p = four_profile_fast(&g);
        let total: Rational = Class4::ALL.iter().map(|&c| p.density(c)).sum();
        assert_eq!(total, one());
        assert_eq!(p.total(), binomial_u64(23, 4));
    }

    #[test]
    fn p_induced_examples() {
        assert_eq!(p_induced(Class4::P4, &path(4)), one());
        assert_eq!(p_induced(Class4::C4, &complete(4)), Rational::zero());
        assert_eq!(p_induced(Class4::K4c, &empty(6)), one());
        assert_eq!(p_induced(Class4::K4, &complete(3)), Rational::zero());
    }

    #[test]
    fn complement_symmetry() {
        for seed in 0..10 {
            let g = random_graph(25, seed);
            assert_eq!(four_profile_fast(&g.complement()), four_profile_fast(&g).complemented());
        }
    }

    #[test]
    fn t_examples() {
        let k2 = complete(2);
        assert_eq!(t_inj(&k2, &path(4)).unwrap(), ratio(1, 2));
        assert_eq!(t_ind(&cycle(4), &cycle(4)).unwrap(), ratio(1, 3));
        assert!(matches!(t_inj(&cycle(5), &path(6)), Err(Error::UnsupportedPattern(_))));
    }

    #[test]
    fn c4_supergraph_expansion() {
        for seed in 0..30 {
            let n = 5 + (seed as usize % 26);
            let g = random_graph(n, 100 + seed);
            let p = four_profile_fast(&g);
            let lhs = t_inj4(Class4::C4, &p);
            let rhs = t_ind4(Class4::C4, &p) + int(2) * t_ind4(Class4::D4, &p) + t_ind4(Class4::K4, &p);
            assert_eq!(lhs, rhs);
            assert_eq!(lhs, t_inj_c4(&g));
        }
    }

    #[test]
    fn t_ind_identity_exhaustive_small() {
        for n in 4..=6 {
            for mask in (0..1u64 << (n * (n - 1) / 2)).step_by(if n == 6 { 97 } else { 1 }) {
                let g = Graph::from_pair_mask(n, mask);
                let p = four_profile_fast(&g);
                for c in Class4::ALL {
                    assert_eq!(t_ind4(c, &p) * int(24), p.density(c) * int(c.aut()));
                }
            }
        }
    }

    #[test]
    fn t_inj_and_t_ind_match_brute_force() {
        for seed in 0..6 {
            let g = random_graph(7, seed);
            let p = four_profile_fast(&g);
            for c in Class4::ALL {
                let h = c.graph();
                assert_eq!(t_ind4(c, &p), brute_t(&h, &g, true), "t_ind {c}");
                assert_eq!(t_inj4(c, &p), brute_t(&h, &g, false), "t_inj {c}");
            }
            assert_eq!(edge_density(&g), brute_t(&complete(2), &g, false));
        }
    }

    #[test]
    fn fact_averaging_examples() {
        let g = random_graph(12, 4);
        let c4 = Class4::C4.small_class();
        assert_eq!(p_via_intermediate(c4, &g, 5).unwrap(), p_induced(Class4::C4, &g));
        assert_eq!(p_via_intermediate(c4, &g, 4).unwrap(), p_induced(Class4::C4, &g));
        let e4 = Class4::K4c.small_class();
        assert_eq!(p_via_intermediate(e4, &empty(8), 5).unwrap(), one());
        assert!(p_via_intermediate(c4, &g, 8).is_err());
        assert!(p_via_intermediate(c4, &g, 3).is_err());
    }

    #[test]
    fn fact_averaging_all_classes() {
        for (seed, h) in [(1u64, 4usize), (2, 5), (3, 6)] {
            let g = random_graph(11, seed);
            for c in Class4::ALL {
                assert_eq!(p_via_intermediate(c.small_class(), &g, h).unwrap(), p_induced(c, &g));
            }
        }
    }

    #[test]
    fn rho_examples() {
        let k2 = SmallGraphClass::of(&complete(2)).unwrap();
        let k3 = SmallGraphClass::of(&complete(3)).unwrap();
        assert_eq!(rho_expected(&[k2]).unwrap(), ratio(1, 2));
        assert_eq!(rho_expected(&[k3]).unwrap(), ratio(1, 8));
        let all: Vec<_> = Class4::ALL.iter().map(|c| c.small_class()).collect();
        assert_eq!(rho_expected(&all).unwrap(), one());
        assert!(matches!(rho_expected(&[k2, k3]), Err(Error::MixedOrders(2, 3))));
        assert_eq!(rho_expected(&[]).unwrap(), Rational::zero());
    }

    #[test]
    fn rho_all_five_vertex_classes_is_one() {
        let all = enumerate_classes(5).unwrap();
        assert_eq!(rho_expected(&all).unwrap(), one());
    }

    #[test]
    fn kst_examples() {
        assert_eq!(kst_defect(&complete(9)), Rational::zero());
        assert_eq!(kst_defect(&cycle(5)), ratio(1, 16));
        for seed in 0..10 {
            let g = random_graph(15 + seed as usize, seed);
            let x = t_hom_edge(&g);
            assert!(t_hom_c4(&g) >= x.clone() * &x * &x * &x);
        }
    }

    #[test]
    fn hom_densities_match_definition() {
        let g = named_graph("P4").unwrap();
        assert_eq!(t_hom_edge(&g), ratio(6, 16));
        // ordered pairs: codeg(u,u)=deg(u): 1,2,2,1 -> squares 10; off-diagonal common neighbours: (0,2),(1,3) -> 4
        assert_eq!(t_hom_c4(&g), ratio(14, 256));
    }

    #[test]
    fn sampling_examples() {
        let g = random_graph(30, 1);
        let all = SubgraphFamily::four(Class4::ALL);
        let e = sample_density(&all, &g, 2000, 5).unwrap();
        assert_eq!((e.point, e.stderr), (1.0, 0.0));
        let none = SubgraphFamily::four([]);
        assert_eq!(sample_density(&none, &g, 2000, 5).unwrap().point, 0.0);
        let edge = SubgraphFamily::classes([SmallGraphClass::of(&complete(2)).unwrap()], 2).unwrap();
        let est = sample_density(&edge, &g, 20000, 9).unwrap();
        let exact = crate::rational::to_f64(&edge_density(&g));
        assert!((est.point - exact).abs() <= 3.0 * est.stderr, "{est:?} vs {exact}");
        assert!(sample_density(&all, &path(3), 10, 1).is_err());
        assert_eq!(sample_density(&edge, &g, 500, 77).unwrap(), sample_density(&edge, &g, 500, 77).unwrap());
    }

    #[test]
    fn sampling_converges_repeatedly() {
        let g = random_graph(20, 8);
        let fam = SubgraphFamily::four([Class4::P4, Class4::C4, Class4::K13c]);
        let exact = crate::rational::to_f64(&fam.exact_density(&four_profile_fast(&g)).unwrap());
        let ok = (0..100)
            .filter(|&r| {
                let e = sample_density(&fam, &g, 4000, 1000 + r).unwrap();
                (e.point - exact).abs() <= 4.0 * e.stderr
            })
            .count();
        assert!(ok >= 99, "{ok}");
    }

    #[test]
    fn predicate_family_agrees_with_classes() {
        let g = random_graph(18, 3);
        let by_pred = SubgraphFamily::predicate(4, |h| h.edge_count() == 3);
        let by_class = SubgraphFamily::four([Class4::K13, Class4::K13c, Class4::P4]);
        assert_eq!(
            sample_density(&by_pred, &g, 3000, 1).unwrap(),
            sample_density(&by_class, &g, 3000, 1).unwrap()
        );
    }

    #[test]
    fn census_by_class_sums() {
        let g = random_graph(10, 6);
        let c = census_by_class(&g, 5).unwrap();
        assert_eq!(c.values().sum::<u64>(), 252);
        let c4 = census_by_class(&g, 4).unwrap();
        let prof = four_profile_fast(&g);
        for cl in Class4::ALL {
            assert_eq!(c4.get(&cl.small_class()).copied().unwrap_or(0), prof.count(cl));
        }
    }

    #[test]
    fn relabeling_preserves_profile() {
        let g = random_graph(8, 12);
        let base = four_profile_fast(&g);
        for p in permutations(8).into_iter().step_by(997) {
            assert_eq!(four_profile_fast(&g.permute(&p)), base);
        }
    }

    proptest! {
        #[test]
        fn prop_fast_census_matches_reference(n in 0usize..26, seed in any::<u64>()) {
            let g = random_graph(n, seed);
            prop_assert_eq!(four_profile_fast(&g), four_profile_reference(&g));
        }

        #[test]
        fn prop_complement_profile(n in 4usize..30, seed in any::<u64>()) {
            let g = random_graph(n, seed);
            prop_assert_eq!(four_profile_fast(&g.complement()), four_profile_fast(&g).complemented());
        }
    }
}
