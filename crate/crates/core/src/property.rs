//! Properties of the form `sum over H of w_H * p(H, G) <= b`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{census_by_class, edge_density, four_profile_fast, next_combination, t_inj_c4, FourProfile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso::{Class4, SmallGraphClass};
use crate::rational::{binomial, int, lcm_of_denominators, parse_rational, ratio, to_fraction_string, Rational};

/// Name under which the edge/four-cycle instance is registered.
pub const BUILTIN_NAME: &str = "thm1.4";

/// A tuple `(h, w, b)`; weights of classes absent from `weights` are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDensityProperty {
    pub h: usize,
    pub weights: BTreeMap<SmallGraphClass, Rational>,
    pub b: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyFile {
    h: usize,
    weights: BTreeMap<String, String>,
    b: String,
}

impl WeightedDensityProperty {
    pub fn new(h: usize, weights: BTreeMap<SmallGraphClass, Rational>, b: Rational) -> Result<Self> {
        if !(2..=7).contains(&h) {
            return Err(Error::InvalidArgument(format!("pattern order {h} outside 2..=7")));
        }
        for (class, w) in &weights {
            if class.order() != h {
                return Err(Error::MixedOrders(h, class.order()));
            }
            if w.is_negative() {
                return Err(Error::InvalidArgument(format!("negative weight for {class}")));
            }
        }
        Ok(WeightedDensityProperty { h, weights, b })
    }

    /// The four-vertex instance whose members are exactly the graphs with
    /// `2 t_inj(C4) - t_inj(K2) + 3/8 <= 0`.
    pub fn quasirandomness_property() -> Self {
        use Class4::*;
        let table = [
            (K4, ratio(1, 1)),
            (K4c, ratio(1, 2)),
            (D4, ratio(5, 12)),
            (D4c, ratio(5, 12)),
            (P3, ratio(1, 3)),
            (P3c, ratio(1, 6)),
            (C4, ratio(1, 2)),
            (C4c, ratio(1, 3)),
            (K13, ratio(1, 4)),
            (K13c, ratio(1, 4)),
            (P4, ratio(1, 4)),
        ];
        WeightedDensityProperty {
            h: 4,
            weights: table.into_iter().map(|(c, w)| (c.small_class(), w)).collect(),
            b: ratio(5, 16),
        }
    }

    /// `thm1.4` or a JSON property document.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if spec.trim() == BUILTIN_NAME {
            return Ok(Self::quasirandomness_property());
        }
        Self::from_json(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PropertyFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("property file: {e}")))?;
        let mut weights = BTreeMap::new();
        for (name, w) in &file.weights {
            let class = SmallGraphClass::parse(name)?;
            if weights.insert(class, parse_rational(w)?).is_some() {
                return Err(Error::InvalidArgument(format!("class {name} listed twice")));
            }
        }
        Self::new(file.h, weights, parse_rational(&file.b)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "h": self.h,
            "weights": self.weights.iter().map(|(c, w)| (c.name(), to_fraction_string(w))).collect::<BTreeMap<_, _>>(),
            "b": to_fraction_string(&self.b),
        })
    }

    pub fn weight(&self, class: &SmallGraphClass) -> Rational {
        self.weights.get(class).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn weight4(&self, class: Class4) -> Rational {
        self.weight(&class.small_class())
    }

    pub fn max_weight(&self) -> Rational {
        self.weights.values().cloned().max().unwrap_or_else(Rational::zero)
    }

    /// `z` evaluated from a precomputed four-vertex profile (requires `h == 4`).
    pub fn z_from_profile(&self, profile: &FourProfile) -> Rational {
        assert_eq!(self.h, 4);
        if profile.n < 4 {
            return Rational::zero();
        }
        Class4::ALL
            .iter()
            .map(|&c| self.weight4(c) * profile.density(c))
            .sum()
    }

    pub fn z_value(&self, g: &Graph) -> Rational {
        let n = g.order();
        if n < self.h {
            return Rational::zero();
        }
        if self.h == 4 {
            return self.z_from_profile(&four_profile_fast(g));
        }
        let census = census_by_class(g, self.h).expect("h <= 7");
        let total: Rational = census
            .iter()
            .map(|(c, &k)| self.weight(c) * int(k))
            .sum();
        total / Rational::from_integer(binomial(n as u64, self.h as u64))
    }

    /// Ties `z == b` are members.
    pub fn is_member(&self, g: &Graph) -> bool {
        self.z_value(g) <= self.b
    }

    /// Scales weights and threshold by the lcm of their denominators.
    pub fn integerize(&self) -> IntegerizedProperty {
        let scale = lcm_of_denominators(self.weights.values().chain(std::iter::once(&self.b)));
        let s = Rational::from_integer(scale.clone());
        let w_int = self
            .weights
            .iter()
            .map(|(c, w)| (*c, (w * &s).to_integer()))
            .collect();
        IntegerizedProperty {
            scale,
            w_int,
            b_int: (&self.b * &s).to_integer(),
        }
    }

    /// `z(G) - b` for a non-member, with the lattice bound `1 / (scale * binom(n, h))`.
    pub fn nonmember_gap(&self, g: &Graph) -> Result<NonmemberGap> {
        let z = self.z_value(g);
        if z <= self.b {
            return Err(Error::IsMember);
        }
        let scale = self.integerize().scale;
        let bound = Rational::new(
            BigInt::one(),
            scale * binomial(g.order() as u64, self.h as u64),
        );
        let gap = z - &self.b;
        Ok(NonmemberGap {
            holds: gap >= bound,
            gap,
            bound,
        })
    }

    /// Minimum number of unordered pairs to toggle to reach a member on the same vertex set.
    pub fn distance_to_property(&self, g: &Graph) -> Result<Distance> {
        let n = g.order();
        if n > 6 {
            return Err(Error::TooLarge {
                operation: "exact distance",
                order: n,
                limit: 6,
            });
        }
        let pairs = n * n.saturating_sub(1) / 2;
        let own = g.pair_mask();
        let best = (0..1u64 << pairs)
            .into_par_iter()
            .filter(|&mask| self.is_member(&Graph::from_pair_mask(n, mask)))
            .map(|mask| ((mask ^ own).count_ones() as u64, mask))
            .min()
            .ok_or_else(|| Error::InvalidArgument(format!("no member on {n} vertices")))?;
        Ok(Distance {
            n,
            pairs: best.0,
            nearest: Graph::from_pair_mask(n, best.1),
        })
    }

    /// Same property with weights (and `b`) divided by the largest weight when it exceeds 1.
    pub fn normalized(&self) -> Self {
        let max = self.max_weight();
        if max <= Rational::one() {
            return self.clone();
        }
        WeightedDensityProperty {
            h: self.h,
            weights: self.weights.iter().map(|(c, w)| (*c, w / &max)).collect(),
            b: &self.b / &max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerizedProperty {
    pub scale: BigInt,
    pub w_int: BTreeMap<SmallGraphClass, BigInt>,
    pub b_int: BigInt,
}

impl IntegerizedProperty {
    /// `scale * z(G)`.
    pub fn z_int(&self, property: &WeightedDensityProperty, g: &Graph) -> Rational {
        property.z_value(g) * Rational::from_integer(self.scale.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonmemberGap {
    pub gap: Rational,
    pub bound: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distance {
    pub n: usize,
    /// Unordered pairs changed.
    pub pairs: u64,
    pub nearest: Graph,
}

impl Distance {
    /// ε-far iff at least `ε n² / 2` unordered pairs must change
    /// (equivalently `ε n²` adjacency-matrix entries).
    pub fn is_far(&self, eps: &Rational) -> bool {
        int(2 * self.pairs) >= eps * int((self.n * self.n) as u64)
    }

    pub fn matrix_entries(&self) -> u64 {
        2 * self.pairs
    }
}

/// `phi(G) = 2 t_inj(C4, G) - t_inj(K2, G) + 3/8`, with `t_inj(C4)` taken from codegrees.
pub fn phi_value(g: &Graph) -> Result<Rational> {
    if g.order() < 2 {
        return Err(Error::InvalidArgument("phi needs at least 2 vertices".into()));
    }
    Ok(int(2) * t_inj_c4(g) - edge_density(g) + ratio(3, 8))
}

/// `(z(G), mean of z(G[U]) over all u-subsets U)`.
pub fn z_average_check(p: &WeightedDensityProperty, g: &Graph, u: usize) -> Result<(Rational, Rational)> {
    let n = g.order();
    if n > 14 {
        return Err(Error::TooLarge {
            operation: "subset averaging",
            order: n,
            limit: 14,
        });
    }
    if u < p.h || u > n {
        return Err(Error::InvalidArgument(format!("subset size {u} outside {}..={n}", p.h)));
    }
    let mut idx: Vec<usize> = (0..u).collect();
    let mut total = Rational::zero();
    let mut count = 0u64;
    loop {
        total += p.z_value(&g.induced(&idx));
        count += 1;
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    Ok((p.z_value(g), total / int(count)))
}

type Margin = Arc<dyn Fn(&Rational) -> Rational + Send + Sync>;

/// A proximity-oblivious tester: sample `h` vertices, reject with the
/// probability attached to the induced class.
#[derive(Clone)]
pub struct PotSpec {
    pub h: usize,
    pub reject_prob: BTreeMap<SmallGraphClass, Rational>,
    /// Members are accepted with probability at least `c`.
    pub c: Rational,
    /// Detection margin `f(ε)`; inputs ε-far are accepted with probability at most `c - f(ε)`.
    pub margin: Option<Margin>,
}

impl fmt::Debug for PotSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotSpec")
            .field("h", &self.h)
            .field("reject_prob", &self.reject_prob)
            .field("c", &self.c)
            .field("margin", &self.margin.as_ref().map(|_| "fn"))
            .finish()
    }
}

impl PotSpec {
    pub fn new(h: usize, reject_prob: BTreeMap<SmallGraphClass, Rational>, c: Rational) -> Result<Self> {
        for (class, p) in &reject_prob {
            if p.is_negative() || *p > Rational::one() {
                return Err(Error::InvalidArgument(format!("rejection probability for {class} outside [0,1]")));
            }
            if class.order() != h {
                return Err(Error::MixedOrders(h, class.order()));
            }
        }
        if c <= Rational::zero() || c > Rational::one() {
            return Err(Error::InvalidArgument("c must lie in (0, 1]".into()));
        }
        Ok(PotSpec {
            h,
            reject_prob,
            c,
            margin: None,
        })
    }

    pub fn with_margin(mut self, f: impl Fn(&Rational) -> Rational + Send + Sync + 'static) -> Self {
        self.margin = Some(Arc::new(f));
        self
    }

    pub fn reject_probability_of(&self, class: &SmallGraphClass) -> Rational {
        self.reject_prob.get(class).cloned().unwrap_or_else(Rational::zero)
    }

    /// Exact probability that one invocation rejects `g`.
    pub fn rejection_probability(&self, g: &Graph) -> Rational {
        let n = g.order();
        if n < self.h {
            return Rational::zero();
        }
        if self.h == 4 {
            let prof = four_profile_fast(g);
            return Class4::ALL
                .iter()
                .map(|&c| self.reject_probability_of(&c.small_class()) * prof.density(c))
                .sum();
        }
        let census = census_by_class(g, self.h).expect("h <= 8");
        let total: Rational = census
            .iter()
            .map(|(c, &k)| self.reject_probability_of(c) * int(k))
            .sum();
        total / Rational::from_integer(binomial(n as u64, self.h as u64))
    }
}

/// The tester that rejects with probability `w_H` on sampled class `H`, with `c = 1 - b`.
///
/// With `normalize`, weights above 1 are scaled down (together with `b`);
/// without it such weights are an error.
pub fn pot_from_property(p: &WeightedDensityProperty, normalize: bool) -> Result<PotSpec> {
    let q = if p.max_weight() > Rational::one() {
        if !normalize {
            return Err(Error::InvalidArgument("weight exceeds 1 and normalization is disabled".into()));
        }
        p.normalized()
    } else {
        p.clone()
    };
    PotSpec::new(q.h, q.weights.clone(), Rational::one() - &q.b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, empty, named_graph, path, random_graph};
    use crate::iso::enumerate_classes;

    fn pi() -> WeightedDensityProperty {
        WeightedDensityProperty::quasirandomness_property()
    }

    #[test]
    fn z_examples() {
        assert_eq!(pi().z_value(&cycle(4)), ratio(1, 2));
        assert_eq!(pi().z_value(&path(4)), ratio(1, 4));
        assert_eq!(pi().z_value(&empty(4)), ratio(1, 2));
        assert_eq!(pi().z_value(&path(3)), Rational::zero());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_value(&empty(7)).unwrap(), ratio(3, 8));
        assert_eq!(phi_value(&complete(9)).unwrap(), ratio(11, 8));
        assert_eq!(phi_value(&path(4)).unwrap(), ratio(-1, 8));
        assert!(phi_value(&Graph::new(1)).is_err());
    }

    #[test]
    fn phi_equals_twice_z_minus_five_eighths() {
        for n in 4..=6 {
            for class in enumerate_classes(n).unwrap() {
                let g = class.graph();
                assert_eq!(phi_value(&g).unwrap(), int(2) * pi().z_value(&g) - ratio(5, 8));
            }
        }
        for seed in 0..40 {
            let g = random_graph(4 + seed as usize, seed);
            let phi = phi_value(&g).unwrap();
            assert_eq!(phi, int(2) * pi().z_value(&g) - ratio(5, 8));
            assert_eq!(pi().is_member(&g), phi <= Rational::zero());
        }
    }

    #[test]
    fn membership_on_four_vertices() {
        assert!(pi().is_member(&path(4)));
        assert!(!pi().is_member(&cycle(4)));
        let members: Vec<u64> = (0..64).filter(|&m| pi().is_member(&Graph::from_pair_mask(4, m))).collect();
        assert_eq!(members.len(), 32);
        for m in 0..64u64 {
            let g = Graph::from_pair_mask(4, m);
            let expected = match m.count_ones() {
                3 => true,
                4 => crate::iso::classify4(&g).unwrap() != Class4::C4,
                _ => false,
            };
            assert_eq!(pi().is_member(&g), expected, "mask {m}");
        }
    }

    #[test]
    fn small_graphs_are_vacuous_members() {
        for n in 0..4 {
            assert!(pi().is_member(&complete(n)));
        }
    }

    #[test]
    fn integerize_examples() {
        let ip = pi().integerize();
        assert_eq!(ip.scale, BigInt::from(48));
        assert_eq!(ip.b_int, BigInt::from(15));
        assert_eq!(ip.w_int[&Class4::D4.small_class()], BigInt::from(20));
        assert_eq!(ip.z_int(&pi(), &cycle(4)), int(24));
        let mut w = BTreeMap::new();
        w.insert(Class4::K4.small_class(), int(2));
        let whole = WeightedDensityProperty::new(4, w, int(1)).unwrap();
        assert_eq!(whole.integerize().scale, BigInt::from(1));
    }

    #[test]
    fn gap_examples() {
        let gap = pi().nonmember_gap(&cycle(4)).unwrap();
        assert_eq!(gap.gap, ratio(3, 16));
        assert_eq!(gap.bound, ratio(1, 48));
        assert!(gap.holds);
        assert_eq!(pi().nonmember_gap(&complete(4)).unwrap().gap, ratio(11, 16));
        assert_eq!(pi().nonmember_gap(&path(4)), Err(Error::IsMember));
    }

    #[test]
    fn gap_holds_exhaustively_to_six() {
        for n in 4..=6 {
            for class in enumerate_classes(n).unwrap() {
                if let Ok(gap) = pi().nonmember_gap(&class.graph()) {
                    assert!(gap.holds, "{class}");
                }
            }
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(pi().distance_to_property(&path(4)).unwrap().pairs, 0);
        assert_eq!(pi().distance_to_property(&cycle(4)).unwrap().pairs, 1);
        let k4 = pi().distance_to_property(&complete(4)).unwrap();
        assert_eq!(k4.pairs, 2);
        assert!(pi().is_member(&k4.nearest));
        assert!(pi().distance_to_property(&complete(7)).is_err());
    }

    #[test]
    fn distance_zero_iff_member() {
        for n in 4..=5 {
            for class in enumerate_classes(n).unwrap() {
                let g = class.graph();
                let d = pi().distance_to_property(&g).unwrap();
                assert_eq!(d.pairs == 0, pi().is_member(&g));
            }
        }
    }

    #[test]
    fn farness_conventions_agree() {
        let d = pi().distance_to_property(&complete(4)).unwrap();
        assert_eq!(d.matrix_entries(), 4);
        assert!(d.is_far(&ratio(1, 4)));
        assert!(!d.is_far(&ratio(1, 3)));
    }

    #[test]
    fn pot_examples() {
        let pot = pot_from_property(&pi(), false).unwrap();
        assert_eq!(pot.c, ratio(11, 16));
        assert_eq!(pot.rejection_probability(&complete(4)), int(1));
        assert_eq!(pot.rejection_probability(&path(4)), ratio(1, 4));
        let g = random_graph(17, 3);
        assert_eq!(pot.rejection_probability(&g), pi().z_value(&g));
    }

    #[test]
    fn pot_normalization() {
        let mut w = BTreeMap::new();
        w.insert(Class4::K4.small_class(), int(4));
        w.insert(Class4::P4.small_class(), int(2));
        let p = WeightedDensityProperty::new(4, w, int(1)).unwrap();
        assert!(pot_from_property(&p, false).is_err());
        let pot = pot_from_property(&p, true).unwrap();
        assert_eq!(pot.c, ratio(3, 4));
        let g = random_graph(12, 1);
        assert_eq!(pot.rejection_probability(&g), p.z_value(&g) / int(4));
    }

    #[test]
    fn z_average_examples() {
        let g = random_graph(10, 2);
        let (z, avg) = z_average_check(&pi(), &g, 5).unwrap();
        assert_eq!(z, avg);
        let (z, avg) = z_average_check(&pi(), &g, 10).unwrap();
        assert_eq!(z, avg);
        let (z, avg) = z_average_check(&pi(), &complete(10), 4).unwrap();
        assert_eq!((z.clone(), avg), (int(1), int(1)));
        assert!(z_average_check(&pi(), &random_graph(15, 1), 5).is_err());
        assert!(z_average_check(&pi(), &g, 3).is_err());
    }

    #[test]
    fn json_roundtrip_and_builtin() {
        let text = pi().to_json().to_string();
        assert_eq!(WeightedDensityProperty::from_json(&text).unwrap(), pi());
        assert_eq!(WeightedDensityProperty::from_spec("thm1.4").unwrap(), pi());
        let doc = r#"{"h": 4, "weights": {"C4": "1/2", "K4": "1"}, "b": "1/3"}"#;
        let p = WeightedDensityProperty::from_json(doc).unwrap();
        assert_eq!(p.weight4(Class4::C4), ratio(1, 2));
        assert_eq!(p.weight4(Class4::P4), Rational::zero());
        assert!(WeightedDensityProperty::from_json(r#"{"h": 4, "weights": {}, "b": "1", "x": 1}"#).is_err());
        assert!(WeightedDensityProperty::from_json(r#"{"h": 4, "weights": {"Kn(5)": "1"}, "b": "1"}"#).is_err());
    }

    #[test]
    fn general_order_property() {
        // induced-K5-free as a five-vertex property
        let mut w = BTreeMap::new();
        w.insert(SmallGraphClass::of(&complete(5)).unwrap(), int(1));
        let p = WeightedDensityProperty::new(5, w, int(0)).unwrap();
        assert!(p.is_member(&cycle(9)));
        assert!(!p.is_member(&complete(6)));
        let g = random_graph(9, 4);
        let (z, avg) = z_average_check(&p, &g, 7).unwrap();
        assert_eq!(z, avg);
        assert_eq!(named_graph("K4").unwrap().order(), 4);
    }
}
