//! Isomorphism machinery for graphs on at most 8 vertices.
//!
//! A class is identified by the lexicographically largest pair-bit string
//! over all relabelings that list vertices by non-increasing degree. Pairs
//! are read in colex order, so a partial labeling of the first `k` vertices
//! fixes a prefix of the string and the search can prune on it.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{named_graph, Graph};

pub const MAX_SMALL_ORDER: usize = 8;

/// Canonical identifier of an isomorphism class of graphs on at most 8 vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SmallGraphClass {
    pub order: u8,
    /// Canonical pair mask (colex pair order).
    pub code: u32,
}

impl SmallGraphClass {
    pub fn of(g: &Graph) -> Result<Self> {
        if g.order() > MAX_SMALL_ORDER {
            return Err(Error::TooLarge {
                operation: "canonical labeling",
                order: g.order(),
                limit: MAX_SMALL_ORDER,
            });
        }
        let perm = canonical_labeling(g);
        let canon = g.permute(&perm);
        Ok(SmallGraphClass {
            order: g.order() as u8,
            code: canon.pair_mask() as u32,
        })
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// The canonical representative.
    pub fn graph(&self) -> Graph {
        Graph::from_pair_mask(self.order(), self.code as u64)
    }

    pub fn complement(&self) -> Self {
        SmallGraphClass::of(&self.graph().complement()).expect("same order")
    }

    pub fn as_class4(&self) -> Option<Class4> {
        Class4::ALL.into_iter().find(|c| c.small_class() == *self)
    }

    /// Resolves a four-vertex table name, any [`named_graph`] name, or
    /// `code:<order>:<mask>`.
    pub fn parse(name: &str) -> Result<Self> {
        if let Some(rest) = name.strip_prefix("code:") {
            let (o, m) = rest.split_once(':').ok_or_else(|| Error::UnknownClass(name.into()))?;
            let order: usize = o.parse().map_err(|_| Error::UnknownClass(name.into()))?;
            let mask: u64 = m.parse().map_err(|_| Error::UnknownClass(name.into()))?;
            if order > MAX_SMALL_ORDER || mask >> (order * order.saturating_sub(1) / 2) != 0 {
                return Err(Error::UnknownClass(name.into()));
            }
            return SmallGraphClass::of(&Graph::from_pair_mask(order, mask));
        }
        let g = named_graph(name).map_err(|_| Error::UnknownClass(name.into()))?;
        SmallGraphClass::of(&g)
    }

    /// Table name for four-vertex classes, `code:<order>:<mask>` otherwise.
    pub fn name(&self) -> String {
        match self.as_class4() {
            Some(c) => c.name().to_string(),
            None => format!("code:{}:{}", self.order, self.code),
        }
    }
}

impl fmt::Display for SmallGraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Permutation `perm` (old vertex -> new label) realising the canonical form.
pub fn canonical_labeling(g: &Graph) -> Vec<usize> {
    let n = g.order();
    assert!(n <= MAX_SMALL_ORDER);
    let deg = g.degrees();
    let mut sorted = deg.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));

    struct Search<'a> {
        g: &'a Graph,
        deg: &'a [u64],
        sorted: &'a [u64],
        n: usize,
        order: Vec<usize>,
        used: u32,
        best: Option<(u64, Vec<usize>)>,
    }

    impl Search<'_> {
        // `prefix` holds the bits of pairs among the first `k` labels, first pair most significant.
        fn go(&mut self, k: usize, prefix: u64) {
            if k == self.n {
                if self.best.as_ref().is_none_or(|(b, _)| prefix > *b) {
                    self.best = Some((prefix, self.order.clone()));
                }
                return;
            }
            for v in 0..self.n {
                if self.used >> v & 1 == 1 || self.deg[v] != self.sorted[k] {
                    continue;
                }
                let mut p = prefix;
                for i in 0..k {
                    p = p << 1 | self.g.has_edge(self.order[i], v) as u64;
                }
                if let Some((best, _)) = &self.best {
                    let total = self.n * (self.n - 1) / 2;
                    let done = (k + 1) * k / 2;
                    if p < best >> (total - done) {
                        continue;
                    }
                }
                self.order.push(v);
                self.used |= 1 << v;
                self.go(k + 1, p);
                self.used &= !(1 << v);
                self.order.pop();
            }
        }
    }

    let mut s = Search {
        g,
        deg: &deg,
        sorted: &sorted,
        n,
        order: Vec::with_capacity(n),
        used: 0,
        best: None,
    };
    s.go(0, 0);
    let order = s.best.map(|b| b.1).unwrap_or_default();
    let mut perm = vec![0; n];
    for (label, &v) in order.iter().enumerate() {
        perm[v] = label;
    }
    perm
}

/// Number of automorphisms, by exhaustive search over permutations with
/// partial-consistency pruning.
pub fn aut_count(h: &Graph) -> Result<u64> {
    let n = h.order();
    if n > MAX_SMALL_ORDER {
        return Err(Error::TooLarge {
            operation: "automorphism count",
            order: n,
            limit: MAX_SMALL_ORDER,
        });
    }
    fn go(h: &Graph, image: &mut Vec<usize>, used: u32) -> u64 {
        let k = image.len();
        if k == h.order() {
            return 1;
        }
        let mut total = 0;
        for v in 0..h.order() {
            if used >> v & 1 == 1 {
                continue;
            }
            if (0..k).all(|i| h.has_edge(i, k) == h.has_edge(image[i], v)) {
                image.push(v);
                total += go(h, image, used | 1 << v);
                image.pop();
            }
        }
        total
    }
    Ok(go(h, &mut Vec::with_capacity(n), 0))
}

/// The eleven isomorphism classes of four-vertex graphs in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class4 {
    K4,
    K4c,
    D4,
    D4c,
    P3,
    P3c,
    C4,
    C4c,
    K13,
    K13c,
    P4,
}

impl Class4 {
    pub const ALL: [Class4; 11] = [
        Class4::K4,
        Class4::K4c,
        Class4::D4,
        Class4::D4c,
        Class4::P3,
        Class4::P3c,
        Class4::C4,
        Class4::C4c,
        Class4::K13,
        Class4::K13c,
        Class4::P4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class4::K4 => "K4",
            Class4::K4c => "K4c",
            Class4::D4 => "D4",
            Class4::D4c => "D4c",
            Class4::P3 => "P3",
            Class4::P3c => "P3c",
            Class4::C4 => "C4",
            Class4::C4c => "C4c",
            Class4::K13 => "K13",
            Class4::K13c => "K13c",
            Class4::P4 => "P4",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownClass(name.into()))
    }

    /// Table partner under complementation. `P4` is self-complementary.
    pub fn complement(self) -> Self {
        use Class4::*;
        match self {
            K4 => K4c,
            K4c => K4,
            D4 => D4c,
            D4c => D4,
            P3 => P3c,
            P3c => P3,
            C4 => C4c,
            C4c => C4,
            K13 => K13c,
            K13c => K13,
            P4 => P4,
        }
    }

    pub fn graph(self) -> Graph {
        named_graph(self.name()).expect("table names are valid")
    }

    pub fn small_class(self) -> SmallGraphClass {
        tables().classes[self.index()]
    }

    pub fn edge_count(self) -> u32 {
        self.small_class().code.count_ones()
    }

    pub fn aut(self) -> u64 {
        tables().aut[self.index()]
    }
}

impl fmt::Display for Class4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

struct Tables {
    classes: [SmallGraphClass; 11],
    aut: [u64; 11],
    by_mask: [Class4; 64],
    /// `containment[f][h]`: labeled spanning subgraphs of a fixed copy of `h` isomorphic to `f`.
    containment: [[u64; 11]; 11],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let reps: Vec<Graph> = Class4::ALL.iter().map(|c| c.graph()).collect();
        let classes: [SmallGraphClass; 11] =
            std::array::from_fn(|i| SmallGraphClass::of(&reps[i]).expect("order 4"));
        let aut = std::array::from_fn(|i| aut_count(&reps[i]).expect("order 4"));
        let perms = permutations(4);
        let by_mask = std::array::from_fn(|mask| {
            let g = Graph::from_pair_mask(4, mask as u64);
            // brute-force isomorphism against each representative
            let hit = reps
                .iter()
                .position(|r| perms.iter().any(|p| g.permute(p) == *r))
                .expect("every 4-vertex graph is in the table");
            Class4::ALL[hit]
        });
        let mut containment = [[0u64; 11]; 11];
        for (hi, h) in reps.iter().enumerate() {
            let hm = h.pair_mask();
            let mut sub = hm;
            loop {
                let c: Class4 = by_mask[sub as usize];
                containment[c.index()][hi] += 1;
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & hm;
            }
        }
        Tables {
            classes,
            aut,
            by_mask,
            containment,
        }
    })
}

/// Class of a labeled four-vertex graph given by its 6-bit pair mask.
#[inline]
pub fn class4_of_mask(mask: u64) -> Class4 {
    tables().by_mask[mask as usize & 63]
}

pub fn classify4(h: &Graph) -> Result<Class4> {
    if h.order() != 4 {
        return Err(Error::WrongOrder {
            expected: 4,
            actual: h.order(),
        });
    }
    Ok(class4_of_mask(h.pair_mask()))
}

/// Number of spanning subgraphs of a labeled copy of `h` that are isomorphic to `f`.
pub fn containment4(f: Class4, h: Class4) -> u64 {
    tables().containment[f.index()][h.index()]
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All isomorphism classes on `order` vertices, grown one vertex at a time
/// from the classes one size smaller. Sorted by canonical code.
pub fn enumerate_classes(order: usize) -> Result<Vec<SmallGraphClass>> {
    if order > 7 {
        return Err(Error::TooLarge {
            operation: "class enumeration",
            order,
            limit: 7,
        });
    }
    let mut level: BTreeSet<SmallGraphClass> = BTreeSet::new();
    level.insert(SmallGraphClass::of(&Graph::new(0))?);
    for n in 1..=order {
        let mut next = BTreeSet::new();
        for class in &level {
            let base = class.graph();
            for nbrs in 0..1u32 << (n - 1) {
                let mut g = Graph::new(n);
                for (u, v) in base.edges() {
                    g.add_edge(u, v);
                }
                for u in 0..n - 1 {
                    if nbrs >> u & 1 == 1 {
                        g.add_edge(u, n - 1);
                    }
                }
                next.insert(SmallGraphClass::of(&g)?);
            }
        }
        level = next;
    }
    Ok(level.into_iter().collect())
}
