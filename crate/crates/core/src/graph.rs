//! Undirected simple graphs stored as packed adjacency bit rows.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

const WORD: usize = 64;

/// An undirected simple graph on vertices `0..n`.
///
/// Row `u` holds one bit per vertex; bit `v` is set iff `{u, v}` is an edge.
/// Rows are padded to whole `u64` words and padding bits are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// The empty graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Builds a graph on `n <= 11` vertices from a mask over pairs in colex
    /// order: bit `j(j-1)/2 + i` is the pair `(i, j)` with `i < j`.
    pub fn from_pair_mask(n: usize, mask: u64) -> Self {
        let mut g = Graph::new(n);
        for j in 1..n {
            for i in 0..j {
                if mask >> pair_index(i, j) & 1 == 1 {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Inverse of [`Graph::from_pair_mask`].
    pub fn pair_mask(&self) -> u64 {
        assert!(self.n <= 11, "pair mask needs n <= 11");
        let mut mask = 0u64;
        for j in 1..self.n {
            for i in 0..j {
                if self.has_edge(i, j) {
                    mask |= 1 << pair_index(i, j);
                }
            }
        }
        mask
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n, "bad edge ({u}, {v})");
        self.set(u, v, true);
        self.set(v, u, true);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.set(u, v, false);
        self.set(v, u, false);
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        if self.has_edge(u, v) {
            self.remove_edge(u, v);
        } else {
            self.add_edge(u, v);
        }
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize, on: bool) {
        let w = &mut self.bits[u * self.words + v / WORD];
        if on {
            *w |= 1 << (v % WORD);
        } else {
            *w &= !(1 << (v % WORD));
        }
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.row(u).iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn degrees(&self) -> Vec<u64> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    /// Number of common neighbours of `u` and `v` (the degree of `u` when `u == v`).
    #[inline]
    pub fn codegree(&self, u: usize, v: usize) -> u64 {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum::<u64>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(wi, &w)| BitIter(w).map(move |b| wi * WORD + b))
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::new(self.n);
        for u in 0..self.n {
            for v in 0..self.n {
                if u != v && !self.has_edge(u, v) {
                    g.set(u, v, true);
                }
            }
        }
        g
    }

    /// The subgraph induced by `vertices`, relabelled `0..k` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::new(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Pair mask of the induced subgraph on at most 11 vertices, without
    /// materialising a [`Graph`].
    #[inline]
    pub fn induced_mask(&self, vertices: &[usize]) -> u64 {
        let mut mask = 0u64;
        for j in 1..vertices.len() {
            for i in 0..j {
                if self.has_edge(vertices[i], vertices[j]) {
                    mask |= 1 << pair_index(i, j);
                }
            }
        }
        mask
    }

    /// Relabels so that old vertex `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        Graph::from_edges(self.n, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Edge-list serialization: header `n m`, then `u v` per edge sorted lexicographically.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edge_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn to_adjacency_matrix(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for u in 0..self.n {
            for v in 0..self.n {
                out.push(if self.has_edge(u, v) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Checks the representation invariants: symmetric rows, empty diagonal, clean padding.
    pub fn is_well_formed(&self) -> bool {
        for u in 0..self.n {
            if self.has_edge(u, u) {
                return false;
            }
            for v in 0..self.n {
                if self.has_edge(u, v) != self.has_edge(v, u) {
                    return false;
                }
            }
            let used = self.n - (self.words - 1) * WORD;
            if used < WORD && self.row(u)[self.words - 1] >> used != 0 {
                return false;
            }
        }
        true
    }
}

/// Index of pair `(i, j)`, `i < j`, in colex order.
#[inline]
pub const fn pair_index(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Parses either the edge-list or the adjacency-matrix format.
///
/// The edge-list format starts with `n m` and lists `m` pairs `u v` with
/// `0 <= u < v < n`. The adjacency-matrix format starts with a lone `n`
/// followed by `n` rows of `n` characters in `{0,1}`. Blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let num = |s: &str, what: &str, line: usize| -> Result<usize> {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("{what} `{s}` is not a nonnegative integer"),
        })
    };
    match fields.as_slice() {
        [n] => {
            let n = num(n, "vertex count", hline)?;
            parse_matrix_body(n, lines)
        }
        [n, m] => {
            let n = num(n, "vertex count", hline)?;
            let m = num(m, "edge count", hline)?;
            let mut g = Graph::new(n);
            let mut seen = 0usize;
            for (line, l) in lines {
                let parts: Vec<&str> = l.split_whitespace().collect();
                let [u, v] = parts.as_slice() else {
                    return Err(Error::Parse {
                        line,
                        message: "expected `u v`".into(),
                    });
                };
                let (u, v) = (num(u, "vertex", line)?, num(v, "vertex", line)?);
                if u >= n || v >= n {
                    return Err(Error::Parse {
                        line,
                        message: format!("vertex id {} out of range for n = {n}", u.max(v)),
                    });
                }
                if u == v {
                    return Err(Error::Parse {
                        line,
                        message: format!("self-loop at vertex {u}"),
                    });
                }
                if u > v {
                    return Err(Error::Parse {
                        line,
                        message: format!("edge ({u}, {v}) must be written with u < v"),
                    });
                }
                if g.has_edge(u, v) {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate edge ({u}, {v})"),
                    });
                }
                g.add_edge(u, v);
                seen += 1;
                if seen > m {
                    return Err(Error::Parse {
                        line,
                        message: format!("more than the declared {m} edges"),
                    });
                }
            }
            if seen != m {
                return Err(Error::Parse {
                    line: hline,
                    message: format!("header declares {m} edges but {seen} were listed"),
                });
            }
            Ok(g)
        }
        _ => Err(Error::Parse {
            line: hline,
            message: "header must be `n m` or `n`".into(),
        }),
    }
}

fn parse_matrix_body<'a>(n: usize, lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Graph> {
    let mut rows: Vec<(usize, Vec<bool>)> = Vec::with_capacity(n);
    for (line, l) in lines {
        if rows.len() == n {
            return Err(Error::Parse {
                line,
                message: format!("more than {n} matrix rows"),
            });
        }
        let row = l
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line,
                    message: format!("unexpected character `{other}`"),
                }),
            })
            .collect::<Result<Vec<bool>>>()?;
        if row.len() != n {
            return Err(Error::Parse {
                line,
                message: format!("row has {} entries, expected {n}", row.len()),
            });
        }
        rows.push((line, row));
    }
    if rows.len() != n {
        return Err(Error::Parse {
            line: rows.last().map_or(1, |r| r.0),
            message: format!("expected {n} matrix rows, found {}", rows.len()),
        });
    }
    let mut g = Graph::new(n);
    for (u, (line, row)) in rows.iter().enumerate() {
        if row[u] {
            return Err(Error::Parse {
                line: *line,
                message: format!("self-loop at vertex {u}"),
            });
        }
        for v in 0..n {
            if row[v] != rows[v].1[u] {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("matrix not symmetric at ({u}, {v})"),
                });
            }
            if row[v] && u < v {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n).complement()
}

pub fn empty(n: usize) -> Graph {
    Graph::new(n)
}

pub fn cycle(n: usize) -> Graph {
    match n {
        0 | 1 => Graph::new(n),
        2 => Graph::from_edges(2, [(0, 1)]),
        _ => Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))),
    }
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
}

/// Named graphs. The 4-vertex names follow the class table
/// (`K4, K4c, D4, D4c, P3, P3c, C4, C4c, K13, K13c, P4`); a trailing `c`
/// means complement. `Kn(k)`, `En(k)` and `Cn(k)` are the complete, empty
/// and cycle graphs on `k` vertices.
pub fn named_graph(name: &str) -> Result<Graph> {
    let name = name.trim();
    if let Some(inner) = name.strip_suffix(')') {
        let (family, arg) = inner.split_once('(').ok_or_else(|| Error::UnknownGraph(name.into()))?;
        let k: usize = arg.trim().parse().map_err(|_| Error::UnknownGraph(name.into()))?;
        return match family {
            "Kn" => Ok(complete(k)),
            "En" => Ok(empty(k)),
            "Cn" => Ok(cycle(k)),
            _ => Err(Error::UnknownGraph(name.into())),
        };
    }
    if let Some(base) = name.strip_suffix('c') {
        if !base.is_empty() && !base.ends_with('c') {
            return named_base(base).map(|g| g.complement());
        }
    }
    named_base(name)
}

fn named_base(name: &str) -> Result<Graph> {
    Ok(match name {
        "K4" => complete(4),
        "D4" => {
            let mut g = complete(4);
            g.remove_edge(2, 3);
            g
        }
        "P3" => Graph::from_edges(4, [(0, 1), (1, 2)]),
        "C4" => cycle(4),
        "K13" => Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]),
        "P4" => path(4),
        _ => return Err(Error::UnknownGraph(name.into())),
    })
}

/// `G(n, 1/2)`.
///
/// Pairs `(u, v)`, `u < v`, are visited in lexicographic order and each
/// consumes one bit of the ChaCha8 stream for `seed`: successive
/// `next_u64` outputs, least-significant bit first.
pub fn random_graph(n: usize, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::new(n);
    let mut buf = 0u64;
    let mut left = 0u32;
    for u in 0..n {
        for v in u + 1..n {
            if left == 0 {
                buf = rng.next_u64();
                left = 64;
            }
            if buf & 1 == 1 {
                g.add_edge(u, v);
            }
            buf >>= 1;
            left -= 1;
        }
    }
    g
}

/// Vertex partition of a blowup: part `i` replaces base vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupStructure {
    pub base_order: usize,
    pub factor: usize,
    pub parts: Vec<Vec<usize>>,
}

impl BlowupStructure {
    pub fn part_of(&self, v: usize) -> usize {
        v / self.factor
    }
}

/// Replaces each vertex by an independent set of size `k` and each edge by a
/// complete bipartite graph. Base vertex `i` becomes `i*k .. (i+1)*k`.
pub fn blowup(base: &Graph, k: usize) -> Result<(Graph, BlowupStructure)> {
    if k == 0 {
        return Err(Error::InvalidArgument("blowup factor must be at least 1".into()));
    }
    let m = base.order();
    let mut g = Graph::new(m * k);
    for (i, j) in base.edges() {
        for a in 0..k {
            for b in 0..k {
                g.add_edge(i * k + a, j * k + b);
            }
        }
    }
    let parts = (0..m).map(|i| (i * k..(i + 1) * k).collect()).collect();
    Ok((
        g,
        BlowupStructure {
            base_order: m,
            factor: k,
            parts,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_edge_list_path() {
        let g = parse_graph("4 3\n0 1\n1 2\n2 3").unwrap();
        assert_eq!(g, path(4));
        let single = parse_graph("1 0").unwrap();
        assert_eq!(single.order(), 1);
        assert_eq!(single.edge_count(), 0);
    }

    #[test]
    fn parse_errors_name_lines() {
        match parse_graph("2 1\n0 0") {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("self-loop")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_graph("3 2\n0 1\n0 1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_graph("3 1\n0 3"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("x y\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("3 2\n0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_matrix() {
        let g = parse_graph("3\n011\n100\n100\n").unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert!(parse_graph("2\n01\n00").is_err());
        assert!(parse_graph("2\n11\n10").is_err());
        assert_eq!(parse_graph(&g.to_adjacency_matrix()).unwrap(), g);
    }

    #[test]
    fn serialization_is_sorted_and_roundtrips() {
        let g = Graph::from_edges(5, [(3, 4), (0, 2), (1, 0)]);
        assert_eq!(g.to_edge_list(), "5 3\n0 1\n0 2\n3 4\n");
        assert_eq!(parse_graph(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn named_graphs() {
        let c4 = named_graph("C4").unwrap();
        assert_eq!((c4.order(), c4.edge_count()), (4, 4));
        let p3 = named_graph("P3").unwrap();
        assert_eq!(p3.edge_count(), 2);
        assert_eq!(p3.degree(3), 0);
        let k13c = named_graph("K13c").unwrap();
        assert_eq!(k13c.edge_count(), 3);
        assert_eq!(k13c.degree(0), 0);
        assert!((1..4).all(|v| k13c.degree(v) == 2));
        assert_eq!(named_graph("Kn(6)").unwrap().edge_count(), 15);
        assert_eq!(named_graph("En(6)").unwrap().edge_count(), 0);
        assert_eq!(named_graph("Cn(7)").unwrap().edge_count(), 7);
        assert!(matches!(named_graph("Petersen"), Err(Error::UnknownGraph(_))));
        assert!(named_graph("K4cc").is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complete(4).complement().edge_count(), 0);
        let two_k2 = cycle(4).complement();
        assert_eq!(two_k2.edges().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
        let g = random_graph(130, 5);
        assert_eq!(g.complement().complement(), g);
        assert!(g.complement().is_well_formed());
    }

    #[test]
    fn complement_involution_exhaustive_small() {
        for n in 0usize..=5 {
            for mask in 0..1u64 << (n * n.saturating_sub(1) / 2) {
                let g = Graph::from_pair_mask(n, mask);
                assert_eq!(g.complement().complement(), g);
                assert_eq!(g.pair_mask(), mask);
            }
        }
    }

    #[test]
    fn random_graph_determinism() {
        assert_eq!(random_graph(0, 1).order(), 0);
        assert_eq!(random_graph(77, 42), random_graph(77, 42));
        assert_ne!(random_graph(77, 42), random_graph(77, 43));
        assert!(random_graph(200, 1).is_well_formed());
    }

    #[test]
    fn random_graph_edge_count_concentrates() {
        // Binomial(4950, 1/2): mean 2475, sd ~ 35.2.
        let sd = (4950.0f64 * 0.25).sqrt();
        let mut total = 0u64;
        for seed in 0..1000 {
            let m = random_graph(100, seed).edge_count();
            assert!((m as f64 - 2475.0).abs() <= 5.0 * sd, "seed {seed}: {m}");
            total += m;
        }
        let mean = total as f64 / 1000.0;
        assert!((mean - 2475.0).abs() <= 5.0 * sd / (1000.0f64).sqrt());
    }

    #[test]
    fn blowup_examples() {
        let (g, s) = blowup(&complete(2), 2).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(s.parts, vec![vec![0, 1], vec![2, 3]]);

        let base = random_graph(9, 3);
        let (b, s) = blowup(&base, 4).unwrap();
        assert_eq!(b.order(), 36);
        assert_eq!(b.edge_count(), 16 * base.edge_count());
        for i in 0..9 {
            for j in 0..9 {
                let e: usize = s.parts[i]
                    .iter()
                    .map(|&u| s.parts[j].iter().filter(|&&v| b.has_edge(u, v)).count())
                    .sum();
                assert!(e == 0 || (i != j && e == 16));
            }
        }
        let reps: Vec<usize> = s.parts.iter().map(|p| p[1]).collect();
        assert_eq!(b.induced(&reps), base);
        assert_eq!(blowup(&base, 1).unwrap().0, base);
        assert!(blowup(&base, 0).is_err());
    }

    #[test]
    fn codegree_matches_neighbor_sets() {
        let g = random_graph(90, 11);
        for (u, v) in [(0, 1), (5, 70), (33, 33)] {
            let direct = (0..90).filter(|&w| g.has_edge(u, w) && g.has_edge(v, w)).count() as u64;
            assert_eq!(g.codegree(u, v), direct);
        }
    }
}
