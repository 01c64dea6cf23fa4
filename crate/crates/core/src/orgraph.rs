//! Oriented graphs: representation, canonical labeling, enumeration and
//! induced-subgraph counting.
//!
//! The text encoding (`org1`) is `n:d₁d₂…d_m` with one digit per unordered
//! pair `(i, j)`, `i < j`, in row-major order `(1,2), (1,3), …, (1,n), (2,3), …`:
//! `0` no edge, `1` means `i → j`, `2` means `j → i`. The canonical form of
//! a graph is the relabeling whose encoding is lexicographically smallest.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::util::{binomial, subsets};

/// Largest order an [`Orgraph`] can hold.
pub const MAX_ORDER: usize = 8;
/// Largest order [`enumerate_orgraphs`] supports.
pub const MAX_ENUM_ORDER: usize = 6;

/// An oriented graph on at most [`MAX_ORDER`] vertices.
///
/// Stored as out-neighbourhood bitmasks; constructors reject loops and
/// anti-parallel pairs, so every value is a valid orgraph.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orgraph {
    n: u8,
    out: [u8; MAX_ORDER],
}

/// True iff the arc list describes an orgraph on `n` vertices: endpoints in
/// range, no loops, no repeated arcs and no pair joined in both directions.
pub fn validate(n: usize, arcs: &[(usize, usize)]) -> bool {
    if n > MAX_ORDER {
        return false;
    }
    let mut seen = HashSet::new();
    for &(u, v) in arcs {
        if u >= n || v >= n || u == v {
            return false;
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return false;
        }
    }
    true
}

impl Orgraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_ORDER, "order {n} exceeds {MAX_ORDER}");
        Orgraph { n: n as u8, out: [0; MAX_ORDER] }
    }

    /// Builds a graph from 0-based arcs `(tail, head)`.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        if !validate(n, arcs) {
            return Err(Error::InvalidGraph(format!("arcs {arcs:?} on {n} vertices")));
        }
        let mut g = Orgraph::empty(n);
        for &(u, v) in arcs {
            g.out[u] |= 1 << v;
        }
        Ok(g)
    }

    /// Builds a graph from row-major pair digits (see module docs).
    pub fn from_digits(n: usize, digits: &[u8]) -> Result<Self> {
        if n > MAX_ORDER {
            return Err(Error::OrderOutOfRange { order: n, min: 0, max: MAX_ORDER });
        }
        let m = n * n.saturating_sub(1) / 2;
        if digits.len() != m {
            return Err(Error::InvalidGraph(format!(
                "expected {m} pair digits for order {n}, got {}",
                digits.len()
            )));
        }
        let mut g = Orgraph::empty(n);
        let mut it = digits.iter();
        for i in 0..n {
            for j in i + 1..n {
                match it.next().copied() {
                    Some(0) => {}
                    Some(1) => g.out[i] |= 1 << j,
                    Some(2) => g.out[j] |= 1 << i,
                    Some(d) => return Err(Error::InvalidGraph(format!("pair digit {d} not in 0..=2"))),
                    None => unreachable!(),
                }
            }
        }
        Ok(g)
    }

    /// Decodes a base-3 code as produced by [`Orgraph::code`].
    pub fn from_code(n: usize, mut code: u64) -> Self {
        let m = n * n.saturating_sub(1) / 2;
        let mut digits = vec![0u8; m];
        for d in digits.iter_mut().rev() {
            *d = (code % 3) as u8;
            code /= 3;
        }
        Orgraph::from_digits(n, &digits).expect("digits are in range")
    }

    pub fn order(&self) -> usize {
        self.n as usize
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u] >> v & 1 == 1
    }

    /// `0` if `u, v` are non-adjacent, `1` if `u → v`, `2` if `v → u`.
    #[inline]
    pub fn relation(&self, u: usize, v: usize) -> u8 {
        if self.out[u] >> v & 1 == 1 {
            1
        } else if self.out[v] >> u & 1 == 1 {
            2
        } else {
            0
        }
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let n = self.order();
        (0..n)
            .flat_map(|u| (0..n).filter(move |&v| self.out[u] >> v & 1 == 1).map(move |v| (u, v)))
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].count_ones() as usize
    }

    pub fn in_degree(&self, v: usize) -> usize {
        (0..self.order()).filter(|&u| self.has_arc(u, v)).count()
    }

    pub fn digits(&self) -> Vec<u8> {
        let n = self.order();
        let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                d.push(self.relation(i, j));
            }
        }
        d
    }

    /// The pair digits read as a base-3 number. For graphs of equal order,
    /// numeric order of codes is lexicographic order of encodings.
    pub fn code(&self) -> u64 {
        self.code_under(&(0..self.order()).collect::<Vec<_>>())
    }

    /// Code of the relabeled graph whose vertex `i` is `order[i]` here.
    fn code_under(&self, order: &[usize]) -> u64 {
        let mut code = 0u64;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                code = code * 3 + self.relation(order[i], order[j]) as u64;
            }
        }
        code
    }

    /// `org1` text encoding.
    pub fn encoding(&self) -> String {
        let digits: String = self.digits().iter().map(|d| char::from(b'0' + d)).collect();
        format!("{}:{}", self.n, digits)
    }

    /// Relabels: vertex `i` of the result is vertex `order[i]` of `self`.
    /// `order` may list a subset of vertices, giving the ordered induced
    /// subgraph.
    pub fn induced(&self, order: &[usize]) -> Orgraph {
        let mut g = Orgraph::empty(order.len());
        for (i, &u) in order.iter().enumerate() {
            for (j, &v) in order.iter().enumerate() {
                if self.has_arc(u, v) {
                    g.out[i] |= 1 << j;
                }
            }
        }
        g
    }

    /// Every arc reversed.
    pub fn converse(&self) -> Orgraph {
        let n = self.order();
        let mut g = Orgraph::empty(n);
        for u in 0..n {
            for v in 0..n {
                if self.has_arc(u, v) {
                    g.out[v] |= 1 << u;
                }
            }
        }
        g
    }

    pub fn canonical_form(&self) -> Orgraph {
        self.canonical_labeling(&[]).0
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_form() == *self
    }

    pub fn is_isomorphic(&self, other: &Orgraph) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }

    /// Smallest-encoding relabeling among those that put `prefix` (in that
    /// order) on vertices `0..prefix.len()`. Returns the relabeled graph and
    /// the vertex order realizing it.
    ///
    /// The search only extends a partial order with vertices whose relation
    /// vector to the already placed vertices is minimal; any other choice can
    /// be swapped for a smaller encoding, so the minimum is never pruned.
    pub fn canonical_labeling(&self, prefix: &[usize]) -> (Orgraph, Vec<usize>) {
        let n = self.order();
        let mut order: Vec<usize> = prefix.to_vec();
        let remaining: Vec<usize> = (0..n).filter(|v| !prefix.contains(v)).collect();
        let mut best = (u64::MAX, Vec::new());
        self.canon_dfs(&mut order, remaining, &mut best);
        let g = self.induced(&best.1);
        (g, best.1)
    }

    fn canon_dfs(&self, order: &mut Vec<usize>, remaining: Vec<usize>, best: &mut (u64, Vec<usize>)) {
        if remaining.is_empty() {
            let code = self.code_under(order);
            if code < best.0 {
                *best = (code, order.clone());
            }
            return;
        }
        let key = |v: usize| order.iter().fold(0u32, |acc, &u| acc * 3 + self.relation(u, v) as u32);
        let keys: Vec<u32> = remaining.iter().map(|&v| key(v)).collect();
        let min = *keys.iter().min().expect("non-empty");
        for (pos, &v) in remaining.iter().enumerate() {
            if keys[pos] != min {
                continue;
            }
            let rest: Vec<usize> = remaining.iter().copied().filter(|&u| u != v).collect();
            order.push(v);
            self.canon_dfs(order, rest, best);
            order.pop();
        }
    }

    /// Number of automorphisms.
    pub fn automorphism_count(&self) -> u64 {
        let n = self.order();
        let code = self.code();
        crate::util::permutations(n)
            .into_iter()
            .filter(|p| self.code_under(p) == code)
            .count() as u64
    }

    /// Number of `target.order()`-subsets of `self` inducing a copy of `target`.
    pub fn induced_count(&self, target: &Orgraph) -> u64 {
        let k = target.order();
        if k > self.order() {
            return 0;
        }
        let canon = target.canonical_form();
        let verts: Vec<usize> = (0..self.order()).collect();
        subsets(&verts, k)
            .into_iter()
            .filter(|s| self.induced(s).canonical_form() == canon)
            .count() as u64
    }
}

impl PartialOrd for Orgraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Orgraph {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.code().cmp(&other.code()))
    }
}

impl fmt::Display for Orgraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoding())
    }
}

impl fmt::Debug for Orgraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Orgraph({})", self.encoding())
    }
}

impl FromStr for Orgraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, digits) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("graph encoding {s:?} lacks ':'")))?;
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad order in {s:?}")))?;
        let digits: Vec<u8> = digits
            .chars()
            .map(|c| match c {
                '0'..='2' => Ok(c as u8 - b'0'),
                _ => Err(Error::Parse(format!("bad pair digit {c:?} in {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Orgraph::from_digits(n, &digits)
    }
}

impl serde::Serialize for Orgraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.encoding())
    }
}

impl<'de> serde::Deserialize<'de> for Orgraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical representatives of every orgraph on `n` vertices, sorted by
/// encoding. Computed once per order and cached.
pub fn enumerate_orgraphs(n: usize) -> Result<&'static [Orgraph]> {
    static CACHE: [OnceLock<Vec<Orgraph>>; MAX_ENUM_ORDER + 1] = [const { OnceLock::new() }; MAX_ENUM_ORDER + 1];
    if n > MAX_ENUM_ORDER {
        return Err(Error::OrderOutOfRange { order: n, min: 0, max: MAX_ENUM_ORDER });
    }
    Ok(CACHE[n].get_or_init(|| build_orgraphs(n)))
}

fn build_orgraphs(n: usize) -> Vec<Orgraph> {
    let mut set: HashSet<Orgraph> = if n <= 5 {
        let m = (n * n.saturating_sub(1) / 2) as u32;
        (0..3u64.pow(m))
            .into_par_iter()
            .map(|code| Orgraph::from_code(n, code).canonical_form())
            .collect()
    } else {
        // one new vertex on top of every smaller class
        let smaller = enumerate_orgraphs(n - 1).expect("n - 1 in range");
        let ways = 3u64.pow((n - 1) as u32);
        smaller
            .par_iter()
            .flat_map_iter(|g| {
                (0..ways).map(move |mut rel| {
                    let mut h = Orgraph { n: n as u8, out: g.out };
                    for u in 0..n - 1 {
                        match rel % 3 {
                            1 => h.out[u] |= 1 << (n - 1),
                            2 => h.out[n - 1] |= 1 << u,
                            _ => {}
                        }
                        rel /= 3;
                    }
                    h.canonical_form()
                })
            })
            .collect()
    };
    let mut v: Vec<Orgraph> = set.drain().collect();
    v.sort();
    v
}

/// Position of a canonical graph in [`enumerate_orgraphs`] order.
pub fn orgraph_index(g: &Orgraph) -> Option<usize> {
    let list = enumerate_orgraphs(g.order()).ok()?;
    list.binary_search(g).ok()
}

/// Fraction of `|target|`-subsets of `host` that induce a copy of `target`.
pub fn induced_density(target: &Orgraph, host: &Orgraph) -> Result<Rational> {
    let (k, n) = (target.order(), host.order());
    if k > n {
        return Err(Error::SizeMismatch(format!("target order {k} exceeds host order {n}")));
    }
    let count = host.induced_count(target);
    Ok(Rational::new(BigInt::from(count), BigInt::from(binomial(n as u64, k as u64))))
}

/// Largest induced density of `target` over all orgraphs on `n` vertices,
/// with the first maximizing host in enumeration order.
pub fn max_induced_density(target: &Orgraph, n: usize) -> Result<(Rational, Orgraph)> {
    if target.order() > n {
        return Err(Error::SizeMismatch(format!(
            "target order {} exceeds host order {n}",
            target.order()
        )));
    }
    let hosts = enumerate_orgraphs(n)?;
    let counts: Vec<u64> = hosts.par_iter().map(|h| h.induced_count(target)).collect();
    let (best, _) = counts
        .iter()
        .enumerate()
        .fold((0usize, 0u64), |(bi, bc), (i, &c)| if c > bc { (i, c) } else { (bi, bc) });
    Ok((induced_density(target, &hosts[best])?, hosts[best]))
}

/// Graphs that appear throughout the worked results.
pub mod named {
    use super::Orgraph;

    fn build(n: usize, arcs: &[(usize, usize)]) -> Orgraph {
        Orgraph::from_arcs(n, arcs).expect("fixed graph is valid")
    }

    /// Directed path on three vertices, `a → b → c`.
    pub fn p3() -> Orgraph {
        build(3, &[(0, 1), (1, 2)])
    }

    /// Cyclic triangle.
    pub fn c3() -> Orgraph {
        build(3, &[(0, 1), (1, 2), (2, 0)])
    }

    /// Transitive triangle.
    pub fn tt3() -> Orgraph {
        transitive_tournament(3)
    }

    pub fn c4() -> Orgraph {
        build(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])
    }

    /// Out-star: one vertex sending arcs to two others.
    pub fn k12() -> Orgraph {
        build(3, &[(0, 1), (0, 2)])
    }

    /// In-star: two vertices sending arcs to a third.
    pub fn k21() -> Orgraph {
        build(3, &[(1, 0), (2, 0)])
    }

    /// One arc plus an isolated vertex.
    pub fn k2e1() -> Orgraph {
        build(3, &[(0, 1)])
    }

    pub fn arc() -> Orgraph {
        build(2, &[(0, 1)])
    }

    pub fn transitive_tournament(n: usize) -> Orgraph {
        let arcs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        build(n, &arcs)
    }

    /// Looks up a graph by its common name (`p3`, `c3`, `tt3`, `c4`, `k12`,
    /// `k21`, `k2e1`, `arc`).
    pub fn by_name(name: &str) -> Option<Orgraph> {
        Some(match name.to_ascii_lowercase().as_str() {
            "p3" => p3(),
            "c3" => c3(),
            "tt3" => tt3(),
            "c4" => c4(),
            "k12" => k12(),
            "k21" => k21(),
            "k2e1" => k2e1(),
            "arc" | "k2" => arc(),
            _ => return None,
        })
    }
}
