//! Types, σ-flags and the densities between them.
//!
//! A [`Flag`] is stored in canonical form: the labeled vertices occupy
//! positions `0..k` in label order and the remaining vertices are arranged to
//! minimise the encoding. Two flags are isomorphic (as flags) iff their stored
//! forms are equal.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::orgraph::{enumerate_orgraphs, Orgraph};
use crate::scalar::Rational;
use crate::util::{binomial, falling_factorial, subsets};

/// Largest flag order supported by [`enumerate_flags`].
pub const MAX_FLAG_ORDER: usize = 5;

/// A fully labeled orgraph; labels are the vertex positions `0..k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSigma {
    graph: Orgraph,
}

impl TypeSigma {
    pub fn new(graph: Orgraph) -> Self {
        TypeSigma { graph }
    }

    /// The type of order 0.
    pub fn zero() -> Self {
        TypeSigma { graph: Orgraph::empty(0) }
    }

    /// The type of order 1.
    pub fn one() -> Self {
        TypeSigma { graph: Orgraph::empty(1) }
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    pub fn graph(&self) -> &Orgraph {
        &self.graph
    }
}

impl fmt::Debug for TypeSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type({})", self.graph)
    }
}

/// A σ-flag in canonical form.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Flag {
    k: u8,
    graph: Orgraph,
}

impl Flag {
    /// Flag `(graph, theta)` where `theta[i]` is the vertex carrying label `i`.
    pub fn new(graph: Orgraph, theta: &[usize]) -> Result<Flag> {
        let n = graph.order();
        for (i, &v) in theta.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidFlag(format!("label {i} on missing vertex {v}")));
            }
            if theta[..i].contains(&v) {
                return Err(Error::InvalidFlag(format!("labels share vertex {v}")));
            }
        }
        let (canon, _) = graph.canonical_labeling(theta);
        Ok(Flag { k: theta.len() as u8, graph: canon })
    }

    /// Flag whose labels sit on vertices `0..k` of `graph`.
    pub fn labeled_prefix(graph: Orgraph, k: usize) -> Result<Flag> {
        let theta: Vec<usize> = (0..k).collect();
        Flag::new(graph, &theta)
    }

    /// Parses `k;org1;theta` where `theta` lists the 1-based vertices carrying
    /// labels `1..k`, comma separated. Any labeling is accepted.
    pub fn parse(s: &str) -> Result<Flag> {
        let (graph, theta) = split_flag(s)?;
        Flag::new(graph, &theta)
    }

    /// Like [`Flag::parse`] but rejects anything other than the canonical
    /// serialization of the flag.
    pub fn parse_canonical(s: &str) -> Result<Flag> {
        let f = Flag::parse(s)?;
        if f.to_string() != s.trim() {
            return Err(Error::InvalidFlag(format!("{s} is not canonical (expected {f})")));
        }
        Ok(f)
    }

    pub fn type_order(&self) -> usize {
        self.k as usize
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    /// Underlying graph with labels on `0..k`.
    pub fn graph(&self) -> &Orgraph {
        &self.graph
    }

    pub fn sigma(&self) -> TypeSigma {
        let labels: Vec<usize> = (0..self.type_order()).collect();
        TypeSigma::new(self.graph.induced(&labels))
    }

    /// `org1` encoding of the underlying graph, labels first.
    pub fn encoding(&self) -> String {
        self.graph.encoding()
    }

    pub fn converse(&self) -> Flag {
        Flag::labeled_prefix(self.graph.converse(), self.type_order()).expect("same shape")
    }

    /// Restriction to the labels plus `petal` (unlabeled vertices).
    fn restrict(&self, petal: &[usize]) -> Flag {
        let mut order: Vec<usize> = (0..self.type_order()).collect();
        order.extend_from_slice(petal);
        Flag::labeled_prefix(self.graph.induced(&order), self.type_order()).expect("labels are distinct")
    }

    fn unlabeled(&self) -> Vec<usize> {
        (self.type_order()..self.order()).collect()
    }
}

impl PartialOrd for Flag {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Flag {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.k.cmp(&other.k).then_with(|| self.graph.cmp(&other.graph))
    }
}

impl fmt::Debug for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flag[{}]({})", self.k, self.graph)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let theta: Vec<String> = (1..=self.type_order()).map(|v| v.to_string()).collect();
        write!(f, "{};{};{}", self.k, self.graph, theta.join(","))
    }
}

impl FromStr for Flag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Flag> {
        Flag::parse(s)
    }
}

fn split_flag(s: &str) -> Result<(Orgraph, Vec<usize>)> {
    let bad = || Error::InvalidFlag(format!("expected `k;org1;theta`, got {s:?}"));
    let mut parts = s.trim().split(';');
    let (Some(k), Some(enc), Some(theta), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    let graph: Orgraph = enc.trim().parse()?;
    let theta: Vec<usize> = if theta.trim().is_empty() {
        Vec::new()
    } else {
        theta
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad()),
            })
            .collect::<Result<_>>()?
    };
    if theta.len() != k {
        return Err(Error::InvalidFlag(format!("{s}: type order {k} but {} labels", theta.len())));
    }
    Ok((graph, theta))
}

/// The complete list of σ-flags of one order, in a fixed index order.
#[derive(Clone, Debug)]
pub struct FlagBasis {
    sigma: TypeSigma,
    order: usize,
    flags: Vec<Flag>,
    index: HashMap<Flag, usize>,
}

impl FlagBasis {
    fn from_flags(sigma: TypeSigma, order: usize, flags: Vec<Flag>) -> Self {
        let index = flags.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        FlagBasis { sigma, order, flags, index }
    }

    pub fn sigma(&self) -> TypeSigma {
        self.sigma
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn index_of(&self, f: &Flag) -> Option<usize> {
        self.index.get(f).copied()
    }
}

/// The fifteen type-1 flags on three vertices in their conventional order.
///
/// Vertex 0 is the label, `a` is vertex 1 and `b` is vertex 2.
pub fn f1_order3() -> Vec<Flag> {
    const L: usize = 0;
    const A: usize = 1;
    const B: usize = 2;
    let arcs: [&[(usize, usize)]; 15] = [
        &[],
        &[(L, A)],
        &[(L, A), (L, B)],
        &[(L, A), (L, B), (A, B)],
        &[(L, A), (B, L)],
        &[(L, A), (B, L), (A, B)],
        &[(L, A), (B, L), (B, A)],
        &[(L, A), (A, B)],
        &[(L, A), (B, A)],
        &[(A, L)],
        &[(A, L), (B, L)],
        &[(A, L), (B, L), (A, B)],
        &[(A, L), (A, B)],
        &[(A, L), (B, A)],
        &[(A, B)],
    ];
    arcs.iter()
        .map(|a| Flag::labeled_prefix(Orgraph::from_arcs(3, a).expect("valid"), 1).expect("valid"))
        .collect()
}

/// All σ-flags of order `order`, up to flag isomorphism.
///
/// Type-1 flags of order 3 come in the conventional order of [`f1_order3`];
/// every other basis is sorted by encoding.
pub fn enumerate_flags(sigma: TypeSigma, order: usize) -> Result<FlagBasis> {
    let k = sigma.order();
    if order < k || order > MAX_FLAG_ORDER {
        return Err(Error::OrderOutOfRange { order, min: k, max: MAX_FLAG_ORDER });
    }
    if k == 1 && order == 3 {
        return Ok(FlagBasis::from_flags(sigma, order, f1_order3()));
    }
    if k == 0 {
        let flags = enumerate_orgraphs(order)?.iter().map(|g| Flag { k: 0, graph: *g }).collect();
        return Ok(FlagBasis::from_flags(sigma, order, flags));
    }
    // pairs with at least one unlabeled endpoint are free
    let free: Vec<(usize, usize)> = (0..order)
        .flat_map(|i| (i + 1..order).map(move |j| (i, j)))
        .filter(|&(_, j)| j >= k)
        .collect();
    let mut seen = std::collections::HashSet::new();
    for mut code in 0..3u64.pow(free.len() as u32) {
        let mut arcs = sigma.graph().arcs();
        for &(i, j) in &free {
            match code % 3 {
                1 => arcs.push((i, j)),
                2 => arcs.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        let g = Orgraph::from_arcs(order, &arcs)?;
        seen.insert(Flag::labeled_prefix(g, k)?);
    }
    let mut flags: Vec<Flag> = seen.into_iter().collect();
    flags.sort();
    Ok(FlagBasis::from_flags(sigma, order, flags))
}

fn check_same_type(a: &Flag, b: &Flag) -> Result<()> {
    if a.sigma() != b.sigma() {
        return Err(Error::TypeMismatch(format!("{:?} vs {:?}", a.sigma(), b.sigma())));
    }
    Ok(())
}

fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Probability that the labels plus a uniformly random set of
/// `|small| - k` unlabeled vertices of `host` induce a flag isomorphic to
/// `small`.
pub fn flag_density(small: &Flag, host: &Flag) -> Result<Rational> {
    check_same_type(small, host)?;
    if small.order() > host.order() {
        return Err(Error::SizeMismatch(format!(
            "flag of order {} inside flag of order {}",
            small.order(),
            host.order()
        )));
    }
    let size = small.order() - small.type_order();
    let petals = subsets(&host.unlabeled(), size);
    let hits = petals.iter().filter(|p| host.restrict(p) == *small).count() as u64;
    Ok(ratio(hits, petals.len() as u64))
}

/// Number of `order`-vertex sub-flags of `host` (labels plus a petal) in each
/// isomorphism class; dividing by `C(|host| − k, order − k)` gives
/// [`flag_density`].
pub fn sub_flag_counts(host: &Flag, order: usize) -> Result<HashMap<Flag, u64>> {
    let k = host.type_order();
    if order < k || order > host.order() {
        return Err(Error::SizeMismatch(format!(
            "sub-flags of order {order} in a flag of order {} with {k} labels",
            host.order()
        )));
    }
    let mut counts = HashMap::new();
    for petal in subsets(&host.unlabeled(), order - k) {
        *counts.entry(host.restrict(&petal)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Joint density over a uniformly random ordered pair of disjoint petals.
pub fn sunflower_density(f1: &Flag, f2: &Flag, host: &Flag) -> Result<Rational> {
    check_same_type(f1, host)?;
    check_same_type(f2, host)?;
    let k = host.type_order();
    let (s1, s2) = (f1.order() - k, f2.order() - k);
    if f1.order() + f2.order() - k > host.order() {
        return Err(Error::SizeMismatch(format!(
            "petals of sizes {s1} and {s2} do not fit in a flag of order {}",
            host.order()
        )));
    }
    let free = host.unlabeled();
    let (mut hits, mut total) = (0u64, 0u64);
    for v1 in subsets(&free, s1) {
        let rest: Vec<usize> = free.iter().copied().filter(|v| !v1.contains(v)).collect();
        let first = host.restrict(&v1) == *f1;
        for v2 in subsets(&rest, s2) {
            total += 1;
            if first && host.restrict(&v2) == *f2 {
                hits += 1;
            }
        }
    }
    Ok(ratio(hits, total))
}

/// Coefficients of `small` expanded in a basis of larger flags.
pub fn chain_expand(small: &Flag, basis: &FlagBasis) -> Result<Vec<Rational>> {
    if small.sigma() != basis.sigma() {
        return Err(Error::TypeMismatch(format!("{:?} vs {:?}", small.sigma(), basis.sigma())));
    }
    if small.order() > basis.order() {
        return Err(Error::SizeMismatch(format!(
            "cannot expand order {} in basis of order {}",
            small.order(),
            basis.order()
        )));
    }
    basis.flags().iter().map(|f| flag_density(small, f)).collect()
}

/// Probability that a uniformly random injective labeling of the
/// underlying graph yields a flag isomorphic to `f`.
pub fn averaging_coefficient(f: &Flag) -> Rational {
    let (n, k) = (f.order(), f.type_order());
    let sigma = f.sigma();
    let hits = injections(n, k)
        .into_iter()
        .filter(|theta| f.graph.induced(theta) == *sigma.graph())
        .filter(|theta| Flag::new(f.graph, theta).expect("injective") == *f)
        .count() as u64;
    ratio(hits, falling_factorial(n as u64, k as u64))
}

/// The averaged flag `q(F) · Γ` as (canonical graph, coefficient).
pub fn average(f: &Flag) -> (Orgraph, Rational) {
    (f.graph.canonical_form(), averaging_coefficient(f))
}

/// Expansion of an averaged product of two flags in the basis of unlabeled
/// graphs of order `host_order`; zero coefficients are dropped.
pub fn averaged_product(f1: &Flag, f2: &Flag, host_order: usize) -> Result<Vec<(Orgraph, Rational)>> {
    check_same_type(f1, f2)?;
    let sigma = f1.sigma();
    let k = sigma.order();
    if f1.order() + f2.order() - k > host_order {
        return Err(Error::SizeMismatch(format!("host order {host_order} too small for product")));
    }
    let mut out = Vec::new();
    for g in enumerate_orgraphs(host_order)? {
        let thetas = injections(host_order, k);
        let mut sum = Rational::zero();
        for theta in &thetas {
            if g.induced(theta) != *sigma.graph() {
                continue;
            }
            let host = Flag::new(*g, theta)?;
            sum += sunflower_density(f1, f2, &host)?;
        }
        if !sum.is_zero() {
            let den = Rational::from_integer(BigInt::from(thetas.len() as u64));
            out.push((*g, sum / den));
        }
    }
    Ok(out)
}

/// All ordered `k`-tuples of distinct vertices of `0..n`.
pub(crate) fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    go(n, k, &mut cur, &mut out);
    out
}

/// Number of ordered petal pairs of the given sizes among `free` vertices.
pub(crate) fn petal_pairs(free: usize, s1: usize, s2: usize) -> u64 {
    binomial(free as u64, s1 as u64) * binomial((free - s1) as u64, s2 as u64)
}
