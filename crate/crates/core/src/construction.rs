//! Limit densities of weighted recursive blowups.
//!
//! A blowup replaces each vertex of a host graph by a part of relative size
//! `w_p`. Parts joined by an arc in the host are joined completely in that
//! direction; parts that are not adjacent have no arcs between them. Inside a
//! part sits either a copy of the whole construction, a transitive tournament,
//! or nothing, all in the limit of infinitely many vertices.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orgraph::{enumerate_orgraphs, named, Orgraph};
use crate::scalar::{format_ratio, parse_rational, Rational, Scalar};
use crate::util::factorial;

/// Largest order for which [`limit_densities`] is defined.
pub const MAX_LIMIT_ORDER: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    /// The part holds a scaled copy of the whole construction.
    Recurse,
    /// The part holds a growing transitive tournament.
    Transitive,
    /// The part has no internal arcs.
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupSpec<T> {
    host: Orgraph,
    weights: Vec<T>,
    fill: Vec<Fill>,
}

impl<T: Scalar> BlowupSpec<T> {
    /// Weights must be non-negative and sum to 1, exactly for exact scalars
    /// and within `1e-12` otherwise.
    pub fn new(host: Orgraph, weights: Vec<T>, fill: Vec<Fill>) -> Result<Self> {
        let m = host.order();
        if m == 0 {
            return Err(Error::InvalidBlowup("host has no parts".into()));
        }
        if weights.len() != m || fill.len() != m {
            return Err(Error::InvalidBlowup(format!(
                "host has {m} parts but {} weights and {} fills",
                weights.len(),
                fill.len()
            )));
        }
        if let Some(p) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::InvalidBlowup(format!("weight {p} is negative")));
        }
        let total = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        let sums_to_one = if T::EXACT {
            total == T::one()
        } else {
            (total.to_f64_lossy() - 1.0).abs() <= 1e-12
        };
        if !sums_to_one {
            return Err(Error::InvalidBlowup(format!("weights sum to {total:?}, not 1")));
        }
        Ok(BlowupSpec { host, weights, fill })
    }

    pub fn uniform(host: Orgraph, fill: Fill) -> Result<Self> {
        let m = host.order();
        let w = T::from_ratio(1, m.max(1) as i64);
        BlowupSpec::new(host, vec![w; m], vec![fill; m])
    }

    pub fn host(&self) -> &Orgraph {
        &self.host
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn fill(&self) -> &[Fill] {
        &self.fill
    }

    pub fn parts(&self) -> usize {
        self.host.order()
    }

    pub fn to_f64(&self) -> BlowupSpec<f64> {
        BlowupSpec {
            host: self.host,
            weights: self.weights.iter().map(Scalar::to_f64_lossy).collect(),
            fill: self.fill.clone(),
        }
    }
}

/// Densities of every graph of order `0..=max_order` in the limit object.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitDensities<T> {
    by_order: Vec<Vec<(Orgraph, T)>>,
}

impl<T: Scalar> LimitDensities<T> {
    pub fn max_order(&self) -> usize {
        self.by_order.len() - 1
    }

    /// `(graph, density)` over `𝒪_ℓ` in enumeration order.
    pub fn order(&self, ell: usize) -> &[(Orgraph, T)] {
        &self.by_order[ell]
    }

    pub fn density(&self, g: &Orgraph) -> Option<&T> {
        let canon = g.canonical_form();
        self.by_order
            .get(canon.order())?
            .iter()
            .find(|(h, _)| *h == canon)
            .map(|(_, d)| d)
    }

    pub fn total(&self, ell: usize) -> T {
        self.by_order[ell].iter().fold(T::zero(), |acc, (_, d)| acc + d.clone())
    }
}

/// Limit densities of `spec` up to `max_order`.
///
/// Works with ordered-embedding probabilities `e_Γ`: condition on which part
/// each of the `k` sampled vertices lands in, require the cross-part pairs to
/// agree with the host, and multiply the within-part probabilities. A single
/// part receiving all `k` vertices reproduces `e_Γ` itself for recursive
/// parts, so `e_Γ (1 − Σ w_p^k) = base` is solved for `e_Γ`.
pub fn limit_densities<T: Scalar>(spec: &BlowupSpec<T>, max_order: usize) -> Result<LimitDensities<T>> {
    if max_order > MAX_LIMIT_ORDER {
        return Err(Error::OrderOutOfRange { order: max_order, min: 0, max: MAX_LIMIT_ORDER });
    }
    let m = spec.parts();
    let mut by_order: Vec<Vec<(Orgraph, T)>> = Vec::with_capacity(max_order + 1);
    let mut known: HashMap<Orgraph, T> = HashMap::new();
    for ell in 0..=max_order.min(1) {
        let g = Orgraph::empty(ell);
        known.insert(g, T::one());
        by_order.push(vec![(g, T::one())]);
    }
    let mut aut_cache: HashMap<Orgraph, u64> = HashMap::new();
    for k in 2..=max_order {
        let self_weight = spec
            .fill
            .iter()
            .zip(&spec.weights)
            .filter(|(f, _)| **f == Fill::Recurse)
            .fold(T::zero(), |acc, (_, w)| acc + pow(w, k));
        let denom = T::one() - self_weight;
        if denom.is_zero() || (!T::EXACT && denom.to_f64_lossy().abs() < 1e-300) {
            return Err(Error::InvalidBlowup(
                "a single recursive part of weight 1 has no well-defined limit".into(),
            ));
        }
        let mut level = Vec::new();
        for g in enumerate_orgraphs(k)? {
            let mut base = T::zero();
            let mut phi = vec![0usize; k];
            loop {
                if let Some(term) = assignment_term(spec, g, &phi, &known, &mut aut_cache) {
                    base = base + term;
                }
                if !next_assignment(&mut phi, m) {
                    break;
                }
            }
            let e = base / denom.clone();
            let aut = *aut_cache.entry(*g).or_insert_with(|| g.automorphism_count());
            let d = e * T::from_ratio(factorial(k as u64) as i64, aut as i64);
            level.push((*g, d));
        }
        for (g, d) in &level {
            known.insert(*g, d.clone());
        }
        by_order.push(level);
    }
    Ok(LimitDensities { by_order })
}

fn pow<T: Scalar>(w: &T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * w.clone())
}

fn next_assignment(phi: &mut [usize], m: usize) -> bool {
    for slot in phi.iter_mut().rev() {
        *slot += 1;
        if *slot < m {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Contribution of one part assignment, or `None` if it contributes nothing.
/// Assignments sending every vertex into one recursive part are the
/// self-term and are excluded here.
fn assignment_term<T: Scalar>(
    spec: &BlowupSpec<T>,
    g: &Orgraph,
    phi: &[usize],
    known: &HashMap<Orgraph, T>,
    aut_cache: &mut HashMap<Orgraph, u64>,
) -> Option<T> {
    let k = phi.len();
    for i in 0..k {
        for j in i + 1..k {
            let (p, q) = (phi[i], phi[j]);
            if p != q && g.relation(i, j) != spec.host.relation(p, q) {
                return None;
            }
        }
    }
    let mut term = T::one();
    for (p, w) in spec.weights.iter().enumerate() {
        let block: Vec<usize> = (0..k).filter(|&i| phi[i] == p).collect();
        if block.is_empty() {
            continue;
        }
        if block.len() == k && spec.fill[p] == Fill::Recurse {
            return None;
        }
        let h = g.induced(&block);
        let b = block.len();
        let inner = match spec.fill[p] {
            Fill::Recurse => {
                let canon = h.canonical_form();
                let d = known.get(&canon).expect("lower orders computed first").clone();
                let aut = *aut_cache.entry(canon).or_insert_with(|| canon.automorphism_count());
                d * T::from_ratio(aut as i64, factorial(b as u64) as i64)
            }
            Fill::Transitive if is_transitive_tournament(&h) => T::from_ratio(1, factorial(b as u64) as i64),
            Fill::Empty if h.arc_count() == 0 => T::one(),
            _ => return None,
        };
        term = term * pow(w, b) * inner;
    }
    Some(term)
}

fn is_transitive_tournament(h: &Orgraph) -> bool {
    let n = h.order();
    if h.arc_count() != n * (n.saturating_sub(1)) / 2 {
        return false;
    }
    let mut outs: Vec<usize> = (0..n).map(|v| h.out_degree(v)).collect();
    outs.sort_unstable();
    outs.iter().enumerate().all(|(i, &d)| d == i)
}

/// Closed form for the three-part out-star construction with top weight `s`:
/// returns `(K₁,₂ density, non-edge density)`.
pub fn k12_closed_form<T: Scalar>(s: &T) -> Result<(T, T)> {
    if !(s.is_positive() && *s < T::one()) {
        return Err(Error::InvalidBlowup(format!("s = {s:?} outside (0, 1)")));
    }
    let one = T::one();
    let three = T::from_ratio(3, 1);
    let rho_bar = (one.clone() - s.clone()) / (three.clone() * s.clone() + one.clone());
    let d = T::from_ratio(4, 1) * (one.clone() - s.clone()) * s.clone()
        / ((one.clone() + s.clone()) * (three * s.clone() + one));
    Ok((d, rho_bar))
}

/// Out-star host: part 0 dominates parts 1 and 2, which are mutually
/// non-adjacent; weights `(s, (1−s)/2, (1−s)/2)`, all recursive.
pub fn out_star_spec<T: Scalar>(s: T) -> Result<BlowupSpec<T>> {
    let half = (T::one() - s.clone()) / T::from_ratio(2, 1);
    BlowupSpec::new("3:110".parse()?, vec![s, half.clone(), half], vec![Fill::Recurse; 3])
}

/// The weight maximizing the out-star construction's `K₁,₂` density.
pub fn out_star_optimal_weight() -> f64 {
    (2.0 * std::f64::consts::SQRT_2 - 1.0) / 7.0
}

/// Golden-section search for the parameter in `[lo, hi]` maximizing the limit
/// density of `target` in `family(s)`; stops once the bracket is below
/// `1e-10`. Returns `(s*, density)`.
pub fn optimize_weight<F>(family: F, target: &Orgraph, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<BlowupSpec<f64>>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBlowup(format!("bad search interval [{lo}, {hi}]")));
    }
    let k = target.order();
    if k > MAX_LIMIT_ORDER {
        return Err(Error::OrderOutOfRange { order: k, min: 0, max: MAX_LIMIT_ORDER });
    }
    let eval = |s: f64| -> Result<f64> {
        let dens = limit_densities(&family(s)?, k)?;
        Ok(*dens.density(target).expect("target order computed"))
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > 1e-10 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let s = (a + b) / 2.0;
    Ok((s, eval(s)?))
}

/// Names accepted by [`builtin_spec`].
pub const BUILTIN_SPECS: [&str; 4] = ["c3", "c4", "k12", "2tournaments"];

/// A builtin construction, exact when all of its weights are rational.
#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinSpec {
    Exact(BlowupSpec<Rational>),
    Float(BlowupSpec<f64>),
}

/// `c3`, `c4`: uniform recursive blowups of the directed 3- and 4-cycle;
/// `k12`: the out-star construction at its optimal weight;
/// `2tournaments`: two disjoint transitive tournaments of equal size.
pub fn builtin_spec(name: &str) -> Option<BuiltinSpec> {
    let spec = match name {
        "c3" => BuiltinSpec::Exact(BlowupSpec::uniform(named::c3(), Fill::Recurse).ok()?),
        "c4" => BuiltinSpec::Exact(BlowupSpec::uniform(named::c4(), Fill::Recurse).ok()?),
        "k12" => BuiltinSpec::Float(out_star_spec(out_star_optimal_weight()).ok()?),
        "2tournaments" => BuiltinSpec::Exact(BlowupSpec::uniform(Orgraph::empty(2), Fill::Transitive).ok()?),
        _ => return None,
    };
    Some(spec)
}

/// On-disk blowup spec (JSON). Weights are `"p/q"` or decimal strings and are
/// read exactly.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlowupFile {
    pub host: String,
    pub weights: Vec<String>,
    pub fill: Vec<Fill>,
}

impl BlowupFile {
    pub fn to_spec(&self) -> Result<BlowupSpec<Rational>> {
        let host: Orgraph = self.host.parse().map_err(|e| Error::Parse(format!("host: {e}")))?;
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| parse_rational(w).map_err(|e| Error::Parse(format!("weights[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        BlowupSpec::new(host, weights, self.fill.clone())
    }

    pub fn from_spec(spec: &BlowupSpec<Rational>) -> Self {
        BlowupFile {
            host: spec.host.encoding(),
            weights: spec.weights.iter().map(format_ratio).collect(),
            fill: spec.fill.clone(),
        }
    }
}

pub fn load_blowup(path: impl AsRef<Path>) -> Result<BlowupSpec<Rational>> {
    let file: BlowupFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    file.to_spec()
}

pub fn save_blowup(spec: &BlowupSpec<Rational>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&BlowupFile::from_spec(spec))? + "\n")?;
    Ok(())
}

/// Lexicographic product: every vertex of `a` replaced by a copy of `b`.
pub fn lexicographic_product(a: &Orgraph, b: &Orgraph) -> Result<Orgraph> {
    let (na, nb) = (a.order(), b.order());
    let n = na * nb;
    if n > crate::orgraph::MAX_ORDER {
        return Err(Error::OrderOutOfRange { order: n, min: 0, max: crate::orgraph::MAX_ORDER });
    }
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let (pu, pv) = (u / nb, v / nb);
            let forward = if pu == pv { b.has_arc(u % nb, v % nb) } else { a.has_arc(pu, pv) };
            if forward {
                arcs.push((u, v));
            }
        }
    }
    Orgraph::from_arcs(n, &arcs)
}
