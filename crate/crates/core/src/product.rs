//! Averaged flag products expanded over all unlabeled graphs of a host order.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flag::{injections, petal_pairs, Flag, TypeSigma};
use crate::linalg::Matrix;
use crate::orgraph::{enumerate_orgraphs, Orgraph};
use crate::scalar::Rational;
use crate::util::subsets;

/// Coefficients `c_ij(G)` of `G` in `⟦F_i · F_j⟧_σ` for every `G ∈ 𝒪_N`.
///
/// Stored as integer counts over one common denominator:
/// `c_ij(G) = counts[G][i·d + j] / denominator`.
#[derive(Clone, Debug)]
pub struct ProductTable {
    sigma: TypeSigma,
    flags: Vec<Flag>,
    host_order: usize,
    graphs: &'static [Orgraph],
    denominator: u64,
    counts: Vec<Vec<u32>>,
}

impl ProductTable {
    /// `flags` must be distinct flags of one type and one order `ℓ` with
    /// `2ℓ − k ≤ host_order ≤ 5`.
    pub fn new(flags: &[Flag], host_order: usize) -> Result<Self> {
        let first = flags.first().ok_or_else(|| Error::Dimension("empty flag list".into()))?;
        let sigma = first.sigma();
        let (k, ell) = (sigma.order(), first.order());
        for f in flags {
            if f.sigma() != sigma {
                return Err(Error::TypeMismatch(format!("{f:?} does not have type {sigma:?}")));
            }
            if f.order() != ell {
                return Err(Error::SizeMismatch(format!("{f:?} is not of order {ell}")));
            }
        }
        let index: HashMap<Flag, usize> = flags.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        if index.len() != flags.len() {
            return Err(Error::InvalidFlag("duplicate flags in list".into()));
        }
        if 2 * ell - k > host_order || host_order > crate::flag::MAX_FLAG_ORDER {
            return Err(Error::OrderOutOfRange { order: host_order, min: 2 * ell - k, max: crate::flag::MAX_FLAG_ORDER });
        }
        let graphs = enumerate_orgraphs(host_order)?;
        let d = flags.len();
        let thetas = injections(host_order, k);
        let counts = graphs
            .par_iter()
            .map(|g| {
                let mut row = vec![0u32; d * d];
                for theta in &thetas {
                    if g.induced(theta) != *sigma.graph() {
                        continue;
                    }
                    let host = Flag::new(*g, theta).expect("injective labeling");
                    accumulate_pairs(&host, ell - k, &index, d, &mut row);
                }
                row
            })
            .collect();
        let denominator = thetas.len() as u64 * petal_pairs(host_order - k, ell - k, ell - k);
        Ok(ProductTable { sigma, flags: flags.to_vec(), host_order, graphs, denominator, counts })
    }

    pub fn sigma(&self) -> TypeSigma {
        self.sigma
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn dim(&self) -> usize {
        self.flags.len()
    }

    pub fn host_order(&self) -> usize {
        self.host_order
    }

    pub fn graphs(&self) -> &'static [Orgraph] {
        self.graphs
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// Raw count for graph index `g` and flags `(i, j)`.
    pub fn count(&self, g: usize, i: usize, j: usize) -> u32 {
        self.counts[g][i * self.dim() + j]
    }

    pub fn coefficient(&self, g: usize, i: usize, j: usize) -> Rational {
        Rational::new(BigInt::from(self.count(g, i, j)), BigInt::from(self.denominator))
    }

    /// The symmetric matrix `C_G` for graph index `g`.
    pub fn matrix(&self, g: usize) -> Matrix<Rational> {
        let d = self.dim();
        let rows = (0..d).map(|i| (0..d).map(|j| self.coefficient(g, i, j)).collect()).collect();
        Matrix::from_rows(rows).expect("square")
    }

    /// `Σ_ij Q_ij c_ij(G)`, the coefficient of `G` in `⟦fᵀ Q f⟧_σ`.
    pub fn quadratic(&self, g: usize, q: &Matrix<Rational>) -> Rational {
        let d = self.dim();
        let mut acc = Rational::zero();
        for i in 0..d {
            for j in 0..d {
                let c = self.count(g, i, j);
                if c != 0 {
                    acc += q.get(i, j) * Rational::from_integer(BigInt::from(c));
                }
            }
        }
        acc / Rational::from_integer(BigInt::from(self.denominator))
    }

    /// `Σ_G c_ij(G)` over the isomorphism classes of `𝒪_N`.
    pub fn column_sum(&self, i: usize, j: usize) -> Rational {
        let total: u64 = (0..self.graphs.len()).map(|g| self.count(g, i, j) as u64).sum();
        Rational::new(BigInt::from(total), BigInt::from(self.denominator))
    }

    /// `Σ_ij c_ij(G)`: the share of labelings of `G` that embed σ, when the
    /// flags form a complete basis.
    pub fn graph_total(&self, g: usize) -> Rational {
        let total: u64 = self.counts[g].iter().map(|&c| c as u64).sum();
        Rational::new(BigInt::from(total), BigInt::from(self.denominator))
    }
}

fn accumulate_pairs(host: &Flag, petal: usize, index: &HashMap<Flag, usize>, d: usize, row: &mut [u32]) {
    let k = host.type_order();
    let free: Vec<usize> = (k..host.order()).collect();
    let restrict = |s: &[usize]| -> Option<usize> {
        let mut order: Vec<usize> = (0..k).collect();
        order.extend_from_slice(s);
        let f = Flag::labeled_prefix(host.graph().induced(&order), k).expect("labels distinct");
        index.get(&f).copied()
    };
    for v1 in subsets(&free, petal) {
        let Some(i) = restrict(&v1) else { continue };
        let rest: Vec<usize> = free.iter().copied().filter(|v| !v1.contains(v)).collect();
        for v2 in subsets(&rest, petal) {
            if let Some(j) = restrict(&v2) {
                row[i * d + j] += 1;
            }
        }
    }
}
