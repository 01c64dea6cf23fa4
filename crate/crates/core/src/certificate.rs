//! Flag-algebra certificates: a PSD matrix over a flag vector that bounds the
//! density of a target graph, checked coefficient by coefficient.
//!
//! For every host `G ∈ 𝒪_N` the slack is
//! `bound − p(target, G) − Σ_ij Q_ij c_ij(G)`. If `Q ⪰ 0` and every slack is
//! non-negative then `bound − target − ⟦fᵀ Q f⟧_σ` is a non-negative
//! combination of graphs, so `bound` bounds the inducibility of `target`.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flag::{averaging_coefficient, enumerate_flags, f1_order3, Flag, TypeSigma};
use crate::linalg::{factor_scale, from_scaled_ints, parse_matrix_text, psd_check_exact, Matrix, PsdOutcome};
use crate::orgraph::{induced_density, named, Orgraph};
use crate::product::ProductTable;
use crate::scalar::{format_ratio, int, parse_rational, rat, Rational};

pub const MATRIX_A: &str = include_str!("../data/a.mat");
pub const MATRIX_B: &str = include_str!("../data/b.mat");
pub const MATRIX_C: &str = include_str!("../data/c.mat");

const P3_SDP: &str = include_str!("../data/p3_sdp.json");
const C4_SDP: &str = include_str!("../data/c4_sdp.json");
const K12_SDP: &str = include_str!("../data/k12_sdp.json");

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub sigma: TypeSigma,
    pub flags: Vec<Flag>,
    pub q: Matrix<Rational>,
    pub target: Orgraph,
    pub bound: Rational,
    pub host_order: usize,
}

impl Certificate {
    pub fn new(
        sigma: TypeSigma,
        flags: Vec<Flag>,
        q: Matrix<Rational>,
        target: Orgraph,
        bound: Rational,
        host_order: usize,
    ) -> Result<Self> {
        let cert = Certificate { sigma, flags, q, target: target.canonical_form(), bound, host_order };
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<()> {
        if self.flags.len() != self.q.dim() {
            return Err(Error::Dimension(format!(
                "{} flags but a {}x{} matrix",
                self.flags.len(),
                self.q.dim(),
                self.q.dim()
            )));
        }
        self.q.check_symmetric()?;
        let k = self.sigma.order();
        if let Some(f) = self.flags.iter().find(|f| f.sigma() != self.sigma) {
            return Err(Error::TypeMismatch(format!("{f:?} does not have type {:?}", self.sigma)));
        }
        let ell = self.flags.iter().map(Flag::order).max().unwrap_or(k);
        if 2 * ell - k > self.host_order {
            return Err(Error::SizeMismatch(format!(
                "host order {} below 2·{ell} − {k}",
                self.host_order
            )));
        }
        if self.target.order() > self.host_order {
            return Err(Error::SizeMismatch(format!(
                "target order {} exceeds host order {}",
                self.target.order(),
                self.host_order
            )));
        }
        Ok(())
    }

    pub fn product_table(&self) -> Result<ProductTable> {
        ProductTable::new(&self.flags, self.host_order)
    }

    /// Same certificate with flags reordered: new flag `i` is old `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Certificate {
        Certificate {
            flags: perm.iter().map(|&p| self.flags[p]).collect(),
            q: self.q.permuted(perm),
            ..self.clone()
        }
    }

    /// Reverses every arc in flags and target, keeping `Q` attached to the
    /// same (conversed) flags.
    pub fn converse(&self) -> Certificate {
        Certificate {
            sigma: TypeSigma::new(self.sigma.graph().converse()),
            flags: self.flags.iter().map(Flag::converse).collect(),
            target: self.target.converse().canonical_form(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub psd: PsdOutcome,
    /// `(G, slack(G))` for every `G ∈ 𝒪_N` in enumeration order.
    pub slack: Vec<(Orgraph, Rational)>,
    pub min_slack: Rational,
    /// Host attaining the minimum slack (first in enumeration order).
    pub argmin: Orgraph,
    /// `max_G (p(target, G) + Σ Q_ij c_ij(G))`: the bound `Q` really proves.
    pub implied_bound: Rational,
    pub claimed_bound_ok: bool,
}

impl VerificationReport {
    pub fn psd_ok(&self) -> bool {
        self.psd.is_psd()
    }

    pub fn slack_of(&self, g: &Orgraph) -> Option<&Rational> {
        let canon = g.canonical_form();
        self.slack.iter().find(|(h, _)| *h == canon).map(|(_, s)| s)
    }
}

pub fn verify(cert: &Certificate) -> Result<VerificationReport> {
    cert.validate()?;
    let table = cert.product_table()?;
    verify_with_table(cert, &table)
}

/// Verification against a precomputed product table for the same flags.
pub fn verify_with_table(cert: &Certificate, table: &ProductTable) -> Result<VerificationReport> {
    cert.validate()?;
    if table.flags() != cert.flags.as_slice() || table.host_order() != cert.host_order {
        return Err(Error::Dimension("product table does not match certificate flags".into()));
    }
    let psd = psd_check_exact(&cert.q)?;
    let mut slack = Vec::with_capacity(table.graphs().len());
    let mut implied: Option<Rational> = None;
    for (gi, g) in table.graphs().iter().enumerate() {
        let lhs = induced_density(&cert.target, g)? + table.quadratic(gi, &cert.q);
        slack.push((*g, &cert.bound - &lhs));
        if implied.as_ref().is_none_or(|m| lhs > *m) {
            implied = Some(lhs);
        }
    }
    let (argmin, min_slack) = slack
        .iter()
        .fold(None::<&(Orgraph, Rational)>, |best, cur| match best {
            Some(b) if b.1 <= cur.1 => Some(b),
            _ => Some(cur),
        })
        .cloned()
        .expect("at least one host graph");
    let claimed_bound_ok = psd.is_psd() && !min_slack.is_negative();
    Ok(VerificationReport {
        psd,
        slack,
        min_slack,
        argmin,
        implied_bound: implied.expect("at least one host graph"),
        claimed_bound_ok,
    })
}

/// On-disk certificate (JSON). Rationals are `"p/q"` strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CertificateFile {
    pub type_order: usize,
    pub type_edges: Vec<u8>,
    pub flags: Vec<String>,
    pub matrix: Vec<Vec<i64>>,
    pub scale: String,
    pub target: String,
    pub bound: String,
    pub host_order: usize,
}

impl CertificateFile {
    pub fn from_certificate(cert: &Certificate) -> Result<Self> {
        let (scale, rows) = factor_scale(&cert.q);
        let matrix = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().ok_or_else(|| Error::Parse(format!("matrix entry {x} exceeds 64 bits"))))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(CertificateFile {
            type_order: cert.sigma.order(),
            type_edges: cert.sigma.graph().digits(),
            flags: cert.flags.iter().map(Flag::to_string).collect(),
            matrix,
            scale: format_ratio(&scale),
            target: cert.target.encoding(),
            bound: format_ratio(&cert.bound),
            host_order: cert.host_order,
        })
    }

    pub fn to_certificate(&self) -> Result<Certificate> {
        let k = self.type_order;
        let sigma = TypeSigma::new(
            Orgraph::from_digits(k, &self.type_edges).map_err(|e| Error::Parse(format!("type_edges: {e}")))?,
        );
        let flags = self
            .flags
            .iter()
            .enumerate()
            .map(|(i, s)| Flag::parse_canonical(s).map_err(|e| Error::Parse(format!("flags[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let target: Orgraph = self.target.parse().map_err(|e| Error::Parse(format!("target: {e}")))?;
        if !target.is_canonical() {
            return Err(Error::Parse(format!(
                "target: {} is not canonical (expected {})",
                self.target,
                target.canonical_form()
            )));
        }
        if self.matrix.len() != flags.len() {
            return Err(Error::Dimension(format!(
                "{} flags but {} matrix rows",
                flags.len(),
                self.matrix.len()
            )));
        }
        let scale = parse_rational(&self.scale).map_err(|e| Error::Parse(format!("scale: {e}")))?;
        let rows: Vec<Vec<BigInt>> = self.matrix.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let q = from_scaled_ints(&scale, &rows)?;
        let bound = parse_rational(&self.bound).map_err(|e| Error::Parse(format!("bound: {e}")))?;
        Certificate::new(sigma, flags, q, target, bound, self.host_order)
    }
}

/// Pretty JSON with one matrix row per line.
pub fn certificate_to_json(cert: &Certificate) -> Result<String> {
    let file = CertificateFile::from_certificate(cert)?;
    let rows = file
        .matrix
        .iter()
        .map(|r| serde_json::to_string(r).map(|s| format!("    {s}")))
        .collect::<Result<Vec<_>, _>>()?;
    let flags = file
        .flags
        .iter()
        .map(|f| serde_json::to_string(f).map(|s| format!("    {s}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(format!(
        "{{\n  \"type_order\": {},\n  \"type_edges\": {},\n  \"flags\": [\n{}\n  ],\n  \"matrix\": [\n{}\n  ],\n  \"scale\": {},\n  \"target\": {},\n  \"bound\": {},\n  \"host_order\": {}\n}}",
        file.type_order,
        serde_json::to_string(&file.type_edges)?,
        flags.join(",\n"),
        rows.join(",\n"),
        serde_json::to_string(&file.scale)?,
        serde_json::to_string(&file.target)?,
        serde_json::to_string(&file.bound)?,
        file.host_order
    ))
}

pub fn certificate_from_json(text: &str) -> Result<Certificate> {
    let file: CertificateFile = serde_json::from_str(text)?;
    file.to_certificate()
}

pub fn save_certificate(cert: &Certificate, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, certificate_to_json(cert)? + "\n")?;
    Ok(())
}

pub fn load_certificate(path: impl AsRef<Path>) -> Result<Certificate> {
    certificate_from_json(&std::fs::read_to_string(path)?)
}

/// Names accepted by [`builtin_certificate`].
pub const BUILTIN_CERTIFICATES: [&str; 7] = ["p3", "c4", "k12", "k2e1", "p3-sdp", "c4-sdp", "k12-sdp"];

/// The bundled certificates: `p3`, `c4`, `k12` over the fifteen type-1
/// flags on three vertices with hosts of order 5, and the order-3 `k2e1`
/// certificate over the three type-1 flags on two vertices.
///
/// `p3-sdp`, `c4-sdp`, `k12-sdp` claim the same three bounds with matrices
/// obtained by rounding an interior-point solution of the exported problem.
pub fn builtin_certificate(name: &str) -> Option<Certificate> {
    let bundled = |text: &str, target: Orgraph, bound: Rational| {
        let q = parse_matrix_text(text).expect("bundled matrix parses");
        Certificate::new(TypeSigma::one(), f1_order3(), q, target, bound, 5).expect("bundled certificate is well formed")
    };
    Some(match name {
        "p3" => bundled(MATRIX_A, named::p3(), rat(4446, 10_000)),
        "c4" => bundled(MATRIX_B, named::c4(), rat(1104, 10_000)),
        "k12" => bundled(MATRIX_C, named::k12(), rat(4644, 10_000)),
        "k2e1" => {
            let basis = enumerate_flags(TypeSigma::one(), 2).expect("order 2 basis");
            let pattern = [[1, -1, -1], [-1, 1, 1], [-1, 1, 1]];
            let rows = pattern.iter().map(|r| r.iter().map(|&x| int(x) * rat(3, 4)).collect()).collect();
            let q = Matrix::from_rows(rows).expect("square");
            Certificate::new(TypeSigma::one(), basis.flags().to_vec(), q, named::k2e1(), rat(3, 4), 3)
                .expect("well formed")
        }
        "p3-sdp" => certificate_from_json(P3_SDP).expect("bundled certificate parses"),
        "c4-sdp" => certificate_from_json(C4_SDP).expect("bundled certificate parses"),
        "k12-sdp" => certificate_from_json(K12_SDP).expect("bundled certificate parses"),
        _ => return None,
    })
}

/// Converse index permutation of the conventional fifteen-flag list:
/// flag `i` reversed is flag `CONVERSE_PERMUTATION[i]`.
pub const CONVERSE_PERMUTATION: [usize; 15] = [0, 9, 10, 11, 4, 5, 6, 13, 12, 1, 2, 3, 8, 7, 14];

/// `true` iff every slack is zero-or-positive and identical on both sides of
/// a host bijection; used by the covariance checks.
pub fn same_slacks(a: &VerificationReport, b: &VerificationReport) -> bool {
    a.slack.len() == b.slack.len() && a.slack.iter().zip(&b.slack).all(|(x, y)| x == y)
}

/// One displayed averaging identity: `factor · ⟦F_i F_j⟧₁` against its
/// expected expansion over `𝒪₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub computed: Vec<(Orgraph, Rational)>,
    pub expected: Vec<(Orgraph, Rational)>,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.computed == self.expected
    }
}

/// Outcome of the order-3 worked example (P₃ ≤ 4/7 and C₃ ≤ 1/4).
#[derive(Clone, Debug, PartialEq)]
pub struct Example3Report {
    pub identities: Vec<IdentityCheck>,
    /// Coefficients of `1 − ⟦g₀²⟧ − (3/2)⟦g₁²⟧ − (3/2)⟦g₂²⟧ − P₃ − C₃` over `𝒪₃`.
    pub inequality_slack: Vec<(Orgraph, Rational)>,
    /// `(c₀, c₁, c₂)` of the bounding quadratic `c₀ + c₁ρ + c₂ρ²`.
    pub quadratic: [Rational; 3],
    pub argmax: Rational,
    pub max_value: Rational,
    pub value_at_one: Rational,
    pub note: &'static str,
}

impl Example3Report {
    pub fn ok(&self) -> bool {
        self.identities.iter().all(IdentityCheck::holds)
            && self.inequality_slack.iter().all(|(_, s)| !s.is_negative())
            && self.argmax == rat(4, 7)
            && self.max_value == rat(4, 7)
            && self.value_at_one == rat(1, 4)
    }
}

/// Replays the order-3 example: the three averaging identities from the
/// product table, the coefficient-wise inequality, and the scalar step.
///
/// The scalar step bounds `⟦g²⟧ ≥ ⟦g⟧²`, which is a statement about limits
/// and is taken as given here; only the resulting quadratic is evaluated.
pub fn verify_example_order3() -> Result<Example3Report> {
    let basis = enumerate_flags(TypeSigma::one(), 2)?;
    let table = ProductTable::new(basis.flags(), 3)?;
    let graphs = table.graphs();
    let g = |s: &str| s.parse::<Orgraph>().expect("literal").canonical_form();
    let expansion = |i: usize, factor: Rational| -> Vec<(Orgraph, Rational)> {
        (0..graphs.len())
            .map(|gi| (graphs[gi], table.coefficient(gi, i, i) * &factor))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    };
    let sorted = |mut v: Vec<(Orgraph, Rational)>| {
        v.sort();
        v
    };
    let (tt3, k12, k21) = (named::tt3(), named::k12().canonical_form(), named::k21().canonical_form());
    let identities = vec![
        IdentityCheck {
            name: "non-edge squared",
            computed: expansion(0, int(1)),
            expected: sorted(vec![(g("3:000"), int(1)), (named::k2e1().canonical_form(), rat(1, 3))]),
        },
        IdentityCheck {
            name: "3/2 out-edge squared",
            computed: expansion(1, rat(3, 2)),
            expected: sorted(vec![(k12, rat(1, 2)), (tt3.canonical_form(), rat(1, 2))]),
        },
        IdentityCheck {
            name: "3/2 in-edge squared",
            computed: expansion(2, rat(3, 2)),
            expected: sorted(vec![(k21, rat(1, 2)), (tt3.canonical_form(), rat(1, 2))]),
        },
    ];
    let weights = [int(1), rat(3, 2), rat(3, 2)];
    let lhs = [named::p3().canonical_form(), named::c3().canonical_form()];
    let inequality_slack = (0..graphs.len())
        .map(|gi| {
            let mut s = int(1);
            for (i, w) in weights.iter().enumerate() {
                s -= table.coefficient(gi, i, i) * w;
            }
            if lhs.contains(&graphs[gi]) {
                s -= int(1);
            }
            (graphs[gi], s)
        })
        .collect();
    // ⟦g₀⟧ = q₀(1 − ρ) and ⟦g_i⟧ = q_i ρ for the edge flags
    let q: Vec<Rational> = basis.flags().iter().map(averaging_coefficient).collect();
    let w0 = &weights[0] * &q[0] * &q[0];
    let c0 = int(1) - &w0;
    let c1 = &w0 * int(2);
    let c2 = -(w0 + &weights[1] * &q[1] * &q[1] + &weights[2] * &q[2] * &q[2]);
    let argmax = (-&c1 / (&c2 * int(2))).clamp(int(0), int(1));
    let at = |x: &Rational| &c0 + &c1 * x + &c2 * x * x;
    Ok(Example3Report {
        identities,
        inequality_slack,
        max_value: at(&argmax),
        value_at_one: at(&int(1)),
        argmax,
        quadratic: [c0, c1, c2],
        note: "ρ = 4/7 maximizes the upper-bounding quadratic; it is not a minimizer",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orgraph::enumerate_orgraphs;

    #[test]
    fn zero_matrix_bounds_trivially() {
        let basis = enumerate_flags(TypeSigma::one(), 2).unwrap();
        let cert = Certificate::new(TypeSigma::one(), basis.flags().to_vec(), Matrix::zeros(3), named::p3(), int(1), 3)
            .unwrap();
        let rep = verify(&cert).unwrap();
        assert!(rep.claimed_bound_ok);
        assert_eq!(rep.min_slack, int(0));
        assert_eq!(rep.argmin, named::p3().canonical_form());
        assert_eq!(rep.implied_bound, int(1));
    }

    #[test]
    fn example_two_certificate() {
        let rep = verify(&builtin_certificate("k2e1").unwrap()).unwrap();
        assert!(rep.psd_ok());
        assert!(rep.claimed_bound_ok);
        assert_eq!(rep.slack.len(), 7);
    }

    #[test]
    fn order_three_example() {
        let rep = verify_example_order3().unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.quadratic, [int(0), int(2), rat(-7, 4)]);
        let k2e1 = named::k2e1().canonical_form();
        assert_eq!(rep.identities[0].computed.iter().find(|(g, _)| *g == k2e1).unwrap().1, rat(1, 3));
        // slack is 2/3 on K₂∪E₁ and 1/2 on each star, zero elsewhere
        let positive: Vec<_> = rep.inequality_slack.iter().filter(|(_, s)| !s.is_zero()).collect();
        assert_eq!(positive.len(), 3);
    }

    #[test]
    fn dimension_errors() {
        let basis = enumerate_flags(TypeSigma::one(), 2).unwrap();
        assert!(matches!(
            Certificate::new(TypeSigma::one(), basis.flags().to_vec(), Matrix::zeros(2), named::p3(), int(1), 3),
            Err(Error::Dimension(_))
        ));
        assert!(Certificate::new(TypeSigma::one(), basis.flags().to_vec(), Matrix::zeros(3), named::c4(), int(1), 3)
            .is_err());
        assert!(Certificate::new(TypeSigma::one(), f1_order3(), Matrix::zeros(15), named::p3(), int(1), 4).is_err());
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let cert = builtin_certificate("k2e1").unwrap();
        let json = certificate_to_json(&cert).unwrap();
        assert_eq!(certificate_from_json(&json).unwrap(), cert);
        let mut file: CertificateFile = serde_json::from_str(&json).unwrap();
        file.flags[1] = "1;2:2;2".into();
        let err = certificate_from_json(&serde_json::to_string(&file).unwrap()).unwrap_err();
        assert!(err.to_string().contains("flags[1]"), "{err}");
        let mut file: CertificateFile = serde_json::from_str(&json).unwrap();
        file.target = "3:100".into();
        let err = certificate_from_json(&serde_json::to_string(&file).unwrap()).unwrap_err();
        assert!(err.to_string().contains("target"), "{err}");
        let mut file: CertificateFile = serde_json::from_str(&json).unwrap();
        file.flags.pop();
        assert!(matches!(
            certificate_from_json(&serde_json::to_string(&file).unwrap()),
            Err(Error::Dimension(_))
        ));
        assert!(certificate_from_json("{").is_err());
    }

    #[test]
    fn bound_shift_moves_every_slack() {
        let cert = builtin_certificate("k2e1").unwrap();
        let mut shifted = cert.clone();
        shifted.bound = &cert.bound + rat(1, 100);
        let (a, b) = (verify(&cert).unwrap(), verify(&shifted).unwrap());
        for ((g, s), (h, t)) in a.slack.iter().zip(&b.slack) {
            assert_eq!(g, h);
            assert_eq!(t - s, rat(1, 100));
        }
        assert_eq!(a.implied_bound, b.implied_bound);
        assert_eq!(enumerate_orgraphs(3).unwrap().len(), a.slack.len());
        assert!(!a.min_slack.is_negative());
    }
}
