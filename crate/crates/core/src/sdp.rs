//! Bridge to external SDP solvers: SDPA export, solution ingestion, and
//! rounding a numerical solution into an exactly verified certificate.
//!
//! The SDPA variable vector is `x = (b, Q_00, Q_01, …, Q_{d−1,d−1})` with the
//! upper triangle of `Q` in row-major order. Block 1 is `Q` itself; block 2 is
//! diagonal with entry `b − t_G − Σ_ij Q_ij c_ij(G)` for every host `G`.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::Zero;
use rayon::prelude::*;

use crate::certificate::{verify_with_table, Certificate, VerificationReport};
use crate::error::{Error, Result};
use crate::flag::{enumerate_flags, Flag, TypeSigma};
use crate::linalg::{rationalize, Matrix, PsdOutcome};
use crate::orgraph::{induced_density, Orgraph};
use crate::product::ProductTable;
use crate::scalar::{ceil_with_bounded_denominator, format_sig, int, parse_rational, Rational};

/// Significant digits used for SDPA coefficients.
pub const SDPA_DIGITS: usize = 17;

/// Largest denominator considered when choosing the bound after rounding.
pub const BOUND_DENOMINATOR: u64 = 10_000;

const MAGIC: &str = "* flagcert sdp problem v1";

#[derive(Clone, Debug)]
pub struct SdpProblem {
    target: Orgraph,
    table: ProductTable,
    densities: Vec<Rational>,
}

impl SdpProblem {
    /// Problem over all σ-flags of order `flag_order` (the conventional
    /// fifteen-flag order for type 1, order 3).
    pub fn build(target: &Orgraph, sigma: TypeSigma, flag_order: usize, host_order: usize) -> Result<Self> {
        let basis = enumerate_flags(sigma, flag_order)?;
        SdpProblem::from_flags(target, basis.flags(), host_order)
    }

    pub fn from_flags(target: &Orgraph, flags: &[Flag], host_order: usize) -> Result<Self> {
        if target.order() > host_order {
            return Err(Error::SizeMismatch(format!(
                "target order {} exceeds host order {host_order}",
                target.order()
            )));
        }
        let table = ProductTable::new(flags, host_order)?;
        let target = target.canonical_form();
        let densities = table
            .graphs()
            .par_iter()
            .map(|g| induced_density(&target, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(SdpProblem { target, table, densities })
    }

    pub fn target(&self) -> &Orgraph {
        &self.target
    }

    pub fn flags(&self) -> &[Flag] {
        self.table.flags()
    }

    pub fn sigma(&self) -> TypeSigma {
        self.table.sigma()
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn host_order(&self) -> usize {
        self.table.host_order()
    }

    pub fn graphs(&self) -> &[Orgraph] {
        self.table.graphs()
    }

    pub fn table(&self) -> &ProductTable {
        &self.table
    }

    /// `t_G` for graph index `g`.
    pub fn target_density(&self, g: usize) -> &Rational {
        &self.densities[g]
    }

    /// Number of SDPA variables: `1 + d(d+1)/2`.
    pub fn variables(&self) -> usize {
        let d = self.dim();
        1 + d * (d + 1) / 2
    }

    /// `max_G (t_G + Σ Q_ij c_ij(G))` for a fixed `Q`.
    pub fn implied_bound(&self, q: &Matrix<Rational>) -> Rational {
        (0..self.graphs().len())
            .into_par_iter()
            .map(|g| &self.densities[g] + self.table.quadratic(g, q))
            .max()
            .expect("at least one host graph")
    }

    /// Certificate for `Q` with an explicit bound.
    pub fn certificate(&self, q: Matrix<Rational>, bound: Rational) -> Result<Certificate> {
        Certificate::new(self.sigma(), self.flags().to_vec(), q, self.target, bound, self.host_order())
    }

    /// SDPA sparse text.
    pub fn to_sdpa(&self) -> String {
        let d = self.dim();
        let graphs = self.graphs();
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "* target {}", self.target).unwrap();
        writeln!(out, "* host_order {}", self.host_order()).unwrap();
        let flags: Vec<String> = self.flags().iter().map(Flag::to_string).collect();
        writeln!(out, "* flags {}", flags.join(" ")).unwrap();
        writeln!(out, "* variables: b, then Q(i,j) for i <= j in row-major order").unwrap();
        writeln!(out, "{}", self.variables()).unwrap();
        writeln!(out, "2").unwrap();
        writeln!(out, "{} -{}", d, graphs.len()).unwrap();
        let mut objective = vec!["0".to_string(); self.variables()];
        objective[0] = "1".into();
        writeln!(out, "{}", objective.join(" ")).unwrap();
        for e in self.entries() {
            writeln!(out, "{} {} {} {} {}", e.0, e.1, e.2, e.3, format_sig(&e.4, SDPA_DIGITS)).unwrap();
        }
        out
    }

    /// Nonzero SDPA entries `(matno, block, i, j, value)`, 1-based indices.
    fn entries(&self) -> Vec<(usize, usize, usize, usize, Rational)> {
        let d = self.dim();
        let n = self.graphs().len();
        let mut out = Vec::new();
        for (g, t) in self.densities.iter().enumerate() {
            if !t.is_zero() {
                out.push((0, 2, g + 1, g + 1, t.clone()));
            }
        }
        for g in 0..n {
            out.push((1, 2, g + 1, g + 1, int(1)));
        }
        let mut matno = 2;
        for i in 0..d {
            for j in i..d {
                out.push((matno, 1, i + 1, j + 1, int(1)));
                for g in 0..n {
                    let c = self.table.coefficient(g, i, j);
                    if !c.is_zero() {
                        let v = if i == j { -c } else { -c * int(2) };
                        out.push((matno, 2, g + 1, g + 1, v));
                    }
                }
                matno += 1;
            }
        }
        out
    }

    pub fn export_sdpa(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_sdpa())?;
        Ok(())
    }

    /// Parses SDPA text written by [`SdpProblem::to_sdpa`], rebuilds the
    /// problem from its header, and checks that every coefficient matches.
    pub fn from_sdpa(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MAGIC) {
            return Err(Error::Parse("missing flagcert SDPA header".into()));
        }
        let mut target = None;
        let mut host_order = None;
        let mut flags = None;
        let mut body = Vec::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("* target ") {
                target = Some(rest.trim().parse::<Orgraph>()?);
            } else if let Some(rest) = line.strip_prefix("* host_order ") {
                host_order = Some(rest.trim().parse::<usize>().map_err(|e| Error::Parse(format!("host_order: {e}")))?);
            } else if let Some(rest) = line.strip_prefix("* flags ") {
                flags = Some(rest.split_whitespace().map(Flag::parse_canonical).collect::<Result<Vec<_>>>()?);
            } else if line.starts_with('*') || line.starts_with('"') {
                continue;
            } else {
                body.push(line);
            }
        }
        let (Some(target), Some(host_order), Some(flags)) = (target, host_order, flags) else {
            return Err(Error::Parse("SDPA header lacks target, host_order or flags".into()));
        };
        let problem = SdpProblem::from_flags(&target, &flags, host_order)?;
        let d = problem.dim();
        let n = problem.graphs().len();
        let mut body = body.into_iter();
        let mut next = |what: &str| body.next().ok_or_else(|| Error::Parse(format!("SDPA file ends before {what}")));
        let expect = |what: &str, got: &str, want: String| -> Result<()> {
            if got.split_whitespace().collect::<Vec<_>>() == want.split_whitespace().collect::<Vec<_>>() {
                Ok(())
            } else {
                Err(Error::Parse(format!("{what}: expected `{want}`, found `{got}`")))
            }
        };
        expect("mDIM", next("mDIM")?, problem.variables().to_string())?;
        expect("nBLOCK", next("nBLOCK")?, "2".into())?;
        expect("blockStruct", next("blockStruct")?, format!("{d} -{n}"))?;
        let mut objective = vec!["0".to_string(); problem.variables()];
        objective[0] = "1".into();
        expect("objective", next("objective")?, objective.join(" "))?;
        let expected = problem.entries();
        let mut seen = 0usize;
        for e in &expected {
            let line = next("all entries")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("malformed entry line `{line}`")));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad index in `{line}`")));
            let key = (idx(fields[0])?, idx(fields[1])?, idx(fields[2])?, idx(fields[3])?);
            if key != (e.0, e.1, e.2, e.3) {
                return Err(Error::Parse(format!("entry {seen}: unexpected position in `{line}`")));
            }
            let value = parse_rational(fields[4])?;
            if format_sig(&value, SDPA_DIGITS) != format_sig(&e.4, SDPA_DIGITS) {
                return Err(Error::Parse(format!("entry {seen}: value {} differs from {}", fields[4], format_sig(&e.4, SDPA_DIGITS))));
            }
            seen += 1;
        }
        if let Ok(extra) = next("") {
            return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
        }
        Ok(problem)
    }

    pub fn import_sdpa(path: impl AsRef<Path>) -> Result<Self> {
        SdpProblem::from_sdpa(&std::fs::read_to_string(path)?)
    }
}

/// A numerical solution: `d` rows of `Q`, then `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericalSolution {
    pub q: Vec<Vec<f64>>,
    pub b: f64,
}

impl NumericalSolution {
    /// Reads `d` lines of `d` numbers followed by one line holding `b`.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .enumerate()
            .map(|(i, l)| {
                l.split_whitespace()
                    .map(|x| x.parse::<f64>().map_err(|_| Error::Parse(format!("solution line {}: bad number {x:?}", i + 1))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let Some((last, q)) = rows.split_last() else {
            return Err(Error::Parse("empty solution".into()));
        };
        if last.len() != 1 {
            return Err(Error::Parse("solution must end with a line holding b".into()));
        }
        let d = q.len();
        if let Some(i) = q.iter().position(|r| r.len() != d) {
            return Err(Error::Dimension(format!("solution row {} has {} entries, expected {d}", i + 1, q[i].len())));
        }
        Ok(NumericalSolution { q: q.to_vec(), b: last[0] })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        NumericalSolution::parse(&std::fs::read_to_string(path)?)
    }

    /// Decimal dump of an exact matrix, 17 significant digits per entry.
    pub fn format(q: &Matrix<Rational>, b: &Rational) -> String {
        let mut out = String::new();
        for row in q.rows() {
            let cells: Vec<String> = row.iter().map(|x| format_sig(x, SDPA_DIGITS)).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
        writeln!(out, "{}", format_sig(b, SDPA_DIGITS)).unwrap();
        out
    }
}

/// What happened at one rounding denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundAttempt {
    pub denominator: u64,
    pub psd: PsdOutcome,
    /// `max_G (t_G + ⟨C_G, Q_D⟩)` for the rounded matrix.
    pub implied_bound: Rational,
    /// Bound chosen for the certificate: the least rational with denominator
    /// at most [`BOUND_DENOMINATOR`] not below `implied_bound`.
    pub bound: Rational,
    /// Smallest slack against `bound`.
    pub min_slack: Rational,
}

#[derive(Clone, Debug)]
pub enum RoundOutcome {
    Certified {
        certificate: Certificate,
        report: VerificationReport,
        denominator: u64,
        attempts: Vec<RoundAttempt>,
    },
    Failed {
        attempts: Vec<RoundAttempt>,
    },
}

impl RoundOutcome {
    pub fn attempts(&self) -> &[RoundAttempt] {
        match self {
            RoundOutcome::Certified { attempts, .. } | RoundOutcome::Failed { attempts } => attempts,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            RoundOutcome::Certified { certificate, .. } => Some(certificate),
            RoundOutcome::Failed { .. } => None,
        }
    }
}

/// Tries each denominator in ascending order and returns the first rounded
/// matrix that verifies. The solver's `b` is not trusted; the bound is
/// recomputed from the rounded matrix, so only the PSD check can fail.
pub fn round_and_verify(problem: &SdpProblem, solution: &NumericalSolution, denominators: &[u64]) -> Result<RoundOutcome> {
    let d = problem.dim();
    if solution.q.len() != d {
        return Err(Error::Dimension(format!("solution is {}x{}, problem needs {d}x{d}", solution.q.len(), solution.q.len())));
    }
    let mut dens = denominators.to_vec();
    dens.sort_unstable();
    dens.dedup();
    if dens.first() == Some(&0) {
        return Err(Error::Parse("denominators must be positive".into()));
    }
    let mut attempts = Vec::new();
    for den in dens {
        let q = rationalize(&solution.q, den)?;
        let implied = problem.implied_bound(&q);
        let bound = ceil_with_bounded_denominator(&implied, BOUND_DENOMINATOR);
        let cert = problem.certificate(q, bound.clone())?;
        let report = verify_with_table(&cert, problem.table())?;
        attempts.push(RoundAttempt {
            denominator: den,
            psd: report.psd.clone(),
            implied_bound: implied,
            bound,
            min_slack: report.min_slack.clone(),
        });
        if report.claimed_bound_ok {
            return Ok(RoundOutcome::Certified { certificate: cert, report, denominator: den, attempts });
        }
    }
    Ok(RoundOutcome::Failed { attempts })
}
