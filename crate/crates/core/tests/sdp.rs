use std::path::PathBuf;

use flagcert::certificate::{
    builtin_certificate, certificate_from_json, certificate_to_json, load_certificate, save_certificate,
    CertificateFile,
};
use flagcert::error::Error;
use flagcert::flag::TypeSigma;
use flagcert::orgraph::named;
use flagcert::scalar::rat;
use flagcert::sdp::{round_and_verify, NumericalSolution, RoundOutcome, SdpProblem};
use flagcert::{psd_check_exact, verify, PsdOutcome};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn p3_problem() -> SdpProblem {
    SdpProblem::build(&named::p3(), TypeSigma::one(), 3, 5).unwrap()
}

#[test]
fn fixture_solution_rounds_to_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.dat-s");
    p3_problem().export_sdpa(&path).unwrap();
    let problem = SdpProblem::import_sdpa(&path).unwrap();
    let solution = NumericalSolution::load(fixture("p3.sol")).unwrap();
    let out = round_and_verify(&problem, &solution, &[10_000]).unwrap();
    let cert = out.certificate().expect("certified");
    assert!(cert.bound <= rat(4446, 10_000));
    assert_eq!(cert.bound, rat(1667, 3750));
    let report = verify(cert).unwrap();
    assert!(report.claimed_bound_ok);
}

#[test]
fn small_perturbation_moves_the_bound_little() {
    let problem = p3_problem();
    let mut solution = NumericalSolution::load(fixture("p3.sol")).unwrap();
    let d = solution.q.len();
    for i in 0..d {
        for j in 0..d {
            solution.q[i][j] += 1e-8 * (((i * 7 + j * 7) % 5) as f64 - 2.0);
        }
    }
    let out = round_and_verify(&problem, &solution, &[10_000]).unwrap();
    let cert = out.certificate().expect("still certified");
    let diff = flagcert::scalar::rational_to_f64(&(cert.bound.clone() - rat(1667, 3750))).abs();
    assert!(diff <= 1e-3, "bound moved by {diff}");
}

#[test]
fn indefinite_solution_is_refuted_with_witness() {
    let problem = p3_problem();
    let mut solution = NumericalSolution::load(fixture("p3.sol")).unwrap();
    solution.q[3][3] = -0.5;
    let out = round_and_verify(&problem, &solution, &[100, 1000]).unwrap();
    let RoundOutcome::Failed { attempts } = out else { panic!("indefinite matrix certified") };
    assert_eq!(attempts.len(), 2);
    for a in attempts {
        let PsdOutcome::NotPsd { witness, value } = &a.psd else { panic!("psd reported") };
        assert!(value < &rat(0, 1));
        assert_eq!(witness.len(), 15);
    }
}

#[test]
fn published_matrices_are_exactly_psd() {
    for name in ["p3", "c4", "k12"] {
        let cert = builtin_certificate(name).unwrap();
        assert!(cert.q.is_symmetric());
        assert!(psd_check_exact(&cert.q).unwrap().is_psd(), "{name}");
    }
}

#[test]
fn sdp_builtins_certify_their_bounds() {
    for (name, bound) in [("p3-sdp", rat(4446, 10_000)), ("c4-sdp", rat(1104, 10_000)), ("k12-sdp", rat(4644, 10_000))] {
        let cert = builtin_certificate(name).unwrap();
        assert_eq!(cert.bound, bound);
        let report = verify(&cert).unwrap();
        assert!(report.claimed_bound_ok, "{name}: implied {}", report.implied_bound);
    }
}

#[test]
fn certificate_file_roundtrip_and_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let cert = builtin_certificate("p3-sdp").unwrap();
    let path = dir.path().join("p3.json");
    save_certificate(&cert, &path).unwrap();
    assert_eq!(load_certificate(&path).unwrap(), cert);

    let perm: Vec<usize> = (0..15).rev().collect();
    let moved = cert.permuted(&perm);
    let text = certificate_to_json(&moved).unwrap();
    let back = certificate_from_json(&text).unwrap();
    assert_eq!(verify(&back).unwrap().slack, verify(&cert).unwrap().slack);
}

#[test]
fn certificate_file_with_fourteen_flags_is_rejected() {
    let cert = builtin_certificate("p3").unwrap();
    let mut file = CertificateFile::from_certificate(&cert).unwrap();
    file.flags.pop();
    match file.to_certificate() {
        Err(Error::Dimension(msg)) => assert!(msg.contains("14 flags"), "{msg}"),
        other => panic!("expected a dimension error, got {other:?}"),
    }
}

#[test]
fn non_canonical_flag_is_reported_with_position() {
    let cert = builtin_certificate("k2e1").unwrap();
    let mut file = CertificateFile::from_certificate(&cert).unwrap();
    file.flags[1] = "1;2:2;2".into();
    let err = file.to_certificate().unwrap_err().to_string();
    assert!(err.contains("flags[1]") && err.contains("not canonical"), "{err}");
}
