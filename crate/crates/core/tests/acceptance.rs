//! Acceptance gate: every headline guarantee of the toolkit, run at its
//! stated tolerance with one pass/fail line per criterion
//! (`cargo test --test acceptance -- --nocapture` shows all lines).

use std::time::Instant;

use qmarkov::report::{CheckResult, SuiteConfig};
use qmarkov::suites;

fn announce(criterion: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] {criterion}: {detail}");
    assert!(passed, "[{tag}] {criterion}: {detail}");
}

fn worst(checks: &[CheckResult]) -> f64 {
    checks
        .iter()
        .map(|c| c.residual)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn default_cfg() -> SuiteConfig {
    SuiteConfig::default()
}

#[test]
fn criterion_1_modular_theory_suite() {
    // 200 random (state, element) pairs per dimension in {2,3,4} at 1e-9,
    // under 10 seconds
    let start = Instant::now();
    let checks = suites::modular_suite(&default_cfg()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let residual = worst(&checks);
    announce(
        "modular-theory suite (KMS condition, group law, automorphism identities)",
        residual <= 1e-9 && elapsed < 10.0,
        &format!("worst residual {residual:.3e}, elapsed {elapsed:.2}s (budget 10s)"),
    );
}

#[test]
fn criterion_2_l2_implementation_contraction() {
    // 200 random sub-unital state-reducing CP maps per dimension: operator
    // norm of the KMS implementation at most 1 + 1e-8
    let checks = suites::cpmap_suite(&default_cfg()).unwrap();
    let contraction = checks
        .iter()
        .find(|c| c.name == "cpmap-implementation-contraction")
        .unwrap();
    announce(
        "KMS L2-implementation contraction bound",
        contraction.residual <= 1e-8,
        &format!("worst norm excess {:.3e}", contraction.residual),
    );
}

#[test]
fn criterion_3_kms_adjoint_pairing_and_involution() {
    let checks = suites::cpmap_suite(&default_cfg()).unwrap();
    let pairing = checks
        .iter()
        .find(|c| c.name == "cpmap-adjoint-pairing")
        .unwrap();
    let involution = checks
        .iter()
        .find(|c| c.name == "cpmap-adjoint-involution")
        .unwrap();
    announce(
        "KMS adjoint pairing identity and involutivity",
        pairing.residual <= 1e-9 && involution.residual <= 1e-8,
        &format!(
            "pairing {:.3e} (tol 1e-9), involution Choi distance {:.3e} (tol 1e-8)",
            pairing.residual, involution.residual
        ),
    );
}

#[test]
fn criterion_4_l2_markov_reconstruction_round_trip() {
    // 100 random KMS-symmetric Markov maps per dimension: reconstruct the
    // map from its implementation within Choi distance 1e-8
    let checks = suites::cpmap_suite(&default_cfg()).unwrap();
    let round_trip = checks
        .iter()
        .find(|c| c.name == "cpmap-reconstruction-round-trip")
        .unwrap();
    announce(
        "L2-Markov operator reconstruction round trip",
        round_trip.residual <= 1e-8,
        &format!("worst Choi distance {:.3e}", round_trip.residual),
    );
}

#[test]
fn criterion_5_markovization_pipeline() {
    // 50 random witness families on non-tracial qubit/qutrit states, under
    // two minutes: outputs unital and state-preserving to 1e-9,
    // KMS-symmetric to 1e-8, test-set residuals within 2x input + 1e-6
    let start = Instant::now();
    let checks = suites::pipeline_suite(&default_cfg(), 50).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let all = checks.iter().all(|c| c.passed);
    let summary: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}={:.3e}",
                c.name.trim_start_matches("pipeline-"),
                c.residual
            )
        })
        .collect();
    announce(
        "markovization pipeline on 50 witness families",
        all && elapsed < 120.0,
        &format!(
            "{} | elapsed {elapsed:.1}s (budget 120s)",
            summary.join(", ")
        ),
    );
}

#[test]
fn criterion_6_semigroup_synthesis() {
    // synthesized semigroups: semigroup law at 1e-8 on the 5x5 grid, fix the
    // cyclic vector at 1e-9, sampled invariance of the order interval and
    // cone levels 1..3 with 100 samples, resolvent/semigroup criterion
    // agreement, and the internals diagnostic bound
    let checks = suites::semigroup_suite(&default_cfg()).unwrap();
    let all = checks.iter().all(|c| c.passed);
    let summary: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}={:.3e}",
                c.name.trim_start_matches("semigroup-"),
                c.residual
            )
        })
        .collect();
    announce(
        "Hilbert-space semigroup synthesis",
        all,
        &summary.join(", "),
    );
}

#[test]
fn criterion_7_dirichlet_correspondence() {
    // semigroup <-> form round trip, Markov/KMS-symmetric snapshots at
    // t in {0.5, 1} to 1e-7, Dirichlet conditions with 200 samples at 1e-8
    // including matrix levels 2 and 3, and the mandatory failure of the
    // transpose probe at level 2
    let checks = suites::dirichlet_suite(&default_cfg()).unwrap();
    let all = checks.iter().all(|c| c.passed);
    let summary: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}={:.3e}",
                c.name.trim_start_matches("dirichlet-"),
                c.residual
            )
        })
        .collect();
    announce(
        "Dirichlet-form correspondence and counterexample detection",
        all,
        &summary.join(", "),
    );
}

#[test]
fn criterion_8_free_orthogonal_spectral_numbers() {
    // exact closed form at N = 2 up to s = 200, strict growth and the
    // bounded-deviation window for N in 3..=8, under five seconds
    let start = Instant::now();
    let checks = suites::onplus_suite(&default_cfg()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let all = checks.iter().all(|c| c.passed);
    let summary: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}={:.3e}",
                c.name.trim_start_matches("onplus-"),
                c.residual
            )
        })
        .collect();
    announce(
        "free orthogonal quantum group spectral numbers",
        all && elapsed < 5.0,
        &format!("{} | elapsed {elapsed:.2}s (budget 5s)", summary.join(", ")),
    );
}

#[test]
fn criterion_9_verify_determinism() {
    // two runs of `verify --seed 42` with identical configuration produce
    // byte-identical reports
    let bin = env!("CARGO_BIN_EXE_qmarkov");
    let run = || {
        std::process::Command::new(bin)
            .args(["verify", "--seed", "42", "--samples", "12", "--dims", "2,3"])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let identical = first.stdout == second.stdout;
    announce(
        "verify --seed 42 determinism",
        identical && !first.stdout.is_empty(),
        &format!(
            "two {}-byte reports byte-identical: {identical}",
            first.stdout.len()
        ),
    );
}
