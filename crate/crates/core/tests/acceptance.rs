//! Acceptance suite: one test per criterion, sharing one set of artifacts
//! (exact tables, million-draw limit samples, and the large Monte Carlo
//! runs). Expect a few minutes of wall time on first touch.
//!
//! Three checks are kept faithful to their stated targets and are expected
//! to fail, because the targets themselves are contradicted by the math
//! they are meant to verify:
//!
//! * criteria 04 and 05 test the winning probability against
//!   (3 arccos(1/4) - pi)/(4 pi) ≈ 0.0647, but the limit variable is the
//!   max of three exchangeable Gaussians with correlation +1/4, whose
//!   orthant probability is 1/8 + (3/4 pi) arcsin(1/4) ≈ 0.1853; five
//!   structurally different samplers and the game simulation itself agree
//!   on 0.185 (pairwise KS <= 0.0017, sim-vs-sampler KS <= 0.005);
//! * criterion 08 tests P(S_n <= n^0.4) against 1/3 +- 0.02 at n = 10^4,
//!   but the positive part of the rock-opening limit has density ~0.163 at
//!   0+, so that threshold necessarily captures ~0.065 of continuous mass
//!   on top of the atom; the exact sampler evaluated at the same threshold
//!   is printed alongside (it sits ~0.40, within 0.003 of the simulation).
//!
//! The companion `invariant_erock_positive_part` shows simulation and
//! limit law agreeing where the distributional claim is well-posed.

use std::sync::LazyLock;

use srps::verify::{self, Artifacts, CheckOutcome, SuiteParams};

const SEED: u64 = 0x5259_5053;

static PARAMS: LazyLock<SuiteParams> = LazyLock::new(SuiteParams::full);
static ARTIFACTS: LazyLock<Artifacts> = LazyLock::new(|| Artifacts::compute(&PARAMS, SEED));

fn check(criterion: fn(&Artifacts, &SuiteParams) -> CheckOutcome) {
    let outcome = criterion(&ARTIFACTS, &PARAMS);
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_exact_value_curve() {
    check(verify::exact_value_curve);
}

#[test]
fn criterion_02_oracle_equivalence() {
    check(verify::oracle_equivalence);
}

#[test]
fn criterion_03_small_state_brute_force() {
    check(verify::small_state_brute_force);
}

#[test]
fn criterion_04_limit_law_constants() {
    check(verify::limit_law_constants);
}

#[test]
fn criterion_05_greedy_convergence() {
    check(verify::greedy_convergence);
}

#[test]
fn criterion_06_phase_identity() {
    check(verify::phase_identity);
}

#[test]
fn criterion_07_cyclic_example() {
    check(verify::cyclic_example);
}

#[test]
fn criterion_08_rock_opening_example() {
    check(verify::rock_opening_example);
}

#[test]
fn criterion_09_l1_residual_scaling() {
    check(verify::l1_residual_scaling);
}

#[test]
fn criterion_10_t1_scaling_oracle() {
    check(verify::t1_scaling_oracle);
}

#[test]
fn invariant_erock_positive_part() {
    check(verify::erock_positive_part_agreement);
}
