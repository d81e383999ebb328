//! Cross-module ordering of the certified fidelity bounds.
//!
//! For the distance-one permutation-invariant code the closed-form bound
//! from the perturbed block data, the per-effect eigenvalue floor, and the
//! worst-case search must respect
//! `closed form <= worst case <= F(rho)` and `floor / (1 + eta) <= F(rho)`
//! for every density on the code.

use adcert_core::channels::truncated_kraus_set;
use adcert_core::code_space::{as_code_space, build_pi_code, CodeSpace};
use adcert_core::fidelity::{
    fidelity_form, worst_case_fidelity, ChannelSumPath, FidelityForm, DEFAULT_MAX_ITERATIONS,
    DEFAULT_STATIONARITY_TOL,
};
use adcert_core::perturbed_kl::{
    diagonalize_gram, fidelity_lower_bound, gram_blocks_sparse, kl_report,
};
use adcert_core::recovery::{
    build_truncated_recovery, leung_lower_bound, trace_bound_check, DensityOnCode, EffectFamily,
    RecoveryMap, DEFAULT_RANK_TOL,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Pipeline {
    space: CodeSpace,
    recovery: RecoveryMap,
    form: FidelityForm,
    closed_form_bound: f64,
}

fn t1_pipeline(gamma: f64) -> Pipeline {
    let code = build_pi_code(1).unwrap();
    let space = as_code_space(&code).unwrap();
    let omega = truncated_kraus_set(space.qubits(), 1, gamma).unwrap();
    let table = gram_blocks_sparse(&space, &omega).unwrap();
    let report = kl_report(&table).unwrap();
    let closed_form_bound = fidelity_lower_bound(&report).unwrap().value;
    let diag = diagonalize_gram(&table, &report).unwrap();
    let family = EffectFamily::diagonalized(omega, &diag).unwrap();
    let recovery = build_truncated_recovery(&space, &family, DEFAULT_RANK_TOL).unwrap();
    let form = fidelity_form(&space, &family, &recovery, ChannelSumPath::OrbitGrouped).unwrap();
    Pipeline {
        space,
        recovery,
        form,
        closed_form_bound,
    }
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOnCode {
    let x = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut rho = &x * x.adjoint();
    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    rho /= Complex64::new(trace, 0.0);
    DensityOnCode::new(rho).unwrap()
}

#[test]
fn closed_form_bound_stays_below_worst_case() {
    for gamma in [0.01, 0.1] {
        let p = t1_pipeline(gamma);
        let wc =
            worst_case_fidelity(&p.form, DEFAULT_STATIONARITY_TOL, DEFAULT_MAX_ITERATIONS).unwrap();
        assert!(
            p.closed_form_bound <= wc.value + 1e-9,
            "gamma {gamma}: bound {} above worst case {}",
            p.closed_form_bound,
            wc.value
        );
        // Weak at large gamma, where the smallest block eigenvalue inflates
        // the denominator, but never vacuous on this grid.
        assert!(p.closed_form_bound > 0.0);
    }
}

#[test]
fn eigenvalue_floor_stays_below_every_fidelity() {
    let p = t1_pipeline(0.01);
    let floor = leung_lower_bound(&p.recovery) / (1.0 + p.recovery.eta());
    let wc =
        worst_case_fidelity(&p.form, DEFAULT_STATIONARITY_TOL, DEFAULT_MAX_ITERATIONS).unwrap();
    assert!(floor <= wc.value + 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..25 {
        let rho = random_density(&mut rng, p.space.dim());
        let f = p.form.evaluate(&rho);
        assert!(floor <= f + 1e-9, "floor {floor} above fidelity {f}");
        assert!(wc.value <= f + 1e-9, "worst case above a feasible point");
    }
}

#[test]
fn recovery_trace_norm_respects_its_budget() {
    for gamma in [0.01, 0.1] {
        let p = t1_pipeline(gamma);
        let norm = trace_bound_check(&p.recovery).unwrap();
        assert!(norm <= 1.0 + p.recovery.eta() + 1e-10);
    }
}
