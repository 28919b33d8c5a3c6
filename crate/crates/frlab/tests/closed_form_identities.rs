//! Cross-module consistency: the closed forms against the sampler at
//! reduced budget (the full-budget protocol lives in the acceptance suite),
//! and the exact factorisation identities between modules.

use frlab::closed_forms::{log_c2, t_f_theta_delta, t_f_theta_delta_norm};
use frlab::experiments::{verify_identity, IdentityKind};
use frlab::mixed_norm::{mixed_norm_separable, Factor, NormMethod, SeparableFn};
use frlab::operators::{apply_t, Engine, FrParams};
use frlab::sampler::mc_integrate2;
use frlab::space::{ExponentPair, Setting, WeightPair};
use frlab::{ProposalConfig64, SiegelPoint64};

fn worked_setting() -> Setting<f64> {
    Setting::new(
        1,
        ExponentPair::new(2.0, 2.0).unwrap(),
        ExponentPair::new(4.0, 4.0).unwrap(),
        WeightPair::new(0.0, 0.0).unwrap(),
        WeightPair::new(1.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn identity_smoke_key_and_pair() {
    let config = ProposalConfig64::default();
    for kind in [IdentityKind::Key, IdentityKind::Pair] {
        let report = verify_identity::<f64>(kind, 1, &config, 200_000, 7).unwrap();
        assert!(report.pass, "{kind:?}: {:#?}", report.rows);
    }
}

#[test]
fn probe_image_value_cross_checked_by_mc() {
    // the pointwise image of the probe under T at a fixed point, against a
    // direct double-integral estimate
    let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 2.0]);
    let (s, t) = (2.5, 0.5);
    let (theta, delta) = (1.0, 1.0);
    let z = SiegelPoint64::axis(1, 1.0);
    let w = SiegelPoint64::axis(1, 2.0);
    let exact = t_f_theta_delta(&params, s, t, theta, delta, &z, &w)
        .unwrap()
        .unwrap_value();
    let probe = SeparableFn::probe(s, t, theta, delta);
    let config = ProposalConfig64::default();
    let zc = z.clone();
    let wc = w.clone();
    let est = mc_integrate2(
        move |u: &SiegelPoint64, eta: &SiegelPoint64| {
            let k1 = frlab::geometry::cpow(zc.pairing(u), -2.0).unwrap();
            let k2 = frlab::geometry::cpow(wc.pairing(eta), -2.0).unwrap();
            k1 * k2 * probe.eval(u, eta)
        },
        1,
        &config,
        400_000,
        13,
    )
    .unwrap();
    let diff = (est.value - exact).norm();
    assert!(
        diff <= 3.0 * est.stderr,
        "diff = {diff}, sigma = {}",
        est.stderr
    );
}

#[test]
fn image_norm_factorises_through_the_mixed_norm() {
    // |T f| has separable power-kernel factors; the image norm equals the
    // two-kernel constants times their mixed norm
    let setting = worked_setting();
    let params = FrParams::new([0.1, 0.2], [0.0, 0.1], [2.2, 2.4]);
    let (s, t) = (2.5, 0.5);
    let (theta, delta) = (1.7, 0.6);
    let direct = t_f_theta_delta_norm(&setting, &params, s, t, theta, delta).unwrap_value();

    let decay = frlab::closed_forms::image_decay(1, &params, s, t);
    let factors = SeparableFn::new(
        Factor::PowerKernel { t: params.a[0], s: decay[0], anchor: theta, modulus: true },
        Factor::PowerKernel { t: params.a[1], s: decay[1], anchor: delta, modulus: true },
    );
    let config = ProposalConfig64::default();
    let base = mixed_norm_separable(
        &factors,
        1,
        &setting.q,
        &setting.beta,
        NormMethod::Closed,
        &config,
        0,
        0,
    )
    .unwrap()
    .unwrap_value();
    let mut log_const = 0.0;
    for i in 0..2 {
        log_const += frlab::closed_forms::log_c1(1, params.c[i], s, params.b[i] + t).unwrap_value();
    }
    let recomposed = base * log_const.exp();
    assert!(
        (recomposed - direct).abs() / direct < 1e-12,
        "{recomposed} vs {direct}"
    );
}

#[test]
fn separable_input_factorises_apply_t() {
    // T acting on g (x) h splits into two single-slot closed evaluations;
    // check the product structure numerically through the closed engine
    let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 3.0]);
    let f = SeparableFn::new(Factor::probe(0.5, 2.5, 1.0), Factor::probe(0.2, 2.0, 1.5));
    let z = SiegelPoint64::axis(1, 1.0);
    let w = SiegelPoint64::axis(1, 2.0);
    let config = ProposalConfig64::default();
    let full = apply_t(&params, &f, &z, &w, Engine::Closed, &config)
        .unwrap()
        .unwrap_value();
    // slot products computed independently by swapping in a unit factor on
    // the other slot and evaluating at a reference where the unit slot
    // contributes a known constant is awkward; instead verify against the
    // explicit two-kernel formula per slot
    let c1a: f64 = frlab::closed_forms::log_c1(1, 2.0, 2.5, 0.5).unwrap_value();
    let c1b: f64 = frlab::closed_forms::log_c1(1, 3.0, 2.0, 0.2).unwrap_value();
    let d1 = 2.0 + 2.5 - 0.0 - 0.5 - 2.0;
    let d2 = 3.0 + 2.0 - 0.0 - 0.2 - 2.0;
    let k1 = frlab::geometry::cpow(z.pairing_with_axis(1.0), -d1).unwrap();
    let k2 = frlab::geometry::cpow(w.pairing_with_axis(1.5), -d2).unwrap();
    let expected = k1 * k2 * (c1a + c1b).exp();
    assert!((full.value - expected).norm() < 1e-12);
}

#[test]
fn log_c2_matches_direct_gamma_quotient() {
    // the log-space route against direct evaluation in the safe range
    for (n, s, t) in [(1usize, 4.0f64, 0.0f64), (1, 5.0, 0.5), (2, 6.0, 1.0), (2, 8.0, 2.5)] {
        let log = log_c2(n, s, t).unwrap_value();
        let np1 = (n + 1) as f64;
        let direct = 4.0
            * std::f64::consts::PI.powi(n as i32)
            * gamma_ref(1.0 + t)
            * gamma_ref(s - t - np1)
            / gamma_ref(s / 2.0).powi(2);
        assert!(
            (log.exp() - direct).abs() / direct < 1e-12,
            "n={n} s={s} t={t}"
        );
    }
}

// small reference factorial-based Gamma for half-integer and integer
// arguments only, independent of the library's Lanczos path
fn gamma_ref(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        let mut acc = 1.0;
        let mut k = x.round() as i64;
        while k > 1 {
            acc *= (k - 1) as f64;
            k -= 1;
        }
        acc
    } else {
        // half-integers: Gamma(1/2) = sqrt(pi), Gamma(x+1) = x Gamma(x)
        let mut acc = std::f64::consts::PI.sqrt();
        let mut v = 0.5;
        while v + 1e-9 < x {
            acc *= v;
            v += 1.0;
        }
        acc
    }
}
