//! The distance-weighted operator against its four shifted plain-kernel
//! dominators: the distance powers are absorbed by the log bound
//! `dist <= C (1 + ratio^eps)`, turning each slot into an unshifted plus a
//! shifted kernel. With a shared sample stream the domination holds sample
//! by sample, so the Monte-Carlo estimates must satisfy it outright.

use frlab::experiments::verify_distance_bound;
use frlab::mixed_norm::{Factor, SeparableFn};
use frlab::operators::{apply_s, apply_s_dist, dominate_shifts, DistParams, Engine, FrParams};
use frlab::{ProposalConfig64, SiegelPoint64};

#[test]
fn dist_operator_dominated_by_shifted_sum() {
    let n = 1;
    let config = ProposalConfig64::default();
    let eps = 0.2;
    let d = [1.0, 0.5];
    let fr = FrParams::new([0.0, 0.0], [0.5, 0.5], [4.0, 4.0]);
    let dist = DistParams::new(fr, d, eps);

    // fit the log-bound constant at the working exponent, with headroom for
    // the sampled maximum being a lower bound of the true supremum
    let fit = verify_distance_bound::<f64>(n, &[eps], 20_000, &config, 5150);
    assert!(fit.pass);
    let c_eps = fit.per_eps[0].c_fit * 1.5;
    // dist^{d_i} <= (2 c_eps)^{d_i} (1 + ratio^{eps d_i}) per slot
    let c_total = (2.0 * c_eps).powf(d[0] + d[1]);

    let f = SeparableFn::new(
        Factor::PowerKernel { t: 0.5, s: 0.0, anchor: 1.0, modulus: true },
        Factor::PowerKernel { t: 0.5, s: 0.0, anchor: 1.0, modulus: true },
    );
    let shifts = dominate_shifts(&dist);
    let points = [
        (SiegelPoint64::axis(n, 1.0), SiegelPoint64::axis(n, 1.0)),
        (SiegelPoint64::axis(n, 0.4), SiegelPoint64::axis(n, 2.5)),
        (SiegelPoint64::axis(n, 3.0), SiegelPoint64::axis(n, 0.7)),
    ];
    for (k, (z, w)) in points.iter().enumerate() {
        let seed = 9000 + k as u64;
        let budget = 40_000;
        let weighted = apply_s_dist(&dist, &f, z, w, &config, budget, seed).unwrap();
        let mut dominator = 0.0;
        for shift in &shifts {
            let value = apply_s(shift, &f, z, w, Engine::Mc { budget, seed }, &config)
                .unwrap()
                .unwrap_value();
            dominator += value.value.re;
        }
        assert!(
            weighted.value.re <= c_total * dominator,
            "point {k}: {} > {} * {}",
            weighted.value.re,
            c_total,
            dominator
        );
        assert!(weighted.value.re >= 0.0);
    }
}
