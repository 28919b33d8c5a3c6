//! The integral operators: `T_{a,b,c}` with holomorphic kernels,
//! `S_{a,b,c}` with modulus kernels, the weighted adjoint of `T`, and the
//! distance-weighted variant of `S` together with its shifted-parameter
//! domination data.

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::closed_forms::{key_integral, log_c1, Eval};
use crate::geometry::{cpow_or_nan, GeometryError, SiegelPoint};
use crate::mixed_norm::{Factor, SeparableFn};
use crate::sampler::{mc_integrate2, Estimate, ProposalConfig, SamplerError};
use crate::space::Setting;
use crate::{lit, Real};

/// Operator parameters `(a, b, c)`, one entry per tensor slot. All reals
/// are admissible; boundedness is the criteria module's judgment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrParams<T> {
    pub a: [T; 2],
    pub b: [T; 2],
    pub c: [T; 2],
}

impl<T: Real> FrParams<T> {
    pub fn new(a: [T; 2], b: [T; 2], c: [T; 2]) -> Self {
        Self { a, b, c }
    }
}

/// Parameters of the distance-weighted operator: the base triple, the
/// distance powers `d >= 0`, and the shift size `eps > 0` used by the
/// domination bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistParams<T> {
    pub fr: FrParams<T>,
    pub d: [T; 2],
    pub eps: T,
}

impl<T: Real> DistParams<T> {
    pub fn new(fr: FrParams<T>, d: [T; 2], eps: T) -> Self {
        Self { fr, d, eps }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("input is not in the closed-form family: {0}")]
    NotClosedFamily(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Evaluation engine: exact Gamma chains, or Monte Carlo with the given
/// budget and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Closed,
    Mc { budget: u64, seed: u64 },
}

/// An operator value at a point: exact, or sampled with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpOutput<T> {
    pub value: Complex<T>,
    pub stderr: Option<T>,
}

impl<T: Real> OpOutput<T> {
    fn exact(value: Complex<T>) -> Self {
        Self { value, stderr: None }
    }

    fn sampled(est: Estimate<T>) -> Self {
        Self { value: est.value, stderr: Some(est.stderr) }
    }
}

fn require_domain<T: Real>(points: &[&SiegelPoint<T>]) -> Result<(), OperatorError> {
    for p in points {
        if !p.in_domain() {
            return Err(OperatorError::Geometry(GeometryError::OutsideDomain {
                rho: p.rho().to_f64().unwrap_or(f64::NAN),
            }));
        }
    }
    Ok(())
}

/// `(T_{a,b,c} f)(z, w)`: the double integral with holomorphic kernels
/// `rho(z,u)^{-c_1} rho(w,eta)^{-c_2}`.
///
/// The closed engine requires both factors of `f` to be anchored
/// holomorphic power kernels (the probe family); each slot then reduces by
/// the two-kernel closed form.
pub fn apply_t<T: Real>(
    params: &FrParams<T>,
    f: &SeparableFn<T>,
    z: &SiegelPoint<T>,
    w: &SiegelPoint<T>,
    engine: Engine,
    config: &ProposalConfig<T>,
) -> Result<Eval<OpOutput<T>>, OperatorError> {
    require_domain(&[z, w])?;
    let n = z.dim();
    match engine {
        Engine::Closed => {
            let mut value = Complex::new(T::one(), T::zero());
            for (i, (factor, point)) in [(f.first, z), (f.second, w)].into_iter().enumerate() {
                match holomorphic_slot(n, params.c[i], params.b[i], params.a[i], factor, point)? {
                    Eval::Divergent(d) => return Ok(Eval::Divergent(d)),
                    Eval::Value(v) => value = value * v,
                }
            }
            Ok(Eval::Value(OpOutput::exact(value)))
        }
        Engine::Mc { budget, seed } => {
            let prefactor = z.rho().powf(params.a[0]) * w.rho().powf(params.a[1]);
            let (c1, c2) = (params.c[0], params.c[1]);
            let (b1, b2) = (params.b[0], params.b[1]);
            let f = *f;
            let (z, w) = (z.clone(), w.clone());
            let est = mc_integrate2(
                move |u: &SiegelPoint<T>, eta: &SiegelPoint<T>| {
                    let k1 = cpow_or_nan(z.pairing(u), -c1);
                    let k2 = cpow_or_nan(w.pairing(eta), -c2);
                    k1 * k2 * f.eval(u, eta) * u.rho().powf(b1) * eta.rho().powf(b2)
                },
                n,
                config,
                budget,
                seed,
            )?;
            Ok(Eval::Value(OpOutput::sampled(Estimate {
                value: est.value * prefactor,
                stderr: est.stderr * prefactor.abs(),
                ..est
            })))
        }
    }
}

/// One tensor slot of the closed `T` evaluation:
/// `rho(z)^a int rho(u)^{b + t_f} / (rho(z,u)^c rho(u, anchor i)^{s_f}) dV(u)`.
fn holomorphic_slot<T: Real>(
    n: usize,
    c: T,
    b: T,
    a: T,
    factor: Factor<T>,
    point: &SiegelPoint<T>,
) -> Result<Eval<Complex<T>>, OperatorError> {
    match factor {
        Factor::Zero => Ok(Eval::Value(Complex::new(T::zero(), T::zero()))),
        Factor::PowerKernel { t, s, anchor, modulus: false } if s > T::zero() => {
            match log_c1(n, c, s, b + t) {
                Eval::Divergent(d) => Ok(Eval::Divergent(d)),
                Eval::Value(l) => {
                    let np1 = T::from_usize(n + 1).unwrap();
                    let decay = c + s - b - t - np1;
                    let kernel = cpow_or_nan(point.pairing_with_axis(anchor), -decay);
                    Ok(Eval::Value(kernel * (l + a * point.rho().ln()).exp()))
                }
            }
        }
        other => Err(OperatorError::NotClosedFamily(format!(
            "holomorphic closed route needs an anchored holomorphic power kernel, got {other:?}"
        ))),
    }
}

/// `(S_{a,b,c} f)(z, w)`: the same double integral with the kernel moduli.
///
/// The closed engine covers pure power factors `rho^t` (each slot is then a
/// one-kernel integral). `S` of a nonnegative `f` is real and nonnegative.
pub fn apply_s<T: Real>(
    params: &FrParams<T>,
    f: &SeparableFn<T>,
    z: &SiegelPoint<T>,
    w: &SiegelPoint<T>,
    engine: Engine,
    config: &ProposalConfig<T>,
) -> Result<Eval<OpOutput<T>>, OperatorError> {
    require_domain(&[z, w])?;
    let n = z.dim();
    match engine {
        Engine::Closed => {
            let mut value = Complex::new(T::one(), T::zero());
            for (i, (factor, point)) in [(f.first, z), (f.second, w)].into_iter().enumerate() {
                match factor {
                    Factor::Zero => {
                        return Ok(Eval::Value(OpOutput::exact(Complex::new(
                            T::zero(),
                            T::zero(),
                        ))))
                    }
                    Factor::PowerKernel { t, s, .. } if s == T::zero() => {
                        match key_integral(point, params.c[i], params.b[i] + t)? {
                            Eval::Divergent(d) => return Ok(Eval::Divergent(d)),
                            Eval::Value(v) => {
                                let scaled = v * point.rho().powf(params.a[i]);
                                value = value * Complex::new(scaled, T::zero());
                            }
                        }
                    }
                    other => {
                        return Err(OperatorError::NotClosedFamily(format!(
                            "modulus closed route needs pure power factors, got {other:?}"
                        )))
                    }
                }
            }
            Ok(Eval::Value(OpOutput::exact(value)))
        }
        Engine::Mc { budget, seed } => {
            let prefactor = z.rho().powf(params.a[0]) * w.rho().powf(params.a[1]);
            let (c1, c2) = (params.c[0], params.c[1]);
            let (b1, b2) = (params.b[0], params.b[1]);
            let f = *f;
            let (z, w) = (z.clone(), w.clone());
            let est = mc_integrate2(
                move |u: &SiegelPoint<T>, eta: &SiegelPoint<T>| {
                    let k1 = z.pairing(u).norm().powf(-c1);
                    let k2 = w.pairing(eta).norm().powf(-c2);
                    f.eval(u, eta) * (k1 * k2 * u.rho().powf(b1) * eta.rho().powf(b2))
                },
                n,
                config,
                budget,
                seed,
            )?;
            Ok(Eval::Value(OpOutput::sampled(Estimate {
                value: est.value * prefactor,
                stderr: est.stderr * prefactor.abs(),
                ..est
            })))
        }
    }
}

/// The adjoint of `T_{a,b,c}` with respect to the weighted pairings
/// `<.,.>_alpha` and `<.,.>_beta`:
///
/// `T* g(z,w) = rho(z)^{b_1-alpha_1} rho(w)^{b_2-alpha_2}
///    int int rho(u)^{a_1+beta_1} rho(eta)^{a_2+beta_2}
///            / (rho(z,u)^{c_1} rho(w,eta)^{c_2}) g(u,eta) dV dV`.
pub fn apply_t_adjoint<T: Real>(
    setting: &Setting<T>,
    params: &FrParams<T>,
    g: &SeparableFn<T>,
    z: &SiegelPoint<T>,
    w: &SiegelPoint<T>,
    engine: Engine,
    config: &ProposalConfig<T>,
) -> Result<Eval<OpOutput<T>>, OperatorError> {
    let dual = FrParams::new(
        [
            params.b[0] - setting.alpha.at(0),
            params.b[1] - setting.alpha.at(1),
        ],
        [
            params.a[0] + setting.beta.at(0),
            params.a[1] + setting.beta.at(1),
        ],
        params.c,
    );
    apply_t(&dual, g, z, w, engine, config)
}

/// `(S^d_{a,b,c} f)(z, w)`: the modulus kernels weighted by powers of the
/// invariant distance. Monte Carlo only; `|f|` is integrated, matching the
/// domination statement.
pub fn apply_s_dist<T: Real>(
    dist: &DistParams<T>,
    f: &SeparableFn<T>,
    z: &SiegelPoint<T>,
    w: &SiegelPoint<T>,
    config: &ProposalConfig<T>,
    budget: u64,
    seed: u64,
) -> Result<Estimate<T>, OperatorError> {
    require_domain(&[z, w])?;
    let n = z.dim();
    let params = dist.fr;
    let prefactor = z.rho().powf(params.a[0]) * w.rho().powf(params.a[1]);
    let (d1, d2) = (dist.d[0], dist.d[1]);
    let f = *f;
    let (zc, wc) = (z.clone(), w.clone());
    let est = mc_integrate2(
        move |u: &SiegelPoint<T>, eta: &SiegelPoint<T>| {
            let k1 = zc.pairing(u).norm().powf(-params.c[0]);
            let k2 = wc.pairing(eta).norm().powf(-params.c[1]);
            let dist1 = match zc.bergman_distance(u) {
                Ok(v) => v.powf(d1),
                Err(_) => T::nan(),
            };
            let dist2 = match wc.bergman_distance(eta) {
                Ok(v) => v.powf(d2),
                Err(_) => T::nan(),
            };
            let v = f.eval(u, eta).norm()
                * (k1 * k2 * dist1 * dist2 * u.rho().powf(params.b[0]) * eta.rho().powf(params.b[1]));
            Complex::new(v, T::zero())
        },
        n,
        config,
        budget,
        seed,
    )?;
    Ok(Estimate {
        value: est.value * prefactor,
        stderr: est.stderr * prefactor,
        ..est
    })
}

/// The four shifted parameter triples dominating the distance-weighted
/// operator: unshifted, first slot shifted, second slot shifted, both
/// shifted. A shifted slot `i` replaces `(a_i, b_i, c_i)` by
/// `(a_i - d_i eps, b_i - d_i eps, c_i - 2 d_i eps)`.
pub fn dominate_shifts<T: Real>(dist: &DistParams<T>) -> [FrParams<T>; 4] {
    let base = dist.fr;
    let shift = |params: &FrParams<T>, slots: [bool; 2]| {
        let mut out = *params;
        for i in 0..2 {
            if slots[i] {
                let de = dist.d[i] * dist.eps;
                out.a[i] = out.a[i] - de;
                out.b[i] = out.b[i] - de;
                out.c[i] = out.c[i] - lit::<T>(2.0) * de;
            }
        }
        out
    };
    [
        base,
        shift(&base, [true, false]),
        shift(&base, [false, true]),
        shift(&base, [true, true]),
    ]
}

/// Largest `eps` keeping every shifted boundedness condition strict, halved
/// for margin; `None` when the unshifted parameters have no slack. With
/// `d = 0` any positive shift works and 1 is returned.
pub fn suggest_epsilon<T: Real>(
    setting: &Setting<T>,
    params: &FrParams<T>,
    d: [T; 2],
) -> Option<T> {
    use crate::criteria::threshold_c;
    let mut bound = T::infinity();
    for i in 0..2 {
        if !(d[i] > T::zero()) {
            continue;
        }
        let q = setting.q.at(i);
        let p = setting.p.at(i);
        if q.is_infinite() || p.is_infinite() {
            return None;
        }
        let beta = setting.beta.at(i);
        let alpha = setting.alpha.at(i);
        // -q (a - d eps) < beta + 1
        let slack_a = (q * params.a[i] + beta + T::one()) / (q * d[i]);
        // alpha + 1 < p (b + 1 - d eps)
        let slack_b = (p * (params.b[i] + T::one()) - alpha - T::one()) / (p * d[i]);
        // c - 2 d eps > threshold
        let threshold = threshold_c(setting, i, params.a[i], params.b[i])?;
        let slack_c = (params.c[i] - threshold) / (lit::<T>(2.0) * d[i]);
        for s in [slack_a, slack_b, slack_c] {
            if !(s > T::zero()) {
                return None;
            }
            if s < bound {
                bound = s;
            }
        }
    }
    if bound.is_infinite() {
        Some(T::one())
    } else {
        Some(bound * lit(0.5))
    }
}

/// The modulus-kernel parameter triple dominating the `N`-th normal
/// derivative on the weighted holomorphic spaces:
/// `a = (N, N)`, `b = beta`, `c_i = n + 1 + beta_i + N`.
pub fn derivative_domination_params<T: Real>(n: usize, order: u32, beta: [T; 2]) -> FrParams<T> {
    let np1 = T::from_usize(n + 1).unwrap();
    let nf = T::from_u32(order).unwrap();
    FrParams::new(
        [nf, nf],
        beta,
        [np1 + beta[0] + nf, np1 + beta[1] + nf],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::mix_seed;
    use crate::space::{ExponentPair, WeightPair};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ProposalConfig<f64> {
        ProposalConfig::default()
    }

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
    fn t_closed_and_mc_agree_on_probe() {
        let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 2.0]);
        let f = SeparableFn::probe(2.5, 0.5, 1.0, 1.0);
        let z = SiegelPoint::axis(1, 1.0);
        let w = SiegelPoint::axis(1, 2.0);
        let closed = apply_t(&params, &f, &z, &w, Engine::Closed, &cfg())
            .unwrap()
            .unwrap_value();
        let mc = apply_t(
            &params,
            &f,
            &z,
            &w,
            Engine::Mc { budget: 400_000, seed: 11 },
            &cfg(),
        )
        .unwrap()
        .unwrap_value();
        let sigma = mc.stderr.unwrap();
        let diff = (mc.value - closed.value).norm();
        assert!(diff <= 3.0 * sigma, "diff = {diff}, sigma = {sigma}");
    }

    #[test]
    fn t_of_zero_is_zero() {
        let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 2.0]);
        let f = SeparableFn::new(Factor::Zero, Factor::Zero);
        let z = SiegelPoint::axis(1, 1.0);
        let v = apply_t(&params, &f, &z, &z, Engine::Closed, &cfg())
            .unwrap()
            .unwrap_value();
        assert_eq!(v.value, num_complex::Complex::new(0.0, 0.0));
    }

    #[test]
    fn s_of_power_factorises_into_key_integrals() {
        let t = 0.5;
        let s_kernel = 4.0;
        let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [s_kernel, s_kernel]);
        let f = SeparableFn::new(
            Factor::PowerKernel { t, s: 0.0, anchor: 1.0, modulus: true },
            Factor::PowerKernel { t, s: 0.0, anchor: 1.0, modulus: true },
        );
        let z = SiegelPoint::axis(1, 1.0);
        let w = SiegelPoint::axis(1, 2.0);
        let v = apply_s(&params, &f, &z, &w, Engine::Closed, &cfg())
            .unwrap()
            .unwrap_value();
        let k1 = key_integral(&z, s_kernel, t).unwrap().unwrap_value();
        let k2 = key_integral(&w, s_kernel, t).unwrap().unwrap_value();
        assert!((v.value.re - k1 * k2).abs() < 1e-12);
        assert!(v.value.re >= 0.0 && v.value.im.abs() < 1e-15);
    }

    #[test]
    fn t_is_dominated_by_s_pointwise() {
        let params = FrParams::new([0.1, 0.0], [0.2, 0.1], [2.5, 2.0]);
        let f = SeparableFn::probe(2.5, 0.5, 1.3, 0.8);
        let fabs = SeparableFn::new(
            Factor::PowerKernel { t: 0.5, s: 2.5, anchor: 1.3, modulus: true },
            Factor::PowerKernel { t: 0.5, s: 2.5, anchor: 0.8, modulus: true },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..8 {
            let (z, _) = crate::sampler::sample_point(1, &cfg(), &mut rng);
            let (w, _) = crate::sampler::sample_point(1, &cfg(), &mut rng);
            let budget = 60_000;
            let tv = apply_t(
                &params,
                &f,
                &z,
                &w,
                Engine::Mc { budget, seed: mix_seed(21, k) },
                &cfg(),
            )
            .unwrap()
            .unwrap_value();
            let sv = apply_s(
                &params,
                &fabs,
                &z,
                &w,
                Engine::Mc { budget, seed: mix_seed(22, k) },
                &cfg(),
            )
            .unwrap()
            .unwrap_value();
            let slack = 3.0 * (tv.stderr.unwrap() + sv.stderr.unwrap());
            assert!(
                tv.value.norm() <= sv.value.re + slack,
                "|Tf| = {} > S|f| = {} (slack {slack})",
                tv.value.norm(),
                sv.value.re
            );
        }
    }

    #[test]
    fn dist_weight_zero_reduces_to_s() {
        let fr = FrParams::new([0.0, 0.0], [0.5, 0.5], [4.0, 4.0]);
        let dist = DistParams::new(fr, [0.0, 0.0], 0.1);
        let f = SeparableFn::new(
            Factor::PowerKernel { t: 0.5, s: 0.0, anchor: 1.0, modulus: true },
            Factor::PowerKernel { t: 0.5, s: 0.0, anchor: 1.0, modulus: true },
        );
        let z = SiegelPoint::axis(1, 1.0);
        let w = SiegelPoint::axis(1, 1.5);
        let via_dist = apply_s_dist(&dist, &f, &z, &w, &cfg(), 50_000, 31).unwrap();
        let via_s = apply_s(
            &fr,
            &f,
            &z,
            &w,
            Engine::Mc { budget: 50_000, seed: 31 },
            &cfg(),
        )
        .unwrap()
        .unwrap_value();
        // d = 0 makes the integrands identical, so the estimates match bitwise
        assert_eq!(via_dist.value.re.to_bits(), via_s.value.re.to_bits());
    }

    #[test]
    fn shifts_match_the_displayed_table() {
        let fr: FrParams<f64> = FrParams::new([1.0, 2.0], [3.0, 4.0], [5.0, 6.0]);
        let dist = DistParams::new(fr, [1.0, 0.0], 0.1);
        let shifts = dominate_shifts(&dist);
        assert_eq!(shifts[0], fr);
        assert!((shifts[1].a[0] - 0.9).abs() < 1e-15);
        assert!((shifts[1].b[0] - 2.9).abs() < 1e-15);
        assert!((shifts[1].c[0] - 4.8).abs() < 1e-15);
        assert_eq!(shifts[1].a[1], 2.0);
        assert_eq!(shifts[1].b[1], 4.0);
        assert_eq!(shifts[1].c[1], 6.0);
        // with d2 = 0 the second and fourth triples collapse onto others
        assert_eq!(shifts[2], shifts[0]);
        assert_eq!(shifts[3], shifts[1]);
        // d = 0 entirely: all four identical
        let flat = DistParams::new(fr, [0.0, 0.0], 0.1);
        let all = dominate_shifts(&flat);
        assert!(all.iter().all(|p| *p == fr));
    }

    #[test]
    fn adjoint_kernel_shape_swaps_roles() {
        // alpha = beta, a = 0, b = alpha: the adjoint has the same kernel
        // shape with the roles of a and b swapped.
        let setting = Setting::new(
            1,
            ExponentPair::new(2.0, 2.0).unwrap(),
            ExponentPair::new(2.0, 2.0).unwrap(),
            WeightPair::new(0.5, 0.5).unwrap(),
            WeightPair::new(0.5, 0.5).unwrap(),
        )
        .unwrap();
        let params = FrParams::new([0.0, 0.0], [0.5, 0.5], [3.0, 3.0]);
        let g = SeparableFn::probe(2.5, 0.5, 1.0, 1.0);
        let z = SiegelPoint::axis(1, 1.2);
        let w = SiegelPoint::axis(1, 0.7);
        let adj = apply_t_adjoint(&setting, &params, &g, &z, &w, Engine::Closed, &cfg())
            .unwrap()
            .unwrap_value();
        let direct = apply_t(&params, &g, &z, &w, Engine::Closed, &cfg())
            .unwrap()
            .unwrap_value();
        // b - alpha = 0 = a and a + beta = b: the adjoint coincides with T
        assert!((adj.value - direct.value).norm() < 1e-12);
    }

    #[test]
    fn derivative_domination_triple() {
        let p = derivative_domination_params(1, 3, [0.5, -0.25]);
        assert_eq!(p.a, [3.0, 3.0]);
        assert_eq!(p.b, [0.5, -0.25]);
        assert_eq!(p.c, [5.5, 4.75]);
    }

    #[test]
    fn epsilon_suggestion_respects_margins() {
        let setting = worked_setting();
        let params = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 2.0]);
        let eps = suggest_epsilon(&setting, &params, [1.0, 1.0]).unwrap();
        assert!(eps > 0.0);
        // shifted conditions must stay strict at the suggested value
        let dist = DistParams::new(params, [1.0, 1.0], eps);
        let shifted = dominate_shifts(&dist)[3];
        let verdict = crate::criteria::check_bounded(&setting, &shifted);
        assert!(matches!(
            verdict.outcome,
            crate::criteria::Outcome::Bounded | crate::criteria::Outcome::BoundaryEquality
        ));
        // no slack at the threshold
        let tight = FrParams::new([0.0, 0.0], [0.0, 0.0], [1.75, 2.0]);
        assert!(suggest_epsilon(&setting, &tight, [1.0, 0.0]).is_none());
    }
}
