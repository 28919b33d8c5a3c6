//! Weighted mixed norms `L^p_alpha` on `U x U` for separable functions:
//! exact through the one-kernel closed form where possible, sample-based
//! otherwise, and essential suprema as refined lower-bound estimates.
//!
//! Only separable functions are representable. A nested Monte-Carlo
//! evaluation of a genuinely mixed norm would be biased (the outer power of
//! an inner estimate does not average to the outer power of the inner
//! integral), and every function the experiments need factors.

use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::closed_forms::{log_c2, Divergence, Eval, KeyParams};
use crate::geometry::{cpow_or_nan, SiegelPoint};
use crate::sampler::{mc_integrate, mix_seed, sample_point, ProposalConfig, SamplerError};
use crate::space::{inv, ExponentPair, WeightPair};
use crate::{lit, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("factor is not in the closed-form family: {0}")]
    NotClosedForm(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// One factor of a separable function on `U x U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor<T> {
    /// The zero function.
    Zero,
    /// Any symbol of constant modulus one; only its modulus enters norms.
    Unimodular,
    /// `rho(z)^t / rho(z, anchor i)^s`, or with `|rho(z, anchor i)|^s` in
    /// the denominator when `modulus` is set. `s = 0` is the pure power
    /// `rho(z)^t`.
    PowerKernel { t: T, s: T, anchor: T, modulus: bool },
}

impl<T: Real> Factor<T> {
    /// The probe factor `rho^t / rho(., anchor i)^s`.
    pub fn probe(t: T, s: T, anchor: T) -> Self {
        Factor::PowerKernel { t, s, anchor, modulus: false }
    }

    pub fn eval(&self, z: &SiegelPoint<T>) -> Complex<T> {
        match *self {
            Factor::Zero => Complex::new(T::zero(), T::zero()),
            Factor::Unimodular => Complex::new(T::one(), T::zero()),
            Factor::PowerKernel { t, s, anchor, modulus } => {
                let num = z.rho().powf(t);
                if s == T::zero() {
                    return Complex::new(num, T::zero());
                }
                let base = z.pairing_with_axis(anchor);
                if modulus {
                    Complex::new(num * base.norm().powf(-s), T::zero())
                } else {
                    cpow_or_nan(base, -s) * num
                }
            }
        }
    }

    pub fn abs_eval(&self, z: &SiegelPoint<T>) -> T {
        self.eval(z).norm()
    }
}

/// A separable function `f(z, w) = first(z) * second(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableFn<T> {
    pub first: Factor<T>,
    pub second: Factor<T>,
}

impl<T: Real> SeparableFn<T> {
    pub fn new(first: Factor<T>, second: Factor<T>) -> Self {
        Self { first, second }
    }

    /// The probe `f_{theta,delta}` with common exponents `(s, t)`.
    pub fn probe(s: T, t: T, theta: T, delta: T) -> Self {
        Self::new(Factor::probe(t, s, theta), Factor::probe(t, s, delta))
    }

    pub fn eval(&self, z: &SiegelPoint<T>, w: &SiegelPoint<T>) -> Complex<T> {
        self.first.eval(z) * self.second.eval(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Closed,
    Mc,
}

/// Weighted `L^p_alpha(U)` norm of a single factor.
///
/// Closed evaluation covers power-kernel factors at finite `p` (one-kernel
/// closed form), unimodular factors, zero, and the `t = s` power kernels at
/// `p = inf` whose supremum is pinned by `2 |rho(z, w)| >= max(rho)`.
pub fn factor_norm<T: Real>(
    factor: &Factor<T>,
    n: usize,
    p: T,
    alpha: T,
    method: NormMethod,
    config: &ProposalConfig<T>,
    budget: u64,
    seed: u64,
) -> Result<Eval<T>, NormError> {
    match *factor {
        Factor::Zero => Ok(Eval::Value(T::zero())),
        Factor::Unimodular => {
            if p.is_infinite() {
                Ok(Eval::Value(T::one()))
            } else {
                // integral of rho^alpha over U is infinite for every weight
                Ok(Eval::Divergent(Divergence::new(
                    "factor norm",
                    "constant-modulus factor is not integrable at finite p",
                )))
            }
        }
        Factor::PowerKernel { t, s, anchor, .. } => {
            if p.is_infinite() {
                return sup_norm_power(factor, t, s, n, method, config, budget, seed);
            }
            match method {
                NormMethod::Closed => {
                    match log_c2(n, s * p, p * t + alpha) {
                        Eval::Divergent(d) => Ok(Eval::Divergent(Divergence::new(
                            "factor norm",
                            d.condition,
                        ))),
                        Eval::Value(l) => {
                            let np1 = T::from_usize(n + 1).unwrap();
                            let e = (np1 + alpha) * inv(p) + t - s;
                            Ok(Eval::Value((l * inv(p) + e * anchor.ln()).exp()))
                        }
                    }
                }
                NormMethod::Mc => {
                    // sampling cannot detect divergence by itself; gate on
                    // the known convergence region first
                    if let Some(d) = KeyParams::new(n, s * p, p * t + alpha).check() {
                        return Ok(Eval::Divergent(Divergence::new(
                            "factor norm",
                            d.condition,
                        )));
                    }
                    let f = *factor;
                    let est = mc_integrate(
                        move |z: &SiegelPoint<T>| {
                            let v = f.abs_eval(z).powf(p) * z.rho().powf(alpha);
                            Complex::new(v, T::zero())
                        },
                        n,
                        config,
                        budget,
                        seed,
                    )?;
                    Ok(Eval::Value(est.value.re.powf(inv(p))))
                }
            }
        }
    }
}

fn sup_norm_power<T: Real>(
    factor: &Factor<T>,
    t: T,
    s: T,
    n: usize,
    method: NormMethod,
    config: &ProposalConfig<T>,
    budget: u64,
    seed: u64,
) -> Result<Eval<T>, NormError> {
    if t > s {
        // rho^t / |rho(., anchor i)|^s grows like rho^{t-s} along the axis
        return Ok(Eval::Divergent(Divergence::new(
            "factor sup norm",
            "t <= s",
        )));
    }
    match method {
        NormMethod::Closed => {
            if t == s {
                // sup of (rho(z) / |rho(z, anchor i)|)^s; the ratio is
                // bounded by 2 and approaches it along the axis.
                Ok(Eval::Value(lit::<T>(2.0).powf(s)))
            } else if t == T::zero() && s == T::zero() {
                Ok(Eval::Value(T::one()))
            } else {
                Err(NormError::NotClosedForm(
                    "sup norm only closed for t = s power kernels".into(),
                ))
            }
        }
        NormMethod::Mc => Ok(Eval::Value(ess_sup_norm(
            factor, n, config, budget, 8, seed,
        ))),
    }
}

/// Sample-based essential supremum of `|factor|`: the maximum over proposal
/// draws plus local pattern-search refinement. Converges from below, so the
/// result is a lower-bound estimate.
pub fn ess_sup_norm<T: Real>(
    factor: &Factor<T>,
    n: usize,
    config: &ProposalConfig<T>,
    samples: u64,
    refinement_rounds: u32,
    seed: u64,
) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xE55));
    let mut best_val = T::zero();
    let mut best_point: Option<SiegelPoint<T>> = None;
    for _ in 0..samples.max(1) {
        let (z, _) = sample_point(n, config, &mut rng);
        let v = factor.abs_eval(&z);
        if v > best_val {
            best_val = v;
            best_point = Some(z);
        }
    }
    let Some(mut center) = best_point else {
        return best_val;
    };
    for round in 0..refinement_rounds {
        let step = lit::<T>(0.5f64.powi(round as i32));
        let mut improved = true;
        while improved {
            improved = false;
            for candidate in neighbours(&center, step) {
                if candidate.rho() > T::zero() {
                    let v = factor.abs_eval(&candidate);
                    if v > best_val {
                        best_val = v;
                        center = candidate;
                        improved = true;
                    }
                }
            }
        }
    }
    best_val
}

fn neighbours<T: Real>(z: &SiegelPoint<T>, step: T) -> Vec<SiegelPoint<T>> {
    let mut out = Vec::new();
    let scale = T::one() + step;
    let h = z.rho();
    // move the height up and down (multiplicatively, to probe both the
    // boundary and the far field), and translate the base coordinate
    for factor in [scale, scale.recip()] {
        let new_h = h * factor;
        out.push(SiegelPoint::new(
            z.zprime().to_vec(),
            Complex::new(z.zn().re, z.horizontal_norm_sqr() + new_h),
        ));
    }
    for delta in [step, -step] {
        out.push(SiegelPoint::new(
            z.zprime().to_vec(),
            Complex::new(z.zn().re + delta, z.zn().im),
        ));
    }
    for j in 0..z.zprime().len() {
        for (dre, dim) in [(step, T::zero()), (-step, T::zero()), (T::zero(), step), (T::zero(), -step)] {
            let mut zp = z.zprime().to_vec();
            zp[j] = zp[j] + Complex::new(dre, dim);
            let horiz: T = zp.iter().map(|c| c.norm_sqr()).sum();
            out.push(SiegelPoint::new(zp, Complex::new(z.zn().re, horiz + h)));
        }
    }
    out
}

/// Weighted mixed norm of a separable function: the product of the two
/// single-variable weighted norms. Divergence reports name the factor and
/// the failed convergence condition.
pub fn mixed_norm_separable<T: Real>(
    f: &SeparableFn<T>,
    n: usize,
    p: &ExponentPair<T>,
    alpha: &WeightPair<T>,
    method: NormMethod,
    config: &ProposalConfig<T>,
    budget: u64,
    seed: u64,
) -> Result<Eval<T>, NormError> {
    let mut total = T::one();
    for (i, factor) in [&f.first, &f.second].into_iter().enumerate() {
        let norm = factor_norm(
            factor,
            n,
            p.at(i),
            alpha.at(i),
            method,
            config,
            budget,
            mix_seed(seed, i as u64),
        )?;
        match norm {
            Eval::Divergent(d) => {
                return Ok(Eval::Divergent(Divergence::new(
                    "mixed norm",
                    format!("factor {}: {}", i + 1, d.condition),
                )));
            }
            Eval::Value(v) => total *= v,
        }
    }
    Ok(Eval::Value(total))
}
