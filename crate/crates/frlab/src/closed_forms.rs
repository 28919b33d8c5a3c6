//! Exact Gamma-function evaluation of the closed-form integrals: the
//! constants `C1`, `C2`, the one- and two-kernel integrals over `U`, and the
//! exact norms of the probe functions `f_{theta,delta}` and of their images
//! under `T`.
//!
//! Every constant is assembled in log space as `exp(sum of +/- log_gamma)`
//! so that large exponent scans do not overflow.

use num_complex::Complex;
use thiserror::Error;

use crate::geometry::{cpow, GeometryError, SiegelPoint};
use crate::operators::FrParams;
use crate::space::{inv, Setting};
use crate::{lit, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("log_gamma domain: argument {x} must be positive")]
    GammaDomain { x: f64 },
}

/// A parameter set outside a convergence region. Carried as data, not as an
/// error, so that criterion scans can tabulate divergent entries.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Divergence {
    /// Which evaluation diverged.
    pub source: &'static str,
    /// The convergence condition that failed, as a formula.
    pub condition: String,
}

impl Divergence {
    pub fn new(source: &'static str, condition: impl Into<String>) -> Self {
        Self { source, condition: condition.into() }
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} diverges: requires {}", self.source, self.condition)
    }
}

/// Outcome of a closed-form evaluation: a finite value, or the divergence
/// that makes the integral infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum Eval<V> {
    Value(V),
    Divergent(Divergence),
}

impl<V> Eval<V> {
    pub fn is_value(&self) -> bool {
        matches!(self, Eval::Value(_))
    }

    pub fn value(&self) -> Option<&V> {
        match self {
            Eval::Value(v) => Some(v),
            Eval::Divergent(_) => None,
        }
    }

    pub fn divergence(&self) -> Option<&Divergence> {
        match self {
            Eval::Value(_) => None,
            Eval::Divergent(d) => Some(d),
        }
    }

    #[track_caller]
    pub fn unwrap_value(self) -> V {
        match self {
            Eval::Value(v) => v,
            Eval::Divergent(d) => panic!("expected a finite value, got divergence: {d}"),
        }
    }

    pub fn map<W>(self, f: impl FnOnce(V) -> W) -> Eval<W> {
        match self {
            Eval::Value(v) => Eval::Value(f(v)),
            Eval::Divergent(d) => Eval::Divergent(d),
        }
    }

    pub fn and_then<W>(self, f: impl FnOnce(V) -> Eval<W>) -> Eval<W> {
        match self {
            Eval::Value(v) => f(v),
            Eval::Divergent(d) => Eval::Divergent(d),
        }
    }
}

// Lanczos approximation in the Pugh parameterisation; about 1e-14 relative
// accuracy across the positive axis.
const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
const LN_2_SQRT_E_OVER_PI: f64 = 0.620782237635245222345518445781647212251852727902599468363868473;

/// `log Gamma(x)` for `x > 0`.
pub fn log_gamma<T: Real>(x: T) -> Result<T, ClosedFormError> {
    if x.is_nan() || x <= T::zero() {
        return Err(ClosedFormError::GammaDomain {
            x: x.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(log_gamma_raw(x))
}

fn log_gamma_raw<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    let r = lit::<T>(GAMMA_R);
    let ln_shift = lit::<T>(LN_2_SQRT_E_OVER_PI);
    if x < half {
        let mut s = lit::<T>(GAMMA_DK[0]);
        for (k, dk) in GAMMA_DK.iter().enumerate().skip(1) {
            s += lit::<T>(*dk) / (T::from_usize(k).unwrap() - x);
        }
        let pi = T::PI();
        pi.ln() - (pi * x).sin().ln()
            - s.ln()
            - ln_shift
            - (half - x) * ((half - x + r) / T::E()).ln()
    } else {
        let mut s = lit::<T>(GAMMA_DK[0]);
        for (k, dk) in GAMMA_DK.iter().enumerate().skip(1) {
            s += lit::<T>(*dk) / (x + T::from_usize(k).unwrap() - T::one());
        }
        s.ln() + ln_shift + (x - half) * ((x - half + r) / T::E()).ln()
    }
}

/// Parameters of the one-kernel integral
/// `int_U rho(w)^t / |rho(z, w)|^s dV(w)`, convergent iff `t > -1` and
/// `s - t > n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyParams<T> {
    pub n: usize,
    pub s: T,
    pub t: T,
}

impl<T: Real> KeyParams<T> {
    pub fn new(n: usize, s: T, t: T) -> Self {
        Self { n, s, t }
    }

    /// `None` when convergent, otherwise the failed condition.
    pub fn check(&self) -> Option<Divergence> {
        let np1 = T::from_usize(self.n + 1).unwrap();
        if !(self.t > -T::one()) {
            return Some(Divergence::new("one-kernel integral", "t > -1"));
        }
        if !(self.s - self.t > np1) {
            return Some(Divergence::new("one-kernel integral", "s - t > n + 1"));
        }
        None
    }
}

/// Parameters of the two-kernel integral
/// `int_U rho(w)^t / (rho(z, w)^r rho(w, u)^s) dV(w)`, convergent iff
/// `r > 0`, `s > 0`, `t > -1`, `r + s - t > n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams<T> {
    pub n: usize,
    pub r: T,
    pub s: T,
    pub t: T,
}

impl<T: Real> PairParams<T> {
    pub fn new(n: usize, r: T, s: T, t: T) -> Self {
        Self { n, r, s, t }
    }

    pub fn check(&self) -> Option<Divergence> {
        let np1 = T::from_usize(self.n + 1).unwrap();
        if !(self.r > T::zero()) {
            return Some(Divergence::new("two-kernel integral", "r > 0"));
        }
        if !(self.s > T::zero()) {
            return Some(Divergence::new("two-kernel integral", "s > 0"));
        }
        if !(self.t > -T::one()) {
            return Some(Divergence::new("two-kernel integral", "t > -1"));
        }
        if !(self.r + self.s - self.t > np1) {
            return Some(Divergence::new("two-kernel integral", "r + s - t > n + 1"));
        }
        None
    }
}

/// `log C2(n, s, t)` where
/// `C2 = 4 pi^n Gamma(1+t) Gamma(s-t-n-1) / Gamma(s/2)^2`.
pub fn log_c2<T: Real>(n: usize, s: T, t: T) -> Eval<T> {
    if let Some(d) = KeyParams::new(n, s, t).check() {
        return Eval::Divergent(d);
    }
    let np1 = T::from_usize(n + 1).unwrap();
    let nf = T::from_usize(n).unwrap();
    let ln4 = lit::<T>(2.0) * T::LN_2();
    Eval::Value(
        ln4 + nf * T::PI().ln() + log_gamma_raw(T::one() + t) + log_gamma_raw(s - t - np1)
            - lit::<T>(2.0) * log_gamma_raw(s * lit::<T>(0.5)),
    )
}

pub fn c2<T: Real>(n: usize, s: T, t: T) -> Eval<T> {
    log_c2(n, s, t).map(|l| l.exp())
}

/// `log C1(n, r, s, t)` where
/// `C1 = 4 pi^n Gamma(1+t) Gamma(r+s-t-n-1) / (Gamma(r) Gamma(s))`.
pub fn log_c1<T: Real>(n: usize, r: T, s: T, t: T) -> Eval<T> {
    if let Some(d) = PairParams::new(n, r, s, t).check() {
        return Eval::Divergent(d);
    }
    let np1 = T::from_usize(n + 1).unwrap();
    let nf = T::from_usize(n).unwrap();
    let ln4 = lit::<T>(2.0) * T::LN_2();
    Eval::Value(
        ln4 + nf * T::PI().ln() + log_gamma_raw(T::one() + t) + log_gamma_raw(r + s - t - np1)
            - log_gamma_raw(r)
            - log_gamma_raw(s),
    )
}

pub fn c1<T: Real>(n: usize, r: T, s: T, t: T) -> Eval<T> {
    log_c1(n, r, s, t).map(|l| l.exp())
}

/// `int_U rho(w)^t / |rho(z, w)|^s dV(w) = C2(n,s,t) rho(z)^{-(s-t-n-1)}`.
pub fn key_integral<T: Real>(z: &SiegelPoint<T>, s: T, t: T) -> Result<Eval<T>, GeometryError> {
    let rho = z.rho();
    if !(rho > T::zero()) {
        return Err(GeometryError::OutsideDomain {
            rho: rho.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = z.dim();
    Ok(log_c2(n, s, t).map(|l| {
        let np1 = T::from_usize(n + 1).unwrap();
        (l - (s - t - np1) * rho.ln()).exp()
    }))
}

/// `int_U rho(w)^t / (rho(z,w)^r rho(w,u)^s) dV(w)
///   = C1(n,r,s,t) rho(z,u)^{-(r+s-t-n-1)}`.
pub fn pair_integral<T: Real>(
    z: &SiegelPoint<T>,
    u: &SiegelPoint<T>,
    r: T,
    s: T,
    t: T,
) -> Result<Eval<Complex<T>>, GeometryError> {
    for p in [z, u] {
        if !p.in_domain() {
            return Err(GeometryError::OutsideDomain {
                rho: p.rho().to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let n = z.dim();
    let np1 = T::from_usize(n + 1).unwrap();
    match log_c1(n, r, s, t) {
        Eval::Divergent(d) => Ok(Eval::Divergent(d)),
        Eval::Value(l) => {
            let power = cpow(z.pairing(u), -(r + s - t - np1))?;
            Ok(Eval::Value(power * l.exp()))
        }
    }
}

/// Exact weighted mixed norm of the probe
/// `f_{theta,delta}(z, w) = rho(z)^t rho(w)^t / (rho(z, theta i)^s rho(w, delta i)^s)`:
///
/// `prod_i [C2(n, s p_i, p_i t + alpha_i)]^{1/p_i} * theta^{e_1} delta^{e_2}`
/// with `e_i = (n+1+alpha_i)/p_i + t - s`.
///
/// Requires finite `p`; the essential-supremum variants live in the
/// mixed-norm module.
pub fn f_theta_delta_norm<T: Real>(setting: &Setting<T>, s: T, t: T, theta: T, delta: T) -> Eval<T> {
    assert!(
        setting.p.all_finite(),
        "closed probe norm requires finite exponents"
    );
    let n = setting.n;
    let np1 = setting.np1();
    let mut log_norm = T::zero();
    for (i, anchor) in [theta, delta].into_iter().enumerate() {
        let p = setting.p.at(i);
        let alpha = setting.alpha.at(i);
        match log_c2(n, s * p, p * t + alpha) {
            Eval::Divergent(d) => {
                return Eval::Divergent(Divergence::new(
                    "probe norm",
                    format!("factor {}: {}", i + 1, d.condition),
                ));
            }
            Eval::Value(l) => {
                let e = (np1 + alpha) * inv(p) + t - s;
                log_norm += l * inv(p) + e * anchor.ln();
            }
        }
    }
    Eval::Value(log_norm.exp())
}

/// The exponents `A_i = c_i + s - b_i - t - n - 1` governing the image of
/// the probe under `T`.
pub fn image_decay<T: Real>(n: usize, params: &FrParams<T>, s: T, t: T) -> [T; 2] {
    let np1 = T::from_usize(n + 1).unwrap();
    [
        params.c[0] + s - params.b[0] - t - np1,
        params.c[1] + s - params.b[1] - t - np1,
    ]
}

/// Pointwise `(T_{a,b,c} f_{theta,delta})(z, w)`, exact through the
/// two-kernel closed form:
///
/// `prod_i C1(n, c_i, s, b_i + t) * rho(z)^{a_1} rho(z, theta i)^{-A_1}
///                                * rho(w)^{a_2} rho(w, delta i)^{-A_2}`.
pub fn t_f_theta_delta<T: Real>(
    params: &FrParams<T>,
    s: T,
    t: T,
    theta: T,
    delta: T,
    z: &SiegelPoint<T>,
    w: &SiegelPoint<T>,
) -> Result<Eval<Complex<T>>, GeometryError> {
    for p in [z, w] {
        if !p.in_domain() {
            return Err(GeometryError::OutsideDomain {
                rho: p.rho().to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let n = z.dim();
    let decay = image_decay(n, params, s, t);
    let mut value = Complex::new(T::one(), T::zero());
    for (i, (point, anchor)) in [(z, theta), (w, delta)].into_iter().enumerate() {
        match log_c1(n, params.c[i], s, params.b[i] + t) {
            Eval::Divergent(d) => {
                return Ok(Eval::Divergent(Divergence::new(
                    "probe image",
                    format!("factor {}: {}", i + 1, d.condition),
                )));
            }
            Eval::Value(l) => {
                let kernel = cpow(point.pairing_with_axis(anchor), -decay[i])?;
                value = value * kernel * (l + params.a[i] * point.rho().ln()).exp();
            }
        }
    }
    Ok(Eval::Value(value))
}

/// Exact target-space norm of the probe image:
///
/// `prod_i C1(n, c_i, s, b_i + t) [C2(n, q_i A_i, q_i a_i + beta_i)]^{1/q_i}
///   * theta^{(n+1+beta_1)/q_1 + a_1 - A_1}
///   * delta^{(n+1+beta_2)/q_2 + a_2 - A_2}`.
///
/// The `theta`-exponent carries the `a_i` contributed by the prefactor
/// `rho(z)^{a_i}`; with it, the log-log slope of `|Tf|/|f|` is exactly the
/// kernel-power threshold minus `c_i`.
pub fn t_f_theta_delta_norm<T: Real>(
    setting: &Setting<T>,
    params: &FrParams<T>,
    s: T,
    t: T,
    theta: T,
    delta: T,
) -> Eval<T> {
    assert!(
        setting.q.all_finite(),
        "closed image norm requires finite exponents"
    );
    let n = setting.n;
    let np1 = setting.np1();
    let decay = image_decay(n, params, s, t);
    let mut log_norm = T::zero();
    for (i, anchor) in [theta, delta].into_iter().enumerate() {
        let q = setting.q.at(i);
        let beta = setting.beta.at(i);
        let a = params.a[i];
        match log_c1(n, params.c[i], s, params.b[i] + t) {
            Eval::Divergent(d) => {
                return Eval::Divergent(Divergence::new(
                    "probe image norm",
                    format!("factor {}: {}", i + 1, d.condition),
                ));
            }
            Eval::Value(l) => log_norm += l,
        }
        // Target-side weight integrability: q_i a_i + beta_i > -1.
        let weight = q * a + beta;
        if !(weight > -T::one()) {
            return Eval::Divergent(Divergence::new(
                "probe image norm",
                format!("q{0} * a{0} + beta{0} > -1", i + 1),
            ));
        }
        match log_c2(n, q * decay[i], weight) {
            Eval::Divergent(_) => {
                return Eval::Divergent(Divergence::new(
                    "probe image norm",
                    format!(
                        "q{0} * (c{0} + s - b{0} - t - n - 1) - q{0} a{0} - beta{0} > n + 1",
                        i + 1
                    ),
                ));
            }
            Eval::Value(l) => {
                let e = (np1 + beta) * inv(q) + a - decay[i];
                log_norm += l * inv(q) + e * anchor.ln();
            }
        }
    }
    Eval::Value(log_norm.exp())
}

/// Normalisation constant of the reproducing identity:
/// `c_gamma = Gamma(n + 1 + gamma) / (4 pi^n Gamma(1 + gamma))`, in logs.
pub fn log_reproducing_constant<T: Real>(n: usize, gamma: T) -> T {
    let np1 = T::from_usize(n + 1).unwrap();
    let nf = T::from_usize(n).unwrap();
    let ln4 = lit::<T>(2.0) * T::LN_2();
    log_gamma_raw(np1 + gamma) - ln4 - nf * T::PI().ln() - log_gamma_raw(T::one() + gamma)
}
