//! Arithmetic of the Siegel upper half-space `U = { z : Im z_n > |z'|^2 }`:
//! the height `rho(z)`, the sesquilinear pairing `rho(z, w)`, principal
//! branch complex powers, and the invariant (Bergman) distance.

use num_complex::Complex;
use thiserror::Error;

use crate::{lit, Real};

/// Tolerance for clamping the distance radicand back into `[0, 1]`.
const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// An operation that requires `rho(z) > 0` was given a point outside `U`.
    #[error("point outside the upper half-space (rho = {rho})")]
    OutsideDomain { rho: f64 },
    /// Principal-branch power of a base outside the right half-plane.
    #[error("complex power base has non-positive real part (re = {re})")]
    NonPositiveRealPart { re: f64 },
    /// Distance radicand strayed from `[0, 1]` by more than the tolerance,
    /// which signals inconsistent inputs rather than rounding noise.
    #[error("distance radicand {value} outside [0, 1] beyond tolerance")]
    RadicandOutOfRange { value: f64 },
}

/// A point `z = (z', z_n)` with `z'` in `C^{n-1}` and `z_n` in `C`.
///
/// Points with `rho(z) <= 0` are representable on purpose: boundary scaling
/// experiments drive `rho -> 0`. Operations that need membership in `U`
/// perform the check themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint<T> {
    zprime: Vec<Complex<T>>,
    zn: Complex<T>,
}

impl<T: Real> SiegelPoint<T> {
    pub fn new(zprime: Vec<Complex<T>>, zn: Complex<T>) -> Self {
        Self { zprime, zn }
    }

    /// The point `(0', h i)` on the vertical axis; its height is exactly `h`.
    pub fn axis(n: usize, height: T) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            zprime: vec![Complex::new(T::zero(), T::zero()); n - 1],
            zn: Complex::new(T::zero(), height),
        }
    }

    pub fn dim(&self) -> usize {
        self.zprime.len() + 1
    }

    pub fn zprime(&self) -> &[Complex<T>] {
        &self.zprime
    }

    pub fn zn(&self) -> Complex<T> {
        self.zn
    }

    /// Height above the boundary: `rho(z) = Im z_n - |z'|^2`.
    pub fn rho(&self) -> T {
        self.zn.im - self.horizontal_norm_sqr()
    }

    /// `|z'|^2`.
    pub fn horizontal_norm_sqr(&self) -> T {
        self.zprime.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn in_domain(&self) -> bool {
        self.rho() > T::zero()
    }

    /// The pairing `rho(z, w) = (i/2)(conj(w_n) - z_n) - <z', w'>` with
    /// `<z', w'> = sum_j z'_j conj(w'_j)` (linear in the first slot).
    ///
    /// On the diagonal it reduces to the real number `rho(z)`, and
    /// `rho(z, w) = conj(rho(w, z))`. For `z, w` in `U` its real part is
    /// `(rho(z) + rho(w) + |z' - w'|^2) / 2 > 0`.
    pub fn pairing(&self, w: &Self) -> Complex<T> {
        assert_eq!(self.dim(), w.dim(), "points must share a dimension");
        let half_i = Complex::new(T::zero(), lit::<T>(0.5));
        let inner: Complex<T> = self
            .zprime
            .iter()
            .zip(w.zprime.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        half_i * (w.zn.conj() - self.zn) - inner
    }

    /// `rho(z, h i)` against the axis point of height `h`, allocation free.
    pub fn pairing_with_axis(&self, height: T) -> Complex<T> {
        let half = lit::<T>(0.5);
        // (i/2)(conj(h i) - z_n) = (h - i z_n) / 2, and <z', 0'> = 0.
        Complex::new(
            (height + self.zn.im) * half,
            -self.zn.re * half,
        )
    }

    /// Invariant distance `tanh^{-1} sqrt(1 - rho(z) rho(w) / |rho(z,w)|^2)`.
    ///
    /// Requires both points in `U`. The radicand is clamped into `[0, 1]`
    /// when within `1e-12` of the interval; larger violations are errors.
    pub fn bergman_distance(&self, w: &Self) -> Result<T, GeometryError> {
        for p in [self, w] {
            if !p.in_domain() {
                return Err(GeometryError::OutsideDomain {
                    rho: p.rho().to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let prod = self.rho() * w.rho();
        let pair_sqr = self.pairing(w).norm_sqr();
        let radicand = T::one() - prod / pair_sqr;
        let tol = lit::<T>(RADICAND_TOL);
        let clamped = if radicand < T::zero() {
            if radicand < -tol {
                return Err(GeometryError::RadicandOutOfRange {
                    value: radicand.to_f64().unwrap_or(f64::NAN),
                });
            }
            T::zero()
        } else if radicand > T::one() {
            if radicand > T::one() + tol {
                return Err(GeometryError::RadicandOutOfRange {
                    value: radicand.to_f64().unwrap_or(f64::NAN),
                });
            }
            T::one()
        } else {
            radicand
        };
        Ok(clamped.sqrt().atanh())
    }
}

/// Principal-branch power `base^exponent` for bases in the open right
/// half-plane (the only region the pairings can land in on `U`).
pub fn cpow<T: Real>(base: Complex<T>, exponent: T) -> Result<Complex<T>, GeometryError> {
    if !(base.re > T::zero()) {
        return Err(GeometryError::NonPositiveRealPart {
            re: base.re.to_f64().unwrap_or(f64::NAN),
        });
    }
    let log_r = base.norm_sqr().ln() * lit::<T>(0.5);
    let theta = base.im.atan2(base.re);
    let magnitude = (exponent * log_r).exp();
    let angle = exponent * theta;
    Ok(Complex::new(magnitude * angle.cos(), magnitude * angle.sin()))
}

/// `cpow` that degrades to NaN instead of erroring; used inside integrands
/// where a branch violation must poison the estimate, not unwind.
pub(crate) fn cpow_or_nan<T: Real>(base: Complex<T>, exponent: T) -> Complex<T> {
    cpow(base, exponent).unwrap_or_else(|_| Complex::new(T::nan(), T::nan()))
}
