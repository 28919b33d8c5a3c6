//! Exponent and weight frames for the weighted mixed-norm spaces on
//! `U x U`: an exponent pair in `[1, inf]^2`, a weight pair in `(-1, inf)^2`,
//! and the full setting `(n, p, q, alpha, beta)` boundedness is judged
//! against.

use serde::Serialize;
use thiserror::Error;

use crate::{Real, EQ_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("exponent {value} outside [1, inf]")]
    ExponentOutOfRange { value: f64 },
    #[error("weight {value} must be greater than -1")]
    WeightOutOfRange { value: f64 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// A pair of Lebesgue exponents, each in `[1, inf]`; infinity is the
/// scalar's own infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair<T>([T; 2]);

impl<T: Real> ExponentPair<T> {
    pub fn new(p1: T, p2: T) -> Result<Self, SpaceError> {
        for p in [p1, p2] {
            if p.is_nan() || p < T::one() {
                return Err(SpaceError::ExponentOutOfRange {
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self([p1, p2]))
    }

    pub fn at(&self, i: usize) -> T {
        self.0[i]
    }

    pub fn max(&self) -> T {
        if self.0[0] > self.0[1] {
            self.0[0]
        } else {
            self.0[1]
        }
    }

    pub fn min(&self) -> T {
        if self.0[0] < self.0[1] {
            self.0[0]
        } else {
            self.0[1]
        }
    }

    /// Hoelder conjugate pair: `1/p + 1/p' = 1`, with `1' = inf`, `inf' = 1`.
    pub fn conjugate(&self) -> Self {
        Self([conjugate_exponent(self.0[0]), conjugate_exponent(self.0[1])])
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|p| p.is_finite())
    }
}

/// Hoelder conjugate of a single exponent.
pub fn conjugate_exponent<T: Real>(p: T) -> T {
    if p.is_infinite() {
        T::one()
    } else if (p - T::one()).abs() <= crate::lit(EQ_TOL) {
        T::infinity()
    } else {
        p / (p - T::one())
    }
}

/// `1/p`, with `1/inf = 0`.
pub fn inv<T: Real>(p: T) -> T {
    if p.is_infinite() {
        T::zero()
    } else {
        p.recip()
    }
}

/// `1/p' = 1 - 1/p`, computed without forming the conjugate.
pub fn conj_inv<T: Real>(p: T) -> T {
    T::one() - inv(p)
}

/// A pair of weights, each in `(-1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPair<T>([T; 2]);

impl<T: Real> WeightPair<T> {
    pub fn new(a1: T, a2: T) -> Result<Self, SpaceError> {
        for a in [a1, a2] {
            if a.is_nan() || a <= -T::one() || a.is_infinite() {
                return Err(SpaceError::WeightOutOfRange {
                    value: a.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self([a1, a2]))
    }

    pub fn at(&self, i: usize) -> T {
        self.0[i]
    }
}

/// The exponent/weight frame `(n, p, q, alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting<T> {
    pub n: usize,
    pub p: ExponentPair<T>,
    pub q: ExponentPair<T>,
    pub alpha: WeightPair<T>,
    pub beta: WeightPair<T>,
}

impl<T: Real> Setting<T> {
    pub fn new(
        n: usize,
        p: ExponentPair<T>,
        q: ExponentPair<T>,
        alpha: WeightPair<T>,
        beta: WeightPair<T>,
    ) -> Result<Self, SpaceError> {
        if n == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        Ok(Self { n, p, q, alpha, beta })
    }

    /// `n + 1` in the scalar type; the dimensional constant in every
    /// exponent formula.
    pub fn np1(&self) -> T {
        T::from_usize(self.n + 1).expect("small dimension")
    }

    pub fn weights_equal(&self) -> bool {
        approx_eq(self.alpha.at(0), self.beta.at(0)) && approx_eq(self.alpha.at(1), self.beta.at(1))
    }
}

/// Equality up to the crate-wide exact-match tolerance; infinities compare
/// by sign.
pub fn approx_eq<T: Real>(x: T, y: T) -> bool {
    if x.is_infinite() || y.is_infinite() {
        return x == y;
    }
    (x - y).abs() <= crate::lit(EQ_TOL)
}

impl<T: Real> Serialize for ExponentPair<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(2))?;
        for v in self.0 {
            if v.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&v.to_f64().unwrap_or(f64::NAN))?;
            }
        }
        seq.end()
    }
}

impl<T: Real> Serialize for WeightPair<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(2))?;
        for v in self.0 {
            seq.serialize_element(&v.to_f64().unwrap_or(f64::NAN))?;
        }
        seq.end()
    }
}
