//! Boundedness verdicts for `T_{a,b,c}` and `S_{a,b,c}` between weighted
//! mixed-norm spaces: the printed condition sets for every supported
//! exponent pattern, with per-inequality margins.
//!
//! Case routing, in precedence order:
//!
//! 1. infinite `p` patterns (they require the matching `q` infinite);
//! 2. for finite exponents, the chain `max(p) <= min(q)` is a global gate;
//! 3. the fixed-index patterns `p_i = q_i, alpha_i = beta_i` (with equality
//!    kernel powers), the full diagonal first;
//! 4. remaining `alpha = beta` settings are unsupported;
//! 5. the general patterns by which entries of `p` equal one.
//!
//! At an index with `p_i = 1` and `alpha_i = b_i` the verdict routes to the
//! endpoint form `c_i = a_i + (n+1+beta_i)/q_i`; such verdicts come back as
//! `BoundaryEquality` because only the necessity direction of that equality
//! is certified.

use serde::Serialize;

use crate::operators::FrParams;
use crate::space::{approx_eq, inv, Setting};
use crate::{lit, Real, EQ_TOL};

/// The exponent pattern a setting was routed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// All exponents in `(1, inf)`, weights different.
    Finite,
    /// `p = (1, p2)` with `p2 > 1`.
    FiniteP1One,
    /// `p = (p1, 1)` with `p1 > 1`.
    FiniteP2One,
    /// `p = (1, 1)`.
    FiniteBothOne,
    /// `p1 = 1` and `alpha1 = b1`: endpoint equality at the first slot.
    EndpointP1,
    /// `p2 = 1` and `alpha2 = b2`.
    EndpointP2,
    /// both slots at the endpoint equality.
    EndpointBoth,
    /// `p1 = q1`, `alpha1 = beta1`, `p2 < q2`.
    FixedIndex1,
    /// `p2 = q2`, `alpha2 = beta2`, `p1 < q1`.
    FixedIndex2,
    /// `p = q` and `alpha = beta`.
    Diagonal,
    /// `p1 = q1 = inf`, finite second slot, `alpha2 != beta2`.
    InfIndex1,
    /// `p2 = q2 = inf`, finite first slot, `alpha1 != beta1`.
    InfIndex2,
    /// `p = q = (inf, inf)`.
    InfBoth,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::Finite => "finite",
            CaseTag::FiniteP1One => "p1=1",
            CaseTag::FiniteP2One => "p2=1",
            CaseTag::FiniteBothOne => "p=(1,1)",
            CaseTag::EndpointP1 => "p1=1,alpha1=b1",
            CaseTag::EndpointP2 => "p2=1,alpha2=b2",
            CaseTag::EndpointBoth => "p=(1,1),alpha=b",
            CaseTag::FixedIndex1 => "p1=q1,alpha1=beta1",
            CaseTag::FixedIndex2 => "p2=q2,alpha2=beta2",
            CaseTag::Diagonal => "p=q,alpha=beta",
            CaseTag::InfIndex1 => "p1=q1=inf",
            CaseTag::InfIndex2 => "p2=q2=inf",
            CaseTag::InfBoth => "p=q=(inf,inf)",
        };
        f.write_str(s)
    }
}

impl Serialize for CaseTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Bounded,
    Unbounded,
    /// All conditions hold, but only with an endpoint equality whose
    /// sufficiency direction is not certified.
    BoundaryEquality,
    Unsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs < rhs`, strict.
    LessStrict,
    /// `lhs >= rhs`.
    GreaterEqual,
    /// `lhs = rhs` within the exact-match tolerance.
    Equal,
}

/// A single evaluated inequality with its margin.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck<T> {
    pub name: String,
    pub relation: Relation,
    pub lhs: T,
    pub rhs: T,
    /// Positive margins pass for the strict relations; `Equal` passes when
    /// the margin is within the tolerance of zero.
    pub margin: T,
    pub pass: bool,
}

impl<T: Real> ConditionCheck<T> {
    fn lt(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            relation: Relation::LessStrict,
            lhs,
            rhs,
            margin,
            pass: margin > T::zero(),
        }
    }

    fn ge(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let margin = lhs - rhs;
        Self {
            name: name.into(),
            relation: Relation::GreaterEqual,
            lhs,
            rhs,
            margin,
            // the boundary itself is admissible; absorb rounding noise the
            // same way the exact-equality conditions do
            pass: margin >= -lit::<T>(EQ_TOL),
        }
    }

    fn eq(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let margin = lhs - rhs;
        Self {
            name: name.into(),
            relation: Relation::Equal,
            lhs,
            rhs,
            margin,
            pass: margin.abs() <= lit(EQ_TOL),
        }
    }
}

/// The verdict: outcome, the case applied, and every condition with its
/// margin.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict<T> {
    pub outcome: Outcome,
    #[serde(rename = "case_tag")]
    pub case: Option<CaseTag>,
    pub conditions: Vec<ConditionCheck<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unsupported_reason: Option<String>,
}

impl<T> Verdict<T> {
    fn unsupported(reason: String) -> Self {
        Self {
            outcome: Outcome::Unsupported,
            case: None,
            conditions: Vec::new(),
            unsupported_reason: Some(reason),
        }
    }

    /// Names of the failing conditions.
    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// The kernel-power threshold
/// `n + 1 + a_i + b_i + (n+1+beta_i)/q_i - (n+1+alpha_i)/p_i`.
///
/// At `p_i = 1` this algebraically reduces to
/// `a_i + b_i - alpha_i + (n+1+beta_i)/q_i`. `None` when either exponent at
/// the index is infinite (those patterns carry their own kernel condition).
pub fn threshold_c<T: Real>(setting: &Setting<T>, i: usize, a_i: T, b_i: T) -> Option<T> {
    let p = setting.p.at(i);
    let q = setting.q.at(i);
    if p.is_infinite() || q.is_infinite() {
        return None;
    }
    let np1 = setting.np1();
    Some(np1 + a_i + b_i + (np1 + setting.beta.at(i)) * inv(q) - (np1 + setting.alpha.at(i)) * inv(p))
}

/// Classifies a setting to its case, independently of the operator
/// parameters. Endpoint refinements (`alpha_i = b_i` at `p_i = 1`) are
/// applied later by `check_bounded`, which sees the parameters.
pub fn classify_setting<T: Real>(setting: &Setting<T>) -> Result<CaseTag, String> {
    let p = &setting.p;
    let q = &setting.q;
    let p1_inf = p.at(0).is_infinite();
    let p2_inf = p.at(1).is_infinite();
    match (p1_inf, p2_inf) {
        (true, true) => {
            if q.at(0).is_infinite() && q.at(1).is_infinite() {
                Ok(CaseTag::InfBoth)
            } else {
                Err("p = (inf, inf) requires q = (inf, inf)".into())
            }
        }
        (true, false) => {
            if !q.at(0).is_infinite() {
                return Err("p1 = inf requires q1 = inf".into());
            }
            if q.at(1).is_infinite() {
                return Err("q2 = inf with finite p2 is not covered".into());
            }
            if p.at(1) > q.at(1) {
                return Err("p2 > q2".into());
            }
            if approx_eq(setting.alpha.at(1), setting.beta.at(1)) {
                return Err("p1 = q1 = inf with alpha2 = beta2 is not covered".into());
            }
            Ok(CaseTag::InfIndex1)
        }
        (false, true) => {
            if !q.at(1).is_infinite() {
                return Err("p2 = inf requires q2 = inf".into());
            }
            if q.at(0).is_infinite() {
                return Err("q1 = inf with finite p1 is not covered".into());
            }
            if p.at(0) > q.at(0) {
                return Err("p1 > q1".into());
            }
            if approx_eq(setting.alpha.at(0), setting.beta.at(0)) {
                return Err("p2 = q2 = inf with alpha1 = beta1 is not covered".into());
            }
            Ok(CaseTag::InfIndex2)
        }
        (false, false) => {
            if q.at(0).is_infinite() || q.at(1).is_infinite() {
                return Err("an infinite q entry requires the matching p entry infinite".into());
            }
            if p.max() > q.min() {
                return Err(format!(
                    "exponent chain violated: max(p) = {} exceeds min(q) = {}",
                    p.max(),
                    q.min()
                ));
            }
            let fixed1 = approx_eq(p.at(0), q.at(0)) && approx_eq(setting.alpha.at(0), setting.beta.at(0));
            let fixed2 = approx_eq(p.at(1), q.at(1)) && approx_eq(setting.alpha.at(1), setting.beta.at(1));
            if fixed1 && fixed2 {
                return Ok(CaseTag::Diagonal);
            }
            if fixed1 && p.at(1) < q.at(1) {
                return Ok(CaseTag::FixedIndex1);
            }
            if fixed2 && p.at(0) < q.at(0) {
                return Ok(CaseTag::FixedIndex2);
            }
            if setting.weights_equal() {
                return Err(
                    "alpha = beta is only covered when the exponents fix an index".into(),
                );
            }
            let p1_one = approx_eq(p.at(0), T::one());
            let p2_one = approx_eq(p.at(1), T::one());
            Ok(match (p1_one, p2_one) {
                (false, false) => CaseTag::Finite,
                (true, false) => CaseTag::FiniteP1One,
                (false, true) => CaseTag::FiniteP2One,
                (true, true) => CaseTag::FiniteBothOne,
            })
        }
    }
}

/// How the kernel power is constrained at one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KernelForm {
    AtLeastThreshold,
    EqualDimensional,
    EqualEndpoint,
}

/// Evaluates the boundedness verdict for the parameters in the setting.
pub fn check_bounded<T: Real>(setting: &Setting<T>, params: &FrParams<T>) -> Verdict<T> {
    let tag = match classify_setting(setting) {
        Ok(tag) => tag,
        Err(reason) => return Verdict::unsupported(reason),
    };
    let np1 = setting.np1();
    let mut conditions = Vec::new();
    let mut endpoint = [false, false];

    match tag {
        CaseTag::InfBoth | CaseTag::InfIndex1 | CaseTag::InfIndex2 => {
            for i in 0..2 {
                let idx = i + 1;
                if setting.p.at(i).is_infinite() {
                    conditions.push(ConditionCheck::lt(format!("weight_a_{idx}"), T::zero(), params.a[i]));
                    conditions.push(ConditionCheck::lt(format!("weight_b_{idx}"), -T::one(), params.b[i]));
                    conditions.push(ConditionCheck::eq(
                        format!("kernel_power_{idx}"),
                        params.c[i],
                        np1 + params.a[i] + params.b[i],
                    ));
                } else {
                    // the finite slot keeps its printed strict conditions;
                    // no endpoint routing in the mixed-infinity patterns
                    let mut ep = [false, false];
                    push_finite_index(setting, params, i, KernelForm::AtLeastThreshold, &mut conditions, &mut ep);
                }
            }
        }
        _ => {
            for i in 0..2 {
                let form = match (tag, i) {
                    (CaseTag::Diagonal, _) => KernelForm::EqualDimensional,
                    (CaseTag::FixedIndex1, 0) => KernelForm::EqualDimensional,
                    (CaseTag::FixedIndex2, 1) => KernelForm::EqualDimensional,
                    _ => KernelForm::AtLeastThreshold,
                };
                // Fixed-index and diagonal patterns keep the printed strict
                // weight conditions; the endpoint routing applies only in
                // the general patterns.
                let allow_endpoint = matches!(
                    tag,
                    CaseTag::Finite
                        | CaseTag::FiniteP1One
                        | CaseTag::FiniteP2One
                        | CaseTag::FiniteBothOne
                );
                let mut ep = [false, false];
                push_finite_index(
                    setting,
                    params,
                    i,
                    form,
                    &mut conditions,
                    if allow_endpoint { &mut endpoint } else { &mut ep },
                );
            }
        }
    }

    let refined = match (tag, endpoint) {
        (CaseTag::FiniteP1One, [true, _]) => CaseTag::EndpointP1,
        (CaseTag::FiniteP2One, [_, true]) => CaseTag::EndpointP2,
        (CaseTag::FiniteBothOne, [true, true]) => CaseTag::EndpointBoth,
        (CaseTag::FiniteBothOne, [true, false]) => CaseTag::EndpointP1,
        (CaseTag::FiniteBothOne, [false, true]) => CaseTag::EndpointP2,
        _ => tag,
    };

    let all_pass = conditions.iter().all(|c| c.pass);
    let outcome = if !all_pass {
        Outcome::Unbounded
    } else if endpoint[0] || endpoint[1] {
        Outcome::BoundaryEquality
    } else {
        Outcome::Bounded
    };
    Verdict {
        outcome,
        case: Some(refined),
        conditions,
        unsupported_reason: None,
    }
}

fn push_finite_index<T: Real>(
    setting: &Setting<T>,
    params: &FrParams<T>,
    i: usize,
    form: KernelForm,
    conditions: &mut Vec<ConditionCheck<T>>,
    endpoint: &mut [bool; 2],
) {
    let idx = i + 1;
    let np1 = setting.np1();
    let p = setting.p.at(i);
    let q = setting.q.at(i);
    let alpha = setting.alpha.at(i);
    let beta = setting.beta.at(i);
    let (a, b, c) = (params.a[i], params.b[i], params.c[i]);

    conditions.push(ConditionCheck::lt(format!("weight_a_{idx}"), -q * a, beta + T::one()));

    let p_is_one = approx_eq(p, T::one());
    let mut form = form;
    if p_is_one {
        if approx_eq(alpha, b) && form == KernelForm::AtLeastThreshold {
            // endpoint routing: the weight condition becomes the recorded
            // equality and the kernel power is pinned
            conditions.push(ConditionCheck::eq(format!("weight_b_{idx}"), alpha, b));
            endpoint[i] = true;
            form = KernelForm::EqualEndpoint;
        } else {
            // alpha_i + 1 < p_i (b_i + 1) reduces to alpha_i < b_i
            conditions.push(ConditionCheck::lt(format!("weight_b_{idx}"), alpha, b));
        }
    } else {
        conditions.push(ConditionCheck::lt(
            format!("weight_b_{idx}"),
            alpha + T::one(),
            p * (b + T::one()),
        ));
    }

    let name = format!("kernel_power_{idx}");
    match form {
        KernelForm::AtLeastThreshold => {
            let threshold = threshold_c(setting, i, a, b).expect("finite exponents");
            conditions.push(ConditionCheck::ge(name, c, threshold));
        }
        KernelForm::EqualDimensional => {
            conditions.push(ConditionCheck::eq(name, c, np1 + a + b));
        }
        KernelForm::EqualEndpoint => {
            conditions.push(ConditionCheck::eq(name, c, a + (np1 + beta) * inv(q)));
        }
    }
}

/// The aggregated kernel-power condition `sum_i c_i >= sum_i threshold_i`
/// (a strictly weaker consequence of the per-index conditions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumCondition<T> {
    pub required: T,
    pub actual: T,
    pub pass: bool,
}

pub fn sum_condition<T: Real>(setting: &Setting<T>, params: &FrParams<T>) -> Option<SumCondition<T>> {
    let t1 = threshold_c(setting, 0, params.a[0], params.b[0])?;
    let t2 = threshold_c(setting, 1, params.a[1], params.b[1])?;
    let required = t1 + t2;
    let actual = params.c[0] + params.c[1];
    Some(SumCondition { required, actual, pass: actual >= required })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ExponentPair, WeightPair};

    fn setting(
        n: usize,
        p: (f64, f64),
        q: (f64, f64),
        alpha: (f64, f64),
        beta: (f64, f64),
    ) -> Setting<f64> {
        Setting::new(
            n,
            ExponentPair::new(p.0, p.1).unwrap(),
            ExponentPair::new(q.0, q.1).unwrap(),
            WeightPair::new(alpha.0, alpha.1).unwrap(),
            WeightPair::new(beta.0, beta.1).unwrap(),
        )
        .unwrap()
    }

    fn worked() -> Setting<f64> {
        setting(1, (2.0, 2.0), (4.0, 4.0), (0.0, 0.0), (1.0, 1.0))
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_setting(&worked()).unwrap(), CaseTag::Finite);
        let diag = setting(1, (2.0, 2.0), (2.0, 2.0), (0.5, 0.5), (0.5, 0.5));
        assert_eq!(classify_setting(&diag).unwrap(), CaseTag::Diagonal);
        let bad = setting(1, (2.0, 2.0), (1.0, 4.0), (0.0, 0.0), (1.0, 1.0));
        assert!(classify_setting(&bad).is_err());
        let inf = setting(
            1,
            (f64::INFINITY, f64::INFINITY),
            (f64::INFINITY, f64::INFINITY),
            (0.0, 0.0),
            (1.0, 1.0),
        );
        assert_eq!(classify_setting(&inf).unwrap(), CaseTag::InfBoth);
        let mixed_inf = setting(1, (f64::INFINITY, 2.0), (f64::INFINITY, 4.0), (0.0, 0.0), (1.0, 1.0));
        assert_eq!(classify_setting(&mixed_inf).unwrap(), CaseTag::InfIndex1);
        // q infinite with p finite is not covered
        let bad_inf = setting(1, (2.0, 2.0), (f64::INFINITY, 4.0), (0.0, 0.0), (1.0, 1.0));
        assert!(classify_setting(&bad_inf).is_err());
        // alpha = beta without a fixed index is not covered
        let eq_w = setting(1, (2.0, 2.0), (3.0, 4.0), (0.0, 0.0), (0.0, 0.0));
        assert!(classify_setting(&eq_w).is_err());
    }

    #[test]
    fn threshold_examples() {
        let s = worked();
        let t = threshold_c(&s, 0, 0.0, 0.0).unwrap();
        assert!((t - 1.75).abs() < 1e-15);
        // p_i = 1 reduction to the endpoint display
        for k in 0..100 {
            let a = -0.7 + 0.03 * k as f64;
            let b = 0.1 + 0.02 * k as f64;
            let alpha = -0.5 + 0.01 * k as f64;
            let beta = 0.2 + 0.015 * k as f64;
            let q = 1.5 + 0.05 * k as f64;
            let st = setting(1, (1.0, 2.0), (q, q.max(2.0)), (alpha, 0.0), (beta, 1.0));
            let general = threshold_c(&st, 0, a, b).unwrap();
            let endpoint_form = a + b - alpha + (2.0 + beta) / q;
            assert!(
                (general - endpoint_form).abs() < 1e-12,
                "k = {k}: {general} vs {endpoint_form}"
            );
        }
        // alpha = beta, p = q: threshold collapses to n + 1 + a + b
        let diag = setting(1, (2.0, 3.0), (2.0, 3.0), (0.5, 0.2), (0.5, 0.2));
        let t0 = threshold_c(&diag, 0, 0.3, 0.4).unwrap();
        assert!((t0 - (2.0 + 0.3 + 0.4)).abs() < 1e-15);
    }

    #[test]
    fn worked_example_verdicts() {
        let s = worked();
        let good = FrParams::new([0.0, 0.0], [0.0, 0.0], [2.0, 2.0]);
        let v = check_bounded(&s, &good);
        assert_eq!(v.outcome, Outcome::Bounded);
        assert_eq!(v.case, Some(CaseTag::Finite));
        let margins: Vec<f64> = v
            .conditions
            .iter()
            .filter(|c| c.name.starts_with("kernel_power"))
            .map(|c| c.margin)
            .collect();
        assert!(margins.iter().all(|m| (m - 0.25).abs() < 1e-12));

        let bad = FrParams::new([0.0, 0.0], [0.0, 0.0], [1.5, 2.0]);
        let v = check_bounded(&s, &bad);
        assert_eq!(v.outcome, Outcome::Unbounded);
        assert_eq!(v.failing(), vec!["kernel_power_1"]);
        let c1 = v.conditions.iter().find(|c| c.name == "kernel_power_1").unwrap();
        assert!((c1.margin + 0.25).abs() < 1e-12);
    }

    #[test]
    fn inf_case_verdict() {
        let s = setting(
            1,
            (f64::INFINITY, f64::INFINITY),
            (f64::INFINITY, f64::INFINITY),
            (0.0, 0.0),
            (1.0, 1.0),
        );
        let params = FrParams::new([1.0, 1.0], [0.0, 0.0], [3.0, 3.0]);
        let v = check_bounded(&s, &params);
        assert_eq!(v.outcome, Outcome::Bounded);
        assert_eq!(v.case, Some(CaseTag::InfBoth));
        // c must equal n + 1 + a + b exactly
        let off = FrParams::new([1.0, 1.0], [0.0, 0.0], [3.0, 3.1]);
        assert_eq!(check_bounded(&s, &off).outcome, Outcome::Unbounded);
    }

    #[test]
    fn endpoint_routing() {
        let s = setting(1, (1.0, 2.0), (2.0, 4.0), (0.3, 0.0), (1.0, 1.0));
        // alpha1 = b1 pins c1 = a1 + (n+1+beta1)/q1 = 0.2 + 3/2
        let params = FrParams::new([0.2, 0.0], [0.3, 0.0], [1.7, 2.0]);
        let v = check_bounded(&s, &params);
        assert_eq!(v.case, Some(CaseTag::EndpointP1));
        assert_eq!(v.outcome, Outcome::BoundaryEquality);
        // moving c1 off the endpoint equality is unbounded
        let off = FrParams::new([0.2, 0.0], [0.3, 0.0], [1.8, 2.0]);
        assert_eq!(check_bounded(&s, &off).outcome, Outcome::Unbounded);
        // alpha1 > b1 fails the strict weight condition
        let worse = FrParams::new([0.2, 0.0], [0.1, 0.0], [1.7, 2.0]);
        let v = check_bounded(&s, &worse);
        assert_eq!(v.outcome, Outcome::Unbounded);
        assert!(v.failing().contains(&"weight_b_1"));
    }

    #[test]
    fn diagonal_requires_exact_kernel_power() {
        let s = setting(1, (2.0, 2.0), (2.0, 2.0), (0.5, 0.5), (0.5, 0.5));
        let exact = FrParams::new([0.1, 0.1], [0.2, 0.2], [2.3, 2.3]);
        assert_eq!(check_bounded(&s, &exact).outcome, Outcome::Bounded);
        let above = FrParams::new([0.1, 0.1], [0.2, 0.2], [2.5, 2.3]);
        assert_eq!(check_bounded(&s, &above).outcome, Outcome::Unbounded);
    }

    #[test]
    fn sum_condition_examples() {
        let s = worked();
        let partial = FrParams::new([0.0, 0.0], [0.0, 0.0], [1.5, 2.1]);
        let sc = sum_condition(&s, &partial).unwrap();
        assert!((sc.required - 3.5).abs() < 1e-12);
        assert!((sc.actual - 3.6).abs() < 1e-12);
        assert!(sc.pass);
        // per-index still fails
        assert_eq!(check_bounded(&s, &partial).outcome, Outcome::Unbounded);
        let worse = FrParams::new([0.0, 0.0], [0.0, 0.0], [1.0, 1.0]);
        assert!(!sum_condition(&s, &worse).unwrap().pass);
    }

    #[test]
    fn bounded_params_pass_the_sum_condition() {
        let mut lcg = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64) / ((1u64 << 53) as f64)
        };
        let mut checked = 0;
        for _ in 0..500 {
            let p1 = 1.2 + 2.0 * next();
            let p2 = 1.2 + 2.0 * next();
            let q1 = p1.max(p2) + 2.0 * next();
            let q2 = p1.max(p2) + 2.0 * next();
            let s = setting(
                1,
                (p1, p2),
                (q1, q2),
                (next() - 0.5, next() - 0.5),
                (next() * 2.0 - 0.5, next() * 2.0 - 0.5),
            );
            let mut params = FrParams::new([0.0; 2], [0.0; 2], [0.0; 2]);
            for i in 0..2 {
                params.a[i] = -(s.beta.at(i) + 1.0) / s.q.at(i) + 0.05 + next();
                params.b[i] = (s.alpha.at(i) + 1.0) / s.p.at(i) - 1.0 + 0.05 + next();
                params.c[i] =
                    threshold_c(&s, i, params.a[i], params.b[i]).unwrap() + next();
            }
            let v = check_bounded(&s, &params);
            if v.outcome != Outcome::Bounded {
                continue;
            }
            checked += 1;
            assert!(sum_condition(&s, &params).unwrap().pass);
        }
        assert!(checked > 300, "generator mostly failed: {checked}");
    }

    #[test]
    fn unsupported_verdict_carries_reason() {
        let bad = setting(1, (2.0, 2.0), (1.0, 4.0), (0.0, 0.0), (1.0, 1.0));
        let v = check_bounded(&bad, &FrParams::new([0.0; 2], [0.0; 2], [2.0; 2]));
        assert_eq!(v.outcome, Outcome::Unsupported);
        assert!(v.unsupported_reason.unwrap().contains("chain"));
    }

    #[test]
    fn condition_duality_under_adjoint() {
        // If the parameters pass, the adjoint data passes for the dual
        // setting with (b - alpha, a + beta, c), margin for margin.
        let mut lcg = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((lcg >> 11) as f64) / ((1u64 << 53) as f64)
        };
        let mut checked = 0;
        for _ in 0..400 {
            let p1 = 1.0 + 0.2 + 2.0 * next();
            let p2 = 1.0 + 0.2 + 2.0 * next();
            let qmin = p1.max(p2);
            let q1 = qmin + 2.0 * next();
            let q2 = qmin + 2.0 * next();
            let alpha = (next() * 2.0 - 0.8, next() * 2.0 - 0.8);
            let beta = (next() * 2.0 - 0.8, next() * 2.0 - 0.8);
            let s = setting(1, (p1, p2), (q1, q2), alpha, beta);
            if classify_setting(&s).is_err() {
                continue;
            }
            let a = [next() - 0.2, next() - 0.2];
            let b = [next(), next()];
            let params = FrParams::new(a, b, [2.0 + next(), 2.0 + next()]);
            let v = check_bounded(&s, &params);
            if v.outcome == Outcome::Unsupported {
                continue;
            }
            // dual data
            let dual_setting = setting(
                1,
                (
                    crate::space::conjugate_exponent(q1),
                    crate::space::conjugate_exponent(q2),
                ),
                (
                    crate::space::conjugate_exponent(p1),
                    crate::space::conjugate_exponent(p2),
                ),
                beta,
                alpha,
            );
            let dual_params = FrParams::new(
                [b[0] - alpha.0, b[1] - alpha.1],
                [a[0] + beta.0, a[1] + beta.1],
                params.c,
            );
            let dv = check_bounded(&dual_setting, &dual_params);
            if dv.outcome == Outcome::Unsupported {
                continue;
            }
            checked += 1;
            assert_eq!(v.outcome, dv.outcome, "primal and dual verdicts differ");
            // kernel conditions carry identical margins
            for idx in 1..=2 {
                let name = format!("kernel_power_{idx}");
                let m1 = v.conditions.iter().find(|c| c.name == name).unwrap().margin;
                let m2 = dv.conditions.iter().find(|c| c.name == name).unwrap().margin;
                assert!((m1 - m2).abs() < 1e-9, "kernel margins differ: {m1} vs {m2}");
            }
        }
        assert!(checked > 50, "too few comparable draws: {checked}");
    }
}
