//! Generalized relative entropy.
//!
//! For distributions `p`, `q` over `s` components and a control parameter
//! `k > 1`,
//!
//! ```text
//! d(p, q) = Σ p_i log(k p_i / ((k-1) p_i + q_i))
//!         + Σ q_i log(k q_i / (p_i + (k-1) q_i))
//!         + r · log((1 + 1/(k-1))²)
//! ```
//!
//! where `r = 0` when `p` and `q` are equal and `1` otherwise. Writing
//! `L = log(k/(k-1))`, each directional sum lies in `[0, L]` and the jump term
//! is `0` or `2L`, so `d` takes values in `{0} ∪ (2L, 4L]`. It is symmetric and
//! satisfies the triangle inequality, which is what [`crate::index`] relies on.
//!
//! Equality is decided with [`approx_equal`] at the policy's `equality_tol`, so
//! `d` jumps by `2L` at that tolerance boundary. Both directional sums are
//! finite for every valid input without any ε smoothing: a term is skipped when
//! its left factor is zero, and otherwise its denominator is positive.

use serde::{Deserialize, Serialize};

use crate::entropy::shannon_entropy;
use crate::error::{Error, Result};
use crate::prob::{max_abs_diff, validate_pair, NumericPolicy, ProbVector};

/// Control parameter `k` together with the numeric policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GreParams {
    k: f64,
    policy: NumericPolicy,
    /// `ln(k/(k-1))`, cached.
    bound_nats: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    k: f64,
    policy: NumericPolicy,
}

impl TryFrom<RawParams> for GreParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let policy = NumericPolicy::new(
            raw.policy.epsilon(),
            raw.policy.log_base(),
            raw.policy.equality_tol(),
        )?;
        GreParams::new(raw.k, policy)
    }
}

impl From<GreParams> for RawParams {
    fn from(p: GreParams) -> Self {
        RawParams {
            k: p.k,
            policy: p.policy,
        }
    }
}

impl Default for GreParams {
    fn default() -> Self {
        Self::new(2.0, NumericPolicy::default()).expect("k = 2 is valid")
    }
}

impl GreParams {
    pub fn new(k: f64, policy: NumericPolicy) -> Result<Self> {
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::InvalidParameter {
                name: "k",
                value: k,
                reason: "must be finite and > 1",
            });
        }
        // ln(k/(k-1)) = -ln(1 - 1/k)
        let bound_nats = -(-1.0 / k).ln_1p();
        Ok(Self {
            k,
            policy,
            bound_nats,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    /// `L = log_base(k/(k-1))`, the bound on each directional sum.
    pub fn half_gap(&self) -> f64 {
        self.policy.from_nats(self.bound_nats)
    }
}

/// The three parts of `d(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreBreakdown {
    pub forward_sum: f64,
    pub backward_sum: f64,
    pub r_term: f64,
    pub total: f64,
}

/// One term `a · ln(k a / ((k-1) a + b))`, in nats.
///
/// Evaluated as `-a · ln_1p((b - a) / (k a))`, which is exactly zero when
/// `a == b` and keeps precision when the two are close.
#[inline]
fn term_nats(a: f64, b: f64, k: f64, bound_nats: f64) -> f64 {
    if a == 0.0 || a == b {
        0.0
    } else if b == 0.0 {
        a * bound_nats
    } else {
        -a * ((b - a) / (k * a)).ln_1p()
    }
}

fn directional_nats(p: &[f64], q: &[f64], params: &GreParams) -> f64 {
    let (k, bound) = (params.k, params.bound_nats);
    p.iter()
        .zip(q)
        .fold(0.0, |acc, (&a, &b)| acc + term_nats(a, b, k, bound))
}

/// `d(p, q)` together with its forward, backward and jump components.
pub fn gre_breakdown(p: &ProbVector, q: &ProbVector, params: &GreParams) -> Result<GreBreakdown> {
    validate_pair(p, q)?;
    Ok(breakdown_unchecked(p, q, params))
}

pub(crate) fn breakdown_unchecked(p: &ProbVector, q: &ProbVector, params: &GreParams) -> GreBreakdown {
    let policy = &params.policy;
    let forward_sum = policy.from_nats(directional_nats(p.as_slice(), q.as_slice(), params));
    let backward_sum = policy.from_nats(directional_nats(q.as_slice(), p.as_slice(), params));
    let distinct = max_abs_diff(p, q) > policy.equality_tol();
    let r_term = if distinct { 2.0 * params.half_gap() } else { 0.0 };
    GreBreakdown {
        forward_sum,
        backward_sum,
        r_term,
        total: forward_sum + backward_sum + r_term,
    }
}

/// The generalized relative entropy `d(p, q)`.
pub fn gre_distance(p: &ProbVector, q: &ProbVector, params: &GreParams) -> Result<f64> {
    gre_breakdown(p, q, params).map(|b| b.total)
}

/// `4 · log_base(k/(k-1))`, attained by any pair with disjoint supports.
pub fn gre_upper_bound(params: &GreParams) -> f64 {
    4.0 * params.half_gap()
}

/// `2 · log_base(k/(k-1))`.
///
/// This is the infimum of `d` over distinct pairs. It is approached as `q`
/// tends to `p` but never attained: every distinct pair lies strictly above it.
pub fn gre_lower_bound_distinct(params: &GreParams) -> f64 {
    2.0 * params.half_gap()
}

/// Jensen–Shannon divergence `H((p+q)/2) - (H(p) + H(q))/2`, computed from
/// Shannon entropies only.
///
/// At `k = 2` the two directional sums of `d` add up to exactly twice this
/// value, which gives a structurally independent check of [`gre_distance`].
pub fn jsd_oracle(p: &ProbVector, q: &ProbVector, base: f64) -> Result<f64> {
    validate_pair(p, q)?;
    let policy = NumericPolicy::new(0.0, base, 0.0)?;
    let mid: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(q.as_slice())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mid = ProbVector::new(mid)?;
    Ok(shannon_entropy(&mid, &policy)
        - 0.5 * (shannon_entropy(p, &policy) + shannon_entropy(q, &policy)))
}
