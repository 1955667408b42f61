//! Shannon entropy, cross entropy, relative entropy and mutual information.
//!
//! Terms with a zero left factor contribute exactly 0. The policy's ε is only
//! ever added to denominators. With ε = 0, a zero denominator under a positive
//! numerator yields `f64::INFINITY`.

use crate::error::Result;
use crate::prob::{marginals, sequential_sum, validate_pair, JointTable, NumericPolicy, ProbVector};

/// `-Σ p log p`, in units of the policy's logarithm base.
pub fn shannon_entropy(p: &ProbVector, policy: &NumericPolicy) -> f64 {
    let h = sequential_sum(
        p.as_slice()
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * policy.log(x)),
    );
    // -0.0 for point masses
    0.0 - h
}

/// `Σ p log(1 / (q + ε))`.
pub fn cross_entropy(p: &ProbVector, q: &ProbVector, policy: &NumericPolicy) -> Result<f64> {
    validate_pair(p, q)?;
    let eps = policy.epsilon();
    Ok(sequential_sum(p.as_slice().iter().zip(q.as_slice()).map(
        |(&pi, &qi)| {
            if pi == 0.0 {
                0.0
            } else {
                -pi * policy.log(qi + eps)
            }
        },
    )))
}

/// `Σ p log(p / (q + ε))`.
pub fn kl_divergence(p: &ProbVector, q: &ProbVector, policy: &NumericPolicy) -> Result<f64> {
    validate_pair(p, q)?;
    let eps = policy.epsilon();
    Ok(sequential_sum(
        p.as_slice()
            .iter()
            .zip(q.as_slice())
            .map(|(&pi, &qi)| relative_term(pi, qi + eps, policy)),
    ))
}

fn relative_term(num: f64, den: f64, policy: &NumericPolicy) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num * policy.log(num / den)
    }
}

/// `Σ p(x,y) log(p(x,y) / (p(x) p(y) + ε))`.
pub fn mutual_information(j: &JointTable, policy: &NumericPolicy) -> f64 {
    let (px, py) = marginals(j);
    let eps = policy.epsilon();
    sequential_sum((0..j.rows()).flat_map(|r| {
        let pr = px.as_slice()[r];
        j.row(r)
            .iter()
            .zip(py.as_slice())
            .map(move |(&pxy, &pc)| relative_term(pxy, pr * pc + eps, policy))
    }))
}
