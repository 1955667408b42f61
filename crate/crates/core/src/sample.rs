//! Random distributions for property checks, benchmarks and tests.

use rand::Rng;
use rand_distr::Exp1;

use crate::prob::ProbVector;

/// A uniform draw from the probability simplex (symmetric Dirichlet(1)),
/// built by normalizing i.i.d. standard exponentials.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, s: usize) -> ProbVector {
    loop {
        let draws: Vec<f64> = (0..s).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            let probs = draws.into_iter().map(|x| x / total).collect();
            if let Ok(p) = ProbVector::new(probs) {
                return p;
            }
        }
    }
}

/// A point mass on a random component.
pub fn one_hot<R: Rng + ?Sized>(rng: &mut R, s: usize) -> ProbVector {
    ProbVector::one_hot(s, rng.random_range(0..s)).expect("index in range")
}

/// Two Dirichlet-like distributions on complementary halves of the
/// components. Requires `s >= 2`.
pub fn disjoint_pair<R: Rng + ?Sized>(rng: &mut R, s: usize) -> (ProbVector, ProbVector) {
    assert!(s >= 2, "disjoint supports need at least two components");
    let split = rng.random_range(1..s);
    let left = dirichlet(rng, split);
    let right = dirichlet(rng, s - split);
    let mut p = left.into_inner();
    p.resize(s, 0.0);
    let mut q = vec![0.0; split];
    q.extend(right.into_inner());
    (
        ProbVector::new(p).expect("normalized"),
        ProbVector::new(q).expect("normalized"),
    )
}

/// Moves mass `delta` from the largest component of `p` to its smallest,
/// producing a vector at L∞ distance `delta` (up to rounding) from `p`.
pub fn nudge(p: &ProbVector, delta: f64) -> ProbVector {
    let v = p.as_slice();
    let (hi, _) = v
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, &x)| if x > best.1 { (i, x) } else { best });
    let (lo, _) = v
        .iter()
        .enumerate()
        .fold((0, f64::MAX), |best, (i, &x)| if x < best.1 { (i, x) } else { best });
    let mut out = v.to_vec();
    if hi != lo {
        let delta = delta.min(out[hi]);
        out[hi] -= delta;
        out[lo] += delta;
    }
    ProbVector::new(out).expect("mass preserved")
}
