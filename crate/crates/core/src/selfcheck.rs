//! Randomized numerical verification of the metric axioms and bounds of the
//! generalized relative entropy.
//!
//! Each `(k, s)` configuration draws `trials` triples. Trial `t` gets its own
//! RNG seeded from `(seed, configuration, t)`, and per-trial statistics are
//! merged with order-independent operations (integer sums, min, max), so the
//! report is identical however rayon schedules the work.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::gre::{breakdown_unchecked, jsd_oracle, GreBreakdown, GreParams};
use crate::prob::{max_abs_diff, NumericPolicy, ProbVector};
use crate::sample::{dirichlet, disjoint_pair, nudge, one_hot};

pub const DEFAULT_KS: [f64; 4] = [1.5, 2.0, 4.0, 10.0];
pub const DEFAULT_DIMS: [usize; 4] = [2, 3, 10, 100];

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const TRIANGLE_TOL: f64 = 1e-9;
pub const BOUND_TOL: f64 = 1e-12;
pub const ORACLE_TOL: f64 = 1e-9;
pub const ATTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SelfCheckConfig {
    pub ks: Vec<f64>,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub policy: NumericPolicy,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        Self {
            ks: DEFAULT_KS.to_vec(),
            dims: DEFAULT_DIMS.to_vec(),
            trials: 100_000,
            seed: 42,
            policy: NumericPolicy::default(),
        }
    }
}

/// Outcome of one family of checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: u64,
    pub violations: u64,
    /// Suite-specific extreme value, described by `worst_label`.
    pub worst: f64,
    pub worst_label: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub trials: usize,
    pub ks: Vec<f64>,
    pub dims: Vec<usize>,
    pub base: f64,
    pub epsilon: f64,
    pub equality_tol: f64,
    pub suites: Vec<SuiteResult>,
}

impl SelfCheckReport {
    pub fn violations(&self) -> u64 {
        self.suites.iter().map(|s| s.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for SelfCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "selfcheck seed={} trials={} ks={:?} dims={:?} base={:?} epsilon={:?} equality_tol={:?}",
            self.seed, self.trials, self.ks, self.dims, self.base, self.epsilon, self.equality_tol
        )?;
        for s in &self.suites {
            writeln!(
                f,
                "{:<12} checks={:<9} violations={:<6} {}={:?}",
                s.name, s.checks, s.violations, s.worst_label, s.worst
            )?;
        }
        write!(
            f,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    checks: u64,
    violations: u64,
    worst: f64,
}

impl Tally {
    fn new(worst: f64) -> Self {
        Self { checks: 0, violations: 0, worst }
    }

    fn record(&mut self, ok: bool) {
        self.checks += 1;
        self.violations += u64::from(!ok);
    }

    fn merge_max(self, o: Self) -> Self {
        Self {
            checks: self.checks + o.checks,
            violations: self.violations + o.violations,
            worst: self.worst.max(o.worst),
        }
    }

    fn merge_min(self, o: Self) -> Self {
        Self {
            worst: self.worst.min(o.worst),
            ..self.merge_max(o)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    /// max d(p,p)
    identity: Tally,
    /// max |d(p,q) - d(q,p)|
    symmetry: Tally,
    /// min d(x,y) + d(y,z) - d(x,z)
    triangle: Tally,
    /// max of d - 4L over distinct pairs
    range_upper: Tally,
    /// min of d - 2L over distinct pairs
    range_lower: Tally,
    /// max directional sum minus L
    directional: Tally,
    /// min directional sum
    nonnegative: Tally,
    /// max |forward| over approx-equal pairs
    inference: Tally,
    /// max |forward + backward - 2 jsd| at k = 2
    oracle: Tally,
    /// max |d - 4L| over disjoint-support pairs
    attainment: Tally,
    /// max |r_term - expected|
    tolerance: Tally,
}

impl Default for Stats {
    fn default() -> Self {
        Self {
            identity: Tally::new(0.0),
            symmetry: Tally::new(0.0),
            triangle: Tally::new(f64::INFINITY),
            range_upper: Tally::new(f64::NEG_INFINITY),
            range_lower: Tally::new(f64::INFINITY),
            directional: Tally::new(f64::NEG_INFINITY),
            nonnegative: Tally::new(f64::INFINITY),
            inference: Tally::new(0.0),
            oracle: Tally::new(0.0),
            attainment: Tally::new(0.0),
            tolerance: Tally::new(0.0),
        }
    }
}

impl Stats {
    fn merge(self, o: Self) -> Self {
        Self {
            identity: self.identity.merge_max(o.identity),
            symmetry: self.symmetry.merge_max(o.symmetry),
            triangle: self.triangle.merge_min(o.triangle),
            range_upper: self.range_upper.merge_max(o.range_upper),
            range_lower: self.range_lower.merge_min(o.range_lower),
            directional: self.directional.merge_max(o.directional),
            nonnegative: self.nonnegative.merge_min(o.nonnegative),
            inference: self.inference.merge_max(o.inference),
            oracle: self.oracle.merge_max(o.oracle),
            attainment: self.attainment.merge_max(o.attainment),
            tolerance: self.tolerance.merge_max(o.tolerance),
        }
    }

    fn pair(&mut self, p: &ProbVector, q: &ProbVector, params: &GreParams) -> GreBreakdown {
        let l = params.half_gap();
        let b = breakdown_unchecked(p, q, params);
        let rev = breakdown_unchecked(q, p, params);
        let asym = (b.total - rev.total).abs();
        self.symmetry.worst = self.symmetry.worst.max(asym);
        self.symmetry.record(asym <= SYMMETRY_TOL);

        for sum in [b.forward_sum, b.backward_sum] {
            self.directional.worst = self.directional.worst.max(sum - l);
            self.directional.record(sum <= l + BOUND_TOL);
            self.nonnegative.worst = self.nonnegative.worst.min(sum);
            self.nonnegative.record(sum >= -BOUND_TOL);
        }

        let equal = max_abs_diff(p, q) <= params.policy().equality_tol();
        if equal {
            self.inference.worst = self.inference.worst.max(b.forward_sum.abs());
            self.inference.record(b.forward_sum.abs() <= BOUND_TOL && b.r_term == 0.0);
        } else {
            self.inference.record(b.forward_sum > 0.0 && b.backward_sum > 0.0);
            self.range_upper.worst = self.range_upper.worst.max(b.total - 4.0 * l);
            self.range_lower.worst = self.range_lower.worst.min(b.total - 2.0 * l);
            self.range_upper.record(b.total <= 4.0 * l + BOUND_TOL);
            self.range_lower.record(b.total > 2.0 * l);
        }

        if params.k() == 2.0 {
            let jsd = jsd_oracle(p, q, params.policy().log_base()).expect("same dimension");
            let err = (b.forward_sum + b.backward_sum - 2.0 * jsd).abs();
            self.oracle.worst = self.oracle.worst.max(err);
            self.oracle.record(err <= ORACLE_TOL);
        }
        b
    }

    fn identity(&mut self, p: &ProbVector, params: &GreParams) {
        let b = breakdown_unchecked(p, p, params);
        self.identity.worst = self.identity.worst.max(b.total);
        self.identity.record(b.total == 0.0 && b.r_term == 0.0);
    }

    fn triangle(&mut self, xy: f64, yz: f64, xz: f64) {
        let slack = xy + yz - xz;
        self.triangle.worst = self.triangle.worst.min(slack);
        self.triangle.record(slack >= -TRIANGLE_TOL);
    }

    fn trial(&mut self, rng: &mut ChaCha8Rng, trial: usize, s: usize, params: &GreParams) {
        let (x, y, z) = match trial % 8 {
            5 => (one_hot(rng, s), dirichlet(rng, s), one_hot(rng, s)),
            6 => {
                let (x, y) = disjoint_pair(rng, s);
                (x, y, dirichlet(rng, s))
            }
            7 => {
                let x = dirichlet(rng, s);
                (x.clone(), x, dirichlet(rng, s))
            }
            _ => (dirichlet(rng, s), dirichlet(rng, s), dirichlet(rng, s)),
        };
        let xy = self.pair(&x, &y, params).total;
        let yz = self.pair(&y, &z, params).total;
        let xz = self.pair(&x, &z, params).total;
        self.triangle(xy, yz, xz);
        self.triangle(xy, xz, yz);
        self.triangle(xz, yz, xy);
        for v in [&x, &y, &z] {
            self.identity(v, params);
        }
        if trial % 8 == 6 {
            let err = (xy - 4.0 * params.half_gap()).abs();
            self.attainment.worst = self.attainment.worst.max(err);
            self.attainment.record(err <= ATTAIN_TOL);
        }
        self.tolerance_boundary(&x, params);
    }

    /// Pairs separated by half and by four times the equality tolerance must
    /// get r-terms of exactly 0 and 2L.
    fn tolerance_boundary(&mut self, p: &ProbVector, params: &GreParams) {
        let tol = params.policy().equality_tol();
        let l = params.half_gap();
        for delta in [0.5 * tol, 4.0 * tol] {
            if delta == 0.0 {
                continue;
            }
            let q = nudge(p, delta);
            let b = breakdown_unchecked(p, &q, params);
            let distinct = max_abs_diff(p, &q) > tol;
            let expected = if distinct { 2.0 * l } else { 0.0 };
            let err = (b.r_term - expected).abs();
            self.tolerance.worst = self.tolerance.worst.max(err);
            let ok = err == 0.0 && if distinct { b.total >= 2.0 * l } else { b.total < 2.0 * l };
            self.tolerance.record(ok);
        }
    }

    fn into_suites(self) -> Vec<SuiteResult> {
        let suite = |name, t: Tally, worst_label| SuiteResult {
            name,
            checks: t.checks,
            violations: t.violations,
            worst: t.worst,
            worst_label,
        };
        vec![
            suite("identity", self.identity, "max_self_distance"),
            suite("symmetry", self.symmetry, "max_asymmetry"),
            suite("triangle", self.triangle, "min_slack"),
            suite("range_upper", self.range_upper, "max_excess_over_4L"),
            suite("range_lower", self.range_lower, "min_margin_over_2L"),
            suite("lemma_upper", self.directional, "max_sum_minus_L"),
            suite("lemma_lower", self.nonnegative, "min_directional_sum"),
            suite("inference", self.inference, "max_equal_forward_sum"),
            suite("k2_oracle", self.oracle, "max_jsd_error"),
            suite("attainment", self.attainment, "max_disjoint_error"),
            suite("tolerance", self.tolerance, "max_r_term_error"),
        ]
    }
}

fn trial_seed(seed: u64, config: usize, trial: usize) -> u64 {
    seed ^ ((config as u64) << 40) ^ trial as u64
}

pub fn run(config: &SelfCheckConfig) -> Result<SelfCheckReport> {
    let mut total = Stats::default();
    for (ki, &k) in config.ks.iter().enumerate() {
        let params = GreParams::new(k, config.policy)?;
        for (si, &s) in config.dims.iter().enumerate() {
            assert!(s >= 2, "selfcheck dimensions must be at least 2");
            let cfg = ki * config.dims.len() + si;
            let stats = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, cfg, t));
                    let mut stats = Stats::default();
                    stats.trial(&mut rng, t, s, &params);
                    stats
                })
                .reduce(Stats::default, Stats::merge);
            total = total.merge(stats);
        }
    }
    Ok(SelfCheckReport {
        seed: config.seed,
        trials: config.trials,
        ks: config.ks.clone(),
        dims: config.dims.clone(),
        base: config.policy.log_base(),
        epsilon: config.policy.epsilon(),
        equality_tol: config.policy.equality_tol(),
        suites: total.into_suites(),
    })
}
