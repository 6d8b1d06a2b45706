//! Monte Carlo replication and simulation-vs-theory cross-validation.
//!
//! A replica farm runs the simulator across consecutive seeds, accumulates
//! per-state occupation times and late-window minima, and compares the means
//! against the occupation-time identity
//!
//! ```text
//! E|T_k ∩ [0,T]| = (λ^k / k!) ∫_0^T m(t)^k exp(-λ m(t)) dt
//! ```
//!
//! evaluated by quadrature. Replicas may run concurrently: partial
//! accumulators merge associatively, and the reduction happens in a fixed
//! order so results are identical regardless of thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::CriticalState;
use crate::quadrature::integrate_decaying;
use crate::simulator::{occupation, simulate, OccupationRecord, QueueConfig, SimError};

/// Errors from experiment orchestration.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExperimentError {
    #[error("need at least 2 replicas, got {0}")]
    TooFewReplicas(u32),
    #[error("need at least 3 horizons for a liminf estimate, got {0}")]
    TooFewHorizons(usize),
    #[error("horizons must be increasing and roughly geometric: {0}")]
    BadHorizons(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Mean and standard error of one state's occupation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateOccupancy {
    pub state: u32,
    pub mean: f64,
    pub std_error: f64,
}

/// Mergeable accumulator of replica occupation records.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyAccumulator {
    k_max: u32,
    n: u32,
    n_failed: u32,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    overflow_sum: f64,
    overflow_sum_sq: f64,
    late_min_histogram: BTreeMap<u32, u32>,
}

impl OccupancyAccumulator {
    pub fn new(k_max: u32) -> Self {
        OccupancyAccumulator {
            k_max,
            n: 0,
            n_failed: 0,
            sum: vec![0.0; k_max as usize + 1],
            sum_sq: vec![0.0; k_max as usize + 1],
            overflow_sum: 0.0,
            overflow_sum_sq: 0.0,
            late_min_histogram: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, rec: &OccupationRecord) {
        assert_eq!(rec.per_state.len(), self.sum.len(), "k_max mismatch");
        self.n += 1;
        for (k, &t) in rec.per_state.iter().enumerate() {
            self.sum[k] += t;
            self.sum_sq[k] += t * t;
        }
        self.overflow_sum += rec.overflow;
        self.overflow_sum_sq += rec.overflow * rec.overflow;
        *self.late_min_histogram.entry(rec.late_min).or_insert(0) += 1;
    }

    pub fn add_failure(&mut self) {
        self.n_failed += 1;
    }

    /// Associative, commutative merge of partial accumulators.
    pub fn merge(mut self, other: Self) -> Self {
        assert_eq!(self.k_max, other.k_max, "k_max mismatch");
        self.n += other.n;
        self.n_failed += other.n_failed;
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self.overflow_sum += other.overflow_sum;
        self.overflow_sum_sq += other.overflow_sum_sq;
        for (v, c) in other.late_min_histogram {
            *self.late_min_histogram.entry(v).or_insert(0) += c;
        }
        self
    }

    pub fn replicas(&self) -> u32 {
        self.n
    }

    fn occupancy(&self, state: u32, sum: f64, sum_sq: f64) -> StateOccupancy {
        let n = self.n as f64;
        let mean = sum / n;
        let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
        StateOccupancy {
            state,
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// Aggregated outcome of a replica farm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub law: String,
    pub lambda: f64,
    pub horizon: f64,
    pub base_seed: u64,
    pub k_max: u32,
    pub n_replicas: u32,
    /// Replicas that overflowed the event cap; excluded from the statistics.
    pub n_failed: u32,
    pub per_state: Vec<StateOccupancy>,
    pub overflow: StateOccupancy,
    /// Frequency of each late-window minimum across replicas.
    pub late_min_histogram: BTreeMap<u32, u32>,
    /// Quadrature of the occupation-time identity, truncated at the horizon.
    pub theory_occ: Vec<f64>,
    /// `(mc_mean - theory) / std_error` per state.
    pub z_scores: Vec<f64>,
}

impl MonteCarloSummary {
    /// CSV table `k,mc_mean,mc_stderr,theory,z`, one row per state.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("k,mc_mean,mc_stderr,theory,z\n");
        for (k, s) in self.per_state.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                k, s.mean, s.std_error, self.theory_occ[k], self.z_scores[k]
            ));
        }
        out
    }

    /// Fraction of replicas whose late-window minimum is at most `v`.
    pub fn late_min_fraction_at_most(&self, v: u32) -> f64 {
        let hits: u32 = self
            .late_min_histogram
            .iter()
            .filter(|(&value, _)| value <= v)
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.n_replicas as f64
    }
}

/// Expected occupation of state `k` on `[0, horizon]` by quadrature:
/// `(λ^k / k!) ∫_0^horizon m(t)^k exp(-λ m(t)) dt`.
pub fn theory_occupation(
    config: &QueueConfig,
    k: u32,
    rel_tol: f64,
) -> Result<f64, ExperimentError> {
    let law = config.law.clone();
    let lambda = config.lambda;
    let est = integrate_decaying(
        |t| {
            let m = law.truncated_mean(t).unwrap_or(f64::NAN);
            m.powi(k as i32) * (-lambda * m).exp()
        },
        0.0,
        config.horizon,
        rel_tol,
    );
    if !est.value.is_finite() {
        return Err(ExperimentError::Sim(SimError::Law(
            crate::service_laws::LawError::Numeric(
                "occupation-time integrand failed to evaluate".to_string(),
            ),
        )));
    }
    // λ^k / k!, built incrementally to dodge overflow
    let mut prefactor = 1.0;
    for i in 1..=k {
        prefactor *= lambda / i as f64;
    }
    Ok(prefactor * est.value)
}

/// Run `n_replicas` independent replicas with seeds `seed, seed+1, ...`,
/// aggregate occupation statistics, and cross-validate against quadrature.
/// Failed replicas (event-cap overflows) are counted and skipped rather than
/// aborting the batch.
pub fn run_experiment(
    config: &QueueConfig,
    n_replicas: u32,
    k_max: u32,
) -> Result<MonteCarloSummary, ExperimentError> {
    run_experiment_with_tol(config, n_replicas, k_max, 1e-8)
}

/// [`run_experiment`] with an explicit quadrature tolerance for the theory
/// column.
pub fn run_experiment_with_tol(
    config: &QueueConfig,
    n_replicas: u32,
    k_max: u32,
    quad_rel_tol: f64,
) -> Result<MonteCarloSummary, ExperimentError> {
    if n_replicas < 2 {
        return Err(ExperimentError::TooFewReplicas(n_replicas));
    }

    // replicas in parallel, reduction in fixed order: output is independent
    // of the thread count
    let records: Vec<Option<OccupationRecord>> = (0..n_replicas)
        .into_par_iter()
        .map(|i| {
            let cfg = config.with_seed(config.seed.wrapping_add(i as u64));
            match simulate(&cfg) {
                Ok(traj) => Some(occupation(&traj, k_max)),
                Err(_) => None,
            }
        })
        .collect();

    let mut acc = OccupancyAccumulator::new(k_max);
    for rec in &records {
        match rec {
            Some(r) => acc.add(r),
            None => acc.add_failure(),
        }
    }
    summarize_with_tol(config, acc, quad_rel_tol)
}

/// Build the summary from a (possibly merged) accumulator.
pub fn summarize(
    config: &QueueConfig,
    acc: OccupancyAccumulator,
) -> Result<MonteCarloSummary, ExperimentError> {
    summarize_with_tol(config, acc, 1e-8)
}

fn summarize_with_tol(
    config: &QueueConfig,
    acc: OccupancyAccumulator,
    quad_rel_tol: f64,
) -> Result<MonteCarloSummary, ExperimentError> {
    if acc.n < 2 {
        return Err(ExperimentError::TooFewReplicas(acc.n));
    }
    let k_max = acc.k_max;
    let per_state: Vec<StateOccupancy> = (0..=k_max)
        .map(|k| acc.occupancy(k, acc.sum[k as usize], acc.sum_sq[k as usize]))
        .collect();
    let overflow = acc.occupancy(k_max + 1, acc.overflow_sum, acc.overflow_sum_sq);

    let mut theory_occ = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        theory_occ.push(theory_occupation(config, k, quad_rel_tol)?);
    }
    let z_scores: Vec<f64> = per_state
        .iter()
        .zip(&theory_occ)
        .map(|(s, &th)| {
            if s.std_error > 0.0 {
                (s.mean - th) / s.std_error
            } else if (s.mean - th).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY * (s.mean - th).signum()
            }
        })
        .collect();

    Ok(MonteCarloSummary {
        law: config.law.name().to_string(),
        lambda: config.lambda,
        horizon: config.horizon,
        base_seed: config.seed,
        k_max,
        n_replicas: acc.n,
        n_failed: acc.n_failed,
        per_state,
        overflow,
        late_min_histogram: acc.late_min_histogram,
        theory_occ,
        z_scores,
    })
}

/// Agreement between the empirical liminf diagnostics and a reference
/// classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LiminfAgreement {
    /// The stabilized lower value equals the reference critical state.
    Agrees,
    /// No stabilization and the lower diagnostics climb with the horizon —
    /// what a transient queue looks like at finite horizons.
    ConsistentWithTransient,
    /// The diagnostics contradict the reference.
    Disagrees,
    /// The mode decreased with the horizon: the horizons are too small to
    /// read anything off.
    HorizonTooSmall,
}

/// Per-horizon liminf diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonDiagnostic {
    pub horizon: f64,
    pub n_replicas: u32,
    /// Smallest late-min value attaining the maximum frequency.
    pub mode: u32,
    /// 10th percentile of the late-min distribution.
    pub lower_decile: u32,
}

/// Empirical liminf report across geometrically spaced horizons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiminfReport {
    pub per_horizon: Vec<HorizonDiagnostic>,
    /// Lower decile shared by the last two horizons, when they agree.
    pub stabilized_lower_value: Option<u32>,
    /// Fraction of replicas with `late_min` strictly below the reference
    /// state, per horizon (only for a finite reference).
    pub fraction_below_reference: Option<Vec<f64>>,
    pub reference: CriticalState,
    pub agreement: LiminfAgreement,
    /// The mode moved down with the horizon: diagnostics are unreliable.
    pub horizon_too_small: bool,
}

fn mode_and_decile(hist: &BTreeMap<u32, u32>) -> (u32, u32) {
    let total: u32 = hist.values().sum();
    let mut mode = 0;
    let mut best = 0;
    for (&v, &c) in hist {
        if c > best {
            best = c;
            mode = v;
        }
    }
    let want = (total as f64 * 0.1).ceil() as u32;
    let mut acc = 0;
    let mut decile = 0;
    for (&v, &c) in hist {
        acc += c;
        if acc >= want.max(1) {
            decile = v;
            break;
        }
    }
    (mode, decile)
}

/// Estimate the almost-sure liminf from summaries at increasing horizons and
/// compare with a reference critical state. Requires at least three
/// summaries with horizons increasing by a factor of 1.5 or more.
///
/// Agreement with a finite reference `k` holds when either the lower decile
/// stabilizes exactly at `k` (the clean recurrent picture), or the mass
/// below `k` is draining: at most 20% of replicas sit under `k` at the last
/// horizon, the spill-below fraction never grows, and the stabilized decile
/// sits at or above `k`. The second route is what a mixed regime looks like
/// at finite horizons — visits to the critical state are real but sparse, so
/// quantiles land slightly above it while the mass below vanishes.
pub fn liminf_estimate(
    summaries: &[MonteCarloSummary],
    reference: CriticalState,
) -> Result<LiminfReport, ExperimentError> {
    if summaries.len() < 3 {
        return Err(ExperimentError::TooFewHorizons(summaries.len()));
    }
    for w in summaries.windows(2) {
        if w[1].horizon < 1.5 * w[0].horizon {
            return Err(ExperimentError::BadHorizons(format!(
                "{} then {}",
                w[0].horizon, w[1].horizon
            )));
        }
    }

    let per_horizon: Vec<HorizonDiagnostic> = summaries
        .iter()
        .map(|s| {
            let (mode, lower_decile) = mode_and_decile(&s.late_min_histogram);
            HorizonDiagnostic {
                horizon: s.horizon,
                n_replicas: s.n_replicas,
                mode,
                lower_decile,
            }
        })
        .collect();

    let horizon_too_small = per_horizon.windows(2).any(|w| w[1].mode < w[0].mode);
    let last = per_horizon[per_horizon.len() - 1];
    let prev = per_horizon[per_horizon.len() - 2];
    let stabilized_lower_value =
        (last.lower_decile == prev.lower_decile).then_some(last.lower_decile);

    let fraction_below_reference = match reference {
        CriticalState::Finite(k) => Some(
            summaries
                .iter()
                .map(|s| {
                    if k == 0 {
                        0.0
                    } else {
                        s.late_min_fraction_at_most(k - 1)
                    }
                })
                .collect::<Vec<f64>>(),
        ),
        _ => None,
    };

    let agreement = match reference {
        CriticalState::Finite(k) => {
            let exact = stabilized_lower_value == Some(k);
            let sandwich = fraction_below_reference.as_ref().is_some_and(|fracs| {
                let draining = fracs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                let small = *fracs.last().unwrap() <= 0.20;
                draining && small && stabilized_lower_value.is_some_and(|v| v >= k)
            });
            if exact || sandwich {
                LiminfAgreement::Agrees
            } else if horizon_too_small {
                LiminfAgreement::HorizonTooSmall
            } else {
                LiminfAgreement::Disagrees
            }
        }
        CriticalState::Infinite | CriticalState::AtLeast(_) => {
            let deciles: Vec<u32> = per_horizon.iter().map(|h| h.lower_decile).collect();
            let nondecreasing = deciles.windows(2).all(|w| w[1] >= w[0]);
            let climbing = deciles.last().unwrap() > deciles.first().unwrap();
            if nondecreasing && (climbing || stabilized_lower_value.is_none()) {
                LiminfAgreement::ConsistentWithTransient
            } else if horizon_too_small {
                LiminfAgreement::HorizonTooSmall
            } else {
                LiminfAgreement::Disagrees
            }
        }
    };

    Ok(LiminfReport {
        per_horizon,
        stabilized_lower_value,
        fraction_below_reference,
        reference,
        agreement,
        horizon_too_small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service_laws::ServiceLaw;

    fn exp_config(horizon: f64, seed: u64) -> QueueConfig {
        QueueConfig::new(1.0, ServiceLaw::exponential(1.0).unwrap(), horizon, seed).unwrap()
    }

    #[test]
    fn rejects_single_replica() {
        let cfg = exp_config(10.0, 1);
        assert!(matches!(
            run_experiment(&cfg, 1, 3),
            Err(ExperimentError::TooFewReplicas(1))
        ));
    }

    #[test]
    fn std_error_definition_for_two_replicas() {
        let cfg = exp_config(20.0, 9);
        let summary = run_experiment(&cfg, 2, 3).unwrap();
        // recompute by hand from the two records
        let occ: Vec<OccupationRecord> = (0..2)
            .map(|i| {
                occupation(
                    &simulate(&cfg.with_seed(cfg.seed + i)).unwrap(),
                    3,
                )
            })
            .collect();
        for k in 0..=3usize {
            let a = occ[0].per_state[k];
            let b = occ[1].per_state[k];
            let mean = 0.5 * (a + b);
            let sample_std = ((a - mean).powi(2) + (b - mean).powi(2)).sqrt(); // /(n-1) = /1
            let expected_se = sample_std / 2f64.sqrt();
            assert!(
                (summary.per_state[k].std_error - expected_se).abs() < 1e-12,
                "k={k}"
            );
        }
    }

    #[test]
    fn failed_replicas_are_counted_not_fatal() {
        // cap near the median event count so some replicas overflow and
        // some survive
        let cfg = exp_config(200.0, 3).with_max_events(400);
        let summary = run_experiment(&cfg, 40, 2).unwrap();
        assert!(summary.n_failed > 0, "expected some replicas to overflow");
        assert!(summary.n_replicas >= 2);
        assert_eq!(summary.n_replicas + summary.n_failed, 40);
        let hist_total: u32 = summary.late_min_histogram.values().sum();
        assert_eq!(hist_total, summary.n_replicas);
    }

    #[test]
    fn occupation_means_match_quadrature_for_exponential() {
        // the small in-module version of the cross-validation: T=30, 400
        // replicas, states 0..=3 within 4 standard errors
        let cfg = exp_config(30.0, 1234);
        let summary = run_experiment(&cfg, 400, 3).unwrap();
        assert_eq!(summary.n_failed, 0);
        for k in 0..=3usize {
            let z = summary.z_scores[k];
            assert!(z.abs() <= 4.0, "k={k}: z={z}, summary {:?}", summary.per_state[k]);
        }
    }

    #[test]
    fn theory_occupation_closed_form_constant_service() {
        // S ≡ 1, λ=1: E|T_0 ∩ [0,T]| = (1 - e^-1) + (T-1) e^-1
        let cfg = QueueConfig::new(
            1.0,
            ServiceLaw::deterministic(1.0).unwrap(),
            50.0,
            0,
        )
        .unwrap();
        let th = theory_occupation(&cfg, 0, 1e-10).unwrap();
        let e1 = (-1.0f64).exp();
        let closed = (1.0 - e1) + 49.0 * e1;
        assert!((th - closed).abs() < 1e-7, "quadrature {th} vs closed {closed}");
    }

    #[test]
    fn aggregation_is_associative_within_tolerance() {
        let cfg = exp_config(25.0, 500);
        let k_max = 4;
        let records: Vec<OccupationRecord> = (0..60)
            .map(|i| occupation(&simulate(&cfg.with_seed(cfg.seed + i)).unwrap(), k_max))
            .collect();

        let mut mono = OccupancyAccumulator::new(k_max);
        for r in &records {
            mono.add(r);
        }
        // partition into uneven batches, merge in a different shape
        let mut batches: Vec<OccupancyAccumulator> = Vec::new();
        for chunk in records.chunks(7) {
            let mut acc = OccupancyAccumulator::new(k_max);
            for r in chunk {
                acc.add(r);
            }
            batches.push(acc);
        }
        let merged = batches
            .into_iter()
            .rev()
            .reduce(|a, b| b.merge(a))
            .unwrap();

        let s1 = summarize(&cfg, mono).unwrap();
        let s2 = summarize(&cfg, merged).unwrap();
        assert_eq!(s1.late_min_histogram, s2.late_min_histogram);
        for k in 0..=k_max as usize {
            let rel = (s1.per_state[k].mean - s2.per_state[k].mean).abs()
                / s1.per_state[k].mean.abs().max(1e-300);
            assert!(rel <= 1e-9, "k={k}: relative drift {rel}");
            let rel_se = (s1.per_state[k].std_error - s2.per_state[k].std_error).abs()
                / s1.per_state[k].std_error.abs().max(1e-300);
            assert!(rel_se <= 1e-9, "k={k}: stderr drift {rel_se}");
        }
    }

    #[test]
    fn experiment_is_deterministic_and_thread_independent() {
        let cfg = exp_config(15.0, 42);
        let a = run_experiment(&cfg, 50, 3).unwrap();
        let b = run_experiment(&cfg, 50, 3).unwrap();
        assert_eq!(a, b);
        // and under a differently sized thread pool
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| run_experiment(&cfg, 50, 3)).unwrap();
        assert_eq!(a, c);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn liminf_requires_three_geometric_horizons() {
        let cfg = exp_config(10.0, 7);
        let s = run_experiment(&cfg, 10, 2).unwrap();
        assert!(matches!(
            liminf_estimate(&[s.clone(), s.clone()], CriticalState::Finite(0)),
            Err(ExperimentError::TooFewHorizons(2))
        ));
        let mut s2 = s.clone();
        s2.horizon = 11.0;
        assert!(matches!(
            liminf_estimate(
                &[s.clone(), s2, s.clone()],
                CriticalState::Finite(0)
            ),
            Err(ExperimentError::BadHorizons(_))
        ));
    }

    #[test]
    fn liminf_agrees_for_recurrent_exponential() {
        let summaries: Vec<MonteCarloSummary> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&h| run_experiment(&exp_config(h, 33), 60, 3).unwrap())
            .collect();
        let report = liminf_estimate(&summaries, CriticalState::Finite(0)).unwrap();
        assert_eq!(report.stabilized_lower_value, Some(0));
        assert_eq!(report.agreement, LiminfAgreement::Agrees);
        for h in &report.per_horizon {
            assert_eq!(h.lower_decile, 0);
        }
    }

    #[test]
    fn theory_occupation_trends_match_regimes_across_the_matrix() {
        // recurrent configurations: the state-0 theory occupation grows
        // without bound in the horizon; transient ones: every state's value
        // converges over doubling horizons
        let recurrent: Vec<(ServiceLaw, f64)> = vec![
            (ServiceLaw::exponential(1.0).unwrap(), 1.0),
            (ServiceLaw::deterministic(1.0).unwrap(), 1.0),
            (ServiceLaw::pareto(2.0, 1.0).unwrap(), 1.0),
            (ServiceLaw::pareto(1.0, 1.0).unwrap(), 0.5),
            (ServiceLaw::strange(0.5).unwrap(), 1.0),
        ];
        for (law, lambda) in recurrent {
            let at = |t: f64| {
                let cfg = QueueConfig::new(lambda, law.clone(), t, 0).unwrap();
                theory_occupation(&cfg, 0, 1e-9).unwrap()
            };
            let (a, b, c) = (at(1e2), at(1e3), at(1e4));
            assert!(
                a < b && b < c,
                "{} λ={lambda}: occ0 not growing ({a}, {b}, {c})",
                law.name()
            );
        }

        let transient: Vec<(ServiceLaw, f64)> = vec![
            (ServiceLaw::pareto(0.5, 1.0).unwrap(), 1.0),
            (ServiceLaw::pareto(1.0, 1.0).unwrap(), 2.0),
        ];
        for (law, lambda) in transient {
            // horizons large enough that even the slowest in-matrix tail
            // (~(ln T)^k / T for the critical-exponent pareto) is inside
            // tolerance
            for k in 0..=4u32 {
                let at = |t: f64| {
                    let cfg = QueueConfig::new(lambda, law.clone(), t, 0).unwrap();
                    theory_occupation(&cfg, k, 1e-9).unwrap()
                };
                let (a, b) = (at(2f64.powi(33)), at(2f64.powi(34)));
                assert!(
                    (b - a).abs() <= 1e-6 * b.abs(),
                    "{} λ={lambda} k={k}: not Cauchy ({a} vs {b})",
                    law.name()
                );
            }
        }
    }

    #[test]
    fn liminf_agrees_for_the_mixed_critical_state() {
        // strange(2.5) has critical state 2: the spill below 2 drains with
        // the horizon while the lower decile parks at or above 2
        let law = ServiceLaw::strange(2.5).unwrap();
        let summaries: Vec<MonteCarloSummary> = [100.0, 1000.0, 10_000.0]
            .iter()
            .map(|&h| {
                let cfg = QueueConfig::new(1.0, law.clone(), h, 17).unwrap();
                run_experiment(&cfg, 200, 6).unwrap()
            })
            .collect();
        let report = liminf_estimate(&summaries, CriticalState::Finite(2)).unwrap();
        assert_eq!(
            report.agreement,
            LiminfAgreement::Agrees,
            "report: {report:?}"
        );
        let fracs = report.fraction_below_reference.as_ref().unwrap();
        assert!(fracs.last().unwrap() <= &0.2);
        assert!(report.stabilized_lower_value.unwrap() >= 2);
    }

    #[test]
    fn liminf_reports_transient_growth_for_heavy_pareto() {
        let law = ServiceLaw::pareto(0.5, 1.0).unwrap();
        let summaries: Vec<MonteCarloSummary> = [100.0, 400.0, 1600.0]
            .iter()
            .map(|&h| {
                let cfg = QueueConfig::new(1.0, law.clone(), h, 71).unwrap();
                run_experiment(&cfg, 60, 3).unwrap()
            })
            .collect();
        let report = liminf_estimate(&summaries, CriticalState::Infinite).unwrap();
        assert_eq!(
            report.agreement,
            LiminfAgreement::ConsistentWithTransient,
            "report: {report:?}"
        );
        let deciles: Vec<u32> = report.per_horizon.iter().map(|h| h.lower_decile).collect();
        assert!(deciles.windows(2).all(|w| w[1] >= w[0]));
        assert!(deciles[2] > deciles[0]);
    }
}
