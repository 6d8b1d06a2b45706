//! Exact event-driven simulation of the M/G/∞ queue.
//!
//! The queue is simulated through its planar Poisson representation: each
//! customer is a point `(arrival time, service duration)` of a Poisson
//! process with intensity `λ dt × dF_S(u)`, and the occupancy `Y_t` counts
//! the points whose service interval covers `t`. Arrivals are generated
//! sequentially with `Exp(λ)` gaps, service durations by inverse-CDF draws,
//! and departures merged through a binary heap, producing the full
//! piecewise-constant path of `Y_t` with no time discretization.
//!
//! Randomness discipline: one ChaCha stream for interarrival gaps, one for
//! service draws, both derived deterministically from the seed. Extending
//! the horizon therefore extends a path instead of reshuffling it, and equal
//! configurations reproduce bit-identical trajectories. When an arrival and
//! a departure collide numerically (a probability-zero event), the arrival
//! is processed first; the convention is fixed so replays stay bitwise
//! reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::quadrature::integrate_decaying;
use crate::service_laws::{LawError, ServiceLaw};

/// Default cap on stored path events per replica (~0.3 GiB worst case).
pub const DEFAULT_MAX_EVENTS: usize = 20_000_000;

const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;

/// Errors from simulation and path post-processing.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(
        "event count exceeded the cap of {cap} at simulated time {at_time:.6}; \
         shorten the horizon, raise the cap, or process the path in a \
         streaming pass instead of materializing it"
    )]
    EventCapExceeded { cap: usize, at_time: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("q must lie strictly inside (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Full configuration of one simulation run.
#[derive(Debug, Clone)]
pub struct QueueConfig {
    /// Poisson arrival rate (1/time).
    pub lambda: f64,
    /// Service-time distribution.
    pub law: ServiceLaw,
    /// Simulated horizon `T > 0`.
    pub horizon: f64,
    /// Seed of the deterministic generator pair.
    pub seed: u64,
    /// Cap on stored events.
    pub max_events: usize,
}

impl QueueConfig {
    pub fn new(lambda: f64, law: ServiceLaw, horizon: f64, seed: u64) -> Result<Self, SimError> {
        if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
            return Err(SimError::InvalidConfig(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if horizon.is_nan() || horizon <= 0.0 || horizon.is_infinite() {
            return Err(SimError::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(QueueConfig {
            lambda,
            law,
            horizon,
            seed,
            max_events: DEFAULT_MAX_EVENTS,
        })
    }

    pub fn with_max_events(mut self, cap: usize) -> Self {
        self.max_events = cap;
        self
    }

    /// Same configuration with a different seed (replica farms).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c
    }
}

/// One jump of the occupancy path: the value of `Y` from `time` onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEvent {
    pub time: f64,
    pub value: u32,
}

/// Piecewise-constant occupancy path on `[0, horizon]`, anchored at `(0, 0)`
/// (or at the initial customer count). Consecutive values differ by exactly
/// one; the path is right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Anchor plus one entry per arrival/departure, in time order.
    pub events: Vec<PathEvent>,
    pub horizon: f64,
}

impl Trajectory {
    /// Jumps after the anchor.
    pub fn jumps(&self) -> &[PathEvent] {
        &self.events[1..]
    }

    /// Number of arrivals in `[0, horizon]`.
    pub fn arrival_count(&self) -> usize {
        self.events
            .windows(2)
            .filter(|w| w[1].value > w[0].value)
            .count()
    }

    /// Value of `Y_t` (right-continuous) for `t ∈ [0, horizon]`.
    pub fn value_at(&self, t: f64) -> u32 {
        debug_assert!(t >= 0.0);
        let idx = self.events.partition_point(|e| e.time <= t);
        self.events[idx.saturating_sub(1).min(self.events.len() - 1)].value
    }

    /// CSV export with header `t,y`: event times and post-event values,
    /// anchor included. Shortest-roundtrip float formatting keeps replays
    /// byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.events.len() + 4);
        out.push_str("t,y\n");
        for e in &self.events {
            out.push_str(&format!("{},{}\n", e.time, e.value));
        }
        out
    }
}

fn exp_gap<R: Rng>(rng: &mut R, lambda: f64) -> f64 {
    // inverse CDF on u ∈ [0,1): -ln(1-u)/λ, finite with probability one
    let u: f64 = rng.random();
    -(-u).ln_1p() / lambda
}

#[derive(PartialEq)]
struct DepartureTime(f64);
impl Eq for DepartureTime {}
impl PartialOrd for DepartureTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for DepartureTime {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap: reverse the natural order; departure times are never NaN
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
    }
}

/// Simulate the queue from an empty start.
pub fn simulate(config: &QueueConfig) -> Result<Trajectory, SimError> {
    simulate_with_initial(config, &[])
}

/// Simulate with extra customers already in service at time zero, given
/// their remaining service durations. The superposition property of the
/// infinite-server queue makes this the coupling used by the domination
/// tests: the arrival and service streams are untouched by the initial
/// customers.
pub fn simulate_with_initial(
    config: &QueueConfig,
    initial_remaining: &[f64],
) -> Result<Trajectory, SimError> {
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
    arrival_rng.set_stream(ARRIVAL_STREAM);
    let mut service_rng = ChaCha8Rng::seed_from_u64(config.seed);
    service_rng.set_stream(SERVICE_STREAM);

    let horizon = config.horizon;
    let mut departures: BinaryHeap<DepartureTime> = BinaryHeap::new();
    for &r in initial_remaining {
        if r.is_nan() || r < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "initial remaining service must be nonnegative, got {r}"
            )));
        }
        departures.push(DepartureTime(r));
    }

    let mut value = initial_remaining.len() as u32;
    let mut events = Vec::with_capacity(1024);
    events.push(PathEvent { time: 0.0, value });

    let mut next_arrival = exp_gap(&mut arrival_rng, config.lambda);
    loop {
        if events.len() >= config.max_events {
            return Err(SimError::EventCapExceeded {
                cap: config.max_events,
                at_time: events.last().map(|e| e.time).unwrap_or(0.0),
            });
        }
        let next_departure = departures.peek().map(|d| d.0);
        let arrival_due = next_arrival <= horizon
            && next_departure.is_none_or(|d| next_arrival <= d);
        if arrival_due {
            value += 1;
            events.push(PathEvent {
                time: next_arrival,
                value,
            });
            let service = config.law.quantile(service_rng.random());
            departures.push(DepartureTime(next_arrival + service));
            next_arrival += exp_gap(&mut arrival_rng, config.lambda);
        } else if let Some(d) = next_departure.filter(|&d| d <= horizon) {
            departures.pop();
            value -= 1;
            events.push(PathEvent { time: d, value });
        } else {
            break;
        }
    }

    Ok(Trajectory { events, horizon })
}

/// Occupation times per state over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationRecord {
    /// `per_state[k]` = Lebesgue measure of `{t : Y_t = k}` for `k <= k_max`.
    pub per_state: Vec<f64>,
    /// Pooled occupation of all states above `k_max`.
    pub overflow: f64,
    pub horizon: f64,
    /// Minimum of `Y_t` over the late window `[T/2, T]` — the finite-horizon
    /// stand-in for the liminf.
    pub late_min: u32,
    /// `Y` at the horizon.
    pub final_value: u32,
}

impl OccupationRecord {
    /// CSV export with header `k,time`; one row per state plus a trailing
    /// `overflow` row for the pooled states above `k_max`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,time\n");
        for (k, t) in self.per_state.iter().enumerate() {
            out.push_str(&format!("{k},{t}\n"));
        }
        out.push_str(&format!("overflow,{}\n", self.overflow));
        out
    }
}

/// Accumulate inter-event durations into per-state buckets and extract the
/// late-window minimum. Durations are exact differences of event times, so
/// the buckets sum to the horizon up to one rounding per event.
pub fn occupation(trajectory: &Trajectory, k_max: u32) -> OccupationRecord {
    let horizon = trajectory.horizon;
    let window_start = horizon / 2.0;
    let mut per_state = vec![0.0f64; k_max as usize + 1];
    let mut overflow = 0.0f64;
    let mut late_min = u32::MAX;

    let n = trajectory.events.len();
    for (i, e) in trajectory.events.iter().enumerate() {
        let end = if i + 1 < n {
            trajectory.events[i + 1].time.min(horizon)
        } else {
            horizon
        };
        let start = e.time;
        let span = end - start;
        if span > 0.0 {
            if e.value <= k_max {
                per_state[e.value as usize] += span;
            } else {
                overflow += span;
            }
            if end > window_start {
                late_min = late_min.min(e.value);
            }
        } else if i + 1 == n && start >= window_start {
            // zero-length final piece still defines Y at the horizon
            late_min = late_min.min(e.value);
        }
    }
    let final_value = trajectory.events.last().map(|e| e.value).unwrap_or(0);
    if late_min == u32::MAX {
        late_min = final_value;
    }

    OccupationRecord {
        per_state,
        overflow,
        horizon,
        late_min,
        final_value,
    }
}

/// Lower-tail Chernoff exponent `γ_q = 1 - q - q ln(1/q)`, positive on
/// `q ∈ (0, 1)`.
pub fn chernoff_exponent(q: f64) -> f64 {
    debug_assert!(q > 0.0 && q < 1.0);
    1.0 - q + q * q.ln()
}

/// Chernoff bound on the lower tail of a Poisson variable:
/// `P[X <= q·mu] <= exp(-γ_q · mu)` for `X ~ Poisson(mu)`.
pub fn chernoff_poisson_bound(mu: f64, q: f64) -> f64 {
    debug_assert!(mu >= 0.0);
    (-chernoff_exponent(q) * mu).exp()
}

/// Measure of the time the path spends below a fraction `q` of its Poisson
/// mean, against the integral bound on that measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub q: f64,
    pub t_min: f64,
    /// Lebesgue measure of `{t ∈ [t_min, T] : Y_t < q λ m(t)}`.
    pub h_q_measure: f64,
    /// `∫_0^T exp(-γ_q λ m(t)) dt`: the finite-horizon version of the bound
    /// on the expected violation measure.
    pub bound_value: f64,
    /// Start of the first violation at or after `t_min`, if any.
    pub first_violation_after: Option<f64>,
}

/// Walk the piecewise-constant path against the increasing threshold
/// `q λ m(t)`. Within a piece where `Y ≡ c`, the violation subinterval is
/// found by inverting `m` with monotone bisection to an absolute time
/// tolerance of `1e-10 · horizon`.
pub fn growth_check(
    trajectory: &Trajectory,
    config: &QueueConfig,
    q: f64,
    t_min: f64,
) -> Result<GrowthReport, SimError> {
    if q.is_nan() || q <= 0.0 || q >= 1.0 {
        return Err(SimError::InvalidFraction(q));
    }
    if t_min.is_nan() || t_min < 0.0 {
        return Err(SimError::InvalidConfig(format!(
            "t_min must be nonnegative, got {t_min}"
        )));
    }
    let horizon = trajectory.horizon;
    let lambda = config.lambda;
    let law = &config.law;
    let threshold = |t: f64| -> Result<f64, SimError> {
        Ok(q * lambda * law.truncated_mean(t)?)
    };
    let time_tol = 1e-10 * horizon;

    let mut measure = 0.0f64;
    let mut first_violation: Option<f64> = None;

    let n = trajectory.events.len();
    for (i, e) in trajectory.events.iter().enumerate() {
        let piece_end = if i + 1 < n {
            trajectory.events[i + 1].time.min(horizon)
        } else {
            horizon
        };
        let a = e.time.max(t_min);
        let b = piece_end;
        if b <= a {
            continue;
        }
        let c = e.value as f64;
        // threshold is nondecreasing: violation set within the piece is a
        // right subinterval (t*, b)
        if threshold(a)? > c {
            measure += b - a;
            first_violation.get_or_insert(a);
        } else if threshold(b)? > c {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > time_tol {
                let mid = 0.5 * (lo + hi);
                if threshold(mid)? > c {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let t_star = 0.5 * (lo + hi);
            measure += b - t_star;
            first_violation.get_or_insert(t_star);
        }
    }

    let gamma = chernoff_exponent(q);
    let bound = integrate_decaying(
        |t| {
            let m = law.truncated_mean(t).unwrap_or(f64::NAN);
            (-gamma * lambda * m).exp()
        },
        0.0,
        horizon,
        1e-8,
    );
    if !bound.value.is_finite() {
        return Err(SimError::Law(LawError::Numeric(
            "growth bound integrand failed to evaluate".to_string(),
        )));
    }

    Ok(GrowthReport {
        q,
        t_min,
        h_q_measure: measure,
        bound_value: bound.value,
        first_violation_after: first_violation,
    })
}
