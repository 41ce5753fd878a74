//! Random benchmark scenarios, the DiscoDNC `θ` baseline and the
//! segregation penalty.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{add_concave, normalize_concave, vertical_deviation, ConcaveCurve, ConvexCurve, TokenBucket};
use crate::error::{Error, Result};
use crate::exact::{exact_theta_opt, Method, SolveResult};
use crate::heuristic::heuristic_theta_opt;
use crate::residual::{backlog_bound, ResidualInput};
use crate::timing::measure;

/// Draws are integers in units of this resolution.
const GRID: f64 = 1e-6;

/// Generator parameters. Volumes in Mbit, rates in Mbit/s, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_cross: usize,
    /// 2 or 4; 1 yields a plain token bucket foi.
    pub foi_segments: usize,
    pub seed: u64,
    pub packet_size_range: (f64, f64),
    pub sustained_rate_range: (f64, f64),
    pub first_breakpoint_range: (f64, f64),
    pub foi_spacing_range: (f64, f64),
    pub peak_multiplier: f64,
    pub mid_multipliers: (f64, f64),
    pub utilization: f64,
}

impl ScenarioConfig {
    pub fn new(n_cross: usize, foi_segments: usize, seed: u64) -> Self {
        ScenarioConfig {
            n_cross,
            foi_segments,
            seed,
            packet_size_range: (0.001, 0.05),
            sustained_rate_range: (1.0, 10.0),
            first_breakpoint_range: (0.05, 0.5),
            foi_spacing_range: (0.1, 0.5),
            peak_multiplier: 8.0,
            mid_multipliers: (6.0, 3.0),
            utilization: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=10).contains(&self.n_cross) {
            return Err(Error::Argument(format!("n_cross {} must be in [2, 10]", self.n_cross)));
        }
        if ![1, 2, 4].contains(&self.foi_segments) {
            return Err(Error::Argument(format!("foi_segments {} must be 1, 2 or 4", self.foi_segments)));
        }
        for (name, (lo, hi)) in [
            ("packet_size_range", self.packet_size_range),
            ("sustained_rate_range", self.sustained_rate_range),
            ("first_breakpoint_range", self.first_breakpoint_range),
            ("foi_spacing_range", self.foi_spacing_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::Argument(format!("{name} [{lo}, {hi}] must be positive with lower <= upper")));
            }
        }
        let (m6, m3) = self.mid_multipliers;
        if !(self.peak_multiplier > m6 && m6 > m3 && m3 > 1.0) {
            return Err(Error::Argument("multipliers must satisfy peak > mid1 > mid2 > 1".into()));
        }
        if !(self.utilization > 0.0 && self.utilization < 1.0) {
            return Err(Error::Argument(format!("utilization {} must be in (0, 1)", self.utilization)));
        }
        Ok(())
    }
}

/// One server, one foi and its cross flows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub foi: ConcaveCurve,
    pub cross_flows: Vec<ConcaveCurve>,
    pub beta: ConvexCurve,
    pub seed: u64,
}

impl Scenario {
    /// Aggregates the cross flows and checks stability.
    pub fn input(&self) -> Result<ResidualInput> {
        ResidualInput::from_flows(self.foi.clone(), &self.cross_flows, self.beta.clone())
    }

    pub fn cross_first_bursts(&self) -> Vec<f64> {
        self.cross_flows.iter().map(ConcaveCurve::burst).collect()
    }

    /// Scenario with flow `i` as foi (0 is the original foi) and all other
    /// flows as cross traffic.
    pub fn with_foi(&self, i: usize) -> Scenario {
        let mut flows: Vec<ConcaveCurve> =
            std::iter::once(self.foi.clone()).chain(self.cross_flows.iter().cloned()).collect();
        let foi = flows.remove(i);
        Scenario { foi, cross_flows: flows, beta: self.beta.clone(), seed: self.seed }
    }

    pub fn flow_count(&self) -> usize {
        self.cross_flows.len() + 1
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let lo_u = (lo / GRID).round() as u64;
    let hi_u = (hi / GRID).round() as u64;
    rng.gen_range(lo_u..=hi_u) as f64 * GRID
}

/// Token buckets with the given rates whose lines meet at `breakpoints`,
/// so the resulting minimum is continuous for `t > 0`.
fn chained(first_burst: f64, rates: &[f64], breakpoints: &[f64]) -> Vec<TokenBucket> {
    let mut buckets = vec![TokenBucket { rate: rates[0], burst: first_burst }];
    for i in 1..rates.len() {
        let prev = buckets[i - 1];
        let burst = prev.burst - (rates[i] - prev.rate) * breakpoints[i - 1];
        buckets.push(TokenBucket { rate: rates[i], burst });
    }
    buckets
}

struct FlowDraw {
    packet: f64,
    sustained: f64,
    first_breakpoint: f64,
}

fn draw_flow(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> FlowDraw {
    FlowDraw {
        packet: draw(rng, cfg.packet_size_range),
        sustained: draw(rng, cfg.sustained_rate_range),
        first_breakpoint: draw(rng, cfg.first_breakpoint_range),
    }
}

fn tspec(d: &FlowDraw, cfg: &ScenarioConfig) -> Result<ConcaveCurve> {
    let rates = [cfg.peak_multiplier * d.sustained, d.sustained];
    normalize_concave(&chained(d.packet, &rates, &[d.first_breakpoint]))
}

/// Draws a scenario. The foi uses RNG stream 0 and cross flow `i` uses
/// stream `i + 1` of a ChaCha8 generator seeded with `cfg.seed`, so adding
/// cross flows leaves the earlier flows unchanged.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let d = draw_flow(&mut rng, cfg);
    let foi = match cfg.foi_segments {
        1 => ConcaveCurve::token_bucket(d.sustained, d.packet)?,
        2 => tspec(&d, cfg)?,
        _ => {
            let s1 = draw(&mut rng, cfg.foi_spacing_range);
            let s2 = draw(&mut rng, cfg.foi_spacing_range);
            let a = [d.first_breakpoint, d.first_breakpoint + s1, d.first_breakpoint + s1 + s2];
            let (m6, m3) = cfg.mid_multipliers;
            let rates = [cfg.peak_multiplier * d.sustained, m6 * d.sustained, m3 * d.sustained, d.sustained];
            normalize_concave(&chained(d.packet, &rates, &a))?
        }
    };
    debug_assert_eq!(foi.segments().len(), cfg.foi_segments);
    let mut total_rate = d.sustained;
    let mut cross_flows = Vec::with_capacity(cfg.n_cross);
    for i in 0..cfg.n_cross {
        rng.set_stream(i as u64 + 1);
        rng.set_word_pos(0);
        let d = draw_flow(&mut rng, cfg);
        total_rate += d.sustained;
        cross_flows.push(tspec(&d, cfg)?);
    }
    let rate = total_rate / cfg.utilization;
    let beta = ConvexCurve::rate_latency(rate, 1.0 / rate)?;
    Ok(Scenario { foi, cross_flows, beta, seed: cfg.seed })
}

/// DiscoDNC's default `θ = β⁻¹(Σ first-segment cross bursts)`.
pub fn theta_disco(input: &ResidualInput, cross_first_bursts: &[f64]) -> f64 {
    input.beta.pseudo_inverse(cross_first_bursts.iter().sum())
}

/// Backlog bound at `θ_disco`.
pub fn disco_theta_opt(input: &ResidualInput, cross_first_bursts: &[f64]) -> Result<SolveResult> {
    let (result, spent) = measure(|| {
        let theta = theta_disco(input, cross_first_bursts);
        backlog_bound(input, theta).map(|backlog| (theta, backlog))
    });
    let (theta, backlog) = result?;
    Ok(SolveResult {
        method: Method::Disco,
        theta,
        backlog,
        h_lower: input.h_lower(),
        candidates: vec![],
        cpu_time: spent,
    })
}

/// Solves `scenario` with `method`.
pub fn solve(scenario: &Scenario, method: Method) -> Result<SolveResult> {
    let input = scenario.input()?;
    match method {
        Method::Exact => exact_theta_opt(&input),
        Method::Heuristic => heuristic_theta_opt(&input).map(|(r, _)| r),
        Method::Disco => disco_theta_opt(&input, &scenario.cross_first_bursts()),
    }
}

/// `v(α₁ + Σ α_i, β)`, the bound for the whole aggregate.
pub fn aggregate_backlog(scenario: &Scenario) -> Result<f64> {
    let total = scenario.cross_flows.iter().fold(scenario.foi.clone(), |acc, c| add_concave(&acc, c));
    let q = vertical_deviation(&total, &scenario.beta)?;
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::Instability { arrival: total.sustained_rate(), service: scenario.beta.top_rate() })
    }
}

/// Bound of every flow when it is treated as foi, in flow order.
pub fn per_flow_bounds(scenario: &Scenario, method: Method) -> Result<Vec<f64>> {
    (0..scenario.flow_count()).map(|i| solve(&scenario.with_foi(i), method).map(|r| r.backlog)).collect()
}

/// `(Σ q_i − q_agg) / q_agg · 100`.
pub fn segregation_penalty(per_flow_bounds: &[f64], q_agg: f64) -> Result<f64> {
    if q_agg.is_nan() || q_agg <= 0.0 {
        return Err(Error::Argument(format!("aggregate backlog {q_agg} must be > 0")));
    }
    Ok((per_flow_bounds.iter().sum::<f64>() - q_agg) / q_agg * 100.0)
}
