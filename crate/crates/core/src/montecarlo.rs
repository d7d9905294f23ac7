//! Trial-level simulation of opportunistic DF-AF, DF and AF relaying with
//! selection or maximal-ratio combining at the destination.
//!
//! Trials are grouped in fixed-size blocks. Every block draws each link from
//! its own stream keyed by `(seed, point, block, link)`, so failure counts
//! depend only on the seed and never on how blocks are spread over threads.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::RateSpec;
use crate::channel::{stream_rng, GammaSampler, LinkBudget, NetworkSpec, PowerSpec, StreamId};
use crate::error::{Error, Result};
use crate::specfun;

/// Relaying scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Each relay forwards by DF if it decoded, AF otherwise.
    DfAf,
    /// Only relays that decoded can forward.
    Df,
    /// Every relay amplifies and forwards.
    Af,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::DfAf, Scheme::Df, Scheme::Af];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DfAf => "dfaf",
            Scheme::Df => "df",
            Scheme::Af => "af",
        }
    }

    /// SNR the destination sees through a relay with hop SNRs `g1`, `g2`.
    #[inline]
    pub fn path_snr(self, g1: f64, g2: f64, delta: f64) -> f64 {
        let decoded = g1 >= delta;
        match self {
            Scheme::DfAf if decoded => g2,
            Scheme::DfAf | Scheme::Af => af_path_snr(g1, g2),
            Scheme::Df if decoded => g2,
            Scheme::Df => 0.0,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Destination combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    /// Selection combining: the better of the two slots.
    Sc,
    /// Maximal ratio combining: the two slot SNRs add.
    Mrc,
}

impl Combiner {
    pub fn name(self) -> &'static str {
        match self {
            Combiner::Sc => "sc",
            Combiner::Mrc => "mrc",
        }
    }

    #[inline]
    pub fn combine(self, direct: f64, relayed: f64) -> f64 {
        match self {
            Combiner::Sc => direct.max(relayed),
            Combiner::Mrc => direct + relayed,
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One scheme paired with one combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Protocol {
    pub scheme: Scheme,
    pub combiner: Combiner,
}

impl Protocol {
    pub fn new(scheme: Scheme, combiner: Combiner) -> Self {
        Self { scheme, combiner }
    }
}

/// Equivalent SNR of an AF relay path.
#[inline]
pub fn af_path_snr(g1: f64, g2: f64) -> f64 {
    g1 * g2 / (g1 + g2 + 1.0)
}

/// Instantaneous SNRs of every link in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub gamma0: f64,
    /// `(γ1i, γ2i)` per relay.
    pub hops: Vec<(f64, f64)>,
}

/// Per-relay state of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayState {
    pub gamma1: f64,
    pub gamma2: f64,
    /// `γ1 >= Δ`
    pub decoded: bool,
    /// The path SNR the scheme ranks relays by.
    pub path_snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub gamma0: f64,
    pub relays: Vec<RelayState>,
    /// Best relay; lowest index on ties. `None` without relays.
    pub selected: Option<usize>,
    pub combined_snr: f64,
    pub outage: bool,
}

/// Picks the relay with the largest path SNR, returning `(index, snr)`.
#[inline]
fn best_relay(
    hops: impl Iterator<Item = (f64, f64)>,
    scheme: Scheme,
    delta: f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (g1, g2)) in hops.enumerate() {
        let s = scheme.path_snr(g1, g2, delta);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

/// Applies the selection rule and combiner to a fixed channel draw.
pub fn evaluate(draw: &ChannelDraw, protocol: Protocol, rs: &RateSpec) -> TrialOutcome {
    let delta = rs.delta();
    let relays = draw
        .hops
        .iter()
        .map(|&(g1, g2)| RelayState {
            gamma1: g1,
            gamma2: g2,
            decoded: g1 >= delta,
            path_snr: protocol.scheme.path_snr(g1, g2, delta),
        })
        .collect();
    let best = best_relay(draw.hops.iter().copied(), protocol.scheme, delta);
    let relayed = best.map_or(0.0, |(_, s)| s);
    let combined_snr = protocol.combiner.combine(draw.gamma0, relayed);
    TrialOutcome {
        gamma0: draw.gamma0,
        relays,
        selected: best.map(|(i, _)| i),
        combined_snr,
        outage: combined_snr < rs.gamma_th(),
    }
}

/// Samplers for every link of a network, in stream order: direct link,
/// then `(first, second)` hop of each relay.
#[derive(Debug, Clone)]
pub struct LinkSamplers {
    direct: GammaSampler,
    hops: Vec<(GammaSampler, GammaSampler)>,
}

impl LinkSamplers {
    pub fn new(budget: &LinkBudget) -> Self {
        Self {
            direct: GammaSampler::new(&budget.direct),
            hops: budget
                .relays
                .iter()
                .map(|(a, b)| (GammaSampler::new(a), GammaSampler::new(b)))
                .collect(),
        }
    }

    pub fn link_count(&self) -> usize {
        1 + 2 * self.hops.len()
    }

    /// Draws every link from a single generator.
    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ChannelDraw {
        let gamma0 = self.direct.sample(rng);
        let hops = self
            .hops
            .iter()
            .map(|(a, b)| (a.sample(rng), b.sample(rng)))
            .collect();
        ChannelDraw { gamma0, hops }
    }
}

/// Draws all `2K + 1` link SNRs and plays one trial of `protocol`.
pub fn run_trial<R: rand::Rng + ?Sized>(
    net: &NetworkSpec,
    power: &PowerSpec,
    rs: &RateSpec,
    protocol: Protocol,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let samplers = LinkSamplers::new(&net.link_budget(power)?);
    Ok(evaluate(&samplers.draw(rng), protocol, rs))
}

/// Trials per block. Part of the stream layout: changing it changes results.
pub const BLOCK_SIZE: u64 = 1 << 14;

/// Smallest trial count the estimators accept.
pub const MIN_TRIALS: u64 = 1_000;

/// Simulation settings shared by every estimate in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Two-sided confidence level of the Wilson interval.
    pub confidence: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 1,
            confidence: 0.99,
            workers: None,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "trials = {} is below the minimum of {MIN_TRIALS}",
                self.trials
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!(
                "confidence level {} must lie in (0, 1)",
                self.confidence
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo outage estimate with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub probability: f64,
    pub trials: u64,
    pub failures: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub master_seed: u64,
}

impl OutageEstimate {
    pub fn from_counts(failures: u64, trials: u64, confidence: f64, master_seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, confidence);
        Self {
            probability: failures as f64 / trials as f64,
            trials,
            failures,
            ci_low,
            ci_high,
            confidence,
            master_seed,
        }
    }

    pub fn covers(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }

    /// True if the two confidence intervals share at least one point.
    pub fn overlaps(&self, other: &OutageEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Two-sided standard normal quantile: `z` with `Pr{|Z| <= z} = level`.
///
/// Uses `Pr{|Z| <= z} = P(1/2, z^2 / 2)` and bisects on `z^2 / 2`.
pub fn normal_two_sided_quantile(level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 200.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = specfun::reg_lower_gamma(0.5, mid).unwrap_or(1.0);
        if p < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi).sqrt()
}

/// Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z = normal_two_sided_quantile(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Result of simulating several protocols on the same channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    /// One estimate per requested protocol, in request order.
    pub estimates: Vec<OutageEstimate>,
    /// Trials in which DF-AF ended with a smaller combined SNR than DF or AF
    /// under the same combiner. Zero unless the selection logic is broken.
    pub dominance_violations: u64,
}

impl CoupledRun {
    pub fn estimate(&self, protocols: &[Protocol], which: Protocol) -> Option<&OutageEstimate> {
        protocols
            .iter()
            .position(|&p| p == which)
            .map(|i| &self.estimates[i])
    }
}

struct BlockCounts {
    failures: Vec<u64>,
    violations: u64,
}

fn run_block(
    samplers: &LinkSamplers,
    protocols: &[Protocol],
    rs: &RateSpec,
    seed: u64,
    point: u64,
    block: u64,
    len: u64,
) -> BlockCounts {
    let link_count = samplers.link_count();
    let mut rngs: Vec<_> = (0..link_count as u64)
        .map(|link| stream_rng(seed, StreamId { point, block, link }))
        .collect();
    let delta = rs.delta();
    let gamma_th = rs.gamma_th();
    let k = samplers.hops.len();

    // For each scheme present, the best path SNR of the current trial.
    let schemes_used: Vec<Scheme> = Scheme::ALL
        .into_iter()
        .filter(|s| protocols.iter().any(|p| p.scheme == *s))
        .collect();
    let scheme_slot = |s: Scheme| schemes_used.iter().position(|&x| x == s).unwrap();
    let slots: Vec<usize> = protocols.iter().map(|p| scheme_slot(p.scheme)).collect();
    let combiners: Vec<Combiner> = protocols.iter().map(|p| p.combiner).collect();
    let dfaf_slot = schemes_used.iter().position(|&s| s == Scheme::DfAf);

    let mut hops = vec![(0.0, 0.0); k];
    let mut best = vec![0.0; schemes_used.len()];
    let mut failures = vec![0u64; protocols.len()];
    let mut violations = 0u64;

    for _ in 0..len {
        let (direct_rng, hop_rngs) = rngs.split_first_mut().unwrap();
        let gamma0 = samplers.direct.sample(direct_rng);
        for (i, (a, b)) in samplers.hops.iter().enumerate() {
            hops[i] = (a.sample(&mut hop_rngs[2 * i]), b.sample(&mut hop_rngs[2 * i + 1]));
        }
        for (slot, &scheme) in schemes_used.iter().enumerate() {
            best[slot] = best_relay(hops.iter().copied(), scheme, delta).map_or(0.0, |(_, s)| s);
        }
        for (j, (&slot, &combiner)) in slots.iter().zip(&combiners).enumerate() {
            if combiner.combine(gamma0, best[slot]) < gamma_th {
                failures[j] += 1;
            }
        }
        if let Some(d) = dfaf_slot {
            let dfaf = best[d];
            if best.iter().any(|&other| other > dfaf) {
                violations += 1;
            }
        }
    }
    BlockCounts {
        failures,
        violations,
    }
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Simulates all `protocols` on shared channel draws at one evaluation point.
///
/// `point` selects a disjoint family of random streams; use distinct values
/// for distinct grid points.
pub fn estimate_coupled(
    net: &NetworkSpec,
    power: &PowerSpec,
    rs: &RateSpec,
    protocols: &[Protocol],
    cfg: &McConfig,
    point: u64,
) -> Result<CoupledRun> {
    cfg.validate()?;
    if protocols.is_empty() {
        return Err(Error::Config("no protocols to simulate".into()));
    }
    let samplers = LinkSamplers::new(&net.link_budget(power)?);
    let blocks = cfg.trials.div_ceil(BLOCK_SIZE);
    let counts = with_workers(cfg.workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let len = BLOCK_SIZE.min(cfg.trials - b * BLOCK_SIZE);
                run_block(&samplers, protocols, rs, cfg.seed, point, b, len)
            })
            .collect::<Vec<_>>()
    })?;
    let mut failures = vec![0u64; protocols.len()];
    let mut dominance_violations = 0;
    for c in counts {
        for (total, f) in failures.iter_mut().zip(c.failures) {
            *total += f;
        }
        dominance_violations += c.violations;
    }
    Ok(CoupledRun {
        estimates: failures
            .into_iter()
            .map(|f| OutageEstimate::from_counts(f, cfg.trials, cfg.confidence, cfg.seed))
            .collect(),
        dominance_violations,
    })
}

/// Outage estimate for a single protocol.
pub fn estimate_outage(
    net: &NetworkSpec,
    power: &PowerSpec,
    rs: &RateSpec,
    protocol: Protocol,
    cfg: &McConfig,
) -> Result<OutageEstimate> {
    Ok(estimate_coupled(net, power, rs, &[protocol], cfg, 0)?.estimates[0])
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_grid(snr_grid_db: &[f64]) -> Result<()> {
    if snr_grid_db.is_empty() {
        return Err(Error::Config("SNR grid is empty".into()));
    }
    if snr_grid_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("SNR grid contains a non-finite value".into()));
    }
    if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("SNR grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Coupled estimates at every grid point under equal transmit power;
/// grid point `i` uses stream family `i`.
pub fn estimate_curve_coupled(
    net: &NetworkSpec,
    rs: &RateSpec,
    protocols: &[Protocol],
    snr_grid_db: &[f64],
    cfg: &McConfig,
) -> Result<Vec<(f64, CoupledRun)>> {
    check_grid(snr_grid_db)?;
    snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let power = PowerSpec::equal(db_to_linear(db))?;
            Ok((db, estimate_coupled(net, &power, rs, protocols, cfg, i as u64)?))
        })
        .collect()
}

/// Outage curve of one protocol over an SNR grid (dB, equal transmit power).
pub fn estimate_curve(
    net: &NetworkSpec,
    rs: &RateSpec,
    protocol: Protocol,
    snr_grid_db: &[f64],
    cfg: &McConfig,
) -> Result<Vec<(f64, OutageEstimate)>> {
    Ok(estimate_curve_coupled(net, rs, &[protocol], snr_grid_db, cfg)?
        .into_iter()
        .map(|(db, run)| (db, run.estimates[0]))
        .collect())
}
