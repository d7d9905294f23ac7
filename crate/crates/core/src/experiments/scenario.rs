//! Scenario files: a TOML description of one experiment.
//!
//! Exactly one of the `[curve]`, `[alpha_sweep]` or `[surface]` tables must
//! be present. See `docs/scenarios.md` for the annotated schema.

use serde::{Deserialize, Serialize};

use crate::analytic::RateSpec;
use crate::channel::{DirectLinkPower, NetworkSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{Combiner, McConfig, Protocol, Scheme, MIN_TRIALS};

/// What a curve scenario computes at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    /// Exact closed-form outage (SC only).
    Analytic,
    /// High-SNR asymptote (SC only, DF-AF and DF).
    Asymptotic,
    /// Monte Carlo estimate with confidence interval.
    Montecarlo,
    /// Asymptotic lower/upper outage of AF (extra `af_lower`/`af_upper` rows).
    Bounds,
}

/// SNR grid of a curve scenario, in dB of transmit SNR `P / N0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveGrid {
    pub snr_db: Vec<f64>,
    /// Monte Carlo runs only at grid points up to this SNR.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_max_snr_db: Option<f64>,
}

/// Power-allocation sweep at fixed total power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSweep {
    /// `P_s + P_r` in dB.
    pub total_power_db: f64,
    #[serde(default = "unit")]
    pub noise_variance: f64,
    /// Values of `α = P_s / (P_s + P_r)`.
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub direct_link: DirectLinkPower,
}

/// Diversity order over a grid of symmetric relay shapes: every relay has
/// first-hop shape `g1` and second-hop shape `g2`, both drawn from `shapes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiversitySurface {
    pub m0: f64,
    pub relays: usize,
    pub shapes: Vec<f64>,
    pub window_db: [f64; 2],
    pub snr_step_db: f64,
}

fn unit() -> f64 {
    1.0
}

fn default_rate() -> f64 {
    1.0
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn sc_only() -> Vec<Combiner> {
    vec![Combiner::Sc]
}

fn default_trials() -> u64 {
    1_000_000
}

fn default_seed() -> u64 {
    1
}

fn default_confidence() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Target rate in bits/s/Hz.
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Destination threshold; defaults to `Δ = 2^(2R) - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_th: Option<f64>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "sc_only")]
    pub combiners: Vec<Combiner>,
    #[serde(default)]
    pub outputs: Vec<Output>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sweep: Option<AlphaSweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<DiversitySurface>,
}

/// The three kinds of experiment, borrowed from a validated scenario.
#[derive(Debug, Clone, Copy)]
pub enum Kind<'a> {
    Curve(&'a NetworkSpec, &'a CurveGrid),
    AlphaSweep(&'a NetworkSpec, &'a AlphaSweep),
    Surface(&'a DiversitySurface),
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn rate_spec(&self) -> Result<RateSpec> {
        match self.gamma_th {
            Some(th) => RateSpec::with_threshold(self.rate, th),
            None => RateSpec::new(self.rate),
        }
    }

    pub fn mc_config(&self, workers: Option<usize>) -> McConfig {
        McConfig {
            trials: self.trials,
            seed: self.seed,
            confidence: self.confidence,
            workers,
        }
    }

    /// Scheme x combiner pairs, combiner-major.
    pub fn protocols(&self) -> Vec<Protocol> {
        self.combiners
            .iter()
            .flat_map(|&c| self.schemes.iter().map(move |&s| Protocol::new(s, c)))
            .collect()
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    pub fn kind(&self) -> Result<Kind<'_>> {
        let network = || {
            self.network
                .as_ref()
                .ok_or_else(|| config(format!("scenario `{}` needs a [network] table", self.name)))
        };
        match (&self.curve, &self.alpha_sweep, &self.surface) {
            (Some(c), None, None) => Ok(Kind::Curve(network()?, c)),
            (None, Some(a), None) => Ok(Kind::AlphaSweep(network()?, a)),
            (None, None, Some(s)) => Ok(Kind::Surface(s)),
            _ => Err(config(format!(
                "scenario `{}` must contain exactly one of [curve], [alpha_sweep], [surface]",
                self.name
            ))),
        }
    }

    /// Checks every cross-field constraint.
    pub fn validate(&self) -> Result<()> {
        self.rate_spec()?;
        if self.schemes.is_empty() {
            return Err(config("at least one scheme is required"));
        }
        if self.combiners.is_empty() {
            return Err(config("at least one combiner is required"));
        }
        if self.trials < MIN_TRIALS {
            return Err(config(format!("trials must be at least {MIN_TRIALS}")));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(config(format!("confidence {} must lie in (0, 1)", self.confidence)));
        }
        let mrc = self.combiners.contains(&Combiner::Mrc);
        for out in [Output::Analytic, Output::Asymptotic, Output::Bounds] {
            if mrc && self.wants(out) {
                return Err(config(format!(
                    "output `{}` is not available with MRC: MRC outage is computed by Monte Carlo only",
                    output_name(out)
                )));
            }
        }
        if self.wants(Output::Bounds) && !self.schemes.contains(&Scheme::Af) {
            return Err(config("output `bounds` applies to the AF scheme, which is not selected"));
        }
        match self.kind()? {
            Kind::Curve(_, grid) => {
                if self.outputs.is_empty() {
                    return Err(config("curve scenario requests no outputs"));
                }
                if grid.snr_db.is_empty() {
                    return Err(config("SNR grid is empty"));
                }
                if grid.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(config("SNR grid must be strictly increasing"));
                }
            }
            Kind::AlphaSweep(_, sweep) => {
                if self.combiners != [Combiner::Mrc] {
                    return Err(config("alpha sweeps use MRC at the destination; set combiners = [\"mrc\"]"));
                }
                if self.outputs.iter().any(|&o| o != Output::Montecarlo) {
                    return Err(config("alpha sweeps produce Monte Carlo estimates only"));
                }
                if sweep.alphas.is_empty() {
                    return Err(config("alpha sweep has no alpha values"));
                }
                if let Some(a) = sweep.alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
                    return Err(config(format!("alpha = {a} must lie in (0, 1)")));
                }
                if !(sweep.noise_variance > 0.0) || !sweep.total_power_db.is_finite() {
                    return Err(config("alpha sweep needs finite total power and positive noise variance"));
                }
            }
            Kind::Surface(s) => {
                if s.shapes.is_empty() || s.shapes.iter().any(|&g| !(g >= 0.5)) {
                    return Err(config("surface shapes must be nonempty and each >= 0.5"));
                }
                if !(s.m0 >= 0.5) {
                    return Err(config("surface m0 must be >= 0.5"));
                }
                if !(s.window_db[1] > s.window_db[0]) || !(s.snr_step_db > 0.0) {
                    return Err(config("surface window must be increasing with a positive step"));
                }
            }
        }
        Ok(())
    }
}

pub fn output_name(o: Output) -> &'static str {
    match o {
        Output::Analytic => "analytic",
        Output::Asymptotic => "asymptotic",
        Output::Montecarlo => "montecarlo",
        Output::Bounds => "bounds",
    }
}
