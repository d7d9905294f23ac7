//! Nakagami-m link model: link parameters, transmit powers, per-link SNR
//! statistics and gamma variate generation.
//!
//! Under Nakagami-m fading with shape `m` and spread `Ω`, the instantaneous
//! SNR of a link is gamma distributed with shape `m` and mean
//! `γ̄ = Ω · P / N0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

/// One Nakagami-m link: shape `m >= 0.5` and spread `omega = E[|h|^2] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct ChannelSpec {
    m: f64,
    omega: f64,
}

#[derive(Deserialize)]
struct RawChannel {
    m: f64,
    #[serde(default = "unit")]
    omega: f64,
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<RawChannel> for ChannelSpec {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        ChannelSpec::new(raw.m, raw.omega)
    }
}

impl ChannelSpec {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::Config(format!(
                "Nakagami shape m = {m} is invalid (m must be >= 0.5)"
            )));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Config(format!("spread omega = {omega} must be positive")));
        }
        Ok(Self { m, omega })
    }

    /// Rayleigh fading with unit spread.
    pub fn rayleigh() -> Self {
        Self { m: 1.0, omega: 1.0 }
    }

    /// Unit-spread link with shape `m`.
    pub fn unit(m: f64) -> Result<Self> {
        Self::new(m, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// The two hops through relay `R_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayHops {
    /// S -> R_i
    pub first: ChannelSpec,
    /// R_i -> D
    pub second: ChannelSpec,
}

/// Direct link plus `K >= 0` two-hop relay paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub direct: ChannelSpec,
    #[serde(default)]
    pub relays: Vec<RelayHops>,
}

impl NetworkSpec {
    pub fn new(direct: ChannelSpec, relays: Vec<RelayHops>) -> Self {
        Self { direct, relays }
    }

    /// Unit-spread network from shape lists; `first[i]`, `second[i]` are the
    /// shapes of the two hops through relay `i`.
    pub fn from_shapes(m0: f64, first: &[f64], second: &[f64]) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::Config(format!(
                "first-hop and second-hop shape lists differ in length ({} vs {})",
                first.len(),
                second.len()
            )));
        }
        let relays = first
            .iter()
            .zip(second)
            .map(|(&m1, &m2)| {
                Ok(RelayHops {
                    first: ChannelSpec::unit(m1)?,
                    second: ChannelSpec::unit(m2)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(ChannelSpec::unit(m0)?, relays))
    }

    /// All-Rayleigh network with `k` relays.
    pub fn rayleigh(k: usize) -> Self {
        let hop = RelayHops {
            first: ChannelSpec::rayleigh(),
            second: ChannelSpec::rayleigh(),
        };
        Self::new(ChannelSpec::rayleigh(), vec![hop; k])
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }

    /// Mean SNRs of every link under the given powers.
    pub fn link_budget(&self, power: &PowerSpec) -> Result<LinkBudget> {
        let direct = link_snr(&self.direct, power.direct_link_power(), power.noise_variance)?;
        let relays = self
            .relays
            .iter()
            .map(|hops| {
                Ok((
                    link_snr(&hops.first, power.source_power, power.noise_variance)?,
                    link_snr(&hops.second, power.relay_power, power.noise_variance)?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(LinkBudget { direct, relays })
    }
}

/// Which transmit power feeds the direct S -> D link when source and relay
/// powers differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectLinkPower {
    /// The source transmits the direct-link signal with `P_s`.
    #[default]
    Source,
    /// The direct link sees the total power `P_s + P_r`.
    Total,
}

/// Transmit powers and noise, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSpec {
    source_power: f64,
    relay_power: f64,
    noise_variance: f64,
    direct: DirectLinkPower,
}

impl PowerSpec {
    pub fn new(source_power: f64, relay_power: f64, noise_variance: f64) -> Result<Self> {
        for (name, v) in [
            ("source power", source_power),
            ("relay power", relay_power),
            ("noise variance", noise_variance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self {
            source_power,
            relay_power,
            noise_variance,
            direct: DirectLinkPower::Source,
        })
    }

    /// Equal transmit power at source and relays with `P / N0 = snr`.
    pub fn equal(snr: f64) -> Result<Self> {
        Self::new(snr, snr, 1.0)
    }

    /// Splits `total` as `P_s = alpha * total`, `P_r = (1 - alpha) * total`.
    pub fn from_alpha(total: f64, alpha: f64, noise_variance: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "power allocation alpha = {alpha} must lie in (0, 1)"
            )));
        }
        Self::new(alpha * total, (1.0 - alpha) * total, noise_variance)
    }

    pub fn with_direct_link(mut self, direct: DirectLinkPower) -> Self {
        self.direct = direct;
        self
    }

    pub fn source_power(&self) -> f64 {
        self.source_power
    }

    pub fn relay_power(&self) -> f64 {
        self.relay_power
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn direct_link(&self) -> DirectLinkPower {
        self.direct
    }

    /// `P_s / (P_s + P_r)`.
    pub fn alpha(&self) -> f64 {
        self.source_power / (self.source_power + self.relay_power)
    }

    fn direct_link_power(&self) -> f64 {
        match self.direct {
            DirectLinkPower::Source => self.source_power,
            DirectLinkPower::Total => self.source_power + self.relay_power,
        }
    }

    /// Transmit SNR `P / N0` when every node uses the same power.
    pub fn transmit_snr(&self) -> Option<f64> {
        (self.source_power == self.relay_power).then(|| self.source_power / self.noise_variance)
    }
}

/// Statistics of one link's instantaneous SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnr {
    mean_snr: f64,
    m: f64,
}

impl LinkSnr {
    pub fn new(m: f64, mean_snr: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain("LinkSnr", format!("shape m = {m} must be positive")));
        }
        if !(mean_snr > 0.0) || !mean_snr.is_finite() {
            return Err(Error::domain("LinkSnr", format!("mean SNR = {mean_snr} must be positive")));
        }
        Ok(Self { mean_snr, m })
    }

    pub fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `m / γ̄`, the rate parameter of the gamma-distributed SNR.
    pub fn rate(&self) -> f64 {
        self.m / self.mean_snr
    }
}

/// Mean SNRs of every link in a network.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub direct: LinkSnr,
    pub relays: Vec<(LinkSnr, LinkSnr)>,
}

pub fn link_snr(ch: &ChannelSpec, tx_power: f64, n0: f64) -> Result<LinkSnr> {
    if !(tx_power > 0.0) {
        return Err(Error::domain("link_snr", format!("transmit power {tx_power} must be positive")));
    }
    if !(n0 > 0.0) {
        return Err(Error::domain("link_snr", format!("noise variance {n0} must be positive")));
    }
    LinkSnr::new(ch.m, ch.omega * tx_power / n0)
}

/// `Pr{γ <= y} = P(m, m y / γ̄)`.
pub fn snr_cdf(link: &LinkSnr, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain("snr_cdf", format!("y = {y} must be nonnegative")));
    }
    specfun::reg_lower_gamma(link.m, link.rate() * y)
}

/// Draws one instantaneous SNR for `link`.
pub fn sample_snr<R: Rng + ?Sized>(link: &LinkSnr, rng: &mut R) -> f64 {
    GammaSampler::new(link).sample(rng)
}

/// Marsaglia–Tsang gamma sampler with constants precomputed per link.
/// Shapes below one are boosted: draw at shape `m + 1` and scale by `U^(1/m)`.
#[derive(Debug, Clone, Copy)]
pub struct GammaSampler {
    d: f64,
    c: f64,
    scale: f64,
    /// `1/m` when boosting, else `None`.
    boost: Option<f64>,
}

impl GammaSampler {
    pub fn new(link: &LinkSnr) -> Self {
        let m = link.m;
        let (shape, boost) = if m < 1.0 { (m + 1.0, Some(1.0 / m)) } else { (m, None) };
        let d = shape - 1.0 / 3.0;
        Self {
            d,
            c: 1.0 / (9.0 * d).sqrt(),
            scale: link.mean_snr / m,
            boost,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = loop {
            let x: f64 = rng.sample(StandardNormal);
            let t = 1.0 + self.c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u: f64 = rng.random();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + self.d * (1.0 - v + v.ln()) {
                break self.d * v;
            }
        };
        let g = match self.boost {
            // 1 - U lies in (0, 1], keeping the power finite and nonzero.
            Some(inv_m) => g * (1.0 - rng.random::<f64>()).powf(inv_m),
            None => g,
        };
        g * self.scale
    }
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    /// Index of the evaluation point (SNR grid point or alpha value).
    pub point: u64,
    /// Trial block within the point.
    pub block: u64,
    /// Link: 0 is the direct link, `2i + 1` and `2i + 2` the hops of relay `i`.
    pub link: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for `(master_seed, id)`. Distinct ids give
/// statistically independent streams.
pub fn stream_rng(master_seed: u64, id: StreamId) -> ChaCha8Rng {
    let mut h = splitmix64(master_seed);
    for part in [id.point, id.block, id.link] {
        h = splitmix64(h ^ part);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    // Keep the raw master seed in the key schedule as well as the hash.
    rng.set_stream(master_seed);
    rng
}
