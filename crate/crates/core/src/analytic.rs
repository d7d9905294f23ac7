//! Closed-form outage probabilities under selection combining, their
//! high-SNR asymptotes, and the squeeze bounds for the AF relay path.
//!
//! Notation: `γ0` is the direct-link SNR, `γ1i`, `γ2i` the hop SNRs through
//! relay `i`, `Δ = 2^(2R) - 1` the relay decoding threshold and `γ_th` the
//! destination threshold.

use serde::{Deserialize, Serialize};

use crate::channel::{snr_cdf, LinkSnr, NetworkSpec, PowerSpec, RelayHops};
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{self, bessel_k_int, ln_gamma};

/// Target rate and the two SNR thresholds derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    rate: f64,
    delta: f64,
    gamma_th: f64,
}

impl RateSpec {
    /// Rate `R` in bits/s/Hz with the destination threshold bound to `Δ`.
    pub fn new(rate: f64) -> Result<Self> {
        let delta = Self::decoding_threshold(rate)?;
        Ok(Self {
            rate,
            delta,
            gamma_th: delta,
        })
    }

    pub fn with_threshold(rate: f64, gamma_th: f64) -> Result<Self> {
        let delta = Self::decoding_threshold(rate)?;
        if !(gamma_th > 0.0) || !gamma_th.is_finite() {
            return Err(Error::Config(format!("SNR threshold {gamma_th} must be positive")));
        }
        Ok(Self {
            rate,
            delta,
            gamma_th,
        })
    }

    fn decoding_threshold(rate: f64) -> Result<f64> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Config(format!("rate R = {rate} must be positive")));
        }
        // Two half-duplex slots: (1/2) log2(1 + γ) >= R.
        Ok((2.0 * rate).exp2() - 1.0)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Relay decoding threshold `Δ`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Destination SNR threshold `γ_th`.
    pub fn gamma_th(&self) -> f64 {
        self.gamma_th
    }
}

/// Outage of opportunistic DF-AF selection relaying with selection combining:
///
/// `F0(γ_th) · Π_i [ (1 - F1i(Δ)) F2i(γ_th) + F1i(Δ) ]`
///
/// A relay that fails to decode contributes an AF path SNR below `γ1i < Δ`,
/// so the expression is exact whenever `γ_th >= Δ`.
pub fn outage_dfaf_sc(net: &NetworkSpec, power: &PowerSpec, rs: &RateSpec) -> Result<f64> {
    let budget = net.link_budget(power)?;
    let mut outage = snr_cdf(&budget.direct, rs.gamma_th)?;
    for (hop1, hop2) in &budget.relays {
        let undecoded = snr_cdf(hop1, rs.delta)?;
        let second = snr_cdf(hop2, rs.gamma_th)?;
        outage *= (1.0 - undecoded) * second + undecoded;
    }
    Ok(outage)
}

/// Outage of opportunistic DF with selection combining. Identical to the
/// DF-AF expression: a relay that cannot decode never rescues the link under
/// SC when `γ_th >= Δ`.
pub fn outage_df_sc(net: &NetworkSpec, power: &PowerSpec, rs: &RateSpec) -> Result<f64> {
    outage_dfaf_sc(net, power, rs)
}

fn integer_shape(m: f64) -> Option<u32> {
    (m.fract() == 0.0 && m >= 1.0 && m <= u32::MAX as f64).then_some(m as u32)
}

/// Closed-form CDF of the AF path SNR `γ1 γ2 / (γ1 + γ2 + 1)` for integer
/// shapes, as a finite triple sum of `K_{j-k-1}` terms.
pub fn af_path_cdf_closed(hop1: &LinkSnr, hop2: &LinkSnr, y: f64) -> Result<f64> {
    let (Some(m1), Some(m2)) = (integer_shape(hop1.m()), integer_shape(hop2.m())) else {
        return Err(Error::ClosedFormUnavailable {
            m1: hop1.m(),
            m2: hop2.m(),
        });
    };
    if !(y >= 0.0) {
        return Err(Error::domain("af_path_cdf_closed", format!("y = {y} must be nonnegative")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let (a1, a2) = (hop1.rate(), hop2.rate());
    let (ln_a1, ln_a2) = (a1.ln(), a2.ln());
    let (ln_y, ln_y1) = (y.ln(), y.ln_1p());
    let z = 2.0 * (a1 * a2 * y * (y + 1.0)).sqrt();

    // 2 α2^m2 (m1-1)! / (Γ(m1) Γ(m2)) e^{-(α1+α2) y}; (m1-1)! cancels Γ(m1).
    let ln_prefactor = 2f64.ln() + m2 as f64 * ln_a2 - ln_gamma(m2 as f64)? - (a1 + a2) * y;

    // K_v(z) for v = j - k - 1 ranges over [-m2, m1 - 2].
    let v_min = -(m2 as i32);
    let ln_bessel = (v_min..=m1 as i32 - 2)
        .map(|v| bessel_k_int(v, z).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;

    let mut sum = 0.0;
    for n in 0..m1 {
        let ln_n_fact = ln_gamma(n as f64 + 1.0)?;
        for j in 0..=n {
            let ln_binom_nj = ln_binomial(n, j)?;
            for k in 0..m2 {
                let (nf, jf, kf) = (n as f64, j as f64, k as f64);
                let v = j as i32 - k as i32 - 1;
                let ln_term = ln_binom_nj + ln_binomial(m2 - 1, k)? - ln_n_fact
                    + 0.5 * (2.0 * nf - jf + kf + 1.0) * ln_a1
                    + 0.5 * (jf - kf - 1.0) * ln_a2
                    + 0.5 * (jf + kf + 1.0) * ln_y1
                    + 0.5 * (2.0 * nf + 2.0 * m2 as f64 - jf - kf - 1.0) * ln_y
                    + ln_bessel[(v - v_min) as usize];
                sum += (ln_term + ln_prefactor).exp();
            }
        }
    }
    Ok((1.0 - sum).clamp(0.0, 1.0))
}

fn ln_binomial(n: u32, k: u32) -> Result<f64> {
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0)? - ln_gamma(k + 1.0)? - ln_gamma(n - k + 1.0)?)
}

const AF_QUADRATURE_TOL: f64 = 1e-11;

/// CDF of the AF path SNR by direct integration, valid for any shapes:
///
/// `F(y) = F1(y) + ∫_y^∞ f1(x) F2(y (x + 1) / (x - y)) dx`
///
/// since `γ1 γ2 / (γ1 + γ2 + 1) < y` iff `γ1 <= y`, or `γ1 > y` and
/// `γ2 < y (γ1 + 1) / (γ1 - y)`.
pub fn af_path_cdf_quadrature(hop1: &LinkSnr, hop2: &LinkSnr, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain("af_path_cdf_quadrature", format!("y = {y} must be nonnegative")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let (m1, rate1) = (hop1.m(), hop1.rate());
    let (m2, rate2) = (hop2.m(), hop2.rate());
    let ln_norm1 = m1 * rate1.ln() - ln_gamma(m1)?;
    let scale = 1.0 / rate1;

    // x = y + scale * s / (1 - s), s in (0, 1).
    let integrand = |s: f64| {
        let t = scale * s / (1.0 - s);
        if !t.is_finite() {
            return 0.0;
        }
        let x = y + t;
        let density = ((m1 - 1.0) * x.ln() - rate1 * x + ln_norm1).exp();
        let bound = y * (x + 1.0) / t;
        let jacobian = scale / ((1.0 - s) * (1.0 - s));
        density * specfun::reg_lower_gamma(m2, rate2 * bound).unwrap_or(1.0) * jacobian
    };
    let tail = quad::integrate(integrand, 0.0, 1.0, AF_QUADRATURE_TOL)?;
    Ok((snr_cdf(hop1, y)? + tail).clamp(0.0, 1.0))
}

/// AF path CDF: closed form for integer shapes, quadrature otherwise.
pub fn af_path_cdf(hop1: &LinkSnr, hop2: &LinkSnr, y: f64) -> Result<f64> {
    match af_path_cdf_closed(hop1, hop2, y) {
        Err(Error::ClosedFormUnavailable { .. }) => af_path_cdf_quadrature(hop1, hop2, y),
        other => other,
    }
}

/// Outage of opportunistic AF with selection combining:
/// `F0(γ_th) · Π_i F_AF,i(γ_th)`.
pub fn outage_af_sc(net: &NetworkSpec, power: &PowerSpec, rs: &RateSpec) -> Result<f64> {
    let budget = net.link_budget(power)?;
    let mut outage = snr_cdf(&budget.direct, rs.gamma_th)?;
    for (hop1, hop2) in &budget.relays {
        outage *= af_path_cdf(hop1, hop2, rs.gamma_th)?;
    }
    Ok(outage)
}

/// Which hop dominates a relay's high-SNR outage factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantHop {
    /// `m1 < m2`: failing to decode at the relay dominates.
    First,
    /// `m1 > m2`: the relay-destination hop dominates.
    Second,
    /// `m1 = m2`: both contribute at the same order.
    Both,
}

/// High-SNR form `coefficient · SNR^-exponent` of one relay's factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayAsymptote {
    pub dominant: DominantHop,
    pub exponent: f64,
    pub coefficient: f64,
}

/// `P_out ≃ coding_gain · SNR^-diversity_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    pub coding_gain: f64,
    pub diversity_order: f64,
    /// Coefficient of the direct-link factor, `(m0 γ_th / ω0)^m0 / (m0 Γ(m0))`.
    pub direct_coefficient: f64,
    pub relays: Vec<RelayAsymptote>,
}

/// `(m x / ω)^m / (m Γ(m))`: the SNR-free part of `P(m, m x / (ω SNR))`.
fn small_cdf_coefficient(m: f64, threshold: f64, omega: f64) -> Result<f64> {
    specfun::reg_lower_gamma_asymptote(m, m * threshold / omega)
}

/// Coding gain and diversity order of the DF-AF scheme.
///
/// When both hops share the shape, the relay coefficient is the sum of the
/// two hop coefficients; with `Δ = γ_th` and equal spreads this is twice the
/// first-hop coefficient.
pub fn coding_gain_dfaf(net: &NetworkSpec, rs: &RateSpec) -> Result<AsymptoticResult> {
    let direct = net.direct;
    let direct_coefficient = small_cdf_coefficient(direct.m(), rs.gamma_th, direct.omega())?;
    let mut coding_gain = direct_coefficient;
    let mut diversity_order = direct.m();
    let mut relays = Vec::with_capacity(net.relay_count());
    for hops in &net.relays {
        let (m1, m2) = (hops.first.m(), hops.second.m());
        let first = || small_cdf_coefficient(m1, rs.delta, hops.first.omega());
        let second = || small_cdf_coefficient(m2, rs.gamma_th, hops.second.omega());
        let r = if m1 > m2 {
            RelayAsymptote {
                dominant: DominantHop::Second,
                exponent: m2,
                coefficient: second()?,
            }
        } else if m1 < m2 {
            RelayAsymptote {
                dominant: DominantHop::First,
                exponent: m1,
                coefficient: first()?,
            }
        } else {
            RelayAsymptote {
                dominant: DominantHop::Both,
                exponent: m1,
                coefficient: first()? + second()?,
            }
        };
        coding_gain *= r.coefficient;
        diversity_order += r.exponent;
        relays.push(r);
    }
    Ok(AsymptoticResult {
        coding_gain,
        diversity_order,
        direct_coefficient,
        relays,
    })
}

fn equal_power_snr(power: &PowerSpec, what: &str) -> Result<f64> {
    power.transmit_snr().ok_or_else(|| {
        Error::Config(format!(
            "{what} is only defined for equal source and relay powers"
        ))
    })
}

/// High-SNR approximation `g · SNR^-d` of the DF-AF (and DF) outage.
pub fn asymptotic_outage_dfaf(net: &NetworkSpec, power: &PowerSpec, rs: &RateSpec) -> Result<f64> {
    let snr = equal_power_snr(power, "the asymptotic outage")?;
    if !(snr > 0.0) {
        return Err(Error::domain("asymptotic_outage_dfaf", format!("SNR {snr} must be positive")));
    }
    let asym = coding_gain_dfaf(net, rs)?;
    Ok(asym.coding_gain * snr.powf(-asym.diversity_order))
}

/// Squeeze bounds on one relay's AF path CDF at `γ_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfBounds {
    pub lower: f64,
    pub upper: f64,
    /// `min(m1, m2)`
    pub m: f64,
    /// Spread of the hop achieving the minimum shape.
    pub omega: f64,
}

/// Asymptotic bounds `L_i <= F_AF,i(γ_th) <= U_i`, from
/// `min(γ1, γ2) / 2 <= γ1 γ2 / (γ1 + γ2 + 1) < min(γ1, γ2)`.
///
/// For equal shapes the hop with the smaller spread is used.
pub fn af_bounds(hops: &RelayHops, rs: &RateSpec, snr: f64) -> Result<AfBounds> {
    if !(snr > 0.0) {
        return Err(Error::domain("af_bounds", format!("SNR {snr} must be positive")));
    }
    let (first, second) = (hops.first, hops.second);
    let weaker = if first.m() < second.m()
        || (first.m() == second.m() && first.omega() <= second.omega())
    {
        first
    } else {
        second
    };
    let (m, omega) = (weaker.m(), weaker.omega());
    let snr_term = snr.powf(-m);
    let lower = small_cdf_coefficient(m, rs.gamma_th, omega)? * snr_term;
    let upper = small_cdf_coefficient(m, 2.0 * rs.gamma_th, omega)? * snr_term;
    Ok(AfBounds {
        lower,
        upper,
        m,
        omega,
    })
}

/// Asymptotic lower and upper outage of opportunistic AF under SC: the
/// direct-link asymptote times `Π L_i` and `Π U_i`.
pub fn asymptotic_af_bounds(net: &NetworkSpec, power: &PowerSpec, rs: &RateSpec) -> Result<(f64, f64)> {
    let snr = equal_power_snr(power, "the AF asymptotic bounds")?;
    let direct = net.direct;
    let direct_term =
        small_cdf_coefficient(direct.m(), rs.gamma_th, direct.omega())? * snr.powf(-direct.m());
    net.relays.iter().try_fold((direct_term, direct_term), |(lo, hi), hops| {
        let b = af_bounds(hops, rs, snr)?;
        Ok((lo * b.lower, hi * b.upper))
    })
}

/// Diversity order of opportunistic AF: `m0 + Σ min(m1i, m2i)`.
pub fn diversity_order_af(net: &NetworkSpec) -> f64 {
    net.direct.m()
        + net
            .relays
            .iter()
            .map(|h| h.first.m().min(h.second.m()))
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

    fn rayleigh_at(k: usize, snr: f64) -> (NetworkSpec, PowerSpec, RateSpec) {
        (
            NetworkSpec::rayleigh(k),
            PowerSpec::equal(snr).unwrap(),
            RateSpec::new(1.0).unwrap(),
        )
    }

    #[test]
    fn rate_spec_thresholds() {
        let rs = RateSpec::new(1.0).unwrap();
        assert_eq!(rs.delta(), 3.0);
        assert_eq!(rs.gamma_th(), 3.0);
        let rs = RateSpec::with_threshold(0.5, 2.5).unwrap();
        assert_eq!(rs.delta(), 1.0);
        assert_eq!(rs.gamma_th(), 2.5);
        assert!(RateSpec::new(0.0).is_err());
        assert!(RateSpec::with_threshold(1.0, -1.0).is_err());
    }

    #[test]
    fn no_relays_is_direct_outage() {
        let (net, p, rs) = rayleigh_at(0, 10.0);
        let direct = 1.0 - (-0.3f64).exp();
        assert!((outage_dfaf_sc(&net, &p, &rs).unwrap() - direct).abs() < 1e-15);
        assert!((outage_af_sc(&net, &p, &rs).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_single_relay_hand_value() {
        let (net, p, rs) = rayleigh_at(1, 10.0);
        let f = 1.0 - (-0.3f64).exp();
        let hand = f * ((1.0 - f) * f + f);
        let v = outage_dfaf_sc(&net, &p, &rs).unwrap();
        assert!((v - hand).abs() < 1e-15);
        assert!((v - 0.11694).abs() < 1e-5);
    }

    #[test]
    fn df_equals_dfaf_under_sc() {
        let net = NetworkSpec::from_shapes(0.5, &[1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        let rs = RateSpec::new(1.0).unwrap();
        for db in [0.0, 13.0, 37.5] {
            let p = PowerSpec::equal(10f64.powf(db / 10.0)).unwrap();
            assert_eq!(
                outage_df_sc(&net, &p, &rs).unwrap(),
                outage_dfaf_sc(&net, &p, &rs).unwrap()
            );
        }
    }

    #[test]
    fn closed_form_rejects_fractional_shapes() {
        let a = LinkSnr::new(1.5, 10.0).unwrap();
        let b = LinkSnr::new(1.0, 10.0).unwrap();
        assert!(matches!(
            af_path_cdf_closed(&a, &b, 3.0),
            Err(Error::ClosedFormUnavailable { .. })
        ));
        // The dispatcher falls back to quadrature.
        let v = af_path_cdf(&a, &b, 3.0).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn af_path_cdf_edges() {
        let a = LinkSnr::new(1.0, 10.0).unwrap();
        assert_eq!(af_path_cdf_closed(&a, &a, 0.0).unwrap(), 0.0);
        assert_eq!(af_path_cdf_quadrature(&a, &a, 0.0).unwrap(), 0.0);
        assert!(af_path_cdf_closed(&a, &a, 1e4).unwrap() > 1.0 - 1e-6);
        assert!(af_path_cdf_quadrature(&a, &a, 1e4).unwrap() > 1.0 - 1e-6);
        assert!(af_path_cdf_closed(&a, &a, -1.0).is_err());
    }

    #[test]
    fn theta_branches() {
        let rs = RateSpec::new(1.0).unwrap();
        let net = NetworkSpec::from_shapes(1.0, &[2.0, 1.0, 1.0], &[1.0, 2.0, 1.0]).unwrap();
        let a = coding_gain_dfaf(&net, &rs).unwrap();
        assert_eq!(a.relays[0].dominant, DominantHop::Second);
        assert_eq!(a.relays[0].exponent, 1.0);
        assert!((a.relays[0].coefficient - 3.0).abs() < 1e-12);
        assert_eq!(a.relays[1].dominant, DominantHop::First);
        assert_eq!(a.relays[2].dominant, DominantHop::Both);
        // 2 * Δ / ω for the Rayleigh equal-shape branch.
        assert!((a.relays[2].coefficient - 6.0).abs() < 1e-12);
        assert_eq!(a.diversity_order, 4.0);
    }

    #[test]
    fn no_relay_coding_gain() {
        let rs = RateSpec::new(1.0).unwrap();
        let net = NetworkSpec::from_shapes(0.8, &[], &[]).unwrap();
        let a = coding_gain_dfaf(&net, &rs).unwrap();
        assert_eq!(a.diversity_order, 0.8);
        let expect = (0.8f64 * 3.0).powf(0.8) / (0.8 * ln_gamma(0.8).unwrap().exp());
        assert!((a.coding_gain - expect).abs() < 1e-13);
        assert_eq!(diversity_order_af(&net), 0.8);
    }

    #[test]
    fn asymptotes_need_equal_power() {
        let (net, _, rs) = rayleigh_at(2, 1.0);
        let p = PowerSpec::new(1.0, 2.0, 1.0).unwrap();
        assert!(matches!(asymptotic_outage_dfaf(&net, &p, &rs), Err(Error::Config(_))));
        assert!(asymptotic_af_bounds(&net, &p, &rs).is_err());
    }

    #[test]
    fn af_bounds_ratio_and_min_side() {
        let rs = RateSpec::new(1.0).unwrap();
        let hops = RelayHops {
            first: ChannelSpec::new(1.0, 0.7).unwrap(),
            second: ChannelSpec::new(2.0, 1.0).unwrap(),
        };
        let b = af_bounds(&hops, &rs, 1e4).unwrap();
        assert_eq!(b.m, 1.0);
        assert_eq!(b.omega, 0.7);
        assert!((b.upper / b.lower - 2.0).abs() < 1e-12);
        let hops = RelayHops {
            first: ChannelSpec::unit(3.0).unwrap(),
            second: ChannelSpec::unit(2.5).unwrap(),
        };
        let b = af_bounds(&hops, &rs, 1e3).unwrap();
        assert_eq!(b.m, 2.5);
        assert!((b.upper / b.lower - 2f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn af_worse_than_dfaf_at_high_snr() {
        let (net, p, rs) = rayleigh_at(2, 1e3);
        assert!(outage_dfaf_sc(&net, &p, &rs).unwrap() <= outage_af_sc(&net, &p, &rs).unwrap());
    }
}
