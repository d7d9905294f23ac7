//! Built-in scenarios for the published figure set. All use `R = 1`
//! bit/s/Hz and unit spreads on every link.

use crate::channel::{DirectLinkPower, NetworkSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{Combiner, Scheme};

use super::scenario::{AlphaSweep, CurveGrid, DiversitySurface, Output, Scenario};

/// Preset names with a one-line description. `fig4_varyK` is a group that
/// expands to `fig4_varyK_K1` .. `fig4_varyK_K4`.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2_rayleigh_K1", "Rayleigh, 1 relay: analytic, asymptotic and MC, SC"),
    ("fig2_rayleigh_K2", "Rayleigh, 2 relays: analytic, asymptotic and MC, SC"),
    ("fig2_rayleigh_K3", "Rayleigh, 3 relays: analytic, asymptotic and MC, SC"),
    ("fig3_nakagami_3relay", "m0=0.5, m1=[1,1,2], m2=[1,1,1]: all outputs, SC"),
    ("fig4_varyK", "m0=0.8, unit relay shapes, K = 1..4: analytic and asymptotic DF-AF"),
    ("fig6_diversity_surface", "m0=0.5, 2 symmetric relays: fitted diversity over (g1, g2)"),
    ("fig7_mrc_compare", "m0=0.5, m1=[1,1,2], m2=[1,1,1]: MC with MRC"),
    ("fig8_alpha_sweep", "m0=0.5, m1=[1,1,2], m2=[1,1,1]: MRC, total power 10 dB, alpha sweep"),
];

const FIG4_RELAY_COUNTS: [usize; 4] = [1, 2, 3, 4];

fn grid(lo_db: f64, hi_db: f64, step_db: f64) -> Vec<f64> {
    let n = ((hi_db - lo_db) / step_db).round() as usize;
    (0..=n).map(|i| lo_db + i as f64 * step_db).collect()
}

/// Network with `m0 = 0.5`, `m1 = [1, 1, 2]`, `m2 = [1, 1, 1]`.
pub fn mixed_three_relay_network() -> NetworkSpec {
    NetworkSpec::from_shapes(0.5, &[1.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).expect("valid shapes")
}

fn base(name: &str, network: Option<NetworkSpec>) -> Scenario {
    Scenario {
        name: name.to_string(),
        rate: 1.0,
        gamma_th: None,
        schemes: Scheme::ALL.to_vec(),
        combiners: vec![Combiner::Sc],
        outputs: vec![],
        trials: 1_000_000,
        seed: 1,
        confidence: 0.99,
        network,
        curve: None,
        alpha_sweep: None,
        surface: None,
    }
}

/// Analytic grid 0..50 dB; Monte Carlo restricted to 0..25 dB.
fn sc_curve() -> CurveGrid {
    CurveGrid {
        snr_db: grid(0.0, 50.0, 2.5),
        mc_max_snr_db: Some(25.0),
    }
}

fn fig2(k: usize) -> Scenario {
    let mut s = base(&format!("fig2_rayleigh_K{k}"), Some(NetworkSpec::rayleigh(k)));
    s.outputs = vec![Output::Analytic, Output::Asymptotic, Output::Montecarlo];
    s.curve = Some(sc_curve());
    s
}

fn fig4(k: usize) -> Scenario {
    let ones = vec![1.0; k];
    let net = NetworkSpec::from_shapes(0.8, &ones, &ones).expect("valid shapes");
    let mut s = base(&format!("fig4_varyK_K{k}"), Some(net));
    s.schemes = vec![Scheme::DfAf];
    s.outputs = vec![Output::Analytic, Output::Asymptotic];
    s.curve = Some(CurveGrid {
        snr_db: grid(0.0, 50.0, 2.5),
        mc_max_snr_db: None,
    });
    s
}

fn fig3() -> Scenario {
    let mut s = base("fig3_nakagami_3relay", Some(mixed_three_relay_network()));
    s.outputs = vec![
        Output::Analytic,
        Output::Asymptotic,
        Output::Montecarlo,
        Output::Bounds,
    ];
    s.curve = Some(sc_curve());
    s
}

fn fig6() -> Scenario {
    let mut s = base("fig6_diversity_surface", None);
    s.schemes = vec![Scheme::DfAf];
    s.outputs = vec![Output::Analytic];
    s.surface = Some(DiversitySurface {
        m0: 0.5,
        relays: 2,
        shapes: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        window_db: [35.0, 45.0],
        snr_step_db: 2.5,
    });
    s
}

fn fig7() -> Scenario {
    let mut s = base("fig7_mrc_compare", Some(mixed_three_relay_network()));
    s.combiners = vec![Combiner::Mrc];
    s.outputs = vec![Output::Montecarlo];
    s.curve = Some(CurveGrid {
        snr_db: grid(0.0, 25.0, 2.5),
        mc_max_snr_db: None,
    });
    s
}

fn fig8() -> Scenario {
    let mut s = base("fig8_alpha_sweep", Some(mixed_three_relay_network()));
    s.combiners = vec![Combiner::Mrc];
    s.outputs = vec![Output::Montecarlo];
    s.alpha_sweep = Some(AlphaSweep {
        total_power_db: 10.0,
        noise_variance: 1.0,
        alphas: (1..=9).map(|i| i as f64 / 10.0).collect(),
        direct_link: DirectLinkPower::Source,
    });
    s
}

/// Resolves a preset or preset group to its scenarios.
pub fn preset(name: &str) -> Result<Vec<Scenario>> {
    let one = |s: Scenario| Ok(vec![s]);
    match name {
        "fig2_rayleigh_K1" => one(fig2(1)),
        "fig2_rayleigh_K2" => one(fig2(2)),
        "fig2_rayleigh_K3" => one(fig2(3)),
        "fig3_nakagami_3relay" => one(fig3()),
        "fig4_varyK" => Ok(FIG4_RELAY_COUNTS.iter().map(|&k| fig4(k)).collect()),
        "fig6_diversity_surface" => one(fig6()),
        "fig7_mrc_compare" => one(fig7()),
        "fig8_alpha_sweep" => one(fig8()),
        other => other
            .strip_prefix("fig4_varyK_K")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|k| FIG4_RELAY_COUNTS.contains(k))
            .map(|k| vec![fig4(k)])
            .ok_or_else(|| Error::UnknownPreset(other.to_string())),
    }
}
