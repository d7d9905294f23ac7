mod common;

use dfaf_core::channel::{
    link_snr, sample_snr, snr_cdf, stream_rng, ChannelSpec, DirectLinkPower, GammaSampler,
    LinkSnr, NetworkSpec, PowerSpec, StreamId,
};
use dfaf_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draws(link: &LinkSnr, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = GammaSampler::new(link);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn link_snr_definition() {
    let l = link_snr(&ChannelSpec::rayleigh(), 10.0, 1.0).unwrap();
    assert_eq!(l.mean_snr(), 10.0);
    assert_eq!(l.rate(), 0.1);
    let l = link_snr(&ChannelSpec::unit(2.0).unwrap(), 10.0, 1.0).unwrap();
    assert_eq!(l.rate(), 0.2);
    let l = link_snr(&ChannelSpec::unit(0.5).unwrap(), 1e4, 1.0).unwrap();
    assert_eq!(l.mean_snr(), 1e4);
    let l = link_snr(&ChannelSpec::new(1.0, 2.5).unwrap(), 4.0, 0.5).unwrap();
    assert_eq!(l.mean_snr(), 20.0);
}

#[test]
fn link_snr_is_scale_consistent() {
    let ch = ChannelSpec::new(1.7, 0.3).unwrap();
    for p in [0.1, 1.0, 3.7, 1e5] {
        let a = link_snr(&ch, p, 0.9).unwrap().mean_snr();
        let b = link_snr(&ch, 2.0 * p, 0.9).unwrap().mean_snr();
        assert_eq!(b, 2.0 * a);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ChannelSpec::new(0.4, 1.0).is_err());
    assert!(ChannelSpec::new(1.0, 0.0).is_err());
    assert!(ChannelSpec::new(f64::NAN, 1.0).is_err());
    let ch = ChannelSpec::rayleigh();
    assert!(matches!(link_snr(&ch, 0.0, 1.0), Err(Error::Domain { .. })));
    assert!(matches!(link_snr(&ch, 1.0, -1.0), Err(Error::Domain { .. })));
    assert!(PowerSpec::new(1.0, 0.0, 1.0).is_err());
    assert!(PowerSpec::from_alpha(10.0, 1.0, 1.0).is_err());
    let l = LinkSnr::new(1.0, 10.0).unwrap();
    assert!(matches!(snr_cdf(&l, -1.0), Err(Error::Domain { .. })));
}

#[test]
fn scenario_shapes_below_half_are_rejected_in_toml() {
    let bad: Result<ChannelSpec, _> = toml::from_str("m = 0.3\nomega = 1.0");
    assert!(bad.is_err());
    let ok: ChannelSpec = toml::from_str("m = 0.8").unwrap();
    assert_eq!((ok.m(), ok.omega()), (0.8, 1.0));
}

#[test]
fn power_split() {
    let p = PowerSpec::from_alpha(10.0, 0.3, 1.0).unwrap();
    assert!((p.source_power() - 3.0).abs() < 1e-12);
    assert!((p.relay_power() - 7.0).abs() < 1e-12);
    assert!((p.alpha() - 0.3).abs() < 1e-12);
    assert_eq!(p.transmit_snr(), None);
    assert_eq!(PowerSpec::equal(5.0).unwrap().transmit_snr(), Some(5.0));
}

#[test]
fn link_budget_follows_power_roles() {
    let net = NetworkSpec::from_shapes(0.5, &[1.0, 2.0], &[1.0, 3.0]).unwrap();
    let p = PowerSpec::new(2.0, 6.0, 0.5).unwrap();
    let b = net.link_budget(&p).unwrap();
    assert_eq!(b.direct.mean_snr(), 4.0);
    assert_eq!(b.direct.m(), 0.5);
    for (first, second) in &b.relays {
        assert_eq!(first.mean_snr(), 4.0);
        assert_eq!(second.mean_snr(), 12.0);
    }
    assert_eq!(b.relays[1].0.m(), 2.0);
    assert_eq!(b.relays[1].1.m(), 3.0);
    let total = net
        .link_budget(&p.with_direct_link(DirectLinkPower::Total))
        .unwrap();
    assert_eq!(total.direct.mean_snr(), 16.0);
}

#[test]
fn snr_cdf_examples() {
    let l = LinkSnr::new(1.0, 10.0).unwrap();
    assert_eq!(snr_cdf(&l, 0.0).unwrap(), 0.0);
    assert!((snr_cdf(&l, 3.0).unwrap() - (1.0 - (-0.3f64).exp())).abs() < 1e-15);
    let l = LinkSnr::new(0.5, 10.0).unwrap();
    let want = common::lower_gamma_p(0.5, 0.15);
    assert!((snr_cdf(&l, 3.0).unwrap() - want).abs() < 1e-10);
    assert!((snr_cdf(&l, 3.0).unwrap() - 0.416_117_579_229_634_8).abs() < 1e-12);
}

#[test]
fn sample_mean_of_exponential() {
    let xs = draws(&LinkSnr::new(1.0, 10.0).unwrap(), 1_000_000, 11);
    let (mean, _) = mean_var(&xs);
    assert!((mean - 10.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn sample_variance_matches_gamma() {
    for m in [0.5, 0.8, 1.0, 2.0, 3.0] {
        let xs = draws(&LinkSnr::new(m, 10.0).unwrap(), 1_000_000, 12);
        let (_, var) = mean_var(&xs);
        let want = 100.0 / m;
        assert!(common::rel_err(var, want) < 0.02, "m = {m}: variance {var}, want {want}");
    }
}

#[test]
fn empirical_cdf_points() {
    let n = 1_000_000;
    let xs = draws(&LinkSnr::new(1.0, 10.0).unwrap(), n, 13);
    let f = xs.iter().filter(|&&x| x <= 10.0).count() as f64 / n as f64;
    assert!((f - (1.0 - (-1.0f64).exp())).abs() < 0.002, "{f}");

    let xs = draws(&LinkSnr::new(2.0, 10.0).unwrap(), n, 14);
    let f = xs.iter().filter(|&&x| x <= 3.0).count() as f64 / n as f64;
    // 1 - Q(2, 0.6) = 1 - 1.6 e^{-0.6}
    let want = 1.0 - 1.6 * (-0.6f64).exp();
    assert!((want - 0.1219).abs() < 1e-4);
    assert!((f - want).abs() < 0.002, "{f}");
}

#[test]
fn kolmogorov_smirnov_against_snr_cdf() {
    let n = 100_000;
    for (i, m) in [0.5, 0.8, 1.0, 2.0, 3.0].into_iter().enumerate() {
        for (j, mean) in [1.0, 10.0, 100.0].into_iter().enumerate() {
            let link = LinkSnr::new(m, mean).unwrap();
            let mut xs = draws(&link, n, 100 + 10 * i as u64 + j as u64);
            let d = common::ks_statistic(&mut xs, |x| snr_cdf(&link, x).unwrap());
            assert!(d < common::ks_critical_1pct(n), "m = {m}, mean = {mean}: D = {d}");
        }
    }
}

#[test]
fn samples_are_positive_and_finite() {
    for m in [0.5, 0.51, 0.8, 1.0, 4.5, 12.0] {
        let link = LinkSnr::new(m, 1e-3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50_000 {
            let x = sample_snr(&link, &mut rng);
            assert!(x.is_finite() && x >= 0.0, "m = {m}: {x}");
        }
    }
}

#[test]
fn streams_are_deterministic_and_distinct() {
    let id = StreamId {
        point: 2,
        block: 7,
        link: 3,
    };
    let a: Vec<u64> = (0..8).map({
        let mut r = stream_rng(42, id);
        move |_| r.random()
    }).collect();
    let b: Vec<u64> = (0..8).map({
        let mut r = stream_rng(42, id);
        move |_| r.random()
    }).collect();
    assert_eq!(a, b);

    let variants = [
        stream_rng(43, id),
        stream_rng(42, StreamId { point: 3, ..id }),
        stream_rng(42, StreamId { block: 8, ..id }),
        stream_rng(42, StreamId { link: 4, ..id }),
    ];
    for mut r in variants {
        let c: Vec<u64> = (0..8).map(|_| r.random()).collect();
        assert_ne!(a, c);
    }
}
