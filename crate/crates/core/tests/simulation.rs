use netkrig::sim::{
    simulate_aggregate_onoff, stream_rng, synthesize_fgn, synthesize_route_traffic, MeanProfile,
    OnOffParams, Regime, RegimeModel, StableDist,
};
use netkrig::validation::sum_sq_autocorr;
use netkrig::{build_routing_matrix, internet2_topology};
use rand_distr::Distribution;
use statrs::distribution::{ContinuousCDF, Normal};

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let c = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0);
    c / (va * vb).sqrt()
}

#[test]
fn aggregated_fgn_variance_scales_as_m_pow_2h_minus_2() {
    let h = 0.8;
    let reps = 400;
    let len = 1024;
    for &m in &[1usize, 4, 16, 64] {
        let means: Vec<f64> = (0..reps)
            .map(|s| {
                let v = synthesize_fgn::<f64>(h, 2.0, len, s).unwrap().values;
                v[..m].iter().sum::<f64>() / m as f64
            })
            .collect();
        let emp = means.iter().map(|x| x * x).sum::<f64>() / reps as f64;
        let theory = 4.0 * (m as f64).powf(2.0 * h - 2.0);
        // chi-square with `reps` degrees of freedom: relative sd sqrt(2/reps)
        assert!((emp / theory - 1.0).abs() < 4.0 * (2.0 / reps as f64).sqrt(), "m={m}: {emp} vs {theory}");
    }
}

fn internet2_traffic(len: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, netkrig::RoutingMatrix) {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let j = r.num_routes();
    let model = RegimeModel {
        regime: Regime::FastGaussian { hurst: 0.8 },
        weights: vec![1.0; j],
        mean: MeanProfile::Constant(nalgebra::DVector::from_element(j, 100.0)),
        scale: vec![3.0; j],
    };
    let (routes, links) = synthesize_route_traffic(&model, &r, len, seed).unwrap();
    let rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    (rows(&routes.series), rows(&links.series), r)
}

#[test]
fn distinct_routes_are_uncorrelated() {
    let len = 4096;
    let (routes, _, _) = internet2_traffic(len, 21);
    // the sample correlation of two independent fGn's has this standard error
    let se = sum_sq_autocorr(0.8, len).sqrt() / len as f64;
    let mut pairs = 0;
    let mut beyond = 0;
    for a in 0..routes.len() {
        for b in a + 1..routes.len() {
            pairs += 1;
            if corr(&routes[a], &routes[b]).abs() > 3.0 * se {
                beyond += 1;
            }
        }
    }
    assert!((beyond as f64) < 0.01 * pairs as f64, "{beyond}/{pairs} pairs beyond 3 se");
}

#[test]
fn link_correlation_follows_shared_routes() {
    let len = 8192;
    let (_, links, r) = internet2_traffic(len, 22);
    let se = sum_sq_autocorr(0.8, len).sqrt() / len as f64;
    for (l1, l2) in [(12, 13), (2, 6), (8, 10), (12, 16), (20, 24)] {
        let (a1, a2) = (r.route_set(l1), r.route_set(l2));
        let shared = a1.iter().filter(|j| a2.contains(j)).count() as f64;
        let expected = shared / ((a1.len() * a2.len()) as f64).sqrt();
        let got = corr(&links[l1], &links[l2]);
        assert!((got - expected).abs() < 5.0 * se, "links {} {}: {got} vs {expected}", l1 + 1, l2 + 1);
    }
}

#[test]
fn synthesis_is_bit_reproducible() {
    let (a, b, _) = internet2_traffic(512, 5);
    let (c, d, _) = internet2_traffic(512, 5);
    assert_eq!(a, c);
    assert_eq!(b, d);
    let (e, _, _) = internet2_traffic(512, 6);
    assert_ne!(a, e);

    let p = OnOffParams {
        alpha_on: 1.4,
        alpha_off: 1.6,
        x_min_on: 1.0,
        x_min_off: 2.0,
        num_sources: 40,
        rate: 3.0,
    };
    let t1 = simulate_aggregate_onoff::<f64>(&p, 2, 1000.0, 1.0, 9).unwrap();
    let t2 = simulate_aggregate_onoff::<f64>(&p, 2, 1000.0, 1.0, 9).unwrap();
    assert_eq!(t1, t2);
}

#[test]
fn near_gaussian_stable_matches_normal_quantiles() {
    // S_alpha(s, 0, 0) -> N(0, 2 s^2) as alpha -> 2
    let dist = StableDist::new(1.999, 1.0, 0.0).unwrap();
    let mut rng = stream_rng(3, 0);
    let mut xs: Vec<f64> = (0..200_000).map(|_| dist.sample(&mut rng)).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, 2f64.sqrt()).unwrap();
    for p in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95] {
        let q = xs[(p * xs.len() as f64) as usize];
        assert!((q - normal.inverse_cdf(p)).abs() < 0.03, "p={p}: {q}");
    }
}

#[test]
fn stable_scale_zero_is_degenerate() {
    let dist = StableDist::new(1.5, 0.0, 0.3).unwrap();
    let mut rng = stream_rng(1, 0);
    assert!((0..100).all(|_| dist.sample(&mut rng) == 0.0));
}
