use nalgebra::{DMatrix, DVector};
use netkrig::covariance::TemporalCov;
use netkrig::kriging::{h_step_coefficients, KrigingModel};
use netkrig::linalg::{pseudo_inverse, SolveMethod};
use netkrig::sim::{stream_rng, synthesize_independent_bins, MeanProfile, Regime, RegimeModel};
use netkrig::topology::random_topology;
use netkrig::{build_routing_matrix, internet2_topology, RoutingMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_inputs(r: &RoutingMatrix, seed: u64) -> (DVector<f64>, DVector<f64>) {
    let mut rng = stream_rng(seed, 99);
    let j = r.num_routes();
    (
        DVector::from_fn(j, |_, _| rng.random_range(1.0..5.0)),
        DVector::from_fn(j, |_, _| rng.random_range(0.2..3.0)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn more_observations_never_hurt(seed in 0u64..10_000, size in 1usize..8) {
        let topo = random_topology(6, 2, seed).unwrap();
        let r = build_routing_matrix(&topo).unwrap();
        let (mu, sx) = random_inputs(&r, seed);
        let mut rng = stream_rng(seed, 1);
        let mut ids: Vec<usize> = (1..=r.num_links()).collect();
        ids.shuffle(&mut rng);
        let small = ids[..size].to_vec();
        let big = ids[..size + 1].to_vec();
        let ms = KrigingModel::fit(&r, &small, &mu, &sx).unwrap();
        let mb = KrigingModel::fit(&r, &big, &mu, &sx).unwrap();
        for (pb, id) in mb.unobserved.iter().enumerate() {
            let ps = ms.unobserved_position(*id).unwrap();
            let (a, b) = (ms.mse_instant[(ps, ps)], mb.mse_instant[(pb, pb)]);
            prop_assert!(b <= a + 1e-9 * a.abs().max(1.0), "link {id}: {b} > {a}");
        }
        prop_assert!(mb.mse_instant.diagonal().iter().all(|&v| v >= -1e-9));
    }

    #[test]
    fn kriging_reproduces_observed_links(seed in 0u64..10_000) {
        // predicting an observed link's duplicate recovers it exactly
        let topo = random_topology(5, 1, seed).unwrap();
        let r = build_routing_matrix(&topo).unwrap();
        let (mu, sx) = random_inputs(&r, seed);
        let mut rows: Vec<Vec<u8>> = (0..r.num_links())
            .map(|l| (0..r.num_routes()).map(|j| r.get(l, j) as u8).collect())
            .collect();
        rows.push(rows[0].clone());
        let dup = RoutingMatrix::from_rows(&rows).unwrap();
        let m = KrigingModel::fit(&dup, &[1], &mu, &sx).unwrap();
        let pos = m.unobserved_position(dup.num_links()).unwrap();
        prop_assert!(m.mse_instant[(pos, pos)].abs() < 1e-9);
        prop_assert!((m.gain[(pos, 0)] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn pseudoinverse_agrees_with_cholesky_when_well_conditioned() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 3);
    let m = KrigingModel::fit(&r, &[3, 7, 9, 12, 17, 21], &mu, &sx).unwrap();
    assert_eq!(m.solve, SolveMethod::Cholesky);
    let (pinv, rank) = pseudo_inverse(&m.sigma_oo);
    assert_eq!(rank, 6);
    let gain = &m.sigma_uo * pinv;
    let rel = (&gain - &m.gain).amax() / m.gain.amax();
    assert!(rel < 1e-8, "{rel}");
}

#[test]
fn sigma2_h_nondecreasing_in_h() {
    for &h in &[0.55, 0.7, 0.85, 0.95] {
        for m in [0, 3, 10] {
            let t = TemporalCov::new(h, 1.0, m).unwrap();
            let mut last = 0.0;
            for step in 1..=20 {
                let c = h_step_coefficients(&t, step).unwrap();
                let s2 = t.gamma(0)
                    - t.gamma_vec(step).iter().zip(&c).map(|(g, c)| g * c).sum::<f64>();
                assert!(s2 >= last - 1e-12, "H={h} m={m} h={step}: {s2} < {last}");
                assert!(s2 <= 1.0 + 1e-12);
                last = s2;
            }
        }
    }
}

#[test]
fn predictor_is_unbiased() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 4);
    let m = KrigingModel::fit(&r, &[3, 7], &mu, &sx).unwrap();
    let regime = RegimeModel {
        regime: Regime::FastGaussian { hurst: 0.8 },
        weights: vec![1.0; r.num_routes()],
        mean: MeanProfile::Constant(mu.clone()),
        scale: sx.iter().map(|v| v.sqrt()).collect(),
    };
    let n = 20_000;
    let (_, links) = synthesize_independent_bins(&regime, &r, n, 8).unwrap();
    let y_o = links.select(&m.observed).unwrap();
    let mut sum = DVector::zeros(m.unobserved.len());
    for t in 0..n {
        sum += m.predict_instant(&y_o.column(t).into_owned()).unwrap().point;
    }
    let mean = sum / n as f64;
    let var = &m.gain * &m.sigma_oo * m.gain.transpose();
    let target = m.mu_u();
    for i in 0..mean.len() {
        let se = (var[(i, i)] / n as f64).sqrt();
        assert!((mean[i] - target[i]).abs() <= 3.0 * se + 1e-12 * target[i].abs(), "link {}", m.unobserved[i]);
    }
}

#[test]
fn bounds_are_symmetric_and_scale_with_confidence() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 5);
    let m = KrigingModel::fit(&r, &[3, 7, 9], &mu, &sx).unwrap();
    let y = DVector::from_vec(vec![4.0, 6.0, 5.0]);
    let p95 = m.predict_instant(&y).unwrap();
    let p99 = m.predict_instant_with(&y, None, 0.99).unwrap();
    let (b95, b99) = (p95.bounds.unwrap(), p99.bounds.unwrap());
    for i in 0..p95.point.len() {
        let (lo, hi) = b95[i];
        assert!(((hi - p95.point[i]) - (p95.point[i] - lo)).abs() < 1e-12);
        assert!(b99[i].1 - b99[i].0 >= hi - lo);
    }
}

#[test]
fn time_varying_mean_is_added_back() {
    let r = RoutingMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let mu = DVector::from_vec(vec![1.0, 1.0]);
    let sx = DVector::from_vec(vec![1.0, 1.0]);
    let m = KrigingModel::fit(&r, &[3], &mu, &sx).unwrap();
    let mu_t = DVector::from_vec(vec![10.0, 30.0]);
    let p = m
        .predict_instant_with(&DVector::from_vec(vec![40.0]), Some(&mu_t), 0.95)
        .unwrap();
    assert_eq!(p.point.as_slice(), &[10.0, 30.0]);
}

#[test]
fn f32_matches_f64() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 6);
    let obs = [3, 5, 7, 9, 11, 12, 17, 21, 23, 25];
    let m64 = KrigingModel::fit(&r, &obs, &mu, &sx).unwrap();
    let m32 = KrigingModel::<f32>::fit(&r, &obs, &mu.cast(), &sx.cast()).unwrap();
    let diff = (m32.gain.cast::<f64>() - &m64.gain).amax();
    assert!(diff < 1e-3, "{diff}");
    let mse = (m32.mse_instant.cast::<f64>() - &m64.mse_instant).amax();
    assert!(mse < 1e-3 * m64.mse_instant.amax(), "{mse}");
}

#[test]
fn stable_prediction_has_no_mse() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 7);
    let m = KrigingModel::fit(&r, &[3, 7], &mu, &sx).unwrap();
    let p = m.predict_stable(&DVector::from_vec(vec![1.0, 2.0])).unwrap();
    assert!(p.mse.is_none() && p.bounds.is_none() && p.std().is_none());
    let scale: Vec<f64> = sx.iter().map(|v| v.sqrt()).collect();
    let q = m.stable_error_quantiles(1.5, 0.0, &scale, 5000, 0.9, 3).unwrap();
    assert_eq!(q.len(), m.unobserved.len());
    assert!(q.iter().all(|(lo, hi)| lo <= hi));
    let q2 = m.stable_error_quantiles(1.5, 0.0, &scale, 5000, 0.9, 3).unwrap();
    assert_eq!(q, q2);
}

#[test]
fn h_step_mse_structure() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 8);
    let m = KrigingModel::fit(&r, &[3, 7, 9], &mu, &sx).unwrap();
    let t = TemporalCov::new(0.8, 1.0, 4).unwrap();
    let hist = DMatrix::from_fn(3, 5, |i, j| (i + j) as f64);
    let p = m.predict_h_step(&t, &hist, 2).unwrap();
    let mse_o = p.observed.mse.unwrap();
    assert!((mse_o - &m.sigma_oo * p.sigma2_h).amax() < 1e-12);
    let mse_u = p.unobserved.mse.unwrap();
    let expected = &m.gain * &m.sigma_oo * m.gain.transpose() * p.sigma2_h + &m.mse_instant;
    assert!((mse_u - expected).amax() < 1e-10);
    assert!(p.sigma2_h > 0.0 && p.sigma2_h < 1.0);
}

#[test]
fn model_file_round_trip_on_internet2() {
    let r = build_routing_matrix(&internet2_topology()).unwrap();
    let (mu, sx) = random_inputs(&r, 9);
    let m = KrigingModel::fit(&r, &[3, 21], &mu, &sx).unwrap();
    let back = KrigingModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
    assert_eq!(m, back);
}
