use nalgebra::DMatrix;
use netkrig::covariance::{
    additivity_defect, fbm_cov, gamma_fgn, gram_matrix, lsm_scale_alpha, phi, FfbmSpec,
};
use netkrig::sim::stream_rng;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0f64..5.0, n)
}

fn spec_strategy() -> impl Strategy<Value = FfbmSpec<f64>> {
    (proptest::collection::vec(0.1f64..3.0, 6), 0.05f64..=1.0, 0.5f64..2.0)
        .prop_map(|(w, h, s)| FfbmSpec::new(w, h, s).unwrap())
}

proptest! {
    #[test]
    fn phi_symmetric_and_nonnegative_variance(
        spec in spec_strategy(), f in vec_strategy(6), g in vec_strategy(6)
    ) {
        prop_assert_eq!(phi(&spec, &f, &g), phi(&spec, &g, &f));
        prop_assert!(phi(&spec, &f, &f) >= 0.0);
        let expected = spec.sigma * spec.sigma * spec.norm_pow(&f);
        prop_assert!((phi(&spec, &f, &f) - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn self_similar(spec in spec_strategy(), f in vec_strategy(6), g in vec_strategy(6), c in 0.1f64..10.0) {
        let cf: Vec<f64> = f.iter().map(|v| v * c).collect();
        let cg: Vec<f64> = g.iter().map(|v| v * c).collect();
        let lhs = phi(&spec, &cf, &cg);
        let rhs = c.powf(2.0 * spec.hurst) * phi(&spec, &f, &g);
        let scale = spec.sigma * spec.sigma * (spec.norm_pow(&cf) + spec.norm_pow(&cg));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn stationary_increments(
        spec in spec_strategy(), f in vec_strategy(6), g in vec_strategy(6), h in vec_strategy(6)
    ) {
        let fh: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
        let gh: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a + b).collect();
        let lhs = phi(&spec, &fh, &gh) - phi(&spec, &fh, &h) - phi(&spec, &h, &gh) + phi(&spec, &h, &h);
        let scale = spec.sigma * spec.sigma
            * [&fh, &gh, &h].iter().map(|v| spec.norm_pow(v)).fold(1.0, f64::max);
        prop_assert!((lhs - phi(&spec, &f, &g)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn additivity_iff_disjoint(
        spec in spec_strategy(), f in vec_strategy(3), g in vec_strategy(3)
    ) {
        prop_assume!(spec.hurst < 0.99);
        // disjoint supports: f on the first half, g on the second
        let mut fd = f.clone();
        fd.extend([0.0; 3]);
        let mut gd = vec![0.0; 3];
        gd.extend(g.iter().copied());
        prop_assert!(additivity_defect(&spec, &fd, &gd).abs() <= 1e-10 * (1.0 + spec.norm_pow(&fd) + spec.norm_pow(&gd)));
        // overlapping support at coordinate 0
        let mut go = gd.clone();
        go[0] = 1.0;
        fd[0] = 1.0;
        prop_assert!(additivity_defect(&spec, &fd, &go).abs() > 1e-8);
    }

    #[test]
    fn gamma_is_fbm_increment_covariance(h in 0.05f64..=1.0, k in 0usize..50, i in 1usize..20) {
        let (ti, tj) = (i as f64, (i + k) as f64);
        let direct = fbm_cov(h, 1.3, ti, tj) - fbm_cov(h, 1.3, ti - 1.0, tj)
            - fbm_cov(h, 1.3, ti, tj - 1.0) + fbm_cov(h, 1.3, ti - 1.0, tj - 1.0);
        prop_assert!((direct - gamma_fgn(h, 1.3, k)).abs() < 1e-9 * (1.0 + tj.powf(2.0 * h)));
    }

    #[test]
    fn lsm_scale_additive_on_disjoint_supports(
        alpha in 1.05f64..1.95, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0,
        f in proptest::collection::vec(-2.0f64..2.0, 2), g in proptest::collection::vec(-2.0f64..2.0, 2),
    ) {
        let w = [1.0, 0.5, 2.0, 1.5];
        let fd = [f[0], f[1], 0.0, 0.0];
        let gd = [0.0, 0.0, g[0], g[1]];
        let joint = lsm_scale_alpha(alpha, &w, &[(t1, &fd), (t2, &gd)]);
        let split = lsm_scale_alpha(alpha, &w, &[(t1, &fd)]) + lsm_scale_alpha(alpha, &w, &[(t2, &gd)]);
        prop_assert!((joint - split).abs() < 1e-10 * (1.0 + joint));
        // a single term scales as |theta|^alpha ||f||_1
        let one = lsm_scale_alpha(alpha, &w, &[(t1, &fd)]);
        let l1: f64 = fd.iter().zip(&w).map(|(v, m)| v.abs() * m).sum();
        prop_assert!((one - t1.abs().powf(alpha) * l1).abs() < 1e-10 * (1.0 + one));
    }
}

/// `B(f) = sum_u sqrt(mu(u)) B_u(f(u))` with independent fBm's `B_u` has
/// covariance `phi(f, g)`.
#[test]
fn integral_representation_matches_phi() {
    let weights = vec![1.0, 0.5, 2.0, 1.5];
    let hurst = 0.7;
    let sigma = 1.2;
    let spec = FfbmSpec::new(weights.clone(), hurst, sigma).unwrap();
    let fs: Vec<Vec<f64>> = vec![
        vec![1.0, 0.0, 2.0, -1.0],
        vec![0.5, 1.5, 0.0, 0.0],
        vec![1.0, 1.0, 1.0, 1.0],
        vec![-0.3, 2.0, 0.7, 0.0],
        vec![0.0, 0.0, 0.0, 3.0],
    ];
    let n = fs.len();
    // per coordinate, the fBm evaluated at the n time points f_k(u)
    let factors: Vec<DMatrix<f64>> = (0..weights.len())
        .map(|u| {
            let times: Vec<f64> = fs.iter().map(|f| f[u]).collect();
            let cov = DMatrix::from_fn(n, n, |i, j| fbm_cov(hurst, sigma, times[i], times[j]));
            let mut jittered = cov.clone();
            for i in 0..n {
                jittered[(i, i)] += 1e-12;
            }
            jittered.cholesky().expect("fBm covariance is PSD").l()
        })
        .collect();
    let reps = 100_000;
    let mut rng = stream_rng(5, 0);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for _ in 0..reps {
        let mut b = nalgebra::DVector::<f64>::zeros(n);
        for (u, l) in factors.iter().enumerate() {
            let z = nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            b += (l * z) * weights[u].sqrt();
        }
        acc += &b * b.transpose();
    }
    let emp = acc / reps as f64;
    let gram = gram_matrix(&spec, &fs);
    for i in 0..n {
        for j in 0..n {
            let se = ((gram[(i, i)] * gram[(j, j)] + gram[(i, j)].powi(2)) / reps as f64).sqrt();
            assert!(
                (emp[(i, j)] - gram[(i, j)]).abs() < 4.5 * se,
                "({i},{j}) empirical {} vs phi {} (se {se})",
                emp[(i, j)],
                gram[(i, j)]
            );
        }
    }
}
