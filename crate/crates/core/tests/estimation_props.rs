mod common;

use common::{logit_choice_data, naive_log_pl, random_choice_data, replicated};
use hyperevent::estimation::{
    aic, aic_ledger, aic_ledger_table, fit, fit_columns, log_partial_likelihood, ChoiceData, ChoiceStratum,
    Derivatives, FitOptions,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> FitOptions {
    FitOptions::default()
}

#[test]
fn likelihood_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let data = random_choice_data(&mut rng, 5, 6, 3);
        let beta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = log_partial_likelihood(&data, &beta, Derivatives::None).unwrap().value;
        let want = naive_log_pl(&data, &beta);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn large_predictors_stay_finite() {
    let data = replicated(&[(&[800.0, 0.0, 1.0], 3)]);
    let l = log_partial_likelihood(&data, &[1.0], Derivatives::Hessian).unwrap();
    assert!(l.value.is_finite() && l.value <= 0.0);
    let l = log_partial_likelihood(&data, &[-1.0], Derivatives::Hessian).unwrap();
    let want = 3.0 * (-800.0 - (1.0 + (-1.0f64).exp()).ln());
    assert!((l.value - want).abs() < 1e-9 * want.abs());
}

#[test]
fn closed_form_roots() {
    let f = fit(&replicated(&[(&[1.0, 0.0], 70), (&[0.0, 1.0], 30)]), &opts()).unwrap();
    assert!(f.converged);
    assert!((f.log_pl.is_finite()));
    assert!((f.estimates[0].as_ref().unwrap().coefficient - (70.0f64 / 30.0).ln()).abs() < 1e-9);

    let f = fit(&replicated(&[(&[1.0, 0.0, 0.0], 60), (&[0.0, 1.0, 0.0], 40)]), &opts()).unwrap();
    assert!((f.estimates[0].as_ref().unwrap().coefficient - 3.0f64.ln()).abs() < 1e-9);
}

#[test]
fn robust_and_naive_se_agree_under_correct_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let data = logit_choice_data(&mut rng, &[0.8, -0.5], 3000, 8);
    let f = fit(&data, &opts()).unwrap();
    assert!(f.converged);
    for e in f.estimates.iter().flatten() {
        let ratio = e.robust_se / e.naive_se;
        assert!((ratio - 1.0).abs() < 0.15, "{:?}: robust {} naive {}", e.kind, e.robust_se, e.naive_se);
    }
    let b = f.estimates[0].as_ref().unwrap();
    assert!((b.coefficient - 0.8).abs() < 4.0 * b.robust_se);
}

#[test]
fn covariances_are_symmetric_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let data = logit_choice_data(&mut rng, &[0.3, 0.2, -0.4], 400, 6);
    let f = fit(&data, &opts()).unwrap();
    for cov in [&f.robust_cov, &f.naive_cov] {
        let p = cov.len();
        let m = DMatrix::from_fn(p, p, |i, j| cov[i][j]);
        assert!((&m - m.transpose()).abs().max() < 1e-12);
        assert!(m.symmetric_eigenvalues().iter().all(|&l| l > -1e-12));
    }
}

#[test]
fn fit_is_identical_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let data = logit_choice_data(&mut rng, &[0.5, -0.2], 700, 5);
    let run = |t: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| fit(&data, &opts()).unwrap())
    };
    let one = run(1);
    for t in [2, 4] {
        let other = run(t);
        assert_eq!(one.log_pl.to_bits(), other.log_pl.to_bits());
        assert_eq!(one.table(), other.table());
    }
}

#[test]
fn degenerate_and_separated_columns() {
    // Column 1 is constant within every stratum.
    let strata = vec![
        ChoiceStratum { rows: 2, values: vec![1.0, 5.0, 0.0, 5.0] },
        ChoiceStratum { rows: 2, values: vec![0.0, 2.0, 1.0, 2.0] },
        ChoiceStratum { rows: 2, values: vec![1.0, 3.0, 0.0, 3.0] },
    ];
    let data = ChoiceData::new(common::kinds(2), strata).unwrap();
    let f = fit(&data, &opts()).unwrap();
    assert!(f.estimates[1].is_none());
    assert_eq!(f.n_params, 1);
    assert!(f.table().lines().nth(2).unwrap().contains("NA"));

    let sep = fit(&replicated(&[(&[1.0, 0.0], 20)]), &opts()).unwrap();
    assert!(sep.separation);
}

#[test]
fn aic_identities_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let data = logit_choice_data(&mut rng, &[0.6, 0.0, -0.3], 300, 6);
    let k = data.columns.clone();
    let full = fit(&data, &opts()).unwrap();
    assert_eq!(aic(&full), 2.0 * full.n_params as f64 - 2.0 * full.log_pl);
    let null_aic = -2.0 * data.null_log_pl();
    for (c, &kind) in k.iter().enumerate() {
        let (over, inner) = aic_ledger(&data, &k, kind, &opts()).unwrap();
        let single = fit_columns(&data, &[c], &opts()).unwrap();
        let drop: Vec<usize> = (0..k.len()).filter(|&j| j != c).collect();
        let dropped = fit_columns(&data, &drop, &opts()).unwrap();
        assert!((over.unwrap() - (single.aic - null_aic)).abs() < 1e-8);
        assert!((inner.unwrap() - (full.aic - dropped.aic)).abs() < 1e-8);
    }
    let ledger = aic_ledger_table(&data, &k, &opts()).unwrap();
    let total = full.aic - null_aic;
    for e in &ledger.entries {
        assert!((e.over_null_pct.unwrap() - e.over_null.unwrap() / total * 100.0).abs() < 1e-9);
    }
    assert!(ledger.table().ends_with("(100.0%)\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.random_range(1..=4);
        let data = random_choice_data(&mut rng, 12, 7, p);
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = log_partial_likelihood(&data, &beta, Derivatives::Hessian).unwrap();
        let g = l.gradient.unwrap();
        let h = 1e-5;
        for c in 0..p {
            let mut up = beta.clone();
            up[c] += h;
            let mut dn = beta.clone();
            dn[c] -= h;
            let fd = (log_partial_likelihood(&data, &up, Derivatives::None).unwrap().value
                - log_partial_likelihood(&data, &dn, Derivatives::None).unwrap().value) / (2.0 * h);
            prop_assert!((fd - g[c]).abs() <= 1e-6 * g[c].abs().max(1.0), "col {}: fd {} vs {}", c, fd, g[c]);
        }
        let hess = l.hessian.unwrap();
        prop_assert!(hess.symmetric_eigenvalues().iter().all(|&e| e <= 1e-10));
    }

    #[test]
    fn null_likelihood_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_choice_data(&mut rng, 20, 9, 2);
        let l = log_partial_likelihood(&data, &[0.0, 0.0], Derivatives::None).unwrap();
        prop_assert_eq!(l.value, data.null_log_pl());
    }

    #[test]
    fn shift_and_scale_invariance(seed in any::<u64>(), scale in 0.2f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = logit_choice_data(&mut rng, &[0.7, -0.4], 150, 5);
        let base = fit(&data, &opts()).unwrap();
        let mut shifted = data.clone();
        let mut scaled = data.clone();
        for s in &mut shifted.strata {
            let shift = rng.random_range(-50.0..50.0);
            for r in 0..s.rows {
                s.values[r * 2] += shift;
            }
        }
        for s in &mut scaled.strata {
            for r in 0..s.rows {
                s.values[r * 2] *= scale;
            }
        }
        let a = fit(&shifted, &opts()).unwrap();
        let b = fit(&scaled, &opts()).unwrap();
        prop_assert!((a.log_pl - base.log_pl).abs() <= 1e-10 * base.log_pl.abs());
        for (x, y) in base.estimates.iter().flatten().zip(a.estimates.iter().flatten()) {
            prop_assert!((x.coefficient - y.coefficient).abs() <= 1e-10 * x.coefficient.abs().max(1.0));
            prop_assert!((x.robust_se - y.robust_se).abs() <= 1e-10 * x.robust_se);
        }
        let (x, y) = (base.estimates[0].as_ref().unwrap(), b.estimates[0].as_ref().unwrap());
        prop_assert!((y.coefficient * scale - x.coefficient).abs() <= 1e-8 * x.coefficient.abs());
        prop_assert!((y.robust_se * scale - x.robust_se).abs() <= 1e-8 * x.robust_se);
        prop_assert!((y.z - x.z).abs() <= 1e-8 * x.z.abs().max(1.0));
    }
}
