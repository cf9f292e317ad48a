mod common;

use common::*;
use gausscov::{
    averaged_fit, misclassification_count, repeated_stepwise, step_pvalue, stepwise, ColMatrix,
    Dataset, PvalueConfig, RepeatLimits,
};
use proptest::prelude::*;

fn replay(data: &Dataset, cfg: &PvalueConfig) {
    let path = stepwise(data, cfg).unwrap();
    let mut ss_cur = path.ss0;
    for (ell, step) in path.steps.iter().enumerate() {
        let p = step_pvalue(step.rss, ss_cur, data.n(), ell, path.ek, cfg.nu).unwrap();
        assert_eq!(p, step.pvalue);
        assert!(p <= cfg.alpha);
        assert!(step.rss <= ss_cur);
        ss_cur = step.rss;
    }
}

#[test]
fn recorded_pvalues_replay_exactly() {
    let mut r = rng(11);
    for nu in [1.0, 2.5, 6.0] {
        let d = signal_dataset(&mut r, 60, 80, &[(5, 0.8), (17, 0.6), (40, 0.5), (41, 0.4)]);
        replay(&d, &PvalueConfig::new(0.2, 20).with_nu(nu));
    }
}

#[test]
fn planted_signals_are_found() {
    let mut r = rng(12);
    let d = signal_dataset(&mut r, 100, 300, &[(7, 1.5), (123, -1.2), (250, 1.0)]);
    let path = stepwise(&d, &PvalueConfig::new(0.01, 10)).unwrap();
    let mut idx = path.indices();
    idx.sort();
    assert_eq!(idx, vec![7, 123, 250]);
}

#[test]
fn selection_is_deterministic() {
    let mut r = rng(13);
    let d = signal_dataset(&mut r, 50, 120, &[(3, 0.7), (90, 0.7)]);
    let cfg = PvalueConfig::new(0.3, 10).with_nu(3.0);
    assert_eq!(stepwise(&d, &cfg).unwrap(), stepwise(&d, &cfg).unwrap());
}

#[test]
fn zero_alpha_and_kmax_limits() {
    let mut r = rng(14);
    let d = signal_dataset(&mut r, 40, 30, &[(1, 2.0), (2, 2.0), (3, 2.0)]);
    assert!(stepwise(&d, &PvalueConfig::new(0.0, 10)).unwrap().is_empty());
    assert_eq!(stepwise(&d, &PvalueConfig::new(1.0, 2)).unwrap().len(), 2);
    // The active set never exceeds n - 2.
    let small = noise_dataset(&mut r, 6, 20);
    assert!(stepwise(&small, &PvalueConfig::new(1.0, 50)).unwrap().len() <= 4);
    assert!(stepwise(&d, &PvalueConfig::new(1.5, 10)).is_err());
    assert!(stepwise(&d, &PvalueConfig::new(0.05, 10).with_nu(0.5)).is_err());
}

#[test]
fn tiny_alpha_rarely_selects_under_noise() {
    let cfg = PvalueConfig::new(1e-6, 10);
    let hits = (0..500u64)
        .filter(|&seed| {
            let mut r = gausscov::simulation::replication_rng(1414, seed);
            !stepwise(&noise_dataset(&mut r, 100, 50), &cfg).unwrap().is_empty()
        })
        .count();
    assert!(hits <= 2, "{hits} of 500 runs selected something");
}

#[test]
fn noise_selection_rate_respects_alpha() {
    let alpha = 0.1;
    let cfg = PvalueConfig::new(alpha, 1);
    let nsim = 1000;
    let hits = (0..nsim as u64)
        .filter(|&seed| {
            let mut r = gausscov::simulation::replication_rng(1515, seed);
            !stepwise(&noise_dataset(&mut r, 40, 25), &cfg).unwrap().is_empty()
        })
        .count();
    let rate = hits as f64 / nsim as f64;
    assert!(rate <= alpha + 3.0 * (alpha / nsim as f64).sqrt(), "rate {rate}");
}

#[test]
fn effective_k_makes_restricted_scoring_stricter() {
    let mut r = rng(16);
    let d = signal_dataset(&mut r, 60, 200, &[(10, 0.6), (20, 0.5)]);
    let restricted = d.restrict(&[10, 20, 30, 40]).unwrap();
    let plain = stepwise(&restricted, &PvalueConfig::new(1.0, 2)).unwrap();
    let rescored = stepwise(&restricted, &PvalueConfig::new(1.0, 2).with_ek(200.0)).unwrap();
    assert_eq!(plain.indices(), rescored.indices());
    for (a, b) in plain.steps.iter().zip(&rescored.steps) {
        assert!(b.pvalue >= a.pvalue);
    }
}

#[test]
fn repeated_groups_are_disjoint_and_numbered() {
    let mut r = rng(17);
    let d = signal_dataset(&mut r, 60, 150, &[(1, 1.0), (2, 0.9), (3, 0.8), (4, 0.7), (5, 0.6)]);
    let cfg = PvalueConfig::new(0.05, 10);
    let groups = repeated_stepwise(&d, &cfg, RepeatLimits::default()).unwrap();
    assert!(!groups.groups.is_empty());
    let mut seen = std::collections::HashSet::new();
    for (i, g) in groups.groups.iter().enumerate() {
        assert_eq!(g.id, i + 1);
        assert!(!g.steps.is_empty());
        for j in g.indices() {
            assert!(seen.insert(j), "covariate {j} in two groups");
        }
    }
    assert_eq!(seen.len(), groups.total_covariates);

    let first = repeated_stepwise(&d, &cfg, RepeatLimits { nmax: Some(1), vmax: None }).unwrap();
    assert_eq!(first.groups.len(), 1);
    assert_eq!(first.groups[0].steps, stepwise(&d, &cfg).unwrap().steps);

    let capped = repeated_stepwise(&d, &cfg, RepeatLimits { nmax: None, vmax: Some(3) }).unwrap();
    assert!(capped.total_covariates <= 3);
    assert!(repeated_stepwise(&d, &cfg, RepeatLimits { nmax: Some(0), vmax: None }).is_err());
}

#[test]
fn repeated_runs_continue_past_the_first_group() {
    // Two noisy copies of the same signal: the second run finds the twin.
    let mut r = rng(18);
    let n = 50;
    let s = normals(&mut r, n);
    let mut cols: Vec<Vec<f64>> = (0..30).map(|_| normals(&mut r, n)).collect();
    let e1 = normals(&mut r, n);
    let e2 = normals(&mut r, n);
    cols[4] = s.iter().zip(&e1).map(|(a, b)| a + 0.1 * b).collect();
    cols[9] = s.iter().zip(&e2).map(|(a, b)| a + 0.1 * b).collect();
    let y: Vec<f64> = s.iter().zip(normals(&mut r, n)).map(|(a, e)| a + 0.2 * e).collect();
    let d = Dataset::new(y, ColMatrix::from_columns(&cols).unwrap()).unwrap();
    let g = repeated_stepwise(&d, &PvalueConfig::new(0.01, 5), RepeatLimits::default()).unwrap();
    assert!(g.groups.len() >= 2);
    let firsts: Vec<usize> = g.groups.iter().take(2).map(|g| g.steps[0].index).collect();
    assert!(firsts.contains(&4) && firsts.contains(&9), "{firsts:?}");
}

#[test]
fn misclassification_counts() {
    let mut r = rng(19);
    let n = 40;
    let x = normals(&mut r, n);
    let y: Vec<f64> = x.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    let d = Dataset::new(y.clone(), ColMatrix::from_columns(std::slice::from_ref(&x)).unwrap()).unwrap();
    // The intercept-only fit is the mean; the minority class is wrong.
    assert_eq!(misclassification_count(&d, &[]).unwrap(), ones.min(n - ones));

    let exact = Dataset::new(y.clone(), ColMatrix::from_columns(std::slice::from_ref(&y)).unwrap()).unwrap();
    assert_eq!(misclassification_count(&exact, &[0]).unwrap(), 0);

    let frac = Dataset::new(
        x.clone(),
        ColMatrix::from_columns(&[y]).unwrap(),
    )
    .unwrap();
    assert!(misclassification_count(&frac, &[0]).is_err());
}

#[test]
fn misclassification_along_a_path_matches_direct_count() {
    let mut r = rng(20);
    let n = 60;
    let x = ColMatrix::from_col_major(n, 40, normals(&mut r, n * 40)).unwrap();
    let y: Vec<f64> = (0..n)
        .map(|i| if x.get(i, 3) + 0.5 * x.get(i, 8) > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let d = Dataset::new(y, x).unwrap();
    let path = stepwise(&d, &PvalueConfig::new(0.05, 5).with_misclass(true)).unwrap();
    assert!(!path.is_empty());
    for (i, step) in path.steps.iter().enumerate() {
        let subset: Vec<usize> = path.steps[..=i].iter().map(|s| s.index).collect();
        assert_eq!(step.misclass, Some(misclassification_count(&d, &subset).unwrap()));
    }
}

#[test]
fn averaged_fits() {
    let mut r = rng(21);
    let d = signal_dataset(&mut r, 50, 60, &[(0, 1.0), (1, 1.0), (2, 0.8)]);
    let cfg = PvalueConfig::new(0.05, 5);
    let groups = repeated_stepwise(&d, &cfg, RepeatLimits { nmax: Some(1), vmax: None }).unwrap();
    let avg = averaged_fit(&d, &groups).unwrap();
    let mut doubled = groups.clone();
    doubled.groups.push(groups.groups[0].clone());
    let avg2 = averaged_fit(&d, &doubled).unwrap();
    for (a, b) in avg.iter().zip(&avg2) {
        assert!((a - b).abs() < 1e-12);
    }
    // A single group's fit leaves residuals with the group's RSS.
    let rss: f64 = avg.iter().zip(d.y()).map(|(f, y)| (y - f) * (y - f)).sum();
    let last = groups.groups[0].steps.last().unwrap().rss;
    assert!((rss - last).abs() < 1e-9 * last);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rss_nonincreasing_and_pvalues_in_range(seed in any::<u64>(), nu in 1.0f64..4.0) {
        let mut r = rng(seed);
        let d = signal_dataset(&mut r, 30, 20, &[(0, 0.5), (1, 0.5)]);
        let path = stepwise(&d, &PvalueConfig::new(0.9, 15).with_nu(nu)).unwrap();
        let mut prev = path.ss0;
        for s in &path.steps {
            prop_assert!(s.rss <= prev);
            prop_assert!((0.0..=1.0).contains(&s.pvalue));
            prev = s.rss;
        }
    }
}
