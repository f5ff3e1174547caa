use hprop::hamdec::OutcomeTag;
use hprop::montecarlo::{convergence_table, run_trials, trials_csv, ExperimentConfig, Method, Preset};
use hprop::rational::q;
use hprop::StepGraphon;

#[test]
fn outside_polytope_estimates_decay() {
    let res = run_trials(&Preset::OutsidePolytope.config(), 0).unwrap();
    let est: Vec<f64> = res.estimates.iter().map(|e| e.estimate).collect();
    assert!(est.windows(2).all(|w| w[1] <= w[0]), "{est:?}");
    assert!(*est.last().unwrap() <= 0.02, "{est:?}");
}

#[test]
fn bipartite_skeleton_at_odd_n_is_always_zero() {
    let cfg = Preset::NoOddCycle.config();
    assert!(cfg.n_values.iter().all(|n| n % 2 == 1));
    let res = run_trials(&cfg, 0).unwrap();
    for e in &res.estimates {
        assert_eq!(e.successes, 0, "n = {}", e.n);
    }
}

#[test]
fn constructive_success_implies_decision() {
    let mut cfg = Preset::Line.config();
    cfg.n_values = vec![60, 120, 240];
    cfg.trials_per_n = 150;
    let res = run_trials(&cfg, 0).unwrap();
    let mut both = 0;
    for r in &res.records {
        if r.constructive == OutcomeTag::Success {
            assert!(r.decision, "trial {} at n = {}", r.trial, r.n);
            both += 1;
        }
    }
    assert!(both > 100);
}

#[test]
fn constant_complete_graphon_at_even_n() {
    let cfg = ExperimentConfig {
        graphon: StepGraphon::constant(q(1, 1)).unwrap(),
        n_values: vec![2, 8, 64],
        trials_per_n: 30,
        master_seed: 5,
        method: Method::Matching,
    };
    let res = run_trials(&cfg, 0).unwrap();
    assert!(res.estimates.iter().all(|e| e.estimate == 1.0));
}

#[test]
fn deterministic_tables_across_pool_sizes() {
    let mut cfg = Preset::Borderline.config();
    cfg.n_values = vec![50, 100];
    cfg.trials_per_n = 60;
    let runs: Vec<_> = [1, 2, 5].iter().map(|&t| run_trials(&cfg, t).unwrap()).collect();
    for r in &runs[1..] {
        assert_eq!(trials_csv(&r.records, 2, false).unwrap(), trials_csv(&runs[0].records, 2, false).unwrap());
        assert_eq!(convergence_table(r, false).unwrap(), convergence_table(&runs[0], false).unwrap());
    }
}
