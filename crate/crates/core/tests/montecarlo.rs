use cyclesim::ble::INTERVAL_GRID_US;
use cyclesim::montecarlo::{draw_scenario, scenario_rng, ExperimentConfig};

#[test]
fn draws_stay_on_grid_and_sorted() {
    let cfg = ExperimentConfig::default();
    for rep in 0..1_000 {
        let s = draw_scenario(&mut scenario_rng(4, 0, rep), &cfg, 625_000).unwrap();
        assert_eq!(s.networks.len(), 3);
        for w in s.networks.windows(2) {
            assert!(w[0].interval >= w[1].interval);
        }
        for (i, n) in s.networks.iter().enumerate() {
            assert_eq!(n.id as usize, i);
            assert_eq!(n.interval % INTERVAL_GRID_US, 0);
            assert!((7_500..=625_000).contains(&n.interval));
            assert!(n.offset <= n.interval);
            assert!(n.initial_channel < 2);
        }
        assert_eq!(s.noi, 0);
        assert_eq!(s.networks[0].offset, 742);
    }
}

#[test]
fn same_seed_same_scenario() {
    let cfg = ExperimentConfig {
        networks: 5,
        noi_rank: 3,
        ..ExperimentConfig::default()
    };
    let a = draw_scenario(&mut scenario_rng(17, 2, 9), &cfg, 100_000).unwrap();
    let b = draw_scenario(&mut scenario_rng(17, 2, 9), &cfg, 100_000).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.noi, 2);
    assert_eq!(a.networks[2].offset, 742);
    let c = draw_scenario(&mut scenario_rng(17, 2, 10), &cfg, 100_000).unwrap();
    assert_ne!(a, c);
}

#[test]
fn horizon_limit_skips() {
    let cfg = ExperimentConfig {
        horizon_cap_us: Some(1),
        ..ExperimentConfig::default()
    };
    assert!(draw_scenario(&mut scenario_rng(1, 0, 0), &cfg, 100_000).is_err());
    let cfg = ExperimentConfig {
        horizon: cyclesim::montecarlo::HorizonPolicy::Capped,
        horizon_cap_us: Some(50_000),
        ..ExperimentConfig::default()
    };
    let s = draw_scenario(&mut scenario_rng(1, 0, 0), &cfg, 100_000).unwrap();
    assert!(s.horizon.0 <= 50_000);
}
