use mobb::branching::BranchRule;
use mobb::dominance::DominanceTest;
use mobb::engine::{solve, solve_with_observer, NodeEvent, SearchConfig, SearchObserver, SearchStatus, Selection};
use mobb::instances::{generate_instance, GeneratorSpec};
use mobb::model::{from_gap, from_knapsack};
use mobb::oracle::{brute_force_front, hypervolume};

struct HvTrace {
    reference: Vec<i64>,
    samples: Vec<f64>,
}

impl SearchObserver for HvTrace {
    fn on_node(&mut self, e: &NodeEvent<'_>) {
        if e.iteration % 100 == 1 {
            let pts: Vec<Vec<i64>> = e.incumbents.images().map(|y| y.to_vec()).collect();
            self.samples.push(hypervolume(&pts, &self.reference).unwrap());
        }
    }
}

#[test]
fn incumbent_hypervolume_never_decreases() {
    for seed in 1..=3 {
        let inst = generate_instance(&GeneratorSpec::knapsack(3, 16, seed)).unwrap();
        for sel in [Selection::Df, Selection::Bf, Selection::Hvg] {
            let mut trace = HvTrace {
                reference: inst.reference_point(),
                samples: Vec::new(),
            };
            let res = solve_with_observer(&inst, &SearchConfig::new(sel, BranchRule::Hf), &mut trace).unwrap();
            let last: Vec<Vec<i64>> = res.nondominated_set.iter().map(|s| s.y.clone()).collect();
            trace.samples.push(hypervolume(&last, &trace.reference).unwrap());
            assert!(trace.samples.windows(2).all(|w| w[0] <= w[1]), "seed {seed} {sel}");
        }
    }
}

#[test]
fn conservation_and_counters() {
    let inst = generate_instance(&GeneratorSpec::gap(3, 3, 4, 4)).unwrap();
    for sel in Selection::ALL {
        for rule in BranchRule::ALL {
            let res = solve(&inst, &SearchConfig::new(sel, rule)).unwrap();
            assert_eq!(res.nodes_created, res.nodes_processed + res.nodes_queued);
            let f = res.fathomed;
            assert_eq!(res.nodes_processed, f.infeasible + f.optimal + f.dominated + res.nodes_branched);
            assert_eq!(res.nodes_created, 1 + 2 * res.nodes_branched);
        }
    }
}

#[test]
fn repeated_runs_are_identical() {
    let inst = generate_instance(&GeneratorSpec::knapsack(3, 14, 5)).unwrap();
    for sel in [Selection::Hvg, Selection::Woe, Selection::Hd] {
        let config = SearchConfig::new(sel, BranchRule::Mof);
        let a = solve(&inst, &config).unwrap();
        let b = solve(&inst, &config).unwrap();
        assert_eq!(a.nondominated_set, b.nondominated_set);
        assert_eq!(
            (a.nodes_created, a.nodes_processed, a.fathomed),
            (b.nodes_created, b.nodes_processed, b.fathomed)
        );
    }
}

#[test]
fn limits_return_partial_results() {
    let inst = generate_instance(&GeneratorSpec::knapsack(3, 16, 2)).unwrap();
    let config = SearchConfig {
        node_limit: Some(5),
        ..SearchConfig::new(Selection::Bf, BranchRule::Hf)
    };
    let res = solve(&inst, &config).unwrap();
    assert_eq!(res.status, SearchStatus::NodeLimit);
    assert_eq!(res.nodes_processed, 5);
    assert_eq!(res.nodes_created, res.nodes_processed + res.nodes_queued);

    let config = SearchConfig {
        time_limit_seconds: 1e-9,
        ..SearchConfig::new(Selection::Hvg, BranchRule::Hf)
    };
    let res = solve(&inst, &config).unwrap();
    assert_eq!(res.status, SearchStatus::TimeLimit);
}

#[test]
fn engine_example_front() {
    // items (w, c1, c2): a(2,3,1), b(2,1,3), c(1,1,1), capacity 3
    let inst = from_knapsack(&[2, 2, 1], 3, &[vec![3, 1, 1], vec![1, 3, 1]]).unwrap();
    let res = solve(&inst, &SearchConfig::default()).unwrap();
    assert_eq!(res.front(), vec![vec![2, 4], vec![4, 2]]);
    assert_eq!(res.front(), brute_force_front(&inst).unwrap().points);
}

#[test]
fn infeasible_gap_reports_empty_front() {
    // every job needs 5 units on either machine, capacity 4
    let costs = vec![vec![vec![1, 2], vec![2, 1]], vec![vec![2, 1], vec![1, 2]]];
    let inst = from_gap(&costs, &[vec![5, 5], vec![5, 5]], &[4, 4]).unwrap();
    for sel in Selection::ALL {
        let res = solve(&inst, &SearchConfig::new(sel, BranchRule::Sr)).unwrap();
        assert_eq!(res.status, SearchStatus::Complete);
        assert!(res.nondominated_set.is_empty());
        assert_eq!(res.fathomed.infeasible, 1);
    }
}

#[test]
fn two_objective_instances_match_oracle() {
    for seed in 1..=4 {
        for inst in [
            generate_instance(&GeneratorSpec::knapsack(2, 12, seed)).unwrap(),
            generate_instance(&GeneratorSpec::gap(2, 3, 4, seed)).unwrap(),
        ] {
            let expected = brute_force_front(&inst).unwrap().points;
            for sel in Selection::ALL {
                let res = solve(&inst, &SearchConfig::new(sel, BranchRule::Dom)).unwrap();
                assert_eq!(res.front(), expected, "seed {seed} {sel}");
            }
        }
    }
}

#[test]
fn extreme_point_test_flag_runs() {
    // The weaker test can discard nondominated points, so only the result's
    // internal consistency is checked.
    let inst = generate_instance(&GeneratorSpec::knapsack(3, 10, 3)).unwrap();
    let config = SearchConfig {
        dominance_test: DominanceTest::ExtremePointsOnly,
        ..SearchConfig::new(Selection::Hvg, BranchRule::Hf)
    };
    let res = solve(&inst, &config).unwrap();
    let expected = brute_force_front(&inst).unwrap().points;
    assert!(res.front().iter().all(|y| expected.contains(y)));
    let exact = solve(&inst, &SearchConfig::new(Selection::Hvg, BranchRule::Hf)).unwrap();
    assert!(res.nodes_created <= exact.nodes_created);
}
