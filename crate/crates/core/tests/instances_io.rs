use mobb::instances::{generate, generate_instance, generate_to_dir, load, GeneratorSpec};
use mobb::lbs::compute;
use mobb::model::{InstanceFile, Subproblem};
use mobb::simplex::LpSolver;

#[test]
fn gap_relaxations_mostly_feasible() {
    let mut solver = LpSolver::new();
    for (m, j) in [(3, 4), (3, 9), (4, 12), (5, 15)] {
        let mut feasible = 0;
        for seed in 1..=10 {
            let inst = generate_instance(&GeneratorSpec::gap(3, m, j, seed)).unwrap();
            let lbs = compute(&mut solver, &inst, &Subproblem::root(&inst)).unwrap();
            feasible += usize::from(!lbs.is_empty);
        }
        assert!(feasible >= 9, "m={m} j={j}: {feasible}/10");
    }
}

#[test]
fn gap_values_within_range() {
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    let mut draws = 0;
    for seed in 0..20 {
        if let InstanceFile::Gap { resources, costs, .. } = generate(&GeneratorSpec::gap(3, 3, 6, seed)).unwrap() {
            for v in resources.iter().flatten().chain(costs.iter().flatten().flatten()) {
                lo = lo.min(*v);
                hi = hi.max(*v);
                draws += 1;
            }
        }
    }
    assert!(draws >= 1000);
    assert_eq!((lo, hi), (1, 20));
}

#[test]
fn generated_files_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let paths = generate_to_dir(&GeneratorSpec::gap(2, 2, 3, 0), &[5, 6], dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    assert!(paths[0].ends_with("gap/p2_n6_s5.json"));
    for (p, seed) in paths.iter().zip([5, 6]) {
        let inst = load(p).unwrap();
        assert_eq!(inst.num_vars(), 6);
        let again = generate(&GeneratorSpec::gap(2, 2, 3, seed)).unwrap();
        assert_eq!(inst.source(), Some(&again));
    }
    let missing = dir.path().join("nope.json");
    assert!(load(&missing).unwrap_err().to_string().contains("nope.json"));
}
