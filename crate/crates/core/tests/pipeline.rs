use magicbench::pipeline::run_factory_pool;

#[test]
fn factory_pool_ignores_thread_count() {
    let grid = [0.005, 0.02];
    let one = run_factory_pool(&grid, 600, 9, 1).unwrap();
    let three = run_factory_pool(&grid, 600, 9, 3).unwrap();
    assert_eq!(one.records, three.records);
    for (a, b) in one.points.iter().zip(&three.points) {
        assert_eq!(a.accept_msd.to_bits(), b.accept_msd.to_bits());
        assert_eq!(a.epsilon_true.to_bits(), b.epsilon_true.to_bits());
    }
    assert!(one.points[0].epsilon_true < one.points[1].epsilon_true);
}
