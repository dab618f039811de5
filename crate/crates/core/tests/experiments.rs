use matchlab_core::experiment::{evaluate, parse_csv, run_experiment, to_csv, LossMode};
use matchlab_core::{ExperimentConfig, Mechanism, Metric, OrdersMode, ProfileSampler};

const CONFIG: &str = "\
# small smoke run
mechanisms = RSD, R-TLQ+G, PS
n = 3..4
profiles = 40
orders = exact
seed = 9
metrics = util_loss, order_bias
";

#[test]
fn runs_are_reproducible() {
    let cfg = ExperimentConfig::parse(CONFIG).unwrap();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * 2 * 2);
    let csv = to_csv(&a).unwrap();
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), a.len());
    for s in &a {
        assert!(s.mean.is_finite() && s.stderr >= 0.0);
    }
}

#[test]
fn loss_is_never_negative_and_ps_has_no_order_bias() {
    let sampler = ProfileSampler::new(4, 1).unwrap();
    for code in ["RSD", "R-PLQ", "PS", "R-TFQ+G"] {
        let m = Mechanism::parse(code).unwrap();
        let s = evaluate(
            m,
            Metric::UtilLoss,
            sampler,
            30,
            OrdersMode::Exact,
            LossMode::PerProfile,
        )
        .unwrap();
        assert!(s.values.iter().all(|&v| v >= -1e-12), "{code}");
    }
    let ps = evaluate(
        Mechanism::parse("PS").unwrap(),
        Metric::OrderBias,
        sampler,
        30,
        OrdersMode::Exact,
        LossMode::PerProfile,
    )
    .unwrap();
    assert_eq!(ps.stats.mean, 0.0);
}

#[test]
fn sampled_orders_approach_exact_values() {
    let sampler = ProfileSampler::new(4, 2).unwrap();
    let m = Mechanism::parse("RSD").unwrap();
    let exact = evaluate(
        m,
        Metric::UtilLoss,
        sampler,
        200,
        OrdersMode::Exact,
        LossMode::PerProfile,
    )
    .unwrap();
    let sampled = evaluate(
        m,
        Metric::UtilLoss,
        sampler,
        200,
        OrdersMode::Sampled(64),
        LossMode::PerProfile,
    )
    .unwrap();
    assert!((exact.stats.mean - sampled.stats.mean).abs() < 4.0 * sampled.stats.stderr.max(1e-3));
}
