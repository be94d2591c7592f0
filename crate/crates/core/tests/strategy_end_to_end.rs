use paging_core::strategy::Comparison;
use paging_core::traffic::profile;
use paging_core::*;

fn trained(kind: TrafficLabel) -> (TrafficSeries, Model) {
    let series = generate(&TrafficSpec::default_for(kind)).unwrap();
    let (train_part, _) = series.split(0.8, rbf::DEFAULT_WINDOW).unwrap();
    let (model, _) = train(train_part.samples(), &TrainOptions::default()).unwrap();
    (series, model)
}

fn average(c: &paging_core::strategy::StrategySummary) -> f64 {
    c.mean_system_time.to_real()
}

fn check(kind: TrafficLabel) -> (Comparison, Comparison) {
    let cfg = StrategyConfig::default();
    let (series, model) = trained(kind);
    let oracle = compare_strategies(&series, &PerfectForesight { lookback: model.window() }, &cfg).unwrap();
    let predicted = compare_strategies(&series, &model, &cfg).unwrap();
    let composite = average(&oracle.intelligent);
    assert!(composite <= average(&oracle.sequential).min(average(&oracle.concurrent)) + 1e-9, "{kind}");
    assert!(oracle.intelligent_wins());
    let gap = (average(&predicted.intelligent) - composite).abs() / composite;
    assert!(gap <= 0.02, "{kind}: trained model {gap} off the oracle composite");
    (oracle, predicted)
}

#[test]
fn t1_composite() {
    let (oracle, predicted) = check(TrafficLabel::T1);
    // default T1 peaks above the sequential saturation rate
    assert!(oracle.sequential.divergent_steps > 0);
    assert_eq!(oracle.intelligent.divergent_steps, 0);
    let spec = TrafficSpec::default_for(TrafficLabel::T1);
    let days = spec.length as f64 / spec.period_samples as f64;
    assert!(predicted.switches as f64 >= 2.0 * days.floor(), "{} switches", predicted.switches);
}

#[test]
fn t2_composite() {
    check(TrafficLabel::T2);
}

#[test]
fn t3_composite() {
    check(TrafficLabel::T3);
}

#[test]
fn clean_t1_crosses_threshold_twice_per_day() {
    let spec = TrafficSpec::default_for(TrafficLabel::T1);
    let cfg = StrategyConfig::default();
    let level = (cfg.threshold() - spec.baseline) / spec.amplitude;
    let samples: Vec<f64> =
        (0..spec.period_samples).map(|t| profile(TrafficLabel::T1, t as f64 / spec.period_samples as f64)).collect();
    let crossings = samples.windows(2).filter(|w| (w[0] <= level) != (w[1] <= level)).count();
    assert_eq!(crossings, 2);
}

#[test]
fn rbf_forecaster_uses_only_history() {
    let (series, model) = trained(TrafficLabel::T2);
    let mut poisoned = series.samples().to_vec();
    let t = 500;
    let honest = model.forecast(&poisoned, t).unwrap();
    for x in &mut poisoned[t..] {
        *x = 1e6;
    }
    assert_eq!(model.forecast(&poisoned, t).unwrap(), honest);
}
