use paging_core::des::{little_check, replicate, SimConfig};
use paging_core::{erlang_c, mean_system_time, SchemeConfig};

const GRID: [(u32, f64, f64); 7] =
    [(7, 1.0, 2.0), (7, 1.0, 4.0), (7, 1.0, 6.0), (14, 1.5, 2.0), (14, 1.5, 4.0), (14, 1.5, 6.0), (1, 1.0, 0.5)];

#[test]
fn erlang_c_inside_ci_for_most_seeds() {
    let seeds: Vec<u64> = (100..120).collect();
    for (c, s, lambda) in GRID {
        let horizon = SimConfig::horizon_for_arrivals(100_000, lambda);
        let runs = replicate(&SimConfig::homogeneous(c, s, lambda, horizon, 0), &seeds).unwrap();
        let pw = erlang_c(c, lambda * s);
        let t = mean_system_time(&SchemeConfig::new("x", c, s).unwrap(), lambda)
            .unwrap()
            .mean_system_time
            .finite()
            .unwrap();
        let covered_pw = runs.iter().filter(|r| r.wait_probability.contains(pw)).count();
        let covered_t = runs.iter().filter(|r| r.mean_system_time.contains(t)).count();
        let little = runs.iter().filter(|r| little_check(r, lambda)).count();
        assert!(covered_pw >= 18, "c={c} λ={lambda}: P_wait covered {covered_pw}/20");
        assert!(covered_t >= 18, "c={c} λ={lambda}: T covered {covered_t}/20");
        assert!(little >= 19, "c={c} λ={lambda}: Little's law held {little}/20");
    }
}
