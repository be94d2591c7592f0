//! gnuplot scripts for the CSV outputs. Run them from the output directory:
//! `gnuplot curves.gp`.

const PREAMBLE: &str =
    "set datafile separator ','\nset key autotitle columnhead\nset grid\nset terminal pngcairo size 900,600\n";

/// Wait probability and mean system time against arrival rate.
pub fn curves(scheme_names: &[&str]) -> String {
    let mut out = String::from(PREAMBLE);
    for (file, ylabel, offset) in [("curves_pwait.png", "wait probability", 2), ("curves_T.png", "mean system time", 3)]
    {
        out.push_str(&format!("set output '{file}'\nset xlabel 'arrival rate'\nset ylabel '{ylabel}'\n"));
        let series: Vec<String> = (0..scheme_names.len())
            .map(|i| format!("'curves.csv' using 1:{} with linespoints", offset + 2 * i))
            .collect();
        out.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    }
    out
}

/// Actual against predicted load on the held-out part of each traffic type.
pub fn predictions(labels: &[String]) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set xlabel 'sample'\nset ylabel 'load (Erlang)'\n");
    for label in labels {
        out.push_str(&format!(
            "set output 'prediction_{label}.png'\nset title 'traffic {label}'\nplot 'prediction_{label}.csv' using 1:2 with lines, \\\n     '' using 1:3 with lines\n"
        ));
    }
    out
}

/// Wait probability and mean system time over time for the three strategies.
pub fn strategy(label: &str) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("set xlabel 'sample'\n");
    for (suffix, ylabel, columns) in [("pwait", "wait probability", [5, 7, 9]), ("T", "mean system time", [6, 8, 10])] {
        out.push_str(&format!(
            "set output 'comparison_{label}_{suffix}.png'\nset title 'traffic {label}'\nset ylabel '{ylabel}'\nplot 'comparison_{label}.csv' using 1:{} with lines, \\\n     '' using 1:{} with lines, \\\n     '' using 1:{} with lines\n",
            columns[0], columns[1], columns[2]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_script_reads_both_schemes() {
        let s = curves(&["sequential", "concurrent"]);
        assert!(s.contains("using 1:2") && s.contains("using 1:4"));
        assert!(s.contains("using 1:3") && s.contains("using 1:5"));
        assert!(s.contains("set output 'curves_T.png'"));
    }

    #[test]
    fn strategy_script_targets_comparison_columns() {
        let s = strategy("T2");
        assert!(s.contains("'comparison_T2.csv' using 1:6"));
        assert!(s.contains("using 1:10"));
    }
}
