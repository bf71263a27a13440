use std::fmt::Write as _;
use std::time::Duration;

use qcache::exec::{Accounting, StageTimings};

/// What every workload command prints at the end of a run.
pub struct RunReport {
    pub workload: String,
    pub config: String,
    pub backend: String,
    pub accounting: Accounting,
    pub timings: StageTimings,
    pub wall: Duration,
}

impl RunReport {
    /// Per-stage totals and per-request means.
    pub fn timing_table(&self) -> String {
        let n = self.accounting.requests.max(1) as f64;
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>12} {:>14}", "stage", "total (s)", "mean (s)");
        for (name, d) in StageTimings::NAMES.iter().zip(self.timings.as_array()) {
            let _ = writeln!(
                s,
                "{:<10} {:>12.6} {:>14.9}",
                name,
                d.as_secs_f64(),
                d.as_secs_f64() / n
            );
        }
        let o = self.timings.overhead();
        let _ = writeln!(
            s,
            "{:<10} {:>12.6} {:>14.9}",
            "overhead",
            o.as_secs_f64(),
            o.as_secs_f64() / n
        );
        s
    }

    pub fn timing_csv(&self) -> String {
        let n = self.accounting.requests.max(1) as f64;
        let mut s = String::from("stage,total_s,mean_s\n");
        for (name, d) in StageTimings::NAMES.iter().zip(self.timings.as_array()) {
            let _ = writeln!(
                s,
                "{},{:.9},{:.12}",
                name,
                d.as_secs_f64(),
                d.as_secs_f64() / n
            );
        }
        s
    }

    pub fn render(&self) -> String {
        let a = &self.accounting;
        let mut s = String::new();
        let _ = writeln!(s, "== {} ({})", self.workload, self.backend);
        for line in self.config.lines() {
            let _ = writeln!(s, "   {line}");
        }
        let _ = writeln!(
            s,
            "requests {}  hits {}  misses {}  simulations {}  unique {}  extra {}  store errors {}",
            a.requests, a.hits, a.misses, a.simulations, a.inserted, a.extra, a.store_errors
        );
        let _ = writeln!(
            s,
            "hit rate {:.2}%  wall time {:.3} s",
            100.0 * a.hit_rate(),
            self.wall.as_secs_f64()
        );
        s.push_str(&self.timing_table());
        if let Some(r) = self.timings.overhead_ratio(a) {
            let _ = writeln!(
                s,
                "overhead ratio {r:.4} (mean per request / mean per simulation)"
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_every_stage() {
        let r = RunReport {
            workload: "w".into(),
            config: "a = 1".into(),
            backend: "none".into(),
            accounting: Accounting {
                requests: 4,
                simulations: 2,
                ..Accounting::default()
            },
            timings: StageTimings {
                simulate: Duration::from_secs(2),
                hash: Duration::from_millis(40),
                ..StageTimings::default()
            },
            wall: Duration::from_secs(3),
        };
        let t = r.render();
        for name in StageTimings::NAMES {
            assert!(t.contains(name));
        }
        assert!(t.contains("overhead ratio 0.0100"));
        assert!(r
            .timing_csv()
            .contains("simulate,2.000000000,0.500000000000"));
    }
}
