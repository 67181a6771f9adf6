//! Growth of distinct simulations against environment steps.

use super::config::AgentKind;
use super::run::{parse_metrics_csv, EpisodeRow, RunSummary};
use super::HarnessError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct RunTrace {
    pub agent: AgentKind,
    pub name: String,
    pub rows: Vec<EpisodeRow>,
}

impl RunTrace {
    /// Reads `run.json` and `metrics.csv` from a run directory.
    pub fn load(dir: &Path) -> Result<RunTrace, HarnessError> {
        let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(dir.join("run.json"))?)
            .map_err(|e| HarnessError::Parse(format!("{}: {e}", dir.display())))?;
        let rows = parse_metrics_csv(&std::fs::read_to_string(dir.join("metrics.csv"))?)?;
        Ok(RunTrace {
            agent: summary.agent,
            name: dir.display().to_string(),
            rows,
        })
    }
}

/// Cumulative simulations after `step` environment steps.
pub fn simulations_at(rows: &[EpisodeRow], step: u64) -> u64 {
    rows.iter()
        .take_while(|r| r.env_step <= step)
        .last()
        .map_or(0, |r| r.simulations)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSlope {
    pub agent: AgentKind,
    pub runs: usize,
    /// Per run: final simulations over final environment steps.
    pub slopes: Vec<f64>,
    pub median_slope: f64,
    /// Per run: simulations per step up to the shortest run's step count.
    pub matched_slopes: Vec<f64>,
    pub median_matched_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub matched_step: u64,
    pub slopes: Vec<AgentSlope>,
    pub series_csv: String,
    pub slopes_csv: String,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn report_sim_growth(traces: &[RunTrace]) -> Result<GrowthReport, HarnessError> {
    if traces.is_empty() || traces.iter().any(|t| t.rows.is_empty()) {
        return Err(HarnessError::EmptyTrace);
    }
    let matched_step = traces
        .iter()
        .map(|t| t.rows.last().unwrap().env_step)
        .min()
        .unwrap();
    let mut series_csv = String::from("agent,run,env_step,cumulative_simulations\n");
    let mut by_agent: BTreeMap<&str, (AgentKind, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for t in traces {
        for r in &t.rows {
            let _ = writeln!(series_csv, "{},{},{},{}", t.agent.as_str(), t.name, r.env_step, r.simulations);
        }
        let last = t.rows.last().unwrap();
        let slope = last.simulations as f64 / last.env_step.max(1) as f64;
        let matched = simulations_at(&t.rows, matched_step) as f64 / matched_step.max(1) as f64;
        let e = by_agent
            .entry(t.agent.as_str())
            .or_insert((t.agent, Vec::new(), Vec::new()));
        e.1.push(slope);
        e.2.push(matched);
    }
    let mut slopes_csv = String::from("agent,runs,median_slope,median_matched_slope,matched_step\n");
    let slopes: Vec<AgentSlope> = by_agent
        .into_values()
        .map(|(agent, slopes, matched_slopes)| AgentSlope {
            agent,
            runs: slopes.len(),
            median_slope: median(&slopes),
            median_matched_slope: median(&matched_slopes),
            slopes,
            matched_slopes,
        })
        .collect();
    for s in &slopes {
        let _ = writeln!(
            slopes_csv,
            "{},{},{},{},{}",
            s.agent.as_str(),
            s.runs,
            s.median_slope,
            s.median_matched_slope,
            matched_step
        );
    }
    Ok(GrowthReport {
        matched_step,
        slopes,
        series_csv,
        slopes_csv,
    })
}

/// Writes the series to `out` and the slope summary next to it.
pub fn write_report(report: &GrowthReport, out: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::write(out, &report.series_csv)?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    let slopes_path = out.with_file_name(format!("{stem}_slopes.csv"));
    std::fs::write(&slopes_path, &report.slopes_csv)?;
    Ok(slopes_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(points: &[(u64, u64)]) -> Vec<EpisodeRow> {
        points
            .iter()
            .map(|&(s, n)| EpisodeRow {
                env_step: s,
                simulations: n,
                episode_reward: 0.0,
                best_reward_so_far: 0.0,
            })
            .collect()
    }

    #[test]
    fn slopes_and_matching() {
        let traces = vec![
            RunTrace {
                agent: AgentKind::Random,
                name: "a".into(),
                rows: rows(&[(5, 1), (10, 2), (20, 4)]),
            },
            RunTrace {
                agent: AgentKind::Ga,
                name: "b".into(),
                rows: rows(&[(5, 1), (10, 1)]),
            },
        ];
        let r = report_sim_growth(&traces).unwrap();
        assert_eq!(r.matched_step, 10);
        let ga = r.slopes.iter().find(|s| s.agent == AgentKind::Ga).unwrap();
        let rnd = r.slopes.iter().find(|s| s.agent == AgentKind::Random).unwrap();
        assert_eq!(ga.median_slope, 0.1);
        assert_eq!(rnd.median_slope, 0.2);
        assert_eq!(rnd.median_matched_slope, 0.2);
        assert!(r.series_csv.starts_with("agent,run,env_step,cumulative_simulations\n"));
        assert_eq!(r.series_csv.lines().count(), 6);
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(matches!(report_sim_growth(&[]), Err(HarnessError::EmptyTrace)));
        let t = RunTrace {
            agent: AgentKind::Random,
            name: "x".into(),
            rows: vec![],
        };
        assert!(matches!(report_sim_growth(&[t]), Err(HarnessError::EmptyTrace)));
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
