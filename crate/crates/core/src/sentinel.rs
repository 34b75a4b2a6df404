//! Scenario evaluation and the tamper alarm.
//!
//! The alarm fires when MAPE between the on-board SOC labels and the
//! network's predictions strictly exceeds a threshold. MAPD between two
//! scenarios' predictions is attached as supporting evidence.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::metrics::{mapd, mape};
use crate::network::Network;
use crate::trainer::predict_records;

/// Sits between the worst normal-operation MAPE (4%) and the mildest
/// attacked MAPE (6%) reported for the reference experiment.
pub const DEFAULT_THRESHOLD_PERCENT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Normal,
    Case1,
    Case2,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Normal => "normal",
            Scenario::Case1 => "case1",
            Scenario::Case2 => "case2",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Scenario::Normal),
            "case1" => Ok(Scenario::Case1),
            "case2" => Ok(Scenario::Case2),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub window_cycles: usize,
    pub cycles: Vec<u32>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub mape_percent: f64,
    pub mapd_vs_normal_percent: Option<f64>,
    pub alarm: bool,
    pub threshold_percent: f64,
}

impl ScenarioReport {
    /// Re-evaluate the alarm against another threshold.
    pub fn with_threshold(&self, threshold_percent: f64) -> Self {
        Self {
            alarm: self.mape_percent > threshold_percent,
            threshold_percent,
            ..self.clone()
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn plot_csv(&self) -> String {
        let mut out = String::from("cycle,actual_soc,predicted_soc\n");
        for ((c, a), p) in self.cycles.iter().zip(&self.actual).zip(&self.predicted) {
            let _ = writeln!(out, "{c},{a},{p}");
        }
        out
    }
}

/// Predict the first `window` cycles of `data` and score them.
///
/// `scenario` only labels the report; the verdict depends on the data alone.
pub fn evaluate_scenario(
    net: &Network,
    normalizer: &Normalizer,
    data: &Dataset,
    scenario: Scenario,
    window: usize,
    threshold_percent: f64,
) -> Result<ScenarioReport> {
    if window == 0 {
        return Err(Error::EmptyWindow);
    }
    if !threshold_percent.is_finite() {
        return Err(Error::Config("threshold must be finite".into()));
    }
    let labeled = data
        .records()
        .iter()
        .take_while(|r| r.soc_percent.is_some())
        .count();
    if window > labeled {
        return Err(Error::Window {
            requested: window,
            available: labeled,
        });
    }
    let records = &data.records()[..window];
    let predictions = predict_records(net, records, normalizer)?;
    let actual: Vec<f64> = records.iter().filter_map(|r| r.soc_percent).collect();
    let predicted: Vec<f64> = predictions.iter().map(|p| p.1).collect();
    let mape_percent = mape(&actual, &predicted)?;
    Ok(ScenarioReport {
        scenario,
        window_cycles: window,
        cycles: predictions.iter().map(|p| p.0).collect(),
        actual,
        predicted,
        mape_percent,
        mapd_vs_normal_percent: None,
        alarm: mape_percent > threshold_percent,
        threshold_percent,
    })
}

/// Attach MAPD between the two reports' predicted series.
pub fn compare_scenarios(
    normal: &ScenarioReport,
    attacked: &ScenarioReport,
) -> Result<ScenarioReport> {
    if normal.window_cycles != attacked.window_cycles {
        return Err(Error::Shape {
            expected: normal.window_cycles,
            found: attacked.window_cycles,
        });
    }
    if normal.cycles != attacked.cycles {
        return Err(Error::Config(
            "scenario reports cover different cycles".into(),
        ));
    }
    let difference = mapd(&normal.predicted, &attacked.predicted)?;
    Ok(ScenarioReport {
        mapd_vs_normal_percent: Some(difference),
        ..attacked.clone()
    })
}

pub fn summary_csv(reports: &[ScenarioReport]) -> String {
    let mut out = String::from(
        "scenario,window,mape_percent,mapd_vs_normal_percent,alarm,threshold_percent\n",
    );
    for r in reports {
        let mapd = r
            .mapd_vs_normal_percent
            .map(|v| v.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario, r.window_cycles, r.mape_percent, mapd, r.alarm, r.threshold_percent
        );
    }
    out
}

/// Write `summary.csv` and one `plot_<scenario>_<window>.csv` per report
/// into `out_dir`. Returns the written paths, summary first.
pub fn render_report(
    reports: &[ScenarioReport],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::Config("no scenario reports to render".into()));
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(reports.len() + 1);
    let summary = dir.join("summary.csv");
    fs::write(&summary, summary_csv(reports)).map_err(|e| Error::io(&summary, e))?;
    written.push(summary);
    for r in reports {
        let path = dir.join(format!("plot_{}_{}.csv", r.scenario, r.window_cycles));
        fs::write(&path, r.plot_csv()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(scenario: Scenario, predicted: Vec<f64>, mape_percent: f64) -> ScenarioReport {
        let n = predicted.len();
        ScenarioReport {
            scenario,
            window_cycles: n,
            cycles: (1..=n as u32).collect(),
            actual: vec![95.0; n],
            predicted,
            mape_percent,
            mapd_vs_normal_percent: None,
            alarm: mape_percent > DEFAULT_THRESHOLD_PERCENT,
            threshold_percent: DEFAULT_THRESHOLD_PERCENT,
        }
    }

    #[test]
    fn alarm_threshold_is_strict() {
        let r = report(Scenario::Normal, vec![90.0], 4.0);
        assert!(!r.with_threshold(5.0).alarm);
        assert!(r.with_threshold(3.9).alarm);
        assert!(!r.with_threshold(4.0).alarm);
        assert!(
            report(Scenario::Case1, vec![90.0], 16.0)
                .with_threshold(5.0)
                .alarm
        );
        assert!(
            report(Scenario::Case2, vec![90.0], 6.0)
                .with_threshold(5.0)
                .alarm
        );
    }

    #[test]
    fn self_comparison_is_zero() {
        let r = report(Scenario::Normal, vec![90.0, 80.0], 1.0);
        assert_eq!(
            compare_scenarios(&r, &r).unwrap().mapd_vs_normal_percent,
            Some(0.0)
        );
    }

    #[test]
    fn comparison_uses_predictions() {
        let normal = report(Scenario::Normal, vec![90.0, 80.0], 1.0);
        let hacked = report(Scenario::Case1, vec![100.0, 80.0], 9.0);
        let out = compare_scenarios(&normal, &hacked).unwrap();
        assert!((out.mapd_vs_normal_percent.unwrap() - 500.0 / 95.0).abs() < 1e-12);
        assert_eq!(out.mape_percent, 9.0);
    }

    #[test]
    fn comparison_needs_equal_windows() {
        let a = report(Scenario::Normal, vec![90.0, 80.0], 1.0);
        let b = report(Scenario::Case1, vec![90.0], 1.0);
        assert!(matches!(
            compare_scenarios(&a, &b),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn render_writes_summary_and_plots() {
        let dir = tempfile::tempdir().unwrap();
        let reports: Vec<_> = [Scenario::Normal, Scenario::Case1, Scenario::Case2]
            .into_iter()
            .flat_map(|s| [report(s, vec![90.0; 3], 2.0), report(s, vec![90.0; 5], 2.0)])
            .collect();
        let paths = render_report(&reports, dir.path()).unwrap();
        assert_eq!(paths.len(), 7);
        let summary = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(summary.lines().count(), 1 + 6);
        let plot = fs::read_to_string(dir.path().join("plot_case1_5.csv")).unwrap();
        assert_eq!(plot.lines().count(), 1 + 5);
        assert!(render_report(&[], dir.path()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = report(Scenario::Case2, vec![91.123_456_789_012_34, 80.0], 6.25);
        r.save(&path).unwrap();
        assert_eq!(ScenarioReport::load(&path).unwrap(), r);
    }

    #[test]
    fn scenario_names() {
        for s in [Scenario::Normal, Scenario::Case1, Scenario::Case2] {
            assert_eq!(s.to_string().parse::<Scenario>().unwrap(), s);
        }
        assert!("case3".parse::<Scenario>().is_err());
    }
}
