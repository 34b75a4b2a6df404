//! Data-substitution attacks on a test battery's cycle stream.
//!
//! Case 1 swaps whole records (inputs and label) for the attacker's source
//! battery; Case 2 swaps only the SOC label. Substitution is keyed by
//! cycle number over an inclusive window.

use std::fmt;
use std::str::FromStr;

use crate::dataset::{Dataset, Role};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackMode {
    Case1FullSubstitution,
    Case2LabelSubstitution,
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackMode::Case1FullSubstitution => "case1",
            AttackMode::Case2LabelSubstitution => "case2",
        })
    }
}

/// Inclusive, nonempty range of cycle numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CycleWindow {
    first: u32,
    last: u32,
}

impl CycleWindow {
    pub fn new(first: u32, last: u32) -> Result<Self> {
        if first > last {
            return Err(Error::EmptyWindow);
        }
        Ok(Self { first, last })
    }

    pub fn first(&self) -> u32 {
        self.first
    }

    pub fn last(&self) -> u32 {
        self.last
    }

    pub fn contains(&self, cycle: u32) -> bool {
        (self.first..=self.last).contains(&cycle)
    }
}

impl Default for CycleWindow {
    /// The first 35 operating cycles.
    fn default() -> Self {
        Self { first: 1, last: 35 }
    }
}

impl fmt::Display for CycleWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl FromStr for CycleWindow {
    type Err = Error;

    /// Parses `A..B`, both ends inclusive.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("window {s:?} must look like A..B"));
        let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
        let first = a.trim().parse().map_err(|_| bad())?;
        let last = b.trim().parse().map_err(|_| bad())?;
        Self::new(first, last)
    }
}

/// Report-only record of what [`inject`] did to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TamperAnnotation {
    pub mode: AttackMode,
    pub window: CycleWindow,
}

#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub mode: AttackMode,
    pub window: CycleWindow,
    pub source: Dataset,
}

impl AttackSpec {
    pub fn new(mode: AttackMode, window: CycleWindow, source: Dataset) -> Result<Self> {
        if source.role() != Role::AttackSource {
            return Err(Error::Config(
                "attack source must have the AttackSource role".into(),
            ));
        }
        Ok(Self {
            mode,
            window,
            source,
        })
    }
}

/// Substitute source data into every victim cycle inside the window.
///
/// Only cycles the victim actually has are substituted, and the source must
/// carry each of them.
pub fn inject(victim: &Dataset, spec: &AttackSpec) -> Result<Dataset> {
    if victim.role() != Role::Testing {
        return Err(Error::Config(
            "only Testing datasets can be tampered".into(),
        ));
    }
    let records = victim
        .records()
        .iter()
        .map(|r| {
            if !spec.window.contains(r.cycle_number) {
                return Ok(r.clone());
            }
            let src = spec.source.record(r.cycle_number).ok_or(Error::Coverage {
                cycle: r.cycle_number,
            })?;
            Ok(match spec.mode {
                AttackMode::Case1FullSubstitution => src.clone(),
                AttackMode::Case2LabelSubstitution => {
                    let mut out = r.clone();
                    out.soc_percent = src.soc_percent;
                    out
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let annotation = TamperAnnotation {
        mode: spec.mode,
        window: spec.window,
    };
    Ok(victim.with_records(records, Some(annotation)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_record;

    fn victim() -> Dataset {
        Dataset::new(
            "P009",
            Role::Testing,
            vec![
                parse_record("1,12.03,0.8,11.09,21.76,9.33,16,2,15,95.59").unwrap(),
                parse_record("2,12.08,0.8,11.09,22.74,9.31,17,2,15,95.24").unwrap(),
                parse_record("3,11.99,0.8,11.09,20.13,9.31,20,2,15,93.08").unwrap(),
            ],
        )
        .unwrap()
    }

    fn source() -> Dataset {
        Dataset::new(
            "P016",
            Role::AttackSource,
            vec![
                parse_record("1,11.99,0.4,10.19,22.01,9.28,28,9,15,100.00").unwrap(),
                parse_record("2,12.01,0.4,10.5,23.01,8.54,30,9,15,100.00").unwrap(),
            ],
        )
        .unwrap()
    }

    fn spec(mode: AttackMode, first: u32, last: u32) -> AttackSpec {
        AttackSpec::new(mode, CycleWindow::new(first, last).unwrap(), source()).unwrap()
    }

    #[test]
    fn window_parsing() {
        assert_eq!(
            "1..35".parse::<CycleWindow>().unwrap(),
            CycleWindow::default()
        );
        assert!(matches!(
            "5..3".parse::<CycleWindow>(),
            Err(Error::EmptyWindow)
        ));
        assert_eq!(Error::EmptyWindow.to_string(), "empty window");
        assert!(matches!(
            "5-3".parse::<CycleWindow>(),
            Err(Error::Config(_))
        ));
        assert!(CycleWindow::new(4, 4).unwrap().contains(4));
    }

    #[test]
    fn case1_replaces_whole_record() {
        let out = inject(&victim(), &spec(AttackMode::Case1FullSubstitution, 1, 1)).unwrap();
        assert_eq!(&out.records()[0], source().record(1).unwrap());
        assert_eq!(out.records()[1..], victim().records()[1..]);
        assert_eq!(
            out.tamper_annotation().unwrap().mode,
            AttackMode::Case1FullSubstitution
        );
    }

    #[test]
    fn case2_replaces_label_only() {
        let out = inject(&victim(), &spec(AttackMode::Case2LabelSubstitution, 1, 1)).unwrap();
        let r = &out.records()[0];
        assert_eq!(r.features(), victim().records()[0].features());
        assert_eq!(r.soc_percent, Some(100.0));
    }

    #[test]
    fn disjoint_window_leaves_victim_unchanged() {
        let out = inject(&victim(), &spec(AttackMode::Case1FullSubstitution, 10, 35)).unwrap();
        assert_eq!(out.records(), victim().records());
    }

    #[test]
    fn missing_source_cycle_is_a_coverage_error() {
        assert!(matches!(
            inject(&victim(), &spec(AttackMode::Case2LabelSubstitution, 1, 35)),
            Err(Error::Coverage { cycle: 3 })
        ));
    }

    #[test]
    fn roles_are_enforced() {
        assert!(AttackSpec::new(
            AttackMode::Case1FullSubstitution,
            CycleWindow::default(),
            victim()
        )
        .is_err());
        let s = spec(AttackMode::Case1FullSubstitution, 1, 1);
        assert!(inject(&source(), &s).is_err());
    }

    #[test]
    fn injection_is_idempotent() {
        for mode in [
            AttackMode::Case1FullSubstitution,
            AttackMode::Case2LabelSubstitution,
        ] {
            let s = spec(mode, 1, 2);
            let once = inject(&victim(), &s).unwrap();
            assert_eq!(inject(&once, &s).unwrap(), once);
        }
    }
}
