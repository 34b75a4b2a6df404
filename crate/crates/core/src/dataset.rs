//! Battery cycle logs: record schema, CSV parsing, and min-max scaling.
//!
//! One row per charge/discharge cycle. The nine input columns are, in order:
//! cycle number, average voltage, discharge current, end-of-discharge
//! voltage, average temperature, elapsed time (printed as `H.MM`), start
//! day, start month and two-digit start year. An optional tenth column
//! holds the SOC label in percent.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tamper::TamperAnnotation;

pub const NUM_FEATURES: usize = 9;

/// Canonical CSV header names; the first nine are the network inputs.
pub const COLUMN_NAMES: [&str; NUM_FEATURES + 1] = [
    "cycle_number",
    "avg_voltage",
    "discharge_current",
    "end_voltage",
    "avg_temp",
    "elapsed_time_hm",
    "start_day",
    "start_month",
    "start_year",
    "soc_percent",
];

/// Index of the SOC column inside a [`Normalizer`].
pub const SOC_INDEX: usize = NUM_FEATURES;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle_number: u32,
    pub avg_voltage: f64,
    pub discharge_current: f64,
    pub end_voltage: f64,
    pub avg_temp: f64,
    /// Decimal hours.
    pub elapsed_time: f64,
    pub start_day: u32,
    pub start_month: u32,
    pub start_year: u32,
    pub soc_percent: Option<f64>,
}

impl CycleRecord {
    /// Input features in column order.
    pub fn features(&self) -> [f64; NUM_FEATURES] {
        [
            f64::from(self.cycle_number),
            self.avg_voltage,
            self.discharge_current,
            self.end_voltage,
            self.avg_temp,
            self.elapsed_time,
            f64::from(self.start_day),
            f64::from(self.start_month),
            f64::from(self.start_year),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Validation {
                    field,
                    line: None,
                    reason: reason.to_string(),
                })
            }
        }
        check(self.cycle_number >= 1, "cycle_number", "must be at least 1")?;
        check(
            self.avg_voltage.is_finite() && self.avg_voltage > 0.0,
            "avg_voltage",
            "must be positive",
        )?;
        check(
            self.discharge_current.is_finite() && self.discharge_current > 0.0,
            "discharge_current",
            "must be positive",
        )?;
        check(
            self.end_voltage.is_finite() && self.end_voltage > 0.0,
            "end_voltage",
            "must be positive",
        )?;
        check(self.avg_temp.is_finite(), "avg_temp", "must be finite")?;
        check(
            self.elapsed_time.is_finite() && self.elapsed_time > 0.0,
            "elapsed_time_hm",
            "must be positive",
        )?;
        check(
            (1..=31).contains(&self.start_day),
            "start_day",
            "must be in 1..=31",
        )?;
        check(
            (1..=12).contains(&self.start_month),
            "start_month",
            "must be in 1..=12",
        )?;
        if let Some(soc) = self.soc_percent {
            check(
                soc.is_finite() && soc > 0.0 && soc <= 100.0,
                "soc_percent",
                "must be in (0, 100]",
            )?;
        }
        Ok(())
    }
}

/// Decode the log's `H.MM` elapsed-time notation into decimal hours.
///
/// The fractional field counts minutes. A single printed digit is
/// right-padded, so `"10.3"` is 10 h 30 min.
pub fn parse_hm(raw: &str) -> Result<f64> {
    let malformed = |reason| Error::MalformedTime {
        raw: raw.to_string(),
        reason,
    };
    let text = raw.trim();
    let (hours_text, minutes_text) = match text.split_once('.') {
        Some((h, m)) => (h, m),
        None => (text, ""),
    };
    if hours_text.is_empty() || !hours_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed("hours field must be a non-negative integer"));
    }
    if minutes_text.len() > 2 || !minutes_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed("minutes field must have at most two digits"));
    }
    let hours: u32 = hours_text
        .parse()
        .map_err(|_| malformed("hours field out of range"))?;
    let minutes: u32 = match minutes_text.len() {
        0 => 0,
        1 => minutes_text.parse::<u32>().unwrap() * 10,
        _ => minutes_text.parse().unwrap(),
    };
    if minutes >= 60 {
        return Err(malformed("minutes field must be below 60"));
    }
    Ok(f64::from(hours) + f64::from(minutes) / 60.0)
}

/// Inverse of [`parse_hm`] for values it produced.
pub fn format_hm(hours: f64) -> String {
    let total_minutes = (hours * 60.0).round() as u64;
    format!("{}.{:02}", total_minutes / 60, total_minutes % 60)
}

fn parse_real(field: &'static str, text: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|_| Error::Validation {
        field,
        line: None,
        reason: format!("{text:?} is not a number"),
    })
}

fn parse_int(field: &'static str, text: &str) -> Result<u32> {
    text.parse::<u32>().map_err(|_| Error::Validation {
        field,
        line: None,
        reason: format!("{text:?} is not a non-negative integer"),
    })
}

/// Parse one comma-separated row: nine features, optionally followed by the
/// SOC label. An empty tenth field is read as an unlabeled row.
pub fn parse_record(row: &str) -> Result<CycleRecord> {
    let fields: Vec<&str> = row.split(',').map(str::trim).collect();
    if fields.len() != NUM_FEATURES && fields.len() != NUM_FEATURES + 1 {
        return Err(Error::Schema {
            line: None,
            reason: format!(
                "expected {} or {} fields, found {}",
                NUM_FEATURES,
                NUM_FEATURES + 1,
                fields.len()
            ),
        });
    }
    let elapsed_time = parse_hm(fields[5]).map_err(|e| Error::Validation {
        field: "elapsed_time_hm",
        line: None,
        reason: e.to_string(),
    })?;
    let soc_percent = match fields.get(NUM_FEATURES) {
        Some(text) if !text.is_empty() => Some(parse_real("soc_percent", text)?),
        _ => None,
    };
    let record = CycleRecord {
        cycle_number: parse_int("cycle_number", fields[0])?,
        avg_voltage: parse_real("avg_voltage", fields[1])?,
        discharge_current: parse_real("discharge_current", fields[2])?,
        end_voltage: parse_real("end_voltage", fields[3])?,
        avg_temp: parse_real("avg_temp", fields[4])?,
        elapsed_time,
        start_day: parse_int("start_day", fields[6])?,
        start_month: parse_int("start_month", fields[7])?,
        start_year: parse_int("start_year", fields[8])?,
        soc_percent,
    };
    record.validate()?;
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Training,
    Testing,
    AttackSource,
}

/// Ordered cycle records for one battery.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    battery_id: String,
    role: Role,
    records: Vec<CycleRecord>,
    tamper: Option<TamperAnnotation>,
}

impl Dataset {
    /// Validates every record, sorts by cycle number and rejects duplicates.
    pub fn new(
        battery_id: impl Into<String>,
        role: Role,
        mut records: Vec<CycleRecord>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for record in &records {
            record.validate()?;
        }
        records.sort_by_key(|r| r.cycle_number);
        if let Some(pair) = records
            .windows(2)
            .find(|w| w[0].cycle_number == w[1].cycle_number)
        {
            return Err(Error::Validation {
                field: "cycle_number",
                line: None,
                reason: format!("duplicate cycle {}", pair[0].cycle_number),
            });
        }
        Ok(Self {
            battery_id: battery_id.into(),
            role,
            records,
            tamper: None,
        })
    }

    pub fn load(path: impl AsRef<Path>, battery_id: &str, role: Role) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, battery_id, role)
    }

    pub fn from_csv(text: &str, battery_id: &str, role: Role) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        let labeled = columns.len() == COLUMN_NAMES.len();
        if !(labeled || columns.len() == NUM_FEATURES)
            || columns.iter().zip(COLUMN_NAMES).any(|(a, b)| *a != b)
        {
            return Err(Error::Schema {
                line: Some(1),
                reason: format!("header must be {}", COLUMN_NAMES.join(",")),
            });
        }
        let mut records = Vec::new();
        for (line_no, line) in lines {
            let count = line.split(',').count();
            if count != columns.len() {
                return Err(Error::Schema {
                    line: Some(line_no),
                    reason: format!("expected {} fields, found {count}", columns.len()),
                });
            }
            records.push(parse_record(line).map_err(|e| e.at_line(line_no))?);
        }
        Self::new(battery_id, role, records)
    }

    /// CSV text in the same layout [`Dataset::from_csv`] reads. The label
    /// column is omitted only when no record carries a label.
    pub fn to_csv(&self) -> String {
        let labeled = self.records.iter().any(|r| r.soc_percent.is_some());
        let columns = if labeled {
            &COLUMN_NAMES[..]
        } else {
            &COLUMN_NAMES[..NUM_FEATURES]
        };
        let mut out = columns.join(",");
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.cycle_number,
                r.avg_voltage,
                r.discharge_current,
                r.end_voltage,
                r.avg_temp,
                format_hm(r.elapsed_time),
                r.start_day,
                r.start_month,
                r.start_year
            );
            if labeled {
                out.push(',');
                if let Some(soc) = r.soc_percent {
                    let _ = write!(out, "{soc}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn battery_id(&self) -> &str {
        &self.battery_id
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn records(&self) -> &[CycleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, cycle: u32) -> Option<&CycleRecord> {
        self.records
            .binary_search_by_key(&cycle, |r| r.cycle_number)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Report-only label attached by the tamper module.
    pub fn tamper_annotation(&self) -> Option<&TamperAnnotation> {
        self.tamper.as_ref()
    }

    pub(crate) fn with_records(
        &self,
        records: Vec<CycleRecord>,
        tamper: Option<TamperAnnotation>,
    ) -> Self {
        Self {
            battery_id: self.battery_id.clone(),
            role: self.role,
            records,
            tamper,
        }
    }
}

/// What [`Normalizer::fit_with`] does with a column that never varies in the
/// training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Reject the fit with [`Error::DegenerateFeature`].
    #[default]
    Reject,
    /// Anchor the constant value at 0 with a span of `max(|value|, 1)`.
    UnitSpan,
}

/// Per-column min-max scaling fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    mins: [f64; NUM_FEATURES + 1],
    maxs: [f64; NUM_FEATURES + 1],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRecord {
    pub features: [f64; NUM_FEATURES],
    pub target: Option<f64>,
}

impl Normalizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        Self::fit_with(train, DegeneratePolicy::Reject)
    }

    pub fn fit_with(train: &Dataset, policy: DegeneratePolicy) -> Result<Self> {
        let mut mins = [f64::INFINITY; NUM_FEATURES + 1];
        let mut maxs = [f64::NEG_INFINITY; NUM_FEATURES + 1];
        for record in train.records() {
            let soc = record.soc_percent.ok_or(Error::Unlabeled {
                cycle: record.cycle_number,
            })?;
            let features = record.features();
            let row = features.iter().copied().chain(std::iter::once(soc));
            for (i, value) in row.enumerate() {
                mins[i] = mins[i].min(value);
                maxs[i] = maxs[i].max(value);
            }
        }
        for i in 0..=NUM_FEATURES {
            if maxs[i] > mins[i] {
                continue;
            }
            match policy {
                DegeneratePolicy::Reject => return Err(Error::DegenerateFeature(COLUMN_NAMES[i])),
                DegeneratePolicy::UnitSpan => maxs[i] = mins[i] + mins[i].abs().max(1.0),
            }
        }
        Ok(Self { mins, maxs })
    }

    /// Build from explicit bounds; `max > min` must hold for every column.
    pub fn from_bounds(
        mins: [f64; NUM_FEATURES + 1],
        maxs: [f64; NUM_FEATURES + 1],
    ) -> Result<Self> {
        for i in 0..=NUM_FEATURES {
            if !(mins[i].is_finite() && maxs[i].is_finite() && maxs[i] > mins[i]) {
                return Err(Error::DegenerateFeature(COLUMN_NAMES[i]));
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn bounds(&self, column: usize) -> (f64, f64) {
        (self.mins[column], self.maxs[column])
    }

    /// Scale one column. Values outside the fitted range are not clamped.
    pub fn scale(&self, column: usize, value: f64) -> f64 {
        (value - self.mins[column]) / (self.maxs[column] - self.mins[column])
    }

    pub fn unscale(&self, column: usize, scaled: f64) -> f64 {
        scaled * (self.maxs[column] - self.mins[column]) + self.mins[column]
    }

    pub fn normalize(&self, record: &CycleRecord) -> NormalizedRecord {
        let raw = record.features();
        let mut features = [0.0; NUM_FEATURES];
        for (i, value) in raw.iter().enumerate() {
            features[i] = self.scale(i, *value);
        }
        NormalizedRecord {
            features,
            target: record.soc_percent.map(|soc| self.scale(SOC_INDEX, soc)),
        }
    }

    pub fn denormalize_soc(&self, scaled: f64) -> f64 {
        self.unscale(SOC_INDEX, scaled)
    }
}
