//! PMU domain model: per-device sample series, operator event logs, and the
//! 16-bit status word carried with every synchrophasor frame.
//!
//! Signal data is exchanged as CSV with the header
//! `pmu_id,timestamp_ms,voltage,freq_dev,status`; event logs as CSV with the
//! header `interconnection,start_iso,end_iso,event_type,cause`. Parsed series
//! are materialized on a complete uniform sample grid so downstream indices
//! are time-grid indices; gaps in the input become missing-masked samples.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use thiserror::Error;

/// Errors raised while reading signal or event-log CSV streams.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed row: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: non-monotone timestamp for pmu {pmu_id}")]
    NonMonotone { line: usize, pmu_id: String },
    #[error("pmu {pmu_id}: inferred sample rate {gap_ms} ms/sample is not 30 or 60 Hz")]
    UnsupportedRate { pmu_id: String, gap_ms: i64 },
    #[error("line {line}: unparseable timestamp `{text}`")]
    BadTimestamp { line: usize, text: String },
    #[error("line {line}: event start is after event end")]
    StartAfterEnd { line: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Error raised when a requested context window does not touch the series.
#[derive(Debug, Error)]
#[error("context [{want_start_ms}, {want_end_ms}) ms does not overlap series span")]
pub struct OutOfRangeError {
    pub want_start_ms: i64,
    pub want_end_ms: i64,
}

/// The event taxonomy used throughout the pipeline. `Unknown` covers log
/// entries whose type field is empty or unrecognized; it is never a
/// classifier output class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventType {
    LineOutage,
    XfmrOutage,
    FrequencyEvent,
    OscillationEvent,
    Normal,
    Unknown,
}

impl EventType {
    /// Canonical serialized name.
    pub fn as_str(&self) -> &'static str {
        match self {
            EventType::LineOutage => "LineOutage",
            EventType::XfmrOutage => "XfmrOutage",
            EventType::FrequencyEvent => "FrequencyEvent",
            EventType::OscillationEvent => "OscillationEvent",
            EventType::Normal => "Normal",
            EventType::Unknown => "Unknown",
        }
    }

    /// Case-insensitive mapping from log text; separators (space, `-`, `_`)
    /// are ignored, unrecognized strings map to `Unknown`.
    pub fn from_log_text(text: &str) -> EventType {
        let key: String = text
            .chars()
            .filter(|c| !matches!(c, ' ' | '-' | '_'))
            .flat_map(|c| c.to_lowercase())
            .collect();
        match key.as_str() {
            "lineoutage" => EventType::LineOutage,
            "xfmroutage" | "transformeroutage" => EventType::XfmrOutage,
            "frequencyevent" => EventType::FrequencyEvent,
            "oscillationevent" | "oscillation" => EventType::OscillationEvent,
            "normal" => EventType::Normal,
            _ => EventType::Unknown,
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Decoded view of the 16-bit per-sample status word. Bits 3..0 carry the
/// trigger reason, bits 5..4 the time error; a frame is usable only when the
/// whole word is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusAssessment {
    pub usable: bool,
    pub trigger_reason: u8,
    pub time_error: u8,
    pub raw: u16,
}

/// Decode one status word. Total function: every `u16` maps to an assessment.
pub fn decode_status(raw: u16) -> StatusAssessment {
    StatusAssessment {
        usable: raw == 0,
        trigger_reason: (raw & 0x000f) as u8,
        time_error: ((raw >> 4) & 0x0003) as u8,
        raw,
    }
}

/// Timestamped sample series from a single PMU, on a complete uniform grid.
///
/// Voltage magnitude and frequency deviation are masked independently: a
/// sample is missing *for a consumer* if the channel it reads is masked.
/// Slots materialized for grid gaps are masked on both channels.
#[derive(Debug, Clone, PartialEq)]
pub struct PmuSeries {
    pub pmu_id: String,
    pub sample_rate_hz: u32,
    /// Epoch milliseconds of slot 0.
    pub t0: i64,
    pub voltage: Vec<f64>,
    pub freq_dev: Vec<f64>,
    pub status: Vec<u16>,
    pub missing_v: Vec<bool>,
    pub missing_f: Vec<bool>,
}

impl PmuSeries {
    /// Allocate an all-missing series of `len` slots.
    pub fn blank(pmu_id: &str, sample_rate_hz: u32, t0: i64, len: usize) -> PmuSeries {
        PmuSeries {
            pmu_id: pmu_id.to_string(),
            sample_rate_hz,
            t0,
            voltage: vec![f64::NAN; len],
            freq_dev: vec![f64::NAN; len],
            status: vec![0; len],
            missing_v: vec![true; len],
            missing_f: vec![true; len],
        }
    }

    pub fn len(&self) -> usize {
        self.voltage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty()
    }

    /// Epoch milliseconds of grid slot `i` (nearest-ms rounding of i/rate).
    pub fn slot_time(&self, i: usize) -> i64 {
        self.t0 + slot_offset_ms(self.sample_rate_hz, i as i64)
    }

    /// Grid slot nearest to epoch-ms time `t` (may be negative / past the end).
    pub fn time_to_slot(&self, t: i64) -> i64 {
        time_to_slot(self.t0, self.sample_rate_hz, t)
    }

    /// True when the slot is masked on both channels (a materialized gap).
    pub fn missing_both(&self, i: usize) -> bool {
        self.missing_v[i] && self.missing_f[i]
    }
}

/// Millisecond offset of grid slot `i` at `rate` Hz, rounded to nearest ms.
pub fn slot_offset_ms(rate: u32, i: i64) -> i64 {
    let r = rate as i64;
    (i * 1000 + r / 2).div_euclid(r)
}

/// Nearest grid slot for epoch-ms `t` on the grid anchored at `t0`.
pub fn time_to_slot(t0: i64, rate: u32, t: i64) -> i64 {
    ((t - t0) * rate as i64 + 500).div_euclid(1000)
}

// ---------------------------------------------------------------------------
// Signal CSV
// ---------------------------------------------------------------------------

pub const SIGNAL_CSV_HEADER: &str = "pmu_id,timestamp_ms,voltage,freq_dev,status";

/// Parse a signal CSV stream into one series per PMU (ordered by id).
///
/// Sample rate is inferred per PMU from the modal inter-sample gap
/// (33-34 ms -> 30 Hz, 16-17 ms -> 60 Hz) and the series is completed to a
/// uniform grid; absent grid slots become missing-masked samples. A literal
/// `NaN` in the voltage or frequency column masks only that channel.
pub fn parse_signal_csv<R: BufRead>(reader: R) -> Result<Vec<PmuSeries>, ParseError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| ParseError::Malformed {
            line: 1,
            msg: "empty stream".into(),
        })?
        .map_err(ParseError::Io)?;
    if header.trim_end() != SIGNAL_CSV_HEADER {
        return Err(ParseError::Malformed {
            line: 1,
            msg: format!("expected header `{SIGNAL_CSV_HEADER}`"),
        });
    }

    struct Row {
        ts: i64,
        v: f64,
        f: f64,
        status: u16,
        line: usize,
    }
    let mut per_pmu: BTreeMap<String, Vec<Row>> = BTreeMap::new();

    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(ParseError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(ParseError::Malformed {
                line: line_no,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let ts: i64 = fields[1].trim().parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad timestamp_ms `{}`", fields[1]),
        })?;
        let v: f64 = fields[2].trim().parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad voltage `{}`", fields[2]),
        })?;
        let f: f64 = fields[3].trim().parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad freq_dev `{}`", fields[3]),
        })?;
        let status: u16 = fields[4].trim().parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad status `{}`", fields[4]),
        })?;
        let rows = per_pmu.entry(fields[0].to_string()).or_default();
        if let Some(prev) = rows.last() {
            if ts <= prev.ts {
                return Err(ParseError::NonMonotone {
                    line: line_no,
                    pmu_id: fields[0].to_string(),
                });
            }
        }
        rows.push(Row {
            ts,
            v,
            f,
            status,
            line: line_no,
        });
    }

    let mut out = Vec::with_capacity(per_pmu.len());
    for (pmu_id, rows) in per_pmu {
        let rate = infer_rate(&pmu_id, &rows.iter().map(|r| r.ts).collect::<Vec<_>>())?;
        let t0 = rows[0].ts;
        let last_slot = time_to_slot(t0, rate, rows[rows.len() - 1].ts);
        let len = last_slot as usize + 1;
        let mut series = PmuSeries::blank(&pmu_id, rate, t0, len);
        let mut prev_slot: i64 = -1;
        for row in &rows {
            let slot = time_to_slot(t0, rate, row.ts);
            if slot <= prev_slot {
                return Err(ParseError::Malformed {
                    line: row.line,
                    msg: "timestamp collides with an earlier sample on the grid".into(),
                });
            }
            prev_slot = slot;
            let i = slot as usize;
            series.voltage[i] = row.v;
            series.freq_dev[i] = row.f;
            series.status[i] = row.status;
            series.missing_v[i] = row.v.is_nan();
            series.missing_f[i] = row.f.is_nan();
        }
        out.push(series);
    }
    Ok(out)
}

fn infer_rate(pmu_id: &str, ts: &[i64]) -> Result<u32, ParseError> {
    if ts.len() < 2 {
        return Err(ParseError::UnsupportedRate {
            pmu_id: pmu_id.to_string(),
            gap_ms: 0,
        });
    }
    let mut gap_counts: BTreeMap<i64, usize> = BTreeMap::new();
    for w in ts.windows(2) {
        *gap_counts.entry(w[1] - w[0]).or_default() += 1;
    }
    let (&modal_gap, _) = gap_counts
        .iter()
        .max_by_key(|(gap, count)| (**count, -**gap))
        .expect("at least one gap");
    match modal_gap {
        16 | 17 => Ok(60),
        33 | 34 => Ok(30),
        gap => Err(ParseError::UnsupportedRate {
            pmu_id: pmu_id.to_string(),
            gap_ms: gap,
        }),
    }
}

/// Serialize series back to the signal CSV format. Grid slots that are
/// missing on both channels are gaps and emit no row; a slot missing on one
/// channel emits `NaN` in that column only.
pub fn write_signal_csv<W: Write>(writer: &mut W, series: &[PmuSeries]) -> std::io::Result<()> {
    writeln!(writer, "{SIGNAL_CSV_HEADER}")?;
    for s in series {
        for i in 0..s.len() {
            if s.missing_both(i) {
                continue;
            }
            let v = if s.missing_v[i] {
                "NaN".to_string()
            } else {
                format!("{}", s.voltage[i])
            };
            let f = if s.missing_f[i] {
                "NaN".to_string()
            } else {
                format!("{}", s.freq_dev[i])
            };
            writeln!(
                writer,
                "{},{},{},{},{}",
                s.pmu_id,
                s.slot_time(i),
                v,
                f,
                s.status[i]
            )?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Event log CSV
// ---------------------------------------------------------------------------

/// One operator log entry. Timestamps are UTC; minute resolution is the norm
/// for real logs, so `start` is typically coarser than the actual onset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLogEntry {
    pub interconnection: String,
    /// Epoch milliseconds.
    pub start: i64,
    /// Epoch milliseconds.
    pub end: i64,
    pub event_type: EventType,
    pub cause: String,
}

pub const EVENT_LOG_CSV_HEADER: &str = "interconnection,start_iso,end_iso,event_type,cause";

/// Parse an event-log CSV stream. Unrecognized event-type strings map to
/// `Unknown`; the trailing cause field may itself contain commas.
pub fn parse_event_log<R: BufRead>(reader: R) -> Result<Vec<EventLogEntry>, ParseError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| ParseError::Malformed {
            line: 1,
            msg: "empty stream".into(),
        })?
        .map_err(ParseError::Io)?;
    if header.trim_end() != EVENT_LOG_CSV_HEADER {
        return Err(ParseError::Malformed {
            line: 1,
            msg: format!("expected header `{EVENT_LOG_CSV_HEADER}`"),
        });
    }
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(ParseError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(5, ',').collect();
        if fields.len() != 5 {
            return Err(ParseError::Malformed {
                line: line_no,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let start = parse_iso_utc_ms(fields[1].trim()).ok_or_else(|| ParseError::BadTimestamp {
            line: line_no,
            text: fields[1].to_string(),
        })?;
        let end = parse_iso_utc_ms(fields[2].trim()).ok_or_else(|| ParseError::BadTimestamp {
            line: line_no,
            text: fields[2].to_string(),
        })?;
        if start > end {
            return Err(ParseError::StartAfterEnd { line: line_no });
        }
        entries.push(EventLogEntry {
            interconnection: fields[0].to_string(),
            start,
            end,
            event_type: EventType::from_log_text(fields[3]),
            cause: fields[4].to_string(),
        });
    }
    Ok(entries)
}

/// Serialize entries in the event-log CSV format (minute-resolution
/// timestamps are written without a seconds field).
pub fn write_event_log<W: Write>(writer: &mut W, entries: &[EventLogEntry]) -> std::io::Result<()> {
    writeln!(writer, "{EVENT_LOG_CSV_HEADER}")?;
    for e in entries {
        writeln!(
            writer,
            "{},{},{},{},{}",
            e.interconnection,
            format_iso_utc_ms(e.start),
            format_iso_utc_ms(e.end),
            e.event_type,
            e.cause
        )?;
    }
    Ok(())
}

/// Parse an ISO-8601 UTC timestamp; the seconds field and a trailing `Z` are
/// optional, fractional seconds are accepted to ms precision.
pub fn parse_iso_utc_ms(text: &str) -> Option<i64> {
    let text = text.strip_suffix('Z').unwrap_or(text);
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
    ];
    for fmt in FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(Utc.from_utc_datetime(&dt).timestamp_millis());
        }
    }
    None
}

/// Format epoch milliseconds as ISO-8601 UTC. Whole minutes render at minute
/// resolution, matching real log precision.
pub fn format_iso_utc_ms(ms: i64) -> String {
    let dt: DateTime<Utc> = Utc.timestamp_millis_opt(ms).single().expect("valid ms");
    if ms % 60_000 == 0 {
        dt.format("%Y-%m-%dT%H:%M").to_string()
    } else if ms % 1000 == 0 {
        dt.format("%Y-%m-%dT%H:%M:%S").to_string()
    } else {
        dt.format("%Y-%m-%dT%H:%M:%S%.3f").to_string()
    }
}

// ---------------------------------------------------------------------------
// Context slicing
// ---------------------------------------------------------------------------

/// Seconds of data kept before the logged start time.
pub const PRE_EVENT_SECS: i64 = 60;
/// Seconds of data kept after the logged start time.
pub const POST_EVENT_SECS: i64 = 120;
/// Total context span in seconds.
pub const CONTEXT_SECS: i64 = PRE_EVENT_SECS + POST_EVENT_SECS;

/// Cut the 180 s context `[start - 60 s, start + 120 s)` out of a series.
///
/// The result always has exactly `180 * rate` slots; spans the source does
/// not cover are missing-masked. Returns an error only when the requested
/// window does not overlap the series at all.
pub fn slice_context(series: &PmuSeries, start: i64) -> Result<PmuSeries, OutOfRangeError> {
    let want_start = start - PRE_EVENT_SECS * 1000;
    let want_end = start + POST_EVENT_SECS * 1000;
    let rate = series.sample_rate_hz;
    let n = (CONTEXT_SECS as usize) * rate as usize;

    let span_end = series.slot_time(series.len().saturating_sub(1)) + 1;
    if want_end <= series.t0 || want_start >= span_end {
        return Err(OutOfRangeError {
            want_start_ms: want_start,
            want_end_ms: want_end,
        });
    }

    // First source slot whose timestamp is >= want_start.
    let mut k0 = series.time_to_slot(want_start);
    if series.t0 + slot_offset_ms(rate, k0) < want_start {
        k0 += 1;
    }

    let mut out = PmuSeries::blank(&series.pmu_id, rate, want_start, n);
    for i in 0..n {
        let src = k0 + i as i64;
        if src < 0 || src as usize >= series.len() {
            continue;
        }
        let src = src as usize;
        out.voltage[i] = series.voltage[src];
        out.freq_dev[i] = series.freq_dev[src];
        out.status[i] = series.status[src];
        out.missing_v[i] = series.missing_v[src];
        out.missing_f[i] = series.missing_f[src];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn grid_csv(pmu: &str, rate: u32, t0: i64, n: usize) -> String {
        let mut s = String::from(SIGNAL_CSV_HEADER);
        s.push('\n');
        for i in 0..n {
            let ts = t0 + slot_offset_ms(rate, i as i64);
            s.push_str(&format!("{pmu},{ts},{},{},0\n", 1.0 + i as f64 * 1e-4, 0.01));
        }
        s
    }

    #[test]
    fn status_zero_is_usable() {
        let a = decode_status(0);
        assert!(a.usable);
        assert_eq!(a.trigger_reason, 0);
        assert_eq!(a.time_error, 0);
    }

    #[test]
    fn status_bit_extraction() {
        let a = decode_status(16);
        assert!(!a.usable);
        assert_eq!(a.time_error, 1);
        assert_eq!(a.trigger_reason, 0);

        let b = decode_status(5);
        assert!(!b.usable);
        assert_eq!(b.trigger_reason, 5);
        assert_eq!(b.time_error, 0);
    }

    #[test]
    fn status_usable_iff_zero_exhaustive() {
        for raw in 0..=u16::MAX {
            let a = decode_status(raw);
            assert_eq!(a.usable, raw == 0);
            assert_eq!(a.trigger_reason as u16, raw & 0xf);
            assert_eq!(a.time_error as u16, (raw >> 4) & 0x3);
            assert_eq!(a.raw, raw);
        }
    }

    #[test]
    fn parse_clean_uniform_60hz() {
        let csv = grid_csv("A", 60, 1000, 120);
        let series = parse_signal_csv(Cursor::new(csv)).unwrap();
        assert_eq!(series.len(), 1);
        let s = &series[0];
        assert_eq!(s.len(), 120);
        assert_eq!(s.sample_rate_hz, 60);
        assert!(s.missing_v.iter().all(|&m| !m));
        assert!(s.missing_f.iter().all(|&m| !m));
    }

    #[test]
    fn parse_materializes_gap() {
        // Drop the row for slot 3 of a 60 Hz grid.
        let full = grid_csv("A", 60, 0, 8);
        let csv: String = full
            .lines()
            .enumerate()
            .filter(|(i, _)| *i != 4) // header + slots 0..=2, skip slot 3
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        let series = parse_signal_csv(Cursor::new(csv)).unwrap();
        let s = &series[0];
        assert_eq!(s.len(), 8);
        assert!(s.missing_both(3));
        assert!(!s.missing_both(2));
        assert!(!s.missing_both(4));
    }

    #[test]
    fn parse_per_channel_missing() {
        let csv = format!("{SIGNAL_CSV_HEADER}\nA,1000,NaN,0.01,0\nA,1017,1.0,0.01,0\nA,1033,1.0,0.01,0\n");
        let series = parse_signal_csv(Cursor::new(csv)).unwrap();
        let s = &series[0];
        assert!(s.missing_v[0]);
        assert!(!s.missing_f[0]);
        assert_eq!(s.freq_dev[0], 0.01);
    }

    #[test]
    fn parse_rejects_non_monotone() {
        let csv = format!("{SIGNAL_CSV_HEADER}\nA,2000,1.0,0.0,0\nA,1000,1.0,0.0,0\n");
        let err = parse_signal_csv(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, ParseError::NonMonotone { line: 3, .. }));
    }

    #[test]
    fn parse_rejects_malformed_row_with_line_number() {
        let csv = format!("{SIGNAL_CSV_HEADER}\nA,1000,1.0,0.0,0\nA,1017,oops,0.0,0\n");
        let err = parse_signal_csv(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, ParseError::Malformed { line: 3, .. }));
    }

    #[test]
    fn parse_rejects_unsupported_rate() {
        let csv = format!("{SIGNAL_CSV_HEADER}\nA,0,1.0,0.0,0\nA,100,1.0,0.0,0\nA,200,1.0,0.0,0\n");
        let err = parse_signal_csv(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedRate { .. }));
    }

    #[test]
    fn signal_roundtrip_lossless() {
        let csv = grid_csv("A", 60, 1000, 40) ;
        let series = parse_signal_csv(Cursor::new(&csv)).unwrap();
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &series).unwrap();
        let reparsed = parse_signal_csv(Cursor::new(buf)).unwrap();
        assert_eq!(series, reparsed);
    }

    #[test]
    fn event_log_mapping() {
        let csv = format!(
            "{EVENT_LOG_CSV_HEADER}\n\
             B,2016-05-01T10:23,2016-05-01T10:25,Line Outage,breaker trip\n\
             B,2016-05-01T11:00,2016-05-01T11:02,oscillation event,inter-area mode\n\
             C,2016-05-01T12:00,2016-05-01T12:05,??,unlabeled\n"
        );
        let entries = parse_event_log(Cursor::new(csv)).unwrap();
        assert_eq!(entries[0].event_type, EventType::LineOutage);
        assert_eq!(entries[1].event_type, EventType::OscillationEvent);
        assert_eq!(entries[2].event_type, EventType::Unknown);
        assert_eq!(entries[0].end - entries[0].start, 120_000);
    }

    #[test]
    fn event_log_cause_may_contain_commas() {
        let csv = format!("{EVENT_LOG_CSV_HEADER}\nB,2016-05-01T10:23,2016-05-01T10:25,Normal,calm, quiet, nominal\n");
        let entries = parse_event_log(Cursor::new(csv)).unwrap();
        assert_eq!(entries[0].cause, "calm, quiet, nominal");
    }

    #[test]
    fn event_log_rejects_bad_timestamp() {
        let csv = format!("{EVENT_LOG_CSV_HEADER}\nB,yesterday,2016-05-01T10:25,Normal,x\n");
        let err = parse_event_log(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, ParseError::BadTimestamp { line: 2, .. }));
    }

    #[test]
    fn slice_lengths_for_both_rates() {
        for (rate, expect) in [(60u32, 10_800usize), (30, 5_400)] {
            let n = 200 * rate as usize;
            let mut s = PmuSeries::blank("A", rate, 0, n);
            for i in 0..n {
                s.voltage[i] = 1.0;
                s.freq_dev[i] = 0.0;
                s.missing_v[i] = false;
                s.missing_f[i] = false;
            }
            let ctx = slice_context(&s, 70_000).unwrap();
            assert_eq!(ctx.len(), expect);
            assert_eq!(ctx.t0, 10_000);
        }
    }

    #[test]
    fn slice_pads_uncovered_head() {
        // Series starts 30 s before the logged start -> first 30 s masked.
        let rate = 60u32;
        let n = 200 * 60;
        let mut s = PmuSeries::blank("A", rate, 0, n);
        for i in 0..n {
            s.voltage[i] = 1.0;
            s.freq_dev[i] = 0.0;
            s.missing_v[i] = false;
            s.missing_f[i] = false;
        }
        let ctx = slice_context(&s, 30_000).unwrap();
        assert_eq!(ctx.len(), 10_800);
        let pad = 30 * 60;
        assert!((0..pad).all(|i| ctx.missing_both(i)));
        assert!(!ctx.missing_both(pad));
    }

    #[test]
    fn slice_rejects_zero_overlap() {
        let s = PmuSeries::blank("A", 60, 0, 600);
        assert!(slice_context(&s, 10_000_000).is_err());
    }

    #[test]
    fn slot_time_roundtrip() {
        for rate in [30u32, 60] {
            for i in 0..20_000i64 {
                let t = slot_offset_ms(rate, i);
                assert_eq!(time_to_slot(0, rate, t), i, "rate {rate} slot {i}");
            }
        }
    }
}
