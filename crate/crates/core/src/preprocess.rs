//! Event-window preprocessing: sample-level onset alignment from coarse log
//! timestamps, 2-second window extraction, the 5% missing/bad-data gate with
//! interpolation, and per-PMU-per-day data-quality survival statistics.
//!
//! The onset aligner scores each PMU's context with the modified z-score
//! (0.6745 * (x - median) / MAD), takes the timestamps of the extreme
//! absolute score per PMU, and votes across PMUs; PMUs are GPS-synchronized,
//! so a real event concentrates the votes on one grid slot.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::pmu::{slot_offset_ms, EventType, PmuSeries};

/// Samples per extracted window after preprocessing, both channels.
pub const WINDOW_LEN: usize = 120;
/// Analysis-window length in seconds.
pub const WINDOW_SECS: usize = 2;
/// Windows whose bad-sample fraction exceeds this are excluded.
pub const MAX_BAD_FRACTION: f64 = 0.05;
/// Modified z-score magnitude above which a sample is screened as bad data
/// (10 robust standard deviations from the window median).
pub const OUTLIER_SCORE_LIMIT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("fewer than 3 valid samples for a robust score")]
    InsufficientData,
    #[error("no PMU produced a usable onset score")]
    NoOnset,
    #[error("context list is empty")]
    NoContexts,
    #[error("contexts do not share a common grid (t0/rate/len)")]
    GridMismatch,
    #[error("onset timestamp {onset_ms} lies outside the context span")]
    OnsetOutOfRange { onset_ms: i64 },
    #[error("quality statistics are empty")]
    EmptyStats,
    #[error("survival grid must be sorted ascending")]
    UnsortedGrid,
}

/// Which channel an operation reads. The robust onset score is computed on a
/// single channel; callers choose per event family (voltage excursions for
/// outages, frequency deviation for frequency events).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Voltage,
    FreqDev,
}

impl Channel {
    pub fn samples<'a>(&self, s: &'a PmuSeries) -> (&'a [f64], &'a [bool]) {
        match self {
            Channel::Voltage => (&s.voltage, &s.missing_v),
            Channel::FreqDev => (&s.freq_dev, &s.missing_f),
        }
    }
}

// ---------------------------------------------------------------------------
// Robust scoring and onset location
// ---------------------------------------------------------------------------

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Modified z-scores over the non-missing entries of `x`.
///
/// Missing or non-finite positions score 0, as does everything when the MAD
/// is zero. Requires at least 3 valid samples.
pub fn modified_zscore(x: &[f64], missing: &[bool]) -> Result<Vec<f64>, PreprocessError> {
    assert_eq!(x.len(), missing.len());
    let valid: Vec<f64> = x
        .iter()
        .zip(missing)
        .filter(|(v, &m)| !m && v.is_finite())
        .map(|(v, _)| *v)
        .collect();
    if valid.len() < 3 {
        return Err(PreprocessError::InsufficientData);
    }
    let med = median_of(valid.clone());
    let mad = median_of(valid.iter().map(|v| (v - med).abs()).collect());
    let mut scores = vec![0.0; x.len()];
    if mad == 0.0 {
        return Ok(scores);
    }
    for (i, (v, &m)) in x.iter().zip(missing).enumerate() {
        if !m && v.is_finite() {
            scores[i] = 0.6745 * (v - med) / mad;
        }
    }
    Ok(scores)
}

/// Locate the event onset shared by a set of synchronized contexts.
///
/// Per PMU, the slots achieving the extreme absolute modified z-score are
/// recorded; the slot named most often across PMUs wins, ties broken by the
/// earliest timestamp. PMUs with too little valid data, or whose scores are
/// identically zero, contribute no votes.
pub fn locate_onset(contexts: &[PmuSeries], channel: Channel) -> Result<i64, PreprocessError> {
    let first = contexts.first().ok_or(PreprocessError::NoContexts)?;
    if contexts.iter().any(|c| {
        c.t0 != first.t0 || c.sample_rate_hz != first.sample_rate_hz || c.len() != first.len()
    }) {
        return Err(PreprocessError::GridMismatch);
    }

    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for ctx in contexts {
        let (x, missing) = channel.samples(ctx);
        let scores = match modified_zscore(x, missing) {
            Ok(s) => s,
            Err(PreprocessError::InsufficientData) => continue,
            Err(e) => return Err(e),
        };
        let extreme = scores.iter().fold(0.0f64, |acc, s| acc.max(s.abs()));
        if extreme == 0.0 {
            continue;
        }
        for (i, s) in scores.iter().enumerate() {
            if s.abs() == extreme {
                *votes.entry(i).or_default() += 1;
            }
        }
    }

    // BTreeMap iterates slots ascending, so `>` keeps the earliest on ties.
    let mut best: Option<(usize, usize)> = None;
    for (&slot, &count) in &votes {
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((slot, count));
        }
    }
    let (slot, _) = best.ok_or(PreprocessError::NoOnset)?;
    Ok(first.slot_time(slot))
}

// ---------------------------------------------------------------------------
// Window extraction
// ---------------------------------------------------------------------------

/// A 2-second frame cut from a context, before quality screening. Carries the
/// per-channel missing masks and status words the gate needs.
#[derive(Debug, Clone)]
pub struct CandidateWindow {
    pub event_id: u64,
    pub pmu_id: String,
    pub label: EventType,
    /// Onset timestamp the frame was selected around, epoch ms.
    pub onset: i64,
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub missing_v: Vec<bool>,
    pub missing_f: Vec<bool>,
    pub status: Vec<u16>,
}

/// A cleaned, accepted window: exactly 120 finite samples per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EventWindow {
    pub event_id: u64,
    pub pmu_id: String,
    pub label: EventType,
    pub onset: i64,
    pub samples_v: Vec<f64>,
    pub samples_f: Vec<f64>,
    /// Fraction of sample positions that were repaired by interpolation.
    pub quality: f64,
}

/// Identity of a window within its context: frame index and sample count.
fn frame_of(ctx: &PmuSeries, onset: i64) -> Result<(usize, usize), PreprocessError> {
    let slot = ctx.time_to_slot(onset);
    if slot < 0 || slot as usize >= ctx.len() {
        return Err(PreprocessError::OnsetOutOfRange { onset_ms: onset });
    }
    let frame_len = WINDOW_SECS * ctx.sample_rate_hz as usize;
    Ok((slot as usize / frame_len, frame_len))
}

/// Cut the half-open 2 s frame containing `onset` from a context.
///
/// Frames tile the context from its start. 30 Hz frames hold 60 raw samples
/// and are linearly resampled to the canonical 120 (even outputs copy inputs,
/// odd outputs are midpoints; masks and status words of contributing samples
/// are OR-combined).
pub fn extract_window(
    ctx: &PmuSeries,
    onset: i64,
    event_id: u64,
    label: EventType,
) -> Result<CandidateWindow, PreprocessError> {
    let (frame, frame_len) = frame_of(ctx, onset)?;
    let lo = frame * frame_len;
    let hi = lo + frame_len;

    let mut w = CandidateWindow {
        event_id,
        pmu_id: ctx.pmu_id.clone(),
        label,
        onset,
        v: ctx.voltage[lo..hi].to_vec(),
        f: ctx.freq_dev[lo..hi].to_vec(),
        missing_v: ctx.missing_v[lo..hi].to_vec(),
        missing_f: ctx.missing_f[lo..hi].to_vec(),
        status: ctx.status[lo..hi].to_vec(),
    };
    if frame_len != WINDOW_LEN {
        resample_to_window_len(&mut w);
    }
    Ok(w)
}

/// Linear 2x upsampling of a 60-sample frame to 120 points.
fn resample_to_window_len(w: &mut CandidateWindow) {
    let n = w.v.len();
    debug_assert_eq!(WINDOW_LEN, 2 * n);
    let lerp = |src: &[f64], j: usize| -> f64 {
        if j % 2 == 0 {
            src[j / 2]
        } else {
            let a = (j - 1) / 2;
            let b = ((j + 1) / 2).min(n - 1);
            0.5 * (src[a] + src[b])
        }
    };
    let pick = |mask: &[bool], j: usize| -> bool {
        if j % 2 == 0 {
            mask[j / 2]
        } else {
            mask[(j - 1) / 2] || mask[((j + 1) / 2).min(n - 1)]
        }
    };
    let v: Vec<f64> = (0..WINDOW_LEN).map(|j| lerp(&w.v, j)).collect();
    let f: Vec<f64> = (0..WINDOW_LEN).map(|j| lerp(&w.f, j)).collect();
    let mv: Vec<bool> = (0..WINDOW_LEN).map(|j| pick(&w.missing_v, j)).collect();
    let mf: Vec<bool> = (0..WINDOW_LEN).map(|j| pick(&w.missing_f, j)).collect();
    let st: Vec<u16> = (0..WINDOW_LEN)
        .map(|j| {
            if j % 2 == 0 {
                w.status[j / 2]
            } else {
                w.status[(j - 1) / 2] | w.status[((j + 1) / 2).min(n - 1)]
            }
        })
        .collect();
    w.v = v;
    w.f = f;
    w.missing_v = mv;
    w.missing_f = mf;
    w.status = st;
}

// ---------------------------------------------------------------------------
// Quality gate
// ---------------------------------------------------------------------------

/// Why a candidate window was excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub event_id: u64,
    pub pmu_id: String,
    pub bad_fraction: f64,
    pub reason: String,
}

/// Outcome of the quality gate; rejection is a normal result, not an error.
#[derive(Debug, Clone)]
pub enum GateOutcome {
    Accepted(EventWindow),
    Rejected(Rejection),
}

impl GateOutcome {
    pub fn accepted(self) -> Option<EventWindow> {
        match self {
            GateOutcome::Accepted(w) => Some(w),
            GateOutcome::Rejected(_) => None,
        }
    }
}

/// Screen and repair one candidate window.
///
/// A sample is bad on a channel if it is missing-masked, non-finite, carries
/// a nonzero status word, or its modified z-score magnitude exceeds 10
/// (10 robust standard deviations from the window median). Windows whose
/// union bad fraction exceeds 5% are rejected; otherwise bad samples are
/// filled by linear interpolation between the nearest good neighbors
/// (boundary runs are held at the nearest good value).
pub fn quality_gate(cand: &CandidateWindow) -> GateOutcome {
    let n = cand.v.len();
    let bad_v = channel_bad_mask(&cand.v, &cand.missing_v, &cand.status);
    let bad_f = channel_bad_mask(&cand.f, &cand.missing_f, &cand.status);

    let bad_union = bad_v
        .iter()
        .zip(&bad_f)
        .filter(|(a, b)| **a || **b)
        .count();
    let bad_fraction = bad_union as f64 / n as f64;
    if bad_fraction > MAX_BAD_FRACTION {
        return GateOutcome::Rejected(Rejection {
            event_id: cand.event_id,
            pmu_id: cand.pmu_id.clone(),
            bad_fraction,
            reason: format!(
                "{bad_union} of {n} samples missing/bad ({:.2}% > {:.0}%)",
                bad_fraction * 100.0,
                MAX_BAD_FRACTION * 100.0
            ),
        });
    }

    let samples_v = match interpolate(&cand.v, &bad_v) {
        Some(v) => v,
        None => {
            return GateOutcome::Rejected(Rejection {
                event_id: cand.event_id,
                pmu_id: cand.pmu_id.clone(),
                bad_fraction: 1.0,
                reason: "voltage channel has no good samples".into(),
            })
        }
    };
    let samples_f = match interpolate(&cand.f, &bad_f) {
        Some(f) => f,
        None => {
            return GateOutcome::Rejected(Rejection {
                event_id: cand.event_id,
                pmu_id: cand.pmu_id.clone(),
                bad_fraction: 1.0,
                reason: "frequency channel has no good samples".into(),
            })
        }
    };

    GateOutcome::Accepted(EventWindow {
        event_id: cand.event_id,
        pmu_id: cand.pmu_id.clone(),
        label: cand.label,
        onset: cand.onset,
        samples_v,
        samples_f,
        quality: bad_fraction,
    })
}

fn channel_bad_mask(x: &[f64], missing: &[bool], status: &[u16]) -> Vec<bool> {
    let mut bad: Vec<bool> = (0..x.len())
        .map(|i| missing[i] || !x[i].is_finite() || status[i] != 0)
        .collect();
    // Robust outlier screen over the samples that survived the hard checks.
    if let Ok(scores) = modified_zscore(x, &bad) {
        for (b, s) in bad.iter_mut().zip(&scores) {
            if s.abs() > OUTLIER_SCORE_LIMIT {
                *b = true;
            }
        }
    } else {
        // Too few valid samples to screen; everything is bad.
        bad.iter_mut().for_each(|b| *b = true);
    }
    bad
}

/// Replace bad samples by linear interpolation between the nearest good
/// neighbors; returns `None` when no good sample exists at all.
fn interpolate(x: &[f64], bad: &[bool]) -> Option<Vec<f64>> {
    let n = x.len();
    let good: Vec<usize> = (0..n).filter(|&i| !bad[i]).collect();
    if good.is_empty() {
        return None;
    }
    let mut out = x.to_vec();
    for i in 0..n {
        if !bad[i] {
            continue;
        }
        let next = good.partition_point(|&g| g < i);
        let right = good.get(next).copied();
        let left = if next > 0 { Some(good[next - 1]) } else { None };
        out[i] = match (left, right) {
            (Some(l), Some(r)) => {
                let t = (i - l) as f64 / (r - l) as f64;
                x[l] + t * (x[r] - x[l])
            }
            (Some(l), None) => x[l],
            (None, Some(r)) => x[r],
            (None, None) => unreachable!("good is non-empty"),
        };
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Data-quality survival statistics
// ---------------------------------------------------------------------------

/// Missing-data tallies for one (pmu, UTC day) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityCell {
    pub pmu_id: String,
    /// Days since the UNIX epoch.
    pub day: i64,
    pub total_samples: usize,
    pub missing_samples: usize,
    /// Lengths of consecutive missing runs within the day.
    pub gap_runs: Vec<usize>,
}

impl QualityCell {
    pub fn missing_fraction(&self) -> f64 {
        if self.total_samples == 0 {
            0.0
        } else {
            self.missing_samples as f64 / self.total_samples as f64
        }
    }
}

/// Per-(pmu, day) data-quality statistics for a set of series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QualityStats {
    pub cells: Vec<QualityCell>,
}

/// Tally missing data per PMU per UTC day. A sample counts as missing when
/// either channel is masked.
pub fn compute_quality_stats(series: &[PmuSeries]) -> QualityStats {
    let mut cells: BTreeMap<(String, i64), QualityCell> = BTreeMap::new();
    for s in series {
        let mut run_day: Option<i64> = None;
        let mut run_len = 0usize;
        for i in 0..s.len() {
            let day = s.slot_time(i).div_euclid(86_400_000);
            let cell = cells
                .entry((s.pmu_id.clone(), day))
                .or_insert_with(|| QualityCell {
                    pmu_id: s.pmu_id.clone(),
                    day,
                    total_samples: 0,
                    missing_samples: 0,
                    gap_runs: Vec::new(),
                });
            cell.total_samples += 1;
            let missing = s.missing_v[i] || s.missing_f[i];
            if missing {
                cell.missing_samples += 1;
            }
            // Close the open run when it ends or crosses a day boundary.
            match (missing, run_day) {
                (true, Some(d)) if d == day => run_len += 1,
                (true, _) => {
                    flush_run(&mut cells, s, run_day, run_len);
                    run_day = Some(day);
                    run_len = 1;
                }
                (false, _) => {
                    flush_run(&mut cells, s, run_day, run_len);
                    run_day = None;
                    run_len = 0;
                }
            }
        }
        flush_run(&mut cells, s, run_day, run_len);
    }
    QualityStats {
        cells: cells.into_values().collect(),
    }
}

fn flush_run(
    cells: &mut BTreeMap<(String, i64), QualityCell>,
    s: &PmuSeries,
    run_day: Option<i64>,
    run_len: usize,
) {
    if let Some(day) = run_day {
        if run_len > 0 {
            if let Some(cell) = cells.get_mut(&(s.pmu_id.clone(), day)) {
                cell.gap_runs.push(run_len);
            }
        }
    }
}

/// Empirical survival curve S(k) = fraction of values strictly greater
/// than k, evaluated on an ascending grid.
fn survival_curve(values: &[f64], ks: &[f64]) -> Result<Vec<(f64, f64)>, PreprocessError> {
    if values.is_empty() {
        return Err(PreprocessError::EmptyStats);
    }
    if ks.windows(2).any(|w| w[0] > w[1]) {
        return Err(PreprocessError::UnsortedGrid);
    }
    let n = values.len() as f64;
    Ok(ks
        .iter()
        .map(|&k| {
            let exceed = values.iter().filter(|&&v| v > k).count();
            (k, exceed as f64 / n)
        })
        .collect())
}

/// Survival function of the per-(pmu, day) missing-data fraction.
pub fn survival_function(
    stats: &QualityStats,
    ks: &[f64],
) -> Result<Vec<(f64, f64)>, PreprocessError> {
    let fractions: Vec<f64> = stats.cells.iter().map(|c| c.missing_fraction()).collect();
    survival_curve(&fractions, ks)
}

/// Survival function of individual gap-run lengths (samples per data-quality
/// incident). Errors when the stats contain no runs at all only if the stats
/// themselves are empty; a defect-free dataset yields S(k) = 0 everywhere.
pub fn survival_gap_lengths(
    stats: &QualityStats,
    ks: &[f64],
) -> Result<Vec<(f64, f64)>, PreprocessError> {
    if stats.cells.is_empty() {
        return Err(PreprocessError::EmptyStats);
    }
    let runs: Vec<f64> = stats
        .cells
        .iter()
        .flat_map(|c| c.gap_runs.iter().map(|&r| r as f64))
        .collect();
    if runs.is_empty() {
        // No incidents: survival is identically zero on the grid.
        if ks.windows(2).any(|w| w[0] > w[1]) {
            return Err(PreprocessError::UnsortedGrid);
        }
        return Ok(ks.iter().map(|&k| (k, 0.0)).collect());
    }
    survival_curve(&runs, ks)
}

// ---------------------------------------------------------------------------
// Window CSV
// ---------------------------------------------------------------------------

/// Header of the window CSV: identity columns, 120 voltage samples, 120
/// frequency samples, and the interpolated fraction.
pub fn window_csv_header() -> String {
    let mut h = String::from("event_id,pmu_id,label,onset_ms");
    for i in 0..WINDOW_LEN {
        h.push_str(&format!(",v_{i:03}"));
    }
    for i in 0..WINDOW_LEN {
        h.push_str(&format!(",f_{i:03}"));
    }
    h.push_str(",quality");
    h
}

pub fn write_windows_csv<W: Write>(writer: &mut W, windows: &[EventWindow]) -> std::io::Result<()> {
    writeln!(writer, "{}", window_csv_header())?;
    for w in windows {
        let mut line = format!("{},{},{},{}", w.event_id, w.pmu_id, w.label, w.onset);
        for v in &w.samples_v {
            line.push_str(&format!(",{v}"));
        }
        for f in &w.samples_f {
            line.push_str(&format!(",{f}"));
        }
        line.push_str(&format!(",{}", w.quality));
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn read_windows_csv<R: BufRead>(reader: R) -> Result<Vec<EventWindow>, crate::pmu::ParseError> {
    use crate::pmu::ParseError;
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| ParseError::Malformed {
            line: 1,
            msg: "empty stream".into(),
        })?
        .map_err(ParseError::Io)?;
    if header.trim_end() != window_csv_header() {
        return Err(ParseError::Malformed {
            line: 1,
            msg: "unexpected window CSV header".into(),
        });
    }
    let expect = 4 + 2 * WINDOW_LEN + 1;
    let mut windows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(ParseError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expect {
            return Err(ParseError::Malformed {
                line: line_no,
                msg: format!("expected {expect} fields, found {}", fields.len()),
            });
        }
        let num = |s: &str| -> Result<f64, ParseError> {
            s.parse().map_err(|_| ParseError::Malformed {
                line: line_no,
                msg: format!("bad number `{s}`"),
            })
        };
        let event_id: u64 = fields[0].parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad event_id `{}`", fields[0]),
        })?;
        let onset: i64 = fields[3].parse().map_err(|_| ParseError::Malformed {
            line: line_no,
            msg: format!("bad onset `{}`", fields[3]),
        })?;
        let mut samples_v = Vec::with_capacity(WINDOW_LEN);
        let mut samples_f = Vec::with_capacity(WINDOW_LEN);
        for i in 0..WINDOW_LEN {
            samples_v.push(num(fields[4 + i])?);
        }
        for i in 0..WINDOW_LEN {
            samples_f.push(num(fields[4 + WINDOW_LEN + i])?);
        }
        windows.push(EventWindow {
            event_id,
            pmu_id: fields[1].to_string(),
            label: EventType::from_log_text(fields[2]),
            onset,
            samples_v,
            samples_f,
            quality: num(fields[expect - 1])?,
        });
    }
    Ok(windows)
}
