//! Markov transition field encoding of sample windows.
//!
//! A length-n series is discretized into q equal-population quantile bins by
//! rank (ties broken by sample index), a first-order Markov transition matrix
//! W is counted over consecutive bin pairs and row-normalized, and the n x n
//! field M spreads W along the temporal axis: M[k1][k2] is the transition
//! probability from the bin of sample k1 to the bin of sample k2. Both
//! channels of a window are encoded independently and stacked.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::preprocess::EventWindow;

/// Default number of quantile bins (15 samples per bin on a 120-point window).
pub const DEFAULT_QUANTILE_BINS: usize = 8;

#[derive(Debug, Error)]
pub enum MtfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("graph file is corrupt: {0}")]
    BadGraphFile(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-stochastic q x q transition matrix between quantile bins. Rows whose
/// source bin has no outgoing transition stay all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub q: usize,
    /// Row-major q*q probabilities; entry (a, b) is P(next in bin b+1 | current in bin a+1).
    pub w: Vec<f64>,
    /// Outgoing transition counts per source bin.
    pub row_counts: Vec<usize>,
}

impl TransitionMatrix {
    pub fn get(&self, from_bin: usize, to_bin: usize) -> f64 {
        self.w[(from_bin - 1) * self.q + (to_bin - 1)]
    }
}

/// The 2-channel MTF encoding of an event window: channel 0 is the voltage
/// field, channel 1 the frequency-deviation field, stored as channel-major
/// n x n planes.
#[derive(Debug, Clone, PartialEq)]
pub struct MtfGraph {
    pub event_id: u64,
    pub pmu_id: String,
    pub n: usize,
    pub q: usize,
    /// `CHANNELS * n * n` values in [0, 1], channel plane by channel plane.
    pub data: Vec<f32>,
}

pub const CHANNELS: usize = 2;

impl MtfGraph {
    pub fn get(&self, channel: usize, k1: usize, k2: usize) -> f32 {
        self.data[channel * self.n * self.n + k1 * self.n + k2]
    }
}

/// Assign each sample to one of `q` equal-population bins (values 1..=q).
///
/// Samples are ranked by (value, index); rank r lands in bin
/// `floor(r * q / n) + 1`, so bin populations differ by at most one and the
/// assignment depends only on the ordering of the values.
pub fn quantile_bins(x: &[f64], q: usize) -> Result<Vec<usize>, MtfError> {
    let n = x.len();
    if q < 2 || q > n {
        return Err(MtfError::InvalidParameter(format!(
            "need 2 <= q <= n, got q={q}, n={n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MtfError::NonFiniteInput);
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort by value keeps index order among ties.
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut bins = vec![0usize; n];
    for (rank, &idx) in order.iter().enumerate() {
        bins[idx] = rank * q / n + 1;
    }
    Ok(bins)
}

/// Count consecutive bin transitions and normalize each source row.
pub fn transition_matrix(bins: &[usize], q: usize) -> Result<TransitionMatrix, MtfError> {
    if bins.len() < 2 {
        return Err(MtfError::InvalidParameter(
            "need at least 2 samples for transitions".into(),
        ));
    }
    if q < 2 || bins.iter().any(|&b| b == 0 || b > q) {
        return Err(MtfError::InvalidParameter(format!(
            "bin assignment out of range for q={q}"
        )));
    }
    let mut counts = vec![0usize; q * q];
    for pair in bins.windows(2) {
        counts[(pair[0] - 1) * q + (pair[1] - 1)] += 1;
    }
    let mut w = vec![0.0f64; q * q];
    let mut row_counts = vec![0usize; q];
    for a in 0..q {
        let total: usize = counts[a * q..(a + 1) * q].iter().sum();
        row_counts[a] = total;
        if total > 0 {
            for b in 0..q {
                w[a * q + b] = counts[a * q + b] as f64 / total as f64;
            }
        }
    }
    Ok(TransitionMatrix { q, w, row_counts })
}

/// The n x n Markov transition field of one channel.
pub fn markov_transition_field(x: &[f64], q: usize) -> Result<Vec<f64>, MtfError> {
    let bins = quantile_bins(x, q)?;
    let tm = transition_matrix(&bins, q)?;
    let n = x.len();
    let mut m = vec![0.0f64; n * n];
    for k1 in 0..n {
        let row = (bins[k1] - 1) * q;
        for k2 in 0..n {
            m[k1 * n + k2] = tm.w[row + (bins[k2] - 1)];
        }
    }
    Ok(m)
}

/// Encode both channels of an accepted window into a stacked MTF graph.
pub fn encode_window(w: &EventWindow, q: usize) -> Result<MtfGraph, MtfError> {
    encode_channels(&w.samples_v, &w.samples_f, q, w.event_id, &w.pmu_id)
}

/// Encode an arbitrary pair of equal-length channels (used for the canonical
/// 120-point windows and for shortened online windows alike).
pub fn encode_channels(
    v: &[f64],
    f: &[f64],
    q: usize,
    event_id: u64,
    pmu_id: &str,
) -> Result<MtfGraph, MtfError> {
    if v.len() != f.len() {
        return Err(MtfError::InvalidParameter(format!(
            "channel lengths differ: {} vs {}",
            v.len(),
            f.len()
        )));
    }
    let n = v.len();
    let mut data = Vec::with_capacity(CHANNELS * n * n);
    for channel in [v, f] {
        let m = markov_transition_field(channel, q)?;
        data.extend(m.iter().map(|&p| p as f32));
    }
    Ok(MtfGraph {
        event_id,
        pmu_id: pmu_id.to_string(),
        n,
        q,
        data,
    })
}

// ---------------------------------------------------------------------------
// Graph serialization
// ---------------------------------------------------------------------------

const GRAPH_MAGIC: &[u8; 4] = b"MTFG";

/// Write a graph as the binary format: magic, n, channels, q (u32 LE each),
/// then channel-major row-major f32 LE values.
pub fn write_graph<W: Write>(writer: &mut W, g: &MtfGraph) -> Result<(), MtfError> {
    writer.write_all(GRAPH_MAGIC)?;
    for v in [g.n as u32, CHANNELS as u32, g.q as u32] {
        writer.write_all(&v.to_le_bytes())?;
    }
    for v in &g.data {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a graph written by [`write_graph`]. The binary carries no identity
/// fields; `event_id`/`pmu_id` come back empty and are normally filled from
/// the dataset index.
pub fn read_graph<R: Read>(reader: &mut R) -> Result<MtfGraph, MtfError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != GRAPH_MAGIC {
        return Err(MtfError::BadGraphFile("bad magic".into()));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> Result<u32, MtfError> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let n = read_u32(reader)? as usize;
    let channels = read_u32(reader)? as usize;
    let q = read_u32(reader)? as usize;
    if channels != CHANNELS {
        return Err(MtfError::BadGraphFile(format!(
            "expected {CHANNELS} channels, found {channels}"
        )));
    }
    if n == 0 || n > 1 << 16 {
        return Err(MtfError::BadGraphFile(format!("implausible size n={n}")));
    }
    let count = CHANNELS * n * n;
    let mut bytes = vec![0u8; count * 4];
    reader.read_exact(&mut bytes)?;
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(MtfError::BadGraphFile("non-finite entries".into()));
    }
    Ok(MtfGraph {
        event_id: 0,
        pmu_id: String::new(),
        n,
        q,
        data,
    })
}

pub fn save_graph(path: &Path, g: &MtfGraph) -> Result<(), MtfError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_graph(&mut file, g)
}

pub fn load_graph(path: &Path) -> Result<MtfGraph, MtfError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_graph(&mut file)
}

/// Human-readable CSV dump for debugging: one `channel,row,col,value` line
/// per entry.
pub fn write_graph_csv<W: Write>(writer: &mut W, g: &MtfGraph) -> std::io::Result<()> {
    writeln!(writer, "channel,row,col,value")?;
    for c in 0..CHANNELS {
        for k1 in 0..g.n {
            for k2 in 0..g.n {
                writeln!(writer, "{c},{k1},{k2},{}", g.get(c, k1, k2))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmu::EventType;

    #[test]
    fn bins_by_rank() {
        assert_eq!(quantile_bins(&[4.0, 1.0, 3.0, 2.0], 2).unwrap(), vec![2, 1, 2, 1]);
    }

    #[test]
    fn bins_constant_input_tie_break_by_index() {
        let bins = quantile_bins(&[5.0; 6], 3).unwrap();
        assert_eq!(bins, vec![1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn bins_q_equals_n_is_a_permutation() {
        let bins = quantile_bins(&[3.0, 1.0, 2.0], 3).unwrap();
        assert_eq!(bins, vec![3, 1, 2]);
    }

    #[test]
    fn bins_parameter_errors() {
        assert!(quantile_bins(&[1.0, 2.0], 3).is_err());
        assert!(quantile_bins(&[1.0, 2.0, 3.0], 1).is_err());
        assert!(quantile_bins(&[1.0, f64::NAN, 3.0], 2).is_err());
    }

    #[test]
    fn transition_matrix_alternating() {
        let tm = transition_matrix(&[1, 2, 1, 2], 2).unwrap();
        assert_eq!(tm.w, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn transition_matrix_empty_source_row_stays_zero() {
        let tm = transition_matrix(&[1, 1, 1], 2).unwrap();
        assert_eq!(tm.w, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(tm.row_counts, vec![2, 0]);
    }

    #[test]
    fn transition_matrix_blocked() {
        let tm = transition_matrix(&[1, 1, 2, 2], 2).unwrap();
        assert_eq!(tm.w, vec![0.5, 0.5, 0.0, 1.0]);
    }

    #[test]
    fn transition_matrix_needs_two_samples() {
        assert!(transition_matrix(&[1], 2).is_err());
    }

    #[test]
    fn mtf_alternating_pattern() {
        let m = markov_transition_field(&[1.0, 2.0, 1.0, 2.0], 2).unwrap();
        #[rustfmt::skip]
        let expect = vec![
            0.0, 1.0, 0.0, 1.0,
            1.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 1.0,
            1.0, 0.0, 1.0, 0.0,
        ];
        assert_eq!(m, expect);
    }

    #[test]
    fn mtf_constant_input_stays_in_range() {
        let m = markov_transition_field(&[7.0; 10], 4).unwrap();
        assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v) && v.is_finite()));
    }

    #[test]
    fn encode_window_shapes() {
        let w = EventWindow {
            event_id: 1,
            pmu_id: "P".into(),
            label: EventType::Normal,
            onset: 0,
            samples_v: (0..120).map(|i| (i as f64 * 0.37).sin()).collect(),
            samples_f: vec![0.0; 120],
            quality: 0.0,
        };
        let g = encode_window(&w, 8).unwrap();
        assert_eq!(g.n, 120);
        assert_eq!(g.data.len(), 2 * 120 * 120);
        assert!(g.data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(&(*v as f64))));
    }

    #[test]
    fn encode_arbitrary_length() {
        let v: Vec<f64> = (0..60).map(|i| (i as f64 * 0.21).cos()).collect();
        let f: Vec<f64> = (0..60).map(|i| (i as f64 * 0.13).sin()).collect();
        let g = encode_channels(&v, &f, 8, 0, "P").unwrap();
        assert_eq!(g.n, 60);
        assert_eq!(g.data.len(), 2 * 60 * 60);
    }

    #[test]
    fn graph_binary_roundtrip() {
        let v: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let f: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos()).collect();
        let g = encode_channels(&v, &f, 4, 5, "P").unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        let back = read_graph(&mut std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.n, g.n);
        assert_eq!(back.q, g.q);
        assert_eq!(back.data, g.data);
    }

    #[test]
    fn graph_rejects_truncation_and_bad_magic() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let g = encode_channels(&v, &v, 2, 0, "P").unwrap();
        let mut buf = Vec::new();
        write_graph(&mut buf, &g).unwrap();
        let truncated = &buf[..buf.len() - 3];
        assert!(read_graph(&mut std::io::Cursor::new(truncated.to_vec())).is_err());
        let mut corrupted = buf.clone();
        corrupted[0] = b'X';
        assert!(read_graph(&mut std::io::Cursor::new(corrupted)).is_err());
    }

    // Independent brute-force MTF used to cross-check the implementation:
    // ranks by pair counting, transitions tallied straight into a dense
    // table, pairwise lookups done inline.
    fn brute_force_mtf(x: &[f64], q: usize) -> Vec<f64> {
        let n = x.len();
        let mut bins = vec![0usize; n];
        for i in 0..n {
            let mut rank = 0usize;
            for j in 0..n {
                if x[j] < x[i] || (x[j] == x[i] && j < i) {
                    rank += 1;
                }
            }
            bins[i] = rank * q / n + 1;
        }
        let mut counts = vec![vec![0usize; q]; q];
        for t in 1..n {
            counts[bins[t - 1] - 1][bins[t] - 1] += 1;
        }
        let mut w = vec![vec![0.0f64; q]; q];
        for a in 0..q {
            let total: usize = counts[a].iter().sum();
            if total > 0 {
                for b in 0..q {
                    w[a][b] = counts[a][b] as f64 / total as f64;
                }
            }
        }
        let mut m = vec![0.0f64; n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                m[k1 * n + k2] = w[bins[k1] - 1][bins[k2] - 1];
            }
        }
        m
    }

    #[test]
    fn brute_force_equivalence_short_sequences() {
        // All sequences of length 2..=6 over the alphabet {1, 2, 3}.
        for len in 2..=6usize {
            let total = 3usize.pow(len as u32);
            for code in 0..total {
                let mut x = Vec::with_capacity(len);
                let mut c = code;
                for _ in 0..len {
                    x.push((c % 3 + 1) as f64);
                    c /= 3;
                }
                for q in [2usize, 3] {
                    if q > len {
                        continue;
                    }
                    let ours = markov_transition_field(&x, q).unwrap();
                    let brute = brute_force_mtf(&x, q);
                    assert_eq!(ours, brute, "x={x:?} q={q}");
                }
            }
        }
    }

    #[test]
    fn monotone_transform_invariance() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37 % 19) as f64) * 0.3 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.8).exp() + 5.0).collect();
        for q in [2, 5, 8] {
            assert_eq!(
                markov_transition_field(&x, q).unwrap(),
                markov_transition_field(&y, q).unwrap()
            );
        }
    }
}
