//! Record-file and count-table I/O.
//!
//! Trial records stream to a line-delimited CSV with columns
//! `trial,heralded,swapped,setting,d1,d2,d3`. Tomography accepts count
//! tables either aggregated from such a record file or from a standalone
//! CSV with columns `basis,port,counts,background` (port is `plus` or
//! `minus`; plus carries H, S or R).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::polarization::Basis;
use crate::sim::{AnalyzerMode, TrialRecord};
use crate::tomography::BasisCounts;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },
    #[error("record stream has no trials for basis {0:?}")]
    MissingBasis(Basis),
}

fn io_err(path: &Path, source: std::io::Error) -> RecordError {
    RecordError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write a trial record stream as CSV.
pub fn write_records(path: &Path, records: &[TrialRecord]) -> Result<(), RecordError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "trial,heralded,swapped,setting,d1,d2,d3").map_err(|e| io_err(path, e))?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.trial_index,
            u8::from(r.heralded),
            u8::from(r.ensembles_swapped),
            r.setting.label(),
            r.d1(),
            r.d2(),
            r.d3()
        )
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Read a trial record stream written by [`write_records`].
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, RecordError> {
    use crate::sim::{ClickRecord, Detector};

    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let malformed = |line: u64, message: String| RecordError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2; // header is line 1
        let row = row.map_err(|e| malformed(line, e.to_string()))?;
        if row.len() != 7 {
            return Err(malformed(
                line,
                format!("expected 7 columns, got {}", row.len()),
            ));
        }
        let parse_u64 = |idx: usize| -> Result<u64, RecordError> {
            row[idx]
                .parse::<u64>()
                .map_err(|e| malformed(line, format!("column {}: {e}", idx + 1)))
        };
        let trial_index = parse_u64(0)?;
        let heralded = parse_u64(1)? != 0;
        let ensembles_swapped = parse_u64(2)? != 0;
        let setting = AnalyzerMode::from_label(&row[3])
            .ok_or_else(|| malformed(line, format!("unknown setting {:?}", &row[3])))?;
        let counts = [
            parse_u64(4)? as u32,
            parse_u64(5)? as u32,
            parse_u64(6)? as u32,
        ];
        let mut clicks = Vec::new();
        for (detector, count) in [Detector::D1, Detector::D2, Detector::D3]
            .into_iter()
            .zip(counts)
        {
            if count > 0 {
                clicks.push(ClickRecord {
                    trial_index,
                    detector,
                    count,
                });
            }
        }
        records.push(TrialRecord {
            trial_index,
            heralded,
            ensembles_swapped,
            setting,
            clicks,
        });
    }
    Ok(records)
}

/// Aggregate basis-resolved port counts from a record stream. D2 feeds the
/// plus port and D3 the minus port; counts are photon totals, not trial
/// totals.
pub fn counts_from_records(records: &[TrialRecord]) -> Result<[BasisCounts; 3], RecordError> {
    let mut totals = [[0.0f64; 2]; 3];
    let mut seen = [false; 3];
    for r in records {
        if let AnalyzerMode::Basis(basis) = r.setting {
            let axis = basis.stokes_axis();
            seen[axis] = true;
            totals[axis][0] += r.d2() as f64;
            totals[axis][1] += r.d3() as f64;
        }
    }
    let mut out = Vec::with_capacity(3);
    for basis in [Basis::Hv, Basis::St, Basis::Lr] {
        let axis = basis.stokes_axis();
        if !seen[axis] {
            return Err(RecordError::MissingBasis(basis));
        }
        out.push(BasisCounts::raw(basis, totals[axis][0], totals[axis][1]));
    }
    Ok([out[0], out[1], out[2]])
}

/// Attach an independently recorded background stream to signal counts.
/// `background_norm` is the ratio of signal windows to background windows.
pub fn attach_background(
    counts: &mut [BasisCounts; 3],
    background: &[TrialRecord],
    background_norm: f64,
) -> Result<(), RecordError> {
    let bg = counts_from_records(background)?;
    for c in counts.iter_mut() {
        let b = bg[c.basis.stokes_axis()];
        c.background_plus = b.n_plus;
        c.background_minus = b.n_minus;
        c.background_norm = background_norm;
    }
    Ok(())
}

/// Read a standalone count table: CSV columns `basis,port,counts,background`.
pub fn counts_from_csv(path: &Path, background_norm: f64) -> Result<[BasisCounts; 3], RecordError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let malformed = |line: u64, message: String| RecordError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut table: [[Option<(f64, f64)>; 2]; 3] = Default::default();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| malformed(line, e.to_string()))?;
        if row.len() != 4 {
            return Err(malformed(
                line,
                format!("expected 4 columns, got {}", row.len()),
            ));
        }
        let basis = Basis::from_label(&row[0])
            .ok_or_else(|| malformed(line, format!("unknown basis {:?}", &row[0])))?;
        let port = match &row[1] {
            "plus" => 0usize,
            "minus" => 1,
            other => {
                return Err(malformed(
                    line,
                    format!("port must be plus|minus, got {other:?}"),
                ))
            }
        };
        let counts: f64 = row[2]
            .parse()
            .map_err(|e| malformed(line, format!("counts: {e}")))?;
        let background: f64 = row[3]
            .parse()
            .map_err(|e| malformed(line, format!("background: {e}")))?;
        table[basis.stokes_axis()][port] = Some((counts, background));
    }
    let mut out = Vec::with_capacity(3);
    for basis in [Basis::Hv, Basis::St, Basis::Lr] {
        let axis = basis.stokes_axis();
        let (plus, minus) = match (table[axis][0], table[axis][1]) {
            (Some(p), Some(m)) => (p, m),
            _ => return Err(RecordError::MissingBasis(basis)),
        };
        out.push(BasisCounts {
            basis,
            n_plus: plus.0,
            n_minus: minus.0,
            background_plus: plus.1,
            background_minus: minus.1,
            background_norm,
        });
    }
    Ok([out[0], out[1], out[2]])
}

/// Serialize a report as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RecordError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Format a number with six significant digits for CSV tables.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.5e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::FiducialState;
    use crate::sim::{run_block, HeraldMode, NoiseParams, TrialContext};

    fn sample_records() -> Vec<TrialRecord> {
        let mut noise = NoiseParams::calibrated();
        noise.dark_rate = 0.01;
        let mut all = Vec::new();
        let mut trial_base = 0;
        for basis in Basis::ALL {
            let ctx = TrialContext {
                herald: HeraldMode::Forced,
                ..TrialContext::new(FiducialState::S.state(), AnalyzerMode::Basis(basis), noise)
            };
            all.extend(run_block(&ctx, trial_base, 500, 11, trial_base));
            trial_base += 500;
        }
        all
    }

    #[test]
    fn record_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let records = sample_records();
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn malformed_record_reports_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "trial,heralded,swapped,setting,d1,d2,d3\n0,1,0,HV,1,0,0\n1,1,0,XX,1,0,0\n",
        )
        .unwrap();
        let err = read_records(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "{msg}");
        assert!(msg.contains("XX"), "{msg}");
    }

    #[test]
    fn counts_aggregate_photon_totals_per_basis() {
        let records = sample_records();
        let counts = counts_from_records(&records).unwrap();
        for c in &counts {
            assert!(c.total() > 0.0);
        }
        // S input: the ST basis should be strongly plus-biased.
        let st = counts[Basis::St.stokes_axis()];
        assert!(st.n_plus > 5.0 * st.n_minus, "{st:?}");
    }

    #[test]
    fn missing_basis_is_reported() {
        let records: Vec<TrialRecord> = sample_records()
            .into_iter()
            .filter(|r| r.setting != AnalyzerMode::Basis(Basis::Lr))
            .collect();
        assert!(matches!(
            counts_from_records(&records),
            Err(RecordError::MissingBasis(Basis::Lr))
        ));
    }

    #[test]
    fn background_attaches_per_basis() {
        let records = sample_records();
        let mut counts = counts_from_records(&records).unwrap();
        attach_background(&mut counts, &records, 0.25).unwrap();
        for c in &counts {
            assert_eq!(c.background_norm, 0.25);
            assert!(c.background_plus + c.background_minus > 0.0);
        }
    }

    #[test]
    fn count_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        std::fs::write(
            &path,
            "basis,port,counts,background\n\
             HV,plus,120,4\nHV,minus,80,4\n\
             ST,plus,100,5\nST,minus,100,3\n\
             LR,plus,150,2\nLR,minus,50,2\n",
        )
        .unwrap();
        let counts = counts_from_csv(&path, 0.5).unwrap();
        let hv = counts[Basis::Hv.stokes_axis()];
        assert_eq!(hv.n_plus, 120.0);
        assert_eq!(hv.background_minus, 4.0);
        assert_eq!(hv.background_norm, 0.5);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(0.93), "9.30000e-1");
        assert_eq!(fmt_sig6(1e-6), "1.00000e-6");
        assert_eq!(fmt_sig6(-123456.789), "-1.23457e5");
    }
}
