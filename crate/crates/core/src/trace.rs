//! Binned traffic traces and their CSV + JSON sidecar format.
//!
//! CSV layout is `timestamp,id,bytes`, one row per (bin, series), bins in
//! time order and series in `ids` order within a bin. Values are written in
//! the shortest decimal form that parses back to the identical float, so a
//! read followed by a write reproduces the file byte for byte.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Link,
    Route,
}

/// `K x T` matrix of byte counts per bin of width `delta` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet<T: Real> {
    pub delta: f64,
    pub start_time: f64,
    pub series: DMatrix<T>,
    pub ids: Vec<usize>,
    pub kind: TraceKind,
}

/// Sidecar metadata stored next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub delta: f64,
    pub kind: TraceKind,
    pub ids: Vec<usize>,
    #[serde(default)]
    pub start_time: f64,
}

impl<T: Real> TraceSet<T> {
    pub fn new(
        delta: f64,
        start_time: f64,
        series: DMatrix<T>,
        ids: Vec<usize>,
        kind: TraceKind,
    ) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", format!("{delta} must be positive")));
        }
        if series.ncols() == 0 {
            return Err(invalid("series", "at least one bin required"));
        }
        if series.nrows() != ids.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                got: series.nrows(),
            });
        }
        if series.iter().any(|v| !v.is_finite()) {
            return Err(invalid("series", "all counts must be finite"));
        }
        Ok(TraceSet {
            delta,
            start_time,
            series,
            ids,
            kind,
        })
    }

    pub fn num_series(&self) -> usize {
        self.series.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.series.ncols()
    }

    pub fn timestamp(&self, bin: usize) -> f64 {
        self.start_time + bin as f64 * self.delta
    }

    /// Row index of series `id`.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn row(&self, id: usize) -> Result<Vec<T>> {
        let p = self.position(id).ok_or(Error::UnknownLink(id))?;
        Ok(self.series.row(p).iter().copied().collect())
    }

    /// Sub-matrix of the given ids in the given order.
    pub fn select(&self, ids: &[usize]) -> Result<DMatrix<T>> {
        let rows = ids
            .iter()
            .map(|&id| self.position(id).ok_or(Error::UnknownLink(id)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(rows.len(), self.num_bins(), |r, c| {
            self.series[(rows[r], c)]
        }))
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            delta: self.delta,
            kind: self.kind,
            ids: self.ids.clone(),
            start_time: self.start_time,
        }
    }

    /// Replaces negative counts with zero. Display-only post-processing.
    pub fn clipped_at_zero(&self) -> Self {
        let mut out = self.clone();
        out.series.apply(|v| *v = v.max(T::zero()));
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["timestamp", "id", "bytes"])?;
        for bin in 0..self.num_bins() {
            let ts = format_f64(self.timestamp(bin));
            for (k, id) in self.ids.iter().enumerate() {
                wtr.write_record([
                    ts.as_str(),
                    &id.to_string(),
                    &format_value(self.series[(k, bin)]),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, meta: &TraceMeta) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["timestamp", "id", "bytes"] {
            return Err(Error::Validation(format!(
                "trace CSV header must be `timestamp,id,bytes`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let k = meta.ids.len();
        let mut values: Vec<T> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let id: usize = rec[1]
                .parse()
                .map_err(|_| Error::Validation(format!("row {}: bad id `{}`", row + 2, &rec[1])))?;
            if id != meta.ids[row % k] {
                return Err(Error::Validation(format!(
                    "row {}: expected series {}, found {id}",
                    row + 2,
                    meta.ids[row % k]
                )));
            }
            let v: f64 = rec[2].parse().map_err(|_| {
                Error::Validation(format!("row {}: bad byte count `{}`", row + 2, &rec[2]))
            })?;
            values.push(T::lit(v));
        }
        if values.is_empty() || !values.len().is_multiple_of(k) {
            return Err(Error::Validation(format!(
                "trace has {} values, not a whole number of bins of {k} series",
                values.len()
            )));
        }
        let bins = values.len() / k;
        // rows arrive bin-major, i.e. column-major for a K x T matrix
        let series = DMatrix::from_column_slice(k, bins, &values);
        TraceSet::new(meta.delta, meta.start_time, series, meta.ids.clone(), meta.kind)
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let csv_file = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(std::io::BufWriter::new(csv_file))?;
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&self.meta())?,
        )?;
        Ok(())
    }

    /// Reads `<path>` plus its `.json` sidecar (same stem).
    pub fn load(csv_path: &Path) -> Result<Self> {
        let meta: TraceMeta =
            serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json"))?)?;
        let file = std::fs::File::open(csv_path)?;
        Self::read_csv(std::io::BufReader::new(file), &meta)
    }
}

/// Shortest round-trip decimal for a float.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Same as [`format_f64`], going through the scalar's own display so that
/// `f32` traces keep their native precision.
pub fn format_value<T: Real>(v: T) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> TraceSet<f64> {
        let series = DMatrix::from_row_slice(2, 3, &[1.0, 2.5, -3.0, 1e17, 0.1, 7.0]);
        TraceSet::new(10.0, 1_234_567_890.0, series, vec![3, 7], TraceKind::Link).unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "timestamp,id,bytes");
        assert_eq!(lines[1], "1234567890,3,1");
        assert_eq!(lines[2], "1234567890,7,100000000000000000");
        assert_eq!(lines[3], "1234567900,3,2.5");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn invalid_traces_rejected() {
        assert!(TraceSet::<f64>::new(0.0, 0.0, DMatrix::zeros(1, 1), vec![1], TraceKind::Link).is_err());
        assert!(TraceSet::<f64>::new(1.0, 0.0, DMatrix::zeros(1, 0), vec![1], TraceKind::Link).is_err());
        let mut m = DMatrix::zeros(1, 2);
        m[(0, 1)] = f64::NAN;
        assert!(TraceSet::new(1.0, 0.0, m, vec![1], TraceKind::Link).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            vals in proptest::collection::vec(-1e12f64..1e12, 6),
            delta in 0.001f64..100.0,
        ) {
            let ts = TraceSet::new(
                delta,
                0.0,
                DMatrix::from_column_slice(2, 3, &vals),
                vec![1, 2],
                TraceKind::Route,
            ).unwrap();
            let mut first = Vec::new();
            ts.write_csv(&mut first).unwrap();
            let back = TraceSet::<f64>::read_csv(first.as_slice(), &ts.meta()).unwrap();
            prop_assert_eq!(&back.series, &ts.series);
            let mut second = Vec::new();
            back.write_csv(&mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
