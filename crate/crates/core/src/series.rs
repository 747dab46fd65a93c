//! Uniformly sampled multivariate trajectories and their CSV form.
//!
//! A [`TimeSeries`] stores samples row-major: sample `m` occupies
//! `data[m * dim..(m + 1) * dim]` and sits at time `t0 + m * dt`. Times are
//! always reconstructed by multiplication so that long runs do not drift off
//! the grid.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{NgrcError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    dim: usize,
    data: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from row-major samples.
    pub fn from_flat(t0: f64, dt: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(NgrcError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if dim == 0 {
            return Err(NgrcError::InvalidArgument("series dimension must be ≥ 1".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(NgrcError::DimensionMismatch(format!(
                "{} values do not divide into rows of {dim}",
                data.len()
            )));
        }
        Ok(Self { t0, dt, dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(t0: f64, dt: f64, rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim.max(1));
        for (m, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(NgrcError::DimensionMismatch(format!(
                    "row {m} has {} components, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(t0, dt, dim.max(1), data)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    /// Duration covered by the samples, `len * dt`.
    pub fn span(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn sample(&self, m: usize) -> &[f64] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }

    pub fn sample_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.data[m * self.dim..(m + 1) * self.dim]
    }

    pub fn samples(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn last(&self) -> Option<&[f64]> {
        if self.is_empty() {
            None
        } else {
            Some(self.sample(self.len() - 1))
        }
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.samples().map(|row| row[c]).collect()
    }

    /// Samples `start..end` as a new series whose `t0` is the time of `start`.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeries {
        assert!(start <= end && end <= self.len(), "slice {start}..{end} out of range");
        TimeSeries {
            t0: self.time(start),
            dt: self.dt,
            dim: self.dim,
            data: self.data[start * self.dim..end * self.dim].to_vec(),
        }
    }

    /// Keeps only the listed components, in the listed order.
    pub fn select(&self, components: &[usize]) -> Result<TimeSeries> {
        if let Some(&bad) = components.iter().find(|&&c| c >= self.dim) {
            return Err(NgrcError::DimensionMismatch(format!(
                "component {bad} out of range for a {}-dimensional series",
                self.dim
            )));
        }
        let data = self
            .samples()
            .flat_map(|row| components.iter().map(move |&c| row[c]))
            .collect();
        TimeSeries::from_flat(self.t0, self.dt, components.len(), data)
    }

    /// Elementwise negation, used by the odd-symmetry checks.
    pub fn negated(&self) -> TimeSeries {
        TimeSeries {
            data: self.data.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    /// Population mean of each component.
    pub fn component_means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for row in self.samples() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Population standard deviation of each component.
    pub fn component_stds(&self) -> Vec<f64> {
        let mean = self.component_means();
        let n = self.len() as f64;
        let mut var = vec![0.0; self.dim];
        for row in self.samples() {
            for c in 0..self.dim {
                let e = row[c] - mean[c];
                var[c] += e * e;
            }
        }
        var.iter().map(|v| (v / n).sqrt()).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W, names: Option<&[&str]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        for c in 0..self.dim {
            header.push(match names {
                Some(n) if c < n.len() => n[c].to_string(),
                _ => format!("x{c}"),
            });
        }
        w.write_record(&header)?;
        for (m, row) in self.samples().enumerate() {
            let mut rec = Vec::with_capacity(self.dim + 1);
            rec.push(self.time(m).to_string());
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, names: Option<&[&str]>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file), names)
    }

    /// Reads a series written by [`TimeSeries::write_csv`]. The step is recovered
    /// from the first and last time stamps and every row is checked against the grid.
    pub fn read_csv<R: Read>(reader: R) -> Result<TimeSeries> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r.headers()?.len().saturating_sub(1);
        if dim == 0 {
            return Err(NgrcError::Format(
                "CSV needs a time column and at least one component".into(),
            ));
        }
        let mut times = Vec::new();
        let mut data = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut fields = rec.iter().map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| NgrcError::Format(format!("bad number {f:?}: {e}")))
            });
            times.push(fields.next().transpose()?.unwrap_or(f64::NAN));
            for v in fields {
                data.push(v?);
            }
        }
        if times.len() < 2 {
            return Err(NgrcError::Format("need at least two rows to recover dt".into()));
        }
        let t0 = times[0];
        let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
        let series = TimeSeries::from_flat(t0, dt, dim, data)?;
        for (m, t) in times.iter().enumerate() {
            if (series.time(m) - t).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(NgrcError::Format(format!("row {m} is off the uniform time grid")));
            }
        }
        Ok(series)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_are_multiplied_not_accumulated() {
        let s = TimeSeries::from_flat(0.0, 0.1, 1, vec![0.0; 100_001]).unwrap();
        assert_eq!(s.time(100_000), 100_000.0 * 0.1);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let rows = [[0.1, -1.0 / 3.0], [std::f64::consts::PI, 1e-300], [2.5e17, -0.0]];
        let s = TimeSeries::from_rows(0.25, 0.025, &rows).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, Some(&["x", "y"])).unwrap();
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.dim(), 2);
        for (a, b) in s.as_flat().iter().zip(back.as_flat()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!((back.dt() - 0.025).abs() < 1e-15);
    }

    #[test]
    fn rejects_ragged_rows() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(TimeSeries::from_rows(0.0, 1.0, &rows).is_err());
    }

    #[test]
    fn select_and_slice() {
        let s = TimeSeries::from_rows(0.0, 0.5, &[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]).unwrap();
        let sel = s.select(&[2, 0]).unwrap();
        assert_eq!(sel.sample(1), &[6.0, 4.0]);
        let sl = s.slice(1, 3);
        assert_eq!(sl.t0(), 0.5);
        assert_eq!(sl.sample(0), &[4.0, 5.0, 6.0]);
        assert!(s.select(&[3]).is_err());
    }
}
