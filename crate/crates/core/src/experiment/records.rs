use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// First line of every records file.
pub const SCHEMA_LINE: &str = "# cc-test records v1; rates and statistics are unitless, samples/labels are call counts";

/// One trial. Wall time lives in the timing sidecar so the body stays deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub point: usize,
    pub trial: usize,
    pub seed: u64,
    pub op: String,
    pub n: u32,
    pub d: usize,
    pub eps: f64,
    pub rho: f64,
    pub kind: String,
    pub preset: String,
    pub family: String,
    pub clustering: String,
    pub verdict: String,
    /// Test statistic (`Y` for the zero-query tester); empty when not applicable.
    pub stat: Option<f64>,
    pub threshold: Option<f64>,
    /// TV and EMD from the input to ν.
    pub tv: Option<f64>,
    pub emd: Option<f64>,
    pub samples: u64,
    pub labels: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub point: usize,
    pub trial: usize,
    pub wall_ms: f64,
}

pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut w: W) -> Result<RecordWriter<W>> {
        writeln!(w, "{SCHEMA_LINE}")?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        inner
            .write_record([
                "config_hash", "point", "trial", "seed", "op", "n", "d", "eps", "rho", "kind", "preset", "family",
                "clustering", "verdict", "stat", "threshold", "tv", "emd", "samples", "labels",
            ])
            .map_err(csv_err)?;
        Ok(RecordWriter { inner })
    }

    pub fn write(&mut self, r: &ExperimentRecord) -> Result<()> {
        self.inner.serialize(r).map_err(csv_err)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(CoreError::from)
    }
}

fn csv_err(e: csv::Error) -> CoreError {
    CoreError::Io(e.to_string())
}

pub fn write_timings<W: Write>(w: W, t: &[TimingRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in t {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush().map_err(CoreError::from)
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rd.deserialize().map(|x| x.map_err(|e| CoreError::Parse(e.to_string()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let r = ExperimentRecord {
            config_hash: "ab".into(),
            point: 0,
            trial: 3,
            seed: 10,
            op: "part2-zeroq".into(),
            n: 10,
            d: 1,
            eps: 0.25,
            rho: 0.5,
            kind: "cycle".into(),
            preset: "b-b".into(),
            family: "zigzag(0.25)".into(),
            clustering: "generated".into(),
            verdict: "ACCEPT".into(),
            stat: Some(1e-4),
            threshold: None,
            tv: Some(0.25),
            emd: None,
            samples: 5,
            labels: 0,
        };
        let mut buf = Vec::new();
        {
            let mut w = RecordWriter::new(&mut buf).unwrap();
            w.write(&r).unwrap();
            w.flush().unwrap();
        }
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(SCHEMA_LINE));
        assert_eq!(read_records(&buf[..]).unwrap(), vec![r]);
    }
}
