//! Numeric CSV tables and the three files a run emits.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{EpochRecord, Evaluation, ExperimentResult};
use crate::langs::Task;

pub const EPOCH_COLUMNS: [&str; 5] = ["epoch", "trainloss", "testloss", "accuracy", "maxErrRate"];
pub const ATTRACTOR_COLUMNS: [&str; 2] = ["metric", "accuracy"];
pub const LENGTH_COLUMNS: [&str; 2] = ["p", "acc"];

/// A header and rows of numbers, every row as wide as the header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `printf("%.6g")`: six significant digits, trailing zeros dropped,
/// scientific notation outside `1e-4 ≤ |x| < 1e6`.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let fixed = format!("{x:.*}", (5 - exp) as usize);
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::invalid(format!(
                "row of {} values for {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown column {name:?}; available: {}",
                    self.header.join(", ")
                ))
            })?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_text(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_g(v))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
        let mut records = r.records();
        let header: Vec<String> = match records.next() {
            Some(h) => h
                .map_err(|e| Error::parse(1, e.to_string()))?
                .iter()
                .map(|s| s.trim().to_string())
                .collect(),
            None => return Err(Error::parse(1, "empty CSV file")),
        };
        if header.iter().any(String::is_empty) {
            return Err(Error::parse(1, "empty column name"));
        }
        let mut table = CsvTable { header, rows: Vec::new() };
        for (i, rec) in records.enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
            let row = rec
                .iter()
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(line, format!("not a number: {cell:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row).map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

pub fn epoch_table(records: &[EpochRecord]) -> CsvTable {
    let mut t = CsvTable::new(&EPOCH_COLUMNS);
    for r in records {
        t.rows.push(vec![r.epoch as f64, r.trainloss, r.testloss, r.accuracy, r.max_err_rate]);
    }
    t
}

/// Accuracy per populated attractor bin.
pub fn attractor_table(eval: &Evaluation) -> CsvTable {
    let mut t = CsvTable::new(&ATTRACTOR_COLUMNS);
    for (bin, acc) in eval.populated() {
        t.rows.push(vec![bin as f64, acc]);
    }
    t
}

/// Full-string accuracy per populated `p = m + n`.
pub fn length_table(eval: &Evaluation) -> CsvTable {
    let mut t = CsvTable::new(&LENGTH_COLUMNS);
    for (p, acc) in eval.populated() {
        t.rows.push(vec![p as f64, acc]);
    }
    t
}

/// Writes `<stem>_epochs.csv` plus `<stem>_attractors.csv` (Dyck, best epoch)
/// or `<stem>_lengths.csv` (cross-serial, final epoch) into `dir`.
pub fn emit_csv(result: &ExperimentResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: String, table: CsvTable| -> Result<()> {
        let path = dir.join(name);
        table.save(&path)?;
        written.push(path);
        Ok(())
    };
    write(format!("{stem}_epochs.csv"), epoch_table(&result.records))?;
    if let Some(eval) = result.breakdown() {
        match result.config.task {
            Task::Dyck => write(format!("{stem}_attractors.csv"), attractor_table(eval))?,
            Task::CrossSerial => write(format!("{stem}_lengths.csv"), length_table(eval))?,
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (100.0, "100"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333"),
            (2.0 / 3.0, "0.666667"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (999999.5, "1e+06"),
            (9.999996, "10"),
            (f64::NAN, "nan"),
            (f64::NEG_INFINITY, "-inf"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x), want, "{x}");
        }
    }

    #[test]
    fn roundtrip_to_six_digits() {
        let mut t = CsvTable::new(&EPOCH_COLUMNS);
        t.push(vec![1.0, 2.302585093, 0.123456789, 0.987654321, 1e-7]).unwrap();
        t.push(vec![2.0, 1.5, f64::INFINITY, 0.0, 0.25]).unwrap();
        let back = CsvTable::parse(&t.to_text()).unwrap();
        assert_eq!(back.header, t.header);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert!(a == b || ((a - b) / b).abs() < 5e-6, "{a} vs {b}");
        }
        assert!(!t.to_text().contains('\r'));
    }

    #[test]
    fn header_only_and_errors() {
        let t = CsvTable::new(&LENGTH_COLUMNS);
        assert_eq!(t.to_text(), "p,acc\n");
        assert_eq!(CsvTable::parse("p,acc\n").unwrap(), t);
        assert!(CsvTable::parse("").is_err());
        assert!(CsvTable::parse("p,acc\n1,x\n").is_err());
        assert!(CsvTable::parse("p,acc\n1\n").is_err());
        assert!(t.column("metric").is_err());
        assert!(CsvTable::new(&["a"]).push(vec![1.0, 2.0]).is_err());
    }
}
