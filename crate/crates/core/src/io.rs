//! Prediction-table CSV and loss-family JSON.
//!
//! CSV layout: `unit_id,weight,y_0..y_{d-1},f1_0..f1_{d-1},f2_0..f2_{d-1}`
//! with the weight column optional (uniform when absent). Lines starting
//! with `#` are comments, except that a line `#losses {json}` before the
//! header carries a loss family so a generated instance travels as one stream.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Columns, EmpiricalDataset, Predictor};
use crate::error::{Error, Result};
use crate::loss::{rescale_loss, LossFamily, LossFunction};

const LOSSES_PREFIX: &str = "#losses ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEntry {
    pub name: String,
    pub matrix: Vec<Vec<f64>>,
}

/// On-disk loss family. `rescaled: false` entries are mapped into `[0,1]` on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossFamilyFile {
    pub k: usize,
    pub d: usize,
    pub rescaled: bool,
    pub losses: Vec<LossEntry>,
}

impl LossFamilyFile {
    pub fn from_family(family: &LossFamily) -> Self {
        LossFamilyFile {
            k: family.actions(),
            d: family.cols(),
            rescaled: true,
            losses: family
                .iter()
                .map(|l| LossEntry {
                    name: l.name().to_string(),
                    matrix: l.rows(),
                })
                .collect(),
        }
    }

    pub fn into_family(self) -> Result<LossFamily> {
        let mut losses = Vec::with_capacity(self.losses.len());
        for entry in self.losses {
            if entry.matrix.len() != self.k {
                return Err(Error::input(format!(
                    "loss `{}` has {} rows, header says k = {}",
                    entry.name,
                    entry.matrix.len(),
                    self.k
                )));
            }
            if let Some(row) = entry.matrix.iter().find(|r| r.len() != self.d) {
                return Err(Error::Dimension {
                    expected: self.d,
                    found: row.len(),
                });
            }
            let loss = if self.rescaled {
                LossFunction::new(entry.name, &entry.matrix)?
            } else {
                rescale_loss(entry.name, &entry.matrix)?
            };
            losses.push(loss);
        }
        LossFamily::new(losses)
    }
}

/// Reads a whole file, or standard input for `-`.
pub fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

pub fn parse_losses(text: &str) -> Result<LossFamily> {
    let file: LossFamilyFile = serde_json::from_str(text)?;
    file.into_family()
}

pub fn load_losses(path: impl AsRef<Path>) -> Result<LossFamily> {
    parse_losses(&fs::read_to_string(path)?)
}

pub fn losses_to_json(family: &LossFamily) -> String {
    serde_json::to_string(&LossFamilyFile::from_family(family)).expect("plain data serializes")
}

pub fn save_losses(family: &LossFamily, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, losses_to_json(family) + "\n")?;
    Ok(())
}

/// Parses plain decimals like `0.125` or `1` with one division, which is
/// exact-then-rounded (and so equal to `str::parse`) while the digits fit in
/// 53 bits. Anything else returns `None`.
fn short_decimal(b: &[u8]) -> Option<f64> {
    const POW10: [f64; 16] = [
        1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12, 1e13, 1e14, 1e15,
    ];
    if b.is_empty() || b.len() > 16 {
        return None;
    }
    let mut digits: u64 = 0;
    let mut count = 0;
    let mut frac = None;
    for (i, &c) in b.iter().enumerate() {
        match c {
            b'0'..=b'9' => {
                digits = digits * 10 + u64::from(c - b'0');
                count += 1;
            }
            b'.' if frac.is_none() => frac = Some(b.len() - i - 1),
            _ => return None,
        }
    }
    if count == 0 {
        return None;
    }
    // 16 bytes hold at most 16 digits, so `digits < 2^53` and the power is exact
    Some(digits as f64 / POW10[frac.unwrap_or(0)])
}

/// A parsed CSV: the dataset plus an embedded loss family, if any.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub data: EmpiricalDataset,
    pub losses: Option<LossFamily>,
}

pub fn parse_dataset(text: &str) -> Result<LoadedData> {
    let mut losses = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(json) = line.strip_prefix(LOSSES_PREFIX) {
            losses = Some(parse_losses(json)?);
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("unit_id").ok_or_else(|| Error::MissingColumn("unit_id".into()))?;
    let weight_col = col("weight");
    let d = (0..).take_while(|j| col(&format!("y_{j}")).is_some()).count();
    if d == 0 {
        return Err(Error::MissingColumn("y_0".into()));
    }
    let mut vector_cols = Vec::with_capacity(3);
    for prefix in ["y", "f1", "f2"] {
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let name = format!("{prefix}_{j}");
            cols.push(col(&name).ok_or(Error::MissingColumn(name))?);
        }
        vector_cols.push(cols);
    }

    let mut cols = Columns::with_capacity(d, 0);
    let mut record = csv::ByteRecord::new();
    let mut row = 0;
    while reader.read_byte_record(&mut record)? {
        let text_of = |c: usize| -> &str {
            record
                .get(c)
                .and_then(|b| std::str::from_utf8(b).ok())
                .map_or("", str::trim)
        };
        let cell = |c: usize| -> Result<f64> {
            let bytes = record.get(c).unwrap_or_default().trim_ascii();
            if let Some(v) = short_decimal(bytes) {
                return Ok(v);
            }
            let raw = text_of(c);
            raw.parse::<f64>().map_err(|_| Error::RangeViolation {
                row,
                column: headers[c].to_string(),
                value: raw.to_string(),
            })
        };
        let id_raw = text_of(id_col);
        let id: u64 = id_raw.parse().map_err(|_| Error::RangeViolation {
            row,
            column: "unit_id".into(),
            value: id_raw.to_string(),
        })?;
        cols.ids.push(id);
        cols.weights.push(match weight_col {
            Some(c) => cell(c)?,
            None => 0.0,
        });
        for &c in &vector_cols[0] {
            cols.labels.push(cell(c)?);
        }
        for (table, idx) in cols.predictions.iter_mut().zip(&vector_cols[1..]) {
            for &c in idx {
                table.push(cell(c)?);
            }
        }
        row += 1;
    }
    let data = EmpiricalDataset::from_columns(cols, weight_col.is_none())?;
    Ok(LoadedData { data, losses })
}

/// Loads a CSV from a path, or from standard input for `-`.
pub fn load_dataset(path: &str) -> Result<LoadedData> {
    parse_dataset(&read_source(path)?)
}

/// Writes `data` with `tables` as the prediction columns. Reals use the
/// shortest representation that parses back to the same double.
pub fn write_dataset<W: Write>(
    out: W,
    data: &EmpiricalDataset,
    tables: [&[f64]; 2],
    losses: Option<&LossFamily>,
) -> Result<()> {
    let mut out = out;
    if let Some(family) = losses {
        writeln!(out, "{LOSSES_PREFIX}{}", losses_to_json(family))?;
    }
    let d = data.dim();
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["unit_id".to_string(), "weight".to_string()];
    for prefix in ["y", "f1", "f2"] {
        header.extend((0..d).map(|j| format!("{prefix}_{j}")));
    }
    writer.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec = vec![data.ids()[i].to_string(), data.weight(i).to_string()];
        rec.extend(data.label(i).iter().map(|x| x.to_string()));
        for t in tables {
            rec.extend(t[i * d..(i + 1) * d].iter().map(|x| x.to_string()));
        }
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn dataset_to_csv(data: &EmpiricalDataset, losses: Option<&LossFamily>) -> String {
    let mut buf = Vec::new();
    write_dataset(
        &mut buf,
        data,
        [data.predictions(Predictor::First), data.predictions(Predictor::Second)],
        losses,
    )
    .expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn save_dataset(data: &EmpiricalDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset_to_csv(data, None))?;
    Ok(())
}
