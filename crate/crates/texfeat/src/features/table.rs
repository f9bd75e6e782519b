//! Labeled feature rows and their CSV interchange format.
//!
//! A feature CSV starts with a `# key=value` metadata block (format version
//! first, then the extraction parameters, then any extra keys in sorted
//! order), followed by the column header `label,source,f0,...,f807` and the
//! data rows. Floats are serialized with round-trip-exact precision, so
//! write -> read -> write is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{extract, ExtractionConfig, FEATURE_LEN};
use crate::glcm::VarianceMode;
use crate::imageio::LabeledPatch;

/// Current on-disk format version.
pub const FORMAT_VERSION: u32 = 1;

const FORMAT_KEY: &str = "texfeat-format";
const CONFIG_KEYS: [&str; 5] = [
    "ltp_t",
    "glcm_levels",
    "glcm_distance",
    "histogram_normalize",
    "variance_mode",
];

/// One labeled sample: class label, origin id, and its feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub label: String,
    pub source: String,
    pub values: Vec<f64>,
}

/// A set of feature rows sharing one extraction configuration. Rows always
/// have equal dimension; tables produced by extraction or CSV reading are
/// [`FEATURE_LEN`]-dimensional, while column subsets (used for descriptor
/// ablation) may be shorter.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub config: ExtractionConfig,
    /// Additional `# key=value` metadata carried through the CSV round trip
    /// (e.g. `split_seed`), sorted by key.
    pub extra_metadata: BTreeMap<String, String>,
    rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(config: ExtractionConfig) -> Self {
        FeatureTable {
            config,
            extra_metadata: BTreeMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn from_rows(config: ExtractionConfig, rows: Vec<FeatureRow>) -> Result<Self> {
        let mut table = FeatureTable::new(config);
        for row in rows {
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn push_row(&mut self, row: FeatureRow) -> Result<()> {
        if let Some(dim) = self.dim() {
            if row.values.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {:?} has {} values, table dimension is {dim}",
                    row.source,
                    row.values.len()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Feature dimension, `None` while the table has no rows.
    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(|r| r.values.len())
    }

    /// Sorted unique labels across all rows.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.rows.iter().map(|r| r.label.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// A table with the same labels/sources but only the columns in `range`.
    pub fn subset_columns(&self, range: Range<usize>) -> Result<FeatureTable> {
        if let Some(dim) = self.dim() {
            if range.end > dim {
                return Err(Error::Dimension(format!(
                    "column range {range:?} exceeds table dimension {dim}"
                )));
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureRow {
                label: r.label.clone(),
                source: r.source.clone(),
                values: r.values[range.clone()].to_vec(),
            })
            .collect();
        Ok(FeatureTable {
            config: self.config.clone(),
            extra_metadata: self.extra_metadata.clone(),
            rows,
        })
    }

    /// Applies a fallible transform to every row's values, keeping labels and
    /// metadata.
    pub fn map_rows<F>(&self, mut f: F) -> Result<FeatureTable>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Ok(FeatureRow {
                    label: r.label.clone(),
                    source: r.source.clone(),
                    values: f(&r.values)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureTable {
            config: self.config.clone(),
            extra_metadata: self.extra_metadata.clone(),
            rows,
        })
    }
}

/// Extracts features for every patch in parallel; row order matches patch
/// order regardless of scheduling.
pub fn extract_table(patches: &[LabeledPatch], cfg: &ExtractionConfig) -> Result<FeatureTable> {
    let rows = patches
        .par_iter()
        .map(|patch| {
            Ok(FeatureRow {
                label: patch.label.clone(),
                source: patch.source.to_string(),
                values: extract(&patch.image, cfg)?.into_values(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTable::from_rows(cfg.clone(), rows)
}

fn metadata_block(table: &FeatureTable) -> String {
    let cfg = &table.config;
    let mut out = String::new();
    let _ = writeln!(out, "# {FORMAT_KEY}={FORMAT_VERSION}");
    let _ = writeln!(out, "# ltp_t={}", cfg.ltp_t);
    let _ = writeln!(out, "# glcm_levels={}", cfg.glcm_levels);
    let _ = writeln!(out, "# glcm_distance={}", cfg.glcm_distance);
    let _ = writeln!(out, "# histogram_normalize={}", cfg.histogram_normalize);
    let _ = writeln!(out, "# variance_mode={}", cfg.variance_mode);
    for (key, value) in &table.extra_metadata {
        let _ = writeln!(out, "# {key}={value}");
    }
    out
}

/// Writes `table` as a feature CSV. The table must be
/// [`FEATURE_LEN`]-dimensional (or empty).
pub fn write_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    if let Some(dim) = table.dim() {
        if dim != FEATURE_LEN {
            return Err(Error::Dimension(format!(
                "feature csv requires {FEATURE_LEN}-dimensional rows, table has {dim}"
            )));
        }
    }
    let mut buf = metadata_block(table).into_bytes();
    {
        let mut writer = csv::WriterBuilder::new().from_writer(&mut buf);
        let mut header = vec!["label".to_string(), "source".to_string()];
        header.extend((0..FEATURE_LEN).map(|i| format!("f{i}")));
        writer
            .write_record(&header)
            .map_err(|e| Error::Format(format!("csv write failed: {e}")))?;
        let mut record = Vec::with_capacity(FEATURE_LEN + 2);
        for row in table.rows() {
            record.clear();
            record.push(row.label.clone());
            record.push(row.source.clone());
            record.extend(row.values.iter().map(|v| v.to_string()));
            writer
                .write_record(&record)
                .map_err(|e| Error::Format(format!("csv write failed: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn parse_metadata_line(line: &str, lineno: usize) -> Result<(String, String)> {
    let body = line.trim_start_matches('#').trim();
    let (key, value) = body.split_once('=').ok_or_else(|| {
        Error::Format(format!(
            "line {lineno}: metadata line {line:?} is not '# key=value'"
        ))
    })?;
    Ok((key.trim().to_string(), value.trim().to_string()))
}

fn parse_config(
    metadata: &BTreeMap<String, String>,
) -> Result<ExtractionConfig> {
    fn get<'a>(m: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
        m.get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("missing metadata key {key:?}")))
    }
    fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
        raw.parse()
            .map_err(|_| Error::Format(format!("metadata key {key:?} has invalid value {raw:?}")))
    }
    Ok(ExtractionConfig {
        ltp_t: parse("ltp_t", get(metadata, "ltp_t")?)?,
        glcm_levels: parse("glcm_levels", get(metadata, "glcm_levels")?)?,
        glcm_distance: parse("glcm_distance", get(metadata, "glcm_distance")?)?,
        histogram_normalize: parse("histogram_normalize", get(metadata, "histogram_normalize")?)?,
        variance_mode: get(metadata, "variance_mode")?.parse::<VarianceMode>()?,
    })
}

/// Reads a feature CSV written by [`write_csv`], with row/column diagnostics
/// on malformed input.
pub fn read_csv(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut metadata = BTreeMap::new();
    let mut body_start = 0;
    let mut lineno = 0;
    for line in text.split_inclusive('\n') {
        if !line.starts_with('#') {
            break;
        }
        lineno += 1;
        let (key, value) = parse_metadata_line(line.trim_end(), lineno)?;
        if lineno == 1 {
            if key != FORMAT_KEY {
                return Err(Error::Format(format!(
                    "line 1: expected '# {FORMAT_KEY}=...' first, found key {key:?}"
                )));
            }
            if value != FORMAT_VERSION.to_string() {
                return Err(Error::Format(format!(
                    "unsupported {FORMAT_KEY} version {value:?}, this build reads version {FORMAT_VERSION}"
                )));
            }
        } else if metadata.insert(key.clone(), value).is_some() {
            return Err(Error::Format(format!(
                "line {lineno}: duplicate metadata key {key:?}"
            )));
        }
        body_start += line.len();
    }
    if lineno == 0 {
        return Err(Error::Format(format!(
            "{}: missing '# {FORMAT_KEY}=...' metadata header",
            path.display()
        )));
    }

    let config = parse_config(&metadata)?;
    let extra_metadata: BTreeMap<String, String> = metadata
        .into_iter()
        .filter(|(k, _)| !CONFIG_KEYS.contains(&k.as_str()))
        .collect();

    let header_lines = lineno;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(&text.as_bytes()[body_start..]);

    {
        let header = reader
            .headers()
            .map_err(|e| Error::Format(format!("csv header: {e}")))?;
        if header.len() != FEATURE_LEN + 2 {
            return Err(Error::Format(format!(
                "csv header has {} columns, expected {}",
                header.len(),
                FEATURE_LEN + 2
            )));
        }
        if &header[0] != "label" || &header[1] != "source" {
            return Err(Error::Format(format!(
                "csv header must start with 'label,source', found {:?},{:?}",
                &header[0], &header[1]
            )));
        }
        for (i, field) in header.iter().skip(2).enumerate() {
            let expected = format!("f{i}");
            if field != expected {
                return Err(Error::Format(format!(
                    "csv header column {} is {field:?}, expected {expected:?}",
                    i + 2
                )));
            }
        }
    }

    let mut table = FeatureTable::new(config);
    table.extra_metadata = extra_metadata;
    for (idx, record) in reader.records().enumerate() {
        let rowno = header_lines + 2 + idx; // 1-based line number in the file
        let record = record.map_err(|e| Error::Format(format!("row {rowno}: {e}")))?;
        if record.len() != FEATURE_LEN + 2 {
            return Err(Error::Format(format!(
                "row {rowno}: has {} columns, expected {}",
                record.len(),
                FEATURE_LEN + 2
            )));
        }
        let mut values = Vec::with_capacity(FEATURE_LEN);
        for (col, field) in record.iter().skip(2).enumerate() {
            values.push(field.parse::<f64>().map_err(|_| {
                Error::Format(format!(
                    "row {rowno}, column f{col}: invalid float {field:?}"
                ))
            })?);
        }
        table.push_row(FeatureRow {
            label: record[0].to_string(),
            source: record[1].to_string(),
            values,
        })?;
    }
    Ok(table)
}
