//! Parsing and encoding of Adult-format tabular data into context vectors
//! and binary labels: one-hot categorical encoding, continuous
//! standardization, and missing-value imputation.
//!
//! The column schema is pluggable; [`Schema::adult`] ships the standard
//! 14-attribute census layout. Missing values are the literal `?` and are
//! imputed (median for continuous columns, mode for categorical ones) before
//! encoding, so downstream replay never aborts mid-run.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Context, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// Ordered attribute columns; the label column is implicit and last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new(columns: Vec<(String, ColumnKind)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument(
                "schema needs at least one column".into(),
            ));
        }
        Ok(Self { columns })
    }

    /// The 14-attribute Adult census schema with a binary income label.
    pub fn adult() -> Self {
        use ColumnKind::{Categorical, Continuous};
        let columns = [
            ("age", Continuous),
            ("workclass", Categorical),
            ("fnlwgt", Continuous),
            ("education", Categorical),
            ("education-num", Continuous),
            ("marital-status", Categorical),
            ("occupation", Categorical),
            ("relationship", Categorical),
            ("race", Categorical),
            ("sex", Categorical),
            ("capital-gain", Continuous),
            ("capital-loss", Continuous),
            ("hours-per-week", Continuous),
            ("native-country", Categorical),
        ]
        .into_iter()
        .map(|(name, kind)| (name.to_string(), kind))
        .collect();
        Self { columns }
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[(String, ColumnKind)] {
        &self.columns
    }
}

/// One unparsed data row: attribute strings plus the label string.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub fields: Vec<String>,
    pub label: String,
}

/// Parse comma-separated Adult-format text: one record per line, blank
/// lines skipped, `schema.num_columns() + 1` fields per line.
pub fn parse_adult<R: BufRead>(reader: R, schema: &Schema) -> Result<Vec<RawRecord>> {
    let expected = schema.num_columns() + 1;
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let mut fields = fields;
        let label = fields.pop().expect("field count checked");
        records.push(RawRecord { fields, label });
    }
    Ok(records)
}

/// Map an income label to {0, 1}; the published test split ends labels with
/// a period, which is accepted.
pub fn parse_label(label: &str) -> Result<u8> {
    match label.trim().trim_end_matches('.') {
        ">50K" => Ok(1),
        "<=50K" => Ok(0),
        other => Err(Error::InvalidArgument(format!(
            "unrecognized label value '{other}'"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ColumnEncoder {
    Continuous {
        mean: f64,
        sd: f64,
        impute: f64,
    },
    Categorical {
        /// Levels in order of first appearance in the fitting records.
        levels: Vec<String>,
        impute: String,
    },
}

/// Fitted encoding recipe: per-column statistics, level lists, and
/// imputation values. Deterministic given the fitting records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    columns: Vec<(String, ColumnEncoder)>,
    dim: usize,
}

impl EncoderSpec {
    /// Encoded context dimension: one slot per continuous column plus one
    /// per categorical level.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One name per encoded slot (`age`, `workclass=Private`, ...).
    pub fn slot_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim);
        for (name, encoder) in &self.columns {
            match encoder {
                ColumnEncoder::Continuous { .. } => names.push(name.clone()),
                ColumnEncoder::Categorical { levels, .. } => {
                    for level in levels {
                        names.push(format!("{name}={level}"));
                    }
                }
            }
        }
        names
    }
}

fn parse_numeric(column: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| {
        Error::InvalidArgument(format!("column {column}: cannot parse '{value}' as a number"))
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "column {column}: value '{value}' is not finite"
        )));
    }
    Ok(v)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Compute means, standard deviations (population formula), level lists, and
/// imputation values from the given records only.
///
/// A continuous column with zero variance gets its standard deviation
/// replaced by 1 so encoding stays defined; a categorical column that is all
/// missing gets a single synthetic `missing` level.
pub fn fit_encoder(records: &[RawRecord], schema: &Schema) -> Result<EncoderSpec> {
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit an encoder on zero records".into(),
        ));
    }
    for (i, rec) in records.iter().enumerate() {
        if rec.fields.len() != schema.num_columns() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!(
                    "record has {} fields, schema expects {}",
                    rec.fields.len(),
                    schema.num_columns()
                ),
            });
        }
    }

    let mut columns = Vec::with_capacity(schema.num_columns());
    let mut dim = 0;
    for (j, (name, kind)) in schema.columns().iter().enumerate() {
        let encoder = match kind {
            ColumnKind::Continuous => {
                let mut values = Vec::new();
                for rec in records {
                    let field = rec.fields[j].as_str();
                    if field == "?" {
                        continue;
                    }
                    values.push(parse_numeric(name, field)?);
                }
                if values.is_empty() {
                    ColumnEncoder::Continuous {
                        mean: 0.0,
                        sd: 1.0,
                        impute: 0.0,
                    }
                } else {
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
                    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
                    ColumnEncoder::Continuous {
                        mean,
                        sd,
                        impute: median(&values),
                    }
                }
            }
            ColumnKind::Categorical => {
                let mut levels: Vec<String> = Vec::new();
                let mut counts: Vec<usize> = Vec::new();
                for rec in records {
                    let field = rec.fields[j].as_str();
                    if field == "?" {
                        continue;
                    }
                    match levels.iter().position(|l| l == field) {
                        Some(k) => counts[k] += 1,
                        None => {
                            levels.push(field.to_string());
                            counts.push(1);
                        }
                    }
                }
                if levels.is_empty() {
                    ColumnEncoder::Categorical {
                        levels: vec!["missing".to_string()],
                        impute: "missing".to_string(),
                    }
                } else {
                    let mode = levels[counts
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                        .expect("non-empty levels")
                        .0]
                        .clone();
                    ColumnEncoder::Categorical {
                        levels,
                        impute: mode,
                    }
                }
            }
        };
        dim += match &encoder {
            ColumnEncoder::Continuous { .. } => 1,
            ColumnEncoder::Categorical { levels, .. } => levels.len(),
        };
        columns.push((name.clone(), encoder));
    }
    Ok(EncoderSpec { columns, dim })
}

/// Encode one record: continuous fields standardized, categoricals one-hot
/// (unseen levels become an all-zeros block), `?` imputed first.
pub fn encode(spec: &EncoderSpec, record: &RawRecord) -> Result<(Context, u8)> {
    if record.fields.len() != spec.columns.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.columns.len(),
            actual: record.fields.len(),
        });
    }
    let mut values = Vec::with_capacity(spec.dim);
    for ((name, encoder), field) in spec.columns.iter().zip(&record.fields) {
        match encoder {
            ColumnEncoder::Continuous { mean, sd, impute } => {
                let v = if field == "?" {
                    *impute
                } else {
                    parse_numeric(name, field)?
                };
                values.push((v - mean) / sd);
            }
            ColumnEncoder::Categorical { levels, impute } => {
                let effective = if field == "?" { impute.as_str() } else { field };
                let hot = levels.iter().position(|l| l == effective);
                for (k, _) in levels.iter().enumerate() {
                    values.push(if hot == Some(k) { 1.0 } else { 0.0 });
                }
            }
        }
    }
    let label = parse_label(&record.label)?;
    Ok((Context::new(values)?, label))
}

/// Encoded rows ready to replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedDataset {
    rows: Vec<(Context, u8)>,
    dim: usize,
}

impl EncodedDataset {
    pub fn new(rows: Vec<(Context, u8)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "encoded dataset needs at least one row".into(),
            ));
        }
        let dim = rows[0].0.dim();
        for (ctx, label) in &rows {
            if ctx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: ctx.dim(),
                });
            }
            if *label > 1 {
                return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
            }
        }
        Ok(Self { rows, dim })
    }

    pub fn rows(&self) -> &[(Context, u8)] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Encode every record with a fitted spec.
pub fn encode_dataset(spec: &EncoderSpec, records: &[RawRecord]) -> Result<EncodedDataset> {
    let rows = records
        .iter()
        .map(|rec| encode(spec, rec))
        .collect::<Result<Vec<_>>>()?;
    EncodedDataset::new(rows)
}

/// Write the columnar text cache: a header row naming every encoded slot
/// and its kind, then one encoded row per line.
pub fn write_cache<W: Write>(out: &mut W, spec: &EncoderSpec, dataset: &EncodedDataset) -> Result<()> {
    if spec.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            actual: dataset.dim(),
        });
    }
    let mut header: Vec<String> = Vec::with_capacity(spec.dim() + 1);
    for (name, encoder) in &spec.columns {
        match encoder {
            ColumnEncoder::Continuous { .. } => header.push(format!("{name}:continuous")),
            ColumnEncoder::Categorical { levels, .. } => {
                for level in levels {
                    header.push(format!("{name}={level}:onehot"));
                }
            }
        }
    }
    header.push("label:label".to_string());
    writeln!(out, "{}", header.join("\t"))?;
    for (ctx, label) in dataset.rows() {
        let mut line = String::new();
        for v in ctx.values() {
            line.push_str(&format!("{v}"));
            line.push('\t');
        }
        line.push_str(&format!("{label}"));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Read a cache produced by [`write_cache`].
pub fn read_cache<R: BufRead>(reader: R) -> Result<EncodedDataset> {
    let mut lines = reader.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            line: 1,
            message: "empty cache file".into(),
        });
    };
    let header = header?;
    let tokens: Vec<&str> = header.trim_end().split('\t').collect();
    if tokens.len() < 2 || tokens.last() != Some(&"label:label") {
        return Err(Error::Parse {
            line: 1,
            message: "cache header must end with 'label:label'".into(),
        });
    }
    for (i, token) in tokens[..tokens.len() - 1].iter().enumerate() {
        if !(token.ends_with(":continuous") || token.ends_with(":onehot")) {
            return Err(Error::Parse {
                line: 1,
                message: format!("slot {i} has an unrecognized kind: '{token}'"),
            });
        }
    }
    let dim = tokens.len() - 1;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split('\t').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", dim + 1, fields.len()),
            });
        }
        let mut values = Vec::with_capacity(dim);
        for f in &fields[..dim] {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("cannot parse '{f}' as a number"),
            })?;
            values.push(v);
        }
        let label: u8 = fields[dim].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("cannot parse label '{}'", fields[dim]),
        })?;
        rows.push((Context::new(values)?, label));
    }
    EncodedDataset::new(rows)
}
