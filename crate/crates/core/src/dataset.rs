//! Prediction records, the class/group vocabulary, and per-group confusion
//! matrices, together with their on-disk formats.
//!
//! Records are comma-delimited with a header naming the columns
//! `instance_id`, `y`, `y_hat`, `z` and `split` (any order, names matched
//! case-sensitively). Confusion matrices are TOML:
//!
//! ```toml
//! [schema]
//! classes = ["nurse", "surgeon"]
//! groups = ["female", "male"]
//! positive_class = "surgeon"   # optional
//!
//! [counts]
//! "female" = [
//!   [5, 1],
//!   [0, 4],
//! ]
//! "male" = [
//!   [3, 0],
//!   [2, 6],
//! ]
//! ```
//!
//! Each count block is a C×C matrix, row = true class and column = predicted
//! class, in schema order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Read;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Position, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSchema {
    class_names: Vec<String>,
    group_names: Vec<String>,
    positive_class: Option<usize>,
}

impl DatasetSchema {
    pub fn new(
        class_names: Vec<String>,
        group_names: Vec<String>,
        positive_class: Option<usize>,
    ) -> Result<Self> {
        check_names("class", &class_names)?;
        check_names("group", &group_names)?;
        if let Some(c) = positive_class {
            if c >= class_names.len() {
                return Err(Error::Schema(format!(
                    "positive class index {c} out of range for {} classes",
                    class_names.len()
                )));
            }
        }
        Ok(DatasetSchema {
            class_names,
            group_names,
            positive_class,
        })
    }

    /// Builds a schema from string slices; convenient in tests and fixtures.
    pub fn from_names(classes: &[&str], groups: &[&str]) -> Result<Self> {
        Self::new(
            classes.iter().map(|s| s.to_string()).collect(),
            groups.iter().map(|s| s.to_string()).collect(),
            None,
        )
    }

    pub fn with_positive_class(mut self, class: usize) -> Result<Self> {
        if class >= self.class_names.len() {
            return Err(Error::Schema(format!(
                "positive class index {class} out of range"
            )));
        }
        self.positive_class = Some(class);
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn num_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn positive_class(&self) -> Option<usize> {
        self.positive_class
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.group_names.iter().position(|n| n == name)
    }

    /// Parses a standalone schema file (the same keys as the `[schema]`
    /// block of a confusion file).
    pub fn parse(mut reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let raw: RawSchema = toml::from_str(&text).map_err(|e| toml_error(&text, &e))?;
        raw.into_schema(&text)
    }

    /// Writes the schema in the format accepted by [`DatasetSchema::parse`].
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        self.write_fields(&mut out);
        out
    }

    fn write_fields(&self, out: &mut String) {
        let _ = writeln!(out, "classes = {}", string_array(&self.class_names));
        let _ = writeln!(out, "groups = {}", string_array(&self.group_names));
        if let Some(c) = self.positive_class {
            let _ = writeln!(out, "positive_class = {}", quote(&self.class_names[c]));
        }
    }
}

fn check_names(kind: &str, names: &[String]) -> Result<()> {
    if names.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least 2 {kind} names, got {}",
            names.len()
        )));
    }
    let mut seen = HashSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Schema(format!("empty {kind} name")));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Schema(format!("duplicate {kind} name {name:?}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!(
                "unknown split {other:?} (expected train, dev or test)"
            )),
        }
    }
}

/// One labeled, predicted instance. Class and group fields are indices into
/// the schema the record was resolved against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub true_class: usize,
    pub predicted_class: usize,
    pub group: usize,
    pub split: Split,
}

const RECORD_COLUMNS: [&str; 5] = ["instance_id", "y", "y_hat", "z", "split"];

struct ColumnMap {
    index: [usize; 5],
}

impl ColumnMap {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let mut index = [usize::MAX; 5];
        for (i, name) in header.iter().enumerate() {
            if let Some(k) = RECORD_COLUMNS.iter().position(|c| *c == name) {
                if index[k] != usize::MAX {
                    return Err(Error::parse(
                        Position::field(1, i + 1),
                        format!("duplicate column {name:?}"),
                    ));
                }
                index[k] = i;
            }
        }
        for (k, col) in RECORD_COLUMNS.iter().enumerate() {
            if index[k] == usize::MAX {
                return Err(Error::parse(
                    Position::line(1),
                    format!("missing required column {col:?}"),
                ));
            }
        }
        Ok(ColumnMap { index })
    }
}

fn record_reader(reader: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::parse(
            Position::line(line),
            format!("expected {expected_len} fields, found {len}"),
        ),
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => Error::parse(Position::line(line), err.to_string()),
    }
}

/// Reads prediction records, resolving names against `schema`. Rows keep
/// their file order. An `instance_id` may repeat across splits but not
/// within one.
pub fn parse_records(reader: impl Read, schema: &DatasetSchema) -> Result<Vec<PredictionRecord>> {
    let mut rdr = record_reader(reader);
    let columns = ColumnMap::from_header(rdr.headers().map_err(csv_error)?)?;
    let mut seen: HashSet<(Split, String)> = HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |k: usize| (columns.index[k] + 1, &row[columns.index[k]]);

        let (f, id) = cell(0);
        if id.is_empty() {
            return Err(Error::parse(Position::field(line, f), "empty instance_id"));
        }
        let lookup_class = |k: usize| -> Result<usize> {
            let (f, name) = cell(k);
            schema.class_index(name).ok_or_else(|| Error::UnknownName {
                position: Position::field(line, f),
                kind: "class",
                name: name.to_string(),
            })
        };
        let true_class = lookup_class(1)?;
        let predicted_class = lookup_class(2)?;
        let (f, group_name) = cell(3);
        let group = schema
            .group_index(group_name)
            .ok_or_else(|| Error::UnknownName {
                position: Position::field(line, f),
                kind: "group",
                name: group_name.to_string(),
            })?;
        let (f, split_name) = cell(4);
        let split: Split = split_name
            .parse()
            .map_err(|m: String| Error::parse(Position::field(line, f), m))?;

        if !seen.insert((split, id.to_string())) {
            return Err(Error::parse(
                Position::field(line, columns.index[0] + 1),
                format!("duplicate instance_id {id:?} in split {}", split.as_str()),
            ));
        }
        records.push(PredictionRecord {
            instance_id: id.to_string(),
            true_class,
            predicted_class,
            group,
            split,
        });
    }
    Ok(records)
}

/// Builds a schema from the names that appear in a record file, sorted
/// lexicographically. Used when no explicit schema file is supplied.
pub fn infer_schema(reader: impl Read) -> Result<DatasetSchema> {
    let mut rdr = record_reader(reader);
    let columns = ColumnMap::from_header(rdr.headers().map_err(csv_error)?)?;
    let mut classes = std::collections::BTreeSet::new();
    let mut groups = std::collections::BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        classes.insert(row[columns.index[1]].to_string());
        classes.insert(row[columns.index[2]].to_string());
        groups.insert(row[columns.index[3]].to_string());
    }
    DatasetSchema::new(
        classes.into_iter().collect(),
        groups.into_iter().collect(),
        None,
    )
}

/// Writes records in the delimited record format.
pub fn write_records(records: &[PredictionRecord], schema: &DatasetSchema) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(RECORD_COLUMNS)
        .map_err(|e| Error::invalid(e.to_string()))?;
    for r in records {
        wtr.write_record([
            r.instance_id.as_str(),
            schema.class_names()[r.true_class].as_str(),
            schema.class_names()[r.predicted_class].as_str(),
            schema.group_names()[r.group].as_str(),
            r.split.as_str(),
        ])
        .map_err(|e| Error::invalid(e.to_string()))?;
    }
    wtr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// One C×C count matrix per protected group (row = true class, column =
/// predicted class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedConfusions {
    schema: DatasetSchema,
    counts: Vec<Vec<Vec<u64>>>,
}

impl GroupedConfusions {
    pub fn new(schema: DatasetSchema, counts: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        let c = schema.num_classes();
        if counts.len() != schema.num_groups() {
            return Err(Error::invalid(format!(
                "expected {} group matrices, got {}",
                schema.num_groups(),
                counts.len()
            )));
        }
        for (g, m) in counts.iter().enumerate() {
            if m.len() != c || m.iter().any(|row| row.len() != c) {
                return Err(Error::invalid(format!(
                    "matrix for group {:?} is not {c}x{c}",
                    schema.group_names()[g]
                )));
            }
        }
        Ok(GroupedConfusions { schema, counts })
    }

    pub fn zeros(schema: DatasetSchema) -> Self {
        let c = schema.num_classes();
        let counts = vec![vec![vec![0; c]; c]; schema.num_groups()];
        GroupedConfusions { schema, counts }
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    /// `counts()[g][true][predicted]`.
    pub fn counts(&self) -> &[Vec<Vec<u64>>] {
        &self.counts
    }

    pub fn group(&self, g: usize) -> &[Vec<u64>] {
        &self.counts[g]
    }

    pub(crate) fn increment(&mut self, group: usize, true_class: usize, predicted: usize) {
        self.counts[group][true_class][predicted] += 1;
    }

    pub fn group_total(&self, g: usize) -> u64 {
        self.counts[g].iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        (0..self.counts.len()).map(|g| self.group_total(g)).sum()
    }

    /// Element-wise sum of all group matrices.
    pub fn merged(&self) -> Vec<Vec<u64>> {
        let c = self.schema.num_classes();
        let mut out = vec![vec![0; c]; c];
        for m in &self.counts {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out[i][j] += v;
                }
            }
        }
        out
    }

    /// Serializes to the TOML confusion format. Output is deterministic and
    /// contains exactly G·C² counts.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        out.push_str("# rows = true class, columns = predicted class, in schema order\n");
        out.push_str("[schema]\n");
        self.schema.write_fields(&mut out);
        out.push_str("\n[counts]\n");
        for (g, m) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{} = [", quote(&self.schema.group_names()[g]));
            for row in m {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "  [{}],", cells.join(", "));
            }
            out.push_str("]\n");
        }
        out
    }
}

pub fn export_confusions(confusions: &GroupedConfusions) -> Vec<u8> {
    confusions.to_toml().into_bytes()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    classes: Spanned<Vec<String>>,
    groups: Spanned<Vec<String>>,
    positive_class: Option<Spanned<String>>,
}

impl RawSchema {
    fn into_schema(self, text: &str) -> Result<DatasetSchema> {
        let span = self.classes.span();
        let classes = self.classes.into_inner();
        let groups = self.groups.into_inner();
        let positive =
            match self.positive_class {
                Some(p) => {
                    let pspan = p.span();
                    let name = p.into_inner();
                    Some(classes.iter().position(|c| *c == name).ok_or_else(|| {
                        Error::UnknownName {
                            position: span_position(text, &pspan),
                            kind: "class",
                            name,
                        }
                    })?)
                }
                None => None,
            };
        DatasetSchema::new(classes, groups, positive).map_err(|e| match e {
            Error::Schema(msg) => Error::parse(span_position(text, &span), msg),
            other => other,
        })
    }
}

type SpannedMatrix = Spanned<Vec<Spanned<Vec<Spanned<i64>>>>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfusions {
    schema: RawSchema,
    counts: BTreeMap<String, SpannedMatrix>,
}

/// Parses the TOML confusion format. Errors carry the 1-based line and
/// column (reported as the field) of the offending value.
pub fn parse_confusions(mut reader: impl Read) -> Result<GroupedConfusions> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let raw: RawConfusions = toml::from_str(&text).map_err(|e| toml_error(&text, &e))?;
    let schema = raw.schema.into_schema(&text)?;
    let c = schema.num_classes();

    let mut blocks: HashMap<String, SpannedMatrix> = raw.counts.into_iter().collect();
    let mut counts = Vec::with_capacity(schema.num_groups());
    for name in schema.group_names() {
        let block = blocks
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("missing count block for group {name:?}")))?;
        let block_pos = span_position(&text, &block.span());
        let rows = block.into_inner();
        if rows.len() != c {
            return Err(Error::parse(
                block_pos,
                format!(
                    "shape mismatch for group {name:?}: expected {c} rows, found {}",
                    rows.len()
                ),
            ));
        }
        let mut matrix = Vec::with_capacity(c);
        for row in rows {
            let row_pos = span_position(&text, &row.span());
            let row = row.into_inner();
            if row.len() != c {
                return Err(Error::parse(
                    row_pos,
                    format!(
                        "shape mismatch for group {name:?}: expected {c} columns, found {}",
                        row.len()
                    ),
                ));
            }
            let mut out = Vec::with_capacity(c);
            for v in row {
                let pos = span_position(&text, &v.span());
                let v = v.into_inner();
                if v < 0 {
                    return Err(Error::parse(pos, format!("negative count {v}")));
                }
                out.push(v as u64);
            }
            matrix.push(out);
        }
        counts.push(matrix);
    }
    if let Some(extra) = blocks.keys().min() {
        return Err(Error::UnknownName {
            position: Position::line(line_of(&text, text.find(extra.as_str()).unwrap_or(0))),
            kind: "group",
            name: extra.clone(),
        });
    }
    GroupedConfusions::new(schema, counts)
}

fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let position = err
        .span()
        .map(|s| span_position(text, &s))
        .unwrap_or(Position::line(1));
    Error::parse(position, err.message().to_string())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn span_position(text: &str, span: &Range<usize>) -> Position {
    let offset = span.start.min(text.len());
    let line = line_of(text, offset);
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    Position::field(line, text[line_start..offset].chars().count() + 1)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn string_array(names: &[String]) -> String {
    let items: Vec<String> = names.iter().map(|n| quote(n)).collect();
    format!("[{}]", items.join(", "))
}
