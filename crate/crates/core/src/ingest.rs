//! Plain-text dataset and feature-table I/O.
//!
//! Every file in the toolchain shares one envelope so a single parser core
//! serves them all:
//!
//! * UTF-8 text, LF line endings (carriage returns are rejected),
//! * leading metadata lines of the form `# key=value`,
//! * exactly one column-header line naming the fields,
//! * data rows with `,` as the field delimiter, no quoting.
//!
//! Concrete formats:
//!
//! | file            | required header keys                      | columns                          |
//! |-----------------|-------------------------------------------|----------------------------------|
//! | dataset manifest| —                                         | `subject_id,ppg,activity,labels` |
//! | PPG recording   | `subject_id`, `fs_hz`, `age`, `gender`    | `value`                          |
//! | activity counts | `subject_id`                              | `epoch,count`                    |
//! | stage labels    | `subject_id`                              | `epoch,stage`                    |
//! | feature table   | `subject_id`, `age`, `gender`             | `epoch,hr_bpm,hrv_s,act,label`   |
//! | feature set     | `rejection` (`applied` or `deferred`)     | `subject_id,features`            |
//!
//! Manifest paths are resolved relative to the manifest's own directory, and
//! every referenced file must exist at load time. Unknown `#` keys are
//! ignored so files stay forward compatible.
//!
//! Loading a subject truncates the PPG to a whole number of 30 s epochs by
//! dropping trailing samples (never leading ones); after truncation the
//! label and activity files must supply exactly one row per remaining epoch.
//!
//! Feature-table floats are written with [`std::fmt::Display`], which for
//! `f64` produces the shortest string that parses back to the identical bit
//! pattern, so a write/read cycle is lossless. PPG samples are quantised to
//! four decimal places on write.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::features::{subject_from_matrix, SubjectWindows};
use crate::model::{
    epoch_samples, ActivitySeries, Demographics, FeatureMatrix, Gender, PpgRecord, SleepWakeLabel,
    StageLabel, SubjectRecord,
};

const MANIFEST_COLUMNS: &str = "subject_id,ppg,activity,labels";
const PPG_COLUMNS: &str = "value";
const ACTIVITY_COLUMNS: &str = "epoch,count";
const LABEL_COLUMNS: &str = "epoch,stage";
const FEATURE_COLUMNS: &str = "epoch,hr_bpm,hrv_s,act,label";
const FEATURE_SET_COLUMNS: &str = "subject_id,features";

/// Decimal places used when writing PPG samples.
const PPG_DECIMALS: usize = 4;

// ---------------------------------------------------------------------------
// Shared text-table envelope
// ---------------------------------------------------------------------------

/// A parsed file: `# key=value` metadata, a column header, and raw data rows
/// tagged with their 1-based line numbers.
#[derive(Debug)]
struct TextTable<'a> {
    path: PathBuf,
    header: Vec<(usize, String, &'a str)>,
    columns: &'a str,
    columns_line: usize,
    rows: Vec<(usize, &'a str)>,
}

fn parse_table<'a>(path: &Path, text: &'a str) -> Result<TextTable<'a>> {
    if let Some(pos) = text.find('\r') {
        let line_no = text[..pos].matches('\n').count() + 1;
        return Err(Error::parse(
            path,
            line_no,
            "carriage return found; files must use LF line endings",
        ));
    }
    let mut header = Vec::new();
    let mut columns: Option<(usize, &str)> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if columns.is_some() {
                return Err(Error::parse(
                    path,
                    line_no,
                    "metadata lines must precede the column header",
                ));
            }
            let rest = rest.trim();
            let Some((key, value)) = rest.split_once('=') else {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("metadata line is not `key=value`: `{rest}`"),
                ));
            };
            header.push((line_no, key.trim().to_string(), value.trim()));
        } else if line.is_empty() {
            return Err(Error::parse(path, line_no, "unexpected empty line"));
        } else if columns.is_none() {
            columns = Some((line_no, line));
        } else {
            rows.push((line_no, line));
        }
    }
    let Some((columns_line, columns)) = columns else {
        return Err(Error::parse(path, 1, "missing column header line"));
    };
    Ok(TextTable {
        path: path.to_path_buf(),
        header,
        columns,
        columns_line,
        rows,
    })
}

impl<'a> TextTable<'a> {
    fn expect_columns(&self, expected: &str) -> Result<()> {
        if self.columns != expected {
            return Err(Error::parse(
                &self.path,
                self.columns_line,
                format!(
                    "expected column header `{expected}`, found `{}`",
                    self.columns
                ),
            ));
        }
        Ok(())
    }

    /// Look up a metadata key, returning its value and the line it came from.
    fn get(&self, key: &str) -> Option<(usize, &'a str)> {
        self.header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, v)| (*line, *v))
    }

    fn required(&self, key: &str) -> Result<(usize, &'a str)> {
        self.get(key).ok_or_else(|| Error::MissingHeaderKey {
            path: self.path.clone(),
            key: key.to_string(),
        })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(&self.path, line, message)
    }

    /// Split a data row into exactly `n` fields.
    fn fields(&self, line: usize, row: &'a str, n: usize) -> Result<Vec<&'a str>> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != n {
            return Err(self.err(
                line,
                format!("expected {n} comma-separated fields, got {}", fields.len()),
            ));
        }
        Ok(fields)
    }

    fn parse_f64(&self, line: usize, name: &str, raw: &str) -> Result<f64> {
        raw.trim()
            .parse::<f64>()
            .map_err(|_| self.err(line, format!("invalid {name} value `{raw}`")))
    }

    fn parse_usize(&self, line: usize, name: &str, raw: &str) -> Result<usize> {
        raw.trim()
            .parse::<usize>()
            .map_err(|_| self.err(line, format!("invalid {name} value `{raw}`")))
    }

    /// Parse `epoch` as the row ordinal and insist it matches `expected`,
    /// catching dropped or duplicated rows.
    fn parse_ordinal(&self, line: usize, raw: &str, expected: usize) -> Result<()> {
        let value = self.parse_usize(line, "epoch", raw)?;
        if value != expected {
            return Err(self.err(
                line,
                format!("epoch index {value} out of order (expected {expected})"),
            ));
        }
        Ok(())
    }

    fn demographics(&self) -> Result<Demographics> {
        let (age_line, age_raw) = self.required("age")?;
        let age = age_raw
            .parse::<u32>()
            .map_err(|_| self.err(age_line, format!("invalid age value `{age_raw}`")))?;
        let (gender_line, gender_raw) = self.required("gender")?;
        let gender = Gender::parse(gender_raw)
            .ok_or_else(|| self.err(gender_line, format!("unknown gender `{gender_raw}`")))?;
        Ok(Demographics { age, gender })
    }

    /// Require the `subject_id` header to match the id the manifest promised.
    fn expect_subject(&self, expected: &str) -> Result<()> {
        let (line, id) = self.required("subject_id")?;
        if id != expected {
            return Err(self.err(
                line,
                format!("file belongs to subject `{id}`, expected `{expected}`"),
            ));
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Reject subject ids that cannot double as file-name stems.
fn validate_subject_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "subject id `{id}` is invalid; use ASCII letters, digits, `_`, `-`, `.`"
        )))
    }
}

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

/// One manifest row with its referenced files resolved against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub ppg: PathBuf,
    pub activity: PathBuf,
    pub labels: PathBuf,
}

/// A validated dataset manifest: unique subject ids, every referenced file
/// present on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = read_text(path)?;
    let table = parse_table(path, &text)?;
    table.expect_columns(MANIFEST_COLUMNS)?;
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(table.rows.len());
    for &(line, row) in &table.rows {
        let fields = table.fields(line, row, 4)?;
        let subject_id = fields[0].trim().to_string();
        if subject_id.is_empty() {
            return Err(table.err(line, "empty subject id"));
        }
        if !seen.insert(subject_id.clone()) {
            return Err(Error::DuplicateSubject {
                subject: subject_id,
            });
        }
        let entry = ManifestEntry {
            subject_id: subject_id.clone(),
            ppg: dir.join(fields[1].trim()),
            activity: dir.join(fields[2].trim()),
            labels: dir.join(fields[3].trim()),
        };
        for file in [&entry.ppg, &entry.activity, &entry.labels] {
            if !file.is_file() {
                return Err(Error::MissingFile {
                    subject: subject_id,
                    path: file.clone(),
                });
            }
        }
        entries.push(entry);
    }
    Ok(DatasetManifest {
        path: path.to_path_buf(),
        entries,
    })
}

/// Write a dataset manifest. Paths are stored exactly as given, so callers
/// normally pass file names relative to the manifest's directory.
pub fn write_manifest(path: &Path, rows: &[(String, String, String, String)]) -> Result<()> {
    let mut out = String::new();
    out.push_str(MANIFEST_COLUMNS);
    out.push('\n');
    for (id, ppg, activity, labels) in rows {
        validate_subject_id(id)?;
        let _ = writeln!(out, "{id},{ppg},{activity},{labels}");
    }
    write_text(path, &out)
}

// ---------------------------------------------------------------------------
// Per-subject recordings
// ---------------------------------------------------------------------------

fn parse_ppg(path: &Path, text: &str, expected_id: &str) -> Result<(PpgRecord, Demographics)> {
    let table = parse_table(path, text)?;
    table.expect_columns(PPG_COLUMNS)?;
    table.expect_subject(expected_id)?;
    let (fs_line, fs_raw) = table.required("fs_hz")?;
    let fs_hz = table.parse_f64(fs_line, "fs_hz", fs_raw)?;
    let demographics = table.demographics()?;
    let mut samples = Vec::with_capacity(table.rows.len());
    for &(line, row) in &table.rows {
        let fields = table.fields(line, row, 1)?;
        samples.push(table.parse_f64(line, "sample", fields[0])?);
    }
    let record = PpgRecord::new(expected_id, fs_hz, samples)?;
    Ok((record, demographics))
}

fn parse_activity(path: &Path, text: &str, expected_id: &str) -> Result<ActivitySeries> {
    let table = parse_table(path, text)?;
    table.expect_columns(ACTIVITY_COLUMNS)?;
    table.expect_subject(expected_id)?;
    let mut counts = Vec::with_capacity(table.rows.len());
    for (ordinal, &(line, row)) in table.rows.iter().enumerate() {
        let fields = table.fields(line, row, 2)?;
        table.parse_ordinal(line, fields[0], ordinal)?;
        counts.push(table.parse_f64(line, "count", fields[1])?);
    }
    ActivitySeries::new(counts)
}

fn parse_labels(path: &Path, text: &str, expected_id: &str) -> Result<Vec<StageLabel>> {
    let table = parse_table(path, text)?;
    table.expect_columns(LABEL_COLUMNS)?;
    table.expect_subject(expected_id)?;
    let mut stages = Vec::with_capacity(table.rows.len());
    for (ordinal, &(line, row)) in table.rows.iter().enumerate() {
        let fields = table.fields(line, row, 2)?;
        table.parse_ordinal(line, fields[0], ordinal)?;
        let raw = fields[1].trim();
        let stage = StageLabel::parse(raw)
            .ok_or_else(|| table.err(line, format!("unknown stage label `{raw}`")))?;
        stages.push(stage);
    }
    Ok(stages)
}

/// Load one subject's recording triple, truncating the PPG to whole epochs.
pub fn load_subject(entry: &ManifestEntry) -> Result<SubjectRecord> {
    let ppg_text = read_text(&entry.ppg)?;
    let (ppg, demographics) = parse_ppg(&entry.ppg, &ppg_text, &entry.subject_id)?;
    drop(ppg_text);
    let activity_text = read_text(&entry.activity)?;
    let activity = parse_activity(&entry.activity, &activity_text, &entry.subject_id)?;
    let labels_text = read_text(&entry.labels)?;
    let stages = parse_labels(&entry.labels, &labels_text, &entry.subject_id)?;

    let whole = ppg.whole_epochs();
    let keep = whole * epoch_samples(ppg.fs_hz());
    let ppg = if keep < ppg.len() {
        let mut samples = ppg.samples().to_vec();
        samples.truncate(keep);
        PpgRecord::new(entry.subject_id.clone(), ppg.fs_hz(), samples)?
    } else {
        ppg
    };
    if stages.len() != whole || activity.len() != whole {
        return Err(Error::EpochMismatch {
            subject: entry.subject_id.clone(),
            ppg_epochs: whole,
            labels: stages.len(),
            activity: activity.len(),
        });
    }
    SubjectRecord::new(demographics, ppg, activity, stages)
}

/// Load every subject in manifest order.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Vec<SubjectRecord>> {
    manifest.entries.iter().map(load_subject).collect()
}

pub fn write_ppg(path: &Path, record: &PpgRecord, demographics: &Demographics) -> Result<()> {
    validate_subject_id(record.subject_id())?;
    let mut out = String::with_capacity(record.len() * 8 + 128);
    let _ = writeln!(out, "# subject_id={}", record.subject_id());
    let _ = writeln!(out, "# fs_hz={}", record.fs_hz());
    let _ = writeln!(out, "# age={}", demographics.age);
    let _ = writeln!(out, "# gender={}", demographics.gender.as_str());
    out.push_str(PPG_COLUMNS);
    out.push('\n');
    for sample in record.samples() {
        let _ = writeln!(out, "{sample:.*}", PPG_DECIMALS);
    }
    write_text(path, &out)
}

pub fn write_activity(path: &Path, subject_id: &str, series: &ActivitySeries) -> Result<()> {
    validate_subject_id(subject_id)?;
    let mut out = String::new();
    let _ = writeln!(out, "# subject_id={subject_id}");
    out.push_str(ACTIVITY_COLUMNS);
    out.push('\n');
    for (epoch, count) in series.counts().iter().enumerate() {
        let _ = writeln!(out, "{epoch},{count}");
    }
    write_text(path, &out)
}

pub fn write_labels(path: &Path, subject_id: &str, stages: &[StageLabel]) -> Result<()> {
    validate_subject_id(subject_id)?;
    let mut out = String::new();
    let _ = writeln!(out, "# subject_id={subject_id}");
    out.push_str(LABEL_COLUMNS);
    out.push('\n');
    for (epoch, stage) in stages.iter().enumerate() {
        let _ = writeln!(out, "{epoch},{}", stage.as_str());
    }
    write_text(path, &out)
}

// ---------------------------------------------------------------------------
// Feature tables
// ---------------------------------------------------------------------------

pub fn write_feature_table(
    path: &Path,
    matrix: &FeatureMatrix,
    demographics: &Demographics,
) -> Result<()> {
    validate_subject_id(matrix.subject_id())?;
    let mut out = String::new();
    let _ = writeln!(out, "# subject_id={}", matrix.subject_id());
    let _ = writeln!(out, "# age={}", demographics.age);
    let _ = writeln!(out, "# gender={}", demographics.gender.as_str());
    out.push_str(FEATURE_COLUMNS);
    out.push('\n');
    for (i, row) in matrix.rows().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            matrix.epoch_index()[i],
            row[0],
            row[1],
            row[2],
            matrix.labels()[i].as_str()
        );
    }
    write_text(path, &out)
}

fn parse_feature_table(path: &Path, text: &str) -> Result<(FeatureMatrix, Demographics)> {
    let table = parse_table(path, text)?;
    table.expect_columns(FEATURE_COLUMNS)?;
    let (_, subject_id) = table.required("subject_id")?;
    let demographics = table.demographics()?;
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut epoch_index = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    for &(line, row) in &table.rows {
        let fields = table.fields(line, row, 5)?;
        epoch_index.push(table.parse_usize(line, "epoch", fields[0])?);
        let mut values = [0.0_f64; 3];
        for (slot, (name, raw)) in values.iter_mut().zip(
            ["hr_bpm", "hrv_s", "act"]
                .iter()
                .zip(&fields[1..4])
                .map(|(n, r)| (*n, *r)),
        ) {
            let value = table.parse_f64(line, name, raw)?;
            if !value.is_finite() {
                return Err(table.err(line, format!("non-finite {name} value `{raw}`")));
            }
            *slot = value;
        }
        rows.push(values);
        let raw = fields[4].trim();
        let label = SleepWakeLabel::parse(raw)
            .ok_or_else(|| table.err(line, format!("unknown sleep/wake label `{raw}`")))?;
        labels.push(label);
    }
    let matrix = FeatureMatrix::new(subject_id, rows, epoch_index, labels)?;
    Ok((matrix, demographics))
}

pub fn read_feature_table(path: &Path) -> Result<(FeatureMatrix, Demographics)> {
    let text = read_text(path)?;
    parse_feature_table(path, &text)
}

// ---------------------------------------------------------------------------
// Feature sets (a manifest of per-subject feature tables)
// ---------------------------------------------------------------------------

/// File name of the feature-set manifest inside its directory.
pub const FEATURE_SET_MANIFEST: &str = "features.csv";

/// A cohort of extracted features plus whether window rejection has already
/// been applied (`applied`) or is left to the evaluation protocol
/// (`deferred`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub rejection_applied: bool,
    pub subjects: Vec<SubjectWindows>,
    /// The per-subject table files backing `subjects`, in manifest order.
    pub table_paths: Vec<PathBuf>,
}

/// Write per-subject feature tables plus their manifest into `dir`.
/// Returns the manifest path.
pub fn write_feature_set(
    dir: &Path,
    cohort: &[SubjectWindows],
    rejection_applied: bool,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    let _ = writeln!(
        manifest,
        "# rejection={}",
        if rejection_applied {
            "applied"
        } else {
            "deferred"
        }
    );
    manifest.push_str(FEATURE_SET_COLUMNS);
    manifest.push('\n');
    for subject in cohort {
        let matrix = crate::features::assemble_matrix(subject)?;
        let file = format!("{}.features.csv", subject.subject_id);
        write_feature_table(&dir.join(&file), &matrix, &subject.demographics)?;
        let _ = writeln!(manifest, "{},{file}", subject.subject_id);
    }
    let manifest_path = dir.join(FEATURE_SET_MANIFEST);
    write_text(&manifest_path, &manifest)?;
    Ok(manifest_path)
}

pub fn read_feature_set(manifest_path: &Path) -> Result<FeatureSet> {
    let text = read_text(manifest_path)?;
    let table = parse_table(manifest_path, &text)?;
    table.expect_columns(FEATURE_SET_COLUMNS)?;
    let (tag_line, tag) = table.required("rejection")?;
    let rejection_applied = match tag {
        "applied" => true,
        "deferred" => false,
        other => {
            return Err(table.err(
                tag_line,
                format!("unknown rejection tag `{other}` (expected `applied` or `deferred`)"),
            ))
        }
    };
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let mut seen = BTreeSet::new();
    let mut subjects = Vec::with_capacity(table.rows.len());
    let mut table_paths = Vec::with_capacity(table.rows.len());
    for &(line, row) in &table.rows {
        let fields = table.fields(line, row, 2)?;
        let subject_id = fields[0].trim().to_string();
        if subject_id.is_empty() {
            return Err(table.err(line, "empty subject id"));
        }
        if !seen.insert(subject_id.clone()) {
            return Err(Error::DuplicateSubject {
                subject: subject_id,
            });
        }
        let file = dir.join(fields[1].trim());
        if !file.is_file() {
            return Err(Error::MissingFile {
                subject: subject_id,
                path: file,
            });
        }
        let (matrix, demographics) = read_feature_table(&file)?;
        if matrix.subject_id() != subject_id {
            return Err(table.err(
                line,
                format!(
                    "feature table belongs to subject `{}`, expected `{subject_id}`",
                    matrix.subject_id()
                ),
            ));
        }
        subjects.push(subject_from_matrix(&matrix, demographics));
        table_paths.push(file);
    }
    Ok(FeatureSet {
        rejection_applied,
        subjects,
        table_paths,
    })
}
