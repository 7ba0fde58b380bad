//! Loading classifier outputs and critic responses from delimited text.
//!
//! Two input files are joined on a record id:
//!
//! * a profiles file, one row per audited input, carrying the system's
//!   output and one column per sensitive attribute;
//! * a responses file, one row per `(critic, record)` answer.
//!
//! Column names and value dictionaries come from a [`SchemaConfig`] (TOML).
//! Multi-attribute partitions are flattened row-major: the last attribute
//! varies fastest, so with `[race, gender]` the groups are
//! `race0/gender0, race0/gender1, race1/gender0, ...`.
//!
//! The canonical interchange format is one row per audit record with the
//! header `critic_id,record_id,group_index,y,z,s`; `z` is empty when unknown.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{derive_disagreement, AuditRecord, CriticFeedback, GroupPartition, LabelSpace};

/// Decile threshold used when no label dictionary is configured.
pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 5.0;

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Unknown attribute or response tokens are errors when set; otherwise
    /// the offending rows are skipped and counted.
    #[serde(default = "default_true")]
    pub strict: bool,
    pub labels: LabelConfig,
    pub profiles: ProfileSchema,
    pub responses: ResponseSchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    /// Display names; the label space size is their count.
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSchema {
    pub record_id: String,
    pub system_label: String,
    /// Raw value -> label index. When absent the column is read as a number
    /// and binarized with `binarize_threshold` (requires two labels).
    #[serde(default)]
    pub system_label_map: Option<BTreeMap<String, usize>>,
    #[serde(default)]
    pub binarize_threshold: Option<f64>,
    /// Optional pass-through column (e.g. observed outcome); never used by
    /// any notion.
    #[serde(default)]
    pub truth: Option<String>,
    pub attributes: Vec<AttributeSchema>,
    #[serde(default)]
    pub non_sensitive_group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSchema {
    pub column: String,
    /// Level names, in index order.
    pub levels: Vec<String>,
    /// Raw cell value -> level index.
    pub values: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSchema {
    pub critic_id: String,
    pub record_id: String,
    pub response: String,
    /// Raw answer -> label index (e.g. `yes = 1`, `no = 0`).
    pub response_map: BTreeMap<String, usize>,
}

/// How raw system-label cells become label indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LabelMapping {
    Threshold { threshold: f64 },
    Dictionary { values: BTreeMap<String, usize> },
}

impl SchemaConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = Self::from_toml(&text).map_err(|message| Error::Config {
            path: path.to_owned(),
            message,
        })?;
        cfg.check().map_err(|message| Error::Config {
            path: path.to_owned(),
            message,
        })?;
        Ok(cfg)
    }

    /// Structural checks that serde cannot express.
    pub fn check(&self) -> std::result::Result<(), String> {
        let k = self.labels.names.len();
        LabelSpace::new(k).map_err(|e| e.to_string())?;
        if self.profiles.attributes.is_empty() {
            return Err("profiles.attributes must name at least one attribute".into());
        }
        for a in &self.profiles.attributes {
            if a.levels.is_empty() {
                return Err(format!("attribute {:?} has no levels", a.column));
            }
            if let Some((raw, &i)) = a.values.iter().find(|(_, &i)| i >= a.levels.len()) {
                return Err(format!(
                    "attribute {:?}: value {raw:?} maps to level {i} but only {} levels exist",
                    a.column,
                    a.levels.len()
                ));
            }
        }
        match &self.profiles.system_label_map {
            Some(map) => {
                if let Some((raw, &i)) = map.iter().find(|(_, &i)| i >= k) {
                    return Err(format!("system_label_map: {raw:?} maps to label {i} >= {k}"));
                }
                if self.profiles.binarize_threshold.is_some() {
                    return Err("set either system_label_map or binarize_threshold, not both".into());
                }
            }
            None if k != 2 => {
                return Err("binarized system labels need exactly two label names".into())
            }
            None => {}
        }
        if let Some((raw, &i)) = self.responses.response_map.iter().find(|(_, &i)| i >= k) {
            return Err(format!("response_map: {raw:?} maps to label {i} >= {k}"));
        }
        self.partition().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn label_space(&self) -> Result<LabelSpace> {
        LabelSpace::new(self.labels.names.len())
    }

    pub fn label_mapping(&self) -> LabelMapping {
        match &self.profiles.system_label_map {
            Some(values) => LabelMapping::Dictionary {
                values: values.clone(),
            },
            None => LabelMapping::Threshold {
                threshold: self
                    .profiles
                    .binarize_threshold
                    .unwrap_or(DEFAULT_BINARIZE_THRESHOLD),
            },
        }
    }

    /// Cartesian product of attribute levels, last attribute fastest.
    pub fn partition(&self) -> Result<GroupPartition> {
        let mut names = vec![String::new()];
        for (i, attr) in self.profiles.attributes.iter().enumerate() {
            names = names
                .iter()
                .flat_map(|prefix| {
                    attr.levels.iter().map(move |level| {
                        if i == 0 {
                            level.clone()
                        } else {
                            format!("{prefix}/{level}")
                        }
                    })
                })
                .collect();
        }
        GroupPartition::new(names, self.profiles.non_sensitive_group)
    }

    /// Flat group index for one level index per attribute.
    pub fn group_index(&self, levels: &[usize]) -> usize {
        self.profiles
            .attributes
            .iter()
            .zip(levels)
            .fold(0, |acc, (attr, &l)| acc * attr.levels.len() + l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub record_id: String,
    /// Raw attribute values, in schema order.
    pub attributes: Vec<String>,
    pub group: usize,
    pub system_label: usize,
    pub truth: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub critic_id: String,
    pub record_id: String,
    pub response: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    pub labels: LabelSpace,
    pub groups: GroupPartition,
    pub rows: Vec<ProfileRow>,
    /// Rows dropped in non-strict mode.
    pub skipped: usize,
}

struct Table {
    path: PathBuf,
    headers: csv::StringRecord,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path, delimiter: char) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_reader(path, file, delimiter)
    }

    fn from_reader(path: &Path, reader: impl Read, delimiter: char) -> Result<Self> {
        let delim = u8::try_from(delimiter).map_err(|_| Error::Config {
            path: path.to_owned(),
            message: format!("delimiter {delimiter:?} is not a single byte"),
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delim)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_owned(),
                row: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec));
        }
        Ok(Self {
            path: path.to_owned(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                path: self.path.clone(),
                row: 1,
                message: format!("missing column {name:?}"),
            })
    }

    fn err(&self, row: usize, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            row,
            message,
        }
    }
}

/// Reads the profiles file and maps every row onto a group and label.
pub fn load_profiles(path: &Path, schema: &SchemaConfig) -> Result<ProfileSet> {
    let table = Table::read(path, schema.delimiter)?;
    parse_profiles(&table, schema)
}

fn parse_profiles(table: &Table, schema: &SchemaConfig) -> Result<ProfileSet> {
    let labels = schema.label_space()?;
    let groups = schema.partition()?;
    let ps = &schema.profiles;
    let id_col = table.column(&ps.record_id)?;
    let label_col = table.column(&ps.system_label)?;
    let truth_col = ps.truth.as_deref().map(|c| table.column(c)).transpose()?;
    let attr_cols = ps
        .attributes
        .iter()
        .map(|a| table.column(&a.column))
        .collect::<Result<Vec<_>>>()?;
    let mapping = schema.label_mapping();

    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut skipped = 0;
    'rows: for (line, rec) in &table.rows {
        let line = *line;
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let record_id = cell(id_col).to_string();
        if record_id.is_empty() {
            return Err(table.err(line, "empty record id".into()));
        }
        if !seen.insert(record_id.clone()) {
            return Err(table.err(line, format!("duplicate record id {record_id:?}")));
        }
        let mut levels = Vec::with_capacity(attr_cols.len());
        for (attr, &col) in ps.attributes.iter().zip(&attr_cols) {
            match attr.values.get(cell(col)) {
                Some(&l) => levels.push(l),
                None if schema.strict => {
                    return Err(table.err(
                        line,
                        format!("unknown {} value {:?}", attr.column, cell(col)),
                    ))
                }
                None => {
                    skipped += 1;
                    continue 'rows;
                }
            }
        }
        let raw_label = cell(label_col);
        let system_label = match &mapping {
            LabelMapping::Dictionary { values } => *values.get(raw_label).ok_or_else(|| {
                table.err(line, format!("unknown system label {raw_label:?}"))
            })?,
            LabelMapping::Threshold { threshold } => {
                let score: f64 = raw_label.parse().map_err(|_| {
                    table.err(line, format!("system label {raw_label:?} is not numeric"))
                })?;
                usize::from(score >= *threshold)
            }
        };
        rows.push(ProfileRow {
            record_id,
            attributes: attr_cols.iter().map(|&c| cell(c).to_string()).collect(),
            group: schema.group_index(&levels),
            system_label,
            truth: truth_col.map(|c| cell(c).to_string()),
        });
    }
    Ok(ProfileSet {
        labels,
        groups,
        rows,
        skipped,
    })
}

/// Reads the responses file. Unknown answers are errors in strict mode and
/// skipped otherwise.
pub fn load_responses(path: &Path, schema: &SchemaConfig) -> Result<Vec<ResponseRow>> {
    let table = Table::read(path, schema.delimiter)?;
    parse_responses(&table, schema)
}

fn parse_responses(table: &Table, schema: &SchemaConfig) -> Result<Vec<ResponseRow>> {
    let rs = &schema.responses;
    let critic_col = table.column(&rs.critic_id)?;
    let id_col = table.column(&rs.record_id)?;
    let resp_col = table.column(&rs.response)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let critic_id = cell(critic_col).to_string();
        let record_id = cell(id_col).to_string();
        let raw = cell(resp_col);
        let response = match rs.response_map.get(raw) {
            Some(&z) => z,
            None if schema.strict => {
                return Err(table.err(*line, format!("unknown response {raw:?}")))
            }
            None => continue,
        };
        if !seen.insert((critic_id.clone(), record_id.clone())) {
            return Err(table.err(
                *line,
                format!("duplicate response by {critic_id:?} to {record_id:?}"),
            ));
        }
        out.push(ResponseRow {
            critic_id,
            record_id,
            response,
        });
    }
    Ok(out)
}

/// Groups responses by critic (sorted by critic id, responses in file
/// order) and derives each disagreement bit from the profile's system label.
pub fn join_responses(profiles: &ProfileSet, responses: &[ResponseRow]) -> Result<Vec<CriticFeedback>> {
    let index: HashMap<&str, &ProfileRow> = profiles
        .rows
        .iter()
        .map(|r| (r.record_id.as_str(), r))
        .collect();
    let dangling: Vec<String> = responses
        .iter()
        .filter(|r| !index.contains_key(r.record_id.as_str()))
        .map(|r| format!("{}/{}", r.critic_id, r.record_id))
        .collect();
    if !dangling.is_empty() {
        let more = dangling.len().saturating_sub(10);
        let mut msg = format!(
            "{} responses reference unknown record ids: {}",
            dangling.len(),
            dangling[..dangling.len().min(10)].join(", ")
        );
        if more > 0 {
            msg.push_str(&format!(", and {more} more"));
        }
        return Err(Error::Input(msg));
    }
    let mut by_critic: BTreeMap<&str, (Vec<String>, Vec<AuditRecord>)> = BTreeMap::new();
    for r in responses {
        let p = index[r.record_id.as_str()];
        let s = derive_disagreement(profiles.labels, p.system_label, r.response)?;
        let entry = by_critic.entry(r.critic_id.as_str()).or_default();
        entry.0.push(r.record_id.clone());
        entry.1.push(AuditRecord {
            group: p.group,
            system_label: p.system_label,
            disagreement: s,
            intrinsic_label: Some(r.response),
        });
    }
    by_critic
        .into_iter()
        .map(|(id, (ids, recs))| CriticFeedback::new(id, ids, recs))
        .collect()
}

/// Writes the canonical interchange table.
pub fn write_interchange<W: Write>(writer: W, critics: &[CriticFeedback]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["critic_id", "record_id", "group_index", "y", "z", "s"])?;
    for c in critics {
        for (id, r) in c.iter() {
            let z = r.intrinsic_label.map(|z| z.to_string()).unwrap_or_default();
            w.write_record([
                c.critic_id(),
                id,
                &r.group.to_string(),
                &r.system_label.to_string(),
                &z,
                if r.disagreement { "1" } else { "0" },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Interchange rows grouped by critic. Critics come back sorted by id with
/// their records in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct InterchangeData {
    pub critics: Vec<CriticFeedback>,
    /// One more than the largest group index seen (at least 2).
    pub group_count: usize,
    /// One more than the largest label seen (at least 2).
    pub label_count: usize,
}

pub fn read_interchange<R: Read>(reader: R, source: &Path) -> Result<InterchangeData> {
    let table = Table::from_reader(source, reader, ',')?;
    let cols = ["critic_id", "record_id", "group_index", "y", "z", "s"]
        .map(|c| table.column(c))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut by_critic: BTreeMap<String, (Vec<String>, Vec<AuditRecord>)> = BTreeMap::new();
    let (mut max_group, mut max_label) = (1, 1);
    for (line, rec) in &table.rows {
        let cell = |i: usize| rec.get(cols[i]).unwrap_or("");
        let int = |i: usize, what: &str| -> Result<usize> {
            cell(i)
                .parse()
                .map_err(|_| table.err(*line, format!("bad {what} {:?}", cell(i))))
        };
        let group = int(2, "group_index")?;
        let y = int(3, "y")?;
        let z = if cell(4).is_empty() {
            None
        } else {
            Some(int(4, "z")?)
        };
        let s = match cell(5) {
            "0" => false,
            "1" => true,
            other => return Err(table.err(*line, format!("bad s {other:?}"))),
        };
        max_group = max_group.max(group);
        max_label = max_label.max(y).max(z.unwrap_or(0));
        let entry = by_critic.entry(cell(0).to_string()).or_default();
        entry.0.push(cell(1).to_string());
        entry.1.push(AuditRecord {
            group,
            system_label: y,
            disagreement: s,
            intrinsic_label: z,
        });
    }
    let critics = by_critic
        .into_iter()
        .map(|(id, (ids, recs))| CriticFeedback::new(id, ids, recs))
        .collect::<Result<Vec<_>>>()?;
    Ok(InterchangeData {
        critics,
        group_count: max_group + 1,
        label_count: max_label + 1,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub critics: usize,
    pub records: usize,
    pub min_records_per_critic: usize,
    pub max_records_per_critic: usize,
    /// Records per group.
    pub group_occupancy: Vec<usize>,
    /// `[group][label]` tally of system labels.
    pub label_marginals: Vec<Vec<usize>>,
    /// Distinct record ids across all critics.
    pub distinct_records: usize,
}

pub fn summarize_dataset(
    critics: &[CriticFeedback],
    labels: LabelSpace,
    groups: &GroupPartition,
) -> DatasetSummary {
    let mut s = DatasetSummary {
        group_occupancy: vec![0; groups.count()],
        label_marginals: vec![vec![0; labels.size()]; groups.count()],
        ..Default::default()
    };
    if critics.is_empty() {
        return s;
    }
    s.critics = critics.len();
    s.min_records_per_critic = usize::MAX;
    let mut ids = HashSet::new();
    for c in critics {
        let n = c.records().len();
        s.records += n;
        s.min_records_per_critic = s.min_records_per_critic.min(n);
        s.max_records_per_critic = s.max_records_per_critic.max(n);
        for (id, r) in c.iter() {
            ids.insert(id);
            if let Some(g) = s.group_occupancy.get_mut(r.group) {
                *g += 1;
                if let Some(l) = s.label_marginals[r.group].get_mut(r.system_label) {
                    *l += 1;
                }
            }
        }
    }
    s.distinct_records = ids.len();
    s
}

/// One record per distinct record id with its group and system label,
/// the pool a pooled statistical-parity table is built from.
pub fn distinct_outputs(critics: &[CriticFeedback]) -> Vec<AuditRecord> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in critics {
        for (id, r) in c.iter() {
            if seen.insert(id) {
                out.push(AuditRecord::feedback_only(r.group, r.system_label, false));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"
[labels]
names = ["no", "yes"]

[profiles]
record_id = "id"
system_label = "decile_score"
truth = "two_year_recid"

[[profiles.attributes]]
column = "race"
levels = ["caucasian", "other"]
values = { "Caucasian" = 0, "African-American" = 1, "Hispanic" = 1 }

[[profiles.attributes]]
column = "sex"
levels = ["male", "non-male"]
values = { "Male" = 0, "Female" = 1 }

[responses]
critic_id = "worker"
record_id = "id"
response = "answer"
response_map = { "yes" = 1, "no" = 0 }
"#;

    fn schema() -> SchemaConfig {
        let s = SchemaConfig::from_toml(SCHEMA).unwrap();
        s.check().unwrap();
        s
    }

    fn table(text: &str) -> Table {
        Table::from_reader(Path::new("mem.csv"), text.as_bytes(), ',').unwrap()
    }

    #[test]
    fn partition_is_row_major() {
        let s = schema();
        let gp = s.partition().unwrap();
        assert_eq!(
            gp.names(),
            ["caucasian/male", "caucasian/non-male", "other/male", "other/non-male"]
        );
        assert_eq!(s.group_index(&[1, 0]), 2);
        assert_eq!(gp.non_sensitive_index(), 0);
    }

    #[test]
    fn header_only_profiles() {
        let set = parse_profiles(&table("id,decile_score,race,sex,two_year_recid\n"), &schema()).unwrap();
        assert!(set.rows.is_empty());
    }

    #[test]
    fn profiles_binarize_deciles() {
        let t = table(
            "id,decile_score,race,sex,two_year_recid\n\
             a,4,Caucasian,Male,0\n\
             b,5,Hispanic,Female,1\n",
        );
        let set = parse_profiles(&t, &schema()).unwrap();
        assert_eq!(set.rows[0].system_label, 0);
        assert_eq!(set.rows[0].group, 0);
        assert_eq!(set.rows[1].system_label, 1);
        assert_eq!(set.rows[1].group, 3);
        assert_eq!(set.rows[1].truth.as_deref(), Some("1"));
    }

    #[test]
    fn strict_mode_names_unknown_token() {
        let t = table("id,decile_score,race,sex,two_year_recid\na,4,Martian,Male,0\n");
        let err = parse_profiles(&t, &schema()).unwrap_err().to_string();
        assert!(err.contains("Martian"), "{err}");
        assert!(err.contains("row 2"), "{err}");

        let mut lax = schema();
        lax.strict = false;
        let set = parse_profiles(&t, &lax).unwrap();
        assert_eq!((set.rows.len(), set.skipped), (0, 1));
    }

    #[test]
    fn profile_errors() {
        let s = schema();
        let missing = table("id,decile_score,race,two_year_recid\na,4,Caucasian,0\n");
        assert!(parse_profiles(&missing, &s).unwrap_err().to_string().contains("\"sex\""));
        let dup = table("id,decile_score,race,sex,two_year_recid\na,4,Caucasian,Male,0\na,3,Caucasian,Male,0\n");
        assert!(parse_profiles(&dup, &s).unwrap_err().to_string().contains("duplicate"));
        let nan = table("id,decile_score,race,sex,two_year_recid\na,high,Caucasian,Male,0\n");
        assert!(parse_profiles(&nan, &s).is_err());
    }

    fn profiles() -> ProfileSet {
        let t = table(
            "id,decile_score,race,sex,two_year_recid\n\
             a,2,Caucasian,Male,0\n\
             b,8,African-American,Male,1\n\
             c,6,Caucasian,Female,0\n",
        );
        parse_profiles(&t, &schema()).unwrap()
    }

    #[test]
    fn echoing_and_contrary_critics() {
        let p = profiles();
        let t = table("worker,id,answer\necho,a,no\necho,b,yes\necho,c,yes\nanti,a,yes\nanti,b,no\nanti,c,no\n");
        let responses = parse_responses(&t, &schema()).unwrap();
        let fb = join_responses(&p, &responses).unwrap();
        assert_eq!(fb.len(), 2);
        // sorted by critic id
        assert_eq!(fb[0].critic_id(), "anti");
        assert!(fb[0].records().iter().all(|r| r.disagreement));
        assert!(fb[1].records().iter().all(|r| !r.disagreement));
        assert_eq!(fb[1].record_ids(), ["a", "b", "c"]);
    }

    #[test]
    fn dangling_and_duplicate_responses() {
        let p = profiles();
        let dangling = parse_responses(&table("worker,id,answer\nw,zz,no\nw,a,no\n"), &schema()).unwrap();
        let err = join_responses(&p, &dangling).unwrap_err().to_string();
        assert!(err.contains("w/zz"), "{err}");
        let dup = table("worker,id,answer\nw,a,no\nw,a,yes\n");
        assert!(parse_responses(&dup, &schema()).is_err());
        let odd = table("worker,id,answer\nw,a,maybe\n");
        assert!(parse_responses(&odd, &schema()).is_err());
        let mut lax = schema();
        lax.strict = false;
        assert!(parse_responses(&odd, &lax).unwrap().is_empty());
    }

    #[test]
    fn config_checks() {
        let mut s = schema();
        s.labels.names.push("maybe".into());
        assert!(s.check().unwrap_err().contains("two label"));
        let mut s = schema();
        s.profiles.attributes[0].values.insert("X".into(), 7);
        assert!(s.check().is_err());
        assert!(SchemaConfig::from_toml("[labels]\nnames = [\"a\"]\nbogus = 1").is_err());
    }

    #[test]
    fn interchange_round_trip() {
        let p = profiles();
        let t = table("worker,id,answer\nw1,a,yes\nw1,b,yes\nw2,c,no\n");
        let fb = join_responses(&p, &parse_responses(&t, &schema()).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_interchange(&mut buf, &fb).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("critic_id,record_id,group_index,y,z,s\n"));
        let back = read_interchange(buf.as_slice(), Path::new("x.csv")).unwrap();
        assert_eq!(back.critics, fb);
        assert_eq!(back.label_count, 2);
    }

    #[test]
    fn summary() {
        let p = profiles();
        let t = table("worker,id,answer\nw1,a,yes\nw1,b,yes\nw2,c,no\n");
        let fb = join_responses(&p, &parse_responses(&t, &schema()).unwrap()).unwrap();
        let s = summarize_dataset(&fb, p.labels, &p.groups);
        assert_eq!(s.critics, 2);
        assert_eq!(s.records, 3);
        assert_eq!((s.min_records_per_critic, s.max_records_per_critic), (1, 2));
        assert_eq!(s.group_occupancy, vec![1, 1, 1, 0]);
        assert_eq!(s.label_marginals[2], vec![0, 1]);
        let empty = summarize_dataset(&[], p.labels, &p.groups);
        assert_eq!(empty.critics, 0);
        assert_eq!(empty.group_occupancy, vec![0; 4]);
        assert_eq!(distinct_outputs(&fb).len(), 3);
    }
}
