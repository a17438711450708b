//! File formats: matrices and score tables as CSV, covers, partitions and
//! traces as JSON. Points are referred to by label; without explicit labels
//! point `i` is labelled `i + 1`.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cover::{CoverDraft, FuzzyCover, Partition};
use crate::error::{Error, Result};
use crate::lattice::PartitionFunction;
use crate::score::{check_dense, ClusterScore, ScoreFunction};
use crate::solve::{SearchTrace, TraceRecord};
use crate::subset::Subset;

/// Point names, in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, usize>,
    numbered: bool,
}

impl Labels {
    /// `1, .., n`.
    pub fn numbered(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let index = names.iter().cloned().zip(0..).collect();
        Labels {
            names,
            index,
            numbered: true,
        }
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Parse(format!("empty label for point {}", i + 1)));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate label {name:?}")));
            }
        }
        let numbered = names
            .iter()
            .enumerate()
            .all(|(i, s)| *s == (i + 1).to_string());
        Ok(Labels {
            names,
            index,
            numbered,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown label {label:?}")))
    }

    /// A label as JSON: a number for numbered points, else a string.
    pub fn json(&self, i: usize) -> Value {
        if self.numbered {
            json!(i + 1)
        } else {
            json!(self.names[i])
        }
    }

    pub fn subset_json(&self, s: Subset) -> Value {
        Value::Array(s.iter().map(|i| self.json(i)).collect())
    }

    /// Space-separated member labels.
    pub fn subset_text(&self, s: Subset) -> String {
        s.iter().map(|i| self.name(i)).collect::<Vec<_>>().join(" ")
    }

    fn index_from_json(&self, v: &Value) -> Result<usize> {
        match v {
            Value::String(s) => self.index_of(s),
            Value::Number(k) => self.index_of(&k.to_string()),
            other => Err(Error::Parse(format!("expected a label, got {other}"))),
        }
    }

    fn subset_from_json(&self, v: &[Value]) -> Result<Subset> {
        v.iter().map(|x| self.index_from_json(x)).collect()
    }
}

fn parse_number(cell: &str, row: usize, col: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "row {}, column {}: {cell:?} is not a number",
            row + 1,
            col + 1
        ))
    })
}

fn records(input: impl Read) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

/// Reads a square matrix. An optional first row of labels (any cell not a
/// number, with an optional empty corner cell) requires every data row to
/// start with the matching row label.
pub fn read_matrix_csv(input: impl Read) -> Result<(Vec<Vec<f64>>, Labels)> {
    let rows = records(input)?;
    let Some(first) = rows.first() else {
        return Err(Error::Parse("empty matrix".into()));
    };
    let has_header = first.iter().any(|c| c.parse::<f64>().is_err());
    if !has_header {
        let n = rows.len();
        let mut out = Vec::with_capacity(n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: r,
                    len: row.len(),
                    expected: n,
                });
            }
            out.push(
                row.iter()
                    .enumerate()
                    .map(|(c, x)| parse_number(x, r, c))
                    .collect::<Result<_>>()?,
            );
        }
        return Ok((out, Labels::numbered(n)));
    }
    let mut names = first.clone();
    if names.first().is_some_and(String::is_empty) {
        names.remove(0);
    }
    let labels = Labels::from_names(names)?;
    let n = labels.len();
    let data = &rows[1..];
    if data.len() != n {
        return Err(Error::Parse(format!(
            "header names {n} points but {} data rows follow",
            data.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    for (r, row) in data.iter().enumerate() {
        if row.len() != n + 1 {
            return Err(Error::NotSquare {
                row: r,
                len: row.len().saturating_sub(1),
                expected: n,
            });
        }
        if row[0] != labels.name(r) {
            return Err(Error::Parse(format!(
                "row {} is labelled {:?}, expected {:?}",
                r + 1,
                row[0],
                labels.name(r)
            )));
        }
        out.push(
            row[1..]
                .iter()
                .enumerate()
                .map(|(c, x)| parse_number(x, r + 1, c + 1))
                .collect::<Result<_>>()?,
        );
    }
    Ok((out, labels))
}

/// Reads a set function as `subset,value` rows, the subset given as
/// space-separated labels; `mask,subset,value` rows as written by
/// [`write_score_csv`] are accepted too. Every non-empty subset must appear.
/// Labels that are all positive integers number the points `1..=max`;
/// otherwise points are ordered by first appearance.
pub fn read_score_csv(input: impl Read) -> Result<(ScoreFunction, Labels)> {
    let mut rows = records(input)?;
    if rows
        .first()
        .is_some_and(|r| r.last().is_some_and(|c| c.parse::<f64>().is_err()))
    {
        rows.remove(0);
    }
    let mut entries: Vec<(Vec<String>, f64)> = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let (set, value) = match row.as_slice() {
            [s, v] | [_, s, v] => (s, v),
            _ => {
                return Err(Error::Parse(format!(
                    "row {}: expected 2 or 3 columns, got {}",
                    r + 1,
                    row.len()
                )))
            }
        };
        let members: Vec<String> = set.split_whitespace().map(str::to_owned).collect();
        entries.push((members, parse_number(value, r, row.len() - 1)?));
    }

    let mut seen: Vec<String> = Vec::new();
    for (members, _) in &entries {
        for m in members {
            if !seen.contains(m) {
                seen.push(m.clone());
            }
        }
    }
    let numeric: Option<Vec<usize>> = seen.iter().map(|s| s.parse::<usize>().ok()).collect();
    let labels = match numeric {
        Some(ks) if ks.iter().all(|&k| k >= 1) => {
            Labels::numbered(ks.into_iter().max().unwrap_or(0))
        }
        _ => Labels::from_names(seen)?,
    };
    let n = labels.len();
    check_dense("score table", n)?;

    let mut values = vec![f64::NAN; 1 << n];
    values[0] = 0.0;
    for (members, v) in &entries {
        let s: Subset = members
            .iter()
            .map(|m| labels.index_of(m))
            .collect::<Result<_>>()?;
        if s.len() != members.len() {
            return Err(Error::Parse(format!(
                "repeated label in subset {members:?}"
            )));
        }
        if s.is_empty() {
            if *v != 0.0 {
                return Err(Error::NonZeroEmpty(*v));
            }
            continue;
        }
        if !values[s.mask() as usize].is_nan() {
            return Err(Error::Parse(format!(
                "subset {{{}}} listed twice",
                labels.subset_text(s)
            )));
        }
        values[s.mask() as usize] = *v;
    }
    if let Some(m) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse(format!(
            "no value for subset {{{}}}",
            labels.subset_text(Subset(m as u64))
        )));
    }
    Ok((ScoreFunction::from_values(n, values)?, labels))
}

/// Writes `mask,subset,value` rows for every non-empty subset.
pub fn write_score_csv(out: impl Write, values: &[f64], labels: &Labels) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mask", "subset", "value"])?;
    for (m, v) in values.iter().enumerate().skip(1) {
        w.write_record([
            m.to_string(),
            labels.subset_text(Subset(m as u64)),
            v.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rgs,blocks,value` rows, blocks as label lists joined by `|`.
pub fn write_partition_function_csv(
    out: impl Write,
    h: &PartitionFunction,
    labels: &Labels,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rgs", "blocks", "value"])?;
    for (code, v) in h.iter() {
        let rgs = code
            .as_slice()
            .iter()
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let blocks = code
            .to_partition()
            .blocks()
            .iter()
            .map(|&b| labels.subset_text(b))
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([rgs, blocks, v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MassEntry {
    subset: Vec<Value>,
    mass: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointEntry {
    point: Value,
    masses: Vec<MassEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoverFile {
    n: usize,
    memberships: Vec<PointEntry>,
}

/// Parses a cover file into an unvalidated draft. Points missing from the
/// file get empty membership lists.
pub fn parse_cover_json(text: &str, labels: &Labels) -> Result<CoverDraft> {
    let file: CoverFile = serde_json::from_str(text)?;
    if file.n != labels.len() {
        return Err(Error::SizeMismatch {
            left: file.n,
            right: labels.len(),
        });
    }
    let mut memberships = vec![Vec::new(); file.n];
    for entry in &file.memberships {
        let i = labels.index_from_json(&entry.point)?;
        for m in &entry.masses {
            memberships[i].push((labels.subset_from_json(&m.subset)?, m.mass));
        }
    }
    Ok(CoverDraft {
        n: file.n,
        memberships,
    })
}

pub fn cover_json(cover: &FuzzyCover, labels: &Labels) -> Value {
    let memberships: Vec<Value> = (0..cover.n())
        .map(|i| {
            let masses: Vec<Value> = cover
                .masses(i)
                .iter()
                .map(|(&a, &m)| json!({"subset": labels.subset_json(a), "mass": m}))
                .collect();
            json!({"point": labels.json(i), "masses": masses})
        })
        .collect();
    json!({"n": cover.n(), "memberships": memberships})
}

/// Parses a JSON list of label lists, blocks possibly overlapping.
pub fn parse_collection_json(text: &str, labels: &Labels) -> Result<Vec<Subset>> {
    let lists: Vec<Vec<Value>> = serde_json::from_str(text)?;
    lists
        .iter()
        .map(|l| {
            let s = labels.subset_from_json(l)?;
            if s.len() != l.len() {
                return Err(Error::Parse(format!("repeated label in block {l:?}")));
            }
            Ok(s)
        })
        .collect()
}

pub fn parse_partition_json(text: &str, labels: &Labels) -> Result<Partition> {
    Partition::new(labels.len(), parse_collection_json(text, labels)?)
}

pub fn partition_json(p: &Partition, labels: &Labels) -> Value {
    Value::Array(p.blocks().iter().map(|&b| labels.subset_json(b)).collect())
}

fn candidate_json(labels: &Labels, list: &[(Subset, f64)]) -> Value {
    Value::Array(
        list.iter()
            .map(|&(a, v)| json!({"subset": labels.subset_json(a), "sum": v}))
            .collect(),
    )
}

pub fn trace_record_json(r: &TraceRecord, labels: &Labels) -> Value {
    match r {
        TraceRecord::RoundUp {
            point,
            subset,
            reduced_score,
            global_score,
        } => json!({
            "step": "round_up",
            "point": labels.json(*point),
            "subset": labels.subset_json(*subset),
            "reduced_score": reduced_score,
            "global_score": global_score,
        }),
        TraceRecord::Select {
            iteration,
            subset,
            candidate_sum,
            global_score,
            candidates,
        } => {
            let mut v = json!({
                "step": "select",
                "iteration": iteration,
                "subset": labels.subset_json(*subset),
                "candidate_sum": candidate_sum,
                "global_score": global_score,
            });
            if let Some(c) = candidates {
                v["candidates"] = candidate_json(labels, c);
            }
            v
        }
        TraceRecord::Extract {
            iteration,
            point,
            block,
            gain,
            global_score,
            eligible,
        } => json!({
            "step": "extract",
            "iteration": iteration,
            "point": labels.json(*point),
            "block": labels.subset_json(*block),
            "gain": gain,
            "global_score": global_score,
            "eligible": eligible
                .iter()
                .map(|&(i, a, g)| json!({
                    "point": labels.json(i),
                    "block": labels.subset_json(a),
                    "gain": g,
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn trace_json(trace: &SearchTrace, labels: &Labels) -> Value {
    Value::Array(trace.iter().map(|r| trace_record_json(r, labels)).collect())
}

/// One JSON object per line, one line per record.
pub fn write_trace_lines(mut out: impl Write, trace: &SearchTrace, labels: &Labels) -> Result<()> {
    for r in trace.iter() {
        serde_json::to_writer(&mut out, &trace_record_json(r, labels))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Per-block values of a partition, keyed by the block's label text.
pub fn block_values<S: ClusterScore + ?Sized>(
    score: &S,
    p: &Partition,
    labels: &Labels,
) -> BTreeMap<String, f64> {
    p.blocks()
        .iter()
        .map(|&b| (labels.subset_text(b), score.value(b)))
        .collect()
}
