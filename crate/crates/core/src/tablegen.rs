//! Table templates and relational base tables.
//!
//! A generic template (`PARAM_tableTemplate.json`) is a family of parameter
//! sets; [`expand_generic`] enumerates its combinations into individual
//! templates (`PARAM_tablesToGenerate.json`), and [`generate_relational`]
//! samples one concrete relational table from an individual template.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::num::{pow10, Fixed};
use crate::vocab::{resolve_numeric_spec, AttributeKind, DomainVocabulary, NumericRange, ValueNode};

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        impl $name {
            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text $(| $alias)* => Ok($name::$variant),)+
                    other => Err(Error::InvalidTemplate(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShuffleMode {
    None,
    Rows,
    Cols,
    RowsCols,
    All,
}
string_enum!(ShuffleMode { None => "none", Rows => "rows" | "row", Cols => "cols" | "col", RowsCols => "rowscols", All => "all" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColAggPos {
    Left,
    Right,
    None,
}
string_enum!(ColAggPos { Left => "left", Right => "right", None => "none" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowAggPos {
    Top,
    Bottom,
    None,
}
string_enum!(RowAggPos { Top => "top", Bottom => "bottom", None => "none" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowFormat {
    New,
    Indent,
}
string_enum!(RowFormat { New => "new", Indent => "indent" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggFun {
    Sum,
    Avg,
    Min,
    Max,
    Count,
}
string_enum!(AggFun { Sum => "sum", Avg => "avg" | "average", Min => "min", Max => "max", Count => "count" });

impl AggFun {
    /// Word used for the aggregate in question text.
    pub fn word(&self) -> &'static str {
        match self {
            AggFun::Sum => "total",
            AggFun::Avg => "average",
            AggFun::Min => "minimum",
            AggFun::Max => "maximum",
            AggFun::Count => "count",
        }
    }

    pub fn sql(&self) -> &'static str {
        match self {
            AggFun::Sum => "SUM",
            AggFun::Avg => "AVG",
            AggFun::Min => "MIN",
            AggFun::Max => "MAX",
            AggFun::Count => "COUNT",
        }
    }

    /// Applies the aggregate to values sharing one scale. Averages are
    /// rounded to `decimals` (or the value scale, if larger).
    pub fn apply(&self, values: &[Fixed], decimals: u8) -> Option<Fixed> {
        let first = values.first()?;
        let scale = first.scale();
        debug_assert!(values.iter().all(|v| v.scale() == scale));
        Some(match self {
            AggFun::Sum => Fixed::new(values.iter().map(|v| v.units()).sum::<i64>(), scale),
            AggFun::Min => *values.iter().min()?,
            AggFun::Max => *values.iter().max()?,
            AggFun::Count => Fixed::from_int(values.len() as i64),
            AggFun::Avg => {
                let sum: i128 = values.iter().map(|v| v.units() as i128).sum();
                Fixed::ratio(sum, scale, values.len() as i128, decimals.max(scale))
            }
        })
    }
}

/// `(dc, dr)`: column header depth and row header depth, each in 1..=3.
/// Serialized as `"dc_dr"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Levels {
    pub cols: usize,
    pub rows: usize,
}

impl FromStr for Levels {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidTemplate(format!("col_row_levels entry `{s}`"));
        let (c, r) = s.split_once('_').ok_or_else(bad)?;
        let cols: usize = c.trim().parse().map_err(|_| bad())?;
        let rows: usize = r.trim().parse().map_err(|_| bad())?;
        if !(1..=3).contains(&cols) || !(1..=3).contains(&rows) {
            return Err(bad());
        }
        Ok(Levels { cols, rows })
    }
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.cols, self.rows)
    }
}

/// Aggregate placement `"C_R"`, e.g. `right_bottom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AggPos {
    pub col: ColAggPos,
    pub row: RowAggPos,
}

impl AggPos {
    pub const NONE: AggPos = AggPos { col: ColAggPos::None, row: RowAggPos::None };

    pub fn any(&self) -> bool {
        self.col != ColAggPos::None || self.row != RowAggPos::None
    }
}

impl FromStr for AggPos {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (c, r) = s
            .split_once('_')
            .ok_or_else(|| Error::InvalidTemplate(format!("col_row_agg_pos entry `{s}`")))?;
        Ok(AggPos { col: c.parse()?, row: r.parse()? })
    }
}

impl fmt::Display for AggPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.col, self.row)
    }
}

macro_rules! display_serde {
    ($name:ident) => {
        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}
display_serde!(Levels);
display_serde!(AggPos);

/// How many consecutive values to draw from an attribute's value list:
/// `[0]` keeps every value, `[m, M]` draws a run of `n ∈ [m, M]` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleInterval {
    All,
    Range(usize, usize),
}

impl Serialize for SampleInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SampleInterval::All => [0usize].serialize(s),
            SampleInterval::Range(m, mx) => [*m, *mx].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for SampleInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        match v.as_slice() {
            [0] => Ok(SampleInterval::All),
            [m, mx] if m <= mx => Ok(SampleInterval::Range(*m, *mx)),
            _ => Err(serde::de::Error::custom(format!(
                "sampling interval must be [0] or [m, M] with m <= M, got {v:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentSpec {
    #[serde(rename = "valueName")]
    pub value_name: String,
    pub values: Value,
    #[serde(rename = "valueUnit", default, skip_serializing_if = "Option::is_none")]
    pub value_unit: Option<String>,
    #[serde(rename = "rowCodes")]
    pub row_codes: Vec<String>,
    #[serde(rename = "rowSamples")]
    pub row_samples: Vec<SampleInterval>,
    #[serde(rename = "colCodes")]
    pub col_codes: Vec<String>,
    #[serde(rename = "colSamples")]
    pub col_samples: Vec<SampleInterval>,
    pub agg_name1: String,
    #[serde(default = "default_agg")]
    pub agg_fun1: AggFun,
}

fn default_agg() -> AggFun {
    AggFun::Sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericTableTemplate {
    pub replica: usize,
    pub shuffle: Vec<ShuffleMode>,
    pub col_row_levels: Vec<Levels>,
    /// Accepted and ignored by the generator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub col_row_name_pos: Vec<String>,
    pub col_row_agg_pos: Vec<AggPos>,
    pub row_format: Vec<RowFormat>,
    pub tables: Vec<ContentSpec>,
}

impl GenericTableTemplate {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let t: GenericTableTemplate = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replica < 1 {
            return Err(Error::InvalidTemplate("replica must be >= 1".into()));
        }
        if self.shuffle.is_empty()
            || self.col_row_levels.is_empty()
            || self.col_row_agg_pos.is_empty()
            || self.row_format.is_empty()
            || self.tables.is_empty()
        {
            return Err(Error::InvalidTemplate(
                "shuffle, col_row_levels, col_row_agg_pos, row_format and tables must be non-empty".into(),
            ));
        }
        for t in &self.tables {
            if t.row_codes.len() != t.row_samples.len() || t.col_codes.len() != t.col_samples.len() {
                return Err(Error::InvalidTemplate(format!(
                    "`{}`: sample lists must align with code lists",
                    t.value_name
                )));
            }
        }
        Ok(())
    }
}

/// One attribute (independent, or a whole hierarchical group) on an axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisAttr {
    pub code: String,
    pub sample: SampleInterval,
    /// Number of hierarchy levels used, counted from the top.
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndividualTableTemplate {
    pub name: String,
    pub replica: usize,
    pub shuffle: ShuffleMode,
    pub col_row_levels: Levels,
    pub col_row_agg_pos: AggPos,
    pub row_format: RowFormat,
    pub rows: Vec<AxisAttr>,
    pub columns: Vec<AxisAttr>,
    pub values: Value,
    #[serde(rename = "valueName")]
    pub value_name: String,
    pub agg_name1: String,
    pub agg_fun1: AggFun,
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Truncates an axis to exactly `depth` header levels. Hierarchical groups
/// may be cut below their top levels but never lose a parent level; returns
/// `None` when the axis has fewer than `depth` levels available.
fn truncate_axis(
    codes: &[String],
    samples: &[SampleInterval],
    depth: usize,
    vocab: &DomainVocabulary,
) -> Result<Option<Vec<AxisAttr>>> {
    let mut out = Vec::new();
    let mut used = 0;
    for (code, sample) in codes.iter().zip(samples) {
        if used == depth {
            break;
        }
        let attr = vocab.attribute(code)?;
        let take = attr.depth().min(depth - used);
        out.push(AxisAttr { code: code.clone(), sample: *sample, levels: take });
        used += take;
    }
    Ok((used == depth).then_some(out))
}

/// Expands a generic template into every individual template it authorizes.
pub fn expand_generic(
    generic: &GenericTableTemplate,
    vocab: &DomainVocabulary,
) -> Result<Vec<IndividualTableTemplate>> {
    generic.validate()?;
    let mut out = Vec::new();
    let mut names = HashSet::new();
    for (ti, table) in generic.tables.iter().enumerate() {
        let mut seen_codes = HashSet::new();
        for code in table.row_codes.iter().chain(&table.col_codes) {
            vocab.attribute(code)?;
            if !seen_codes.insert(code) {
                return Err(Error::InvalidTemplate(format!(
                    "`{code}` appears twice in `{}`",
                    table.value_name
                )));
            }
        }
        resolve_numeric_spec(vocab, &table.values)?;
        let base = slug(&table.value_name);
        for shuffle in &generic.shuffle {
            for levels in &generic.col_row_levels {
                let Some(rows) = truncate_axis(&table.row_codes, &table.row_samples, levels.rows, vocab)?
                else {
                    continue;
                };
                let Some(columns) = truncate_axis(&table.col_codes, &table.col_samples, levels.cols, vocab)?
                else {
                    continue;
                };
                for agg in &generic.col_row_agg_pos {
                    for fmt in &generic.row_format {
                        let name = format!(
                            "{base}-t{ti}_{shuffle}_c{}r{}_{}-{}_{fmt}",
                            levels.cols, levels.rows, agg.col, agg.row
                        );
                        if !names.insert(name.clone()) {
                            continue;
                        }
                        out.push(IndividualTableTemplate {
                            name,
                            replica: generic.replica,
                            shuffle: *shuffle,
                            col_row_levels: *levels,
                            col_row_agg_pos: *agg,
                            row_format: *fmt,
                            rows: rows.clone(),
                            columns: columns.clone(),
                            values: table.values.clone(),
                            value_name: table.value_name.clone(),
                            agg_name1: table.agg_name1.clone(),
                            agg_fun1: table.agg_fun1,
                        });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyExpansion(
            "no col_row_levels entry fits the available attribute depths".into(),
        ));
    }
    Ok(out)
}

/// Draws a run of consecutive values from `values`.
pub fn sample_values<T: Clone, R: Rng + ?Sized>(
    values: &[T],
    interval: SampleInterval,
    rng: &mut R,
) -> Vec<T> {
    match interval {
        SampleInterval::All => values.to_vec(),
        SampleInterval::Range(m, mx) => {
            let n = rng.gen_range(m..=mx);
            if values.len() <= n {
                return values.to_vec();
            }
            let start = rng.gen_range(0..=values.len() - n);
            values[start..start + n].to_vec()
        }
    }
}

/// Draws `count` pairwise-distinct numbers from `range`. Integers are drawn
/// on the integer grid, reals on the `10^-decimals` grid; when the grid has
/// fewer than `count` points the remaining values step past `max` one grid
/// unit at a time.
pub fn draw_unique_numbers<R: Rng + ?Sized>(
    range: &NumericRange,
    count: usize,
    decimals: u8,
    rng: &mut R,
) -> Vec<Fixed> {
    let scale = if range.integer_mode { 0 } else { decimals };
    let p = pow10(scale) as f64;
    let lo = (range.min * p - 1e-9).ceil() as i64;
    let hi = ((range.max * p + 1e-9).floor() as i64).max(lo);
    let capacity = (hi - lo + 1) as u64;
    let mut units: Vec<i64> = if (count as u64) >= capacity {
        let mut all: Vec<i64> = (lo..=hi).collect();
        all.extend((1..=(count as u64 - capacity) as i64).map(|k| hi + k));
        all.shuffle(rng);
        all
    } else if capacity <= 4 * count as u64 {
        let mut all: Vec<i64> = (lo..=hi).collect();
        all.shuffle(rng);
        all.truncate(count);
        all
    } else {
        let mut seen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = rng.gen_range(lo..=hi);
            if seen.insert(u) {
                out.push(u);
            }
        }
        out
    };
    units.truncate(count);
    units.into_iter().map(|u| Fixed::new(u, scale)).collect()
}

/// A contiguous block of relational columns holding one axis attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnGroup {
    pub code: String,
    pub columns: Vec<String>,
    pub hierarchical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelRow {
    pub keys: Vec<String>,
    pub value: Fixed,
}

/// Flat base table: nominal columns in axis order, then `Value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationalTable {
    /// Nominal column names; the numeric `Value` column is implicit.
    pub columns: Vec<String>,
    pub groups: Vec<ColumnGroup>,
    pub rows: Vec<RelRow>,
    /// Decimals of the `Value` column (0 for integer tables).
    pub scale: u8,
}

impl RelationalTable {
    pub const VALUE: &'static str = "Value";

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn group(&self, code: &str) -> Option<&ColumnGroup> {
        self.groups.iter().find(|g| g.code == code)
    }

    /// Distinct value tuples of `columns`, in order of first appearance.
    pub fn distinct(&self, columns: &[String]) -> Vec<Vec<String>> {
        let idx: Vec<usize> = columns.iter().map(|c| self.column_index(c).expect("known column")).collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in &self.rows {
            let t: Vec<String> = idx.iter().map(|&i| r.keys[i].clone()).collect();
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
        out
    }

    pub fn values(&self) -> Vec<Fixed> {
        self.rows.iter().map(|r| r.value).collect()
    }

    /// Rows sorted by key, for set comparison.
    pub fn sorted_rows(&self) -> Vec<RelRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.keys.cmp(&b.keys));
        rows
    }
}

fn sample_paths<R: Rng + ?Sized>(
    nodes: &[ValueNode],
    levels: usize,
    interval: SampleInterval,
    rng: &mut R,
) -> Vec<Vec<String>> {
    let chosen = sample_values(nodes, interval, rng);
    let mut out = Vec::new();
    for node in chosen {
        if levels <= 1 {
            out.push(vec![node.value.clone()]);
        } else {
            for mut tail in sample_paths(&node.children, levels - 1, interval, rng) {
                tail.insert(0, node.value.clone());
                out.push(tail);
            }
        }
    }
    out
}

/// Samples one relational table: every axis attribute is sampled (top-down
/// through hierarchies), the full cross product of the sampled values is
/// emitted, and the `Value` column receives pairwise-distinct numbers.
pub fn generate_relational<R: Rng + ?Sized>(
    tpl: &IndividualTableTemplate,
    vocab: &DomainVocabulary,
    decimals: u8,
    rng: &mut R,
) -> Result<RelationalTable> {
    let range = resolve_numeric_spec(vocab, &tpl.values)?;
    let mut groups = Vec::new();
    let mut per_group: Vec<Vec<Vec<String>>> = Vec::new();
    for axis in tpl.rows.iter().chain(&tpl.columns) {
        let attr = vocab.attribute(&axis.code)?;
        if axis.levels == 0 || axis.levels > attr.depth() {
            return Err(Error::InvalidTemplate(format!(
                "`{}` uses {} levels of {}",
                axis.code,
                axis.levels,
                attr.depth()
            )));
        }
        let paths = sample_paths(&attr.values, axis.levels, axis.sample, rng);
        if paths.is_empty() {
            return Err(Error::EmptyAxis(axis.code.clone()));
        }
        groups.push(ColumnGroup {
            code: axis.code.clone(),
            columns: attr.names[..axis.levels].to_vec(),
            hierarchical: attr.kind == AttributeKind::Hierarchical,
        });
        per_group.push(paths);
    }
    let mut keys: Vec<Vec<String>> = vec![Vec::new()];
    for paths in &per_group {
        let mut next = Vec::with_capacity(keys.len() * paths.len());
        for k in &keys {
            for p in paths {
                let mut row = k.clone();
                row.extend(p.iter().cloned());
                next.push(row);
            }
        }
        keys = next;
    }
    let values = draw_unique_numbers(&range, keys.len(), decimals, rng);
    let scale = if range.integer_mode { 0 } else { decimals };
    Ok(RelationalTable {
        columns: groups.iter().flat_map(|g| g.columns.clone()).collect(),
        groups,
        rows: keys.into_iter().zip(values).map(|(keys, value)| RelRow { keys, value }).collect(),
        scale,
    })
}
