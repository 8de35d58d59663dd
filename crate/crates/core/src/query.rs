//! Query templates 1–15: instantiation against a pivoted instance, the
//! in-memory evaluator, SQL text, and answer formatting.
//!
//! Conditions are kept per *unit* (an independent attribute or a whole
//! hierarchical group): a unit condition lists the allowed value tuples over
//! the unit's first `columns.len()` levels, so `Equals` is a single tuple and
//! `In` several. Column conditions form a disjunction of conjunctive clauses,
//! which is how an arbitrary subset of column leaves is expressed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Fixed;
use crate::pivot::{AggScope, HctTable, HeaderTree, Line, NodeKind};
use crate::tablegen::{AggFun, ColumnGroup, RelationalTable};

pub mod oracle;

pub const TEMPLATE_IDS: std::ops::RangeInclusive<u8> = 1..=15;

/// Aggregates drawn for AGG₁/AGG₂, in canonical order.
pub const AGG_POOL: [AggFun; 4] = [AggFun::Sum, AggFun::Avg, AggFun::Min, AggFun::Max];

/// Most values drawn into one `In` list or column subset.
const MAX_LIST: usize = 5;
const MAX_COL_SUBSET: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitCondition {
    pub code: String,
    /// Constrained levels of the unit, outermost first.
    pub columns: Vec<String>,
    /// Allowed tuples over `columns`.
    pub paths: Vec<Vec<String>>,
}

impl UnitCondition {
    pub fn is_equals(&self) -> bool {
        self.paths.len() == 1
    }

    /// Sorted distinct values of one constrained level.
    pub fn level_values(&self, level: usize) -> Vec<String> {
        let mut v: Vec<String> = self.paths.iter().map(|p| p[level].clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Asc,
    Desc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl CompareOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
        }
    }

    pub fn flip(&self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Gt => CompareOp::Lt,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub op: CompareOp,
    pub threshold: Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInstance {
    pub template_id: u8,
    pub row_conditions: Vec<UnitCondition>,
    /// Disjunction of conjunctive clauses; empty means unconstrained.
    pub col_clauses: Vec<Vec<UnitCondition>>,
    pub aggs: Vec<AggFun>,
    pub group_by: Vec<String>,
    /// Whether group keys are part of the answer.
    pub report_keys: bool,
    pub order: Option<Order>,
    pub limit: Option<usize>,
    pub compare: Option<Comparison>,
    /// Projected row attributes (templates 14 and 15).
    pub select: Vec<String>,
    /// Columns named by the report sentence.
    pub report: Vec<String>,
    pub inner: Option<Box<QueryInstance>>,
    /// Decimals for averages.
    pub decimals: u8,
}

impl QueryInstance {
    fn empty(template_id: u8, decimals: u8) -> Self {
        QueryInstance {
            template_id,
            row_conditions: Vec::new(),
            col_clauses: Vec::new(),
            aggs: Vec::new(),
            group_by: Vec::new(),
            report_keys: false,
            order: None,
            limit: None,
            compare: None,
            select: Vec::new(),
            report: Vec::new(),
            inner: None,
            decimals,
        }
    }

    /// All unit conditions, rows first.
    pub fn conditions(&self) -> impl Iterator<Item = &UnitCondition> {
        self.row_conditions.iter().chain(self.col_clauses.iter().flatten())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Num(Fixed),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Num(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub rows: Vec<Vec<Cell>>,
}

/// Fields joined by `,`, tuples by `; `.
pub fn format_answer(a: &Answer) -> String {
    a.rows
        .iter()
        .map(|r| r.iter().map(Cell::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("; ")
}

fn pick<'a, T, R: Rng + ?Sized>(items: &'a [T], rng: &mut R) -> &'a T {
    items.choose(rng).expect("non-empty choice")
}

/// A random subset of size in `[min(lo, n), min(hi, n)]`, in original order.
fn subset<T: Clone, R: Rng + ?Sized>(items: &[T], lo: usize, hi: usize, rng: &mut R) -> Vec<T> {
    let n = items.len();
    let size = rng.gen_range(lo.min(n)..=hi.min(n));
    let mut idx = index::sample(rng, n, size).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i].clone()).collect()
}

fn value_paths(lines: &[Line]) -> Vec<Vec<String>> {
    lines.iter().filter(|l| l.is_value()).map(|l| l.path.clone()).collect()
}

/// Splits a concatenated axis path into one `Equals` per fully covered
/// unit, plus a partial condition for a unit the path ends inside.
fn path_conditions(units: &[ColumnGroup], path: &[String]) -> Vec<UnitCondition> {
    let mut out = Vec::new();
    let mut at = 0;
    for u in units {
        if at >= path.len() {
            break;
        }
        let take = u.columns.len().min(path.len() - at);
        out.push(UnitCondition {
            code: u.code.clone(),
            columns: u.columns[..take].to_vec(),
            paths: vec![path[at..at + take].to_vec()],
        });
        at += take;
    }
    out
}

/// Distinct full tuples of each unit on an axis, in header order.
fn unit_paths(tree: &HeaderTree) -> Vec<Vec<Vec<String>>> {
    let leaves = value_paths(&tree.lines());
    let mut at = 0;
    let mut out = Vec::new();
    for u in &tree.units {
        let w = u.columns.len();
        let mut seen = HashSet::new();
        let mut paths = Vec::new();
        for l in &leaves {
            let p = l[at..at + w].to_vec();
            if seen.insert(p.clone()) {
                paths.push(p);
            }
        }
        out.push(paths);
        at += w;
    }
    out
}

/// Expresses a set of column leaves as a disjunction of products. Leaves are
/// ordered with the innermost unit as the primary key, then clauses that
/// agree on every other unit are merged, one unit at a time.
pub fn factor_leaves(
    units: &[ColumnGroup],
    leaves: &[Vec<String>],
    order: &[Vec<String>],
) -> Vec<Vec<UnitCondition>> {
    let rank: HashMap<&Vec<String>, usize> = order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let split = |leaf: &Vec<String>| -> Vec<Vec<String>> {
        let mut at = 0;
        units
            .iter()
            .map(|u| {
                let p = leaf[at..at + u.columns.len()].to_vec();
                at += u.columns.len();
                p
            })
            .collect()
    };
    let mut sorted: Vec<&Vec<String>> = leaves.iter().collect();
    sorted.sort_by_key(|l| {
        let mut key: Vec<usize> = Vec::new();
        let parts = split(l);
        let mut at = 0;
        let mut per_unit = Vec::new();
        for (u, p) in units.iter().zip(&parts) {
            // rank of the unit tuple among the leaves' projections
            let pos =
                order.iter().position(|o| &o[at..at + u.columns.len()] == p.as_slice()).unwrap_or(usize::MAX);
            per_unit.push(pos);
            at += u.columns.len();
        }
        key.extend(per_unit.iter().rev());
        key.push(rank.get(l).copied().unwrap_or(usize::MAX));
        key
    });
    let mut clauses: Vec<Vec<Vec<Vec<String>>>> =
        sorted.into_iter().map(|l| split(l).into_iter().map(|p| vec![p]).collect()).collect();
    for i in 0..units.len() {
        let mut merged: Vec<Vec<Vec<Vec<String>>>> = Vec::new();
        for c in clauses {
            let slot =
                merged.iter_mut().find(|m| m.iter().zip(&c).enumerate().all(|(j, (a, b))| j == i || a == b));
            match slot {
                Some(m) => {
                    for p in &c[i] {
                        if !m[i].contains(p) {
                            m[i].push(p.clone());
                        }
                    }
                }
                None => merged.push(c),
            }
        }
        clauses = merged;
    }
    clauses
        .into_iter()
        .map(|c| {
            units
                .iter()
                .zip(c)
                .map(|(u, paths)| UnitCondition { code: u.code.clone(), columns: u.columns.clone(), paths })
                .collect()
        })
        .collect()
}

fn draw_aggs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<AggFun> {
    let mut aggs: Vec<AggFun> = AGG_POOL.choose_multiple(rng, n).copied().collect();
    aggs.sort();
    aggs
}

fn matches_unit(rel: &RelationalTable, keys: &[String], c: &UnitCondition) -> bool {
    let idx: Vec<usize> = c.columns.iter().map(|n| rel.column_index(n).expect("known column")).collect();
    c.paths.iter().any(|p| idx.iter().zip(p).all(|(&i, v)| &keys[i] == v))
}

fn row_matches(rel: &RelationalTable, keys: &[String], q: &QueryInstance) -> bool {
    q.row_conditions.iter().all(|c| matches_unit(rel, keys, c))
        && (q.col_clauses.is_empty()
            || q.col_clauses.iter().any(|cl| cl.iter().all(|c| matches_unit(rel, keys, c))))
}

/// Mean of the whole `Value` column, with one decimal more than the values.
pub fn threshold(rel: &RelationalTable) -> Fixed {
    let sum: i128 = rel.rows.iter().map(|r| r.value.units() as i128).sum();
    Fixed::ratio(sum, rel.scale, rel.rows.len() as i128, rel.scale + 1)
}

fn top_level_in<R: Rng + ?Sized>(tree: &HeaderTree, rng: &mut R) -> UnitCondition {
    let unit = &tree.units[0];
    let mut seen = HashSet::new();
    let tops: Vec<Vec<String>> = value_paths(&tree.lines())
        .into_iter()
        .map(|p| vec![p[0].clone()])
        .filter(|p| seen.insert(p.clone()))
        .collect();
    UnitCondition {
        code: unit.code.clone(),
        columns: vec![unit.columns[0].clone()],
        paths: subset(&tops, 2, MAX_LIST, rng),
    }
}

fn rows_in<R: Rng + ?Sized>(tree: &HeaderTree, rng: &mut R) -> Vec<UnitCondition> {
    tree.units
        .iter()
        .zip(unit_paths(tree))
        .map(|(u, paths)| UnitCondition {
            code: u.code.clone(),
            columns: u.columns.clone(),
            paths: subset(&paths, 2, MAX_LIST, rng),
        })
        .collect()
}

fn cols_subset<R: Rng + ?Sized>(tree: &HeaderTree, rng: &mut R) -> Vec<Vec<UnitCondition>> {
    let leaves = value_paths(&tree.lines());
    let chosen = subset(&leaves, 2, MAX_COL_SUBSET, rng);
    factor_leaves(&tree.units, &chosen, &leaves)
}

fn leaf_equals<R: Rng + ?Sized>(tree: &HeaderTree, rng: &mut R) -> Vec<UnitCondition> {
    let leaves = value_paths(&tree.lines());
    path_conditions(&tree.units, pick(&leaves, rng))
}

/// Conditions selecting exactly the scope of a header line.
fn line_conditions(tree: &HeaderTree, line: &Line) -> Vec<UnitCondition> {
    match &line.kind {
        NodeKind::Value => path_conditions(&tree.units, &line.path),
        NodeKind::Aggregate { scope, .. } => {
            let leaves = value_paths(&tree.lines());
            let depth = line.path.len();
            let mut children: Vec<String> = Vec::new();
            for l in leaves.iter().filter(|l| l.starts_with(&line.path)) {
                if !children.contains(&l[depth]) {
                    children.push(l[depth].clone());
                }
            }
            debug_assert!(*scope == AggScope::Local || depth == 0);
            let mut conds = path_conditions(&tree.units, &line.path);
            // the next level either extends the last partial unit or opens a new one
            let mut start = 0;
            let unit = tree
                .units
                .iter()
                .find(|u| {
                    let end = start + u.columns.len();
                    let hit = depth < end;
                    if !hit {
                        start = end;
                    }
                    hit
                })
                .expect("aggregate below the last level");
            let offset = depth - start;
            let prefix: Vec<String> = line.path[start..].to_vec();
            if offset > 0 {
                conds.pop();
            }
            conds.push(UnitCondition {
                code: unit.code.clone(),
                columns: unit.columns[..=offset].to_vec(),
                paths: children
                    .into_iter()
                    .map(|c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                    .collect(),
            });
            conds
        }
        NodeKind::Label => Vec::new(),
    }
}

/// Draws one instance of `template_id` for a pivoted table and its base.
pub fn instantiate<R: Rng + ?Sized>(
    template_id: u8,
    rel: &RelationalTable,
    hct: &HctTable,
    decimals: u8,
    rng: &mut R,
) -> Result<QueryInstance> {
    if rel.rows.is_empty() {
        return Err(Error::InvalidQuery("empty relational table".into()));
    }
    let rows = &hct.row_header;
    let cols = &hct.col_header;
    let row_columns = rows.columns();
    let col_columns = cols.columns();
    let mut q = QueryInstance::empty(template_id, decimals);
    match template_id {
        1 => {
            q.row_conditions = leaf_equals(rows, rng);
            q.col_clauses = vec![leaf_equals(cols, rng)];
        }
        2 => {
            q.row_conditions = rows_in(rows, rng);
            q.col_clauses = vec![leaf_equals(cols, rng)];
        }
        3 => {
            q.row_conditions = leaf_equals(rows, rng);
            q.col_clauses = cols_subset(cols, rng);
        }
        4 => {
            let per_unit = unit_paths(rows);
            let u = rng.gen_range(0..rows.units.len());
            let unit = &rows.units[u];
            q.row_conditions = vec![UnitCondition {
                code: unit.code.clone(),
                columns: unit.columns.clone(),
                paths: vec![pick(&per_unit[u], rng).clone()],
            }];
            q.col_clauses = cols_subset(cols, rng);
            q.aggs = draw_aggs(2, rng);
        }
        5 => {
            if !hct.has_aggregates() {
                return Err(Error::NotApplicable(5));
            }
            let row_lines = hct.row_lines();
            let col_lines = hct.col_lines();
            let mut cells = Vec::new();
            for rl in row_lines.iter().filter(|l| l.kind != NodeKind::Label) {
                for cl in &col_lines {
                    if rl.is_aggregate() || cl.is_aggregate() {
                        cells.push((rl, cl));
                    }
                }
            }
            let (rl, cl) = *pick(&cells, rng);
            q.row_conditions = line_conditions(rows, rl);
            let c = line_conditions(cols, cl);
            q.col_clauses = if c.is_empty() { Vec::new() } else { vec![c] };
            q.aggs = vec![hct.agg_fun];
        }
        6 => {
            q.row_conditions = rows_in(rows, rng);
            q.col_clauses = cols_subset(cols, rng);
        }
        7 => {
            q.row_conditions = rows_in(rows, rng);
            q.col_clauses = vec![leaf_equals(cols, rng)];
            q.aggs = draw_aggs(2, rng);
        }
        8 => {
            q.row_conditions = rows_in(rows, rng);
            q.col_clauses = cols_subset(cols, rng);
            q.aggs = draw_aggs(2, rng);
            q.group_by = col_columns.clone();
            q.report_keys = true;
            q.report = col_columns.clone();
        }
        9..=11 => {
            q.row_conditions = vec![top_level_in(rows, rng)];
            q.group_by = vec![row_columns[0].clone()];
            if template_id == 11 {
                q.col_clauses = cols_subset(cols, rng);
                q.group_by.extend(col_columns.iter().cloned());
            } else {
                q.col_clauses = vec![leaf_equals(cols, rng)];
            }
            q.aggs = if template_id == 9 { vec![AggFun::Min] } else { draw_aggs(1, rng) };
            q.report_keys = template_id != 9;
            if q.report_keys {
                q.report = q.group_by.clone();
            }
        }
        12 | 13 => {
            q.row_conditions = vec![top_level_in(rows, rng)];
            q.col_clauses = vec![leaf_equals(cols, rng)];
            q.order = Some(if rng.gen_bool(0.5) { Order::Asc } else { Order::Desc });
            if template_id == 12 {
                let n = rel.rows.iter().filter(|r| row_matches(rel, &r.keys, &q)).count();
                let ks: Vec<usize> = (2..=5).filter(|&k| k <= n).collect();
                if ks.is_empty() {
                    return Err(Error::NotApplicable(12));
                }
                q.limit = Some(*pick(&ks, rng));
            }
        }
        14 => {
            q.col_clauses = vec![leaf_equals(cols, rng)];
            q.select = row_columns.clone();
            let op = if rng.gen_bool(0.5) { CompareOp::Lt } else { CompareOp::Gt };
            let threshold = threshold(rel);
            q.compare = Some(Comparison { op, threshold });
            if evaluate(&q, rel)?.rows.is_empty() {
                q.compare = Some(Comparison { op: op.flip(), threshold });
                if evaluate(&q, rel)?.rows.is_empty() {
                    return Err(Error::NotApplicable(14));
                }
            }
        }
        15 => {
            let inner = instantiate(14, rel, hct, decimals, rng)?;
            let clause = &inner.col_clauses[0];
            let per_unit = unit_paths(cols);
            let changeable: Vec<usize> = (0..clause.len()).filter(|&i| per_unit[i].len() >= 2).collect();
            if changeable.is_empty() {
                return Err(Error::NotApplicable(15));
            }
            let u = *pick(&changeable, rng);
            let others: Vec<&Vec<String>> =
                per_unit[u].iter().filter(|p| **p != clause[u].paths[0]).collect();
            let mut outer = clause.clone();
            outer[u].paths = vec![(*pick(&others, rng)).clone()];
            q.col_clauses = vec![outer];
            q.select = row_columns.clone();
            q.report = row_columns.clone();
            q.report.push(RelationalTable::VALUE.to_string());
            q.inner = Some(Box::new(inner));
        }
        other => return Err(Error::InvalidQuery(format!("unknown template id {other}"))),
    }
    Ok(q)
}

fn check_columns(q: &QueryInstance, rel: &RelationalTable) -> Result<()> {
    for name in q.conditions().flat_map(|c| c.columns.iter()).chain(&q.group_by).chain(&q.select) {
        if rel.column_index(name).is_none() {
            return Err(Error::InvalidQuery(format!("unknown column `{name}`")));
        }
    }
    for c in q.conditions() {
        if c.paths.is_empty() || c.paths.iter().any(|p| p.len() != c.columns.len()) {
            return Err(Error::InvalidQuery(format!("malformed condition on `{}`", c.code)));
        }
    }
    Ok(())
}

/// Evaluates a query on the base table.
pub fn evaluate(q: &QueryInstance, rel: &RelationalTable) -> Result<Answer> {
    check_columns(q, rel)?;
    let selected: Vec<&crate::tablegen::RelRow> =
        rel.rows.iter().filter(|r| row_matches(rel, &r.keys, q)).collect();
    let project = |names: &[String], keys: &[String]| -> Vec<String> {
        names.iter().map(|n| keys[rel.column_index(n).unwrap()].clone()).collect()
    };
    let agg_cells = |values: &[Fixed]| -> Result<Vec<Cell>> {
        q.aggs
            .iter()
            .map(|a| {
                a.apply(values, q.decimals)
                    .map(Cell::Num)
                    .ok_or_else(|| Error::InvalidQuery("aggregate over an empty selection".into()))
            })
            .collect()
    };
    let rows: Vec<Vec<Cell>> = if let Some(inner) = &q.inner {
        let allowed: HashSet<Vec<String>> = evaluate(inner, rel)?
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.to_string()).collect())
            .collect();
        selected
            .iter()
            .filter(|r| allowed.contains(&project(&q.select, &r.keys)))
            .map(|r| {
                let mut out: Vec<Cell> = project(&q.select, &r.keys).into_iter().map(Cell::Text).collect();
                out.push(Cell::Num(r.value));
                out
            })
            .collect()
    } else if let Some(cmp) = q.compare {
        selected
            .iter()
            .filter(|r| match cmp.op {
                CompareOp::Lt => r.value < cmp.threshold,
                CompareOp::Gt => r.value > cmp.threshold,
            })
            .map(|r| project(&q.select, &r.keys).into_iter().map(Cell::Text).collect())
            .collect()
    } else if !q.group_by.is_empty() {
        let mut groups: BTreeMap<Vec<String>, Vec<Fixed>> = BTreeMap::new();
        for r in &selected {
            groups.entry(project(&q.group_by, &r.keys)).or_default().push(r.value);
        }
        let mut out = Vec::new();
        for (key, values) in groups {
            let mut row: Vec<Cell> =
                if q.report_keys { key.into_iter().map(Cell::Text).collect() } else { Vec::new() };
            row.extend(agg_cells(&values)?);
            out.push(row);
        }
        out
    } else if !q.aggs.is_empty() {
        let values: Vec<Fixed> = selected.iter().map(|r| r.value).collect();
        vec![agg_cells(&values)?]
    } else {
        let mut values: Vec<Fixed> = selected.iter().map(|r| r.value).collect();
        match q.order {
            Some(Order::Asc) => values.sort(),
            Some(Order::Desc) => values.sort_by(|a, b| b.cmp(a)),
            None => {}
        }
        if let Some(k) = q.limit {
            values.truncate(k);
        }
        values.into_iter().map(|v| vec![Cell::Num(v)]).collect()
    };
    Ok(Answer { rows })
}

/// Ground truth computed by both evaluators; disagreement is an error.
pub fn ground_truth(q: &QueryInstance, rel: &RelationalTable) -> Result<Answer> {
    let a = evaluate(q, rel)?;
    let b = oracle::oracle_evaluate(q, rel)?;
    if a != b {
        return Err(Error::OracleMismatch(format!("template {}", q.template_id)));
    }
    Ok(a)
}

fn quote(v: &str) -> String {
    format!("'{}'", v.replace('\'', "''"))
}

fn sql_unit(c: &UnitCondition) -> String {
    if c.is_equals() {
        c.columns
            .iter()
            .zip(&c.paths[0])
            .map(|(n, v)| format!("{n} = {}", quote(v)))
            .collect::<Vec<_>>()
            .join(" AND ")
    } else if c.columns.len() == 1 {
        let vals: Vec<String> = c.paths.iter().map(|p| quote(&p[0])).collect();
        format!("{} IN ({})", c.columns[0], vals.join(", "))
    } else {
        let tuples: Vec<String> = c
            .paths
            .iter()
            .map(|p| format!("({})", p.iter().map(|v| quote(v)).collect::<Vec<_>>().join(", ")))
            .collect();
        format!("({}) IN ({})", c.columns.join(", "), tuples.join(", "))
    }
}

fn sql_conj(conds: &[UnitCondition]) -> String {
    format!("({})", conds.iter().map(sql_unit).collect::<Vec<_>>().join(" AND "))
}

fn sql_agg(a: AggFun, decimals: u8) -> String {
    match a {
        AggFun::Avg => format!("ROUND(AVG(Value), {decimals})"),
        AggFun::Count => "COUNT(*)".into(),
        other => format!("{}(Value)", other.sql()),
    }
}

fn sql_where(q: &QueryInstance) -> Vec<String> {
    let mut parts = Vec::new();
    if !q.col_clauses.is_empty() {
        let clauses: Vec<String> = q.col_clauses.iter().map(|c| sql_conj(c)).collect();
        parts.push(format!("({})", clauses.join(" OR ")));
    }
    if !q.row_conditions.is_empty() {
        parts.push(format!("({})", sql_conj(&q.row_conditions)));
    }
    parts
}

pub const SQL_TABLE: &str = "DBdata";

/// SQL text equivalent to [`evaluate`]; values are compared as text.
pub fn render_sql(q: &QueryInstance) -> String {
    let mut select: Vec<String> = Vec::new();
    if q.report_keys {
        select.extend(q.group_by.iter().cloned());
    }
    select.extend(q.select.iter().cloned());
    select.extend(q.aggs.iter().map(|a| sql_agg(*a, q.decimals)));
    if q.inner.is_some() || (q.aggs.is_empty() && q.select.is_empty()) {
        select.push(RelationalTable::VALUE.into());
    }
    let mut sql = format!("SELECT {} FROM {SQL_TABLE}", select.join(", "));
    let mut conds = sql_where(q);
    if let Some(c) = q.compare {
        conds.push(format!("Value {} {}", c.op.symbol(), c.threshold));
    }
    if let Some(inner) = &q.inner {
        let inner_sql = render_sql(inner);
        conds.push(format!("({}) IN ({})", q.select.join(", "), inner_sql.trim_end_matches(';')));
    }
    if !conds.is_empty() {
        let _ = write!(sql, " WHERE {}", conds.join(" AND "));
    }
    if !q.group_by.is_empty() {
        let g = q.group_by.join(", ");
        let _ = write!(sql, " GROUP BY {g} ORDER BY {g}");
    }
    if let Some(o) = q.order {
        let _ = write!(sql, " ORDER BY Value {}", if o == Order::Asc { "ASC" } else { "DESC" });
    }
    if let Some(k) = q.limit {
        let _ = write!(sql, " LIMIT {k}");
    }
    sql.push(';');
    sql
}
