//! Table and question properties recorded with every QA pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::pivot::{AggScope, HctTable, HeaderNode, HeaderTree, NodeKind};
use crate::query::oracle::oracle_evaluate;
use crate::query::QueryInstance;
use crate::tablegen::{IndividualTableTemplate, RelationalTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nesting {
    pub present: bool,
    pub balanced: bool,
    pub symmetric: bool,
    pub asymmetric: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregation {
    pub global: bool,
    pub local: bool,
    pub explicit: bool,
    pub implicit: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableProperties {
    pub col_nesting: Nesting,
    pub row_nesting: Nesting,
    pub col_aggregation: Aggregation,
    pub row_aggregation: Aggregation,
    pub standard_relational: bool,
}

/// Label shape of a subtree, value nodes only.
fn shape(n: &HeaderNode) -> String {
    let kids: Vec<String> = n.children.iter().filter(|c| c.kind == NodeKind::Value).map(shape).collect();
    if kids.is_empty() {
        n.label.clone()
    } else {
        format!("{}({})", n.label, kids.join(","))
    }
}

/// Children of every value node repeat the same labels below each sibling.
fn symmetric(nodes: &[HeaderNode]) -> bool {
    let values: Vec<&HeaderNode> = nodes.iter().filter(|n| n.kind == NodeKind::Value).collect();
    let inner = |n: &&HeaderNode| {
        n.children.iter().filter(|c| c.kind == NodeKind::Value).map(shape).collect::<Vec<_>>()
    };
    if let Some(first) = values.first() {
        let reference = inner(first);
        if values.iter().any(|n| inner(n) != reference) {
            return false;
        }
    }
    values.iter().all(|n| symmetric(&n.children))
}

/// Depth of value levels under `nodes`; `None` when branches disagree.
fn uniform_depth(nodes: &[HeaderNode]) -> Option<usize> {
    let mut depth = None;
    for n in nodes.iter().filter(|n| n.kind == NodeKind::Value) {
        let d = if n.children.is_empty() { 1 } else { uniform_depth(&n.children)? + 1 };
        match depth {
            None => depth = Some(d),
            Some(x) if x != d => return None,
            _ => {}
        }
    }
    depth
}

fn nesting(tree: &HeaderTree) -> Nesting {
    let present = tree.depth() >= 2;
    if !present {
        return Nesting::default();
    }
    let sym = symmetric(&tree.roots);
    Nesting { present, balanced: uniform_depth(&tree.roots).is_some(), symmetric: sym, asymmetric: !sym }
}

fn aggregation(tree: &HeaderTree) -> Aggregation {
    let mut a = Aggregation::default();
    for n in tree.nodes() {
        if let NodeKind::Aggregate { scope, implicit } = n.kind {
            match scope {
                AggScope::Global => a.global = true,
                AggScope::Local => a.local = true,
            }
            if implicit {
                a.implicit = true;
            } else {
                a.explicit = true;
            }
        }
    }
    a
}

/// Structural flags of a pivoted table. `tpl` only confirms the layout the
/// tree was built from; every flag is read off the header trees.
pub fn annotate_table(hct: &HctTable, tpl: &IndividualTableTemplate) -> TableProperties {
    debug_assert_eq!(hct.agg_pos, tpl.col_row_agg_pos);
    let col_nesting = nesting(&hct.col_header);
    let row_nesting = nesting(&hct.row_header);
    let col_aggregation = aggregation(&hct.col_header);
    let row_aggregation = aggregation(&hct.row_header);
    let standard_relational = !col_nesting.present
        && !row_nesting.present
        && col_aggregation == Aggregation::default()
        && row_aggregation == Aggregation::default();
    TableProperties { col_nesting, row_nesting, col_aggregation, row_aggregation, standard_relational }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFilter {
    pub present: bool,
    pub lookup: bool,
    pub expression: bool,
    pub involved_columns: usize,
    /// Deepest header level (1-based, within its attribute) of a filtered column.
    pub max_level: usize,
    pub retained_single: bool,
    pub condition_count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnedColumns {
    pub plain: bool,
    pub expression: bool,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationProps {
    pub present: bool,
    pub functions: Vec<String>,
    pub grouping_local: bool,
    pub grouping_global: bool,
    pub in_table: bool,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank {
    pub present: bool,
    pub on_plain: bool,
    pub on_expression: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionProperties {
    pub template_id: u8,
    pub row_filter: RowFilter,
    pub returned_columns: ReturnedColumns,
    pub aggregation: AggregationProps,
    pub rank: Rank,
    pub yes_no: bool,
}

impl QuestionProperties {
    /// Every non-cardinality field, for comparing instances of one template.
    pub fn signature(&self) -> Vec<bool> {
        let f = &self.row_filter;
        let r = &self.returned_columns;
        let a = &self.aggregation;
        vec![
            f.present,
            f.lookup,
            f.expression,
            r.plain,
            r.expression,
            a.present,
            a.grouping_local,
            a.grouping_global,
            a.in_table,
            self.rank.present,
            self.rank.on_plain,
            self.rank.on_expression,
            self.yes_no,
        ]
    }
}

fn selected_rows(q: &QueryInstance, rel: &RelationalTable) -> usize {
    // selection count of the bare filter: strip everything but conditions
    let bare = QueryInstance {
        aggs: Vec::new(),
        group_by: Vec::new(),
        report_keys: false,
        order: None,
        limit: None,
        compare: None,
        select: Vec::new(),
        inner: None,
        ..q.clone()
    };
    oracle_evaluate(&bare, rel).map(|a| a.rows.len()).unwrap_or(0)
}

pub fn annotate_question(
    q: &QueryInstance,
    rel: &RelationalTable,
    _tpl: &IndividualTableTemplate,
) -> QuestionProperties {
    let mut columns: Vec<String> = Vec::new();
    let mut condition_count = 0;
    let mut max_level = 0;
    let mut visit = |q: &QueryInstance| {
        for c in q.conditions() {
            condition_count += c.columns.len();
            for col in &c.columns {
                if !columns.contains(col) {
                    columns.push(col.clone());
                }
            }
            if let Some(g) = rel.group(&c.code) {
                for col in &c.columns {
                    if let Some(p) = g.columns.iter().position(|x| x == col) {
                        max_level = max_level.max(p + 1);
                    }
                }
            }
        }
    };
    visit(q);
    if let Some(inner) = &q.inner {
        visit(inner);
    }
    let involved_columns = columns.len();
    let width = match oracle_evaluate(q, rel) {
        Ok(a) => a.rows.first().map_or(0, |r| r.len()),
        Err(_) => 0,
    };
    let has_aggs = !q.aggs.is_empty();
    QuestionProperties {
        template_id: q.template_id,
        row_filter: RowFilter {
            present: condition_count > 0 || q.compare.is_some(),
            lookup: condition_count > 0,
            expression: q.compare.is_some() || q.inner.is_some(),
            involved_columns,
            max_level,
            retained_single: selected_rows(q, rel) == 1,
            condition_count,
        },
        returned_columns: ReturnedColumns { plain: !has_aggs, expression: has_aggs, count: width },
        aggregation: AggregationProps {
            present: has_aggs,
            functions: q.aggs.iter().map(|a| a.as_str().to_string()).collect(),
            grouping_local: has_aggs && !q.group_by.is_empty(),
            grouping_global: has_aggs && q.group_by.is_empty(),
            in_table: q.template_id == 5,
            count: q.aggs.len(),
        },
        rank: Rank {
            present: q.order.is_some(),
            on_plain: q.order.is_some() && !has_aggs,
            on_expression: q.order.is_some() && has_aggs,
        },
        yes_no: false,
    }
}

fn flatten_into(prefix: &str, v: Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, out);
            }
        }
        Value::Array(items) => {
            let joined: Vec<String> = items
                .into_iter()
                .map(|i| i.as_str().map(str::to_string).unwrap_or_else(|| i.to_string()))
                .collect();
            out.insert(prefix.to_string(), Value::from(joined.join(",")));
        }
        other => {
            out.insert(prefix.to_string(), other);
        }
    }
}

/// Flat `key -> bool / int / string` map, keys prefixed `table.` and `question.`.
pub fn metadata(table: &TableProperties, question: &QuestionProperties) -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    flatten_into("table", serde_json::to_value(table).expect("plain struct"), &mut out);
    flatten_into("question", serde_json::to_value(question).expect("plain struct"), &mut out);
    out
}
