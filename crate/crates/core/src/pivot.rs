//! Pivoting relational tables into HCTs, rendering, and the inverse.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Fixed;
use crate::tablegen::{
    AggFun, AggPos, ColAggPos, ColumnGroup, IndividualTableTemplate, RelRow, RelationalTable, RowAggPos,
    RowFormat, ShuffleMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggScope {
    Global,
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Value,
    Aggregate {
        scope: AggScope,
        implicit: bool,
    },
    /// Empty parent line of an indented row header.
    Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderNode {
    /// Header level (0 = outermost).
    pub level: usize,
    pub label: String,
    pub kind: NodeKind,
    /// Number of leaf descendants (1 for a leaf).
    pub span: usize,
    pub children: Vec<HeaderNode>,
}

impl HeaderNode {
    fn value(level: usize, label: String, children: Vec<HeaderNode>) -> Self {
        HeaderNode { level, label, kind: NodeKind::Value, span: 0, children }
    }

    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn fix_spans(&mut self) -> usize {
        self.span = if self.is_leaf() { 1 } else { self.children.iter_mut().map(|c| c.fix_spans()).sum() };
        self.span
    }
}

/// One header axis: the units placed on it and its node forest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderTree {
    pub units: Vec<ColumnGroup>,
    pub roots: Vec<HeaderNode>,
}

/// A flattened header line: a core-grid row or column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    pub kind: NodeKind,
    /// Full value path for value lines; the group prefix for local
    /// aggregates and label lines; empty for global aggregates.
    pub path: Vec<String>,
    pub label: String,
    pub level: usize,
}

impl Line {
    pub fn is_value(&self) -> bool {
        self.kind == NodeKind::Value
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self.kind, NodeKind::Aggregate { .. })
    }
}

impl HeaderTree {
    /// Relational column names on this axis, outermost first.
    pub fn columns(&self) -> Vec<String> {
        self.units.iter().flat_map(|u| u.columns.clone()).collect()
    }

    pub fn depth(&self) -> usize {
        self.units.iter().map(|u| u.columns.len()).sum()
    }

    /// Leaves in display order, one per core-grid line.
    pub fn lines(&self) -> Vec<Line> {
        fn walk(
            nodes: &[HeaderNode],
            parent: Option<(&HeaderNode, &[String])>,
            prefix: &mut Vec<String>,
            out: &mut Vec<Line>,
        ) {
            for n in nodes {
                match &n.kind {
                    NodeKind::Value => {
                        prefix.push(n.label.clone());
                        if n.is_leaf() {
                            out.push(Line {
                                kind: NodeKind::Value,
                                path: prefix.clone(),
                                label: n.label.clone(),
                                level: n.level,
                            });
                        } else {
                            let p = prefix.clone();
                            walk(&n.children, Some((n, &p)), prefix, out);
                        }
                        prefix.pop();
                    }
                    kind => {
                        let implicit =
                            matches!(kind, NodeKind::Label | NodeKind::Aggregate { implicit: true, .. });
                        let (label, level) = match (implicit, parent) {
                            (true, Some((p, _))) => (p.label.clone(), p.level),
                            _ => (n.label.clone(), n.level),
                        };
                        out.push(Line {
                            kind: kind.clone(),
                            path: parent.map(|(_, p)| p.to_vec()).unwrap_or_default(),
                            label,
                            level,
                        });
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, None, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.roots.iter().map(|r| r.span).sum()
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> Vec<&HeaderNode> {
        fn walk<'a>(nodes: &'a [HeaderNode], out: &mut Vec<&'a HeaderNode>) {
            for n in nodes {
                out.push(n);
                walk(&n.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.roots, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HctTable {
    pub name: String,
    pub title: String,
    pub col_header: HeaderTree,
    pub row_header: HeaderTree,
    /// `core[i][j]`: value at row line `i`, column line `j`; `None` on
    /// label lines.
    pub core: Vec<Vec<Option<Fixed>>>,
    pub row_format: RowFormat,
    pub borders: bool,
    pub agg_pos: AggPos,
    pub agg_fun: AggFun,
    pub agg_name: String,
    pub shuffle: ShuffleMode,
    /// Scale of the base values.
    pub scale: u8,
    pub decimals: u8,
    /// Column groups of the base relational table, in its own order.
    pub rel_groups: Vec<ColumnGroup>,
}

impl HctTable {
    pub fn row_lines(&self) -> Vec<Line> {
        self.row_header.lines()
    }

    pub fn col_lines(&self) -> Vec<Line> {
        self.col_header.lines()
    }

    pub fn has_row_aggregates(&self) -> bool {
        self.agg_pos.row != RowAggPos::None
    }

    pub fn has_col_aggregates(&self) -> bool {
        self.agg_pos.col != ColAggPos::None
    }

    pub fn has_aggregates(&self) -> bool {
        self.agg_pos.any()
    }
}

/// Splits units into (columns, rows) per the shuffle mode. Units never cross
/// axes except under `all`, where a permutation is kept only if its prefix
/// fills exactly `col_depth` column levels.
fn arrange_units<R: Rng + ?Sized>(
    rows: &[ColumnGroup],
    cols: &[ColumnGroup],
    mode: ShuffleMode,
    rng: &mut R,
) -> (Vec<ColumnGroup>, Vec<ColumnGroup>) {
    let mut rows = rows.to_vec();
    let mut cols = cols.to_vec();
    match mode {
        ShuffleMode::None => {}
        ShuffleMode::Rows => rows.shuffle(rng),
        ShuffleMode::Cols => cols.shuffle(rng),
        ShuffleMode::RowsCols => {
            rows.shuffle(rng);
            cols.shuffle(rng);
        }
        ShuffleMode::All => {
            let col_depth: usize = cols.iter().map(|c| c.columns.len()).sum();
            let all: Vec<ColumnGroup> = cols.iter().chain(&rows).cloned().collect();
            let mut valid = Vec::new();
            permutations(all.len(), &mut |perm| {
                let mut acc = 0;
                for (k, &i) in perm.iter().enumerate() {
                    if acc == col_depth {
                        if k > 0 && k < perm.len() {
                            valid.push((perm.to_vec(), k));
                        }
                        return;
                    }
                    acc += all[i].columns.len();
                    if acc > col_depth {
                        return;
                    }
                }
            });
            let (perm, split) = valid.choose(rng).expect("identity split is always valid").clone();
            cols = perm[..split].iter().map(|&i| all[i].clone()).collect();
            rows = perm[split..].iter().map(|&i| all[i].clone()).collect();
        }
    }
    (cols, rows)
}

fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if cur.len() == used.len() {
            f(cur);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, f);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut Vec::new(), &mut vec![false; n], f);
}

/// Value tuples of an axis: cartesian product of each unit's distinct
/// tuples, in order of first appearance.
fn axis_tuples(rel: &RelationalTable, units: &[ColumnGroup]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for u in units {
        let paths = rel.distinct(&u.columns);
        out = out
            .iter()
            .flat_map(|prefix| {
                paths.iter().map(move |p| {
                    let mut t = prefix.clone();
                    t.extend(p.iter().cloned());
                    t
                })
            })
            .collect();
    }
    out
}

fn build_trie(tuples: &[Vec<String>], level: usize) -> Vec<HeaderNode> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Vec<String>>> = HashMap::new();
    for t in tuples {
        let key = t[level].clone();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(t.clone());
    }
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let children =
                if level + 1 < members[0].len() { build_trie(members, level + 1) } else { Vec::new() };
            HeaderNode::value(level, key, children)
        })
        .collect()
}

fn place(nodes: &mut Vec<HeaderNode>, node: HeaderNode, first: bool) {
    if first {
        nodes.insert(0, node);
    } else {
        nodes.push(node);
    }
}

fn insert_local(nodes: &mut [HeaderNode], label: &str, first: bool, implicit: bool) {
    for n in nodes.iter_mut() {
        if n.is_leaf() {
            continue;
        }
        insert_local(&mut n.children, label, first, implicit);
        let agg = HeaderNode {
            level: n.level + 1,
            label: if implicit { String::new() } else { label.to_string() },
            kind: NodeKind::Aggregate { scope: AggScope::Local, implicit },
            span: 1,
            children: Vec::new(),
        };
        place(&mut n.children, agg, first || implicit);
    }
}

fn insert_labels(nodes: &mut [HeaderNode]) {
    for n in nodes.iter_mut() {
        if n.is_leaf() {
            continue;
        }
        insert_labels(&mut n.children);
        n.children.insert(
            0,
            HeaderNode {
                level: n.level + 1,
                label: String::new(),
                kind: NodeKind::Label,
                span: 1,
                children: Vec::new(),
            },
        );
    }
}

fn global_node(label: &str) -> HeaderNode {
    HeaderNode {
        level: 0,
        label: label.to_string(),
        kind: NodeKind::Aggregate { scope: AggScope::Global, implicit: false },
        span: 1,
        children: Vec::new(),
    }
}

/// Pivots `rel` into an HCT laid out per `tpl`.
pub fn pivot<R: Rng + ?Sized>(
    rel: &RelationalTable,
    tpl: &IndividualTableTemplate,
    decimals: u8,
    rng: &mut R,
) -> Result<HctTable> {
    let group = |code: &str| {
        rel.group(code)
            .cloned()
            .ok_or_else(|| Error::MalformedHeader(format!("relational table lacks `{code}`")))
    };
    let rows: Vec<ColumnGroup> = tpl.rows.iter().map(|a| group(&a.code)).collect::<Result<_>>()?;
    let cols: Vec<ColumnGroup> = tpl.columns.iter().map(|a| group(&a.code)).collect::<Result<_>>()?;
    let (col_units, row_units) = arrange_units(&rows, &cols, tpl.shuffle, rng);
    let borders = rng.gen_bool(0.5);

    let mut col_roots = build_trie(&axis_tuples(rel, &col_units), 0);
    let mut row_roots = build_trie(&axis_tuples(rel, &row_units), 0);

    let label = tpl.agg_name1.as_str();
    if tpl.col_row_agg_pos.col != ColAggPos::None {
        let first = tpl.col_row_agg_pos.col == ColAggPos::Left;
        insert_local(&mut col_roots, label, first, false);
        place(&mut col_roots, global_node(label), first);
    }
    let row_aggs = tpl.col_row_agg_pos.row != RowAggPos::None;
    let first = tpl.col_row_agg_pos.row == RowAggPos::Top;
    match (tpl.row_format, row_aggs) {
        // the parent line carries the local aggregate only when aggregates
        // sit on top; otherwise it stays an empty label line
        (RowFormat::Indent, true) if first => insert_local(&mut row_roots, label, true, true),
        (RowFormat::Indent, true) => {
            insert_local(&mut row_roots, label, false, false);
            insert_labels(&mut row_roots);
        }
        (RowFormat::Indent, false) => insert_labels(&mut row_roots),
        (RowFormat::New, true) => insert_local(&mut row_roots, label, first, false),
        (RowFormat::New, false) => {}
    }
    if row_aggs {
        place(&mut row_roots, global_node(label), first);
    }
    for n in col_roots.iter_mut().chain(row_roots.iter_mut()) {
        n.fix_spans();
    }

    let col_header = HeaderTree { units: col_units, roots: col_roots };
    let row_header = HeaderTree { units: row_units, roots: row_roots };
    let core = fill_core(rel, &row_header, &col_header, tpl.agg_fun1, decimals)?;

    Ok(HctTable {
        name: tpl.name.clone(),
        title: tpl.value_name.clone(),
        col_header,
        row_header,
        core,
        row_format: tpl.row_format,
        borders,
        agg_pos: tpl.col_row_agg_pos,
        agg_fun: tpl.agg_fun1,
        agg_name: tpl.agg_name1.clone(),
        shuffle: tpl.shuffle,
        scale: rel.scale,
        decimals,
        rel_groups: rel.groups.clone(),
    })
}

/// Value paths covered by a header line.
fn scope_of<'a>(line: &Line, values: &'a [Vec<String>]) -> Vec<&'a Vec<String>> {
    values.iter().filter(|v| v.starts_with(&line.path)).collect()
}

fn fill_core(
    rel: &RelationalTable,
    rows: &HeaderTree,
    cols: &HeaderTree,
    fun: AggFun,
    decimals: u8,
) -> Result<Vec<Vec<Option<Fixed>>>> {
    let ri: Vec<usize> = rows.columns().iter().map(|c| rel.column_index(c).unwrap()).collect();
    let ci: Vec<usize> = cols.columns().iter().map(|c| rel.column_index(c).unwrap()).collect();
    let mut lookup: HashMap<(Vec<String>, Vec<String>), Fixed> = HashMap::new();
    for r in &rel.rows {
        let rk = ri.iter().map(|&i| r.keys[i].clone()).collect();
        let ck = ci.iter().map(|&i| r.keys[i].clone()).collect();
        lookup.insert((rk, ck), r.value);
    }
    let row_lines = rows.lines();
    let col_lines = cols.lines();
    let row_values: Vec<Vec<String>> =
        row_lines.iter().filter(|l| l.is_value()).map(|l| l.path.clone()).collect();
    let col_values: Vec<Vec<String>> =
        col_lines.iter().filter(|l| l.is_value()).map(|l| l.path.clone()).collect();
    let get = |r: &Vec<String>, c: &Vec<String>| {
        lookup
            .get(&(r.clone(), c.clone()))
            .copied()
            .ok_or_else(|| Error::MalformedHeader(format!("no base value for {r:?} x {c:?}")))
    };
    let mut core = Vec::with_capacity(row_lines.len());
    for rl in &row_lines {
        let mut line = Vec::with_capacity(col_lines.len());
        for cl in &col_lines {
            if rl.kind == NodeKind::Label || cl.kind == NodeKind::Label {
                line.push(None);
                continue;
            }
            if rl.is_value() && cl.is_value() {
                line.push(Some(get(&rl.path, &cl.path)?));
                continue;
            }
            let rs = scope_of(rl, &row_values);
            let cs = scope_of(cl, &col_values);
            let mut vals = Vec::with_capacity(rs.len() * cs.len());
            for r in &rs {
                for c in &cs {
                    vals.push(get(r, c)?);
                }
            }
            line.push(fun.apply(&vals, decimals));
        }
        core.push(line);
    }
    Ok(core)
}

/// Rebuilds the relational table from the value cells of an HCT.
pub fn unpivot(hct: &HctTable) -> Result<RelationalTable> {
    let row_cols = hct.row_header.columns();
    let col_cols = hct.col_header.columns();
    let columns: Vec<String> = hct.rel_groups.iter().flat_map(|g| g.columns.clone()).collect();
    let position: HashMap<&str, usize> = columns.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut seen_cols: Vec<&String> = row_cols.iter().chain(&col_cols).collect();
    seen_cols.sort();
    let mut expected: Vec<&String> = columns.iter().collect();
    expected.sort();
    if seen_cols != expected {
        return Err(Error::MalformedHeader("header columns differ from base columns".into()));
    }
    let row_lines = hct.row_lines();
    let col_lines = hct.col_lines();
    if hct.core.len() != row_lines.len() || hct.core.iter().any(|r| r.len() != col_lines.len()) {
        return Err(Error::MalformedHeader("core grid does not match header leaves".into()));
    }
    let mut rows = Vec::new();
    for (rl, cells) in row_lines.iter().zip(&hct.core) {
        if !rl.is_value() {
            continue;
        }
        if rl.path.len() != row_cols.len() {
            return Err(Error::MalformedHeader(format!("row path {:?} is not a leaf", rl.path)));
        }
        for (cl, cell) in col_lines.iter().zip(cells) {
            if !cl.is_value() {
                continue;
            }
            if cl.path.len() != col_cols.len() {
                return Err(Error::MalformedHeader(format!("column path {:?} is not a leaf", cl.path)));
            }
            let value = cell.ok_or_else(|| Error::MalformedHeader("empty value cell".into()))?;
            let mut keys = vec![String::new(); columns.len()];
            for (name, v) in row_cols.iter().zip(&rl.path).chain(col_cols.iter().zip(&cl.path)) {
                keys[position[name.as_str()]] = v.clone();
            }
            rows.push(RelRow { keys, value });
        }
    }
    Ok(RelationalTable { columns, groups: hct.rel_groups.clone(), rows, scale: hct.scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Html,
    Csv,
    Markdown,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Html => "html",
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "html" => Ok(Format::Html),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(Error::InvalidTemplate(format!("unknown format `{other}`"))),
        }
    }
}

pub fn render(hct: &HctTable, format: Format) -> String {
    match format {
        Format::Html => render_html(hct),
        Format::Csv => render_csv(hct),
        Format::Markdown => render_markdown(hct),
    }
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn cell_text(v: &Option<Fixed>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header nodes on the path to each leaf, outermost first.
fn leaf_paths(tree: &HeaderTree) -> Vec<Vec<&HeaderNode>> {
    fn walk<'a>(
        nodes: &'a [HeaderNode],
        stack: &mut Vec<&'a HeaderNode>,
        out: &mut Vec<Vec<&'a HeaderNode>>,
    ) {
        for n in nodes {
            stack.push(n);
            if n.is_leaf() {
                out.push(stack.clone());
            } else {
                walk(&n.children, stack, out);
            }
            stack.pop();
        }
    }
    let mut out = Vec::new();
    walk(&tree.roots, &mut Vec::new(), &mut out);
    out
}

fn render_html(hct: &HctTable) -> String {
    let col_depth = hct.col_header.depth();
    let row_depth = hct.row_header.depth();
    let indent = hct.row_format == RowFormat::Indent;
    let row_width = if indent { 1 } else { row_depth };
    let mut s = String::new();
    let _ = writeln!(s, "<table border=\"{}\">", u8::from(hct.borders));
    let _ = writeln!(s, "<caption>{}</caption>", escape_html(&hct.title));
    s.push_str("<thead>\n");
    for level in 0..col_depth {
        s.push_str("<tr>");
        if level == 0 {
            let _ = write!(s, "<th rowspan=\"{col_depth}\" colspan=\"{row_width}\"></th>");
        }
        for n in hct.col_header.nodes().into_iter().filter(|n| n.level == level) {
            let text = escape_html(&n.label);
            if n.is_leaf() && level + 1 < col_depth {
                let _ = write!(s, "<th rowspan=\"{}\">{text}</th>", col_depth - level);
            } else if n.span > 1 {
                let _ = write!(s, "<th colspan=\"{}\">{text}</th>", n.span);
            } else {
                let _ = write!(s, "<th>{text}</th>");
            }
        }
        s.push_str("</tr>\n");
    }
    s.push_str("</thead>\n<tbody>\n");
    let lines = hct.row_lines();
    let paths = leaf_paths(&hct.row_header);
    for (i, (line, cells)) in lines.iter().zip(&hct.core).enumerate() {
        s.push_str("<tr>");
        if indent {
            let pad = line.level as f32 * 1.5;
            let _ = write!(
                s,
                "<th style=\"text-align:left;padding-left:{pad}em\">{}</th>",
                escape_html(&line.label)
            );
        } else {
            let path = &paths[i];
            for (k, n) in path.iter().enumerate() {
                let starts_here = i == 0 || paths[i - 1].get(k).is_none_or(|prev| !std::ptr::eq(*prev, *n));
                if !starts_here {
                    continue;
                }
                let text = escape_html(&n.label);
                let mut attrs = String::new();
                if n.span > 1 {
                    let _ = write!(attrs, " rowspan=\"{}\"", n.span);
                }
                if n.is_leaf() && n.level + 1 < row_depth {
                    let _ = write!(attrs, " colspan=\"{}\"", row_depth - n.level);
                }
                let _ = write!(s, "<th{attrs}>{text}</th>");
            }
        }
        for c in cells {
            let _ = write!(s, "<td>{}</td>", cell_text(c));
        }
        s.push_str("</tr>\n");
    }
    s.push_str("</tbody>\n</table>\n");
    s
}

/// The table as a grid of strings with merged headers repeated across their
/// spans: `col_depth` header lines, then one line per row leaf.
pub fn flatten(hct: &HctTable) -> Vec<Vec<String>> {
    let col_depth = hct.col_header.depth();
    let row_depth = hct.row_header.depth();
    let indent = hct.row_format == RowFormat::Indent;
    let row_width = if indent { 1 } else { row_depth };
    let col_paths = leaf_paths(&hct.col_header);
    let mut grid = Vec::new();
    for level in 0..col_depth {
        let mut line = vec![String::new(); row_width];
        for p in &col_paths {
            line.push(p[level.min(p.len() - 1)].label.clone());
        }
        grid.push(line);
    }
    let row_paths = leaf_paths(&hct.row_header);
    for ((line, cells), path) in hct.row_lines().iter().zip(&hct.core).zip(&row_paths) {
        let mut out = Vec::new();
        if indent {
            out.push(format!("{}{}", "  ".repeat(line.level), line.label));
        } else {
            for level in 0..row_depth {
                out.push(path[level.min(path.len() - 1)].label.clone());
            }
        }
        out.extend(cells.iter().map(cell_text));
        grid.push(out);
    }
    grid
}

fn render_csv(hct: &HctTable) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for line in flatten(hct) {
        w.write_record(&line).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn render_markdown(hct: &HctTable) -> String {
    let esc = |c: &String| c.replace('|', "\\|");
    let grid = flatten(hct);
    let mut s = String::new();
    for (i, line) in grid.iter().enumerate() {
        s.push_str("| ");
        s.push_str(&line.iter().map(esc).collect::<Vec<_>>().join(" | "));
        s.push_str(" |\n");
        if i == 0 {
            s.push('|');
            s.push_str(&"---|".repeat(line.len()));
            s.push('\n');
        }
    }
    s
}

/// The base relational table as a plain HTML table (`_DB.html`).
pub fn render_relational_html(rel: &RelationalTable, title: &str) -> String {
    let mut s = String::from("<table border=\"1\">\n");
    let _ = writeln!(s, "<caption>{}</caption>", escape_html(title));
    s.push_str("<thead>\n<tr>");
    for c in rel.columns.iter().map(String::as_str).chain([RelationalTable::VALUE]) {
        let _ = write!(s, "<th>{}</th>", escape_html(c));
    }
    s.push_str("</tr>\n</thead>\n<tbody>\n");
    for r in &rel.rows {
        s.push_str("<tr>");
        for k in &r.keys {
            let _ = write!(s, "<td>{}</td>", escape_html(k));
        }
        let _ = write!(s, "<td>{}</td>", r.value);
        s.push_str("</tr>\n");
    }
    s.push_str("</tbody>\n</table>\n");
    s
}

/// File stems for instance `n` of a table: `[name]_n_HCT` and `[name]_n_DB`.
pub fn file_stems(name: &str, n: usize) -> (String, String) {
    (format!("{name}_{n}_HCT"), format!("{name}_{n}_DB"))
}
