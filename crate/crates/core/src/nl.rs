//! Question templates and their mini language.
//!
//! A template is split on whitespace into *units*; a chunk ending in `_`,
//! `__` or `==` is glued to the next one. Inside a unit, `__` separates
//! chained members and `==word==` a conditional separator; inside a member,
//! `_` links elements: plain words, `a/b` alternations, `$Level`
//! placeholders, `$RESERVED` variables and `((word))` guards.
//!
//! Rendering rules:
//! * a member holding a placeholder or reserved variable renders iff that
//!   variable is present; within a unit only the deepest present level of a
//!   hierarchy renders;
//! * a word-only member renders iff some variable member of its unit does
//!   (always, if the unit has no variable member);
//! * `==word==` renders iff both neighbouring members render;
//! * a unit holding a guard renders iff the guarded word is absent from the
//!   rest of the sentence.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::query::{CompareOp, Order, QueryInstance, UnitCondition};
use crate::tablegen::RelationalTable;
use crate::vocab::{normalize_name, DomainVocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reserved {
    Expr,
    GroupBy,
    TopK,
    OrderByDesc,
    OpPAttr,
    OpAndVal,
    ReportAttr,
}

impl Reserved {
    const ALL: [(Reserved, &'static str); 7] = [
        (Reserved::Expr, "EXPR"),
        (Reserved::GroupBy, "GROUPBY"),
        (Reserved::TopK, "TOPK"),
        (Reserved::OrderByDesc, "ORDERBYDESC"),
        (Reserved::OpPAttr, "OPPATTR"),
        (Reserved::OpAndVal, "OPANDVAL"),
        (Reserved::ReportAttr, "REPORTATTR"),
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Elem {
    Word(String),
    Alt(String, String),
    /// Level placeholder, resolved to a relational column name.
    Var(String),
    Reserved(Reserved),
    Guard(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub elems: Vec<Elem>,
}

impl Member {
    fn vars(&self) -> impl Iterator<Item = &Elem> {
        self.elems.iter().filter(|e| matches!(e, Elem::Var(_) | Elem::Reserved(_)))
    }

    fn has_var(&self) -> bool {
        self.vars().next().is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sep {
    Chain,
    Cond(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub members: Vec<Member>,
    /// `seps[i]` sits between `members[i]` and `members[i + 1]`.
    pub seps: Vec<Sep>,
}

impl Unit {
    fn has_level_var(&self) -> bool {
        self.members.iter().any(|m| m.elems.iter().any(|e| matches!(e, Elem::Var(_))))
    }

    fn guard(&self) -> Option<&str> {
        self.members.iter().flat_map(|m| &m.elems).find_map(|e| match e {
            Elem::Guard(w) => Some(w.as_str()),
            _ => None,
        })
    }

    fn has_reserved(&self, r: Reserved) -> bool {
        self.members.iter().flat_map(|m| &m.elems).any(|e| *e == Elem::Reserved(r))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateAst {
    pub units: Vec<Unit>,
}

impl TemplateAst {
    pub fn placeholders(&self) -> Vec<&str> {
        self.units
            .iter()
            .flat_map(|u| &u.members)
            .flat_map(|m| &m.elems)
            .filter_map(|e| match e {
                Elem::Var(v) => Some(v.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn cond_separators(&self) -> usize {
        self.units.iter().flat_map(|u| &u.seps).filter(|s| matches!(s, Sep::Cond(_))).count()
    }
}

/// Placeholder names a template may use, mapped to column names.
#[derive(Clone, Debug, Default)]
pub struct Names {
    map: BTreeMap<String, String>,
}

impl Names {
    pub fn new<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        Names { map: pairs.into_iter().collect() }
    }

    /// Every level name of `codes`, plus each independent attribute's code.
    pub fn from_vocab(vocab: &DomainVocabulary, codes: &[String], nested: &[Vec<String>]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for code in codes {
            let attr = vocab.attribute(code)?;
            for n in &attr.names {
                map.insert(n.clone(), n.clone());
            }
            if attr.names.len() == 1 {
                map.insert(normalize_name(code), attr.names[0].clone());
            }
        }
        for group in nested {
            for n in group {
                let n = normalize_name(n);
                if vocab.level(&n).is_none() {
                    return Err(Error::UnresolvedPlaceholder(n));
                }
                map.insert(n.clone(), n);
            }
        }
        Ok(Names { map })
    }

    /// Longest known name at the start of `s`.
    fn longest(&self, s: &str) -> Option<(&str, &str)> {
        self.map
            .iter()
            .filter(|(k, _)| s.starts_with(k.as_str()))
            .max_by_key(|(k, _)| k.len())
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn parse_member(text: &str, names: &Names) -> Result<Member> {
    let mut elems = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix('_') {
            rest = r;
            continue;
        }
        if let Some(r) = rest.strip_prefix('$') {
            let reserved =
                Reserved::ALL.iter().filter(|(_, n)| r.starts_with(n)).max_by_key(|(_, n)| n.len());
            let level = names.longest(r);
            match (reserved, level) {
                (Some((res, n)), l) if l.is_none_or(|(k, _)| k.len() <= n.len()) => {
                    elems.push(Elem::Reserved(*res));
                    rest = &r[n.len()..];
                }
                (_, Some((k, col))) => {
                    elems.push(Elem::Var(col.to_string()));
                    rest = &r[k.len()..];
                }
                _ => {
                    let ident: String = r.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
                    if !ident.is_empty() && ident.chars().all(|c| c.is_ascii_uppercase()) {
                        return Err(Error::NlParse(format!("unknown reserved variable `${ident}`")));
                    }
                    return Err(Error::UnresolvedPlaceholder(ident));
                }
            }
            continue;
        }
        if let Some(r) = rest.strip_prefix("((") {
            let end = r.find("))").ok_or_else(|| Error::NlParse(format!("unbalanced `((` in `{text}`")))?;
            elems.push(Elem::Guard(r[..end].replace('_', " ")));
            rest = &r[end + 2..];
            continue;
        }
        if rest.starts_with("))") {
            return Err(Error::NlParse(format!("unbalanced `))` in `{text}`")));
        }
        let end = rest.find(['_', '$', '(']).unwrap_or(rest.len());
        let end = if end == 0 { 1 } else { end };
        let word = &rest[..end];
        elems.push(match word.split_once('/') {
            Some((a, b)) => Elem::Alt(a.to_string(), b.to_string()),
            None => Elem::Word(word.to_string()),
        });
        rest = &rest[end..];
    }
    Ok(Member { elems })
}

fn parse_unit(text: &str, names: &Names) -> Result<Unit> {
    let mut members = Vec::new();
    let mut seps = Vec::new();
    let mut current = String::new();
    let mut rest = text;
    let flush = |current: &mut String, members: &mut Vec<Member>| -> Result<()> {
        if current.trim_matches('_').is_empty() {
            current.clear();
            return Ok(());
        }
        members.push(parse_member(current, names)?);
        current.clear();
        Ok(())
    };
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("==") {
            let end = r.find("==").ok_or_else(|| Error::NlParse(format!("unterminated `==` in `{text}`")))?;
            flush(&mut current, &mut members)?;
            seps.push(Sep::Cond(r[..end].to_string()));
            rest = &r[end + 2..];
            continue;
        }
        if let Some(r) = rest.strip_prefix("__") {
            // `$Import_Export__x` must keep the placeholder whole; `__` never
            // occurs inside a level name.
            flush(&mut current, &mut members)?;
            if !members.is_empty() && members.len() > seps.len() {
                seps.push(Sep::Chain);
            }
            rest = r;
            continue;
        }
        let c = rest.chars().next().unwrap();
        current.push(c);
        rest = &rest[c.len_utf8()..];
    }
    flush(&mut current, &mut members)?;
    if seps.len() >= members.len() && !seps.is_empty() {
        seps.truncate(members.len().saturating_sub(1));
    }
    if members.is_empty() {
        return Err(Error::NlParse(format!("empty unit `{text}`")));
    }
    Ok(Unit { members, seps })
}

fn split_units(text: &str) -> Vec<String> {
    let mut units: Vec<String> = Vec::new();
    let mut glue = false;
    for chunk in text.split_whitespace() {
        if glue {
            units.last_mut().unwrap().push_str(chunk);
        } else {
            units.push(chunk.to_string());
        }
        glue = chunk.ends_with('_') || chunk.ends_with("==");
    }
    units
}

fn parse_body(text: &str, names: &Names) -> Result<TemplateAst> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::NlParse("empty template".into()));
    }
    if text.starts_with('$') {
        return Err(Error::NlParse("a template must not start with `$`".into()));
    }
    if text.matches("((").count() != text.matches("))").count() {
        return Err(Error::NlParse(format!("unbalanced `((`/`))` in `{text}`")));
    }
    let units = split_units(text).iter().map(|u| parse_unit(u, names)).collect::<Result<_>>()?;
    Ok(TemplateAst { units })
}

/// Parses a question template; it must end with ` ?`.
pub fn parse_nl_template(text: &str, names: &Names) -> Result<TemplateAst> {
    let t = text.trim_end();
    let body = t
        .strip_suffix(" ?")
        .ok_or_else(|| Error::NlParse(format!("template must end with ` ?`: `{text}`")))?;
    if body.contains('?') {
        return Err(Error::NlParse(format!("more than one `?` in `{text}`")));
    }
    parse_body(body, names)
}

/// Parses the report sentence (`Please, report the corresponding $REPORTATTR.`).
pub fn parse_report_template(text: &str, names: &Names) -> Result<TemplateAst> {
    let ast = parse_body(text, names)?;
    if !ast.units.iter().any(|u| u.has_reserved(Reserved::ReportAttr)) {
        return Err(Error::NlParse("report template lacks $REPORTATTR".into()));
    }
    Ok(ast)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlTemplateSet {
    pub table_name: String,
    pub row_col_codes: Vec<String>,
    pub value_meaning: String,
    pub simplify_nested: Vec<Vec<String>>,
    pub template_report: String,
    pub templates: BTreeMap<u8, Vec<String>>,
}

impl NlTemplateSet {
    pub fn from_json(doc: &Value) -> Result<Self> {
        let obj =
            doc.as_object().ok_or_else(|| Error::NlParse("template document must be an object".into()))?;
        let get_str = |k: &str| -> Result<String> {
            obj.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::MissingKey { context: "NL templates".into(), key: k.into() })
        };
        let str_list = |v: &Value| -> Option<Vec<String>> {
            v.as_array()?.iter().map(|x| x.as_str().map(str::to_string)).collect()
        };
        let mut templates = BTreeMap::new();
        let mut set = NlTemplateSet {
            table_name: get_str("tableName")?,
            row_col_codes: obj.get("rowColCodes").and_then(str_list).ok_or_else(|| Error::MissingKey {
                context: "NL templates".into(),
                key: "rowColCodes".into(),
            })?,
            value_meaning: get_str("valueMeaning")?,
            simplify_nested: match obj.get("simplifyNested") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .and_then(|a| a.iter().map(str_list).collect())
                    .ok_or_else(|| Error::NlParse("simplifyNested must be a list of name lists".into()))?,
            },
            template_report: get_str("template_report")?,
            templates: BTreeMap::new(),
        };
        for (k, v) in obj {
            match k.as_str() {
                "tableName" | "rowColCodes" | "valueMeaning" | "simplifyNested" | "template_report" => {}
                _ => {
                    let id: u8 = k
                        .strip_prefix("template_")
                        .and_then(|n| n.parse().ok())
                        .filter(|n| (1..=14).contains(n))
                        .ok_or_else(|| Error::UnknownKey {
                            context: "NL templates".into(),
                            key: k.clone(),
                        })?;
                    let list = match v {
                        Value::String(s) => vec![s.clone()],
                        other => str_list(other).ok_or_else(|| {
                            Error::NlParse(format!("`{k}` must be a string or list of strings"))
                        })?,
                    };
                    if list.is_empty() {
                        return Err(Error::NlParse(format!("`{k}` has no variant")));
                    }
                    templates.insert(id, list);
                }
            }
        }
        set.templates = templates;
        Ok(set)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("tableName".into(), self.table_name.clone().into());
        m.insert("rowColCodes".into(), self.row_col_codes.clone().into());
        m.insert("valueMeaning".into(), self.value_meaning.clone().into());
        m.insert("simplifyNested".into(), serde_json::to_value(&self.simplify_nested).unwrap());
        m.insert("template_report".into(), self.template_report.clone().into());
        for (id, list) in &self.templates {
            m.insert(format!("template_{id}"), list.clone().into());
        }
        Value::Object(m)
    }
}

/// A template set with every variant parsed.
#[derive(Clone, Debug)]
pub struct ParsedTemplates {
    pub set: NlTemplateSet,
    pub asts: BTreeMap<u8, Vec<TemplateAst>>,
    pub report: TemplateAst,
    /// Groups of columns of which only the deepest present one is named.
    pub nested: Vec<Vec<String>>,
}

impl ParsedTemplates {
    pub fn new(set: NlTemplateSet, vocab: &DomainVocabulary) -> Result<Self> {
        let names = Names::from_vocab(vocab, &set.row_col_codes, &set.simplify_nested)?;
        let mut asts = BTreeMap::new();
        for (id, list) in &set.templates {
            let parsed = list.iter().map(|t| parse_nl_template(t, &names)).collect::<Result<Vec<_>>>()?;
            asts.insert(*id, parsed);
        }
        let report = parse_report_template(&set.template_report, &names)?;
        let mut nested: Vec<Vec<String>> =
            set.simplify_nested.iter().map(|g| g.iter().map(|n| normalize_name(n)).collect()).collect();
        for code in &set.row_col_codes {
            let attr = vocab.attribute(code)?;
            if attr.names.len() > 1 && !nested.contains(&attr.names) {
                nested.push(attr.names.clone());
            }
        }
        Ok(ParsedTemplates { set, asts, report, nested })
    }

    pub fn supports(&self, template_id: u8) -> bool {
        match template_id {
            15 => self.asts.contains_key(&13) && self.asts.contains_key(&14),
            id => self.asts.contains_key(&id),
        }
    }
}

/// Values joined as `a`, `a or b`, `a, b, or c`.
pub fn join_list(items: &[String], conj: &str) -> String {
    match items {
        [] => String::new(),
        [a] => a.clone(),
        [a, b] => format!("{a} {conj} {b}"),
        [init @ .., last] => format!("{}, {conj} {last}", init.join(", ")),
    }
}

/// Everything a template needs from a query.
struct Ctx<'a> {
    vocab: &'a DomainVocabulary,
    nested: &'a [Vec<String>],
    value_meaning: &'a str,
    rows: &'a [UnitCondition],
    cols: &'a [UnitCondition],
    q: &'a QueryInstance,
    count: usize,
    order: Option<Order>,
}

impl Ctx<'_> {
    /// Sorted values of a conditioned column, if any.
    fn values(&self, column: &str) -> Option<Vec<String>> {
        self.rows
            .iter()
            .chain(self.cols)
            .find_map(|c| c.columns.iter().position(|n| n == column).map(|lvl| c.level_values(lvl)))
    }

    fn display(&self, column: &str) -> String {
        if column == RelationalTable::VALUE {
            self.value_meaning.to_string()
        } else {
            self.vocab.display_name(column)
        }
    }

    fn reserved(&self, r: Reserved) -> Option<String> {
        let q = self.q;
        let names = |cols: &[String]| cols.iter().map(|c| self.display(c)).collect::<Vec<_>>();
        match r {
            Reserved::Expr => (!q.aggs.is_empty()).then(|| {
                let words: Vec<String> = q.aggs.iter().map(|a| a.word().to_string()).collect();
                join_list(&words, "and")
            }),
            Reserved::GroupBy => (!q.group_by.is_empty())
                .then(|| format!("for each {},", join_list(&names(&q.group_by), "and"))),
            Reserved::TopK => q.limit.map(|k| k.to_string()),
            Reserved::OrderByDesc => self.order.map(|_| "ordered by".to_string()),
            Reserved::OpPAttr => (!q.select.is_empty()).then(|| join_list(&names(&q.select), "and")),
            Reserved::OpAndVal => q.compare.map(|c| {
                let w = match c.op {
                    CompareOp::Gt => "greater than",
                    CompareOp::Lt => "lower than",
                };
                format!("{w} {}", c.threshold)
            }),
            Reserved::ReportAttr => (!q.report.is_empty()).then(|| join_list(&names(&q.report), "and")),
        }
    }

    fn nest_group(&self, column: &str) -> Option<&Vec<String>> {
        self.nested.iter().find(|g| g.iter().any(|c| c == column))
    }
}

fn render_member(m: &Member, ctx: &Ctx) -> String {
    let mut words: Vec<String> = Vec::new();
    for (i, e) in m.elems.iter().enumerate() {
        match e {
            Elem::Word(w) => words.push(w.clone()),
            Elem::Guard(w) => words.push(w.clone()),
            Elem::Var(col) => words.push(join_list(&ctx.values(col).unwrap_or_default(), "or")),
            Elem::Reserved(r) => words.push(ctx.reserved(*r).unwrap_or_default()),
            Elem::Alt(a, b) => {
                let before_topk = m.elems.get(i + 1) == Some(&Elem::Reserved(Reserved::TopK));
                let after_order = i > 0 && m.elems[i - 1] == Elem::Reserved(Reserved::OrderByDesc);
                let first =
                    if before_topk || after_order { ctx.order == Some(Order::Desc) } else { ctx.count == 1 };
                words.push(if first { a.clone() } else { b.clone() });
            }
        }
    }
    words.retain(|w| !w.is_empty());
    words.join(" ")
}

fn render_unit(u: &Unit, ctx: &Ctx) -> String {
    let present: Vec<Option<bool>> = u
        .members
        .iter()
        .map(|m| {
            if !m.has_var() {
                return None;
            }
            Some(m.vars().all(|e| match e {
                Elem::Var(col) => ctx.values(col).is_some(),
                Elem::Reserved(r) => ctx.reserved(*r).is_some(),
                _ => true,
            }))
        })
        .collect();
    // only the deepest present level of a nested group
    let mut shown = present.clone();
    for (i, m) in u.members.iter().enumerate() {
        if shown[i] != Some(true) {
            continue;
        }
        for e in &m.elems {
            let Elem::Var(col) = e else { continue };
            let Some(group) = ctx.nest_group(col) else { continue };
            let depth = group.iter().position(|c| c == col).unwrap();
            let deeper_present = u.members.iter().enumerate().any(|(j, other)| {
                present[j] == Some(true)
                    && other.elems.iter().any(|oe| match oe {
                        Elem::Var(oc) => group.iter().position(|c| c == oc).is_some_and(|d| d > depth),
                        _ => false,
                    })
            });
            if deeper_present {
                shown[i] = Some(false);
            }
        }
    }
    let any_var = shown.contains(&Some(true));
    let has_vars = shown.iter().any(Option::is_some);
    let render: Vec<bool> = shown
        .iter()
        .map(|s| match s {
            Some(v) => *v,
            None => any_var || !has_vars,
        })
        .collect();
    let mut out: Vec<String> = Vec::new();
    for (i, m) in u.members.iter().enumerate() {
        if i > 0 {
            if let Sep::Cond(w) = &u.seps[i - 1] {
                if render[i - 1] && render[i] {
                    out.push(w.clone());
                }
            }
        }
        if render[i] {
            let text = render_member(m, ctx);
            if !text.is_empty() {
                out.push(text);
            }
        }
    }
    out.join(" ")
}

fn words_of(s: &str) -> HashSet<String> {
    s.split(|c: char| !c.is_alphanumeric() && c != '-')
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Renders a run of units with one clause of column conditions, resolving
/// guards against the other units of the run.
fn render_units(units: &[Unit], ctx: &Ctx) -> Vec<String> {
    let mut texts: Vec<String> =
        units.iter().map(|u| if u.guard().is_some() { String::new() } else { render_unit(u, ctx) }).collect();
    for (i, u) in units.iter().enumerate() {
        if let Some(w) = u.guard() {
            let others: String = texts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, t)| t.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let guard_words = words_of(w);
            if !guard_words.iter().all(|g| words_of(&others).contains(g)) {
                texts[i] = render_unit(u, ctx);
            }
        }
    }
    texts
}

fn tidy(s: &str) -> String {
    let joined = s.split_whitespace().collect::<Vec<_>>().join(" ");
    joined.replace(" ?", "?").replace(" .", ".").replace(" ,", ",").replace(",,", ",").replace(",?", "?")
}

/// Number driving singular/plural alternations.
fn count_for(q: &QueryInstance) -> usize {
    if !q.aggs.is_empty() {
        q.aggs.len()
    } else if let Some(k) = q.limit {
        k
    } else if q.order.is_some() {
        2
    } else if !q.select.is_empty() {
        q.select.len()
    } else {
        1
    }
}

/// Renders the whole template with the selection span (first to last unit
/// holding a level placeholder) repeated once per column clause.
fn render_question<'a>(
    ast: &TemplateAst,
    q: &'a QueryInstance,
    vocab: &'a DomainVocabulary,
    nested: &'a [Vec<String>],
    value_meaning: &'a str,
    count: usize,
) -> String {
    let span: Vec<usize> = (0..ast.units.len()).filter(|&i| ast.units[i].has_level_var()).collect();
    let clauses: Vec<&'a [UnitCondition]> =
        if q.col_clauses.is_empty() { vec![&[]] } else { q.col_clauses.iter().map(Vec::as_slice).collect() };
    let ctx_for = |cols: &'a [UnitCondition]| Ctx {
        vocab,
        nested,
        value_meaning,
        rows: &q.row_conditions,
        cols,
        q,
        count,
        order: q.order,
    };
    let (Some(&lo), Some(&hi)) = (span.first(), span.last()) else {
        let texts = render_units(&ast.units, &ctx_for(clauses[0]));
        return texts.join(" ");
    };
    let first = ctx_for(clauses[0]);
    let all = render_units(&ast.units, &first);
    let mut parts: Vec<String> = all[..lo].to_vec();
    let spans: Vec<String> = clauses
        .iter()
        .map(|c| {
            let ctx = ctx_for(c);
            render_units(&ast.units, &ctx)[lo..=hi]
                .iter()
                .filter(|t| !t.is_empty())
                .cloned()
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|s| !s.is_empty())
        .collect();
    parts.push(spans.join(" or "));
    parts.extend(all[hi + 1..].iter().cloned());
    parts.join(" ")
}

/// Checks that every conditioned column can be named by the template.
fn check_coverage(ast: &TemplateAst, q: &QueryInstance) -> Result<()> {
    let vars: HashSet<&str> = ast.placeholders().into_iter().collect();
    for c in q.conditions() {
        for col in &c.columns {
            if !vars.contains(col.as_str()) {
                return Err(Error::UnresolvedPlaceholder(col.clone()));
            }
        }
    }
    Ok(())
}

/// Instantiates one parsed template for `q` (no report sentence).
pub fn instantiate_nl(
    ast: &TemplateAst,
    q: &QueryInstance,
    vocab: &DomainVocabulary,
    templates: &ParsedTemplates,
) -> Result<String> {
    check_coverage(ast, q)?;
    let text = render_question(ast, q, vocab, &templates.nested, &templates.set.value_meaning, count_for(q));
    Ok(tidy(&format!("{text} ?")))
}

fn report_sentence(q: &QueryInstance, vocab: &DomainVocabulary, templates: &ParsedTemplates) -> String {
    let ctx = Ctx {
        vocab,
        nested: &templates.nested,
        value_meaning: &templates.set.value_meaning,
        rows: &[],
        cols: &[],
        q,
        count: q.report.len(),
        order: None,
    };
    tidy(&render_units(&templates.report.units, &ctx).join(" "))
}

/// Template 15: the front of template 13 over the outer column conditions,
/// the projected attributes, then the comparison clause of template 14
/// over the inner query, and the report sentence.
pub fn compose_template15(
    templates: &ParsedTemplates,
    q15: &QueryInstance,
    vocab: &DomainVocabulary,
    ast13: &TemplateAst,
    ast14: &TemplateAst,
) -> Result<String> {
    let inner =
        q15.inner.as_deref().ok_or_else(|| Error::InvalidQuery("template 15 without inner query".into()))?;
    check_coverage(ast13, q15)?;
    check_coverage(ast14, inner)?;
    let mut front_q = q15.clone();
    front_q.order = None;
    front_q.limit = None;
    front_q.select.clear();
    front_q.row_conditions.clear();
    let front = render_question(ast13, &front_q, vocab, &templates.nested, &templates.set.value_meaning, 1);
    let cut = ast14
        .units
        .iter()
        .position(|u| u.has_reserved(Reserved::OpPAttr))
        .ok_or_else(|| Error::NlParse("template 14 lacks $OPPATTR".into()))?;
    let tail_ast = TemplateAst { units: ast14.units[cut + 1..].to_vec() };
    let tail = render_question(&tail_ast, inner, vocab, &templates.nested, &templates.set.value_meaning, 1);
    let attrs: Vec<String> = q15.select.iter().map(|c| format!("of {}", vocab.display_name(c))).collect();
    let question = tidy(&format!("{front} {} {tail} ?", join_list(&attrs, "and")));
    Ok(format!("{question} {}", report_sentence(q15, vocab, templates)))
}

/// The question text for `q`, drawing one variant per template id.
pub fn question<R: Rng + ?Sized>(
    templates: &ParsedTemplates,
    q: &QueryInstance,
    vocab: &DomainVocabulary,
    rng: &mut R,
) -> Result<String> {
    let variant = |id: u8, rng: &mut R| -> Result<TemplateAst> {
        templates
            .asts
            .get(&id)
            .and_then(|v| v.choose(rng))
            .cloned()
            .ok_or_else(|| Error::NlParse(format!("no question template {id}")))
    };
    if q.template_id == 15 {
        let a13 = variant(13, rng)?;
        let a14 = variant(14, rng)?;
        return compose_template15(templates, q, vocab, &a13, &a14);
    }
    let ast = variant(q.template_id, rng)?;
    let text = instantiate_nl(&ast, q, vocab, templates)?;
    if q.report.is_empty() {
        Ok(text)
    } else {
        Ok(format!("{text} {}", report_sentence(q, vocab, templates)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{fixture, load};
    use crate::query::{format_answer, instantiate, TEMPLATE_IDS};
    use crate::tablegen::AggFun;
    use crate::testutil::instance;
    use crate::Stream;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn food() -> (DomainVocabulary, ParsedTemplates) {
        let d = fixture::food_domain();
        let p = ParsedTemplates::new(d.nl.clone(), &d.vocab).unwrap();
        (d.vocab, p)
    }

    fn names(vocab: &DomainVocabulary) -> Names {
        let codes: Vec<String> = ["ImportExport", "Years", "Quarters", "Food"].map(String::from).to_vec();
        Names::from_vocab(vocab, &codes, &[vec!["Category".into(), "Item".into()]]).unwrap()
    }

    fn cond(code: &str, col: &str, vals: &[&str]) -> UnitCondition {
        UnitCondition {
            code: code.into(),
            columns: vec![col.into()],
            paths: vals.iter().map(|v| vec![v.to_string()]).collect(),
        }
    }

    fn lookup(cols: Vec<UnitCondition>) -> QueryInstance {
        QueryInstance {
            template_id: 1,
            row_conditions: vec![cond("Food", "Category", &["Dairy"])],
            col_clauses: vec![cols],
            aggs: Vec::new(),
            group_by: Vec::new(),
            report_keys: false,
            order: None,
            limit: None,
            compare: None,
            select: Vec::new(),
            report: Vec::new(),
            inner: None,
            decimals: 2,
        }
    }

    #[test]
    fn lists_use_the_serial_comma() {
        let s = |v: &[&str]| join_list(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "or");
        assert_eq!(s(&["a"]), "a");
        assert_eq!(s(&["a", "b"]), "a or b");
        assert_eq!(s(&["a", "b", "c"]), "a, b, or c");
    }

    #[test]
    fn conditional_separator_needs_both_sides() {
        let (vocab, p) = food();
        let mut rng = Stream::seed_from_u64(0);
        let both = lookup(vec![cond("Quarters", "Quarter", &["Q2"]), cond("Years", "Year", &["2018"])]);
        let year = lookup(vec![cond("Years", "Year", &["2018"])]);
        let quarter = lookup(vec![cond("Quarters", "Quarter", &["Q2"])]);
        assert_eq!(
            question(&p, &both, &vocab, &mut rng).unwrap(),
            "What is the amount of Dairy in Q2 of 2018?"
        );
        assert_eq!(question(&p, &year, &vocab, &mut rng).unwrap(), "What is the amount of Dairy in 2018?");
        assert_eq!(question(&p, &quarter, &vocab, &mut rng).unwrap(), "What is the amount of Dairy in Q2?");
    }

    #[test]
    fn guard_renders_only_when_the_word_is_missing() {
        let d = load("students").unwrap();
        let p = ParsedTemplates::new(d.nl.clone(), &d.vocab).unwrap();
        let mut rng = Stream::seed_from_u64(0);
        let mut q = lookup(vec![cond("Years", "Year", &["2019"])]);
        q.row_conditions = vec![cond("Nationality", "Nationality", &["English"])];
        assert_eq!(
            question(&p, &q, &d.vocab, &mut rng).unwrap(),
            "What is the number of English students in 2019?"
        );
        q.row_conditions = vec![UnitCondition {
            code: "School".into(),
            columns: vec!["Level".into(), "Grade".into()],
            paths: vec![vec!["Primary".into(), "Grade 2".into()]],
        }];
        assert_eq!(
            question(&p, &q, &d.vocab, &mut rng).unwrap(),
            "What is the number of students in Grade 2 in 2019?"
        );
    }

    #[test]
    fn alternation_follows_the_count() {
        let (vocab, p) = food();
        let mut rng = Stream::seed_from_u64(0);
        let mut q = lookup(vec![cond("Years", "Year", &["2018"])]);
        q.template_id = 7;
        q.aggs = vec![AggFun::Max];
        assert_eq!(
            question(&p, &q, &vocab, &mut rng).unwrap(),
            "What is the maximum amount of Dairy in 2018?"
        );
        q.aggs = vec![AggFun::Sum, AggFun::Max];
        assert_eq!(
            question(&p, &q, &vocab, &mut rng).unwrap(),
            "What are the total and maximum amounts of Dairy in 2018?"
        );
    }

    #[test]
    fn top_and_bottom_follow_the_direction() {
        let (vocab, p) = food();
        let mut rng = Stream::seed_from_u64(0);
        let mut q = lookup(vec![cond("Years", "Year", &["2018"])]);
        q.template_id = 12;
        q.order = Some(Order::Desc);
        q.limit = Some(3);
        assert_eq!(
            question(&p, &q, &vocab, &mut rng).unwrap(),
            "What are the top 3 amounts of Dairy in 2018?"
        );
        q.template_id = 13;
        q.limit = None;
        assert_eq!(
            question(&p, &q, &vocab, &mut rng).unwrap(),
            "What are the amounts ordered by decreasing values of Dairy in 2018?"
        );
    }

    #[test]
    fn malformed_templates_are_rejected() {
        let (vocab, _) = food();
        let n = names(&vocab);
        assert!(matches!(parse_nl_template("What is the amount", &n), Err(Error::NlParse(_))));
        assert!(matches!(parse_nl_template("What of_((x ?", &n), Err(Error::NlParse(_))));
        assert!(matches!(parse_nl_template("What is $FOO ?", &n), Err(Error::NlParse(_))));
        assert!(matches!(parse_nl_template("What of_$Colour ?", &n), Err(Error::UnresolvedPlaceholder(_))));
        assert!(matches!(parse_nl_template("$Year is ?", &n), Err(Error::NlParse(_))));
        assert!(matches!(parse_report_template("Please, report.", &n), Err(Error::NlParse(_))));
    }

    #[test]
    fn placeholders_resolve_to_columns() {
        let (vocab, _) = food();
        let ast = parse_nl_template(
            "What is the amount of_$Import_Export of__$Item__$Category in__$Quarter==of==$Year ?",
            &names(&vocab),
        )
        .unwrap();
        assert_eq!(ast.placeholders(), ["Import_Export", "Item", "Category", "Quarter", "Year"]);
        assert_eq!(ast.cond_separators(), 1);
    }

    #[test]
    fn uncovered_condition_is_an_error() {
        let (vocab, p) = food();
        let ast = parse_nl_template("What is the amount of_$Item ?", &names(&vocab)).unwrap();
        let q = lookup(vec![cond("Years", "Year", &["2018"])]);
        assert!(matches!(instantiate_nl(&ast, &q, &vocab, &p), Err(Error::UnresolvedPlaceholder(_))));
    }

    #[test]
    fn template_set_round_trips_through_json() {
        let d = fixture::food_domain();
        let again = NlTemplateSet::from_json(&d.nl.to_json()).unwrap();
        assert_eq!(again, d.nl);
    }

    #[test]
    fn fixture_questions_are_answerable() {
        let (vocab, p) = food();
        let rel = fixture::food_rel();
        let hct = fixture::food_hct();
        let mut rng = Stream::seed_from_u64(7);
        for id in TEMPLATE_IDS {
            let q = instantiate(id, &rel, &hct, 2, &mut rng).unwrap();
            let text = question(&p, &q, &vocab, &mut rng).unwrap();
            assert!(!format_answer(&crate::query::evaluate(&q, &rel).unwrap()).is_empty());
            assert!(text.starts_with("What "), "{text}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn questions_carry_no_template_syntax(seed in any::<u64>()) {
            let i = instance(seed);
            let p = ParsedTemplates::new(i.domain.nl.clone(), &i.domain.vocab).unwrap();
            let mut rng = Stream::seed_from_u64(seed.rotate_left(7));
            for id in TEMPLATE_IDS {
                let Ok(q) = instantiate(id, &i.rel, &i.hct, 2, &mut rng) else { continue };
                let text = question(&p, &q, &i.domain.vocab, &mut rng).unwrap();
                for bad in ["$", "((", "))", "==", "__", "  ", " ?", " ,", "/"] {
                    prop_assert!(!text.contains(bad), "{:?} in {}", bad, text);
                }
                prop_assert!(text.ends_with('?') || text.ends_with('.'), "{}", text);
                // every value of the deepest conditioned level is named
                for c in q.conditions() {
                    let last = c.columns.len() - 1;
                    for v in c.level_values(last) {
                        prop_assert!(text.contains(&v), "{} missing in {}", v, text);
                    }
                }
            }
        }
    }
}
