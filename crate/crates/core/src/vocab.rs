//! Domain vocabularies: attribute codes, level names, value lists or value
//! trees, and numeric-range shortcuts.
//!
//! The JSON layout follows the `PARAM_semantics.json` files:
//!
//! ```json
//! {
//!   "data": [
//!     {"code": "Years", "names": ["Year"], "values": [2017, 2018]},
//!     {"code": "Food", "names": ["Category", "Item"],
//!      "values": {"Dairy": ["Milk", "Cream"], "Beverage": ["Coffee"]}}
//!   ],
//!   "values": {"realUnit": [0.0, 1.0], "intPositive": [1, 1000]}
//! }
//! ```
//!
//! A flat `values` array declares an independent attribute; a nested object
//! declares a hierarchical group whose nesting depth equals `names.len()`.

use std::collections::HashSet;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttributeKind {
    Independent,
    Hierarchical,
}

/// One node of a value list (independent) or value tree (hierarchical).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueNode {
    pub value: String,
    pub children: Vec<ValueNode>,
}

impl ValueNode {
    pub fn leaf(value: impl Into<String>) -> Self {
        ValueNode { value: value.into(), children: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeSpec {
    pub code: String,
    pub kind: AttributeKind,
    /// Level names with `-` normalized to `_`; these are the relational
    /// column names and the `$placeholder` names of question templates.
    pub names: Vec<String>,
    /// Level names as written in the document, used in question text.
    pub display_names: Vec<String>,
    pub values: Vec<ValueNode>,
}

impl AttributeSpec {
    pub fn depth(&self) -> usize {
        self.names.len()
    }

    /// All root-to-leaf paths of the value tree, in document order.
    pub fn leaf_paths(&self) -> Vec<Vec<String>> {
        fn walk(nodes: &[ValueNode], prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
            for n in nodes {
                prefix.push(n.value.clone());
                if n.children.is_empty() {
                    out.push(prefix.clone());
                } else {
                    walk(&n.children, prefix, out);
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.values, &mut Vec::new(), &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericRange {
    pub min: f64,
    pub max: f64,
    pub integer_mode: bool,
}

impl NumericRange {
    pub fn new(min: f64, max: f64, integer_mode: bool) -> Result<Self> {
        if min > max {
            return Err(Error::MinGreaterThanMax { min, max });
        }
        if integer_mode && (min.fract() != 0.0 || max.fract() != 0.0) {
            return Err(Error::MalformedInterval(format!(
                "integer range with fractional bound [{min}, {max}]"
            )));
        }
        Ok(NumericRange { min, max, integer_mode })
    }

    /// Parses a `[m, M]` JSON pair. Integer mode iff both literals are integers.
    pub fn from_json(v: &Value) -> Result<Self> {
        let arr =
            v.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::MalformedInterval(v.to_string()))?;
        let bound = |x: &Value| -> Result<(f64, bool)> {
            match x {
                Value::Number(n) => {
                    let integral = n.is_i64() || n.is_u64();
                    let f = n.as_f64().ok_or_else(|| Error::MalformedInterval(v.to_string()))?;
                    Ok((f, integral))
                }
                _ => Err(Error::MalformedInterval(v.to_string())),
            }
        };
        let (min, a) = bound(&arr[0])?;
        let (max, b) = bound(&arr[1])?;
        NumericRange::new(min, max, a && b)
    }

    pub fn to_json(&self) -> Value {
        if self.integer_mode {
            Value::from(vec![self.min as i64, self.max as i64])
        } else {
            Value::from(vec![self.min, self.max])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DomainVocabulary {
    pub attributes: Vec<AttributeSpec>,
    pub numeric_shortcuts: Vec<(String, NumericRange)>,
}

/// Level location of a relational column inside the vocabulary.
#[derive(Clone, Copy, Debug)]
pub struct LevelRef<'a> {
    pub attribute: &'a AttributeSpec,
    pub level: usize,
}

impl LevelRef<'_> {
    pub fn display_name(&self) -> &str {
        &self.attribute.display_names[self.level]
    }
}

pub fn normalize_name(name: &str) -> String {
    name.trim().replace(['-', ' '], "_")
}

fn scalar_to_string(v: &Value, code: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::InvalidTemplate(format!("attribute `{code}`: value {v} is not a scalar"))),
    }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], context: &str) -> Result<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::UnknownKey { context: context.to_string(), key: k.clone() });
        }
    }
    Ok(())
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str, context: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::MissingKey { context: context.to_string(), key: key.to_string() })
}

fn parse_tree(v: &Value, code: &str, depth: usize, levels: usize) -> Result<Vec<ValueNode>> {
    let nodes = match v {
        Value::Array(items) => {
            if depth != levels {
                return Err(Error::RaggedHierarchy { code: code.to_string(), depth, levels });
            }
            items
                .iter()
                .map(|x| scalar_to_string(x, code).map(ValueNode::leaf))
                .collect::<Result<Vec<_>>>()?
        }
        Value::Object(map) => {
            if depth >= levels {
                return Err(Error::RaggedHierarchy { code: code.to_string(), depth: depth + 1, levels });
            }
            let mut out = Vec::with_capacity(map.len());
            for (k, child) in map {
                let children = parse_tree(child, code, depth + 1, levels)?;
                if children.is_empty() {
                    return Err(Error::RaggedHierarchy { code: code.to_string(), depth, levels });
                }
                out.push(ValueNode { value: k.clone(), children });
            }
            out
        }
        _ => {
            return Err(Error::InvalidTemplate(format!(
                "attribute `{code}`: values must be a list or an object"
            )))
        }
    };
    let mut seen = HashSet::new();
    for n in &nodes {
        if !seen.insert(n.value.as_str()) {
            return Err(Error::DuplicateValue { code: code.to_string(), value: n.value.clone() });
        }
    }
    Ok(nodes)
}

fn parse_attribute(v: &Value) -> Result<AttributeSpec> {
    let obj = v.as_object().ok_or_else(|| Error::InvalidTemplate("`data` entries must be objects".into()))?;
    check_keys(obj, &["code", "names", "values"], "data entry")?;
    let code = require(obj, "code", "data entry")?
        .as_str()
        .ok_or_else(|| Error::InvalidTemplate("`code` must be a string".into()))?
        .to_string();
    let display_names: Vec<String> = require(obj, "names", &code)?
        .as_array()
        .ok_or_else(|| Error::InvalidTemplate(format!("`{code}`: names must be a list")))?
        .iter()
        .map(|n| scalar_to_string(n, &code))
        .collect::<Result<_>>()?;
    if display_names.is_empty() {
        return Err(Error::InvalidTemplate(format!("`{code}`: names is empty")));
    }
    let values = require(obj, "values", &code)?;
    let kind = if values.is_object() { AttributeKind::Hierarchical } else { AttributeKind::Independent };
    if kind == AttributeKind::Independent && display_names.len() != 1 {
        return Err(Error::RaggedHierarchy { code, depth: 1, levels: display_names.len() });
    }
    let tree = parse_tree(values, &code, 1, display_names.len())?;
    if tree.is_empty() {
        return Err(Error::InvalidTemplate(format!("`{code}`: no values")));
    }
    Ok(AttributeSpec {
        names: display_names.iter().map(|n| normalize_name(n)).collect(),
        display_names,
        code,
        kind,
        values: tree,
    })
}

/// Parses and validates a vocabulary document.
pub fn parse_vocabulary(doc: &Value) -> Result<DomainVocabulary> {
    let obj =
        doc.as_object().ok_or_else(|| Error::InvalidTemplate("vocabulary must be a JSON object".into()))?;
    check_keys(obj, &["data", "values"], "vocabulary")?;
    let data = require(obj, "data", "vocabulary")?
        .as_array()
        .ok_or_else(|| Error::InvalidTemplate("`data` must be a list".into()))?;
    let mut attributes = Vec::with_capacity(data.len());
    let mut codes = HashSet::new();
    let mut level_names = HashSet::new();
    for entry in data {
        let attr = parse_attribute(entry)?;
        if !codes.insert(attr.code.clone()) {
            return Err(Error::DuplicateCode(attr.code));
        }
        for n in &attr.names {
            if !level_names.insert(n.clone()) {
                return Err(Error::InvalidTemplate(format!("level name `{n}` is used by two attributes")));
            }
        }
        attributes.push(attr);
    }
    let mut numeric_shortcuts = Vec::new();
    if let Some(vals) = obj.get("values") {
        let map =
            vals.as_object().ok_or_else(|| Error::InvalidTemplate("`values` must be an object".into()))?;
        for (k, v) in map {
            numeric_shortcuts.push((k.clone(), NumericRange::from_json(v)?));
        }
    }
    Ok(DomainVocabulary { attributes, numeric_shortcuts })
}

pub fn parse_vocabulary_str(text: &str) -> Result<DomainVocabulary> {
    parse_vocabulary(&serde_json::from_str(text)?)
}

impl DomainVocabulary {
    pub fn attribute(&self, code: &str) -> Result<&AttributeSpec> {
        self.attributes.iter().find(|a| a.code == code).ok_or_else(|| Error::UnknownCode(code.to_string()))
    }

    /// Finds the attribute level whose normalized name is `column`.
    pub fn level(&self, column: &str) -> Option<LevelRef<'_>> {
        self.attributes.iter().find_map(|a| {
            a.names.iter().position(|n| n == column).map(|level| LevelRef { attribute: a, level })
        })
    }

    pub fn display_name(&self, column: &str) -> String {
        self.level(column).map(|l| l.display_name().to_string()).unwrap_or_else(|| column.to_string())
    }

    pub fn shortcut(&self, name: &str) -> Option<NumericRange> {
        self.numeric_shortcuts.iter().find(|(k, _)| k == name).map(|(_, r)| *r)
    }

    /// Serializes back to the document layout accepted by [`parse_vocabulary`].
    pub fn to_json(&self) -> Value {
        fn tree(nodes: &[ValueNode]) -> Value {
            if nodes.iter().all(|n| n.children.is_empty()) {
                Value::from(nodes.iter().map(|n| n.value.clone()).collect::<Vec<_>>())
            } else {
                let mut m = Map::new();
                for n in nodes {
                    m.insert(n.value.clone(), tree(&n.children));
                }
                Value::Object(m)
            }
        }
        let data: Vec<Value> = self
            .attributes
            .iter()
            .map(|a| {
                let mut m = Map::new();
                m.insert("code".into(), a.code.clone().into());
                m.insert("names".into(), Value::from(a.display_names.clone()));
                m.insert("values".into(), tree(&a.values));
                Value::Object(m)
            })
            .collect();
        let mut values = Map::new();
        for (k, r) in &self.numeric_shortcuts {
            values.insert(k.clone(), r.to_json());
        }
        let mut root = Map::new();
        root.insert("data".into(), Value::from(data));
        root.insert("values".into(), Value::Object(values));
        Value::Object(root)
    }
}

/// Resolves a table template's `values` entry: a shortcut name or a `[m, M]` pair.
pub fn resolve_numeric_spec(vocab: &DomainVocabulary, spec: &Value) -> Result<NumericRange> {
    match spec {
        Value::String(name) => vocab.shortcut(name).ok_or_else(|| Error::UnknownShortcut(name.clone())),
        Value::Array(_) => NumericRange::from_json(spec),
        other => Err(Error::MalformedInterval(other.to_string())),
    }
}
