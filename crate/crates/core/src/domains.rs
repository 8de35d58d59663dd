//! Built-in domains, embedded at compile time, and the food-table fixture
//! that the worked examples are written against.

use crate::error::{Error, Result};
use crate::nl::NlTemplateSet;
use crate::tablegen::GenericTableTemplate;
use crate::vocab::{parse_vocabulary_str, DomainVocabulary};

macro_rules! domain_files {
    ($($name:literal),* $(,)?) => {
        &[$(
            (
                $name,
                include_str!(concat!("../domains/", $name, "/semantics.json")),
                include_str!(concat!("../domains/", $name, "/table_template.json")),
                include_str!(concat!("../domains/", $name, "/nl_templates.json")),
            ),
        )*]
    };
}

const SOURCES: &[(&str, &str, &str, &str)] =
    domain_files!("food", "accidents", "constructions", "graduations", "pollution", "students", "weather",);

/// Vocabulary, generic table template and question templates of one domain.
#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub vocab: DomainVocabulary,
    pub table_template: GenericTableTemplate,
    pub nl: NlTemplateSet,
}

impl Domain {
    pub fn from_json_strs(name: &str, vocab: &str, table: &str, nl: &str) -> Result<Self> {
        Ok(Domain {
            name: name.to_string(),
            vocab: parse_vocabulary_str(vocab)?,
            table_template: GenericTableTemplate::from_json_str(table)?,
            nl: NlTemplateSet::from_json_str(nl)?,
        })
    }
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|s| s.0)
}

pub fn load(name: &str) -> Result<Domain> {
    let (n, v, t, q) = SOURCES
        .iter()
        .find(|s| s.0 == name)
        .ok_or_else(|| Error::InvalidTemplate(format!("unknown domain `{name}`")))?;
    Domain::from_json_strs(n, v, t, q)
}

pub fn builtin() -> Result<Vec<Domain>> {
    names().map(load).collect()
}

/// The five-item food import-export table used by the worked examples.
pub mod fixture {
    use super::*;
    use crate::num::Fixed;
    use crate::pivot::{pivot, HctTable};
    use crate::tablegen::{
        AggFun, AggPos, AxisAttr, ColAggPos, ColumnGroup, IndividualTableTemplate, Levels, RelRow,
        RelationalTable, RowAggPos, RowFormat, SampleInterval, ShuffleMode,
    };
    use crate::Stream;
    use rand::SeedableRng;

    /// (category, item, [import 2017, export 2017, import 2018, export 2018])
    pub const FOOD: [(&str, &str, [i64; 4]); 5] = [
        ("Dairy", "Milk", [799, 57, 879, 586]),
        ("Dairy", "Butter", [444, 146, 202, 443]),
        ("Dairy", "Cream", [736, 44, 179, 821]),
        ("Beverage", "Coffee", [266, 980, 768, 121]),
        ("Beverage", "Tea", [751, 749, 673, 622]),
    ];

    pub fn food_domain() -> Domain {
        load("food").expect("embedded food domain parses")
    }

    pub fn food_rel() -> RelationalTable {
        let mut rows = Vec::new();
        for (cat, item, v) in FOOD {
            for (k, (year, ie)) in
                [("2017", "Import"), ("2017", "Export"), ("2018", "Import"), ("2018", "Export")]
                    .into_iter()
                    .enumerate()
            {
                rows.push(RelRow {
                    keys: vec![cat.into(), item.into(), ie.into(), year.into()],
                    value: Fixed::new(v[k], 0),
                });
            }
        }
        let group = |code: &str, columns: &[&str], hierarchical| ColumnGroup {
            code: code.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            hierarchical,
        };
        RelationalTable {
            columns: ["Category", "Item", "Import_Export", "Year"].map(String::from).to_vec(),
            groups: vec![
                group("Food", &["Category", "Item"], true),
                group("ImportExport", &["Import_Export"], false),
                group("Years", &["Year"], false),
            ],
            rows,
            scale: 0,
        }
    }

    pub fn food_template() -> IndividualTableTemplate {
        let axis = |code: &str, levels| AxisAttr { code: code.into(), sample: SampleInterval::All, levels };
        IndividualTableTemplate {
            name: "food-import-export-in-tons-t0_none_c2r2_right-top_indent".into(),
            replica: 1,
            shuffle: ShuffleMode::None,
            col_row_levels: Levels { cols: 2, rows: 2 },
            col_row_agg_pos: AggPos { col: ColAggPos::Right, row: RowAggPos::Top },
            row_format: RowFormat::Indent,
            rows: vec![axis("Food", 2)],
            columns: vec![axis("ImportExport", 1), axis("Years", 1)],
            values: serde_json::Value::from("intPositive"),
            value_name: "Food import-export in tons".into(),
            agg_name1: "Average".into(),
            agg_fun1: AggFun::Avg,
        }
    }

    pub fn food_hct() -> HctTable {
        let mut rng = Stream::seed_from_u64(0);
        pivot(&food_rel(), &food_template(), crate::DEFAULT_DECIMALS, &mut rng).expect("fixture pivots")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nl::ParsedTemplates;
    use crate::tablegen::expand_generic;

    #[test]
    fn every_builtin_domain_parses_and_expands() {
        let all = builtin().unwrap();
        assert_eq!(all.len(), 7);
        for d in all {
            let tpls = expand_generic(&d.table_template, &d.vocab).unwrap();
            assert!(!tpls.is_empty(), "{}", d.name);
            ParsedTemplates::new(d.nl.clone(), &d.vocab).unwrap();
        }
    }

    #[test]
    fn unknown_domain_is_an_error() {
        assert!(load("nope").is_err());
    }

    #[test]
    fn fixture_has_the_twenty_rows_of_the_example() {
        let rel = fixture::food_rel();
        assert_eq!(rel.rows.len(), 20);
        let total: i64 = rel.rows.iter().map(|r| r.value.units()).sum();
        assert_eq!(total, 10266);
    }
}
