//! The fifteen worked questions over the food table, with the attribute
//! selections fixed by hand.

#![allow(dead_code)]

use hctqa::query::{CompareOp, Comparison, Order, QueryInstance, UnitCondition};
use hctqa::tablegen::AggFun;
use hctqa::Fixed;

fn food(items: &[(&str, &str)]) -> UnitCondition {
    UnitCondition {
        code: "Food".into(),
        columns: vec!["Category".into(), "Item".into()],
        paths: items.iter().map(|(c, i)| vec![c.to_string(), i.to_string()]).collect(),
    }
}

fn category(cats: &[&str]) -> UnitCondition {
    UnitCondition {
        code: "Food".into(),
        columns: vec!["Category".into()],
        paths: cats.iter().map(|c| vec![c.to_string()]).collect(),
    }
}

fn ie(v: &[&str]) -> UnitCondition {
    UnitCondition {
        code: "ImportExport".into(),
        columns: vec!["Import_Export".into()],
        paths: v.iter().map(|x| vec![x.to_string()]).collect(),
    }
}

fn year(v: &[&str]) -> UnitCondition {
    UnitCondition {
        code: "Years".into(),
        columns: vec!["Year".into()],
        paths: v.iter().map(|x| vec![x.to_string()]).collect(),
    }
}

fn base(id: u8) -> QueryInstance {
    QueryInstance {
        template_id: id,
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
        decimals: 2,
    }
}

const MILK: (&str, &str) = ("Dairy", "Milk");
const BUTTER: (&str, &str) = ("Dairy", "Butter");
const CREAM: (&str, &str) = ("Dairy", "Cream");
const COFFEE: (&str, &str) = ("Beverage", "Coffee");
const TEA: (&str, &str) = ("Beverage", "Tea");

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn q14() -> QueryInstance {
    let mut q = base(14);
    q.col_clauses = vec![vec![ie(&["Import"]), year(&["2018"])]];
    q.compare = Some(Comparison { op: CompareOp::Gt, threshold: Fixed::new(5133, 1) });
    q.select = strings(&["Category", "Item"]);
    q
}

pub fn cases() -> Vec<(QueryInstance, &'static str, &'static str)> {
    let all_items = [BUTTER, COFFEE, CREAM, MILK, TEA];
    let mut out = Vec::new();

    let mut q = base(1);
    q.row_conditions = vec![food(&[MILK])];
    q.col_clauses = vec![vec![ie(&["Export"]), year(&["2017"])]];
    out.push((q, "What is the amount of Export of Milk in 2017?", "57"));

    let mut q = base(2);
    q.row_conditions = vec![food(&[MILK, BUTTER, COFFEE, TEA])];
    q.col_clauses = vec![vec![ie(&["Export"]), year(&["2017"])]];
    out.push((
        q,
        "What is the amount of Export of Butter, Coffee, Milk, or Tea in 2017?",
        "57; 146 ; 980; 749",
    ));

    let mut q = base(3);
    q.row_conditions = vec![food(&[TEA])];
    q.col_clauses = vec![vec![ie(&["Export"]), year(&["2017", "2018"])]];
    out.push((q, "What is the amount of Export of Tea in 2017 or 2018?", "749; 622"));

    let mut q = base(4);
    q.row_conditions = vec![food(&[MILK])];
    q.col_clauses =
        vec![vec![ie(&["Import", "Export"]), year(&["2017"])], vec![ie(&["Export"]), year(&["2018"])]];
    q.aggs = vec![AggFun::Sum, AggFun::Min];
    out.push((
        q,
        "What are the total and minimum amounts of Export or Import of Milk in 2017 or of Export of Milk in 2018?",
        "1442,57",
    ));

    let mut q = base(5);
    q.row_conditions = vec![food(&[COFFEE])];
    q.col_clauses = vec![vec![ie(&["Import", "Export"])]];
    q.aggs = vec![AggFun::Avg];
    out.push((q, "What is the average amount of Export or Import of Coffee?", "533.75"));

    let mut q = base(6);
    q.row_conditions = vec![food(&[BUTTER, CREAM, TEA])];
    q.col_clauses =
        vec![vec![ie(&["Import", "Export"]), year(&["2017"])], vec![ie(&["Export"]), year(&["2018"])]];
    out.push((
        q,
        "What is the amount of Export or Import of Butter, Cream, or Tea in 2017 or of Export of Butter, Cream, or Tea in 2018?",
        "444; 146; 443; 736; 44; 821; 751; 749; 622",
    ));

    let mut q = base(7);
    q.row_conditions = vec![food(&all_items)];
    q.col_clauses = vec![vec![ie(&["Import"]), year(&["2017"])]];
    q.aggs = vec![AggFun::Sum, AggFun::Min];
    out.push((
        q,
        "What are the total and minimum amounts of Import of Butter, Coffee, Cream, Milk, or Tea in 2017?",
        "2996,266",
    ));

    let mut q = base(8);
    q.row_conditions = vec![food(&all_items)];
    q.col_clauses = vec![vec![ie(&["Import", "Export"]), year(&["2017", "2018"])]];
    q.aggs = vec![AggFun::Min, AggFun::Max];
    q.group_by = strings(&["Import_Export", "Year"]);
    q.report_keys = true;
    q.report = q.group_by.clone();
    out.push((
        q,
        "What are the minimum and maximum amounts for each Import-Export and Year, of Export or Import of Butter, Coffee, Cream, Milk, or Tea in 2017 or 2018? Please, report the corresponding Import-Export and Year.",
        "Export,2017,44,980; Export,2018,121,821; Import,2017,266,799; Import,2018,179,879",
    ));

    let mut q = base(9);
    q.row_conditions = vec![category(&["Dairy", "Beverage"])];
    q.col_clauses = vec![vec![ie(&["Import"]), year(&["2018"])]];
    q.aggs = vec![AggFun::Min];
    q.group_by = strings(&["Category"]);
    out.push((
        q.clone(),
        "What is the minimum amount for each Category, of Import of Beverage or Dairy in 2018?",
        "673;179",
    ));

    q.template_id = 10;
    q.report_keys = true;
    q.report = strings(&["Category"]);
    out.push((
        q,
        "What is the minimum amount for each Category, of Import of Beverage or Dairy in 2018? Please, report the corresponding Category.",
        "Beverage,673; Dairy,179",
    ));

    let mut q = base(11);
    q.row_conditions = vec![category(&["Dairy", "Beverage"])];
    q.col_clauses =
        vec![vec![ie(&["Import"]), year(&["2017"])], vec![ie(&["Import", "Export"]), year(&["2018"])]];
    q.aggs = vec![AggFun::Min];
    q.group_by = strings(&["Category", "Import_Export", "Year"]);
    q.report_keys = true;
    q.report = q.group_by.clone();
    out.push((
        q,
        "What is the minimum amount for each Category, Import-Export, and Year, of Import of Beverage or Dairy in 2017 or of Export or Import of Beverage or Dairy in 2018? Please, report the corresponding Category, Import-Export, and Year.",
        "Beverage,Export,2018,121; Beverage,Import,2017,266; Beverage,Import,2018,673; Dairy,Export,2018,443; Dairy,Import,2017,444; Dairy,Import,2018,179",
    ));

    let mut q = base(12);
    q.row_conditions = vec![category(&["Dairy", "Beverage"])];
    q.col_clauses = vec![vec![ie(&["Export"]), year(&["2018"])]];
    q.order = Some(Order::Asc);
    q.limit = Some(5);
    out.push((
        q,
        "What are the bottom 5 amounts of Export of Beverage or Dairy in 2018?",
        "121; 443; 586; 622; 821",
    ));

    let mut q = base(13);
    q.row_conditions = vec![category(&["Dairy", "Beverage"])];
    q.col_clauses = vec![vec![ie(&["Import"]), year(&["2017"])]];
    q.order = Some(Order::Asc);
    out.push((
        q,
        "What are the amounts ordered by increasing values of Import of Beverage or Dairy in 2017?",
        "266; 444; 736; 751; 799",
    ));

    out.push((
        q14(),
        "What are the Category and Item for which the amount of Import in 2018 is greater than 513.3?",
        "Dairy,Milk; Beverage,Coffee; Beverage,Tea",
    ));

    let mut q = base(15);
    q.col_clauses = vec![vec![ie(&["Export"]), year(&["2018"])]];
    q.select = strings(&["Category", "Item"]);
    q.report = strings(&["Category", "Item", "Value"]);
    q.inner = Some(Box::new(q14()));
    out.push((
        q,
        "What is the amount of Export in 2018 of Category and of Item for which the amount of Import in 2018 is greater than 513.3? Please, report the corresponding Category, Item, and amount of import-export.",
        "Dairy,Milk,586; Beverage,Coffee,121; Beverage,Tea,622",
    ));
    out
}

/// Collapses whitespace runs and drops spaces before punctuation.
pub fn norm(s: &str) -> String {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.replace(" ?", "?").replace(" ;", ";").replace("; ", ";")
}
