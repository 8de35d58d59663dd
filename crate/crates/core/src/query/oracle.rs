//! Brute-force reference evaluator.
//!
//! Written against the raw row layout with nested loops and integer
//! arithmetic on scaled units; it shares no evaluation helpers with
//! [`super::evaluate`], so the two can be checked against each other.

use crate::error::{Error, Result};
use crate::num::Fixed;
use crate::tablegen::{AggFun, RelationalTable};

use super::{Answer, Cell, CompareOp, Order, QueryInstance, UnitCondition};

fn col(rel: &RelationalTable, name: &str) -> Result<usize> {
    for (i, c) in rel.columns.iter().enumerate() {
        if c == name {
            return Ok(i);
        }
    }
    Err(Error::InvalidQuery(format!("unknown column `{name}`")))
}

fn unit_holds(rel: &RelationalTable, keys: &[String], c: &UnitCondition) -> Result<bool> {
    for path in &c.paths {
        let mut all = true;
        for (k, name) in c.columns.iter().enumerate() {
            if keys[col(rel, name)?] != path[k] {
                all = false;
                break;
            }
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

fn selected(rel: &RelationalTable, q: &QueryInstance) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, row) in rel.rows.iter().enumerate() {
        let mut ok = true;
        for c in &q.row_conditions {
            if !unit_holds(rel, &row.keys, c)? {
                ok = false;
                break;
            }
        }
        if ok && !q.col_clauses.is_empty() {
            let mut any = false;
            for clause in &q.col_clauses {
                let mut all = true;
                for c in clause {
                    if !unit_holds(rel, &row.keys, c)? {
                        all = false;
                        break;
                    }
                }
                if all {
                    any = true;
                    break;
                }
            }
            ok = any;
        }
        if ok {
            out.push(i);
        }
    }
    Ok(out)
}

/// Units of `v` expressed at scale `s` (s >= v.scale()).
fn units_at(v: Fixed, s: u8) -> i128 {
    let mut u = v.units() as i128;
    for _ in v.scale()..s {
        u *= 10;
    }
    u
}

fn aggregate(fun: AggFun, values: &[Fixed], scale: u8, decimals: u8) -> Result<Cell> {
    if values.is_empty() {
        return Err(Error::InvalidQuery("aggregate over an empty selection".into()));
    }
    let units: Vec<i128> = values.iter().map(|v| units_at(*v, scale)).collect();
    let (result, out_scale) = match fun {
        AggFun::Sum => (units.iter().sum::<i128>(), scale),
        AggFun::Count => (units.len() as i128, 0),
        AggFun::Min => {
            let mut m = units[0];
            for &u in &units {
                if u < m {
                    m = u;
                }
            }
            (m, scale)
        }
        AggFun::Max => {
            let mut m = units[0];
            for &u in &units {
                if u > m {
                    m = u;
                }
            }
            (m, scale)
        }
        AggFun::Avg => {
            let target = decimals.max(scale);
            let mut num: i128 = units.iter().sum();
            for _ in scale..target {
                num *= 10;
            }
            let den = units.len() as i128;
            // round half away from zero: floor((2|n| + d) / 2d) with sign
            let mag = (2 * num.abs() + den) / (2 * den);
            (if num < 0 { -mag } else { mag }, target)
        }
    };
    Ok(Cell::Num(Fixed::new(result as i64, out_scale)))
}

pub fn oracle_evaluate(q: &QueryInstance, rel: &RelationalTable) -> Result<Answer> {
    let scale = rel.scale;
    let sel = selected(rel, q)?;
    let mut rows: Vec<Vec<Cell>> = Vec::new();

    if let Some(inner) = &q.inner {
        let inner_rows = oracle_evaluate(inner, rel)?.rows;
        for &i in &sel {
            let r = &rel.rows[i];
            let mut tuple = Vec::new();
            for name in &q.select {
                tuple.push(Cell::Text(r.keys[col(rel, name)?].clone()));
            }
            if inner_rows.contains(&tuple) {
                tuple.push(Cell::Num(r.value));
                rows.push(tuple);
            }
        }
        return Ok(Answer { rows });
    }

    if let Some(cmp) = q.compare {
        let t_scale = cmp.threshold.scale().max(scale);
        let t = units_at(cmp.threshold, t_scale);
        for &i in &sel {
            let r = &rel.rows[i];
            let v = units_at(r.value, t_scale);
            let keep = match cmp.op {
                CompareOp::Lt => v < t,
                CompareOp::Gt => v > t,
            };
            if keep {
                let mut tuple = Vec::new();
                for name in &q.select {
                    tuple.push(Cell::Text(r.keys[col(rel, name)?].clone()));
                }
                rows.push(tuple);
            }
        }
        return Ok(Answer { rows });
    }

    if !q.group_by.is_empty() {
        let mut keys: Vec<Vec<String>> = Vec::new();
        for &i in &sel {
            let mut k = Vec::new();
            for name in &q.group_by {
                k.push(rel.rows[i].keys[col(rel, name)?].clone());
            }
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        // insertion sort by byte order of the key tuple
        for a in 1..keys.len() {
            let mut b = a;
            while b > 0 && keys[b - 1] > keys[b] {
                keys.swap(b - 1, b);
                b -= 1;
            }
        }
        for k in keys {
            let mut values = Vec::new();
            for &i in &sel {
                let mut same = true;
                for (j, name) in q.group_by.iter().enumerate() {
                    if rel.rows[i].keys[col(rel, name)?] != k[j] {
                        same = false;
                    }
                }
                if same {
                    values.push(rel.rows[i].value);
                }
            }
            let mut row: Vec<Cell> = Vec::new();
            if q.report_keys {
                row.extend(k.into_iter().map(Cell::Text));
            }
            for a in &q.aggs {
                row.push(aggregate(*a, &values, scale, q.decimals)?);
            }
            rows.push(row);
        }
        return Ok(Answer { rows });
    }

    let values: Vec<Fixed> = sel.iter().map(|&i| rel.rows[i].value).collect();
    if !q.aggs.is_empty() {
        let mut row = Vec::new();
        for a in &q.aggs {
            row.push(aggregate(*a, &values, scale, q.decimals)?);
        }
        return Ok(Answer { rows: vec![row] });
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    if let Some(dir) = q.order {
        // selection sort on unit values, stable on ties
        for a in 0..order.len() {
            let mut best = a;
            for b in a + 1..order.len() {
                let x = units_at(values[order[b]], scale);
                let y = units_at(values[order[best]], scale);
                let better = match dir {
                    Order::Asc => x < y,
                    Order::Desc => x > y,
                };
                if better {
                    best = b;
                }
            }
            let picked = order.remove(best);
            order.insert(a, picked);
        }
    }
    let take = q.limit.unwrap_or(order.len()).min(order.len());
    for &i in &order[..take] {
        rows.push(vec![Cell::Num(values[i])]);
    }
    Ok(Answer { rows })
}
