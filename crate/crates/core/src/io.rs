//! File formats: query JSON and text, cardinality tables, plans, join trees,
//! meta-decompositions, DOT and SQL emission, and CSV table loading.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, RelId};
use crate::jointree::JoinTree;
use crate::meta::MetaDecomposition;
use crate::oracle::{MicroDatabase, Table};
use crate::plan::{annotate, kept_of, CardinalityProvider, PlanNode, QueryPlan};
use crate::set::RelSet;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::HashMap;
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct QueryJson {
    relations: Vec<RelationJson>,
    #[serde(default)]
    output: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    name: String,
    attrs: Vec<String>,
}

pub fn parse_query_json(text: &str) -> Result<Hypergraph> {
    let q: QueryJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("query JSON: {e}")))?;
    Hypergraph::new(
        q.relations.into_iter().map(|r| (r.name, r.attrs)).collect(),
        q.output,
    )
}

pub fn query_to_json(h: &Hypergraph) -> Value {
    json!({
        "relations": (0..h.num_relations() as RelId).map(|r| json!({
            "name": h.rel_name(r),
            "attrs": h.edge(r).iter().map(|a| h.attr_name(a)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "output": h.output_attrs().iter().map(|a| h.attr_name(a)).collect::<Vec<_>>(),
    })
}

/// Text form: one `Name(a,b,c)` per line, optional `OUTPUT a,b;` footer.
/// Without a footer the query is a full join; `OUTPUT;` makes it Boolean.
pub fn parse_query_text(text: &str) -> Result<Hypergraph> {
    let mut relations = Vec::new();
    let mut output: Option<Vec<String>> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ctx = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("OUTPUT") {
            let rest = rest
                .trim()
                .strip_suffix(';')
                .ok_or_else(|| ctx("missing ';'"))?;
            let attrs: Vec<String> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            output = Some(attrs);
            continue;
        }
        let open = line
            .find('(')
            .ok_or_else(|| ctx("expected Name(attr,...)"))?;
        let close = line.rfind(')').ok_or_else(|| ctx("missing ')'"))?;
        if close < open {
            return Err(ctx("mismatched parentheses"));
        }
        let name = line[..open].trim();
        if name.is_empty() {
            return Err(ctx("empty relation name"));
        }
        let attrs: Vec<String> = line[open + 1..close]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if attrs.is_empty() {
            return Err(ctx("relation needs at least one attribute"));
        }
        relations.push((name.to_string(), attrs));
    }
    let output = match output {
        Some(o) => o,
        None => {
            // full join: every attribute is an output attribute
            let mut all: Vec<String> = Vec::new();
            for (_, attrs) in &relations {
                for a in attrs {
                    if !all.contains(a) {
                        all.push(a.clone());
                    }
                }
            }
            all
        }
    };
    Hypergraph::new(relations, output)
}

/// Reads either format, keyed on the first non-space byte.
pub fn parse_query(text: &str) -> Result<Hypergraph> {
    if text.trim_start().starts_with('{') {
        parse_query_json(text)
    } else {
        parse_query_text(text)
    }
}

#[derive(Serialize, Deserialize)]
struct CardsJson {
    cards: Vec<CardEntryJson>,
    #[serde(default)]
    domains: HashMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct CardEntryJson {
    rels: Vec<String>,
    rows: f64,
}

pub fn parse_cards_json(h: &Hypergraph, text: &str) -> Result<CardinalityProvider> {
    let c: CardsJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("cards JSON: {e}")))?;
    let mut table = HashMap::new();
    for entry in c.cards {
        let mut s = RelSet::empty();
        for name in &entry.rels {
            let r = h
                .rel_by_name(name)
                .ok_or_else(|| Error::Parse(format!("cards: unknown relation {name:?}")))?;
            s.insert(r);
        }
        table.insert(s, entry.rows);
    }
    let mut domains = HashMap::new();
    for (name, d) in c.domains {
        let a = h
            .attr_by_name(&name)
            .ok_or_else(|| Error::Parse(format!("cards: unknown attribute {name:?}")))?;
        domains.insert(a, d);
    }
    let cp = CardinalityProvider::from_table(table)?;
    Ok(if domains.is_empty() {
        cp
    } else {
        cp.with_domains(domains)
    })
}

pub fn cards_to_json(h: &Hypergraph, cp: &CardinalityProvider) -> Value {
    let mut entries: Vec<(RelSet, f64)> = cp.entries().collect();
    entries.sort_unstable_by_key(|(s, _)| *s);
    json!({
        "cards": entries.iter().map(|(s, rows)| json!({
            "rels": s.iter().map(|r| h.rel_name(r)).collect::<Vec<_>>(),
            "rows": rows,
        })).collect::<Vec<_>>(),
        "domains": cp.domains().map(|d| {
            let mut m = serde_json::Map::new();
            let mut keys: Vec<_> = d.iter().collect();
            keys.sort_by_key(|(a, _)| **a);
            for (a, v) in keys {
                m.insert(h.attr_name(*a).to_string(), json!(v));
            }
            Value::Object(m)
        }).unwrap_or(json!({})),
    })
}

pub fn plan_to_json(h: &Hypergraph, p: &QueryPlan) -> Value {
    fn go(h: &Hypergraph, p: &QueryPlan, n: usize) -> Value {
        match p.nodes[n] {
            PlanNode::Scan(r) => json!({ "relation": h.rel_name(r) }),
            PlanNode::Join(a, b) => {
                json!({ "left": go(h, p, a), "right": go(h, p, b) })
            }
        }
    }
    go(h, p, p.root)
}

pub fn parse_plan_json(h: &Hypergraph, text: &str) -> Result<QueryPlan> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("plan JSON: {e}")))?;
    fn go(h: &Hypergraph, v: &Value) -> Result<QueryPlan> {
        if let Some(name) = v.get("relation").and_then(Value::as_str) {
            let r = h
                .rel_by_name(name)
                .ok_or_else(|| Error::Parse(format!("plan: unknown relation {name:?}")))?;
            return Ok(QueryPlan::scan(r));
        }
        match (v.get("left"), v.get("right")) {
            (Some(l), Some(r)) => Ok(QueryPlan::join(&go(h, l)?, &go(h, r)?)),
            _ => Err(Error::Parse(
                "plan: node needs \"relation\" or \"left\"/\"right\"".into(),
            )),
        }
    }
    go(h, &v)
}

pub fn tree_to_json(h: &Hypergraph, t: &JoinTree) -> Value {
    fn go(h: &Hypergraph, t: &JoinTree, n: usize) -> Value {
        json!({
            "relation": h.rel_name(t.nodes[n].rel),
            "children": t.ordered_children(n).into_iter().map(|c| go(h, t, c)).collect::<Vec<_>>(),
        })
    }
    go(h, t, t.root)
}

pub fn meta_to_json(h: &Hypergraph, m: &MetaDecomposition) -> Value {
    fn go(h: &Hypergraph, m: &MetaDecomposition, n: usize) -> Value {
        let node = &m.nodes[n];
        json!({
            "lambda": node.lambda.map(|r| vec![h.rel_name(r).to_string()]).unwrap_or_default(),
            "chi": node.chi.iter().map(|a| h.attr_name(a)).collect::<Vec<_>>(),
            "kappa": node.kappa.iter().map(|a| h.attr_name(a)).collect::<Vec<_>>(),
            "minor": node.lambda.is_none(),
            "children": m.ordered_children(n).into_iter().map(|c| go(h, m, c)).collect::<Vec<_>>(),
        })
    }
    go(h, m, m.root)
}

fn dot_escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

pub fn tree_to_dot(h: &Hypergraph, t: &JoinTree) -> String {
    let mut out = String::from("graph jointree {\n  node [shape=ellipse];\n");
    for (i, n) in t.nodes.iter().enumerate() {
        out.push_str(&format!(
            "  n{} [label=\"{}\"];\n",
            i,
            dot_escape(h.rel_name(n.rel))
        ));
    }
    for i in 0..t.len() {
        for c in t.ordered_children(i) {
            out.push_str(&format!("  n{} -- n{};\n", i, c));
        }
    }
    out.push_str("}\n");
    out
}

pub fn meta_to_dot(h: &Hypergraph, m: &MetaDecomposition) -> String {
    let fmt_set = |s: &crate::set::AttrSet| {
        s.iter()
            .map(|a| h.attr_name(a).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = String::from("graph meta {\n");
    for (i, n) in m.nodes.iter().enumerate() {
        let (shape, lam) = match n.lambda {
            Some(r) => ("box", h.rel_name(r).to_string()),
            None => ("diamond", String::new()),
        };
        out.push_str(&format!(
            "  n{} [shape={} label=\"{}\\nchi: {{{}}}\\nkappa: {{{}}}\"];\n",
            i,
            shape,
            dot_escape(&lam),
            fmt_set(&n.chi),
            fmt_set(&n.kappa)
        ));
    }
    for i in 0..m.len() {
        for c in m.ordered_children(i) {
            out.push_str(&format!("  n{} -- n{};\n", i, c));
        }
    }
    out.push_str("}\n");
    out
}

pub fn plan_to_dot(h: &Hypergraph, p: &QueryPlan) -> String {
    let mut out = String::from("graph plan {\n");
    for (i, n) in p.nodes.iter().enumerate() {
        let label = match n {
            PlanNode::Scan(r) => h.rel_name(*r).to_string(),
            PlanNode::Join(..) => "⋈".to_string(),
        };
        out.push_str(&format!("  n{} [label=\"{}\"];\n", i, dot_escape(&label)));
    }
    for (i, n) in p.nodes.iter().enumerate() {
        if let PlanNode::Join(a, b) = n {
            out.push_str(&format!("  n{} -- n{};\n  n{} -- n{};\n", i, a, i, b));
        }
    }
    out.push_str("}\n");
    out
}

/// Chained temp-view SQL: one view per plan node with its kept-attribute
/// projection, and a final SELECT over the root view.
pub fn plan_to_sql(h: &Hypergraph, p: &QueryPlan) -> Result<String> {
    let info = annotate(p, h)?;
    let mut out = String::new();
    let mut names: Vec<String> = vec![String::new(); p.nodes.len()];
    let mut view = 0usize;
    let order = p.postorder();
    for &ix in &order {
        let cols: Vec<String> = info.kept[ix]
            .iter()
            .map(|a| h.attr_name(a).to_string())
            .collect();
        let source = match p.nodes[ix] {
            PlanNode::Scan(r) => h.rel_name(r).to_string(),
            PlanNode::Join(a, b) => format!("{} NATURAL JOIN {}", names[a], names[b]),
        };
        if ix == p.root {
            if cols.is_empty() {
                out.push_str(&format!("SELECT DISTINCT 1 AS nonempty FROM {source};\n"));
            } else {
                out.push_str(&format!(
                    "SELECT DISTINCT {} FROM {source};\n",
                    cols.join(", ")
                ));
            }
        } else {
            view += 1;
            let name = format!("v{view}");
            out.push_str(&format!(
                "CREATE TEMP VIEW {name} AS SELECT DISTINCT {} FROM {source};\n",
                cols.join(", ")
            ));
            names[ix] = name;
        }
    }
    Ok(out)
}

/// Loads `<dir>/<RelName>.csv` for every relation; headers name the columns.
pub fn load_csv_dir(h: &Hypergraph, dir: &Path) -> Result<MicroDatabase> {
    let mut tables = Vec::with_capacity(h.num_relations());
    for r in 0..h.num_relations() as RelId {
        let path = dir.join(format!("{}.csv", h.rel_name(r)));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let expected: Vec<u32> = h.edge(r).iter().collect();
        let mut positions = Vec::with_capacity(expected.len());
        for &a in &expected {
            let name = h.attr_name(a);
            let pos = cols.iter().position(|c| *c == name).ok_or_else(|| {
                Error::Parse(format!("{}: missing column {name:?}", path.display()))
            })?;
            positions.push(pos);
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let mut row = Vec::with_capacity(positions.len());
            for &pos in &positions {
                let field = fields.get(pos).ok_or_else(|| {
                    Error::Parse(format!(
                        "{} line {}: too few fields",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                row.push(field.parse::<i64>().map_err(|_| {
                    Error::Parse(format!(
                        "{} line {}: {field:?} is not an integer",
                        path.display(),
                        lineno + 1
                    ))
                })?);
            }
            rows.push(row);
        }
        rows.sort_unstable();
        rows.dedup();
        tables.push(Table {
            attrs: expected,
            rows,
        });
    }
    Ok(MicroDatabase { tables })
}

/// Writes the database as one CSV per relation.
pub fn write_csv_dir(h: &Hypergraph, db: &MicroDatabase, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in 0..h.num_relations() as RelId {
        let t = &db.tables[r as usize];
        let mut text = t
            .attrs
            .iter()
            .map(|&a| h.attr_name(a).to_string())
            .collect::<Vec<_>>()
            .join(",");
        text.push('\n');
        for row in &t.rows {
            text.push_str(
                &row.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            text.push('\n');
        }
        std::fs::write(dir.join(format!("{}.csv", h.rel_name(r))), text)?;
    }
    Ok(())
}

/// Derives each plan-node's kept attributes without exposing internals.
pub fn plan_kept_summary(h: &Hypergraph, p: &QueryPlan) -> Result<Vec<(RelSet, Vec<String>)>> {
    let info = annotate(p, h)?;
    Ok(p.postorder()
        .into_iter()
        .map(|ix| {
            let rels = info.rels[ix];
            let kept = kept_of(h, rels)
                .iter()
                .map(|a| h.attr_name(a).to_string())
                .collect();
            (rels, kept)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::hierarchical;

    #[test]
    fn query_json_roundtrip() {
        let text = r#"{"relations":[{"name":"R1","attrs":["x1","x2"]},{"name":"R2","attrs":["x1"]}],"output":["x1"]}"#;
        let h = parse_query_json(text).unwrap();
        assert_eq!(h.num_relations(), 2);
        let v = query_to_json(&h);
        let h2 = parse_query_json(&v.to_string()).unwrap();
        assert_eq!(h2.rel_name(0), "R1");
        assert_eq!(h2.output_attrs().len(), 1);
    }

    #[test]
    fn query_text_forms() {
        let h = parse_query_text("R1(x1,x2)\nR2(x1,x3)\nOUTPUT x1;\n").unwrap();
        assert_eq!(h.output_attrs().len(), 1);
        let boolean = parse_query_text("R1(a)\nR2(a,b)\nOUTPUT;\n").unwrap();
        assert!(boolean.output_attrs().is_empty());
        let full = parse_query_text("R1(a)\nR2(a,b)\n").unwrap();
        assert_eq!(full.output_attrs().len(), 2);
        let err = parse_query_text("R1 x1,x2\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn cards_roundtrip_and_errors() {
        let h = hierarchical();
        let text = r#"{"cards":[
            {"rels":["R1"],"rows":10},{"rels":["R2"],"rows":10},
            {"rels":["R3"],"rows":10},{"rels":["R4"],"rows":10},
            {"rels":["R1","R2"],"rows":5}],
            "domains":{"x1":100}}"#;
        let cp = parse_cards_json(&h, text).unwrap();
        assert_eq!(cp.get(RelSet(0b11)), Some(5.0));
        let v = cards_to_json(&h, &cp);
        let back = parse_cards_json(&h, &v.to_string()).unwrap();
        assert_eq!(back.get(RelSet(0b11)), Some(5.0));
        assert!(parse_cards_json(&h, r#"{"cards":[{"rels":["ZZ"],"rows":1}]}"#).is_err());
    }

    #[test]
    fn plan_json_roundtrip_and_sql() {
        let h = hierarchical();
        let p = QueryPlan::join(
            &QueryPlan::join(&QueryPlan::scan(0), &QueryPlan::scan(3)),
            &QueryPlan::join(&QueryPlan::scan(1), &QueryPlan::scan(2)),
        );
        let v = plan_to_json(&h, &p);
        let back = parse_plan_json(&h, &v.to_string()).unwrap();
        assert_eq!(back.canonical_string(&h), p.canonical_string(&h));
        let sql = plan_to_sql(&h, &p).unwrap();
        assert!(sql.contains("CREATE TEMP VIEW v1"));
        assert!(sql.trim_end().ends_with(';'));
        // Boolean query root projects to a sentinel column
        assert!(sql.contains("1 AS nonempty"));
    }

    #[test]
    fn csv_roundtrip() {
        let h = hierarchical();
        let db = crate::workload::random_db(&h, 1, 20, 5);
        let dir = std::env::temp_dir().join(format!("mdtest-{}", std::process::id()));
        write_csv_dir(&h, &db, &dir).unwrap();
        let back = load_csv_dir(&h, &dir).unwrap();
        for r in 0..h.num_relations() {
            assert_eq!(back.tables[r].rows, db.tables[r].rows);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
