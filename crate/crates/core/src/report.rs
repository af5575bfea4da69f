//! Deterministic JSON, DOT and CSV renderings of points, trees, measures,
//! barycenters, certificates and equidistribution tables, and the reader
//! that turns a serialized tree back into a retraction oracle.

use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::berkline::{Ball, BerkPoint};
use crate::crucial::{BarycenterResult, TreeMeasure};
use crate::error::{Error, Result};
use crate::resloc::{DepthReport, EquidistReport, MinResLocResult, OrdResSample};
use crate::trucco_tree::{DynTree, INFINITY, TOP};
use crate::valfield::{fmt_q, format_exact, parse_q, parse_scalar, Tower, Q};

/// Exact rendering `a/b` (or `a`).
pub fn q_str(x: &Q) -> String {
    fmt_q(x)
}

/// Decimal rendering for human-facing columns.
pub fn q_decimal(x: &Q) -> String {
    format!("{:.6}", *x.numer() as f64 / *x.denom() as f64)
}

pub fn point_json(b: &Ball) -> Value {
    json!({ "type": "ball", "center": format_exact(b.center()), "rv": q_str(&b.rv()) })
}

pub fn berk_point_json(x: &BerkPoint) -> Value {
    match x {
        BerkPoint::Infinity => json!({ "type": "infinity" }),
        BerkPoint::Ball(b) => point_json(b),
        BerkPoint::Finite(a) => json!({ "type": "classical", "center": format_exact(a) }),
    }
}

/// Reads a point written by [`point_json`] into `tower`.
pub fn point_from_json(tower: &Tower, v: &Value) -> Result<Ball> {
    let field = |k: &str| {
        v.get(k).and_then(Value::as_str).ok_or_else(|| Error::Parse(format!("point without string field '{k}'")))
    };
    if field("type")? != "ball" {
        return Err(Error::Parse("only ball points can be read back".into()));
    }
    let center = parse_scalar(tower, field("center")?)?;
    let rv =
        parse_q(field("rv")?).ok_or_else(|| Error::Parse(format!("malformed radius '{}'", field("rv").unwrap())))?;
    Ball::new(&center, rv)
}

fn node_json(tree: &DynTree, id: usize) -> Value {
    if id == INFINITY {
        json!({ "type": "infinity" })
    } else {
        point_json(tree.ball(id))
    }
}

/// `[{"node": id, "point": ..., "mass": "a/b"}, ...]` in node order.
pub fn measure_json(tree: &DynTree, nu: &TreeMeasure) -> Value {
    Value::Array(
        nu.atoms().map(|(id, x)| json!({ "node": id, "point": node_json(tree, id), "mass": q_str(&x) })).collect(),
    )
}

pub fn barycenter_json(bc: &BarycenterResult) -> Value {
    match bc {
        BarycenterResult::Singleton(a) => json!({ "kind": "singleton", "point": point_json(a) }),
        BarycenterResult::Segment(a, b) => json!({ "kind": "segment", "from": point_json(a), "to": point_json(b) }),
    }
}

fn tower_json(tower: &Tower) -> Value {
    let levels: Vec<Value> = (1..tower.num_levels()).map(|i| json!(tower.level(i).unwrap().modulus())).collect();
    json!({ "prime": tower.prime(), "digits": tower.digits(), "levels": levels })
}

/// The tree with its nodes, parents, valencies, edge lengths and level sets,
/// plus the tower moduli needed to read the centers back.
pub fn tree_json(tree: &DynTree) -> Value {
    let nodes: Vec<Value> = (0..tree.len())
        .map(|id| {
            let mut m = Map::new();
            m.insert("id".into(), json!(id));
            m.insert("point".into(), node_json(tree, id));
            m.insert("parent".into(), json!(tree.parent(id)));
            m.insert("valency".into(), json!(tree.valency(id)));
            if let Some(len) = tree.edge_len(id) {
                m.insert("edge_length".into(), json!(q_str(&len)));
            }
            Value::Object(m)
        })
        .collect();
    let levels: Vec<Value> = (0..=tree.level())
        .map(|k| {
            Value::Array(tree.level_points(k).iter().map(|&(id, deg)| json!({ "node": id, "degree": deg })).collect())
        })
        .collect();
    json!({
        "tower": tower_json(tree.poly().tower()),
        "polynomial": tree.poly().to_string(),
        "level": tree.level(),
        "simple": tree.is_simple(),
        "vertices": tree.vertex_set(),
        "nodes": nodes,
        "levels": levels,
    })
}

fn dot_label(tree: &DynTree, id: usize) -> String {
    if id == INFINITY {
        "inf".into()
    } else {
        tree.ball(id).to_string()
    }
}

/// Graphviz rendering: one node per tree node, leaves boxed with their
/// degree, edges labelled with their hyperbolic length.
pub fn tree_dot(tree: &DynTree) -> String {
    let mut out = String::new();
    writeln!(out, "graph gamma_{} {{", tree.level()).unwrap();
    let leaves: Vec<(usize, u64)> = tree.leaves().to_vec();
    for id in 0..tree.len() {
        let label = dot_label(tree, id);
        match leaves.iter().find(|x| x.0 == id) {
            Some((_, deg)) if !tree.is_simple() || id != TOP => {
                writeln!(out, "  n{id} [label=\"{label}\\ndeg {deg}\", shape=box];").unwrap()
            }
            _ => writeln!(out, "  n{id} [label=\"{label}\"];").unwrap(),
        }
    }
    for id in 1..tree.len() {
        let parent = tree.parent(id).unwrap();
        match tree.edge_len(id) {
            Some(len) => writeln!(out, "  n{id} -- n{parent} [label=\"{}\"];", q_str(&len)).unwrap(),
            None => writeln!(out, "  n{id} -- n{parent};").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}

pub fn depth_report_json(r: &DepthReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            json!({
                "direction": e.direction.as_ref().map(|d| d.to_string()),
                "residue_degree": e.residue_degree,
                "count": e.count,
                "depth": e.depth,
                "fixed": e.fixed,
            })
        })
        .collect();
    json!({
        "point": point_json(&r.point),
        "iterate": r.iterate,
        "degree": r.degree,
        "entries": entries,
        "semistable": r.semistable,
        "stable": r.stable,
    })
}

pub fn ord_res_sample_json(s: &OrdResSample) -> Value {
    json!({ "point": point_json(&s.point), "value": q_str(&s.value) })
}

/// `{"minresloc": {...}, "certificates": [...], "probes": [...], "ordres_samples": [...]}`.
pub fn min_res_loc_json(r: &MinResLocResult, samples: &[OrdResSample]) -> Value {
    let mut loc = match barycenter_json(&r.locus) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    loc.insert("ord_res".into(), json!(q_str(&r.ord_res)));
    loc.insert("levels_used".into(), json!(r.levels_used));
    loc.insert("method".into(), json!(r.method.to_string()));
    loc.insert("barycenters".into(), Value::Array(r.barycenters.iter().map(barycenter_json).collect()));
    let probes: Vec<Value> = r
        .probes
        .iter()
        .map(|(b, v, semi)| json!({ "point": point_json(b), "ord_res": q_str(v), "semistable": semi }))
        .collect();
    json!({
        "minresloc": Value::Object(loc),
        "certificates": r.certificates.iter().map(depth_report_json).collect::<Vec<_>>(),
        "probes": probes,
        "ordres_samples": samples.iter().map(ord_res_sample_json).collect::<Vec<_>>(),
    })
}

/// The equidistribution table with exact columns and a decimal discrepancy.
pub fn equidist_csv(rep: &EquidistReport) -> String {
    let mut out = String::from("level,leaf,mass,target,discrepancy,discrepancy_decimal\n");
    for r in &rep.rows {
        writeln!(
            out,
            "{},\"{}\",{},{},{},{}",
            r.level,
            r.leaf,
            q_str(&r.mass),
            q_str(&r.target),
            q_str(&r.discrepancy),
            q_decimal(&r.discrepancy)
        )
        .unwrap();
    }
    out
}

pub fn equidist_json(rep: &EquidistReport) -> Value {
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "level": r.level,
                "leaf": point_json(&r.leaf),
                "mass": q_str(&r.mass),
                "target": q_str(&r.target),
                "discrepancy": q_str(&r.discrepancy),
            })
        })
        .collect();
    let max: Vec<Value> =
        rep.max_by_level().iter().map(|(n, x)| json!({ "level": n, "max_discrepancy": q_str(x) })).collect();
    json!({ "iterate": rep.iterate, "probe_level": rep.probe_level, "tame": rep.tame, "rows": rows, "max_by_level": max })
}

/// A tree read back from [`tree_json`]: enough structure to answer retractions.
#[derive(Clone, Debug)]
pub struct TreeSnapshot {
    tower: Arc<Tower>,
    balls: Vec<Option<Ball>>,
    children: Vec<Vec<usize>>,
}

impl TreeSnapshot {
    pub fn from_json(v: &Value) -> Result<TreeSnapshot> {
        let bad = |what: &str| Error::Parse(format!("tree JSON: {what}"));
        let tw = v.get("tower").ok_or_else(|| bad("missing tower"))?;
        let p = tw.get("prime").and_then(Value::as_u64).ok_or_else(|| bad("missing prime"))?;
        let digits = tw.get("digits").and_then(Value::as_u64).ok_or_else(|| bad("missing digits"))?;
        let tower = Tower::new(p, Some(digits as u32))?;
        for lvl in tw.get("levels").and_then(Value::as_array).ok_or_else(|| bad("missing levels"))? {
            let modulus: Vec<Vec<u64>> =
                serde_json::from_value(lvl.clone()).map_err(|e| bad(&format!("level modulus: {e}")))?;
            tower.push_level(modulus)?;
        }
        let nodes = v.get("nodes").and_then(Value::as_array).ok_or_else(|| bad("missing nodes"))?;
        let mut balls = Vec::with_capacity(nodes.len());
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if n.get("id").and_then(Value::as_u64) != Some(i as u64) {
                return Err(bad("nodes out of order"));
            }
            let pt = n.get("point").ok_or_else(|| bad("node without point"))?;
            balls.push(if i == INFINITY { None } else { Some(point_from_json(&tower, pt)?) });
            if let Some(par) = n.get("parent").and_then(Value::as_u64) {
                let par = par as usize;
                if par >= nodes.len() {
                    return Err(bad("parent out of range"));
                }
                children[par].push(i);
            }
        }
        if balls.len() < 2 {
            return Err(bad("fewer than two nodes"));
        }
        Ok(TreeSnapshot { tower, balls, children })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn ball(&self, id: usize) -> Option<&Ball> {
        self.balls[id].as_ref()
    }

    /// Nearest point of the tree to `x`.
    pub fn retract_ball(&self, x: &Ball) -> Result<Ball> {
        let top = self.balls[TOP].as_ref().unwrap();
        if !x.leq(top)? {
            return x.join(top);
        }
        let mut u = TOP;
        'descend: loop {
            let ub = self.balls[u].as_ref().unwrap();
            for &c in &self.children[u] {
                let cb = self.balls[c].as_ref().unwrap();
                let j = x.join(cb)?;
                if j.rv() == ub.rv() {
                    continue;
                }
                if x.leq(cb)? {
                    u = c;
                    continue 'descend;
                }
                return Ok(j);
            }
            return Ok(ub.clone());
        }
    }
}
