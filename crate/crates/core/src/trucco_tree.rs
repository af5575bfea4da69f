//! The trees `Γ_n = Hull(P^{-n}(ξ_B) ∪ {∞})`, their retractions, valency
//! measures and Laplacians.

use std::collections::{BTreeMap, HashMap};

use crate::berkline::{Ball, BerkPoint};
use crate::error::{Error, Result};
use crate::polydyn::{BasePoint, Poly};
use crate::valfield::Q;

/// Default cap on the number of points of `L_n`.
pub const LEAF_CAP: usize = 4096;

/// A point of `L_k = P^{-k}(ξ_B)`.
#[derive(Clone, Debug)]
pub struct LevelPoint {
    pub point: Ball,
    /// `deg_ξ(P^k)`.
    pub degree: u64,
    /// `deg_ξ(P)`.
    pub local_degree: u64,
    /// Index of `P(ξ)` in `L_{k-1}`.
    pub image: usize,
}

/// The backward orbit `L_0, L_1, ...` of the base point, grown on demand.
#[derive(Clone, Debug)]
pub struct TreeFamily {
    poly: Poly,
    base: BasePoint,
    levels: Vec<Vec<LevelPoint>>,
    leaf_cap: usize,
}

impl TreeFamily {
    pub fn new(poly: &Poly) -> Result<TreeFamily> {
        let base = poly.base_point()?;
        let l0 = vec![LevelPoint { point: base.ball.clone(), degree: 1, local_degree: 1, image: 0 }];
        Ok(TreeFamily { poly: poly.clone(), base, levels: vec![l0], leaf_cap: LEAF_CAP })
    }

    pub fn with_leaf_cap(mut self, cap: usize) -> TreeFamily {
        self.leaf_cap = cap;
        self
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn base(&self) -> &BasePoint {
        &self.base
    }

    pub fn computed_levels(&self) -> usize {
        self.levels.len() - 1
    }

    /// Computes `L_k` for all `k <= n`.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.levels.len() <= n {
            let prev = self.levels.last().unwrap();
            let mut next = Vec::new();
            for (i, lp) in prev.iter().enumerate() {
                for e in self.poly.preimages(&lp.point)? {
                    next.push(LevelPoint {
                        point: e.point,
                        degree: e.local_degree * lp.degree,
                        local_degree: e.local_degree,
                        image: i,
                    });
                }
                if next.len() > self.leaf_cap {
                    return Err(Error::LevelBoundExceeded { leaves: next.len(), bound: self.leaf_cap });
                }
            }
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn level(&mut self, k: usize) -> Result<&[LevelPoint]> {
        self.extend_to(k)?;
        Ok(&self.levels[k])
    }

    /// `Γ_n`.
    pub fn tree(&mut self, n: usize) -> Result<DynTree> {
        self.extend_to(n)?;
        DynTree::build(self, n)
    }
}

#[derive(Clone, Debug)]
struct Node {
    point: Option<Ball>,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Where a point of `Γ` sits: at a node or inside the edge from a node to its parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Node(usize),
    Edge { child: usize, point: Ball },
}

/// The finite metric tree `Γ_n` with its level sets and fiber degrees.
#[derive(Clone, Debug)]
pub struct DynTree {
    level: usize,
    poly: Poly,
    base: BasePoint,
    nodes: Vec<Node>,
    index: HashMap<Ball, usize>,
    levels: Vec<Vec<(usize, u64)>>,
    images: Vec<Vec<usize>>,
}

/// Node id of `∞`.
pub const INFINITY: usize = 0;
/// Node id of `ξ_B`.
pub const TOP: usize = 1;

impl DynTree {
    fn build(fam: &TreeFamily, n: usize) -> Result<DynTree> {
        let mut t = DynTree {
            level: n,
            poly: fam.poly.clone(),
            base: fam.base.clone(),
            nodes: vec![
                Node { point: None, parent: None, children: vec![TOP] },
                Node { point: Some(fam.base.ball.clone()), parent: Some(INFINITY), children: vec![] },
            ],
            index: HashMap::new(),
            levels: Vec::new(),
            images: Vec::new(),
        };
        t.index.insert(fam.base.ball.clone(), TOP);
        for k in 0..=n {
            let mut ids = Vec::with_capacity(fam.levels[k].len());
            for lp in &fam.levels[k] {
                ids.push((t.insert(&lp.point)?, lp.degree));
            }
            let imgs: Vec<usize> =
                if k == 0 { vec![TOP] } else { fam.levels[k].iter().map(|lp| t.levels[k - 1][lp.image].0).collect() };
            t.levels.push(ids);
            t.images.push(imgs);
        }
        Ok(t)
    }

    fn add_node(&mut self, b: &Ball, parent: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { point: Some(b.clone()), parent: Some(parent), children: vec![] });
        self.nodes[parent].children.push(id);
        self.index.insert(b.clone(), id);
        id
    }

    /// Inserts a point below `ξ_B`, splitting an edge at the branch point if needed.
    fn insert(&mut self, x: &Ball) -> Result<usize> {
        if let Some(&id) = self.index.get(x) {
            return Ok(id);
        }
        if !x.leq(self.ball(TOP))? {
            return Err(Error::CheckFailed(format!("{x} is not below the base point")));
        }
        let mut u = TOP;
        'descend: loop {
            let ub = self.ball(u).clone();
            for ci in 0..self.nodes[u].children.len() {
                let c = self.nodes[u].children[ci];
                let cb = self.ball(c).clone();
                let j = x.join(&cb)?;
                if j.rv() == ub.rv() {
                    continue;
                }
                if j == cb {
                    u = c;
                    continue 'descend;
                }
                let mid = self.nodes.len();
                self.nodes.push(Node { point: Some(j.clone()), parent: Some(u), children: vec![c] });
                self.nodes[u].children[ci] = mid;
                self.nodes[c].parent = Some(mid);
                self.index.insert(j.clone(), mid);
                if j == *x {
                    return Ok(mid);
                }
                return Ok(self.add_node(x, mid));
            }
            return Ok(self.add_node(x, u));
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn base(&self) -> &BasePoint {
        &self.base
    }

    pub fn is_simple(&self) -> bool {
        self.base.simple
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The ball at a finite node (panics at `∞`).
    pub fn ball(&self, id: usize) -> &Ball {
        self.nodes[id].point.as_ref().expect("finite node")
    }

    pub fn point(&self, id: usize) -> BerkPoint {
        match &self.nodes[id].point {
            None => BerkPoint::Infinity,
            Some(b) => BerkPoint::Ball(b.clone()),
        }
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    /// Length of the edge to the parent (`None` for the edge to `∞`).
    pub fn edge_len(&self, id: usize) -> Option<Q> {
        match self.nodes[id].parent {
            Some(p) if p != INFINITY => Some(self.ball(id).rho(self.ball(p)).expect("nested balls")),
            _ => None,
        }
    }

    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.nodes[id].parent.into_iter().collect();
        v.extend_from_slice(&self.nodes[id].children);
        v
    }

    pub fn valency(&self, id: usize) -> usize {
        self.nodes[id].children.len() + usize::from(self.nodes[id].parent.is_some())
    }

    pub fn id_of(&self, b: &Ball) -> Option<usize> {
        self.index.get(b).copied()
    }

    /// `V(Γ_n)`: nodes of valency other than 2, together with `∞`.
    pub fn vertex_set(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.valency(i) != 2).collect()
    }

    /// `L_n` with the degrees `deg_ξ(P^n)`.
    pub fn leaves(&self) -> &[(usize, u64)] {
        &self.levels[self.level]
    }

    /// `L_k` for `k <= n`.
    pub fn level_points(&self, k: usize) -> &[(usize, u64)] {
        &self.levels[k]
    }

    /// Node ids of `P(ξ)` for `ξ ∈ L_k`, aligned with [`Self::level_points`].
    pub fn level_images(&self, k: usize) -> &[usize] {
        &self.images[k]
    }

    /// Ids of the nodes strictly below `id` together with `id` itself.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.nodes[out[i]].children);
            i += 1;
        }
        out
    }

    /// Finds `ξ` in the tree, or `None` when `ξ ∉ Γ`.
    pub fn locate(&self, x: &Ball) -> Result<Option<Location>> {
        if let Some(&id) = self.index.get(x) {
            return Ok(Some(Location::Node(id)));
        }
        let top = self.ball(TOP);
        if !x.leq(top)? {
            let j = x.join(top)?;
            return Ok((j == *x).then(|| Location::Edge { child: TOP, point: x.clone() }));
        }
        let mut u = TOP;
        'descend: loop {
            let ub = self.ball(u);
            for &c in &self.nodes[u].children {
                let cb = self.ball(c);
                let j = x.join(cb)?;
                if j.rv() == ub.rv() {
                    continue;
                }
                if j == *cb {
                    u = c;
                    continue 'descend;
                }
                if j == *x {
                    return Ok(Some(Location::Edge { child: c, point: x.clone() }));
                }
                return Ok(None);
            }
            return Ok(None);
        }
    }

    /// Nearest point of `Γ` to `ξ`.
    pub fn retraction(&self, x: &BerkPoint) -> Result<BerkPoint> {
        let b = match x {
            BerkPoint::Infinity => return Ok(BerkPoint::Infinity),
            BerkPoint::Ball(b) => b.clone(),
            BerkPoint::Finite(a) => {
                let deepest = self.nodes.iter().filter_map(|n| n.point.as_ref().map(|b| b.rv())).max().unwrap();
                Ball::new(a, deepest + Q::from_integer(1))?
            }
        };
        Ok(BerkPoint::Ball(self.retract_ball(&b)?))
    }

    pub fn retract_ball(&self, x: &Ball) -> Result<Ball> {
        let top = self.ball(TOP);
        if !x.leq(top)? {
            return x.join(top);
        }
        let mut u = TOP;
        'descend: loop {
            let ub = self.ball(u);
            for &c in &self.nodes[u].children {
                let cb = self.ball(c);
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

    /// Node id a point of `Γ` retracts to when the retraction is a node.
    pub fn retract_to_node(&self, x: &Ball) -> Result<usize> {
        let r = self.retract_ball(x)?;
        self.id_of(&r).ok_or_else(|| Error::CheckFailed(format!("retraction of {x} is {r}, not a node")))
    }

    /// `ν_Γ = Σ (2 - v(ξ))/2 δ_ξ`.
    pub fn valency_measure(&self) -> TreeMeasure {
        let mut m = TreeMeasure::default();
        for id in 0..self.nodes.len() {
            let v = self.valency(id) as i64;
            if v != 2 {
                m.add(id, Q::new(2 - v, 2));
            }
        }
        m
    }

    /// `Δ_Γ f` for a function given by its values at the finite nodes and its
    /// outgoing slope at `ξ_B` along the edge to `∞`.
    pub fn laplacian(&self, f: &PaFunction) -> Result<TreeMeasure> {
        let mut m = TreeMeasure::default();
        for id in 1..self.nodes.len() {
            let mut s = Q::from_integer(0);
            for w in self.neighbors(id) {
                if w == INFINITY {
                    s += f.inf_slope;
                    continue;
                }
                let len = self.ball(id).rho(self.ball(w))?;
                s += (f.values[w] - f.values[id]) / len;
            }
            m.add(id, s);
        }
        m.add(INFINITY, -f.inf_slope);
        Ok(m)
    }

    /// `Δ_Γ f` for a function evaluated on balls, with slopes read off the
    /// germs of `f` along every edge.  The atom at `∞` is omitted.
    pub fn laplacian_of<F>(&self, f: F) -> Result<TreeMeasure>
    where
        F: Fn(&Ball) -> Result<Q>,
    {
        let mut m = TreeMeasure::default();
        for id in 1..self.nodes.len() {
            let here = self.ball(id);
            let f0 = f(here)?;
            let mut s = Q::from_integer(0);
            for w in self.neighbors(id) {
                let (target, len) = if w == INFINITY {
                    (here.up(Q::from_integer(1)), Q::from_integer(1))
                } else {
                    let b = self.ball(w).clone();
                    let len = here.rho(&b)?;
                    (b, len)
                };
                s += germ_slope(&f, here, f0, &target, len)?;
            }
            m.add(id, s);
        }
        Ok(m)
    }

    /// Checks the structural facts relating `Γ_{n-1}` and `Γ_n`: level
    /// nesting, retraction of `L_n` onto `L_{n-1}`, exhaustion and the
    /// mapping of edges into edges.
    pub fn check_invariants(&self, prev: &DynTree) -> Result<()> {
        let n = self.level;
        if prev.level + 1 != n {
            return Err(Error::Invalid("trees are not consecutive".into()));
        }
        let total: u64 = self.leaves().iter().map(|x| x.1).sum();
        let d = self.poly.degree() as u64;
        crate::error::check(total == d.pow(n as u32), || format!("Σ deg over L_{n} is {total}"))?;
        for id in 1..prev.len() {
            let b = prev.ball(id);
            crate::error::check(self.id_of(b).is_some(), || format!("node {b} of Γ_{} missing", n - 1))?;
        }
        let prev_leaves: Vec<&Ball> = prev.leaves().iter().map(|x| prev.ball(x.0)).collect();
        for &(id, _) in self.leaves() {
            let b = self.ball(id);
            let r = prev.retract_ball(b)?;
            let strict = self.is_simple() || b.lt(&r)?;
            crate::error::check(prev_leaves.contains(&&r) && strict, || {
                format!("leaf {b} of Γ_{n} retracts to {r}, not strictly below a leaf of Γ_{}", n - 1)
            })?;
        }
        if !self.is_simple() {
            for &(id, _) in prev.leaves() {
                crate::error::check(self.valency(self.id_of(prev.ball(id)).unwrap()) >= 2, || {
                    format!("leaf {} of Γ_{} is still an end of Γ_{n}", prev.ball(id), n - 1)
                })?;
            }
        }
        let prev_vertices: Vec<Ball> =
            prev.vertex_set().into_iter().filter(|&i| i != INFINITY).map(|i| prev.ball(i).clone()).collect();
        for id in 2..self.len() {
            let parent = self.parent(id).unwrap();
            let lo = self.ball(id);
            let hi = self.ball(parent);
            let (plo, _) = self.poly.image_ball(lo)?;
            let (phi, _) = self.poly.image_ball(hi)?;
            let mid = lo.up((lo.rv() - hi.rv()) / Q::from_integer(2));
            let (pmid, _) = self.poly.image_ball(&mid)?;
            let ok = plo.lt(&pmid)? && pmid.lt(&phi)?;
            crate::error::check(ok, || format!("edge ({lo}, {hi}) is not mapped monotonically"))?;
            for b in [&plo, &phi] {
                crate::error::check(prev.locate(b)?.is_some(), || format!("image {b} is not in Γ_{}", n - 1))?;
            }
            for v in &prev_vertices {
                let inside = plo.lt(v)? && v.lt(&phi)?;
                crate::error::check(!inside, || format!("image of edge ({lo}, {hi}) crosses vertex {v}"))?;
            }
        }
        Ok(())
    }
}

/// One-sided derivative of `f` at `here` toward `target`, read from two
/// probes and refined until they agree.
pub(crate) fn germ_slope<F>(f: &F, here: &Ball, f0: Q, target: &Ball, len: Q) -> Result<Q>
where
    F: Fn(&Ball) -> Result<Q>,
{
    let mut t = len / Q::from_integer(2);
    for _ in 0..8 {
        let a = (f(&here.toward(target, t)?)? - f0) / t;
        let h = t / Q::from_integer(2);
        let b = (f(&here.toward(target, h)?)? - f0) / h;
        if a == b {
            return Ok(a);
        }
        t = h / Q::from_integer(2);
    }
    Err(Error::NonAffineProbe(format!("at {here} toward {target}")))
}

/// A function on the nodes of a tree, affine along edges.
#[derive(Clone, Debug)]
pub struct PaFunction {
    /// Values indexed by node id (the entry at `∞` is ignored).
    pub values: Vec<Q>,
    /// Outgoing slope at `ξ_B` toward `∞`.
    pub inf_slope: Q,
}

/// A signed measure with finitely many atoms at tree nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeMeasure {
    atoms: BTreeMap<usize, Q>,
}

impl TreeMeasure {
    pub fn from_atoms(it: impl IntoIterator<Item = (usize, Q)>) -> TreeMeasure {
        let mut m = TreeMeasure::default();
        for (i, x) in it {
            m.add(i, x);
        }
        m
    }

    pub fn add(&mut self, id: usize, x: Q) {
        let e = self.atoms.entry(id).or_insert_with(|| Q::from_integer(0));
        *e += x;
        if *e == Q::from_integer(0) {
            self.atoms.remove(&id);
        }
    }

    pub fn mass_at(&self, id: usize) -> Q {
        self.atoms.get(&id).copied().unwrap_or_else(|| Q::from_integer(0))
    }

    /// Nonzero atoms in node order.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, Q)> + '_ {
        self.atoms.iter().map(|(&i, &x)| (i, x))
    }

    pub fn support(&self) -> Vec<usize> {
        self.atoms.keys().copied().collect()
    }

    pub fn total(&self) -> Q {
        self.atoms.values().fold(Q::from_integer(0), |a, &b| a + b)
    }

    pub fn scale(&self, c: Q) -> TreeMeasure {
        TreeMeasure::from_atoms(self.atoms().map(|(i, x)| (i, x * c)))
    }

    pub fn plus(&self, other: &TreeMeasure) -> TreeMeasure {
        let mut m = self.clone();
        for (i, x) in other.atoms() {
            m.add(i, x);
        }
        m
    }
}
