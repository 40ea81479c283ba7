//! Graphs with tropical-type data: genus, cone labels, contact orders and
//! curve-class decorations, together with splitting, balancing, degree,
//! contraction and automorphism operations.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::complex::{ConeComplex, ConeId};
use crate::error::{Error, Result};
use crate::lattice::IntMatrix;

/// Unordered edge, canonically oriented from the lower vertex id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v1: usize,
    pub v2: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Leg {
    pub vertex: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeGraph {
    pub genus: Vec<u32>,
    pub edges: Vec<Edge>,
    pub legs: Vec<Leg>,
}

impl TypeGraph {
    pub fn n_vertices(&self) -> usize {
        self.genus.len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.v1, e.v2), (e.v2, e.v1)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// First Betti number of the topological realisation.
    pub fn betti1(&self) -> usize {
        let n = self.n_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut components = n;
        let mut extra = 0usize;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.v1), find(&mut parent, e.v2));
            if a == b {
                extra += 1;
            } else {
                parent[a] = b;
                components -= 1;
            }
        }
        let _ = components;
        extra
    }
}

/// Curve class as a vector of intersection numbers with labeled boundary
/// divisors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct CurveClass(pub BTreeMap<String, BigInt>);

impl CurveClass {
    pub fn intersection(&self, divisor: &str) -> BigInt {
        self.0.get(divisor).cloned().unwrap_or_else(BigInt::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalType {
    pub graph: TypeGraph,
    pub sigma_v: Vec<ConeId>,
    pub sigma_e: Vec<ConeId>,
    pub sigma_l: Vec<ConeId>,
    /// Contact orders on the canonical edge orientation, in `N_{sigma(E)}`.
    pub u_e: Vec<Vec<BigInt>>,
    /// Leg contact orders, oriented away from the leg vertex.
    pub u_l: Vec<Vec<BigInt>>,
}

impl TropicalType {
    /// Canonicalize edge orientations (lower vertex first, flipping `u`)
    /// and validate labels against a complex.
    pub fn new(
        graph: TypeGraph,
        sigma_v: Vec<ConeId>,
        sigma_e: Vec<ConeId>,
        sigma_l: Vec<ConeId>,
        mut u_e: Vec<Vec<BigInt>>,
        u_l: Vec<Vec<BigInt>>,
        complex: &ConeComplex,
    ) -> Result<Self> {
        let nv = graph.n_vertices();
        if sigma_v.len() != nv
            || sigma_e.len() != graph.edges.len()
            || sigma_l.len() != graph.legs.len()
            || u_e.len() != graph.edges.len()
            || u_l.len() != graph.legs.len()
        {
            return Err(Error::InvalidType("label counts do not match the graph".into()));
        }
        let mut graph = graph;
        for (i, e) in graph.edges.iter_mut().enumerate() {
            if e.v1 >= nv || e.v2 >= nv {
                return Err(Error::InvalidType(format!("edge {i} has an unknown vertex")));
            }
            if e.v1 > e.v2 {
                std::mem::swap(&mut e.v1, &mut e.v2);
                u_e[i] = u_e[i].iter().map(|x| -x).collect();
            }
        }
        for (i, l) in graph.legs.iter().enumerate() {
            if l.vertex >= nv {
                return Err(Error::InvalidType(format!("leg {i} has an unknown vertex")));
            }
        }
        for (what, ids) in [("vertex", &sigma_v), ("edge", &sigma_e), ("leg", &sigma_l)] {
            for id in ids.iter() {
                if complex.cone(id).is_none() {
                    return Err(Error::InvalidType(format!("{what} labeled by unknown cone `{id}`")));
                }
            }
        }
        for (i, e) in graph.edges.iter().enumerate() {
            let amb = complex.cone(&sigma_e[i]).unwrap().ambient_rank();
            if u_e[i].len() != amb {
                return Err(Error::InvalidType(format!("u on edge {i} has wrong length")));
            }
            for v in [e.v1, e.v2] {
                if !complex.has_face_map(&sigma_v[v], &sigma_e[i]) {
                    return Err(Error::MissingFaceMap {
                        from: sigma_v[v].clone(),
                        to: sigma_e[i].clone(),
                    });
                }
            }
        }
        for (i, l) in graph.legs.iter().enumerate() {
            let amb = complex.cone(&sigma_l[i]).unwrap().ambient_rank();
            if u_l[i].len() != amb {
                return Err(Error::InvalidType(format!("u on leg {i} has wrong length")));
            }
            if !complex.has_face_map(&sigma_v[l.vertex], &sigma_l[i]) {
                return Err(Error::MissingFaceMap {
                    from: sigma_v[l.vertex].clone(),
                    to: sigma_l[i].clone(),
                });
            }
        }
        Ok(TropicalType { graph, sigma_v, sigma_e, sigma_l, u_e, u_l })
    }

    /// `u` of the oriented flag `(edge, vertex)`, pointing away from `vertex`.
    pub fn u_away(&self, edge: usize, vertex: usize) -> Vec<BigInt> {
        let e = &self.graph.edges[edge];
        debug_assert!(e.v1 == vertex || e.v2 == vertex);
        if e.v1 == vertex {
            self.u_e[edge].clone()
        } else {
            self.u_e[edge].iter().map(|x| -x).collect()
        }
    }

    /// Whether a leg is unbounded: the ray `n_v + t u(L)` stays in
    /// `sigma(L)` forever, i.e. `u(L)` lies in the recession cone, which for
    /// a cone is the cone itself.
    pub fn leg_unbounded(&self, leg: usize, complex: &ConeComplex) -> bool {
        let cone = complex.cone(&self.sigma_l[leg]).unwrap();
        cone.contains(&self.u_l[leg], false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedType {
    pub base: TropicalType,
    pub classes: Vec<CurveClass>,
}

impl DecoratedType {
    pub fn new(base: TropicalType, classes: Vec<CurveClass>) -> Result<Self> {
        if classes.len() != base.graph.n_vertices() {
            return Err(Error::InvalidType("every vertex must carry a curve class".into()));
        }
        Ok(DecoratedType { base, classes })
    }
}

/// Where a flag of a split edge went: component and leg index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitFlag {
    pub edge: usize,
    pub vertex: usize,
    pub component: usize,
    pub leg: usize,
}

/// Split a decorated type at a set of edges. Each splitting edge becomes a
/// pair of legs carrying the contact order oriented away from its vertex;
/// components are ordered by their smallest original vertex id.
pub fn split(
    t: &DecoratedType,
    split_edges: &BTreeSet<usize>,
) -> (Vec<DecoratedType>, Vec<SplitFlag>) {
    let g = &t.base.graph;
    let n = g.n_vertices();
    // connected components of the graph minus the splitting edges
    let mut comp = vec![usize::MAX; n];
    let mut next = 0usize;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for (i, e) in g.edges.iter().enumerate() {
                if split_edges.contains(&i) {
                    continue;
                }
                for (a, b) in [(e.v1, e.v2), (e.v2, e.v1)] {
                    if a == v && comp[b] == usize::MAX {
                        comp[b] = next;
                        stack.push(b);
                    }
                }
            }
        }
        next += 1;
    }
    let n_comp = next;
    let mut vmap = vec![usize::MAX; n];
    let mut counts = vec![0usize; n_comp];
    for v in 0..n {
        vmap[v] = counts[comp[v]];
        counts[comp[v]] += 1;
    }

    let mut graphs: Vec<TypeGraph> = (0..n_comp).map(|_| TypeGraph::default()).collect();
    let mut sigma_v: Vec<Vec<ConeId>> = vec![Vec::new(); n_comp];
    let mut sigma_e: Vec<Vec<ConeId>> = vec![Vec::new(); n_comp];
    let mut sigma_l: Vec<Vec<ConeId>> = vec![Vec::new(); n_comp];
    let mut u_e: Vec<Vec<Vec<BigInt>>> = vec![Vec::new(); n_comp];
    let mut u_l: Vec<Vec<Vec<BigInt>>> = vec![Vec::new(); n_comp];
    let mut classes: Vec<Vec<CurveClass>> = vec![Vec::new(); n_comp];

    for v in 0..n {
        let c = comp[v];
        graphs[c].genus.push(g.genus[v]);
        sigma_v[c].push(t.base.sigma_v[v].clone());
        classes[c].push(t.classes[v].clone());
    }
    for (i, e) in g.edges.iter().enumerate() {
        if split_edges.contains(&i) {
            continue;
        }
        let c = comp[e.v1];
        debug_assert_eq!(c, comp[e.v2]);
        graphs[c].edges.push(Edge { v1: vmap[e.v1], v2: vmap[e.v2] });
        sigma_e[c].push(t.base.sigma_e[i].clone());
        u_e[c].push(t.base.u_e[i].clone());
    }
    for (i, l) in g.legs.iter().enumerate() {
        let c = comp[l.vertex];
        graphs[c].legs.push(Leg { vertex: vmap[l.vertex] });
        sigma_l[c].push(t.base.sigma_l[i].clone());
        u_l[c].push(t.base.u_l[i].clone());
    }
    // new legs from the splitting flags, after the surviving legs,
    // ordered by (edge index, endpoint)
    let mut flags = Vec::new();
    for &i in split_edges {
        let e = &g.edges[i];
        for v in [e.v1, e.v2] {
            let c = comp[v];
            let leg = graphs[c].legs.len();
            graphs[c].legs.push(Leg { vertex: vmap[v] });
            sigma_l[c].push(t.base.sigma_e[i].clone());
            u_l[c].push(t.base.u_away(i, v));
            flags.push(SplitFlag { edge: i, vertex: v, component: c, leg });
        }
    }

    let mut out = Vec::new();
    for c in 0..n_comp {
        let tt = TropicalType {
            graph: graphs[c].clone(),
            sigma_v: sigma_v[c].clone(),
            sigma_e: sigma_e[c].clone(),
            sigma_l: sigma_l[c].clone(),
            u_e: u_e[c].clone(),
            u_l: u_l[c].clone(),
        };
        out.push(DecoratedType { base: tt, classes: classes[c].clone() });
    }
    (out, flags)
}

/// Identify the flag legs pairwise again; inverse of `split` up to
/// canonical isomorphism. Vertices are renumbered by (component, local).
pub fn reglue(parts: &[DecoratedType], flags: &[SplitFlag]) -> DecoratedType {
    let mut offset = vec![0usize; parts.len()];
    let mut nv = 0usize;
    for (c, part) in parts.iter().enumerate() {
        offset[c] = nv;
        nv += part.base.graph.n_vertices();
    }
    let mut genus = vec![0u32; nv];
    let mut sigma_v = vec![String::new(); nv];
    let mut classes = vec![CurveClass::default(); nv];
    for (c, part) in parts.iter().enumerate() {
        for l in 0..part.base.graph.n_vertices() {
            let v = offset[c] + l;
            genus[v] = part.base.graph.genus[l];
            sigma_v[v] = part.base.sigma_v[l].clone();
            classes[v] = part.classes[l].clone();
        }
    }
    let mut edges = Vec::new();
    let mut sigma_e = Vec::new();
    let mut u_e = Vec::new();
    // internal edges of the components survive unchanged
    for (c, part) in parts.iter().enumerate() {
        for (i, e) in part.base.graph.edges.iter().enumerate() {
            edges.push(Edge { v1: offset[c] + e.v1, v2: offset[c] + e.v2 });
            sigma_e.push(part.base.sigma_e[i].clone());
            u_e.push(part.base.u_e[i].clone());
        }
    }
    let mut consumed: Vec<Vec<bool>> = parts
        .iter()
        .map(|p| vec![false; p.base.graph.legs.len()])
        .collect();
    let mut by_edge: BTreeMap<usize, Vec<&SplitFlag>> = BTreeMap::new();
    for f in flags {
        by_edge.entry(f.edge).or_default().push(f);
    }
    for (_, pair) in by_edge {
        assert_eq!(pair.len(), 2, "each split edge has two flags");
        let (f1, f2) = (pair[0], pair[1]);
        let p1 = &parts[f1.component];
        let p2 = &parts[f2.component];
        let a = offset[f1.component] + p1.base.graph.legs[f1.leg].vertex;
        let b = offset[f2.component] + p2.base.graph.legs[f2.leg].vertex;
        consumed[f1.component][f1.leg] = true;
        consumed[f2.component][f2.leg] = true;
        // u is stored away from the flag vertex; canonical means away from
        // the smaller glued id
        let (v1, v2, u) = if a <= b {
            (a, b, p1.base.u_l[f1.leg].clone())
        } else {
            (b, a, p2.base.u_l[f2.leg].clone())
        };
        edges.push(Edge { v1, v2 });
        sigma_e.push(p1.base.sigma_l[f1.leg].clone());
        u_e.push(u);
    }
    let mut legs = Vec::new();
    let mut sigma_l = Vec::new();
    let mut u_l = Vec::new();
    for (c, part) in parts.iter().enumerate() {
        for (i, l) in part.base.graph.legs.iter().enumerate() {
            if consumed[c][i] {
                continue;
            }
            legs.push(Leg { vertex: offset[c] + l.vertex });
            sigma_l.push(part.base.sigma_l[i].clone());
            u_l.push(part.base.u_l[i].clone());
        }
    }
    DecoratedType {
        base: TropicalType {
            graph: TypeGraph { genus, edges, legs },
            sigma_v,
            sigma_e,
            sigma_l,
            u_e,
            u_l,
        },
        classes,
    }
}

/// Exact balancing test at a vertex: the contact orders of all adjacent
/// flags, oriented away from `v`, are mapped into a common ambient cone and
/// summed; optionally the sum is pushed through a quotient map first
/// (weak balancing).
pub fn check_balancing(
    t: &TropicalType,
    complex: &ConeComplex,
    v: usize,
    ambient: &str,
    quotient: Option<&IntMatrix>,
) -> Result<bool> {
    let target = complex
        .cone(ambient)
        .ok_or_else(|| Error::InvalidType(format!("unknown ambient cone `{ambient}`")))?;
    let mut total = vec![BigInt::zero(); target.ambient_rank()];
    let mut add = |sigma: &ConeId, u: &[BigInt]| -> Result<()> {
        let m = complex.face_map(sigma, ambient)?;
        for (i, x) in m.mul_vec(u).into_iter().enumerate() {
            total[i] += x;
        }
        Ok(())
    };
    for (i, e) in t.graph.edges.iter().enumerate() {
        if e.v1 == v {
            add(&t.sigma_e[i], &t.u_away(i, e.v1))?;
        }
        if e.v2 == v {
            add(&t.sigma_e[i], &t.u_away(i, e.v2))?;
        }
    }
    for (i, l) in t.graph.legs.iter().enumerate() {
        if l.vertex == v {
            add(&t.sigma_l[i], &t.u_l[i])?;
        }
    }
    let total = match quotient {
        Some(q) => {
            if q.cols() != total.len() {
                return Err(Error::Dimension("quotient map has wrong shape".into()));
            }
            q.mul_vec(&total)
        }
        None => total,
    };
    Ok(total.iter().all(|x| x.is_zero()))
}

/// Degree of the pullback of the divisor line bundle on the component of a
/// vertex: the sum of the given coordinate of the adjacent contact orders,
/// computed in a common ambient whose coordinates index the divisors.
pub fn degree_from_contacts(
    t: &TropicalType,
    complex: &ConeComplex,
    v: usize,
    divisor_coord: usize,
    ambient: &str,
) -> Result<BigInt> {
    let target = complex
        .cone(ambient)
        .ok_or_else(|| Error::InvalidType(format!("unknown ambient cone `{ambient}`")))?;
    if divisor_coord >= target.ambient_rank() {
        return Err(Error::OutOfRange("divisor coordinate out of range".into()));
    }
    let mut total = BigInt::zero();
    let mut add = |sigma: &ConeId, u: &[BigInt]| -> Result<()> {
        let m = complex.face_map(sigma, ambient)?;
        total += &m.mul_vec(u)[divisor_coord];
        Ok(())
    };
    for (i, e) in t.graph.edges.iter().enumerate() {
        if e.v1 == v {
            add(&t.sigma_e[i], &t.u_away(i, e.v1))?;
        }
        if e.v2 == v {
            add(&t.sigma_e[i], &t.u_away(i, e.v2))?;
        }
    }
    for (i, l) in t.graph.legs.iter().enumerate() {
        if l.vertex == v {
            add(&t.sigma_l[i], &t.u_l[i])?;
        }
    }
    Ok(total)
}

/// Where each edge of the source goes under a contraction.
#[derive(Clone, Debug)]
pub enum EdgeImage {
    Edge(usize),
    Vertex(usize),
}

/// A contraction morphism of graphs `src -> dst`.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<EdgeImage>,
    pub leg_map: Vec<usize>,
}

/// Verify that `phi` is a contraction morphism of types: a graph
/// contraction under which cones shrink (`sigma_dst(phi(x))` is a face of
/// `sigma_src(x)`) and contact orders are preserved on surviving edges and
/// legs.
pub fn contraction_check(
    src: &TropicalType,
    dst: &TropicalType,
    phi: &Contraction,
    complex: &ConeComplex,
) -> Result<bool> {
    let gs = &src.graph;
    let gd = &dst.graph;
    if phi.vertex_map.len() != gs.n_vertices()
        || phi.edge_map.len() != gs.edges.len()
        || phi.leg_map.len() != gs.legs.len()
    {
        return Err(Error::NotAContraction("map sizes do not match".into()));
    }
    for &w in &phi.vertex_map {
        if w >= gd.n_vertices() {
            return Err(Error::NotAContraction("vertex image out of range".into()));
        }
    }
    let mut edge_used = vec![false; gd.edges.len()];
    for (i, img) in phi.edge_map.iter().enumerate() {
        let e = &gs.edges[i];
        match img {
            EdgeImage::Edge(j) => {
                if *j >= gd.edges.len() {
                    return Err(Error::NotAContraction("edge image out of range".into()));
                }
                if edge_used[*j] {
                    return Err(Error::NotAContraction("two edges map to one edge".into()));
                }
                edge_used[*j] = true;
                let f = &gd.edges[*j];
                let (a, b) = (phi.vertex_map[e.v1], phi.vertex_map[e.v2]);
                if !((a, b) == (f.v1, f.v2) || (a, b) == (f.v2, f.v1)) {
                    return Err(Error::NotAContraction("edge endpoints not preserved".into()));
                }
            }
            EdgeImage::Vertex(w) => {
                if phi.vertex_map[e.v1] != *w || phi.vertex_map[e.v2] != *w {
                    return Err(Error::NotAContraction(
                        "contracted edge endpoints do not collapse".into(),
                    ));
                }
            }
        }
    }
    if !edge_used.iter().all(|&b| b) {
        return Err(Error::NotAContraction("edge map not surjective".into()));
    }
    let mut leg_used = vec![false; gd.legs.len()];
    for (i, &j) in phi.leg_map.iter().enumerate() {
        if j >= gd.legs.len() || leg_used[j] {
            return Err(Error::NotAContraction("leg map not a bijection".into()));
        }
        leg_used[j] = true;
        if phi.vertex_map[gs.legs[i].vertex] != gd.legs[j].vertex {
            return Err(Error::NotAContraction("leg vertex not preserved".into()));
        }
    }
    if !leg_used.iter().all(|&b| b) {
        return Err(Error::NotAContraction("leg map not surjective".into()));
    }

    // cone shrinking on all items
    for v in 0..gs.n_vertices() {
        if !complex.has_face_map(&dst.sigma_v[phi.vertex_map[v]], &src.sigma_v[v]) {
            return Ok(false);
        }
    }
    for (i, img) in phi.edge_map.iter().enumerate() {
        let target = match img {
            EdgeImage::Edge(j) => &dst.sigma_e[*j],
            EdgeImage::Vertex(w) => &dst.sigma_v[*w],
        };
        if !complex.has_face_map(target, &src.sigma_e[i]) {
            return Ok(false);
        }
    }
    for (i, &j) in phi.leg_map.iter().enumerate() {
        if !complex.has_face_map(&dst.sigma_l[j], &src.sigma_l[i]) {
            return Ok(false);
        }
    }
    // contact orders preserved on surviving edges and on legs
    for (i, img) in phi.edge_map.iter().enumerate() {
        if let EdgeImage::Edge(j) = img {
            let m = complex.face_map(&dst.sigma_e[*j], &src.sigma_e[i])?;
            let e = &gs.edges[i];
            let f = &gd.edges[*j];
            let flipped = (phi.vertex_map[e.v1], phi.vertex_map[e.v2]) == (f.v2, f.v1)
                && f.v1 != f.v2;
            let mut img_u = m.mul_vec(&dst.u_e[*j]);
            if flipped {
                img_u = img_u.iter().map(|x| -x).collect();
            }
            if img_u != src.u_e[i] {
                return Ok(false);
            }
        }
    }
    for (i, &j) in phi.leg_map.iter().enumerate() {
        let m = complex.face_map(&dst.sigma_l[j], &src.sigma_l[i])?;
        if m.mul_vec(&dst.u_l[j]) != src.u_l[i] {
            return Ok(false);
        }
    }
    Ok(true)
}

const AUT_VERTEX_LIMIT: usize = 12;

fn vertex_key(t: &DecoratedType, v: usize) -> (u32, &ConeId, &CurveClass) {
    (t.base.graph.genus[v], &t.base.sigma_v[v], &t.classes[v])
}

/// Multiset of (cone, u) data of edges between an unordered vertex pair,
/// with u oriented from the smaller id; self-loop u is normalized by sign.
fn edge_data(t: &DecoratedType, a: usize, b: usize) -> Vec<(ConeId, Vec<BigInt>)> {
    let mut out = Vec::new();
    for (i, e) in t.base.graph.edges.iter().enumerate() {
        if (e.v1, e.v2) == (a.min(b), a.max(b)) {
            let mut u = t.base.u_e[i].clone();
            if e.v1 == e.v2 {
                // self-loop orientation is not canonical; normalize by sign
                let neg: Vec<BigInt> = u.iter().map(|x| -x).collect();
                if neg < u {
                    u = neg;
                }
            }
            out.push((t.base.sigma_e[i].clone(), u));
        }
    }
    out.sort();
    out
}

fn leg_data(t: &DecoratedType, v: usize) -> Vec<(ConeId, Vec<BigInt>)> {
    let mut out = Vec::new();
    for (i, l) in t.base.graph.legs.iter().enumerate() {
        if l.vertex == v {
            out.push((t.base.sigma_l[i].clone(), t.base.u_l[i].clone()));
        }
    }
    out.sort();
    out
}

/// Does a given vertex bijection define an isomorphism of decorated types?
fn permutation_is_iso(t1: &DecoratedType, t2: &DecoratedType, perm: &[usize]) -> bool {
    let n = t1.base.graph.n_vertices();
    for v in 0..n {
        if vertex_key(t1, v) != vertex_key(t2, perm[v]) {
            return false;
        }
    }
    for a in 0..n {
        for b in a..n {
            let d1 = edge_data(t1, a, b);
            let mut d2 = edge_data(t2, perm[a], perm[b]);
            if perm[a] > perm[b] && a != b {
                // orientation against the canonical one flips u
                d2 = d2
                    .into_iter()
                    .map(|(s, u)| (s, u.iter().map(|x| -x).collect()))
                    .collect();
                d2.sort();
            }
            if d1 != d2 {
                return false;
            }
        }
    }
    for v in 0..n {
        if leg_data(t1, v) != leg_data(t2, perm[v]) {
            return false;
        }
    }
    true
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in out {
            for v in 0..n {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

fn multiset_multiplicity_factor(data: &[(ConeId, Vec<BigInt>)]) -> BigInt {
    let mut fact = BigInt::from(1);
    let mut i = 0;
    while i < data.len() {
        let mut j = i;
        while j < data.len() && data[j] == data[i] {
            j += 1;
        }
        let m = j - i;
        for k in 2..=m {
            fact *= BigInt::from(k as u64);
        }
        i = j;
    }
    fact
}

/// Order of the automorphism group of a decorated type: compatible triples
/// of vertex, edge and leg permutations. Brute force, desk scale.
pub fn automorphism_count(t: &DecoratedType) -> Result<BigInt> {
    let n = t.base.graph.n_vertices();
    if n > AUT_VERTEX_LIMIT {
        return Err(Error::SizeLimit(format!("{n} vertices exceeds the automorphism cap")));
    }
    // identical parallel edges and identical legs can be permuted on top of
    // any vertex permutation; this factor does not depend on the permutation
    let mut fact = BigInt::from(1);
    for a in 0..n {
        for b in a..n {
            fact *= multiset_multiplicity_factor(&edge_data(t, a, b));
        }
        fact *= multiset_multiplicity_factor(&leg_data(t, a));
    }
    let mut total = BigInt::zero();
    for perm in permutations(n) {
        if permutation_is_iso(t, t, &perm) {
            total += &fact;
        }
    }
    Ok(total)
}

pub fn are_isomorphic(t1: &DecoratedType, t2: &DecoratedType) -> Result<bool> {
    let n = t1.base.graph.n_vertices();
    if n != t2.base.graph.n_vertices()
        || t1.base.graph.edges.len() != t2.base.graph.edges.len()
        || t1.base.graph.legs.len() != t2.base.graph.legs.len()
    {
        return Ok(false);
    }
    if n > AUT_VERTEX_LIMIT {
        return Err(Error::SizeLimit(format!("{n} vertices exceeds the isomorphism cap")));
    }
    Ok(permutations(n).iter().any(|p| permutation_is_iso(t1, t2, p)))
}

/// Number of permutations of the tuple under which each member is
/// isomorphic to its image: the product of factorials of the isomorphism
/// class sizes.
pub fn tuple_automorphism_count(types: &[DecoratedType]) -> Result<BigInt> {
    let mut class_of: Vec<usize> = Vec::new();
    let mut reps: Vec<&DecoratedType> = Vec::new();
    for t in types {
        let mut found = None;
        for (ci, rep) in reps.iter().enumerate() {
            if are_isomorphic(t, rep)? {
                found = Some(ci);
                break;
            }
        }
        match found {
            Some(ci) => class_of.push(ci),
            None => {
                reps.push(t);
                class_of.push(reps.len() - 1);
            }
        }
    }
    let mut count = BigInt::from(1);
    for ci in 0..reps.len() {
        let m = class_of.iter().filter(|&&c| c == ci).count();
        for k in 2..=m {
            count *= BigInt::from(k as u64);
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::complex_from_fan;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// Divisor fan of a surface with three boundary divisors: coordinates
    /// of the big cones index the divisors.
    fn divisor_complex() -> ConeComplex {
        complex_from_fan(
            2,
            &[
                ("0", vec![]),
                ("d1", vec![v(&[1, 0])]),
                ("d2", vec![v(&[0, 1])]),
                ("d12", vec![v(&[1, 0]), v(&[0, 1])]),
            ],
            None,
        )
        .unwrap()
    }

    fn single_vertex_with_leg(complex: &ConeComplex, u: &[i64]) -> TropicalType {
        let graph = TypeGraph { genus: vec![0], edges: vec![], legs: vec![Leg { vertex: 0 }] };
        TropicalType::new(
            graph,
            vec!["0".into()],
            vec![],
            vec!["d12".into()],
            vec![],
            vec![v(u)],
            complex,
        )
        .unwrap()
    }

    #[test]
    fn degree_from_contacts_examples() {
        let complex = divisor_complex();
        // a single leg with u = 2 D_1^*: degree 2 against D_1, 0 against D_2
        let t = single_vertex_with_leg(&complex, &[2, 0]);
        assert_eq!(degree_from_contacts(&t, &complex, 0, 0, "d12").unwrap(), bi(2));
        assert_eq!(degree_from_contacts(&t, &complex, 0, 1, "d12").unwrap(), bi(0));
        // a balanced interior vertex has degree zero against every divisor
        let graph = TypeGraph {
            genus: vec![0],
            edges: vec![],
            legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }],
        };
        let t = TropicalType::new(
            graph,
            vec!["0".into()],
            vec![],
            vec!["d12".into(), "d12".into()],
            vec![],
            vec![v(&[1, 1]), v(&[-1, -1])],
            &complex,
        )
        .unwrap();
        for d in 0..2 {
            assert_eq!(degree_from_contacts(&t, &complex, 0, d, "d12").unwrap(), bi(0));
        }
    }

    #[test]
    fn balancing_examples() {
        let complex = divisor_complex();
        // bivalent vertex with u and -u balances
        let t = {
            let graph = TypeGraph {
                genus: vec![0],
                edges: vec![],
                legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }],
            };
            TropicalType::new(
                graph,
                vec!["0".into()],
                vec![],
                vec!["d12".into(), "d12".into()],
                vec![],
                vec![v(&[1, 2]), v(&[-1, -2])],
                &complex,
            )
            .unwrap()
        };
        assert!(check_balancing(&t, &complex, 0, "d12", None).unwrap());
        // trivalent (1,0), (0,1), (-1,-1) balances
        let t = {
            let graph = TypeGraph {
                genus: vec![0],
                edges: vec![],
                legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }, Leg { vertex: 0 }],
            };
            TropicalType::new(
                graph,
                vec!["0".into()],
                vec![],
                vec!["d12".into(); 3],
                vec![],
                vec![v(&[1, 0]), v(&[0, 1]), v(&[-1, -1])],
                &complex,
            )
            .unwrap()
        };
        assert!(check_balancing(&t, &complex, 0, "d12", None).unwrap());
        // weak balancing modulo a quotient direction
        let t = {
            let graph = TypeGraph {
                genus: vec![0],
                edges: vec![],
                legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }],
            };
            TropicalType::new(
                graph,
                vec!["0".into()],
                vec![],
                vec!["d12".into(); 2],
                vec![],
                vec![v(&[1, 1]), v(&[2, -1])],
                &complex,
            )
            .unwrap()
        };
        assert!(!check_balancing(&t, &complex, 0, "d12", None).unwrap());
        // the sum (3, 0) dies modulo the first axis
        let quotient = IntMatrix::from_rows_i64(&[vec![0, 1]]);
        assert!(check_balancing(&t, &complex, 0, "d12", Some(&quotient)).unwrap());
    }

    #[test]
    fn automorphism_counts() {
        let complex = divisor_complex();
        // asymmetric: two legs with different contact orders
        let asym = {
            let graph = TypeGraph {
                genus: vec![0],
                edges: vec![],
                legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }],
            };
            let t = TropicalType::new(
                graph,
                vec!["0".into()],
                vec![],
                vec!["d12".into(); 2],
                vec![],
                vec![v(&[1, 0]), v(&[0, 1])],
                &complex,
            )
            .unwrap();
            DecoratedType::new(t, vec![CurveClass::default()]).unwrap()
        };
        assert_eq!(automorphism_count(&asym).unwrap(), bi(1));
        // two identical legs can swap
        let sym = {
            let graph = TypeGraph {
                genus: vec![0],
                edges: vec![],
                legs: vec![Leg { vertex: 0 }, Leg { vertex: 0 }],
            };
            let t = TropicalType::new(
                graph,
                vec!["0".into()],
                vec![],
                vec!["d12".into(); 2],
                vec![],
                vec![v(&[1, 0]), v(&[1, 0])],
                &complex,
            )
            .unwrap();
            DecoratedType::new(t, vec![CurveClass::default()]).unwrap()
        };
        assert_eq!(automorphism_count(&sym).unwrap(), bi(2));
        // parallel identical edges between two vertices swap as well
        let dumbbell = {
            let graph = TypeGraph {
                genus: vec![0, 0],
                edges: vec![Edge { v1: 0, v2: 1 }, Edge { v1: 0, v2: 1 }],
                legs: vec![],
            };
            let t = TropicalType::new(
                graph,
                vec!["d1".into(), "d2".into()],
                vec!["d12".into(); 2],
                vec![],
                vec![v(&[-1, 1]), v(&[-1, 1])],
                vec![],
                &complex,
            )
            .unwrap();
            DecoratedType::new(t, vec![CurveClass::default(); 2]).unwrap()
        };
        assert_eq!(automorphism_count(&dumbbell).unwrap(), bi(2));
    }

    #[test]
    fn tuple_automorphisms() {
        let complex = divisor_complex();
        let make = |u: &[i64]| {
            let t = single_vertex_with_leg(&complex, u);
            DecoratedType::new(t, vec![CurveClass::default()]).unwrap()
        };
        let a = make(&[1, 0]);
        let b = make(&[0, 1]);
        assert_eq!(tuple_automorphism_count(&[a.clone()]).unwrap(), bi(1));
        assert_eq!(tuple_automorphism_count(&[a.clone(), a.clone()]).unwrap(), bi(2));
        assert_eq!(tuple_automorphism_count(&[a.clone(), b.clone()]).unwrap(), bi(1));
        // q identical children: q!
        assert_eq!(
            tuple_automorphism_count(&[a.clone(), a.clone(), a.clone(), a.clone()]).unwrap(),
            bi(24)
        );
        assert_eq!(tuple_automorphism_count(&[a.clone(), a, b]).unwrap(), bi(2));
    }

    #[test]
    fn contraction_examples() {
        let complex = divisor_complex();
        // identity contraction
        let t = single_vertex_with_leg(&complex, &[1, 1]);
        let phi = Contraction { vertex_map: vec![0], edge_map: vec![], leg_map: vec![0] };
        assert!(contraction_check(&t, &t, &phi, &complex).unwrap());
        // contracting an edge where the target vertex cone is not a face of
        // the edge cone fails the cone-shrinking condition
        let src = {
            let graph = TypeGraph {
                genus: vec![0, 0],
                edges: vec![Edge { v1: 0, v2: 1 }],
                legs: vec![],
            };
            TropicalType::new(
                graph,
                vec!["d1".into(), "d2".into()],
                vec!["d12".into()],
                vec![],
                vec![v(&[-1, 1])],
                vec![],
                &complex,
            )
            .unwrap()
        };
        let dst_bad = {
            let graph = TypeGraph { genus: vec![0], edges: vec![], legs: vec![] };
            TropicalType::new(graph, vec!["d12".into()], vec![], vec![], vec![], vec![], &complex)
                .unwrap()
        };
        let phi = Contraction {
            vertex_map: vec![0, 0],
            edge_map: vec![EdgeImage::Vertex(0)],
            leg_map: vec![],
        };
        // sigma_dst(v) = d12 is not a face of sigma_src(v_i) = rays
        assert!(!contraction_check(&src, &dst_bad, &phi, &complex).unwrap());
        // collapsing to the origin vertex shrinks every cone correctly
        let dst_good = {
            let graph = TypeGraph { genus: vec![0], edges: vec![], legs: vec![] };
            TropicalType::new(graph, vec!["0".into()], vec![], vec![], vec![], vec![], &complex)
                .unwrap()
        };
        assert!(contraction_check(&src, &dst_good, &phi, &complex).unwrap());
        // a non-contraction errors
        let bad_phi = Contraction { vertex_map: vec![0, 0], edge_map: vec![], leg_map: vec![] };
        assert!(contraction_check(&src, &dst_good, &bad_phi, &complex).is_err());
    }
}
