//! Causal structures: finite DAGs whose edges may dangle at either end.
//! Edges are systems (or segments of a system's worldline), vertices are
//! events acting on them. Spacelike surfaces are the cuts reachable from the
//! sourceless-edge cut by firing fully enabled vertices; each surface is
//! keyed by its downward-closed set of fired vertices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Opaque edge identifier. Ordering is lexicographic on the underlying
/// string, which also fixes the canonical tensor-factor order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(String);

/// Opaque vertex (event) identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(String);

macro_rules! id_impls {
    ($t:ident) => {
        impl $t {
            pub fn new(s: impl Into<String>) -> Self {
                $t(s.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }
        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.to_string())
            }
        }
    };
}
id_impls!(EdgeId);
id_impls!(VertexId);

/// An edge together with its (optional) endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDecl {
    pub id: EdgeId,
    pub source: Option<VertexId>,
    pub target: Option<VertexId>,
}

/// A vertex with its ordered input and output edge lists. The order fixes
/// the tensor-factor convention of the gate attached to the vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexDecl {
    pub id: VertexId,
    pub inputs: Vec<EdgeId>,
    pub outputs: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalStructure {
    edges: Vec<EdgeDecl>,
    vertices: Vec<VertexDecl>,
}

/// A violation found by [`CausalStructure::validate`]. Violations are data,
/// not errors: an invalid structure can still be inspected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateEdgeId(EdgeId),
    DuplicateVertexId(VertexId),
    DanglingReference { context: String, missing: String },
    EndpointMismatch { edge: EdgeId, detail: String },
    Cycle { involving: Vec<VertexId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateEdgeId(e) => write!(f, "duplicate edge id {e}"),
            Violation::DuplicateVertexId(v) => write!(f, "duplicate vertex id {v}"),
            Violation::DanglingReference { context, missing } => {
                write!(f, "dangling reference in {context}: {missing}")
            }
            Violation::EndpointMismatch { edge, detail } => {
                write!(f, "endpoint mismatch for edge {edge}: {detail}")
            }
            Violation::Cycle { involving } => {
                let names: Vec<&str> = involving.iter().map(|v| v.as_str()).collect();
                write!(f, "cycle involving vertices [{}]", names.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausalError {
    #[error("vertex {vertex} is not enabled on this surface: {reason}")]
    NotEnabled { vertex: VertexId, reason: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("vertex set is not downward closed: {0} requires {1}")]
    NotDownwardClosed(VertexId, VertexId),
}

/// A spacelike surface: the frontier edge set of a downward-closed set of
/// fired vertices. Ordering compares fired sets, so the minimum over a set
/// of surfaces is the lexicographically least downset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Surface {
    fired: BTreeSet<VertexId>,
    edges: BTreeSet<EdgeId>,
}

impl Surface {
    pub fn fired(&self) -> &BTreeSet<VertexId> {
        &self.fired
    }

    pub fn edges(&self) -> &BTreeSet<EdgeId> {
        &self.edges
    }

    pub fn contains_edge(&self, e: &EdgeId) -> bool {
        self.edges.contains(e)
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fired: Vec<&str> = self.fired.iter().map(|v| v.as_str()).collect();
        let edges: Vec<&str> = self.edges.iter().map(|e| e.as_str()).collect();
        write!(f, "{{{}}} -> ({})", fired.join(","), edges.join(","))
    }
}

impl CausalStructure {
    /// Builds a structure from explicit edge endpoint declarations plus
    /// vertex port lists. Run [`validate`](Self::validate) before trusting it.
    pub fn new(edges: Vec<EdgeDecl>, vertices: Vec<VertexDecl>) -> Self {
        CausalStructure { edges, vertices }
    }

    /// Builds a structure from vertex port lists alone, deriving each edge's
    /// endpoints. `edge_ids` must list every edge, including ones touching no
    /// vertex.
    pub fn from_vertex_lists(edge_ids: Vec<EdgeId>, vertices: Vec<VertexDecl>) -> Self {
        let mut sources: BTreeMap<EdgeId, VertexId> = BTreeMap::new();
        let mut targets: BTreeMap<EdgeId, VertexId> = BTreeMap::new();
        for v in &vertices {
            for e in &v.outputs {
                sources.entry(e.clone()).or_insert_with(|| v.id.clone());
            }
            for e in &v.inputs {
                targets.entry(e.clone()).or_insert_with(|| v.id.clone());
            }
        }
        let edges = edge_ids
            .into_iter()
            .map(|id| EdgeDecl {
                source: sources.get(&id).cloned(),
                target: targets.get(&id).cloned(),
                id,
            })
            .collect();
        CausalStructure { edges, vertices }
    }

    pub fn edges(&self) -> &[EdgeDecl] {
        &self.edges
    }

    pub fn vertices(&self) -> &[VertexDecl] {
        &self.vertices
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&EdgeDecl> {
        self.edges.iter().find(|e| &e.id == id)
    }

    pub fn vertex(&self, id: &VertexId) -> Option<&VertexDecl> {
        self.vertices.iter().find(|v| &v.id == id)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut seen_edges = BTreeSet::new();
        for e in &self.edges {
            if !seen_edges.insert(e.id.clone()) {
                violations.push(Violation::DuplicateEdgeId(e.id.clone()));
            }
        }
        let mut seen_vertices = BTreeSet::new();
        for v in &self.vertices {
            if !seen_vertices.insert(v.id.clone()) {
                violations.push(Violation::DuplicateVertexId(v.id.clone()));
            }
        }

        // Port lists and endpoints must reference declared ids and agree.
        for v in &self.vertices {
            for e in v.inputs.iter().chain(&v.outputs) {
                if !seen_edges.contains(e) {
                    violations.push(Violation::DanglingReference {
                        context: format!("vertex {}", v.id),
                        missing: format!("edge {e}"),
                    });
                }
            }
        }
        for e in &self.edges {
            for (end, vid) in [("source", &e.source), ("target", &e.target)] {
                if let Some(vid) = vid {
                    if !seen_vertices.contains(vid) {
                        violations.push(Violation::DanglingReference {
                            context: format!("edge {} {end}", e.id),
                            missing: format!("vertex {vid}"),
                        });
                    }
                }
            }
            let out_count = self
                .vertices
                .iter()
                .map(|v| v.outputs.iter().filter(|x| **x == e.id).count())
                .sum::<usize>();
            let in_count = self
                .vertices
                .iter()
                .map(|v| v.inputs.iter().filter(|x| **x == e.id).count())
                .sum::<usize>();
            let src_expect = usize::from(e.source.is_some());
            let tgt_expect = usize::from(e.target.is_some());
            if out_count != src_expect {
                violations.push(Violation::EndpointMismatch {
                    edge: e.id.clone(),
                    detail: format!(
                        "declared source {:?} but appears {out_count} times in output lists",
                        e.source.as_ref().map(|v| v.as_str())
                    ),
                });
            }
            if in_count != tgt_expect {
                violations.push(Violation::EndpointMismatch {
                    edge: e.id.clone(),
                    detail: format!(
                        "declared target {:?} but appears {in_count} times in input lists",
                        e.target.as_ref().map(|v| v.as_str())
                    ),
                });
            }
            if let Some(src) = &e.source {
                if let Some(v) = self.vertex(src) {
                    if !v.outputs.contains(&e.id) {
                        violations.push(Violation::EndpointMismatch {
                            edge: e.id.clone(),
                            detail: format!("source {src} does not list it as an output"),
                        });
                    }
                }
            }
            if let Some(tgt) = &e.target {
                if let Some(v) = self.vertex(tgt) {
                    if !v.inputs.contains(&e.id) {
                        violations.push(Violation::EndpointMismatch {
                            edge: e.id.clone(),
                            detail: format!("target {tgt} does not list it as an input"),
                        });
                    }
                }
            }
        }

        // Acyclicity via Kahn's algorithm on the vertex graph.
        let mut indeg: BTreeMap<&VertexId, usize> = self.vertices.iter().map(|v| (&v.id, 0)).collect();
        for e in &self.edges {
            if let (Some(_), Some(tgt)) = (&e.source, &e.target) {
                if let Some(d) = indeg.get_mut(tgt) {
                    *d += 1;
                }
            }
        }
        let mut queue: VecDeque<&VertexId> =
            indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
        let mut removed = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            removed.insert(v.clone());
            for e in &self.edges {
                if e.source.as_ref() == Some(v) {
                    if let Some(tgt) = &e.target {
                        if let Some(d) = indeg.get_mut(tgt) {
                            *d -= 1;
                            if *d == 0 {
                                queue.push_back(tgt);
                            }
                        }
                    }
                }
            }
        }
        if removed.len() != self.vertices.len() {
            let involving: Vec<VertexId> = self
                .vertices
                .iter()
                .map(|v| v.id.clone())
                .filter(|v| !removed.contains(v))
                .collect();
            violations.push(Violation::Cycle { involving });
        }

        ValidationReport { violations }
    }

    /// The surface of sourceless edges (no vertex fired).
    pub fn initial_surface(&self) -> Surface {
        let edges = self.edges.iter().filter(|e| e.source.is_none()).map(|e| e.id.clone()).collect();
        Surface { fired: BTreeSet::new(), edges }
    }

    /// Advances a surface across vertex `v`: removes v's input edges and adds
    /// its output edges. Fails if any input edge is absent (in particular if
    /// `v` already fired).
    pub fn fire(&self, s: &Surface, v: &VertexId) -> Result<Surface, CausalError> {
        let decl = self.vertex(v).ok_or_else(|| CausalError::UnknownVertex(v.clone()))?;
        if s.fired.contains(v) {
            return Err(CausalError::NotEnabled {
                vertex: v.clone(),
                reason: "already fired".to_string(),
            });
        }
        for e in &decl.inputs {
            if !s.edges.contains(e) {
                return Err(CausalError::NotEnabled {
                    vertex: v.clone(),
                    reason: format!("input edge {e} not on surface"),
                });
            }
        }
        let mut fired = s.fired.clone();
        fired.insert(v.clone());
        let mut edges = s.edges.clone();
        for e in &decl.inputs {
            edges.remove(e);
        }
        for e in &decl.outputs {
            edges.insert(e.clone());
        }
        Ok(Surface { fired, edges })
    }

    /// The frontier edge set of a downward-closed vertex set: outputs of
    /// fired vertices plus sourceless edges, minus inputs of fired vertices.
    fn edges_for_downset(&self, fired: &BTreeSet<VertexId>) -> BTreeSet<EdgeId> {
        self.edges
            .iter()
            .filter(|e| match &e.source {
                Some(src) => fired.contains(src),
                None => true,
            })
            .filter(|e| match &e.target {
                Some(tgt) => !fired.contains(tgt),
                None => true,
            })
            .map(|e| e.id.clone())
            .collect()
    }

    /// Builds the surface for a fired set, checking downward closure.
    pub fn surface_for_downset(&self, fired: &BTreeSet<VertexId>) -> Result<Surface, CausalError> {
        for v in fired {
            let decl = self.vertex(v).ok_or_else(|| CausalError::UnknownVertex(v.clone()))?;
            for e in &decl.inputs {
                let edge = self.edge(e).ok_or_else(|| CausalError::UnknownEdge(e.clone()))?;
                if let Some(src) = &edge.source {
                    if !fired.contains(src) {
                        return Err(CausalError::NotDownwardClosed(v.clone(), src.clone()));
                    }
                }
            }
        }
        Ok(Surface { fired: fired.clone(), edges: self.edges_for_downset(fired) })
    }

    /// All spacelike surfaces: the closure of the initial surface under
    /// firing, i.e. one surface per downward-closed vertex set.
    pub fn enumerate_surfaces(&self) -> Vec<Surface> {
        let mut seen: BTreeMap<BTreeSet<VertexId>, Surface> = BTreeMap::new();
        let s0 = self.initial_surface();
        let mut queue = VecDeque::new();
        queue.push_back(s0.clone());
        seen.insert(s0.fired.clone(), s0);
        while let Some(s) = queue.pop_front() {
            for v in &self.vertices {
                if s.fired.contains(&v.id) {
                    continue;
                }
                if let Ok(next) = self.fire(&s, &v.id) {
                    if !seen.contains_key(&next.fired) {
                        seen.insert(next.fired.clone(), next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
        seen.into_values().collect()
    }

    /// Finds a surface whose edge set contains all of `required`, if one
    /// exists. Feasibility: let Req be the down-closure of the sources of the
    /// required edges and Forb the up-closure of their targets; a surface
    /// exists iff Req and Forb are disjoint, in which case firing exactly Req
    /// works.
    pub fn surface_containing(&self, required: &BTreeSet<EdgeId>) -> Result<Option<Surface>, CausalError> {
        let mut req_seeds = Vec::new();
        let mut forb_seeds = Vec::new();
        for e in required {
            let decl = self.edge(e).ok_or_else(|| CausalError::UnknownEdge(e.clone()))?;
            if let Some(src) = &decl.source {
                req_seeds.push(src.clone());
            }
            if let Some(tgt) = &decl.target {
                forb_seeds.push(tgt.clone());
            }
        }
        let req = self.down_closure(&req_seeds);
        let forb = self.up_closure(&forb_seeds);
        if req.intersection(&forb).next().is_some() {
            return Ok(None);
        }
        let surface = self.surface_for_downset(&req)?;
        debug_assert!(required.is_subset(surface.edges()));
        Ok(Some(surface))
    }

    fn predecessors(&self, v: &VertexId) -> Vec<VertexId> {
        self.vertex(v)
            .map(|decl| {
                decl.inputs
                    .iter()
                    .filter_map(|e| self.edge(e).and_then(|d| d.source.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn successors(&self, v: &VertexId) -> Vec<VertexId> {
        self.vertex(v)
            .map(|decl| {
                decl.outputs
                    .iter()
                    .filter_map(|e| self.edge(e).and_then(|d| d.target.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn closure(&self, seeds: &[VertexId], step: impl Fn(&Self, &VertexId) -> Vec<VertexId>) -> BTreeSet<VertexId> {
        let mut out: BTreeSet<VertexId> = seeds.iter().cloned().collect();
        let mut queue: VecDeque<VertexId> = seeds.to_vec().into();
        while let Some(v) = queue.pop_front() {
            for next in step(self, &v) {
                if out.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        out
    }

    pub fn down_closure(&self, seeds: &[VertexId]) -> BTreeSet<VertexId> {
        self.closure(seeds, Self::predecessors)
    }

    pub fn up_closure(&self, seeds: &[VertexId]) -> BTreeSet<VertexId> {
        self.closure(seeds, Self::successors)
    }

    /// Causal order on vertices: u ≤ v iff there is a directed path u → v.
    pub fn vertex_le(&self, u: &VertexId, v: &VertexId) -> bool {
        self.up_closure(std::slice::from_ref(u)).contains(v)
    }

    /// Every firing order of a downset. Exponential; intended for tests on
    /// small structures.
    pub fn linear_extensions(&self, fired: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
        fn go(
            g: &CausalStructure,
            surface: &Surface,
            remaining: &BTreeSet<VertexId>,
            prefix: &mut Vec<VertexId>,
            out: &mut Vec<Vec<VertexId>>,
        ) {
            if remaining.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for v in remaining {
                if let Ok(next) = g.fire(surface, v) {
                    let mut rest = remaining.clone();
                    rest.remove(v);
                    prefix.push(v.clone());
                    go(g, &next, &rest, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &self.initial_surface(), fired, &mut Vec::new(), &mut out);
        out
    }

    /// Canonical linearization of a downset: repeatedly fire the least
    /// enabled vertex. Deterministic, so evolved states are reproducible.
    pub fn canonical_linearization(&self, fired: &BTreeSet<VertexId>) -> Result<Vec<VertexId>, CausalError> {
        let mut order = Vec::with_capacity(fired.len());
        let mut surface = self.initial_surface();
        let mut remaining: BTreeSet<VertexId> = fired.clone();
        while !remaining.is_empty() {
            let next = remaining
                .iter()
                .find(|v| self.fire(&surface, v).is_ok())
                .cloned()
                .ok_or_else(|| {
                    let v = remaining.iter().next().unwrap().clone();
                    CausalError::NotEnabled { vertex: v, reason: "set is not a downset".into() }
                })?;
            surface = self.fire(&surface, &next)?;
            remaining.remove(&next);
            order.push(next);
        }
        Ok(order)
    }
}
