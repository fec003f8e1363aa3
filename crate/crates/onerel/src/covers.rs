//! Cyclic covers of a one-relator complex and the splittings they induce.
//!
//! A surjection from the fundamental group onto `Z` is described by integer
//! weights on the edges outside a spanning tree. The infinite cyclic cover
//! then has one copy of every base cell per level, and finite windows of it
//! are ordinary graphs. The central construction here is a minimal connected
//! window `D` whose translates tile the cover and whose overlap with its own
//! shift stays connected: such a `D` carries exactly one lift of the relator
//! and presents the group as an HNN extension of a one-relator group of
//! strictly smaller complexity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::complex::{CombGraph, OneRelatorComplex, Pi1Basis, SubComplex};
use crate::stallings::CoreGraph;
use crate::word::{gcd, gen_index, letter, Alphabet, CyclicWord, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverError {
    /// The edge weights generate a proper subgroup of `Z`.
    NotSurjective { gcd: i64 },
    /// The relator has nonzero image, so it does not lift to a loop.
    RelatorNotInKernel { value: i64 },
    /// A weight was placed on a spanning-tree edge.
    WeightOnTreeEdge { edge: usize },
    /// No window below the size cap satisfied the domain conditions.
    WindowExhausted { cap: usize },
    /// The cell set handed to a splitting is not a valid domain.
    AxiomViolation(String),
    /// The graph has no free abelian cover to lift into.
    NoAbelianCover(&'static str),
    BadAssignment(String),
    Unsupported(String),
}

impl std::fmt::Display for CoverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoverError::NotSurjective { gcd } => {
                write!(f, "edge weights generate {gcd}Z, not all of Z")
            }
            CoverError::RelatorNotInKernel { value } => {
                write!(f, "relator maps to {value}, so it has no closed lift")
            }
            CoverError::WeightOnTreeEdge { edge } => {
                write!(f, "edge {edge} lies on the spanning tree and must keep weight 0")
            }
            CoverError::WindowExhausted { cap } => {
                write!(f, "no valid domain found in windows of up to {cap} levels")
            }
            CoverError::AxiomViolation(s) => write!(f, "domain condition failed: {s}"),
            CoverError::NoAbelianCover(s) => write!(f, "no abelian cover: {s}"),
            CoverError::BadAssignment(s) => write!(f, "bad assignment: {s}"),
            CoverError::Unsupported(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for CoverError {}

/// A one-relator complex together with a surjection of its fundamental group
/// onto `Z`, recorded as one integer per edge. Spanning-tree edges always
/// carry 0, so the weights are exactly the images of the free basis given by
/// the complementary edges.
#[derive(Debug, Clone)]
pub struct CyclicCoverSpec {
    base: OneRelatorComplex,
    iota: Vec<i64>,
    tree: Vec<bool>,
}

impl CyclicCoverSpec {
    /// Build a cover description from weights on non-tree edges. Edges not
    /// mentioned get weight 0. The tree is grown breadth-first from vertex 0
    /// in edge order, matching `CombGraph::pi1_basis`.
    pub fn from_edge_values(
        base: OneRelatorComplex,
        values: &BTreeMap<usize, i64>,
    ) -> Result<CyclicCoverSpec, CoverError> {
        if !base.graph().is_connected() {
            return Err(CoverError::Unsupported(
                "cyclic covers need a connected base graph".into(),
            ));
        }
        let basis = base.graph().pi1_basis(0);
        let nontree: BTreeSet<usize> = basis.nontree_edges().iter().copied().collect();
        let mut iota = vec![0i64; base.graph().edge_count()];
        for (&e, &v) in values {
            if e >= iota.len() {
                return Err(CoverError::BadAssignment(format!("no edge {e}")));
            }
            if v != 0 && !nontree.contains(&e) {
                return Err(CoverError::WeightOnTreeEdge { edge: e });
            }
            iota[e] = v;
        }
        let nonzero: Vec<i64> = iota.iter().copied().filter(|&v| v != 0).collect();
        let g = nonzero.iter().fold(0i64, |a, &b| gcd(a, b));
        if g != 1 {
            return Err(CoverError::NotSurjective { gcd: g });
        }
        let tree: Vec<bool> = (0..iota.len()).map(|e| !nontree.contains(&e)).collect();
        let spec = CyclicCoverSpec { base, iota, tree };
        let v = spec.phi_steps(spec.base.relator().letters());
        if v != 0 {
            return Err(CoverError::RelatorNotInKernel { value: v });
        }
        Ok(spec)
    }

    /// The map sending a loop to its signed crossing count of one chosen
    /// edge. This is the canonical surjection used by the hierarchy: it is
    /// defined for any edge, including tree edges.
    pub fn exp_sum(base: OneRelatorComplex, counted: usize) -> Result<CyclicCoverSpec, CoverError> {
        if counted >= base.graph().edge_count() {
            return Err(CoverError::BadAssignment(format!("no edge {counted}")));
        }
        if !base.graph().is_connected() {
            return Err(CoverError::Unsupported(
                "cyclic covers need a connected base graph".into(),
            ));
        }
        let basis = base.graph().pi1_basis(0);
        let mut values = BTreeMap::new();
        for &e in basis.nontree_edges() {
            let (o, t) = base.graph().edge(e);
            let mut steps = basis.vertex_path(o);
            steps.push(letter(e, true));
            let back = basis.vertex_path(t);
            steps.extend(back.iter().rev().map(|&s| -s));
            let count: i64 = steps
                .iter()
                .filter(|&&s| gen_index(s) == counted)
                .map(|&s| if s > 0 { 1 } else { -1 })
                .sum();
            if count != 0 {
                values.insert(e, count);
            }
        }
        CyclicCoverSpec::from_edge_values(base, &values)
    }

    pub fn base(&self) -> &OneRelatorComplex {
        &self.base
    }

    pub fn iota(&self, edge: usize) -> i64 {
        self.iota[edge]
    }

    pub fn is_tree_edge(&self, edge: usize) -> bool {
        self.tree[edge]
    }

    pub fn nontree_edges(&self) -> BTreeSet<usize> {
        (0..self.iota.len()).filter(|&e| !self.tree[e]).collect()
    }

    /// Image in `Z` of an edge path.
    pub fn phi_steps(&self, steps: &[Letter]) -> i64 {
        steps
            .iter()
            .map(|&s| {
                let v = self.iota[gen_index(s)];
                if s > 0 {
                    v
                } else {
                    -v
                }
            })
            .sum()
    }

    /// The lift traversed by one step starting at `level`, and the level
    /// reached. Edge lifts are named by the level of their origin end.
    pub fn step_lift(&self, s: Letter, level: i64) -> ((usize, i64), i64) {
        let e = gen_index(s);
        if s > 0 {
            ((e, level), level + self.iota[e])
        } else {
            ((e, level - self.iota[e]), level - self.iota[e])
        }
    }
}

/// A finite set of cells in the cyclic cover: vertex copies `(v, level)` and
/// edge copies `(e, level of origin)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    pub vertices: BTreeSet<(usize, i64)>,
    pub edges: BTreeSet<(usize, i64)>,
}

impl CellSet {
    pub fn empty() -> CellSet {
        CellSet {
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
        }
    }

    fn shifted(&self, by: i64) -> CellSet {
        CellSet {
            vertices: self.vertices.iter().map(|&(v, i)| (v, i + by)).collect(),
            edges: self.edges.iter().map(|&(e, i)| (e, i + by)).collect(),
        }
    }

    /// Cells present both here and in the copy shifted up by one level.
    fn overlap_up(&self) -> CellSet {
        CellSet {
            vertices: self
                .vertices
                .iter()
                .filter(|&&(v, i)| self.vertices.contains(&(v, i - 1)))
                .copied()
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|&&(e, i)| self.edges.contains(&(e, i - 1)))
                .copied()
                .collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    fn connected(&self, spec: &CyclicCoverSpec) -> bool {
        let Some(&start) = self.vertices.iter().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((v, i)) = queue.pop_front() {
            for &(e, j) in &self.edges {
                let (o, t) = spec.base.graph().edge(e);
                let ends = [(o, j), (t, j + spec.iota[e])];
                for k in 0..2 {
                    if ends[k] == (v, i) && seen.insert(ends[1 - k]) {
                        queue.push_back(ends[1 - k]);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }
}

/// The full window over a level set: every vertex copy on the listed levels,
/// every tree-edge copy, and copies of the chosen non-tree edges wherever
/// both endpoints land inside.
pub fn window(spec: &CyclicCoverSpec, levels: &BTreeSet<i64>, a_edges: &BTreeSet<usize>) -> CellSet {
    let graph = spec.base.graph();
    let mut cells = CellSet::empty();
    for v in 0..graph.vertex_count() {
        for &i in levels {
            cells.vertices.insert((v, i));
        }
    }
    for e in 0..graph.edge_count() {
        if !spec.tree[e] && !a_edges.contains(&e) {
            continue;
        }
        for &i in levels {
            if levels.contains(&(i + spec.iota[e])) {
                cells.edges.insert((e, i));
            }
        }
    }
    cells
}

/// Connectivity data for a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    /// Exact number of connected components of the window.
    pub components: usize,
    /// Index in `Z` of the subgroup the selected edge weights generate, or
    /// `None` when every selected weight is zero.
    pub index: Option<u64>,
    /// Window length from which on every interval of levels has exactly
    /// `index` components. Meaningful only when `index` is finite.
    pub threshold: u64,
}

struct Uf(Vec<usize>);

impl Uf {
    fn new(n: usize) -> Uf {
        Uf((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }
}

/// Component count of the window over `levels` using the selected non-tree
/// edges, together with the limiting count and the interval length where the
/// count settles.
pub fn component_count(
    spec: &CyclicCoverSpec,
    levels: &BTreeSet<i64>,
    a_edges: &BTreeSet<usize>,
) -> Connectivity {
    let idx: BTreeMap<i64, usize> = levels.iter().enumerate().map(|(n, &l)| (l, n)).collect();
    let mut uf = Uf::new(levels.len());
    let mut values = Vec::new();
    for &e in a_edges {
        let v = spec.iota[e];
        if v == 0 {
            continue;
        }
        values.push(v.unsigned_abs());
        for &i in levels {
            if let Some(&j) = idx.get(&(i + v)) {
                uf.union(idx[&i], j);
            }
        }
    }
    let mut roots = BTreeSet::new();
    for n in 0..levels.len() {
        let r = uf.find(n);
        roots.insert(r);
    }
    values.sort_unstable();
    values.dedup();
    let index = if values.is_empty() {
        None
    } else {
        Some(values.iter().fold(0u64, |a, &b| gcd(a as i64, b as i64) as u64))
    };
    let threshold = if values.is_empty() {
        1
    } else {
        let mut g = values[0];
        let mut k = values[0];
        for &v in &values[1..] {
            let g2 = gcd(g as i64, v as i64) as u64;
            k = k.max(g - g2 + v);
            g = g2;
        }
        k
    };
    Connectivity {
        components: roots.len(),
        index,
        threshold,
    }
}

/// The lift of the relator starting on a given level: the step sequence is
/// the base relator, and `levels[i]` is the level before step `i` (so the
/// list is one longer than the relator and closes up back at the start).
#[derive(Debug, Clone)]
pub struct RelatorTrace {
    pub steps: Vec<Letter>,
    pub levels: Vec<i64>,
}

impl RelatorTrace {
    pub fn start_level(&self) -> i64 {
        self.levels[0]
    }

    pub fn cells(&self, spec: &CyclicCoverSpec) -> CellSet {
        let graph = spec.base.graph();
        let mut out = CellSet::empty();
        if self.steps.is_empty() {
            out.vertices.insert((spec.base.base(), self.levels[0]));
            return out;
        }
        for (n, &s) in self.steps.iter().enumerate() {
            let (lift, _) = spec.step_lift(s, self.levels[n]);
            out.edges.insert(lift);
            out.vertices.insert((graph.step_origin(s), self.levels[n]));
            out.vertices.insert((graph.step_target(s), self.levels[n + 1]));
        }
        out
    }
}

pub fn trace_relator(spec: &CyclicCoverSpec, start: i64) -> RelatorTrace {
    let steps: Vec<Letter> = spec.base.relator().letters().to_vec();
    let mut levels = Vec::with_capacity(steps.len() + 1);
    let mut cur = start;
    levels.push(cur);
    for &s in &steps {
        let (_, next) = spec.step_lift(s, cur);
        cur = next;
        levels.push(cur);
    }
    debug_assert_eq!(cur, start, "relator image must vanish");
    RelatorTrace { steps, levels }
}

/// Which of the domain conditions a cell set satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    /// Every base vertex and edge has at least one copy, so the translates
    /// of the set cover the whole cyclic cover.
    pub covers_base: bool,
    /// The levels at which each base cell appears form an interval.
    pub level_intervals: bool,
    pub overlap_nonempty: bool,
    /// The intersection with the copy shifted one level up is connected.
    pub overlap_connected: bool,
    pub connected: bool,
    /// All cells of the relator lift are present.
    pub relator_supported: bool,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.covers_base
            && self.level_intervals
            && self.overlap_nonempty
            && self.overlap_connected
            && self.connected
            && self.relator_supported
    }

    fn first_failure(&self) -> Option<&'static str> {
        if !self.covers_base {
            Some("translates do not cover")
        } else if !self.level_intervals {
            Some("levels of some cell are not an interval")
        } else if !self.overlap_nonempty {
            Some("overlap with the shifted copy is empty")
        } else if !self.overlap_connected {
            Some("overlap with the shifted copy is disconnected")
        } else if !self.connected {
            Some("not connected")
        } else if !self.relator_supported {
            Some("relator lift not contained")
        } else {
            None
        }
    }
}

pub fn check_domain(
    spec: &CyclicCoverSpec,
    cells: &CellSet,
    trace: Option<&RelatorTrace>,
) -> AxiomReport {
    let graph = spec.base.graph();
    let mut vertex_levels: Vec<Vec<i64>> = vec![Vec::new(); graph.vertex_count()];
    for &(v, i) in &cells.vertices {
        vertex_levels[v].push(i);
    }
    let mut edge_levels: Vec<Vec<i64>> = vec![Vec::new(); graph.edge_count()];
    for &(e, i) in &cells.edges {
        edge_levels[e].push(i);
    }
    let covers_base =
        vertex_levels.iter().all(|l| !l.is_empty()) && edge_levels.iter().all(|l| !l.is_empty());
    let interval = |l: &Vec<i64>| {
        l.is_empty() || (l[l.len() - 1] - l[0] + 1) as usize == l.len()
    };
    let level_intervals =
        vertex_levels.iter().all(interval) && edge_levels.iter().all(interval);
    let overlap = cells.overlap_up();
    let relator_supported = trace.is_none_or(|t| {
        let tc = t.cells(spec);
        tc.vertices.is_subset(&cells.vertices) && tc.edges.is_subset(&cells.edges)
    });
    AxiomReport {
        covers_base,
        level_intervals,
        overlap_nonempty: !overlap.is_empty(),
        overlap_connected: overlap.connected(spec),
        connected: cells.connected(spec),
        relator_supported,
    }
}

/// A connected window of the cyclic cover carrying exactly one lift of the
/// relator, minimal under cell deletion among sets satisfying the domain
/// conditions. Levels are normalised so the lowest vertex sits at 0.
#[derive(Debug, Clone)]
pub struct TreeDomain {
    spec: CyclicCoverSpec,
    cells: CellSet,
    start_level: i64,
}

impl TreeDomain {
    pub fn spec(&self) -> &CyclicCoverSpec {
        &self.spec
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    /// Level on which the relator lift starts.
    pub fn start_level(&self) -> i64 {
        self.start_level
    }

    pub fn trace(&self) -> RelatorTrace {
        trace_relator(&self.spec, self.start_level)
    }

    pub fn axiom_report(&self) -> AxiomReport {
        check_domain(&self.spec, &self.cells, Some(&self.trace()))
    }

    /// The domain as a standalone one-relator complex, with id tables back
    /// into the cover. Vertices are numbered by (level, base vertex), edges
    /// by (base edge, level).
    pub fn complex(&self) -> DomainComplex {
        let spec = &self.spec;
        let mut vcells: Vec<(usize, i64)> = self.cells.vertices.iter().copied().collect();
        vcells.sort_by_key(|&(v, i)| (i, v));
        let vertex_id: BTreeMap<(usize, i64), usize> =
            vcells.iter().enumerate().map(|(n, &c)| (c, n)).collect();
        let ecells: Vec<(usize, i64)> = self.cells.edges.iter().copied().collect();
        let edge_id: BTreeMap<(usize, i64), usize> =
            ecells.iter().enumerate().map(|(n, &c)| (c, n)).collect();
        let edges: Vec<(usize, usize)> = ecells
            .iter()
            .map(|&(e, i)| {
                let (o, t) = spec.base.graph().edge(e);
                (vertex_id[&(o, i)], vertex_id[&(t, i + spec.iota[e])])
            })
            .collect();
        let graph = CombGraph::new(vcells.len(), edges).expect("domain cells form a graph");
        let trace = self.trace();
        let steps: Vec<Letter> = trace
            .steps
            .iter()
            .enumerate()
            .map(|(n, &s)| {
                let (lift, _) = spec.step_lift(s, trace.levels[n]);
                letter(edge_id[&lift], s > 0)
            })
            .collect();
        let base = vertex_id[&(spec.base.base(), self.start_level)];
        let complex =
            OneRelatorComplex::new(graph, &steps, base).expect("relator lift is a closed cycle");
        DomainComplex {
            complex,
            vertex_cells: vcells,
            edge_cells: ecells,
            vertex_id,
            edge_id,
        }
    }

    pub fn to_dot(&self) -> String {
        cells_dot(&self.spec, &self.cells, Some((self.spec.base.base(), self.start_level)))
    }
}

/// `TreeDomain::complex` output: the complex plus both directions of the
/// cell-id correspondence.
pub struct DomainComplex {
    pub complex: OneRelatorComplex,
    pub vertex_cells: Vec<(usize, i64)>,
    pub edge_cells: Vec<(usize, i64)>,
    pub vertex_id: BTreeMap<(usize, i64), usize>,
    pub edge_id: BTreeMap<(usize, i64), usize>,
}

/// Find a minimal domain window for the cover. The search seeds an interval
/// of levels around the relator lift, widens it until all domain conditions
/// hold, then deletes cells one at a time (edge copies in (edge, level)
/// order, then isolated vertex copies) as long as the conditions survive.
pub fn minimal_tree_domain(spec: &CyclicCoverSpec) -> Result<TreeDomain, CoverError> {
    let trace = trace_relator(spec, 0);
    let all: BTreeSet<usize> = spec.nontree_edges();
    let clean: BTreeSet<i64> = BTreeSet::from([0]);
    let threshold = component_count(spec, &clean, &all).threshold as i64;
    let tmin = *trace.levels.iter().min().unwrap();
    let tmax = *trace.levels.iter().max().unwrap();
    let mut lo = tmin;
    let mut hi = tmax.max(tmin + threshold - 1);
    let cap = ((hi - lo + 1) + 2 * (threshold + trace.steps.len() as i64) + 16) as usize;
    let mut widen_right = true;
    let mut cells = loop {
        let levels: BTreeSet<i64> = (lo..=hi).collect();
        let cells = window(spec, &levels, &all);
        if check_domain(spec, &cells, Some(&trace)).all_hold() {
            break cells;
        }
        if (hi - lo + 1) as usize >= cap {
            return Err(CoverError::WindowExhausted { cap });
        }
        if widen_right {
            hi += 1;
        } else {
            lo -= 1;
        }
        widen_right = !widen_right;
    };

    let trace_cells = trace.cells(spec);
    loop {
        let mut deleted = false;
        let candidates: Vec<(usize, i64)> = cells.edges.iter().copied().collect();
        for c in candidates {
            if trace_cells.edges.contains(&c) {
                continue;
            }
            cells.edges.remove(&c);
            if check_domain(spec, &cells, Some(&trace)).all_hold() {
                deleted = true;
                break;
            }
            cells.edges.insert(c);
        }
        if deleted {
            continue;
        }
        let mut used: BTreeSet<(usize, i64)> = BTreeSet::new();
        for &(e, i) in &cells.edges {
            let (o, t) = spec.base.graph().edge(e);
            used.insert((o, i));
            used.insert((t, i + spec.iota[e]));
        }
        let candidates: Vec<(usize, i64)> = cells
            .vertices
            .iter()
            .filter(|c| !used.contains(c) && !trace_cells.vertices.contains(c))
            .copied()
            .collect();
        for c in candidates {
            cells.vertices.remove(&c);
            if check_domain(spec, &cells, Some(&trace)).all_hold() {
                deleted = true;
                break;
            }
            cells.vertices.insert(c);
        }
        if !deleted {
            break;
        }
    }

    let shift = -cells.vertices.iter().map(|&(_, i)| i).min().unwrap();
    Ok(TreeDomain {
        spec: spec.clone(),
        cells: cells.shifted(shift),
        start_level: shift,
    })
}

const VERTEX_NAMES: &str = "xyzuvwabcdefghijklmnopqrst";

fn vertex_alphabet(rank: usize) -> Result<Alphabet, CoverError> {
    if rank > VERTEX_NAMES.len() {
        return Err(CoverError::Unsupported(format!(
            "vertex group rank {rank} exceeds the {} available generator names",
            VERTEX_NAMES.len()
        )));
    }
    Ok(Alphabet::new(VERTEX_NAMES.chars().take(rank).collect()).expect("names are distinct"))
}

/// HNN data read off a tree domain. The domain becomes the vertex one-relator
/// complex; its subcomplexes overlapping the neighbouring translates give the
/// two associated subgroups, and shifting by one level maps the basis of one
/// onto the basis of the other.
pub struct HnnSplitting {
    pub vertex: OneRelatorComplex,
    /// Generator names for the vertex group basis, one per non-tree edge of
    /// the domain in (base edge, level) order.
    pub names: Alphabet,
    pub vertex_relator: Word,
    /// Basis of the lower associated subgroup, written over the vertex basis.
    pub a_gens: Vec<Word>,
    /// Images of `a_gens` under the shift, written over the vertex basis.
    pub b_gens: Vec<Word>,
    pub a_core: CoreGraph,
    pub b_core: CoreGraph,
    pub a_sub: SubComplex,
    pub b_sub: SubComplex,
    /// The stable letter as a word in the base group's spanning-tree basis.
    pub stable_letter: Word,
}

/// Breadth-first tree of a subcomplex, rooted at `start`: per-vertex step
/// paths from the root and the set of edges used by the tree.
fn sub_tree(
    graph: &CombGraph,
    sub: &SubComplex,
    start: usize,
) -> (BTreeMap<usize, Vec<Letter>>, BTreeSet<usize>) {
    let mut paths: BTreeMap<usize, Vec<Letter>> = BTreeMap::from([(start, Vec::new())]);
    let mut tree = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &e in &sub.edges {
            let (o, t) = graph.edge(e);
            for (from, to, s) in [(o, t, letter(e, true)), (t, o, letter(e, false))] {
                if from == v && sub.vertices.contains(&to) && !paths.contains_key(&to) {
                    let mut p = paths[&v].clone();
                    p.push(s);
                    paths.insert(to, p);
                    tree.insert(e);
                    queue.push_back(to);
                }
            }
        }
    }
    (paths, tree)
}

pub fn splitting_from_domain(domain: &TreeDomain) -> Result<HnnSplitting, CoverError> {
    let report = domain.axiom_report();
    if let Some(reason) = report.first_failure() {
        return Err(CoverError::AxiomViolation(reason.into()));
    }
    let spec = domain.spec();
    let dc = domain.complex();
    let pi1 = dc.complex.graph().pi1_basis(dc.complex.base());
    let names = vertex_alphabet(pi1.rank())?;
    let vertex_relator = dc.complex.relator_in_pi1(&pi1);

    let lower: Vec<(usize, i64)> = dc
        .vertex_cells
        .iter()
        .filter(|&&(v, i)| domain.cells().vertices.contains(&(v, i + 1)))
        .copied()
        .collect();
    let a_sub = SubComplex {
        vertices: lower.iter().map(|c| dc.vertex_id[c]).collect(),
        edges: dc
            .edge_cells
            .iter()
            .filter(|&&(e, i)| domain.cells().edges.contains(&(e, i + 1)))
            .map(|c| dc.edge_id[c])
            .collect(),
    };
    let b_sub = SubComplex {
        vertices: dc
            .vertex_cells
            .iter()
            .filter(|&&(v, i)| domain.cells().vertices.contains(&(v, i - 1)))
            .map(|c| dc.vertex_id[c])
            .collect(),
        edges: dc
            .edge_cells
            .iter()
            .filter(|&&(e, i)| domain.cells().edges.contains(&(e, i - 1)))
            .map(|c| dc.edge_id[c])
            .collect(),
    };

    let a_base_cell = *lower
        .iter()
        .min_by_key(|&&(v, i)| (i, v))
        .expect("overlap is nonempty");
    let a_base = dc.vertex_id[&a_base_cell];
    let (paths, tree) = sub_tree(dc.complex.graph(), &a_sub, a_base);
    debug_assert_eq!(paths.len(), a_sub.vertices.len(), "overlap is connected");

    let stem = pi1.vertex_path(a_base);
    let shifted_base = dc.vertex_id[&(a_base_cell.0, a_base_cell.1 + 1)];
    let stem_up = pi1.vertex_path(shifted_base);

    let shift_step = |s: Letter| {
        let (e, i) = dc.edge_cells[gen_index(s)];
        letter(dc.edge_id[&(e, i + 1)], s > 0)
    };
    let mut a_gens = Vec::new();
    let mut b_gens = Vec::new();
    for &e in a_sub.edges.iter().filter(|e| !tree.contains(e)) {
        let (o, t) = dc.complex.graph().edge(e);
        let mut lp = paths[&o].clone();
        lp.push(letter(e, true));
        lp.extend(paths[&t].iter().rev().map(|&s| -s));
        let mut a_steps = stem.clone();
        a_steps.extend(&lp);
        a_steps.extend(stem.iter().rev().map(|&s| -s));
        a_gens.push(pi1.express(&a_steps));
        let mut b_steps = stem_up.clone();
        b_steps.extend(lp.iter().map(|&s| shift_step(s)));
        b_steps.extend(stem_up.iter().rev().map(|&s| -s));
        b_gens.push(pi1.express(&b_steps));
    }

    let a_core = CoreGraph::from_words(pi1.rank(), &a_gens);
    let b_core = CoreGraph::from_words(pi1.rank(), &b_gens);

    let project = |steps: &[Letter]| -> Vec<Letter> {
        steps
            .iter()
            .map(|&s| letter(dc.edge_cells[gen_index(s)].0, s > 0))
            .collect()
    };
    let mut tau_steps = project(&stem_up);
    let back = project(&stem);
    tau_steps.extend(back.iter().rev().map(|&s| -s));
    let base_pi1 = spec.base().graph().pi1_basis(0);
    let stable_letter = base_pi1.express(&tau_steps);

    Ok(HnnSplitting {
        vertex: dc.complex,
        names,
        vertex_relator,
        a_gens,
        b_gens,
        a_core,
        b_core,
        a_sub,
        b_sub,
        stable_letter,
    })
}

/// Two-way coordinate data for the splitting read off a tree domain: the
/// embedding of the vertex and stable generators into the base group, and
/// the rewriting of each base generator as a word in the HNN generators.
pub struct HnnCoords {
    pub vertex_rank: usize,
    /// Base-group word per vertex generator, over the base spanning-tree
    /// basis rooted at the base complex's basepoint.
    pub vertex_images: Vec<Word>,
    /// Base-group word for the stable letter.
    pub stable_image: Word,
    /// HNN word per base generator: letters `0..vertex_rank` are the vertex
    /// generators, letter `vertex_rank` is the stable letter.
    pub base_images: Vec<Word>,
}

/// Compute both directions of the coordinate change between the base group
/// and the HNN presentation carried by `domain`. Substituting the embedding
/// into each entry of `base_images` recovers the corresponding base
/// generator verbatim in the free base group, which is how the tests pin
/// this down.
pub fn hnn_coords(domain: &TreeDomain) -> Result<HnnCoords, CoverError> {
    let report = domain.axiom_report();
    if let Some(reason) = report.first_failure() {
        return Err(CoverError::AxiomViolation(reason.into()));
    }
    let spec = domain.spec();
    let dc = domain.complex();
    let graph = dc.complex.graph();
    let pi1 = graph.pi1_basis(dc.complex.base());
    let rank = pi1.rank();

    let lower: Vec<(usize, i64)> = dc
        .vertex_cells
        .iter()
        .filter(|&&(v, i)| domain.cells().vertices.contains(&(v, i + 1)))
        .copied()
        .collect();
    let a_sub = SubComplex {
        vertices: lower.iter().map(|c| dc.vertex_id[c]).collect(),
        edges: dc
            .edge_cells
            .iter()
            .filter(|&&(e, i)| domain.cells().edges.contains(&(e, i + 1)))
            .map(|c| dc.edge_id[c])
            .collect(),
    };
    let b_sub = SubComplex {
        vertices: dc
            .vertex_cells
            .iter()
            .filter(|&&(v, i)| domain.cells().vertices.contains(&(v, i - 1)))
            .map(|c| dc.vertex_id[c])
            .collect(),
        edges: dc
            .edge_cells
            .iter()
            .filter(|&&(e, i)| domain.cells().edges.contains(&(e, i - 1)))
            .map(|c| dc.edge_id[c])
            .collect(),
    };
    let a_base_cell = *lower
        .iter()
        .min_by_key(|&&(v, i)| (i, v))
        .expect("overlap is nonempty");
    let a_base = dc.vertex_id[&a_base_cell];
    let b_base = dc.vertex_id[&(a_base_cell.0, a_base_cell.1 + 1)];
    let (r_paths, _) = sub_tree(graph, &a_sub, a_base);
    let (q_paths, _) = sub_tree(graph, &b_sub, b_base);
    let stem = pi1.vertex_path(a_base);
    let stem_up = pi1.vertex_path(b_base);

    let project = |steps: &[Letter]| -> Vec<Letter> {
        steps
            .iter()
            .map(|&s| letter(dc.edge_cells[gen_index(s)].0, s > 0))
            .collect()
    };
    let base_graph = spec.base().graph();
    let base_pi1 = base_graph.pi1_basis(spec.base().base());

    let loop_steps = |pi1: &Pi1Basis, graph: &CombGraph, e: usize| -> Vec<Letter> {
        let (o, t) = graph.edge(e);
        let mut steps = pi1.vertex_path(o);
        steps.push(letter(e, true));
        steps.extend(pi1.vertex_path(t).iter().rev().map(|&s| -s));
        steps
    };
    let vertex_images: Vec<Word> = pi1
        .nontree_edges()
        .iter()
        .map(|&e| base_pi1.express(&project(&loop_steps(&pi1, graph, e))))
        .collect();
    let mut tau_steps = project(&stem_up);
    tau_steps.extend(project(&stem).iter().rev().map(|&s| -s));
    let stable_image = base_pi1.express(&tau_steps);

    // Per-edge level intervals of the domain, for picking a translate whose
    // copy of the next edge lies inside it. The level-interval axiom makes
    // the gap between the current translate and a valid one crossable one
    // step at a time.
    let mut edge_span: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
    for &(e, i) in &domain.cells().edges {
        edge_span
            .entry(e)
            .and_modify(|s| *s = (s.0.min(i), s.1.max(i)))
            .or_insert((i, i));
    }

    let shift = |steps: &[Letter], d: i64| -> Vec<Letter> {
        steps
            .iter()
            .map(|&s| {
                let (e, i) = dc.edge_cells[gen_index(s)];
                letter(dc.edge_id[&(e, i + d)], s > 0)
            })
            .collect()
    };
    let rev_inv = |steps: &[Letter]| -> Vec<Letter> { steps.iter().rev().map(|&s| -s).collect() };

    let lift_loop = |steps: &[Letter]| -> Word {
        let mut out: Vec<Letter> = Vec::new();
        let mut acc: Vec<Letter> = Vec::new();
        let mut k: i64 = 0;
        let mut lvl = domain.start_level();
        let mut vertex = spec.base().base();
        let cross = |up: bool, acc: &mut Vec<Letter>, out: &mut Vec<Letter>, k: &mut i64, at: (usize, i64)| {
            let d_c = dc.vertex_id[&(at.0, at.1 - *k)];
            let (paths, in_stem, out_stem, d) = if up {
                (&q_paths, &stem_up, &stem, -1)
            } else {
                (&r_paths, &stem, &stem_up, 1)
            };
            let side = paths
                .get(&d_c)
                .expect("crossing point lies in the overlap");
            let mut g_steps = acc.clone();
            g_steps.extend(rev_inv(side));
            g_steps.extend(rev_inv(in_stem));
            out.extend(pi1.express(&g_steps).letters());
            out.push(letter(rank, up));
            *acc = out_stem.clone();
            acc.extend(shift(side, d));
            *k += if up { 1 } else { -1 };
        };
        for &s in steps {
            let ((e, ecl), target) = spec.step_lift(s, lvl);
            let (lo, hi) = edge_span[&e];
            while k < ecl - hi {
                cross(true, &mut acc, &mut out, &mut k, (vertex, lvl));
            }
            while k > ecl - lo {
                cross(false, &mut acc, &mut out, &mut k, (vertex, lvl));
            }
            acc.push(letter(dc.edge_id[&(e, ecl - k)], s > 0));
            let (o, t) = base_graph.edge(e);
            vertex = if s > 0 { t } else { o };
            lvl = target;
        }
        let phi = lvl - domain.start_level();
        while k < phi {
            cross(true, &mut acc, &mut out, &mut k, (vertex, lvl));
        }
        while k > phi {
            cross(false, &mut acc, &mut out, &mut k, (vertex, lvl));
        }
        out.extend(pi1.express(&acc).letters());
        Word::from_letters(out)
    };

    let base_images: Vec<Word> = base_pi1
        .nontree_edges()
        .iter()
        .map(|&e| lift_loop(&loop_steps(&base_pi1, base_graph, e)))
        .collect();

    Ok(HnnCoords {
        vertex_rank: rank,
        vertex_images,
        stable_image,
        base_images,
    })
}

/// One stable letter's worth of data in a multiple HNN splitting.
pub struct EdgeSpace {
    pub a_gens: Vec<Word>,
    pub b_gens: Vec<Word>,
    pub a_sub: SubComplex,
    pub b_sub: SubComplex,
}

/// Splitting over a free group: the vertex complex is a finite window of the
/// cover associated to a map onto `F(S)`, and each element of `S` contributes
/// one edge space.
pub struct MultiHnnSplitting {
    pub domain: OneRelatorComplex,
    pub names: Alphabet,
    pub vertex_relator: Word,
    pub edge_spaces: Vec<EdgeSpace>,
    /// Some edge copy is traversed exactly once by the relator lift, so the
    /// two-cell collapses across it and the vertex group is free.
    pub vertex_group_free: bool,
    pub vertex_free_rank: Option<usize>,
}

fn reduce_concat(g: &[Letter], extra: &[Letter]) -> Vec<Letter> {
    Word::from_letters(g.iter().chain(extra.iter()).copied())
        .letters()
        .to_vec()
}

/// Split over a free group `F(S)` described by labelling some edges with
/// distinct free generators (indices `0..m`) and leaving the rest silent.
/// The relator must map to the identity and must visit every vertex of the
/// base graph.
pub fn free_cover_splitting(
    x: &OneRelatorComplex,
    assignment: &BTreeMap<usize, usize>,
) -> Result<MultiHnnSplitting, CoverError> {
    let graph = x.graph();
    let mut seen = BTreeSet::new();
    for (&e, &s) in assignment {
        if e >= graph.edge_count() {
            return Err(CoverError::BadAssignment(format!("no edge {e}")));
        }
        if !seen.insert(s) {
            return Err(CoverError::BadAssignment(format!(
                "free generator {s} is assigned twice"
            )));
        }
    }
    let m = seen.len();
    if m == 0 || seen.iter().next_back() != Some(&(m - 1)) {
        return Err(CoverError::BadAssignment(
            "free generator indices must be exactly 0..m with m >= 1".into(),
        ));
    }
    let phi = |s: Letter| -> Option<Letter> {
        assignment.get(&gen_index(s)).map(|&g| letter(g, s > 0))
    };
    let image = Word::from_letters(x.relator().letters().iter().filter_map(|&s| phi(s)));
    if !image.is_empty() {
        return Err(CoverError::RelatorNotInKernel {
            value: image.len() as i64,
        });
    }
    let visited = x.support().vertices;
    if visited.len() != graph.vertex_count() {
        return Err(CoverError::Unsupported(
            "free-cover splitting needs the relator to visit every vertex".into(),
        ));
    }

    // Walk the relator through the cover, then close up under outgoing edge
    // copies at every vertex the lift visits.
    type Cell = (usize, Vec<Letter>);
    let mut cur: Vec<Letter> = Vec::new();
    let mut trace_lifts: Vec<Cell> = Vec::new();
    let mut dvertices: BTreeSet<Cell> = BTreeSet::from([(x.base(), cur.clone())]);
    let mut dedges: BTreeSet<Cell> = BTreeSet::new();
    let mut traversals: BTreeMap<Cell, usize> = BTreeMap::new();
    for &s in x.relator().letters() {
        let e = gen_index(s);
        let delta: Vec<Letter> = phi(s).into_iter().collect();
        let lift_g;
        if s > 0 {
            lift_g = cur.clone();
            cur = reduce_concat(&cur, &delta);
        } else {
            cur = reduce_concat(&cur, &delta);
            lift_g = cur.clone();
        }
        let lift = (e, lift_g);
        *traversals.entry(lift.clone()).or_insert(0) += 1;
        trace_lifts.push(lift.clone());
        dedges.insert(lift);
        dvertices.insert((graph.step_target(s), cur.clone()));
    }
    debug_assert!(cur.is_empty());
    for (v, g) in dvertices.clone() {
        for e in 0..graph.edge_count() {
            if graph.edge(e).0 == v {
                let delta: Vec<Letter> =
                    assignment.get(&e).map(|&s| letter(s, true)).into_iter().collect();
                dedges.insert((e, g.clone()));
                dvertices.insert((graph.edge(e).1, reduce_concat(&g, &delta)));
            }
        }
    }

    let mut vcells: Vec<Cell> = dvertices.iter().cloned().collect();
    vcells.sort_by_key(|(v, g)| (g.len(), g.clone(), *v));
    let vertex_id: BTreeMap<Cell, usize> =
        vcells.iter().enumerate().map(|(n, c)| (c.clone(), n)).collect();
    let mut ecells: Vec<Cell> = dedges.iter().cloned().collect();
    ecells.sort_by_key(|(e, g)| (*e, g.len(), g.clone()));
    let edge_id: BTreeMap<Cell, usize> =
        ecells.iter().enumerate().map(|(n, c)| (c.clone(), n)).collect();
    let edges: Vec<(usize, usize)> = ecells
        .iter()
        .map(|(e, g)| {
            let (o, t) = graph.edge(*e);
            let delta: Vec<Letter> =
                assignment.get(e).map(|&s| letter(s, true)).into_iter().collect();
            (vertex_id[&(o, g.clone())], vertex_id[&(t, reduce_concat(g, &delta))])
        })
        .collect();
    let dgraph = CombGraph::new(vcells.len(), edges).expect("cover cells form a graph");
    let steps: Vec<Letter> = x
        .relator()
        .letters()
        .iter()
        .zip(&trace_lifts)
        .map(|(&s, lift)| letter(edge_id[lift], s > 0))
        .collect();
    let dbase = vertex_id[&(x.base(), Vec::new())];
    let domain = OneRelatorComplex::new(dgraph, &steps, dbase).expect("lift is a closed cycle");
    let pi1 = domain.graph().pi1_basis(dbase);
    let names = vertex_alphabet(pi1.rank())?;
    let vertex_relator = domain.relator_in_pi1(&pi1);

    let free_edge = traversals.iter().find(|&(_, &n)| n == 1);
    let vertex_group_free = free_edge.is_some();
    let vertex_free_rank = free_edge.map(|_| pi1.rank() - 1);

    let mut edge_spaces = Vec::new();
    for s in 0..m {
        let s_letter = [letter(s, true)];
        let shift = |g: &Vec<Letter>| -> Vec<Letter> {
            Word::from_letters(s_letter.iter().chain(g.iter()).copied())
                .letters()
                .to_vec()
        };
        let mut a_vcells: Vec<Cell> = Vec::new();
        let mut a_sub = SubComplex {
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        let mut b_sub = a_sub.clone();
        for (v, g) in &vcells {
            let up = (*v, shift(g));
            if dvertices.contains(&up) {
                a_vcells.push((*v, g.clone()));
                a_sub.vertices.insert(vertex_id[&(*v, g.clone())]);
                b_sub.vertices.insert(vertex_id[&up]);
            }
        }
        for (e, g) in &ecells {
            let up = (*e, shift(g));
            if dedges.contains(&up) {
                a_sub.edges.insert(edge_id[&(*e, g.clone())]);
                b_sub.edges.insert(edge_id[&up]);
            }
        }
        if a_sub.vertices.is_empty() {
            return Err(CoverError::Unsupported(format!(
                "edge space for stable letter {s} is empty"
            )));
        }
        if !a_sub.is_connected(domain.graph()) {
            return Err(CoverError::Unsupported(format!(
                "edge space for stable letter {s} is disconnected"
            )));
        }
        let a_base_cell = a_vcells[0].clone();
        let a_base = vertex_id[&a_base_cell];
        let (paths, tree) = sub_tree(domain.graph(), &a_sub, a_base);
        let stem = pi1.vertex_path(a_base);
        let up_base = vertex_id[&(a_base_cell.0, shift(&a_base_cell.1))];
        let stem_up = pi1.vertex_path(up_base);
        let shift_step = |st: Letter| {
            let (e, g) = &ecells[gen_index(st)];
            letter(edge_id[&(*e, shift(g))], st > 0)
        };
        let mut a_gens = Vec::new();
        let mut b_gens = Vec::new();
        for &e in a_sub.edges.iter().filter(|e| !tree.contains(e)) {
            let (o, t) = domain.graph().edge(e);
            let mut lp = paths[&o].clone();
            lp.push(letter(e, true));
            lp.extend(paths[&t].iter().rev().map(|&st| -st));
            let mut a_steps = stem.clone();
            a_steps.extend(&lp);
            a_steps.extend(stem.iter().rev().map(|&st| -st));
            a_gens.push(pi1.express(&a_steps));
            let mut b_steps = stem_up.clone();
            b_steps.extend(lp.iter().map(|&st| shift_step(st)));
            b_steps.extend(stem_up.iter().rev().map(|&st| -st));
            b_gens.push(pi1.express(&b_steps));
        }
        edge_spaces.push(EdgeSpace {
            a_gens,
            b_gens,
            a_sub,
            b_sub,
        });
    }

    Ok(MultiHnnSplitting {
        domain,
        names,
        vertex_relator,
        edge_spaces,
        vertex_group_free,
        vertex_free_rank,
    })
}

/// Integer row operations turning `v` into `(d, 0, .., 0)`. Returns the
/// unimodular matrix that performs them.
fn clearing_matrix(v: &[i64]) -> Vec<Vec<i64>> {
    let n = v.len();
    let mut v = v.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| v[i] != 0).collect();
        if nz.len() <= 1 {
            if let Some(&p) = nz.first() {
                if p != 0 {
                    v.swap(0, p);
                    u.swap(0, p);
                }
                if v[0] < 0 {
                    for x in &mut u[0] {
                        *x = -*x;
                    }
                }
            }
            return u;
        }
        let p = *nz.iter().min_by_key(|&&i| v[i].abs()).unwrap();
        for &q in &nz {
            if q == p {
                continue;
            }
            let f = v[q] / v[p];
            if f != 0 {
                v[q] -= f * v[p];
                for j in 0..n {
                    let s = u[p][j];
                    u[q][j] -= f * s;
                }
            }
        }
    }
}

/// The subcomplex of the largest free abelian cover carried by one lift of
/// the relator. The deck group is the free part of first homology with the
/// relator class divided out; the lift lives over integer vectors in it.
pub fn abelian_lift(x: &OneRelatorComplex) -> Result<OneRelatorComplex, CoverError> {
    let graph = x.graph();
    if !graph.is_connected() {
        return Err(CoverError::Unsupported(
            "abelian lift needs a connected base graph".into(),
        ));
    }
    let pi1 = graph.pi1_basis(0);
    let b1 = pi1.rank();
    if b1 == 0 {
        return Err(CoverError::NoAbelianCover("the graph is a tree"));
    }
    let lam = x.relator_in_pi1(&pi1).abelianize(b1);
    let coords: Vec<Vec<i64>> = if lam.iter().all(|&c| c == 0) {
        (0..b1)
            .map(|j| (0..b1).map(|r| i64::from(r == j)).collect())
            .collect()
    } else {
        if b1 == 1 {
            return Err(CoverError::NoAbelianCover(
                "the relator class already spans the homology",
            ));
        }
        let u = clearing_matrix(&lam);
        (0..b1).map(|j| (1..b1).map(|r| u[r][j]).collect()).collect()
    };
    let dim = coords[0].len();
    let mut edge_vec: Vec<Vec<i64>> = vec![vec![0; dim]; graph.edge_count()];
    for (pos, &e) in pi1.nontree_edges().iter().enumerate() {
        edge_vec[e] = coords[pos].clone();
    }

    type Cell = (usize, Vec<i64>);
    let mut cur = vec![0i64; dim];
    let mut vcells: BTreeSet<Cell> = BTreeSet::from([(x.base(), cur.clone())]);
    let mut ecells: BTreeSet<Cell> = BTreeSet::new();
    let mut lifts: Vec<Cell> = Vec::new();
    let add = |g: &[i64], d: &[i64], sign: i64| -> Vec<i64> {
        g.iter().zip(d).map(|(a, b)| a + sign * b).collect()
    };
    for &s in x.relator().letters() {
        let e = gen_index(s);
        let lift_g;
        if s > 0 {
            lift_g = cur.clone();
            cur = add(&cur, &edge_vec[e], 1);
        } else {
            cur = add(&cur, &edge_vec[e], -1);
            lift_g = cur.clone();
        }
        lifts.push((e, lift_g.clone()));
        ecells.insert((e, lift_g));
        vcells.insert((graph.step_target(s), cur.clone()));
    }
    debug_assert!(cur.iter().all(|&c| c == 0), "projected class vanishes");

    let mut vlist: Vec<Cell> = vcells.iter().cloned().collect();
    vlist.sort_by_key(|(v, g)| (g.clone(), *v));
    let vertex_id: BTreeMap<Cell, usize> =
        vlist.iter().enumerate().map(|(n, c)| (c.clone(), n)).collect();
    let elist: Vec<Cell> = ecells.iter().cloned().collect();
    let edge_id: BTreeMap<Cell, usize> =
        elist.iter().enumerate().map(|(n, c)| (c.clone(), n)).collect();
    let edges: Vec<(usize, usize)> = elist
        .iter()
        .map(|(e, g)| {
            let (o, t) = graph.edge(*e);
            (vertex_id[&(o, g.clone())], vertex_id[&(t, add(g, &edge_vec[*e], 1))])
        })
        .collect();
    let lgraph = CombGraph::new(vlist.len(), edges).expect("lift cells form a graph");
    let steps: Vec<Letter> = x
        .relator()
        .letters()
        .iter()
        .zip(&lifts)
        .map(|(&s, lift)| letter(edge_id[lift], s > 0))
        .collect();
    let base = vertex_id[&(x.base(), vec![0; dim])];
    Ok(OneRelatorComplex::new(lgraph, &steps, base).expect("lift is a closed cycle"))
}

/// The minimal domain for the weight pair `(q, -p)` on a two-petal rose with
/// no relator. It is homotopy equivalent to a circle; reading that circle
/// gives the unique primitive conjugacy class with abelianisation `(p, q)`.
pub fn primitive_z2_domain(p: i64, q: i64) -> Result<TreeDomain, CoverError> {
    if gcd(p, q) != 1 {
        return Err(CoverError::BadAssignment(format!(
            "({p}, {q}) is not a primitive vector"
        )));
    }
    let rose = OneRelatorComplex::new(CombGraph::rose(2), &[], 0).expect("rose is valid");
    let mut values = BTreeMap::new();
    if q != 0 {
        values.insert(0usize, q);
    }
    if p != 0 {
        values.insert(1usize, -p);
    }
    let spec = CyclicCoverSpec::from_edge_values(rose, &values)?;
    minimal_tree_domain(&spec)
}

pub fn primitive_z2(p: i64, q: i64) -> Result<CyclicWord, CoverError> {
    let domain = primitive_z2_domain(p, q)?;
    let spec = domain.spec();
    let mut cells = domain.cells().clone();

    // Trim hanging trees until only the embedded circle is left.
    loop {
        let mut degree: BTreeMap<(usize, i64), usize> = BTreeMap::new();
        for &(e, i) in &cells.edges {
            let (o, t) = spec.base().graph().edge(e);
            *degree.entry((o, i)).or_insert(0) += 1;
            *degree.entry((t, i + spec.iota(e))).or_insert(0) += 1;
        }
        let leaf = cells
            .vertices
            .iter()
            .find(|c| degree.get(c).copied().unwrap_or(0) <= 1)
            .copied();
        let Some(v) = leaf else { break };
        cells.vertices.remove(&v);
        cells.edges.retain(|&(e, i)| {
            let (o, t) = spec.base().graph().edge(e);
            (o, i) != v && (t, i + spec.iota(e)) != v
        });
    }
    if cells.vertices.len() != cells.edges.len() || cells.vertices.is_empty() {
        return Err(CoverError::Unsupported(format!(
            "domain for ({p}, {q}) did not reduce to a circle"
        )));
    }

    let start = *cells.vertices.iter().next().unwrap();
    let mut letters = Vec::new();
    let mut at = start;
    let mut last: Option<(usize, i64)> = None;
    loop {
        let mut next = None;
        for &(e, i) in &cells.edges {
            if last == Some((e, i)) {
                continue;
            }
            let (o, t) = spec.base().graph().edge(e);
            if (o, i) == at {
                next = Some(((e, i), (t, i + spec.iota(e)), letter(e, true)));
                break;
            }
            if (t, i + spec.iota(e)) == at {
                next = Some(((e, i), (o, i), letter(e, false)));
                break;
            }
        }
        let (lift, to, l) = next.expect("circle walk continues");
        letters.push(l);
        last = Some(lift);
        at = to;
        if at == start {
            break;
        }
    }
    let w = Word::from_letters(letters);
    debug_assert_eq!(w.len(), cells.edges.len(), "circle reading is reduced");
    let ab = w.abelianize(2);
    let w = if ab == [p, q] {
        w
    } else if ab == [-p, -q] {
        w.inverse()
    } else {
        return Err(CoverError::Unsupported(format!(
            "circle for ({p}, {q}) read off abelianisation {ab:?}"
        )));
    };
    Ok(CyclicWord::new(w.letters().to_vec()))
}

/// Graphviz rendering of a cell set. Tree-edge copies are black, the other
/// edge copies red; an optional marked vertex is drawn with a double circle.
pub fn cells_dot(spec: &CyclicCoverSpec, cells: &CellSet, mark: Option<(usize, i64)>) -> String {
    let mut s = String::from("digraph cover {\n");
    for &(v, i) in &cells.vertices {
        let shape = if mark == Some((v, i)) {
            " shape=doublecircle"
        } else {
            ""
        };
        s.push_str(&format!("  \"v{v}@{i}\" [label=\"{v}@{i}\"{shape}];\n"));
    }
    for &(e, i) in &cells.edges {
        let (o, t) = spec.base().graph().edge(e);
        let name = (b'a' + (e % 26) as u8) as char;
        let color = if spec.is_tree_edge(e) { "black" } else { "red" };
        s.push_str(&format!(
            "  \"v{o}@{i}\" -> \"v{t}@{}\" [label=\"{name}\" color={color}];\n",
            i + spec.iota(e)
        ));
    }
    s.push_str("}\n");
    s
}

pub fn window_dot(spec: &CyclicCoverSpec, levels: &BTreeSet<i64>, a_edges: &BTreeSet<usize>) -> String {
    cells_dot(spec, &window(spec, levels, a_edges), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitehead::is_primitive;

    fn rose_complex(rank: usize, ab: &Alphabet, relator: &str) -> OneRelatorComplex {
        let w = ab.parse(relator).unwrap();
        OneRelatorComplex::new(CombGraph::rose(rank), w.letters(), 0).unwrap()
    }

    fn ab2() -> Alphabet {
        Alphabet::new(vec!['a', 'b']).unwrap()
    }

    fn rose_spec(relator: &str, va: i64, vb: i64) -> CyclicCoverSpec {
        let x = rose_complex(2, &ab2(), relator);
        let mut values = BTreeMap::new();
        if va != 0 {
            values.insert(0usize, va);
        }
        if vb != 0 {
            values.insert(1usize, vb);
        }
        CyclicCoverSpec::from_edge_values(x, &values).unwrap()
    }

    fn interval(lo: i64, hi: i64) -> BTreeSet<i64> {
        (lo..=hi).collect()
    }

    #[test]
    fn spec_validation() {
        let x = rose_complex(2, &ab2(), "1");
        let bad = CyclicCoverSpec::from_edge_values(x.clone(), &BTreeMap::from([(0, 2), (1, 4)]));
        assert_eq!(bad.unwrap_err(), CoverError::NotSurjective { gcd: 2 });
        let x2 = rose_complex(2, &ab2(), "aab");
        let bad = CyclicCoverSpec::from_edge_values(x2, &BTreeMap::from([(0, 1)]));
        assert_eq!(bad.unwrap_err(), CoverError::RelatorNotInKernel { value: 2 });
        // Two-vertex graph: edge 0 joins the vertices and lands on the tree.
        let g = CombGraph::new(2, vec![(0, 1), (0, 0)]).unwrap();
        let x3 = OneRelatorComplex::new(g, &[], 0).unwrap();
        let bad = CyclicCoverSpec::from_edge_values(x3, &BTreeMap::from([(0, 1), (1, 1)]));
        assert_eq!(bad.unwrap_err(), CoverError::WeightOnTreeEdge { edge: 0 });
    }

    #[test]
    fn window_and_component_count() {
        let spec = rose_spec("1", 3, -5);
        let all: BTreeSet<usize> = BTreeSet::from([0, 1]);
        let conn = component_count(&spec, &interval(0, 6), &all);
        assert_eq!(conn.components, 1);
        assert_eq!(conn.index, Some(1));
        assert_eq!(conn.threshold, 7);
        // Below the threshold the count exceeds the limit.
        let short = component_count(&spec, &interval(0, 5), &all);
        assert!(short.components > 1);
        // Only the weight-3 edge: three residue classes once long enough.
        let a_only = BTreeSet::from([0]);
        let c = component_count(&spec, &interval(0, 8), &a_only);
        assert_eq!((c.components, c.index, c.threshold), (3, Some(3), 3));
        // No edges selected: nothing merges.
        let none = component_count(&spec, &interval(0, 4), &BTreeSet::new());
        assert_eq!((none.components, none.index), (5, None));
    }

    #[test]
    fn component_count_matches_union_find_on_cells() {
        // The closed-form count must agree with a direct component count of
        // the window cells, including non-interval level sets.
        let spec = rose_spec("1", 3, -5);
        let all = BTreeSet::from([0, 1]);
        for levels in [
            interval(0, 6),
            interval(0, 7),
            BTreeSet::from([0, 2, 3, 7, 8]),
            BTreeSet::from([-3, 0, 1, 2, 5]),
        ] {
            let cells = window(&spec, &levels, &all);
            let verts: Vec<(usize, i64)> = cells.vertices.iter().copied().collect();
            let vid: BTreeMap<(usize, i64), usize> =
                verts.iter().enumerate().map(|(n, &c)| (c, n)).collect();
            let mut uf = Uf::new(verts.len());
            for &(e, i) in &cells.edges {
                let (o, t) = spec.base().graph().edge(e);
                uf.union(vid[&(o, i)], vid[&(t, i + spec.iota(e))]);
            }
            let mut roots = BTreeSet::new();
            for n in 0..verts.len() {
                let r = uf.find(n);
                roots.insert(r);
            }
            assert_eq!(
                component_count(&spec, &levels, &all).components,
                roots.len(),
                "levels {levels:?}"
            );
        }
    }

    #[test]
    fn threshold_recursion_is_exact_on_samples() {
        // k({5,3}) = 7 and k({6,4,3}) = 6: the count settles at the limit
        // exactly from the threshold on.
        let spec53 = rose_spec("1", 3, -5);
        let all2 = BTreeSet::from([0, 1]);
        assert!(component_count(&spec53, &interval(0, 5), &all2).components > 1);
        for len in 7..=10 {
            let c = component_count(&spec53, &interval(0, len - 1), &all2);
            assert_eq!(c.components, 1, "len {len}");
        }
        let rose3 = OneRelatorComplex::new(CombGraph::rose(3), &[], 0).unwrap();
        let spec = CyclicCoverSpec::from_edge_values(
            rose3,
            &BTreeMap::from([(0, 6), (1, 4), (2, 3)]),
        )
        .unwrap();
        let all3 = BTreeSet::from([0, 1, 2]);
        assert_eq!(component_count(&spec, &interval(0, 0), &all3).threshold, 6);
        assert!(component_count(&spec, &interval(0, 4), &all3).components > 1);
        for len in 6..=10 {
            let c = component_count(&spec, &interval(0, len - 1), &all3);
            assert_eq!(c.components, 1, "len {len}");
        }
    }

    #[test]
    fn intersection_axiom_separates_window_sizes() {
        // Weights (3, -5): seven levels connect the window, but only eight
        // make the overlap with its shift connected.
        let spec = rose_spec("1", 3, -5);
        let all = BTreeSet::from([0, 1]);
        let seven = check_domain(&spec, &window(&spec, &interval(0, 6), &all), None);
        assert!(seven.connected && seven.covers_base);
        assert!(!seven.overlap_connected);
        let eight = check_domain(&spec, &window(&spec, &interval(0, 7), &all), None);
        assert!(eight.all_hold());
    }

    #[test]
    fn primitive_z2_small_cases() {
        assert_eq!(primitive_z2(1, 0).unwrap().render(&ab2()), "a");
        assert_eq!(primitive_z2(0, 1).unwrap().render(&ab2()), "b");
        assert_eq!(primitive_z2(-1, 0).unwrap().render(&ab2()), "A");
        assert_eq!(primitive_z2(1, 1).unwrap().render(&ab2()), "ab");
        assert_eq!(
            primitive_z2(2, 2).unwrap_err(),
            CoverError::BadAssignment("(2, 2) is not a primitive vector".into())
        );
    }

    #[test]
    fn primitive_z2_five_three() {
        let w = primitive_z2(5, 3).unwrap();
        assert_eq!(w.abelianize(2), vec![5, 3]);
        assert_eq!(w.render(&ab2()), "a^2ba^2bab");
        assert!(is_primitive(2, &w.to_word()));
        let domain = primitive_z2_domain(5, 3).unwrap();
        assert_eq!(domain.cells().vertices.len(), 8);
        assert_eq!(domain.cells().edges.len(), 8);
        // Minimal graph domains gain one Euler characteristic point over the
        // base and overlap their shift in a tree.
        let chi_base = domain.spec().base().graph().chi();
        let chi_d = domain.cells().vertices.len() as i64 - domain.cells().edges.len() as i64;
        assert_eq!(chi_d, chi_base + 1);
        let overlap = domain.cells().overlap_up();
        assert_eq!(
            overlap.vertices.len() as i64 - overlap.edges.len() as i64,
            1
        );
    }

    #[test]
    fn primitive_z2_signs_and_primitivity() {
        for (p, q) in [(2, 1), (3, -5), (-5, 3), (-4, -3), (1, -6)] {
            let w = primitive_z2(p, q).unwrap();
            assert_eq!(w.abelianize(2), vec![p, q], "({p},{q})");
            assert!(is_primitive(2, &w.to_word()), "({p},{q})");
        }
    }

    #[test]
    fn bs_domain_and_splitting() {
        // t a^2 t^-1 = a^3 written over the rose (a, t), counted by t.
        let at = Alphabet::new(vec!['a', 't']).unwrap();
        let x = rose_complex(2, &at, "TaatAAA");
        let spec = CyclicCoverSpec::exp_sum(x.clone(), 1).unwrap();
        assert_eq!((spec.iota(0), spec.iota(1)), (0, 1));
        let domain = minimal_tree_domain(&spec).unwrap();
        assert_eq!(domain.cells().vertices.len(), 2);
        assert_eq!(domain.cells().edges.len(), 3);
        let dc = domain.complex();
        assert!(dc.complex.complexity() < x.complexity());

        let split = splitting_from_domain(&domain).unwrap();
        assert_eq!(split.names.rank(), 2);
        assert_eq!(split.vertex_relator, split.names.parse("x^2Y^3").unwrap());
        assert_eq!(split.a_gens, vec![split.names.parse("x").unwrap()]);
        assert_eq!(split.b_gens, vec![split.names.parse("y").unwrap()]);
        assert_eq!(split.stable_letter, at.parse("t").unwrap());
        assert!(crate::complex::magnus_check(&split.vertex, &split.a_sub));
        assert!(crate::complex::magnus_check(&split.vertex, &split.b_sub));
    }

    #[test]
    fn stable_example_splitting() {
        let x = rose_complex(2, &ab2(), "bbaaBabaaBBAA");
        let spec = CyclicCoverSpec::exp_sum(x, 1).unwrap();
        let domain = minimal_tree_domain(&spec).unwrap();
        let split = splitting_from_domain(&domain).unwrap();
        assert_eq!(split.names.rank(), 3);
        assert_eq!(
            split.vertex_relator,
            split.names.parse("z^2yz^2X^2").unwrap()
        );
        let xw = split.names.parse("x").unwrap();
        let yw = split.names.parse("y").unwrap();
        let zw = split.names.parse("z").unwrap();
        assert_eq!(split.a_gens, vec![xw, yw.clone()]);
        assert_eq!(split.b_gens, vec![yw, zw]);
        assert_eq!(split.stable_letter, ab2().parse("b").unwrap());
    }

    #[test]
    fn torus_domain_is_a_circle() {
        let x = rose_complex(2, &ab2(), "abAB");
        let spec = CyclicCoverSpec::exp_sum(x, 0).unwrap();
        let domain = minimal_tree_domain(&spec).unwrap();
        let split = splitting_from_domain(&domain).unwrap();
        assert_eq!(split.vertex_relator, split.names.parse("yX").unwrap());
        assert!(is_primitive(split.names.rank(), &split.vertex_relator));
        assert_eq!(split.a_gens.len(), 1);
        assert_eq!(split.b_gens.len(), 1);
    }

    #[test]
    fn minimal_domain_certificate() {
        // Deleting any single deletable cell of the found domain breaks one
        // of the conditions, so the greedy endpoint really is minimal.
        let x = rose_complex(2, &ab2(), "bbaaBabaaBBAA");
        let spec = CyclicCoverSpec::exp_sum(x, 1).unwrap();
        let domain = minimal_tree_domain(&spec).unwrap();
        let trace = domain.trace();
        let tc = trace.cells(&spec);
        for &c in &domain.cells().edges {
            let mut cells = domain.cells().clone();
            cells.edges.remove(&c);
            let ok = tc.edges.contains(&c)
                || !check_domain(&spec, &cells, Some(&trace)).all_hold();
            assert!(ok, "edge copy {c:?} was deletable");
        }
    }

    #[test]
    fn abelian_lift_of_bs_and_torus() {
        let at = Alphabet::new(vec!['a', 't']).unwrap();
        let x = rose_complex(2, &at, "TaatAAA");
        let lift = abelian_lift(&x).unwrap();
        assert_eq!(lift.graph().vertex_count(), 2);
        assert_eq!(lift.graph().edge_count(), 3);
        assert_eq!(lift.relator().len(), 7);
        assert!(lift.complexity() < x.complexity());

        // Commutator relator: homology is all of Z^2, the lift is a square.
        let x = rose_complex(2, &ab2(), "abAB");
        let lift = abelian_lift(&x).unwrap();
        assert_eq!(lift.graph().vertex_count(), 4);
        assert_eq!(lift.graph().edge_count(), 4);
        let pi1 = lift.graph().pi1_basis(0);
        assert_eq!(lift.relator_in_pi1(&pi1).len(), 1);

        let circle = rose_complex(1, &Alphabet::new(vec!['a']).unwrap(), "a^4");
        assert_eq!(
            abelian_lift(&circle).unwrap_err(),
            CoverError::NoAbelianCover("the relator class already spans the homology")
        );
    }

    #[test]
    fn free_cover_rejects_kernel_violations() {
        let x = rose_complex(2, &ab2(), "abAB");
        let both = BTreeMap::from([(0usize, 0usize), (1, 1)]);
        assert!(matches!(
            free_cover_splitting(&x, &both).err(),
            Some(CoverError::RelatorNotInKernel { .. })
        ));
    }

    #[test]
    fn free_cover_single_letter_matches_cyclic_domain() {
        let x = rose_complex(2, &ab2(), "abAB");
        let free = free_cover_splitting(&x, &BTreeMap::from([(0usize, 0usize)])).unwrap();
        assert_eq!(free.edge_spaces.len(), 1);
        assert_eq!(free.vertex_relator, free.names.parse("yX").unwrap());
        assert!(free.vertex_group_free);
        assert_eq!(free.vertex_free_rank, Some(1));
        let es = &free.edge_spaces[0];
        assert_eq!(es.a_gens, vec![free.names.parse("x").unwrap()]);
        assert_eq!(es.b_gens, vec![free.names.parse("y").unwrap()]);

        let spec = CyclicCoverSpec::exp_sum(x, 0).unwrap();
        let cyc = splitting_from_domain(&minimal_tree_domain(&spec).unwrap()).unwrap();
        assert_eq!(cyc.vertex_relator, free.vertex_relator);
        assert_eq!(cyc.a_gens, es.a_gens);
        assert_eq!(cyc.b_gens, es.b_gens);
    }

    #[test]
    fn free_cover_double_hnn() {
        let abc = Alphabet::new(vec!['a', 'b', 'c']).unwrap();
        let x = rose_complex(3, &abc, "babc^2BABacA^2c^3a");
        let assignment = BTreeMap::from([(0usize, 0usize), (1, 1)]);
        let split = free_cover_splitting(&x, &assignment).unwrap();
        assert_eq!(split.edge_spaces.len(), 2);
        assert!(split.vertex_group_free);
        for es in &split.edge_spaces {
            assert!(!es.a_gens.is_empty());
            assert_eq!(es.a_gens.len(), es.b_gens.len());
            assert!(es.a_sub.is_connected(split.domain.graph()));
            assert!(es.b_sub.is_connected(split.domain.graph()));
        }
    }

    fn check_coords_round_trip(spec: &CyclicCoverSpec) {
        let domain = minimal_tree_domain(spec).unwrap();
        let coords = hnn_coords(&domain).unwrap();
        let base_pi1 = spec.base().graph().pi1_basis(spec.base().base());
        let mut images = coords.vertex_images.clone();
        images.push(coords.stable_image.clone());
        for img in &coords.vertex_images {
            assert_eq!(spec.phi_steps(img.letters()), 0);
        }
        assert_eq!(spec.phi_steps(coords.stable_image.letters()), 1);
        for (n, &e) in base_pi1.nontree_edges().iter().enumerate() {
            let (o, t) = spec.base().graph().edge(e);
            let mut steps = base_pi1.vertex_path(o);
            steps.push(letter(e, true));
            steps.extend(base_pi1.vertex_path(t).iter().rev().map(|&s| -s));
            let base_word = base_pi1.express(&steps);
            let rewritten = &coords.base_images[n];
            let t_sum: i64 = rewritten
                .letters()
                .iter()
                .filter(|&&s| gen_index(s) == coords.vertex_rank)
                .map(|&s| if s > 0 { 1 } else { -1 })
                .sum();
            assert_eq!(t_sum, spec.phi_steps(base_word.letters()));
            assert_eq!(rewritten.substitute(&images), base_word);
        }
    }

    #[test]
    fn hnn_coords_round_trips_base_generators() {
        // One crossing up.
        check_coords_round_trip(&rose_spec("abAB", 0, 1));
        // Crossings in both directions plus a forced closing crossing.
        check_coords_round_trip(&rose_spec("abAB", 1, -1));
        // Wider span.
        check_coords_round_trip(&rose_spec("bbaaBabaaBBAA", 0, 1));
        let abt = Alphabet::new(vec!['a', 'b', 't']).unwrap();
        let x = OneRelatorComplex::new(
            CombGraph::rose(3),
            abt.parse("ta^2TbaBtaTbaB").unwrap().letters(),
            0,
        )
        .unwrap();
        let spec = CyclicCoverSpec::from_edge_values(x, &BTreeMap::from([(2usize, 1)])).unwrap();
        check_coords_round_trip(&spec);
    }

    #[test]
    fn hnn_coords_match_splitting_shift() {
        // The embedding must intertwine the shift: each b generator image is
        // the stable image conjugate of the matching a generator image.
        for spec in [rose_spec("abAB", 0, 1), rose_spec("bbaaBabaaBBAA", 0, 1)] {
            let domain = minimal_tree_domain(&spec).unwrap();
            let split = splitting_from_domain(&domain).unwrap();
            let coords = hnn_coords(&domain).unwrap();
            for (a, b) in split.a_gens.iter().zip(&split.b_gens) {
                let emb_a = a.substitute(&coords.vertex_images);
                let emb_b = b.substitute(&coords.vertex_images);
                assert_eq!(emb_b, emb_a.conjugated_by(&coords.stable_image));
            }
        }
    }

    #[test]
    fn dot_output_marks_added_edges() {
        let spec = rose_spec("1", 3, -5);
        let dot = window_dot(&spec, &interval(0, 3), &BTreeSet::from([0]));
        assert!(dot.contains("color=red"));
        assert!(dot.contains("label=\"a\""));
        let domain = primitive_z2_domain(5, 3).unwrap();
        assert!(domain.to_dot().contains("doublecircle"));
    }
}
