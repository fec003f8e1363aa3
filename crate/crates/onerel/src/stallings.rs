//! Folded core graphs for finitely generated subgroups of a free group.
//!
//! A subgroup is stored as its based core graph: a folded graph over the
//! ambient alphabet with a basepoint, pruned so that only the basepoint may
//! have degree one (the stem). Folded means transitions are deterministic,
//! so membership is a single path read, bases come from a spanning tree, and
//! intersections of conjugates are components of the transition product.

use crate::word::{gen_index, letter, Alphabet, CyclicWord, Letter, Word};
use std::collections::{BTreeSet, VecDeque};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    Parse(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::Parse(msg) => write!(f, "bad graph text: {msg}"),
        }
    }
}

impl std::error::Error for GraphError {}

fn slot(l: Letter) -> usize {
    2 * gen_index(l) + usize::from(l < 0)
}

/// A folded based graph over `rank` generators. `succ[v][2g]` is the target
/// of the g-edge leaving `v`; `succ[v][2g+1]` the vertex reached by reading
/// g^-1 (the source of a g-edge into `v`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    rank: usize,
    succ: Vec<Vec<Option<usize>>>,
    base: usize,
}

impl CoreGraph {
    /// Core of the subgroup generated by `words`, with basepoint stem kept.
    pub fn from_words(rank: usize, words: &[Word]) -> CoreGraph {
        let mut b = Builder::new(rank);
        for w in words {
            b.add_loop(w);
        }
        b.finish().pruned(true)
    }

    /// Folded quotient of the |w|-cycle under a vertex partition given as
    /// class indices (`classes[i]` for cycle vertex i, the basepoint being
    /// vertex 0). Hanging trees are kept: the result is the raw folded
    /// quotient, not its pruned core.
    pub fn from_cycle_quotient(rank: usize, w: &Word, classes: &[usize]) -> CoreGraph {
        assert_eq!(classes.len(), w.len(), "one class per cycle vertex");
        if w.is_empty() {
            return CoreGraph {
                rank,
                succ: vec![vec![None; 2 * rank]],
                base: 0,
            };
        }
        let mut b = Builder::new(rank);
        let n = w.len();
        let k = classes.iter().copied().max().map_or(0, |m| m + 1);
        for _ in 1..k {
            b.fresh();
        }
        b.base = classes[0];
        for (i, &l) in w.letters().iter().enumerate() {
            let (u, v) = (classes[i], classes[(i + 1) % n]);
            if l > 0 {
                b.edges.push((u, gen_index(l), v));
            } else {
                b.edges.push((v, gen_index(l), u));
            }
        }
        b.finish()
    }

    /// Folded quotient identifying vertices `a` and `b`. No pruning, so
    /// repeated merging walks exactly the folded partition quotients.
    pub fn merged(&self, a: usize, b: usize) -> CoreGraph {
        assert!(a < self.vertex_count() && b < self.vertex_count());
        let mut bld = Builder::new(self.rank);
        for _ in 1..self.vertex_count() {
            bld.fresh();
        }
        bld.base = self.base;
        for v in 0..self.succ.len() {
            for g in 0..self.rank {
                if let Some(w) = self.succ[v][2 * g] {
                    bld.edges.push((v, g, w));
                }
            }
        }
        bld.union(a, b);
        bld.finish()
    }

    /// Raw based signature, stems and hanging trees included.
    pub fn raw_based_signature(&self) -> Vec<i64> {
        self.bfs_signature_from_base()
    }

    /// The whole free group: one vertex, a loop per generator.
    pub fn rose(rank: usize) -> CoreGraph {
        let mut succ = vec![vec![None; 2 * rank]];
        for g in 0..rank {
            succ[0][2 * g] = Some(0);
            succ[0][2 * g + 1] = Some(0);
        }
        CoreGraph { rank, succ, base: 0 }
    }

    pub fn rank_alphabet(&self) -> usize {
        self.rank
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ
            .iter()
            .map(|row| (0..self.rank).filter(|&g| row[2 * g].is_some()).count())
            .sum()
    }

    /// V - E.
    pub fn euler(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64
    }

    /// Rank of the fundamental group; the graph is connected by construction.
    pub fn subgroup_rank(&self) -> usize {
        (1 - self.euler()) as usize
    }

    pub fn is_cyclic(&self) -> bool {
        self.subgroup_rank() == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.subgroup_rank() == 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.succ[v].iter().filter(|s| s.is_some()).count()
    }

    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.succ[v][slot(l)]
    }

    pub fn read_from(&self, start: usize, letters: &[Letter]) -> Option<usize> {
        let mut v = start;
        for &l in letters {
            v = self.step(v, l)?;
        }
        Some(v)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.read_from(self.base, w.letters()) == Some(self.base)
    }

    /// BFS spanning tree from `start`, visiting edge slots in alphabet
    /// order. Returns `parent[v] = (u, letter read u -> v)`.
    fn spanning_tree(&self, start: usize) -> Vec<Option<(usize, Letter)>> {
        let mut parent = vec![None; self.succ.len()];
        let mut seen = vec![false; self.succ.len()];
        seen[start] = true;
        let mut q = VecDeque::new();
        q.push_back(start);
        while let Some(u) = q.pop_front() {
            for g in 0..self.rank {
                for l in [letter(g, true), letter(g, false)] {
                    if let Some(v) = self.step(u, l) {
                        if !seen[v] {
                            seen[v] = true;
                            parent[v] = Some((u, l));
                            q.push_back(v);
                        }
                    }
                }
            }
        }
        parent
    }

    fn tree_word(&self, parent: &[Option<(usize, Letter)>], v: usize) -> Word {
        let mut letters = Vec::new();
        let mut cur = v;
        while let Some((u, l)) = parent[cur] {
            letters.push(l);
            cur = u;
        }
        letters.reverse();
        Word::from_letters(letters)
    }

    /// Word read along the spanning tree from the basepoint to `v`.
    pub fn vertex_word(&self, v: usize) -> Word {
        let parent = self.spanning_tree(self.base);
        self.tree_word(&parent, v)
    }

    /// Free basis of the subgroup: one loop per non-tree edge, edges sorted
    /// by (generator, source, target) in their positive form.
    pub fn basis(&self) -> Vec<Word> {
        let (edges, parent) = self.basis_edges();
        edges
            .iter()
            .map(|&(v, g, w)| {
                self.tree_word(&parent, v)
                    .concat(&Word::single(letter(g, true)))
                    .concat(&self.tree_word(&parent, w).inverse())
            })
            .collect()
    }

    /// Non-tree edges in positive form plus the tree they complement.
    #[allow(clippy::type_complexity)]
    fn basis_edges(&self) -> (Vec<(usize, usize, usize)>, Vec<Option<(usize, Letter)>>) {
        let parent = self.spanning_tree(self.base);
        let mut tree: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        for (v, p) in parent.iter().enumerate() {
            if let Some((u, l)) = p {
                let e = if *l > 0 {
                    (*u, gen_index(*l), v)
                } else {
                    (v, gen_index(*l), *u)
                };
                tree.insert(e);
            }
        }
        let mut rest = Vec::new();
        for v in 0..self.succ.len() {
            for g in 0..self.rank {
                if let Some(w) = self.succ[v][2 * g] {
                    if !tree.contains(&(v, g, w)) {
                        rest.push((v, g, w));
                    }
                }
            }
        }
        rest.sort_by_key(|&(v, g, w)| (g, v, w));
        (rest, parent)
    }

    /// Expresses `w` over the basis returned by [`CoreGraph::basis`]: the
    /// result is a word whose letter i stands for basis element i. `None`
    /// when `w` is not in the subgroup.
    pub fn express(&self, w: &Word) -> Option<Word> {
        let (edges, parent) = self.basis_edges();
        let mut index = std::collections::BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            index.insert(*e, i);
        }
        let mut tree: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        for (v, p) in parent.iter().enumerate() {
            if let Some((u, l)) = p {
                tree.insert(if *l > 0 {
                    (*u, gen_index(*l), v)
                } else {
                    (v, gen_index(*l), *u)
                });
            }
        }
        let mut out = Vec::new();
        let mut v = self.base;
        for &l in w.letters() {
            let u = self.step(v, l)?;
            let e = if l > 0 {
                (v, gen_index(l), u)
            } else {
                (u, gen_index(l), v)
            };
            if !tree.contains(&e) {
                let i = *index.get(&e).expect("edge is tree or basis");
                out.push(letter(i, l > 0));
            }
            v = u;
        }
        if v == self.base {
            Some(Word::from_letters(out))
        } else {
            None
        }
    }

    /// Drops degree-one vertices; the basepoint survives only when
    /// `keep_base`. When the basepoint is pruned the least surviving vertex
    /// takes over as a nominal basepoint. A graph that prunes away entirely
    /// collapses to a single basepoint vertex.
    pub fn pruned(&self, keep_base: bool) -> CoreGraph {
        let n = self.succ.len();
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for v in 0..n {
                if !alive[v] || (keep_base && v == self.base) {
                    continue;
                }
                let deg = (0..2 * self.rank)
                    .filter(|&s| matches!(self.succ[v][s], Some(w) if alive[w]))
                    .count();
                if deg <= 1 {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            if alive[v] {
                map[v] = next;
                next += 1;
            }
        }
        if next == 0 {
            return CoreGraph {
                rank: self.rank,
                succ: vec![vec![None; 2 * self.rank]],
                base: 0,
            };
        }
        let mut succ = vec![vec![None; 2 * self.rank]; next];
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for s in 0..2 * self.rank {
                if let Some(w) = self.succ[v][s] {
                    if alive[w] {
                        succ[map[v]][s] = Some(map[w]);
                    }
                }
            }
        }
        let base = if alive[self.base] { map[self.base] } else { 0 };
        CoreGraph { rank: self.rank, succ, base }
    }

    fn bfs_signature(&self, start: usize) -> Vec<i64> {
        let n = self.succ.len();
        let mut order = vec![usize::MAX; n];
        order[start] = 0;
        let mut discovered = vec![start];
        let mut q = VecDeque::new();
        q.push_back(start);
        while let Some(u) = q.pop_front() {
            for s in 0..2 * self.rank {
                if let Some(v) = self.succ[u][s] {
                    if order[v] == usize::MAX {
                        order[v] = discovered.len();
                        discovered.push(v);
                        q.push_back(v);
                    }
                }
            }
        }
        let mut sig = vec![self.rank as i64, discovered.len() as i64];
        for &v in &discovered {
            for s in 0..2 * self.rank {
                sig.push(match self.succ[v][s] {
                    Some(w) if order[w] != usize::MAX => order[w] as i64,
                    _ => -1,
                });
            }
        }
        sig
    }

    /// Canonical form of the based graph (subgroup equality key).
    pub fn based_signature(&self) -> Vec<i64> {
        self.pruned(true).bfs_signature_from_base()
    }

    fn bfs_signature_from_base(&self) -> Vec<i64> {
        self.bfs_signature(self.base)
    }

    /// Canonical form ignoring the basepoint (conjugacy key). Stems are
    /// pruned first, so two subgroups are conjugate exactly when these agree.
    pub fn conjugacy_signature(&self) -> Vec<i64> {
        self.pruned(false).raw_unbased_signature()
    }

    /// Basepoint-free canonical form of the graph as it stands, without
    /// pruning. Distinguishes graphs that would collapse to the same core.
    fn raw_unbased_signature(&self) -> Vec<i64> {
        (0..self.succ.len())
            .map(|v| self.bfs_signature(v))
            .min()
            .expect("at least one vertex")
    }

    pub fn same_subgroup(&self, other: &CoreGraph) -> bool {
        self.based_signature() == other.based_signature()
    }

    pub fn conjugate_subgroup(&self, other: &CoreGraph) -> bool {
        self.conjugacy_signature() == other.conjugacy_signature()
    }

    /// All `(vertex, rotation)` pairs at which the rotated cyclic word reads
    /// as a closed path. For each hit, `stem * rotation-prefix^-1`-style
    /// conjugators can be assembled by the caller.
    pub fn closed_readings(&self, cyc: &CyclicWord) -> Vec<(usize, usize)> {
        let rotations = cyc.len().max(1);
        let mut out = Vec::new();
        for v in 0..self.succ.len() {
            for r in 0..rotations {
                let rot = cyc.rotation(r);
                if self.read_from(v, &rot) == Some(v) {
                    out.push((v, r));
                }
            }
        }
        out
    }

    /// Flat text form, one record per line.
    pub fn to_text(&self) -> String {
        let ab = Alphabet::standard(self.rank);
        let mut s = format!(
            "graph rank={} vertices={} base={}\n",
            self.rank,
            self.vertex_count(),
            self.base
        );
        for v in 0..self.succ.len() {
            for g in 0..self.rank {
                if let Some(w) = self.succ[v][2 * g] {
                    s.push_str(&format!("edge {} {} {}\n", v, ab.name(g), w));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CoreGraph, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| GraphError::Parse("empty input".into()))?;
        let mut rank = None;
        let mut vertices = None;
        let mut base = None;
        let mut fields = head.split_whitespace();
        if fields.next() != Some("graph") {
            return Err(GraphError::Parse("expected 'graph' header".into()));
        }
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| GraphError::Parse(format!("bad header field '{f}'")))?;
            let v: usize = v
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad number in '{f}'")))?;
            match k {
                "rank" => rank = Some(v),
                "vertices" => vertices = Some(v),
                "base" => base = Some(v),
                _ => return Err(GraphError::Parse(format!("unknown header field '{k}'"))),
            }
        }
        let (rank, nv, base) = match (rank, vertices, base) {
            (Some(r), Some(n), Some(b)) if b < n && n > 0 => (r, n, b),
            _ => return Err(GraphError::Parse("header needs rank, vertices, base".into())),
        };
        let ab = Alphabet::standard(rank.min(26));
        if rank > 26 {
            return Err(GraphError::Parse("text form supports rank <= 26".into()));
        }
        let mut succ = vec![vec![None; 2 * rank]; nv];
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "edge" {
                return Err(GraphError::Parse(format!("bad edge line '{line}'")));
            }
            let u: usize = parts[1]
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad vertex '{}'", parts[1])))?;
            let w: usize = parts[3]
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad vertex '{}'", parts[3])))?;
            let c = parts[2]
                .chars()
                .next()
                .filter(|_| parts[2].len() == 1)
                .ok_or_else(|| GraphError::Parse(format!("bad label '{}'", parts[2])))?;
            let g = ab
                .index_of(c)
                .ok_or_else(|| GraphError::Parse(format!("label '{c}' outside rank")))?;
            if u >= nv || w >= nv {
                return Err(GraphError::Parse("edge endpoint out of range".into()));
            }
            if succ[u][2 * g].is_some() || succ[w][2 * g + 1].is_some() {
                return Err(GraphError::Parse("graph is not folded".into()));
            }
            succ[u][2 * g] = Some(w);
            succ[w][2 * g + 1] = Some(u);
        }
        Ok(CoreGraph { rank, succ, base })
    }

    /// DOT rendering. Arrows point in the positive letter direction; reading
    /// against an arrow is the inverse letter. The basepoint is doubled.
    pub fn to_dot(&self, name: &str) -> String {
        let ab = Alphabet::standard(self.rank);
        let mut s = format!("digraph {name} {{\n  rankdir=LR;\n");
        for v in 0..self.succ.len() {
            let shape = if v == self.base { "doublecircle" } else { "circle" };
            s.push_str(&format!("  {v} [shape={shape}];\n"));
        }
        for v in 0..self.succ.len() {
            for g in 0..self.rank {
                if let Some(w) = self.succ[v][2 * g] {
                    s.push_str(&format!("  {v} -> {w} [label=\"{}\"];\n", ab.name(g)));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Unfolded accumulation followed by folding. Edges live in one global list
/// in positive form; folding repeatedly merges the two targets (or two
/// sources) of equal-labelled edges at a vertex until transitions are
/// deterministic. Exact parallel duplicates disappear in the dedup step.
struct Builder {
    rank: usize,
    parent: Vec<usize>,
    edges: Vec<(usize, usize, usize)>,
    base: usize,
}

impl Builder {
    fn new(rank: usize) -> Builder {
        Builder {
            rank,
            parent: vec![0],
            edges: Vec::new(),
            base: 0,
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[b] = a;
        }
    }

    fn fresh(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        v
    }

    fn add_loop(&mut self, w: &Word) {
        if w.is_empty() {
            return;
        }
        let mut cur = self.base;
        let n = w.len();
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == n { self.base } else { self.fresh() };
            if l > 0 {
                self.edges.push((cur, gen_index(l), next));
            } else {
                self.edges.push((next, gen_index(l), cur));
            }
            cur = next;
        }
    }

    fn fold(&mut self) {
        loop {
            for e in 0..self.edges.len() {
                let (u, g, v) = self.edges[e];
                self.edges[e] = (self.find(u), g, self.find(v));
            }
            self.edges.sort_unstable();
            self.edges.dedup();
            let mut merged = false;
            let mut out: std::collections::BTreeMap<(usize, usize), usize> =
                std::collections::BTreeMap::new();
            let mut inc: std::collections::BTreeMap<(usize, usize), usize> =
                std::collections::BTreeMap::new();
            let edges = std::mem::take(&mut self.edges);
            for &(u, g, v) in &edges {
                if let Some(&w) = out.get(&(u, g)) {
                    if w != v {
                        self.union(w, v);
                        merged = true;
                    }
                } else {
                    out.insert((u, g), v);
                }
                if let Some(&w) = inc.get(&(v, g)) {
                    if w != u {
                        self.union(w, u);
                        merged = true;
                    }
                } else {
                    inc.insert((v, g), u);
                }
            }
            self.edges = edges;
            if !merged {
                return;
            }
        }
    }

    fn finish(mut self) -> CoreGraph {
        self.fold();
        let base = self.find(self.base);
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut adj: std::collections::BTreeMap<usize, Vec<(usize, usize, bool)>> =
            std::collections::BTreeMap::new();
        for &(u, g, v) in &self.edges {
            adj.entry(u).or_default().push((g, v, true));
            adj.entry(v).or_default().push((g, u, false));
        }
        let mut order = vec![base];
        map[base] = 0;
        let mut q = VecDeque::new();
        q.push_back(base);
        while let Some(u) = q.pop_front() {
            if let Some(nbrs) = adj.get(&u) {
                for &(_, v, _) in nbrs {
                    if map[v] == usize::MAX {
                        map[v] = order.len();
                        order.push(v);
                        q.push_back(v);
                    }
                }
            }
        }
        let mut succ = vec![vec![None; 2 * self.rank]; order.len()];
        for &(u, g, v) in &self.edges {
            debug_assert!(map[u] != usize::MAX && map[v] != usize::MAX);
            debug_assert!(succ[map[u]][2 * g].is_none(), "folded graph");
            succ[map[u]][2 * g] = Some(map[v]);
            succ[map[v]][2 * g + 1] = Some(map[u]);
        }
        CoreGraph {
            rank: self.rank,
            succ,
            base: 0,
        }
    }
}

/// One essential component of the transition product of two cores: the class
/// of intersections `A ∩ g B g^-1` for the double coset the component
/// represents.
#[derive(Debug, Clone)]
pub struct IntersectionClass {
    /// Generators of the representative member, as ambient words inside A.
    pub gens: Vec<Word>,
    /// Witness g with member = A ∩ g B g^-1 (p * q^-1 over the stems).
    pub witness: Word,
    pub rank: usize,
    /// Component contained a diagonal pair (only meaningful for self
    /// products, where it flags the trivial coset A itself).
    pub is_diagonal: bool,
}

/// All essential components of core(a) x core(b). One entry per component,
/// no conjugacy dedup here, components are in bijection with double cosets
/// carrying nontrivial intersection. `mark_diagonal` tags components
/// containing a pair (v, v); pass it when `a` and `b` present the same
/// subgroup core so the coset of the identity can be recognized.
pub fn intersection_classes(
    a: &CoreGraph,
    b: &CoreGraph,
    mark_diagonal: bool,
) -> Vec<IntersectionClass> {
    let rank = a.rank;
    assert_eq!(rank, b.rank, "products need a common alphabet");
    let na = a.vertex_count();
    let nb = b.vertex_count();
    let idx = |i: usize, j: usize| i * nb + j;

    // Union-find over product vertices.
    let mut uf: Vec<usize> = (0..na * nb).collect();
    fn find(uf: &mut Vec<usize>, mut v: usize) -> usize {
        while uf[v] != v {
            uf[v] = uf[uf[v]];
            v = uf[v];
        }
        v
    }
    for i in 0..na {
        for j in 0..nb {
            for g in 0..rank {
                if let (Some(i2), Some(j2)) = (a.succ[i][2 * g], b.succ[j][2 * g]) {
                    let (x, y) = (find(&mut uf, idx(i, j)), find(&mut uf, idx(i2, j2)));
                    if x != y {
                        uf[x] = y;
                    }
                }
            }
        }
    }

    let mut comps: std::collections::BTreeMap<usize, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for i in 0..na {
        for j in 0..nb {
            let r = find(&mut uf, idx(i, j));
            comps.entry(r).or_default().push((i, j));
        }
    }

    let mut out = Vec::new();
    for (_, verts) in comps {
        let has_diag = mark_diagonal && verts.iter().any(|&(i, j)| i == j);
        // Build the component subgraph and prune to its essential part.
        let vset: BTreeSet<(usize, usize)> = verts.iter().copied().collect();
        let mut alive: BTreeSet<(usize, usize)> = vset.clone();
        loop {
            let mut remove = Vec::new();
            for &(i, j) in &alive {
                let mut deg = 0;
                for g in 0..rank {
                    for s in [2 * g, 2 * g + 1] {
                        if let (Some(i2), Some(j2)) = (a.succ[i][s], b.succ[j][s]) {
                            if alive.contains(&(i2, j2)) {
                                deg += 1;
                            }
                        }
                    }
                }
                if deg <= 1 {
                    remove.push((i, j));
                }
            }
            if remove.is_empty() {
                break;
            }
            for v in remove {
                alive.remove(&v);
            }
        }
        if alive.is_empty() {
            continue;
        }
        let (i0, j0) = *alive.iter().next().unwrap();

        // Spanning tree over the pruned component.
        let mut parent: std::collections::BTreeMap<(usize, usize), ((usize, usize), Letter)> =
            std::collections::BTreeMap::new();
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        seen.insert((i0, j0));
        let mut q = VecDeque::new();
        q.push_back((i0, j0));
        let mut edge_count = 0usize;
        while let Some((i, j)) = q.pop_front() {
            for g in 0..rank {
                for l in [letter(g, true), letter(g, false)] {
                    let s = slot(l);
                    if let (Some(i2), Some(j2)) = (a.succ[i][s], b.succ[j][s]) {
                        if alive.contains(&(i2, j2)) && !seen.contains(&(i2, j2)) {
                            seen.insert((i2, j2));
                            parent.insert((i2, j2), ((i, j), l));
                            q.push_back((i2, j2));
                        }
                    }
                }
            }
        }
        // Count positive edges inside the pruned component.
        for &(i, j) in &alive {
            for g in 0..rank {
                if let (Some(i2), Some(j2)) = (a.succ[i][2 * g], b.succ[j][2 * g]) {
                    if alive.contains(&(i2, j2)) {
                        edge_count += 1;
                    }
                }
            }
        }
        let comp_rank = edge_count + 1 - alive.len();
        if comp_rank == 0 {
            continue;
        }

        let tree_word = |v: (usize, usize)| -> Word {
            let mut letters = Vec::new();
            let mut cur = v;
            while let Some(&(u, l)) = parent.get(&cur) {
                letters.push(l);
                cur = u;
            }
            letters.reverse();
            Word::from_letters(letters)
        };

        // Non-tree edges in positive form, sorted, then loop words.
        let mut tree_edges: BTreeSet<((usize, usize), usize, (usize, usize))> = BTreeSet::new();
        for (&v, &(u, l)) in &parent {
            tree_edges.insert(if l > 0 { (u, gen_index(l), v) } else { (v, gen_index(l), u) });
        }
        let mut loops = Vec::new();
        let mut nontree: Vec<((usize, usize), usize, (usize, usize))> = Vec::new();
        for &(i, j) in &alive {
            for g in 0..rank {
                if let (Some(i2), Some(j2)) = (a.succ[i][2 * g], b.succ[j][2 * g]) {
                    if alive.contains(&(i2, j2)) && !tree_edges.contains(&((i, j), g, (i2, j2))) {
                        nontree.push(((i, j), g, (i2, j2)));
                    }
                }
            }
        }
        nontree.sort();
        for (v, g, w2) in nontree {
            loops.push(
                tree_word(v)
                    .concat(&Word::single(letter(g, true)))
                    .concat(&tree_word(w2).inverse()),
            );
        }
        debug_assert_eq!(loops.len(), comp_rank);

        let stem_a = a.vertex_word(i0);
        let stem_b = b.vertex_word(j0);
        let gens = loops
            .iter()
            .map(|l| l.conjugated_by(&stem_a))
            .collect::<Vec<_>>();
        let witness = stem_a.concat(&stem_b.inverse());
        out.push(IntersectionClass {
            gens,
            witness,
            rank: comp_rank,
            is_diagonal: has_diag,
        });
    }
    out
}

/// Looks for a finitely generated `L` (as a core graph, every vertex of
/// degree >= 2, at most `max_edges` edges) whose intersections with
/// conjugates of the subgroup of `g` sum to more reduced rank than `L` has,
/// i.e. chi(core(G x L)) < chi(L). Returns the first refuting L in
/// enumeration order, or `None` when the subgroup is strongly inert up to
/// the budget.
pub fn refute_inertness(g: &CoreGraph, max_edges: usize) -> Option<CoreGraph> {
    let rank = g.rank;
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue: VecDeque<CoreGraph> = VecDeque::new();
    let start = CoreGraph {
        rank,
        succ: vec![vec![None; 2 * rank]],
        base: 0,
    };
    seen.insert(start.raw_unbased_signature());
    queue.push_back(start);
    while let Some(cur) = queue.pop_front() {
        let nv = cur.vertex_count();
        if cur.edge_count() >= 1 && (0..nv).all(|v| cur.degree(v) >= 2) {
            let classes = intersection_classes(g, &cur, false);
            let chi_product: i64 = classes.iter().map(|c| 1 - c.rank as i64).sum();
            let chi_l = cur.euler();
            if chi_product < chi_l {
                return Some(cur);
            }
        }
        if cur.edge_count() >= max_edges {
            continue;
        }
        for u in 0..nv {
            for gidx in 0..rank {
                if cur.succ[u][2 * gidx].is_some() {
                    continue;
                }
                for v in 0..=nv {
                    let mut next = cur.clone();
                    let target = if v == nv {
                        next.succ.push(vec![None; 2 * rank]);
                        nv
                    } else {
                        if next.succ[v][2 * gidx + 1].is_some() {
                            continue;
                        }
                        v
                    };
                    next.succ[u][2 * gidx] = Some(target);
                    next.succ[target][2 * gidx + 1] = Some(u);
                    let sig = next.raw_unbased_signature();
                    if seen.insert(sig) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    None
}

/// Expression of subgroup elements over an arbitrary generating tuple, via
/// folding with carried labels: every edge of the subdivided rose holds a
/// word over the tuple's letters, and each fold composes a correction into
/// the arcs at the identified vertex so that path reading keeps producing a
/// valid expression.
pub struct TupleExpresser {
    tuple: Vec<Word>,
    adj: Vec<Vec<(Letter, usize, Word)>>,
    base: usize,
}

impl TupleExpresser {
    pub fn new(tuple: &[Word]) -> TupleExpresser {
        let mut e = TupleExpresser {
            tuple: tuple.to_vec(),
            adj: vec![Vec::new()],
            base: 0,
        };
        for (i, w) in tuple.iter().enumerate() {
            if w.is_empty() {
                continue;
            }
            let n = w.len();
            let mut cur = e.base;
            for (k, &l) in w.letters().iter().enumerate() {
                let next = if k + 1 == n {
                    e.base
                } else {
                    e.adj.push(Vec::new());
                    e.adj.len() - 1
                };
                let label = if k + 1 == n {
                    Word::single(letter(i, true))
                } else {
                    Word::empty()
                };
                e.adj[cur].push((l, next, label.clone()));
                e.adj[next].push((-l, cur, label.inverse()));
                cur = next;
            }
        }
        e.fold();
        e
    }

    fn fold(&mut self) {
        loop {
            let Some((u, k1, k2)) = self.find_foldable() else {
                return;
            };
            let (l1, x, g1) = self.adj[u][k1].clone();
            let (_, y, g2) = self.adj[u][k2].clone();
            if x == y {
                // Parallel duplicate: drop the second arc and its twin. The
                // twin is a distinct entry even for loops, since a loop's two
                // halves carry opposite letters.
                self.adj[u].remove(k2);
                let gi = g2.inverse();
                if let Some(t) = self.adj[x]
                    .iter()
                    .position(|(l, v, g)| *l == -l1 && *v == u && *g == gi)
                {
                    self.adj[x].remove(t);
                } else {
                    debug_assert!(false, "twin arc must exist");
                }
                continue;
            }
            // Keep the basepoint: expressions are read from it, so its
            // hidden path correction must stay trivial.
            if y == self.base {
                let c = g2.inverse().concat(&g1);
                self.merge(x, y, &c);
            } else {
                let c = g1.inverse().concat(&g2);
                self.merge(y, x, &c);
            }
        }
    }

    fn find_foldable(&self) -> Option<(usize, usize, usize)> {
        for u in 0..self.adj.len() {
            for k1 in 0..self.adj[u].len() {
                for k2 in k1 + 1..self.adj[u].len() {
                    if self.adj[u][k1].0 == self.adj[u][k2].0 {
                        return Some((u, k1, k2));
                    }
                }
            }
        }
        None
    }

    /// Moves all arcs at `y` onto `x`, correcting labels by `c = g1^-1 g2`:
    /// out-arcs pick up `c` on the left, in-arcs `c^-1` on the right, loops
    /// both.
    fn merge(&mut self, y: usize, x: usize, c: &Word) {
        let moved = std::mem::take(&mut self.adj[y]);
        for (l, z, h) in moved {
            if z == y {
                self.adj[x].push((l, x, h.conjugated_by(c)));
            } else {
                let new = c.concat(&h);
                // Fix the twin at z.
                let old_inv = h.inverse();
                if let Some(t) = self.adj[z]
                    .iter()
                    .position(|(l2, v2, g2)| *l2 == -l && *v2 == y && *g2 == old_inv)
                {
                    self.adj[z][t] = (-l, x, new.inverse());
                } else {
                    debug_assert!(false, "twin arc must exist");
                }
                self.adj[x].push((l, z, new));
            }
        }
        if self.base == y {
            self.base = x;
        }
    }

    /// Expression of `w` over the tuple letters, or `None` when `w` is not
    /// in the subgroup the tuple generates. Substituting the tuple back into
    /// the expression always returns exactly `w`.
    pub fn express(&self, w: &Word) -> Option<Word> {
        let mut v = self.base;
        let mut acc = Word::empty();
        for &l in w.letters() {
            let arc = self.adj[v].iter().find(|(al, _, _)| *al == l)?;
            acc = acc.concat(&arc.2);
            v = arc.1;
        }
        if v != self.base {
            return None;
        }
        debug_assert_eq!(acc.substitute(&self.tuple), *w);
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;

    fn w(s: &str) -> Word {
        Alphabet::standard(3).parse(s).unwrap()
    }

    fn core(gens: &[&str]) -> CoreGraph {
        let words: Vec<Word> = gens.iter().map(|s| w(s)).collect();
        CoreGraph::from_words(2, &words)
    }

    #[test]
    fn membership_by_path_reading() {
        let g = core(&["aa", "b"]);
        assert!(g.contains(&w("aa")));
        assert!(g.contains(&w("baab")));
        assert!(g.contains(&w("A^2b")));
        assert!(!g.contains(&w("a")));
        assert!(!g.contains(&w("ab")));
        assert_eq!(g.subgroup_rank(), 2);
    }

    #[test]
    fn rank_counts_nontree_edges() {
        let g = core(&["aa", "b", "abA"]);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.subgroup_rank(), 3);
    }

    #[test]
    fn folding_is_confluent_over_insertion_order() {
        let gens = ["abA", "aa", "bab", "aBa"];
        let mut sigs = BTreeSet::new();
        for rot in 0..gens.len() {
            let rotated: Vec<Word> = (0..gens.len())
                .map(|i| w(gens[(i + rot) % gens.len()]))
                .collect();
            sigs.insert(CoreGraph::from_words(2, &rotated).based_signature());
        }
        assert_eq!(sigs.len(), 1);
    }

    #[test]
    fn basis_expresses_and_round_trips() {
        let g = core(&["aa", "bab"]);
        let basis = g.basis();
        assert_eq!(basis.len(), 2);
        for (i, b) in basis.iter().enumerate() {
            let e = g.express(b).unwrap();
            assert_eq!(e, Word::single(letter(i, true)), "basis word {i}");
        }
        let member = w("aabab aa").pow(2);
        let e = g.express(&member).unwrap();
        assert_eq!(e.substitute(&basis), member);
        assert!(g.express(&w("ab")).is_none());
    }

    #[test]
    fn conjugacy_ignores_stems_and_base() {
        let h1 = core(&["aa", "b"]);
        let conj = w("ab");
        let h2 = CoreGraph::from_words(
            2,
            &[w("aa").conjugated_by(&conj), w("b").conjugated_by(&conj)],
        );
        assert!(h1.conjugate_subgroup(&h2));
        assert!(!h1.same_subgroup(&h2));
        let other = core(&["aa", "ab"]);
        assert!(!h1.conjugate_subgroup(&other));
    }

    #[test]
    fn intersection_of_cyclic_groups() {
        let a = CoreGraph::from_words(1, &[Alphabet::standard(1).parse("aa").unwrap()]);
        let b = CoreGraph::from_words(1, &[Alphabet::standard(1).parse("aaa").unwrap()]);
        let classes = intersection_classes(&a, &b, false);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].rank, 1);
        assert_eq!(
            classes[0].gens[0].cyclic_reduce().0.len(),
            6,
            "<a^2> meets <a^3> in <a^6>"
        );
    }

    #[test]
    fn self_product_marks_diagonal_and_finds_offdiagonal() {
        let a = core(&["aa", "b"]);
        let classes = intersection_classes(&a, &a, true);
        let diag: Vec<_> = classes.iter().filter(|c| c.is_diagonal).collect();
        let off: Vec<_> = classes.iter().filter(|c| !c.is_diagonal).collect();
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].rank, 2);
        assert_eq!(off.len(), 1);
        assert_eq!(off[0].rank, 1, "A cap A^a = <a^2>");
        assert!(!off[0].witness.is_empty());
        // The witness really conjugates: member in A and in A^g.
        let g = &off[0].witness;
        for m in &off[0].gens {
            assert!(a.contains(m));
            assert!(a.contains(&m.conjugated_by(&g.inverse())));
        }
    }

    #[test]
    fn hanna_neumann_style_bound_on_products() {
        let pairs = [
            (vec!["aa", "b"], vec!["ab", "ba"]),
            (vec!["aa", "bab"], vec!["aa", "b"]),
            (vec!["abA", "bb"], vec!["a", "bb"]),
        ];
        for (x, y) in pairs {
            let gx = core(&x.iter().map(|s| *s).collect::<Vec<_>>());
            let gy = core(&y);
            let rrx = gx.subgroup_rank().saturating_sub(1);
            let rry = gy.subgroup_rank().saturating_sub(1);
            let total: usize = intersection_classes(&gx, &gy, false)
                .iter()
                .map(|c| c.rank.saturating_sub(1))
                .sum();
            assert!(
                total <= rrx * rry,
                "strengthened Hanna Neumann bound for {x:?} vs {y:?}"
            );
        }
    }

    #[test]
    fn inertness_refuted_for_the_known_example() {
        let g = core(&["aa", "b", "abA"]);
        let lam = refute_inertness(&g, 6).expect("refutation exists");
        let classes = intersection_classes(&g, &lam, false);
        let chi_product: i64 = classes.iter().map(|c| 1 - c.rank as i64).sum();
        assert!(chi_product < lam.euler());
    }

    #[test]
    fn rank_two_subgroup_is_strongly_inert_within_budget() {
        let g = core(&["aa", "b"]);
        assert!(refute_inertness(&g, 6).is_none());
    }

    #[test]
    fn closed_readings_locate_conjugates() {
        let g = core(&["aa", "b"]);
        let cyc = w("aa").cyclic_reduce().0;
        let hits = g.closed_readings(&cyc);
        assert!(!hits.is_empty());
        for (v, r) in hits {
            assert_eq!(g.read_from(v, &cyc.rotation(r)), Some(v));
        }
        let none = w("ab").cyclic_reduce().0;
        assert!(g.closed_readings(&none).is_empty());
    }

    #[test]
    fn text_round_trip_and_dot() {
        let g = core(&["aa", "bab"]);
        let text = g.to_text();
        let back = CoreGraph::from_text(&text).unwrap();
        assert!(g.same_subgroup(&back));
        assert_eq!(g.based_signature(), back.based_signature());
        let dot = g.to_dot("k");
        assert!(dot.contains("doublecircle"));
        assert!(CoreGraph::from_text("graph rank=1 vertices=1").is_err());
        assert!(CoreGraph::from_text("graph rank=1 vertices=1 base=0\nedge 0 a 0\nedge 0 a 0").is_err());
    }

    #[test]
    fn tuple_expression_round_trips() {
        // Conjugate basis where greedy Nielsen reduction stalls.
        let tuple = vec![w("baaaB"), w("bb")];
        let e = TupleExpresser::new(&tuple);
        let target = w("baaaB bb baaaB").pow(2);
        let expr = e.express(&target).unwrap();
        assert_eq!(expr.substitute(&tuple), target);
        assert!(e.express(&w("a")).is_none());
        // Redundant tuples are fine.
        let tuple = vec![w("ab"), w("b"), w("ab")];
        let e = TupleExpresser::new(&tuple);
        let expr = e.express(&w("a")).unwrap();
        assert_eq!(expr.substitute(&tuple), w("a"));
    }

    #[test]
    fn rose_is_everything() {
        let r = CoreGraph::rose(3);
        assert!(r.contains(&w("abcABC")));
        assert_eq!(r.subgroup_rank(), 3);
    }
}
