//! One-relator complexes: a combinatorial graph together with an immersed
//! relator cycle, the lexicographic complexity that all inductions decrease,
//! and the Magnus subcomplex predicate.
//!
//! Relator paths reuse the word machinery: step +(e+1) traverses edge e
//! forwards, -(e+1) backwards, so free reduction is exactly backtrack
//! removal and cyclic words give rotations and winding degree for free.

use crate::word::{gen_index, letter, Alphabet, CyclicWord, Letter, Word};
use std::collections::BTreeSet;
use std::collections::VecDeque;
use std::fmt;

/// Reduced fraction with positive denominator; big enough for complexity
/// arithmetic on any complex we can hold in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: i64,
    den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Ratio {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd_i64(num.abs(), den.abs()).max(1);
        Ratio {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd_i64(b, a % b) }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Lexicographic complexity (|λ|/deg(λ) − |X_λ⁰|, −χ(Γ)). The derived order
/// compares the fields in declaration order, which is the dictionary order
/// we need. The second coordinate uses the graph's Euler characteristic, not
/// the complex's: they differ by the constant one 2-cell, and this way
/// (0, 0) is hit exactly by circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Complexity {
    pub main: Ratio,
    pub graph_part: i64,
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.main, self.graph_part)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComplexError {
    EdgeOutOfRange { step: i32 },
    BrokenPath { at: usize },
    NotClosed,
    NotReduced,
    NotCyclicallyReduced,
    BadBase(usize),
    Parse(String),
}

impl fmt::Display for ComplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexError::EdgeOutOfRange { step } => write!(f, "relator step {step} is no edge"),
            ComplexError::BrokenPath { at } => write!(f, "relator breaks at position {at}"),
            ComplexError::NotClosed => write!(f, "relator path is not closed"),
            ComplexError::NotReduced => write!(f, "relator path backtracks"),
            ComplexError::NotCyclicallyReduced => write!(f, "relator path backtracks around the seam"),
            ComplexError::BadBase(v) => write!(f, "base vertex {v} out of range"),
            ComplexError::Parse(msg) => write!(f, "bad complex text: {msg}"),
        }
    }
}

impl std::error::Error for ComplexError {}

/// Finite directed multigraph; edge e runs from `edges[e].0` to `edges[e].1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl CombGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<CombGraph, ComplexError> {
        if vertex_count == 0 {
            return Err(ComplexError::Parse("a graph needs at least one vertex".into()));
        }
        for &(o, t) in &edges {
            if o >= vertex_count || t >= vertex_count {
                return Err(ComplexError::Parse(format!("edge ({o},{t}) out of range")));
            }
        }
        Ok(CombGraph { vertex_count, edges })
    }

    pub fn rose(rank: usize) -> CombGraph {
        CombGraph {
            vertex_count: 1,
            edges: vec![(0, 0); rank],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn chi(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64
    }

    /// Where a signed step starts.
    pub fn step_origin(&self, s: Letter) -> usize {
        let (o, t) = self.edges[gen_index(s)];
        if s > 0 { o } else { t }
    }

    /// Where a signed step ends.
    pub fn step_target(&self, s: Letter) -> usize {
        let (o, t) = self.edges[gen_index(s)];
        if s > 0 { t } else { o }
    }

    pub fn check_step(&self, s: Letter) -> Result<(), ComplexError> {
        if s == 0 || gen_index(s) >= self.edges.len() {
            Err(ComplexError::EdgeOutOfRange { step: s })
        } else {
            Ok(())
        }
    }

    /// Endpoints of an edge path, verifying consecutive incidence.
    pub fn path_endpoints(&self, steps: &[Letter]) -> Result<Option<(usize, usize)>, ComplexError> {
        if steps.is_empty() {
            return Ok(None);
        }
        for &s in steps {
            self.check_step(s)?;
        }
        let start = self.step_origin(steps[0]);
        let mut cur = start;
        for (i, &s) in steps.iter().enumerate() {
            if self.step_origin(s) != cur {
                return Err(ComplexError::BrokenPath { at: i });
            }
            cur = self.step_target(s);
        }
        Ok(Some((start, cur)))
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        seen[0] = true;
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for &(o, t) in &self.edges {
                for (a, b) in [(o, t), (t, o)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        q.push_back(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Basis data for π₁(Γ, root): a BFS spanning tree plus its complement.
    pub fn pi1_basis(&self, root: usize) -> Pi1Basis {
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        let mut tree_edges = vec![false; self.edges.len()];
        while let Some(v) = q.pop_front() {
            for (e, &(o, t)) in self.edges.iter().enumerate() {
                for (from, to, s) in [(o, t, letter(e, true)), (t, o, letter(e, false))] {
                    if from == v && !seen[to] {
                        seen[to] = true;
                        parent[to] = Some((v, s));
                        tree_edges[e] = true;
                        q.push_back(to);
                    }
                }
            }
        }
        let nontree: Vec<usize> = (0..self.edges.len())
            .filter(|&e| !tree_edges[e] && seen[self.edges[e].0])
            .collect();
        let mut index_of_edge = vec![None; self.edges.len()];
        for (i, &e) in nontree.iter().enumerate() {
            index_of_edge[e] = Some(i);
        }
        Pi1Basis {
            root,
            parent,
            nontree,
            index_of_edge,
        }
    }
}

/// Spanning-tree presentation of π₁: tree edges vanish, each complementary
/// edge becomes one free generator.
pub struct Pi1Basis {
    root: usize,
    parent: Vec<Option<(usize, Letter)>>,
    nontree: Vec<usize>,
    index_of_edge: Vec<Option<usize>>,
}

impl Pi1Basis {
    pub fn rank(&self) -> usize {
        self.nontree.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nontree_edges(&self) -> &[usize] {
        &self.nontree
    }

    /// Tree path from the root to `v`, as edge steps.
    pub fn vertex_path(&self, v: usize) -> Vec<Letter> {
        let mut steps = Vec::new();
        let mut cur = v;
        while let Some((u, s)) = self.parent[cur] {
            steps.push(s);
            cur = u;
        }
        steps.reverse();
        steps
    }

    /// A closed path through the graph as a word over the basis. Tree edges
    /// contribute nothing, so any closed path based anywhere in the tree's
    /// component gives a well-defined conjugacy-correct expression.
    pub fn express(&self, steps: &[Letter]) -> Word {
        let mut out = Vec::new();
        for &s in steps {
            if let Some(i) = self.index_of_edge[gen_index(s)] {
                out.push(letter(i, s > 0));
            }
        }
        Word::from_letters(out)
    }
}

/// Vertex/edge id subsets of a parent graph, the representation of Magnus
/// subcomplex candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubComplex {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
}

impl SubComplex {
    pub fn single_vertex(v: usize) -> SubComplex {
        SubComplex {
            vertices: BTreeSet::from([v]),
            edges: BTreeSet::new(),
        }
    }

    pub fn whole(graph: &CombGraph) -> SubComplex {
        SubComplex {
            vertices: (0..graph.vertex_count()).collect(),
            edges: (0..graph.edge_count()).collect(),
        }
    }

    /// Both edge endpoints must be selected vertices.
    pub fn is_closed(&self, graph: &CombGraph) -> bool {
        self.vertices.iter().all(|&v| v < graph.vertex_count())
            && self.edges.iter().all(|&e| {
                e < graph.edge_count() && {
                    let (o, t) = graph.edge(e);
                    self.vertices.contains(&o) && self.vertices.contains(&t)
                }
            })
    }

    pub fn is_connected(&self, graph: &CombGraph) -> bool {
        let Some(&start) = self.vertices.iter().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start]);
        let mut q = VecDeque::from([start]);
        while let Some(v) = q.pop_front() {
            for &e in &self.edges {
                let (o, t) = graph.edge(e);
                for (a, b) in [(o, t), (t, o)] {
                    if a == v && self.vertices.contains(&b) && seen.insert(b) {
                        q.push_back(b);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }
}

/// A graph with one immersed relator cycle. The relator is stored freely and
/// cyclically reduced; `base` is the origin of its first step (or the 2-cell
/// attachment vertex when the relator is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneRelatorComplex {
    graph: CombGraph,
    relator: Word,
    base: usize,
}

impl OneRelatorComplex {
    pub fn new(
        graph: CombGraph,
        relator_steps: &[Letter],
        base: usize,
    ) -> Result<OneRelatorComplex, ComplexError> {
        if base >= graph.vertex_count() {
            return Err(ComplexError::BadBase(base));
        }
        let word = Word::from_letters(relator_steps.to_vec());
        if word.letters() != relator_steps {
            return Err(ComplexError::NotReduced);
        }
        match graph.path_endpoints(word.letters())? {
            None => {}
            Some((start, end)) => {
                if start != end {
                    return Err(ComplexError::NotClosed);
                }
                if start != base {
                    return Err(ComplexError::BadBase(base));
                }
                let l = word.letters();
                if l.len() > 1 && l[0] == -l[l.len() - 1] {
                    return Err(ComplexError::NotCyclicallyReduced);
                }
            }
        }
        Ok(OneRelatorComplex {
            graph,
            relator: word,
            base,
        })
    }

    pub fn graph(&self) -> &CombGraph {
        &self.graph
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// The smallest subcomplex carrying the relator: everything it touches,
    /// or just the attachment vertex for an empty relator.
    pub fn support(&self) -> SubComplex {
        let mut vertices = BTreeSet::new();
        let mut edges = BTreeSet::new();
        if self.relator.is_empty() {
            vertices.insert(self.base);
        } else {
            for &s in self.relator.letters() {
                edges.insert(gen_index(s));
                vertices.insert(self.graph.step_origin(s));
                vertices.insert(self.graph.step_target(s));
            }
        }
        SubComplex { vertices, edges }
    }

    pub fn complexity(&self) -> Complexity {
        let support = self.support();
        let main = if self.relator.is_empty() {
            Ratio::integer(-(support.vertices.len() as i64))
        } else {
            let cyc = CyclicWord::new(self.relator.letters().to_vec());
            let (_, deg) = cyc.period_degree();
            let len = self.relator.len() as i64;
            Ratio::new(len - deg as i64 * support.vertices.len() as i64, deg as i64)
        };
        Complexity {
            main,
            graph_part: -self.graph.chi(),
        }
    }

    /// The relator as an element of π₁(Γ) over the given spanning-tree
    /// basis. The word is only defined up to conjugacy, which is all the
    /// callers (primitivity, power degree) can see anyway.
    pub fn relator_in_pi1(&self, basis: &Pi1Basis) -> Word {
        basis.express(self.relator.letters())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "complex vertices={} base={}\n",
            self.graph.vertex_count(),
            self.base
        );
        for &(o, t) in &self.graph.edges {
            s.push_str(&format!("edge {o} {t}\n"));
        }
        s.push_str("relator");
        for &st in self.relator.letters() {
            s.push_str(&format!(" {st}"));
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<OneRelatorComplex, ComplexError> {
        let mut vertices = None;
        let mut base = None;
        let mut edges = Vec::new();
        let mut relator: Option<Vec<Letter>> = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("complex") => {
                    for f in parts {
                        let (k, v) = f.split_once('=').ok_or_else(|| {
                            ComplexError::Parse(format!("line {}: bad field '{f}'", ln + 1))
                        })?;
                        let v: usize = v.parse().map_err(|_| {
                            ComplexError::Parse(format!("line {}: bad number '{f}'", ln + 1))
                        })?;
                        match k {
                            "vertices" => vertices = Some(v),
                            "base" => base = Some(v),
                            _ => {
                                return Err(ComplexError::Parse(format!(
                                    "line {}: unknown field '{k}'",
                                    ln + 1
                                )))
                            }
                        }
                    }
                }
                Some("edge") => {
                    let nums: Result<Vec<usize>, _> = parts.map(str::parse).collect();
                    match nums.as_deref() {
                        Ok([o, t]) => edges.push((*o, *t)),
                        _ => {
                            return Err(ComplexError::Parse(format!(
                                "line {}: edge wants two vertex ids",
                                ln + 1
                            )))
                        }
                    }
                }
                Some("relator") => {
                    let steps: Result<Vec<Letter>, _> = parts.map(str::parse).collect();
                    relator = Some(steps.map_err(|_| {
                        ComplexError::Parse(format!("line {}: bad relator step", ln + 1))
                    })?);
                }
                Some(other) => {
                    return Err(ComplexError::Parse(format!(
                        "line {}: unknown record '{other}'",
                        ln + 1
                    )))
                }
                None => {}
            }
        }
        let vertices = vertices.ok_or_else(|| ComplexError::Parse("missing header".into()))?;
        let base = base.unwrap_or(0);
        let relator = relator.ok_or_else(|| ComplexError::Parse("missing relator line".into()))?;
        let graph = CombGraph::new(vertices, edges)?;
        OneRelatorComplex::new(graph, &relator, base)
    }
}

/// True when the subcomplex is a Magnus subcomplex: closed, connected, and
/// missing at least one relator edge.
pub fn magnus_check(x: &OneRelatorComplex, sub: &SubComplex) -> bool {
    sub.is_closed(x.graph())
        && sub.is_connected(x.graph())
        && x.relator()
            .letters()
            .iter()
            .any(|&s| !sub.edges.contains(&gen_index(s)))
}

/// Rose-based complex from a presentation. Accepts "gens: a b c ; relator:
/// <word>" and the terser "a b c | <word>". The relator is freely and
/// cyclically reduced; a warning records any trimming.
pub fn parse_presentation(
    input: &str,
) -> Result<(OneRelatorComplex, Alphabet, Vec<String>), ComplexError> {
    let (gens_part, rel_part) = if let Some(gpos) = input.find("gens:") {
        let rpos = input
            .find("relator:")
            .ok_or_else(|| ComplexError::Parse("expected 'relator:'".into()))?;
        if rpos < gpos + 5 {
            return Err(ComplexError::Parse("'relator:' must follow 'gens:'".into()));
        }
        let gens = input[gpos + 5..rpos].trim().trim_end_matches(';').trim();
        (gens.to_string(), input[rpos + 8..].trim().to_string())
    } else if let Some((l, r)) = input.split_once('|') {
        (l.trim().to_string(), r.trim().to_string())
    } else {
        return Err(ComplexError::Parse("expected 'gens:' or '|'".into()));
    };
    let names: Vec<char> = gens_part
        .split_whitespace()
        .map(|tok| {
            let mut ch = tok.chars();
            match (ch.next(), ch.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(ComplexError::Parse(format!("bad generator token '{tok}'"))),
            }
        })
        .collect::<Result<_, _>>()?;
    let alphabet =
        Alphabet::new(names).map_err(|e| ComplexError::Parse(format!("generators: {e}")))?;
    let word = alphabet
        .parse(&rel_part)
        .map_err(|e| ComplexError::Parse(format!("relator: {e}")))?;
    let mut warnings = Vec::new();
    // Trim seam backtracks only; keep the rotation the user wrote.
    let mut steps: Vec<Letter> = word.letters().to_vec();
    let mut trimmed = false;
    while steps.len() >= 2 && steps[0] == -steps[steps.len() - 1] {
        steps.pop();
        steps.remove(0);
        trimmed = true;
    }
    let relator = Word::from_letters(steps);
    if trimmed {
        warnings.push(format!(
            "relator was not cyclically reduced; using {}",
            alphabet.render(relator.letters())
        ));
    }
    let graph = CombGraph::rose(alphabet.rank());
    let x = OneRelatorComplex::new(graph, relator.letters(), 0)?;
    Ok((x, alphabet, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rose_complex(rank: usize, rel: &str) -> OneRelatorComplex {
        let ab = Alphabet::standard(rank);
        let w = ab.parse(rel).unwrap();
        OneRelatorComplex::new(CombGraph::rose(rank), w.letters(), 0).unwrap()
    }

    #[test]
    fn ratio_ordering_and_display() {
        assert!(Ratio::new(1, 3) < Ratio::new(1, 2));
        assert_eq!(Ratio::new(2, 4), Ratio::new(1, 2));
        assert_eq!(Ratio::new(3, -2), Ratio::new(-3, 2));
        assert_eq!(Ratio::integer(5).to_string(), "5");
        assert_eq!(Ratio::new(-7, 2).to_string(), "-7/2");
        assert!(Ratio::new(0, 5).is_zero());
    }

    #[test]
    fn rose_commutator_complexity() {
        let x = rose_complex(2, "abAB");
        let c = x.complexity();
        assert_eq!(c.main, Ratio::integer(3));
        assert_eq!(c.graph_part, 1);
        assert_eq!(x.support().edges.len(), 2);
        assert_eq!(x.support().vertices.len(), 1);
    }

    #[test]
    fn circle_with_winding_sits_at_zero() {
        // Triangle graph, relator winds around twice.
        let g = CombGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let x = OneRelatorComplex::new(g, &[1, 2, 3, 1, 2, 3], 0).unwrap();
        let c = x.complexity();
        assert!(c.main.is_zero());
        assert_eq!(c.graph_part, 0);
        assert!(c < rose_complex(2, "abAB").complexity());
    }

    #[test]
    fn immersion_violations_are_rejected() {
        let g = CombGraph::rose(2);
        assert_eq!(
            OneRelatorComplex::new(g.clone(), &[1, -1], 0),
            Err(ComplexError::NotReduced)
        );
        assert_eq!(
            OneRelatorComplex::new(g.clone(), &[1, 2, -1], 0),
            Err(ComplexError::NotCyclicallyReduced)
        );
        assert_eq!(
            OneRelatorComplex::new(g.clone(), &[5], 0),
            Err(ComplexError::EdgeOutOfRange { step: 5 })
        );
        let path = CombGraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(
            OneRelatorComplex::new(path, &[1], 0),
            Err(ComplexError::NotClosed)
        );
    }

    #[test]
    fn known_rank3_relator_validates() {
        let x = rose_complex(3, "babc^2BABacA^2c^3a");
        assert_eq!(x.relator().len(), 16);
        assert_eq!(x.support().edges.len(), 3);
        let c = x.complexity();
        assert_eq!(c.main, Ratio::integer(15));
        assert_eq!(c.graph_part, 2);
    }

    #[test]
    fn magnus_predicate() {
        let x = rose_complex(2, "abAB");
        assert!(magnus_check(&x, &SubComplex::single_vertex(0)));
        assert!(!magnus_check(&x, &SubComplex::whole(x.graph())));
        let mut missing_b = SubComplex::whole(x.graph());
        missing_b.edges.remove(&1);
        assert!(magnus_check(&x, &missing_b));
        // Disconnected or non-closed selections never qualify.
        let g = CombGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let y = OneRelatorComplex::new(g, &[1, 2, 3], 0).unwrap();
        let split = SubComplex {
            vertices: BTreeSet::from([0, 2]),
            edges: BTreeSet::new(),
        };
        assert!(!magnus_check(&y, &split));
        let dangling = SubComplex {
            vertices: BTreeSet::from([0]),
            edges: BTreeSet::from([0]),
        };
        assert!(!magnus_check(&y, &dangling));
    }

    #[test]
    fn complexity_invariant_under_rotation_and_inversion() {
        let g = CombGraph::new(2, vec![(0, 1), (1, 0), (0, 0)]).unwrap();
        let steps = vec![1, 2, 3, 1, 2];
        let x = OneRelatorComplex::new(g.clone(), &steps, 0).unwrap();
        let c = x.complexity();
        let cyc = CyclicWord::new(steps.clone());
        for r in 0..steps.len() {
            let rot = cyc.rotation(r);
            let base = g.step_origin(rot[0]);
            let y = OneRelatorComplex::new(g.clone(), &rot, base).unwrap();
            assert_eq!(y.complexity(), c, "rotation {r}");
        }
        let inv = Word::from_letters(steps.clone()).inverse();
        let base = g.step_origin(inv.letters()[0]);
        let y = OneRelatorComplex::new(g.clone(), inv.letters(), base).unwrap();
        assert_eq!(y.complexity(), c);
    }

    #[test]
    fn pi1_basis_expression() {
        // Theta graph: two vertices, three parallel edges.
        let g = CombGraph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let basis = g.pi1_basis(0);
        assert_eq!(basis.rank(), 2);
        // Loop e1 e2^-1 crosses one non-tree edge.
        let w = basis.express(&[1, -2]);
        assert_eq!(w.len(), 1);
        // The relator loop of a complex expresses consistently.
        let x = OneRelatorComplex::new(g, &[1, -2, 3, -2], 0).unwrap();
        let expr = x.relator_in_pi1(&basis);
        assert!(!expr.is_empty());
    }

    #[test]
    fn presentation_formats_and_warnings() {
        let (x, ab, warn) = parse_presentation("gens: a b ; relator: abAB").unwrap();
        assert_eq!(ab.rank(), 2);
        assert!(warn.is_empty());
        assert_eq!(x.relator().len(), 4);

        let (y, _, _) = parse_presentation("a b | abAB").unwrap();
        assert_eq!(x, y);

        let (_, _, warn) = parse_presentation("a b | b aa B").unwrap();
        assert_eq!(warn.len(), 1, "cyclic trimming is reported");

        assert!(parse_presentation("a b ; abAB").is_err());
        let (empty, _, _) = parse_presentation("a b | 1").unwrap();
        assert!(empty.relator().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let g = CombGraph::new(2, vec![(0, 1), (1, 0), (0, 0)]).unwrap();
        let x = OneRelatorComplex::new(g, &[1, 2, 3], 0).unwrap();
        let text = x.to_text();
        let back = OneRelatorComplex::from_text(&text).unwrap();
        assert_eq!(x, back);
        assert!(OneRelatorComplex::from_text("complex vertices=1\nrelator 3").is_err());
    }
}
