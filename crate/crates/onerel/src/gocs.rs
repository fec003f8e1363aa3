//! The graph of cyclic stabilisers of an HNN splitting, and the
//! Baumslag-Solitar detection pipeline built on top of it.
//!
//! For a splitting G = H *_psi with free vertex group H and associated
//! subgroups A, B < H, long geodesic segments in the Bass-Serre tree have
//! cyclic stabilisers once the splitting is stable. Those stabilisers fall
//! into finitely many H-conjugacy classes, each contained in A or in B up to
//! conjugacy. The graph collects one vertex per class and side, generated by
//! the maximal cyclic subgroup of the side containing it (its hull), and one
//! edge per essential conjugation between powers of two hulls:
//!
//! * a vertex edge `nu_v^k = xi nu_w^l xi^-1` with `xi` in H,
//! * a stable edge where `xi` crosses the stable letter once.
//!
//! A cyclically alternating cycle in the graph multiplies out to an element
//! `mu` with `mu^-1 nu^k mu = nu^l`, which generates a Baumslag-Solitar
//! subgroup BS(k, l) together with `nu`. Conversely, when the graph admits
//! no such cycle at any level of the one-relator tower, the group has none.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::complex::OneRelatorComplex;
use crate::covers::{hnn_coords, splitting_from_domain, HnnCoords};
use crate::hierarchy::{build_tower, HierarchyError, TowerStrategy};
use crate::stability::{
    default_cap, stable_number, Regime, SplitContext, StabilityError, StabilityReport,
};
use crate::stallings::{intersection_classes, CoreGraph};
use crate::word::{gcd, gen_index, letter, Alphabet, Letter, Word};

#[derive(Debug)]
pub enum GocsError {
    Stability(StabilityError),
    /// The vertex group is not free, so roots and hulls are not computable
    /// by Stallings methods.
    VertexNotFree,
    /// The stability iteration hit its cap without terminating, leaving the
    /// closure depth unknown.
    Unstable { cap: usize },
    /// A geodesic turn class has rank two or more; the graph construction
    /// only covers splittings where these are cyclic.
    NoncyclicTurn { rank: usize, witness: Word },
}

impl fmt::Display for GocsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GocsError::Stability(e) => write!(f, "{e}"),
            GocsError::VertexNotFree => write!(f, "vertex group is not free"),
            GocsError::Unstable { cap } => {
                write!(f, "stability iteration did not terminate within {cap} levels")
            }
            GocsError::NoncyclicTurn { rank, .. } => {
                write!(f, "a turn stabiliser has rank {rank}, expected at most 1")
            }
        }
    }
}

impl std::error::Error for GocsError {}

impl From<StabilityError> for GocsError {
    fn from(e: StabilityError) -> GocsError {
        GocsError::Stability(e)
    }
}

/// Which associated subgroup a vertex lives in: A is the lower side, B the
/// upper one (the stable letter conjugates A onto B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn tag(self) -> char {
        match self {
            Side::A => 'A',
            Side::B => 'B',
        }
    }
}

/// One stabiliser class: the maximal cyclic subgroup of its side containing
/// a class representative. All words are in computation coordinates of the
/// originating `SplitContext`.
#[derive(Debug, Clone)]
pub struct GocsVertex {
    pub side: Side,
    /// Generator of the hull.
    pub gen: Word,
    /// Primitive root of `gen` in the ambient free group; `gen = root^power`.
    pub root: Word,
    pub power: usize,
    /// Conjugacy key over the side's own basis, used for dedup.
    key: Vec<Letter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    /// Conjugator lies in the vertex group.
    Vertex,
    /// Conjugator crosses the stable letter once.
    Stable,
}

/// A verified relation `nu_from^k = conj nu_to^l conj^-1`. For vertex edges
/// `conj` is a vertex-group word; for stable edges it is an HNN word whose
/// stable letter sits at generator index `ctx.rank`.
#[derive(Debug, Clone)]
pub struct GocsEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub conj: Word,
    pub k: i64,
    pub l: i64,
}

#[derive(Debug)]
pub struct GocsGraph {
    pub vertices: Vec<GocsVertex>,
    pub edges: Vec<GocsEdge>,
    /// Stable number of the splitting: the closure depth that was needed.
    pub depth: usize,
    /// Some edge family was cut off at the enumeration cap.
    pub truncated: bool,
}

/// Caps for the construction. `chain_cap` bounds the stability iteration,
/// `edge_cap` the number of parallel edges kept per vertex pair.
#[derive(Debug, Clone, Copy)]
pub struct GocsOptions {
    pub chain_cap: usize,
    pub edge_cap: usize,
}

impl GocsOptions {
    fn for_context(ctx: &SplitContext) -> GocsOptions {
        GocsOptions {
            chain_cap: default_cap(ctx).max(default_cap(&ctx.inverted())),
            edge_cap: 64,
        }
    }
}

/// Display alphabet extended by one letter for the stable letter, picking
/// the first name that does not collide with a vertex generator.
pub fn hnn_alphabet(ctx: &SplitContext) -> Alphabet {
    let mut names: Vec<char> = (0..ctx.rank).map(|g| ctx.display.name(g)).collect();
    let stable = "tsmnopqr"
        .chars()
        .find(|c| !names.contains(c))
        .expect("ran out of stable letter names");
    names.push(stable);
    Alphabet::new(names).expect("display names stay distinct")
}

fn t_count(w: &Word, t: usize) -> usize {
    w.letters().iter().filter(|&&l| gen_index(l) == t).count()
}

fn push_letter(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&-l) {
        out.pop();
    } else {
        out.push(l);
    }
}

/// Britton reduction of an HNN word over `ctx`: pinches `t v t^-1` with
/// `v` in A to `psi(v)` and `t^-1 v t` with `v` in B to `psi^-1(v)` until
/// none remain. The result is empty exactly when the word is trivial in
/// the HNN extension.
pub fn britton_reduce(ctx: &SplitContext, w: &Word) -> Word {
    let t = ctx.rank;
    let mut letters: Vec<Letter> = w.letters().to_vec();
    loop {
        let mut out: Vec<Letter> = Vec::new();
        let mut tpos: Vec<usize> = Vec::new();
        let mut changed = false;
        for &l in &letters {
            if gen_index(l) != t {
                push_letter(&mut out, l);
                continue;
            }
            if let Some(&p) = tpos.last() {
                if out[p] == -l {
                    let seg = Word::from_letters(out[p + 1..].iter().copied());
                    let img = if out[p] > 0 {
                        ctx.psi(&seg)
                    } else {
                        ctx.psi_inv(&seg)
                    };
                    if let Some(img) = img {
                        out.truncate(p);
                        tpos.pop();
                        for &il in img.letters() {
                            push_letter(&mut out, il);
                        }
                        changed = true;
                        continue;
                    }
                }
            }
            tpos.push(out.len());
            out.push(l);
        }
        if !changed {
            return Word::from_letters(out);
        }
        letters = out;
    }
}

/// Britton reduction up to cyclic permutation: rotations that let a pinch
/// wrap around the end are applied while they lower the stable letter
/// count. A result still containing the stable letter is hyperbolic on the
/// Bass-Serre tree.
pub fn britton_cyclic_reduce(ctx: &SplitContext, w: &Word) -> Word {
    let t = ctx.rank;
    let mut cur = britton_reduce(ctx, w);
    'outer: loop {
        let mut ls: Vec<Letter> = cur.letters().to_vec();
        while ls.len() >= 2 && *ls.first().unwrap() == -*ls.last().unwrap() {
            ls.pop();
            ls.remove(0);
        }
        cur = Word::from_letters(ls);
        if t_count(&cur, t) == 0 {
            return cur;
        }
        let n = cur.len();
        for s in 0..n {
            if gen_index(cur.letters()[s]) != t {
                continue;
            }
            let rot = Word::from_letters(
                cur.letters()[s..]
                    .iter()
                    .chain(&cur.letters()[..s])
                    .copied(),
            );
            let red = britton_reduce(ctx, &rot);
            if t_count(&red, t) < t_count(&cur, t) {
                cur = red;
                continue 'outer;
            }
        }
        return cur;
    }
}

/// `w = u r^p u^-1` with `r` cyclically reduced and primitive, `p >= 1`
/// (for nonempty input).
fn root_decompose(w: &Word) -> (Word, Word, usize) {
    let (cyc, conj) = w.cyclic_reduce();
    let (root, p) = cyc.period_degree();
    (conj, root, p)
}

/// A conjugator taking `b` to `a` up to orientation: `a = c b^eps c^-1`.
/// In a free group the sign is unique, since no nontrivial element is
/// conjugate to its own inverse.
fn cyclic_conjugator(a: &Word, b: &Word) -> Option<(Word, i64)> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (ca, ua) = a.cyclic_reduce();
    let wa = ca.to_word();
    for (bw, eps) in [(b.clone(), 1i64), (b.inverse(), -1)] {
        let (cb, ub) = bw.cyclic_reduce();
        let wb = cb.to_word();
        if wb.len() != wa.len() {
            return None;
        }
        for s in 0..wb.len() {
            if cb.rotation(s) == wa.letters() {
                let pre = Word::from_letters(wb.letters()[..s].iter().copied());
                let c = ua.concat(&pre.inverse()).concat(&ub.inverse());
                debug_assert_eq!(*a, bw.conjugated_by(&c));
                return Some((c, eps));
            }
        }
    }
    None
}

/// Exponent sets `{ s : pre r^s post in the subgroup }` are empty, a single
/// integer, or a full arithmetic progression, because the difference of two
/// solutions conjugates into the cyclic group `<r^post> meet S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Hits {
    None,
    Single(i64),
    /// `base + step Z` with `0 <= base < step`.
    All { base: i64, step: i64 },
}

/// Solve `pre r^s post in core` over all integers `s`, with `r` nontrivial.
///
/// The scan window is sound: once `|s|` exceeds the cancellation range of
/// `pre` and `post`, the reduced word walks a fixed loop on the folded core,
/// so membership is eventually periodic with period at most the vertex
/// count. Any solution therefore has a representative inside the window,
/// and so does its progression step.
fn power_hits(core: &CoreGraph, pre: &Word, r: &Word, post: &Word) -> Hits {
    debug_assert!(!r.is_empty());
    let rl = r.len() as i64;
    let stab = (pre.len() + post.len()) as i64 / rl + 2;
    let period = core.vertex_count() as i64 + 2;
    let win = 2 * (stab + 2 * period + 2);
    let mut hits: Vec<i64> = Vec::new();
    for s in -win..=win {
        let w = pre.concat(&r.pow(s as i32)).concat(post);
        if core.contains(&w) {
            hits.push(s);
        }
    }
    match hits.len() {
        0 => Hits::None,
        1 => Hits::Single(hits[0]),
        _ => {
            let step = hits[1] - hits[0];
            debug_assert!(hits.windows(2).all(|p| p[1] - p[0] == step));
            Hits::All {
                base: hits[0].rem_euclid(step),
                step,
            }
        }
    }
}

/// Conjugacy key of a side element over the side's own basis: the least
/// rotation of its cyclic reduction, minimised against the inverse class.
fn side_key(ctx: &SplitContext, side: Side, gen: &Word) -> Option<Vec<Letter>> {
    let over_basis = match side {
        Side::A => ctx.express_a(gen),
        Side::B => ctx.express_b(gen),
    }?;
    let (cyc, _) = over_basis.cyclic_reduce();
    let fwd = cyc.to_word().letters().to_vec();
    let bwd = cyc.inverse_class().to_word().letters().to_vec();
    Some(fwd.min(bwd))
}

/// Hull of a nontrivial side element: the maximal cyclic subgroup of the
/// side containing it, generated by the least power of the ambient root
/// that stays inside.
fn hull(ctx: &SplitContext, side: Side, w: &Word) -> Option<GocsVertex> {
    if w.is_empty() {
        return None;
    }
    let core = match side {
        Side::A => &ctx.a_core,
        Side::B => &ctx.b_core,
    };
    debug_assert!(core.contains(w), "hull seed must lie in its side");
    let (_, _, p) = root_decompose(w);
    let (conj, root, _) = root_decompose(w);
    let relem = root.conjugated_by(&conj);
    let mut power = p;
    for d in 1..=p {
        if p % d == 0 && core.contains(&relem.pow(d as i32)) {
            power = d;
            break;
        }
    }
    let gen = relem.pow(power as i32);
    let key = side_key(ctx, side, &gen).expect("hull generator lies in its side");
    Some(GocsVertex {
        side,
        gen,
        root: relem,
        power,
        key,
    })
}

/// Collect the stabiliser classes: the sides themselves when cyclic, the
/// turn classes (off-diagonal self-intersections pushed through psi), and
/// the cyclic discards of both stability iterations.
fn collect_vertices(
    ctx: &SplitContext,
    up: &StabilityReport,
    down: &StabilityReport,
) -> Result<Vec<GocsVertex>, GocsError> {
    let mut seeds: Vec<(Side, Word)> = Vec::new();
    if ctx.a_core.is_cyclic() {
        seeds.push((Side::A, ctx.a_core.basis().remove(0)));
    }
    if ctx.b_core.is_cyclic() {
        seeds.push((Side::B, ctx.b_core.basis().remove(0)));
    }
    for class in intersection_classes(&ctx.b_core, &ctx.b_core, true) {
        if class.is_diagonal || class.rank == 0 {
            continue;
        }
        if class.rank >= 2 {
            return Err(GocsError::NoncyclicTurn {
                rank: class.rank,
                witness: class.witness,
            });
        }
        let gen = ctx.psi_inv(&class.gens[0]).expect("turn class lies in B");
        seeds.push((Side::A, gen));
    }
    for class in intersection_classes(&ctx.a_core, &ctx.a_core, true) {
        if class.is_diagonal || class.rank == 0 {
            continue;
        }
        if class.rank >= 2 {
            return Err(GocsError::NoncyclicTurn {
                rank: class.rank,
                witness: class.witness,
            });
        }
        let gen = ctx.psi(&class.gens[0]).expect("turn class lies in A");
        seeds.push((Side::B, gen));
    }
    for d in &up.discards {
        seeds.push((Side::B, d.generator.clone()));
    }
    for d in &down.discards {
        seeds.push((Side::A, d.generator.clone()));
    }

    let mut seen: BTreeSet<(Side, Vec<Letter>)> = BTreeSet::new();
    let mut out: Vec<GocsVertex> = Vec::new();
    for (side, w) in seeds {
        if let Some(v) = hull(ctx, side, &w) {
            if seen.insert((v.side, v.key.clone())) {
                out.push(v);
            }
        }
    }
    out.sort_by(|x, y| (x.side, &x.key).cmp(&(y.side, &y.key)));
    Ok(out)
}

fn normalize_edge(mut e: GocsEdge) -> GocsEdge {
    if e.k < 0 {
        e.k = -e.k;
        e.l = -e.l;
    }
    e
}

/// Vertex edges between distinct hulls with conjugate roots. Matching
/// roots give a coset `<root_v> c0` of candidate conjugators, which the
/// two hull powers refine into `gcd(p_v, p_w)` genuinely distinct parallel
/// edges. Self pairs are skipped: a conjugator between a hull and itself
/// either lies in the hull or witnesses the same class twice.
fn vertex_edges(
    ctx: &SplitContext,
    verts: &[GocsVertex],
    edge_cap: usize,
    truncated: &mut bool,
) -> Vec<GocsEdge> {
    let mut edges = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let (vi, vj) = (&verts[i], &verts[j]);
            let Some((c0, eps)) = cyclic_conjugator(&vi.root, &vj.root) else {
                continue;
            };
            let g = gcd(vi.power as i64, vj.power as i64);
            let count = (g as usize).min(edge_cap);
            if count < g as usize {
                *truncated = true;
            }
            for off in 0..count {
                let conj = c0.concat(&vj.root.pow(off as i32));
                let k = vj.power as i64 / g;
                let l = eps * (vi.power as i64 / g);
                assert_eq!(
                    vi.gen.pow(k as i32),
                    vj.gen.pow(l as i32).conjugated_by(&conj),
                    "vertex edge relation must hold in the free group"
                );
                let e = GocsEdge {
                    from: i,
                    to: j,
                    kind: EdgeKind::Vertex,
                    conj,
                    k,
                    l,
                };
                // Cross-side edges point from the A side.
                let e = if vi.side == Side::B && vj.side == Side::A {
                    GocsEdge {
                        from: e.to,
                        to: e.from,
                        conj: e.conj.inverse(),
                        k: e.l,
                        l: e.k,
                        kind: e.kind,
                    }
                } else {
                    e
                };
                edges.push(normalize_edge(e));
            }
        }
    }
    edges
}

/// Stable edges. For an ordered pair (v, w), including v = w, a conjugator
/// `beta t` with `beta` in the vertex group satisfies a power relation
/// exactly when some power of `nu_w` lands in A, its psi image shares a
/// root with `nu_v`, and the coset equation `root_v^s d0 in B` has
/// solutions. Solution sets are arithmetic progressions; residues modulo
/// `gcd(power_v, p_c)` enumerate the distinct double cosets.
fn stable_edges(
    ctx: &SplitContext,
    verts: &[GocsVertex],
    edge_cap: usize,
    truncated: &mut bool,
) -> Vec<GocsEdge> {
    let t = ctx.rank;
    let mut edges = Vec::new();
    for vi in 0..verts.len() {
        for wi in 0..verts.len() {
            let (v, w) = (&verts[vi], &verts[wi]);
            let (uw, rw, pw) = root_decompose(&w.gen);
            debug_assert_eq!(pw, w.power);
            let l0 = match power_hits(&ctx.a_core, &uw, &rw, &uw.inverse()) {
                Hits::None | Hits::Single(_) => continue,
                Hits::All { step, .. } => {
                    debug_assert_eq!(step.rem_euclid(step), 0);
                    let m = pw as i64;
                    step / gcd(step, m) * m / m.max(1) * m.signum().max(1);
                    lcm(step, m) / m
                }
            };
            let c = ctx.psi(&w.gen.pow(l0 as i32)).expect("power lies in A");
            let (uc, rc, pc) = root_decompose(&c);
            let relem_c = rc.conjugated_by(&uc);
            let Some((d0, eps)) = cyclic_conjugator(&v.root, &relem_c) else {
                continue;
            };
            let (uv, rv, _) = root_decompose(&v.root);
            let beta_hits = power_hits(&ctx.b_core, &uv, &rv, &uv.inverse().concat(&d0));
            let g2 = gcd(v.power as i64, pc as i64);
            let sigmas: Vec<i64> = match beta_hits {
                Hits::None => continue,
                Hits::Single(s) => vec![s],
                Hits::All { base, step } => {
                    let classes = g2 / gcd(step, g2);
                    let kept = (classes as usize).min(edge_cap);
                    if kept < classes as usize {
                        *truncated = true;
                    }
                    (0..kept as i64).map(|n| base + step * n).collect()
                }
            };
            for sigma in sigmas {
                let beta = v.root.pow(sigma as i32).concat(&d0);
                debug_assert!(ctx.b_core.contains(&beta));
                let k = pc as i64 / g2;
                let big_l = eps * l0 * (v.power as i64) / g2;
                let img = ctx
                    .psi(&w.gen.pow(big_l as i32))
                    .expect("multiple of the entry power lies in A");
                assert_eq!(
                    v.gen.pow(k as i32),
                    img.conjugated_by(&beta),
                    "stable edge relation must hold in the vertex group"
                );
                let conj = beta.concat(&Word::single(letter(t, true)));
                let e = GocsEdge {
                    from: vi,
                    to: wi,
                    kind: EdgeKind::Stable,
                    conj,
                    k,
                    l: big_l,
                };
                let e = if v.side == Side::B && w.side == Side::A {
                    GocsEdge {
                        from: e.to,
                        to: e.from,
                        conj: e.conj.inverse(),
                        k: e.l,
                        l: e.k,
                        kind: e.kind,
                    }
                } else {
                    e
                };
                edges.push(normalize_edge(e));
            }
        }
    }
    edges
}

fn lcm(a: i64, b: i64) -> i64 {
    (a / gcd(a, b) * b).abs()
}

pub fn build_gocs(ctx: &SplitContext) -> Result<GocsGraph, GocsError> {
    build_gocs_with(ctx, GocsOptions::for_context(ctx))
}

pub fn build_gocs_with(ctx: &SplitContext, opts: GocsOptions) -> Result<GocsGraph, GocsError> {
    if ctx.regime != Regime::FreeVertex {
        return Err(GocsError::VertexNotFree);
    }
    let up = stable_number(ctx, opts.chain_cap);
    let Some(depth) = up.stable else {
        return Err(GocsError::Unstable { cap: up.cap });
    };
    let down = stable_number(&ctx.inverted(), opts.chain_cap);
    if down.stable.is_none() {
        return Err(GocsError::Unstable { cap: down.cap });
    }
    let vertices = collect_vertices(ctx, &up, &down)?;
    let mut truncated = false;
    let mut edges = vertex_edges(ctx, &vertices, opts.edge_cap, &mut truncated);
    edges.extend(stable_edges(ctx, &vertices, opts.edge_cap, &mut truncated));
    Ok(GocsGraph {
        vertices,
        edges,
        depth,
        truncated,
    })
}

impl GocsGraph {
    pub fn side_count(&self, side: Side) -> usize {
        self.vertices.iter().filter(|v| v.side == side).count()
    }

    pub fn kind_count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_dot(&self, ctx: &SplitContext) -> String {
        let hnn = hnn_alphabet(ctx);
        let mut out = String::from("digraph gocs {\n  rankdir=LR;\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "  v{i} [label=\"{}: {}\"];\n",
                v.side.tag(),
                ctx.render(&v.gen)
            ));
        }
        for e in &self.edges {
            let kind = match e.kind {
                EdgeKind::Vertex => "vertex",
                EdgeKind::Stable => "stable",
            };
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{} {}:{} {}\"];\n",
                e.from,
                e.to,
                kind,
                e.k,
                e.l,
                e.conj.render(&hnn)
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Isomorphism-invariant description: vertices coloured by side and
    /// iteratively refined by incident edge data, then the minimal relabel
    /// over the remaining colour symmetries. Basis-independent, so rebuilds
    /// from Nielsen-equivalent generating tuples agree.
    pub fn canonical_form(&self) -> String {
        let n = self.vertices.len();
        let mut color: Vec<usize> = self
            .vertices
            .iter()
            .map(|v| match v.side {
                Side::A => 0,
                Side::B => 1,
            })
            .collect();
        loop {
            let mut sigs: Vec<(usize, Vec<(u8, EdgeKind, i64, i64, usize)>)> = color
                .iter()
                .map(|&c| (c, Vec::new()))
                .collect();
            for e in &self.edges {
                sigs[e.from].1.push((0, e.kind, e.k, e.l, color[e.to]));
                sigs[e.to].1.push((1, e.kind, e.k, e.l, color[e.from]));
            }
            for s in &mut sigs {
                s.1.sort();
            }
            let mut ids: BTreeMap<&(usize, Vec<(u8, EdgeKind, i64, i64, usize)>), usize> =
                BTreeMap::new();
            for s in &sigs {
                let next = ids.len();
                ids.entry(s).or_insert(next);
            }
            let fresh: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
            if fresh == color {
                break;
            }
            color = fresh;
        }

        // Enumerate relabelings compatible with the colouring and keep the
        // least rendering. Colour classes are tiny in practice; give up on
        // exactness beyond a few thousand permutations.
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in color.iter().enumerate() {
            classes.entry(c).or_default().push(v);
        }
        let mut budget: usize = 5040;
        for class in classes.values() {
            budget /= (1..=class.len()).product::<usize>().max(1);
        }
        let orders: Vec<Vec<Vec<usize>>> = classes
            .values()
            .map(|class| {
                if budget == 0 {
                    vec![class.clone()]
                } else {
                    permutations(class)
                }
            })
            .collect();
        let mut best: Option<String> = None;
        let mut pick = vec![0usize; orders.len()];
        loop {
            let mut label = vec![0usize; n];
            let mut next = 0;
            for (ci, class) in orders.iter().enumerate() {
                for &v in &class[pick[ci]] {
                    label[v] = next;
                    next += 1;
                }
            }
            let cand = self.render_canonical(&label);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
            let mut ci = 0;
            loop {
                if ci == orders.len() {
                    return best.unwrap_or_default();
                }
                pick[ci] += 1;
                if pick[ci] < orders[ci].len() {
                    break;
                }
                pick[ci] = 0;
                ci += 1;
            }
        }
    }

    fn render_canonical(&self, label: &[usize]) -> String {
        let mut vl: Vec<String> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| format!("v{} {}", label[i], v.side.tag()))
            .collect();
        vl.sort();
        let mut el: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    EdgeKind::Vertex => 'h',
                    EdgeKind::Stable => 't',
                };
                format!("e {} {} {} {}:{}", label[e.from], label[e.to], kind, e.k, e.l)
            })
            .collect();
        el.sort();
        vl.extend(el);
        vl.join("\n")
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// A verified Baumslag-Solitar witness: `conj^-1 gen^k conj = gen^l` holds
/// in the HNN extension, `conj` acts hyperbolically, and `k >= 1`,
/// `|k| <= |l|`. `conj` is an HNN word (stable letter at index `ctx.rank`),
/// `gen` a vertex-group word.
#[derive(Debug, Clone)]
pub struct BsWitness {
    pub conj: Word,
    pub gen: Word,
    pub k: i64,
    pub l: i64,
    /// Traversed edges as (edge index, forward) pairs.
    pub cycle: Vec<(usize, bool)>,
}

impl BsWitness {
    /// The witness subgroup is a copy of Z^2 exactly when the powers agree
    /// up to sign.
    pub fn z2(&self) -> bool {
        self.k.abs() == self.l.abs()
    }
}

fn edge_tail(e: &GocsEdge, fwd: bool) -> usize {
    if fwd {
        e.from
    } else {
        e.to
    }
}

fn edge_head(e: &GocsEdge, fwd: bool) -> usize {
    if fwd {
        e.to
    } else {
        e.from
    }
}

/// Find a cyclically alternating cycle and multiply it into a witness.
/// A single stable self-loop is already one (its conjugator is Britton
/// reduced and crosses the stable letter); otherwise the shortest directed
/// cycle whose edges alternate between the two kinds, including across the
/// wrap, does the job. No vertex powers are needed in between: alternation
/// keeps consecutive conjugators from cancelling.
pub fn find_alternating_word(ctx: &SplitContext, graph: &GocsGraph) -> Option<BsWitness> {
    for (ei, e) in graph.edges.iter().enumerate() {
        if e.kind == EdgeKind::Stable && e.from == e.to {
            return Some(witness_from_cycle(ctx, graph, vec![(ei, true)]));
        }
    }

    let ne = graph.edges.len();
    let states: Vec<(usize, bool)> = (0..ne).flat_map(|e| [(e, true), (e, false)]).collect();
    let sid = |e: usize, fwd: bool| e * 2 + usize::from(!fwd);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for &(e, fwd) in &states {
        for &(e2, fwd2) in &states {
            if graph.edges[e2].kind != graph.edges[e].kind
                && edge_tail(&graph.edges[e2], fwd2) == edge_head(&graph.edges[e], fwd)
            {
                succ[sid(e, fwd)].push(sid(e2, fwd2));
            }
        }
    }

    let mut best: Option<Vec<usize>> = None;
    for start in 0..states.len() {
        if let Some(cap) = best.as_ref().map(|b| b.len()) {
            if cap == 2 {
                break;
            }
        }
        let mut dist = vec![usize::MAX; states.len()];
        let mut parent = vec![usize::MAX; states.len()];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in &succ[u] {
                if v == start {
                    let mut path = vec![u];
                    let mut cur = u;
                    while cur != start {
                        cur = parent[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                        best = Some(path);
                    }
                    break 'bfs;
                }
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
    }

    let cycle: Vec<(usize, bool)> = best?
        .into_iter()
        .map(|s| (s / 2, s % 2 == 0))
        .collect();
    Some(witness_from_cycle(ctx, graph, cycle))
}

fn witness_from_cycle(
    ctx: &SplitContext,
    graph: &GocsGraph,
    cycle: Vec<(usize, bool)>,
) -> BsWitness {
    let t = ctx.rank;
    let start = edge_tail(&graph.edges[cycle[0].0], cycle[0].1);
    let nu = graph.vertices[start].gen.clone();
    let mut mu = Word::empty();
    let (mut num, mut den, mut req) = (1i64, 1i64, 1i64);
    for &(ei, fwd) in &cycle {
        let e = &graph.edges[ei];
        mu = mu.concat(&if fwd { e.conj.clone() } else { e.conj.inverse() });
        let (top, bot) = if fwd { (e.l, e.k) } else { (e.k, e.l) };
        num *= top;
        den *= bot;
        let g = gcd(num, den);
        num /= g;
        den /= g;
        if den < 0 {
            num = -num;
            den = -den;
        }
        req = lcm(req, den);
    }
    let mut k = req;
    let mut l = num * (req / den);
    let mut gen = nu;
    let mut conj = mu;

    let relation = |c: &Word, g: &Word, k: i64, l: i64| {
        c.inverse()
            .concat(&g.pow(k as i32))
            .concat(c)
            .concat(&g.pow(-l as i32))
    };
    assert!(
        britton_reduce(ctx, &relation(&conj, &gen, k, l)).is_empty(),
        "cycle relation must verify by Britton reduction"
    );
    assert!(
        t_count(&britton_cyclic_reduce(ctx, &conj), t) >= 1,
        "alternating conjugator must act hyperbolically"
    );

    if k.abs() > l.abs() {
        conj = conj.inverse();
        std::mem::swap(&mut k, &mut l);
    }
    if k < 0 {
        gen = gen.inverse();
        k = -k;
        l = -l;
    }
    debug_assert!(britton_reduce(ctx, &relation(&conj, &gen, k, l)).is_empty());
    BsWitness {
        conj,
        gen,
        k,
        l,
        cycle,
    }
}

/// Outcome of the detection pipeline.
#[derive(Debug)]
pub enum BsVerdict {
    Contains(BsCertificate),
    Absent,
    Unknown { reason: String },
}

/// A witness pushed down to the input presentation. `gen` and `conj` are
/// words over the input complex's fundamental group basis and satisfy
/// `conj^-1 gen^k conj = gen^l` in the presented group.
#[derive(Debug)]
pub struct BsCertificate {
    /// Tower level where the witness was found.
    pub level: usize,
    pub k: i64,
    pub l: i64,
    pub gen: Word,
    pub conj: Word,
    /// Witness data at the found level, in that level's computation
    /// coordinates; the conjugator's stable letter sits at the splitting's
    /// vertex rank.
    pub gen_level: Word,
    pub conj_level: Word,
    /// Whether the relation was re-verified against the input presentation
    /// by Britton reduction at the bottom level.
    pub verified: bool,
}

impl BsCertificate {
    pub fn z2(&self) -> bool {
        self.k.abs() == self.l.abs()
    }
}

#[derive(Debug)]
pub struct BsReport {
    pub verdict: BsVerdict,
    /// Number of tower levels below the input.
    pub levels: usize,
    /// Levels that could not be analysed, with the reason.
    pub notes: Vec<(usize, String)>,
}

/// Decide whether the group of a one-relator complex contains a
/// Baumslag-Solitar subgroup. Walks the one-relator tower; at each level
/// the splitting must have a free vertex group, a finite stable number and
/// cyclic turn classes, in which case the graph of cyclic stabilisers
/// either yields a verified witness or certifies the level clean. A clean
/// run down to the hierarchy base proves absence; any unanalysable level
/// leaves the answer unknown.
pub fn bs_detect(x: &OneRelatorComplex) -> Result<BsReport, HierarchyError> {
    let tower = build_tower(x, TowerStrategy::FirstFound)?;
    let mut notes: Vec<(usize, String)> = Vec::new();
    let mut ctxs: Vec<Option<SplitContext>> = Vec::new();
    let mut found: Option<(usize, SplitContext, BsWitness)> = None;

    for (li, level) in tower.levels.iter().enumerate() {
        let split = splitting_from_domain(&level.domain).expect("tower domains satisfy the axioms");
        let ctx = match SplitContext::new(&split) {
            Ok(c) => c,
            Err(e) => {
                notes.push((li, e.to_string()));
                ctxs.push(None);
                continue;
            }
        };
        if found.is_none() {
            match build_gocs(&ctx) {
                Ok(graph) => {
                    if graph.truncated {
                        notes.push((li, "edge enumeration truncated".into()));
                    }
                    if let Some(wit) = find_alternating_word(&ctx, &graph) {
                        found = Some((li, ctx.clone_shallow(), wit));
                    }
                }
                Err(e) => notes.push((li, e.to_string())),
            }
        }
        ctxs.push(Some(ctx));
    }

    let levels = tower.levels.len();
    if let Some((li, ctx, wit)) = found {
        let cert = translate_witness(&tower.levels, li, &ctx, &wit, ctxs[0].as_ref());
        return Ok(BsReport {
            verdict: BsVerdict::Contains(cert),
            levels,
            notes,
        });
    }
    let verdict = match notes.first() {
        Some((li, reason)) => BsVerdict::Unknown {
            reason: format!("level {li}: {reason}"),
        },
        None => BsVerdict::Absent,
    };
    Ok(BsReport {
        verdict,
        levels,
        notes,
    })
}

/// Push a witness from computation coordinates at `level` down to the
/// input complex basis, one HNN embedding at a time, re-verifying at the
/// bottom when the bottom context is available.
fn translate_witness(
    levels: &[crate::hierarchy::TowerLevel],
    level: usize,
    ctx: &SplitContext,
    wit: &BsWitness,
    bottom: Option<&SplitContext>,
) -> BsCertificate {
    let coords: Vec<HnnCoords> = (0..=level)
        .map(|k| hnn_coords(&levels[k].domain).expect("tower domains satisfy the axioms"))
        .collect();
    let names_rank = coords[level].vertex_rank;
    let section: Vec<Word> = (0..ctx.rank)
        .map(|g| ctx.vertex_word(&Word::single(letter(g, true))))
        .chain([Word::single(letter(names_rank, true))])
        .collect();
    let mut gen = ctx.vertex_word(&wit.gen);
    let mut conj = wit.conj.substitute(&section);
    for k in (0..=level).rev() {
        let mut images = coords[k].vertex_images.clone();
        images.push(coords[k].stable_image.clone());
        gen = gen.substitute(&images);
        conj = conj.substitute(&images);
    }

    let mut verified = false;
    if let Some(ctx0) = bottom {
        let rel = conj
            .inverse()
            .concat(&gen.pow(wit.k as i32))
            .concat(&conj)
            .concat(&gen.pow(-wit.l as i32));
        let hnn = rel.substitute(&coords[0].base_images);
        let nr = coords[0].vertex_rank;
        let project: Vec<Word> = (0..nr)
            .map(|g| ctx0.project_word(&Word::single(letter(g, true))))
            .chain([Word::single(letter(ctx0.rank, true))])
            .collect();
        let reduced = britton_reduce(ctx0, &hnn.substitute(&project));
        assert!(
            reduced.is_empty(),
            "translated witness relation must hold in the input group"
        );
        verified = true;
    }

    BsCertificate {
        level,
        k: wit.k,
        l: wit.l,
        gen,
        conj,
        gen_level: wit.gen.clone(),
        conj_level: wit.conj.clone(),
        verified,
    }
}
