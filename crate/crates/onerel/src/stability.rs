//! Stable numbers of HNN splittings.
//!
//! An HNN splitting identifies two subgroups A and B of a vertex group H by
//! an isomorphism psi. Iterating "intersect with A, push through psi" from
//! the whole group produces a sequence of families of conjugacy classes; the
//! level at which every class in the family has become cyclic is the stable
//! number of psi. This module computes those families with Stallings core
//! graphs, in regimes where the vertex group calculations reduce to a free
//! group: a free vertex group (trivial or primitive relator), or a proper
//! power relator with both subgroups carried by Magnus subgroups.
//!
//! The cyclic classes dropped along the way are not discarded: they are the
//! seeds for the graph of cyclic stabilisers, so the report keeps each one
//! together with the double coset witness it came from.

use std::fmt;

use crate::covers::HnnSplitting;
use crate::stallings::{intersection_classes, CoreGraph, TupleExpresser};
use crate::whitehead::{is_primitive, kill_primitive_relator};
use crate::word::{Alphabet, Word};

#[derive(Debug)]
pub enum StabilityError {
    /// The vertex group falls outside the regimes where intersections are
    /// computable by folding: its relator is imprimitive of power degree one,
    /// or an associated subgroup is not carried by a Magnus subgroup.
    Unsupported(String),
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::Unsupported(why) => write!(f, "unsupported splitting: {why}"),
        }
    }
}

impl std::error::Error for StabilityError {}

/// How the vertex group is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The vertex relator is empty or primitive, so the vertex group is free
    /// and every computation happens in explicit free coordinates.
    FreeVertex,
    /// The vertex relator is a proper power u^d, d at least 2, and both
    /// associated subgroups live in Magnus subgroups. Intersections of such
    /// subgroups agree with their intersections in the ambient free group,
    /// so folding over the vertex generators stays faithful.
    ImprimitiveRelator,
}

/// A splitting prepared for iteration: the two subgroup bases and the shift
/// between them, rewritten into a free group where folding is valid.
pub struct SplitContext {
    pub regime: Regime,
    /// Rank of the free group the computation runs in.
    pub rank: usize,
    /// Names for the computation letters.
    pub display: Alphabet,
    /// Computation letters written back over the vertex generators. `None`
    /// when the computation already happens in vertex coordinates.
    section: Option<Vec<Word>>,
    /// Vertex generators written over the computation letters, inverse to
    /// `section`. `None` in the same cases.
    project: Option<Vec<Word>>,
    pub a_words: Vec<Word>,
    pub b_words: Vec<Word>,
    pub a_core: CoreGraph,
    pub b_core: CoreGraph,
    a_expr: TupleExpresser,
    b_expr: TupleExpresser,
}

impl fmt::Debug for SplitContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitContext")
            .field("regime", &self.regime)
            .field("rank", &self.rank)
            .field("a_words", &self.a_words)
            .field("b_words", &self.b_words)
            .finish_non_exhaustive()
    }
}

impl SplitContext {
    pub fn new(split: &HnnSplitting) -> Result<SplitContext, StabilityError> {
        SplitContext::from_words(
            &split.names,
            &split.vertex_relator,
            &split.a_gens,
            &split.b_gens,
        )
    }

    /// Build a context from bare data: a vertex presentation and the two
    /// subgroup bases, with `psi` sending `a_gens[i]` to `b_gens[i]`.
    pub fn from_words(
        names: &Alphabet,
        relator: &Word,
        a_gens: &[Word],
        b_gens: &[Word],
    ) -> Result<SplitContext, StabilityError> {
        let n = names.rank();
        assert_eq!(a_gens.len(), b_gens.len(), "psi needs matching bases");

        if relator.is_empty() {
            return Ok(SplitContext::assemble(
                Regime::FreeVertex,
                n,
                names.clone(),
                None,
                None,
                a_gens.to_vec(),
                b_gens.to_vec(),
            ));
        }

        if is_primitive(n, relator) {
            let kill = kill_primitive_relator(n, relator).expect("primitive relator dies");
            let display = Alphabet::new(
                (0..n)
                    .filter(|&g| g != kill.killed)
                    .map(|g| names.name(g))
                    .collect(),
            )
            .expect("subset of a valid alphabet");
            let a_words: Vec<Word> = a_gens.iter().map(|w| kill.project_word(w)).collect();
            let b_words: Vec<Word> = b_gens.iter().map(|w| kill.project_word(w)).collect();
            return Ok(SplitContext::assemble(
                Regime::FreeVertex,
                n - 1,
                display,
                Some(kill.section.clone()),
                Some(kill.project.clone()),
                a_words,
                b_words,
            ));
        }

        let (cyc, _) = relator.cyclic_reduce();
        let (_, degree) = cyc.period_degree();
        if degree < 2 {
            return Err(StabilityError::Unsupported(
                "vertex relator is imprimitive and not a proper power, \
                 so intersections may be exceptional"
                    .into(),
            ));
        }
        let rel_support = support_set(relator, n);
        for (tag, gens) in [("lower", a_gens), ("upper", b_gens)] {
            let mut sub = vec![false; n];
            for w in gens {
                for (g, s) in support_set(w, n).iter().enumerate() {
                    sub[g] |= s;
                }
            }
            if !rel_support
                .iter()
                .enumerate()
                .any(|(g, &in_rel)| in_rel && !sub[g])
            {
                return Err(StabilityError::Unsupported(format!(
                    "{tag} subgroup meets every relator generator, \
                     so it is not carried by a Magnus subgroup"
                )));
            }
        }
        Ok(SplitContext::assemble(
            Regime::ImprimitiveRelator,
            n,
            names.clone(),
            None,
            None,
            a_gens.to_vec(),
            b_gens.to_vec(),
        ))
    }

    fn assemble(
        regime: Regime,
        rank: usize,
        display: Alphabet,
        section: Option<Vec<Word>>,
        project: Option<Vec<Word>>,
        a_words: Vec<Word>,
        b_words: Vec<Word>,
    ) -> SplitContext {
        let a_core = CoreGraph::from_words(rank, &a_words);
        let b_core = CoreGraph::from_words(rank, &b_words);
        let a_expr = TupleExpresser::new(&a_words);
        let b_expr = TupleExpresser::new(&b_words);
        SplitContext {
            regime,
            rank,
            display,
            section,
            project,
            a_words,
            b_words,
            a_core,
            b_core,
            a_expr,
            b_expr,
        }
    }

    /// The same splitting traversed the other way: psi inverse.
    pub fn inverted(&self) -> SplitContext {
        SplitContext::assemble(
            self.regime,
            self.rank,
            self.display.clone(),
            self.section.clone(),
            self.project.clone(),
            self.b_words.clone(),
            self.a_words.clone(),
        )
    }

    /// Image of `w` under psi, or `None` when `w` is not in A. Input and
    /// output are in computation coordinates.
    pub fn psi(&self, w: &Word) -> Option<Word> {
        Some(self.a_expr.express(w)?.substitute(&self.b_words))
    }

    /// Image of `w` under psi inverse, or `None` when `w` is not in B.
    pub fn psi_inv(&self, w: &Word) -> Option<Word> {
        Some(self.b_expr.express(w)?.substitute(&self.a_words))
    }

    /// `w` rewritten over the basis `a_words`, or `None` when `w` is not in A.
    pub fn express_a(&self, w: &Word) -> Option<Word> {
        self.a_expr.express(w)
    }

    /// `w` rewritten over the basis `b_words`, or `None` when `w` is not in B.
    pub fn express_b(&self, w: &Word) -> Option<Word> {
        self.b_expr.express(w)
    }

    /// A computation word rewritten over the vertex generators.
    pub fn vertex_word(&self, w: &Word) -> Word {
        match &self.section {
            Some(sec) => w.substitute(sec),
            None => w.clone(),
        }
    }

    /// A vertex-generator word rewritten over the computation letters, the
    /// inverse direction of `vertex_word`.
    pub fn project_word(&self, w: &Word) -> Word {
        match &self.project {
            Some(proj) => w.substitute(proj),
            None => w.clone(),
        }
    }

    pub fn render(&self, w: &Word) -> String {
        w.render(&self.display)
    }

    /// Reduced rank of the lower associated subgroup.
    pub fn a_reduced_rank(&self) -> usize {
        self.a_core.subgroup_rank().saturating_sub(1)
    }
}

/// One conjugacy class in a family: a representative subgroup in computation
/// coordinates.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    /// Generators, already pushed through psi.
    pub gens: Vec<Word>,
    pub core: CoreGraph,
}

/// The non-cyclic part of one iteration level.
#[derive(Debug, Clone)]
pub struct AFamily {
    pub level: usize,
    pub members: Vec<FamilyMember>,
}

impl AFamily {
    pub fn reduced_rank_sum(&self) -> usize {
        self.members
            .iter()
            .map(|m| m.core.subgroup_rank().saturating_sub(1))
            .sum()
    }
}

/// A cyclic class dropped from a family, kept for the graph of cyclic
/// stabilisers.
#[derive(Debug, Clone)]
pub struct CyclicDiscard {
    /// The level whose family it would have joined.
    pub level: usize,
    /// Generator of the class, already pushed through psi; computation
    /// coordinates.
    pub generator: Word,
    /// Double coset witness g: the intersection was A meet (parent)^g.
    pub witness: Word,
    /// Index of the parent member in the previous family.
    pub parent: usize,
}

#[derive(Debug)]
pub struct StabilityReport {
    /// Non-cyclic families by level, ending with the first empty one when
    /// the iteration terminated.
    pub families: Vec<AFamily>,
    /// The stable number, or `None` when the cap was reached first. The
    /// procedure alone can never certify an infinite stable number.
    pub stable: Option<usize>,
    pub discards: Vec<CyclicDiscard>,
    pub cap: usize,
}

/// Default iteration cap: proportional to the reduced rank of A, which
/// bounds the width of every level but not the depth.
pub fn default_cap(ctx: &SplitContext) -> usize {
    (ctx.a_reduced_rank() * 8).max(8)
}

/// One step of the iteration: all conjugacy classes of psi(A meet M^g) over
/// members M of `fam` and double cosets g, split into the non-cyclic family
/// and the cyclic discards.
pub fn next_family(ctx: &SplitContext, fam: &AFamily) -> (AFamily, Vec<CyclicDiscard>) {
    let mut fresh: Vec<FamilyMember> = Vec::new();
    let mut discards = Vec::new();
    for (pi, m) in fam.members.iter().enumerate() {
        for class in intersection_classes(&ctx.a_core, &m.core, false) {
            if class.rank == 0 {
                continue;
            }
            let images: Vec<Word> = class
                .gens
                .iter()
                .map(|g| ctx.psi(g).expect("intersection generators lie in A"))
                .collect();
            if class.rank == 1 {
                discards.push(CyclicDiscard {
                    level: fam.level + 1,
                    generator: images.into_iter().next().unwrap(),
                    witness: class.witness,
                    parent: pi,
                });
                continue;
            }
            let core = CoreGraph::from_words(ctx.rank, &images);
            fresh.push(FamilyMember { gens: images, core });
        }
    }

    let mut members: Vec<FamilyMember> = Vec::new();
    'cand: for cand in fresh {
        let sig = cand.core.conjugacy_signature();
        for kept in &members {
            if kept.core.conjugacy_signature() == sig && kept.core.conjugate_subgroup(&cand.core) {
                continue 'cand;
            }
        }
        members.push(cand);
    }
    (
        AFamily {
            level: fam.level + 1,
            members,
        },
        discards,
    )
}

/// Iterate from the whole vertex group until a family dies out or `cap`
/// levels have been produced.
pub fn stable_number(ctx: &SplitContext, cap: usize) -> StabilityReport {
    let level0 = if ctx.rank >= 2 {
        let rose = CoreGraph::rose(ctx.rank);
        let gens = rose.basis();
        vec![FamilyMember { gens, core: rose }]
    } else {
        Vec::new()
    };
    let mut families = vec![AFamily {
        level: 0,
        members: level0,
    }];
    let mut discards = Vec::new();
    let rr_a = ctx.a_reduced_rank();

    loop {
        if families.last().unwrap().members.is_empty() {
            let s = families.len() - 1;
            return StabilityReport {
                families,
                stable: Some(s),
                discards,
                cap,
            };
        }
        if families.len() > cap {
            return StabilityReport {
                families,
                stable: None,
                discards,
                cap,
            };
        }
        let (next, dropped) = next_family(ctx, families.last().unwrap());
        assert!(
            next.reduced_rank_sum() <= rr_a,
            "family at level {} has reduced rank sum {} above rr(A) = {}",
            next.level,
            next.reduced_rank_sum(),
            rr_a,
        );
        discards.extend(dropped);
        families.push(next);
    }
}

fn support_set(w: &Word, rank: usize) -> Vec<bool> {
    w.support_counts(rank).iter().map(|&c| c > 0).collect()
}
