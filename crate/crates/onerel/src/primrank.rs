//! Primitivity rank: the smallest rank of a subgroup in which a word sits
//! as an imprimitive element, together with the subgroups realizing it.
//!
//! Every subgroup K with w ∈ K pushes down to one whose core graph is
//! covered by the w-path (take the image of the |w|-cycle in the core of K;
//! being a subgraph it is a free factor, so imprimitivity survives). Those
//! covered subgroups are exactly the folded quotients of the |w|-cycle, so
//! the search space is finite.

use crate::stallings::CoreGraph;
use crate::whitehead::is_primitive;
use crate::word::Word;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// Above this word length the quotient closure can get very large, so longer
/// inputs must opt in explicitly.
pub const DEFAULT_LENGTH_BUDGET: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimRankError {
    EmptyWord,
    OverBudget { len: usize, budget: usize },
}

impl fmt::Display for PrimRankError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimRankError::EmptyWord => write!(f, "primitivity rank needs a nonempty word"),
            PrimRankError::OverBudget { len, budget } => write!(
                f,
                "word length {len} exceeds the budget {budget}; raise it explicitly for longer words"
            ),
        }
    }
}

impl std::error::Error for PrimRankError {}

#[derive(Debug, Clone)]
pub struct PrimitivityRank {
    /// `None` encodes infinity: the word is primitive in the ambient group.
    pub value: Option<usize>,
    /// The subgroups realizing the minimum maximally: rank equals `value`,
    /// the word is imprimitive in each, and no strictly larger quotient
    /// subgroup has rank at most theirs.
    pub witnesses: Vec<CoreGraph>,
    /// Distinct subgroups visited during the closure (diagnostic).
    pub quotients_seen: usize,
}

/// π(w) over F of the given rank, exploring all folded quotients of the
/// |w|-cycle by single vertex merges. Merging is done on unpruned graphs so
/// that hanging trees stay mergeable; every partition quotient is a chain of
/// pair identifications, and eager folding commutes with later ones.
pub fn primitivity_rank(
    rank: usize,
    w: &Word,
    budget: usize,
) -> Result<PrimitivityRank, PrimRankError> {
    if w.is_empty() {
        return Err(PrimRankError::EmptyWord);
    }
    let (cyc, conj) = w.cyclic_reduce();
    let reduced = cyc.to_word();
    if reduced.is_empty() {
        return Err(PrimRankError::EmptyWord);
    }
    if reduced.len() > budget {
        return Err(PrimRankError::OverBudget {
            len: reduced.len(),
            budget,
        });
    }

    // Closure over raw folded quotients, keyed by their unpruned signature.
    let start = CoreGraph::from_cycle_quotient(
        rank,
        &reduced,
        &(0..reduced.len()).collect::<Vec<_>>(),
    );
    let mut raw_seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    raw_seen.insert(start.raw_based_signature());
    let mut queue = VecDeque::new();
    queue.push_back(start);

    struct Entry {
        core: CoreGraph,
        rank: usize,
        imprimitive: bool,
    }
    let mut subgroups: BTreeMap<Vec<i64>, Entry> = BTreeMap::new();

    while let Some(state) = queue.pop_front() {
        let core = state.pruned(true);
        let key = core.based_signature();
        subgroups.entry(key).or_insert_with(|| {
            let expr = core
                .express(&reduced)
                .expect("every quotient contains the word");
            let imprimitive = !is_primitive(core.subgroup_rank(), &expr);
            Entry {
                rank: core.subgroup_rank(),
                imprimitive,
                core,
            }
        });
        let n = state.vertex_count();
        for a in 0..n {
            for b in a + 1..n {
                let next = state.merged(a, b);
                if raw_seen.insert(next.raw_based_signature()) {
                    queue.push_back(next);
                }
            }
        }
    }

    let pi = subgroups
        .values()
        .filter(|e| e.imprimitive)
        .map(|e| e.rank)
        .min();
    let mut witnesses = Vec::new();
    if let Some(pi) = pi {
        'cand: for (key, e) in &subgroups {
            if !e.imprimitive || e.rank != pi {
                continue;
            }
            let basis = e.core.basis();
            for (other_key, o) in &subgroups {
                if other_key == key || o.rank > e.rank {
                    continue;
                }
                if basis.iter().all(|b| o.core.contains(b)) {
                    // A strictly larger subgroup of no greater rank exists.
                    continue 'cand;
                }
            }
            witnesses.push(e.core.clone());
        }
    }
    // The search ran on the cyclic reduction; conjugate the witnesses back
    // so they contain the input word itself.
    if !conj.is_empty() {
        witnesses = witnesses
            .iter()
            .map(|k| {
                let gens: Vec<Word> = k.basis().iter().map(|b| b.conjugated_by(&conj)).collect();
                CoreGraph::from_words(rank, &gens)
            })
            .collect();
    }
    Ok(PrimitivityRank {
        value: pi,
        witnesses,
        quotients_seen: subgroups.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;

    fn w(s: &str) -> Word {
        Alphabet::standard(2).parse(s).unwrap()
    }

    fn pi(s: &str) -> PrimitivityRank {
        primitivity_rank(2, &w(s), DEFAULT_LENGTH_BUDGET).unwrap()
    }

    /// Independent oracle: enumerate every set partition of the cycle
    /// vertices as a restricted growth string.
    fn oracle(word: &Word) -> (Option<usize>, BTreeSet<Vec<i64>>) {
        let n = word.len();
        let mut best: Option<usize> = None;
        struct Q {
            core: CoreGraph,
            rank: usize,
            imprim: bool,
        }
        let mut all: BTreeMap<Vec<i64>, Q> = BTreeMap::new();
        let mut rgs = vec![0usize; n];
        loop {
            let g = CoreGraph::from_cycle_quotient(2, word, &rgs).pruned(true);
            let key = g.based_signature();
            all.entry(key).or_insert_with(|| {
                let expr = g.express(word).unwrap();
                let imprim = !is_primitive(g.subgroup_rank(), &expr);
                if imprim {
                    best = Some(best.map_or(g.subgroup_rank(), |b| b.min(g.subgroup_rank())));
                }
                Q {
                    rank: g.subgroup_rank(),
                    imprim,
                    core: g,
                }
            });
            // Next restricted growth string.
            let mut i = n;
            loop {
                if i == 1 {
                    let mut wit = BTreeSet::new();
                    if let Some(b) = best {
                        'c: for (k, q) in &all {
                            if !q.imprim || q.rank != b {
                                continue;
                            }
                            let basis = q.core.basis();
                            for (k2, q2) in &all {
                                if k2 != k
                                    && q2.rank <= q.rank
                                    && basis.iter().all(|x| q2.core.contains(x))
                                {
                                    continue 'c;
                                }
                            }
                            wit.insert(k.clone());
                        }
                    }
                    return (best, wit);
                }
                i -= 1;
                let cap = rgs[..i].iter().copied().max().unwrap() + 1;
                if rgs[i] < cap {
                    rgs[i] += 1;
                    for s in rgs.iter_mut().skip(i + 1) {
                        *s = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn proper_powers_have_rank_one() {
        let r = pi("aa");
        assert_eq!(r.value, Some(1));
        assert_eq!(r.witnesses.len(), 1);
        let expected = CoreGraph::from_words(2, &[w("a")]);
        assert!(r.witnesses[0].same_subgroup(&expected));

        let r = pi("ababab");
        assert_eq!(r.value, Some(1));
        assert!(r.witnesses[0].same_subgroup(&CoreGraph::from_words(2, &[w("ab")])));
    }

    #[test]
    fn commutator_has_rank_two_with_full_witness() {
        let r = pi("abAB");
        assert_eq!(r.value, Some(2));
        assert_eq!(r.witnesses.len(), 1);
        assert!(r.witnesses[0].same_subgroup(&CoreGraph::from_words(2, &[w("a"), w("b")])));
    }

    #[test]
    fn primitive_words_get_infinity() {
        for s in ["a", "ab", "abb", "aab"] {
            let r = pi(s);
            assert_eq!(r.value, None, "{s} is primitive");
            assert!(r.witnesses.is_empty());
        }
    }

    #[test]
    fn agrees_with_partition_enumeration_oracle() {
        for s in ["aa", "abAB", "aabb", "abab", "aabaB", "abbab", "aabab"] {
            let word = w(s);
            let (expect, expect_wit) = oracle(&word);
            let got = primitivity_rank(2, &word, DEFAULT_LENGTH_BUDGET).unwrap();
            assert_eq!(got.value, expect, "pi({s})");
            let got_wit: BTreeSet<Vec<i64>> = got
                .witnesses
                .iter()
                .map(|g| g.based_signature())
                .collect();
            assert_eq!(got_wit, expect_wit, "witnesses for {s}");
        }
    }

    #[test]
    fn rank_one_exactly_for_proper_powers() {
        for s in ["aa", "abab", "aabb", "abAB", "ab", "ba"] {
            let word = w(s);
            let is_power = word.cyclic_reduce().0.period_degree().1 >= 2;
            let r = primitivity_rank(2, &word, DEFAULT_LENGTH_BUDGET).unwrap();
            assert_eq!(r.value == Some(1), is_power, "{s}");
            if r.value.is_some() {
                assert!(r.value.unwrap() <= 2, "bounded by ambient rank for {s}");
            }
        }
    }

    #[test]
    fn conjugation_invariance_and_witness_transport() {
        let conj = primitivity_rank(2, &w("b aa B"), DEFAULT_LENGTH_BUDGET).unwrap();
        assert_eq!(conj.value, Some(1));
        assert_eq!(conj.witnesses.len(), 1);
        assert!(conj.witnesses[0].same_subgroup(&CoreGraph::from_words(2, &[w("baB")])));
        assert!(conj.witnesses[0].contains(&w("b aa B")));
    }

    #[test]
    fn budget_and_empty_input_errors() {
        assert!(matches!(
            primitivity_rank(2, &Word::empty(), 16),
            Err(PrimRankError::EmptyWord)
        ));
        let long = w("ab").pow(4);
        assert!(matches!(
            primitivity_rank(2, &long, 7),
            Err(PrimRankError::OverBudget { len: 8, budget: 7 })
        ));
        assert_eq!(primitivity_rank(2, &long, 8).unwrap().value, Some(1));
    }
}
