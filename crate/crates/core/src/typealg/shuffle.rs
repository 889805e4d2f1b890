//! Shuffle decomposition of a word into repetitions of base words.
//!
//! Base words come in groups, one group per original protocol. A word
//! decomposes with at most `m` components when its positions can be coloured
//! so that each colour's subsequence is a concatenation of base words from a
//! single group: every component replays successive instances of one
//! protocol.

use super::paths::{PathEvent, Word};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};

#[derive(Debug, Clone, Default)]
struct Trie {
    children: Vec<BTreeMap<PathEvent, usize>>,
    terminal: Vec<bool>,
}

const ROOT: usize = 0;

impl Trie {
    fn new() -> Self {
        Trie {
            children: vec![BTreeMap::new()],
            terminal: vec![false],
        }
    }

    fn insert(&mut self, word: &[PathEvent]) {
        let mut node = ROOT;
        for e in word {
            node = match self.children[node].get(e) {
                Some(&n) => n,
                None => {
                    self.children.push(BTreeMap::new());
                    self.terminal.push(false);
                    let n = self.children.len() - 1;
                    self.children[node].insert(e.clone(), n);
                    n
                }
            };
        }
        self.terminal[node] = true;
    }

    fn child(&self, node: usize, e: &PathEvent) -> Option<usize> {
        self.children[node].get(e).copied()
    }
}

/// Non-empty base words grouped by origin.
#[derive(Debug, Clone)]
pub struct BaseWords {
    groups: Vec<Trie>,
    words: Vec<BTreeSet<Word>>,
}

impl BaseWords {
    pub fn from_groups(groups: Vec<BTreeSet<Word>>) -> Self {
        let words: Vec<BTreeSet<Word>> = groups
            .into_iter()
            .map(|g| g.into_iter().filter(|w| !w.is_empty()).collect())
            .collect();
        let groups = words
            .iter()
            .map(|g| {
                let mut t = Trie::new();
                g.iter().for_each(|w| t.insert(w));
                t
            })
            .collect();
        BaseWords { groups, words }
    }

    /// A single group.
    pub fn single(words: BTreeSet<Word>) -> Self {
        Self::from_groups(vec![words])
    }

    pub fn group_words(&self, group: usize) -> &BTreeSet<Word> {
        &self.words[group]
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Index of the base-word group this component draws from.
    pub group: usize,
    /// Successive base words, in order.
    pub words: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub components: Vec<Component>,
    /// Component index of every position of the decomposed word.
    pub coloring: Vec<usize>,
}

type CompState = Option<(usize, usize)>;

struct Search<'a> {
    word: &'a [PathEvent],
    base: &'a BaseWords,
    failed: HashSet<(usize, Vec<CompState>)>,
    /// (component, starts a new base word) per decided position.
    choices: Vec<(usize, bool)>,
}

impl Search<'_> {
    fn run(&mut self, i: usize, comps: &mut Vec<CompState>) -> bool {
        if i == self.word.len() {
            return comps
                .iter()
                .flatten()
                .all(|&(g, n)| self.base.groups[g].terminal[n]);
        }
        let mut key_comps = comps.clone();
        key_comps.sort();
        let key = (i, key_comps);
        if self.failed.contains(&key) {
            return false;
        }
        let e = &self.word[i];
        let mut tried: Vec<CompState> = Vec::new();
        for j in 0..comps.len() {
            let state = comps[j];
            if tried.contains(&state) {
                continue;
            }
            tried.push(state);
            let mut options: Vec<((usize, usize), bool)> = Vec::new();
            match state {
                Some((g, n)) => {
                    let trie = &self.base.groups[g];
                    if let Some(c) = trie.child(n, e) {
                        options.push(((g, c), false));
                    }
                    if trie.terminal[n] {
                        if let Some(c) = trie.child(ROOT, e) {
                            options.push(((g, c), true));
                        }
                    }
                }
                None => {
                    for (g, trie) in self.base.groups.iter().enumerate() {
                        if let Some(c) = trie.child(ROOT, e) {
                            options.push(((g, c), true));
                        }
                    }
                }
            }
            for (next, fresh) in options {
                comps[j] = Some(next);
                self.choices.push((j, fresh));
                if self.run(i + 1, comps) {
                    return true;
                }
                self.choices.pop();
                comps[j] = state;
            }
        }
        self.failed.insert(key);
        false
    }
}

/// Finds a decomposition of `word` into at most `m` components, if any.
pub fn shuffle_decompose(word: &[PathEvent], base: &BaseWords, m: usize) -> Option<Witness> {
    let mut search = Search {
        word,
        base,
        failed: HashSet::new(),
        choices: Vec::new(),
    };
    let mut comps: Vec<CompState> = vec![None; m];
    if !search.run(0, &mut comps) {
        return None;
    }
    // renumber components by first use
    let mut order: Vec<usize> = Vec::new();
    for (j, _) in &search.choices {
        if !order.contains(j) {
            order.push(*j);
        }
    }
    let mut components: Vec<Component> = order
        .iter()
        .map(|j| Component {
            group: comps[*j].expect("used component has a state").0,
            words: Vec::new(),
        })
        .collect();
    let mut coloring = Vec::with_capacity(word.len());
    for (e, (j, fresh)) in word.iter().zip(&search.choices) {
        let c = order
            .iter()
            .position(|o| o == j)
            .expect("component recorded");
        coloring.push(c);
        let words = &mut components[c].words;
        if *fresh || words.is_empty() {
            words.push(Vec::new());
        }
        words.last_mut().expect("pushed above").push(e.clone());
    }
    Some(Witness {
        components,
        coloring,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Sort;
    use crate::corpus;
    use crate::typealg::{enumerate_paths, paths_automaton};

    fn uc() -> PathEvent {
        PathEvent::com("U", "C", Sort::String)
    }
    fn cf() -> PathEvent {
        PathEvent::com("C", "F", Sort::String)
    }
    fn quit() -> PathEvent {
        PathEvent::sel("F", "C", "quit")
    }

    fn example_base() -> BaseWords {
        BaseWords::from_groups(
            [corpus::g_a(), corpus::g_b()]
                .iter()
                .map(|g| enumerate_paths(&paths_automaton(g), 5).words)
                .collect(),
        )
    }

    /// Is `s` a concatenation of words from `ws`?
    fn in_star(s: &[PathEvent], ws: &BTreeSet<Word>) -> bool {
        let mut ok = vec![false; s.len() + 1];
        ok[0] = true;
        for i in 0..s.len() {
            if ok[i] {
                for w in ws.iter().filter(|w| !w.is_empty()) {
                    if s[i..].starts_with(w) {
                        ok[i + w.len()] = true;
                    }
                }
            }
        }
        ok[s.len()]
    }

    /// Tries every colouring of the positions with `m` colours.
    fn oracle(word: &[PathEvent], base: &BaseWords, m: usize) -> bool {
        let n = word.len();
        let total = m.pow(n as u32);
        (0..total).any(|mut code| {
            let mut colour = vec![0; n];
            for c in colour.iter_mut() {
                *c = code % m;
                code /= m;
            }
            (0..m).all(|j| {
                let sub: Word = word
                    .iter()
                    .zip(&colour)
                    .filter(|(_, c)| **c == j)
                    .map(|(e, _)| e.clone())
                    .collect();
                (0..base.group_count()).any(|g| in_star(&sub, base.group_words(g)))
            })
        })
    }

    fn check_witness(word: &[PathEvent], base: &BaseWords, m: usize, w: &Witness) {
        assert!(w.components.len() <= m);
        assert_eq!(w.coloring.len(), word.len());
        for (j, comp) in w.components.iter().enumerate() {
            let sub: Word = word
                .iter()
                .zip(&w.coloring)
                .filter(|(_, c)| **c == j)
                .map(|(e, _)| e.clone())
                .collect();
            assert_eq!(sub, comp.words.concat());
            for piece in &comp.words {
                assert!(base.group_words(comp.group).contains(piece), "{piece:?}");
            }
        }
    }

    #[test]
    fn single_event() {
        let base = example_base();
        let w = shuffle_decompose(&[uc()], &base, 2).unwrap();
        assert_eq!(w.components.len(), 1);
        assert_eq!(w.components[0].words, vec![vec![uc()]]);
        assert_eq!(w.components[0].group, 0);
    }

    #[test]
    fn empty_word() {
        let w = shuffle_decompose(&[], &example_base(), 1).unwrap();
        assert!(w.components.is_empty() && w.coloring.is_empty());
    }

    #[test]
    fn two_rounds_of_two_protocols() {
        let base = example_base();
        let word = [uc(), cf(), quit(), uc(), cf(), quit()];
        let w = shuffle_decompose(&word, &base, 2).unwrap();
        check_witness(&word, &base, 2, &w);
        assert_eq!(w.coloring, vec![0, 1, 1, 0, 1, 1]);
        assert_eq!(w.components[0].words, vec![vec![uc()], vec![uc()]]);
        assert_eq!(
            w.components[1].words,
            vec![vec![cf(), quit()], vec![cf(), quit()]]
        );
        assert!(shuffle_decompose(&word, &base, 1).is_none());
        assert!(oracle(&word, &base, 2) && !oracle(&word, &base, 1));
    }

    #[test]
    fn foreign_event_never_decomposes() {
        let alien = PathEvent::com("U", "F", Sort::Int);
        assert!(shuffle_decompose(&[alien], &example_base(), 3).is_none());
    }

    #[test]
    fn agrees_with_exhaustive_colouring() {
        let a = PathEvent::com("A", "B", Sort::Int);
        let b = PathEvent::sel("B", "A", "l");
        let c = PathEvent::com("B", "C", Sort::Bool);
        let alphabet = [a.clone(), b.clone(), c.clone()];
        let base = BaseWords::from_groups(vec![
            [vec![a.clone()], vec![b.clone(), c.clone()]]
                .into_iter()
                .collect(),
            [
                vec![c.clone()],
                vec![a.clone(), b.clone()],
                vec![a.clone(), b.clone(), a.clone()],
            ]
            .into_iter()
            .collect(),
        ]);
        let mut words: Vec<Word> = vec![vec![]];
        for len in 1..=5 {
            let mut next = Vec::new();
            for w in words.iter().filter(|w| w.len() == len - 1) {
                for e in &alphabet {
                    let mut w2 = w.clone();
                    w2.push(e.clone());
                    next.push(w2);
                }
            }
            words.extend(next);
        }
        let mut positives = 0;
        for w in &words {
            for m in 1..=3 {
                let got = shuffle_decompose(w, &base, m);
                assert_eq!(got.is_some(), oracle(w, &base, m), "{w:?} m={m}");
                if let Some(wit) = got {
                    check_witness(w, &base, m, &wit);
                    positives += 1;
                }
            }
        }
        assert!(positives > 50);
    }
}
