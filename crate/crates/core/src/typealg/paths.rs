use crate::ast::{GlobalType, Label, RoleName, Sort};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

/// A node label along a path of a global type's regular tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathEvent {
    Com {
        from: RoleName,
        to: RoleName,
        sort: Sort,
    },
    Sel {
        from: RoleName,
        to: RoleName,
        label: Label,
    },
}

impl PathEvent {
    pub fn com(from: &str, to: &str, sort: Sort) -> Self {
        PathEvent::Com {
            from: RoleName::new(from),
            to: RoleName::new(to),
            sort,
        }
    }

    pub fn sel(from: &str, to: &str, label: &str) -> Self {
        PathEvent::Sel {
            from: RoleName::new(from),
            to: RoleName::new(to),
            label: Label::new(label),
        }
    }

    pub fn roles(&self) -> [&RoleName; 2] {
        match self {
            PathEvent::Com { from, to, .. } | PathEvent::Sel { from, to, .. } => [from, to],
        }
    }

    pub(crate) fn map_roles(&self, f: impl Fn(&RoleName) -> RoleName) -> PathEvent {
        match self {
            PathEvent::Com { from, to, sort } => PathEvent::Com {
                from: f(from),
                to: f(to),
                sort: *sort,
            },
            PathEvent::Sel { from, to, label } => PathEvent::Sel {
                from: f(from),
                to: f(to),
                label: label.clone(),
            },
        }
    }
}

impl fmt::Display for PathEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathEvent::Com { from, to, sort } => write!(f, "{from}->{to}:<{sort}>"),
            PathEvent::Sel { from, to, label } => write!(f, "{from}->{to}:{label}"),
        }
    }
}

pub type Word = Vec<PathEvent>;

pub fn show_word(w: &[PathEvent]) -> String {
    if w.is_empty() {
        return "ε".into();
    }
    w.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" · ")
}

/// Automaton whose language (every state accepting) is the set of finite
/// paths of a global type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathAutomaton {
    /// One representative type per state, recursion unfolded at the head.
    pub states: Vec<GlobalType>,
    pub initial: usize,
    pub transitions: Vec<(usize, PathEvent, usize)>,
}

impl PathAutomaton {
    pub fn successors(&self, state: usize) -> impl Iterator<Item = (&PathEvent, usize)> {
        self.transitions
            .iter()
            .filter(move |(s, _, _)| *s == state)
            .map(|(_, e, t)| (e, *t))
    }

    pub fn accepts(&self, word: &[PathEvent]) -> bool {
        let mut current: BTreeSet<usize> = [self.initial].into();
        for ev in word {
            current = current
                .iter()
                .flat_map(|s| {
                    self.successors(*s)
                        .filter(|(e, _)| *e == ev)
                        .map(|(_, t)| t)
                })
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        true
    }
}

pub fn paths_automaton(g: &GlobalType) -> PathAutomaton {
    let mut states: Vec<GlobalType> = Vec::new();
    let mut index: HashMap<GlobalType, usize> = HashMap::new();
    let mut transitions = Vec::new();
    let mut queue = VecDeque::new();

    let mut intern =
        |g: &GlobalType, states: &mut Vec<GlobalType>, queue: &mut VecDeque<usize>| -> usize {
            let key = g.unfold_head().canonical();
            *index.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                queue.push_back(states.len() - 1);
                states.len() - 1
            })
        };

    let initial = intern(g, &mut states, &mut queue);
    while let Some(s) = queue.pop_front() {
        match states[s].clone() {
            GlobalType::Com {
                from,
                to,
                sort,
                cont,
            } => {
                let t = intern(&cont, &mut states, &mut queue);
                transitions.push((s, PathEvent::Com { from, to, sort }, t));
            }
            GlobalType::Choice { from, to, branches } => {
                for (label, cont) in branches {
                    let t = intern(&cont, &mut states, &mut queue);
                    let ev = PathEvent::Sel {
                        from: from.clone(),
                        to: to.clone(),
                        label,
                    };
                    transitions.push((s, ev, t));
                }
            }
            GlobalType::End | GlobalType::Var(_) | GlobalType::Rec(..) => {}
        }
    }
    PathAutomaton {
        states,
        initial,
        transitions,
    }
}

/// Accepted words up to a length bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSet {
    pub words: BTreeSet<Word>,
    /// Words that cannot be extended within the bound: they end where the
    /// type ends, or have exactly the bound's length.
    pub maximal: BTreeSet<Word>,
    pub depth: usize,
}

impl PathSet {
    /// Maximal words, shortest first.
    pub fn maximal_by_length(&self) -> Vec<&Word> {
        let mut v: Vec<&Word> = self.maximal.iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }
}

pub fn enumerate_paths(a: &PathAutomaton, depth: usize) -> PathSet {
    let mut words = BTreeSet::new();
    let mut maximal = BTreeSet::new();
    let mut frontier: BTreeSet<(Word, usize)> = [(Vec::new(), a.initial)].into();
    for len in 0..=depth {
        let mut next = BTreeSet::new();
        for (w, s) in &frontier {
            words.insert(w.clone());
            if len < depth {
                for (e, t) in a.successors(*s) {
                    let mut w2 = w.clone();
                    w2.push(e.clone());
                    next.insert((w2, t));
                }
            }
        }
        let extended: BTreeSet<&[PathEvent]> = next.iter().map(|(w, _)| &w[..len]).collect();
        for (w, _) in &frontier {
            if len == depth || !extended.contains(&w[..]) {
                maximal.insert(w.clone());
            }
        }
        frontier = next;
    }
    PathSet {
        words,
        maximal,
        depth,
    }
}
