use super::paths::{enumerate_paths, paths_automaton, show_word, Word};
use super::shuffle::{shuffle_decompose, BaseWords, Witness};
use crate::ast::{GlobalType, RoleName};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeshBounds {
    /// Longest candidate path examined.
    pub depth: usize,
    /// Longest base word taken from the original types.
    pub base_len: usize,
    /// Maximum number of interleaved components.
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub path: Word,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeshReport {
    pub member: bool,
    /// Number of maximal candidate paths examined.
    pub checked_paths: usize,
    /// A path with no decomposition, when `member` is false.
    pub failing: Option<Word>,
    /// Decompositions of every checked path, when `member` is true.
    pub witnesses: Vec<PathWitness>,
    /// Role renaming applied to the candidate before decomposing.
    pub renaming: BTreeMap<RoleName, RoleName>,
    pub bounds: MeshBounds,
}

impl MeshReport {
    pub fn summary(&self) -> String {
        match (&self.member, &self.failing) {
            (true, _) => format!(
                "member (all {} maximal paths up to depth {} decompose)",
                self.checked_paths, self.bounds.depth
            ),
            (false, Some(p)) => format!("not a member: path {} has no decomposition", show_word(p)),
            (false, None) => "not a member".into(),
        }
    }
}

/// Injective role renamings of `roles` into `targets`, identity first.
fn renamings(roles: &[RoleName], targets: &[RoleName]) -> Vec<BTreeMap<RoleName, RoleName>> {
    fn go(
        i: usize,
        roles: &[RoleName],
        targets: &[RoleName],
        cur: &mut BTreeMap<RoleName, RoleName>,
        used: &mut BTreeSet<RoleName>,
        out: &mut Vec<BTreeMap<RoleName, RoleName>>,
    ) {
        if i == roles.len() {
            out.push(cur.clone());
            return;
        }
        for t in targets {
            if used.insert(t.clone()) {
                cur.insert(roles[i].clone(), t.clone());
                go(i + 1, roles, targets, cur, used, out);
                cur.remove(&roles[i]);
                used.remove(t);
            }
        }
    }
    let identity: BTreeMap<RoleName, RoleName> =
        roles.iter().map(|r| (r.clone(), r.clone())).collect();
    let mut out = vec![identity.clone()];
    let mut all = Vec::new();
    go(
        0,
        roles,
        targets,
        &mut BTreeMap::new(),
        &mut BTreeSet::new(),
        &mut all,
    );
    out.extend(all.into_iter().filter(|m| *m != identity));
    out
}

/// Bounded membership of `candidate` in the mesh of `originals`.
///
/// Every maximal path of the candidate up to `bounds.depth` must decompose
/// into at most `bounds.components` interleaved runs of base words (paths
/// of the originals up to `bounds.base_len`), after some injective renaming
/// of the candidate's roles. A positive answer is certified only up to the
/// depth bound; a negative one exhibits a path that fails under every
/// renaming tried.
pub fn mesh_member(
    candidate: &GlobalType,
    originals: &[GlobalType],
    bounds: MeshBounds,
) -> MeshReport {
    let base = BaseWords::from_groups(
        originals
            .iter()
            .map(|g| enumerate_paths(&paths_automaton(g), bounds.base_len).words)
            .collect(),
    );
    let paths = enumerate_paths(&paths_automaton(candidate), bounds.depth);
    let words: Vec<&Word> = paths.maximal_by_length();

    let roles: Vec<RoleName> = candidate.roles().into_iter().collect();
    let mut targets: BTreeSet<RoleName> = originals.iter().flat_map(|g| g.roles()).collect();
    targets.extend(roles.iter().cloned());
    let targets: Vec<RoleName> = targets.into_iter().collect();

    let mut cache: HashMap<Word, Option<Witness>> = HashMap::new();
    let mut best: Option<(usize, Word, BTreeMap<RoleName, RoleName>)> = None;
    for renaming in renamings(&roles, &targets) {
        let mut witnesses = Vec::with_capacity(words.len());
        let mut failed_at = None;
        for (i, w) in words.iter().enumerate() {
            let renamed: Word = w
                .iter()
                .map(|e| e.map_roles(|r| renaming.get(r).cloned().unwrap_or_else(|| r.clone())))
                .collect();
            let found = cache
                .entry(renamed.clone())
                .or_insert_with(|| shuffle_decompose(&renamed, &base, bounds.components))
                .clone();
            match found {
                Some(witness) => witnesses.push(PathWitness {
                    path: renamed,
                    witness,
                }),
                None => {
                    failed_at = Some(i);
                    break;
                }
            }
        }
        match failed_at {
            None => {
                return MeshReport {
                    member: true,
                    checked_paths: words.len(),
                    failing: None,
                    witnesses,
                    renaming,
                    bounds,
                }
            }
            Some(i) => {
                if best.as_ref().is_none_or(|(b, _, _)| i > *b) {
                    best = Some((i, words[i].clone(), renaming));
                }
            }
        }
    }
    let (_, failing, renaming) = best.expect("at least the identity renaming is tried");
    MeshReport {
        member: false,
        checked_paths: words.len(),
        failing: Some(failing),
        witnesses: Vec::new(),
        renaming,
        bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Sort;
    use crate::corpus;
    use crate::parser::parse_protocols;
    use crate::typealg::PathEvent;

    fn b(depth: usize, base_len: usize, components: usize) -> MeshBounds {
        MeshBounds {
            depth,
            base_len,
            components,
        }
    }

    fn g_c() -> GlobalType {
        parse_protocols("protocol Gc { rec t . U -> C : <string>; C -> F : <string>; F -> C { ok: C -> F : <file>, quit: t } }")
            .unwrap()["Gc"]
            .clone()
    }

    #[test]
    fn composed_protocol_is_in_the_mesh() {
        let originals = [corpus::g_a(), corpus::g_b()];
        let r = mesh_member(&g_c(), &originals, b(8, 5, 2));
        assert!(r.member, "{}", r.summary());
        assert!(r.renaming.iter().all(|(k, v)| k == v), "no renaming needed");
        assert_eq!(r.checked_paths, r.witnesses.len());
        // the extracted type uses thread names as roles
        let r = mesh_member(&corpus::g_merged(), &originals, b(8, 5, 2));
        assert!(r.member, "{}", r.summary());
        assert_eq!(r.renaming[&RoleName::new("u")], RoleName::new("U"));
    }

    #[test]
    fn end_is_always_a_member() {
        let r = mesh_member(&GlobalType::End, &[corpus::g_a()], b(3, 3, 1));
        assert!(r.member);
        assert_eq!(r.checked_paths, 1);
    }

    #[test]
    fn unknown_interaction_is_not() {
        let bad = GlobalType::com("U", "F", Sort::Int, GlobalType::End);
        let r = mesh_member(&bad, &[corpus::g_a(), corpus::g_b()], b(4, 4, 3));
        assert!(!r.member);
        assert_eq!(r.failing, Some(vec![PathEvent::com("U", "F", Sort::Int)]));
    }

    #[test]
    fn a_single_component_cannot_interleave_two_protocols() {
        let r = mesh_member(&g_c(), &[corpus::g_a(), corpus::g_b()], b(8, 5, 1));
        assert!(!r.member);
        assert!(r.failing.unwrap().len() >= 2);
    }

    #[test]
    fn monotone_in_bounds() {
        let originals = [corpus::g_a(), corpus::g_b()];
        for (l, m) in [(5, 2), (6, 2), (5, 3), (7, 4)] {
            assert!(mesh_member(&g_c(), &originals, b(8, l, m)).member);
        }
    }

    #[test]
    fn every_protocol_is_in_its_own_mesh() {
        for g in [corpus::g_a(), corpus::g_b(), g_c(), corpus::g_merged()] {
            assert!(
                mesh_member(&g, std::slice::from_ref(&g), b(6, 6, 1)).member,
                "{g}"
            );
        }
    }

    #[test]
    fn renamings_are_injective_identity_first() {
        let roles = [RoleName::new("a"), RoleName::new("b")];
        let targets = [RoleName::new("a"), RoleName::new("b"), RoleName::new("c")];
        let all = renamings(&roles, &targets);
        assert_eq!(all.len(), 6);
        assert!(all[0].iter().all(|(k, v)| k == v));
        for m in &all {
            let img: BTreeSet<_> = m.values().collect();
            assert_eq!(img.len(), 2);
        }
    }
}
