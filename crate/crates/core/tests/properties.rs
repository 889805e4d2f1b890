use gcmerge::ast::{alpha_equal, alpha_equal_type, canonical, well_formed, Eta, GlobalType};
use gcmerge::gen::{gen_choreography, gen_env, gen_global_type, GenConfig};
use gcmerge::parser::{parse_choreography, parse_protocols, pretty_chor, pretty_type};
use gcmerge::semantics::step;
use gcmerge::typealg::{enumerate_paths, paths_automaton, MeshBounds};
use gcmerge::typing::{typecheck, Delta, SessionState, SortEnv};
use gcmerge::verify::reductions;
use gcmerge::*;
use proptest::prelude::*;

fn small() -> GenConfig {
    GenConfig {
        max_depth: 8,
        ..GenConfig::default()
    }
}

fn chor() -> impl Strategy<Value = Choreography> {
    any::<u64>().prop_map(|s| gen_choreography(s, GenConfig::default()))
}

fn small_chor() -> impl Strategy<Value = Choreography> {
    any::<u64>().prop_map(|s| gen_choreography(s, small()))
}

fn gtype() -> impl Strategy<Value = GlobalType> {
    (any::<u64>(), 2usize..7).prop_map(|(s, d)| gen_global_type(s, d))
}

/// Renames every bound name of a generated term (`x1`, `k1'`, `X1`) by
/// swapping its prefix, token by token.
fn rename_bound(text: &str) -> String {
    let mut out = String::new();
    let mut tok = String::new();
    let flush = |tok: &mut String, out: &mut String| {
        let digits = tok.get(1..).unwrap_or("").trim_end_matches('\'');
        let renamed = match tok.chars().next() {
            Some(p @ ('x' | 'k' | 'X'))
                if !digits.is_empty() && digits.chars().all(|d| d.is_ascii_digit()) =>
            {
                let q = match p {
                    'x' => "w",
                    'k' => "s",
                    _ => "Y",
                };
                format!("{q}{}", &tok[1..])
            }
            _ => tok.clone(),
        };
        out.push_str(&renamed);
        tok.clear();
    };
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' || ch == '\'' {
            tok.push(ch);
        } else {
            flush(&mut tok, &mut out);
            out.push(ch);
        }
    }
    flush(&mut tok, &mut out);
    out
}

/// A term with a free variable: the continuation of its first com.
fn open_term(c: &Choreography) -> Option<(VarName, Choreography)> {
    match c {
        Choreography::Seq(Eta::Com { var, .. }, cont) if cont.free_vars().contains(var) => {
            Some((var.clone(), (**cont).clone()))
        }
        Choreography::Seq(_, cont) | Choreography::Rec(_, cont) | Choreography::Res(_, cont) => {
            open_term(cont)
        }
        Choreography::Cond { then_branch, .. } => open_term(then_branch),
        _ => None,
    }
}

fn k() -> SessChan {
    SessChan::new("k")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pretty_printed_terms_parse_back(c in chor()) {
        let back = parse_choreography(&pretty_chor(&c)).unwrap();
        prop_assert!(alpha_equal(&back, &c));
        prop_assert_eq!(back, c);
    }

    #[test]
    fn pretty_printed_types_parse_back(g in gtype()) {
        let text = format!("protocol P {{ {} }}", pretty_type(&g));
        let back = parse_protocols(&text).unwrap().remove("P").unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn substitution_is_idempotent(c in chor(), n in -5i64..5) {
        if let Some((x, open)) = open_term(&c) {
            let v = Value::Int(n);
            let once = open.substitute(&x, &v);
            prop_assert_eq!(once.substitute(&x, &v), once.clone());
            prop_assert!(!once.free_vars().contains(&x));
        }
    }

    #[test]
    fn substitution_commutes_with_renaming(c in chor()) {
        if let Some((x, open)) = open_term(&c) {
            let v = Value::Str("v".into());
            let renamed = canonical(&open);
            prop_assert!(alpha_equal(&open.substitute(&x, &v), &renamed.substitute(&x, &v)));
        }
    }

    #[test]
    fn alpha_equality_is_an_equivalence(c in chor()) {
        let can = canonical(&c);
        let variant = parse_choreography(&rename_bound(&pretty_chor(&c))).unwrap();
        prop_assert!(alpha_equal(&c, &c));
        prop_assert!(alpha_equal(&c, &can) && alpha_equal(&can, &c));
        prop_assert!(alpha_equal(&c, &variant) && alpha_equal(&variant, &c));
        prop_assert!(alpha_equal(&variant, &can));
        prop_assert_eq!(canonical(&variant), can.clone());
        prop_assert_eq!(canonical(&can), can);
    }

    #[test]
    fn reduction_is_deterministic(c in small_chor()) {
        let mut cur = c;
        let mut env = gen_env();
        for _ in 0..10 {
            let succ = reductions(&cur, &env).unwrap();
            prop_assert!(succ.len() <= 1);
            let s = step(&cur, &env).unwrap();
            prop_assert_eq!(succ.len(), usize::from(s.is_some()));
            let Some(s) = s else { break };
            prop_assert!(alpha_equal(&succ[0].1, &s.next));
            cur = s.next;
            env = s.env;
        }
    }

    #[test]
    fn steps_preserve_well_formedness(c in chor()) {
        let mut cur = c;
        let mut env = gen_env();
        for _ in 0..12 {
            let Some(s) = step(&cur, &env).unwrap() else { break };
            prop_assert!(well_formed(&s.next).is_empty(), "{:?}\n{}", well_formed(&s.next), s.next);
            if let gcmerge::Event::Start { sess, .. } = &s.event {
                prop_assert!(!s.next.free_sessions().contains(sess));
            }
            cur = s.next;
            env = s.env;
        }
    }

    #[test]
    fn more_fuel_extends_the_trace(c in small_chor(), f in 0usize..15) {
        let short = run(&c, &gen_env(), f);
        let long = run(&c, &gen_env(), f + 1);
        prop_assert_eq!(&short.steps[..], &long.steps[..short.steps.len()]);
    }

    #[test]
    fn merging_leaves_one_session(c in chor()) {
        let m = simplify(&c, &k()).unwrap();
        prop_assert_eq!(m.merged.count_starts(), 0);
        prop_assert_eq!(m.merged.count_res(), 0);
        prop_assert!(m.merged.etas().iter().all(|e| e.sess() == &k()));
        prop_assert_eq!(m.merged.node_count(), c.node_count() - c.count_starts() - c.count_res());
        let full = merge(&c, &k(), &"ch".into()).unwrap();
        prop_assert_eq!(full.count_starts(), usize::from(m.threads_in_order.len() >= 2));
        let again = simplify(&m.merged, &"k2".into()).unwrap().merged;
        prop_assert!(alpha_equal(&again, &simplify(&c, &"k2".into()).unwrap().merged));
    }

    #[test]
    fn merging_is_sound_and_complete(c in chor()) {
        let s = soundness_check(&c, &k(), &gen_env(), 12);
        let comp = completeness_check(&c, &k(), &gen_env(), 12);
        prop_assert!(s.passed, "{:?}", s.counterexample);
        prop_assert!(comp.passed, "{:?}", comp.counterexample);
    }

    #[test]
    fn extracted_types_type_their_terms(c in chor()) {
        let merged = simplify(&c, &k()).unwrap().merged;
        let sorts = SortEnv::from_env(&gen_env());
        if let Ok(g) = extract_type(&merged, &sorts) {
            prop_assert!(g.is_well_formed());
            let delta: Delta = [(k(), SessionState::identity_cast(g))].into_iter().collect();
            let r = typecheck(&Default::default(), &merged, &delta, &sorts);
            prop_assert!(r.ok, "{:?}\n{}", r.errors, merged);
        }
    }

    #[test]
    fn path_sets_are_prefix_closed(g in gtype(), d in 0usize..7) {
        let a = paths_automaton(&g);
        let ps = enumerate_paths(&a, d);
        prop_assert!(ps.words.contains(&vec![]));
        for w in &ps.words {
            prop_assert!(w.len() <= d);
            prop_assert!(a.accepts(w));
            if let Some((_, init)) = w.split_last() {
                prop_assert!(ps.words.contains(init));
            }
        }
        for w in &ps.maximal {
            let extendable = ps.words.iter().any(|v| v.len() == w.len() + 1 && v.starts_with(w));
            prop_assert!(w.len() == d || !extendable);
        }
    }

    #[test]
    fn every_type_is_in_its_own_mesh(g in gtype()) {
        let b = MeshBounds { depth: 5, base_len: 5, components: 1 };
        prop_assert!(mesh_member(&g, std::slice::from_ref(&g), b).member);
    }

    #[test]
    fn mesh_membership_is_invariant_under_renaming(g in gtype(), h in gtype()) {
        let b = MeshBounds { depth: 4, base_len: 4, components: 2 };
        let verdict = mesh_member(&g, std::slice::from_ref(&h), b).member;
        // bound type variables
        let g2 = g.canonical();
        prop_assert!(alpha_equal_type(&g, &g2));
        prop_assert_eq!(mesh_member(&g2, std::slice::from_ref(&h), b).member, verdict);
        // roles, on either side
        let shift = |x: &GlobalType| {
            let map = x.roles().into_iter().map(|r| (r.clone(), RoleName::new(format!("{r}_")))).collect();
            x.rename_roles(&map)
        };
        prop_assert_eq!(mesh_member(&shift(&g), std::slice::from_ref(&h), b).member, verdict);
        prop_assert_eq!(mesh_member(&g, &[shift(&h)], b).member, verdict);
    }

    #[test]
    fn mesh_membership_is_monotone_in_the_bounds(g in gtype(), h in gtype()) {
        let b = MeshBounds { depth: 4, base_len: 3, components: 1 };
        if mesh_member(&g, std::slice::from_ref(&h), b).member {
            let wider = MeshBounds { depth: 4, base_len: 5, components: 2 };
            prop_assert!(mesh_member(&g, std::slice::from_ref(&h), wider).member);
        }
    }
}
