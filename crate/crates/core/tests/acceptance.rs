//! End-to-end acceptance checks. Each criterion runs in isolation and prints
//! a single PASS/FAIL line; the process exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p gcmerge --test acceptance`.

use gcmerge::ast::{alpha_equal, alpha_equal_type, canonical, well_formed, GlobalType, Sort};
use gcmerge::gen::{gen_choreography, gen_env, gen_global_type, GenConfig};
use gcmerge::parser::{parse_choreography, pretty_chor};
use gcmerge::semantics::Event;
use gcmerge::transform::sort_start_participants;
use gcmerge::typealg::{enumerate_paths, paths_automaton, MeshBounds};
use gcmerge::verify::{completeness_check_with, reductions, soundness_check_with};
use gcmerge::*;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

fn k() -> SessChan {
    SessChan::new("k")
}

fn c1_transformation() -> Result<(), String> {
    let merged = merge(&corpus::chor1(), &k(), &PublicChan::new("c")).map_err(|e| e.to_string())?;
    let expected = corpus::chor2();
    if alpha_equal(
        &sort_start_participants(&merged),
        &sort_start_participants(&expected),
    ) {
        Ok(())
    } else {
        Err(format!("merged term differs:\n{}", pretty_chor(&merged)))
    }
}

fn c2_typing() -> Result<(), String> {
    let gamma: Gamma = [("a".into(), corpus::g_a()), ("b".into(), corpus::g_b())]
        .into_iter()
        .collect();
    let report = typecheck(&gamma, &corpus::chor1(), &Delta::new(), &corpus::sorts());
    if report.ok {
        Ok(())
    } else {
        Err(format!("{:?}", report.errors))
    }
}

fn c3_extraction() -> Result<(), String> {
    let merged = simplify(&corpus::chor1(), &k())
        .map_err(|e| e.to_string())?
        .merged;
    let g = extract_type(&merged, &corpus::sorts()).map_err(|e| e.to_string())?;
    if alpha_equal_type(&g, &corpus::g_merged()) {
        Ok(())
    } else {
        Err(format!("extracted {g}"))
    }
}

fn c4_mesh() -> Result<(), String> {
    let originals = [corpus::g_a(), corpus::g_b()];
    let bounds = MeshBounds {
        depth: 8,
        base_len: 5,
        components: 2,
    };
    let yes = mesh_member(&corpus::g_merged(), &originals, bounds);
    if !yes.member {
        return Err(format!("G rejected: {}", yes.summary()));
    }
    let bad = GlobalType::com("U", "F", Sort::Int, GlobalType::End);
    let no = mesh_member(&bad, &originals, bounds);
    match (&no.member, &no.failing) {
        (false, Some(p)) if p.len() == 1 => Ok(()),
        _ => Err(format!("negative candidate: {}", no.summary())),
    }
}

fn verify_both(c: &Choreography, env: &BuiltinEnv, depth: usize) -> Result<(), String> {
    let s = soundness_check(c, &k(), env, depth);
    let comp = completeness_check(c, &k(), env, depth);
    if s.passed && comp.passed {
        Ok(())
    } else {
        Err(format!(
            "on\n{}\nsoundness: {:?}\ncompleteness: {:?}",
            pretty_chor(c),
            s.counterexample,
            comp.counterexample
        ))
    }
}

fn c5_sound_and_complete() -> Result<(), String> {
    verify_both(&corpus::chor1(), &corpus::env(&[true]), 12)?;
    verify_both(&corpus::chor1(), &corpus::env(&[false]), 12)?;
    let mut checked = 0;
    for seed in 0..40u64 {
        let c = gen_choreography(seed, GenConfig::default());
        if !well_formed(&c).is_empty() {
            return Err(format!("generated term {seed} is ill-formed"));
        }
        if c.count_starts() == 0 {
            continue;
        }
        verify_both(&c, &gen_env(), 12)?;
        checked += 1;
    }
    if checked < 20 {
        return Err(format!("only {checked} generated terms with a start"));
    }
    Ok(())
}

fn c6_mutations() -> Result<(), String> {
    let envs = [corpus::env(&[true]), corpus::env(&[false])];
    for m in Mutation::SEEDED {
        let t = |c: &Choreography, k: &SessChan| m.apply(c, k);
        let caught = envs.iter().any(|env| {
            let s = soundness_check_with(&corpus::chor1(), &k(), env, 12, &t);
            let c = completeness_check_with(&corpus::chor1(), &k(), env, 12, &t);
            [s, c]
                .iter()
                .any(|v| !v.passed && v.counterexample.is_some())
        });
        if !caught {
            return Err(format!("mutation {m:?} not detected"));
        }
    }
    Ok(())
}

fn c7_reduction_chain() -> Result<(), String> {
    let trace = run(&corpus::chor1(), &corpus::env(&[true]), 2);
    let events: Vec<&Event> = trace.events().collect();
    match events.as_slice() {
        [Event::Start { .. }, Event::Com { value, .. }]
            if *value == Value::Str("pwd123".into()) => {}
        other => return Err(format!("events {other:?}")),
    }
    // (νk) C'[password()/pwd]: one restriction, no start left before the next com
    let last = trace.final_term().ok_or("no steps")?;
    match last {
        Choreography::Res(_, body) if matches!(**body, Choreography::Seq(..)) => Ok(()),
        other => Err(format!("unexpected term\n{}", pretty_chor(other))),
    }
}

fn c8_start_elimination() -> Result<(), String> {
    let env = corpus::env(&[false, true]);
    let orig = run(&corpus::chor1(), &env, 13);
    let merged = merge(&corpus::chor1(), &k(), &PublicChan::new("c")).map_err(|e| e.to_string())?;
    let after = run(&merged, &env, 12);
    if orig.start_count != 4 || after.start_count != 1 {
        return Err(format!(
            "start counts {} and {}",
            orig.start_count, after.start_count
        ));
    }
    let visible = |t: &Trace| -> Vec<String> {
        t.visible_events()
            .into_iter()
            .filter(|e| matches!(e, Event::Com { .. } | Event::Sel { .. }))
            .map(|e| match e {
                Event::Com {
                    from, value, to, ..
                } => format!("{}>{}:{value}", from.thread, to.thread),
                Event::Sel {
                    from, to, label, ..
                } => format!("{}>{}:{label}", from.thread, to.thread),
                _ => unreachable!(),
            })
            .collect()
    };
    let (a, b) = (visible(&orig), visible(&after));
    if a == b && a.len() == 7 {
        Ok(())
    } else {
        Err(format!("{a:?} vs {b:?}"))
    }
}

fn c9_properties() -> Result<(), String> {
    const N: u64 = 200;
    let small = GenConfig {
        max_depth: 8,
        ..GenConfig::default()
    };
    for seed in 0..N {
        let c = gen_choreography(seed, small);
        let text = pretty_chor(&c);
        let back = parse_choreography(&text).map_err(|e| format!("seed {seed}: {e}\n{text}"))?;
        if !alpha_equal(&c, &back) {
            return Err(format!("round trip, seed {seed}"));
        }
        // α-equivalence: reflexive, and canonical forms are fixed points
        let can = canonical(&c);
        if !alpha_equal(&c, &c) || canonical(&can) != can || !alpha_equal(&can, &c) {
            return Err(format!("alpha laws, seed {seed}"));
        }
        // substitution into a term without the variable free is the identity
        let x = gcmerge::VarName::new("unused_var");
        if c.substitute(&x, &Value::Int(0)) != c {
            return Err(format!("substitution, seed {seed}"));
        }
        // determinism along a short run
        let mut cur = c.clone();
        let env = gen_env();
        for _ in 0..6 {
            let succ = reductions(&cur, &env).map_err(|e| format!("seed {seed}: {e}"))?;
            if succ.len() > 1 {
                return Err(format!("{} successors, seed {seed}", succ.len()));
            }
            match succ.into_iter().next() {
                Some((_, next)) => cur = next,
                None => break,
            }
        }
    }
    for seed in 0..N {
        let g = gen_global_type(seed, 6);
        let paths = enumerate_paths(&paths_automaton(&g), 5);
        for w in &paths.words {
            if !paths.words.contains(&w[..w.len().saturating_sub(1)]) {
                return Err(format!("prefix closure, seed {seed}"));
            }
        }
        let bounds = MeshBounds {
            depth: 4,
            base_len: 4,
            components: 1,
        };
        if !mesh_member(&g, std::slice::from_ref(&g), bounds).member {
            return Err(format!("mesh reflexivity, seed {seed}: {g}"));
        }
        let map = g
            .roles()
            .into_iter()
            .map(|r| (r.clone(), RoleName::new(format!("{r}x"))))
            .collect();
        let renamed = g.rename_roles(&map);
        if !mesh_member(&renamed, std::slice::from_ref(&g), bounds).member {
            return Err(format!("mesh α-closure, seed {seed}: {g}"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    type Check = fn() -> Result<(), String>;
    let criteria: [(&str, Check, u64); 9] = [
        ("1 transformation golden", c1_transformation, 1),
        ("2 typing golden", c2_typing, 1),
        ("3 extracted type golden", c3_extraction, 1),
        ("4 mesh golden", c4_mesh, 5),
        ("5 soundness and completeness", c5_sound_and_complete, 60),
        ("6 mutation sensitivity", c6_mutations, 60),
        ("7 reduction chain", c7_reduction_chain, 1),
        ("8 start elimination", c8_start_elimination, 1),
        ("9 property suites", c9_properties, 120),
    ];
    let mut failed = Vec::new();
    for (name, check, limit) in criteria {
        let t0 = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t0.elapsed();
        let outcome = match outcome {
            Ok(()) if took > Duration::from_secs(limit) => {
                Err(format!("took {took:?}, limit {limit}s"))
            }
            o => o,
        };
        match outcome {
            Ok(()) => println!("PASS criterion {name} ({took:.2?})"),
            Err(why) => {
                println!("FAIL criterion {name} ({took:.2?}): {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failed: {failed:?}", failed.len());
        ExitCode::FAILURE
    }
}
