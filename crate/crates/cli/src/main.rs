use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gcmerge::ast::{well_formed, Choreography, GlobalType, PublicChan, SessChan};
use gcmerge::typealg::{show_word, ExtractError};
use gcmerge::typing::SortEnv;
use gcmerge::verify::{completeness_check_with, soundness_check_with, standard_transform, Verdict};
use gcmerge::*;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod output;

use output::{Format, Report};

#[derive(Parser)]
#[command(
    name = "gcmerge",
    version,
    about = "Choreographies with session starts: typing, merging, protocol extraction"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a choreography (.gc) or protocol file (.gt) and print it back.
    Parse { file: PathBuf },
    /// Typecheck a choreography against the protocols bound to its channels.
    Check {
        file: PathBuf,
        #[command(flatten)]
        protocols: ProtocolArgs,
        #[command(flatten)]
        env: EnvArg,
    },
    /// Run a choreography for at most N steps.
    Run {
        file: PathBuf,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, default_value_t = 20)]
        fuel: usize,
    },
    /// Merge all sessions of a choreography into one.
    Merge {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        /// Write the merged choreography here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract the global type followed by a choreography (merging it first if needed).
    Extract {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        env: EnvArg,
        /// Protocol name used in the output.
        #[arg(long, default_value = "G")]
        name: String,
    },
    /// Decide (within bounds) whether a protocol is an interleaving of others.
    Mesh {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        against: Vec<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Bounded check that merging preserves and reflects behaviour.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long, default_value_t = 12, value_parser = positive)]
        depth: usize,
        /// Check a deliberately broken transformation instead.
        #[arg(long, value_enum)]
        mutation: Option<MutationArg>,
    },
    /// check, merge, extract, mesh and verify in sequence.
    Pipeline {
        file: PathBuf,
        #[command(flatten)]
        protocols: ProtocolArgs,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, default_value_t = 12, value_parser = positive)]
        depth: usize,
    },
}

#[derive(Args)]
struct ProtocolArgs {
    /// Protocol files (.gt).
    #[arg(long, num_args = 1.., required = true)]
    protocols: Vec<PathBuf>,
    /// Bind a public channel to a protocol, as `a=Ga`. Unbound channels are
    /// matched to protocols named `a`, `Ga` or `G_a`.
    #[arg(long = "bind", value_parser = parse_binding)]
    bind: Vec<(String, String)>,
}

#[derive(Args)]
struct TargetArgs {
    /// Session of the merged choreography.
    #[arg(long, default_value = "k")]
    session: String,
    /// Public channel of the synthesised start.
    #[arg(long, default_value = "c")]
    chan: String,
}

#[derive(Args)]
struct EnvArg {
    /// Builtin environment (JSON). Defaults to `<file stem>.env.json` next to the input, if present.
    #[arg(long)]
    env: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// Longest candidate path.
    #[arg(short = 'D', default_value_t = 8, value_parser = positive)]
    path_depth: usize,
    /// Longest base word of the original protocols.
    #[arg(short = 'L', default_value_t = 5, value_parser = positive)]
    base_len: usize,
    /// Maximum number of interleaved components [default: number of original protocols].
    #[arg(short = 'M', value_parser = positive)]
    components: Option<usize>,
}

impl BoundArgs {
    fn bounds(&self, originals: usize) -> MeshBounds {
        MeshBounds {
            depth: self.path_depth,
            base_len: self.base_len,
            components: self.components.unwrap_or(originals.max(1)),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    DropCom,
    SwapSelLabels,
    ReorderComs,
    KeepStart,
    RenameRole,
}

impl MutationArg {
    fn mutation(self) -> Mutation {
        match self {
            MutationArg::DropCom => Mutation::DropCom { index: 1 },
            MutationArg::SwapSelLabels => Mutation::SwapSelLabels,
            MutationArg::ReorderComs => Mutation::ReorderComs,
            MutationArg::KeepStart => Mutation::KeepStart,
            MutationArg::RenameRole => Mutation::RenameRole,
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (a, g) = s.split_once('=').ok_or("expected CHAN=PROTOCOL")?;
    if a.is_empty() || g.is_empty() {
        return Err("expected CHAN=PROTOCOL".into());
    }
    Ok((a.to_string(), g.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.cmd) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: &Cmd) -> Result<Report> {
    match cmd {
        Cmd::Parse { file } => cmd_parse(file),
        Cmd::Check {
            file,
            protocols,
            env,
        } => {
            let c = read_chor(file)?;
            let gamma = load_gamma(&c, protocols)?;
            let sorts = SortEnv::from_env(&load_env(file, env)?);
            Ok(check_report(&gamma, &c, &sorts))
        }
        Cmd::Run { file, env, fuel } => {
            let c = read_chor(file)?;
            let env = load_env(file, env)?;
            Ok(run_report(&run(&c, &env, *fuel)))
        }
        Cmd::Merge {
            file,
            target,
            output,
        } => {
            let c = read_chor(file)?;
            let (k, a) = target.names();
            let merged = match merge(&c, &k, &a) {
                Ok(m) => m,
                Err(e) => {
                    return Ok(Report::fail(
                        format!("merge failed: {e}\n"),
                        json!({ "error": e.to_string() }),
                    ))
                }
            };
            let text = pretty_chor(&merged);
            if let Some(out) = output {
                std::fs::write(out, format!("{text}\n"))
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            Ok(Report::ok(
                format!("{text}\n"),
                json!({ "merged": text, "term": merged }),
            ))
        }
        Cmd::Extract {
            file,
            target,
            env,
            name,
        } => {
            let c = read_chor(file)?;
            let sorts = SortEnv::from_env(&load_env(file, env)?);
            Ok(match extract(&c, target, &sorts) {
                Ok((g, merged_first)) => {
                    let text = protocol_text(name, &g);
                    Report::ok(
                        format!("{text}\n"),
                        json!({ "protocol": name, "type": pretty_type(&g), "merged_first": merged_first, "ast": g }),
                    )
                }
                Err(e) => Report::fail(format!("extraction failed: {e}\n"), json!({ "error": e })),
            })
        }
        Cmd::Mesh {
            candidate,
            against,
            bounds,
        } => {
            let cand = read_single_protocol(candidate)?;
            let mut originals = Vec::new();
            for p in against {
                originals.extend(read_protocols(p)?.into_values());
            }
            Ok(mesh_report(&mesh_member(
                &cand,
                &originals,
                bounds.bounds(originals.len()),
            )))
        }
        Cmd::Verify {
            file,
            target,
            env,
            depth,
            mutation,
        } => {
            let c = read_chor(file)?;
            let env = load_env(file, env)?;
            let k = SessChan::new(target.session.as_str());
            let verdicts = match mutation {
                None => verify_both(&c, &k, &env, *depth, &standard_transform),
                Some(m) => {
                    let m = m.mutation();
                    verify_both(
                        &c,
                        &k,
                        &env,
                        *depth,
                        &move |c: &Choreography, k: &SessChan| m.apply(c, k),
                    )
                }
            };
            Ok(verify_report(&verdicts))
        }
        Cmd::Pipeline {
            file,
            protocols,
            target,
            env,
            bounds,
            depth,
        } => pipeline(file, protocols, target, env, bounds, *depth),
    }
}

impl TargetArgs {
    fn names(&self) -> (SessChan, PublicChan) {
        (
            SessChan::new(self.session.as_str()),
            PublicChan::new(self.chan.as_str()),
        )
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_chor(path: &Path) -> Result<Choreography> {
    let c = parse_choreography(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let diags = well_formed(&c);
    if !diags.is_empty() {
        let list: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        bail!("{}: not well-formed: {}", path.display(), list.join("; "));
    }
    Ok(c)
}

fn read_protocols(path: &Path) -> Result<Protocols> {
    parse_protocols(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn read_single_protocol(path: &Path) -> Result<GlobalType> {
    let ps = read_protocols(path)?;
    if ps.len() != 1 {
        bail!(
            "{}: expected exactly one protocol, found {}",
            path.display(),
            ps.len()
        );
    }
    Ok(ps.into_values().next().unwrap())
}

fn load_env(file: &Path, arg: &EnvArg) -> Result<BuiltinEnv> {
    let path = match &arg.env {
        Some(p) => p.clone(),
        None => {
            let stem = file.file_stem().unwrap_or_default().to_string_lossy();
            let default = file.with_file_name(format!("{stem}.env.json"));
            if !default.exists() {
                return Ok(BuiltinEnv::new());
            }
            default
        }
    };
    BuiltinEnv::from_json(&read(&path)?).with_context(|| format!("{}", path.display()))
}

/// Binds every public channel used by `c` to a protocol.
fn load_gamma(c: &Choreography, args: &ProtocolArgs) -> Result<Gamma> {
    let mut all = Protocols::new();
    for p in &args.protocols {
        for (name, g) in read_protocols(p)? {
            if all.insert(name.clone(), g).is_some() {
                bail!("protocol {name} defined twice");
            }
        }
    }
    let mut gamma = Gamma::new();
    for (a, name) in &args.bind {
        let g = all
            .get(name)
            .ok_or_else(|| anyhow!("--bind {a}={name}: no protocol named {name}"))?;
        gamma.insert(PublicChan::new(a.as_str()), g.clone());
    }
    for a in public_channels(c) {
        if gamma.contains_key(&a) {
            continue;
        }
        let s = a.as_str();
        let found = [s.to_string(), format!("G{s}"), format!("G_{s}")]
            .into_iter()
            .find_map(|n| {
                all.iter()
                    .find(|(p, _)| p.eq_ignore_ascii_case(&n))
                    .map(|(_, g)| g.clone())
            });
        match found {
            Some(g) => {
                gamma.insert(a, g);
            }
            None => bail!("channel {s} is not bound to a protocol (use --bind {s}=NAME)"),
        }
    }
    Ok(gamma)
}

fn public_channels(c: &Choreography) -> Vec<PublicChan> {
    let mut out = Vec::new();
    for eta in c.etas() {
        if let Eta::Start { chan, .. } = eta {
            if !out.contains(chan) {
                out.push(chan.clone());
            }
        }
    }
    out
}

/// Extracts directly, or from the merged term when `c` uses several sessions.
fn extract(
    c: &Choreography,
    target: &TargetArgs,
    sorts: &SortEnv,
) -> Result<(GlobalType, bool), String> {
    match extract_type(c, sorts) {
        Ok(g) => Ok((g, false)),
        Err(ExtractError::MultiSession(_) | ExtractError::UnexpectedStart(_)) => {
            let (k, a) = target.names();
            let merged = merge(c, &k, &a).map_err(|e| e.to_string())?;
            extract_type(&merged, sorts)
                .map(|g| (g, true))
                .map_err(|e| e.to_string())
        }
        Err(e) => Err(e.to_string()),
    }
}

fn protocol_text(name: &str, g: &GlobalType) -> String {
    format!("protocol {name} {{ {} }}", pretty_type(g))
}

fn cmd_parse(file: &Path) -> Result<Report> {
    let text = read(file)?;
    if file.extension().is_some_and(|e| e == "gt") {
        let ps = parse_protocols(&text).map_err(|e| anyhow!("{}:{e}", file.display()))?;
        let mut out = String::new();
        for (name, g) in &ps {
            writeln!(out, "{}", protocol_text(name, g)).unwrap();
        }
        return Ok(Report::ok(out, json!({ "protocols": ps })));
    }
    let c = parse_choreography(&text).map_err(|e| anyhow!("{}:{e}", file.display()))?;
    let diags: Vec<String> = well_formed(&c).iter().map(|d| d.to_string()).collect();
    let mut out = format!("{}\n", pretty_chor(&c));
    for d in &diags {
        writeln!(out, "warning: {d}").unwrap();
    }
    Ok(Report::ok(
        out,
        json!({ "term": c, "well_formed": diags.is_empty(), "diagnostics": diags }),
    ))
}

fn check_report(gamma: &Gamma, c: &Choreography, sorts: &SortEnv) -> Report {
    let r = typecheck(gamma, c, &Delta::new(), sorts);
    let mut text = String::new();
    if r.ok {
        let done: Vec<String> = r.completed_sessions.iter().map(|k| k.to_string()).collect();
        writeln!(
            text,
            "ok (sessions completed: {})",
            if done.is_empty() {
                "none".into()
            } else {
                done.join(", ")
            }
        )
        .unwrap();
    } else {
        writeln!(text, "ill-typed:").unwrap();
        for e in &r.errors {
            writeln!(text, "  {e}").unwrap();
        }
    }
    Report::new(r.ok, text, json!(r))
}

fn run_report(t: &Trace) -> Report {
    let mut text = String::new();
    for (i, s) in t.steps.iter().enumerate() {
        writeln!(text, "{:>3}  {}", i + 1, s.event).unwrap();
    }
    writeln!(text, "steps: {}, starts: {}", t.steps.len(), t.start_count).unwrap();
    if t.fuel_exhausted {
        writeln!(text, "fuel exhausted").unwrap();
    } else if let Some(e) = &t.error {
        writeln!(text, "stuck: {e}").unwrap();
    } else {
        writeln!(text, "terminated").unwrap();
    }
    let events: Vec<&Event> = t.events().collect();
    let json = json!({
        "events": events,
        "start_count": t.start_count,
        "steps": t.steps.len(),
        "fuel_exhausted": t.fuel_exhausted,
        "error": t.error,
        "final": t.final_term().map(pretty_chor),
    });
    Report::new(t.error.is_none(), text, json)
}

fn mesh_report(r: &MeshReport) -> Report {
    let mut text = format!("{}\n", r.summary());
    writeln!(text, "paths checked: {}", r.checked_paths).unwrap();
    if !r.renaming.is_empty() && r.renaming.iter().any(|(a, b)| a != b) {
        let ren: Vec<String> = r
            .renaming
            .iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        writeln!(text, "role renaming: {}", ren.join(", ")).unwrap();
    }
    if let Some(w) = &r.failing {
        writeln!(text, "failing path (length {}): {}", w.len(), show_word(w)).unwrap();
    }
    Report::new(r.member, text, json!(r))
}

fn verify_both(
    c: &Choreography,
    k: &SessChan,
    env: &BuiltinEnv,
    depth: usize,
    transform: verify::Transform<'_>,
) -> [Verdict; 2] {
    [
        soundness_check_with(c, k, env, depth, transform),
        completeness_check_with(c, k, env, depth, transform),
    ]
}

fn verdict_text(v: &Verdict) -> String {
    let name = format!("{:?}", v.property).to_lowercase();
    let mut text = if v.passed {
        format!(
            "{name}: passed (depth {}, {} start-only steps)\n",
            v.depth_checked,
            v.pure_start_steps()
        )
    } else {
        format!("{name}: FAILED at depth {}\n", v.depth_checked)
    };
    if let Some(cx) = &v.counterexample {
        writeln!(text, "  {}", cx.explanation).unwrap();
        if let Some(e) = &cx.step {
            writeln!(text, "  step: {e}").unwrap();
        }
        writeln!(
            text,
            "  state: {}",
            cx.state_before.replace('\n', "\n         ")
        )
        .unwrap();
    }
    text
}

fn verify_report(vs: &[Verdict; 2]) -> Report {
    let text: String = vs.iter().map(verdict_text).collect();
    let passed = vs.iter().all(|v| v.passed);
    Report::new(
        passed,
        text,
        json!({ "soundness": vs[0], "completeness": vs[1] }),
    )
}

fn pipeline(
    file: &Path,
    protocols: &ProtocolArgs,
    target: &TargetArgs,
    env: &EnvArg,
    bounds: &BoundArgs,
    depth: usize,
) -> Result<Report> {
    let c = read_chor(file)?;
    let gamma = load_gamma(&c, protocols)?;
    let env = load_env(file, env)?;
    let sorts = SortEnv::from_env(&env);
    let (k, a) = target.names();

    let mut text = String::new();
    let mut passed = true;
    let mut stages = serde_json::Map::new();

    let check = check_report(&gamma, &c, &sorts);
    stage(&mut text, &mut stages, &mut passed, "check", check);

    let merged = match merge(&c, &k, &a) {
        Ok(m) => m,
        Err(e) => {
            let r = Report::fail(format!("failed: {e}\n"), json!({ "error": e.to_string() }));
            stage(&mut text, &mut stages, &mut passed, "merge", r);
            return Ok(Report::new(false, text, Value::Object(stages)));
        }
    };
    let merged_text = pretty_chor(&merged);
    let r = Report::ok(
        format!("{merged_text}\n"),
        json!({ "merged": merged_text, "term": merged }),
    );
    stage(&mut text, &mut stages, &mut passed, "merge", r);

    match extract_type(&merged, &sorts) {
        Ok(g) => {
            let r = Report::ok(
                format!("{}\n", protocol_text("G", &g)),
                json!({ "protocol": "G", "type": pretty_type(&g), "ast": g }),
            );
            stage(&mut text, &mut stages, &mut passed, "extract", r);
            let originals: Vec<GlobalType> = gamma.values().cloned().collect();
            let r = mesh_report(&mesh_member(&g, &originals, bounds.bounds(originals.len())));
            stage(&mut text, &mut stages, &mut passed, "mesh", r);
        }
        Err(e) => {
            let r = Report::fail(format!("failed: {e}\n"), json!({ "error": e.to_string() }));
            stage(&mut text, &mut stages, &mut passed, "extract", r);
        }
    }

    let r = verify_report(&verify_both(&c, &k, &env, depth, &standard_transform));
    stage(&mut text, &mut stages, &mut passed, "verify", r);

    writeln!(
        text,
        "\n{}",
        if passed {
            "pipeline: ok"
        } else {
            "pipeline: FAILED"
        }
    )
    .unwrap();
    stages.insert("passed".into(), json!(passed));
    Ok(Report::new(passed, text, Value::Object(stages)))
}

fn stage(
    text: &mut String,
    json: &mut serde_json::Map<String, Value>,
    passed: &mut bool,
    name: &str,
    r: Report,
) {
    if !text.is_empty() {
        text.push('\n');
    }
    writeln!(text, "== {name} ==").unwrap();
    text.push_str(&r.text);
    *passed &= r.passed;
    let mut body = r.json;
    if let Value::Object(m) = &mut body {
        m.insert("passed".into(), json!(r.passed));
    }
    json.insert(name.into(), body);
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bindings() {
        assert_eq!(parse_binding("a=Ga"), Ok(("a".into(), "Ga".into())));
        assert!(parse_binding("a").is_err());
        assert!(parse_binding("=Ga").is_err());
        assert!(positive("0").is_err());
    }
}
