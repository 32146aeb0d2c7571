//! Subcommand implementations. Each returns a [`Report`] carrying the text
//! output, its JSON mirror and the exit code.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use regionsynth::corpus::{random_linear, random_ts};
use regionsynth::dot::{ens_to_dot, ts_to_dot};
use regionsynth::io::{
    format_region, parse_cnf3, parse_ens, read_ts, read_union, serialize_ens, serialize_ts,
    serialize_union, ParseError,
};
use regionsynth::linear2::{linear2_ssp, separator, Linear2Error};
use regionsynth::properties::{
    has_essp, has_ssp, is_feasible, CheckOptions, PropertyError, Query, Verdict,
};
use regionsynth::reductions::{
    build_2grade2_essp, build_2grade2_ssp, build_linear3_essp, build_linear3_ssp,
    find_one_in_three_models, Construction, CubicMonotoneFormula, FormulaError, GadgetInstance,
    ReductionError,
};
use regionsynth::regions::{enumerate_regions, region_from_names, Region, RegionError, Sign};
use regionsynth::synthesis::{
    reachability_graph, synthesize, ts_isomorphic, ElementaryNetSystem, SynthesisError,
};
use regionsynth::unions::{connector_events, connector_state, JoinPlan, TsUnion, UnionError};
use regionsynth::{System, TransitionSystem};

use crate::{Cli, Command, CorpusKind, GlobalOpts, RegionSet};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Union(#[from] UnionError),
    #[error("{0}")]
    Linear2(#[from] Linear2Error),
    #[error("{0}")]
    Formula(#[from] FormulaError),
    #[error("{0}")]
    Reduction(#[from] ReductionError),
    #[error("{0}")]
    Synthesis(#[from] SynthesisError),
    #[error("{0}")]
    Region(#[from] RegionError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("timeout: deadline exceeded, {checked} queries checked")]
    Timeout { checked: usize },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Timeout { .. } => 3,
            _ => 2,
        }
    }
}

impl From<PropertyError> for CliError {
    fn from(err: PropertyError) -> Self {
        match err {
            PropertyError::Timeout { checked } => CliError::Timeout { checked },
            other => CliError::Input(other.to_string()),
        }
    }
}

/// Output of one command.
pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            code: 0,
        }
    }

    fn verdict(holds: bool, text: String, json: Value) -> Self {
        Report {
            text,
            json,
            code: if holds { 0 } else { 1 },
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { input } => validate(input),
        Command::Classify { input } => classify(input),
        Command::CheckSsp { input } => check(input, g, Property::Ssp),
        Command::CheckEssp { input } => check(input, g, Property::Essp),
        Command::CheckFeasible { input } => check(input, g, Property::Feasible),
        Command::Separator { input, i, j } => separator_cmd(input, *i, *j),
        Command::Linear2Ssp { input } => linear2_cmd(input),
        Command::Synthesize {
            input,
            regions,
            out,
            verify,
        } => synthesize_cmd(input, g, *regions, out.as_deref(), *verify),
        Command::ReachGraph { input } => reach_graph(input),
        Command::Reduce {
            construction,
            input,
            out,
            unchecked,
        } => reduce(*construction, input, out, *unchecked),
        Command::Models { input } => models(input),
        Command::ExportDot {
            input,
            highlight,
            out,
        } => export_dot(input, highlight.as_deref(), out.as_deref()),
        Command::Corpus {
            seed,
            count,
            states,
            kind,
            out,
        } => corpus(*seed, *count, *states, *kind, out),
    }
}

// ---------------------------------------------------------------------------
// Input helpers

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| {
        CliError::Parse(ParseError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// A `.ts` file or a `.union` file (anything else is read as `.ts`).
fn load_system(path: &Path) -> Result<TsUnion, CliError> {
    if extension(path) == "union" {
        let file = read_union(path)?;
        Ok(TsUnion::new(file.components)?)
    } else {
        Ok(TsUnion::from(read_ts(path)?))
    }
}

fn load_ts(path: &Path) -> Result<TransitionSystem, CliError> {
    if extension(path) == "union" {
        return Err(CliError::Input(format!(
            "`{}`: this command needs a single transition system, not a union",
            path.display()
        )));
    }
    Ok(read_ts(path)?)
}

fn require_valid(sys: &System) -> Result<(), CliError> {
    let report = sys.validate();
    if report.is_empty() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "input is not admissible: {report}"
        )))
    }
}

fn load_formula(path: &Path, unchecked: bool) -> Result<CubicMonotoneFormula, CliError> {
    let clauses = parse_cnf3(&read_text(path)?)?;
    Ok(if unchecked {
        CubicMonotoneFormula::new_unchecked(clauses)?
    } else {
        CubicMonotoneFormula::new(clauses)?
    })
}

fn deadline(g: &GlobalOpts) -> Option<Instant> {
    Some(Instant::now() + Duration::from_secs(g.timeout))
}

// ---------------------------------------------------------------------------
// JSON shapes

fn region_json(sys: &System, r: &Region) -> Value {
    let members: Vec<&str> = r.member_states().map(|s| sys.state_name(s)).collect();
    let signature: serde_json::Map<String, Value> = sys
        .events()
        .filter(|&e| r.sign(e) != Sign::Obey)
        .map(|e| (sys.event_name(e).to_string(), json!(r.sign(e).value())))
        .collect();
    json!({ "members": members, "signature": signature })
}

fn query_json(sys: &System, q: &Query) -> Value {
    match *q {
        Query::States(s, t) => json!({
            "kind": "states",
            "first": sys.state_name(s),
            "second": sys.state_name(t),
        }),
        Query::EventState(e, s) => json!({
            "kind": "event-state",
            "event": sys.event_name(e),
            "state": sys.state_name(s),
        }),
    }
}

fn regions_text(sys: &System, regions: &[Region]) -> String {
    regions
        .iter()
        .map(|r| format!("{}\n", format_region(sys, r)))
        .collect()
}

// ---------------------------------------------------------------------------
// Commands

fn validate(input: &Path) -> Result<Report, CliError> {
    let u = load_system(input)?;
    let report = u.validate();
    let text = if report.is_empty() {
        "valid\n".to_string()
    } else {
        report
            .violations
            .iter()
            .map(|v| format!("violation {v}\n"))
            .collect()
    };
    let json = json!({
        "valid": report.is_empty(),
        "violations": report.violations,
    });
    Ok(Report::verdict(report.is_empty(), text, json))
}

fn classify(input: &Path) -> Result<Report, CliError> {
    let u = load_system(input)?;
    let linear = (0..u.components().len()).all(|i| u.component_ts(i).linear_chain().is_ok());
    let (k, g) = (u.manifoldness(), u.degree());
    let text = format!(
        "components {}\nmanifoldness {k}\ndegree {g}\nlinear {linear}\n",
        u.components().len()
    );
    let json = json!({
        "components": u.components().len(),
        "manifoldness": k,
        "degree": g,
        "linear": linear,
    });
    Ok(Report::ok(text, json))
}

#[derive(Clone, Copy)]
enum Property {
    Ssp,
    Essp,
    Feasible,
}

impl Property {
    fn name(self) -> &'static str {
        match self {
            Property::Ssp => "ssp",
            Property::Essp => "essp",
            Property::Feasible => "feasible",
        }
    }
}

fn check(input: &Path, g: &GlobalOpts, property: Property) -> Result<Report, CliError> {
    let u = load_system(input)?;
    require_valid(&u)?;
    let options = CheckOptions {
        exhaustive: g.exhaustive,
        deadline: deadline(g),
    };
    let verdict = match property {
        Property::Ssp => has_ssp(&u, options)?,
        Property::Essp => has_essp(&u, options)?,
        Property::Feasible => is_feasible(&u, options)?,
    };
    Ok(verdict_report(&u, property.name(), &verdict))
}

fn verdict_report(sys: &System, property: &str, v: &Verdict) -> Report {
    let mut text = format!(
        "{property} {}\nchecked {}\n",
        if v.holds { "holds" } else { "fails" },
        v.checked
    );
    if let Some(q) = &v.counterexample {
        text.push_str(&format!("counterexample {}\n", q.describe(sys)));
    }
    for q in v.failures.iter().skip(1) {
        text.push_str(&format!("failure {}\n", q.describe(sys)));
    }
    if v.holds {
        text.push_str(&format!("witnesses {}\n", v.regions.len()));
        text.push_str(&regions_text(sys, &v.regions));
    }
    let json = json!({
        "property": property,
        "holds": v.holds,
        "checked": v.checked,
        "counterexample": v.counterexample.as_ref().map(|q| query_json(sys, q)),
        "failures": v.failures.iter().map(|q| query_json(sys, q)).collect::<Vec<_>>(),
        "regions": v.regions.iter().map(|r| region_json(sys, r)).collect::<Vec<_>>(),
    });
    Report::verdict(v.holds, text, json)
}

fn separator_cmd(input: &Path, i: usize, j: usize) -> Result<Report, CliError> {
    let ts = load_ts(input)?;
    require_valid(&ts)?;
    let result = separator(&ts, i, j)?;
    let chain = ts.linear_chain().map_err(|_| Linear2Error::NotLinear)?;
    let (si, sj) = (
        ts.state_name(chain.states[i]),
        ts.state_name(chain.states[j]),
    );
    match result.region(&ts) {
        Some(r) => {
            let text = format!("{}\n", format_region(&ts, &r));
            let json = json!({
                "states": [si, sj],
                "separable": true,
                "exit": result.exit.map(|e| ts.event_name(e)),
                "enter": result.enter.map(|e| ts.event_name(e)),
                "region": region_json(&ts, &r),
            });
            Ok(Report::verdict(true, text, json))
        }
        None => {
            let json = json!({ "states": [si, sj], "separable": false });
            Ok(Report::verdict(false, "UNSEPARABLE\n".to_string(), json))
        }
    }
}

fn linear2_cmd(input: &Path) -> Result<Report, CliError> {
    let ts = load_ts(input)?;
    require_valid(&ts)?;
    let v = linear2_ssp(&ts)?;
    let chain = ts.linear_chain().map_err(|_| Linear2Error::NotLinear)?;
    let name = |i: usize| ts.state_name(chain.states[i]).to_string();
    let mut text = format!(
        "ssp {}\nseparated-pairs {}\n",
        if v.holds { "holds" } else { "fails" },
        v.witnesses.len()
    );
    if let Some((i, j)) = v.counterexample {
        text.push_str(&format!("non-separable ({}, {})\n", name(i), name(j)));
    }
    if let Some((i, j)) = v.exact_subsequence {
        text.push_str(&format!(
            "exact-2fold-subsequence ({}, {})\n",
            name(i),
            name(j)
        ));
    }
    let json = json!({
        "holds": v.holds,
        "separated_pairs": v.witnesses.len(),
        "counterexample": v.counterexample.map(|(i, j)| [name(i), name(j)]),
        "exact_subsequence": v.exact_subsequence.map(|(i, j)| [name(i), name(j)]),
    });
    Ok(Report::verdict(v.holds, text, json))
}

fn synthesize_cmd(
    input: &Path,
    g: &GlobalOpts,
    set: RegionSet,
    out: Option<&Path>,
    verify: bool,
) -> Result<Report, CliError> {
    let ts = load_ts(input)?;
    require_valid(&ts)?;
    let regions = match set {
        RegionSet::All => enumerate_regions(&ts, g.cap)?,
        RegionSet::Witness => {
            let options = CheckOptions {
                exhaustive: false,
                deadline: deadline(g),
            };
            let v = is_feasible(&ts, options)?;
            if !v.holds {
                return Ok(verdict_report(&ts, "feasible", &v));
            }
            v.regions
        }
    };
    let ens = synthesize(&ts, &regions)?;
    let ens_text = serialize_ens(&ens.to_file());
    let isomorphic = ts_isomorphic(&reachability_graph(&ens).ts, &ts)?;
    let mut text = String::new();
    match out {
        Some(path) => {
            write_text(path, &ens_text)?;
            text.push_str(&format!(
                "places {}\ntransitions {}\nisomorphic {isomorphic}\n",
                ens.places().len(),
                ens.transitions().len()
            ));
        }
        None => text.push_str(&ens_text),
    }
    let json = json!({
        "places": ens.places(),
        "transitions": ens.transitions(),
        "flows": ens.flows(),
        "initial": ens.to_file().initial,
        "isomorphic": isomorphic,
    });
    let holds = !verify || isomorphic;
    Ok(Report::verdict(holds, text, json))
}

fn load_ens(input: &Path) -> Result<ElementaryNetSystem, CliError> {
    Ok(ElementaryNetSystem::from_file(&parse_ens(&read_text(
        input,
    )?)?)?)
}

fn reach_graph(input: &Path) -> Result<Report, CliError> {
    let ens = load_ens(input)?;
    let rg = reachability_graph(&ens);
    let marking = |i: usize| -> Vec<&str> {
        rg.markings[i]
            .ones()
            .map(|p| ens.places()[p].as_str())
            .collect()
    };
    let mut text = serialize_ts(&rg.ts);
    for s in rg.ts.states() {
        text.push_str(&format!(
            "# {} = {{{}}}\n",
            rg.ts.state_name(s),
            marking(s.index()).join(", ")
        ));
    }
    for v in &rg.report.violations {
        text.push_str(&format!("# violation {v}\n"));
    }
    let json = json!({
        "states": rg.ts.states().map(|s| json!({
            "name": rg.ts.state_name(s),
            "marking": marking(s.index()),
        })).collect::<Vec<_>>(),
        "edges": rg.ts.edges().iter().map(|e| [
            rg.ts.state_name(e.source),
            rg.ts.event_name(e.event),
            rg.ts.state_name(e.target),
        ]).collect::<Vec<_>>(),
        "violations": rg.report.violations,
    });
    Ok(Report::ok(text, json))
}

fn join_plan_text(union: &TsUnion, plan: &JoinPlan) -> String {
    let mut out = String::from(".join\n");
    let comps = union.components();
    for (i, pair) in comps.windows(2).enumerate() {
        let terminal = plan.terminals[i].as_deref().unwrap_or("?");
        let (y1, y2) = connector_events(i + 1);
        out.push_str(&format!(
            "connect {} {terminal} {y1} {} {y2} {} {}\n",
            pair[0].name(),
            connector_state(i + 1),
            pair[1].name(),
            union.state_name(pair[1].initial()),
        ));
    }
    out
}

fn reduce(
    construction: Construction,
    input: &Path,
    out: &Path,
    unchecked: bool,
) -> Result<Report, CliError> {
    let instance: GadgetInstance = if construction.takes_formula() {
        let formula = load_formula(input, unchecked)?;
        match construction {
            Construction::Linear3Essp => build_linear3_essp(&formula)?,
            _ => build_2grade2_essp(&formula)?,
        }
    } else {
        let ts = load_ts(input)?;
        match construction {
            Construction::Linear3Ssp => build_linear3_ssp(&ts)?,
            _ => build_2grade2_ssp(&ts)?,
        }
    };
    let joined = instance.joined()?;
    fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance");
    let u = &instance.union;
    let files = [
        (
            format!("{stem}.union"),
            serialize_union(u, &instance.join_plan.pairs(u)),
        ),
        (
            format!("{stem}.join"),
            join_plan_text(u, &instance.join_plan),
        ),
        (format!("{stem}.key"), instance.key_manifest()),
        (format!("{stem}.joined.ts"), serialize_ts(&joined)),
    ];
    let mut written = Vec::new();
    for (name, text) in &files {
        let path = out.join(name);
        write_text(&path, text)?;
        written.push(path.display().to_string());
    }
    let class = joined.classify();
    let text = format!(
        "construction {}\ncomponents {}\nunion-states {}\njoined-states {}\nmanifoldness {}\ndegree {}\nlinear {}\n{}",
        construction.name(),
        u.components().len(),
        u.state_count(),
        joined.state_count(),
        class.manifoldness,
        class.degree,
        class.linear,
        written.iter().map(|w| format!("wrote {w}\n")).collect::<String>(),
    );
    let json = json!({
        "construction": construction.name(),
        "components": u.components().len(),
        "union_states": u.state_count(),
        "joined_states": joined.state_count(),
        "manifoldness": class.manifoldness,
        "degree": class.degree,
        "linear": class.linear,
        "files": written,
    });
    Ok(Report::ok(text, json))
}

fn models(input: &Path) -> Result<Report, CliError> {
    let formula = load_formula(input, false)?;
    let models = find_one_in_three_models(&formula)?;
    let mut text: String = models.iter().map(|m| format!("{m}\n")).collect();
    text.push_str(&format!("models {}\n", models.len()));
    let json = json!({
        "models": models.iter().map(|m| m.variables().to_vec()).collect::<Vec<_>>(),
        "count": models.len(),
    });
    Ok(Report::verdict(!models.is_empty(), text, json))
}

fn export_dot(
    input: &Path,
    highlight: Option<&str>,
    out: Option<&Path>,
) -> Result<Report, CliError> {
    let dot = if extension(input) == "ens" {
        if highlight.is_some() {
            return Err(CliError::Input(
                "--highlight applies to transition systems only".into(),
            ));
        }
        ens_to_dot(&load_ens(input)?)
    } else {
        let u = load_system(input)?;
        let region = match highlight {
            None => None,
            Some(list) => {
                let names: Vec<&str> = list
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                if let Some(bad) = names.iter().find(|n| u.state(n).is_none()) {
                    return Err(CliError::Input(format!("unknown state `{bad}`")));
                }
                Some(region_from_names(&u, &names).ok_or_else(|| {
                    CliError::Input("highlighted states do not form a region".into())
                })?)
            }
        };
        ts_to_dot(&u, region.as_ref())
    };
    let text = match out {
        Some(path) => {
            write_text(path, &dot)?;
            format!("wrote {}\n", path.display())
        }
        None => dot.clone(),
    };
    Ok(Report::ok(text, json!({ "dot": dot })))
}

fn corpus(
    seed: u64,
    count: usize,
    states: usize,
    kind: CorpusKind,
    out: &Path,
) -> Result<Report, CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = Vec::new();
    for i in 0..count {
        let n = 1 + (i % states);
        let ts = match kind {
            CorpusKind::Linear2 => random_linear(&mut rng, n, 2),
            CorpusKind::Linear3 => random_linear(&mut rng, n, 3),
            CorpusKind::General => random_ts(&mut rng, n, 1 + n / 2, n),
        };
        let path = out.join(format!("c{i:04}.ts"));
        write_text(&path, &serialize_ts(&ts))?;
        written.push(path.display().to_string());
    }
    let text = written.iter().map(|w| format!("wrote {w}\n")).collect();
    Ok(Report::ok(text, json!({ "seed": seed, "files": written })))
}
