//! Line-based text formats.
//!
//! * `.ts` — a transition system: a `.ts` header, `initial <state>` exactly
//!   once, `edge <source> <event> <target>` per edge, and optional
//!   `state <name>` / `event <name>` lines forcing declaration of names that
//!   label no edge.
//! * `.union` — a `.union` header followed by `component <name> <path>` or
//!   `component <name> inline` … `end` blocks and `terminal <component>
//!   <state>` lines.
//! * `.cnf3` — `clause <v> <v> <v>` per line.
//! * `.ens` — `place`, `transition`, `flow <a> -> <b>` and `initial` lines.
//!
//! `#` starts a comment everywhere. Identifiers match `[A-Za-z0-9_.:+-]+`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexSet;
use thiserror::Error;

use crate::regions::{Region, Sign};
use crate::ts::{RawComponent, StructuralError, System, TransitionSystem};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Structure(#[from] StructuralError),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '+' | '-'))
}

/// Non-empty lines with comments stripped, tagged with 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn identifiers(line: usize, words: &[&str]) -> Result<(), ParseError> {
    for w in words {
        if !is_identifier(w) {
            return Err(syntax(line, format!("invalid identifier `{w}`")));
        }
    }
    Ok(())
}

fn expect_header<'a, I>(lines: &mut I, header: &str) -> Result<(), ParseError>
where
    I: Iterator<Item = (usize, Vec<&'a str>)>,
{
    match lines.next() {
        None => Err(syntax(
            1,
            format!("empty input, expected `{header}` header"),
        )),
        Some((n, words)) if words != [header] => {
            Err(syntax(n, format!("expected `{header}` header")))
        }
        Some(_) => Ok(()),
    }
}

/// Parses the `.ts` format. The component is named `name`.
pub fn parse_ts_named(text: &str, name: &str) -> Result<TransitionSystem, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, ".ts")?;
    parse_ts_body(lines, name, None).map(|(ts, _)| ts)
}

/// Parses the `.ts` format with the default component name `A`.
pub fn parse_ts(text: &str) -> Result<TransitionSystem, ParseError> {
    parse_ts_named(text, "A")
}

/// Parses `.ts` directives until `stop` (if any) is seen; returns the system
/// and the line number where parsing stopped.
fn parse_ts_body<'a, I>(
    lines: I,
    name: &str,
    stop: Option<&str>,
) -> Result<(TransitionSystem, Option<usize>), ParseError>
where
    I: Iterator<Item = (usize, Vec<&'a str>)>,
{
    let mut states: IndexSet<String> = IndexSet::new();
    let mut events: IndexSet<String> = IndexSet::new();
    let mut edges = Vec::new();
    let mut initial: Option<(usize, String)> = None;
    let mut last_line = 0;
    let mut stopped = None;
    for (n, words) in lines {
        last_line = n;
        if Some(words[0]) == stop && words.len() == 1 {
            stopped = Some(n);
            break;
        }
        identifiers(n, &words[1..])?;
        match (words[0], words.len()) {
            ("initial", 2) => {
                if let Some((first, _)) = &initial {
                    return Err(syntax(
                        n,
                        format!("duplicate `initial` declaration (first on line {first})"),
                    ));
                }
                states.insert(words[1].to_string());
                initial = Some((n, words[1].to_string()));
            }
            ("edge", 4) => {
                states.insert(words[1].to_string());
                events.insert(words[2].to_string());
                states.insert(words[3].to_string());
                edges.push((
                    words[1].to_string(),
                    words[2].to_string(),
                    words[3].to_string(),
                ));
            }
            ("event", 2) => {
                events.insert(words[1].to_string());
            }
            ("state", 2) => {
                states.insert(words[1].to_string());
            }
            (kw @ ("initial" | "edge" | "event" | "state"), k) => {
                return Err(syntax(
                    n,
                    format!("`{kw}` takes {} argument(s), got {}", arity(kw), k - 1),
                ));
            }
            (other, _) => return Err(syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    if let (Some(stop), None) = (stop, stopped) {
        return Err(syntax(last_line.max(1), format!("missing `{stop}`")));
    }
    let (_, initial) =
        initial.ok_or_else(|| syntax(last_line.max(1), "missing `initial` declaration"))?;
    let ts = TransitionSystem::from_raw(RawComponent {
        name: name.to_string(),
        initial,
        states: states.into_iter().collect(),
        events: events.into_iter().collect(),
        edges,
    })?;
    Ok((ts, stopped))
}

fn arity(kw: &str) -> usize {
    if kw == "edge" {
        3
    } else {
        1
    }
}

/// Serializes a transition system; `parse_ts` inverts this exactly.
pub fn serialize_ts(ts: &TransitionSystem) -> String {
    let mut out = String::from(".ts\n");
    write_ts_body(&mut out, ts);
    out
}

fn write_ts_body(out: &mut String, ts: &TransitionSystem) {
    let raw = ts.raw();
    let _ = writeln!(out, "initial {}", raw.initial);
    // Declaration order is reproduced by listing names that would otherwise
    // be introduced later (or never) before the edges.
    let mut seen_states: IndexSet<&str> = IndexSet::new();
    seen_states.insert(raw.initial.as_str());
    let mut seen_events: IndexSet<&str> = IndexSet::new();
    for (s, e, t) in &raw.edges {
        seen_states.insert(s);
        seen_events.insert(e);
        seen_states.insert(t);
    }
    let order_matches = |declared: &[String], seen: &IndexSet<&str>| {
        declared.len() == seen.len() && declared.iter().zip(seen).all(|(a, b)| a == b)
    };
    if !order_matches(&raw.states, &seen_states) {
        for s in &raw.states {
            let _ = writeln!(out, "state {s}");
        }
    }
    if !order_matches(&raw.events, &seen_events) {
        for e in &raw.events {
            let _ = writeln!(out, "event {e}");
        }
    }
    for (s, e, t) in &raw.edges {
        let _ = writeln!(out, "edge {s} {e} {t}");
    }
}

pub fn read_ts(path: &Path) -> Result<TransitionSystem, ParseError> {
    let text = read(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| is_identifier(s))
        .unwrap_or("A");
    parse_ts_named(&text, name)
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Contents of a `.union` file.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionFile {
    pub components: Vec<TransitionSystem>,
    /// `(component name, state name)` join terminals.
    pub terminals: Vec<(String, String)>,
}

/// Parses the `.union` format; component paths resolve against `base`.
pub fn parse_union(text: &str, base: Option<&Path>) -> Result<UnionFile, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, ".union")?;
    let mut components = Vec::new();
    let mut terminals = Vec::new();
    while let Some((n, words)) = lines.next() {
        identifiers(n, &words[1..])?;
        match (words[0], words.len()) {
            ("component", 3) if words[2] == "inline" => {
                match lines.next() {
                    Some((_, w)) if w == [".ts"] => {}
                    _ => return Err(syntax(n + 1, "inline component must start with `.ts`")),
                }
                let (ts, _) = parse_ts_body(&mut lines, words[1], Some("end"))?;
                components.push(ts);
            }
            ("component", 3) => {
                let path = match base {
                    Some(dir) => dir.join(words[2]),
                    None => PathBuf::from(words[2]),
                };
                let ts = parse_ts_named(&read(&path)?, words[1])?;
                components.push(ts);
            }
            ("terminal", 3) => terminals.push((words[1].to_string(), words[2].to_string())),
            (other, _) => return Err(syntax(n, format!("unexpected `{other}` in union file"))),
        }
    }
    Ok(UnionFile {
        components,
        terminals,
    })
}

pub fn read_union(path: &Path) -> Result<UnionFile, ParseError> {
    parse_union(&read(path)?, path.parent())
}

/// Serializes components inline, followed by terminal lines.
pub fn serialize_union(sys: &System, terminals: &[(String, String)]) -> String {
    let mut out = String::from(".union\n");
    for ci in 0..sys.components().len() {
        let ts =
            TransitionSystem::from_raw(sys.raw_component(ci)).expect("component of a valid system");
        let _ = writeln!(out, "component {} inline", ts.name());
        out.push_str(".ts\n");
        write_ts_body(&mut out, &ts);
        out.push_str("end\n");
    }
    for (c, s) in terminals {
        let _ = writeln!(out, "terminal {c} {s}");
    }
    out
}

/// Parses the `.cnf3` format into clauses.
pub fn parse_cnf3(text: &str) -> Result<Vec<[u32; 3]>, ParseError> {
    let mut clauses = Vec::new();
    for (n, words) in content_lines(text) {
        if words.len() != 4 || words[0] != "clause" {
            return Err(syntax(n, "expected `clause <v> <v> <v>`"));
        }
        let mut clause = [0u32; 3];
        for (slot, w) in clause.iter_mut().zip(&words[1..]) {
            *slot = w
                .parse()
                .map_err(|_| syntax(n, format!("`{w}` is not a variable index")))?;
        }
        clauses.push(clause);
    }
    Ok(clauses)
}

pub fn serialize_cnf3(clauses: &[[u32; 3]]) -> String {
    clauses
        .iter()
        .map(|[a, b, c]| format!("clause {a} {b} {c}\n"))
        .collect()
}

/// Witness format: `region: {a, b}` then `sig: e=-1, f=+1` listing only
/// non-obeying events.
pub fn format_region(sys: &System, region: &Region) -> String {
    let members: Vec<&str> = region.member_states().map(|s| sys.state_name(s)).collect();
    let sig: Vec<String> = sys
        .events()
        .filter(|&e| region.sign(e) != Sign::Obey)
        .map(|e| format!("{}={}", sys.event_name(e), region.sign(e)))
        .collect();
    format!(
        "region: {{{}}}\nsig: {}",
        members.join(", "),
        sig.join(", ")
    )
}

/// Parses the membership line of the witness format (`region: {a, b}`)
/// and returns the state names.
pub fn parse_region_members(line: &str) -> Option<Vec<String>> {
    let body = line.trim().strip_prefix("region:")?.trim();
    let inner = body.strip_prefix('{')?.strip_suffix('}')?;
    Some(
        inner
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect(),
    )
}

/// Raw contents of an `.ens` file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnsFile {
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    /// `(from, to)` in declaration order; either side may be a place.
    pub flows: Vec<(String, String)>,
    pub initial: Vec<String>,
}

pub fn parse_ens(text: &str) -> Result<EnsFile, ParseError> {
    let mut ens = EnsFile::default();
    let mut lines = content_lines(text).peekable();
    if lines.peek().is_some_and(|(_, w)| w == &[".ens"]) {
        lines.next();
    }
    for (n, words) in lines {
        match words[0] {
            "place" if words.len() == 2 => ens.places.push(words[1].to_string()),
            "transition" if words.len() == 2 => ens.transitions.push(words[1].to_string()),
            "flow" if words.len() == 4 && words[2] == "->" => {
                ens.flows.push((words[1].to_string(), words[3].to_string()))
            }
            "initial" => ens.initial.extend(words[1..].iter().map(|s| s.to_string())),
            _ => {
                return Err(syntax(
                    n,
                    "expected `place`, `transition`, `flow` or `initial`",
                ))
            }
        }
    }
    Ok(ens)
}

pub fn serialize_ens(ens: &EnsFile) -> String {
    let mut out = String::from(".ens\n");
    for p in &ens.places {
        let _ = writeln!(out, "place {p}");
    }
    for t in &ens.transitions {
        let _ = writeln!(out, "transition {t}");
    }
    for (a, b) in &ens.flows {
        let _ = writeln!(out, "flow {a} -> {b}");
    }
    out.push_str("initial");
    for p in &ens.initial {
        let _ = write!(out, " {p}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::region_from_names;
    use crate::ts::linear_ts;

    #[test]
    fn minimal_ts() {
        let ts = parse_ts(".ts\ninitial m0\nedge m0 k m1").unwrap();
        assert_eq!(ts.edges().len(), 1);
        assert_eq!(ts.state_name(ts.initial()), "m0");
    }

    #[test]
    fn empty_file_is_a_syntax_error() {
        assert!(matches!(
            parse_ts(""),
            Err(ParseError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_ts("# only a comment\n"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn duplicate_initial_is_rejected() {
        let err = parse_ts(".ts\ninitial a\nedge a x b\ninitial b\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 4, .. }), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_ts(".ts\n\n# c\ninitial a\nedge a b\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 5, .. }), "{err}");
        let err = parse_ts(".ts\ninitial a\nedge a x#y b\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err}");
        let err = parse_ts(".ts\ninitial a\nedge a e/f b\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn master_round_trips() {
        let m = linear_ts("m", &["k", "z_0", "o_0", "k", "h", "z_0", "o_1", "k"]);
        let text = serialize_ts(&m);
        let back = parse_ts(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize_ts(&back), text);
    }

    #[test]
    fn forced_declarations_survive() {
        let text = ".ts\ninitial s0\nevent unused\nedge s0 a s1\n";
        let ts = parse_ts(text).unwrap();
        assert_eq!(ts.event_count(), 2);
        let back = parse_ts(&serialize_ts(&ts)).unwrap();
        assert_eq!(back, ts);
        assert_eq!(serialize_ts(&back), serialize_ts(&ts));
    }

    #[test]
    fn union_inline_and_terminals() {
        let text = ".union\ncomponent A inline\n.ts\ninitial a0\nedge a0 x a1\nend\n\
                    component B inline\n.ts\ninitial b0\nedge b0 x b1\nend\nterminal A a1\n";
        let u = parse_union(text, None).unwrap();
        assert_eq!(u.components.len(), 2);
        assert_eq!(u.components[1].name(), "B");
        assert_eq!(u.terminals, [("A".to_string(), "a1".to_string())]);
        let missing_end = ".union\ncomponent A inline\n.ts\ninitial a0\n";
        assert!(parse_union(missing_end, None).is_err());
    }

    #[test]
    fn cnf3_round_trip() {
        let clauses = vec![[0, 1, 2], [3, 4, 5]];
        assert_eq!(parse_cnf3(&serialize_cnf3(&clauses)).unwrap(), clauses);
        assert!(parse_cnf3("clause 1 2\n").is_err());
    }

    #[test]
    fn region_witness_format() {
        let m = linear_ts("m", &["k", "z_0", "o_0", "k", "h", "z_0", "o_1", "k"]);
        let r = region_from_names(&m, &["m0", "m3", "m7"]).unwrap();
        let text = format_region(&m, &r);
        assert_eq!(text, "region: {m0, m3, m7}\nsig: k=-1, o_0=+1, o_1=+1");
        assert_eq!(
            parse_region_members(text.lines().next().unwrap()).unwrap(),
            ["m0", "m3", "m7"]
        );
    }

    #[test]
    fn ens_round_trip() {
        let ens = EnsFile {
            places: vec!["p0".into(), "p1".into()],
            transitions: vec!["a".into()],
            flows: vec![("p0".into(), "a".into()), ("a".into(), "p1".into())],
            initial: vec!["p0".into()],
        };
        assert_eq!(parse_ens(&serialize_ens(&ens)).unwrap(), ens);
    }
}
