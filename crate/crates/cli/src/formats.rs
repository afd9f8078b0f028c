//! Text formats: models, partitions, plain graphs, MCP instances and the
//! key-value result documents.
//!
//! Probabilities are accepted as `p/q` rationals or decimals and always
//! serialized as `p/q` in lowest terms, so serialization round-trips
//! exactly. Lines starting with `#` and blank lines are ignored on input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use treewit_core::mcp::{McpInstance, RatMatrix};
use treewit_core::model::{ModelKind, ProbabilisticModel, StateId};
use treewit_core::scalar::BigRational;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid rational literal '{0}'")]
    BadRational(String),
    #[error("model is not a valid substochastic system: {0}")]
    InvalidModel(String),
    #[error("{0}")]
    Structure(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------------------
// Rationals

/// Parse `p/q`, an integer, or a plain decimal such as `0.25`; decimals are
/// converted exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, FormatError> {
    let bad = || FormatError::BadRational(s.to_string());
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let digits: String = format!(
            "{}{}",
            int_part.trim_start_matches(['-', '+']),
            frac_part
        );
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        let r = BigRational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Lowest-terms `p/q`, the denominator always printed.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

// ---------------------------------------------------------------------------
// Model files

/// Parse a model file:
///
/// ```text
/// dtmc                    # or: mdp
/// states 3
/// 0 1 1/2                 # src dst prob   (mdp: src action dst prob)
/// init:
/// 0 1/1
/// goal:
/// 2
/// ```
pub fn parse_model(text: &str) -> Result<ProbabilisticModel, FormatError> {
    let mut lines = content_lines(text);
    let (ln, kind_line) = lines
        .next()
        .ok_or_else(|| syntax(0, "empty model file"))?;
    let kind = match kind_line {
        "dtmc" => ModelKind::Dtmc,
        "mdp" => ModelKind::Mdp,
        other => return Err(syntax(ln, format!("expected 'dtmc' or 'mdp', got '{other}'"))),
    };
    let (ln, states_line) = lines
        .next()
        .ok_or_else(|| syntax(0, "missing 'states N' line"))?;
    let n: usize = states_line
        .strip_prefix("states ")
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| syntax(ln, "expected 'states N'"))?;

    let mut builder = ProbabilisticModel::builder(kind, n);
    #[derive(PartialEq)]
    enum Section {
        Transitions,
        Init,
        Goal,
    }
    let mut section = Section::Transitions;
    for (ln, line) in lines {
        match line {
            "init:" => {
                section = Section::Init;
                continue;
            }
            "goal:" => {
                section = Section::Goal;
                continue;
            }
            _ => {}
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Transitions => match (kind, toks.as_slice()) {
                (ModelKind::Dtmc, [src, dst, prob]) => {
                    let src = parse_state(src, ln)?;
                    let dst = parse_state(dst, ln)?;
                    builder = builder.transition(src, dst, parse_rational(prob)?);
                }
                (ModelKind::Mdp, [src, act, dst, prob]) => {
                    let src = parse_state(src, ln)?;
                    let dst = parse_state(dst, ln)?;
                    builder = builder.mdp_transition(src, act, dst, parse_rational(prob)?);
                }
                _ => return Err(syntax(ln, "malformed transition line")),
            },
            Section::Init => match toks.as_slice() {
                [s, prob] => {
                    let s = parse_state(s, ln)?;
                    builder = builder.initial(s, parse_rational(prob)?);
                }
                _ => return Err(syntax(ln, "expected 'state prob' in init section")),
            },
            Section::Goal => match toks.as_slice() {
                [s] => {
                    let s = parse_state(s, ln)?;
                    builder = builder.goal(s);
                }
                _ => return Err(syntax(ln, "expected a single state id in goal section")),
            },
        }
    }
    let model = builder
        .build()
        .map_err(|e| FormatError::InvalidModel(e.to_string()))?;
    let violations = model.validate();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(FormatError::InvalidModel(msgs.join("; ")));
    }
    Ok(model)
}

fn parse_state(tok: &str, line: usize) -> Result<StateId, FormatError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("bad state id '{tok}'")))
}

pub fn serialize_model(model: &ProbabilisticModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", model.kind());
    let _ = writeln!(out, "states {}", model.n_states());
    for s in 0..model.n_states() {
        for row in model.actions(s) {
            for (t, p) in &row.transitions {
                match model.kind() {
                    ModelKind::Dtmc => {
                        let _ = writeln!(out, "{} {} {}", s, t, format_rational(p));
                    }
                    ModelKind::Mdp => {
                        let _ = writeln!(out, "{} {} {} {}", s, row.label, t, format_rational(p));
                    }
                }
            }
        }
    }
    let _ = writeln!(out, "init:");
    for (s, p) in model.initial().iter().enumerate() {
        if !p.is_zero() {
            let _ = writeln!(out, "{} {}", s, format_rational(p));
        }
    }
    let _ = writeln!(out, "goal:");
    for g in model.goal() {
        let _ = writeln!(out, "{}", g);
    }
    out
}

// ---------------------------------------------------------------------------
// Partition files

/// One block per line: `blockId: s1 s2 ...`; blocks are ordered by id.
pub fn parse_partition(text: &str) -> Result<Vec<BTreeSet<StateId>>, FormatError> {
    let mut by_id: BTreeMap<usize, BTreeSet<StateId>> = BTreeMap::new();
    for (ln, line) in content_lines(text) {
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(ln, "expected 'blockId: s1 s2 ...'"))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| syntax(ln, format!("bad block id '{}'", id.trim())))?;
        let mut states = BTreeSet::new();
        for tok in rest.split_whitespace() {
            states.insert(parse_state(tok, ln)?);
        }
        if by_id.insert(id, states).is_some() {
            return Err(syntax(ln, format!("duplicate block id {id}")));
        }
    }
    Ok(by_id.into_values().collect())
}

pub fn serialize_partition(blocks: &[BTreeSet<StateId>]) -> String {
    let mut out = String::new();
    for (i, block) in blocks.iter().enumerate() {
        let states: Vec<String> = block.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{}: {}", i, states.join(" "));
    }
    out
}

// ---------------------------------------------------------------------------
// Plain graph files

/// `graph` / `vertices N` / one `u v` edge per line.
pub fn parse_graph(text: &str) -> Result<treewit_core::UnderlyingGraph, FormatError> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| syntax(0, "empty graph file"))?;
    if head != "graph" {
        return Err(syntax(ln, "expected 'graph' header"));
    }
    let (ln, vline) = lines
        .next()
        .ok_or_else(|| syntax(0, "missing 'vertices N' line"))?;
    let n: usize = vline
        .strip_prefix("vertices ")
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| syntax(ln, "expected 'vertices N'"))?;
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [u, v] => {
                let u = parse_state(u, ln)?;
                let v = parse_state(v, ln)?;
                if u >= n || v >= n {
                    return Err(syntax(ln, "edge endpoint out of range"));
                }
                edges.push((u, v));
            }
            _ => return Err(syntax(ln, "expected 'u v'")),
        }
    }
    Ok(treewit_core::UnderlyingGraph::from_edges(n, edges))
}

pub fn serialize_graph(g: &treewit_core::UnderlyingGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph");
    let _ = writeln!(out, "vertices {}", g.n_vertices());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", u, v);
    }
    out
}

// ---------------------------------------------------------------------------
// MCP instance files

/// Instance text plus free-form rational metadata (`meta key p/q` lines)
/// carried between the pipeline stages.
#[derive(Debug, Clone)]
pub struct McpFile {
    pub instance: McpInstance,
    pub meta: BTreeMap<String, BigRational>,
}

pub fn parse_mcp(text: &str) -> Result<McpFile, FormatError> {
    let mut lines = content_lines(text).peekable();
    let (ln, head) = lines.next().ok_or_else(|| syntax(0, "empty instance file"))?;
    if head != "mcp" {
        return Err(syntax(ln, "expected 'mcp' header"));
    }
    let mut dim: Option<usize> = None;
    let mut pairs_n: Option<usize> = None;
    let mut threshold: Option<BigRational> = None;
    let mut iota: Option<Vec<BigRational>> = None;
    let mut fin: Option<Vec<BigRational>> = None;
    let mut meta = BTreeMap::new();
    let mut pairs: Vec<(RatMatrix, RatMatrix)> = Vec::new();
    let mut current: Option<(Vec<Vec<BigRational>>, Vec<Vec<BigRational>>)> = None;

    let parse_vec = |toks: &[&str]| -> Result<Vec<BigRational>, FormatError> {
        toks.iter().map(|t| parse_rational(t)).collect()
    };
    let finish_pair = |current: &mut Option<(Vec<Vec<BigRational>>, Vec<Vec<BigRational>>)>,
                       pairs: &mut Vec<(RatMatrix, RatMatrix)>,
                       d: usize,
                       ln: usize|
     -> Result<(), FormatError> {
        if let Some((m0, m1)) = current.take() {
            if m0.len() != d || m1.len() != d {
                return Err(syntax(ln, "matrix pair has the wrong number of rows"));
            }
            pairs.push((RatMatrix::from_rows(m0), RatMatrix::from_rows(m1)));
        }
        Ok(())
    };

    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["dim", v] => dim = Some(v.parse().map_err(|_| syntax(ln, "bad dim"))?),
            ["pairs", v] => pairs_n = Some(v.parse().map_err(|_| syntax(ln, "bad pairs"))?),
            ["threshold", v] => threshold = Some(parse_rational(v)?),
            ["iota", rest @ ..] => iota = Some(parse_vec(rest)?),
            ["final", rest @ ..] => fin = Some(parse_vec(rest)?),
            ["meta", key, v] => {
                meta.insert(key.to_string(), parse_rational(v)?);
            }
            ["pair", _idx] => {
                let d = dim.ok_or_else(|| syntax(ln, "'dim' must precede pairs"))?;
                finish_pair(&mut current, &mut pairs, d, ln)?;
                current = Some((Vec::new(), Vec::new()));
            }
            ["m0", rest @ ..] => match &mut current {
                Some((m0, _)) => m0.push(parse_vec(rest)?),
                None => return Err(syntax(ln, "matrix row outside a pair")),
            },
            ["m1", rest @ ..] => match &mut current {
                Some((_, m1)) => m1.push(parse_vec(rest)?),
                None => return Err(syntax(ln, "matrix row outside a pair")),
            },
            _ => return Err(syntax(ln, format!("unrecognised line '{line}'"))),
        }
    }
    let d = dim.ok_or_else(|| FormatError::Structure("missing 'dim'".into()))?;
    finish_pair(&mut current, &mut pairs, d, 0)?;
    let n = pairs_n.ok_or_else(|| FormatError::Structure("missing 'pairs'".into()))?;
    if pairs.len() != n {
        return Err(FormatError::Structure(format!(
            "declared {n} pairs, found {}",
            pairs.len()
        )));
    }
    let instance = McpInstance {
        dim: d,
        pairs,
        iota: iota.ok_or_else(|| FormatError::Structure("missing 'iota'".into()))?,
        fin: fin.ok_or_else(|| FormatError::Structure("missing 'final'".into()))?,
        threshold: threshold.ok_or_else(|| FormatError::Structure("missing 'threshold'".into()))?,
    };
    instance
        .check_dimensions()
        .map_err(|e| FormatError::Structure(e.to_string()))?;
    Ok(McpFile { instance, meta })
}

pub fn serialize_mcp(file: &McpFile) -> String {
    let inst = &file.instance;
    let mut out = String::new();
    let _ = writeln!(out, "mcp");
    let _ = writeln!(out, "dim {}", inst.dim);
    let _ = writeln!(out, "pairs {}", inst.len());
    let _ = writeln!(out, "threshold {}", format_rational(&inst.threshold));
    let vec_line = |v: &[BigRational]| {
        v.iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "iota {}", vec_line(&inst.iota));
    let _ = writeln!(out, "final {}", vec_line(&inst.fin));
    for (key, v) in &file.meta {
        let _ = writeln!(out, "meta {} {}", key, format_rational(v));
    }
    for (i, (m0, m1)) in inst.pairs.iter().enumerate() {
        let _ = writeln!(out, "pair {}", i);
        for (tag, m) in [("m0", m0), ("m1", m1)] {
            for r in 0..inst.dim {
                let row: Vec<String> = (0..inst.dim)
                    .map(|c| format_rational(m.get(r, c)))
                    .collect();
                let _ = writeln!(out, "{} {}", tag, row.join(" "));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Result documents

/// Ordered key-value output; rationals are printed exactly. Timing lines use
/// the `timing.` prefix so golden comparisons can drop them.
#[derive(Debug, Default, Clone)]
pub struct ResultDocument {
    lines: Vec<(String, String)>,
}

impl ResultDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn push_rational(&mut self, key: &str, value: &BigRational) {
        self.push(key, format_rational(value));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{} = {}", k, v);
        }
        out
    }
}
