//! Command implementations behind the CLI surface. Each command takes file
//! contents, returns the rendered result document, the files to write and
//! the process exit code (0 success/feasible, 2 infeasible/rejected,
//! 3 validation or usage error, 4 cap exceeded).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use treewit_core::chain::{
    bad_subsystem_bound_check, build_cycled_chain, build_plain_chain, verify_good_value,
    ChainError, ChainVariant, LayeredChain,
};
use treewit_core::hull::HullError;
use treewit_core::mcp::{
    brute_force, lift_to_nonnegative_3d, normalize_equal_valued, reduce_from_partition,
    LiftedInstance, McpError, NormalizedInstance,
};
use treewit_core::model::ProbabilisticModel;
use treewit_core::par::Parallelism;
use treewit_core::partition::{
    exact_width, heuristic_layer_partition, validate_partition, PartitionError, PartitionShape,
};
use treewit_core::reach::ReachError;
use treewit_core::scalar::{rational_to_f64, BigRational};
use treewit_core::witness::{
    brute_force_witness, solve_exact, solve_float, PruneOptions, SolveStats, WitnessError,
    WitnessMode, WitnessOptions, WitnessOutcome, WitnessQuery, DEFAULT_BRUTE_FORCE_CAP,
};

use crate::formats::{
    format_rational, parse_graph, parse_mcp, parse_model, parse_partition, parse_rational,
    serialize_mcp, serialize_model, serialize_partition, FormatError, McpFile, ResultDocument,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Internal(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) | CmdError::Usage(_) => EXIT_VALIDATION,
            CmdError::Cap(_) => EXIT_CAP,
            CmdError::Internal(_) => 1,
        }
    }
}

impl From<FormatError> for CmdError {
    fn from(e: FormatError) -> Self {
        CmdError::Validation(e.to_string())
    }
}

impl From<PartitionError> for CmdError {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::CapExceeded { .. } => CmdError::Cap(e.to_string()),
            _ => CmdError::Validation(e.to_string()),
        }
    }
}

impl From<McpError> for CmdError {
    fn from(e: McpError) -> Self {
        match e {
            McpError::CapExceeded { .. } => CmdError::Cap(e.to_string()),
            McpError::Internal(_) => CmdError::Internal(e.to_string()),
            _ => CmdError::Validation(e.to_string()),
        }
    }
}

impl From<WitnessError> for CmdError {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::ModeModelMismatch { .. } => CmdError::Usage(e.to_string()),
            WitnessError::StateCapExceeded { .. }
            | WitnessError::InterfaceCapExceeded { .. }
            | WitnessError::Hull(HullError::CapExceeded { .. }) => CmdError::Cap(e.to_string()),
            WitnessError::Reach(ReachError::NonConvergence { .. }) => {
                CmdError::Internal(e.to_string())
            }
            other => CmdError::Validation(other.to_string()),
        }
    }
}

impl From<ChainError> for CmdError {
    fn from(e: ChainError) -> Self {
        CmdError::Validation(e.to_string())
    }
}

#[derive(Debug, Default)]
pub struct CmdOutput {
    pub stdout: String,
    pub code: i32,
    pub files: Vec<(PathBuf, String)>,
}

impl CmdOutput {
    fn doc(doc: ResultDocument, code: i32) -> Self {
        CmdOutput {
            stdout: doc.render(),
            code,
            files: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// check-partition

pub fn cmd_check_partition(model_text: &str, partition_text: &str) -> Result<CmdOutput, CmdError> {
    let model = parse_model(model_text)?;
    let blocks = parse_partition(partition_text)?;
    let partition = validate_partition(&model.underlying_graph(), &blocks)?;
    let mut doc = ResultDocument::new();
    doc.push("command", "check-partition");
    doc.push("valid", true);
    doc.push(
        "shape",
        if partition.is_path() { "path" } else { "tree" },
    );
    doc.push("width", partition.width());
    doc.push("blocks", partition.n_blocks());
    Ok(CmdOutput::doc(doc, EXIT_OK))
}

// ---------------------------------------------------------------------------
// witness / baseline

#[derive(Debug, Clone)]
pub struct WitnessArgs {
    pub mode: WitnessMode,
    pub threshold: String,
    pub tol: Option<f64>,
    pub prune: PruneOptions,
    pub upper_bound: Option<usize>,
    pub oracle_check: bool,
    pub oracle_cap: usize,
    pub stats: bool,
}

impl Default for WitnessArgs {
    fn default() -> Self {
        WitnessArgs {
            mode: WitnessMode::Dtmc,
            threshold: "1/2".to_string(),
            tol: None,
            prune: PruneOptions::default(),
            upper_bound: None,
            oracle_check: false,
            oracle_cap: DEFAULT_BRUTE_FORCE_CAP,
            stats: false,
        }
    }
}

fn push_stats(doc: &mut ResultDocument, stats: &SolveStats) {
    doc.push("stats.subsets_enumerated", stats.subsets_enumerated);
    doc.push("stats.combinations", stats.combinations);
    doc.push("stats.hull_calls", stats.hull_calls);
    doc.push("stats.points_pruned", stats.points_pruned);
    doc.push("stats.value_prunes", stats.value_prunes);
    doc.push("stats.distance_prunes", stats.distance_prunes);
    let mut blocks = stats.blocks.clone();
    blocks.sort_by_key(|b| b.block);
    let survivors: Vec<String> = blocks
        .iter()
        .map(|b| format!("b{}:{}", b.block, b.survivors))
        .collect();
    if !survivors.is_empty() {
        doc.push("stats.survivors_per_block", survivors.join(" "));
    }
}

fn states_line(states: &std::collections::BTreeSet<usize>) -> String {
    states
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_witness(
    model_text: &str,
    partition_text: &str,
    args: &WitnessArgs,
) -> Result<CmdOutput, CmdError> {
    let model = parse_model(model_text)?;
    let blocks = parse_partition(partition_text)?;
    let partition = validate_partition(&model.underlying_graph(), &blocks)?;
    let threshold = parse_rational(&args.threshold)?;
    let query = WitnessQuery {
        model: &model,
        partition: &partition,
        mode: args.mode,
        threshold: threshold.clone(),
        options: WitnessOptions {
            prune: args.prune,
            upper_bound: args.upper_bound,
            ..WitnessOptions::default()
        },
    };

    let mut doc = ResultDocument::new();
    doc.push("command", "witness");
    doc.push("mode", args.mode);
    doc.push_rational("threshold", &threshold);
    doc.push(
        "arithmetic",
        match args.tol {
            None => "exact".to_string(),
            Some(t) => format!("float(tol={t:e})"),
        },
    );

    let start = Instant::now();
    let code = match args.tol {
        None => {
            let outcome = solve_exact(&query)?;
            render_outcome_exact(&mut doc, &outcome, args.stats);
            if args.oracle_check {
                oracle_check_lines(&mut doc, &model, args, &threshold, &outcome)?;
            }
            outcome_code(matches!(outcome, WitnessOutcome::Feasible(_)))
        }
        Some(tol) => {
            let outcome = solve_float(&query, tol)?;
            render_outcome_float(&mut doc, &outcome, args.stats);
            outcome_code(matches!(outcome, WitnessOutcome::Feasible(_)))
        }
    };
    doc.push("timing.total_ms", start.elapsed().as_millis());
    Ok(CmdOutput::doc(doc, code))
}

fn outcome_code(feasible: bool) -> i32 {
    if feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn render_outcome_exact(
    doc: &mut ResultDocument,
    outcome: &WitnessOutcome<BigRational>,
    stats: bool,
) {
    match outcome {
        WitnessOutcome::Feasible(r) => {
            doc.push("feasible", true);
            doc.push("witness_size", r.size);
            doc.push("witness_states", states_line(&r.states));
            doc.push_rational("achieved_value", &r.value);
            if stats {
                push_stats(doc, &r.stats);
            }
        }
        WitnessOutcome::Infeasible { full_value, stats: s } => {
            doc.push("feasible", false);
            doc.push_rational("full_value", full_value);
            if stats {
                push_stats(doc, s);
            }
        }
    }
}

fn render_outcome_float(doc: &mut ResultDocument, outcome: &WitnessOutcome<f64>, stats: bool) {
    match outcome {
        WitnessOutcome::Feasible(r) => {
            doc.push("feasible", true);
            doc.push("witness_size", r.size);
            doc.push("witness_states", states_line(&r.states));
            doc.push("achieved_value", format!("{:.12e}", r.value));
            if stats {
                push_stats(doc, &r.stats);
            }
        }
        WitnessOutcome::Infeasible { full_value, stats: s } => {
            doc.push("feasible", false);
            doc.push("full_value", format!("{:.12e}", full_value));
            if stats {
                push_stats(doc, s);
            }
        }
    }
}

fn oracle_check_lines(
    doc: &mut ResultDocument,
    model: &ProbabilisticModel,
    args: &WitnessArgs,
    threshold: &BigRational,
    outcome: &WitnessOutcome<BigRational>,
) -> Result<(), CmdError> {
    if model.n_states() > args.oracle_cap {
        doc.push("oracle", "skipped (state cap)");
        return Ok(());
    }
    let oracle = brute_force_witness(
        model,
        args.mode,
        threshold,
        args.oracle_cap,
        Parallelism::default(),
    )?;
    match (outcome.size(), oracle.size()) {
        (a, b) if a == b => {
            doc.push("oracle", "agrees");
            if let Some(size) = b {
                doc.push("oracle_size", size);
            }
            Ok(())
        }
        (a, b) => Err(CmdError::Internal(format!(
            "oracle disagrees: solver size {a:?}, oracle size {b:?}"
        ))),
    }
}

pub fn cmd_baseline(
    model_text: &str,
    mode: WitnessMode,
    threshold: &str,
    cap: usize,
    stats: bool,
) -> Result<CmdOutput, CmdError> {
    let model = parse_model(model_text)?;
    let threshold = parse_rational(threshold)?;
    let mut doc = ResultDocument::new();
    doc.push("command", "baseline");
    doc.push("mode", mode);
    doc.push_rational("threshold", &threshold);
    let start = Instant::now();
    let outcome = brute_force_witness(&model, mode, &threshold, cap, Parallelism::default())?;
    render_outcome_exact(&mut doc, &outcome, stats);
    doc.push("timing.total_ms", start.elapsed().as_millis());
    Ok(CmdOutput::doc(
        doc,
        outcome_code(matches!(outcome, WitnessOutcome::Feasible(_))),
    ))
}

// ---------------------------------------------------------------------------
// width

pub fn cmd_width(
    input_text: &str,
    shape: PartitionShape,
    exact_cap: usize,
    allow_heuristic: bool,
    partition_out: Option<PathBuf>,
) -> Result<CmdOutput, CmdError> {
    let graph = if input_text.trim_start().starts_with("graph") {
        parse_graph(input_text)?
    } else {
        parse_model(input_text)?.underlying_graph()
    };
    let mut doc = ResultDocument::new();
    doc.push("command", "width");
    doc.push(
        "shape",
        match shape {
            PartitionShape::Tree => "tree",
            PartitionShape::Path => "path",
        },
    );
    let (partition, method) = if graph.n_vertices() <= exact_cap {
        let (_, p) = exact_width(&graph, shape, exact_cap, Parallelism::default())?;
        (p, "exact")
    } else if allow_heuristic {
        let p = heuristic_layer_partition(&graph);
        let p = if shape == PartitionShape::Path && !p.is_path() {
            let whole: std::collections::BTreeSet<usize> = (0..graph.n_vertices()).collect();
            validate_partition(&graph, &[whole])?
        } else {
            p
        };
        (p, "heuristic")
    } else {
        return Err(CmdError::Cap(format!(
            "graph has {} vertices, exhaustive cap is {exact_cap}; pass --heuristic",
            graph.n_vertices()
        )));
    };
    doc.push("method", method);
    doc.push("width", partition.width());
    doc.push("blocks", partition.n_blocks());
    let text = serialize_partition(partition.blocks());
    let mut files = Vec::new();
    match partition_out {
        Some(path) => files.push((path, text)),
        None => {
            for (i, block) in partition.blocks().iter().enumerate() {
                doc.push(&format!("block.{i}"), states_line(block));
            }
        }
    }
    Ok(CmdOutput {
        stdout: doc.render(),
        code: EXIT_OK,
        files,
    })
}

// ---------------------------------------------------------------------------
// mcp pipeline

pub fn cmd_mcp_from_partition(values: &[i64]) -> Result<CmdOutput, CmdError> {
    let red = reduce_from_partition(values)?;
    let file = McpFile {
        instance: red.instance,
        meta: BTreeMap::from([
            ("granularity".to_string(), red.granularity),
            ("angle_tolerance".to_string(), red.angle_tolerance),
        ]),
    };
    Ok(CmdOutput {
        stdout: serialize_mcp(&file),
        code: EXIT_OK,
        files: Vec::new(),
    })
}

pub fn cmd_mcp_brute(input_text: &str, cap: usize) -> Result<CmdOutput, CmdError> {
    let file = parse_mcp(input_text)?;
    let res = brute_force(&file.instance, cap, Parallelism::default())?;
    let mut doc = ResultDocument::new();
    doc.push("command", "mcp-brute");
    doc.push("pairs", file.instance.len());
    doc.push("accepted", res.accepted);
    let sigma: String = res
        .best_sigma
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    doc.push("best_sigma", sigma);
    doc.push_rational("best_value", &res.best_value);
    doc.push_rational("threshold", &file.instance.threshold);
    Ok(CmdOutput::doc(
        doc,
        if res.accepted { EXIT_OK } else { EXIT_INFEASIBLE },
    ))
}

pub fn cmd_mcp_lift3(input_text: &str) -> Result<CmdOutput, CmdError> {
    let file = parse_mcp(input_text)?;
    let lifted = lift_to_nonnegative_3d(&file.instance)?;
    let out = McpFile {
        instance: lifted.instance,
        meta: BTreeMap::from([("kappa".to_string(), lifted.kappa)]),
    };
    Ok(CmdOutput {
        stdout: serialize_mcp(&out),
        code: EXIT_OK,
        files: Vec::new(),
    })
}

fn lifted_from_file(file: &McpFile) -> Result<LiftedInstance, CmdError> {
    let kappa = file.meta.get("kappa").ok_or_else(|| {
        CmdError::Validation("expected a lifted instance ('meta kappa' missing)".into())
    })?;
    Ok(LiftedInstance {
        instance: file.instance.clone(),
        kappa: kappa.clone(),
    })
}

pub fn cmd_mcp_normalize(input_text: &str) -> Result<CmdOutput, CmdError> {
    let file = parse_mcp(input_text)?;
    let lifted = lifted_from_file(&file)?;
    let norm = normalize_equal_valued(&lifted)?;
    let out = McpFile {
        instance: norm.instance,
        meta: BTreeMap::from([
            ("eps".to_string(), norm.eps),
            ("kappa_prime".to_string(), norm.kappa_prime),
            ("scale".to_string(), norm.scale),
        ]),
    };
    Ok(CmdOutput {
        stdout: serialize_mcp(&out),
        code: EXIT_OK,
        files: Vec::new(),
    })
}

fn normalized_from_file(file: &McpFile) -> Result<NormalizedInstance, CmdError> {
    let get = |key: &str| {
        file.meta.get(key).cloned().ok_or_else(|| {
            CmdError::Validation(format!(
                "expected a normalized instance ('meta {key}' missing)"
            ))
        })
    };
    Ok(NormalizedInstance {
        instance: file.instance.clone(),
        eps: get("eps")?,
        kappa_prime: get("kappa_prime")?,
        scale: get("scale")?,
    })
}

fn build_chain(norm: &NormalizedInstance, cycled: bool) -> Result<LayeredChain, CmdError> {
    Ok(if cycled {
        build_cycled_chain(norm)?
    } else {
        build_plain_chain(norm)?
    })
}

pub fn cmd_mcp_to_chain(
    input_text: &str,
    cycled: bool,
    model_out: PathBuf,
    partition_out: PathBuf,
) -> Result<CmdOutput, CmdError> {
    let file = parse_mcp(input_text)?;
    let norm = normalized_from_file(&file)?;
    let chain = build_chain(&norm, cycled)?;
    let partition = chain.layer_partition()?;
    let mut doc = ResultDocument::new();
    doc.push("command", "mcp-to-chain");
    doc.push("variant", if cycled { "m2" } else { "m1" });
    doc.push("layers", chain.n_layers());
    doc.push("states", chain.n_states());
    doc.push("width", partition.width());
    doc.push_rational("threshold", &chain.instance.threshold);
    if let ChainVariant::Cycled { gamma } = &chain.variant {
        doc.push_rational("gamma", gamma);
    }
    Ok(CmdOutput {
        stdout: doc.render(),
        code: EXIT_OK,
        files: vec![
            (model_out, serialize_model(&chain.model)),
            (partition_out, serialize_partition(partition.blocks())),
        ],
    })
}

pub fn cmd_mcp_verify_chain(
    input_text: &str,
    cycled: bool,
    n_cap: usize,
) -> Result<CmdOutput, CmdError> {
    let file = parse_mcp(input_text)?;
    let norm = normalized_from_file(&file)?;
    let n = norm.len();
    if n > n_cap {
        return Err(CmdError::Cap(format!(
            "instance has {n} pairs, exhaustive verification capped at {n_cap}"
        )));
    }
    let chain = build_chain(&norm, cycled)?;
    let partition = chain.layer_partition()?;
    let mut checked = 0usize;
    for mask in 0..(1u64 << n) {
        let sigma: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let (chain_prob, mcp_value) = verify_good_value(&chain, &sigma)?;
        if chain_prob != mcp_value {
            return Err(CmdError::Internal(format!(
                "selection {mask:b}: chain probability {} differs from product {}",
                format_rational(&chain_prob),
                format_rational(&mcp_value)
            )));
        }
        let good = chain.good_subsystem(&sigma)?;
        if good.len() != 3 * n + 4 {
            return Err(CmdError::Internal("selection subsystem size is off".into()));
        }
        checked += 1;
    }
    let mut doc = ResultDocument::new();
    doc.push("command", "mcp-verify-chain");
    doc.push("variant", if cycled { "m2" } else { "m1" });
    doc.push("selections_checked", checked);
    doc.push("all_values_equal", true);
    doc.push("states", chain.n_states());
    doc.push("width", partition.width());
    doc.push("selection_size", 3 * n + 4);
    if cycled {
        // Spot-check the separation on one perturbed selection.
        let good = chain.good_subsystem(&vec![false; n])?;
        let mut bad = good.clone();
        let dropped = *chain.left(1).first().unwrap();
        bad.remove(&dropped);
        bad.insert(chain.right(1)[0]);
        let ok = bad_subsystem_bound_check(&chain, &bad)?;
        doc.push("bad_subsystem_bound_holds", ok);
        if !ok {
            return Err(CmdError::Internal(
                "perturbed subsystem escaped the broken-cycle bound".into(),
            ));
        }
    }
    Ok(CmdOutput::doc(doc, EXIT_OK))
}

// ---------------------------------------------------------------------------
// gen

pub fn cmd_gen_layered(
    layers: usize,
    width: usize,
    seed: u64,
    model_out: Option<PathBuf>,
    partition_out: Option<PathBuf>,
) -> Result<CmdOutput, CmdError> {
    if layers == 0 || width == 0 {
        return Err(CmdError::Usage("layers and width must be positive".into()));
    }
    let (model, blocks) = crate::gen::generate_layered(layers, width, seed);
    let model_text = serialize_model(&model);
    let partition_text = serialize_partition(&blocks);
    let values = treewit_core::reach::reach_value_exact(&model, treewit_core::reach::ReachMode::Dtmc)
        .map_err(|e| CmdError::Internal(e.to_string()))?;
    let full = treewit_core::reach::initial_value(&model, &values);

    let mut files = Vec::new();
    let mut stdout = String::new();
    match model_out {
        Some(path) => files.push((path, model_text)),
        None => stdout = model_text,
    }
    if let Some(path) = partition_out {
        files.push((path, partition_text));
    }
    if stdout.is_empty() {
        let mut doc = ResultDocument::new();
        doc.push("command", "gen-layered");
        doc.push("layers", layers);
        doc.push("width", width);
        doc.push("seed", seed);
        doc.push("states", model.n_states());
        doc.push_rational("full_value", &full);
        doc.push("full_value_approx", format!("{:.6}", rational_to_f64(&full)));
        stdout = doc.render();
    }
    Ok(CmdOutput {
        stdout,
        code: EXIT_OK,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "dtmc\nstates 3\n0 1 1/2\n1 2 1/2\ninit:\n0 1/1\ngoal:\n2\n";
    const CHAIN_PART: &str = "0: 0\n1: 1\n2: 2\n";

    #[test]
    fn check_partition_reports_width() {
        let out = cmd_check_partition(CHAIN, CHAIN_PART).unwrap();
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("valid = true"));
        assert!(out.stdout.contains("width = 1"));
        assert!(out.stdout.contains("shape = path"));
    }

    #[test]
    fn check_partition_rejects_bad_coverage() {
        let err = cmd_check_partition(CHAIN, "0: 0 1\n").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn witness_chain_is_size_three() {
        let args = WitnessArgs {
            threshold: "1/4".to_string(),
            oracle_check: true,
            stats: true,
            ..WitnessArgs::default()
        };
        let out = cmd_witness(CHAIN, CHAIN_PART, &args).unwrap();
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("witness_size = 3"));
        assert!(out.stdout.contains("witness_states = 0 1 2"));
        assert!(out.stdout.contains("achieved_value = 1/4"));
        assert!(out.stdout.contains("oracle = agrees"));
    }

    #[test]
    fn witness_infeasible_exit_code() {
        let args = WitnessArgs {
            threshold: "1/2".to_string(),
            ..WitnessArgs::default()
        };
        let out = cmd_witness(CHAIN, CHAIN_PART, &args).unwrap();
        assert_eq!(out.code, EXIT_INFEASIBLE);
        assert!(out.stdout.contains("feasible = false"));
        assert!(out.stdout.contains("full_value = 1/4"));
    }

    #[test]
    fn witness_mode_mismatch_is_usage_error() {
        let args = WitnessArgs {
            mode: WitnessMode::MdpMin,
            threshold: "1/4".to_string(),
            ..WitnessArgs::default()
        };
        let err = cmd_witness(CHAIN, CHAIN_PART, &args).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn witness_output_is_deterministic_modulo_timing() {
        let args = WitnessArgs {
            threshold: "1/4".to_string(),
            stats: true,
            ..WitnessArgs::default()
        };
        let strip = |s: String| -> String {
            s.lines()
                .filter(|l| !l.starts_with("timing."))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = strip(cmd_witness(CHAIN, CHAIN_PART, &args).unwrap().stdout);
        let b = strip(cmd_witness(CHAIN, CHAIN_PART, &args).unwrap().stdout);
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_agrees_with_witness_and_caps() {
        let out = cmd_baseline(CHAIN, WitnessMode::Dtmc, "1/4", 22, false).unwrap();
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("witness_size = 3"));
        let err = cmd_baseline(CHAIN, WitnessMode::Dtmc, "1/4", 2, false).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CAP);
    }

    #[test]
    fn width_on_path_graph() {
        let out = cmd_width(
            "graph\nvertices 3\n0 1\n1 2\n",
            PartitionShape::Tree,
            12,
            false,
            None,
        )
        .unwrap();
        assert!(out.stdout.contains("width = 1"));
        assert!(out.stdout.contains("method = exact"));
    }

    #[test]
    fn width_on_cycle_is_full() {
        let out = cmd_width(
            "graph\nvertices 5\n0 1\n1 2\n2 3\n3 4\n4 0\n",
            PartitionShape::Path,
            12,
            false,
            None,
        )
        .unwrap();
        assert!(out.stdout.contains("width = 5"));
    }

    #[test]
    fn width_cap_requires_heuristic_flag() {
        let mut text = String::from("graph\nvertices 20\n");
        for i in 0..19 {
            text.push_str(&format!("{} {}\n", i, i + 1));
        }
        let err = cmd_width(&text, PartitionShape::Tree, 12, false, None).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CAP);
        let out = cmd_width(&text, PartitionShape::Tree, 12, true, None).unwrap();
        assert!(out.stdout.contains("method = heuristic"));
        assert!(out.stdout.contains("width = 1"));
    }

    #[test]
    fn mcp_pipeline_yes_and_no() {
        let yes = cmd_mcp_from_partition(&[1, 1, 2]).unwrap();
        let brute = cmd_mcp_brute(&yes.stdout, 24).unwrap();
        assert_eq!(brute.code, EXIT_OK);
        assert!(brute.stdout.contains("accepted = true"));

        let no = cmd_mcp_from_partition(&[1, 2]).unwrap();
        let brute = cmd_mcp_brute(&no.stdout, 24).unwrap();
        assert_eq!(brute.code, EXIT_INFEASIBLE);
        assert!(brute.stdout.contains("accepted = false"));
    }

    #[test]
    fn mcp_full_pipeline_to_chain() {
        let red = cmd_mcp_from_partition(&[1, 1]).unwrap();
        let lifted = cmd_mcp_lift3(&red.stdout).unwrap();
        let norm = cmd_mcp_normalize(&lifted.stdout).unwrap();
        let verify = cmd_mcp_verify_chain(&norm.stdout, true, 4).unwrap();
        assert!(verify.stdout.contains("selections_checked = 4"));
        assert!(verify.stdout.contains("all_values_equal = true"));
        assert!(verify.stdout.contains("width = 6"));
        assert!(verify.stdout.contains("states = 16"));

        let chain = cmd_mcp_to_chain(
            &norm.stdout,
            true,
            PathBuf::from("model.txt"),
            PathBuf::from("partition.txt"),
        )
        .unwrap();
        assert_eq!(chain.files.len(), 2);
        let model = parse_model(&chain.files[0].1).unwrap();
        assert_eq!(model.n_states(), 16);
        let blocks = parse_partition(&chain.files[1].1).unwrap();
        let p = validate_partition(&model.underlying_graph(), &blocks).unwrap();
        assert_eq!(p.width(), 6);
    }

    #[test]
    fn normalize_requires_lift_metadata() {
        let red = cmd_mcp_from_partition(&[1, 1]).unwrap();
        let err = cmd_mcp_normalize(&red.stdout).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
    }

    #[test]
    fn gen_layered_emits_valid_inputs() {
        let out = cmd_gen_layered(
            4,
            3,
            7,
            Some(PathBuf::from("m.txt")),
            Some(PathBuf::from("p.txt")),
        )
        .unwrap();
        assert_eq!(out.files.len(), 2);
        let model = parse_model(&out.files[0].1).unwrap();
        let blocks = parse_partition(&out.files[1].1).unwrap();
        validate_partition(&model.underlying_graph(), &blocks).unwrap();
        assert!(out.stdout.contains("full_value"));
    }
}
