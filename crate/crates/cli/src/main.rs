use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use treewit_cli::commands::{self, CmdError, CmdOutput, WitnessArgs};
use treewit_core::partition::PartitionShape;
use treewit_core::witness::{PruneOptions, WitnessMode, DEFAULT_BRUTE_FORCE_CAP};

/// Minimal witnessing subsystems for probabilistic reachability constraints
/// on DTMCs and MDPs, driven by directed tree partitions.
#[derive(Parser)]
#[command(name = "treewit", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dtmc,
    MdpMax,
    MdpMin,
}

impl From<ModeArg> for WitnessMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dtmc => WitnessMode::Dtmc,
            ModeArg::MdpMax => WitnessMode::MdpMax,
            ModeArg::MdpMin => WitnessMode::MdpMin,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneArg {
    None,
    Value,
    Distance,
    All,
}

impl From<PruneArg> for PruneOptions {
    fn from(p: PruneArg) -> Self {
        match p {
            PruneArg::None => PruneOptions::default(),
            PruneArg::Value => PruneOptions {
                value_bound: true,
                distance_bound: false,
            },
            PruneArg::Distance => PruneOptions {
                value_bound: false,
                distance_bound: true,
            },
            PruneArg::All => PruneOptions::all(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Tree,
    Path,
}

impl From<ShapeArg> for PartitionShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Tree => PartitionShape::Tree,
            ShapeArg::Path => PartitionShape::Path,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    M1,
    M2,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a partition against a model and report shape and width.
    CheckPartition { model: PathBuf, partition: PathBuf },
    /// Compute a minimal witnessing subsystem along a tree partition.
    Witness {
        model: PathBuf,
        partition: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        threshold: String,
        /// Exact rational arithmetic (default).
        #[arg(long, conflicts_with = "tol")]
        exact: bool,
        /// Floating-point mode with this absolute tolerance (heuristic).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "none")]
        prune: PruneArg,
        /// Known witness-size bound for distance pruning.
        #[arg(long)]
        upper_bound: Option<usize>,
        /// Cross-check the answer against the brute-force oracle.
        #[arg(long)]
        oracle_check: bool,
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
        oracle_cap: usize,
        /// Include solver statistics in the output.
        #[arg(long)]
        stats: bool,
    },
    /// Brute-force minimal witness search (the naive baseline).
    Baseline {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        threshold: String,
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
        cap: usize,
        #[arg(long)]
        stats: bool,
    },
    /// Exact (or heuristic) directed tree/path partition width.
    Width {
        /// A model file or a plain `graph` file.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        shape: ShapeArg,
        #[arg(long, default_value_t = 12)]
        exact_cap: usize,
        /// Fall back to the layer heuristic above the cap.
        #[arg(long)]
        heuristic: bool,
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
    /// Matrix-pair chain instances: reductions, solving, chain generation.
    Mcp {
        #[command(subcommand)]
        cmd: McpCmd,
    },
    /// Instance generators.
    Gen {
        #[command(subcommand)]
        cmd: GenCmd,
    },
}

#[derive(Subcommand)]
enum McpCmd {
    /// Encode an integer multiset as a 2-dimensional instance.
    FromPartition {
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<i64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively decide an instance ('-' or omitted reads stdin).
    Brute {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 24)]
        cap: usize,
    },
    /// Lift a 2-dimensional instance to a nonnegative 3-dimensional one.
    Lift3 {
        input: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Rescale a lifted instance to near-equal entries.
    Normalize {
        input: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Emit the layered chain and its layer partition for an instance.
    ToChain {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "m2")]
        variant: VariantArg,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        partition_out: PathBuf,
    },
    /// Rebuild the chain and verify all selection values exhaustively.
    VerifyChain {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "m2")]
        variant: VariantArg,
        #[arg(long, default_value_t = 4)]
        n_cap: usize,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random layered DTMC with a path-shaped layer partition.
    Layered {
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 6)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
}

fn read_input(path: &PathBuf) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn read_input_or_stdin(path: &Option<PathBuf>) -> Result<String, CmdError> {
    match path {
        Some(p) if p.as_os_str() != "-" => read_input(p),
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CmdError::Validation(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<CmdOutput, CmdError> {
    match cmd {
        Cmd::CheckPartition { model, partition } => {
            commands::cmd_check_partition(&read_input(&model)?, &read_input(&partition)?)
        }
        Cmd::Witness {
            model,
            partition,
            mode,
            threshold,
            exact: _,
            tol,
            prune,
            upper_bound,
            oracle_check,
            oracle_cap,
            stats,
        } => {
            let args = WitnessArgs {
                mode: mode.into(),
                threshold,
                tol,
                prune: prune.into(),
                upper_bound,
                oracle_check,
                oracle_cap,
                stats,
            };
            commands::cmd_witness(&read_input(&model)?, &read_input(&partition)?, &args)
        }
        Cmd::Baseline {
            model,
            mode,
            threshold,
            cap,
            stats,
        } => commands::cmd_baseline(&read_input(&model)?, mode.into(), &threshold, cap, stats),
        Cmd::Width {
            input,
            shape,
            exact_cap,
            heuristic,
            partition_out,
        } => commands::cmd_width(
            &read_input(&input)?,
            shape.into(),
            exact_cap,
            heuristic,
            partition_out,
        ),
        Cmd::Mcp { cmd } => match cmd {
            McpCmd::FromPartition { values, out } => {
                redirect(commands::cmd_mcp_from_partition(&values)?, out)
            }
            McpCmd::Brute { input, cap } => {
                commands::cmd_mcp_brute(&read_input_or_stdin(&input)?, cap)
            }
            McpCmd::Lift3 { input, out } => {
                redirect(commands::cmd_mcp_lift3(&read_input_or_stdin(&input)?)?, out)
            }
            McpCmd::Normalize { input, out } => redirect(
                commands::cmd_mcp_normalize(&read_input_or_stdin(&input)?)?,
                out,
            ),
            McpCmd::ToChain {
                input,
                variant,
                model_out,
                partition_out,
            } => commands::cmd_mcp_to_chain(
                &read_input_or_stdin(&input)?,
                matches!(variant, VariantArg::M2),
                model_out,
                partition_out,
            ),
            McpCmd::VerifyChain {
                input,
                variant,
                n_cap,
            } => commands::cmd_mcp_verify_chain(
                &read_input_or_stdin(&input)?,
                matches!(variant, VariantArg::M2),
                n_cap,
            ),
        },
        Cmd::Gen { cmd } => match cmd {
            GenCmd::Layered {
                layers,
                width,
                seed,
                out,
                partition_out,
            } => commands::cmd_gen_layered(layers, width, seed, out, partition_out),
        },
    }
}

/// Generator commands print their artifact to stdout unless `-o` is given.
fn redirect(mut output: CmdOutput, out: Option<PathBuf>) -> Result<CmdOutput, CmdError> {
    if let Some(path) = out {
        let text = std::mem::take(&mut output.stdout);
        output.files.push((path, text));
    }
    Ok(output)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli.cmd) {
        Ok(output) => {
            for (path, text) in &output.files {
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            print!("{}", output.stdout);
            ExitCode::from(output.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
