use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::spec::{CommandKind, Criterion, Method, Order, Refine, RunSpec};

#[derive(Debug, Parser)]
#[command(name = "hypercoarse", version, about = "Sparse matrix sketching by hypergraph coarsening")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a multilevel coarsening hierarchy and write every level.
    Coarsen(RunArgs),
    /// Approximate the top-k singular triplets.
    Svd(RunArgs),
    /// Select a column subset and report its projection error.
    Cssp(RunArgs),
    /// Sparsify a weighted graph given as an edge list.
    Sparsify(RunArgs),
    /// Check the Rayleigh quotient and projection error bounds on a matrix.
    VerifyBounds(RunArgs),
    /// Join report.json files into one CSV table.
    Merge {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Write the table here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-run a saved runspec.json.
    Replay {
        spec: PathBuf,
        #[arg(long, env = "HYPERCOARSE_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// MatrixMarket file (edge list for `sparsify`).
    pub input: PathBuf,
    /// Run directory for all artifacts.
    #[arg(long, env = "HYPERCOARSE_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Target rank; `verify-bounds` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Number of sampled columns (rows for `sparsify`).
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Comma-separated epsilon schedule, one value per level.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    /// Subspace iterations for `--refine subspace`.
    #[arg(long)]
    pub iters: Option<usize>,
    /// none | subspace | zha-simon | lowrank:L
    #[arg(long)]
    pub refine: Option<Refine>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep matched columns unscaled.
    #[arg(long)]
    pub unscaled: bool,
    #[arg(long, value_enum)]
    pub criterion: Option<Criterion>,
    #[arg(long, value_enum)]
    pub visit_order: Option<Order>,
    /// Random unit probes for Rayleigh quotient checks.
    #[arg(long)]
    pub probes: Option<usize>,
    /// Largest min(m, n) handled by the dense SVD.
    #[arg(long)]
    pub dense_cap: Option<usize>,
    /// Reference singular values, one per line.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Round the projection to integers before measuring.
    #[arg(long)]
    pub integer: bool,
    /// Number of Laplacian singular values compared.
    #[arg(long)]
    pub rank: Option<usize>,
}

impl RunArgs {
    pub fn into_spec(self, command: CommandKind) -> (RunSpec, Option<PathBuf>) {
        let spec = RunSpec {
            command,
            input: self.input,
            method: self.method,
            k: self.k,
            c: self.c,
            levels: self.levels,
            epsilon: self.epsilon,
            iters: self.iters,
            refine: self.refine,
            seed: self.seed,
            unscaled: self.unscaled,
            criterion: self.criterion,
            visit_order: self.visit_order,
            probes: self.probes,
            dense_cap: self.dense_cap,
            reference: self.reference,
            integer: self.integer,
            rank: self.rank,
        };
        (spec, self.out)
    }
}
