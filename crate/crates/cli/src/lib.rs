//! Batch front end for the `hypercoarse` toolkit.

pub mod args;
pub mod error;
pub mod run;
pub mod spec;

use std::io::Write;
use std::path::PathBuf;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};
pub use run::{report_merge, run, RunOutcome};
pub use spec::{CommandKind, Method, Refine, RunSpec};

/// Executes a parsed command line, printing to `stdout`. Returns the exit code.
pub fn execute(cli: Cli, stdout: &mut impl Write) -> CliResult<i32> {
    let (spec, out): (RunSpec, Option<PathBuf>) = match cli.command {
        Command::Coarsen(a) => a.into_spec(CommandKind::Coarsen),
        Command::Svd(a) => a.into_spec(CommandKind::Svd),
        Command::Cssp(a) => a.into_spec(CommandKind::Cssp),
        Command::Sparsify(a) => a.into_spec(CommandKind::Sparsify),
        Command::VerifyBounds(a) => a.into_spec(CommandKind::VerifyBounds),
        Command::Merge { reports, output } => {
            let table = report_merge(&reports)?;
            match output {
                Some(path) => std::fs::write(path, table)?,
                None => stdout.write_all(table.as_bytes())?,
            }
            return Ok(0);
        }
        Command::Replay { spec, out } => {
            let text = std::fs::read_to_string(&spec)?;
            (serde_json::from_str(&text)?, out)
        }
    };
    let outcome = run(&spec, out.as_deref())?;
    for line in &outcome.lines {
        writeln!(stdout, "{line}")?;
    }
    if let Some(dir) = &outcome.out_dir {
        writeln!(stdout, "artifacts in {}", dir.display())?;
    }
    Ok(if outcome.passed { 0 } else { 4 })
}
