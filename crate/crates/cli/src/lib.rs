//! Scenario runner and reproduction ledger for `susy-pert`.

mod error;
pub mod output;
pub mod paper;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use paper::{ledger_csv, reproduce_paper, write_ledger};
pub use run::{compute, run_scenario, write_run, Report, RunOptions, RunOutput};
pub use scenario::{ExprTag, GridSpec, PerturbationTerm, Scenario, ToleranceProfile};

/// Which file families to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}
