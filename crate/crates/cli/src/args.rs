use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contextrec::experiment::{LabelSource, Protocol};
use contextrec::forest::MaxDepth;
use contextrec::AspectId;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "contextrec", version, about = "Personal context modeling and recognition workflows")]
pub struct Cli {
    /// Worker threads for parallel stages (default: one per core). Results do
    /// not depend on this value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an ontology file, and optionally annotations or records against it.
    Validate(ValidateArgs),
    /// Turn a sensor log and time-diary annotations into a record table.
    Ingest(IngestArgs),
    /// Write a synthetic record table with tunable inter-aspect correlation.
    Generate(GenerateArgs),
    /// Train one random forest on a record table and save it as JSON.
    Train(TrainArgs),
    /// Cross-validated recognition experiment for one arm or the full suite.
    Experiment(ExperimentArgs),
    /// Render experiment reports as an improvement table, CSV or plot data.
    Report(ReportArgs),
    /// Load, query, check or export a context knowledge graph.
    Graph(GraphArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Ontology TOML file.
    #[arg(long)]
    pub ontology: PathBuf,
    /// Time-diary CSV to check against the ontology.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Record table whose labels should all be in the ontology.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Reject unknown keys in the ontology file.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Sensor log, JSON Lines.
    #[arg(long)]
    pub log: PathBuf,
    /// Time-diary CSV (`user,ts_ms,we,wa,wo`).
    #[arg(long)]
    pub annotations: PathBuf,
    /// Ontology TOML; the built-in ontology when omitted.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// Sensor catalog TOML; the built-in catalog when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Feature recipe TOML; the built-in 122-column recipe when omitted.
    #[arg(long)]
    pub recipe: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub window_minutes: u32,
    /// Median-impute masked features over the whole table.
    #[arg(long)]
    pub impute: bool,
    /// With --impute, append one 0/1 indicator column per feature.
    #[arg(long, requires = "impute")]
    pub mask_columns: bool,
    /// Abort on unknown sensors and malformed values instead of skipping them.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    pub users: usize,
    #[arg(long, default_value_t = 250)]
    pub records_per_user: usize,
    #[arg(long, default_value_t = 8)]
    pub we_labels: usize,
    #[arg(long, default_value_t = 10)]
    pub wa_labels: usize,
    #[arg(long, default_value_t = 5)]
    pub wo_labels: usize,
    /// Correlation strength between aspects, in [0, 1].
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub rho: f64,
    /// Feature width.
    #[arg(long, default_value_t = 30)]
    pub width: usize,
    #[arg(long, default_value_t = 1.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prototype_scale: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Candidate depths, e.g. `2,4,8,unlimited`. A single value fixes the depth.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,12,16,24,unlimited")]
    pub depth_grid: Vec<MaxDepth>,
    #[arg(long, default_value_t = 2)]
    pub min_samples_split: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Truth,
    Predicted,
}

impl From<SourceArg> for LabelSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Truth => LabelSource::Truth,
            SourceArg::Predicted => LabelSource::Predicted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    Cv5,
    Nested,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Cv5 => Protocol::Cv5,
            ProtocolArg::Nested => Protocol::Nested,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Aspect to predict: WA, WE or WO.
    #[arg(long)]
    pub target: AspectId,
    /// Other aspects whose labels are appended as inputs, e.g. `WE,WO`.
    #[arg(long, value_delimiter = ',')]
    pub with_aspects: Vec<AspectId>,
    /// Ontology whose vocabularies define the label sets.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Aspect to predict: WA, WE or WO. Required unless --suite is given.
    #[arg(long, required_unless_present = "suite")]
    pub target: Option<AspectId>,
    /// Other aspects whose labels are appended as inputs, e.g. `WE,WO`.
    #[arg(long, value_delimiter = ',', conflicts_with = "suite")]
    pub with_aspects: Vec<AspectId>,
    /// Run every target with no, each single and all other aspects as inputs.
    #[arg(long)]
    pub suite: bool,
    /// With --suite, tune each augmented arm's depth separately instead of
    /// reusing the sensors-only arm's depth.
    #[arg(long, requires = "suite")]
    pub independent_depth: bool,
    #[arg(long, value_enum, default_value = "cv5")]
    pub protocol: ProtocolArg,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_enum, default_value = "truth")]
    pub label_source: SourceArg,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Fixed-width improvement table.
    Table,
    /// Improvement table as CSV.
    Csv,
    /// Per-label F1 series, one CSV row per arm and label.
    Plotdata,
    /// Improvement table and arm scores as JSON.
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Report file written by `experiment`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Graph file in JSON Lines; the built-in lesson scene when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// List the entities tagged with this aspect.
    #[arg(long)]
    pub aspect: Option<AspectId>,
    /// Check subjective labels against this ontology.
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// Write the (re-serialized) graph here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
