use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use woodmask_core::{Connectivity, MorphologyParams, Subset};

#[derive(Debug, Parser)]
#[command(name = "woodmask", version, about = "Curate wood-log defect masks and evaluate segmentations")]
pub struct Cli {
    /// Worker threads for flatten, eval and agree; 0 uses one per core.
    /// Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Import a LabelStudio JSON export into a new manifest.
    Ingest(IngestArgs),
    /// Build label masks from annotated regions.
    Flatten(FlattenArgs),
    /// Mean class areas per subset, in percent of the crosscut area.
    Stats(StatsArgs),
    /// Seeded 60/20/20 split of the data subset.
    Split(SplitArgs),
    /// Compare ground-truth masks with predictions.
    Eval(EvalArgs),
    /// Inter-annotator agreement against a baseline annotator.
    Agree(AgreeArgs),
    /// Write both castings of RotMaybe for every sample that has it.
    CastProposals(CastProposalsArgs),
    /// Run the review service.
    Serve(ServeArgs),
    /// Apply a session from a decision log without the service.
    ApplyDecisions(ApplyDecisionsArgs),
}

fn parse_subset(s: &str) -> Result<Subset, String> {
    s.parse().map_err(|e: woodmask_core::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectivityArg {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

#[derive(Debug, Clone, Args)]
pub struct MorphologyArgs {
    /// Holes smaller than this many pixels are filled.
    #[arg(long, default_value_t = 64)]
    pub min_hole: u64,
    /// Objects smaller than this many pixels are absorbed by their neighbors.
    #[arg(long, default_value_t = 64)]
    pub min_object: u64,
    #[arg(long, value_enum, default_value = "8")]
    pub connectivity: ConnectivityArg,
}

impl MorphologyArgs {
    pub fn params(&self) -> MorphologyParams {
        MorphologyParams {
            min_hole_area: self.min_hole,
            min_object_area: self.min_object,
            connectivity: match self.connectivity {
                ConnectivityArg::Four => Connectivity::Four,
                ConnectivityArg::Eight => Connectivity::Eight,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// LabelStudio JSON export.
    #[arg(long)]
    pub export: PathBuf,
    /// Manifest to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Subset for tasks without a `subset` field.
    #[arg(long, value_parser = parse_subset, default_value = "data")]
    pub default_subset: Subset,
    /// Where to read image sizes from when the export lacks them.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Seed recorded in the manifest for `split`.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

#[derive(Debug, Args)]
pub struct FlattenArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Manifest to write; masks go to `masks/<variant>/` next to it.
    #[arg(long)]
    pub out_manifest: PathBuf,
    #[arg(long, default_value = "original")]
    pub variant: String,
    /// Annotator whose regions are used; defaults to each sample's latest.
    #[arg(long)]
    pub annotator: Option<String>,
    /// Optional per-sample CSV report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub morphology: MorphologyArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "original")]
    pub variant: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Defaults to the manifest's `split_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["predictions", "model"]))]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Ground-truth variant.
    #[arg(long, default_value = "original")]
    pub variant: String,
    /// Directory of predicted masks named `<sample_id>.png`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Model whose predictions are registered in the manifest.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_parser = parse_subset, default_value = "data")]
    pub subset: Subset,
    /// Split CSV from `split`; restricts evaluation to `--bucket`.
    #[arg(long, requires = "bucket")]
    pub split: Option<PathBuf>,
    #[arg(long, requires = "split")]
    pub bucket: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Directory for metrics.csv, per_sample.csv, confusion*.csv and
    /// histograms.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_parser = parse_subset, default_value = "warmup")]
    pub subset: Subset,
    #[arg(long)]
    pub baseline: String,
    /// Annotators to compare; defaults to everyone else in the subset.
    #[arg(long, value_delimiter = ',')]
    pub annotators: Vec<String>,
    /// Model predictions to include as an extra rater.
    #[arg(long)]
    pub model: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub morphology: MorphologyArgs,
}

#[derive(Debug, Args)]
pub struct CastProposalsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "original")]
    pub variant: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also render both castings over the photograph.
    #[arg(long)]
    pub overlays: bool,
    /// Photograph directory; defaults to the manifest's directory.
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f32,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for the decision log and state snapshot.
    #[arg(long)]
    pub state_dir: PathBuf,
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct ApplyDecisionsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// `decisions.jsonl` written by the service.
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub session: String,
    #[arg(long)]
    pub variant: String,
    #[arg(long)]
    pub out_manifest: PathBuf,
}
