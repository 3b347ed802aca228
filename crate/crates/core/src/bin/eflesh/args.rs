use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use eflesh_core::fabrication::SlotFace;
use eflesh_core::magnetics::{Metric, PolarityMode};
use eflesh_core::mesh::MeshFormat;

#[derive(Debug, Parser)]
#[command(name = "eflesh", version, about = "Build and analyse 3D-printed magnetic tactile sensors")]
pub struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print triangle count, bounds and closure of a mesh file.
    MeshInfo(MeshInfoArgs),
    /// Convert between binary STL, ASCII STL and OBJ.
    Convert(ConvertArgs),
    /// Tile a graded lattice over a mesh and trim it to the convex hull.
    Lattice(LatticeArgs),
    /// Place magnet pouches and write the layout.
    Pouch(PouchArgs),
    /// Add a magnetometer slot to a layout.
    Slot(SlotArgs),
    /// Print the layer index after which the print must pause.
    Pause(PauseArgs),
    /// Sample B on a plane above a magnet layout.
    Simulate(SimulateArgs),
    /// Stray-field report, aligned versus alternating, as JSON.
    ComparePolarity(CompareArgs),
    /// Print the default sensor model as JSON.
    SensorModel(SensorModelArgs),
    /// Recover contact location from magnetometer frames.
    Localize(LocalizeArgs),
    /// Minimum detectable force for a noise level and stiffness.
    Sensitivity(SensitivityArgs),
    /// Train the slip classifier on labelled windows.
    SlipTrain(SlipTrainArgs),
    /// Run the full build from a config file.
    Pipeline(PipelineArgs),
    /// Summarise a mesh, a config file or a pipeline bundle folder.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct MeshInfoArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
    /// Output format: stl_bin, stl_ascii or obj; defaults from the extension.
    #[arg(long)]
    pub format: Option<MeshFormat>,
}

/// Options shared by commands that need a lattice body.
#[derive(Debug, Args)]
pub struct BodyArgs {
    /// Mesh whose convex hull is the body.
    #[arg(long, conflicts_with = "bbox")]
    pub input: Option<PathBuf>,
    /// Box body from the origin, WxDxH mm, when no mesh is given.
    #[arg(long, default_value = "40x40x24")]
    pub bbox: String,
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
    #[arg(long, default_value_t = 8.0)]
    pub cell: f64,
    /// Modulus ratios bottom to top, comma separated, or a single value.
    #[arg(long, default_value = "0.001,0.0015,0.002")]
    pub modulus: String,
    #[arg(long, default_value_t = 0.4)]
    pub min_beam: f64,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 8.0)]
    pub cell: f64,
    #[arg(long, default_value = "0.001,0.0015,0.002")]
    pub modulus: String,
    #[arg(long, default_value_t = 0.4)]
    pub min_beam: f64,
    #[arg(long, default_value_t = 1.0)]
    pub unit_scale: f64,
    /// Keep beams outside the hull.
    #[arg(long)]
    pub no_trim: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MagnetArgs {
    /// Magnet diameter x thickness, mm.
    #[arg(long, default_value = "9.525x3.175")]
    pub magnet: String,
    /// Remanence, tesla.
    #[arg(long, default_value_t = 1.45)]
    pub remanence: f64,
    #[arg(long, default_value_t = 0.10)]
    pub radial_clearance: f64,
    #[arg(long, default_value_t = 0.15)]
    pub axial_clearance: f64,
    #[arg(long, default_value_t = 1.2)]
    pub wall: f64,
    #[arg(long, default_value_t = 0.4)]
    pub lip: f64,
}

#[derive(Debug, Args)]
pub struct PouchArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[command(flatten)]
    pub magnet: MagnetArgs,
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    /// Explicit centers as a layout JSON file; overrides --count and --magnet.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long, default_value = "alternating")]
    pub polarity: PolarityMode,
    /// Layout JSON destination; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the carved lattice.
    #[arg(long)]
    pub stl: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SlotArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Pocket size WxDxH, mm.
    #[arg(long, default_value = "32x32x2")]
    pub dims: String,
    #[arg(long, default_value = "-z", allow_hyphen_values = true)]
    pub face: SlotFace,
    /// Pocket center x,y,z; centered on the face when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub position: Option<String>,
    #[arg(long, default_value_t = 1.2)]
    pub wall: f64,
    /// Existing pouch layout to add the slot to.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PauseArgs {
    #[arg(long, default_value_t = 0.2)]
    pub layer_height: f64,
    /// Pouch layout; the reference four-pouch box when absent.
    #[arg(long, conflicts_with = "cavity_top")]
    pub layout: Option<PathBuf>,
    /// Single cavity-top height, mm.
    #[arg(long)]
    pub cavity_top: Option<f64>,
    /// Print the whole plan as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub layout: PathBuf,
    /// Plane height above the magnet-center plane, mm.
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    pub plane_z: f64,
    /// Plane size WxH, mm.
    #[arg(long, default_value = "100x100")]
    pub extent: String,
    /// Samples NXxNY.
    #[arg(long, default_value = "101x101")]
    pub res: String,
    /// Override the layout remanence, tesla.
    #[arg(long)]
    pub remanence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Sign pattern; the layout's stored polarities when absent.
    #[arg(long)]
    pub polarity: Option<PolarityMode>,
    #[arg(long, default_value_t = 8)]
    pub slices: usize,
    /// CSV output, or a graymap when the name ends in .pgm.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Additional graymap output.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value = "max")]
    pub metric: Metric,
    /// Leave the per-point ratio map out of the JSON.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct SensorModelArgs {
    /// Use the magnets of this layout instead of the default array.
    #[arg(long)]
    pub layout: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub signal: PathBuf,
    /// Sensor model JSON; the default model when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Initial guess x,y,z in mm.
    #[arg(long, allow_hyphen_values = true)]
    pub guess: Option<String>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Per-channel noise standard deviation, tesla.
    #[arg(long)]
    pub sigma: f64,
    /// Contact stiffness, N/mm.
    #[arg(long)]
    pub stiffness: f64,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SlipTrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Frames per feature window.
    #[arg(long, default_value_t = 50)]
    pub window: usize,
    /// Every n-th labelled window is held out for testing.
    #[arg(long, default_value_t = 4)]
    pub holdout_every: usize,
    #[arg(long, default_value_t = 3000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub learning_rate: f64,
    /// Classifier JSON destination.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Config JSON; the reference build when absent (needs --input).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub unit_scale: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub cell: Option<f64>,
    #[arg(long)]
    pub modulus: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub min_beam: Option<f64>,
    #[arg(long)]
    pub magnet: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub polarity: Option<PolarityMode>,
    #[arg(long, allow_negative_numbers = true)]
    pub layer_height: Option<f64>,
    /// Validate and print the stage plan without writing files.
    #[arg(long)]
    pub dry_run: bool,
    /// Also write hull, untrimmed lattice and layout.
    #[arg(long)]
    pub keep_intermediates: bool,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub path: PathBuf,
}
