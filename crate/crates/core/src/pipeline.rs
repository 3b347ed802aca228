//! Configuration and end-to-end orchestration: mesh in, printable model,
//! print plan and stray-field report out.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorClass};
use crate::fabrication::{
    default_pouch_centers, pause_layer, place_pouches, place_slot, Clearances, MagnetSpec, PouchLayout, PouchSpec,
    PrintPlan, SlotFace, SlotSpec, DEFAULT_LAYER_HEIGHT,
};
use crate::lattice::{
    convex_hull_of_mesh, tile_lattice, trim_to_hull, CellSpec, ConvexPolytope, LatticeModel, LayerGrading,
    DEFAULT_MIN_BEAM,
};
use crate::magnetics::{
    assign_polarities, field_map, stray_field_report, MagnetSource, Metric, PlaneSpec, PolarityMode, StrayFieldReport,
};
use crate::mesh::{emit_mesh, emit_shells, parse_mesh, MeshFormat, TriMesh};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Hull volume above this multiple of the mesh volume triggers a warning.
pub const NONCONVEX_WARNING_RATIO: f64 = 1.05;

/// Either a pouch count, placed on the default symmetric grid, or explicit
/// cavity centers in millimetres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PouchPlacement {
    Count(usize),
    Centers(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotConfig {
    pub dims: [f64; 3],
    #[serde(default = "default_face")]
    pub open_face: SlotFace,
    /// Pocket center; defaults to centered on `open_face`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    #[serde(default = "default_wall")]
    pub wall: f64,
}

/// Evaluation plane for the stray-field comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    /// Height of the plane above the magnet-center plane, mm.
    pub plane_offset: f64,
    /// Full width and height of the plane, mm.
    pub extent: [f64; 2],
    pub resolution: [usize; 2],
    pub metric: Metric,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            plane_offset: 15.0,
            extent: [100.0, 100.0],
            resolution: [101, 101],
            metric: Metric::Max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    /// Input mesh; relative paths resolve against the config file's folder.
    pub input: PathBuf,
    #[serde(default)]
    pub input_format: MeshFormat,
    /// Multiplier taking input units to millimetres.
    #[serde(default = "one")]
    pub unit_scale: f64,
    pub cell_size: f64,
    /// Modulus ratio per layer, bottom first.
    pub grading: Vec<f64>,
    #[serde(default = "default_min_beam")]
    pub min_beam: f64,
    pub magnet: MagnetSpec,
    pub pouches: PouchPlacement,
    #[serde(default)]
    pub clearances: Clearances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<SlotConfig>,
    #[serde(default = "default_layer_height")]
    pub layer_height: f64,
    #[serde(default = "default_polarity")]
    pub polarity: PolarityMode,
    #[serde(default)]
    pub field: FieldConfig,
    /// Bundle folder; relative paths resolve like `input`.
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_stl")]
    pub stl_format: MeshFormat,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn default_min_beam() -> f64 {
    DEFAULT_MIN_BEAM
}
fn default_layer_height() -> f64 {
    DEFAULT_LAYER_HEIGHT
}
fn default_polarity() -> PolarityMode {
    PolarityMode::Alternating
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_stl() -> MeshFormat {
    MeshFormat::StlBinary
}
fn default_face() -> SlotFace {
    SlotFace::NegZ
}
fn default_wall() -> f64 {
    1.2
}

impl PipelineConfig {
    /// Reference cuboid build: 8 mm cells graded 0.001 → 0.002, four
    /// 9.525×3.175 mm magnets on the mid-plane.
    pub fn reference(input: impl Into<PathBuf>) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            input: input.into(),
            input_format: MeshFormat::Auto,
            unit_scale: 1.0,
            cell_size: 8.0,
            grading: vec![0.001, 0.0015, 0.002],
            min_beam: DEFAULT_MIN_BEAM,
            magnet: MagnetSpec::new(9.525, 3.175),
            pouches: PouchPlacement::Count(4),
            clearances: Clearances::default(),
            slot: None,
            layer_height: DEFAULT_LAYER_HEIGHT,
            polarity: PolarityMode::Alternating,
            field: FieldConfig::default(),
            output_dir: default_output(),
            stl_format: MeshFormat::StlBinary,
            base_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::io("parsing pipeline config", e.into()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn input_path(&self) -> PathBuf {
        self.resolve(&self.input)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Checks every numeric field against its module's bounds.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported, expected {CONFIG_SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        if !(self.unit_scale > 0.0 && self.unit_scale.is_finite()) {
            return bad(format!("unit_scale {} must be positive", self.unit_scale));
        }
        if !(self.min_beam >= 0.0 && self.min_beam.is_finite()) {
            return bad(format!("min_beam {} must be non-negative", self.min_beam));
        }
        let grading = LayerGrading::new(self.grading.clone()).map_err(|e| Error::Config(format!("grading: {e}")))?;
        for r in &grading.layer_moduli {
            CellSpec::new(*r, self.cell_size, self.min_beam).map_err(|e| Error::Config(format!("cell_size: {e}")))?;
        }
        self.magnet.validate().map_err(|e| Error::Config(format!("magnet: {e}")))?;
        let c = &self.clearances;
        if ![c.radial, c.axial, c.wall, c.lip].iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return bad("clearances must be non-negative".into());
        }
        if let PouchPlacement::Centers(cs) = &self.pouches {
            if cs.iter().flatten().any(|v| !v.is_finite()) {
                return bad("pouch centers must be finite".into());
            }
        }
        if let Some(s) = &self.slot {
            if !s.dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
                return bad(format!("slot dims {:?} must be positive", s.dims));
            }
        }
        if !(self.layer_height > 0.0 && self.layer_height.is_finite()) {
            return bad(format!("layer_height {} must be positive", self.layer_height));
        }
        let f = &self.field;
        if f.resolution.iter().any(|n| *n < 2) {
            return bad(format!("field resolution {:?} must be at least 2x2", f.resolution));
        }
        if !(f.extent.iter().all(|e| *e > 0.0 && e.is_finite()) && f.plane_offset.is_finite()) {
            return bad("field extent must be positive".into());
        }
        if matches!(self.stl_format, MeshFormat::Obj | MeshFormat::Auto) {
            return bad("stl_format must be stl_bin or stl_ascii".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Hull,
    Lattice,
    Trim,
    Pouches,
    Slot,
    Pause,
    Polarity,
    Field,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        self.source.class()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            source: e.into(),
        })
    }
}

/// Everything the pipeline computes, before anything is written.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub hull: ConvexPolytope,
    /// Lattice after tiling, before trimming or carving.
    pub tiled: LatticeModel,
    /// Lattice after trimming, before carving.
    pub trimmed: LatticeModel,
    pub model: LatticeModel,
    pub plan: PrintPlan,
    pub polarities: Vec<i8>,
    pub report: StrayFieldReport,
    pub warnings: Vec<String>,
    pub timings: Vec<(Stage, Duration)>,
}

impl Artifacts {
    pub fn pouches(&self) -> Vec<PouchSpec> {
        self.model.pouches.clone()
    }
}

/// Contents of `print_plan.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintPlanFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub plan: PrintPlan,
    pub polarity: PolarityMode,
    pub layout: PouchLayout,
}

struct Clock {
    timings: Vec<(Stage, Duration)>,
    last: Instant,
}

impl Clock {
    fn new() -> Self {
        Self {
            timings: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timings.push((stage, now - self.last));
        log::info!("stage {stage} done in {:.1} ms", (now - self.last).as_secs_f64() * 1e3);
        self.last = now;
    }
}

/// Runs hull through stray-field report on an already loaded mesh.
pub fn build(config: &PipelineConfig, mesh: &TriMesh) -> Result<Artifacts, PipelineError> {
    config.validate().at(Stage::Config)?;
    let mut clock = Clock::new();
    let mut warnings = Vec::new();

    let hull = convex_hull_of_mesh(mesh).at(Stage::Hull)?;
    let (hv, mv) = (hull.volume(), mesh.signed_volume());
    if mv > 0.0 && hv > NONCONVEX_WARNING_RATIO * mv {
        let w = format!(
            "input is not convex: hull volume {hv:.3} mm³ exceeds mesh volume {mv:.3} mm³ by {:.1}%",
            (hv / mv - 1.0) * 100.0
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    clock.lap(Stage::Hull);

    let grading = LayerGrading::new(config.grading.clone()).at(Stage::Lattice)?;
    let tiled = tile_lattice(&hull.bbox(), config.cell_size, &grading, config.min_beam).at(Stage::Lattice)?;
    clock.lap(Stage::Lattice);

    let trimmed = trim_to_hull(&tiled, &hull).at(Stage::Trim)?;
    clock.lap(Stage::Trim);

    let centers = match &config.pouches {
        PouchPlacement::Count(n) => default_pouch_centers(&trimmed.bbox, *n),
        PouchPlacement::Centers(c) => c.clone(),
    };
    let pouches: Vec<PouchSpec> = centers
        .iter()
        .map(|c| PouchSpec::with_clearances(*c, config.magnet, &config.clearances))
        .collect();
    let mut model = place_pouches(&trimmed, &pouches).at(Stage::Pouches)?;
    clock.lap(Stage::Pouches);

    if let Some(s) = &config.slot {
        let mut slot = match s.position {
            Some(p) => SlotSpec::new(s.dims, p, s.open_face),
            None => SlotSpec::on_face(&model.bbox, s.dims, s.open_face),
        };
        slot.wall = s.wall;
        model = place_slot(&model, &slot).at(Stage::Slot)?;
        clock.lap(Stage::Slot);
    }

    let plan = pause_layer(&model.pouches, config.layer_height).at(Stage::Pause)?;
    clock.lap(Stage::Pause);

    // Signs follow the sorted order that placement stores.
    let stored: Vec<[f64; 3]> = model.pouches.iter().map(|p| p.center).collect();
    let polarities = assign_polarities(&stored, config.polarity);
    for (p, s) in model.pouches.iter_mut().zip(&polarities) {
        p.magnet.polarity = *s;
    }
    clock.lap(Stage::Polarity);

    let report = compare_polarities(&model.pouches, &config.field).at(Stage::Field)?;
    clock.lap(Stage::Field);

    Ok(Artifacts {
        hull,
        tiled,
        trimmed,
        model,
        plan,
        polarities,
        report,
        warnings,
        timings: clock.timings,
    })
}

/// Plane `field.plane_offset` mm above the mean magnet center, centered on
/// the magnets, in metres.
pub fn field_plane(pouches: &[PouchSpec], field: &FieldConfig) -> PlaneSpec {
    let n = pouches.len().max(1) as f64;
    let mean = |k: usize| pouches.iter().map(|p| p.center[k]).sum::<f64>() / n;
    PlaneSpec {
        z: (mean(2) + field.plane_offset) * 1e-3,
        center: [mean(0) * 1e-3, mean(1) * 1e-3],
        extent: [field.extent[0] * 1e-3, field.extent[1] * 1e-3],
        resolution: field.resolution,
    }
}

/// Stray-field report of the pouches with all magnets aligned versus the
/// alternating pattern, whatever polarity the pouches carry.
pub fn compare_polarities(pouches: &[PouchSpec], field: &FieldConfig) -> Result<StrayFieldReport, Error> {
    let centers: Vec<[f64; 3]> = pouches.iter().map(|p| p.center).collect();
    let sources = |signs: &[i8]| -> Vec<MagnetSource> {
        pouches
            .iter()
            .zip(signs)
            .map(|(p, s)| MagnetSource::from_pouch(p).with_polarity(*s))
            .collect()
    };
    let plane = field_plane(pouches, field);
    let aligned = field_map(&sources(&assign_polarities(&centers, PolarityMode::Aligned)), &plane)?;
    let alt = field_map(&sources(&assign_polarities(&centers, PolarityMode::Alternating)), &plane)?;
    Ok(stray_field_report(&aligned, &alt, field.metric)?)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub keep_intermediates: bool,
    pub dry_run: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    /// Human-readable stage plan (dry run) or summary lines.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub artifacts: Option<Artifacts>,
}

pub const STAGES: [Stage; 9] = [
    Stage::Load,
    Stage::Hull,
    Stage::Lattice,
    Stage::Trim,
    Stage::Pouches,
    Stage::Slot,
    Stage::Pause,
    Stage::Polarity,
    Stage::Field,
];

fn write_file(path: &Path, data: &[u8]) -> Result<(), Error> {
    std::fs::write(path, data).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn dry_run_plan(config: &PipelineConfig, mesh: &TriMesh) -> Vec<String> {
    let bbox = mesh.bbox().expect("loaded meshes are non-empty");
    let mut lines = vec![format!("input {} ({} triangles)", config.input_path().display(), mesh.triangles.len())];
    for s in STAGES {
        let detail = match s {
            Stage::Load => format!("unit scale {}", config.unit_scale),
            Stage::Hull => "convex hull of input".into(),
            Stage::Lattice => {
                let e = bbox.extent();
                format!(
                    "{} mm cells over {:.3} x {:.3} x {:.3} mm, grading {:?}",
                    config.cell_size, e.x, e.y, e.z, config.grading
                )
            }
            Stage::Trim => "clip beams to hull".into(),
            Stage::Pouches => match &config.pouches {
                PouchPlacement::Count(n) => format!("{n} pouches on the default grid"),
                PouchPlacement::Centers(c) => format!("{} pouches at given centers", c.len()),
            },
            Stage::Slot => match &config.slot {
                Some(s) => format!("slot {:?} mm on {}", s.dims, s.open_face),
                None => "skipped".into(),
            },
            Stage::Pause => format!("layer height {} mm", config.layer_height),
            Stage::Polarity => format!("{}", config.polarity),
            Stage::Field => format!(
                "plane {} mm above magnets, {:?} mm, {:?} samples",
                config.field.plane_offset, config.field.extent, config.field.resolution
            ),
            _ => String::new(),
        };
        lines.push(format!("{s}: {detail}"));
    }
    lines.push(format!("output {}", config.output_path().display()));
    lines
}

/// Loads the input, runs every stage and writes the artifact bundle.
pub fn run_pipeline(config: &PipelineConfig, opts: RunOptions) -> Result<PipelineOutcome, PipelineError> {
    config.validate().at(Stage::Config)?;
    let start = Instant::now();
    let loaded = parse_mesh(&config.input_path(), config.input_format, config.unit_scale).at(Stage::Load)?;
    let load_time = start.elapsed();
    if opts.dry_run {
        return Ok(PipelineOutcome {
            lines: dry_run_plan(config, &loaded.mesh),
            files: Vec::new(),
            warnings: Vec::new(),
            artifacts: None,
        });
    }
    let mut art = build(config, &loaded.mesh)?;
    art.timings.insert(0, (Stage::Load, load_time));

    let write_start = Instant::now();
    let out = config.output_path();
    std::fs::create_dir_all(&out)
        .map_err(|e| Error::io(format!("creating {}", out.display()), e))
        .at(Stage::Write)?;
    let mut files = Vec::new();

    let stl = out.join("model.stl");
    emit_shells(&art.model.shells(), &stl, config.stl_format).at(Stage::Write)?;
    files.push(stl);

    let layout = PouchLayout::from_pouches(&art.model.pouches, art.model.slot).expect("pipeline places pouches");
    let plan_file = PrintPlanFile {
        schema_version: CONFIG_SCHEMA_VERSION,
        plan: art.plan,
        polarity: config.polarity,
        layout,
    };
    let plan_path = out.join("print_plan.json");
    write_file(&plan_path, to_json(&plan_file).as_bytes()).at(Stage::Write)?;
    files.push(plan_path);

    let report_path = out.join("field_report.json");
    write_file(&report_path, to_json(&art.report).as_bytes()).at(Stage::Write)?;
    files.push(report_path);

    if opts.keep_intermediates {
        let dir = out.join("intermediates");
        std::fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))
            .at(Stage::Write)?;
        let hull_path = dir.join("hull.stl");
        emit_mesh(&art.hull.to_mesh(), &hull_path, config.stl_format).at(Stage::Write)?;
        let tiled_path = dir.join("lattice.stl");
        emit_shells(&art.tiled.shells(), &tiled_path, config.stl_format).at(Stage::Write)?;
        let trimmed_path = dir.join("trimmed.stl");
        emit_shells(&art.trimmed.shells(), &trimmed_path, config.stl_format).at(Stage::Write)?;
        let layout_path = dir.join("layout.json");
        write_file(&layout_path, plan_file.layout.to_json().as_bytes()).at(Stage::Write)?;
        files.extend([hull_path, tiled_path, trimmed_path, layout_path]);
    }
    art.timings.push((Stage::Write, write_start.elapsed()));

    let mut log = String::from("eflesh pipeline\n");
    log.push_str(&format!("input {}\n", config.input_path().display()));
    for (s, d) in &art.timings {
        log.push_str(&format!("stage {s} {:.3} ms\n", d.as_secs_f64() * 1e3));
    }
    for w in &art.warnings {
        log.push_str(&format!("warning {w}\n"));
    }
    let log_path = out.join("log.txt");
    write_file(&log_path, log.as_bytes()).at(Stage::Write)?;
    files.push(log_path);

    let lines = vec![
        format!(
            "lattice {}x{}x{} cells, {} beams, {} parts",
            art.model.grid_dims[0],
            art.model.grid_dims[1],
            art.model.grid_dims[2],
            art.model.beams.len(),
            art.model.parts.len()
        ),
        format!("pause after layer {} (z = {} mm)", art.plan.pause_layer_index, art.plan.pause_z),
        format!("stray-field reduction ({}) {}", art.report.metric, art.report.ratio),
    ];
    Ok(PipelineOutcome {
        lines,
        files,
        warnings: art.warnings.clone(),
        artifacts: Some(art),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Stage names and timings recorded in a bundle's `log.txt`.
pub fn read_bundle_log(dir: &Path) -> Result<Vec<(String, f64)>, Error> {
    let path = dir.join("log.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(text
        .lines()
        .filter_map(|l| {
            let mut it = l.strip_prefix("stage ")?.split_whitespace();
            let name = it.next()?.to_string();
            let ms = it.next()?.parse().ok()?;
            Some((name, ms))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Aabb, Vec3};
    use crate::mesh::box_mesh;

    fn cuboid() -> TriMesh {
        box_mesh(&Aabb::new(Vec3::zeros(), Vec3::new(40.0, 40.0, 24.0)))
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = PipelineConfig::reference("box.stl");
        cfg.slot = Some(SlotConfig {
            dims: [32.0, 32.0, 2.0],
            open_face: SlotFace::NegZ,
            position: None,
            wall: 1.2,
        });
        let back = PipelineConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let minimal = r#"{"schema_version":1,"input":"a.stl","cell_size":8,"grading":[0.002],
            "magnet":{"diameter":9.525,"thickness":3.175},"pouches":{"count":4}}"#;
        let m = PipelineConfig::from_json(minimal).unwrap();
        assert_eq!(m.polarity, PolarityMode::Alternating);
        assert_eq!(m.layer_height, 0.2);
        assert!(PipelineConfig::from_json(&minimal.replace("cell_size", "cell_sise")).is_err());
    }

    #[test]
    fn reference_build() {
        let art = build(&PipelineConfig::reference("unused"), &cuboid()).unwrap();
        assert_eq!(art.tiled.grid_dims, [5, 5, 3]);
        assert_eq!(art.model.parts.len(), 4);
        assert_eq!(art.plan.pause_layer_index, 69);
        assert_eq!(art.polarities, vec![1, -1, -1, 1]);
        assert!(art.model.shells().iter().all(|s| s.closed));
        assert!(art.report.ratio > 0.0);
        assert!(art.warnings.is_empty());
    }

    #[test]
    fn errors_name_their_stage() {
        let mut cfg = PipelineConfig::reference("unused");
        cfg.cell_size = 30.0;
        cfg.grading = vec![0.01];
        let err = build(&cfg, &cuboid()).unwrap_err();
        assert_eq!(err.stage, Stage::Lattice);
        assert_eq!(err.class().exit_code(), 3);
        assert!(err.to_string().starts_with("stage lattice:"));

        let mut cfg = PipelineConfig::reference("unused");
        cfg.pouches = PouchPlacement::Centers(vec![[1.0, 1.0, 12.0]]);
        let err = build(&cfg, &cuboid()).unwrap_err();
        assert_eq!(err.stage, Stage::Pouches);
        assert_eq!(err.class().exit_code(), 4);

        let mut cfg = PipelineConfig::reference("unused");
        cfg.layer_height = 0.0;
        assert_eq!(build(&cfg, &cuboid()).unwrap_err().stage, Stage::Config);
    }
}
