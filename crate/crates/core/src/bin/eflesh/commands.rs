use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use eflesh_core::fabrication::{
    default_pouch_centers, pause_layer, place_pouches, place_slot, Clearances, MagnetSpec, PouchLayout, PouchSpec,
    PrintPlan, SlotSpec,
};
use eflesh_core::lattice::{convex_hull_of_mesh, tile_lattice, trim_to_hull, ConvexPolytope, LatticeModel, LayerGrading};
use eflesh_core::magnetics::{assign_polarities, field_map, write_field_csv, write_field_pgm, MagnetSource, PolarityMode};
use eflesh_core::mesh::{box_mesh, emit_mesh, emit_shells, parse_mesh, validate_shell, MeshFormat, TriMesh};
use eflesh_core::pipeline::{
    compare_polarities, field_plane, read_bundle_log, run_pipeline, FieldConfig, PipelineConfig, PouchPlacement,
    RunOptions,
};
use eflesh_core::sensor::{
    localize_contact, read_signal_csv, read_windows_csv, sensitivity as min_force, slip_features,
    train_slip_classifier, ContactState, LocalizeOptions, SensorModel, SlipFeatures, TrainOptions,
};
use eflesh_core::{Aabb, Error, Vec3};
use serde::Serialize;

use crate::args::*;
use crate::Failure;

type CmdResult = Result<(), Failure>;

/// `println!` that stays quiet when stdout is a closed pipe.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Error::io(context, e).into()
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(io_err(format!("creating {}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(io_err(format!("writing {}", path.display())))
}

fn print_json<T: Serialize>(v: &T) {
    outln!("{}", serde_json::to_string_pretty(v).expect("value serializes"));
}

/// Parses `AxB` or `AxBxC` style dimensions.
fn dims<const N: usize>(s: &str, name: &str) -> Result<[f64; N], Failure> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    numbers(&parts, s, name)
}

/// Parses a comma separated tuple.
fn tuple<const N: usize>(s: &str, name: &str) -> Result<[f64; N], Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    numbers(&parts, s, name)
}

fn numbers<const N: usize>(parts: &[&str], s: &str, name: &str) -> Result<[f64; N], Failure> {
    if parts.len() != N {
        return Err(Failure::usage(format!("--{name} '{s}' needs {N} numbers")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("--{name} '{s}': '{p}' is not a number")))?;
    }
    Ok(out)
}

fn grading(list: &str) -> Result<Vec<f64>, Failure> {
    list.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Failure::usage(format!("--modulus '{list}': '{p}' is not a number")))
        })
        .collect()
}

pub fn mesh_info(a: MeshInfoArgs) -> CmdResult {
    let loaded = parse_mesh(&a.file, MeshFormat::Auto, a.unit_scale)?;
    print_mesh_summary(&loaded.mesh);
    let s = loaded.stats;
    if s != Default::default() {
        outln!("cleanup {s:?}");
    }
    Ok(())
}

fn print_mesh_summary(mesh: &TriMesh) {
    let r = validate_shell(mesh);
    outln!("vertices {}", r.vertex_count);
    outln!("triangles {}", r.triangle_count);
    outln!("closed {}", r.closed);
    outln!("boundary_edges {}", r.boundary_edge_count);
    outln!("nonmanifold_edges {}", r.nonmanifold_edge_count);
    outln!("euler_characteristic {}", r.euler_characteristic);
    outln!("volume_mm3 {}", r.signed_volume);
    if let Some(b) = mesh.bbox() {
        outln!("bbox_min {} {} {}", b.min[0], b.min[1], b.min[2]);
        outln!("bbox_max {} {} {}", b.max[0], b.max[1], b.max[2]);
    }
}

pub fn convert(a: ConvertArgs) -> CmdResult {
    let loaded = parse_mesh(&a.input, MeshFormat::Auto, a.unit_scale)?;
    let format = match a.format {
        Some(f) => f,
        None => match MeshFormat::for_path(&a.output) {
            MeshFormat::Auto => return Err(Failure::usage("cannot infer output format, pass --format")),
            f => f,
        },
    };
    let rep = emit_mesh(&loaded.mesh, &a.output, format)?;
    log::info!("wrote {} ({rep:?})", a.output.display());
    Ok(())
}

fn build_lattice(
    mesh: &TriMesh,
    cell: f64,
    modulus: &str,
    min_beam: f64,
    trim: bool,
) -> Result<(ConvexPolytope, LatticeModel), Failure> {
    let hull = convex_hull_of_mesh(mesh)?;
    let grading = LayerGrading::new(grading(modulus)?)?;
    let tiled = tile_lattice(&hull.bbox(), cell, &grading, min_beam)?;
    let model = if trim { trim_to_hull(&tiled, &hull)? } else { tiled };
    Ok((hull, model))
}

pub fn lattice(a: LatticeArgs) -> CmdResult {
    let loaded = parse_mesh(&a.input, MeshFormat::Auto, a.unit_scale)?;
    let (_, model) = build_lattice(&loaded.mesh, a.cell, &a.modulus, a.min_beam, !a.no_trim)?;
    emit_shells(&model.shells(), &a.output, MeshFormat::for_path(&a.output))?;
    let [nx, ny, nz] = model.grid_dims;
    outln!("cells {nx}x{ny}x{nz}");
    outln!("beams {}", model.beams.len());
    outln!("beam_volume_mm3 {}", model.beam_volume());
    Ok(())
}

fn body_lattice(b: &BodyArgs) -> Result<LatticeModel, Failure> {
    let mesh = match &b.input {
        Some(p) => parse_mesh(p, MeshFormat::Auto, b.unit_scale)?.mesh,
        None => {
            let [w, d, h] = dims::<3>(&b.bbox, "bbox")?;
            box_mesh(&Aabb::new(Vec3::zeros(), Vec3::new(w, d, h)))
        }
    };
    Ok(build_lattice(&mesh, b.cell, &b.modulus, b.min_beam, true)?.1)
}

fn read_layout(path: &Path) -> Result<PouchLayout, Failure> {
    Ok(PouchLayout::from_json(&read_text(path)?)?)
}

fn emit_layout(layout: &PouchLayout, output: Option<&PathBuf>) -> CmdResult {
    match output {
        Some(p) => write_text(p, &layout.to_json()),
        None => {
            outln!("{}", layout.to_json());
            Ok(())
        }
    }
}

fn set_polarities(model: &mut LatticeModel, mode: PolarityMode) {
    let centers: Vec<[f64; 3]> = model.pouches.iter().map(|p| p.center).collect();
    for (p, s) in model.pouches.iter_mut().zip(assign_polarities(&centers, mode)) {
        p.magnet.polarity = s;
    }
}

pub fn pouch(a: PouchArgs) -> CmdResult {
    let lattice = body_lattice(&a.body)?;
    let pouches = match &a.layout {
        Some(p) => read_layout(p)?.to_pouches(),
        None => {
            let m = &a.magnet;
            let [d, t] = dims::<2>(&m.magnet, "magnet")?;
            let magnet = MagnetSpec {
                remanence: m.remanence,
                ..MagnetSpec::new(d, t)
            };
            let c = Clearances {
                radial: m.radial_clearance,
                axial: m.axial_clearance,
                wall: m.wall,
                lip: m.lip,
            };
            default_pouch_centers(&lattice.bbox, a.count)
                .into_iter()
                .map(|center| PouchSpec::with_clearances(center, magnet, &c))
                .collect()
        }
    };
    let mut model = place_pouches(&lattice, &pouches)?;
    set_polarities(&mut model, a.polarity);
    if let Some(stl) = &a.stl {
        emit_shells(&model.shells(), stl, MeshFormat::for_path(stl))?;
    }
    let layout = PouchLayout::from_pouches(&model.pouches, None).ok_or_else(|| Failure::usage("no pouches to place"))?;
    emit_layout(&layout, a.output.as_ref())
}

pub fn slot(a: SlotArgs) -> CmdResult {
    let mut lattice = body_lattice(&a.body)?;
    let layout = a.layout.as_deref().map(read_layout).transpose()?;
    if let Some(l) = &layout {
        lattice = place_pouches(&lattice, &l.to_pouches())?;
        for (p, m) in lattice.pouches.iter_mut().zip(sorted_polarities(l)) {
            p.magnet.polarity = m;
        }
    }
    let d = dims::<3>(&a.dims, "dims")?;
    let mut spec = match &a.position {
        Some(p) => SlotSpec::new(d, tuple::<3>(p, "position")?, a.face),
        None => SlotSpec::on_face(&lattice.bbox, d, a.face),
    };
    spec.wall = a.wall;
    let model = place_slot(&lattice, &spec)?;
    match PouchLayout::from_pouches(&model.pouches, model.slot) {
        Some(l) => emit_layout(&l, a.output.as_ref()),
        None => {
            let text = serde_json::to_string_pretty(&spec).expect("slot serializes");
            match &a.output {
                Some(p) => write_text(p, &text),
                None => {
                    outln!("{text}");
                    Ok(())
                }
            }
        }
    }
}

/// Polarities of a layout in the order placement stores its pouches.
fn sorted_polarities(l: &PouchLayout) -> Vec<i8> {
    let mut pm: Vec<_> = l.pouches.iter().collect();
    pm.sort_by(|a, b| {
        let k = |p: &&eflesh_core::fabrication::PlacedMagnet| [p.center[2], p.center[1], p.center[0]];
        k(a).iter().zip(k(b).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    pm.iter().map(|p| p.polarity).collect()
}

pub fn pause(a: PauseArgs) -> CmdResult {
    let pouches = match (&a.layout, a.cavity_top) {
        (Some(p), _) => read_layout(p)?.to_pouches(),
        (None, Some(top)) => {
            // A single pouch whose cavity top sits at `top`.
            let m = MagnetSpec::new(1.0, 1.0);
            let mut p = PouchSpec::new([0.0, 0.0, 0.0], m);
            p.center[2] = top - p.cavity_height() / 2.0;
            vec![p]
        }
        (None, None) => {
            let bbox = Aabb::new(Vec3::zeros(), Vec3::new(40.0, 40.0, 24.0));
            default_pouch_centers(&bbox, 4)
                .into_iter()
                .map(|c| PouchSpec::new(c, MagnetSpec::new(9.525, 3.175)))
                .collect()
        }
    };
    let plan: PrintPlan = pause_layer(&pouches, a.layer_height)?;
    if a.json {
        print_json(&plan);
    } else {
        outln!("{}", plan.pause_layer_index);
    }
    Ok(())
}

fn field_setup(f: &FieldArgs) -> Result<(Vec<PouchSpec>, FieldConfig), Failure> {
    let mut layout = read_layout(&f.layout)?;
    if let Some(br) = f.remanence {
        layout.magnet.remanence = br;
    }
    let [nx, ny] = dims::<2>(&f.res, "res")?;
    if nx.fract() != 0.0 || ny.fract() != 0.0 || nx < 0.0 || ny < 0.0 {
        return Err(Failure::usage(format!("--res '{}' needs whole numbers", f.res)));
    }
    let cfg = FieldConfig {
        plane_offset: f.plane_z,
        extent: dims::<2>(&f.extent, "extent")?,
        resolution: [nx as usize, ny as usize],
        ..FieldConfig::default()
    };
    Ok((layout.to_pouches(), cfg))
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let (pouches, cfg) = field_setup(&a.field)?;
    let signs = match a.polarity {
        Some(mode) => assign_polarities(&pouches.iter().map(|p| p.center).collect::<Vec<_>>(), mode),
        None => pouches.iter().map(|p| p.magnet.polarity).collect(),
    };
    let sources: Vec<MagnetSource> = pouches
        .iter()
        .zip(&signs)
        .map(|(p, s)| MagnetSource::from_pouch(p).with_polarity(*s).with_slices(a.slices))
        .collect();
    let map = field_map(&sources, &field_plane(&pouches, &cfg))?;
    let is_pgm = a.output.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let mut out = create(&a.output)?;
    if is_pgm {
        write_field_pgm(&map, &mut out)?;
    } else {
        write_field_csv(&map, &mut out)?;
    }
    out.flush().map_err(io_err(format!("writing {}", a.output.display())))?;
    if let Some(p) = &a.pgm {
        let mut w = create(p)?;
        write_field_pgm(&map, &mut w)?;
        w.flush().map_err(io_err(format!("writing {}", p.display())))?;
    }
    outln!("max_abs_bz {}", map.max_abs_bz());
    outln!("mean_abs_bz {}", map.mean_abs_bz());
    Ok(())
}

pub fn compare_polarity(a: CompareArgs) -> CmdResult {
    let (pouches, mut cfg) = field_setup(&a.field)?;
    cfg.metric = a.metric;
    let mut report = compare_polarities(&pouches, &cfg)?;
    if a.summary {
        report.per_point_ratio.clear();
    }
    print_json(&report);
    Ok(())
}

/// The default sensor geometry, optionally with a layout's magnets moved so
/// the layout is centered on the middle magnetometer.
fn sensor_model_for(layout: Option<&Path>) -> Result<SensorModel, Failure> {
    let mut model = SensorModel::default();
    if let Some(p) = layout {
        let pouches = read_layout(p)?.to_pouches();
        let n = pouches.len().max(1) as f64;
        let cx = pouches.iter().map(|p| p.center[0]).sum::<f64>() / n;
        let cy = pouches.iter().map(|p| p.center[1]).sum::<f64>() / n;
        model.magnets = pouches
            .iter()
            .map(|p| {
                let c = Vec3::new(p.center[0] - cx, p.center[1] - cy, p.center[2]) * 1e-3;
                MagnetSource::new(p.magnet, c)
            })
            .collect();
    }
    model.validate()?;
    Ok(model)
}

pub fn sensor_model(a: SensorModelArgs) -> CmdResult {
    outln!("{}", sensor_model_for(a.layout.as_deref())?.to_json());
    Ok(())
}

fn load_model(path: Option<&Path>) -> Result<SensorModel, Failure> {
    match path {
        Some(p) => Ok(SensorModel::from_json(&read_text(p)?)?),
        None => Ok(SensorModel::default()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(io_err(format!("reading {}", path.display())))
}

#[derive(Serialize)]
struct FrameLocalization {
    t: f64,
    #[serde(flatten)]
    result: eflesh_core::sensor::Localization,
}

pub fn localize(a: LocalizeArgs) -> CmdResult {
    let model = load_model(a.model.as_deref())?;
    let frames = read_signal_csv(open(&a.signal)?)?;
    let guess = a
        .guess
        .as_deref()
        .map(|g| tuple::<3>(g, "guess").map(|[x, y, z]| ContactState::new(x, y, z)))
        .transpose()?;
    let opts = LocalizeOptions::default();
    let mut out = Vec::with_capacity(frames.len());
    for f in &frames {
        let result = localize_contact(f, &model, guess, &opts)?;
        out.push(FrameLocalization { t: f.timestamp, result });
    }
    print_json(&out);
    Ok(())
}

pub fn sensitivity(a: SensitivityArgs) -> CmdResult {
    let model = load_model(a.model.as_deref())?;
    print_json(&min_force(&model, a.sigma, a.stiffness)?);
    Ok(())
}

#[derive(Serialize)]
struct SlipReport {
    train_windows: usize,
    test_windows: usize,
    train_accuracy: f64,
    test_accuracy: Option<f64>,
    classifier: eflesh_core::sensor::SlipClassifier,
}

pub fn slip_train(a: SlipTrainArgs) -> CmdResult {
    if a.window < 2 {
        return Err(Failure::usage(format!("--window {} must be at least 2", a.window)));
    }
    if a.holdout_every == 1 {
        return Err(Failure::usage("--holdout-every 1 leaves nothing to train on"));
    }
    let windows = read_windows_csv(open(&a.data)?)?;
    let (mut train, mut test): (Vec<(SlipFeatures, bool)>, Vec<_>) = (Vec::new(), Vec::new());
    for (i, w) in windows.iter().enumerate() {
        let held = a.holdout_every > 1 && i % a.holdout_every == a.holdout_every - 1;
        // Long recordings are cut into consecutive windows; a short one is used whole.
        let chunks: Vec<&[_]> = if w.frames.len() < a.window {
            vec![&w.frames[..]]
        } else {
            w.frames.chunks_exact(a.window).collect()
        };
        for c in chunks {
            let sample = (slip_features(c)?, w.label);
            if held {
                test.push(sample);
            } else {
                train.push(sample);
            }
        }
    }
    let opts = TrainOptions {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
    };
    let classifier = train_slip_classifier(&train, &opts)?;
    if let Some(p) = &a.output {
        write_text(p, &serde_json::to_string_pretty(&classifier).expect("classifier serializes"))?;
    }
    print_json(&SlipReport {
        train_windows: train.len(),
        test_windows: test.len(),
        train_accuracy: classifier.accuracy(&train),
        test_accuracy: (!test.is_empty()).then(|| classifier.accuracy(&test)),
        classifier,
    });
    Ok(())
}

fn absolute(p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        std::env::current_dir().map(|d| d.join(&p)).unwrap_or(p)
    }
}

pub fn pipeline(a: PipelineArgs) -> CmdResult {
    let mut cfg = match (&a.config, &a.input) {
        (Some(path), _) => PipelineConfig::from_file(path)?,
        (None, Some(input)) => PipelineConfig::reference(absolute(input.clone())),
        (None, None) => return Err(Failure::usage("pass --config or --input")),
    };
    if let Some(p) = a.input {
        cfg.input = absolute(p);
    }
    if let Some(p) = a.output {
        cfg.output_dir = absolute(p);
    } else if a.config.is_none() {
        cfg.output_dir = absolute(cfg.output_dir);
    }
    if let Some(v) = a.unit_scale {
        cfg.unit_scale = v;
    }
    if let Some(v) = a.cell {
        cfg.cell_size = v;
    }
    if let Some(v) = &a.modulus {
        cfg.grading = grading(v)?;
    }
    if let Some(v) = a.min_beam {
        cfg.min_beam = v;
    }
    if let Some(v) = &a.magnet {
        let [d, t] = dims::<2>(v, "magnet")?;
        cfg.magnet.diameter = d;
        cfg.magnet.thickness = t;
    }
    if let Some(n) = a.count {
        cfg.pouches = PouchPlacement::Count(n);
    }
    if let Some(p) = a.polarity {
        cfg.polarity = p;
    }
    if let Some(v) = a.layer_height {
        cfg.layer_height = v;
    }
    let outcome = run_pipeline(
        &cfg,
        RunOptions {
            keep_intermediates: a.keep_intermediates,
            dry_run: a.dry_run,
        },
    )?;
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    for l in &outcome.lines {
        outln!("{l}");
    }
    for f in &outcome.files {
        outln!("wrote {}", f.display());
    }
    Ok(())
}

pub fn info(a: InfoArgs) -> CmdResult {
    let p = &a.path;
    if p.is_dir() {
        let stages = read_bundle_log(p)?;
        for (name, ms) in &stages {
            outln!("{name} {ms:.3} ms");
        }
        outln!("total {:.3} ms", stages.iter().map(|s| s.1).sum::<f64>());
        return Ok(());
    }
    if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let cfg = PipelineConfig::from_file(p)?;
        cfg.validate()?;
        outln!("input {}", cfg.input_path().display());
        outln!("cell_size {}", cfg.cell_size);
        outln!("grading {:?}", cfg.grading);
        outln!("min_beam {}", cfg.min_beam);
        outln!("magnet {}x{}", cfg.magnet.diameter, cfg.magnet.thickness);
        match &cfg.pouches {
            PouchPlacement::Count(n) => outln!("pouches {n}"),
            PouchPlacement::Centers(c) => outln!("pouches {} (explicit)", c.len()),
        }
        outln!("slot {}", cfg.slot.as_ref().map_or("none".to_string(), |s| format!("{:?} on {}", s.dims, s.open_face)));
        outln!("layer_height {}", cfg.layer_height);
        outln!("polarity {}", cfg.polarity);
        outln!("output {}", cfg.output_path().display());
        return Ok(());
    }
    let loaded = parse_mesh(p, MeshFormat::Auto, 1.0)?;
    print_mesh_summary(&loaded.mesh);
    Ok(())
}
