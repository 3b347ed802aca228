use std::io::Write;

use super::fieldmap::FieldMap;
use super::MagneticsError;

/// One row per sample: position in millimetres and `B_z` in tesla.
pub fn write_field_csv<W: Write>(map: &FieldMap, out: W) -> Result<(), MagneticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_mm", "y_mm", "Bz_T"]).map_err(csv_err)?;
    for j in 0..map.ny() {
        for i in 0..map.nx() {
            let p = map.plane.point(i, j);
            let bz = map.at(i, j).z;
            w.write_record([
                format!("{}", p.x * 1e3),
                format!("{}", p.y * 1e3),
                format!("{bz:e}"),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> MagneticsError {
    MagneticsError::Export(e.into())
}

/// Binary 8-bit graymap of `|B_z|` scaled to the map maximum. The first
/// image row is the highest y so the picture reads with y pointing up.
pub fn write_field_pgm<W: Write>(map: &FieldMap, mut out: W) -> Result<(), MagneticsError> {
    let (nx, ny) = (map.nx(), map.ny());
    let peak = map.max_abs_bz();
    write!(out, "P5\n{nx} {ny}\n255\n")?;
    let mut row = Vec::with_capacity(nx);
    for j in (0..ny).rev() {
        row.clear();
        for i in 0..nx {
            let v = if peak > 0.0 { map.at(i, j).z.abs() / peak } else { 0.0 };
            row.push((v * 255.0).round() as u8);
        }
        out.write_all(&row)?;
    }
    Ok(())
}
