use std::io::{Read, Write};

use super::{SensorError, SignalFrame, CHANNELS};

/// Column names of a signal file, timestamp first.
pub const SIGNAL_HEADER: [&str; 16] = [
    "t", "m0x", "m0y", "m0z", "m1x", "m1y", "m1z", "m2x", "m2y", "m2z", "m3x", "m3y", "m3z", "m4x", "m4y", "m4z",
];

/// Frames of one slip window with their label (true = force).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub id: String,
    pub label: bool,
    pub frames: Vec<SignalFrame>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> SensorError {
    SensorError::Parse { line, msg: msg.into() }
}

fn csv_err(e: csv::Error) -> SensorError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    parse_err(line, e.to_string())
}

fn check_header(found: &csv::StringRecord, prefix: &[&str]) -> Result<(), SensorError> {
    let expected: Vec<&str> = prefix.iter().copied().chain(SIGNAL_HEADER).collect();
    let got: Vec<&str> = found.iter().map(str::trim).collect();
    if got != expected {
        return Err(parse_err(1, format!("expected header '{}'", expected.join(","))));
    }
    Ok(())
}

fn parse_frame(rec: &csv::StringRecord, offset: usize, line: usize) -> Result<SignalFrame, SensorError> {
    let num = |i: usize| -> Result<f64, SensorError> {
        let s = rec.get(offset + i).unwrap_or("").trim();
        let v: f64 = s
            .parse()
            .map_err(|_| parse_err(line, format!("column {} is not a number: '{s}'", offset + i + 1)))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("column {} is not finite", offset + i + 1)));
        }
        Ok(v)
    };
    let mut values = [0.0; CHANNELS];
    for (c, v) in values.iter_mut().enumerate() {
        *v = num(c + 1)?;
    }
    Ok(SignalFrame::new(num(0)?, values))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r)
}

pub fn read_signal_csv<R: Read>(r: R) -> Result<Vec<SignalFrame>, SensorError> {
    let mut rd = reader(r);
    check_header(rd.headers().map_err(csv_err)?, &[])?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push(parse_frame(&rec, 0, line)?);
    }
    Ok(out)
}

pub fn write_signal_csv<W: Write>(frames: &[SignalFrame], w: W) -> Result<(), SensorError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SIGNAL_HEADER).map_err(csv_err)?;
    for f in frames {
        let row = std::iter::once(f.timestamp).chain(f.values).map(|v| format!("{v:e}"));
        wr.write_record(row).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| parse_err(0, e.to_string()))
}

fn parse_label(s: &str, line: usize) -> Result<bool, SensorError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "force" | "true" => Ok(true),
        "0" | "no-force" | "no_force" | "false" => Ok(false),
        other => Err(parse_err(line, format!("unknown label '{other}'"))),
    }
}

/// Frames grouped by the `window` column in order of first appearance.
pub fn read_windows_csv<R: Read>(r: R) -> Result<Vec<LabeledWindow>, SensorError> {
    let mut rd = reader(r);
    check_header(rd.headers().map_err(csv_err)?, &["window", "label"])?;
    let mut out: Vec<LabeledWindow> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let id = rec.get(0).unwrap_or("").to_string();
        let label = parse_label(rec.get(1).unwrap_or(""), line)?;
        let frame = parse_frame(&rec, 2, line)?;
        match out.iter_mut().find(|w| w.id == id) {
            Some(w) if w.label != label => {
                return Err(parse_err(line, format!("window '{id}' has conflicting labels")));
            }
            Some(w) => w.frames.push(frame),
            None => out.push(LabeledWindow {
                id,
                label,
                frames: vec![frame],
            }),
        }
    }
    Ok(out)
}

pub fn write_windows_csv<W: Write>(windows: &[LabeledWindow], w: W) -> Result<(), SensorError> {
    let mut wr = csv::Writer::from_writer(w);
    let header = ["window", "label"].into_iter().chain(SIGNAL_HEADER);
    wr.write_record(header).map_err(csv_err)?;
    for win in windows {
        for f in &win.frames {
            let nums = std::iter::once(f.timestamp).chain(f.values).map(|v| format!("{v:e}"));
            let row = [win.id.clone(), (win.label as u8).to_string()].into_iter().chain(nums);
            wr.write_record(row).map_err(csv_err)?;
        }
    }
    wr.flush().map_err(|e| parse_err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames() -> Vec<SignalFrame> {
        (0..3)
            .map(|t| SignalFrame::new(t as f64 * 0.01, std::array::from_fn(|c| (c as f64 - 7.0) * 1.5e-6 * (t + 1) as f64)))
            .collect()
    }

    #[test]
    fn signal_round_trip() {
        let mut buf = Vec::new();
        write_signal_csv(&frames(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,m0x,m0y,m0z,m1x"));
        assert!(text.lines().next().unwrap().ends_with("m4z"));
        assert_eq!(read_signal_csv(&buf[..]).unwrap(), frames());
    }

    #[test]
    fn windows_round_trip() {
        let w = vec![
            LabeledWindow { id: "a".into(), label: true, frames: frames() },
            LabeledWindow { id: "b".into(), label: false, frames: frames()[..2].to_vec() },
        ];
        let mut buf = Vec::new();
        write_windows_csv(&w, &mut buf).unwrap();
        assert_eq!(read_windows_csv(&buf[..]).unwrap(), w);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_signal_csv("a,b\n1,2\n".as_bytes()).is_err());
        let mut text = SIGNAL_HEADER.join(",");
        text.push_str("\n0,1,2\n");
        assert!(matches!(read_signal_csv(text.as_bytes()), Err(SensorError::Parse { .. })));
    }
}
