//! Text formats: trajectories as `t,x,y,z` rows, per-step labels as
//! `t,label` rows with `s`/`o` labels.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use plumenav_core::{Phase, Trajectory, Vec3};

use crate::error::{CliError, Result};

/// Largest relative deviation of a time step from the inferred `dt`.
pub const DT_TOLERANCE: f64 = 1e-6;

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "x", "y", "z"];
pub const LABEL_HEADER: [&str; 2] = ["t", "label"];

/// Sample `i` is written at `t = i * dt`. Floats use the shortest
/// representation that reads back to the same value.
pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e| CliError::csv("trajectory", e);
    w.write_record(TRAJECTORY_HEADER).map_err(err)?;
    for (i, p) in traj.samples().iter().enumerate() {
        let t = i as f64 * traj.dt();
        w.serialize((t, p.x, p.y, p.z)).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::csv("trajectory", e.into()))
}

/// Reads a trajectory, inferring `dt` from the time column.
///
/// Rows must be evenly spaced in time to within [`DT_TOLERANCE`]. At least
/// two rows are needed to fix `dt`.
pub fn parse_trajectory<R: Read>(input: R, origin: &str) -> Result<Trajectory> {
    let rows = read_rows(input, origin, &TRAJECTORY_HEADER)?;
    let mut times = Vec::with_capacity(rows.len());
    let mut samples = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let v = parse_floats::<4>(fields, *line, origin)?;
        times.push((*line, v[0]));
        samples.push(Vec3::new(v[1], v[2], v[3]));
    }
    let dt = infer_dt(&times, origin)?;
    Trajectory::new(samples, dt).map_err(|e| CliError::Parse {
        origin: origin.into(),
        line: 1,
        message: e.to_string(),
    })
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_trajectory(file, &path.display().to_string())
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trajectory(BufWriter::new(file), traj)
}

/// Label `i` is written at `t = (offset + i) * dt`, matching the sample it
/// belongs to.
pub fn write_labels<W: Write>(out: W, labels: &[Phase], dt: f64, offset: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e| CliError::csv("labels", e);
    w.write_record(LABEL_HEADER).map_err(err)?;
    for (i, l) in labels.iter().enumerate() {
        let t = (offset + i) as f64 * dt;
        w.serialize((t, l)).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::csv("labels", e.into()))
}

/// Per-step labels with their times.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTrack {
    pub times: Vec<f64>,
    pub labels: Vec<Phase>,
}

pub fn parse_labels<R: Read>(input: R, origin: &str) -> Result<LabelTrack> {
    let rows = read_rows(input, origin, &LABEL_HEADER)?;
    let mut track = LabelTrack {
        times: Vec::with_capacity(rows.len()),
        labels: Vec::with_capacity(rows.len()),
    };
    for (line, fields) in &rows {
        let bad = |message: String| CliError::Parse {
            origin: origin.into(),
            line: *line,
            message,
        };
        if fields.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", fields.len())));
        }
        let t: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad time {:?}", fields[0])))?;
        let mut chars = fields[1].trim().chars();
        let label = match (chars.next(), chars.next()) {
            (Some(c), None) => Phase::from_symbol(c),
            _ => None,
        }
        .ok_or_else(|| bad(format!("label must be s or o, got {:?}", fields[1])))?;
        track.times.push(t);
        track.labels.push(label);
    }
    Ok(track)
}

pub fn read_labels(path: &Path) -> Result<LabelTrack> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_labels(file, &path.display().to_string())
}

pub fn save_labels(path: &Path, labels: &[Phase], dt: f64, offset: usize) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_labels(BufWriter::new(file), labels, dt, offset)
}

type Row = (u64, Vec<String>);

// checks the header and returns the remaining rows with 1-based line numbers
fn read_rows<R: Read>(input: R, origin: &str, header: &[&str]) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| CliError::csv(origin, e))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        if first {
            first = false;
            if fields.iter().map(String::as_str).ne(header.iter().copied()) {
                return Err(CliError::Parse {
                    origin: origin.into(),
                    line,
                    message: format!("expected header {}, found {}", header.join(","), fields.join(",")),
                });
            }
            continue;
        }
        rows.push((line, fields));
    }
    if first {
        return Err(CliError::Parse {
            origin: origin.into(),
            line: 1,
            message: "empty input".into(),
        });
    }
    Ok(rows)
}

fn parse_floats<const N: usize>(fields: &[String], line: u64, origin: &str) -> Result<[f64; N]> {
    let bad = |message: String| CliError::Parse {
        origin: origin.into(),
        line,
        message,
    };
    if fields.len() != N {
        return Err(bad(format!("expected {N} fields, found {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(fields) {
        let v: f64 = field.parse().map_err(|_| bad(format!("not a number: {field:?}")))?;
        if !v.is_finite() {
            return Err(bad(format!("not finite: {field:?}")));
        }
        *slot = v;
    }
    Ok(out)
}

fn infer_dt(times: &[(u64, f64)], origin: &str) -> Result<f64> {
    let bad = |line: u64, message: String| CliError::Parse {
        origin: origin.into(),
        line,
        message,
    };
    match times {
        [] => Err(bad(1, "no samples".into())),
        [(line, _)] => Err(bad(*line, "need at least two samples to infer the time step".into())),
        [(_, t0), .., (_, tn)] => {
            let dt = (tn - t0) / (times.len() - 1) as f64;
            if dt.is_nan() || dt <= 0.0 {
                return Err(bad(times[1].0, "time must increase".into()));
            }
            for pair in times.windows(2) {
                let (line, t) = pair[1];
                let step = t - pair[0].1;
                if (step - dt).abs() > DT_TOLERANCE * dt {
                    return Err(bad(line, format!("non-uniform time step {step} (expected {dt})")));
                }
            }
            Ok(dt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> Trajectory {
        let samples = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                Vec3::new(t.sin() * 0.3, 1.0 / 3.0 + t, -t * t * 1e-7)
            })
            .collect();
        Trajectory::new(samples, 1.0 / 75.0).unwrap()
    }

    fn to_string(traj: &Trajectory) -> String {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, traj).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let t = traj();
        let text = to_string(&t);
        assert!(text.starts_with("t,x,y,z\n0.0,0.0,0.3333333333333333,"));
        let back = parse_trajectory(text.as_bytes(), "mem").unwrap();
        assert_eq!(back.samples(), t.samples());
        assert!((back.dt() - t.dt()).abs() <= 1e-15);
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let text = "t,x,y,z\n0,0,0,0\n0.1,1,1,1\n0.2,oops,1,1\n";
        match parse_trajectory(text.as_bytes(), "mem") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "t,x,y,z\n0,0,0,0\n0.1,1,1\n";
        match parse_trajectory(text.as_bytes(), "mem") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_uneven_spacing_and_bad_headers() {
        let uneven = "t,x,y,z\n0,0,0,0\n0.1,0,0,0\n0.3,0,0,0\n";
        assert!(matches!(
            parse_trajectory(uneven.as_bytes(), "m"),
            Err(CliError::Parse { line: 3, .. })
        ));
        let backwards = "t,x,y,z\n0.2,0,0,0\n0.1,0,0,0\n";
        assert!(parse_trajectory(backwards.as_bytes(), "m").is_err());
        assert!(parse_trajectory("x,y,z\n1,2,3\n".as_bytes(), "m").is_err());
        assert!(parse_trajectory("".as_bytes(), "m").is_err());
        assert!(parse_trajectory("t,x,y,z\n0,1,2,3\n".as_bytes(), "m").is_err());
        assert!(parse_trajectory("t,x,y,z\n0,1,2,3\n1,NaN,0,0\n".as_bytes(), "m").is_err());
    }

    #[test]
    fn tolerates_rounded_times() {
        let text = "t,x,y,z\n0,0,0,0\n0.01333333,1,0,0\n0.02666667,2,0,0\n0.04,3,0,0\n";
        let t = parse_trajectory(text.as_bytes(), "m").unwrap();
        assert!((t.dt() - 0.04 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn labels_round_trip() {
        use Phase::{Exploitation as O, Exploration as S};
        let labels = vec![S, S, O, S, O, O];
        let mut buf = Vec::new();
        write_labels(&mut buf, &labels, 0.5, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,label\n1.0,s\n1.5,s\n2.0,o\n"));
        let back = parse_labels(text.as_bytes(), "m").unwrap();
        assert_eq!(back.labels, labels);
        assert_eq!(back.times[0], 1.0);
        assert!(matches!(
            parse_labels("t,label\n0,s\n1,x\n".as_bytes(), "m"),
            Err(CliError::Parse { line: 3, .. })
        ));
    }
}
