//! Output sinks and trajectory CSV input.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use cuspkit_core::Trajectory;

use crate::CliError;

/// Accepted trajectory headers after the time column.
pub const HEADERS: [[&str; 4]; 3] = [
    ["x1", "x2", "y1", "y2"],
    ["u1", "u2", "a1", "a2"],
    ["V1", "V2", "n1", "n2"],
];

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(CliError::io)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::config(format!("cannot write JSON: {e}")))?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::io)
}

/// Read a trajectory CSV. The derivative column set is left empty.
pub fn read_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let ok = header.len() == 5
        && header[0] == "t"
        && HEADERS
            .iter()
            .any(|h| h.iter().zip(&header[1..]).all(|(a, b)| a == b));
    if !ok {
        return Err(CliError::config(format!(
            "{}: expected header t,x1,x2,y1,y2 (or t,u1,u2,a1,a2 / t,V1,V2,n1,n2), got {}",
            path.display(),
            header.join(",")
        )));
    }
    let mut tr = Trajectory::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut row = [0.0; 5];
        for (k, v) in row.iter_mut().enumerate() {
            let s = rec.get(k).unwrap_or("");
            *v = s
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::config(format!(
                        "{}: row {}: bad value '{s}'",
                        path.display(),
                        i + 2
                    ))
                })?;
        }
        if tr.t.last().is_some_and(|&t| row[0] <= t) {
            return Err(CliError::config(format!(
                "{}: time is not increasing at row {}",
                path.display(),
                i + 2
            )));
        }
        tr.t.push(row[0]);
        tr.states.push([row[1], row[2], row[3], row[4]]);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let tr = Trajectory {
            t: vec![0.0, 0.1, 0.30000000000000004],
            states: vec![
                [1.0 / 3.0, -2.5e-17, 0.7, 1e300],
                [0.1, 0.2, 0.3, 0.4],
                [f64::MIN_POSITIVE, 1.0, 2.0, 3.0],
            ],
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tr.csv");
        tr.write_csv(File::create(&p).unwrap(), Some(HEADERS[2]))
            .unwrap();
        let back = read_trajectory(&p).unwrap();
        assert_eq!(back.t, tr.t);
        assert_eq!(back.states, tr.states);
        assert!(back.derivs.is_empty());
    }

    #[test]
    fn bad_header_and_time_order_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        std::fs::write(&p, "t,a,b,c,d\n0,1,2,3,4\n").unwrap();
        assert_eq!(read_trajectory(&p).unwrap_err().code, 4);
        std::fs::write(&p, "t,x1,x2,y1,y2\n1,1,2,3,4\n0,1,2,3,4\n").unwrap();
        assert_eq!(read_trajectory(&p).unwrap_err().code, 4);
    }
}
