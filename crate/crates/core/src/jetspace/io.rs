use super::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::io::{Read, Write};

const HEADER: [&str; 3] = ["traj_id", "t", "x"];

/// Reads `traj_id,t,x` rows. Curves keep first-appearance order and are
/// time-sorted on ingest.
pub fn read_trajectories<T: Scalar, R: Read>(reader: R) -> Result<Vec<Trajectory<T>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(Error::Invalid(format!("expected header traj_id,t,x, found {}", header.join(","))));
    }
    let mut ids: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<(f64, f64)>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Invalid(format!("row {}: expected 3 fields", line + 2)));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|e| Error::Invalid(format!("row {}: {e}", line + 2)))
        };
        let (t, x) = (num(1)?, num(2)?);
        let id = &rec[0];
        let g = match ids.iter().position(|s| s == id) {
            Some(g) => g,
            None => {
                ids.push(id.to_owned());
                groups.push(Vec::new());
                groups.len() - 1
            }
        };
        groups[g].push((t, x));
    }
    if groups.is_empty() {
        return Err(Error::Invalid("no trajectory rows".into()));
    }
    ids.into_iter()
        .zip(groups)
        .map(|(id, mut rows)| {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (t, x): (Vec<T>, Vec<T>) = rows.into_iter().map(|(t, x)| (T::lit(t), T::lit(x))).unzip();
            Trajectory::new(id, t, x)
        })
        .collect()
}

/// Writes curves in order with 17 significant digits.
pub fn write_trajectories<T: Scalar, W: Write>(writer: W, trajs: &[Trajectory<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for tr in trajs {
        for (t, x) in tr.times.iter().zip(&tr.states) {
            w.write_record([tr.id.as_str(), &format!("{t:.16e}"), &format!("{x:.16e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}
