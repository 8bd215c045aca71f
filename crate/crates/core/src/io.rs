//! Plain-text persistence: CSV for numbers, JSON sidecars for metadata.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::dynamics::{Trajectory, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::model::{Configuration, Point, Provenance, Window};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.display().to_string(), reason: reason.into() }
}

fn parse(path: &Path, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| format_err(path, format!("not a number: {s:?}")))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// Sidecar metadata of a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationMeta {
    pub field: String,
    pub seed: Option<u64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub window: Window<f64>,
}

/// The sidecar path `<stem>.json` next to `<stem>.csv`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `re,im` rows plus the JSON sidecar.
pub fn write_configuration(path: &Path, config: &Configuration<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im"])?;
    for p in config.points() {
        w.write_record([fmt(p.re), fmt(p.im)])?;
    }
    w.flush()?;
    let meta = ConfigurationMeta {
        field: config.provenance.field.clone(),
        seed: config.provenance.seed,
        n: config.len(),
        window: *config.window(),
    };
    write_json(&sidecar_path(path), &meta)
}

pub fn read_configuration(path: &Path) -> Result<Configuration<f64>> {
    let meta: ConfigurationMeta = read_json(&sidecar_path(path))?;
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().collect::<Vec<_>>() != ["re", "im"] {
        return Err(format_err(path, "expected header re,im"));
    }
    let mut pts = Vec::with_capacity(meta.n);
    for rec in r.records() {
        let rec = rec?;
        pts.push(Point::new(parse(path, &rec[0])?, parse(path, &rec[1])?));
    }
    if pts.len() != meta.n {
        return Err(format_err(path, format!("sidecar lists {} points, file has {}", meta.n, pts.len())));
    }
    Ok(Configuration::new(pts, meta.window)?.with_provenance(Provenance::new(meta.field, meta.seed)))
}

/// `t,particle,re,im`, one row per stored frame and particle.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "particle", "re", "im"])?;
    for (t, frame) in traj.times.iter().zip(&traj.frames) {
        let t = fmt(*t);
        for (i, p) in frame.iter().enumerate() {
            w.write_record([t.as_str(), &i.to_string(), &fmt(p.re), &fmt(p.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory CSV; `meta` comes from the run manifest.
pub fn read_trajectory_csv(path: &Path, meta: TrajectoryMeta) -> Result<Trajectory<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().collect::<Vec<_>>() != ["t", "particle", "re", "im"] {
        return Err(format_err(path, "expected header t,particle,re,im"));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut frames: Vec<Vec<Point<f64>>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = parse(path, &rec[0])?;
        let i: usize = rec[1].trim().parse().map_err(|_| format_err(path, "bad particle index"))?;
        let p = Point::new(parse(path, &rec[2])?, parse(path, &rec[3])?);
        if times.last() != Some(&t) {
            times.push(t);
            frames.push(Vec::with_capacity(meta.n_particles));
        }
        let frame = frames.last_mut().expect("frame pushed");
        if i != frame.len() {
            return Err(format_err(path, format!("particle {i} out of order at t = {t}")));
        }
        frame.push(p);
    }
    let traj = Trajectory { times, frames, meta };
    traj.validate().map_err(|e| format_err(path, e.to_string()))?;
    if traj.n_frames() > 0 && traj.n_particles() != traj.meta.n_particles {
        return Err(format_err(path, "particle count disagrees with the manifest"));
    }
    Ok(traj)
}

/// `r,log_ratio` rows of a Palm stabilization curve.
pub fn write_palm_curve(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "log_ratio"])?;
    for &(r, v) in curve {
        w.write_record([fmt(r), fmt(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_palm_curve(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse(path, &rec[0])?, parse(path, &rec[1])?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, DriftSpec, SimulationParams};
    use proptest::prelude::*;

    #[test]
    fn configuration_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let c = crate::pointfield::sample_ginibre(50, 7).unwrap();
        write_configuration(&path, &c).unwrap();
        let back = read_configuration(&path).unwrap();
        assert_eq!(back.points(), c.points());
        assert_eq!(back.provenance, c.provenance);
        assert_eq!(back.window(), c.window());
        let side = std::fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(side.contains("\"N\": 50") && side.contains("\"field\": \"ginibre\""));
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let c = crate::pointfield::sample_ginibre(5, 1).unwrap();
        let traj = simulate(&c, &DriftSpec::coulomb_confined(), &SimulationParams::new(0.1, 1e-3, 10, 3)).unwrap();
        write_trajectory_csv(&path, &traj).unwrap();
        assert_eq!(read_trajectory_csv(&path, traj.meta.clone()).unwrap(), traj);
        let head = std::fs::read_to_string(&path).unwrap();
        assert!(head.starts_with("t,particle,re,im\n"));
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let c = Configuration::new(vec![Point::new(1.0, 1.0)], Window::disk(2.0)).unwrap();
        write_configuration(&path, &c).unwrap();
        std::fs::write(&path, "re,im\n1.0,abc\n").unwrap();
        assert!(matches!(read_configuration(&path), Err(Error::Format { .. })));
        std::fs::write(&path, "x,y\n1.0,1.0\n").unwrap();
        assert!(read_configuration(&path).is_err());
        assert!(matches!(read_configuration(&dir.path().join("missing.csv")), Err(Error::Io(_))));
    }

    #[test]
    fn palm_curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let curve = vec![(4.0, -0.1), (6.0, 0.123456789012345678), (8.0, 1e-300)];
        write_palm_curve(&path, &curve).unwrap();
        assert_eq!(read_palm_curve(&path).unwrap(), curve);
    }

    proptest! {
        #[test]
        fn coordinates_round_trip_bit_exactly(pts in prop::collection::vec((-1e6f64..1e6, -1e-6f64..1e-6), 0..40)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("c.csv");
            let c = Configuration::new(pts.iter().map(|&(a, b)| Point::new(a, b)).collect(), Window::disk(2e6)).unwrap();
            write_configuration(&path, &c).unwrap();
            let back = read_configuration(&path).unwrap();
            for (a, b) in back.points().iter().zip(c.points()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
