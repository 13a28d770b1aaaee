//! File formats: CSV with 17 significant digits, sorted-key JSON, 16-bit PGM.
//!
//! Files are staged in memory and only written once a command has finished,
//! each through a temporary file renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use openbaker::phasespace::PhaseGrid;
use serde_json::{json, Map, Value};

/// `{:.16e}`: 17 significant digits, '.' separator, platform independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Default)]
pub struct Staged {
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.add(name, s.into_bytes());
        Ok(())
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let target = dir.join(&name);
            let tmp = dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, &bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, &target).with_context(|| format!("renaming to {}", target.display()))?;
            written.push(target);
        }
        Ok(written)
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// 16-bit binary PGM. Rows run from high `p` to low `p`, columns from low
/// `q` to high `q`; samples are big-endian and scaled linearly from
/// `[min, max]` to `[0, 65535]`.
pub fn pgm(values: &[f64], nq: usize, np: usize) -> (Vec<u8>, f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{nq} {np}\n65535\n").into_bytes();
    out.reserve(2 * nq * np);
    for b in (0..np).rev() {
        for a in 0..nq {
            let v = values[a * np + b];
            let s = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
            out.extend_from_slice(&s.to_be_bytes());
        }
    }
    (out, min, max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GridFormat {
    Csv,
    Pgm,
    Both,
}

/// Stages modulus and phase grids for `stem` and returns their scaling
/// bounds for the sidecar.
pub fn stage_grid(staged: &mut Staged, stem: &str, grid: &PhaseGrid, format: GridFormat) -> Value {
    let mut info = Map::new();
    info.insert("kind".into(), json!(grid.kind.as_str()));
    info.insert("nq".into(), json!(grid.nq()));
    info.insert("np".into(), json!(grid.np()));
    if matches!(format, GridFormat::Pgm | GridFormat::Both) {
        for (suffix, values) in [("modulus", grid.moduli()), ("phase", grid.phases())] {
            let (bytes, min, max) = pgm(&values, grid.nq(), grid.np());
            let name = format!("{stem}_{suffix}.pgm");
            info.insert(format!("{suffix}_pgm"), json!({ "file": name, "min": min, "max": max }));
            staged.add(name, bytes);
        }
    }
    if matches!(format, GridFormat::Csv | GridFormat::Both) {
        let mut csv = Csv::new(&["q", "p", "re", "im"]);
        for a in 0..grid.nq() {
            for b in 0..grid.np() {
                let v = grid.at(a, b);
                csv.row(&[num(grid.spec.q(a)), num(grid.spec.p(b)), num(v.re), num(v.im)]);
            }
        }
        let name = format!("{stem}.csv");
        info.insert("csv".into(), json!(name));
        staged.add(name, csv.into_bytes());
    }
    Value::Object(info)
}
