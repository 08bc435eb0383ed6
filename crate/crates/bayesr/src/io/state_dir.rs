//! Solver state persistence.
//!
//! A state directory holds one grayscale PFM per parameter field plus a
//! manifest listing field name, shape, and role. Dumping narrows to f32
//! once; dumping a loaded state again is byte identical.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::pfm::{read_pfm, write_pfm};
use crate::plane::{ImagePlane, ImageStack};
use crate::solver::VariationalState;

/// Manifest file name inside a state directory.
pub const MANIFEST_NAME: &str = "manifest.txt";

/// Writes all twelve parameter planes and the manifest into `dir`,
/// creating it if needed.
pub fn dump_state(dir: &Path, state: &VariationalState) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for ((name, role), (field_name, plane)) in
        VariationalState::FIELDS.iter().zip(state.fields())
    {
        debug_assert_eq!(*name, field_name);
        let (h, w) = plane.shape();
        manifest.push_str(&format!("{name}\t{h} {w}\t{role}\n"));
        write_pfm(&dir.join(format!("{name}.pfm")), &ImageStack::gray(plane.clone()))?;
    }
    fs::write(dir.join(MANIFEST_NAME), manifest)?;
    Ok(())
}

/// Loads a state directory written by [`dump_state`], validating the
/// manifest against the files.
pub fn load_state(dir: &Path) -> Result<VariationalState> {
    let manifest_path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&manifest_path)?;
    let mut planes: Vec<ImagePlane> = Vec::with_capacity(12);
    let mut lines = text.lines();
    for (name, _) in VariationalState::FIELDS {
        let line = lines.next().ok_or_else(|| {
            malformed(&manifest_path, format!("missing entry for field {name}"))
        })?;
        let mut parts = line.split('\t');
        let listed = parts.next().unwrap_or_default();
        if listed != name {
            return Err(malformed(
                &manifest_path,
                format!("expected field {name}, manifest lists {listed:?}"),
            ));
        }
        let shape_text = parts
            .next()
            .ok_or_else(|| malformed(&manifest_path, format!("missing shape for {name}")))?;
        let shape = parse_shape(shape_text, &manifest_path, name)?;
        let stack = read_pfm(&dir.join(format!("{name}.pfm")))?;
        if stack.channel_count() != 1 {
            return Err(malformed(
                &manifest_path,
                format!("field {name} is not a grayscale map"),
            ));
        }
        if stack.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: stack.shape(),
            });
        }
        planes.push(stack.channels()[0].clone());
    }
    let mut it = planes.into_iter();
    let mut next = || it.next().expect("twelve planes collected");
    VariationalState::from_fields(
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
        next(),
    )
}

fn parse_shape(text: &str, path: &Path, name: &str) -> Result<(usize, usize)> {
    let mut parts = text.split_whitespace();
    let h = parts.next().and_then(|t| t.parse().ok());
    let w = parts.next().and_then(|t| t.parse().ok());
    match (h, w, parts.next()) {
        (Some(h), Some(w), None) => Ok((h, w)),
        _ => Err(malformed(
            path,
            format!("unparseable shape {text:?} for field {name}"),
        )),
    }
}

fn malformed(path: &Path, reason: String) -> Error {
    Error::Malformed {
        what: "state manifest",
        path: path.display().to_string(),
        reason,
    }
}
