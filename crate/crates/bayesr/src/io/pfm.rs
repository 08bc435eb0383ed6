//! Portable float map reading and writing.
//!
//! PFM stores one or three 32-bit float channels with rows ordered bottom
//! to top. The sign of the scale header encodes endianness; files written
//! here are little endian with scale -1.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plane::{ImagePlane, ImageStack};

/// Writes a one-channel (`Pf`) or three-channel (`PF`) float map.
///
/// Values are narrowed to f32; a file read back and written again is byte
/// identical.
pub fn write_pfm(path: &Path, stack: &ImageStack) -> Result<()> {
    let channels = stack.channels();
    let magic = match channels.len() {
        1 => "Pf",
        3 => "PF",
        n => {
            return Err(Error::InvalidInput(format!(
                "pfm supports 1 or 3 channels, got {n}"
            )))
        }
    };
    let (h, w) = stack.shape();
    let mut bytes = Vec::with_capacity(32 + 4 * h * w * channels.len());
    bytes.extend_from_slice(format!("{magic}\n{w} {h}\n-1.0\n").as_bytes());
    for r in (0..h).rev() {
        for c in 0..w {
            for plane in channels {
                let v = plane[(r, c)] as f32;
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a float map written by [`write_pfm`] or any conforming producer,
/// honoring the endianness declared by the scale header.
pub fn read_pfm(path: &Path) -> Result<ImageStack> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;
    let magic = next_token(&bytes, &mut pos, path, "magic")?;
    let channel_count = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(malformed(path, format!("unknown magic {other:?}"))),
    };
    let w: usize = parse_token(&bytes, &mut pos, path, "width")?;
    let h: usize = parse_token(&bytes, &mut pos, path, "height")?;
    let scale: f64 = parse_token(&bytes, &mut pos, path, "scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed(path, format!("invalid scale {scale}")));
    }
    if h == 0 || w == 0 {
        return Err(malformed(path, format!("empty dimensions {w} x {h}")));
    }
    let little_endian = scale < 0.0;
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed(path, "missing separator after header".into()));
    }
    pos += 1;
    let needed = h * w * channel_count * 4;
    if bytes.len() - pos < needed {
        return Err(malformed(
            path,
            format!("expected {needed} data bytes, found {}", bytes.len() - pos),
        ));
    }
    let mut planes = vec![ImagePlane::zeros(h, w); channel_count];
    for r in (0..h).rev() {
        for c in 0..w {
            for plane in planes.iter_mut() {
                let raw: [u8; 4] = bytes[pos..pos + 4].try_into().expect("bounds checked");
                let v = if little_endian {
                    f32::from_le_bytes(raw)
                } else {
                    f32::from_be_bytes(raw)
                };
                plane[(r, c)] = v as f64;
                pos += 4;
            }
        }
    }
    ImageStack::new(planes)
}

fn next_token(bytes: &[u8], pos: &mut usize, path: &Path, what: &str) -> Result<String> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(malformed(path, format!("missing {what} token")));
    }
    String::from_utf8(bytes[start..*pos].to_vec())
        .map_err(|_| malformed(path, format!("non-ascii {what} token")))
}

fn parse_token<T: std::str::FromStr>(
    bytes: &[u8],
    pos: &mut usize,
    path: &Path,
    what: &str,
) -> Result<T> {
    let token = next_token(bytes, pos, path, what)?;
    token
        .parse()
        .map_err(|_| malformed(path, format!("unparseable {what} token {token:?}")))
}

fn malformed(path: &Path, reason: String) -> Error {
    Error::Malformed {
        what: "pfm",
        path: path.display().to_string(),
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::Lcg;

    #[test]
    fn gray_round_trip_is_f32_exact_and_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plane.pfm");
        let plane = Lcg::new(7).plane(5, 9).scale(3.0);
        write_pfm(&path, &ImageStack::gray(plane.clone())).unwrap();
        let first = std::fs::read(&path).unwrap();
        let loaded = read_pfm(&path).unwrap();
        assert_eq!(loaded.channel_count(), 1);
        assert_eq!(loaded.shape(), (5, 9));
        for (orig, got) in plane.data().iter().zip(loaded.channels()[0].data()) {
            assert_eq!(*orig as f32 as f64, *got);
        }
        write_pfm(&path, &loaded).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn color_round_trip_keeps_channel_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("color.pfm");
        let mut rng = Lcg::new(11);
        let stack = ImageStack::new(vec![
            rng.unit_plane(4, 3),
            rng.unit_plane(4, 3),
            rng.unit_plane(4, 3),
        ])
        .unwrap();
        write_pfm(&path, &stack).unwrap();
        let loaded = read_pfm(&path).unwrap();
        assert_eq!(loaded.channel_count(), 3);
        for (orig, got) in stack.channels().iter().zip(loaded.channels()) {
            for (a, b) in orig.data().iter().zip(got.data()) {
                assert_eq!(*a as f32 as f64, *b);
            }
        }
    }

    #[test]
    fn reads_big_endian_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("be.pfm");
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.25f32.to_be_bytes());
        bytes.extend_from_slice(&(-2.0f32).to_be_bytes());
        std::fs::write(&path, bytes).unwrap();
        let loaded = read_pfm(&path).unwrap();
        assert_eq!(loaded.channels()[0].data(), &[0.25, -2.0]);
    }

    #[test]
    fn bottom_row_is_stored_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.pfm");
        let plane = ImagePlane::from_fn(2, 1, |r, _| r as f64);
        write_pfm(&path, &ImageStack::gray(plane)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let data = &bytes[bytes.len() - 8..];
        assert_eq!(f32::from_le_bytes(data[0..4].try_into().unwrap()), 1.0);
        assert_eq!(f32::from_le_bytes(data[4..8].try_into().unwrap()), 0.0);
    }

    #[test]
    fn rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let bad_magic = dir.path().join("bad.pfm");
        std::fs::write(&bad_magic, b"P6\n1 1\n-1.0\n\0\0\0\0").unwrap();
        assert!(read_pfm(&bad_magic).is_err());
        let truncated = dir.path().join("short.pfm");
        std::fs::write(&truncated, b"Pf\n2 2\n-1.0\n\0\0\0\0").unwrap();
        assert!(read_pfm(&truncated).is_err());
        let no_data = dir.path().join("empty.pfm");
        std::fs::write(&no_data, b"Pf\n0 1\n-1.0\n").unwrap();
        assert!(read_pfm(&no_data).is_err());
    }

    #[test]
    fn scale_magnitude_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scaled.pfm");
        let mut bytes = b"Pf\n1 1\n-2.5\n".to_vec();
        bytes.extend_from_slice(&0.75f32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        let stack = read_pfm(&path).unwrap();
        assert_eq!(stack.channels()[0].data(), &[0.75]);
    }
}
