//! Frame directories: one decoded image per file, ordered by file name.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::image::{resize_bilinear, RgbImage};
use crate::data::ppm::read_ppm;
use crate::error::{Error, Result};

/// Regular, non-hidden files in `dir` sorted by file name bytes.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if !hidden && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Decodes every frame in `dir`. Frames whose size differs from the first
/// are resized to match it.
pub fn load_frame_sequence(dir: &Path) -> Result<Vec<RgbImage>> {
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            reason: "no frame files".into(),
        });
    }
    let mut frames: Vec<RgbImage> = Vec::with_capacity(files.len());
    for path in &files {
        let img = read_ppm(path)?;
        let img = match frames.first() {
            Some(f) if (f.width(), f.height()) != (img.width(), img.height()) => {
                resize_bilinear(&img, f.width(), f.height())
            }
            _ => img,
        };
        frames.push(img);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ppm::write_ppm;

    #[test]
    fn ordering_and_resizing() {
        let dir = tempfile::tempdir().unwrap();
        for (name, v, size) in [("003.ppm", 3, 4), ("001.ppm", 1, 4), ("002.ppm", 2, 8)] {
            write_ppm(
                &dir.path().join(name),
                &RgbImage::filled(size, size, [v; 3]),
            )
            .unwrap();
        }
        fs::write(dir.path().join(".DS_Store"), b"junk").unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        let frames = load_frame_sequence(dir.path()).unwrap();
        assert_eq!(frames.len(), 3);
        for (i, f) in frames.iter().enumerate() {
            assert_eq!((f.width(), f.height()), (4, 4));
            assert_eq!(f.pixel(0, 0), [i as u8 + 1; 3]);
        }
    }

    #[test]
    fn errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_frame_sequence(dir.path()).is_err());
        fs::write(dir.path().join("bad.ppm"), b"P3 nope").unwrap();
        let msg = load_frame_sequence(dir.path()).unwrap_err().to_string();
        assert!(msg.contains("bad.ppm"), "{msg}");
    }
}
