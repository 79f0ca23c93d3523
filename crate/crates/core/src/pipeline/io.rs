use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::mask::BinaryMask;
use crate::reconstruction::DepthMap;

const DMAP_MAGIC: &str = "DMAP";

/// Writes a depth map as `DMAP <w> <h>\n` followed by little-endian `f32`
/// values in row-major order.
pub fn write_dmap(path: &Path, d: &DepthMap) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write!(w, "{DMAP_MAGIC} {} {}\n", d.width(), d.height())?;
    for v in d.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dmap(path: &Path) -> Result<DepthMap> {
    let mut bytes = Vec::new();
    BufReader::new(std::fs::File::open(path)?).read_to_end(&mut bytes)?;
    parse_dmap(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_dmap(bytes: &[u8]) -> Result<DepthMap> {
    let nl = bytes
        .iter()
        .take(64)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing DMAP header".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not text".into()))?;
    let mut parts = header.split_ascii_whitespace();
    if parts.next() != Some(DMAP_MAGIC) {
        return Err(Error::Format("bad magic; expected DMAP".into()));
    }
    let mut dim = || -> Result<usize> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&n: &usize| n > 0)
            .ok_or_else(|| Error::Format("bad DMAP dimensions".into()))
    };
    let (w, h) = (dim()?, dim()?);
    let body = &bytes[nl + 1..];
    let expected = w.checked_mul(h).and_then(|n| n.checked_mul(4)).ok_or_else(|| Error::Format("DMAP too large".into()))?;
    if body.len() != expected {
        return Err(Error::Format(format!("DMAP body has {} bytes, expected {expected}", body.len())));
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    DepthMap::new(w, h, values).map_err(|e| Error::Format(e.to_string()))
}

/// Loads any PNG as 8-bit RGB.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RasterImage::from_raw(w, h, 3, img.into_raw())
}

pub fn write_image(path: &Path, img: &RasterImage) -> Result<()> {
    let color = match img.channels() {
        1 => image::ExtendedColorType::L8,
        3 => image::ExtendedColorType::Rgb8,
        4 => image::ExtendedColorType::Rgba8,
        c => return Err(Error::InvalidInput(format!("cannot save {c}-channel image"))),
    };
    image::save_buffer(path, img.data(), img.width() as u32, img.height() as u32, color)?;
    Ok(())
}

/// Reads an 8-bit mask. With no labels every non-zero pixel is crowd;
/// otherwise pixels whose value is one of `labels`.
pub fn read_mask(path: &Path, labels: &[u8]) -> Result<BinaryMask> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let bits = img
        .into_raw()
        .into_iter()
        .map(|v| if labels.is_empty() { v != 0 } else { labels.contains(&v) })
        .collect();
    BinaryMask::from_bits(w, h, bits).ok_or_else(|| Error::Format("mask size mismatch".into()))
}

/// Saves a mask as 0/255 grayscale.
pub fn write_mask(path: &Path, m: &BinaryMask) -> Result<()> {
    let data: Vec<u8> = m.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    image::save_buffer(path, &data, m.width() as u32, m.height() as u32, image::ExtendedColorType::L8)?;
    Ok(())
}

/// Files in `dir` with extension `ext`, ordered by numeric stem when every
/// stem is a number and by name otherwise.
pub fn list_sequence(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)))
        .collect();
    let numeric: Option<Vec<u64>> = files.iter().map(|p| stem(p).parse().ok()).collect();
    match numeric {
        Some(_) => files.sort_by_key(|p| (stem(p).parse::<u64>().unwrap_or(0), p.clone())),
        None => files.sort(),
    }
    Ok(files)
}

pub(crate) fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
