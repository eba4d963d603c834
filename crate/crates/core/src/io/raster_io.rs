use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::raster::Raster;

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn bytes(r: &Raster) -> Vec<u8> {
    r.data().iter().map(|&v| to_u8(v)).collect()
}

fn encode(img: DynamicImage, format: ImageFormat) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, format)?;
    Ok(out.into_inner())
}

/// 8-bit PNG of a 1- or 3-channel raster.
pub fn encode_png(r: &Raster) -> Result<Vec<u8>> {
    let (w, h) = (r.width() as u32, r.height() as u32);
    let img = match r.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes(r)).expect("sized buffer")),
        3 => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes(r)).expect("sized buffer")),
        c => {
            return Err(Error::DimensionMismatch(format!(
                "cannot store {c} channels as PNG"
            )))
        }
    };
    encode(img, ImageFormat::Png)
}

/// Binary 8-bit PGM (P5) of a 1-channel raster.
pub fn encode_pgm(r: &Raster) -> Result<Vec<u8>> {
    if r.channels() != 1 {
        return Err(Error::DimensionMismatch(
            "PGM holds exactly one channel".into(),
        ));
    }
    let mut out = format!("P5\n{} {}\n255\n", r.width(), r.height()).into_bytes();
    out.extend(bytes(r));
    Ok(out)
}

/// Decodes a PNG or PGM; values map linearly from 0..=255 to [0, 1].
pub fn decode_raster(data: &[u8]) -> Result<Raster> {
    let img = image::load_from_memory(data)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (ch, raw) = match img {
        DynamicImage::ImageLuma8(g) => (1, g.into_raw()),
        DynamicImage::ImageRgb8(c) => (3, c.into_raw()),
        other => (3, other.to_rgb8().into_raw()),
    };
    Ok(Raster::from_data(
        w,
        h,
        ch,
        raw.into_iter().map(|b| b as f32 / 255.0).collect(),
    ))
}

/// Writes PGM for `.pgm` paths and PNG otherwise.
pub fn write_raster(path: &Path, r: &Raster) -> Result<()> {
    let data = match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => encode_pgm(r)?,
        _ => encode_png(r)?,
    };
    super::write_atomic(path, &data)
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    decode_raster(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(ch: usize) -> Raster {
        let mut r = Raster::new(7, 5, ch);
        for (k, v) in r.data_mut().iter_mut().enumerate() {
            *v = (k % 256) as f32 / 255.0;
        }
        r
    }

    #[test]
    fn quantized_rasters_round_trip() {
        for (r, enc) in [
            (ramp(1), encode_pgm(&ramp(1)).unwrap()),
            (ramp(1), encode_png(&ramp(1)).unwrap()),
            (ramp(3), encode_png(&ramp(3)).unwrap()),
        ] {
            assert_eq!(decode_raster(&enc).unwrap(), r);
        }
        assert!(encode_pgm(&ramp(3)).is_err());
        assert!(encode_png(&Raster::new(2, 2, 2)).is_err());
    }

    #[test]
    fn pgm_header_and_clamping() {
        let r = Raster::from_data(2, 1, 1, vec![-1.0, 2.0]);
        let pgm = encode_pgm(&r).unwrap();
        assert_eq!(pgm, b"P5\n2 1\n255\n\x00\xff");
    }
}
