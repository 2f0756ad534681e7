//! Mask files: 8-bit indexed PNG whose pixel values are class ids. The
//! palette carries the overlay colors so masks are viewable as-is.
//! 8-bit grayscale files with values 0..=6 are accepted on read.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::LabelMask;
use crate::overlay::PALETTE;

pub fn encode_mask_png(mask: &LabelMask) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let fail = |e: png::EncodingError| Error::Png {
        path: "<memory>".into(),
        reason: e.to_string(),
    };
    {
        let mut encoder = png::Encoder::new(&mut buf, mask.width(), mask.height());
        encoder.set_color(png::ColorType::Indexed);
        encoder.set_depth(png::BitDepth::Eight);
        let palette: Vec<u8> = PALETTE.iter().flatten().copied().collect();
        encoder.set_palette(palette);
        let mut writer = encoder.write_header().map_err(fail)?;
        writer.write_image_data(&mask.to_raw()).map_err(fail)?;
        writer.finish().map_err(fail)?;
    }
    Ok(buf)
}

pub fn decode_mask_png(bytes: &[u8]) -> std::result::Result<LabelMask, String> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight
        || !matches!(color, png::ColorType::Indexed | png::ColorType::Grayscale)
    {
        return Err(format!(
            "expected 8-bit indexed or grayscale, found {color:?} at {depth:?}"
        ));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| "image too large".to_string())?;
    let mut data = vec![0u8; size];
    let info = reader.next_frame(&mut data).map_err(|e| e.to_string())?;
    data.truncate(info.buffer_size());
    LabelMask::from_raw(info.width, info.height, &data).map_err(|e| e.to_string())
}

pub fn write_mask_png(path: &Path, mask: &LabelMask) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let bytes = encode_mask_png(mask)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_mask_png(path: &Path) -> Result<LabelMask> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask_png(&bytes).map_err(|reason| Error::Png {
        path: path.to_path_buf(),
        reason,
    })
}

/// Width and height from the PNG header without decoding pixel data.
pub fn png_dimensions(path: &Path) -> Result<(u32, u32)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
    let info = decoder.read_header_info().map_err(|e| Error::Png {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok((info.width, info.height))
}
