//! Class-colored overlays for review screens.

use image::{Rgb, RgbImage};

use crate::class::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::mask::{check_shape, LabelMask};

/// RGB color per class id. Background is never drawn.
pub const PALETTE: [[u8; 3]; NUM_CLASSES] = [
    [0, 0, 0],       // Background
    [70, 130, 180],  // Crosscut: steel blue
    [220, 20, 60],   // Rot: crimson
    [255, 140, 0],   // RotMaybe: dark orange
    [148, 0, 211],   // PressureWood: violet
    [50, 205, 50],   // Discoloration: lime green
    [255, 255, 0],   // IngrowthCrack: yellow
];

/// Blends each non-background pixel toward its class color:
/// `out = round((1 - alpha) * photo + alpha * color)` per channel.
pub fn render_overlay(photo: &RgbImage, mask: &LabelMask, alpha: f32) -> Result<RgbImage> {
    check_shape(photo.width(), photo.height(), mask.width(), mask.height())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    let mut out = photo.clone();
    for (pixel, &class) in out.pixels_mut().zip(mask.labels()) {
        if class.index() == 0 {
            continue;
        }
        let color = PALETTE[class.index()];
        *pixel = Rgb(std::array::from_fn(|c| blend(pixel.0[c], color[c], alpha)));
    }
    Ok(out)
}

#[inline]
fn blend(base: u8, color: u8, alpha: f32) -> u8 {
    ((1.0 - alpha) * base as f32 + alpha * color as f32)
        .round()
        .clamp(0.0, 255.0) as u8
}
