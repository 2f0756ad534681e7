#![allow(dead_code)]

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use woodmask_core::manifest::save_manifest;
use woodmask_core::png_io::write_mask_png;
use woodmask_core::{ClassId, DatasetManifest, LabelMask, SampleRecord, Subset};

pub const W: u32 = 12;
pub const H: u32 = 8;

/// Crosscut everywhere with a 3x3 block of `class` whose corner depends on
/// `k`.
pub fn mask_with(class: ClassId, k: u32) -> LabelMask {
    let mut m = LabelMask::filled(W, H, ClassId::Crosscut);
    for y in 0..3 {
        for x in 0..3 {
            m.set(k * 2 + x, y + 1, class);
        }
    }
    m
}

/// Manifest with `with_rot_maybe` samples containing RotMaybe and
/// `plain` samples containing only Rot, each with a photo and a prediction
/// from model `m1`.
pub fn fixture(dir: &Path, with_rot_maybe: u32, plain: u32) -> PathBuf {
    let mut samples = Vec::new();
    for k in 0..with_rot_maybe + plain {
        let id = format!("log-{k:02}");
        let mut s = SampleRecord::new(&id, format!("{id}.png"), W, H, Subset::Data);
        let class = if k < with_rot_maybe { ClassId::RotMaybe } else { ClassId::Rot };
        let gt = mask_with(class, k % 4);
        let pred = mask_with(ClassId::Discoloration, (k + 1) % 4);
        write_mask_png(&dir.join(format!("masks/original/{id}.png")), &gt).unwrap();
        write_mask_png(&dir.join(format!("pred/m1/{id}.png")), &pred).unwrap();
        s.masks.insert("original".into(), format!("masks/original/{id}.png"));
        s.predictions.insert("m1".into(), format!("pred/m1/{id}.png"));
        let photo = RgbImage::from_fn(W, H, |x, y| Rgb([(x * 20) as u8, (y * 30) as u8, (k * 40) as u8]));
        photo.save(dir.join(format!("{id}.png"))).unwrap();
        samples.push(s);
    }
    let path = dir.join("manifest.json");
    save_manifest(&path, &DatasetManifest::new(samples)).unwrap();
    path
}
