//! Run-length encoding of label grids.
//!
//! A grid is stored row-major as a sequence of `(value, run_length)` pairs.
//! The canonical form has no zero-length runs and no two adjacent runs with
//! the same value, so every grid has exactly one encoding. In JSON an
//! encoding looks like
//!
//! ```json
//! { "width": 4, "height": 2, "runs": [[0, 3], [2, 2], [0, 3]] }
//! ```
//!
//! Binary region masks use values 0 and 1; label masks use class ids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub width: u32,
    pub height: u32,
    pub runs: Vec<(u8, u32)>,
}

impl Rle {
    pub fn encode(width: u32, height: u32, values: &[u8]) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::InvalidRle(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        let mut runs: Vec<(u8, u32)> = Vec::new();
        for &v in values {
            match runs.last_mut() {
                Some((last, n)) if *last == v => *n += 1,
                _ => runs.push((v, 1)),
            }
        }
        Ok(Self {
            width,
            height,
            runs,
        })
    }

    /// Checks the canonical-form invariants.
    pub fn validate(&self) -> Result<()> {
        let mut total = 0u64;
        for (i, &(value, len)) in self.runs.iter().enumerate() {
            if len == 0 {
                return Err(Error::InvalidRle(format!("run {i} has zero length")));
            }
            if i > 0 && self.runs[i - 1].0 == value {
                return Err(Error::InvalidRle(format!(
                    "runs {} and {i} repeat value {value}",
                    i - 1
                )));
            }
            total += u64::from(len);
        }
        let expected = u64::from(self.width) * u64::from(self.height);
        if total != expected {
            return Err(Error::InvalidRle(format!(
                "runs cover {total} pixels, grid has {expected}"
            )));
        }
        Ok(())
    }

    pub fn decode(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.width as usize * self.height as usize);
        for &(value, len) in &self.runs {
            out.extend(std::iter::repeat_n(value, len as usize));
        }
        Ok(out)
    }

    pub fn from_label_mask(mask: &LabelMask) -> Self {
        Self::encode(mask.width(), mask.height(), &mask.to_raw()).expect("mask buffer matches")
    }

    pub fn to_label_mask(&self) -> Result<LabelMask> {
        LabelMask::from_raw(self.width, self.height, &self.decode()?)
    }

    pub fn from_binary_mask(mask: &BinaryMask) -> Self {
        let values: Vec<u8> = mask.bits().iter().map(|&b| u8::from(b)).collect();
        Self::encode(mask.width(), mask.height(), &values).expect("mask buffer matches")
    }

    /// Decodes a binary encoding; values other than 0 and 1 are rejected.
    pub fn to_binary_mask(&self) -> Result<BinaryMask> {
        if let Some(&(v, _)) = self.runs.iter().find(|(v, _)| *v > 1) {
            return Err(Error::InvalidRle(format!(
                "binary encoding contains value {v}"
            )));
        }
        let bits = self.decode()?.into_iter().map(|v| v == 1).collect();
        BinaryMask::from_bits(self.width, self.height, bits)
    }
}
