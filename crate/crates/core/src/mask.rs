//! Dense label grids.

use crate::class::{ClassId, NUM_CLASSES};
use crate::error::{Error, Result};

/// Row-major grid of class ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<ClassId>,
}

impl LabelMask {
    /// All-background mask.
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, ClassId::Background)
    }

    pub fn filled(width: u32, height: u32, class: ClassId) -> Self {
        Self {
            width,
            height,
            labels: vec![class; width as usize * height as usize],
        }
    }

    pub fn from_labels(width: u32, height: u32, labels: Vec<ClassId>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!(
                "label buffer of length {} does not match {width}x{height}",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Builds a mask from raw pixel values, rejecting anything outside 0..=6.
    pub fn from_raw(width: u32, height: u32, raw: &[u8]) -> Result<Self> {
        let labels = raw
            .iter()
            .map(|&v| ClassId::from_u8(v))
            .collect::<Result<Vec<_>>>()?;
        Self::from_labels(width, height, labels)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    #[inline]
    pub fn labels_mut(&mut self) -> &mut [ClassId] {
        &mut self.labels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> ClassId {
        self.labels[self.offset(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, class: ClassId) {
        let i = self.offset(x, y);
        self.labels[i] = class;
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.labels.iter().map(|&c| c as u8).collect()
    }

    pub fn class_counts(&self) -> [u64; NUM_CLASSES] {
        let mut counts = [0u64; NUM_CLASSES];
        for &c in &self.labels {
            counts[c.index()] += 1;
        }
        counts
    }

    pub fn contains(&self, class: ClassId) -> bool {
        self.labels.contains(&class)
    }

    /// Binary mask of the pixels holding `class`.
    pub fn class_mask(&self, class: ClassId) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&c| c == class).collect(),
        }
    }

    pub fn same_shape(&self, other: &LabelMask) -> Result<()> {
        check_shape(self.width, self.height, other.width, other.height)
    }
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!(
                "bit buffer of length {} does not match {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = y as usize * self.width as usize + x as usize;
        self.bits[i] = value;
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// In-place union; both masks must share dimensions.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        check_shape(self.width, self.height, other.width, other.height)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }
}

pub(crate) fn check_shape(w: u32, h: u32, other_w: u32, other_h: u32) -> Result<()> {
    if w != other_w || h != other_h {
        return Err(Error::DimensionMismatch {
            expected_width: w,
            expected_height: h,
            width: other_w,
            height: other_h,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_raw_values() {
        assert!(LabelMask::from_raw(2, 1, &[0, 6]).is_ok());
        assert!(matches!(
            LabelMask::from_raw(2, 1, &[0, 7]),
            Err(Error::InvalidClassId(7))
        ));
        assert!(LabelMask::from_raw(2, 2, &[0, 1]).is_err());
    }

    #[test]
    fn counts_and_class_masks() {
        let m = LabelMask::from_raw(3, 1, &[0, 2, 2]).unwrap();
        let counts = m.class_counts();
        assert_eq!(counts[0], 1);
        assert_eq!(counts[2], 2);
        assert_eq!(m.class_mask(ClassId::Rot).bits(), &[false, true, true]);
        assert!(m.same_shape(&LabelMask::new(1, 3)).is_err());
    }
}
