//! Connected-component labeling of binary masks (two-pass, union-find).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    /// Neighbor offsets `(dx, dy)`.
    pub fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(i32, i32); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }

    // Neighbors already visited in a raster scan.
    fn backward(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 2] = [(0, -1), (-1, 0)];
        const EIGHT: [(i32, i32); 4] = [(-1, -1), (0, -1), (1, -1), (-1, 0)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::Invalid(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Component labels for a binary mask. Label 0 is unset; foreground labels are
/// dense from 1, numbered in raster order of each component's first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
    /// `areas[k - 1]` is the pixel count of component `k`.
    pub areas: Vec<u64>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.areas.len()
    }

    pub fn area(&self, label: u32) -> u64 {
        self.areas[label as usize - 1]
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller provisional label as root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Components {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let bits = mask.bits();
    let mut provisional = vec![0u32; bits.len()];
    let mut sets = DisjointSet { parent: vec![0] };

    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if !bits[i] {
                continue;
            }
            let mut label = 0u32;
            for &(dx, dy) in connectivity.backward() {
                let (nx, ny) = (x + dx as i64, y + dy as i64);
                if nx < 0 || ny < 0 || nx >= w {
                    continue;
                }
                let n = provisional[(ny * w + nx) as usize];
                if n == 0 {
                    continue;
                }
                if label == 0 {
                    label = n;
                } else {
                    sets.union(label, n);
                }
            }
            if label == 0 {
                label = sets.parent.len() as u32;
                sets.parent.push(label);
            }
            provisional[i] = label;
        }
    }

    // Roots are visited in increasing order of their first pixel because the
    // smaller provisional label always wins a union.
    let mut dense = vec![0u32; sets.parent.len()];
    let mut areas = Vec::new();
    for p in provisional.iter_mut() {
        if *p == 0 {
            continue;
        }
        let root = sets.find(*p) as usize;
        if dense[root] == 0 {
            areas.push(0);
            dense[root] = areas.len() as u32;
        }
        *p = dense[root];
        areas[*p as usize - 1] += 1;
    }

    Components {
        width: mask.width(),
        height: mask.height(),
        labels: provisional,
        areas,
    }
}
