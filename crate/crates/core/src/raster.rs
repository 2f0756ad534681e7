//! Polygon rasterization.
//!
//! A pixel `(x, y)` is inside a polygon when its center `(x + 0.5, y + 0.5)`
//! is inside under the even-odd rule. Each row is filled by intersecting the
//! horizontal line through the pixel centers with every edge, sorting the
//! crossings and filling between consecutive pairs.

use crate::error::Result;
use crate::mask::BinaryMask;
use crate::region::{Geometry, RegionAnnotation};

pub fn rasterize_region(region: &RegionAnnotation, width: u32, height: u32) -> Result<BinaryMask> {
    region.validate(width, height)?;
    match &region.geometry {
        Geometry::Polygon { points } => Ok(fill_polygon(points, width, height)),
        Geometry::Rle(rle) => rle.to_binary_mask(),
    }
}

/// Even-odd scanline fill sampled at pixel centers. Vertices may lie anywhere;
/// pixels outside the canvas are dropped.
pub fn fill_polygon(points: &[[f64; 2]], width: u32, height: u32) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    let n = points.len();
    if n < 3 {
        return mask;
    }
    let mut crossings: Vec<f64> = Vec::with_capacity(n);
    for y in 0..height {
        let yc = y as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let [xi, yi] = points[i];
            let [xj, yj] = points[(i + n - 1) % n];
            // Half-open test so a vertex on the scanline is counted once.
            if (yi > yc) != (yj > yc) {
                crossings.push((xj - xi) * (yc - yi) / (yj - yi) + xi);
            }
        }
        crossings.sort_by(f64::total_cmp);
        // A center is inside when an odd number of crossings lie strictly to
        // its right, i.e. crossings[2k] <= xc < crossings[2k + 1].
        for span in crossings.chunks_exact(2) {
            let (lo, hi) = (span[0], span[1]);
            let mut x = (lo - 0.5).floor().max(0.0) as i64;
            while x < width as i64 && (x as f64 + 0.5) < lo {
                x += 1;
            }
            while x < width as i64 && (x as f64 + 0.5) < hi {
                mask.set(x as u32, y, true);
                x += 1;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::class::ClassId;
    use crate::error::Error;
    use crate::rle::Rle;

    /// Per-pixel crossing-number test, the classic point-in-polygon loop.
    fn oracle(points: &[[f64; 2]], width: u32, height: u32) -> Vec<bool> {
        let n = points.len();
        let mut out = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let mut inside = false;
                let mut j = n - 1;
                for i in 0..n {
                    let [xi, yi] = points[i];
                    let [xj, yj] = points[j];
                    if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                        inside = !inside;
                    }
                    j = i;
                }
                out.push(inside);
            }
        }
        out
    }

    fn region(points: Vec<[f64; 2]>) -> RegionAnnotation {
        RegionAnnotation::polygon(ClassId::Rot, points, "t")
    }

    #[test]
    fn square_fills_sixteen_pixels() {
        let r = region(vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]);
        let m = rasterize_region(&r, 8, 8).unwrap();
        assert_eq!(m.count(), 16);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(m.get(x, y), x < 4 && y < 4, "({x},{y})");
            }
        }
    }

    #[test]
    fn triangle_matches_oracle() {
        let pts = vec![[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]];
        let m = rasterize_region(&region(pts.clone()), 8, 8).unwrap();
        assert_eq!(m.bits(), oracle(&pts, 8, 8).as_slice());
        // centers strictly inside: x + y < 7, so 7 + 6 + ... + 1
        assert_eq!(m.count(), 28);
    }

    #[test]
    fn degenerate_polygon_names_region() {
        let r = region(vec![[0.0, 0.0], [3.0, 3.0], [0.0, 0.0]]).with_id("r-17");
        match rasterize_region(&r, 8, 8) {
            Err(Error::DegeneratePolygon { region, .. }) => assert!(region.contains("r-17")),
            other => panic!("expected degenerate polygon error, got {other:?}"),
        }
    }

    #[test]
    fn rle_geometry_is_decoded_verbatim() {
        let bits = [0u8, 1, 1, 0, 0, 0, 1, 1, 1];
        let rle = Rle::encode(3, 3, &bits).unwrap();
        let r = RegionAnnotation {
            id: None,
            class: ClassId::Rot,
            geometry: Geometry::Rle(rle),
            annotator: "t".into(),
            source: crate::region::RegionSource::Model,
        };
        let m = rasterize_region(&r, 3, 3).unwrap();
        let expect: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
        assert_eq!(m.bits(), expect.as_slice());
    }

    proptest! {
        #[test]
        fn random_polygons_match_oracle(
            pts in prop::collection::vec((0.0f64..=24.0, 0.0f64..=20.0), 3..12),
            snap in any::<bool>(),
        ) {
            // Snapping to the half-pixel lattice exercises vertices and edges
            // passing exactly through pixel centers.
            let pts: Vec<[f64; 2]> = pts
                .into_iter()
                .map(|(x, y)| if snap { [(x * 2.0).round() / 2.0, (y * 2.0).round() / 2.0] } else { [x, y] })
                .collect();
            let m = fill_polygon(&pts, 24, 20);
            let expect = oracle(&pts, 24, 20);
            prop_assert_eq!(m.bits(), expect.as_slice());
        }
    }
}
