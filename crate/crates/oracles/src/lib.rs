//! Slow, direct reference implementations for checking the real ones.
//!
//! Everything works on plain row-major `u8` label vectors and `bool` bitmaps
//! and shares no code with the main crates. Class ids follow the mask file
//! encoding: 0 is background, 1..=6 the labeled classes.

use std::collections::{HashSet, VecDeque};

pub const NUM_CLASSES: usize = 7;

/// Exact rational with a positive denominator, always reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn int(v: i128) -> Self {
        Ratio::new(v, 1)
    }

    pub fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }

    pub fn mul(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.num, self.den * o.den)
    }

    pub fn div(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den, self.den * o.num)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

// ---------------------------------------------------------------------------
// Rasterization

/// Crossing-number point-in-polygon test at every pixel center.
pub fn pnpoly_fill(points: &[[f64; 2]], width: u32, height: u32) -> Vec<bool> {
    let n = points.len();
    let mut out = Vec::with_capacity((width * height) as usize);
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

/// Per pixel, the covering class that comes first in `precedence`.
pub fn flatten(regions: &[(u8, Vec<[f64; 2]>)], precedence: &[u8], width: u32, height: u32) -> Vec<u8> {
    let fills: Vec<(u8, Vec<bool>)> = regions
        .iter()
        .map(|(c, pts)| (*c, pnpoly_fill(pts, width, height)))
        .collect();
    (0..(width * height) as usize)
        .map(|i| {
            precedence
                .iter()
                .copied()
                .find(|&c| fills.iter().any(|(fc, f)| *fc == c && f[i]))
                .unwrap_or(0)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Components and morphology

fn neighbors(x: usize, y: usize, w: usize, h: usize, eight: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                continue;
            }
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                out.push((nx as usize, ny as usize));
            }
        }
    }
    out
}

/// Breadth-first labeling. Labels start at 1 in the raster order of each
/// component's first pixel; 0 marks unset pixels. Returns labels and areas.
pub fn components(bits: &[bool], width: u32, height: u32, eight: bool) -> (Vec<u32>, Vec<u64>) {
    let (w, h) = (width as usize, height as usize);
    let mut labels = vec![0u32; w * h];
    let mut areas = Vec::new();
    for start in 0..w * h {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        let label = areas.len() as u32 + 1;
        let mut area = 0;
        let mut queue = VecDeque::from([start]);
        labels[start] = label;
        while let Some(i) = queue.pop_front() {
            area += 1;
            for (nx, ny) in neighbors(i % w, i / w, w, h, eight) {
                let j = ny * w + nx;
                if bits[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            }
        }
        areas.push(area);
    }
    (labels, areas)
}

fn flood(region: &dyn Fn(usize) -> bool, start: usize, w: usize, h: usize, eight: bool) -> Vec<usize> {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(i) = stack.pop() {
        out.push(i);
        for (nx, ny) in neighbors(i % w, i / w, w, h, eight) {
            let j = ny * w + nx;
            if region(j) && seen.insert(j) {
                stack.push(j);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Small-object removal and small-hole filling, swept over the classes in
/// `precedence` from last to first until nothing changes.
///
/// A component of a class below `min_object` pixels takes the label most
/// common among the distinct pixels adjacent to it; ties go to the class
/// earlier in `precedence`, background losing every tie. A connected region
/// of other labels that avoids the image border and is below `min_hole`
/// pixels is then filled with the class.
pub fn clean(
    labels: &[u8],
    width: u32,
    height: u32,
    precedence: &[u8],
    min_object: u64,
    min_hole: u64,
    eight: bool,
) -> Vec<u8> {
    let (w, h) = (width as usize, height as usize);
    let mut m = labels.to_vec();
    if min_object == 0 && min_hole == 0 {
        return m;
    }
    let rank = |c: u8| precedence.iter().position(|&p| p == c).unwrap_or(usize::MAX);
    loop {
        let before = m.clone();
        for &class in precedence.iter().rev() {
            if min_object > 0 {
                let mut done = HashSet::new();
                for start in 0..w * h {
                    if m[start] != class || done.contains(&start) {
                        continue;
                    }
                    let snapshot = m.clone();
                    let comp = flood(&|j| snapshot[j] == class, start, w, h, eight);
                    done.extend(comp.iter().copied());
                    if comp.len() as u64 >= min_object {
                        continue;
                    }
                    let members: HashSet<usize> = comp.iter().copied().collect();
                    let border: HashSet<usize> = comp
                        .iter()
                        .flat_map(|&i| neighbors(i % w, i / w, w, h, eight))
                        .map(|(x, y)| y * w + x)
                        .filter(|j| !members.contains(j))
                        .collect();
                    let mut votes = [0u64; NUM_CLASSES];
                    for &j in &border {
                        votes[m[j] as usize] += 1;
                    }
                    let mut best: Option<u8> = None;
                    for c in 0..NUM_CLASSES as u8 {
                        if votes[c as usize] == 0 {
                            continue;
                        }
                        best = match best {
                            None => Some(c),
                            Some(b) => {
                                let (vb, vc) = (votes[b as usize], votes[c as usize]);
                                if vc > vb || (vc == vb && rank(c) < rank(b)) {
                                    Some(c)
                                } else {
                                    Some(b)
                                }
                            }
                        };
                    }
                    if let Some(target) = best {
                        for &i in &comp {
                            m[i] = target;
                        }
                    }
                }
            }
            if min_hole > 0 {
                let snapshot = m.clone();
                let mut done = HashSet::new();
                let mut fills = Vec::new();
                for start in 0..w * h {
                    if snapshot[start] == class || done.contains(&start) {
                        continue;
                    }
                    let comp = flood(&|j| snapshot[j] != class, start, w, h, eight);
                    done.extend(comp.iter().copied());
                    let on_border = comp.iter().any(|&i| {
                        let (x, y) = (i % w, i / w);
                        x == 0 || y == 0 || x == w - 1 || y == h - 1
                    });
                    if !on_border && (comp.len() as u64) < min_hole {
                        fills.extend(comp);
                    }
                }
                for i in fills {
                    m[i] = class;
                }
            }
        }
        if m == before {
            return m;
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// One-vs-rest values for one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassValues {
    pub accuracy: Ratio,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
    pub iou: Ratio,
    pub kappa: Ratio,
}

impl ClassValues {
    fn filled(accuracy: i128, other: i128, kappa: i128) -> Self {
        ClassValues {
            accuracy: Ratio::int(accuracy),
            precision: Ratio::int(other),
            recall: Ratio::int(other),
            f1: Ratio::int(other),
            iou: Ratio::int(other),
            kappa: Ratio::int(kappa),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairValues {
    pub classes: [ClassValues; NUM_CLASSES],
    pub kappa: Ratio,
    pub accuracy: Ratio,
    pub pixel_diff: Option<Ratio>,
    pub pixel_diff_class: [Option<Ratio>; NUM_CLASSES],
}

/// Chance-corrected agreement between two raters over `n` items, given each
/// rater's per-category counts and the number of agreements.
fn cohen(n: i128, agree: i128, a: &[i128], b: &[i128]) -> Ratio {
    let po = Ratio::new(agree, n);
    let pe = a
        .iter()
        .zip(b)
        .fold(Ratio::int(0), |acc, (&x, &y)| acc.add(Ratio::new(x, n).mul(Ratio::new(y, n))));
    if pe == Ratio::int(1) {
        return Ratio::int(1);
    }
    po.sub(pe).div(Ratio::int(1).sub(pe))
}

/// Every metric for a mask pair, tallied pixel by pixel. Classes missing from
/// both masks score the best value (1, pixel diff 0); classes missing from one
/// score the worst (0, kappa -1).
pub fn pair_values(gt: &[u8], pred: &[u8]) -> PairValues {
    assert_eq!(gt.len(), pred.len());
    let n = gt.len() as i128;
    let classes = std::array::from_fn(|k| {
        let k = k as u8;
        let (mut tp, mut fp, mut fn_, mut tn) = (0i128, 0, 0, 0);
        for (&g, &p) in gt.iter().zip(pred) {
            match (g == k, p == k) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        let in_gt = tp + fn_ > 0;
        let in_pred = tp + fp > 0;
        if !in_gt && !in_pred {
            return ClassValues::filled(1, 1, 1);
        }
        if in_gt != in_pred {
            return ClassValues::filled(0, 0, -1);
        }
        let precision = Ratio::new(tp, tp + fp);
        let recall = Ratio::new(tp, tp + fn_);
        // harmonic mean of precision and recall; zero when they both are
        let f1 = if tp == 0 {
            Ratio::int(0)
        } else {
            Ratio::int(2).mul(precision).mul(recall).div(precision.add(recall))
        };
        ClassValues {
            accuracy: Ratio::new(tp + tn, n),
            precision,
            recall,
            f1,
            iou: Ratio::new(tp, tp + fp + fn_),
            kappa: cohen(n, tp + tn, &[tp + fn_, fp + tn], &[tp + fp, fn_ + tn]),
        }
    });

    let mut gt_counts = [0i128; NUM_CLASSES];
    let mut pred_counts = [0i128; NUM_CLASSES];
    let mut agree = 0;
    for (&g, &p) in gt.iter().zip(pred) {
        gt_counts[g as usize] += 1;
        pred_counts[p as usize] += 1;
        agree += (g == p) as i128;
    }
    let kappa = if n == 0 {
        Ratio::int(1)
    } else {
        cohen(n, agree, &gt_counts, &pred_counts)
    };
    let accuracy = if n == 0 { Ratio::int(1) } else { Ratio::new(agree, n) };

    let labeled = gt.iter().filter(|&&g| g != 0).count() as i128;
    let mut wrong_all = 0i128;
    let mut wrong = [0i128; NUM_CLASSES];
    for (&g, &p) in gt.iter().zip(pred) {
        if g == p {
            continue;
        }
        wrong_all += (g != 0) as i128 + (p != 0) as i128;
        wrong[g as usize] += 1;
        wrong[p as usize] += 1;
    }
    let (pixel_diff, pixel_diff_class) = if labeled == 0 {
        (None, [None; NUM_CLASSES])
    } else {
        (
            Some(Ratio::new(wrong_all, labeled)),
            std::array::from_fn(|k| {
                if gt_counts[k] == 0 && pred_counts[k] == 0 {
                    Some(Ratio::int(0))
                } else {
                    Some(Ratio::new(wrong[k], labeled))
                }
            }),
        )
    };

    PairValues {
        classes,
        kappa,
        accuracy,
        pixel_diff,
        pixel_diff_class,
    }
}
