//! Binary crowd masks: connected components, hole filling, boundary length,
//! the segmentation quality score and seed-frame selection.

mod perimeter;
mod sqs;

pub use perimeter::contour_perimeter;
pub use sqs::{select_seed, select_seed_frame, sqs, SeedCandidate, SqsReport};

use std::collections::VecDeque;

/// Row-major per-pixel crowd membership.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BinaryMask({}x{}, {} set)", self.width, self.height, self.count())
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == width * height).then_some(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds reads as background.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn get_index(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set_index(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    /// Copy moved by `(dx, dy)`; pixels shifted off the frame are dropped.
    pub fn shifted(&self, dx: isize, dy: isize) -> Self {
        let mut out = Self::new(self.width, self.height);
        for (x, y) in self.iter_set() {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                out.set(nx as usize, ny as usize, true);
            }
        }
        out
    }

    /// Nearest-neighbour upsampling by an integer factor.
    pub fn upsampled(&self, factor: usize) -> Self {
        Self::from_fn(self.width * factor, self.height * factor, |x, y| self.get(x / factor, y / factor))
    }
}

/// One 8-connected crowd component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// 1-based, in raster order of each component's first pixel.
    pub label: u32,
    pub area: usize,
    /// Linear pixel indices, raster-scan discovery order.
    pub pixels: Vec<usize>,
}

impl Component {
    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        let mut m = BinaryMask::new(width, height);
        for &i in &self.pixels {
            m.bits[i] = true;
        }
        m
    }
}

/// 8-connected labelling, components sorted by descending area (ties by label).
pub fn connected_components(m: &BinaryMask) -> Vec<Component> {
    let (w, h) = (m.width, m.height);
    let mut label = vec![0u32; w * h];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !m.bits[start] || label[start] != 0 {
            continue;
        }
        let id = comps.len() as u32 + 1;
        label[start] = id;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            pixels.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if m.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if label[j] == 0 {
                            label[j] = id;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        pixels.sort_unstable();
        comps.push(Component { label: id, area: pixels.len(), pixels });
    }
    comps.sort_by(|a, b| b.area.cmp(&a.area).then(a.label.cmp(&b.label)));
    comps
}

pub fn largest_component(m: &BinaryMask) -> Option<BinaryMask> {
    connected_components(m).first().map(|c| c.to_mask(m.width, m.height))
}

/// Sets every background pixel that is not 4-connected to the image border.
pub fn fill_holes(m: &BinaryMask) -> BinaryMask {
    let (w, h) = (m.width, m.height);
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        let i = y * w + x;
        if !m.bits[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut queue);
        seed(x, h - 1, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut queue);
        seed(w - 1, y, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let mut visit = |j: usize| {
            if !m.bits[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    BinaryMask { width: w, height: h, bits: outside.into_iter().map(|o| !o).collect() }
}


#[cfg(test)]
mod tests {
    use super::testing::rect;
    use super::*;

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::new(10, 10)).is_empty());
    }

    #[test]
    fn two_squares_sorted_by_area() {
        let mut m = rect(100, 100, 60, 60, 10, 10);
        for (x, y) in rect(100, 100, 5, 5, 30, 10).iter_set().collect::<Vec<_>>() {
            m.set(x, y, true);
        }
        let areas: Vec<usize> = connected_components(&m).iter().map(|c| c.area).collect();
        assert_eq!(areas, vec![300, 100]);
    }

    #[test]
    fn diagonal_neighbours_join() {
        let mut m = BinaryMask::new(5, 5);
        m.set(1, 1, true);
        m.set(2, 2, true);
        m.set(3, 1, true);
        assert_eq!(connected_components(&m).len(), 1);
    }

    #[test]
    fn labels_follow_raster_order() {
        let mut m = BinaryMask::new(6, 3);
        m.set(4, 0, true);
        m.set(0, 2, true);
        m.set(1, 2, true);
        let comps = connected_components(&m);
        assert_eq!(comps[0].area, 2);
        assert_eq!(comps[0].label, 2);
        assert_eq!(comps[1].label, 1);
    }

    #[test]
    fn solid_square_unchanged_by_fill() {
        let m = rect(40, 40, 10, 10, 20, 20);
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn centred_hole_is_filled() {
        let mut m = rect(40, 40, 10, 10, 20, 20);
        for y in 18..22 {
            for x in 18..22 {
                m.set(x, y, false);
            }
        }
        assert_eq!(m.count(), 384);
        let filled = fill_holes(&m);
        assert_eq!(filled.count(), 400);
        assert_eq!(filled, rect(40, 40, 10, 10, 20, 20));
    }

    #[test]
    fn concavity_open_to_border_is_not_a_hole() {
        // C shape whose opening runs to the right border.
        let m = BinaryMask::from_fn(30, 30, |x, y| {
            (5..30).contains(&x) && (5..25).contains(&y) && !((12..30).contains(&x) && (10..20).contains(&y))
        });
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn diagonal_background_gap_still_a_hole() {
        // Background pixel touching the outside only diagonally is enclosed under 4-connectivity.
        let mut m = rect(10, 10, 2, 2, 5, 5);
        m.set(4, 4, false);
        m.set(6, 6, false);
        let filled = fill_holes(&m);
        assert!(filled.get(4, 4));
        assert!(!filled.get(6, 6) || m.get(6, 6));
    }
}
