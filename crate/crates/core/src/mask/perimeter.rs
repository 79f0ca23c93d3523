use crate::error::{Error, Result};
use crate::mask::BinaryMask;

// Unit steps on the pixel-corner lattice: +x, +y, -x, -y.
const STEPS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn turn(a: usize, b: usize) -> i64 {
    let (ax, ay) = STEPS[a];
    let (bx, by) = STEPS[b];
    ax * by - ay * bx
}

/// Boundary length of the crowd region in pixels.
///
/// The region's crack boundary (pixel sides facing background) is traced
/// into closed rectilinear contours. A concave corner sitting between two
/// convex corners is a one-step staircase artefact of rasterisation, so it is
/// replaced by the chord between its neighbours; every other corner is kept.
/// Axis-aligned rectangles keep their exact crack length (a 20×20 square
/// measures 80), while digitised curves measure close to their Euclidean
/// length and stay enclosing, so the shape score of a disk stays near 1.
pub fn contour_perimeter(m: &BinaryMask) -> Result<f64> {
    let (w, h) = (m.width() as i64, m.height() as i64);
    if m.is_empty() {
        return Err(Error::InvalidInput("perimeter of an empty mask".into()));
    }
    let vw = w + 1;
    let vid = |x: i64, y: i64| (y * vw + x) as usize;
    // Outgoing crack edges per lattice vertex (at most two), stored as step codes.
    let mut out: Vec<[u8; 2]> = vec![[u8::MAX; 2]; ((w + 1) * (h + 1)) as usize];
    let add = |x: i64, y: i64, dir: u8, out: &mut Vec<[u8; 2]>| {
        let slot = &mut out[vid(x, y)];
        if slot[0] == u8::MAX {
            slot[0] = dir;
        } else {
            slot[1] = dir;
        }
    };
    let inside = |x: i64, y: i64| m.get_signed(x as isize, y as isize);
    let mut edge_count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !inside(x, y) {
                continue;
            }
            // Region on the same side for every edge: the walk turns -1 around convex corners.
            if !inside(x, y - 1) {
                add(x + 1, y, 2, &mut out);
                edge_count += 1;
            }
            if !inside(x + 1, y) {
                add(x + 1, y + 1, 3, &mut out);
                edge_count += 1;
            }
            if !inside(x, y + 1) {
                add(x, y + 1, 0, &mut out);
                edge_count += 1;
            }
            if !inside(x - 1, y) {
                add(x, y, 1, &mut out);
                edge_count += 1;
            }
        }
    }

    let mut used: Vec<[bool; 2]> = vec![[false; 2]; out.len()];
    let mut total = 0.0;
    let mut walked = 0usize;
    for start in 0..out.len() {
        for slot in 0..2 {
            if out[start][slot] == u8::MAX || used[start][slot] {
                continue;
            }
            let mut dirs: Vec<usize> = Vec::new();
            let (mut vx, mut vy) = (start as i64 % vw, start as i64 / vw);
            let mut cur_slot = slot;
            let mut v = start;
            loop {
                used[v][cur_slot] = true;
                let d = out[v][cur_slot] as usize;
                dirs.push(d);
                vx += STEPS[d].0;
                vy += STEPS[d].1;
                v = vid(vx, vy);
                let cands: Vec<usize> = (0..2).filter(|&s| out[v][s] != u8::MAX && !used[v][s]).collect();
                cur_slot = match cands.as_slice() {
                    [] => break,
                    [s] => *s,
                    // Pinch vertex: take the concave turn so diagonal neighbours share a contour.
                    _ => *cands.iter().max_by_key(|&&s| turn(d, out[v][s] as usize)).unwrap(),
                };
            }
            walked += dirs.len();
            total += simplified_length(&dirs);
        }
    }
    debug_assert_eq!(walked, edge_count);
    Ok(total)
}

fn simplified_length(dirs: &[usize]) -> f64 {
    let n = dirs.len();
    // Rotate so the sequence starts right after a direction change.
    let Some(first) = (0..n).find(|&i| dirs[i] != dirs[(i + n - 1) % n]) else {
        return n as f64;
    };
    let mut runs: Vec<(usize, i64)> = Vec::new();
    for k in 0..n {
        let d = dirs[(first + k) % n];
        match runs.last_mut() {
            Some((rd, len)) if *rd == d => *len += 1,
            _ => runs.push((d, 1)),
        }
    }
    // Vertex i sits at the end of run i.
    let mut verts = Vec::with_capacity(runs.len());
    let (mut x, mut y) = (0i64, 0i64);
    for &(d, len) in &runs {
        x += STEPS[d].0 * len;
        y += STEPS[d].1 * len;
        verts.push((x, y));
    }
    let k = runs.len();
    let convex: Vec<bool> = (0..k).map(|i| turn(runs[i].0, runs[(i + 1) % k].0) < 0).collect();
    let kept: Vec<(i64, i64)> = (0..k)
        .filter(|&i| convex[i] || !(convex[(i + k - 1) % k] && convex[(i + 1) % k]))
        .map(|i| verts[i])
        .collect();
    let m = kept.len();
    (0..m)
        .map(|i| {
            let (ax, ay) = kept[i];
            let (bx, by) = kept[(i + 1) % m];
            (((bx - ax).pow(2) + (by - ay).pow(2)) as f64).sqrt()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::testing::{disk, rect};

    #[test]
    fn single_pixel() {
        let mut m = BinaryMask::new(3, 3);
        m.set(1, 1, true);
        assert_eq!(contour_perimeter(&m).unwrap(), 4.0);
    }

    #[test]
    fn square_and_line() {
        assert_eq!(contour_perimeter(&rect(50, 50, 10, 10, 20, 20)).unwrap(), 80.0);
        assert_eq!(contour_perimeter(&rect(20, 5, 3, 2, 10, 1)).unwrap(), 22.0);
        // Touching the frame border counts as exposed.
        assert_eq!(contour_perimeter(&rect(20, 20, 0, 0, 20, 20)).unwrap(), 80.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(contour_perimeter(&BinaryMask::new(4, 4)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn staircase_becomes_diagonal() {
        // Right isosceles staircase triangle with legs of 10 pixels.
        let m = BinaryMask::from_fn(20, 20, |x, y| x >= 2 && y >= 2 && x < 12 && y < 12 && (x - 2) <= (y - 2));
        let p = contour_perimeter(&m).unwrap();
        // Legs 10 + 10, hypotenuse chord over the outer staircase corners plus the
        // two end steps: strictly less than the crack length 40, more than 20 + 10·sqrt2.
        assert!(p < 40.0 && p > 20.0 + 10.0 * 2f64.sqrt() - 1e-9, "{p}");
    }

    #[test]
    fn hole_contributes() {
        let mut m = rect(30, 30, 5, 5, 20, 20);
        m.set(15, 15, false);
        assert_eq!(contour_perimeter(&m).unwrap(), 84.0);
    }

    #[test]
    fn disk_close_to_circumference() {
        let m = disk(100, 100, 50.0, 50.0, 30.0);
        let p = contour_perimeter(&m).unwrap();
        let ideal = 2.0 * std::f64::consts::PI * 30.0;
        assert!(p > ideal && p < 1.1 * ideal, "{p} vs {ideal}");
    }

    #[test]
    fn diagonal_chain_traced_once() {
        let m = BinaryMask::from_fn(8, 8, |x, y| x == y && x >= 2 && x < 6);
        let p = contour_perimeter(&m).unwrap();
        assert!(p > 0.0 && p <= 16.0, "{p}");
    }
}
