//! Seeded procedural textures. A stateless integer hash keeps every texel a
//! pure function of `(seed, coordinates)`, so any pixel can be rendered in
//! isolation and in any order.

fn hash(seed: u64, x: i64, y: i64) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [x as u64, y as u64] {
        h ^= v.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = h.rotate_left(27).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// Uniform value in `[0, 1)` for a lattice point.
pub(crate) fn lattice(seed: u64, x: i64, y: i64) -> f64 {
    (hash(seed, x, y) >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated value noise in `[0, 1)`.
pub(crate) fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (smooth(x - x0), smooth(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Three independent value-noise channels sharing one lattice hash.
pub(crate) fn value_noise3(seed: u64, x: f64, y: f64) -> [f64; 3] {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (smooth(x - x0), smooth(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let split = |h: u64| [0, 21, 42].map(|s| ((h >> s) & 0x1F_FFFF) as f64 / (1u64 << 21) as f64);
    let a = split(hash(seed, ix, iy));
    let b = split(hash(seed, ix + 1, iy));
    let c = split(hash(seed, ix, iy + 1));
    let d = split(hash(seed, ix + 1, iy + 1));
    [0, 1, 2].map(|i| {
        let top = a[i] + (b[i] - a[i]) * tx;
        let bottom = c[i] + (d[i] - c[i]) * tx;
        top + (bottom - top) * ty
    })
}

/// Two octaves of value noise, renormalised to `[0, 1)`.
pub(crate) fn fbm(seed: u64, x: f64, y: f64) -> f64 {
    (value_noise(seed, x, y) * 2.0 + value_noise(seed.wrapping_add(1), x * 2.03, y * 2.03)) / 3.0
}

/// Gaussian-ish sample from a lattice hash (sum of uniforms), unit variance.
pub(crate) fn hashed_normal(seed: u64, x: i64, y: i64) -> f64 {
    let s: f64 = (0..4).map(|k| lattice(seed.wrapping_add(k), x, y)).sum();
    (s - 2.0) * 3f64.sqrt()
}
