use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mask::{connected_components, contour_perimeter, fill_holes, BinaryMask};
use crate::par;

/// Segmentation quality score and its ingredients. Lower is better; 1 is the
/// floor for a single round hole-free component.
#[derive(Debug, Clone, PartialEq)]
pub struct SqsReport {
    /// Component score `a / max_i a_i`.
    pub s_cp: f64,
    /// Completeness score `a' / a`.
    pub s_cl: f64,
    /// Shape score `p_j / (2 sqrt(pi a_j))`.
    pub s_sp: f64,
    pub sqs: f64,
    /// Total crowd area.
    pub a: usize,
    /// Component areas, descending.
    pub a_i: Vec<usize>,
    /// Crowd area with holes filled.
    pub a_prime: usize,
    /// Perimeter of the largest component.
    pub p_j: f64,
    /// Area of the largest component.
    pub a_j: usize,
}

pub fn sqs(m: &BinaryMask) -> Result<SqsReport> {
    let comps = connected_components(m);
    let Some(largest) = comps.first() else {
        return Err(Error::EmptyMask);
    };
    let a_i: Vec<usize> = comps.iter().map(|c| c.area).collect();
    let a: usize = a_i.iter().sum();
    let a_prime = fill_holes(m).count();
    let a_j = largest.area;
    let p_j = contour_perimeter(&largest.to_mask(m.width(), m.height()))?;

    let s_cp = a as f64 / a_j as f64;
    let s_cl = a_prime as f64 / a as f64;
    let s_sp = p_j / (2.0 * (PI * a_j as f64).sqrt());
    Ok(SqsReport { s_cp, s_cl, s_sp, sqs: s_cp * s_cl * s_sp, a, a_i, a_prime, p_j, a_j })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedCandidate {
    pub frame_index: usize,
    pub area: usize,
    pub sqs: f64,
}

/// Drops candidates whose crowd area is below half the largest, then picks
/// the lowest score; ties go to the earliest frame index.
pub fn select_seed(candidates: &[SeedCandidate]) -> Result<SeedCandidate> {
    let max_area = candidates.iter().map(|c| c.area).max().unwrap_or(0);
    if max_area == 0 {
        return Err(Error::NoCandidate);
    }
    candidates
        .iter()
        .filter(|c| c.area > 0 && 2 * c.area >= max_area)
        .min_by(|a, b| a.sqs.total_cmp(&b.sqs).then(a.frame_index.cmp(&b.frame_index)))
        .copied()
        .ok_or(Error::NoCandidate)
}

/// Scores every mask and applies [`select_seed`]. Returns the chosen frame
/// index, its report and the per-frame reports (empty masks excluded).
pub fn select_seed_frame(masks: &[(usize, &BinaryMask)]) -> Result<(usize, SqsReport, Vec<(usize, SqsReport)>)> {
    let scored: Vec<Option<(usize, SqsReport)>> =
        par::map(masks, |(idx, m)| sqs(m).ok().map(|r| (*idx, r)));
    let reports: Vec<(usize, SqsReport)> = scored.into_iter().flatten().collect();
    let candidates: Vec<SeedCandidate> = reports
        .iter()
        .map(|(i, r)| SeedCandidate { frame_index: *i, area: r.a, sqs: r.sqs })
        .collect();
    let best = select_seed(&candidates)?;
    let report = reports
        .iter()
        .find(|(i, _)| *i == best.frame_index)
        .map(|(_, r)| r.clone())
        .expect("selected candidate has a report");
    Ok((best.frame_index, report, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::testing::{disk, rect};

    #[test]
    fn square_scores() {
        let r = sqs(&rect(100, 100, 40, 40, 20, 20)).unwrap();
        let expected = 80.0 / (2.0 * (400.0 * PI).sqrt());
        assert_eq!(r.s_cp, 1.0);
        assert_eq!(r.s_cl, 1.0);
        assert!((r.s_sp - expected).abs() < 1e-12);
        assert!((r.sqs - 1.1283791670955126).abs() < 1e-9);
    }

    #[test]
    fn two_components_component_score() {
        let mut m = rect(100, 100, 5, 5, 30, 10);
        for (x, y) in rect(100, 100, 60, 60, 10, 10).iter_set().collect::<Vec<_>>() {
            m.set(x, y, true);
        }
        let r = sqs(&m).unwrap();
        assert_eq!(r.a_i, vec![300, 100]);
        assert!((r.s_cp - 400.0 / 300.0).abs() < 1e-12);
    }

    #[test]
    fn holed_square_completeness() {
        let mut m = rect(100, 100, 40, 40, 20, 20);
        for y in 48..52 {
            for x in 48..52 {
                m.set(x, y, false);
            }
        }
        let r = sqs(&m).unwrap();
        assert_eq!((r.a, r.a_prime), (384, 400));
        assert!((r.s_cl - 400.0 / 384.0).abs() < 1e-12);
    }

    #[test]
    fn disk_is_near_ideal() {
        for radius in [30.0, 45.0, 80.0] {
            let m = disk(200, 200, 100.0, 100.0, radius);
            let r = sqs(&m).unwrap();
            assert!((1.0..=1.2).contains(&r.sqs), "r={radius}: {}", r.sqs);
        }
    }

    #[test]
    fn empty_mask_errors() {
        assert!(matches!(sqs(&BinaryMask::new(5, 5)), Err(Error::EmptyMask)));
    }

    #[test]
    fn half_max_rule() {
        let c = [
            SeedCandidate { frame_index: 0, area: 1000, sqs: 2.0 },
            SeedCandidate { frame_index: 1, area: 400, sqs: 1.1 },
            SeedCandidate { frame_index: 2, area: 900, sqs: 1.5 },
        ];
        assert_eq!(select_seed(&c).unwrap().frame_index, 2);
        assert_eq!(select_seed(&c[..1]).unwrap().frame_index, 0);
        let empty = [SeedCandidate { frame_index: 0, area: 0, sqs: f64::NAN }];
        assert!(matches!(select_seed(&empty), Err(Error::NoCandidate)));
        assert!(matches!(select_seed(&[]), Err(Error::NoCandidate)));
    }

    #[test]
    fn ties_use_frame_index_not_position() {
        let a = SeedCandidate { frame_index: 9, area: 100, sqs: 1.3 };
        let b = SeedCandidate { frame_index: 4, area: 100, sqs: 1.3 };
        assert_eq!(select_seed(&[a, b]).unwrap().frame_index, 4);
        assert_eq!(select_seed(&[b, a]).unwrap().frame_index, 4);
    }

    #[test]
    fn seed_frame_from_masks() {
        let good = rect(60, 60, 10, 10, 30, 30);
        let ragged = BinaryMask::from_fn(60, 60, |x, y| (10..40).contains(&x) && (10..40).contains(&y) && (x + y) % 7 != 0);
        let empty = BinaryMask::new(60, 60);
        let (idx, report, all) = select_seed_frame(&[(3, &ragged), (5, &good), (8, &empty)]).unwrap();
        assert_eq!(idx, 5);
        assert_eq!(report.a, 900);
        assert_eq!(all.len(), 2);
        assert!(matches!(select_seed_frame(&[(0, &empty)]), Err(Error::NoCandidate)));
    }
}
