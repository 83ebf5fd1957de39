//! Scan orders and local-sum templates.

use super::{CodingMode, SubBlock};

/// Saturation bound of the local sums.
pub const SUM_MAX: i64 = 31;

/// Template of already-coded neighbours feeding the local sum in TC mode:
/// right, two-right, down-right, down, two-down.
pub const TC_TEMPLATE: [(isize, isize); 5] = [(1, 0), (2, 0), (1, 1), (0, 1), (0, 2)];

/// Template for TS mode: left and top.
pub const TS_TEMPLATE: [(isize, isize); 2] = [(-1, 0), (0, -1)];

/// Diagonal scan. Anti-diagonals are visited from the top-left corner, each
/// from bottom-left to top-right. TS mode uses this order directly; TC mode
/// walks it backwards.
pub fn scan_positions(width: usize, height: usize, mode: CodingMode) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(width * height);
    for d in 0..(width + height - 1) {
        let y_hi = d.min(height - 1);
        let y_lo = d.saturating_sub(width - 1);
        for y in (y_lo..=y_hi).rev() {
            out.push((d - y, y));
        }
    }
    if mode == CodingMode::Transform {
        out.reverse();
    }
    out
}

/// Maximum number of context-coded bins for a block, `⌊W·H·7/4⌋`.
pub fn pass1_bin_budget(width: usize, height: usize) -> usize {
    width * height * 7 / 4
}

pub fn clamp_sum(s: i64) -> u32 {
    s.clamp(0, SUM_MAX) as u32
}

/// Unsaturated `Σ |C_i|` over the TC template of `(x, y)`.
pub fn template_sum(block: &SubBlock, x: usize, y: usize) -> i64 {
    TC_TEMPLATE
        .iter()
        .map(|&(dx, dy)| i64::from(block.abs_at(x as isize + dx, y as isize + dy)))
        .sum()
}

/// `[Σ_{S1} |C_i| − 5·baseLvl]` saturated to `[0, 31]`.
pub fn local_abs_sum(block: &SubBlock, x: usize, y: usize, base_lvl: u32) -> u32 {
    clamp_sum(template_sum(block, x, y) - 5 * i64::from(base_lvl))
}

pub fn template_sum_ts(block: &SubBlock, x: usize, y: usize) -> i64 {
    TS_TEMPLATE
        .iter()
        .map(|&(dx, dy)| i64::from(block.abs_at(x as isize + dx, y as isize + dy)))
        .sum()
}

/// `[Σ_{S2} |C_i|]` saturated to `[0, 31]`.
pub fn local_abs_sum_ts(block: &SubBlock, x: usize, y: usize) -> u32 {
    clamp_sum(template_sum_ts(block, x, y))
}

/// Positions whose TC template contains `(x, y)`, i.e. the coefficients whose
/// sums move when `(x, y)` changes. Only in-block positions are returned.
pub fn affected_tc(block: &SubBlock, x: usize, y: usize) -> Vec<(usize, usize)> {
    TC_TEMPLATE
        .iter()
        .map(|&(dx, dy)| (x as isize - dx, y as isize - dy))
        .filter(|&(px, py)| block.contains(px, py))
        .map(|(px, py)| (px as usize, py as usize))
        .collect()
}

/// Positions whose TS template contains `(x, y)`: right and below.
pub fn affected_ts(block: &SubBlock, x: usize, y: usize) -> Vec<(usize, usize)> {
    TS_TEMPLATE
        .iter()
        .map(|&(dx, dy)| (x as isize - dx, y as isize - dy))
        .filter(|&(px, py)| block.contains(px, py))
        .map(|(px, py)| (px as usize, py as usize))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(w: usize, h: usize, mode: CodingMode, coeffs: &[i32]) -> SubBlock {
        SubBlock::new(w, h, mode, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn scan_examples() {
        assert_eq!(scan_positions(1, 1, CodingMode::Transform), vec![(0, 0)]);
        let ts = scan_positions(4, 4, CodingMode::TransformSkip);
        assert_eq!(ts[0], (0, 0));
        assert_eq!(&ts[..6], &[(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        let mut tc = scan_positions(4, 4, CodingMode::Transform);
        assert_eq!(tc[0], (3, 3));
        tc.reverse();
        assert_eq!(tc, ts);
    }

    #[test]
    fn scan_visits_each_position_once_in_diagonal_order() {
        for (w, h) in [(4, 4), (2, 8), (8, 2), (1, 4), (16, 1)] {
            let ts = scan_positions(w, h, CodingMode::TransformSkip);
            let mut seen = vec![false; w * h];
            for &(x, y) in &ts {
                assert!(!std::mem::replace(&mut seen[y * w + x], true));
            }
            assert!(seen.iter().all(|&s| s));
            // Anti-diagonal index never decreases along the forward scan.
            assert!(ts.windows(2).all(|p| p[0].0 + p[0].1 <= p[1].0 + p[1].1));
        }
    }

    #[test]
    fn budget_examples() {
        assert_eq!(pass1_bin_budget(4, 4), 28);
        assert_eq!(pass1_bin_budget(1, 1), 1);
        assert_eq!(pass1_bin_budget(8, 4), 56);
    }

    #[test]
    fn local_sum_examples() {
        let zero = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        assert_eq!(local_abs_sum(&zero, 0, 0, 0), 0);

        // Neighbours of (0, 0): right 3, two-right 1, down-right 0, down 2, two-down 0.
        #[rustfmt::skip]
        let b = block(4, 4, CodingMode::Transform, &[
            0, 3, 1, 0,
            2, 0, 0, 0,
            0, 0, 0, 0,
            0, 0, 0, 0,
        ]);
        assert_eq!(template_sum(&b, 0, 0), 6);
        assert_eq!(local_abs_sum(&b, 0, 0, 4), 0);
        assert_eq!(local_abs_sum(&b, 0, 0, 0), 6);

        let big = block(4, 4, CodingMode::Transform, &[60; 16]);
        assert_eq!(local_abs_sum(&big, 0, 0, 4), 31);
    }

    #[test]
    fn local_sum_ts_examples() {
        #[rustfmt::skip]
        let b = block(4, 4, CodingMode::TransformSkip, &[
            0, 3, 0, 0,
            2, 9, 0, 0,
            0, 0, 20, 0,
            0, 0, 20, 0,
        ]);
        assert_eq!(local_abs_sum_ts(&b, 0, 0), 0);
        assert_eq!(local_abs_sum_ts(&b, 1, 1), 5);
        let sat = block(2, 2, CodingMode::TransformSkip, &[0, 20, 20, 0]);
        assert_eq!(local_abs_sum_ts(&sat, 1, 1), 31);
    }

    #[test]
    fn affected_sets_invert_templates() {
        let b = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        let mut a = affected_tc(&b, 2, 2);
        a.sort();
        assert_eq!(a, vec![(0, 2), (1, 1), (1, 2), (2, 0), (2, 1)]);
        assert!(affected_tc(&b, 0, 0).is_empty());
        let mut t = affected_ts(&b, 1, 1);
        t.sort();
        assert_eq!(t, vec![(1, 2), (2, 1)]);
        assert!(affected_ts(&b, 3, 3).is_empty());
    }
}
