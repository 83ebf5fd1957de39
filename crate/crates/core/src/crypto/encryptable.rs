//! Which remainder suffix bits can be flipped without changing any bin
//! length, rice parameter, zero-swap level, state or context elsewhere in
//! the sub-block.
//!
//! A candidate is a nonzero level whose remainder takes the truncated Rice
//! path with `cRiceParam > 1`. Up to `cRiceParam − 1` suffix MSBs may be
//! encrypted; the suffix LSB carries the parity and is never touched.
//! Limited exp-Golomb remainders are never candidates.
//!
//! Every test below depends on the candidate's own level only through the
//! range `[absCMin, absCMax]` reachable by rewriting the targeted bits, and
//! that range is the same for every value of those bits. Encryption and
//! decryption therefore reach the same decision from different values.

use serde::Serialize;

use crate::bincodes::BIN_REDUC;
use crate::coeffmodel::levels::{map_dec_abs_level, unmap_dec_abs_level, TC_REMAINDER_BASE, TS_REMAINDER_BASE};
use crate::coeffmodel::neighbors::{affected_tc, affected_ts, clamp_sum, template_sum, template_sum_ts, TC_TEMPLATE};
use crate::coeffmodel::{CodingMode, CodingTables, Pass, PositionInfo, SubBlock};

/// How a candidate's remainder relates to its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RemainderKind {
    /// `(|C| − 4) / 2` after the TC flags.
    Tc,
    /// `(|C| − 10) / 2` after the TS flags.
    Ts,
    /// Whole level in bypass through `dec_abs_level` with zero-swap `v`.
    Bypass { v: u32 },
}

impl RemainderKind {
    /// Remainder pass serving a position, or `None` for flag-only levels.
    pub fn of(info: &PositionInfo) -> Option<Self> {
        match info.pass {
            Pass::P1 => None,
            Pass::P2_1 => Some(Self::Tc),
            Pass::P3 => Some(Self::Ts),
            Pass::P2_2 => Some(Self::Bypass { v: info.v.unwrap_or(0) }),
        }
    }

    pub fn remainder(self, abs_level: u32) -> u32 {
        match self {
            Self::Tc => (abs_level - TC_REMAINDER_BASE) / 2,
            Self::Ts => (abs_level - TS_REMAINDER_BASE) / 2,
            Self::Bypass { v } => map_dec_abs_level(abs_level as i32, v),
        }
    }

    /// Level carried by `rem`; `parity` is the level's LSB, ignored in the
    /// bypass case where the remainder holds it.
    pub fn level(self, rem: u32, parity: u32) -> u32 {
        match self {
            Self::Tc => TC_REMAINDER_BASE + parity + 2 * rem,
            Self::Ts => TS_REMAINDER_BASE + parity + 2 * rem,
            Self::Bypass { v } => unmap_dec_abs_level(rem, v),
        }
    }
}

/// Extremes reachable by rewriting the targeted suffix bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinMax {
    pub abs_c_min: u32,
    pub rem_min: u32,
    pub abs_c_max: u32,
    pub rem_max: u32,
}

/// Mask selecting the `nb` suffix MSBs of a `rice`-bin suffix, LSB excluded.
pub fn target_mask(nb: u32, rice: u32) -> u32 {
    debug_assert!(nb < rice.max(1));
    ((1u32 << nb) - 1) << (rice - nb)
}

/// Bounds of the remainder and the level when the `nb` targeted suffix bits
/// of `abs_level`'s remainder take every pattern. In the bypass case the
/// level bounds are only meaningful when `v` lies outside the remainder
/// range, which the callers check first.
pub fn compute_min_max(abs_level: u32, nb: u32, kind: RemainderKind, rice: u32) -> MinMax {
    let rem = kind.remainder(abs_level);
    let mask = if nb == 0 { 0 } else { target_mask(nb, rice) };
    let rem_min = rem & !mask;
    let rem_max = rem | mask;
    let parity = abs_level & 1;
    MinMax {
        abs_c_min: kind.level(rem_min, parity),
        rem_min,
        abs_c_max: kind.level(rem_max, parity),
        rem_max,
    }
}

/// Tunable constants of the tests, exposed so the brute-force oracle can
/// show that a wrong constant is caught.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleParams {
    /// Offset subtracted from the neighbour sum of pass-2-1 positions.
    pub pass2_1_offset: i64,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self { pass2_1_offset: 5 * i64::from(TC_REMAINDER_BASE) }
    }
}

/// Reason a candidate ended with zero encryptable bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Blocked {
    /// Zero level, flags only, or `cRiceParam ≤ 1`.
    NotCandidate,
    /// Remainder on the limited exp-Golomb path.
    EscapePath,
    /// The zero-swap level falls inside the reachable remainder range.
    ZeroSwap,
    /// The largest reachable level leaves the dynamic range.
    DynamicRange,
    /// A neighbour's pass-1 context sums are not saturated.
    Context,
    /// A neighbour's rice parameter could change.
    Rice,
    /// A neighbour's zero-swap level could change.
    ZeroSwapLevel,
    /// The reachable level exceeds a TS prediction partner.
    Prediction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub bits: u32,
    /// Set when `bits == 0`.
    pub blocked: Option<Blocked>,
}

impl Decision {
    fn none(reason: Blocked) -> Self {
        Self { bits: 0, blocked: Some(reason) }
    }
}

/// Read-only view used by the tests: the current (possibly partly
/// encrypted) block plus the tables.
#[derive(Clone, Copy)]
pub struct CheckContext<'a> {
    pub block: &'a SubBlock,
    pub tables: &'a CodingTables,
    pub log2_tr_range: u32,
    pub rules: RuleParams,
}

impl<'a> CheckContext<'a> {
    pub fn new(block: &'a SubBlock, tables: &'a CodingTables, log2_tr_range: u32) -> Self {
        Self { block, tables, log2_tr_range, rules: RuleParams::default() }
    }

    pub fn with_rules(mut self, rules: RuleParams) -> Self {
        self.rules = rules;
        self
    }
}

fn p1_level(a: u32) -> i64 {
    i64::from(a.min(4 + a % 2))
}

fn in_interval(tables: &CodingTables, rice: u32, s: u32) -> bool {
    tables.rice_interval(rice).is_some_and(|iv| iv.contains(s))
}

/// Checks one affected TC position `p` against the candidate's reachable
/// level range. Returns the first failing condition.
pub fn check_sum_change_detail(ctx: &CheckContext<'_>, p: (usize, usize), abs_level: u32, abs_c_min: u32, abs_c_max: u32) -> Option<Blocked> {
    let (px, py) = p;
    let b = ctx.block;
    let t = ctx.tables;

    let mut abs_sum_p1 = 0i64;
    let mut num_pos = 0i64;
    for &(dx, dy) in &TC_TEMPLATE {
        let a = b.abs_at(px as isize + dx, py as isize + dy);
        abs_sum_p1 += p1_level(a);
        num_pos += i64::from(a != 0);
    }
    let abs_sum_p1_min = abs_sum_p1 - p1_level(abs_level) + p1_level(abs_c_min);
    let no_ctx_change = (abs_sum_p1 + 1) / 2 >= 3
        && abs_sum_p1 - num_pos >= 4
        && (abs_sum_p1_min + 1) / 2 >= 3
        && abs_sum_p1_min - num_pos >= 4;
    if !no_ctx_change {
        return Some(Blocked::Context);
    }

    let sum = template_sum(b, px, py);
    let sum_min = sum - i64::from(abs_level) + i64::from(abs_c_min);
    let sum_max = sum - i64::from(abs_level) + i64::from(abs_c_max);
    let off = ctx.rules.pass2_1_offset;
    let (tr21, tr21_min, tr21_max) = (clamp_sum(sum - off), clamp_sum(sum_min - off), clamp_sum(sum_max - off));
    let (tr22, tr22_min, tr22_max) = (clamp_sum(sum), clamp_sum(sum_min), clamp_sum(sum_max));
    let rice21 = t.rice(tr21);
    let rice22 = t.rice(tr22);
    if !in_interval(t, rice21, tr21_min)
        || !in_interval(t, rice21, tr21_max)
        || !in_interval(t, rice22, tr22_min)
        || !in_interval(t, rice22, tr22_max)
    {
        return Some(Blocked::Rice);
    }

    for row in 0..crate::coeffmodel::tables::V_ROWS {
        let curr_v = t.v_for_row(row, tr22);
        let ok = t
            .v_interval(row, curr_v)
            .is_some_and(|iv| iv.contains(tr22_min) && iv.contains(tr22_max));
        if !ok {
            return Some(Blocked::ZeroSwapLevel);
        }
    }
    None
}

/// `true` when encrypting within `[abs_c_min, abs_c_max]` leaves the
/// context, rice parameter and zero-swap levels of `p` unchanged.
pub fn check_sum_change(ctx: &CheckContext<'_>, p: (usize, usize), abs_level: u32, abs_c_min: u32, abs_c_max: u32) -> bool {
    check_sum_change_detail(ctx, p, abs_level, abs_c_min, abs_c_max).is_none()
}

/// TS counterpart of [`check_sum_change_detail`] for an affected position
/// `q` (right of or below the candidate at `c`).
pub fn check_sum_change_ts_detail(ctx: &CheckContext<'_>, c: (usize, usize), q: (usize, usize), abs_level: u32, abs_c_max: u32, abs_c_min: u32) -> Option<Blocked> {
    let b = ctx.block;
    let t = ctx.tables;
    // The prediction partner of q is its other template cell.
    let partner = prediction_partner(c, q);
    if abs_c_max > b.abs_at(partner.0, partner.1) {
        return Some(Blocked::Prediction);
    }
    let sum = template_sum_ts(b, q.0, q.1);
    let sum_min = sum - i64::from(abs_level) + i64::from(abs_c_min);
    let sum_max = sum - i64::from(abs_level) + i64::from(abs_c_max);
    let rice = t.rice(clamp_sum(sum));
    if !in_interval(t, rice, clamp_sum(sum_min)) || !in_interval(t, rice, clamp_sum(sum_max)) {
        return Some(Blocked::Rice);
    }
    None
}

/// For `q` right of `c` the partner is above `q`; for `q` below `c` it is
/// left of `q`. Either way it is a diagonal neighbour of `c`.
pub fn prediction_partner(c: (usize, usize), q: (usize, usize)) -> (isize, isize) {
    let (cx, cy) = (c.0 as isize, c.1 as isize);
    if q.0 > c.0 {
        (cx + 1, cy - 1)
    } else {
        (cx - 1, cy + 1)
    }
}

/// Shared prelude: candidate status and the escape-path test.
fn candidate(ctx: &CheckContext<'_>, c: (usize, usize), kind: RemainderKind, rice: u32) -> Result<u32, Blocked> {
    let abs_level = ctx.block.get(c.0, c.1).unsigned_abs();
    if abs_level == 0 || rice <= 1 {
        return Err(Blocked::NotCandidate);
    }
    if u64::from(kind.remainder(abs_level)) >= u64::from(BIN_REDUC) << rice {
        return Err(Blocked::EscapePath);
    }
    Ok(abs_level)
}

fn range_checks(ctx: &CheckContext<'_>, kind: RemainderKind, mm: &MinMax) -> Option<Blocked> {
    if let RemainderKind::Bypass { v } = kind {
        if (mm.rem_min..=mm.rem_max).contains(&v) {
            return Some(Blocked::ZeroSwap);
        }
    }
    if u64::from(mm.abs_c_max) >> ctx.log2_tr_range != 0 {
        return Some(Blocked::DynamicRange);
    }
    None
}

/// Largest `n ≤ nb_encryptable` whose reachable range passes every test
/// for the TC candidate at `c`, trying `nb_encryptable` first and
/// decrementing on failure.
pub fn is_encryptable(ctx: &CheckContext<'_>, c: (usize, usize), nb_encryptable: u32, kind: RemainderKind, rice: u32) -> Decision {
    let abs_level = match candidate(ctx, c, kind, rice) {
        Ok(a) => a,
        Err(r) => return Decision::none(r),
    };
    let affected = affected_tc(ctx.block, c.0, c.1);
    let mut reason = Blocked::NotCandidate;
    for n in (1..=nb_encryptable.min(rice - 1)).rev() {
        let mm = compute_min_max(abs_level, n, kind, rice);
        let failed = range_checks(ctx, kind, &mm).or_else(|| {
            affected
                .iter()
                .find_map(|&p| check_sum_change_detail(ctx, p, abs_level, mm.abs_c_min, mm.abs_c_max))
        });
        match failed {
            None => return Decision { bits: n, blocked: None },
            Some(r) => reason = r,
        }
    }
    Decision::none(reason)
}

/// TS counterpart of [`is_encryptable`] over the right and below
/// neighbours.
pub fn is_encryptable_ts(ctx: &CheckContext<'_>, c: (usize, usize), nb_encryptable: u32, kind: RemainderKind, rice: u32) -> Decision {
    let abs_level = match candidate(ctx, c, kind, rice) {
        Ok(a) => a,
        Err(r) => return Decision::none(r),
    };
    let affected = affected_ts(ctx.block, c.0, c.1);
    let mut reason = Blocked::NotCandidate;
    for n in (1..=nb_encryptable.min(rice - 1)).rev() {
        let mm = compute_min_max(abs_level, n, kind, rice);
        let failed = range_checks(ctx, kind, &mm).or_else(|| {
            affected
                .iter()
                .find_map(|&q| check_sum_change_ts_detail(ctx, c, q, abs_level, mm.abs_c_max, mm.abs_c_min))
        });
        match failed {
            None => return Decision { bits: n, blocked: None },
            Some(r) => reason = r,
        }
    }
    Decision::none(reason)
}

/// Decision for one annotated position, starting from `cRiceParam − 1`.
pub fn decide(ctx: &CheckContext<'_>, info: &PositionInfo) -> Decision {
    let Some(kind) = RemainderKind::of(info) else {
        return Decision::none(Blocked::NotCandidate);
    };
    let nb = info.rice.saturating_sub(1);
    match ctx.block.mode() {
        CodingMode::Transform => is_encryptable(ctx, (info.x, info.y), nb, kind, info.rice),
        CodingMode::TransformSkip => is_encryptable_ts(ctx, (info.x, info.y), nb, kind, info.rice),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffmodel::{annotate, encode_subblock};

    fn tables() -> CodingTables {
        CodingTables::vtm_default()
    }

    #[test]
    fn min_max_examples() {
        let mm = compute_min_max(9, 0, RemainderKind::Tc, 2);
        assert_eq!(mm, MinMax { abs_c_min: 9, rem_min: 2, abs_c_max: 9, rem_max: 2 });
        // rem 5 = 0b101 under rice 2: suffix "01", the MSB (weight 2) is targeted.
        let mm = compute_min_max(14, 1, RemainderKind::Tc, 2);
        assert_eq!((mm.rem_min, mm.rem_max), (5, 7));
        assert_eq!(mm.rem_max - mm.rem_min, 2);
        assert_eq!((mm.abs_c_min, mm.abs_c_max), (14, 18));
        for abs in 4..200u32 {
            for (rice, nb) in [(2, 1), (3, 1), (3, 2)] {
                for kind in [RemainderKind::Tc, RemainderKind::Bypass { v: 0 }, RemainderKind::Bypass { v: 300 }] {
                    let mm = compute_min_max(abs, nb, kind, rice);
                    assert_eq!(mm.abs_c_min % 2, abs % 2);
                    assert_eq!(mm.abs_c_max % 2, abs % 2);
                    assert!(mm.abs_c_min <= abs && abs <= mm.abs_c_max);
                }
            }
        }
    }

    #[test]
    fn zero_and_low_rice_are_not_candidates() {
        let t = tables();
        let b = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(is_encryptable(&ctx, (0, 0), 2, RemainderKind::Tc, 3).bits, 0);
        let mut b = b;
        b.set(0, 0, 12);
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(is_encryptable(&ctx, (0, 0), 0, RemainderKind::Tc, 1), Decision::none(Blocked::NotCandidate));
    }

    #[test]
    fn isolated_coefficient_gets_all_bits() {
        // (0,0) has no in-block position whose template contains it.
        let t = tables();
        let mut b = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        b.set(0, 0, 9);
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(is_encryptable(&ctx, (0, 0), 2, RemainderKind::Tc, 3).bits, 2);
    }

    #[test]
    fn unchanged_range_always_passes() {
        let t = tables();
        let b = SubBlock::new(4, 4, CodingMode::Transform, (0..16).map(|i| i * 3 - 20).collect()).unwrap();
        let ctx = CheckContext::new(&b, &t, 15);
        for x in 0..4 {
            for y in 0..4 {
                let a = b.get(x, y).unsigned_abs();
                for p in affected_tc(&b, x, y) {
                    let sat = check_sum_change_detail(&ctx, p, a, a, a);
                    // Only the saturation gate can refuse an empty range.
                    assert!(sat.is_none() || sat == Some(Blocked::Context));
                }
            }
        }
    }

    #[test]
    fn rice_breakpoint_crossing_is_refused() {
        // p = (0,0) sees c = (1,0) at 5 and (0,1) at 21: sum 26, so the
        // pass-2-1 sum 6 sits just below the first breakpoint of the table.
        let t = tables();
        assert_eq!(t.rice_interval(0).unwrap().hi, 6);
        let mut b = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        b.set(1, 0, 5);
        b.set(0, 1, 21);
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(check_sum_change_detail(&ctx, (0, 0), 5, 5, 7), Some(Blocked::Rice));
        assert!(check_sum_change(&ctx, (0, 0), 5, 5, 5));

        // Re-encoding with the substituted level changes the rice of (0,0).
        let mut moved = b.clone();
        moved.set(1, 0, 7);
        let rice_at = |blk: &SubBlock| {
            annotate(blk, &t).positions.iter().find(|p| (p.x, p.y) == (0, 0)).unwrap().rice
        };
        assert_eq!(rice_at(&b), 0);
        assert_eq!(rice_at(&moved), 1);
        assert_ne!(
            encode_subblock(&b, &t, 15).unwrap().annotation,
            encode_subblock(&moved, &t, 15).unwrap().annotation
        );
    }

    #[test]
    fn ts_partner_bound() {
        let t = tables();
        // c = (1,1) level 40 with right (2,1) in block; partner above it (2,0).
        let mut b = SubBlock::zeros(4, 4, CodingMode::TransformSkip).unwrap();
        b.set(1, 1, 40);
        b.set(0, 1, 20);
        b.set(1, 0, 20);
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(prediction_partner((1, 1), (2, 1)), (2, 0));
        assert_eq!(prediction_partner((1, 1), (1, 2)), (0, 2));
        let d = is_encryptable_ts(&ctx, (1, 1), 2, RemainderKind::Ts, 3);
        assert_eq!(d, Decision::none(Blocked::Prediction));
        let z = is_encryptable_ts(&ctx, (3, 3), 2, RemainderKind::Ts, 3);
        assert_eq!(z, Decision::none(Blocked::NotCandidate));
    }

    #[test]
    fn escape_path_is_never_a_candidate() {
        let t = tables();
        let mut b = SubBlock::zeros(4, 4, CodingMode::Transform).unwrap();
        // rem (500 − 4)/2 = 248 ≥ 5·2^3.
        b.set(0, 0, 500);
        let ctx = CheckContext::new(&b, &t, 15);
        assert_eq!(is_encryptable(&ctx, (0, 0), 2, RemainderKind::Tc, 3), Decision::none(Blocked::EscapePath));
    }
}
