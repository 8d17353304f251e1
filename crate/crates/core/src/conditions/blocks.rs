//! Block sequences: infinite lists of finite intervals of naturals with
//! off-block positions between them. Matet conditions append whole blocks;
//! willow conditions additionally carry mandatory points in the regions
//! between consecutive blocks.

use super::stream::mix;
use std::sync::{Arc, Mutex};

/// Per-index block sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeSchedule {
    Constant(u64),
    /// size_n = start + n * step
    Arithmetic { start: u64, step: u64 },
    /// size_n = start * 2^n; each block outweighs the sum of all earlier ones.
    Doubling { start: u64 },
    /// Frame-indexed sizes for the typed willow subtree builders: block
    /// indices are grouped into frames of size 2^(n+1) (n = 1, 2, ...);
    /// within frame n the even slots get `K_n * (slot/2 + 1)` and the odd
    /// slots get 1, where K_n grows fast enough across frames that a block
    /// outweighs any two-per-frame selection of earlier frames.
    FramedLinear,
    /// As `FramedLinear` but frames are indexed by binary strings ordered by
    /// length then lexicographic rank, with frame sizes 2^(|s|+1).
    FramedStrings,
    /// Seeded sizes in `min..=max`.
    Seeded { seed: u64, min: u64, max: u64 },
}

/// Frame of a block index under the linear frame layout: frames n = 1, 2,
/// ... of sizes 2^(n+1) laid consecutively. Returns (frame, slot).
pub fn linear_frame_of(index: u64) -> (u32, u64) {
    let mut n = 1u32;
    let mut start = 0u64;
    loop {
        let size = 1u64 << (n + 1);
        if index < start + size {
            return (n, index - start);
        }
        start += size;
        n += 1;
    }
}

/// First block index of linear frame n (n >= 1).
pub fn linear_frame_start(n: u32) -> u64 {
    (2u64 << n) - 4
}

/// Frame of a block index under the string frame layout: frames are indexed
/// by binary strings of length >= 1 in (length, lex) order, frame for s has
/// size 2^(|s|+1). Returns (level, rank-within-level, slot).
pub fn string_frame_of(index: u64) -> (u32, u64, u64) {
    let mut level = 1u32;
    let mut start = 0u64;
    loop {
        let frames = 1u64 << level; // strings of this length
        let size = 1u64 << (level + 1);
        let total = frames * size;
        if index < start + total {
            let off = index - start;
            return (level, off / size, off % size);
        }
        start += total;
        level += 1;
    }
}

/// First block index of the string frame (level, rank).
pub fn string_frame_start(level: u32, rank: u64) -> u64 {
    let mut start = 0u64;
    for l in 1..level {
        start += (1u64 << l) * (1u64 << (l + 1));
    }
    start + rank * (1u64 << (level + 1))
}

/// Cross-frame multipliers: K_1 = 3, K_n = 8 + sum_{m<n} K_m * 2^m. The
/// within-frame growth step K_n then outweighs any two-blocks-per-frame
/// selection from earlier frames, which is what the length-dominance
/// clauses of the typed subtrees compare against.
pub fn frame_multiplier(n: u32) -> u64 {
    let mut ks = vec![3u64];
    for _ in 1..n {
        let sum: u64 = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| k << (i as u32 + 1))
            .sum();
        ks.push(8 + sum);
    }
    ks[(n - 1) as usize]
}

/// String-frame multipliers. The base construction step mixes the two
/// level-1 frames, so the second one must dominate the whole first; from
/// level 2 on, frames of one level never mix within a section and share
/// one multiplier.
pub fn string_frame_multiplier(level: u32, rank: u64) -> u64 {
    if level == 1 {
        return if rank == 0 { 2 } else { 16 };
    }
    // Mmax_1 = 16; M_n = 4 + sum_{m<n} Mmax_m * 2^m.
    let mut mmax = vec![16u64];
    for _ in 2..=level {
        let sum: u64 = mmax
            .iter()
            .enumerate()
            .map(|(i, &k)| k << (i as u32 + 1))
            .sum();
        mmax.push(4 + sum);
    }
    mmax[(level - 1) as usize]
}

impl SizeSchedule {
    pub fn size(&self, index: u64) -> u64 {
        match self {
            SizeSchedule::Constant(c) => (*c).max(1),
            SizeSchedule::Arithmetic { start, step } => (start + index * step).max(1),
            SizeSchedule::Doubling { start } => (*start).max(1) << index.min(62),
            SizeSchedule::FramedLinear => {
                let (n, slot) = linear_frame_of(index);
                if slot % 2 == 0 {
                    frame_multiplier(n) * (slot / 2 + 1)
                } else {
                    1
                }
            }
            SizeSchedule::FramedStrings => {
                let (level, rank, slot) = string_frame_of(index);
                if slot % 2 == 0 {
                    string_frame_multiplier(level, rank) * (slot / 2 + 1)
                } else {
                    1
                }
            }
            SizeSchedule::Seeded { seed, min, max } => {
                let span = max.saturating_sub(*min) + 1;
                (min + mix(*seed, index) % span).max(1)
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            SizeSchedule::Constant(c) => format!("const {c}"),
            SizeSchedule::Arithmetic { start, step } => format!("arith {start} {step}"),
            SizeSchedule::Doubling { start } => format!("doubling {start}"),
            SizeSchedule::FramedLinear => "framed-linear".into(),
            SizeSchedule::FramedStrings => "framed-strings".into(),
            SizeSchedule::Seeded { seed, min, max } => format!("seeded {seed} {min} {max}"),
        }
    }

    pub fn parse(text: &str) -> Result<SizeSchedule, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let num = |s: &str| -> Result<u64, String> {
            s.parse::<u64>().map_err(|e| format!("bad number {s:?}: {e}"))
        };
        match parts.as_slice() {
            ["const", c] => Ok(SizeSchedule::Constant(num(c)?)),
            ["arith", a, b] => Ok(SizeSchedule::Arithmetic {
                start: num(a)?,
                step: num(b)?,
            }),
            ["doubling", a] => Ok(SizeSchedule::Doubling { start: num(a)? }),
            ["framed-linear"] => Ok(SizeSchedule::FramedLinear),
            ["framed-strings"] => Ok(SizeSchedule::FramedStrings),
            ["seeded", s, a, b] => Ok(SizeSchedule::Seeded {
                seed: num(s)?,
                min: num(a)?,
                max: num(b)?,
            }),
            _ => Err(format!("bad size schedule {text:?}")),
        }
    }
}

/// Grouping of consecutive base blocks into larger logical blocks. A group
/// is committed as a whole: merging consecutive blocks strengthens a
/// condition because every merged branch is also a branch of the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeRule {
    None,
    /// Greedily grow each group until its total size reaches the minimum.
    MinSize(u64),
    /// Greedily grow each group until its total exceeds the sum of all
    /// earlier groups.
    Summable,
}

impl MergeRule {
    pub fn render(&self) -> String {
        match self {
            MergeRule::None => "none".into(),
            MergeRule::MinSize(s) => format!("minsize {s}"),
            MergeRule::Summable => "summable".into(),
        }
    }

    pub fn parse(text: &str) -> Result<MergeRule, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts.as_slice() {
            ["none"] => Ok(MergeRule::None),
            ["minsize", s] => Ok(MergeRule::MinSize(
                s.parse().map_err(|e| format!("bad size: {e}"))?,
            )),
            ["summable"] => Ok(MergeRule::Summable),
            _ => Err(format!("bad merge rule {text:?}")),
        }
    }
}

/// An infinite sequence of blocks: block n is the interval
/// `[start_n, start_n + size_n)`, followed by `gap` off-block positions
/// before the next block. An optional merge rule groups consecutive base
/// blocks into the logical blocks the condition actually appends.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub first_start: u64,
    pub sizes: SizeSchedule,
    /// Number of off-block positions after each block (>= 1 for willow).
    pub gap: u64,
    pub merge: MergeRule,
    /// Cumulative block starts, extended on demand.
    cache: Arc<Mutex<Vec<u64>>>,
    /// Base-block ranges `[lo, hi)` per group, extended on demand.
    groups: Arc<Mutex<Vec<(u64, u64)>>>,
}

impl Blocks {
    pub fn new(first_start: u64, sizes: SizeSchedule, gap: u64) -> Self {
        Blocks {
            first_start,
            sizes,
            gap,
            merge: MergeRule::None,
            cache: Arc::new(Mutex::new(Vec::new())),
            groups: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn merged(mut self, rule: MergeRule) -> Self {
        self.merge = rule;
        self.groups = Arc::new(Mutex::new(Vec::new()));
        self
    }

    /// Base-block range `[lo, hi)` of group k.
    pub fn group_span(&self, k: u64) -> (u64, u64) {
        if self.merge == MergeRule::None {
            return (k, k + 1);
        }
        let mut g = self.groups.lock().unwrap();
        let mut earlier_total: u64 = {
            // recompute from known groups
            let mut tot = 0u64;
            for &(lo, hi) in g.iter() {
                for b in lo..hi {
                    tot += self.sizes.size(b);
                }
            }
            tot
        };
        while (g.len() as u64) <= k {
            let lo = g.last().map_or(0, |&(_, hi)| hi);
            let mut hi = lo;
            let mut total = 0u64;
            loop {
                total += self.sizes.size(hi);
                hi += 1;
                let enough = match self.merge {
                    MergeRule::None => true,
                    MergeRule::MinSize(s) => total >= s,
                    MergeRule::Summable => total > earlier_total,
                };
                if enough {
                    break;
                }
            }
            earlier_total += total;
            g.push((lo, hi));
        }
        g[k as usize]
    }

    /// Total size of group k.
    pub fn group_size(&self, k: u64) -> u64 {
        let (lo, hi) = self.group_span(k);
        (lo..hi).map(|b| self.sizes.size(b)).sum()
    }

    /// Values of group k: the union of its base blocks, increasing.
    pub fn group_values(&self, k: u64) -> Vec<u64> {
        let (lo, hi) = self.group_span(k);
        let mut out = Vec::new();
        for b in lo..hi {
            out.extend(self.values(b));
        }
        out
    }

    /// Group containing base block b.
    pub fn group_of_block(&self, b: u64) -> u64 {
        if self.merge == MergeRule::None {
            return b;
        }
        let mut k = 0u64;
        loop {
            let (lo, hi) = self.group_span(k);
            if b >= lo && b < hi {
                return k;
            }
            if b < lo {
                unreachable!("group spans are increasing");
            }
            k += 1;
        }
    }

    pub fn start(&self, n: u64) -> u64 {
        let mut c = self.cache.lock().unwrap();
        if c.is_empty() {
            c.push(self.first_start);
        }
        while (c.len() as u64) <= n {
            let k = c.len() as u64 - 1;
            let next = c[k as usize] + self.sizes.size(k) + self.gap;
            c.push(next);
        }
        c[n as usize]
    }

    pub fn size(&self, n: u64) -> u64 {
        self.sizes.size(n)
    }

    /// The values of block n, in increasing order.
    pub fn values(&self, n: u64) -> Vec<u64> {
        let s = self.start(n);
        (s..s + self.size(n)).collect()
    }

    pub fn end(&self, n: u64) -> u64 {
        self.start(n) + self.size(n)
    }

    /// Off-block positions between block n and block n+1.
    pub fn region_after(&self, n: u64) -> Vec<u64> {
        (self.end(n)..self.start(n + 1)).collect()
    }

    /// Index of the last block whose start is <= v (None when v precedes
    /// every block). Extends the start cache as needed, then binary-searches.
    fn last_block_starting_at_or_before(&self, v: u64) -> Option<u64> {
        if v < self.first_start {
            return None;
        }
        // Ensure the cache covers v.
        let mut n = {
            let c = self.cache.lock().unwrap();
            c.len() as u64
        };
        if n == 0 {
            self.start(0);
            n = 1;
        }
        while self.start(n - 1) <= v {
            n += 1;
        }
        let c = self.cache.lock().unwrap();
        let idx = c.partition_point(|&s| s <= v);
        Some(idx as u64 - 1)
    }

    /// The block containing `v`, if any: (index, offset).
    pub fn block_of(&self, v: u64) -> Option<(u64, u64)> {
        let n = self.last_block_starting_at_or_before(v)?;
        let s = self.start(n);
        if v < s + self.size(n) {
            Some((n, v - s))
        } else {
            None
        }
    }

    /// First region index n with start(n+1) > lo, i.e. the first region
    /// whose span [end(n), start(n+1)) can contain points >= lo.
    pub fn region_at_or_after(&self, lo: u64) -> u64 {
        match self.last_block_starting_at_or_before(lo) {
            None => 0,
            Some(n) => n,
        }
    }

    pub fn render(&self) -> String {
        format!(
            "start {} gap {} merge {} sizes {}",
            self.first_start,
            self.gap,
            self.merge.render(),
            self.sizes.render()
        )
    }

    pub fn parse(text: &str) -> Result<Blocks, String> {
        let t = text.trim();
        let rest = t.strip_prefix("start ").ok_or("missing start")?;
        let (s, rest) = rest.split_once(" gap ").ok_or("missing gap")?;
        let (g, rest) = rest.split_once(" merge ").ok_or("missing merge")?;
        let (m, sched) = rest.split_once(" sizes ").ok_or("missing sizes")?;
        Ok(Blocks::new(
            s.trim().parse().map_err(|e| format!("bad start: {e}"))?,
            SizeSchedule::parse(sched)?,
            g.trim().parse().map_err(|e| format!("bad gap: {e}"))?,
        )
        .merged(MergeRule::parse(m)?))
    }
}

impl PartialEq for Blocks {
    fn eq(&self, other: &Self) -> bool {
        self.render() == other.render()
    }
}
impl Eq for Blocks {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_is_summable() {
        // Sizes 1, 2, 4: each exceeds the sum of all earlier sizes.
        let s = SizeSchedule::Doubling { start: 1 };
        assert_eq!((0..3).map(|i| s.size(i)).collect::<Vec<_>>(), vec![1, 2, 4]);
        let mut sum = 0u64;
        for n in 0..10 {
            assert!(s.size(n) > sum);
            sum += s.size(n);
        }
    }

    #[test]
    fn layout_is_consistent() {
        let b = Blocks::new(2, SizeSchedule::Arithmetic { start: 2, step: 1 }, 1);
        assert_eq!(b.values(0), vec![2, 3]);
        assert_eq!(b.region_after(0), vec![4]);
        assert_eq!(b.values(1), vec![5, 6, 7]);
        assert_eq!(b.block_of(6), Some((1, 1)));
        assert_eq!(b.block_of(4), None);
        // out-of-order start queries agree
        let b2 = Blocks::new(2, SizeSchedule::Arithmetic { start: 2, step: 1 }, 1);
        assert_eq!(b2.start(5), b.start(5));
    }

    #[test]
    fn linear_frames_partition_indices() {
        assert_eq!(linear_frame_of(0), (1, 0));
        assert_eq!(linear_frame_of(3), (1, 3));
        assert_eq!(linear_frame_of(4), (2, 0));
        assert_eq!(linear_frame_of(11), (2, 7));
        assert_eq!(linear_frame_of(12), (3, 0));
        assert_eq!(linear_frame_start(1), 0);
        assert_eq!(linear_frame_start(2), 4);
        assert_eq!(linear_frame_start(3), 12);
    }

    #[test]
    fn string_frames_partition_indices() {
        // level 1: frames <0>, <1>, size 4 each; level 2: four frames size 8.
        assert_eq!(string_frame_of(0), (1, 0, 0));
        assert_eq!(string_frame_of(5), (1, 1, 1));
        assert_eq!(string_frame_of(8), (2, 0, 0));
        assert_eq!(string_frame_start(2, 1), 16);
    }
}
