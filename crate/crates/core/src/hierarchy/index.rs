//! Multi-index bookkeeping for the truncated hierarchy.
//!
//! Indices are ordered by tier (total order Σn), then in descending
//! lexicographic order within a tier. For M modes and depth N this gives
//! C(M+N, N) indices, and the first tier is {e_0, e_1, …} at ids 1..=M.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NO_NEIGHBOR: u32 = u32::MAX;

/// n-choose-k in u128, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of length-`slots` vectors of non-negative integers summing to `total`.
fn compositions(slots: usize, total: usize) -> u128 {
    if slots == 0 {
        return u128::from(total == 0);
    }
    binomial((total + slots - 1) as u64, (slots - 1) as u64)
}

/// Count of indices with total order ≤ depth over `modes` modes.
pub fn simplex_count(modes: usize, depth: usize) -> u128 {
    binomial((modes + depth) as u64, depth as u64)
}

/// Position in the uncapped ordering.
pub fn rank(index: &[u8]) -> u128 {
    let m = index.len();
    let order: usize = index.iter().map(|&n| n as usize).sum();
    if m == 0 {
        return 0;
    }
    let mut r = if order == 0 {
        0
    } else {
        simplex_count(m, order - 1)
    };
    let mut remaining = order;
    for (i, &n) in index.iter().enumerate().take(m - 1) {
        let n = n as usize;
        for v in (n + 1)..=remaining {
            r += compositions(m - i - 1, remaining - v);
        }
        remaining -= n;
    }
    r
}

/// Inverse of [`rank`] for `modes` modes.
pub fn unrank(mut r: u128, modes: usize) -> Vec<u8> {
    let mut index = vec![0u8; modes];
    if modes == 0 {
        return index;
    }
    let mut order = 0usize;
    while simplex_count(modes, order) <= r {
        order += 1;
    }
    if order > 0 {
        r -= simplex_count(modes, order - 1);
    }
    let mut remaining = order;
    for i in 0..modes - 1 {
        let mut v = remaining;
        loop {
            let block = compositions(modes - i - 1, remaining - v);
            if r < block {
                break;
            }
            r -= block;
            v -= 1;
        }
        index[i] = v as u8;
        remaining -= v;
    }
    index[modes - 1] = remaining as u8;
    index
}

/// Contiguous range of modes that belong to one bath, with an optional cap
/// on the partial order carried by those modes and an optional cap on the
/// order carried by all but the first of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeGroup {
    pub start: usize,
    pub len: usize,
    pub cap: Option<usize>,
    #[serde(default)]
    pub tail_cap: Option<usize>,
}

impl ModeGroup {
    pub fn new(start: usize, len: usize) -> Self {
        Self {
            start,
            len,
            cap: None,
            tail_cap: None,
        }
    }

    fn restricts(&self, depth: usize) -> bool {
        self.cap.is_some_and(|c| c < depth)
            || (self.len > 1 && self.tail_cap.is_some_and(|c| c < depth))
    }

    /// Number of ways this group carries each partial order 0..=depth.
    fn census(&self, depth: usize) -> Vec<u128> {
        let limit = self.cap.unwrap_or(depth).min(depth);
        let mut out = vec![0u128; depth + 1];
        match self.tail_cap {
            Some(tail) if self.len > 1 => {
                for b in 0..=tail.min(limit) {
                    let ways = compositions(self.len - 1, b);
                    for slot in &mut out[b..=limit] {
                        *slot = slot.saturating_add(ways);
                    }
                }
            }
            _ => {
                for (a, slot) in out.iter_mut().enumerate().take(limit + 1) {
                    *slot = compositions(self.len, a);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdoTable {
    modes: usize,
    depth: usize,
    groups: Vec<ModeGroup>,
    indices: Vec<u8>,
    /// Uncapped rank of each stored index, only kept when groups are capped.
    ranks: Option<Vec<u128>>,
    up: Vec<u32>,
    down: Vec<u32>,
}

/// Default limit on the number of stored indices.
pub const DEFAULT_ADO_CAP: usize = 2_000_000;

impl AdoTable {
    /// All indices with total order ≤ `depth`.
    pub fn new(modes: usize, depth: usize, cap: usize) -> Result<Self> {
        Self::with_groups(depth, vec![ModeGroup::new(0, modes)], cap)
    }

    /// Like [`AdoTable::new`], additionally dropping indices whose partial
    /// order within a capped group exceeds that group's cap.
    pub fn with_groups(depth: usize, groups: Vec<ModeGroup>, cap: usize) -> Result<Self> {
        let mut modes = 0;
        for g in &groups {
            if g.start != modes {
                return Err(Error::InvalidParameter(
                    "mode groups must be contiguous".into(),
                ));
            }
            modes += g.len;
        }
        if depth > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "depth {depth} exceeds 255"
            )));
        }
        let full = simplex_count(modes, depth);
        let capped = groups.iter().any(|g| g.restricts(depth));
        let count = if capped {
            capped_count(depth, &groups)
        } else {
            full
        };
        if count > cap as u128 {
            return Err(Error::HierarchyTooLarge { count, cap });
        }
        let count = count as usize;

        let mut indices = Vec::with_capacity(count * modes);
        let mut current = vec![0u8; modes];
        for order in 0..=depth {
            fill_tier(&mut current, 0, order, &mut |idx| {
                if !capped || within_caps(idx, &groups) {
                    indices.extend_from_slice(idx);
                }
            });
        }
        debug_assert_eq!(indices.len(), count * modes.max(1) * usize::from(modes > 0));

        let ranks = capped.then(|| {
            (0..count)
                .map(|id| rank(&indices[id * modes..(id + 1) * modes]))
                .collect::<Vec<_>>()
        });
        let mut table = Self {
            modes,
            depth,
            groups,
            indices,
            ranks,
            up: Vec::new(),
            down: Vec::new(),
        };
        if modes == 0 {
            table.indices.clear();
        }
        table.build_neighbors();
        Ok(table)
    }

    fn build_neighbors(&mut self) {
        let n = self.len();
        let m = self.modes;
        let mut up = vec![NO_NEIGHBOR; n * m];
        let mut down = vec![NO_NEIGHBOR; n * m];
        let mut scratch = vec![0u8; m];
        for id in 0..n {
            scratch.copy_from_slice(self.index(id));
            for mode in 0..m {
                if scratch[mode] > 0 {
                    scratch[mode] -= 1;
                    down[id * m + mode] = self.find(&scratch).map_or(NO_NEIGHBOR, |x| x as u32);
                    scratch[mode] += 1;
                }
                scratch[mode] += 1;
                up[id * m + mode] = self.find(&scratch).map_or(NO_NEIGHBOR, |x| x as u32);
                scratch[mode] -= 1;
            }
        }
        self.up = up;
        self.down = down;
    }

    pub fn len(&self) -> usize {
        if self.modes == 0 {
            1
        } else {
            self.indices.len() / self.modes
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn groups(&self) -> &[ModeGroup] {
        &self.groups
    }

    pub fn index(&self, id: usize) -> &[u8] {
        &self.indices[id * self.modes..(id + 1) * self.modes]
    }

    pub fn order(&self, id: usize) -> usize {
        self.index(id).iter().map(|&n| n as usize).sum()
    }

    /// Flat id of a multi-index, or None if it is truncated away.
    pub fn find(&self, index: &[u8]) -> Option<usize> {
        if index.len() != self.modes {
            return None;
        }
        let order: usize = index.iter().map(|&n| n as usize).sum();
        if order > self.depth {
            return None;
        }
        let r = rank(index);
        match &self.ranks {
            None => Some(r as usize),
            Some(ranks) => ranks.binary_search(&r).ok(),
        }
    }

    /// id of index + e_mode, or [`NO_NEIGHBOR`].
    #[inline]
    pub fn up(&self, id: usize, mode: usize) -> u32 {
        self.up[id * self.modes + mode]
    }

    /// id of index − e_mode, or [`NO_NEIGHBOR`].
    #[inline]
    pub fn down(&self, id: usize, mode: usize) -> u32 {
        self.down[id * self.modes + mode]
    }

    /// id of the first-tier index e_mode, if present.
    pub fn first_tier(&self, mode: usize) -> Option<usize> {
        if self.depth == 0 || mode >= self.modes {
            return None;
        }
        match self.up(0, mode) {
            NO_NEIGHBOR => None,
            id => Some(id as usize),
        }
    }
}

fn within_caps(index: &[u8], groups: &[ModeGroup]) -> bool {
    let order = |r: std::ops::Range<usize>| index[r].iter().map(|&n| n as usize).sum::<usize>();
    groups.iter().all(|g| {
        g.cap
            .is_none_or(|cap| order(g.start..g.start + g.len) <= cap)
            && (g.len < 2
                || g.tail_cap
                    .is_none_or(|cap| order(g.start + 1..g.start + g.len) <= cap))
    })
}

fn capped_count(depth: usize, groups: &[ModeGroup]) -> u128 {
    // Polynomial product over groups of their per-order census, truncated at depth.
    let mut poly = vec![0u128; depth + 1];
    poly[0] = 1;
    for g in groups {
        let census = g.census(depth);
        let mut next = vec![0u128; depth + 1];
        for (i, &p) in poly.iter().enumerate() {
            if p == 0 {
                continue;
            }
            for (a, &w) in census.iter().enumerate().take(depth - i + 1) {
                next[i + a] = next[i + a].saturating_add(p.saturating_mul(w));
            }
        }
        poly = next;
    }
    poly.iter().fold(0u128, |acc, &p| acc.saturating_add(p))
}

/// Visit every index with exactly `remaining` total order over slots
/// `pos..`, in descending lexicographic order.
fn fill_tier(current: &mut [u8], pos: usize, remaining: usize, visit: &mut impl FnMut(&[u8])) {
    let m = current.len();
    if m == 0 {
        if remaining == 0 {
            visit(current);
        }
        return;
    }
    if pos == m - 1 {
        current[pos] = remaining as u8;
        visit(current);
        current[pos] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v as u8;
        fill_tier(current, pos + 1, remaining - v, visit);
    }
    current[pos] = 0;
}
