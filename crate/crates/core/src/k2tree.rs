//! Static k²-tree over an `n × n` binary matrix.
//!
//! The matrix is recursively split into `k × k` sub-blocks. Each level of
//! the tree stores one bit per sub-block of every non-empty parent, and a
//! block of zeros is never expanded. Internal levels are concatenated into
//! `T`, the last level into `L`. Children of the 1-bit at position `p` of
//! `T` start at position `rank1(T, p + 1) * k²` of the concatenation `T ‖ L`.
//!
//! An empty matrix has empty `T` and `L`. A non-empty tree always has at
//! least one level, so `n >= k`.

use std::io::{Read, Write};

use thiserror::Error;

use crate::bitseq::{BitSeq, BitSeqBuilder};
use crate::wire::{self, FormatError};

pub const DEFAULT_K: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum K2TreeError {
    #[error("branching factor k = {0} is invalid, must be in 2..=65535")]
    InvalidK(u32),
    #[error("point ({row}, {col}) lies outside the {side} x {side} matrix")]
    PointOutOfRange { row: u64, col: u64, side: u64 },
    #[error("coordinate {coord} is outside the {n} x {n} matrix")]
    CoordOutOfRange { coord: u64, n: u64 },
    #[error("invalid range rows {row_lo}..={row_hi}, cols {col_lo}..={col_hi} for matrix side {n}")]
    InvalidRange {
        row_lo: u64,
        row_hi: u64,
        col_lo: u64,
        col_hi: u64,
        n: u64,
    },
    #[error("matrix side {side} is too large for k = {k}")]
    SideTooLarge { side: u64, k: u32 },
}

/// Bit accounting for one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TreeSize {
    /// Bits of the internal levels.
    pub t_bits: u64,
    /// Bits of the leaf level.
    pub l_bits: u64,
    /// Bits of the serialized form, header and byte padding included.
    pub serialized_bits: u64,
    /// In-memory rank directories, not serialized.
    pub rank_bits: u64,
}

impl TreeSize {
    pub fn total_bits(&self) -> u64 {
        self.serialized_bits + self.rank_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K2Tree {
    k: u32,
    n: u64,
    height: u32,
    ones: u64,
    t: BitSeq,
    l: BitSeq,
}

/// Smallest height `h >= 1` with `k^h >= side`, and `k^h`.
pub fn matrix_side(side: u64, k: u32) -> Result<(u32, u64), K2TreeError> {
    if !(2..=u32::from(u16::MAX)).contains(&k) {
        return Err(K2TreeError::InvalidK(k));
    }
    let k64 = u64::from(k);
    let mut height = 1u32;
    let mut n = k64;
    while n < side {
        n = n
            .checked_mul(k64)
            .ok_or(K2TreeError::SideTooLarge { side, k })?;
        height += 1;
    }
    Ok((height, n))
}

impl K2Tree {
    /// Builds the tree for a deduplicated point set inside a `side × side`
    /// matrix. The matrix is padded with zeros up to the next power of `k`.
    pub fn build(points: &[(u64, u64)], side: u64, k: u32) -> Result<Self, K2TreeError> {
        let (height, n) = matrix_side(side, k)?;
        if let Some(&(row, col)) = points.iter().find(|&&(r, c)| r >= side || c >= side) {
            return Err(K2TreeError::PointOutOfRange { row, col, side });
        }
        let k64 = u64::from(k);
        let kk = (k64 * k64) as usize;

        // Sorting by the base-k² digit string (one digit per level) puts every
        // subtree's points in one contiguous run, in level order.
        let digit = |(r, c): (u64, u64), shift: u64| -> usize {
            (((r / shift) % k64) * k64 + (c / shift) % k64) as usize
        };
        let shifts: Vec<u64> = (1..=height).map(|l| n / k64.pow(l)).collect();
        let morton = |p: (u64, u64)| -> u128 {
            shifts
                .iter()
                .fold(0u128, |acc, &s| acc * kk as u128 + digit(p, s) as u128)
        };
        let mut sorted: Vec<(u128, (u64, u64))> = points.iter().map(|&p| (morton(p), p)).collect();
        sorted.sort_unstable_by_key(|&(key, _)| key);
        sorted.dedup_by_key(|&mut (key, _)| key);
        let ones = sorted.len() as u64;

        let mut t = BitSeqBuilder::new();
        let mut l = BitSeqBuilder::new();
        if !sorted.is_empty() {
            let mut nodes = Vec::with_capacity(1);
            nodes.push(0..sorted.len());
            for (level, &shift) in shifts.iter().enumerate() {
                let last = level + 1 == height as usize;
                let out = if last { &mut l } else { &mut t };
                let mut next = Vec::new();
                for node in nodes {
                    let mut block = vec![false; kk];
                    let mut start = node.start;
                    while start < node.end {
                        let d = digit(sorted[start].1, shift);
                        let mut end = start + 1;
                        while end < node.end && digit(sorted[end].1, shift) == d {
                            end += 1;
                        }
                        block[d] = true;
                        if !last {
                            next.push(start..end);
                        }
                        start = end;
                    }
                    out.extend(block);
                }
                nodes = next;
            }
        }
        Ok(K2Tree {
            k,
            n,
            height,
            ones,
            t: t.finish(),
            l: l.finish(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Side of the padded matrix, `k^height`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of 1-cells.
    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn is_empty(&self) -> bool {
        self.ones == 0
    }

    pub fn t_bits(&self) -> &BitSeq {
        &self.t
    }

    pub fn l_bits(&self) -> &BitSeq {
        &self.l
    }

    fn kk(&self) -> usize {
        (self.k * self.k) as usize
    }

    fn check_coord(&self, coord: u64) -> Result<(), K2TreeError> {
        if coord >= self.n {
            Err(K2TreeError::CoordOutOfRange { coord, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Bit at position `pos` of `T ‖ L`.
    #[inline]
    fn bit(&self, pos: usize) -> bool {
        let tl = self.t.len();
        if pos < tl {
            self.t.bit(pos)
        } else {
            self.l.bit(pos - tl)
        }
    }

    /// Start of the child block of the 1-bit at `T` position `pos`.
    #[inline]
    fn children(&self, pos: usize) -> usize {
        self.t.rank(pos + 1) * self.kk()
    }

    pub fn contains(&self, row: u64, col: u64) -> Result<bool, K2TreeError> {
        self.check_coord(row)?;
        self.check_coord(col)?;
        Ok(self.contains_unchecked(row, col))
    }

    pub(crate) fn contains_unchecked(&self, mut row: u64, mut col: u64) -> bool {
        if self.l.is_empty() {
            return false;
        }
        let k = u64::from(self.k);
        let mut size = self.n;
        let mut base = 0usize;
        for level in 0..self.height {
            size /= k;
            let child = ((row / size) * k + col / size) as usize;
            row %= size;
            col %= size;
            let pos = base + child;
            if level + 1 == self.height {
                return self.l.bit(pos - self.t.len());
            }
            if !self.t.bit(pos) {
                return false;
            }
            base = self.children(pos);
        }
        unreachable!("loop returns at the leaf level")
    }

    /// Columns set in `row`, ascending.
    pub fn direct_neighbors(&self, row: u64) -> Result<Vec<u64>, K2TreeError> {
        self.check_coord(row)?;
        Ok(self.direct_unchecked(row))
    }

    pub(crate) fn direct_unchecked(&self, row: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if !self.l.is_empty() {
            self.walk_line(0, self.n, row, 0, true, &mut out);
        }
        out
    }

    /// Rows set in `col`, ascending.
    pub fn reverse_neighbors(&self, col: u64) -> Result<Vec<u64>, K2TreeError> {
        self.check_coord(col)?;
        Ok(self.reverse_unchecked(col))
    }

    pub(crate) fn reverse_unchecked(&self, col: u64) -> Vec<u64> {
        let mut out = Vec::new();
        if !self.l.is_empty() {
            self.walk_line(0, self.n, col, 0, false, &mut out);
        }
        out
    }

    /// Walks one row (`forward`) or one column of the block whose children
    /// start at `base`. `fixed` is the row/column offset inside the block and
    /// `offset` the absolute position of the block along the free axis.
    fn walk_line(
        &self,
        base: usize,
        size: u64,
        fixed: u64,
        offset: u64,
        forward: bool,
        out: &mut Vec<u64>,
    ) {
        let k = u64::from(self.k);
        let sub = size / k;
        let band = fixed / sub;
        let leaf = sub == 1;
        for j in 0..k {
            let child = if forward { band * k + j } else { j * k + band };
            let pos = base + child as usize;
            if !self.bit(pos) {
                continue;
            }
            let at = offset + j * sub;
            if leaf {
                out.push(at);
            } else {
                self.walk_line(self.children(pos), sub, fixed % sub, at, forward, out);
            }
        }
    }

    /// All 1-cells inside the inclusive rectangle, in row-major order.
    pub fn range(
        &self,
        row_lo: u64,
        row_hi: u64,
        col_lo: u64,
        col_hi: u64,
    ) -> Result<Vec<(u64, u64)>, K2TreeError> {
        if row_lo > row_hi || col_lo > col_hi || row_hi >= self.n || col_hi >= self.n {
            return Err(K2TreeError::InvalidRange {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
                n: self.n,
            });
        }
        Ok(self.range_unchecked(row_lo, row_hi, col_lo, col_hi))
    }

    pub(crate) fn range_unchecked(
        &self,
        row_lo: u64,
        row_hi: u64,
        col_lo: u64,
        col_hi: u64,
    ) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        if !self.l.is_empty() {
            let rect = Rect {
                row_lo,
                row_hi,
                col_lo,
                col_hi,
            };
            self.walk_range(0, self.n, 0, 0, &rect, &mut out);
            out.sort_unstable();
        }
        out
    }

    /// Every stored point, row-major.
    pub fn points(&self) -> Vec<(u64, u64)> {
        self.range_unchecked(0, self.n - 1, 0, self.n - 1)
    }

    fn walk_range(
        &self,
        base: usize,
        size: u64,
        row0: u64,
        col0: u64,
        rect: &Rect,
        out: &mut Vec<(u64, u64)>,
    ) {
        let k = u64::from(self.k);
        let sub = size / k;
        for i in 0..k {
            let r = row0 + i * sub;
            if r > rect.row_hi || r + sub - 1 < rect.row_lo {
                continue;
            }
            for j in 0..k {
                let c = col0 + j * sub;
                if c > rect.col_hi || c + sub - 1 < rect.col_lo {
                    continue;
                }
                let pos = base + (i * k + j) as usize;
                if !self.bit(pos) {
                    continue;
                }
                if sub == 1 {
                    out.push((r, c));
                } else {
                    self.walk_range(self.children(pos), sub, r, c, rect, out);
                }
            }
        }
    }

    pub fn bit_size(&self) -> TreeSize {
        TreeSize {
            t_bits: self.t.len() as u64,
            l_bits: self.l.len() as u64,
            serialized_bits: 8 * self.serialized_len() as u64,
            rank_bits: (self.t.rank_overhead_bits() + self.l.rank_overhead_bits()) as u64,
        }
    }

    pub fn serialized_len(&self) -> usize {
        2 + 2 + 8 + self.t.serialized_len() + self.l.serialized_len()
    }

    /// `k` (u16), `height` (u16), `ones` (u64), then `T` and `L`, all
    /// little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        wire::write_u16(w, self.k as u16)?;
        wire::write_u16(w, self.height as u16)?;
        wire::write_u64(w, self.ones)?;
        self.t.write_to(w)?;
        self.l.write_to(w)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let k = u32::from(wire::read_u16(r)?);
        let height = u32::from(wire::read_u16(r)?);
        let ones = wire::read_u64(r)?;
        let t = BitSeq::read_from(r)?;
        let l = BitSeq::read_from(r)?;
        if k < 2 || height == 0 {
            return Err(wire::corrupt(format!("invalid k2-tree header k={k} height={height}")));
        }
        let n = u64::from(k)
            .checked_pow(height)
            .ok_or_else(|| wire::corrupt(format!("k={k} height={height} overflows")))?;
        let kk = (k * k) as usize;
        if t.len() % kk != 0 || l.len() % kk != 0 {
            return Err(wire::corrupt("k2-tree levels are not whole blocks"));
        }
        if l.count_ones() as u64 != ones {
            return Err(wire::corrupt(format!(
                "leaf level holds {} ones, header says {ones}",
                l.count_ones()
            )));
        }
        if l.is_empty() {
            if !t.is_empty() || ones != 0 {
                return Err(wire::corrupt("empty leaf level with non-empty tree"));
            }
        } else {
            // Every 1-bit of T owns one block, plus the root block.
            let blocks = (t.len() + l.len()) / kk;
            if blocks != t.count_ones() + 1 {
                return Err(wire::corrupt("internal ones do not match block count"));
            }
            if height == 1 && !t.is_empty() {
                return Err(wire::corrupt("single-level tree with internal bits"));
            }
        }
        Ok(K2Tree {
            k,
            n,
            height,
            ones,
            t,
            l,
        })
    }
}

struct Rect {
    row_lo: u64,
    row_hi: u64,
    col_lo: u64,
    col_hi: u64,
}
