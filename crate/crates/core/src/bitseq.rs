//! Static bit sequence with a sampled rank directory.
//!
//! Bits are addressed most-significant-first: logical bit `i` lives in word
//! `i / 64` at bit position `63 - i % 64`, and serializes to byte `i / 8` at
//! bit position `7 - i % 8`. Every k²-tree navigation step is a rank query
//! over one of these sequences.

use std::io::{Read, Write};

use crate::wire::{self, FormatError};

/// Bits between two absolute counters of the rank directory.
pub const DEFAULT_SAMPLE: usize = 512;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct BitSeq {
    len: usize,
    words: Vec<u64>,
    sample: usize,
    /// `rank_dir[j]` is the number of ones in `[0, j * sample)`.
    rank_dir: Vec<u64>,
}

impl std::fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitSeq(len={}, ones={}, ", self.len, self.count_ones())?;
        for i in 0..self.len.min(64) {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        if self.len > 64 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

impl Default for BitSeq {
    fn default() -> Self {
        BitSeqBuilder::new().finish()
    }
}

impl BitSeq {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut builder = BitSeqBuilder::new();
        builder.extend(bits);
        builder.finish()
    }

    /// Like [`BitSeq::from_bits`] with a custom directory sample rate, which
    /// must be a positive multiple of 64.
    pub fn from_bits_with_sample<I: IntoIterator<Item = bool>>(bits: I, sample: usize) -> Self {
        let mut builder = BitSeqBuilder::new();
        builder.extend(bits);
        builder.finish_with_sample(sample)
    }

    fn from_words(words: Vec<u64>, len: usize, sample: usize) -> Self {
        assert!(
            sample > 0 && sample.is_multiple_of(WORD),
            "rank sample must be a positive multiple of {WORD}, got {sample}"
        );
        debug_assert_eq!(words.len(), len.div_ceil(WORD));
        let words_per_sample = sample / WORD;
        let mut rank_dir = Vec::with_capacity(len / sample + 1);
        let mut acc = 0u64;
        rank_dir.push(0);
        for (j, chunk) in words.chunks(words_per_sample).enumerate() {
            acc += chunk.iter().map(|w| u64::from(w.count_ones())).sum::<u64>();
            // Only complete samples get a counter; the tail is scanned.
            if (j + 1) * sample <= len {
                rank_dir.push(acc);
            }
        }
        BitSeq {
            len,
            words,
            sample,
            rank_dir,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sample(&self) -> usize {
        self.sample
    }

    /// Returns bit `i`, or `None` when `i >= len`.
    pub fn access(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bit(i))
    }

    /// Number of ones in `[0, i)`, or `None` when `i > len`.
    pub fn rank1(&self, i: usize) -> Option<usize> {
        (i <= self.len).then(|| self.rank(i))
    }

    pub fn count_ones(&self) -> usize {
        self.rank(self.len)
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (WORD - 1 - i % WORD)) & 1 == 1
    }

    #[inline]
    pub(crate) fn rank(&self, i: usize) -> usize {
        debug_assert!(i <= self.len);
        let block = i / self.sample;
        let mut count = self.rank_dir[block];
        let first_word = block * (self.sample / WORD);
        let last_word = i / WORD;
        for w in &self.words[first_word..last_word] {
            count += u64::from(w.count_ones());
        }
        let rem = i % WORD;
        if rem > 0 {
            count += u64::from((self.words[last_word] >> (WORD - rem)).count_ones());
        }
        count as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Bytes of the serialized form: 8-byte length plus packed payload.
    pub fn serialized_len(&self) -> usize {
        8 + self.len.div_ceil(8)
    }

    /// In-memory size of the rank directory, in bits.
    pub fn rank_overhead_bits(&self) -> usize {
        self.rank_dir.len() * 64
    }

    /// Writes `len` as u64 little-endian followed by `ceil(len / 8)` payload
    /// bytes. The rank directory is not written.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        wire::write_u64(w, self.len as u64)?;
        let mut remaining = self.len.div_ceil(8);
        for word in &self.words {
            let bytes = word.to_be_bytes();
            let take = remaining.min(8);
            w.write_all(&bytes[..take])?;
            remaining -= take;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let len = wire::read_u64(r)?;
        let len = usize::try_from(len)
            .map_err(|_| wire::corrupt(format!("bit length {len} does not fit in memory")))?;
        let payload = wire::read_bytes(r, len.div_ceil(8) as u64)?;
        let mut words = Vec::with_capacity(len.div_ceil(WORD));
        for chunk in payload.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words.push(u64::from_be_bytes(buf));
        }
        let tail = len % WORD;
        if tail > 0 {
            let last = *words.last().expect("non-empty when tail > 0");
            if last << tail != 0 {
                return Err(wire::corrupt("nonzero padding bits after end of bit sequence"));
            }
        }
        Ok(BitSeq::from_words(words, len, DEFAULT_SAMPLE))
    }
}

/// Append-only construction of a [`BitSeq`].
#[derive(Debug, Default, Clone)]
pub struct BitSeqBuilder {
    len: usize,
    words: Vec<u64>,
}

impl BitSeqBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let off = self.len % WORD;
        if off == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (WORD - 1 - off);
        }
        self.len += 1;
    }

    pub fn finish(self) -> BitSeq {
        self.finish_with_sample(DEFAULT_SAMPLE)
    }

    pub fn finish_with_sample(self, sample: usize) -> BitSeq {
        BitSeq::from_words(self.words, self.len, sample)
    }
}

impl Extend<bool> for BitSeqBuilder {
    fn extend<T: IntoIterator<Item = bool>>(&mut self, iter: T) {
        for bit in iter {
            self.push(bit);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn prefix_counts(bits: &[bool]) -> Vec<usize> {
        let mut out = Vec::with_capacity(bits.len() + 1);
        let mut acc = 0;
        out.push(0);
        for &b in bits {
            acc += b as usize;
            out.push(acc);
        }
        out
    }

    fn random_bits(rng: &mut StdRng, n: usize, density: f64) -> Vec<bool> {
        (0..n).map(|_| rng.gen_bool(density)).collect()
    }

    #[test]
    fn empty_sequence() {
        let seq = BitSeq::from_bits([]);
        assert_eq!(seq.len(), 0);
        assert_eq!(seq.rank1(0), Some(0));
        assert_eq!(seq.access(0), None);
        assert_eq!(seq.rank1(1), None);
    }

    #[test]
    fn small_examples() {
        let seq = BitSeq::from_bits([true, false, true, true]);
        assert_eq!(seq.len(), 4);
        assert_eq!(seq.rank1(4), Some(3));
        assert_eq!(seq.rank1(3), Some(2));
        assert_eq!(seq.rank1(0), Some(0));

        let seq = BitSeq::from_bits([true, false, true]);
        assert_eq!(seq.access(1), Some(false));
        assert_eq!(seq.access(2), Some(true));
        assert_eq!(seq.access(3), None);
        assert_eq!(seq.rank1(4), None);
    }

    #[test]
    fn rank_matches_prefix_count_on_10k_bits() {
        let mut rng = StdRng::seed_from_u64(7);
        let bits = random_bits(&mut rng, 10_000, 0.4);
        let seq = BitSeq::from_bits(bits.iter().copied());
        let oracle = prefix_counts(&bits);
        for i in 0..=bits.len() {
            assert_eq!(seq.rank1(i), Some(oracle[i]), "rank1({i})");
        }
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(seq.access(i), Some(b));
        }
    }

    #[test]
    fn rank_sampled_on_100k_bits() {
        let mut rng = StdRng::seed_from_u64(11);
        let bits = random_bits(&mut rng, 100_000, 0.1);
        let seq = BitSeq::from_bits(bits.iter().copied());
        let oracle = prefix_counts(&bits);
        for _ in 0..1000 {
            let i = rng.gen_range(0..=bits.len());
            assert_eq!(seq.rank1(i), Some(oracle[i]));
        }
        assert_eq!(seq.count_ones(), oracle[bits.len()]);
    }

    #[test]
    fn directory_size_is_bounded() {
        for len in [0, 1, 511, 512, 513, 5000, 65_536] {
            let seq = BitSeq::from_bits(std::iter::repeat_n(true, len));
            assert!(seq.rank_dir.len() <= len / seq.sample() + 1, "len {len}");
            assert_eq!(seq.count_ones(), len);
        }
    }

    #[test]
    fn serialized_bytes_are_msb_first() {
        let seq = BitSeq::from_bits([true, false, true, true, false, false, false, false, true]);
        let mut buf = Vec::new();
        seq.write_to(&mut buf).unwrap();
        assert_eq!(buf, [9, 0, 0, 0, 0, 0, 0, 0, 0b1011_0000, 0b1000_0000]);
        assert_eq!(buf.len(), seq.serialized_len());
    }

    #[test]
    fn rejects_nonzero_padding() {
        let buf = [3u8, 0, 0, 0, 0, 0, 0, 0, 0b1111_0000];
        assert!(BitSeq::read_from(&mut &buf[..]).is_err());
    }

    #[test]
    fn rejects_truncated_payload() {
        let buf = [100u8, 0, 0, 0, 0, 0, 0, 0, 0xff];
        assert!(BitSeq::read_from(&mut &buf[..]).is_err());
    }

    proptest! {
        #[test]
        fn rank_is_prefix_sum(bits in proptest::collection::vec(any::<bool>(), 0..3000),
                              sample_words in 1usize..12) {
            let seq = BitSeq::from_bits_with_sample(bits.iter().copied(), sample_words * 64);
            let oracle = prefix_counts(&bits);
            for i in 0..=bits.len() {
                prop_assert_eq!(seq.rank(i), oracle[i]);
            }
            for i in 0..bits.len() {
                prop_assert_eq!(seq.rank(i + 1) - seq.rank(i), bits[i] as usize);
            }
        }

        #[test]
        fn serialization_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let seq = BitSeq::from_bits(bits.iter().copied());
            let mut buf = Vec::new();
            seq.write_to(&mut buf).unwrap();
            let back = BitSeq::read_from(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back, seq);
        }
    }
}
