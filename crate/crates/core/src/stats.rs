//! Size and compression accounting for a stored dataset.

use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::dictionary::Sizes;
use crate::k2tree::TreeSize;

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateStats {
    pub id: u64,
    pub ones: u64,
    pub size: TreeSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreStats {
    pub triples: u64,
    pub sizes: Sizes,
    pub k: u32,
    /// Side of every tree's padded matrix.
    pub matrix_side: u64,
    pub predicates: Vec<PredicateStats>,
    /// Bytes of the triples section (header plus trees).
    pub triples_bytes: u64,
    pub dictionary_bytes: u64,
    pub total_bytes: u64,
}

impl StoreStats {
    pub fn of(ds: &Dataset) -> Self {
        let store = ds.store();
        let predicates = store
            .trees()
            .iter()
            .enumerate()
            .map(|(i, t)| PredicateStats {
                id: i as u64 + 1,
                ones: t.ones(),
                size: t.bit_size(),
            })
            .collect();
        let triples_bytes = store.serialized_len() as u64;
        let dictionary_bytes = ds.dictionary().serialized_len() as u64;
        StoreStats {
            triples: store.num_triples(),
            sizes: store.sizes(),
            k: store.k(),
            matrix_side: crate::k2tree::matrix_side(store.sizes().matrix_side(), store.k())
                .map(|(_, n)| n)
                .unwrap_or(0),
            predicates,
            triples_bytes,
            dictionary_bytes,
            total_bytes: triples_bytes + dictionary_bytes,
        }
    }

    /// Bits of the triples section per stored triple; `None` when empty.
    pub fn bits_per_triple(&self) -> Option<f64> {
        (self.triples > 0).then(|| (8 * self.triples_bytes) as f64 / self.triples as f64)
    }

    /// Bytes of the same triples as a flat list of three 64-bit IDs.
    pub fn flat_bytes(&self) -> u64 {
        self.triples * 24
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let s = &self.sizes;
        let _ = writeln!(out, "triples:            {}", self.triples);
        let _ = writeln!(
            out,
            "terms:              |SO|={} |S|={} |O|={} |P|={}",
            s.shared, s.subjects, s.objects, s.predicates
        );
        let _ = writeln!(out, "k:                  {} (matrix side {})", self.k, self.matrix_side);
        let _ = writeln!(out, "triples section:    {} bytes", self.triples_bytes);
        let _ = writeln!(out, "dictionary section: {} bytes", self.dictionary_bytes);
        let _ = writeln!(out, "total:              {} bytes", self.total_bytes);
        let bpt = self
            .bits_per_triple()
            .map_or_else(|| "n/a".to_string(), |b| format!("{b:.3}"));
        let _ = writeln!(out, "bits per triple:    {bpt}");
        if !self.predicates.is_empty() {
            let _ = writeln!(out, "{:>10} {:>12} {:>12} {:>12} {:>12}", "predicate", "triples", "T bits", "L bits", "rank bits");
            for p in &self.predicates {
                let _ = writeln!(
                    out,
                    "{:>10} {:>12} {:>12} {:>12} {:>12}",
                    p.id, p.ones, p.size.t_bits, p.size.l_bits, p.size.rank_bits
                );
            }
        }
        out
    }

    /// One `key=value` pair per line.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let s = &self.sizes;
        for (key, value) in [
            ("triples", self.triples),
            ("so", s.shared),
            ("s", s.subjects),
            ("o", s.objects),
            ("p", s.predicates),
            ("k", u64::from(self.k)),
            ("matrix_side", self.matrix_side),
            ("triples_bytes", self.triples_bytes),
            ("dictionary_bytes", self.dictionary_bytes),
            ("total_bytes", self.total_bytes),
        ] {
            let _ = writeln!(out, "{key}={value}");
        }
        match self.bits_per_triple() {
            Some(b) => {
                let _ = writeln!(out, "bits_per_triple={b:.6}");
            }
            None => out.push_str("bits_per_triple=n/a\n"),
        }
        for p in &self.predicates {
            let _ = writeln!(
                out,
                "predicate.{}.triples={}\npredicate.{}.t_bits={}\npredicate.{}.l_bits={}\npredicate.{}.rank_bits={}",
                p.id, p.ones, p.id, p.size.t_bits, p.id, p.size.l_bits, p.id, p.size.rank_bits
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ParseMode;

    #[test]
    fn empty_dataset_reports_na() {
        let (ds, _) = Dataset::from_ntriples(&b""[..], 2, ParseMode::Lenient).unwrap();
        let stats = StoreStats::of(&ds);
        assert_eq!(stats.triples, 0);
        assert_eq!(stats.bits_per_triple(), None);
        assert!(stats.render_kv().contains("bits_per_triple=n/a"));
        assert!(stats.render_text().contains("n/a"));
    }

    #[test]
    fn per_predicate_ones_sum_to_triples() {
        let text = "<a> <p> <b> .\n<b> <p> <c> .\n<a> <q> <c> .\n";
        let (ds, _) = Dataset::from_ntriples(text.as_bytes(), 2, ParseMode::Strict).unwrap();
        let stats = StoreStats::of(&ds);
        assert_eq!(stats.predicates.iter().map(|p| p.ones).sum::<u64>(), stats.triples);
        assert_eq!(stats.total_bytes as usize, ds.to_bytes().len());
        let bpt = stats.bits_per_triple().unwrap();
        assert!((bpt - (8 * stats.triples_bytes) as f64 / 3.0).abs() < 1e-9);
    }
}
