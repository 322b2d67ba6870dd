//! Fitness cache keyed by genome identifier.
//!
//! On disk the cache is UTF-8 text, one entry per line:
//!
//! ```text
//! 7f694b8b21cc61e12a4d5653004d5d2c845cbbcb673397f948a0af27 0.9134
//! ```
//!
//! Entries are written in identifier order. Fitness values use the shortest
//! decimal that parses back to the same `f64`, so a store/load round trip is
//! exact. Lines that fail to parse are skipped with a warning.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::genome::Identifier;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitnessCache {
    entries: BTreeMap<Identifier, f64>,
}

impl FitnessCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &Identifier) -> Option<f64> {
        self.entries.get(id).copied()
    }

    pub fn contains(&self, id: &Identifier) -> bool {
        self.entries.contains_key(id)
    }

    /// Records a fitness. An existing entry is kept as is; returns whether
    /// the value was stored.
    pub fn insert(&mut self, id: Identifier, fitness: f64) -> bool {
        match self.entries.get(&id) {
            Some(&old) => {
                if old != fitness {
                    warn!("cache already holds {old} for {id}; ignoring {fitness}");
                }
                false
            }
            None => {
                self.entries.insert(id, fitness);
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Identifier, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 72);
        for (id, fitness) in &self.entries {
            out.push_str(&format!("{id} {fitness}\n"));
        }
        out
    }

    /// Parses cache text, returning the cache and the 1-based numbers of the
    /// lines that were skipped.
    pub fn parse(text: &str) -> (Self, Vec<usize>) {
        let mut cache = FitnessCache::new();
        let mut skipped = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(line) {
                Some((id, fitness)) => {
                    cache.insert(id, fitness);
                }
                None => skipped.push(i + 1),
            }
        }
        (cache, skipped)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading cache {}", path.display()), e))?;
        let (cache, skipped) = Self::parse(&text);
        for line in &skipped {
            warn!("{}:{line}: skipping malformed cache entry", path.display());
        }
        Ok(cache)
    }

    /// Like [`load`](Self::load) but a missing file gives an empty cache.
    pub fn load_or_empty(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

fn parse_line(line: &str) -> Option<(Identifier, f64)> {
    let mut parts = line.split_whitespace();
    let id = Identifier::from_hex(parts.next()?)?;
    let fitness: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !(0.0..=1.0).contains(&fitness) {
        return None;
    }
    Some((id, fitness))
}

pub fn cache_load(path: &Path) -> Result<FitnessCache> {
    FitnessCache::load(path)
}

pub fn cache_store(cache: &FitnessCache, path: &Path) -> Result<()> {
    cache.store(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;

    fn id(text: &str) -> Identifier {
        text.parse::<Genome>().unwrap().identifier()
    }

    #[test]
    fn store_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fitness.cache");
        let mut cache = FitnessCache::new();
        cache.insert(id("S:64:64"), 0.1 + 0.2);
        cache.insert(id("P:max"), 1.0 / 3.0);
        cache.insert(id("P:mean"), 0.0);
        cache_store(&cache, &path).unwrap();
        assert_eq!(cache_load(&path).unwrap(), cache);
    }

    #[test]
    fn empty_file_is_empty_cache() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.cache");
        fs::write(&path, "").unwrap();
        assert!(cache_load(&path).unwrap().is_empty());
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("absent.cache");
        assert!(matches!(cache_load(&path), Err(Error::Io { .. })));
        assert!(FitnessCache::load_or_empty(&path).unwrap().is_empty());
    }

    #[test]
    fn one_malformed_line_among_hundred() {
        let mut lines: Vec<String> =
            (0..100).map(|i| format!("{} {}", id(&format!("S:{}:64", i + 1)), i as f64 / 100.0)).collect();
        lines[41] = "not-an-identifier 0.5".to_string();
        let (cache, skipped) = FitnessCache::parse(&lines.join("\n"));
        assert_eq!(cache.len(), 99);
        assert_eq!(skipped, vec![42]);
    }

    #[test]
    fn rejects_out_of_range_and_trailing_fields() {
        let good = id("P:max");
        let text = format!("{good} 1.5\n{good} 0.5 extra\n{good}\n{good} nan\n");
        let (cache, skipped) = FitnessCache::parse(&text);
        assert!(cache.is_empty());
        assert_eq!(skipped, vec![1, 2, 3, 4]);
    }

    #[test]
    fn existing_entries_are_not_overwritten() {
        let mut cache = FitnessCache::new();
        assert!(cache.insert(id("P:max"), 0.4));
        assert!(!cache.insert(id("P:max"), 0.9));
        assert_eq!(cache.get(&id("P:max")), Some(0.4));
    }
}
