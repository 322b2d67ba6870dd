//! Variable-length genome encoding.
//!
//! A genome is an ordered, non-empty list of layer genes. Each gene is
//! either a skip layer (two stacked 3x3 convolutions with an identity
//! shortcut, parameterised by the two feature-map counts) or a 2x2 pooling
//! layer (parameterised by its pooling type).
//!
//! The canonical text form doubles as the on-disk and command-line genome
//! format:
//!
//! ```text
//! S:64:128-P:max-S:128:256-P:mean
//! ```
//!
//! Genes are joined by `-`; a skip gene is `S:<f1>:<f2>`, a pool gene is
//! `P:max` or `P:mean`. The [`Identifier`] of a genome is the SHA-224 digest
//! of these bytes, rendered as 56 lowercase hex characters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha224};

use crate::error::ParseError;

/// Pooling operator of a pool gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolType {
    Max,
    Mean,
}

impl PoolType {
    pub fn as_str(self) -> &'static str {
        match self {
            PoolType::Max => "max",
            PoolType::Mean => "mean",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            PoolType::Max => PoolType::Mean,
            PoolType::Mean => PoolType::Max,
        }
    }
}

/// Feature-map counts of the two convolutions inside a skip layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkipGene {
    pub f1: u32,
    pub f2: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoolGene {
    pub pool_type: PoolType,
}

/// One node of the genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerGene {
    Skip(SkipGene),
    Pool(PoolGene),
}

impl LayerGene {
    pub fn skip(f1: u32, f2: u32) -> Self {
        LayerGene::Skip(SkipGene { f1, f2 })
    }

    pub fn pool(pool_type: PoolType) -> Self {
        LayerGene::Pool(PoolGene { pool_type })
    }

    /// Numeric type tag: 1 for skip layers, 2 for pooling layers.
    pub fn type_tag(&self) -> u8 {
        match self {
            LayerGene::Skip(_) => 1,
            LayerGene::Pool(_) => 2,
        }
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, LayerGene::Skip(_))
    }

    pub fn is_pool(&self) -> bool {
        matches!(self, LayerGene::Pool(_))
    }
}

impl fmt::Display for LayerGene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerGene::Skip(s) => write!(f, "S:{}:{}", s.f1, s.f2),
            LayerGene::Pool(p) => write!(f, "P:{}", p.pool_type.as_str()),
        }
    }
}

/// Ordered, non-empty sequence of layer genes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    layers: Vec<LayerGene>,
}

impl Genome {
    /// Builds a genome, returning `None` for an empty layer list.
    pub fn new(layers: Vec<LayerGene>) -> Option<Self> {
        if layers.is_empty() {
            None
        } else {
            Some(Genome { layers })
        }
    }

    pub fn layers(&self) -> &[LayerGene] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_layers(self) -> Vec<LayerGene> {
        self.layers
    }

    pub fn skip_count(&self) -> usize {
        self.layers.iter().filter(|g| g.is_skip()).count()
    }

    pub fn pool_count(&self) -> usize {
        self.layers.iter().filter(|g| g.is_pool()).count()
    }

    pub(crate) fn insert(&mut self, index: usize, gene: LayerGene) {
        self.layers.insert(index, gene);
    }

    /// Removes the gene at `index` unless it is the last one left.
    pub(crate) fn remove(&mut self, index: usize) -> Option<LayerGene> {
        if self.layers.len() > 1 {
            Some(self.layers.remove(index))
        } else {
            None
        }
    }

    pub(crate) fn gene_mut(&mut self, index: usize) -> &mut LayerGene {
        &mut self.layers[index]
    }

    /// Canonical byte encoding, see the module docs for the layout.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.to_string().into_bytes()
    }

    pub fn identifier(&self) -> Identifier {
        Identifier::of_bytes(&self.canonical_bytes())
    }

    /// Checks the genome against an input of `input_spatial` x `input_spatial`
    /// pixels.
    pub fn validate(&self, input_spatial: u32) -> ValidationReport {
        ValidationReport::for_genome(self, input_spatial)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, gene) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{gene}")?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_genome(s)
    }
}

impl Serialize for Genome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Genome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

pub fn canonical_serialize(genome: &Genome) -> Vec<u8> {
    genome.canonical_bytes()
}

pub fn identifier(genome: &Genome) -> Identifier {
    genome.identifier()
}

/// Parses the canonical text form. Surrounding whitespace is ignored so that
/// genome files ending in a newline load cleanly.
pub fn parse_genome(text: &str) -> Result<Genome, ParseError> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim();
    if body.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut layers = Vec::new();
    let mut offset = lead;
    for token in body.split('-') {
        layers.push(parse_gene(token, offset)?);
        offset += token.len() + 1;
    }
    Ok(Genome { layers })
}

fn parse_gene(token: &str, offset: usize) -> Result<LayerGene, ParseError> {
    let bad = |reason: &str| ParseError::BadToken { token: token.to_string(), offset, reason: reason.to_string() };
    let parts: Vec<&str> = token.split(':').collect();
    match parts.as_slice() {
        ["S", f1, f2] => {
            let f1 = parse_feature_maps(f1).ok_or_else(|| bad("f1 must be a positive integer"))?;
            let f2 = parse_feature_maps(f2).ok_or_else(|| bad("f2 must be a positive integer"))?;
            Ok(LayerGene::skip(f1, f2))
        }
        ["P", "max"] => Ok(LayerGene::pool(PoolType::Max)),
        ["P", "mean"] => Ok(LayerGene::pool(PoolType::Mean)),
        ["P", _] => Err(bad("pool type must be `max` or `mean`")),
        _ => Err(bad("expected `S:<f1>:<f2>`, `P:max` or `P:mean`")),
    }
}

// Digits only: `u32::from_str` would also accept a leading `+`, which would
// break the one-text-per-genome property the identifier relies on.
fn parse_feature_maps(text: &str) -> Option<u32> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if text.len() > 1 && text.starts_with('0') {
        return None;
    }
    text.parse().ok().filter(|&v| v > 0)
}

/// SHA-224 digest of a genome's canonical serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identifier(String);

impl Identifier {
    pub const HEX_LEN: usize = 56;

    pub fn of_bytes(bytes: &[u8]) -> Self {
        let digest = Sha224::digest(bytes);
        let mut hex = String::with_capacity(Self::HEX_LEN);
        for byte in digest.iter() {
            hex.push_str(&format!("{byte:02x}"));
        }
        Identifier(hex)
    }

    /// Accepts exactly 56 lowercase hex characters.
    pub fn from_hex(hex: &str) -> Option<Self> {
        let ok = hex.len() == Self::HEX_LEN && hex.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        ok.then(|| Identifier(hex.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First eight digest bytes as an integer; used to derive per-job seeds.
    pub fn prefix_u64(&self) -> u64 {
        u64::from_str_radix(&self.0[..16], 16).expect("identifier is hex")
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Identifier {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Identifier {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Identifier::from_hex(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid identifier `{text}`")))
    }
}

/// Outcome of checking a genome against an input size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub pool_count: u32,
    pub max_pools_allowed: u32,
    pub messages: Vec<String>,
}

impl ValidationReport {
    fn for_genome(genome: &Genome, input_spatial: u32) -> Self {
        let max_pools_allowed = max_pools_for(input_spatial);
        let pool_count = genome.pool_count() as u32;
        let mut messages = Vec::new();
        if pool_count > max_pools_allowed {
            messages.push(format!(
                "{pool_count} pooling layers exceed the {max_pools_allowed} allowed for a {input_spatial}-pixel input"
            ));
        }
        for (i, gene) in genome.layers().iter().enumerate() {
            if let LayerGene::Skip(s) = gene {
                if s.f1 == 0 || s.f2 == 0 {
                    messages.push(format!("gene {i} has a zero feature-map count"));
                }
            }
        }
        ValidationReport { valid: messages.is_empty(), pool_count, max_pools_allowed, messages }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            write!(f, "valid ({} of {} pools)", self.pool_count, self.max_pools_allowed)
        } else {
            write!(f, "invalid: {}", self.messages.join("; "))
        }
    }
}

/// floor(log2(input_spatial)); zero for an input of one pixel.
pub fn max_pools_for(input_spatial: u32) -> u32 {
    if input_spatial == 0 {
        0
    } else {
        31 - input_spatial.leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Genome {
        text.parse().unwrap()
    }

    #[test]
    fn canonical_layout() {
        let single = Genome::new(vec![LayerGene::skip(64, 128)]).unwrap();
        assert_eq!(canonical_serialize(&single), b"S:64:128".to_vec());
        let two = Genome::new(vec![LayerGene::skip(64, 64), LayerGene::pool(PoolType::Max)]).unwrap();
        assert_eq!(canonical_serialize(&two), b"S:64:64-P:max".to_vec());
        assert_eq!(canonical_serialize(&two), canonical_serialize(&two.clone()));
    }

    #[test]
    fn empty_genome_is_unrepresentable() {
        assert!(Genome::new(Vec::new()).is_none());
        assert_eq!("".parse::<Genome>(), Err(ParseError::Empty));
        assert_eq!("  \n".parse::<Genome>(), Err(ParseError::Empty));
    }

    #[test]
    fn identifier_matches_reference_digests() {
        // hashlib.sha224(...).hexdigest()
        assert_eq!(g("S:64:128").identifier().as_str(), "7f694b8b21cc61e12a4d5653004d5d2c845cbbcb673397f948a0af27");
        assert_eq!(
            g("S:64:64-P:max").identifier().as_str(),
            "37a7976ca0915df64bfef979259449e81ee47ec4a7f757d9ba68e062"
        );
        assert_eq!(g("P:mean").identifier().as_str(), "46db905363f31222f9d3bfc56e11f5fc25ac21374692f31e73af853e");
    }

    #[test]
    fn identifier_is_stable_across_calls() {
        let genome = g("S:64:128-P:mean-S:256:64");
        let first = genome.identifier();
        for _ in 0..1000 {
            assert_eq!(genome.identifier(), first);
        }
    }

    #[test]
    fn parse_errors_name_token_and_offset() {
        match "S:64:128-P:avg".parse::<Genome>() {
            Err(ParseError::BadToken { token, offset, .. }) => {
                assert_eq!(token, "P:avg");
                assert_eq!(offset, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!("S:0:64".parse::<Genome>(), Err(ParseError::BadToken { offset: 0, .. })));
        assert!(matches!("S:+4:64".parse::<Genome>(), Err(ParseError::BadToken { .. })));
        assert!(matches!("S:064:64".parse::<Genome>(), Err(ParseError::BadToken { .. })));
        assert!(matches!("S:64:64--P:max".parse::<Genome>(), Err(ParseError::BadToken { offset: 8, .. })));
        assert!(matches!("X".parse::<Genome>(), Err(ParseError::BadToken { .. })));
    }

    #[test]
    fn pool_bound() {
        let three = g("P:max-S:64:64-P:mean-P:max");
        let report = three.validate(32);
        assert!(report.valid);
        assert_eq!(report.max_pools_allowed, 5);
        assert_eq!(report.pool_count, 3);

        let five = g("P:max-P:max-P:max-P:max-P:max");
        assert!(five.validate(32).valid);

        let six = g("P:max-P:max-P:max-P:max-P:max-P:max");
        let report = six.validate(32);
        assert!(!report.valid);
        assert_eq!(report.messages.len(), 1);
    }

    #[test]
    fn max_pools_is_floor_log2() {
        assert_eq!(max_pools_for(1), 0);
        assert_eq!(max_pools_for(2), 1);
        assert_eq!(max_pools_for(31), 4);
        assert_eq!(max_pools_for(32), 5);
        assert_eq!(max_pools_for(33), 5);
        assert_eq!(max_pools_for(224), 7);
    }

    #[test]
    fn type_tags() {
        assert_eq!(LayerGene::skip(1, 1).type_tag(), 1);
        assert_eq!(LayerGene::pool(PoolType::Mean).type_tag(), 2);
    }

    #[test]
    fn identifier_hex_validation() {
        let id = g("P:max").identifier();
        assert_eq!(Identifier::from_hex(id.as_str()), Some(id.clone()));
        assert!(Identifier::from_hex(&id.as_str().to_uppercase()).is_none());
        assert!(Identifier::from_hex("abc").is_none());
    }

    #[test]
    fn remove_keeps_last_gene() {
        let mut genome = g("P:max");
        assert_eq!(genome.remove(0), None);
        assert_eq!(genome.len(), 1);
    }
}
