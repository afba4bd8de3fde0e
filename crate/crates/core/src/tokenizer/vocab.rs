use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::{Deserializer, MapAccess, Visitor};

use super::TokenizerError;

pub const START_OF_TEXT: &str = "<|startoftext|>";
pub const END_OF_TEXT: &str = "<|endoftext|>";
pub const END_OF_WORD: &str = "</w>";

const BUNDLED_VOCAB: &str = include_str!("../../data/clip/vocab.json");
const BUNDLED_MERGES: &str = include_str!("../../data/clip/merges.txt");

/// Reversible mapping from raw bytes to printable code points.
///
/// Printable Latin-1 bytes map to themselves; the remaining 68 bytes are
/// shifted into the range starting at U+0100, in byte order.
#[derive(Debug, Clone)]
pub struct ByteMap {
    to_char: [char; 256],
    to_byte: HashMap<char, u8>,
}

impl ByteMap {
    pub fn new() -> Self {
        let printable = |b: u32| {
            (u32::from(b'!')..=u32::from(b'~')).contains(&b) || (0xa1..=0xac).contains(&b) || (0xae..=0xff).contains(&b)
        };
        let mut to_char = ['\0'; 256];
        let mut shifted = 0u32;
        for b in 0..256u32 {
            let cp = if printable(b) {
                b
            } else {
                shifted += 1;
                255 + shifted
            };
            to_char[b as usize] = char::from_u32(cp).expect("valid code point");
        }
        let to_byte = to_char.iter().enumerate().map(|(b, &c)| (c, b as u8)).collect();
        Self { to_char, to_byte }
    }

    pub fn char_for(&self, byte: u8) -> char {
        self.to_char[byte as usize]
    }

    pub fn byte_for(&self, c: char) -> Option<u8> {
        self.to_byte.get(&c).copied()
    }

    /// Alphabet in vocabulary order: printable bytes first, then the
    /// shifted ones.
    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        let (printable, shifted): (Vec<char>, Vec<char>) =
            self.to_char.iter().copied().partition(|&c| (c as u32) < 256);
        printable.into_iter().chain(shifted)
    }
}

impl Default for ByteMap {
    fn default() -> Self {
        Self::new()
    }
}

/// A merge rule resolved to vocabulary ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct MergeTarget {
    pub rank: u32,
    pub merged: u32,
}

/// A CLIP byte-level BPE vocabulary. Immutable once loaded.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    encoder: HashMap<String, u32>,
    decoder: HashMap<u32, String>,
    merges: Vec<(String, String)>,
    pub(crate) merge_ids: HashMap<(u32, u32), MergeTarget>,
    pub(crate) byte_map: ByteMap,
    // Per-byte ids for a symbol in the middle of a word and at its end.
    pub(crate) byte_ids: [u32; 256],
    pub(crate) byte_end_ids: [u32; 256],
    pub(crate) specials: HashMap<String, u32>,
    pub(crate) pattern: Regex,
}

impl Vocabulary {
    /// The published CLIP ViT vocabulary, vendored with the crate.
    pub fn clip() -> &'static Vocabulary {
        static CLIP: OnceLock<Vocabulary> = OnceLock::new();
        CLIP.get_or_init(|| Vocabulary::load(BUNDLED_VOCAB, BUNDLED_MERGES).expect("bundled CLIP vocabulary is valid"))
    }

    /// Parses a `vocab.json` token map and a `merges.txt` rule list.
    ///
    /// An empty (or whitespace-only) vocabulary source derives the encoder
    /// from the merges following the CLIP layout: 256 byte symbols, their
    /// end-of-word forms, one entry per merge, then the two special tokens.
    pub fn load(vocab_source: &str, merges_source: &str) -> Result<Self, TokenizerError> {
        let merges = parse_merges(merges_source)?;
        let byte_map = ByteMap::new();
        let encoder = if vocab_source.trim().is_empty() {
            derive_encoder(&byte_map, &merges)
        } else {
            parse_encoder(vocab_source)?
        };
        Self::assemble(encoder, merges, byte_map)
    }

    fn assemble(
        encoder: HashMap<String, u32>,
        merges: Vec<((String, String), usize)>,
        byte_map: ByteMap,
    ) -> Result<Self, TokenizerError> {
        let mut decoder = HashMap::with_capacity(encoder.len());
        for (token, &id) in &encoder {
            if let Some(prev) = decoder.insert(id, token.clone()) {
                return Err(TokenizerError::DuplicateId { id, first: prev, second: token.clone() });
            }
        }

        let mut byte_ids = [0u32; 256];
        let mut byte_end_ids = [0u32; 256];
        let mut producible: HashSet<String> = HashSet::with_capacity(512 + merges.len());
        for b in 0..=255u8 {
            let c = byte_map.char_for(b).to_string();
            let end = format!("{c}{END_OF_WORD}");
            byte_ids[b as usize] = *encoder.get(&c).ok_or_else(|| TokenizerError::MissingBaseToken(c.clone()))?;
            byte_end_ids[b as usize] =
                *encoder.get(&end).ok_or_else(|| TokenizerError::MissingBaseToken(end.clone()))?;
            producible.insert(c);
            producible.insert(end);
        }

        let mut merge_ids = HashMap::with_capacity(merges.len());
        for (rank, ((left, right), line)) in merges.iter().enumerate() {
            let line = *line;
            for sym in [left, right] {
                if !producible.contains(sym.as_str()) {
                    return Err(TokenizerError::Parse {
                        line,
                        message: format!("symbol {sym:?} is neither a base byte nor an earlier merge"),
                    });
                }
            }
            let merged = format!("{left}{right}");
            let lookup = |sym: &str| -> Result<u32, TokenizerError> {
                encoder.get(sym).copied().ok_or_else(|| TokenizerError::Parse {
                    line,
                    message: format!("symbol {sym:?} is not in the vocabulary"),
                })
            };
            let target = MergeTarget { rank: rank as u32, merged: lookup(&merged)? };
            let key = (lookup(left)?, lookup(right)?);
            if merge_ids.insert(key, target).is_some() {
                return Err(TokenizerError::Parse {
                    line,
                    message: format!("duplicate merge rule {left:?} {right:?}"),
                });
            }
            producible.insert(merged);
        }

        let mut specials = HashMap::new();
        for special in [START_OF_TEXT, END_OF_TEXT] {
            if let Some(&id) = encoder.get(special) {
                specials.insert(special.to_string(), id);
            }
        }

        Ok(Self {
            encoder,
            decoder,
            merges: merges.into_iter().map(|(pair, _)| pair).collect(),
            merge_ids,
            byte_map,
            byte_ids,
            byte_end_ids,
            specials,
            pattern: pre_tokenizer(),
        })
    }

    pub fn len(&self) -> usize {
        self.encoder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encoder.is_empty()
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.encoder.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.decoder.get(&id).map(String::as_str)
    }

    pub fn byte_map(&self) -> &ByteMap {
        &self.byte_map
    }

    pub fn special_id(&self, token: &str) -> Option<u32> {
        self.specials.get(token).copied()
    }
}

fn pre_tokenizer() -> Regex {
    Regex::new(r"(?i)<\|startoftext\|>|<\|endoftext\|>|'s|'t|'re|'ve|'m|'ll|'d|[\p{L}]+|[\p{N}]|[^\s\p{L}\p{N}]+")
        .expect("static regex")
}

fn derive_encoder(byte_map: &ByteMap, merges: &[((String, String), usize)]) -> HashMap<String, u32> {
    let mut tokens: Vec<String> = byte_map.chars().map(String::from).collect();
    tokens.extend(byte_map.chars().map(|c| format!("{c}{END_OF_WORD}")));
    tokens.extend(merges.iter().map(|((a, b), _)| format!("{a}{b}")));
    tokens.push(START_OF_TEXT.to_string());
    tokens.push(END_OF_TEXT.to_string());
    tokens.into_iter().enumerate().map(|(i, t)| (t, i as u32)).collect()
}

/// Merge rules with their 1-based source line numbers.
fn parse_merges(source: &str) -> Result<Vec<((String, String), usize)>, TokenizerError> {
    let mut out = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        if idx == 0 && raw.contains("#version") {
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let mut parts = raw.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => out.push(((a.to_string(), b.to_string()), line)),
            _ => return Err(TokenizerError::Parse { line, message: format!("expected two symbols, got {raw:?}") }),
        }
    }
    Ok(out)
}

fn parse_encoder(source: &str) -> Result<HashMap<String, u32>, TokenizerError> {
    let mut de = serde_json::Deserializer::from_str(source);
    let map = de
        .deserialize_map(EncoderVisitor)
        .map_err(|e| TokenizerError::Parse { line: e.line(), message: e.to_string() })?;
    de.end().map_err(|e| TokenizerError::Parse { line: e.line(), message: e.to_string() })?;
    map
}

struct EncoderVisitor;

impl<'de> Visitor<'de> for EncoderVisitor {
    type Value = Result<HashMap<String, u32>, TokenizerError>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a map from token strings to integer ids")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
        let mut map = HashMap::with_capacity(access.size_hint().unwrap_or(0));
        while let Some((token, id)) = access.next_entry::<String, u32>()? {
            if map.contains_key(&token) {
                return Ok(Err(TokenizerError::DuplicateToken(token)));
            }
            map.insert(token, id);
        }
        Ok(Ok(map))
    }
}
