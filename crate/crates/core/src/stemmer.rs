//! Iterative affix-stripping stemmer for agglutinative morphology.
//!
//! Words are stemmed by repeatedly scanning an ordered affix list and
//! removing the first affix that matches, restarting the scan after every
//! removal until a full pass finds nothing. Prefixes are stripped first,
//! then suffixes. Matching is exact codepoint comparison after NFC
//! normalization.

use std::collections::HashSet;
use std::io::BufRead;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Default minimum number of characters a stem must keep.
pub const DEFAULT_MIN_STEM: usize = 1;

/// Ordered prefix and suffix inventories.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffixLexicon {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
}

/// Outcome of stemming a single word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemResult {
    pub original: String,
    pub stem: String,
    /// Outermost first, i.e. in the order they appear in the word.
    pub stripped_prefixes: Vec<String>,
    /// Outermost first, i.e. rightmost suffix first.
    pub stripped_suffixes: Vec<String>,
    pub prefix_count: usize,
    pub suffix_count: usize,
}

impl StemResult {
    /// Reassemble the original word from its parts.
    pub fn reconstruct(&self) -> String {
        let mut out = String::with_capacity(self.original.len());
        for p in &self.stripped_prefixes {
            out.push_str(p);
        }
        out.push_str(&self.stem);
        for s in self.stripped_suffixes.iter().rev() {
            out.push_str(s);
        }
        out
    }
}

/// NFC-normalize a string.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

impl AffixLexicon {
    /// Build a lexicon from in-memory lists. Entries are NFC-normalized;
    /// empty or duplicate entries are rejected.
    pub fn new<P, S>(prefixes: P, suffixes: S) -> Result<Self>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        S: IntoIterator,
        S::Item: AsRef<str>,
    {
        let prefixes = normalize_list(prefixes, "prefix")?;
        let suffixes = normalize_list(suffixes, "suffix")?;
        Ok(AffixLexicon { prefixes, suffixes })
    }

    /// Read prefix and suffix files: one affix per line, `#` comments and
    /// blank lines skipped. Each source must contain at least one affix.
    pub fn load<R1: BufRead, R2: BufRead>(prefix_source: R1, suffix_source: R2) -> Result<Self> {
        let prefixes = read_affix_list(prefix_source, "prefix")?;
        let suffixes = read_affix_list(suffix_source, "suffix")?;
        Ok(AffixLexicon { prefixes, suffixes })
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    /// Stem `word`, stripping prefixes then suffixes.
    pub fn stem(&self, word: &str, min_stem: usize) -> StemResult {
        stem(word, self, min_stem)
    }
}

fn normalize_list<I>(items: I, kind: &str) -> Result<Vec<String>>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let entry = nfc(item.as_ref());
        if entry.is_empty() {
            return Err(Error::Config(format!("empty {kind} at position {}", i + 1)));
        }
        if !seen.insert(entry.clone()) {
            return Err(Error::Config(format!("duplicate {kind} {entry:?} at position {}", i + 1)));
        }
        out.push(entry);
    }
    Ok(out)
}

fn read_affix_list<R: BufRead>(source: R, kind: &str) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        let entry = nfc(entry);
        if !seen.insert(entry.clone()) {
            return Err(Error::Config(format!(
                "duplicate {kind} {entry:?} on line {}",
                idx + 1
            )));
        }
        out.push(entry);
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{kind} list contains no entries")));
    }
    Ok(out)
}

/// Repeatedly strip the first matching prefix (in list order) while the
/// remainder keeps at least `min_stem` characters.
pub fn strip_prefixes(word: &str, lexicon: &AffixLexicon, min_stem: usize) -> (String, Vec<String>) {
    let min_stem = min_stem.max(1);
    let mut current = word;
    let mut stripped = Vec::new();
    'scan: loop {
        let len = current.chars().count();
        for prefix in &lexicon.prefixes {
            if current.starts_with(prefix.as_str()) && len - prefix.chars().count() >= min_stem {
                current = &current[prefix.len()..];
                stripped.push(prefix.clone());
                continue 'scan;
            }
        }
        break;
    }
    (current.to_string(), stripped)
}

/// Repeatedly strip the first matching suffix (in list order) while the
/// remainder keeps at least `min_stem` characters. The cut is made by
/// length from the right.
pub fn strip_suffixes(word: &str, lexicon: &AffixLexicon, min_stem: usize) -> (String, Vec<String>) {
    let min_stem = min_stem.max(1);
    let mut current = word;
    let mut stripped = Vec::new();
    'scan: loop {
        let len = current.chars().count();
        for suffix in &lexicon.suffixes {
            if current.ends_with(suffix.as_str()) && len - suffix.chars().count() >= min_stem {
                current = &current[..current.len() - suffix.len()];
                stripped.push(suffix.clone());
                continue 'scan;
            }
        }
        break;
    }
    (current.to_string(), stripped)
}

/// Stem a word: prefix pass, then suffix pass on the remainder.
pub fn stem(word: &str, lexicon: &AffixLexicon, min_stem: usize) -> StemResult {
    let (after_prefixes, stripped_prefixes) = strip_prefixes(word, lexicon, min_stem);
    let (stem, stripped_suffixes) = strip_suffixes(&after_prefixes, lexicon, min_stem);
    StemResult {
        original: word.to_string(),
        stem,
        prefix_count: stripped_prefixes.len(),
        suffix_count: stripped_suffixes.len(),
        stripped_prefixes,
        stripped_suffixes,
    }
}
