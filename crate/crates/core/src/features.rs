//! Token-level feature columns.
//!
//! Every token becomes a fixed row of 22 feature columns followed by its
//! BIO label:
//!
//! | col   | content                                   |
//! |-------|-------------------------------------------|
//! | 0     | surface word                              |
//! | 1     | stem                                      |
//! | 2-11  | stripped suffixes, rightmost first, "0" pad|
//! | 12    | suffix present (0/1)                      |
//! | 13    | number of suffixes                        |
//! | 14    | outermost prefix or "0"                   |
//! | 15    | prefix present (0/1)                      |
//! | 16    | digit flag                                |
//! | 17    | previous word is a salutation             |
//! | 18    | next word is a follow-up word             |
//! | 19    | frequency bin                             |
//! | 20    | length flag (more than 3 characters)      |
//! | 21    | POS tag                                   |

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::error::{Error, Result};
use crate::stemmer::{nfc, AffixLexicon};

/// Number of feature columns per token (the label is an extra column).
pub const FEATURE_COLUMNS: usize = 22;
/// Number of suffix slot columns.
pub const SUFFIX_SLOTS: usize = 10;
/// Placeholder for an empty affix cell.
pub const EMPTY_CELL: &str = "0";

pub const COL_WORD: usize = 0;
pub const COL_STEM: usize = 1;
pub const COL_FIRST_SUFFIX: usize = 2;
pub const COL_SUFFIX_PRESENT: usize = 12;
pub const COL_SUFFIX_COUNT: usize = 13;
pub const COL_PREFIX: usize = 14;
pub const COL_PREFIX_PRESENT: usize = 15;
pub const COL_DIGIT: usize = 16;
pub const COL_SALUTATION: usize = 17;
pub const COL_FOLLOWUP: usize = 18;
pub const COL_FREQUENCY: usize = 19;
pub const COL_LENGTH: usize = 20;
pub const COL_POS: usize = 21;

const FREQUENCY_THRESHOLD: u64 = 100;

/// BIO tag for multiword-expression spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum BioTag {
    #[default]
    O,
    Begin,
    Inside,
}

impl BioTag {
    pub const ALL: [BioTag; 3] = [BioTag::O, BioTag::Begin, BioTag::Inside];

    pub fn as_str(self) -> &'static str {
        match self {
            BioTag::O => "O",
            BioTag::Begin => "B-MWE",
            BioTag::Inside => "I-MWE",
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(BioTag::O),
            "B-MWE" => Ok(BioTag::Begin),
            "I-MWE" => Ok(BioTag::Inside),
            other => Err(Error::Input(format!("unknown label {other:?}"))),
        }
    }
}

/// One token row: 22 feature columns plus the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    pub word: String,
    pub stem: String,
    pub suffixes: [String; SUFFIX_SLOTS],
    pub suffix_present: bool,
    pub suffix_count: u32,
    pub prefix: String,
    pub prefix_present: bool,
    pub digit: bool,
    pub salutation: bool,
    pub followup: bool,
    pub frequency_bin: u8,
    pub length: bool,
    pub pos: String,
    pub label: BioTag,
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn parse_bit(s: &str, col: usize) -> std::result::Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("column {col}: expected 0 or 1, found {other:?}")),
    }
}

impl TokenRecord {
    /// Cell value at feature column `col` (0..22).
    pub fn cell(&self, col: usize) -> Cow<'_, str> {
        match col {
            COL_WORD => Cow::Borrowed(&self.word),
            COL_STEM => Cow::Borrowed(&self.stem),
            2..=11 => Cow::Borrowed(&self.suffixes[col - COL_FIRST_SUFFIX]),
            COL_SUFFIX_PRESENT => Cow::Borrowed(bit(self.suffix_present)),
            COL_SUFFIX_COUNT => Cow::Owned(self.suffix_count.to_string()),
            COL_PREFIX => Cow::Borrowed(&self.prefix),
            COL_PREFIX_PRESENT => Cow::Borrowed(bit(self.prefix_present)),
            COL_DIGIT => Cow::Borrowed(bit(self.digit)),
            COL_SALUTATION => Cow::Borrowed(bit(self.salutation)),
            COL_FOLLOWUP => Cow::Borrowed(bit(self.followup)),
            COL_FREQUENCY => Cow::Owned(self.frequency_bin.to_string()),
            COL_LENGTH => Cow::Borrowed(bit(self.length)),
            COL_POS => Cow::Borrowed(&self.pos),
            _ => panic!("feature column {col} out of range"),
        }
    }

    /// All 22 feature cells followed by the label.
    pub fn fields(&self) -> impl Iterator<Item = Cow<'_, str>> {
        (0..FEATURE_COLUMNS)
            .map(|c| self.cell(c))
            .chain(std::iter::once(Cow::Borrowed(self.label.as_str())))
    }

    /// Rebuild a record from its 22 feature cells and a label.
    pub fn from_cells(cells: &[&str], label: BioTag) -> std::result::Result<Self, String> {
        if cells.len() != FEATURE_COLUMNS {
            return Err(format!(
                "expected {FEATURE_COLUMNS} feature columns, found {}",
                cells.len()
            ));
        }
        let suffixes = std::array::from_fn(|i| cells[COL_FIRST_SUFFIX + i].to_string());
        let suffix_count = cells[COL_SUFFIX_COUNT]
            .parse()
            .map_err(|_| format!("column {COL_SUFFIX_COUNT}: bad suffix count {:?}", cells[COL_SUFFIX_COUNT]))?;
        let frequency_bin = cells[COL_FREQUENCY]
            .parse()
            .map_err(|_| format!("column {COL_FREQUENCY}: bad frequency bin {:?}", cells[COL_FREQUENCY]))?;
        Ok(TokenRecord {
            word: cells[COL_WORD].to_string(),
            stem: cells[COL_STEM].to_string(),
            suffixes,
            suffix_present: parse_bit(cells[COL_SUFFIX_PRESENT], COL_SUFFIX_PRESENT)?,
            suffix_count,
            prefix: cells[COL_PREFIX].to_string(),
            prefix_present: parse_bit(cells[COL_PREFIX_PRESENT], COL_PREFIX_PRESENT)?,
            digit: parse_bit(cells[COL_DIGIT], COL_DIGIT)?,
            salutation: parse_bit(cells[COL_SALUTATION], COL_SALUTATION)?,
            followup: parse_bit(cells[COL_FOLLOWUP], COL_FOLLOWUP)?,
            frequency_bin,
            length: parse_bit(cells[COL_LENGTH], COL_LENGTH)?,
            pos: cells[COL_POS].to_string(),
            label,
        })
    }
}

/// Salutation and follow-up word lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    pub salutations: HashSet<String>,
    pub followups: HashSet<String>,
}

impl Gazetteer {
    pub fn new<S, F>(salutations: S, followups: F) -> Self
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        F: IntoIterator,
        F::Item: AsRef<str>,
    {
        let clean = |s: &str| {
            let s = nfc(s.trim());
            (!s.is_empty()).then_some(s)
        };
        Gazetteer {
            salutations: salutations.into_iter().filter_map(|s| clean(s.as_ref())).collect(),
            followups: followups.into_iter().filter_map(|s| clean(s.as_ref())).collect(),
        }
    }

    pub fn load<R1: BufRead, R2: BufRead>(salutations: R1, followups: R2) -> Result<Self> {
        Ok(Gazetteer::new(read_entries(salutations)?, read_entries(followups)?))
    }
}

fn read_entries<R: BufRead>(source: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in source.lines() {
        let line = line?;
        let entry = line.trim();
        if !entry.is_empty() && !entry.starts_with('#') {
            out.push(entry.to_string());
        }
    }
    Ok(out)
}

/// Surface-form counts over a training partition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin(&self, word: &str) -> u8 {
        frequency_bin(self.count(word))
    }
}

/// Count surface forms.
pub fn build_frequency_table<I>(training_tokens: I) -> FrequencyTable
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut counts = HashMap::new();
    for w in training_tokens {
        *counts.entry(w.as_ref().to_string()).or_insert(0) += 1;
    }
    FrequencyTable { counts }
}

/// 1 when the word has more than three characters.
pub fn length_flag(word: &str) -> bool {
    word.chars().count() > 3
}

/// 0 below 100 occurrences, 1 otherwise.
pub fn frequency_bin(count: u64) -> u8 {
    u8::from(count >= FREQUENCY_THRESHOLD)
}

/// 1 when any codepoint is a decimal digit in any script.
pub fn digit_flag(word: &str) -> bool {
    word.chars()
        .any(|c| c.general_category() == GeneralCategory::DecimalNumber)
}

/// Shared lookup tables for building records.
#[derive(Debug, Clone)]
pub struct FeatureContext<'a> {
    pub lexicon: &'a AffixLexicon,
    pub gazetteer: &'a Gazetteer,
    pub frequencies: &'a FrequencyTable,
    pub min_stem: usize,
}

/// Build one row. `prev_word`/`next_word` are the neighbours inside the
/// same sentence; `position` is only used for error messages.
pub fn build_token_record(
    word: &str,
    pos: &str,
    label: &str,
    prev_word: Option<&str>,
    next_word: Option<&str>,
    ctx: &FeatureContext<'_>,
    position: usize,
) -> Result<TokenRecord> {
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return Err(Error::Input(format!("token {position}: word {word:?} is empty or contains whitespace")));
    }
    if pos.is_empty() || pos.chars().any(char::is_whitespace) {
        return Err(Error::Input(format!("token {position}: POS {pos:?} is empty or contains whitespace")));
    }
    let label = label
        .parse::<BioTag>()
        .map_err(|_| Error::Input(format!("token {position}: label {label:?} is not one of O, B-MWE, I-MWE")))?;

    let word = nfc(word);
    let stemmed = ctx.lexicon.stem(&word, ctx.min_stem);
    let mut suffixes: [String; SUFFIX_SLOTS] = std::array::from_fn(|_| EMPTY_CELL.to_string());
    for (slot, s) in suffixes.iter_mut().zip(&stemmed.stripped_suffixes) {
        *slot = s.clone();
    }
    let filled = stemmed.stripped_suffixes.len().min(SUFFIX_SLOTS);
    let prefix = stemmed
        .stripped_prefixes
        .first()
        .cloned()
        .unwrap_or_else(|| EMPTY_CELL.to_string());

    Ok(TokenRecord {
        stem: stemmed.stem,
        suffixes,
        suffix_present: filled > 0,
        suffix_count: filled as u32,
        prefix_present: !stemmed.stripped_prefixes.is_empty(),
        prefix,
        digit: digit_flag(&word),
        salutation: prev_word.is_some_and(|w| ctx.gazetteer.salutations.contains(&nfc(w))),
        followup: next_word.is_some_and(|w| ctx.gazetteer.followups.contains(&nfc(w))),
        frequency_bin: ctx.frequencies.bin(&word),
        length: length_flag(&word),
        pos: pos.to_string(),
        label,
        word,
    })
}

/// A raw input token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub word: String,
    pub pos: String,
    pub label: String,
}

/// Encode a sentence; gazetteer lookups never cross sentence boundaries.
pub fn encode_sentence(tokens: &[RawToken], ctx: &FeatureContext<'_>) -> Result<Vec<TokenRecord>> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let prev = i.checked_sub(1).map(|j| tokens[j].word.as_str());
            let next = tokens.get(i + 1).map(|t| t.word.as_str());
            build_token_record(&tok.word, &tok.pos, &tok.label, prev, next, ctx, i)
        })
        .collect()
}

/// Recompute column 19 for every row from `table`.
pub fn refresh_frequency_bins(rows: &mut [TokenRecord], table: &FrequencyTable) {
    for row in rows {
        row.frequency_bin = table.bin(&row.word);
    }
}
