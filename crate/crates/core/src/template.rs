//! CRF++-style feature templates and the gene catalogue.
//!
//! Supported syntax is the unigram subset: `U<id>:%x[row,col]` with
//! optional `/%x[row,col]` conjunctions, a bare `B` line enabling label
//! transitions, `#` comments and blank lines.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::features::{
    TokenRecord, COL_DIGIT, COL_FIRST_SUFFIX, COL_FOLLOWUP, COL_FREQUENCY, COL_LENGTH, COL_POS,
    COL_PREFIX, COL_PREFIX_PRESENT, COL_SALUTATION, COL_STEM, COL_SUFFIX_COUNT,
    COL_SUFFIX_PRESENT, COL_WORD, FEATURE_COLUMNS, SUFFIX_SLOTS,
};

/// A relative cell reference `%x[row,col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub row: i32,
    pub col: usize,
}

/// One unigram feature macro.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMacro {
    pub id: String,
    pub refs: Vec<CellRef>,
}

impl FeatureMacro {
    pub fn new(id: impl Into<String>, refs: Vec<CellRef>) -> Self {
        FeatureMacro { id: id.into(), refs }
    }

    pub fn single(id: impl Into<String>, row: i32, col: usize) -> Self {
        Self::new(id, vec![CellRef { row, col }])
    }

    /// Expand at position `t` of `rows`.
    pub fn expand(&self, rows: &[TokenRecord], t: usize) -> String {
        let mut out = String::with_capacity(self.id.len() + 16);
        out.push_str(&self.id);
        out.push(':');
        for (i, r) in self.refs.iter().enumerate() {
            if i > 0 {
                out.push('/');
            }
            let target = t as i64 + i64::from(r.row);
            if target < 0 {
                out.push_str(&format!("_B-{}", -target));
            } else if target >= rows.len() as i64 {
                out.push_str(&format!("_B+{}", target - rows.len() as i64 + 1));
            } else {
                out.push_str(&rows[target as usize].cell(r.col));
            }
        }
        out
    }
}

impl fmt::Display for FeatureMacro {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.id)?;
        for (i, r) in self.refs.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "%x[{},{}]", r.row, r.col)?;
        }
        Ok(())
    }
}

/// An ordered macro list plus the transition switch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Template {
    pub macros: Vec<FeatureMacro>,
    pub include_label_bigram: bool,
}

impl Template {
    pub fn new(macros: Vec<FeatureMacro>, include_label_bigram: bool) -> Result<Self> {
        let mut seen = HashSet::new();
        for m in &macros {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::Input(format!("duplicate macro id {}", m.id)));
            }
            if let Some(r) = m.refs.iter().find(|r| r.col >= FEATURE_COLUMNS) {
                return Err(Error::Input(format!("macro {} references column {}", m.id, r.col)));
            }
        }
        Ok(Template { macros, include_label_bigram })
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_template(text)
    }

    /// Observation feature strings at position `t`, one per macro.
    pub fn expand(&self, rows: &[TokenRecord], t: usize) -> Vec<String> {
        expand_macros(self, rows, t)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.macros {
            writeln!(f, "{m}")?;
        }
        if self.include_label_bigram {
            writeln!(f, "B")?;
        }
        Ok(())
    }
}

fn parse_ref(s: &str) -> Option<(CellRef, &str)> {
    let rest = s.strip_prefix("%x[")?;
    let close = rest.find(']')?;
    let (inner, tail) = (&rest[..close], &rest[close + 1..]);
    let (row, col) = inner.split_once(',')?;
    let row = row.trim().parse().ok()?;
    let col = col.trim().parse().ok()?;
    Some((CellRef { row, col }, tail))
}

fn parse_macro(line: &str) -> std::result::Result<FeatureMacro, String> {
    let (id, body) = line
        .split_once(':')
        .ok_or_else(|| format!("expected `<id>:%x[row,col]`, found {line:?}"))?;
    if id.len() < 2 || !id[1..].chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad macro id {id:?}"));
    }
    let mut refs = Vec::new();
    let mut rest = body;
    loop {
        let (r, tail) = parse_ref(rest).ok_or_else(|| format!("malformed cell reference in {line:?}"))?;
        if r.col >= FEATURE_COLUMNS {
            return Err(format!("column {} out of range (must be < {FEATURE_COLUMNS})", r.col));
        }
        refs.push(r);
        if tail.is_empty() {
            break;
        }
        rest = tail
            .strip_prefix('/')
            .ok_or_else(|| format!("unexpected text {tail:?} in {line:?}"))?;
    }
    Ok(FeatureMacro { id: id.to_string(), refs })
}

/// Parse template text.
pub fn parse_template(text: &str) -> Result<Template> {
    let mut macros = Vec::new();
    let mut ids = HashSet::new();
    let mut include_label_bigram = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "B" {
            include_label_bigram = true;
            continue;
        }
        if line.starts_with('B') {
            return Err(Error::parse(line_no, "bigram observation macros are not supported; use a bare `B` line"));
        }
        if !line.starts_with('U') {
            return Err(Error::parse(line_no, format!("unrecognized template line {line:?}")));
        }
        let m = parse_macro(line).map_err(|msg| Error::parse(line_no, msg))?;
        if !ids.insert(m.id.clone()) {
            return Err(Error::parse(line_no, format!("duplicate macro id {}", m.id)));
        }
        macros.push(m);
    }
    Ok(Template { macros, include_label_bigram })
}

/// Expand every macro of `template` at position `t`.
pub fn expand_macros(template: &Template, rows: &[TokenRecord], t: usize) -> Vec<String> {
    template.macros.iter().map(|m| m.expand(rows, t)).collect()
}

/// One selectable feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gene {
    pub index: usize,
    pub feature: FeatureMacro,
    pub name: String,
}

/// Ordered list of candidate macros; one chromosome bit per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneCatalogue {
    genes: Vec<Gene>,
}

fn offset_label(off: i32) -> String {
    if off > 0 {
        format!("+{off}")
    } else {
        off.to_string()
    }
}

impl GeneCatalogue {
    /// Build from (name, macro) pairs; indices are assigned densely.
    pub fn new(entries: Vec<(String, FeatureMacro)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut genes = Vec::with_capacity(entries.len());
        for (index, (name, feature)) in entries.into_iter().enumerate() {
            if !seen.insert(feature.id.clone()) {
                return Err(Error::Input(format!("duplicate gene macro id {}", feature.id)));
            }
            genes.push(Gene { index, feature, name });
        }
        if genes.is_empty() {
            return Err(Error::Input("gene catalogue is empty".into()));
        }
        Ok(GeneCatalogue { genes })
    }

    /// Treat every macro of a template as one gene.
    pub fn from_template(template: &Template) -> Result<Self> {
        Self::new(template.macros.iter().map(|m| (m.id.clone(), m.clone())).collect())
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Index of the gene with the given name.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.genes.iter().position(|g| g.name == name)
    }

    /// All genes as a template.
    pub fn full_template(&self) -> Template {
        Template {
            macros: self.genes.iter().map(|g| g.feature.clone()).collect(),
            include_label_bigram: true,
        }
    }
}

impl Default for GeneCatalogue {
    /// The 38-gene catalogue over the standard token columns.
    fn default() -> Self {
        let mut entries: Vec<(String, usize, i32)> = Vec::new();
        let window = -2..=2;
        for off in window.clone() {
            entries.push((format!("word[{}]", offset_label(off)), COL_WORD, off));
        }
        for off in window.clone() {
            entries.push((format!("stem[{}]", offset_label(off)), COL_STEM, off));
        }
        for slot in 0..SUFFIX_SLOTS {
            entries.push((format!("suffix{}", slot + 1), COL_FIRST_SUFFIX + slot, 0));
        }
        entries.push(("suffix_present".into(), COL_SUFFIX_PRESENT, 0));
        entries.push(("suffix_count".into(), COL_SUFFIX_COUNT, 0));
        entries.push(("prefix".into(), COL_PREFIX, 0));
        entries.push(("prefix_present".into(), COL_PREFIX_PRESENT, 0));
        entries.push(("digit".into(), COL_DIGIT, 0));
        entries.push(("salutation".into(), COL_SALUTATION, 0));
        entries.push(("followup".into(), COL_FOLLOWUP, 0));
        entries.push(("length".into(), COL_LENGTH, 0));
        for off in window.clone() {
            entries.push((format!("freq[{}]", offset_label(off)), COL_FREQUENCY, off));
        }
        for off in window {
            entries.push((format!("pos[{}]", offset_label(off)), COL_POS, off));
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, (name, col, off))| (name, FeatureMacro::single(format!("U{i:02}"), off, col)))
            .collect();
        GeneCatalogue::new(entries).expect("default catalogue is well formed")
    }
}

/// Select the macros whose bit is set; transitions are always on.
pub fn chromosome_to_template(bits: &[bool], catalogue: &GeneCatalogue) -> Result<Template> {
    if bits.len() != catalogue.len() {
        return Err(Error::Input(format!(
            "chromosome has {} bits but the catalogue has {} genes",
            bits.len(),
            catalogue.len()
        )));
    }
    let macros = catalogue
        .genes
        .iter()
        .zip(bits)
        .filter(|(_, &b)| b)
        .map(|(g, _)| g.feature.clone())
        .collect();
    Ok(Template { macros, include_label_bigram: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::BioTag;

    use proptest::prelude::*;

    const FIGURE_TEMPLATE: &str = "\
# Unigram
U00:%x[-2,1]
U01:%x[-1,1]
U02:%x[0,1]
U03:%x[1,1]
U04:%x[2,1]
U05:%x[-1,1]
U06:%x[0,0]
U10:%x[0,2]
U30:%x[0,21]
U33:%x[0,21]
# Bigram
";

    fn row(word: &str, stem: &str, pos: &str) -> TokenRecord {
        let cells: Vec<String> = (0..FEATURE_COLUMNS)
            .map(|c| match c {
                COL_WORD => word.to_string(),
                COL_STEM => stem.to_string(),
                COL_POS => pos.to_string(),
                _ => "0".to_string(),
            })
            .collect();
        let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
        TokenRecord::from_cells(&refs, BioTag::O).unwrap()
    }

    #[test]
    fn parse_single_macro() {
        let t = parse_template("U00:%x[-2,1]").unwrap();
        assert_eq!(t.macros, vec![FeatureMacro::single("U00", -2, 1)]);
        assert!(!t.include_label_bigram);
    }

    #[test]
    fn comment_yields_nothing() {
        let t = parse_template("# Bigram").unwrap();
        assert!(t.macros.is_empty());
        assert!(!t.include_label_bigram);
    }

    #[test]
    fn conjunction_macro() {
        let t = parse_template("U99:%x[0,0]/%x[1,0]\nB\n").unwrap();
        assert_eq!(t.macros.len(), 1);
        assert_eq!(t.macros[0].refs, vec![CellRef { row: 0, col: 0 }, CellRef { row: 1, col: 0 }]);
        assert!(t.include_label_bigram);
        assert_eq!(t.to_string(), "U99:%x[0,0]/%x[1,0]\nB\n");
        assert_eq!(parse_template(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn figure_style_template_parses() {
        let t = parse_template(FIGURE_TEMPLATE).unwrap();
        assert_eq!(t.macros.len(), 10);
        assert_eq!(t.macros[9].refs[0], CellRef { row: 0, col: 21 });
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("U00:%x[0,1]\nU01:%x[0,\n", 2),
            ("U00:%x[0,1]\nU00:%x[0,2]\n", 2),
            ("\n\nU00:%x[0,22]\n", 3),
            ("X01:%x[0,0]\n", 1),
            ("B01:%x[0,0]\n", 1),
            ("U00:%x[0,1]junk\n", 1),
        ];
        for (text, line) in cases {
            match parse_template(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn expansion_reads_cells_and_boundaries() {
        let rows = vec![row("pusin", "pu", "VN"), row("ama", "ama", "NN")];
        let t = parse_template("U02:%x[0,1]\nU00:%x[-2,1]\nU30:%x[0,21]\nU09:%x[2,0]/%x[-1,0]").unwrap();
        assert_eq!(expand_macros(&t, &rows, 0), ["U02:pu", "U00:_B-2", "U30:VN", "U09:_B+1/_B-1"]);
        assert_eq!(expand_macros(&t, &rows, 1), ["U02:ama", "U00:_B-1", "U30:NN", "U09:_B+2/pusin"]);
    }

    #[test]
    fn default_catalogue_shape() {
        let cat = GeneCatalogue::default();
        assert_eq!(cat.len(), 38);
        for (i, g) in cat.genes().iter().enumerate() {
            assert_eq!(g.index, i);
            assert_eq!(g.feature.id, format!("U{i:02}"));
        }
        assert_eq!(cat.position("word[-2]"), Some(0));
        assert_eq!(cat.position("pos[+2]"), Some(37));
        assert_eq!(cat.genes()[20].feature.refs[0].col, COL_SUFFIX_PRESENT);
    }

    #[test]
    fn chromosome_selection() {
        let cat = GeneCatalogue::default();
        let all = chromosome_to_template(&[true; 38], &cat).unwrap();
        assert_eq!(all.macros.len(), 38);
        assert!(all.include_label_bigram);
        assert_eq!(all, cat.full_template());
        let none = chromosome_to_template(&[false; 38], &cat).unwrap();
        assert!(none.macros.is_empty());
        assert!(matches!(chromosome_to_template(&[true; 37], &cat), Err(Error::Input(_))));
    }

    #[test]
    fn best_reported_feature_set() {
        let cat = GeneCatalogue::default();
        let names = [
            "word[-2]", "word[-1]", "word[0]", "stem[-1]", "stem[0]", "suffix1", "suffix2", "suffix3",
            "suffix4", "suffix5", "suffix_present", "suffix_count", "prefix_present", "salutation",
            "followup", "digit", "length", "freq[-2]", "freq[-1]", "pos[0]", "pos[+1]", "pos[+2]",
        ];
        let mut bits = vec![false; cat.len()];
        for n in names {
            bits[cat.position(n).unwrap()] = true;
        }
        let t = chromosome_to_template(&bits, &cat).unwrap();
        assert_eq!(t.macros.len(), 22);
        let refs: Vec<(i32, usize)> = t.macros.iter().map(|m| (m.refs[0].row, m.refs[0].col)).collect();
        assert!(refs.contains(&(-2, COL_FREQUENCY)));
        assert!(refs.contains(&(2, COL_POS)));
        assert!(!refs.contains(&(-1, COL_POS)));
    }

    fn macro_strategy() -> impl Strategy<Value = Vec<FeatureMacro>> {
        prop::collection::vec(
            prop::collection::vec((-3i32..=3, 0usize..FEATURE_COLUMNS), 1..4),
            0..12,
        )
        .prop_map(|ms| {
            ms.into_iter()
                .enumerate()
                .map(|(i, refs)| {
                    FeatureMacro::new(
                        format!("U{i:02}"),
                        refs.into_iter().map(|(row, col)| CellRef { row, col }).collect(),
                    )
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(macros in macro_strategy(), bigram in any::<bool>()) {
            let t = Template::new(macros, bigram).unwrap();
            let text = t.to_string();
            let parsed = parse_template(&text).unwrap();
            prop_assert_eq!(&parsed, &t);
            prop_assert_eq!(parse_template(&parsed.to_string()).unwrap(), parsed);
        }

        #[test]
        fn expansion_length_and_prefixes(macros in macro_strategy(), n in 1usize..5) {
            let t = Template::new(macros, true).unwrap();
            let rows: Vec<TokenRecord> = (0..n).map(|i| row(&format!("w{i}"), "s", "NN")).collect();
            for pos in 0..n {
                let feats = t.expand(&rows, pos);
                prop_assert_eq!(feats.len(), t.macros.len());
                for (f, m) in feats.iter().zip(&t.macros) {
                    let prefix = format!("{}:", m.id);
                    prop_assert!(f.starts_with(&prefix));
                }
            }
        }

        #[test]
        fn masking_equals_direct_selection(bits in prop::collection::vec(any::<bool>(), 38)) {
            let cat = GeneCatalogue::default();
            let all = chromosome_to_template(&[true; 38], &cat).unwrap();
            let masked: Vec<FeatureMacro> = all.macros.iter().zip(&bits)
                .filter(|(_, b)| **b).map(|(m, _)| m.clone()).collect();
            prop_assert_eq!(chromosome_to_template(&bits, &cat).unwrap().macros, masked);
        }
    }
}
