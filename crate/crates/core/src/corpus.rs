//! Column files, raw token files and model persistence.
//!
//! Column files hold one token per line with whitespace-separated
//! columns (22 features, then the label) and a blank line between
//! sentences. They are valid CRF++ training and test inputs.

use std::io::{BufRead, Write};

use crate::crf::{CrfModel, FeatureKey, LabelSet};
use crate::error::{Error, Result};
use crate::features::{BioTag, RawToken, TokenRecord, FEATURE_COLUMNS};
use crate::stemmer::nfc;
use crate::template::parse_template;

pub type Sentence = Vec<TokenRecord>;

/// Sentences of token rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus { sentences }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Gold label sequences.
    pub fn labels(&self) -> Vec<Vec<BioTag>> {
        self.sentences.iter().map(|s| s.iter().map(|r| r.label).collect()).collect()
    }
}

/// Read a column file. With `expect_labels`, every line needs 23 fields;
/// otherwise 22 or 23 are accepted and a 23rd field is ignored.
pub fn read_column_file<R: BufRead>(source: R, expect_labels: bool) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let fields: Vec<&str> = line.split([' ', '\t']).filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let label = match (fields.len(), expect_labels) {
            (n, true) if n == FEATURE_COLUMNS + 1 => fields[FEATURE_COLUMNS]
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
            (n, false) if n == FEATURE_COLUMNS || n == FEATURE_COLUMNS + 1 => BioTag::O,
            (n, _) => {
                let want = if expect_labels { "23".to_string() } else { "22 or 23".to_string() };
                return Err(Error::parse(line_no, format!("expected {want} fields, found {n}")));
            }
        };
        let record = TokenRecord::from_cells(&fields[..FEATURE_COLUMNS], label)
            .map_err(|m| Error::parse(line_no, m))?;
        current.push(record);
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(Corpus { sentences })
}

/// Write the canonical form: single spaces, one blank line between
/// sentences, trailing newline.
pub fn write_column_file<W: Write>(corpus: &Corpus, mut sink: W, include_labels: bool) -> Result<()> {
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            sink.write_all(b"\n")?;
        }
        for row in sentence {
            let mut line = String::new();
            for (c, field) in row.fields().enumerate() {
                if c == FEATURE_COLUMNS && !include_labels {
                    break;
                }
                if c > 0 {
                    line.push(' ');
                }
                line.push_str(&field);
            }
            line.push('\n');
            sink.write_all(line.as_bytes())?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Read `word<TAB>pos[<TAB>label]` lines; blank lines split sentences.
pub fn read_raw<R: BufRead>(source: R) -> Result<Vec<Vec<RawToken>>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end();
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (word, pos, label) = match fields.as_slice() {
            [w, p] => (*w, *p, "O"),
            [w, p, l] => (*w, *p, *l),
            [_] => return Err(Error::parse(line_no, "missing POS field")),
            _ => return Err(Error::parse(line_no, format!("expected 2 or 3 tab-separated fields, found {}", fields.len()))),
        };
        let (word, pos, label) = (word.trim(), pos.trim(), label.trim());
        if word.is_empty() {
            return Err(Error::parse(line_no, "empty word"));
        }
        if pos.is_empty() {
            return Err(Error::parse(line_no, "missing POS field"));
        }
        let label = if label.is_empty() { "O" } else { label };
        label
            .parse::<BioTag>()
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        current.push(RawToken { word: nfc(word), pos: pos.to_string(), label: label.to_string() });
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

const MODEL_MAGIC: &str = "gacrf-model";
const MODEL_VERSION: u32 = 1;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' | '/' | ',' | ' ' | '\t' | '\n' | '\r' => out.push_str(&format!("%{:02X}", c as u32)),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

fn key_text(key: &FeatureKey) -> String {
    match key {
        FeatureKey::Observation { feature, label } => format!("o/{}/{}", escape(label), escape(feature)),
        FeatureKey::Transition { prev, cur } => format!("t/{}/{}", escape(prev), escape(cur)),
    }
}

fn parse_key(text: &str) -> Option<FeatureKey> {
    let mut parts = text.splitn(3, '/');
    let kind = parts.next()?;
    let a = unescape(parts.next()?)?;
    let b = unescape(parts.next()?)?;
    match kind {
        "o" => Some(FeatureKey::Observation { label: a, feature: b }),
        "t" => Some(FeatureKey::Transition { prev: a, cur: b }),
        _ => None,
    }
}

/// Versioned text model file.
pub fn save_model<W: Write>(model: &CrfModel, mut sink: W) -> Result<()> {
    let labels: Vec<String> = model.labels().labels().iter().map(|l| escape(l)).collect();
    writeln!(sink, "{MODEL_MAGIC}\t{MODEL_VERSION}\trho={}\tlabels={}", model.rho(), labels.join(","))?;
    for line in model.template().to_string().lines() {
        writeln!(sink, "template\t{line}")?;
    }
    for (key, value) in model.weights() {
        writeln!(sink, "{}\t{value}", key_text(&key))?;
    }
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: BufRead>(source: R) -> Result<CrfModel> {
    let mut lines = source.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(Error::model_load(1, "empty model file")),
    };
    let parts: Vec<&str> = header.split('\t').collect();
    if parts.len() != 4 || parts[0] != MODEL_MAGIC {
        return Err(Error::model_load(1, "not a model file"));
    }
    if parts[1] != MODEL_VERSION.to_string() {
        return Err(Error::model_load(1, format!("unsupported model version {:?}", parts[1])));
    }
    let rho: f64 = parts[2]
        .strip_prefix("rho=")
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| Error::model_load(1, "malformed rho"))?;
    let labels = parts[3]
        .strip_prefix("labels=")
        .ok_or_else(|| Error::model_load(1, "malformed label list"))?
        .split(',')
        .map(unescape)
        .collect::<Option<Vec<String>>>()
        .ok_or_else(|| Error::model_load(1, "malformed label list"))?;
    let labels = LabelSet::new(labels).map_err(|e| Error::model_load(1, e.to_string()))?;

    let mut template_text = String::new();
    let mut weights = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if let Some(t) = line.strip_prefix("template\t") {
            if !weights.is_empty() {
                return Err(Error::model_load(line_no, "template line after weights"));
            }
            template_text.push_str(t);
            template_text.push('\n');
            continue;
        }
        let (key, value) = line
            .split_once('\t')
            .ok_or_else(|| Error::model_load(line_no, "expected `key<TAB>value`"))?;
        let key = parse_key(key).ok_or_else(|| Error::model_load(line_no, format!("malformed key {key:?}")))?;
        let value: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::model_load(line_no, format!("malformed weight {value:?}")))?;
        weights.push((line_no, key, value));
    }
    let template = parse_template(&template_text).map_err(|e| Error::model_load(1, format!("embedded template: {e}")))?;
    let mut model = CrfModel::new(labels, template, rho).map_err(|e| Error::model_load(1, e.to_string()))?;
    for (line_no, key, value) in weights {
        model
            .set_weight(&key, value)
            .map_err(|e| Error::model_load(line_no, e.to_string()))?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::Template;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(word: &str, label: &str) -> String {
        let mut cells = vec![word.to_string(); 2];
        cells.extend(std::iter::repeat_n("0".to_string(), 19));
        cells.push("NN".into());
        cells.push(label.into());
        cells.join(" ")
    }

    #[test]
    fn sentences_split_on_blank_lines() {
        let text = format!("{}\n{}\n\n{}\n\n\n", line("a", "O"), line("b", "B-MWE"), line("c", "I-MWE"));
        let c = read_column_file(text.as_bytes(), true).unwrap();
        assert_eq!(c.sentences.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 1]);
        assert_eq!(c.sentences[0][1].label, BioTag::Begin);
    }

    #[test]
    fn wrong_field_count_names_line() {
        let text = format!("{}\na b c d e\n", line("a", "O"));
        match read_column_file(text.as_bytes(), true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unlabelled_reading() {
        let full = line("a", "B-MWE");
        let short: String = full.rsplit_once(' ').unwrap().0.to_string();
        let c = read_column_file(format!("{short}\n{full}\n").as_bytes(), false).unwrap();
        assert!(c.sentences[0].iter().all(|r| r.label == BioTag::O));
        assert!(read_column_file(format!("{short}\n").as_bytes(), true).is_err());
    }

    #[test]
    fn tabs_and_runs_of_spaces() {
        let text = line("a", "O").replace(' ', " \t  ");
        let c = read_column_file(text.as_bytes(), true).unwrap();
        let mut out = Vec::new();
        write_column_file(&c, &mut out, true).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", line("a", "O")));
    }

    #[test]
    fn empty_file_and_corpus() {
        assert!(read_column_file("".as_bytes(), true).unwrap().is_empty());
        let mut out = Vec::new();
        write_column_file(&Corpus::default(), &mut out, true).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn single_token_output() {
        let c = read_column_file(line("a", "O").as_bytes(), true).unwrap();
        let mut out = Vec::new();
        write_column_file(&c, &mut out, true).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().count(), 1);
        assert_eq!(s.split_whitespace().count(), 23);
        assert!(s.ends_with('\n'));
        let mut out = Vec::new();
        write_column_file(&c, &mut out, false).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().split_whitespace().count(), 22);
    }

    #[test]
    fn raw_reading() {
        let s = read_raw("pu\tVN\n\npu\tVN\tB-MWE\nko\tRB\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0][0], RawToken { word: "pu".into(), pos: "VN".into(), label: "O".into() });
        assert_eq!(s[1][0].label, "B-MWE");
        assert_eq!(s[1][1].label, "O");
        match read_raw("pu\tVN\nko\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(read_raw("pu\tVN\tB-LOC\n".as_bytes()).is_err());
    }

    fn random_model(rng: &mut ChaCha8Rng, n: usize) -> CrfModel {
        let template = parse_template("U00:%x[0,0]\nU01:%x[-1,1]/%x[0,21]\nB\n").unwrap();
        let mut m = CrfModel::new(LabelSet::default(), template, rng.random_range(0.5..20.0)).unwrap();
        let alphabet: Vec<char> = "ab /%,\tপুশিন".chars().collect();
        let labels = ["O", "B-MWE", "I-MWE"];
        for i in 0..n {
            let len = rng.random_range(1..6);
            let body: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
            let key = FeatureKey::Observation {
                feature: format!("U{:02}:{body}{i}", i % 2),
                label: labels[rng.random_range(0..3)].into(),
            };
            let w: f64 = rng.random_range(-5.0..5.0) * 10f64.powi(rng.random_range(-8..3));
            m.set_weight(&key, w).unwrap();
        }
        for a in labels {
            for b in labels {
                let key = FeatureKey::Transition { prev: a.into(), cur: b.into() };
                m.set_weight(&key, rng.random_range(-3.0..3.0)).unwrap();
            }
        }
        m
    }

    #[test]
    fn model_round_trip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let empty = CrfModel::new(LabelSet::default(), Template::default(), 10.0).unwrap();
        for m in [empty, random_model(&mut rng, 10_000)] {
            let mut buf = Vec::new();
            save_model(&m, &mut buf).unwrap();
            let loaded = load_model(buf.as_slice()).unwrap();
            assert_eq!(loaded, m);
            for ((k1, w1), (k2, w2)) in loaded.weights().zip(m.weights()) {
                assert_eq!(k1, k2);
                assert_eq!(w1.to_bits(), w2.to_bits());
            }
        }
    }

    #[test]
    fn model_load_errors() {
        let err = load_model("gacrf-model\t7\trho=1\tlabels=O\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelLoad { line: 1, .. }), "{err}");
        let err = load_model("gacrf-model\t1\trho=1\tlabels=O\no/O/U00:a\tabc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelLoad { line: 2, .. }), "{err}");
        let err = load_model("gacrf-model\t1\trho=1\tlabels=O\nx/O/U00:a\t1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelLoad { line: 2, .. }), "{err}");
        assert!(load_model("".as_bytes()).is_err());
    }

    fn record_strategy() -> impl Strategy<Value = TokenRecord> {
        let cell = "[a-zə0-9.]{1,6}";
        (
            prop::collection::vec(cell, FEATURE_COLUMNS),
            prop::collection::vec(any::<bool>(), 6),
            0u32..11,
            0u8..2,
            prop::sample::select(BioTag::ALL.to_vec()),
        )
            .prop_map(|(cells, bits, count, freq, label)| {
                let b = |i: usize| if bits[i] { "1".to_string() } else { "0".to_string() };
                let mut c = cells;
                c[12] = b(0);
                c[13] = count.to_string();
                c[15] = b(1);
                c[16] = b(2);
                c[17] = b(3);
                c[18] = b(4);
                c[19] = freq.to_string();
                c[20] = b(5);
                let refs: Vec<&str> = c.iter().map(String::as_str).collect();
                TokenRecord::from_cells(&refs, label).unwrap()
            })
    }

    proptest! {
        #[test]
        fn column_round_trip(sentences in prop::collection::vec(prop::collection::vec(record_strategy(), 1..5), 0..5)) {
            let corpus = Corpus::new(sentences);
            let mut buf = Vec::new();
            write_column_file(&corpus, &mut buf, true).unwrap();
            let back = read_column_file(buf.as_slice(), true).unwrap();
            prop_assert_eq!(back.token_count(), corpus.token_count());
            prop_assert_eq!(&back, &corpus);
            let mut again = Vec::new();
            write_column_file(&back, &mut again, true).unwrap();
            prop_assert_eq!(again, buf);
        }
    }
}
