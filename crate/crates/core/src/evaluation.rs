//! Precision, recall and F-measure over BIO tag sequences.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::BioTag;

/// A tagged span, `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Counting unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact (sentence, start, end) span matches.
    #[default]
    Span,
    /// Non-O tokens whose tag matches.
    Token,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Span => "span",
            Mode::Token => "token",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "span" => Ok(Mode::Span),
            "token" => Ok(Mode::Token),
            other => Err(Error::Config(format!("unknown evaluation mode {other:?} (expected span or token)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: Mode,
    pub correct: usize,
    pub gold_total: usize,
    pub predicted_total: usize,
    /// Percentages in [0, 100].
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl EvalReport {
    fn from_counts(mode: Mode, correct: usize, gold_total: usize, predicted_total: usize) -> Self {
        let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 * 100.0 / den as f64 };
        let precision = pct(correct, predicted_total);
        let recall = pct(correct, gold_total);
        EvalReport {
            mode,
            correct,
            gold_total,
            predicted_total,
            precision,
            recall,
            f_measure: f_measure(precision, recall, 1.0),
        }
    }

    pub const CSV_HEADER: &'static str = "mode,correct,gold,predicted,P,R,F";

    /// One CSV data row matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.2},{:.2},{:.2}",
            self.mode, self.correct, self.gold_total, self.predicted_total, self.precision, self.recall, self.f_measure
        )
    }

    /// Plain-text table.
    pub fn to_table(&self) -> String {
        format!(
            "mode       {}\ncorrect    {}\ngold       {}\npredicted  {}\nprecision  {:.2}\nrecall     {:.2}\nf-measure  {:.2}\n",
            self.mode, self.correct, self.gold_total, self.predicted_total, self.precision, self.recall, self.f_measure
        )
    }
}

/// Parse tag strings.
pub fn parse_tags<S: AsRef<str>>(labels: &[S]) -> Result<Vec<BioTag>> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.as_ref()
                .parse()
                .map_err(|_| Error::Input(format!("token {i}: unknown label {:?}", l.as_ref())))
        })
        .collect()
}

/// Spans of one sentence. An I-MWE with no open span starts one.
pub fn extract_spans(labels: &[BioTag]) -> Vec<Span> {
    extract_spans_in(0, labels)
}

fn extract_spans_in(sentence_index: usize, labels: &[BioTag]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &tag) in labels.iter().enumerate() {
        match tag {
            BioTag::Begin => {
                if let Some(start) = open.take() {
                    spans.push(Span { sentence_index, start, end: i - 1 });
                }
                open = Some(i);
            }
            BioTag::Inside => {
                if open.is_none() {
                    open = Some(i);
                }
            }
            BioTag::O => {
                if let Some(start) = open.take() {
                    spans.push(Span { sentence_index, start, end: i - 1 });
                }
            }
        }
    }
    if let Some(start) = open {
        spans.push(Span { sentence_index, start, end: labels.len() - 1 });
    }
    spans
}

/// Compare predicted tags against gold, sentence by sentence.
pub fn score<G, P>(gold: &[G], predicted: &[P], mode: Mode) -> Result<EvalReport>
where
    G: AsRef<[BioTag]>,
    P: AsRef<[BioTag]>,
{
    if gold.len() != predicted.len() {
        return Err(Error::Input(format!(
            "gold has {} sentences but prediction has {}",
            gold.len(),
            predicted.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.as_ref().len() != p.as_ref().len() {
            return Err(Error::Input(format!(
                "sentence {i}: gold has {} tokens but prediction has {}",
                g.as_ref().len(),
                p.as_ref().len()
            )));
        }
    }
    let report = match mode {
        Mode::Span => {
            let collect = |c: &[&[BioTag]]| -> HashSet<Span> {
                c.iter().enumerate().flat_map(|(i, s)| extract_spans_in(i, s)).collect()
            };
            let g: Vec<&[BioTag]> = gold.iter().map(AsRef::as_ref).collect();
            let p: Vec<&[BioTag]> = predicted.iter().map(AsRef::as_ref).collect();
            let gs = collect(&g);
            let ps = collect(&p);
            EvalReport::from_counts(mode, gs.intersection(&ps).count(), gs.len(), ps.len())
        }
        Mode::Token => {
            let (mut correct, mut gold_total, mut predicted_total) = (0, 0, 0);
            for (g, p) in gold.iter().zip(predicted) {
                for (&gt, &pt) in g.as_ref().iter().zip(p.as_ref()) {
                    gold_total += usize::from(gt != BioTag::O);
                    predicted_total += usize::from(pt != BioTag::O);
                    correct += usize::from(gt != BioTag::O && gt == pt);
                }
            }
            EvalReport::from_counts(mode, correct, gold_total, predicted_total)
        }
    };
    Ok(report)
}

/// `(beta^2 + 1) P R / (beta^2 P + R)`; zero when both are zero.
pub fn f_measure(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        0.0
    } else {
        (b2 + 1.0) * precision * recall / den
    }
}
