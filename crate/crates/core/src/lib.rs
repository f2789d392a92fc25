//! Multiword-expression tagging with a linear-chain CRF whose feature
//! templates are chosen by a genetic algorithm.
//!
//! The pipeline runs bottom-up: [`stemmer`] strips affixes, [`features`]
//! turns raw tokens into 22-column rows, [`template`] expands feature
//! macros over those rows, [`crf`] trains and decodes, [`evaluation`]
//! scores BIO output, and [`ga`] searches over macro subsets. File
//! formats live in [`corpus`].

pub mod corpus;
pub mod crf;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ga;
pub mod stemmer;
pub mod template;

pub use corpus::{load_model, read_column_file, read_raw, save_model, write_column_file, Corpus, Sentence};
pub use crf::{tag_sentence, train, train_with_report, viterbi_decode, CrfModel, LabelSet, TrainConfig, TrainReport};
pub use error::{Error, Result};
pub use evaluation::{score, EvalReport, Mode, Span};
pub use features::{encode_sentence, BioTag, FeatureContext, Gazetteer, RawToken, TokenRecord};
pub use ga::{run_ga, Chromosome, GaConfig, GaOutcome, GenerationRecord};
pub use stemmer::{AffixLexicon, StemResult};
pub use template::{chromosome_to_template, FeatureMacro, Gene, GeneCatalogue, Template};
