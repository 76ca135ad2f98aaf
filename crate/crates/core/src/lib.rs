//! Token-level "quantities of interest" for statistical text models, and the
//! two views that display them: in-text color annotation and a zoomed-out
//! words-as-pixels raster of a whole corpus.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file pin the `f64` instantiation used by the file
//! formats and the command-line tools.

pub mod classifier;
pub mod corpus;
pub mod encoding;
mod error;
pub mod io;
pub mod num;
pub mod render;
pub mod topic_model;

pub use crate::classifier::{
    counterfactual_delete, doc_log_odds, span_weights, token_attribution, train_mnb,
    LinearTextModel, MnbConfig, ScalarAttribution, SpanWeight,
};
pub use crate::corpus::{
    build_vocabulary, load_corpus, tokenize_chars, tokenize_words, Corpus, CorpusFormat,
    Document, LoadOptions, Token, TokenIndex, TokenMode, Vocabulary, VocabularyConfig,
};
pub use crate::encoding::{
    encode_scalar, encode_topic, fit_scale, normalized_entropy, CategoricalPalette, Color,
    ColorConfig, DivergingScale,
};
pub use crate::error::{Error, Result};
pub use crate::num::{exact_sum, Real};
pub use crate::render::{
    hit_test, layout_pixels, passage_for_token, render_intext, render_pixels, Passage,
    PixelLayout, RenderMode,
};
pub use crate::topic_model::{
    estimate_posteriors, token_posterior, top_words, GibbsSampler, TopicData, TopicModelConfig,
    TopicPosterior, TopicState,
};

pub type LinearTextModelF64 = LinearTextModel<f64>;
pub type LinearTextModelF32 = LinearTextModel<f32>;
pub type SpanWeightF64 = SpanWeight<f64>;
pub type ScalarAttributionF64 = ScalarAttribution<f64>;
pub type MnbConfigF64 = MnbConfig<f64>;
pub type TopicModelConfigF64 = TopicModelConfig<f64>;
pub type TopicPosteriorF64 = TopicPosterior<f64>;
pub type GibbsSamplerF64 = GibbsSampler<f64>;
pub type DivergingScaleF64 = DivergingScale<f64>;
