//! A model plus the corpus it describes, with every attribution, color and
//! the pixel layout computed up front.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use wordpixel::encoding::ColorConfig;
use wordpixel::io::{read_model_file, LdaModelFile, ModelFile};
use wordpixel::render::{encode_png, stride_sample};
use wordpixel::{
    doc_log_odds, encode_scalar, encode_topic, fit_scale, layout_pixels, load_corpus,
    passage_for_token, render_intext, render_pixels, CategoricalPalette, Color, Corpus,
    CorpusFormat, DivergingScaleF64, LinearTextModelF64, LoadOptions, Passage, PixelLayout,
    RenderMode, TokenIndex, TokenMode, Vocabulary,
};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct BundleOptions {
    pub colors: ColorConfig,
    pub column_height: usize,
    pub pixel_size: usize,
    pub separators: bool,
    pub stride: usize,
    pub render_mode: RenderMode,
    pub split_paragraphs: bool,
}

impl Default for BundleOptions {
    fn default() -> Self {
        BundleOptions {
            colors: ColorConfig::default(),
            column_height: 150,
            pixel_size: 3,
            separators: false,
            stride: 1,
            render_mode: RenderMode::Background,
            split_paragraphs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TokenPsi {
    Topic(Vec<f64>),
    Scalar(f64),
}

#[derive(Debug)]
pub enum BundleModel {
    Topic {
        file: LdaModelFile,
        palette: CategoricalPalette,
    },
    Linear {
        model: LinearTextModelF64,
        scale: DivergingScaleF64,
        totals: Vec<f64>,
    },
}

#[derive(Debug)]
pub struct SessionBundle {
    pub corpus: Corpus,
    pub model: BundleModel,
    /// Tokens shown in the pixel view, corpus order.
    pub index: TokenIndex,
    pub psi: Vec<TokenPsi>,
    pub colors: Vec<Color>,
    /// In-text colors per document; `None` for tokens outside the model.
    pub doc_colors: Vec<Vec<Option<Color>>>,
    pub layout: PixelLayout,
    pub options: BundleOptions,
}

impl SessionBundle {
    pub fn load(model_path: &Path, corpus_path: &Path, options: BundleOptions) -> Result<Self, CliError> {
        let model = read_model_file(model_path)?;
        let token_mode = match &model {
            ModelFile::Lda(_) => TokenMode::Word,
            ModelFile::Linear(l) => l.token_mode,
        };
        let load = LoadOptions {
            token_mode,
            lowercase: true,
            split_paragraphs: options.split_paragraphs,
        };
        let corpus = load_corpus(corpus_path, CorpusFormat::Jsonl, load)?;
        match model {
            ModelFile::Lda(file) => Self::topic(corpus, file, options),
            ModelFile::Linear(file) => Self::linear(corpus, file.into_model()?, options),
        }
    }

    fn topic(corpus: Corpus, file: LdaModelFile, options: BundleOptions) -> Result<Self, CliError> {
        let vocab = Vocabulary::from_terms(file.vocab.clone(), &corpus)?;
        let corpus_ids: BTreeSet<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
        let model_ids: BTreeSet<&str> = file.psi.keys().map(String::as_str).collect();
        if corpus_ids != model_ids {
            let missing: Vec<_> = model_ids.difference(&corpus_ids).take(3).collect();
            let extra: Vec<_> = corpus_ids.difference(&model_ids).take(3).collect();
            return Err(CliError::Mismatch(format!(
                "model and corpus documents differ (in model only: {missing:?}; in corpus only: {extra:?})"
            )));
        }
        for (doc, mask) in corpus.documents().iter().zip(vocab.modeled_mask()) {
            let modeled = mask.iter().filter(|&&m| m).count();
            let rows = file.psi[&doc.id].len();
            if modeled != rows {
                return Err(CliError::Mismatch(format!(
                    "document {:?}: corpus has {modeled} modeled tokens, model has {rows}",
                    doc.id
                )));
            }
        }

        let palette = CategoricalPalette::for_topics(&options.colors.palette, file.k)?;
        let index = TokenIndex::from_mask(vocab.modeled_mask());
        let mut psi = Vec::with_capacity(index.len());
        let mut colors = Vec::with_capacity(index.len());
        let mut doc_colors = Vec::with_capacity(corpus.len());
        for (doc, mask) in corpus.documents().iter().zip(vocab.modeled_mask()) {
            let mut rows = file.psi[&doc.id].iter();
            let mut per_token = Vec::with_capacity(doc.len());
            for &modeled in mask {
                if !modeled {
                    per_token.push(None);
                    continue;
                }
                let row = rows.next().expect("row count checked");
                let color = encode_topic(row, &palette, options.colors.blend)?;
                psi.push(TokenPsi::Topic(row.clone()));
                colors.push(color);
                per_token.push(Some(color));
            }
            doc_colors.push(per_token);
        }
        let layout = layout_pixels(index.len(), options.column_height, options.pixel_size)?;
        Ok(SessionBundle {
            corpus,
            model: BundleModel::Topic { file, palette },
            index,
            psi,
            colors,
            doc_colors,
            layout,
            options,
        })
    }

    fn linear(corpus: Corpus, model: LinearTextModelF64, options: BundleOptions) -> Result<Self, CliError> {
        let attributions: Vec<_> = corpus
            .documents()
            .iter()
            .map(|d| doc_log_odds(&model, &d.tokens))
            .collect();
        let all: Vec<f64> = attributions.iter().flat_map(|a| a.psi.iter().copied()).collect();
        let cfg = &options.colors;
        let scale = match fit_scale(&all, cfg.percentile, cfg.negative, cfg.positive) {
            Ok(scale) => scale,
            Err(wordpixel::Error::DegenerateAttribution) => {
                log::warn!("no feature fires anywhere in the corpus; every token will be white");
                DivergingScaleF64::with_colors(cfg.negative, cfg.positive, 1.0)?
            }
            Err(e) => return Err(e.into()),
        };
        let index = TokenIndex::all_tokens(&corpus);
        let mut psi = Vec::with_capacity(index.len());
        let mut colors = Vec::with_capacity(index.len());
        let mut doc_colors = Vec::with_capacity(corpus.len());
        for att in &attributions {
            let mut per_token = Vec::with_capacity(att.psi.len());
            for &p in &att.psi {
                let color = encode_scalar(p, &scale)?;
                psi.push(TokenPsi::Scalar(p));
                colors.push(color);
                per_token.push(Some(color));
            }
            doc_colors.push(per_token);
        }
        let layout = layout_pixels(index.len(), options.column_height, options.pixel_size)?;
        Ok(SessionBundle {
            corpus,
            model: BundleModel::Linear {
                model,
                scale,
                totals: attributions.iter().map(|a| a.total_log_odds).collect(),
            },
            index,
            psi,
            colors,
            doc_colors,
            layout,
            options,
        })
    }

    pub fn model_type(&self) -> &'static str {
        match self.model {
            BundleModel::Topic { .. } => "lda",
            BundleModel::Linear { .. } => "linear",
        }
    }

    /// The words-as-pixels PNG. With a stride above one, every stride-th
    /// token is drawn and the layout shrinks accordingly.
    pub fn pixels_png(&self) -> Result<Vec<u8>, CliError> {
        let separators = self.options.separators.then(|| self.index.doc_boundaries());
        let image = if self.options.stride > 1 {
            let colors = stride_sample(&self.colors, self.options.stride);
            let layout = layout_pixels(colors.len(), self.layout.column_height, self.layout.pixel_size)?;
            let flags = separators.map(|f| f.into_iter().step_by(self.options.stride).collect::<Vec<_>>());
            render_pixels(&layout, &colors, flags.as_deref())?
        } else {
            render_pixels(&self.layout, &self.colors, separators.as_deref())?
        };
        if image.width() == 0 {
            return Err(CliError::Data("nothing to draw: no modeled tokens".into()));
        }
        Ok(encode_png(&image)?)
    }

    pub fn annotate(&self, doc_id: &str) -> Result<String, CliError> {
        let d = self
            .corpus
            .position(doc_id)
            .ok_or_else(|| CliError::Data(format!("no document with id {doc_id:?}")))?;
        Ok(render_intext(
            &self.corpus.documents()[d],
            &self.doc_colors[d],
            self.options.render_mode,
        )?)
    }

    pub fn passage(&self, t: usize, window: usize) -> Result<Passage, wordpixel::Error> {
        passage_for_token(
            &self.corpus,
            &self.index,
            &self.doc_colors,
            t,
            window,
            self.options.render_mode,
        )
    }
}

/// Standalone page around an in-text fragment.
pub fn html_page(title: &str, fragment: &str) -> String {
    let mut escaped = String::new();
    wordpixel::render::escape_html(title, &mut escaped);
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{escaped}</title>\n\
         <style>.doc{{white-space:pre-wrap;font-family:serif;line-height:1.6}}.tok.focus{{outline:2px solid #000}}</style>\n\
         </head>\n<body>\n{fragment}\n</body>\n</html>\n"
    )
}
