//! JSON model files.
//!
//! Both model kinds share one file, discriminated by `"type"`:
//!
//! ```json
//! {"type":"lda","k":2,"alpha":0.1,"beta":0.01,"vocab":[..],"phi_mean":[[..]],"theta_mean":[[..]],"psi":{"doc":[[..]]}}
//! {"type":"linear","class_a":"en","class_b":"pt","prior_logit":0.3,"token_mode":"char","orders":[1,2,3],"weights":{"nna":-1.2}}
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::LinearTextModel;
use crate::corpus::{Corpus, TokenIndex, TokenMode, Vocabulary};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::topic_model::{TopicModelConfig, TopicPosterior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelFile {
    Lda(LdaModelFile),
    Linear(LinearModelFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModelFile {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub vocab: Vec<String>,
    pub phi_mean: Vec<Vec<f64>>,
    pub theta_mean: Vec<Vec<f64>>,
    /// Per document id, one K-vector per modeled token in document order.
    pub psi: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelFile {
    pub class_a: String,
    pub class_b: String,
    pub prior_logit: f64,
    pub token_mode: TokenMode,
    pub orders: Vec<usize>,
    pub weights: BTreeMap<String, f64>,
}

impl LdaModelFile {
    pub fn from_posterior<T: Real>(
        posterior: &TopicPosterior<T>,
        config: &TopicModelConfig<T>,
        vocab: &Vocabulary,
        corpus: &Corpus,
    ) -> Result<Self> {
        let index = TokenIndex::from_mask(vocab.modeled_mask());
        if index.len() != posterior.psi.len() {
            return Err(Error::LengthMismatch {
                expected: index.len(),
                actual: posterior.psi.len(),
            });
        }
        let to_f64 = |rows: &[Vec<T>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| r.iter().map(|x| x.to_f64_lossy()).collect())
                .collect()
        };
        let psi = corpus
            .documents()
            .iter()
            .enumerate()
            .map(|(d, doc)| (doc.id.clone(), to_f64(&posterior.psi[index.doc_range(d)])))
            .collect();
        Ok(LdaModelFile {
            k: config.k,
            alpha: config.alpha.to_f64_lossy(),
            beta: config.beta.to_f64_lossy(),
            vocab: vocab.terms().to_vec(),
            phi_mean: to_f64(&posterior.phi_mean),
            theta_mean: to_f64(&posterior.theta_mean),
            psi,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Model("k must be >= 1".into()));
        }
        if self.phi_mean.len() != self.k
            || self.phi_mean.iter().any(|r| r.len() != self.vocab.len())
        {
            return Err(Error::Model("phi_mean must be k × |vocab|".into()));
        }
        if self.theta_mean.iter().any(|r| r.len() != self.k) {
            return Err(Error::Model("theta_mean rows must have k entries".into()));
        }
        for (doc, rows) in &self.psi {
            if rows.iter().any(|r| r.len() != self.k) {
                return Err(Error::Model(format!("psi rows of {doc:?} must have k entries")));
            }
        }
        let all = self
            .phi_mean
            .iter()
            .chain(&self.theta_mean)
            .chain(self.psi.values().flatten())
            .flatten();
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lda model entry".into()));
        }
        Ok(())
    }
}

impl LinearModelFile {
    pub fn from_model<T: Real>(model: &LinearTextModel<T>) -> Self {
        LinearModelFile {
            class_a: model.class_a.clone(),
            class_b: model.class_b.clone(),
            prior_logit: model.prior_logit.to_f64_lossy(),
            token_mode: model.token_mode,
            orders: model.ngram_orders.iter().copied().collect(),
            weights: model
                .sorted_weights()
                .into_iter()
                .map(|(g, w)| (g.to_owned(), w.to_f64_lossy()))
                .collect(),
        }
    }

    pub fn into_model<T: Real>(self) -> Result<LinearTextModel<T>> {
        let model = LinearTextModel {
            class_a: self.class_a,
            class_b: self.class_b,
            prior_logit: T::from_f64_lossy(self.prior_logit),
            ngram_orders: self.orders.into_iter().collect(),
            weights: self
                .weights
                .into_iter()
                .map(|(g, w)| (g, T::from_f64_lossy(w)))
                .collect(),
            token_mode: self.token_mode,
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn read_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if let ModelFile::Lda(lda) = &file {
        lda.validate()?;
    }
    Ok(file)
}

pub fn write_model_file(path: &Path, file: &ModelFile) -> Result<()> {
    let mut bytes = serde_json::to_vec(file)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Load a two-class linear model (naive Bayes or imported logistic regression).
pub fn import_linear_model<T: Real>(path: &Path) -> Result<LinearTextModel<T>> {
    match read_model_file(path)? {
        ModelFile::Linear(file) => file.into_model(),
        ModelFile::Lda(_) => Err(Error::Model("expected a linear model, found lda".into())),
    }
}

pub fn export_linear_model<T: Real>(model: &LinearTextModel<T>, path: &Path) -> Result<()> {
    model.validate()?;
    write_model_file(path, &ModelFile::Linear(LinearModelFile::from_model(model)))
}
