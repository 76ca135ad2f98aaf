//! Two-class linear models over n-gram features and their per-token
//! attribution.
//!
//! A document's posterior log-odds is `prior_logit + Σ weight(span)` over every
//! n-gram span that has a weight. A token's attribution is the sum of the
//! weights of all spans covering it; tokens covered by nothing get zero.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::{Corpus, TokenMode};
use crate::error::{Error, Result};
use crate::num::{exact_sum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTextModel<T> {
    pub class_a: String,
    pub class_b: String,
    /// `log(π_a / π_b)`, or the bias of an imported logistic regression.
    pub prior_logit: T,
    pub ngram_orders: BTreeSet<usize>,
    /// Per-gram log-odds contribution toward class a.
    pub weights: HashMap<String, T>,
    pub token_mode: TokenMode,
}

impl<T: Real> LinearTextModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_orders.is_empty() || self.ngram_orders.contains(&0) {
            return Err(Error::Model(
                "n-gram orders must be nonempty and >= 1".into(),
            ));
        }
        if !self.prior_logit.is_finite() {
            return Err(Error::NonFinite("prior_logit".into()));
        }
        if let Some((gram, _)) = self.weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFinite(format!("weight of {gram:?}")));
        }
        Ok(())
    }

    /// Gram string for a token run: concatenation in char mode, single-space
    /// join in word mode.
    pub fn gram<S: AsRef<str>>(&self, tokens: &[S]) -> String {
        let mut out = String::new();
        self.write_gram(tokens, &mut out);
        out
    }

    fn write_gram<S: AsRef<str>>(&self, tokens: &[S], out: &mut String) {
        out.clear();
        for (i, tok) in tokens.iter().enumerate() {
            if i > 0 && self.token_mode == TokenMode::Word {
                out.push(' ');
            }
            out.push_str(tok.as_ref());
        }
    }

    /// Weights sorted by gram.
    pub fn sorted_weights(&self) -> BTreeMap<&str, T> {
        self.weights.iter().map(|(g, &w)| (g.as_str(), w)).collect()
    }
}

/// Log-odds weight of the n-gram occupying token positions `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanWeight<T> {
    pub start: usize,
    pub end: usize,
    pub gram: String,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAttribution<T> {
    pub psi: Vec<T>,
    pub spans: Vec<SpanWeight<T>>,
    pub prior_logit: T,
    pub total_log_odds: T,
}

impl<T: Real> ScalarAttribution<T> {
    pub fn favors_a(&self) -> bool {
        self.total_log_odds > T::zero()
    }
}

/// Every firing n-gram of `tokens`, ordered by start then end.
pub fn span_weights<T: Real, S: AsRef<str>>(
    model: &LinearTextModel<T>,
    tokens: &[S],
) -> Vec<SpanWeight<T>> {
    let mut spans = Vec::new();
    if model.weights.is_empty() {
        return spans;
    }
    let mut buf = String::new();
    for start in 0..tokens.len() {
        for &order in &model.ngram_orders {
            let end = start + order;
            if end > tokens.len() {
                break;
            }
            model.write_gram(&tokens[start..end], &mut buf);
            if let Some(&weight) = model.weights.get(buf.as_str()) {
                spans.push(SpanWeight {
                    start,
                    end,
                    gram: buf.clone(),
                    weight,
                });
            }
        }
    }
    spans
}

/// `psi[t] = Σ weight` over spans containing `t`, accumulated in span order.
pub fn token_attribution<T: Real>(spans: &[SpanWeight<T>], n_tokens: usize) -> Result<Vec<T>> {
    let mut psi = vec![T::zero(); n_tokens];
    for span in spans {
        if span.start >= span.end || span.end > n_tokens {
            return Err(Error::OutOfRange {
                index: span.end,
                len: n_tokens,
            });
        }
        for slot in &mut psi[span.start..span.end] {
            *slot = *slot + span.weight;
        }
    }
    Ok(psi)
}

/// Posterior log-odds of class a over class b, with its per-token breakdown.
///
/// The total is accumulated left to right from `prior_logit` in span order, so
/// for unigram models `prior_logit + psi[0] + psi[1] + ...` reproduces it bit
/// for bit.
pub fn doc_log_odds<T: Real, S: AsRef<str>>(
    model: &LinearTextModel<T>,
    tokens: &[S],
) -> ScalarAttribution<T> {
    let spans = span_weights(model, tokens);
    let psi = token_attribution(&spans, tokens.len()).expect("spans come from these tokens");
    let total_log_odds = spans
        .iter()
        .fold(model.prior_logit, |acc, s| acc + s.weight);
    ScalarAttribution {
        psi,
        spans,
        prior_logit: model.prior_logit,
        total_log_odds,
    }
}

/// Change in log-odds when token `t` is removed, recomputed from the n-grams
/// of the shortened sequence (so grams bridging the gap are included).
///
/// The two span sets are differenced with a single rounding, which makes the
/// unigram case come out as exactly `-psi[t]`.
pub fn counterfactual_delete<T: Real, S: AsRef<str>>(
    model: &LinearTextModel<T>,
    tokens: &[S],
    t: usize,
) -> Result<T> {
    if t >= tokens.len() {
        return Err(Error::OutOfRange {
            index: t,
            len: tokens.len(),
        });
    }
    let shortened: Vec<&str> = tokens
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .map(|(_, s)| s.as_ref())
        .collect();
    let before = span_weights(model, tokens);
    let after = span_weights(model, &shortened);
    Ok(exact_sum(
        after
            .iter()
            .map(|s| s.weight)
            .chain(before.iter().map(|s| -s.weight)),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MnbConfig<T> {
    pub ngram_orders: BTreeSet<usize>,
    /// Add-s smoothing constant.
    pub smoothing: T,
    /// Keep only this many features, largest |weight| first.
    pub max_features: Option<usize>,
    /// Which label plays class a. Defaults to the lexicographically first.
    pub class_a: Option<String>,
}

impl<T: Real> Default for MnbConfig<T> {
    fn default() -> Self {
        MnbConfig {
            ngram_orders: BTreeSet::from([1]),
            smoothing: T::one(),
            max_features: None,
            class_a: None,
        }
    }
}

/// Multinomial naive Bayes with add-s smoothing over a gram universe shared by
/// both classes.
pub fn train_mnb<T: Real>(corpus: &Corpus, config: &MnbConfig<T>) -> Result<LinearTextModel<T>> {
    if !(config.smoothing > T::zero()) {
        return Err(Error::InvalidConfig("smoothing must be positive".into()));
    }
    if config.ngram_orders.is_empty() || config.ngram_orders.contains(&0) {
        return Err(Error::InvalidConfig(
            "n-gram orders must be nonempty and >= 1".into(),
        ));
    }
    let mut labels = BTreeSet::new();
    for doc in corpus.documents() {
        let label = doc
            .label
            .as_deref()
            .ok_or_else(|| Error::Labels(format!("document {:?} has no label", doc.id)))?;
        labels.insert(label);
    }
    if labels.len() != 2 {
        return Err(Error::Labels(format!(
            "expected exactly two classes, found {}",
            labels.len()
        )));
    }
    let mut labels: Vec<&str> = labels.into_iter().collect();
    if let Some(a) = &config.class_a {
        match labels.iter().position(|l| l == a) {
            Some(0) => {}
            Some(_) => labels.swap(0, 1),
            None => return Err(Error::Labels(format!("class {a:?} not in corpus"))),
        }
    }
    let (class_a, class_b) = (labels[0].to_owned(), labels[1].to_owned());

    let skeleton = LinearTextModel {
        class_a,
        class_b,
        prior_logit: T::zero(),
        ngram_orders: config.ngram_orders.clone(),
        weights: HashMap::new(),
        token_mode: corpus.token_mode(),
    };

    let mut counts: HashMap<String, [usize; 2]> = HashMap::new();
    let mut totals = [0usize; 2];
    let mut docs = [0usize; 2];
    for doc in corpus.documents() {
        let class = usize::from(doc.label.as_deref() != Some(skeleton.class_a.as_str()));
        docs[class] += 1;
        for &order in &config.ngram_orders {
            for window in doc.tokens.windows(order) {
                counts.entry(skeleton.gram(window)).or_default()[class] += 1;
                totals[class] += 1;
            }
        }
    }

    let s = config.smoothing;
    let g = T::from_count(counts.len());
    let denom_a = T::from_count(totals[0]) + s * g;
    let denom_b = T::from_count(totals[1]) + s * g;
    let mut weights: Vec<(String, T)> = counts
        .into_iter()
        .map(|(gram, [ca, cb])| {
            let pa = (T::from_count(ca) + s) / denom_a;
            let pb = (T::from_count(cb) + s) / denom_b;
            (gram, pa.ln() - pb.ln())
        })
        .collect();

    if let Some(max) = config.max_features {
        weights.sort_by(|(ga, wa), (gb, wb)| {
            wb.abs()
                .partial_cmp(&wa.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| ga.cmp(gb))
        });
        weights.truncate(max);
    }

    let model = LinearTextModel {
        prior_logit: (T::from_count(docs[0]) / T::from_count(docs[1])).ln(),
        weights: weights.into_iter().collect(),
        ..skeleton
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn model(mode: TokenMode, orders: &[usize], weights: &[(&str, f64)]) -> LinearTextModel<f64> {
        LinearTextModel {
            class_a: "a".into(),
            class_b: "b".into(),
            prior_logit: 0.0,
            ngram_orders: orders.iter().copied().collect(),
            weights: weights.iter().map(|&(g, w)| (g.to_owned(), w)).collect(),
            token_mode: mode,
        }
    }

    fn chars(s: &str) -> Vec<String> {
        s.chars().map(String::from).collect()
    }

    fn labeled(docs: &[(&str, &str)]) -> Corpus {
        let docs = docs
            .iter()
            .enumerate()
            .map(|(i, (label, text))| {
                Document::tokenize(format!("d{i}"), *text, TokenMode::Word, true).with_label(*label)
            })
            .collect();
        Corpus::new(docs, TokenMode::Word).unwrap()
    }

    #[test]
    fn mnb_add_one() {
        let corpus = labeled(&[("a", "x x y"), ("b", "y y")]);
        let m: LinearTextModel<f64> = train_mnb(&corpus, &MnbConfig::default()).unwrap();
        assert!((m.weights["x"] - 2.4f64.ln()).abs() < 1e-12);
        assert!((m.weights["x"] - 0.875469).abs() < 1e-6);
        assert!((m.weights["y"] - (8.0f64 / 15.0).ln()).abs() < 1e-12);
        assert!((m.weights["y"] + 0.628609).abs() < 1e-6);
        assert_eq!(m.prior_logit, 0.0);

        let att = doc_log_odds(&m, &["x", "y"]);
        assert!((att.total_log_odds - 0.246860).abs() < 1e-6);
        assert!(att.favors_a());
    }

    #[test]
    fn mnb_symmetric_classes() {
        let corpus = labeled(&[("a", "p q r p"), ("b", "p q r p")]);
        let m: LinearTextModel<f64> = train_mnb(&corpus, &MnbConfig::default()).unwrap();
        assert_eq!(m.prior_logit, 0.0);
        assert!(m.weights.values().all(|&w| w == 0.0));
    }

    #[test]
    fn mnb_errors() {
        let one = labeled(&[("a", "x"), ("a", "y")]);
        assert!(matches!(train_mnb::<f64>(&one, &MnbConfig::default()), Err(Error::Labels(_))));
        let three = labeled(&[("a", "x"), ("b", "y"), ("c", "z")]);
        assert!(matches!(train_mnb::<f64>(&three, &MnbConfig::default()), Err(Error::Labels(_))));
        let two = labeled(&[("a", "x"), ("b", "y")]);
        let bad = MnbConfig { smoothing: 0.0, ..MnbConfig::default() };
        assert!(matches!(train_mnb(&two, &bad), Err(Error::InvalidConfig(_))));
        let unlabeled = Corpus::new(
            vec![Document::tokenize("u", "x", TokenMode::Word, true)],
            TokenMode::Word,
        )
        .unwrap();
        assert!(matches!(train_mnb::<f64>(&unlabeled, &MnbConfig::default()), Err(Error::Labels(_))));
    }

    #[test]
    fn mnb_class_choice_and_truncation() {
        let corpus = labeled(&[("en", "x x y z"), ("pt", "y y z")]);
        let config = MnbConfig {
            class_a: Some("pt".into()),
            max_features: Some(1),
            ..MnbConfig::default()
        };
        let m: LinearTextModel<f64> = train_mnb(&corpus, &config).unwrap();
        assert_eq!((m.class_a.as_str(), m.class_b.as_str()), ("pt", "en"));
        assert_eq!(m.weights.len(), 1);
        assert!(m.weights.contains_key("x"));
        assert!(m.weights["x"] < 0.0);
    }

    #[test]
    fn spans_char_bigrams() {
        let m = model(TokenMode::Char, &[2], &[("ab", 0.5), ("bc", -0.2)]);
        let spans = span_weights(&m, &chars("abc"));
        let got: Vec<_> = spans
            .iter()
            .map(|s| (s.start, s.end, s.gram.as_str(), s.weight))
            .collect();
        assert_eq!(got, [(0, 2, "ab", 0.5), (1, 3, "bc", -0.2)]);

        let psi = token_attribution(&spans, 3).unwrap();
        assert_eq!(psi, vec![0.5, 0.5 + -0.2, -0.2]);
        assert!(token_attribution(&spans, 2).is_err());

        let empty = model(TokenMode::Char, &[2], &[]);
        assert!(span_weights(&empty, &chars("abc")).is_empty());
        assert_eq!(token_attribution::<f64>(&[], 4).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn word_grams_space_joined() {
        let m = model(TokenMode::Word, &[1, 2], &[("tax cuts", 1.0), ("now", 2.0)]);
        let spans = span_weights(&m, &["tax", "cuts", "now"]);
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].gram, "tax cuts");
        assert_eq!((spans[1].start, spans[1].end), (2, 3));
    }

    #[test]
    fn log_odds_degenerate_docs() {
        let mut m = model(TokenMode::Word, &[1], &[("x", 1.5)]);
        m.prior_logit = -0.25;
        let empty: [&str; 0] = [];
        assert_eq!(doc_log_odds(&m, &empty).total_log_odds, -0.25);
        let zero = model(TokenMode::Word, &[1], &[("x", 0.0)]);
        assert_eq!(doc_log_odds(&zero, &["x", "y", "x"]).total_log_odds, 0.0);
    }

    #[test]
    fn deletion() {
        let m = model(TokenMode::Word, &[1], &[("x", 0.7), ("y", -0.1)]);
        let doc = ["x", "z", "y", "x"];
        let att = doc_log_odds(&m, &doc);
        for t in 0..doc.len() {
            assert_eq!(counterfactual_delete(&m, &doc, t).unwrap(), -att.psi[t]);
        }
        assert_eq!(counterfactual_delete(&m, &doc, 1).unwrap(), 0.0);
        assert!(counterfactual_delete(&m, &doc, 4).is_err());

        let m = model(TokenMode::Char, &[2], &[("ab", 0.5), ("bc", -0.2), ("ac", 1.0)]);
        let abc = chars("abc");
        let psi = doc_log_odds(&m, &abc).psi;
        let delta = counterfactual_delete(&m, &abc, 1).unwrap();
        assert!((delta - 0.7).abs() < 1e-15);
        assert!((delta + psi[1]).abs() > 0.5);
    }

    #[test]
    fn validate_rejects_non_finite() {
        let m = model(TokenMode::Char, &[1], &[("a", f64::NAN)]);
        assert!(matches!(m.validate(), Err(Error::NonFinite(_))));
        let m = model(TokenMode::Char, &[], &[]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn generic_f32() {
        let m = LinearTextModel::<f32> {
            class_a: "a".into(),
            class_b: "b".into(),
            prior_logit: 0.5,
            ngram_orders: BTreeSet::from([1]),
            weights: HashMap::from([("x".to_owned(), 0.25f32)]),
            token_mode: TokenMode::Word,
        };
        assert_eq!(doc_log_odds(&m, &["x", "x"]).total_log_odds, 1.0f32);
    }
}
