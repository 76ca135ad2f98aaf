//! Documents, tokenization and the model vocabulary.
//!
//! Token offsets count Unicode scalar values, not bytes, so that the renderer
//! and the pixel hit-test agree on character positions regardless of encoding.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Word,
    Char,
}

impl std::str::FromStr for TokenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(TokenMode::Word),
            "char" => Ok(TokenMode::Char),
            other => Err(Error::InvalidConfig(format!("unknown token mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for TokenMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TokenMode::Word => "word",
            TokenMode::Char => "char",
        })
    }
}

/// One symbol of a document: a word or a single character.
///
/// `text` is the source slice `[char_start, char_end)`, lowercased when the
/// word tokenizer was asked to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, char_start: usize, char_end: usize) -> Self {
        Token {
            text: text.into(),
            char_start,
            char_end,
        }
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

/// Maximal runs of Unicode alphanumerics.
pub fn tokenize_words(text: &str, lowercase: bool) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, usize)> = None; // (char_start, byte_start)
    let mut char_pos = 0;

    let mut close = |run: &mut Option<(usize, usize)>, char_end: usize, byte_end: usize| {
        if let Some((start, byte_start)) = run.take() {
            let slice = &text[byte_start..byte_end];
            let text = if lowercase {
                slice.to_lowercase()
            } else {
                slice.to_owned()
            };
            tokens.push(Token::new(text, start, char_end));
        }
    };

    for (byte_pos, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if run.is_none() {
                run = Some((char_pos, byte_pos));
            }
        } else {
            close(&mut run, char_pos, byte_pos);
        }
        char_pos += 1;
    }
    close(&mut run, char_pos, text.len());
    tokens
}

/// One token per Unicode scalar value.
pub fn tokenize_chars(text: &str) -> Vec<Token> {
    text.chars()
        .enumerate()
        .map(|(i, c)| Token::new(c.to_string(), i, i + 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub source_text: String,
    pub tokens: Vec<Token>,
    /// Sortable key, usually an ISO-8601 date.
    pub order_key: Option<String>,
    pub label: Option<String>,
}

impl Document {
    pub fn tokenize(
        id: impl Into<String>,
        source_text: impl Into<String>,
        mode: TokenMode,
        lowercase: bool,
    ) -> Self {
        let source_text = source_text.into();
        let tokens = match mode {
            TokenMode::Word => tokenize_words(&source_text, lowercase),
            TokenMode::Char => tokenize_chars(&source_text),
        };
        Document {
            id: id.into(),
            source_text,
            tokens,
            order_key: None,
            label: None,
        }
    }

    pub fn with_order_key(mut self, key: impl Into<String>) -> Self {
        self.order_key = Some(key.into());
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Byte offset of every scalar position in `source_text`, plus one past the end.
    pub fn byte_offsets(&self) -> Vec<usize> {
        let mut offsets: Vec<usize> = self.source_text.char_indices().map(|(b, _)| b).collect();
        offsets.push(self.source_text.len());
        offsets
    }

    /// Source text between two scalar offsets.
    pub fn slice(&self, char_start: usize, char_end: usize) -> &str {
        let offsets = self.byte_offsets();
        &self.source_text[offsets[char_start]..offsets[char_end]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    token_mode: TokenMode,
}

impl Corpus {
    /// Checks id uniqueness and sorts by `order_key` when any document has
    /// one. The sort is stable; documents without a key go last.
    pub fn new(mut documents: Vec<Document>, token_mode: TokenMode) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        if documents.iter().any(|d| d.order_key.is_some()) {
            documents.sort_by(|a, b| {
                (a.order_key.is_none(), &a.order_key).cmp(&(b.order_key.is_none(), &b.order_key))
            });
        }
        Ok(Corpus {
            documents,
            token_mode,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn token_mode(&self) -> TokenMode {
        self.token_mode
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Document::len).sum()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One `{"id", "text", "date"?, "label"?}` object per line.
    Jsonl,
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub token_mode: TokenMode,
    pub lowercase: bool,
    /// Split every record into paragraph documents at blank lines. Paragraph
    /// `n` of record `id` gets the id `id#n`.
    pub split_paragraphs: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            token_mode: TokenMode::Word,
            lowercase: true,
            split_paragraphs: false,
        }
    }
}

impl LoadOptions {
    pub fn with_mode(token_mode: TokenMode) -> Self {
        LoadOptions {
            token_mode,
            ..Default::default()
        }
    }
}

#[derive(Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default)]
    date: Option<String>,
    #[serde(default)]
    label: Option<String>,
}

pub fn load_corpus(path: &Path, format: CorpusFormat, options: LoadOptions) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), format, options)
}

pub fn read_corpus(
    reader: impl BufRead,
    format: CorpusFormat,
    options: LoadOptions,
) -> Result<Corpus> {
    let CorpusFormat::Jsonl = format;
    let mut documents = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        let pieces = if options.split_paragraphs {
            split_paragraphs(&record.text)
                .into_iter()
                .enumerate()
                .map(|(n, p)| (format!("{}#{n}", record.id), p.to_owned()))
                .collect()
        } else {
            vec![(record.id.clone(), record.text.clone())]
        };
        for (id, text) in pieces {
            let mut doc = Document::tokenize(id, text, options.token_mode, options.lowercase);
            doc.order_key = record.date.clone();
            doc.label = record.label.clone();
            documents.push(doc);
        }
    }
    Corpus::new(documents, options.token_mode)
}

/// Paragraphs separated by lines that are empty or whitespace-only.
fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            if let Some(s) = start.take() {
                out.push(text[s..end].trim_end_matches(['\n', '\r']));
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        out.push(text[s..end].trim_end_matches(['\n', '\r']));
    }
    out
}

#[derive(Debug, Clone)]
pub struct VocabularyConfig {
    pub min_count: usize,
    pub max_doc_fraction: f64,
    pub stopwords: HashSet<String>,
}

impl Default for VocabularyConfig {
    fn default() -> Self {
        VocabularyConfig {
            min_count: 5,
            max_doc_fraction: 0.5,
            stopwords: english_stopwords(),
        }
    }
}

impl VocabularyConfig {
    /// Keep every term.
    pub fn keep_all() -> Self {
        VocabularyConfig {
            min_count: 1,
            max_doc_fraction: 1.0,
            stopwords: HashSet::new(),
        }
    }
}

/// The classic 127-word English stopword list.
pub fn english_stopwords() -> HashSet<String> {
    ENGLISH_STOPWORDS.lines().map(str::to_owned).collect()
}

/// Model vocabulary plus the per-token "in the model" flags for one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, usize>,
    modeled_mask: Vec<Vec<bool>>,
}

impl Vocabulary {
    /// Vocabulary from an explicit term list; ids follow list order.
    pub fn from_terms(terms: Vec<String>, corpus: &Corpus) -> Result<Self> {
        let mut ids = HashMap::with_capacity(terms.len());
        for (i, term) in terms.iter().enumerate() {
            if ids.insert(term.clone(), i).is_some() {
                return Err(Error::Model(format!("duplicate vocabulary term {term:?}")));
            }
        }
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let modeled_mask = corpus
            .documents()
            .iter()
            .map(|d| d.tokens.iter().map(|t| ids.contains_key(&t.text)).collect())
            .collect();
        Ok(Vocabulary {
            terms,
            ids,
            modeled_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn modeled_mask(&self) -> &[Vec<bool>] {
        &self.modeled_mask
    }

    pub fn modeled_count(&self) -> usize {
        self.modeled_mask.iter().flatten().filter(|&&m| m).count()
    }
}

/// Filter the corpus' terms by frequency, document frequency and stopwords.
/// Term ids are assigned in lexicographic order.
pub fn build_vocabulary(corpus: &Corpus, config: &VocabularyConfig) -> Result<Vocabulary> {
    if config.min_count < 1 {
        return Err(Error::InvalidConfig("min_count must be >= 1".into()));
    }
    if !(config.max_doc_fraction > 0.0 && config.max_doc_fraction <= 1.0) {
        return Err(Error::InvalidConfig(
            "max_doc_fraction must be in (0, 1]".into(),
        ));
    }
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for doc in corpus.documents() {
        let mut in_doc = HashSet::new();
        for token in &doc.tokens {
            let entry = counts.entry(token.text.as_str()).or_default();
            entry.0 += 1;
            if in_doc.insert(token.text.as_str()) {
                entry.1 += 1;
            }
        }
    }
    let n_docs = corpus.len() as f64;
    let mut terms: Vec<String> = counts
        .into_iter()
        .filter(|&(term, (count, df))| {
            count >= config.min_count
                && df as f64 <= config.max_doc_fraction * n_docs
                && !config.stopwords.contains(term)
        })
        .map(|(term, _)| term.to_owned())
        .collect();
    terms.sort_unstable();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Vocabulary::from_terms(terms, corpus)
}

/// Concatenation of the flagged tokens of every document, in corpus order:
/// maps a global index to `(document, position)` and back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenIndex {
    entries: Vec<(usize, usize)>,
    doc_starts: Vec<usize>,
}

impl TokenIndex {
    pub fn from_mask(mask: &[Vec<bool>]) -> Self {
        let mut entries = Vec::new();
        let mut doc_starts = Vec::with_capacity(mask.len() + 1);
        for (d, flags) in mask.iter().enumerate() {
            doc_starts.push(entries.len());
            entries.extend(
                flags
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(pos, _)| (d, pos)),
            );
        }
        doc_starts.push(entries.len());
        TokenIndex {
            entries,
            doc_starts,
        }
    }

    /// Every token of every document.
    pub fn all_tokens(corpus: &Corpus) -> Self {
        let mask: Vec<Vec<bool>> = corpus
            .documents()
            .iter()
            .map(|d| vec![true; d.len()])
            .collect();
        Self::from_mask(&mask)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_starts.len() - 1
    }

    pub fn locate(&self, t: usize) -> Option<(usize, usize)> {
        self.entries.get(t).copied()
    }

    pub fn doc_range(&self, doc: usize) -> std::ops::Range<usize> {
        self.doc_starts[doc]..self.doc_starts[doc + 1]
    }

    pub fn global(&self, doc: usize, pos: usize) -> Option<usize> {
        if doc >= self.num_docs() {
            return None;
        }
        let range = self.doc_range(doc);
        let slice = &self.entries[range.clone()];
        slice
            .binary_search_by_key(&pos, |&(_, p)| p)
            .ok()
            .map(|i| range.start + i)
    }

    /// True for the first flagged token of each document.
    pub fn doc_boundaries(&self) -> Vec<bool> {
        let mut flags = vec![false; self.len()];
        for d in 0..self.num_docs() {
            let r = self.doc_range(d);
            if !r.is_empty() {
                flags[r.start] = true;
            }
        }
        flags
    }
}
