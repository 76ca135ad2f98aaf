use std::collections::{HashMap, HashSet};
use std::io::Write;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordpixel::corpus::{read_corpus, VocabularyConfig};
use wordpixel::{
    build_vocabulary, load_corpus, tokenize_chars, tokenize_words, Corpus, CorpusFormat, Document,
    LoadOptions, TokenMode,
};

fn scalar_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

#[test]
fn offsets_round_trip_on_mixed_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alphabet: Vec<char> = "ab Zé9.,;!?-  \n\tçΩ'\"".chars().collect();
    let text: String = (0..100)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect();
    assert_eq!(text.chars().count(), 100);
    let tokens = tokenize_words(&text, false);
    assert!(!tokens.is_empty());
    for tok in &tokens {
        assert_eq!(scalar_slice(&text, tok.char_start, tok.char_end), tok.text);
    }
    let lowered = tokenize_words(&text, true);
    for (a, b) in tokens.iter().zip(&lowered) {
        assert_eq!(a.text.to_lowercase(), b.text);
        assert_eq!((a.char_start, a.char_end), (b.char_start, b.char_end));
    }
}

proptest! {
    #[test]
    fn word_tokens_are_maximal_alnum_runs(text in "\\PC{0,60}") {
        let tokens = tokenize_words(&text, false);
        let chars: Vec<char> = text.chars().collect();
        let mut prev_end = 0;
        for tok in &tokens {
            prop_assert!(tok.char_start < tok.char_end);
            prop_assert!(tok.char_start >= prev_end);
            prop_assert_eq!(scalar_slice(&text, tok.char_start, tok.char_end), tok.text.clone());
            prop_assert!(chars[tok.char_start..tok.char_end].iter().all(|c| c.is_alphanumeric()));
            prop_assert!(tok.char_start == 0 || !chars[tok.char_start - 1].is_alphanumeric());
            prop_assert!(tok.char_end == chars.len() || !chars[tok.char_end].is_alphanumeric());
            prev_end = tok.char_end;
        }
        let covered: usize = tokens.iter().map(|t| t.char_end - t.char_start).sum();
        prop_assert_eq!(covered, chars.iter().filter(|c| c.is_alphanumeric()).count());
        prop_assert_eq!(tokenize_words(&text, false), tokens);
    }

    #[test]
    fn char_tokens_cover_every_scalar(text in "\\PC{0,60}") {
        let tokens = tokenize_chars(&text);
        prop_assert_eq!(tokens.len(), text.chars().count());
        let total: usize = tokens.iter().map(|t| t.char_end - t.char_start).sum();
        prop_assert_eq!(total, text.chars().count());
        prop_assert_eq!(tokens.iter().map(|t| t.text.as_str()).collect::<String>(), text);
    }
}

fn random_corpus(rng: &mut ChaCha8Rng, n_docs: usize) -> Corpus {
    let words = ["tax", "war", "the", "budget", "peace", "and", "jobs", "of", "oil", "farm"];
    let docs = (0..n_docs)
        .map(|d| {
            let len = rng.random_range(0..25);
            let text: Vec<&str> = (0..len)
                .map(|_| words[rng.random_range(0..words.len())])
                .collect();
            Document::tokenize(format!("d{d}"), text.join(" "), TokenMode::Word, true)
        })
        .collect();
    Corpus::new(docs, TokenMode::Word).unwrap()
}

#[test]
fn vocabulary_matches_brute_force_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let corpus = random_corpus(&mut rng, 50);
        let config = VocabularyConfig {
            min_count: 1 + trial % 6,
            max_doc_fraction: [1.0, 0.5, 0.3, 0.8][trial % 4],
            stopwords: ["the", "and", "of"].iter().map(|s| s.to_string()).collect(),
        };

        // Independent recount: one pass per candidate term.
        let mut candidates: HashSet<&str> = HashSet::new();
        for doc in corpus.documents() {
            for t in &doc.tokens {
                candidates.insert(&t.text);
            }
        }
        let mut expected: Vec<String> = candidates
            .into_iter()
            .filter(|term| {
                let freq = corpus
                    .documents()
                    .iter()
                    .flat_map(|d| &d.tokens)
                    .filter(|t| t.text == *term)
                    .count();
                let df = corpus
                    .documents()
                    .iter()
                    .filter(|d| d.tokens.iter().any(|t| t.text == *term))
                    .count();
                freq >= config.min_count
                    && (df as f64) <= config.max_doc_fraction * corpus.len() as f64
                    && !config.stopwords.contains(*term)
            })
            .map(str::to_owned)
            .collect();
        expected.sort();

        match build_vocabulary(&corpus, &config) {
            Ok(vocab) => {
                assert_eq!(vocab.terms(), expected.as_slice());
                for (doc, mask) in corpus.documents().iter().zip(vocab.modeled_mask()) {
                    for (tok, &m) in doc.tokens.iter().zip(mask) {
                        assert_eq!(m, expected.contains(&tok.text));
                    }
                }
            }
            Err(e) => {
                assert!(expected.is_empty(), "unexpected error {e}");
            }
        }
    }
}

#[test]
fn load_thousand_records_counts_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let mut expected = Vec::new();
    for i in 0..1000 {
        let n = rng.random_range(0..12);
        let words: Vec<String> = (0..n)
            .map(|_| {
                let len = rng.random_range(1..6);
                (0..len)
                    .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                    .collect()
            })
            .collect();
        let text = words.join(" ");
        expected.push((format!("r{i}"), text.split_whitespace().count()));
        writeln!(file, "{}", serde_json::json!({"id": format!("r{i}"), "text": text})).unwrap();
    }
    file.flush().unwrap();
    let corpus = load_corpus(file.path(), CorpusFormat::Jsonl, LoadOptions::default()).unwrap();
    assert_eq!(corpus.len(), 1000);
    for (doc, (id, count)) in corpus.documents().iter().zip(&expected) {
        assert_eq!(&doc.id, id);
        assert_eq!(doc.len(), *count);
    }
}

#[test]
fn load_missing_file_is_io_error() {
    let err = load_corpus(
        std::path::Path::new("/nonexistent/c.jsonl"),
        CorpusFormat::Jsonl,
        LoadOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("/nonexistent/c.jsonl"));
}

#[test]
fn char_mode_load_and_labels() {
    let data = "{\"id\":\"t1\",\"text\":\"lmao\",\"label\":\"en\"}\n{\"id\":\"t2\",\"text\":\"finna\",\"label\":\"ga\",\"date\":\"2016-01-02\"}\n";
    let corpus = read_corpus(
        data.as_bytes(),
        CorpusFormat::Jsonl,
        LoadOptions::with_mode(TokenMode::Char),
    )
    .unwrap();
    // keyed documents sort ahead of unkeyed ones
    assert_eq!(corpus.documents()[0].id, "t2");
    assert_eq!(corpus.documents()[0].len(), 5);
    assert_eq!(corpus.documents()[1].label.as_deref(), Some("en"));
    let labels: HashMap<_, _> = corpus
        .documents()
        .iter()
        .map(|d| (d.id.as_str(), d.label.as_deref()))
        .collect();
    assert_eq!(labels["t2"], Some("ga"));
}
