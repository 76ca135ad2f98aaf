#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One JSONL record per document; ids are `d000`, `d001`, ...
pub fn write_jsonl(path: &Path, docs: &[(String, Option<&str>)]) {
    let mut out = String::new();
    for (i, (text, label)) in docs.iter().enumerate() {
        let mut rec = serde_json::json!({ "id": format!("d{i:03}"), "text": text });
        if let Some(label) = label {
            rec["label"] = serde_json::json!(label);
        }
        writeln!(out, "{rec}").unwrap();
    }
    std::fs::write(path, out).unwrap();
}

/// Two disjoint 20-word vocabularies. Each document mixes them with its own
/// proportion. Returns the texts and, per token, which vocabulary it came from.
pub fn planted_topics(seed: u64, docs: usize, len: usize) -> (Vec<String>, Vec<Vec<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: [Vec<String>; 2] = [
        (0..20).map(|i| format!("north{i:02}")).collect(),
        (0..20).map(|i| format!("south{i:02}")).collect(),
    ];
    let mut texts = Vec::new();
    let mut truth = Vec::new();
    for _ in 0..docs {
        let p: f64 = rng.random();
        let mut words = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..len {
            let topic = usize::from(rng.random::<f64>() >= p);
            words.push(vocab[topic][rng.random_range(0..20)].clone());
            labels.push(topic);
        }
        texts.push(words.join(" "));
        truth.push(labels);
    }
    (texts, truth)
}

/// Small labeled corpus used by command and HTTP tests.
pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (texts, _) = planted_topics(3, 40, 25);
        let docs: Vec<(String, Option<&str>)> = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, Some(if i % 2 == 0 { "east" } else { "west" })))
            .collect();
        write_jsonl(&dir.path().join("corpus.jsonl"), &docs);
        Fixture { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    pub fn train_lda(&self) -> PathBuf {
        let code = wordpixel_cli::run([
            "wordpixel", "--seed", "7", "train-lda", "--corpus", &self.arg("corpus.jsonl"), "--k", "2",
            "--sweeps", "60", "--avg-samples", "20", "--min-count", "1", "-o", &self.arg("lda.json"),
        ]);
        assert_eq!(code, 0);
        self.path("lda.json")
    }

    pub fn train_clf(&self) -> PathBuf {
        let code = wordpixel_cli::run([
            "wordpixel", "train-clf", "--corpus", &self.arg("corpus.jsonl"), "--ngrams", "1-2",
            "-o", &self.arg("clf.json"),
        ]);
        assert_eq!(code, 0);
        self.path("clf.json")
    }
}
