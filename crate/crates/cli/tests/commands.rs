mod common;

use std::process::Command;

use common::{write_jsonl, Fixture};

fn wordpixel(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wordpixel")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    let fx = Fixture::new();
    let lda = fx.train_lda();
    let corpus = fx.arg("corpus.jsonl");

    assert_eq!(wordpixel(&["--help"]).status.code(), Some(0));
    assert_eq!(wordpixel(&["--version"]).status.code(), Some(0));
    assert_eq!(wordpixel(&[]).status.code(), Some(1));
    assert_eq!(wordpixel(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wordpixel(&["train-lda", "--corpus", &corpus]).status.code(), Some(1));
    assert_eq!(wordpixel(&["train-clf", "--corpus", &corpus, "--ngrams", "3-1", "-o", "x"]).status.code(), Some(1));

    let missing = wordpixel(&["pixels", "--model", "nope.json", "--corpus", &corpus, "-o", &fx.arg("p.png")]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.json"));

    let no_doc = wordpixel(&["annotate", "--model", lda.to_str().unwrap(), "--corpus", &corpus, "--doc", "zzz", "-o", &fx.arg("a.html")]);
    assert_eq!(no_doc.status.code(), Some(2));
}

#[test]
fn mismatched_corpus_is_rejected() {
    let fx = Fixture::new();
    let lda = fx.train_lda();
    let other = fx.path("other.jsonl");
    write_jsonl(&other, &[("north01 north02 south03".into(), None)]);
    let out = wordpixel(&["pixels", "--model", lda.to_str().unwrap(), "--corpus", other.to_str().unwrap(), "-o", &fx.arg("p.png")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
    assert!(!fx.path("p.png").exists());

    // Same ids, one extra modeled token.
    let mut lines: Vec<serde_json::Value> = std::fs::read_to_string(fx.path("corpus.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let text = format!("{} north00", lines[0]["text"].as_str().unwrap());
    lines[0]["text"] = text.into();
    let body: String = lines.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&other, body).unwrap();
    let out = wordpixel(&["pixels", "--model", lda.to_str().unwrap(), "--corpus", other.to_str().unwrap(), "-o", &fx.arg("p.png")]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("modeled tokens"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn annotate_writes_a_page_per_mode() {
    let fx = Fixture::new();
    let clf = fx.train_clf();
    let corpus = fx.arg("corpus.jsonl");
    for (flag, property) in [(None, "background-color:"), (Some("--fg"), "color:")] {
        let mut args = vec!["annotate", "--model", clf.to_str().unwrap(), "--corpus", &corpus, "--doc", "d004"];
        let out = fx.arg("d004.html");
        args.extend(flag);
        args.extend(["-o", &out]);
        assert_eq!(wordpixel(&args).status.code(), Some(0));
        let html = std::fs::read_to_string(&out).unwrap();
        assert!(html.starts_with("<!DOCTYPE html>"));
        assert!(html.contains("<div class=\"doc\" data-doc=\"d004\">"));
        assert!(html.contains(&format!("style=\"{property}#")));
    }
}

#[test]
fn stride_and_separators_change_the_raster() {
    let fx = Fixture::new();
    let clf = fx.train_clf();
    let corpus = fx.arg("corpus.jsonl");
    let size = |extra: &[&str], name: &str| {
        let out = fx.arg(name);
        let mut args = vec!["pixels", "--model", clf.to_str().unwrap(), "--corpus", &corpus, "--column-height", "50", "--pixel-size", "1", "-o", &out];
        args.extend(extra);
        assert_eq!(wordpixel(&args).status.code(), Some(0));
        let img = image::open(&out).unwrap();
        (img.width(), img.height())
    };
    // 40 documents of 25 tokens.
    assert_eq!(size(&[], "a.png"), (20, 50));
    assert_eq!(size(&["--stride", "4"], "b.png"), (5, 50));
    assert_eq!(size(&["--separators"], "c.png"), (20, 50));
    assert_ne!(std::fs::read(fx.path("a.png")).unwrap(), std::fs::read(fx.path("c.png")).unwrap());
    assert_eq!(wordpixel(&["pixels", "--model", clf.to_str().unwrap(), "--corpus", &corpus, "--stride", "0", "-o", &fx.arg("d.png")]).status.code(), Some(1));
}
