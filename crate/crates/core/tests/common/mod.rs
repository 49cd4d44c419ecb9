#![allow(dead_code)]

use std::collections::BTreeSet;

use dotrank::corpus::{analyze_files, CorpusAnalysis, SourceFile};
use dotrank::features::ngram::{BOS, EOS, UNK};
use dotrank::forest::ForestConfig;
use dotrank::frontend::DEFAULT_WINDOW;
use dotrank::recommender::ModelConfig;

pub fn file(project: &str, name: &str, text: &str) -> SourceFile {
    SourceFile {
        project: project.into(),
        file_id: format!("{project}/{name}"),
        text: text.into(),
    }
}

/// Small files that iterate dicts, read files and build lists.
pub fn toy_files() -> Vec<SourceFile> {
    let mut out = Vec::new();
    for i in 0..8 {
        let text = format!(
            "import os\n\n\
             def merge_{i}(conf, extra):\n\
             \x20   d = dict(conf)\n\
             \x20   for k, v in d.items():\n\
             \x20       print(k, v)\n\
             \x20   names = list(d.keys())\n\
             \x20   d.update(extra)\n\
             \x20   out = []\n\
             \x20   out.append(names)\n\
             \x20   path = os.path.join(\"a\", \"b\")\n\
             \x20   return d.get(\"x\"), out, path\n\
             \n\
             def walk_{i}(table):\n\
             \x20   t = dict(table)\n\
             \x20   for key, val in t.items():\n\
             \x20       t.setdefault(key, val)\n\
             \x20   return t.pop(\"k\")\n"
        );
        out.push(file("toy", &format!("m{i}.py"), &text));
    }
    out
}

pub fn toy_analysis() -> CorpusAnalysis {
    analyze_files(&toy_files(), DEFAULT_WINDOW)
}

pub fn small_config(seed: u64) -> ModelConfig {
    ModelConfig {
        forest: ForestConfig {
            n_trees: 20,
            max_depth: 8,
            max_features: 2,
            seed,
        },
        ..ModelConfig::default()
    }
}

/// Direct count-and-smooth oracle: longest history seen in training, add-one.
pub fn oracle_prob(order: usize, seqs: &[Vec<String>], ctx: &[&str], w: &str) -> f64 {
    let vocab: BTreeSet<&str> = seqs.iter().flatten().map(String::as_str).collect();
    let known = |t: &str| if vocab.contains(t) { t.to_string() } else { UNK.to_string() };
    let padded: Vec<Vec<String>> = seqs
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let mut p = vec![BOS.to_string(); order - 1];
            p.extend(s.iter().cloned());
            p.push(EOS.to_string());
            p
        })
        .collect();
    let mut hist: Vec<String> = vec![BOS.to_string(); (order - 1).saturating_sub(ctx.len())];
    hist.extend(ctx[ctx.len().saturating_sub(order - 1)..].iter().map(|t| known(t)));
    let w = known(w);
    // predictable vocabulary: tokens, </s> and <unk>
    let v = (vocab.len() + 2) as u64;
    for k in (0..order).rev() {
        let h = &hist[hist.len() - k..];
        let mut total = 0u64;
        let mut n = 0u64;
        for p in &padded {
            for i in order - 1..p.len() {
                if p[i - k..i] == *h {
                    total += 1;
                    if p[i] == w {
                        n += 1;
                    }
                }
            }
        }
        if total > 0 || k == 0 {
            return (n + 1) as f64 / (total + v) as f64;
        }
    }
    unreachable!()
}

