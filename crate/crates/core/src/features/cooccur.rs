//! Object-API and context-API co-occurrence counts.
//!
//! The object table counts receiver occurrences `N(x)` and calls `x.api()`
//! `N(api, x)`. The context table counts files: `N(x)` is the number of files
//! holding token `x`, `N(api, x)` the number holding both `x` and a call of
//! `api`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CooccurCounts {
    object_n: HashMap<u32, u64>,
    object_pair: HashMap<(u32, u32), u64>,
    file_n: HashMap<u32, u64>,
    file_pair: HashMap<(u32, u32), u64>,
}

impl CooccurCounts {
    fn get<K: std::hash::Hash + Eq>(map: &HashMap<K, u64>, k: &K) -> u64 {
        map.get(k).copied().unwrap_or(0)
    }
}

/// Observations from one file, in the form the tables are built from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileObservations {
    /// `(receiver key, api)` of every call `x.api(...)`.
    pub calls: Vec<(String, String)>,
    /// Code tokens (identifiers and keywords) in the file.
    pub tokens: BTreeSet<String>,
}

impl FileObservations {
    pub fn apis(&self) -> BTreeSet<&str> {
        self.calls.iter().map(|(_, a)| a.as_str()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "CooccurRepr", try_from = "CooccurRepr")]
pub struct CooccurTables {
    names: Vec<String>,
    index: HashMap<String, u32>,
    counts: CooccurCounts,
}

/// On-disk form with integer counts: `[x, n]` and `[x, api, n]` over ids
/// into `names`.
#[derive(Serialize, Deserialize)]
struct CooccurRepr {
    names: Vec<String>,
    object_n: Vec<[u64; 2]>,
    object_pair: Vec<[u64; 3]>,
    file_n: Vec<[u64; 2]>,
    file_pair: Vec<[u64; 3]>,
}

fn sorted_units(m: &HashMap<u32, u64>) -> Vec<[u64; 2]> {
    let mut v: Vec<[u64; 2]> = m.iter().map(|(&k, &c)| [k as u64, c]).collect();
    v.sort_unstable();
    v
}

fn sorted_pairs(m: &HashMap<(u32, u32), u64>) -> Vec<[u64; 3]> {
    let mut v: Vec<[u64; 3]> = m.iter().map(|(&(a, b), &c)| [a as u64, b as u64, c]).collect();
    v.sort_unstable();
    v
}

impl From<CooccurTables> for CooccurRepr {
    fn from(t: CooccurTables) -> Self {
        CooccurRepr {
            object_n: sorted_units(&t.counts.object_n),
            object_pair: sorted_pairs(&t.counts.object_pair),
            file_n: sorted_units(&t.counts.file_n),
            file_pair: sorted_pairs(&t.counts.file_pair),
            names: t.names,
        }
    }
}

impl TryFrom<CooccurRepr> for CooccurTables {
    type Error = String;

    fn try_from(r: CooccurRepr) -> Result<Self, String> {
        let n = r.names.len() as u64;
        let id = |x: u64| if x < n { Ok(x as u32) } else { Err("co-occurrence id out of range".to_string()) };
        let mut counts = CooccurCounts::default();
        for [k, c] in r.object_n {
            counts.object_n.insert(id(k)?, c);
        }
        for [a, b, c] in r.object_pair {
            counts.object_pair.insert((id(a)?, id(b)?), c);
        }
        for [k, c] in r.file_n {
            counts.file_n.insert(id(k)?, c);
        }
        for [a, b, c] in r.file_pair {
            counts.file_pair.insert((id(a)?, id(b)?), c);
        }
        let index = r.names.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        Ok(CooccurTables {
            names: r.names,
            index,
            counts,
        })
    }
}

impl CooccurTables {
    pub fn build<'a>(files: impl IntoIterator<Item = &'a FileObservations>) -> Self {
        let mut t = CooccurTables::default();
        for f in files {
            for (x, api) in &f.calls {
                t.intern(x);
                t.intern(api);
            }
            for tok in &f.tokens {
                t.intern(tok);
            }
            let delta = t.counts_of(f);
            t.counts.add(&delta);
        }
        t
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(s.to_string());
        self.index.insert(s.to_string(), i);
        i
    }

    fn lookup(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    /// The counts `file` contributes, for scoring it as if held out. Names
    /// unknown to the tables are skipped.
    pub fn counts_of(&self, file: &FileObservations) -> CooccurCounts {
        let mut d = CooccurCounts::default();
        for (x, api) in &file.calls {
            let (Some(x), Some(api)) = (self.lookup(x), self.lookup(api)) else {
                continue;
            };
            *d.object_n.entry(x).or_default() += 1;
            *d.object_pair.entry((x, api)).or_default() += 1;
        }
        let apis: Vec<u32> = file.apis().into_iter().filter_map(|a| self.lookup(a)).collect();
        for tok in &file.tokens {
            let Some(x) = self.lookup(tok) else { continue };
            *d.file_n.entry(x).or_default() += 1;
            for &api in &apis {
                *d.file_pair.entry((x, api)).or_default() += 1;
            }
        }
        d
    }

    fn ratio(pair: u64, unit: u64) -> f64 {
        if unit == 0 {
            0.0
        } else {
            pair.min(unit) as f64 / unit as f64
        }
    }

    /// `N(api, x) / N(x)` over receiver occurrences; 0 when `x` was never seen.
    pub fn object_confidence(&self, x: &str, api: &str, held_out: Option<&CooccurCounts>) -> f64 {
        let Some(xi) = self.lookup(x) else { return 0.0 };
        let unit = sub(&self.counts.object_n, held_out.map(|h| &h.object_n), &xi);
        let pair = match self.lookup(api) {
            Some(ai) => sub(&self.counts.object_pair, held_out.map(|h| &h.object_pair), &(xi, ai)),
            None => 0,
        };
        Self::ratio(pair, unit)
    }

    /// `N(api, x) / N(x)` over files; 0 when `x` was never seen.
    pub fn context_confidence(&self, x: &str, api: &str, held_out: Option<&CooccurCounts>) -> f64 {
        let Some(xi) = self.lookup(x) else { return 0.0 };
        let unit = sub(&self.counts.file_n, held_out.map(|h| &h.file_n), &xi);
        let pair = match self.lookup(api) {
            Some(ai) => sub(&self.counts.file_pair, held_out.map(|h| &h.file_pair), &(xi, ai)),
            None => 0,
        };
        Self::ratio(pair, unit)
    }

    /// Raw counts `(N(api, x), N(x))` of the object table.
    pub fn object_counts(&self, x: &str, api: &str) -> (u64, u64) {
        let (Some(xi), ai) = (self.lookup(x), self.lookup(api)) else {
            return (0, 0);
        };
        let pair = ai.map(|ai| CooccurCounts::get(&self.counts.object_pair, &(xi, ai))).unwrap_or(0);
        (pair, CooccurCounts::get(&self.counts.object_n, &xi))
    }

    /// Raw counts `(N(api, x), N(x))` of the context table.
    pub fn context_counts(&self, x: &str, api: &str) -> (u64, u64) {
        let (Some(xi), ai) = (self.lookup(x), self.lookup(api)) else {
            return (0, 0);
        };
        let pair = ai.map(|ai| CooccurCounts::get(&self.counts.file_pair, &(xi, ai))).unwrap_or(0);
        (pair, CooccurCounts::get(&self.counts.file_n, &xi))
    }

    /// Every pair count against its unit count, for invariant checks.
    pub fn pair_counts_bounded(&self) -> bool {
        self.counts
            .file_pair
            .iter()
            .all(|(&(x, _), &c)| c <= CooccurCounts::get(&self.counts.file_n, &x))
            && self
                .counts
                .object_pair
                .iter()
                .all(|(&(x, _), &c)| c <= CooccurCounts::get(&self.counts.object_n, &x))
    }
}

fn sub<K: std::hash::Hash + Eq>(main: &HashMap<K, u64>, held: Option<&HashMap<K, u64>>, k: &K) -> u64 {
    let a = CooccurCounts::get(main, k);
    let b = held.map(|h| CooccurCounts::get(h, k)).unwrap_or(0);
    a.saturating_sub(b)
}

impl CooccurCounts {
    fn add(&mut self, d: &CooccurCounts) {
        for (k, v) in &d.object_n {
            *self.object_n.entry(*k).or_default() += v;
        }
        for (k, v) in &d.object_pair {
            *self.object_pair.entry(*k).or_default() += v;
        }
        for (k, v) in &d.file_n {
            *self.file_n.entry(*k).or_default() += v;
        }
        for (k, v) in &d.file_pair {
            *self.file_pair.entry(*k).or_default() += v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(calls: &[(&str, &str)], tokens: &[&str]) -> FileObservations {
        FileObservations {
            calls: calls.iter().map(|(x, a)| (x.to_string(), a.to_string())).collect(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn held_out_file_matches_rebuild() {
        let files = vec![
            file(&[("list", "append"), ("f", "read")], &["open", "f", "with"]),
            file(&[("list", "append"), ("list", "pop")], &["x", "open"]),
            file(&[("f", "read")], &["open", "f"]),
        ];
        let all = CooccurTables::build(&files);
        let rest = CooccurTables::build(&files[1..]);
        let held = all.counts_of(&files[0]);
        for (x, api) in [("list", "append"), ("f", "read"), ("list", "pop")] {
            assert_eq!(
                all.object_confidence(x, api, Some(&held)),
                rest.object_confidence(x, api, None)
            );
        }
        for (x, api) in [("open", "read"), ("open", "append"), ("f", "read")] {
            assert_eq!(
                all.context_confidence(x, api, Some(&held)),
                rest.context_confidence(x, api, None)
            );
        }
    }

    #[test]
    fn serde_round_trip() {
        let t = CooccurTables::build(&[file(&[("s", "split")], &["s", "for"])]);
        let back: CooccurTables = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(t, back);
        assert!(back.pair_counts_bounded());
    }
}
