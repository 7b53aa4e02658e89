use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::vector::SparseVec;
use super::FeatureSource;
use crate::corpus::SpeakerSide;
use crate::error::{Error, Result};
use crate::normalize::Flagged;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    Word,
    Char4,
}

impl Analyzer {
    pub fn as_str(self) -> &'static str {
        match self {
            Analyzer::Word => "word",
            Analyzer::Char4 => "char4",
        }
    }

    pub fn terms(self, text: &str) -> Vec<String> {
        match self {
            Analyzer::Word => word_tokens(text),
            Analyzer::Char4 => char_ngrams(text, 4),
        }
    }
}

impl fmt::Display for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analyzer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Analyzer::Word),
            "char4" => Ok(Analyzer::Char4),
            other => Err(Error::Config(format!("unknown analyzer '{other}' (expected word or char4)"))),
        }
    }
}

/// Maximal runs of letters, digits and apostrophes, lowercased.
pub fn word_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Every contiguous `n`-character window of the lowercased text, spaces included.
pub fn char_ngrams(text: &str, n: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// A fitted TF-IDF vectorizer. Column indices follow lexical term order.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    analyzer: Analyzer,
    terms: Vec<String>,
    idf: Vec<f64>,
    index: HashMap<String, u32>,
    n_docs: usize,
}

impl TfidfModel {
    pub fn analyzer(&self) -> Analyzer {
        self.analyzer
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.column(term).map(|i| self.idf[i])
    }

    pub fn idf_values(&self) -> &[f64] {
        &self.idf
    }

    pub fn vectorize(&self, text: &str) -> Flagged<SparseVec> {
        vectorize(self, text)
    }
}

pub fn fit_tfidf<S: AsRef<str>>(docs: &[S], analyzer: Analyzer) -> Result<TfidfModel> {
    fit_tfidf_with(docs, analyzer, None)
}

/// Like [`fit_tfidf`], optionally keeping only the `max_features` terms with
/// the highest total count in the reference corpus.
pub fn fit_tfidf_with<S: AsRef<str>>(
    docs: &[S],
    analyzer: Analyzer,
    max_features: Option<usize>,
) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::Config("cannot fit TF-IDF on an empty reference corpus".into()));
    }
    let mut df: HashMap<String, (usize, usize)> = HashMap::new();
    for doc in docs {
        let terms = analyzer.terms(doc.as_ref());
        let mut seen = BTreeSet::new();
        for t in terms {
            let entry = df.entry(t.clone()).or_insert((0, 0));
            entry.1 += 1;
            if seen.insert(t) {
                entry.0 += 1;
            }
        }
    }
    let mut terms: Vec<(String, usize, usize)> = df.into_iter().map(|(t, (d, c))| (t, d, c)).collect();
    if let Some(k) = max_features {
        terms.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        terms.truncate(k);
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let n = docs.len() as f64;
    let idf = terms
        .iter()
        .map(|(_, d, _)| ((1.0 + n) / (1.0 + *d as f64)).ln() + 1.0)
        .collect();
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, (t, _, _))| (t.clone(), i as u32))
        .collect();
    Ok(TfidfModel {
        analyzer,
        terms: terms.into_iter().map(|(t, _, _)| t).collect(),
        idf,
        index,
        n_docs: docs.len(),
    })
}

/// L2-normalized tf·idf vector. Text with no in-vocabulary term gives the
/// zero vector, flagged.
pub fn vectorize(model: &TfidfModel, text: &str) -> Flagged<SparseVec> {
    let mut tf: HashMap<u32, f64> = HashMap::new();
    for t in model.analyzer.terms(text) {
        if let Some(&i) = model.index.get(&t) {
            *tf.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let entries: Vec<(u32, f64)> = tf
        .into_iter()
        .map(|(i, c)| (i, c * model.idf[i as usize]))
        .collect();
    let v = SparseVec::new(model.len(), entries).expect("indices come from the vocabulary");
    if v.is_zero() {
        Flagged::flagged(v)
    } else {
        Flagged::clean(v.normalized())
    }
}

impl FeatureSource for TfidfModel {
    fn dim(&self) -> usize {
        self.len()
    }

    fn features(&self, side: &SpeakerSide) -> Result<Flagged<SparseVec>> {
        Ok(vectorize(self, &side.text()))
    }
}
