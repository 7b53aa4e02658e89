//! Noun-lemma extraction and the overlap proxy for topical similarity.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::{SideKey, SpeakerSide};
use crate::error::{Error, Result};
use crate::normalize::strip_annotations;
use crate::scoring::word_tokens;

const ENGLISH_NOUNS: &str = include_str!("../../data/noun_lemmas.tsv");

/// Surface form → noun lemma table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NounLexicon {
    lemmas: HashMap<String, String>,
}

impl NounLexicon {
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (String, String)>,
    {
        NounLexicon {
            lemmas: pairs
                .into_iter()
                .map(|(s, l)| (s.to_lowercase(), l.to_lowercase()))
                .collect(),
        }
    }

    /// The bundled English table (WordNet-derived, ~20k surface forms).
    pub fn english() -> Self {
        Self::parse_tsv(ENGLISH_NOUNS).expect("bundled lexicon is well formed")
    }

    /// Load a tab-separated `surface<TAB>lemma` file; `#` starts a comment.
    pub fn from_tsv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read noun lexicon {}: {e}", path.display())))?;
        Self::parse_tsv(&text).map_err(|e| e.at_path(path))
    }

    fn parse_tsv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or_else(|| Error::Format {
                path: None,
                line: Some(i + 1),
                message: "expected surface<TAB>lemma".into(),
            })?;
            pairs.push((surface.trim().to_string(), lemma.trim().to_string()));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn lemma(&self, surface: &str) -> Option<&str> {
        self.lemmas.get(surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

/// Noun lemmas of a side; annotation tokens never count.
pub fn extract_noun_lemmas(side: &SpeakerSide, lexicon: &NounLexicon) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for u in &side.utterances {
        let text = strip_annotations(&u.text);
        for tok in word_tokens(&text) {
            if let Some(lemma) = lexicon.lemma(&tok) {
                out.insert(lemma.to_string());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OverlapMode {
    /// |A ∩ B| / |A ∪ B|
    #[default]
    Jaccard,
    /// |A ∩ B| / min(|A|, |B|)
    MinSize,
}

impl std::str::FromStr for OverlapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jaccard" => Ok(OverlapMode::Jaccard),
            "min" => Ok(OverlapMode::MinSize),
            other => Err(Error::Config(format!("unknown overlap mode {other:?} (jaccard or min)"))),
        }
    }
}

/// Overlap fraction in [0, 1]; 0 when the denominator is empty.
pub fn noun_lemma_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>, mode: OverlapMode) -> f64 {
    let inter = a.intersection(b).count();
    let denom = match mode {
        OverlapMode::Jaccard => a.len() + b.len() - inter,
        OverlapMode::MinSize => a.len().min(b.len()),
    };
    if denom == 0 {
        0.0
    } else {
        inter as f64 / denom as f64
    }
}

/// Where per-side lemma sets come from.
#[derive(Debug, Clone)]
pub enum LemmaSource {
    Lexicon(NounLexicon),
    /// Precomputed sets keyed by side (e.g. from an external tagger); sides
    /// missing from the map fall back to the empty set.
    Precomputed(HashMap<SideKey, BTreeSet<String>>),
}

impl LemmaSource {
    pub fn lemmas(&self, side: &SpeakerSide) -> BTreeSet<String> {
        match self {
            LemmaSource::Lexicon(lex) => extract_noun_lemmas(side, lex),
            LemmaSource::Precomputed(map) => map.get(&side.key()).cloned().unwrap_or_default(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LemmaRecord {
    key: SideKey,
    lemmas: Vec<String>,
}

/// Read a line-delimited `{key, lemmas}` override file.
pub fn read_lemma_sets(path: &Path) -> Result<HashMap<SideKey, BTreeSet<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LemmaRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: Some(path.to_path_buf()),
            line: Some(i + 1),
            message: e.to_string(),
        })?;
        out.insert(rec.key, rec.lemmas.into_iter().collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Channel, Utterance};

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn side(lines: &[&str]) -> SpeakerSide {
        SpeakerSide {
            conversation_id: "c".into(),
            speaker_id: "s".into(),
            channel: Channel::Left,
            topic_id: "t".into(),
            encoding: "LDC".into(),
            utterances: lines.iter().enumerate().map(|(i, t)| Utterance::new(i, *t)).collect(),
        }
    }

    #[test]
    fn overlap_values() {
        let a = set(&["dog", "fish"]);
        assert_eq!(noun_lemma_overlap(&a, &a, OverlapMode::Jaccard), 1.0);
        assert_eq!(noun_lemma_overlap(&a, &set(&["cat"]), OverlapMode::Jaccard), 0.0);
        assert_eq!(
            noun_lemma_overlap(&set(&["dog", "fish", "lab"]), &set(&["dog", "cat"]), OverlapMode::Jaccard),
            0.25
        );
        assert_eq!(
            noun_lemma_overlap(&set(&["dog", "fish", "lab"]), &set(&["dog", "cat"]), OverlapMode::MinSize),
            0.5
        );
        assert_eq!(noun_lemma_overlap(&set(&[]), &set(&[]), OverlapMode::Jaccard), 0.0);
    }

    #[test]
    fn extraction() {
        let lex = NounLexicon::from_pairs([("dogs".to_string(), "dog".to_string())]);
        assert_eq!(extract_noun_lemmas(&side(&["i have three dogs"]), &lex), set(&["dog"]));
        assert!(extract_noun_lemmas(&side(&[]), &lex).is_empty());
        assert!(extract_noun_lemmas(&side(&["i have the"]), &lex).is_empty());
        let lex = NounLexicon::from_pairs([("laughter".to_string(), "laughter".to_string())]);
        assert!(extract_noun_lemmas(&side(&["hi [laughter] so"]), &lex).is_empty());
    }

    #[test]
    fn bundled_english_lexicon() {
        let lex = NounLexicon::english();
        assert!(lex.len() > 15_000, "{}", lex.len());
        let lemmas = extract_noun_lemmas(
            &side(&["i have a bunch of fish i have a black lab", "i do i have three dogs [laughter]"]),
            &lex,
        );
        assert!(lemmas.contains("dog") && lemmas.contains("fish") && lemmas.contains("lab"));
        assert!(!lemmas.contains("have") && !lemmas.contains("three") && !lemmas.contains("i"));
    }

    #[test]
    fn missing_lexicon_file() {
        let err = NounLexicon::from_tsv(Path::new("/nonexistent/nouns.tsv")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
