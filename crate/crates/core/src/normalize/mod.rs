//! Transcript transformations: intro trimming, LDC-style normalization,
//! annotation stripping, Reddit-like normalization and utterance windows.

mod emoticons;

use serde::{Deserialize, Serialize};

pub use emoticons::EMOTICONS;

use crate::corpus::{encoding, Corpus, SpeakerSide, Utterance};
use crate::error::{Error, Result};

/// A value together with a degeneracy flag (empty trim, short window, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub flagged: bool,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged {
            value,
            flagged: false,
        }
    }

    pub fn flagged(value: T) -> Self {
        Flagged {
            value,
            flagged: true,
        }
    }
}

/// Drop the first `n` utterances and re-base indices from 0. Sides with at
/// most `n` utterances come back empty and flagged.
pub fn trim_intro(side: &SpeakerSide, n: usize) -> Flagged<SpeakerSide> {
    if n == 0 {
        return Flagged::clean(side.clone());
    }
    let flagged = side.len() <= n;
    let utterances = side
        .utterances
        .iter()
        .skip(n)
        .enumerate()
        .map(|(i, u)| Utterance::new(i, u.text.clone()))
        .collect();
    Flagged {
        value: side.with_utterances(utterances),
        flagged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    First,
    Last,
}

/// Keep the first or last `k` utterances; original indices are preserved.
/// A side shorter than `k` is returned whole and flagged.
pub fn truncate_window(side: &SpeakerSide, mode: WindowMode, k: usize) -> Result<Flagged<SpeakerSide>> {
    if k == 0 {
        return Err(Error::Config("window size must be at least 1".into()));
    }
    let len = side.len();
    if k >= len {
        return Ok(Flagged {
            value: side.clone(),
            flagged: k > len,
        });
    }
    let range = match mode {
        WindowMode::First => 0..k,
        WindowMode::Last => len - k..len,
    };
    Ok(Flagged::clean(side.with_utterances(side.utterances[range].to_vec())))
}

fn is_joiner(c: char) -> bool {
    c == '-' || c == '\''
}

/// Filter one span: keep alphanumerics and whitespace, keep apostrophes and
/// hyphens next to a letter, turn everything else into a space.
fn clean_span(chars: &[char], out: &mut String) {
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            out.push(c);
        } else if is_joiner(c) {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1).copied();
            if prev.is_some_and(char::is_alphabetic) || next.is_some_and(char::is_alphabetic) {
                out.push(c);
            } else {
                out.push(' ');
            }
        } else {
            out.push(' ');
        }
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase, drop punctuation except letter-adjacent apostrophes and
/// hyphens, keep `[...]` annotation tokens (lowercased), collapse whitespace.
pub fn normalize_ldc_style(text: &str) -> String {
    let lower: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let mut out = String::with_capacity(lower.len());
    let mut i = 0;
    let mut start = 0;
    while i < lower.len() {
        match lower[i] {
            '[' => {
                clean_span(&lower[start..i], &mut out);
                let close = lower[i + 1..]
                    .iter()
                    .position(|&c| c == ']' || c == '[')
                    .map(|p| i + 1 + p)
                    .filter(|&j| lower[j] == ']');
                match close {
                    Some(j) => {
                        let mut inner = String::new();
                        clean_span(&lower[i + 1..j], &mut inner);
                        let inner = collapse_whitespace(&inner);
                        out.push(' ');
                        if !inner.is_empty() {
                            out.push('[');
                            out.push_str(&inner);
                            out.push(']');
                            out.push(' ');
                        }
                        i = j + 1;
                    }
                    None => {
                        out.push(' ');
                        i += 1;
                    }
                }
                start = i;
            }
            ']' => {
                clean_span(&lower[start..i], &mut out);
                out.push(' ');
                i += 1;
                start = i;
            }
            _ => i += 1,
        }
    }
    clean_span(&lower[start..], &mut out);
    collapse_whitespace(&out)
}

/// Remove `[...]` tokens and `((`/`))` delimiters (keeping guessed words).
pub fn strip_annotations(text: &str) -> String {
    strip_annotations_counted(text).0
}

/// [`strip_annotations`] plus the number of stray delimiter characters removed.
pub fn strip_annotations_counted(text: &str) -> (String, usize) {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(chars.len());
    let mut warnings = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '[' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&c| c == ']' || c == '[')
                    .map(|p| i + 1 + p)
                    .filter(|&j| chars[j] == ']');
                match close {
                    Some(j) => i = j + 1,
                    None => {
                        warnings += 1;
                        i += 1;
                    }
                }
                out.push(' ');
            }
            '(' | ')' if chars.get(i + 1) == Some(&c) => {
                out.push(' ');
                i += 2;
            }
            ']' | '(' | ')' => {
                warnings += 1;
                out.push(' ');
                i += 1;
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    (collapse_whitespace(&out), warnings)
}

fn is_html_entity(token: &str) -> bool {
    token.len() > 2
        && token.starts_with('&')
        && token.ends_with(';')
        && token[1..token.len() - 1]
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '#')
}

fn remove_html_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let end = tail
            .char_indices()
            .skip(1)
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '#'))
            .map(|(i, _)| i);
        match end {
            Some(e) if tail[e..].starts_with(';') && is_html_entity(&tail[..=e]) => {
                out.push(' ');
                rest = &tail[e + 1..];
            }
            _ => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn is_url(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    ["http://", "https://", "ftp://", "www."]
        .iter()
        .any(|p| t.starts_with(p))
}

/// Written-domain cleanup before LDC-style normalization: drops HTML
/// entities, URL tokens and listed emoticons.
pub fn normalize_reddit_like(text: &str) -> String {
    let without_entities = remove_html_entities(text);
    let kept: Vec<&str> = without_entities
        .split_whitespace()
        .filter(|t| !is_url(t) && !EMOTICONS.contains(t))
        .collect();
    normalize_ldc_style(&kept.join(" "))
}

/// Corpus-level text normalization styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Ldc,
    NormLdc,
    Reddit,
}

impl Style {
    pub fn apply(self, text: &str) -> String {
        match self {
            Style::Ldc => normalize_ldc_style(text),
            Style::NormLdc => normalize_ldc_style(&strip_annotations(text)),
            Style::Reddit => normalize_reddit_like(text),
        }
    }

    pub fn lineage_name(self) -> &'static str {
        match self {
            Style::Ldc => encoding::LDC,
            Style::NormLdc => encoding::NORM_LDC,
            Style::Reddit => encoding::REDDIT_LIKE,
        }
    }
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ldc" => Ok(Style::Ldc),
            "normldc" => Ok(Style::NormLdc),
            "reddit" => Ok(Style::Reddit),
            other => Err(Error::Config(format!("unknown normalization style {other:?}"))),
        }
    }
}

/// Normalize every utterance of a side. Utterances that normalize to nothing
/// are dropped and the remaining indices re-based.
pub fn normalize_side(side: &SpeakerSide, style: Style) -> SpeakerSide {
    let utterances = side
        .utterances
        .iter()
        .map(|u| style.apply(&u.text))
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, t)| Utterance::new(i, t))
        .collect();
    let mut out = side.with_utterances(utterances);
    out.encoding = encoding::derive(&side.encoding, style.lineage_name());
    out
}

/// Counts from a corpus-level preprocessing pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrepareStats {
    pub emptied_by_trim: usize,
}

/// Trim intros from every side, then optionally normalize.
pub fn prepare_corpus(corpus: &Corpus, trim: usize, style: Option<Style>) -> Result<(Corpus, PrepareStats)> {
    let mut stats = PrepareStats::default();
    let out = corpus.map_sides(|side| {
        let trimmed = trim_intro(side, trim);
        if trimmed.flagged {
            stats.emptied_by_trim += 1;
        }
        match style {
            Some(s) => normalize_side(&trimmed.value, s),
            None => trimmed.value,
        }
    })?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Channel;

    fn side(n: usize) -> SpeakerSide {
        SpeakerSide {
            conversation_id: "c".into(),
            speaker_id: "s".into(),
            channel: Channel::Left,
            topic_id: "t".into(),
            encoding: "LDC".into(),
            utterances: (0..n).map(|i| Utterance::new(i, format!("u{i}"))).collect(),
        }
    }

    #[test]
    fn trim_removes_intro_and_rebases() {
        let t = trim_intro(&side(100), 5);
        assert!(!t.flagged);
        assert_eq!(t.value.len(), 95);
        assert_eq!(t.value.utterances[0], Utterance::new(0, "u5"));
        assert_eq!(trim_intro(&side(100), 0).value, side(100));
        let short = trim_intro(&side(3), 5);
        assert!(short.flagged && short.value.is_empty());
    }

    #[test]
    fn windows() {
        let s = side(95);
        let first = truncate_window(&s, WindowMode::First, 25).unwrap();
        assert_eq!(first.value.len(), 25);
        assert_eq!(first.value.utterances.last().unwrap().index, 24);
        let s = side(120);
        let last = truncate_window(&s, WindowMode::Last, 50).unwrap();
        assert_eq!(last.value.utterances[0].index, 70);
        assert_eq!(last.value.utterances[49].index, 119);
        let whole = truncate_window(&s, WindowMode::First, 200).unwrap();
        assert!(whole.flagged);
        assert_eq!(whole.value, s);
        assert!(truncate_window(&s, WindowMode::First, 0).is_err());
    }

    #[test]
    fn ldc_style_examples() {
        assert_eq!(normalize_ldc_style("he's eighty pounds, big guy."), "he's eighty pounds big guy");
        assert_eq!(normalize_ldc_style("I ha- --"), "i ha-");
        assert_eq!(normalize_ldc_style(""), "");
        assert_eq!(normalize_ldc_style("Hi.  [LAUGH] So, do you have pets?"), "hi [laugh] so do you have pets");
        assert_eq!(normalize_ldc_style("re-do 3-4 -- x"), "re-do 3 4 x");
        assert_eq!(normalize_ldc_style("a [ b ] c [] d ] e ["), "a [b] c d e");
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip_annotations("(( ah no ))"), "ah no");
        assert_eq!(strip_annotations("hi [laughter] so"), "hi so");
        assert_eq!(strip_annotations("plain text"), "plain text");
        let (s, warnings) = strip_annotations_counted("odd ( one ] here");
        assert_eq!(s, "odd one here");
        assert_eq!(warnings, 2);
    }

    #[test]
    fn reddit_examples() {
        assert_eq!(normalize_reddit_like("Check https://x.y :) &amp; more"), "check more");
        assert_eq!(normalize_reddit_like(""), "");
        assert_eq!(normalize_reddit_like("don't re-do"), "don't re-do");
        assert_eq!(normalize_reddit_like("see www.example.com XD &#39;ok&#39;"), "see ok");
        assert_eq!(normalize_reddit_like("fish & chips"), "fish chips");
    }

    #[test]
    fn normalize_side_records_lineage_and_drops_empty() {
        let mut s = side(3);
        s.utterances[1].text = "--".into();
        let n = normalize_side(&s, Style::NormLdc);
        assert_eq!(n.encoding, "LDC→NormLDC");
        assert_eq!(n.len(), 2);
        assert_eq!(n.utterances[1], Utterance::new(1, "u2"));
    }
}
