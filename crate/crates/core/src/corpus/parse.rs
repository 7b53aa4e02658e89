//! Parsers for the two raw Fisher-style transcript encodings.
//!
//! Both encodings are one utterance per line with a speaker prefix. BBN uses
//! `L:`/`R:` with prescriptive punctuation; LDC uses `A:`/`B:`, lowercase text
//! and `(( ... ))` around guessed words. Text after the prefix is kept verbatim
//! apart from surrounding whitespace.

use std::fs;
use std::path::Path;

use super::types::{encoding, Channel, Corpus, Provenance, SpeakerSide, Utterance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawFormat {
    Bbn,
    Ldc,
}

impl RawFormat {
    fn prefixes(self) -> [(&'static str, Channel); 2] {
        match self {
            RawFormat::Bbn => [("L:", Channel::Left), ("R:", Channel::Right)],
            RawFormat::Ldc => [("A:", Channel::Left), ("B:", Channel::Right)],
        }
    }

    fn encoding(self) -> &'static str {
        match self {
            RawFormat::Bbn => encoding::BBN,
            RawFormat::Ldc => encoding::LDC,
        }
    }
}

/// Per-call metadata that the raw transcript text does not carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallInfo {
    pub conversation_id: String,
    pub topic_id: String,
    pub left_speaker: Option<String>,
    pub right_speaker: Option<String>,
}

impl CallInfo {
    pub fn new(conversation_id: impl Into<String>, topic_id: impl Into<String>) -> Self {
        CallInfo {
            conversation_id: conversation_id.into(),
            topic_id: topic_id.into(),
            left_speaker: None,
            right_speaker: None,
        }
    }

    pub fn with_speakers(mut self, left: impl Into<String>, right: impl Into<String>) -> Self {
        self.left_speaker = Some(left.into());
        self.right_speaker = Some(right.into());
        self
    }

    fn speaker(&self, channel: Channel) -> String {
        let explicit = match channel {
            Channel::Left => &self.left_speaker,
            Channel::Right => &self.right_speaker,
        };
        explicit
            .clone()
            .unwrap_or_else(|| format!("{}/{}", self.conversation_id, channel))
    }
}

/// Parse a BBN-encoded transcript (`L:`/`R:` prefixes).
pub fn parse_bbn(raw: &str, conversation_id: &str, topic_id: &str) -> Result<[SpeakerSide; 2]> {
    parse_raw(raw, RawFormat::Bbn, &CallInfo::new(conversation_id, topic_id))
}

/// Parse an LDC-encoded transcript (`A:` → left, `B:` → right).
pub fn parse_ldc(raw: &str, conversation_id: &str, topic_id: &str) -> Result<[SpeakerSide; 2]> {
    parse_raw(raw, RawFormat::Ldc, &CallInfo::new(conversation_id, topic_id))
}

pub fn parse_raw(raw: &str, format: RawFormat, call: &CallInfo) -> Result<[SpeakerSide; 2]> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        let (channel, rest) = format
            .prefixes()
            .iter()
            .find_map(|(p, ch)| trimmed.strip_prefix(p).map(|rest| (*ch, rest)))
            .ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("no recognized speaker prefix in {trimmed:?}"),
            })?;
        let text = rest.trim();
        if text.is_empty() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: "empty utterance".into(),
            });
        }
        let target = match channel {
            Channel::Left => &mut left,
            Channel::Right => &mut right,
        };
        let index = target.len();
        target.push(Utterance::new(index, text));
    }
    for (ch, utts) in [(Channel::Left, &left), (Channel::Right, &right)] {
        if utts.is_empty() {
            return Err(Error::Structure(format!(
                "conversation {}: no utterances on the {ch} channel",
                call.conversation_id
            )));
        }
    }
    let make = |channel: Channel, utterances: Vec<Utterance>| SpeakerSide {
        conversation_id: call.conversation_id.clone(),
        speaker_id: call.speaker(channel),
        channel,
        topic_id: call.topic_id.clone(),
        encoding: format.encoding().to_string(),
        utterances,
    };
    Ok([make(Channel::Left, left), make(Channel::Right, right)])
}

/// Render the two sides of one conversation in a raw encoding, interleaving
/// utterances by index (left first on ties).
pub fn render_raw(left: &SpeakerSide, right: &SpeakerSide, format: RawFormat) -> String {
    let [(lp, _), (rp, _)] = format.prefixes();
    let mut merged: Vec<(usize, u8, &str)> = left
        .utterances
        .iter()
        .map(|u| (u.index, 0u8, u.text.as_str()))
        .chain(right.utterances.iter().map(|u| (u.index, 1u8, u.text.as_str())))
        .collect();
    merged.sort();
    let mut out = String::new();
    for (_, ch, text) in merged {
        let prefix = if ch == 0 { lp } else { rp };
        let body = match format {
            RawFormat::Ldc => text.to_string(),
            RawFormat::Bbn => bbn_surface(text),
        };
        out.push_str(prefix);
        out.push(' ');
        out.push_str(&body);
        out.push('\n');
    }
    out
}

fn bbn_surface(text: &str) -> String {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| {
            if w.starts_with('[') && w.ends_with(']') {
                w.to_uppercase()
            } else {
                w.to_string()
            }
        })
        .collect();
    let mut s = words.join(" ");
    if let Some(first) = s.chars().next() {
        if first.is_lowercase() {
            let upper: String = first.to_uppercase().collect();
            s.replace_range(..first.len_utf8(), &upper);
        }
    }
    if !s.ends_with(['.', '?', '!', ']']) {
        s.push('.');
    }
    s
}

/// Ingest a directory of raw transcripts.
///
/// The directory holds `calls.tsv` (`conversation_id`, `topic_id`,
/// `left_speaker`, `right_speaker`, tab separated, `#` comments allowed) and
/// one `<conversation_id>.txt` file per call.
pub fn ingest_dir(dir: &Path, format: RawFormat) -> Result<Corpus> {
    let calls_path = dir.join("calls.tsv");
    let calls = fs::read_to_string(&calls_path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", calls_path.display()))
    })?;
    let mut sides = Vec::new();
    for (lineno, line) in calls.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("conversation_id") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::Format {
                path: Some(calls_path.clone()),
                line: Some(lineno + 1),
                message: format!("expected 4 tab-separated columns, found {}", cols.len()),
            });
        }
        let call = CallInfo::new(cols[0], cols[1]).with_speakers(cols[2], cols[3]);
        let path = dir.join(format!("{}.txt", call.conversation_id));
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let [l, r] = parse_raw(&raw, format, &call)?;
        sides.push(l);
        sides.push(r);
    }
    let provenance = match format {
        RawFormat::Bbn => Provenance::FisherBbn,
        RawFormat::Ldc => Provenance::FisherLdc,
    };
    Corpus::new(sides, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbn_sample_lines() {
        let [l, r] = parse_bbn("L: Hi.  [LAUGH] So, do you have pets?\nR: Ah, no.", "c", "t").unwrap();
        assert_eq!(l.utterances, vec![Utterance::new(0, "Hi.  [LAUGH] So, do you have pets?")]);
        assert_eq!(r.utterances, vec![Utterance::new(0, "Ah, no.")]);
        assert_eq!(l.channel, Channel::Left);
        assert_eq!(l.encoding, "BBN");
    }

    #[test]
    fn bbn_single_channel_is_structural_error() {
        let err = parse_bbn("L: x\nL: y", "c", "t").unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn three_line_hand_count() {
        let [l, r] = parse_bbn("L: one\nR: two\nL: -- three", "c", "t").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(r.len(), 1);
        assert_eq!(l.utterances[1].index, 1);
        assert_eq!(l.utterances[1].text, "-- three");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_bbn("L: fine\nno prefix here\nR: ok", "c", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ldc_keeps_guess_markers() {
        let [_, b] = parse_ldc("A: hi\nB: (( ah no )) ", "c", "t").unwrap();
        assert_eq!(b.utterances[0].text, "(( ah no ))");
    }

    #[test]
    fn ldc_empty_input() {
        assert!(matches!(parse_ldc("", "c", "t"), Err(Error::Structure(_))));
    }

    #[test]
    fn ldc_does_not_accept_bbn_prefixes() {
        assert!(matches!(parse_ldc("L: hi\nR: yo", "c", "t"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn render_then_parse_preserves_counts() {
        let [l, r] = parse_ldc("A: hi there\nB: oh\nA: i have [laughter] dogs\nB: yeah", "c", "t").unwrap();
        for format in [RawFormat::Bbn, RawFormat::Ldc] {
            let raw = render_raw(&l, &r, format);
            let [l2, r2] = parse_raw(&raw, format, &CallInfo::new("c", "t")).unwrap();
            assert_eq!((l2.len(), r2.len()), (2, 2));
        }
        let bbn = render_raw(&l, &r, RawFormat::Bbn);
        assert!(bbn.starts_with("L: Hi there.\nR: Oh.\nL: I have [LAUGHTER] dogs.\n"), "{bbn}");
    }
}
