//! Canonical line-delimited interchange format: one JSON record per
//! [`SpeakerSide`], UTF-8, in corpus order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::types::{Corpus, Provenance, SpeakerSide};
use crate::error::{strip_position, Error, Result};

pub fn write_canonical(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_canonical_to(corpus, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_canonical_to<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for side in corpus.sides() {
        serde_json::to_writer(&mut w, side)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_canonical(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_canonical_from(file).map_err(|e| e.at_path(path))
}

pub fn read_canonical_from<R: Read>(reader: R) -> Result<Corpus> {
    let mut sides = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Format {
            path: None,
            line: Some(i + 1),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let side: SpeakerSide = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: None,
            line: Some(i + 1),
            message: strip_position(&e.to_string()),
        })?;
        sides.push(side);
    }
    if sides.is_empty() {
        return Ok(Corpus::empty(Provenance::Canonical));
    }
    Corpus::new(sides, Provenance::Canonical)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_empty_corpus() {
        let c = read_canonical_from(&b""[..]).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn missing_topic_names_field_and_line() {
        let good = r#"{"conversation_id":"c1","speaker_id":"a","channel":"left","topic_id":"t","encoding":"LDC","utterances":[{"index":0,"text":"hi"}]}"#;
        let bad = r#"{"conversation_id":"c1","speaker_id":"b","channel":"right","encoding":"LDC","utterances":[{"index":0,"text":"yo"}]}"#;
        let input = format!("{good}\n{bad}\n");
        match read_canonical_from(input.as_bytes()) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, Some(2));
                assert!(message.contains("topic_id"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_channel_is_format_error() {
        let rec = r#"{"conversation_id":"c1","speaker_id":"a","channel":"middle","topic_id":"t","encoding":"LDC","utterances":[]}"#;
        assert!(matches!(read_canonical_from(rec.as_bytes()), Err(Error::Format { line: Some(1), .. })));
    }
}
