use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Difficulty, Label, Trial, TrialSet};
use crate::corpus::{SideKey, Split};
use crate::error::{strip_position, Error, Result};

/// One line of a trial file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial_id: String,
    pub difficulty: Difficulty,
    pub split: Split,
    pub label: Label,
    pub left_key: SideKey,
    pub right_key: SideKey,
}

pub fn write_trials(set: &TrialSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in &set.trials {
        let rec = TrialRecord {
            trial_id: t.trial_id.clone(),
            difficulty: t.difficulty,
            split: set.split,
            label: t.label,
            left_key: t.left.clone(),
            right_key: t.right.clone(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a trial file. Returns the trials and the split they belong to
/// (`None` for an empty file).
pub fn read_trials(path: &Path) -> Result<(Vec<Trial>, Option<Split>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut trials = Vec::new();
    let mut split = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| Error::Format {
            path: Some(path.to_path_buf()),
            line: Some(i + 1),
            message,
        };
        let rec: TrialRecord = serde_json::from_str(&line)
            .map_err(|e| fail(strip_position(&e.to_string())))?;
        match split {
            None => split = Some(rec.split),
            Some(s) if s != rec.split => {
                return Err(fail(format!("mixed splits: {s} and {}", rec.split)));
            }
            _ => {}
        }
        if rec.left_key == rec.right_key {
            return Err(fail(format!("trial {} pairs a side with itself", rec.trial_id)));
        }
        trials.push(Trial {
            trial_id: rec.trial_id,
            left: rec.left_key,
            right: rec.right_key,
            label: rec.label,
            difficulty: rec.difficulty,
        });
    }
    Ok((trials, split))
}
