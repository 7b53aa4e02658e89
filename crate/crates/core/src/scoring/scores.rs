use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{strip_position, Error, Result};
use crate::trials::{Difficulty, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub trial_id: String,
    pub label: Label,
    pub score: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

/// Scores for one trial set under one scorer; larger scores mean "same speaker".
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub records: Vec<ScoreRecord>,
    pub scorer: String,
    pub higher_is_same: bool,
    pub degenerate: usize,
    pub warnings: Vec<String>,
    pub difficulty: Option<Difficulty>,
    pub encoding: Option<String>,
}

impl ScoreSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.score).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.label.is_positive()).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    trial_id: String,
    label: Label,
    score: f64,
    scorer: String,
    #[serde(default)]
    difficulty: Option<Difficulty>,
    #[serde(default)]
    encoding: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    degenerate: bool,
}

pub fn write_scores(set: &ScoreSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in &set.records {
        let line = Line {
            trial_id: r.trial_id.clone(),
            label: r.label,
            score: r.score,
            scorer: set.scorer.clone(),
            difficulty: set.difficulty,
            encoding: set.encoding.clone(),
            degenerate: r.degenerate,
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<ScoreSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set = ScoreSet {
        records: Vec::new(),
        scorer: String::new(),
        higher_is_same: true,
        degenerate: 0,
        warnings: Vec::new(),
        difficulty: None,
        encoding: None,
    };
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
        let l: Line = serde_json::from_str(&line).map_err(|e| fail(strip_position(&e.to_string())))?;
        if !l.score.is_finite() {
            return Err(fail(format!("non-finite score for trial {}", l.trial_id)));
        }
        if set.records.is_empty() {
            set.scorer = l.scorer.clone();
            set.difficulty = l.difficulty;
            set.encoding = l.encoding.clone();
        } else if l.scorer != set.scorer {
            return Err(fail(format!("mixed scorers: {} and {}", set.scorer, l.scorer)));
        }
        set.degenerate += usize::from(l.degenerate);
        set.records.push(ScoreRecord {
            trial_id: l.trial_id,
            label: l.label,
            score: l.score,
            degenerate: l.degenerate,
        });
    }
    set.records.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    Ok(set)
}
