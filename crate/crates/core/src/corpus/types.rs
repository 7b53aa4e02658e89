use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encoding names used in the `encoding` field of a side. Transforms append
/// to the lineage with [`encoding::derive`], e.g. `"LDC→NormLDC"`.
pub mod encoding {
    pub const BBN: &str = "BBN";
    pub const LDC: &str = "LDC";
    pub const NORM_LDC: &str = "NormLDC";
    pub const REDDIT_LIKE: &str = "RedditLike";
    pub const CANONICAL: &str = "Canonical";

    pub fn derive(current: &str, step: &str) -> String {
        format!("{current}→{step}")
    }

    /// The most recent step of a lineage string.
    pub fn current(lineage: &str) -> &str {
        lineage.rsplit('→').next().unwrap_or(lineage)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utterance {
    pub index: usize,
    pub text: String,
}

impl Utterance {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        Utterance {
            index,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Left,
    Right,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Left => "left",
            Channel::Right => "right",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Channel::Left),
            "right" => Ok(Channel::Right),
            other => Err(Error::format(format!("unknown channel {other:?}"))),
        }
    }
}

/// Reference to one side: `"conversation_id/channel"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SideKey(String);

impl SideKey {
    pub fn new(conversation_id: &str, channel: Channel) -> Self {
        SideKey(format!("{conversation_id}/{channel}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Split into `(conversation_id, channel)`.
    pub fn parts(&self) -> Result<(&str, Channel)> {
        let (conv, ch) = self
            .0
            .rsplit_once('/')
            .ok_or_else(|| Error::format(format!("side key {:?} lacks a channel", self.0)))?;
        Ok((conv, ch.parse()?))
    }
}

impl fmt::Display for SideKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SideKey {
    fn from(s: &str) -> Self {
        SideKey(s.to_string())
    }
}

/// One speaker's ordered utterances within one conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerSide {
    pub conversation_id: String,
    pub speaker_id: String,
    pub channel: Channel,
    pub topic_id: String,
    pub encoding: String,
    pub utterances: Vec<Utterance>,
}

impl SpeakerSide {
    pub fn key(&self) -> SideKey {
        SideKey::new(&self.conversation_id, self.channel)
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// The side as one document: utterances joined with single spaces.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, u) in self.utterances.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&u.text);
        }
        out
    }

    /// Same side with a different utterance list.
    pub fn with_utterances(&self, utterances: Vec<Utterance>) -> Self {
        SpeakerSide {
            conversation_id: self.conversation_id.clone(),
            speaker_id: self.speaker_id.clone(),
            channel: self.channel,
            topic_id: self.topic_id.clone(),
            encoding: self.encoding.clone(),
            utterances,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let mut prev: Option<usize> = None;
        for u in &self.utterances {
            if let Some(p) = prev {
                if u.index <= p {
                    return Err(Error::Structure(format!(
                        "side {}: utterance index {} does not increase after {}",
                        self.key(),
                        u.index,
                        p
                    )));
                }
            }
            if u.text.trim().is_empty() {
                return Err(Error::Structure(format!(
                    "side {}: utterance {} is empty",
                    self.key(),
                    u.index
                )));
            }
            prev = Some(u.index);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FisherBbn,
    FisherLdc,
    Synthetic,
    Canonical,
}

/// A validated set of speaker sides.
///
/// Every conversation has exactly two sides with distinct speakers and one
/// shared topic. Sides are kept sorted by key.
#[derive(Debug, Clone)]
pub struct Corpus {
    sides: Vec<SpeakerSide>,
    topics: BTreeSet<String>,
    provenance: Provenance,
    index: HashMap<SideKey, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.sides == other.sides
            && self.topics == other.topics
            && self.provenance == other.provenance
    }
}

impl Corpus {
    pub fn new(mut sides: Vec<SpeakerSide>, provenance: Provenance) -> Result<Self> {
        sides.sort_by(|a, b| {
            (a.conversation_id.as_str(), a.channel).cmp(&(b.conversation_id.as_str(), b.channel))
        });
        let mut by_conv: BTreeMap<&str, Vec<&SpeakerSide>> = BTreeMap::new();
        for s in &sides {
            s.validate()?;
            by_conv.entry(&s.conversation_id).or_default().push(s);
        }
        for (conv, group) in &by_conv {
            match group.as_slice() {
                [a, b] => {
                    if a.channel == b.channel {
                        return Err(Error::Structure(format!(
                            "conversation {conv}: duplicate channel {}",
                            a.channel
                        )));
                    }
                    if a.speaker_id == b.speaker_id {
                        return Err(Error::Structure(format!(
                            "conversation {conv}: both sides have speaker {}",
                            a.speaker_id
                        )));
                    }
                    if a.topic_id != b.topic_id {
                        return Err(Error::Structure(format!(
                            "conversation {conv}: sides disagree on topic ({} vs {})",
                            a.topic_id, b.topic_id
                        )));
                    }
                }
                other => {
                    return Err(Error::Structure(format!(
                        "conversation {conv} has {} sides, expected 2",
                        other.len()
                    )))
                }
            }
        }
        let topics = sides.iter().map(|s| s.topic_id.clone()).collect();
        let index = sides.iter().enumerate().map(|(i, s)| (s.key(), i)).collect();
        Ok(Corpus {
            sides,
            topics,
            provenance,
            index,
        })
    }

    pub fn empty(provenance: Provenance) -> Self {
        Corpus {
            sides: Vec::new(),
            topics: BTreeSet::new(),
            provenance,
            index: HashMap::new(),
        }
    }

    pub fn sides(&self) -> &[SpeakerSide] {
        &self.sides
    }

    pub fn into_sides(self) -> Vec<SpeakerSide> {
        self.sides
    }

    pub fn topics(&self) -> &BTreeSet<String> {
        &self.topics
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }

    pub fn side(&self, key: &SideKey) -> Option<&SpeakerSide> {
        self.index.get(key).map(|&i| &self.sides[i])
    }

    pub fn speakers(&self) -> BTreeSet<&str> {
        self.sides.iter().map(|s| s.speaker_id.as_str()).collect()
    }

    pub fn conversation_count(&self) -> usize {
        self.sides.len() / 2
    }

    /// Apply a per-side transform, keeping conversation structure intact.
    pub fn map_sides<F>(&self, mut f: F) -> Result<Corpus>
    where
        F: FnMut(&SpeakerSide) -> SpeakerSide,
    {
        Corpus::new(self.sides.iter().map(&mut f).collect(), self.provenance)
    }

    /// Like [`Corpus::map_sides`] but the transform may fail.
    pub fn try_map_sides<F>(&self, f: F) -> Result<Corpus>
    where
        F: FnMut(&SpeakerSide) -> Result<SpeakerSide>,
    {
        let sides = self.sides.iter().map(f).collect::<Result<Vec<_>>>()?;
        Corpus::new(sides, self.provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn side(conv: &str, spk: &str, ch: Channel, topic: &str) -> SpeakerSide {
        SpeakerSide {
            conversation_id: conv.into(),
            speaker_id: spk.into(),
            channel: ch,
            topic_id: topic.into(),
            encoding: encoding::LDC.into(),
            utterances: vec![Utterance::new(0, "hello there")],
        }
    }

    #[test]
    fn rejects_same_speaker_on_both_channels() {
        let err = Corpus::new(
            vec![
                side("c1", "s1", Channel::Left, "t"),
                side("c1", "s1", Channel::Right, "t"),
            ],
            Provenance::Canonical,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn rejects_topic_disagreement_and_lone_sides() {
        assert!(Corpus::new(
            vec![
                side("c1", "s1", Channel::Left, "t1"),
                side("c1", "s2", Channel::Right, "t2"),
            ],
            Provenance::Canonical,
        )
        .is_err());
        assert!(Corpus::new(vec![side("c1", "s1", Channel::Left, "t1")], Provenance::Canonical).is_err());
    }

    #[test]
    fn key_round_trip() {
        let key = SideKey::new("fe_03_00001", Channel::Right);
        assert_eq!(key.as_str(), "fe_03_00001/right");
        assert_eq!(key.parts().unwrap(), ("fe_03_00001", Channel::Right));
    }

    #[test]
    fn utterance_indices_must_increase() {
        let mut s = side("c1", "s1", Channel::Left, "t");
        s.utterances = vec![Utterance::new(3, "a"), Utterance::new(3, "b")];
        assert!(s.validate().is_err());
    }
}
