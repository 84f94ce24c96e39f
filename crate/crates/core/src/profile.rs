//! The personalization profile: a "like" keyword track, an "unlike" keyword
//! track and the display threshold.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::segment::tokenize;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    Malformed(String),
    #[error("keyword {0:?} appears in both the like and unlike tracks")]
    OverlappingTracks(String),
    #[error("keyword {0:?} splits into more than one token")]
    MultiTokenKeyword(String),
    #[error("keyword {0:?} has no letters or digits")]
    EmptyKeyword(String),
}

/// Liked and unliked keywords plus the threshold a segment's total score
/// must reach to stay visible.
///
/// Keywords are single normalized tokens and the two tracks are disjoint.
/// Instances are only built through [`ProfileBag::new`] or [`load_profile`],
/// which enforce both rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileBag {
    like: BTreeSet<String>,
    unlike: BTreeSet<String>,
    threshold: i64,
}

impl ProfileBag {
    /// Normalizes and validates raw keyword lists.
    pub fn new<L, U, S>(like: L, unlike: U, threshold: i64) -> Result<Self, ProfileError>
    where
        L: IntoIterator<Item = S>,
        U: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let like = normalize_track(like)?;
        let unlike = normalize_track(unlike)?;
        if let Some(k) = like.intersection(&unlike).next() {
            return Err(ProfileError::OverlappingTracks(k.clone()));
        }
        Ok(Self {
            like,
            unlike,
            threshold,
        })
    }

    pub fn like(&self) -> &BTreeSet<String> {
        &self.like
    }

    pub fn unlike(&self) -> &BTreeSet<String> {
        &self.unlike
    }

    pub fn threshold(&self) -> i64 {
        self.threshold
    }

    /// +1 for a liked token, -1 for an unliked one, 0 otherwise.
    pub fn weight_of(&self, token: &str) -> i64 {
        if self.like.contains(token) {
            1
        } else if self.unlike.contains(token) {
            -1
        } else {
            0
        }
    }

    pub fn with_threshold(&self, threshold: i64) -> Self {
        Self {
            threshold,
            ..self.clone()
        }
    }
}

fn normalize_track<I, S>(raw: I) -> Result<BTreeSet<String>, ProfileError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    raw.into_iter()
        .map(|entry| {
            let entry = entry.as_ref();
            let mut toks = tokenize(entry);
            match toks.len() {
                0 => Err(ProfileError::EmptyKeyword(entry.to_owned())),
                1 => Ok(toks.pop().unwrap()),
                _ => Err(ProfileError::MultiTokenKeyword(entry.to_owned())),
            }
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    like: Vec<String>,
    unlike: Vec<String>,
    #[serde(default)]
    threshold: i64,
}

/// Reads a profile from JSON of the form
/// `{"like": [...], "unlike": [...], "threshold": n}`; the threshold may be omitted.
pub fn load_profile(input: &[u8]) -> Result<ProfileBag, ProfileError> {
    let file: ProfileFile =
        serde_json::from_slice(input).map_err(|e| ProfileError::Malformed(e.to_string()))?;
    ProfileBag::new(file.like, file.unlike, file.threshold)
}

/// Canonical JSON: fixed key order, sorted tracks, two-space indent and a
/// trailing newline.
pub fn save_profile(bag: &ProfileBag) -> Vec<u8> {
    let file = ProfileFile {
        like: bag.like.iter().cloned().collect(),
        unlike: bag.unlike.iter().cloned().collect(),
        threshold: bag.threshold,
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("profile serializes");
    out.push(b'\n');
    out
}
