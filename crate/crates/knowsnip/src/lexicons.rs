//! Word lexicons used by the feature-engineering baseline: conclusive title
//! words, personal pronouns by grammatical person, and punctuation tokens.
//!
//! Lexicons are plain UTF-8 files, one term per line, so they can be swapped
//! for another language. [`Lexicons::english_defaults`] provides a built-in
//! English set.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Conclusive words that signal a knowledge-bearing title.
pub const DEFAULT_CONCLUSIVE: &[&str] = &[
    "forum",
    "real_stuff",
    "school",
    "secret",
    "skill",
    "collection",
    "question",
    "decrypt",
    "unscramble",
    "guide",
    "misunderstand",
    "pattern",
    "research",
    "special",
    "mechanism",
    "classroom",
    "difference",
    "knowledge",
    "comment",
    "method",
    "measure",
    "answer",
    "theory",
    "study",
    "system",
];

pub const DEFAULT_FIRST_PERSON: &[&str] = &["i", "me", "my", "mine", "we", "us", "our", "ours"];
pub const DEFAULT_SECOND_PERSON: &[&str] = &["you", "your", "yours"];
pub const DEFAULT_THIRD_PERSON: &[&str] = &[
    "he", "him", "his", "she", "her", "hers", "it", "its", "they", "them", "their", "theirs",
];
pub const DEFAULT_PUNCTUATION: &[&str] = &[
    ".", ",", ";", ":", "!", "?", "\"", "'", "(", ")", "[", "]", "{", "}", "-", "--", "...", "،",
    "。", "，", "；", "：", "！", "？", "（", "）", "《", "》", "、", "“", "”",
];

/// File names looked up by [`Lexicons::load_dir`].
pub const LEXICON_FILES: [&str; 5] = [
    "conclusive.txt",
    "pronouns_first.txt",
    "pronouns_second.txt",
    "pronouns_third.txt",
    "punctuation.txt",
];

/// The term sets consulted by word and sentence features.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub conclusive: HashSet<String>,
    pub first_person: HashSet<String>,
    pub second_person: HashSet<String>,
    pub third_person: HashSet<String>,
    pub punctuation: HashSet<String>,
}

impl Lexicons {
    /// Built-in English lexicons.
    pub fn english_defaults() -> Self {
        let set = |terms: &[&str]| terms.iter().map(|t| t.to_string()).collect();
        Lexicons {
            conclusive: set(DEFAULT_CONCLUSIVE),
            first_person: set(DEFAULT_FIRST_PERSON),
            second_person: set(DEFAULT_SECOND_PERSON),
            third_person: set(DEFAULT_THIRD_PERSON),
            punctuation: set(DEFAULT_PUNCTUATION),
        }
    }

    /// Loads the five lexicon files from a directory (see [`LEXICON_FILES`]).
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut sets = Vec::with_capacity(LEXICON_FILES.len());
        for name in LEXICON_FILES {
            sets.push(load_lexicon(dir.join(name))?);
        }
        let mut it = sets.into_iter();
        Ok(Lexicons {
            conclusive: it.next().unwrap(),
            first_person: it.next().unwrap(),
            second_person: it.next().unwrap(),
            third_person: it.next().unwrap(),
            punctuation: it.next().unwrap(),
        })
    }

    /// Writes the built-in English lexicons into a directory, creating it if
    /// needed. Handy for bootstrapping a translation.
    pub fn write_defaults(dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let dump = |name: &str, terms: &[&str]| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, terms.join("\n") + "\n").map_err(|e| Error::io(&path, e))
        };
        dump("conclusive.txt", DEFAULT_CONCLUSIVE)?;
        dump("pronouns_first.txt", DEFAULT_FIRST_PERSON)?;
        dump("pronouns_second.txt", DEFAULT_SECOND_PERSON)?;
        dump("pronouns_third.txt", DEFAULT_THIRD_PERSON)?;
        dump("punctuation.txt", DEFAULT_PUNCTUATION)?;
        Ok(())
    }
}

/// One term per line; blank lines and `#` comments are skipped.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingLexicon {
            path: path.to_path_buf(),
        });
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
