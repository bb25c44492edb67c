//! Token counters used to measure prompts against an encoder context limit.

use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

/// Splits text into tokens, reported as byte ranges of the input.
///
/// Implementations must be prefix-stable: re-tokenizing `text[..span.end]`
/// for any returned span yields the same tokens up to and including it.
/// Truncation relies on this.
pub trait TokenCounter: Send + Sync {
    fn token_spans(&self, text: &str) -> Vec<Range<usize>>;

    fn count(&self, text: &str) -> usize {
        self.token_spans(text).len()
    }
}

/// Characters that always form a token on their own.
const HEURISTIC_PUNCT: &[char] = &['[', ']', '(', ')', ',', ':', '.', '-'];

/// Vocabulary-free approximation of a wordpiece count.
///
/// Whitespace separates tokens; each of `[ ] ( ) , : . -` is a token by
/// itself; every other run of characters (letters and digits alike) is one
/// token. `"x[m] y[m]"` is therefore eight tokens and `"-11.63"` four.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicTokenizer;

impl TokenCounter for HeuristicTokenizer {
    fn token_spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        for (i, c) in text.char_indices() {
            if c.is_whitespace() || HEURISTIC_PUNCT.contains(&c) {
                if let Some(s) = start.take() {
                    spans.push(s..i);
                }
                if !c.is_whitespace() {
                    spans.push(i..i + c.len_utf8());
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            spans.push(s..text.len());
        }
        spans
    }
}

/// BERT-style wordpiece tokenizer over a vocabulary file (one token per line).
///
/// Text is lowercased, split on whitespace and punctuation, and each word is
/// matched greedily longest-first against the vocabulary with `##`
/// continuation pieces. Unmatchable words count as one unknown token.
/// Special tokens (`[CLS]`, `[SEP]`) are not counted, and accents are not
/// stripped.
#[derive(Debug, Clone)]
pub struct WordPieceTokenizer {
    vocab: HashSet<String>,
    lowercase: bool,
    max_word_chars: usize,
}

impl WordPieceTokenizer {
    pub fn from_vocab<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        WordPieceTokenizer { vocab: tokens.into_iter().map(Into::into).collect(), lowercase: true, max_word_chars: 100 }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let tok = Self::from_vocab(text.lines().map(str::trim_end).filter(|l| !l.is_empty()));
        if tok.vocab.is_empty() {
            return Err(Error::invalid(format!("vocabulary file {} is empty", path.display())));
        }
        Ok(tok)
    }

    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Greedy longest-match pieces of one word; `None` if some suffix has no match.
    fn word_pieces(&self, chars: &[(char, usize, usize)]) -> Option<Vec<Range<usize>>> {
        let mut pieces = Vec::new();
        let mut start = 0;
        let mut candidate = String::new();
        while start < chars.len() {
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                candidate.clear();
                if start > 0 {
                    candidate.push_str("##");
                }
                candidate.extend(chars[start..end].iter().map(|c| c.0));
                if self.vocab.contains(&candidate) {
                    found = Some(end);
                    break;
                }
                end -= 1;
            }
            let end = found?;
            pieces.push(chars[start].1..chars[end - 1].2);
            start = end;
        }
        Some(pieces)
    }
}

fn is_bert_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || ('\u{2000}'..='\u{206F}').contains(&c) || ('\u{3000}'..='\u{303F}').contains(&c)
}

impl TokenCounter for WordPieceTokenizer {
    fn token_spans(&self, text: &str) -> Vec<Range<usize>> {
        // (normalized char, byte start, byte end) per word
        let mut words: Vec<Vec<(char, usize, usize)>> = Vec::new();
        let mut current: Vec<(char, usize, usize)> = Vec::new();
        for (i, c) in text.char_indices() {
            let end = i + c.len_utf8();
            if c.is_whitespace() || c.is_control() {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
            } else if is_bert_punctuation(c) {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
                words.push(vec![(c, i, end)]);
            } else if self.lowercase {
                current.extend(c.to_lowercase().map(|l| (l, i, end)));
            } else {
                current.push((c, i, end));
            }
        }
        if !current.is_empty() {
            words.push(current);
        }

        let mut spans = Vec::new();
        for word in &words {
            let whole = word[0].1..word[word.len() - 1].2;
            if word.len() > self.max_word_chars {
                spans.push(whole);
                continue;
            }
            match self.word_pieces(word) {
                Some(pieces) => spans.extend(pieces),
                None => spans.push(whole),
            }
        }
        spans
    }
}
