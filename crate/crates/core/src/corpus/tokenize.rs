//! Whitespace-and-punctuation tokenizer tuned for short social-media posts.
//!
//! Rules:
//! - input is split on Unicode whitespace first;
//! - a chunk starting with `scheme://` is a single url token (trailing sentence
//!   punctuation is detached);
//! - `@name` and `#name` runs become one mention / hashtag token;
//! - every emoji codepoint is its own token, joiners and variation selectors are dropped;
//! - alphanumeric runs (with inner `-` or `'`, and `.`/`,` between digits) are words or numbers;
//! - anything else is a one-character punct token.
//!
//! Case is preserved.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Mention,
    Hashtag,
    Url,
    Emoji,
    Punct,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(surface: impl Into<String>, kind: TokenKind) -> Self {
        Token {
            surface: surface.into(),
            kind,
        }
    }

    pub fn word(surface: impl Into<String>) -> Self {
        Token::new(surface, TokenKind::Word)
    }

    /// Tokens that carry vocabulary: words, hashtags and emoji.
    pub fn is_lexical(&self) -> bool {
        matches!(
            self.kind,
            TokenKind::Word | TokenKind::Hashtag | TokenKind::Emoji
        )
    }

    pub fn is_sentence_end(&self) -> bool {
        self.kind == TokenKind::Punct && matches!(self.surface.as_str(), "." | "!" | "?")
    }
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        if let Some(end) = url_end(chunk) {
            tokens.push(Token::new(&chunk[..end], TokenKind::Url));
            tokens.extend(
                chunk[end..]
                    .chars()
                    .map(|c| Token::new(c.to_string(), TokenKind::Punct)),
            );
        } else {
            scan_chunk(chunk, &mut tokens);
        }
    }
    tokens
}

/// Removes mention tokens, keeping the order of everything else.
pub fn strip_mentions(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Mention)
        .cloned()
        .collect()
}

fn scan_chunk(chunk: &str, out: &mut Vec<Token>) {
    let chars: Vec<char> = chunk.chars().collect();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if is_ignorable(c) {
            i += 1;
        } else if is_emoji(c) {
            out.push(Token::new(c.to_string(), TokenKind::Emoji));
            i += 1;
        } else if (c == '@' || c == '#') && i + 1 < n && is_name_char(chars[i + 1]) {
            let mut j = i + 1;
            while j < n && is_name_char(chars[j]) {
                j += 1;
            }
            let kind = if c == '@' {
                TokenKind::Mention
            } else {
                TokenKind::Hashtag
            };
            out.push(Token::new(chars[i..j].iter().collect::<String>(), kind));
            i = j;
        } else if c.is_alphanumeric() {
            let mut j = i + 1;
            loop {
                if j < n && chars[j].is_alphanumeric() {
                    j += 1;
                } else if j + 1 < n && joins(chars[j - 1], chars[j], chars[j + 1]) {
                    j += 2;
                } else {
                    break;
                }
            }
            let surface: String = chars[i..j].iter().collect();
            let kind = if surface.chars().any(char::is_alphabetic) {
                TokenKind::Word
            } else {
                TokenKind::Number
            };
            out.push(Token::new(surface, kind));
            i = j;
        } else {
            out.push(Token::new(c.to_string(), TokenKind::Punct));
            i += 1;
        }
    }
}

fn joins(prev: char, mid: char, next: char) -> bool {
    match mid {
        '-' | '\'' | '\u{2019}' => next.is_alphanumeric(),
        '.' | ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offset where the url part of `chunk` ends, if `chunk` starts with `scheme://`.
fn url_end(chunk: &str) -> Option<usize> {
    let scheme_end = chunk.find("://")?;
    let scheme = &chunk[..scheme_end];
    let mut sc = scheme.chars();
    let first_ok = sc.next().is_some_and(|c| c.is_ascii_alphabetic());
    if !first_ok || !sc.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '.' | '-')) {
        return None;
    }
    let trimmed = chunk.trim_end_matches(['.', ',', ';', ':', '!', '?', ')', '"', '\'', '»']);
    (trimmed.len() > scheme_end + 3).then_some(trimmed.len())
}

fn is_ignorable(c: char) -> bool {
    matches!(c, '\u{200D}' | '\u{FE0E}' | '\u{FE0F}' | '\u{1F3FB}'..='\u{1F3FF}')
}

pub fn is_emoji(c: char) -> bool {
    matches!(c,
        '\u{1F000}'..='\u{1FAFF}'
        | '\u{2600}'..='\u{27BF}'
        | '\u{2B00}'..='\u{2BFF}'
        | '\u{231A}'..='\u{231B}'
        | '\u{23E9}'..='\u{23FA}'
        | '\u{3030}' | '\u{303D}' | '\u{3297}' | '\u{3299}')
}
