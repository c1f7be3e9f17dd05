//! Token normalization shared by clue parsing, query validation and grading.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token is empty after normalization: {0:?}")]
    InvalidToken(String),
}

/// Lowercases, trims and collapses internal whitespace runs to one space.
///
/// Idempotent: normalizing an already canonical token returns it unchanged.
pub fn canonicalize_token(raw: &str) -> Result<String, TokenError> {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    if out.is_empty() {
        Err(TokenError::InvalidToken(raw.to_string()))
    } else {
        Ok(out)
    }
}

/// Wire form of a 1-based house index.
pub fn house_label(house: usize) -> String {
    format!("house{house}")
}

/// Accepts `houseK`, `house K` and bare `K` (any case and spacing) for `1 <= K <= n_houses`.
pub fn parse_house(raw: &str, n_houses: usize) -> Option<usize> {
    let token = canonicalize_token(raw).ok()?;
    let digits = token
        .strip_prefix("house")
        .map(str::trim_start)
        .unwrap_or(token.as_str());
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let house: usize = digits.parse().ok()?;
    (1..=n_houses).contains(&house).then_some(house)
}
