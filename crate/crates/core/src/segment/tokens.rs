//! Token normalization shared by the segmenter, the profile loader and the
//! scorer. Everything that is compared against a profile keyword goes
//! through [`tokenize`], so both sides always agree on what a term is.

/// Lowercases `raw` and strips every non-alphanumeric character.
///
/// Returns `None` when nothing is left.
pub fn normalize_token(raw: &str) -> Option<String> {
    let token: String = raw
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric())
        .collect();
    (!token.is_empty()).then_some(token)
}

/// Splits `s` into maximal alphanumeric runs and normalizes each one.
pub fn tokenize(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter_map(normalize_token)
        .collect()
}
