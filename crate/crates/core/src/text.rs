//! Small text utilities shared by ingestion, preference extraction and
//! insight validation.

/// Parses a number the way attribute values are written in graph documents
/// and questions: surrounding whitespace and thousands separators are ignored.
pub fn parse_number(raw: &str) -> Option<f64> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return None;
    }
    let cleaned: String = if looks_grouped(trimmed) {
        trimmed.chars().filter(|c| *c != ',').collect()
    } else {
        trimmed.to_string()
    };
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

// "1,200" and "12,345.5" are grouped; "1,2" is not.
fn looks_grouped(s: &str) -> bool {
    if !s.contains(',') {
        return false;
    }
    let int_part = s.split('.').next().unwrap_or(s);
    let int_part = int_part.strip_prefix('-').unwrap_or(int_part);
    let groups: Vec<&str> = int_part.split(',').collect();
    !groups[0].is_empty()
        && groups[0].len() <= 3
        && groups[1..].iter().all(|g| g.len() == 3)
        && groups.iter().all(|g| g.chars().all(|c| c.is_ascii_digit()))
}

/// Formats a float without a trailing `.0` when it is integral.
pub fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// Canonical string form of an attribute value: numbers are normalized
/// (`"1,200"` and `"1200.0"` both become `"1200"`), text is trimmed with
/// internal whitespace collapsed.
pub fn canonical_value(raw: &str) -> String {
    match parse_number(raw) {
        Some(v) => format_number(v),
        None => raw.split_whitespace().collect::<Vec<_>>().join(" "),
    }
}

/// Case-insensitive comparison of two canonical values.
pub fn values_equal(a: &str, b: &str) -> bool {
    match (parse_number(a), parse_number(b)) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(1.0),
        _ => canonical_value(a).to_lowercase() == canonical_value(b).to_lowercase(),
    }
}

/// Splits an identifier such as `firstAuthor`, `h_index` or `Joined year`
/// into lowercase words.
pub fn identifier_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if ch.is_alphanumeric() {
            if ch.is_uppercase() && prev_lower && !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = ch.is_lowercase() || ch.is_ascii_digit();
            current.extend(ch.to_lowercase());
        } else {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            prev_lower = false;
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Singular/plural candidate forms of a lowercase word.
pub fn word_forms(word: &str) -> Vec<String> {
    let mut forms = vec![word.to_string()];
    if let Some(stem) = word.strip_suffix("ies") {
        forms.push(format!("{stem}y"));
    }
    if let Some(stem) = word.strip_suffix("es") {
        forms.push(stem.to_string());
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !stem.ends_with('s') {
            forms.push(stem.to_string());
        }
    }
    forms
}

/// True when `token` is `word` up to pluralization.
pub fn same_word(token: &str, word: &str) -> bool {
    let t = token.to_lowercase();
    let w = word.to_lowercase();
    if t == w {
        return true;
    }
    let tf = word_forms(&t);
    let wf = word_forms(&w);
    tf.iter().any(|a| wf.iter().any(|b| a == b))
}

/// A token of a question with its byte offset into the original text.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub start: usize,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.text.len() == 1 && matches!(self.text.as_str(), "," | "." | "?" | "!" | ";" | ":")
    }

    pub fn is_capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

/// Whitespace tokenization with trailing sentence punctuation split into
/// separate tokens. Digit-grouping commas (`1,200`) stay inside the token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive(char::is_whitespace) {
        let start = offset;
        offset += raw.len();
        let word = raw.trim_end();
        let lead = word.len() - word.trim_start_matches(['"', '\'', '(', '“']).len();
        let mut body = &word[lead..];
        let mut trailing = Vec::new();
        while let Some(last) = body.chars().last() {
            if matches!(last, ',' | '.' | '?' | '!' | ';' | ':' | '"' | '\'' | ')' | '”') {
                body = &body[..body.len() - last.len_utf8()];
                if matches!(last, ',' | '.' | '?' | '!' | ';' | ':') {
                    trailing.push((last, start + lead + body.len()));
                }
            } else {
                break;
            }
        }
        if !body.is_empty() {
            tokens.push(Token {
                text: body.to_string(),
                lower: body.to_lowercase(),
                start: start + lead,
            });
        }
        for (p, at) in trailing.into_iter().rev() {
            tokens.push(Token {
                text: p.to_string(),
                lower: p.to_string(),
                start: at,
            });
        }
    }
    tokens
}

/// Lowercase alphanumeric terms, used for term-frequency features.
pub fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// 64-bit FNV-1a. Stable across platforms and releases, unlike the std hasher.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}
