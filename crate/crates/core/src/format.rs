//! Small lexical helpers shared by the text formats, plus the ASCII array
//! and bit-stream file formats.

use crate::grid::{Index, Symbol};

/// Parses `(i,j)`.
pub fn parse_index(tok: &str) -> Result<Index, String> {
    let inner = tok
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| format!("expected `(i,j)`, got `{tok}`"))?;
    let (i, j) = inner.split_once(',').ok_or_else(|| format!("expected `(i,j)`, got `{tok}`"))?;
    let i = i.trim().parse::<i32>().map_err(|e| format!("bad row in `{tok}`: {e}"))?;
    let j = j.trim().parse::<i32>().map_err(|e| format!("bad column in `{tok}`: {e}"))?;
    Ok(Index::new(i, j))
}

/// Parses a symbol written as a decimal number or a single base-36 digit.
pub fn parse_symbol(tok: &str) -> Result<Symbol, String> {
    let tok = tok.trim();
    if let Ok(v) = tok.parse::<u8>() {
        return Ok(v);
    }
    let mut chars = tok.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => c.to_digit(36).map(|d| d as Symbol).ok_or_else(|| format!("bad symbol `{tok}`")),
        _ => Err(format!("bad symbol `{tok}`")),
    }
}

pub fn symbol_char(s: Symbol) -> char {
    std::char::from_digit(s as u32, 36).expect("symbol below 36")
}

/// Context string: one base-36 digit per cell, optionally wrapped in parens.
pub fn parse_context(tok: &str) -> Result<Vec<Symbol>, String> {
    let tok = tok.trim();
    let inner = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(tok);
    inner
        .chars()
        .map(|c| c.to_digit(36).map(|d| d as Symbol).ok_or_else(|| format!("bad context symbol `{c}` in `{tok}`")))
        .collect()
}

pub fn context_string(values: &[Symbol]) -> String {
    values.iter().map(|&v| symbol_char(v)).collect()
}

/// Rectangular symbol array in the ASCII interchange format: a header line
/// `M N alphabet` followed by `M` rows of `N` base-36 digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsciiArray {
    pub m: usize,
    pub n: usize,
    pub alphabet: Symbol,
    /// Row-major values.
    pub values: Vec<Symbol>,
}

impl AsciiArray {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.m, self.n, self.alphabet);
        for row in self.values.chunks(self.n.max(1)) {
            out.extend(row.iter().map(|&v| symbol_char(v)));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<AsciiArray, String> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or("missing header `M N alphabet`")?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| format!("bad header `{header}`: {e}")))
            .collect::<Result<_, _>>()?;
        let [m, n, alphabet] = nums[..] else {
            return Err(format!("header must be `M N alphabet`, got `{header}`"));
        };
        if !(2..=36).contains(&alphabet) {
            return Err(format!("alphabet {alphabet} out of range"));
        }
        let mut values = Vec::with_capacity(m * n);
        for r in 0..m {
            let row = lines.next().ok_or_else(|| format!("missing row {r}"))?;
            let parsed = parse_context(row)?;
            if parsed.len() != n {
                return Err(format!("row {r} has {} symbols, expected {n}", parsed.len()));
            }
            if let Some(&bad) = parsed.iter().find(|&&v| v as usize >= alphabet) {
                return Err(format!("row {r}: symbol {bad} outside alphabet"));
            }
            values.extend(parsed);
        }
        if lines.next().is_some() {
            return Err("trailing rows after the array".into());
        }
        Ok(AsciiArray { m, n, alphabet: alphabet as Symbol, values })
    }
}

/// Unpacks bytes into bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1 == 1)).collect()
}

/// Packs bits MSB-first; the final byte is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b as u8) << (7 - k))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexical_helpers() {
        assert_eq!(parse_index("(-1, 2)").unwrap(), Index::new(-1, 2));
        assert!(parse_index("1,2").is_err());
        assert_eq!(parse_symbol("1").unwrap(), 1);
        assert_eq!(parse_symbol("z").unwrap(), 35);
        assert_eq!(parse_context("(0010)").unwrap(), vec![0, 0, 1, 0]);
        assert_eq!(context_string(&[1, 0, 11]), "10b");
    }

    #[test]
    fn ascii_array_round_trip() {
        let a = AsciiArray { m: 2, n: 3, alphabet: 2, values: vec![0, 1, 0, 0, 0, 1] };
        assert_eq!(a.to_text(), "2 3 2\n010\n001\n");
        assert_eq!(AsciiArray::parse(&a.to_text()).unwrap(), a);
        assert!(AsciiArray::parse("2 3 2\n010\n").is_err());
        assert!(AsciiArray::parse("1 2 2\n02\n").is_err());
    }

    #[test]
    fn bit_packing() {
        let bits = bytes_to_bits(&[0b1010_0001]);
        assert_eq!(bits, vec![true, false, true, false, false, false, false, true]);
        assert_eq!(bits_to_bytes(&bits), vec![0b1010_0001]);
        assert_eq!(bits_to_bytes(&[true, true]), vec![0b1100_0000]);
    }
}
