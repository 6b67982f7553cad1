//! Encoder text format.
//!
//! ```text
//! psi = (0,-2) (0,-1) (-1,-1) (-1,0) (-1,1)
//! default = 0
//! mu (00000) 0:0.741868 1:0.258132
//! mu (00010) 0:0.687769 1:0.312231
//! boundary = fill:0
//! ```
//!
//! Context strings list one symbol per cell of `Ψ` in raster order, whatever
//! order the `psi` line uses. Symbols missing from a `mu` line get
//! probability 0. Without a `boundary` line the constraint's safe symbol is
//! used as the fill.

use super::{BoundaryDist, EncoderError, EncoderSpec, MuTable};
use crate::constraint::Constraint;
use crate::format::{context_string, parse_context, parse_index, parse_symbol, symbol_char};
use crate::grid::IndexSet;

pub fn parse_encoder(text: &str, c: &Constraint) -> Result<EncoderSpec, EncoderError> {
    let alphabet = c.alphabet();
    let mut psi: Option<IndexSet> = None;
    let mut default = None;
    let mut fill = None;
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| EncoderError::Parse { line, msg };
        if let Some(rest) = body.strip_prefix("mu ") {
            let mut toks = rest.split_whitespace();
            let ctx = parse_context(toks.next().ok_or_else(|| err("missing context".into()))?).map_err(err)?;
            let mut dist = vec![0.0; alphabet as usize];
            for tok in toks {
                let (w, p) = tok.split_once(':').ok_or_else(|| err(format!("expected `<w>:<prob>`, got `{tok}`")))?;
                let w = parse_symbol(w).map_err(err)?;
                if w >= alphabet {
                    return Err(err(format!("symbol {w} outside the alphabet")));
                }
                dist[w as usize] = p.parse::<f64>().map_err(|e| err(format!("probability `{p}`: {e}")))?;
            }
            rows.push((line, ctx, dist));
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| err("expected `key = value` or a `mu` line".into()))?;
        let value = value.trim();
        match key.trim() {
            "psi" => {
                let cells = value.split_whitespace().map(parse_index).collect::<Result<Vec<_>, _>>().map_err(err)?;
                psi = Some(IndexSet::from_indexes(cells));
            }
            "default" => default = Some(parse_symbol(value).map_err(err)?),
            "boundary" => {
                let sym = value.strip_prefix("fill:").ok_or_else(|| err("boundary must be `fill:<symbol>`".into()))?;
                fill = Some(parse_symbol(sym).map_err(err)?);
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let psi = psi.ok_or(EncoderError::Parse { line: 0, msg: "missing `psi` line".into() })?;
    let mut mu = MuTable::new(alphabet, psi.len(), default);
    for (line, ctx, dist) in rows {
        if ctx.len() != psi.len() {
            return Err(EncoderError::Parse { line, msg: format!("context has {} symbols, |Ψ| = {}", ctx.len(), psi.len()) });
        }
        mu.set(ctx, dist);
    }
    let fill = fill
        .or(c.safe_symbol())
        .ok_or(EncoderError::Parse { line: 0, msg: "constraint has no safe symbol; a `boundary` line is required".into() })?;
    Ok(EncoderSpec::new(psi, mu, BoundaryDist::ConstantFill(fill)))
}

/// Writes an encoder in the text format. Explicit boundary tables have no
/// text form; they are written as a comment.
pub fn write_encoder(e: &EncoderSpec) -> String {
    let mut out = String::from("psi =");
    for p in e.psi.iter() {
        out.push_str(&format!(" {p}"));
    }
    out.push('\n');
    if let Some(d) = e.mu.default_symbol() {
        out.push_str(&format!("default = {}\n", symbol_char(d)));
    }
    for (ctx, dist) in e.mu.entries() {
        out.push_str(&format!("mu ({})", context_string(ctx)));
        for (w, p) in dist.iter().enumerate() {
            if *p != 0.0 {
                out.push_str(&format!(" {}:{}", symbol_char(w as u8), p));
            }
        }
        out.push('\n');
    }
    match &e.boundary {
        BoundaryDist::ConstantFill(s) => out.push_str(&format!("boundary = fill:{}\n", symbol_char(*s))),
        BoundaryDist::Explicit(_) => out.push_str("# boundary: explicit table (not representable)\n"),
    }
    out
}
