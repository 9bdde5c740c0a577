//! Text forms for complex numbers, vectors, matrices and lists.
//!
//! Complex entries: `1`, `-0.5`, `2i`, `1+2i`, `1e-3-4e-2i`, `-i`.
//! Matrices: rows split by `;`, entries by `,`. `I` and `I<n>` are identities.

use gauge_frontier::linalg::{CMatrix, CVector};
use gauge_frontier::ChannelKind;
use num_complex::Complex64;

pub fn complex(text: &str) -> Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("not a complex number: {text:?}");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(Complex64::from).map_err(|_| bad());
    };
    // Split at the last sign that is not an exponent sign or the leading sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn vector(text: &str) -> Result<CVector, String> {
    let v = text.split(',').map(complex).collect::<Result<Vec<_>, _>>()?;
    Ok(CVector::from_vec(v))
}

/// A matrix literal, or `None` for a bare `I` whose size is not yet known.
pub fn matrix(text: &str) -> Result<Option<CMatrix>, String> {
    let t = text.trim();
    if let Some(size) = t.strip_prefix('I') {
        if size.is_empty() {
            return Ok(None);
        }
        let n: usize = size.parse().map_err(|_| format!("bad identity size in {text:?}"))?;
        if n == 0 {
            return Err("identity size must be positive".into());
        }
        return Ok(Some(CMatrix::identity(n, n)));
    }
    let rows: Vec<Vec<Complex64>> = t
        .split(';')
        .map(|r| r.split(',').map(complex).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(format!("rows of {text:?} have different lengths"));
    }
    Ok(Some(CMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c])))
}

/// Resolve a pair of matrices where either may be a bare `I`.
pub fn matrix_pair(a: &str, b: &str) -> Result<(CMatrix, CMatrix), String> {
    let (a, b) = (matrix(a)?, matrix(b)?);
    let n = a.as_ref().or(b.as_ref()).map_or(1, |m| m.nrows());
    let eye = || CMatrix::identity(n, n);
    Ok((a.unwrap_or_else(eye), b.unwrap_or_else(eye)))
}

/// Channel kind by name: `fast-fading`, `FastFading` and `fastfading` all work.
pub fn kind(text: &str) -> Result<ChannelKind, String> {
    let key: String = text.chars().filter(|c| *c != '-' && *c != '_').collect();
    key.parse::<ChannelKind>().map_err(|_| {
        format!("unknown channel kind {text:?} (fixed-h, coherent-mimo, block-fading, fast-fading, multipath, frac-log)")
    })
}
