//! Lifetime input: builtin datasets and plain text files.

use std::path::Path;

use crate::CliError;

pub const BUILTINS: &[&str] = &["bjerkedal"];

pub fn builtin(name: &str) -> Result<Vec<f64>, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "bjerkedal" => Ok(wehc::datasets::BJERKEDAL.to_vec()),
        _ => Err(CliError::Config(format!("unknown builtin dataset '{name}' (known: {})", BUILTINS.join(", ")))),
    }
}

/// Parses whitespace- or comma-separated positive reals and sorts them.
/// Errors carry the 1-based line and column of the offending token.
pub fn parse_lifetimes(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut col = 0;
        for token in line.split(|c: char| c.is_whitespace() || c == ',') {
            let here = col;
            col += token.chars().count() + 1;
            if token.is_empty() {
                continue;
            }
            let bad = |message: String| CliError::Parse { line: i + 1, column: here + 1, message };
            let x: f64 = token.parse().map_err(|_| bad(format!("'{token}' is not a number")))?;
            if !(x.is_finite() && x > 0.0) {
                return Err(bad(format!("lifetime {token} must be positive and finite")));
            }
            out.push(x);
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse { line: 1, column: 1, message: "no lifetimes found".into() });
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_lifetimes(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_bjerkedal() {
        let d = builtin("bjerkedal").unwrap();
        assert_eq!(d.len(), 72);
        assert_eq!((d[0], d[71]), (12.0, 376.0));
    }

    #[test]
    fn sorts_mixed_separators() {
        assert_eq!(parse_lifetimes("3,1,2").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_lifetimes("4.5 1\n\n 2, 3\t0.5\n").unwrap(), vec![0.5, 1.0, 2.0, 3.0, 4.5]);
    }

    #[test]
    fn reports_position_of_bad_tokens() {
        match parse_lifetimes("1 2\n3 -1") {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse_lifetimes("1,x") {
            Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (1, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_lifetimes("0").is_err());
        assert!(parse_lifetimes("  \n").is_err());
    }
}
