use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use dirgeom::{Error, PointSet, Polynomial, PrimeModulus, ValueTable};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Guard(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) | CliError::Io(_) => ExitCode::from(2),
            CliError::Guard(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Guard(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Guard(_) => CliError::Guard(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn modulus(p: u64) -> CliResult<PrimeModulus> {
    Ok(PrimeModulus::new(p)?)
}

/// Inline literal or the contents of a file, exactly one of them.
pub fn literal(inline: Option<String>, file: Option<PathBuf>, what: &str) -> CliResult<String> {
    match (inline, file) {
        (Some(s), None) => Ok(s),
        (None, Some(path)) => std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display()))),
        _ => Err(CliError::Input(format!("give {what} inline or with --file"))),
    }
}

pub fn points(p: PrimeModulus, text: &str) -> CliResult<PointSet> {
    Ok(PointSet::parse(p, text)?)
}

fn integers(text: &str) -> CliResult<Vec<i64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| CliError::Input(format!("bad integer {t:?}")))
        })
        .collect()
}

pub fn values(p: PrimeModulus, text: &str) -> CliResult<ValueTable> {
    let raw: Vec<u64> = integers(text)?
        .into_iter()
        .map(|v| p.element_i64(v).lift() as u64)
        .collect();
    Ok(ValueTable::new(p, &raw)?)
}

/// Coefficient list low to high, brackets optional: `[1,0,1]` is `x^2 + 1`.
pub fn polynomial(p: PrimeModulus, text: &str) -> CliResult<Polynomial> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let coeffs = integers(inner)?;
    if coeffs.is_empty() {
        return Err(CliError::Input("empty coefficient list".into()));
    }
    Ok(Polynomial::from_signed_coeffs(p, &coeffs))
}

pub fn residue_set(p: PrimeModulus, text: &str) -> CliResult<BTreeSet<u32>> {
    let mut out = BTreeSet::new();
    for v in integers(text.trim().trim_start_matches('{').trim_end_matches('}'))? {
        if v < 0 || v >= p.get() as i64 {
            return Err(CliError::Input(format!("{v} is not a residue mod {p}")));
        }
        out.insert(v as u32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        let p = modulus(5).unwrap();
        assert_eq!(polynomial(p, "[1,0,1]").unwrap().to_string(), "[1,0,1]");
        assert_eq!(polynomial(p, "1 0 -4").unwrap().to_string(), "[1,0,1]");
        assert!(polynomial(p, "[]").is_err());
        assert_eq!(values(p, "1,2,0,0,2").unwrap().raw(), &[1, 2, 0, 0, 2]);
        assert!(matches!(values(p, "1,2"), Err(CliError::Input(_))));
        assert_eq!(residue_set(p, "{0,1}").unwrap(), BTreeSet::from([0, 1]));
        assert!(residue_set(p, "7").is_err());
        assert!(matches!(modulus(17 * 3), Err(CliError::Input(_))));
    }
}
