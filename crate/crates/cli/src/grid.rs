//! Parsing of `start..end:count` ranges and comma lists.

use crate::CliError;

pub const DEFAULT_COUNT: usize = 10;

fn parse_f64(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    match t {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("not a number: `{t}`"))),
    }
}

fn parse_usize(text: &str) -> Result<usize, CliError> {
    let t = text.trim();
    t.parse::<usize>()
        .map_err(|_| CliError::Validation(format!("not a non-negative integer: `{t}`")))
}

/// Splits `start..end[:count]` into its parts, or `None` for a list.
fn split_range(text: &str) -> Result<Option<(&str, &str, usize)>, CliError> {
    let Some((start, rest)) = text.split_once("..") else {
        return Ok(None);
    };
    let (end, count) = match rest.split_once(':') {
        Some((end, count)) => (end, parse_usize(count)?),
        None => (rest, DEFAULT_COUNT),
    };
    if count < 1 {
        return Err(CliError::Validation(format!(
            "range `{text}` needs at least one point"
        )));
    }
    Ok(Some((start, end, count)))
}

fn check_ascending<T: PartialOrd + std::fmt::Debug>(
    text: &str,
    values: &[T],
) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Validation(format!("`{text}` is empty")));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Validation(format!(
            "`{text}` must be strictly increasing, got {values:?}"
        )));
    }
    Ok(())
}

/// Real grid: `0..1:201`, `0.1,0.5,0.9` or a single value.
pub fn parse_real_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let values = match split_range(text)? {
        Some((start, end, count)) => {
            let (a, b) = (parse_f64(start)?, parse_f64(end)?);
            if !a.is_finite() || !b.is_finite() {
                return Err(CliError::Validation(format!(
                    "range `{text}` needs finite ends"
                )));
            }
            adiabatic_lab::optimize::linspace(a, b, count)
        }
        None => text.split(',').map(parse_f64).collect::<Result<_, _>>()?,
    };
    check_ascending(text, &values)?;
    Ok(values)
}

/// Integer grid: `100..1000` (10 evenly spaced values), `10..40:31` or a list.
pub fn parse_int_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let values = match split_range(text)? {
        Some((start, end, count)) => {
            let (a, b) = (parse_usize(start)?, parse_usize(end)?);
            if count == 1 {
                vec![a]
            } else {
                (0..count)
                    .map(|i| {
                        let x = a as f64 + (b as f64 - a as f64) * i as f64 / (count - 1) as f64;
                        x.round() as usize
                    })
                    .collect()
            }
        }
        None => text.split(',').map(parse_usize).collect::<Result<_, _>>()?,
    };
    check_ascending(text, &values)?;
    Ok(values)
}
