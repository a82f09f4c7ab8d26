//! Locale-independent number parsing and formatting.

use walkgen::C64;

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, and the shorthand `ib`
/// (for instance `i1.0`).
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("`{s}` is not a complex number (expected forms: 1.5, 0.9+4i, 2i, i1.0)");
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(rest) = t.strip_prefix('i').or_else(|| t.strip_prefix("+i")) {
        let im: f64 = if rest.is_empty() { 1.0 } else { rest.parse().map_err(|_| bad())? };
        return Ok(C64::new(0.0, im));
    }
    if let Some(rest) = t.strip_prefix("-i") {
        let im: f64 = if rest.is_empty() { 1.0 } else { rest.parse().map_err(|_| bad())? };
        return Ok(C64::new(0.0, -im));
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(C64::from).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coeff = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(C64::new(body[..k].parse().map_err(|_| bad())?, coeff(&body[k..])?)),
        None => Ok(C64::new(0.0, coeff(body)?)),
    }
}

/// Shortest decimal that reads back to the same value for CSV output
/// (17 significant digits).
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact human-readable number.
pub fn human(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e7).contains(&a) {
        let s = format!("{x:.12}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.6e}")
    }
}

pub fn human_c(z: C64) -> String {
    if z.im == 0.0 {
        human(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", human(z.re), human(-z.im))
    } else {
        format!("{}+{}i", human(z.re), human(z.im))
    }
}
