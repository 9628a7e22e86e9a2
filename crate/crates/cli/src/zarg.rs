use dqs_core::exact::{ComplexRational, Rational};
use num_traits::{One, Zero};

fn rational(s: &str) -> Result<Rational, String> {
    let s = s.strip_prefix('+').unwrap_or(s);
    s.parse::<Rational>().map_err(|_| format!("`{s}` is not a rational number (expected N or N/D)"))
}

/// Parses `RE`, `IMi` or `RE+IMi` / `RE-IMi` with rational components, e.g. `-3`, `3/2+1/2i`, `-i`.
pub fn parse_complex(input: &str) -> Result<ComplexRational, String> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(ComplexRational::real(rational(&s)?));
    };
    // split at the last sign that is not the leading one
    let split = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i).last();
    let (re, im) = match split {
        Some(i) => (rational(&body[..i])?, &body[i..]),
        None => (Rational::zero(), body),
    };
    let im = match im {
        "" | "+" => Rational::one(),
        "-" => -Rational::one(),
        other => rational(other)?,
    };
    Ok(ComplexRational::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dqs_core::exact::{int, rat};

    #[test]
    fn forms() {
        assert_eq!(parse_complex("-3").unwrap(), ComplexRational::real(int(-3)));
        assert_eq!(parse_complex("3/2+1/2i").unwrap(), ComplexRational::new(rat(3, 2), rat(1, 2)));
        assert_eq!(parse_complex("2-i").unwrap(), ComplexRational::new(int(2), int(-1)));
        assert_eq!(parse_complex("-i").unwrap(), ComplexRational::new(int(0), int(-1)));
        assert_eq!(parse_complex("5/3i").unwrap(), ComplexRational::new(int(0), rat(5, 3)));
        assert_eq!(parse_complex("-1/2-7/4i").unwrap(), ComplexRational::new(rat(-1, 2), rat(-7, 4)));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1.5").is_err());
        assert!(parse_complex("x+yi").is_err());
    }
}
