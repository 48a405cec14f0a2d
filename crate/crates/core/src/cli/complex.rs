//! `re+imi` text form of complex numbers.

use num_complex::Complex64;

/// Parse `"40"`, `"20+20i"`, `"-3.5e-1-2i"`, `"80i"`, `"-i"`. Whitespace is ignored.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse {text:?} as a complex number (expected re+imi)");
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = if re_text.is_empty() { 0.0 } else { re_text.parse::<f64>().map_err(|_| bad())? };
    Ok(Complex64::new(re, im))
}

fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Shortest text that parses back to exactly `z`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        number(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", number(z.re), number(-z.im))
    } else {
        format!("{}+{}i", number(z.re), number(z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        let c = Complex64::new;
        assert_eq!(parse_complex("40"), Ok(c(40.0, 0.0)));
        assert_eq!(parse_complex("20+20i"), Ok(c(20.0, 20.0)));
        assert_eq!(parse_complex(" 30 + 20i "), Ok(c(30.0, 20.0)));
        assert_eq!(parse_complex("80i"), Ok(c(0.0, 80.0)));
        assert_eq!(parse_complex("-i"), Ok(c(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Ok(c(0.0, 1.0)));
        assert_eq!(parse_complex("1-i"), Ok(c(1.0, -1.0)));
        assert_eq!(parse_complex("-1e-3+2.5E+2i"), Ok(c(-1e-3, 250.0)));
        assert_eq!(parse_complex("1e5i"), Ok(c(0.0, 1e5)));
        assert_eq!(parse_complex("-2.5"), Ok(c(-2.5, 0.0)));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1+2j", "1++2i", "i1", "1+2ii"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn format_round_trips() {
        for z in [
            Complex64::new(10.0, 50.0),
            Complex64::new(0.1, -1.0 / 3.0),
            Complex64::new(-0.0, 0.0),
            Complex64::new(73.890_560_989_306_5, -1e-300),
            Complex64::new(40.0, 0.0),
            Complex64::new(1.128e-51, -7.4e-43),
            Complex64::new(-3e20, 2e-5),
        ] {
            let back = parse_complex(&format_complex(z)).unwrap();
            assert_eq!(back, z);
        }
        assert_eq!(format_complex(Complex64::new(20.0, 20.0)), "20+20i");
        assert_eq!(format_complex(Complex64::new(40.0, 0.0)), "40");
        assert_eq!(format_complex(Complex64::new(1.5e-30, -2.0)), "1.5e-30-2i");
    }
}
