//! Phase literals: plain radians (`1.5708`) or multiples of pi (`pi`,
//! `-pi`, `0.5pi`, `3*pi`, `pi/2`, `3pi/2`).

use std::f64::consts::PI;

pub fn parse_phase(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad =
        || format!("malformed phase `{text}` (use radians or a multiple of pi, e.g. `0.5pi`)");
    let value = if let Some(pos) = t.find("pi") {
        let (coef, rest) = (&t[..pos], &t[pos + 2..]);
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let scale = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => parse_plain(c).ok_or_else(bad)?,
        };
        let divisor = match rest {
            "" => 1.0,
            r => {
                let d = r.strip_prefix('/').and_then(parse_plain).ok_or_else(bad)?;
                if d == 0.0 {
                    return Err(bad());
                }
                d
            }
        };
        scale * PI / divisor
    } else {
        parse_plain(t).ok_or_else(bad)?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn parse_plain(s: &str) -> Option<f64> {
    let numeric = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    if !numeric {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_phase("pi"), Ok(PI));
        assert_eq!(parse_phase("-pi"), Ok(-PI));
        assert_eq!(parse_phase("0.5pi"), Ok(0.5 * PI));
        assert_eq!(parse_phase("3*pi"), Ok(3.0 * PI));
        assert_eq!(parse_phase("pi/2"), Ok(PI / 2.0));
        assert_eq!(parse_phase("3pi/2"), Ok(3.0 * PI / 2.0));
        assert_eq!(parse_phase("0"), Ok(0.0));
        assert_eq!(parse_phase("1.25"), Ok(1.25));
        assert_eq!(parse_phase("-2e-1"), Ok(-0.2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "", "abc", "pipi", "2pi/0", "inf", "nan", "pi/", "1.2.3", "2 pi",
        ] {
            assert!(parse_phase(bad).is_err(), "{bad}");
        }
    }
}
