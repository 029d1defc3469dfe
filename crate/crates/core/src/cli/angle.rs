//! Angle expressions: a number, `pi`, or products and quotients of those,
//! with an optional leading minus sign. `pi/4`, `3*pi/8`, `0.785`.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.as_str()),
    };
    if body.is_empty() {
        return Err(format!("empty angle expression {text:?}"));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let factor = parse_factor(&rest[..end]).map_err(|e| format!("{e} in {text:?}"))?;
        value = if op == '*' { value * factor } else { value / factor };
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next().unwrap_or('*');
        rest = &rest[end + 1..];
    }
    let value = sign * value;
    if !value.is_finite() {
        return Err(format!("angle {text:?} is not finite"));
    }
    Ok(value)
}

fn parse_factor(token: &str) -> Result<f64, String> {
    match token {
        "" => Err("missing operand".into()),
        "pi" | "PI" | "Pi" | "π" => Ok(PI),
        _ => match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("cannot read {token:?} as a number or pi")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle(" 2 * pi / 3 ").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("1e-6").unwrap(), 1e-6);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "pi/", "*pi", "pie", "1/0", "inf", "nan", "2+pi", "-"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }
}
