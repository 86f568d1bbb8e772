//! Parser for the polynomial text format, e.g. `"0.5*x1^2*y2 - 3 x2 + 1"`.
//!
//! A term is an optional numeric coefficient followed by factors `x<k>` or
//! `y<k>` (1-based, `k ≤ n+1`) with optional nonnegative integer exponents.
//! Factors may be separated by `*` or whitespace.

use super::{Exponents, RealPolynomial};
use crate::error::{Error, Result};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        self.digits();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                return self.err("malformed exponent in numeric coefficient");
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse {
                position: start,
                message: format!("invalid numeric coefficient {text:?}"),
            }),
        }
    }
}

pub(super) fn parse(text: &str, n: usize) -> Result<RealPolynomial> {
    let dim = 2 * n + 2;
    let mut cur = Cursor {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut out = RealPolynomial::zero(n);
    cur.skip_ws();
    if cur.peek().is_none() {
        return cur.err("empty polynomial");
    }
    let mut first = true;
    loop {
        cur.skip_ws();
        let mut sign = 1.0;
        match cur.peek() {
            Some(b'+') if !first => cur.pos += 1,
            Some(b'-') => {
                sign = -1.0;
                cur.pos += 1;
            }
            Some(_) if first => {}
            Some(_) => return cur.err("expected '+' or '-' between terms"),
            None => return cur.err("unexpected end of input"),
        }
        first = false;
        cur.skip_ws();

        let mut coeff = 1.0;
        let mut exps = vec![0u32; dim];
        let mut seen_any = false;
        if matches!(cur.peek(), Some(b) if b.is_ascii_digit() || b == b'.') {
            coeff = cur.number()?;
            seen_any = true;
        }
        loop {
            cur.skip_ws();
            let save = cur.pos;
            if cur.peek() == Some(b'*') {
                if !seen_any {
                    return cur.err("term starts with '*'");
                }
                cur.pos += 1;
                cur.skip_ws();
            }
            match cur.peek() {
                Some(b @ (b'x' | b'y')) => {
                    cur.pos += 1;
                    let idx_text = cur.digits();
                    let idx: usize = match idx_text.parse() {
                        Ok(i) if (1..=n + 1).contains(&i) => i,
                        _ => {
                            return cur.err(format!(
                                "variable index {idx_text:?} out of range 1..={}",
                                n + 1
                            ))
                        }
                    };
                    let slot = 2 * (idx - 1) + usize::from(b == b'y');
                    let mut power = 1u32;
                    cur.skip_ws();
                    if cur.peek() == Some(b'^') {
                        cur.pos += 1;
                        cur.skip_ws();
                        if cur.peek() == Some(b'-') {
                            return cur.err("negative exponent");
                        }
                        let p = cur.digits();
                        power = match p.parse() {
                            Ok(v) => v,
                            Err(_) => return cur.err("exponent must be a nonnegative integer"),
                        };
                        if matches!(cur.peek(), Some(b'.')) {
                            return cur.err("exponent must be a nonnegative integer");
                        }
                    }
                    exps[slot] += power;
                    seen_any = true;
                }
                Some(b) if b.is_ascii_digit() || b == b'.' => {
                    // a further numeric factor, e.g. "2*3*x1"
                    if cur.bytes[save] != b'*' {
                        return cur.err("numeric factor must follow '*'");
                    }
                    coeff *= cur.number()?;
                }
                Some(b'+' | b'-') | None => {
                    if cur.pos != save {
                        return cur.err("dangling '*'");
                    }
                    break;
                }
                Some(_) => {
                    return cur.err(format!(
                        "unexpected character {:?}",
                        char::from(cur.bytes[cur.pos])
                    ))
                }
            }
        }
        if !seen_any {
            return cur.err("empty term");
        }
        out = out + &RealPolynomial::monomial(n, Exponents::new(exps), sign * coeff);
        if cur.peek().is_none() {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms() {
        let u = parse("0.5*x1^2*y2 - 3 x2 + 1", 1).unwrap();
        assert_eq!(u.coefficient(&[2, 0, 0, 1]), 0.5);
        assert_eq!(u.coefficient(&[0, 0, 1, 0]), -3.0);
        assert_eq!(u.coefficient(&[0, 0, 0, 0]), 1.0);
        assert_eq!(u.num_terms(), 3);

        let v = parse("-x1 y1 + 2e-1 * x3^3", 2).unwrap();
        assert_eq!(v.coefficient(&[1, 1, 0, 0, 0, 0]), -1.0);
        assert_eq!(v.coefficient(&[0, 0, 0, 0, 3, 0]), 0.2);
        // repeated variables accumulate
        assert_eq!(parse("x1*x1", 1).unwrap(), parse("x1^2", 1).unwrap());
        assert!(parse("x1 - x1", 1).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "",
            "abc*x1",
            "x1^-2",
            "x1^2.5",
            "x3",
            "x0",
            "z1",
            "2 * ",
            "* x1",
            "1 + + x1",
            "1e",
            "x1 x2 )",
            "nan",
            "inf*x1",
        ] {
            assert!(parse(bad, 1).is_err(), "accepted {bad:?}");
        }
        let err = parse("x1^-2", 1).unwrap_err().to_string();
        assert!(err.contains("negative exponent"), "{err}");
    }
}
