//! Key-value operator descriptions:
//!
//! ```text
//! pucci { lam = 1, Lam = 2 }
//! supform { terms = [(1, 0, 1, 0), (2, 0, 2, -1)] }
//! thm17 { i = 1, Lambdas = [1, 1.5], offsets = [0, 5] }
//! laplacian {}
//! ```
//!
//! Entries are separated by commas or newlines and `#` starts a comment.
//! `supform` terms are `(L11, L12, L22, c)`; its ellipticity constants default
//! to the extreme eigenvalues of the coefficient matrices unless `lam`/`Lam`
//! are given. `thm17` offsets are subtracted (`P+_{1,Lambda_j} - offsets[j]`);
//! when `Lambdas` is omitted the values `2 - 1/(j+1)` are used.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ConvexOperator, EllipticityPair, LinearTerm, SymMat2};
use crate::error::{Error, Result};

/// Parsed operator description; converts to a [`ConvexOperator`] and prints
/// back in the same syntax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum OperatorSpec {
    Laplacian,
    Pucci { lam: f64, big_lam: f64 },
    Supform { terms: Vec<[f64; 4]>, ell: Option<(f64, f64)> },
    Thm17 { i: usize, lambdas: Vec<f64>, offsets: Vec<f64> },
}

impl OperatorSpec {
    pub fn build(&self) -> Result<ConvexOperator> {
        match self {
            OperatorSpec::Laplacian => Ok(ConvexOperator::laplacian()),
            OperatorSpec::Pucci { lam, big_lam } => {
                Ok(ConvexOperator::pucci_plus(EllipticityPair::new(*lam, *big_lam)?))
            }
            OperatorSpec::Supform { terms, ell } => {
                let terms: Vec<LinearTerm> =
                    terms.iter().map(|t| LinearTerm::new(SymMat2::new(t[0], t[1], t[2]), t[3])).collect();
                let ell = match ell {
                    Some((a, b)) => EllipticityPair::new(*a, *b)?,
                    None => {
                        let (lo, hi) = terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                            let (a, b) = t.coeff.eigenvalues();
                            (lo.min(a), hi.max(b))
                        });
                        EllipticityPair::new(lo, hi)?
                    }
                };
                ConvexOperator::sup_form(terms, ell)
            }
            OperatorSpec::Thm17 { i, lambdas, offsets } => {
                let n = i + 1;
                if lambdas.len() < n || offsets.len() < n {
                    return Err(Error::Parameter(format!("thm17 with i = {i} needs {n} Lambdas and offsets")));
                }
                if lambdas[..n].windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Parameter("thm17 Lambdas must be strictly increasing".into()));
                }
                ConvexOperator::pucci_family(&lambdas[..n], &offsets[..n])
            }
        }
    }
}

fn fmt_list(f: &mut fmt::Formatter<'_>, xs: &[f64]) -> fmt::Result {
    write!(f, "[")?;
    for (k, x) in xs.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, "]")
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Laplacian => write!(f, "laplacian {{}}"),
            OperatorSpec::Pucci { lam, big_lam } => write!(f, "pucci {{ lam = {lam}, Lam = {big_lam} }}"),
            OperatorSpec::Supform { terms, ell } => {
                write!(f, "supform {{ ")?;
                if let Some((a, b)) = ell {
                    write!(f, "lam = {a}, Lam = {b}, ")?;
                }
                write!(f, "terms = [")?;
                for (k, t) in terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({}, {}, {}, {})", t[0], t[1], t[2], t[3])?;
                }
                write!(f, "] }}")
            }
            OperatorSpec::Thm17 { i, lambdas, offsets } => {
                write!(f, "thm17 {{ i = {i}, Lambdas = ")?;
                fmt_list(f, lambdas)?;
                write!(f, ", offsets = ")?;
                fmt_list(f, offsets)?;
                write!(f, " }}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    List(Vec<Value>),
    Tuple(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let src = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = src.chars().collect();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            if c.is_whitespace() {
                k += 1;
            } else if "{}[](),=".contains(c) {
                toks.push((Tok::Sym(c), line));
                k += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                let word: String = chars[start..k].iter().collect();
                match word.as_str() {
                    "inf" => toks.push((Tok::Num(f64::INFINITY), line)),
                    _ => toks.push((Tok::Ident(word), line)),
                }
            } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
                let start = k;
                k += 1;
                while k < chars.len()
                    && (chars[k].is_ascii_alphanumeric() || chars[k] == '.' || chars[k] == '+' || chars[k] == '-')
                {
                    // Signs only continue a number right after an exponent marker.
                    if (chars[k] == '+' || chars[k] == '-') && !matches!(chars[k - 1], 'e' | 'E') {
                        break;
                    }
                    k += 1;
                }
                let word: String = chars[start..k].iter().collect();
                let v = if word == "-inf" {
                    f64::NEG_INFINITY
                } else {
                    word.parse::<f64>().or_else(|_| err(line, format!("bad number '{word}'")))?
                };
                toks.push((Tok::Num(v), line));
            } else {
                return err(line, format!("unexpected character '{c}'"));
            }
        }
    }
    Ok(toks)
}

impl Lexer {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Result<Tok> {
        let line = self.line();
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t.map_or_else(|| err(line, "unexpected end of input"), Ok)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let line = self.line();
        match self.next()? {
            Tok::Sym(s) if s == c => Ok(()),
            other => err(line, format!("expected '{c}', found {other:?}")),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn value(&mut self) -> Result<Value> {
        let line = self.line();
        match self.next()? {
            Tok::Num(x) => Ok(Value::Num(x)),
            Tok::Sym('[') => Ok(Value::List(self.seq(']')?)),
            Tok::Sym('(') => Ok(Value::Tuple(self.seq(')')?)),
            other => err(line, format!("expected a value, found {other:?}")),
        }
    }

    fn seq(&mut self, close: char) -> Result<Vec<Value>> {
        let mut out = Vec::new();
        loop {
            if self.eat(close) {
                return Ok(out);
            }
            out.push(self.value()?);
            if !self.eat(',') {
                self.expect(close)?;
                return Ok(out);
            }
        }
    }
}

fn num(v: &Value, line: usize, key: &str) -> Result<f64> {
    match v {
        Value::Num(x) => Ok(*x),
        _ => err(line, format!("'{key}' must be a number")),
    }
}

fn nums(v: &Value, line: usize, key: &str) -> Result<Vec<f64>> {
    match v {
        Value::List(xs) | Value::Tuple(xs) => xs.iter().map(|x| num(x, line, key)).collect(),
        _ => err(line, format!("'{key}' must be a list of numbers")),
    }
}

/// Parse one operator block.
pub fn parse_operator(text: &str) -> Result<OperatorSpec> {
    let mut lx = Lexer { toks: lex(text)?, pos: 0 };
    let line = lx.line();
    let name = match lx.next()? {
        Tok::Ident(s) => s,
        other => return err(line, format!("expected operator name, found {other:?}")),
    };
    lx.expect('{')?;
    let mut entries: Vec<(String, Value, usize)> = Vec::new();
    loop {
        if lx.eat('}') {
            break;
        }
        let line = lx.line();
        let key = match lx.next()? {
            Tok::Ident(s) => s,
            other => return err(line, format!("expected key, found {other:?}")),
        };
        lx.expect('=')?;
        let v = lx.value()?;
        if entries.iter().any(|(k, _, _)| *k == key) {
            return err(line, format!("duplicate key '{key}'"));
        }
        entries.push((key, v, line));
        lx.eat(',');
    }
    if lx.pos < lx.toks.len() {
        return err(lx.line(), "trailing input after operator block");
    }
    let get = |key: &str| entries.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v, *l));
    let allowed: &[&str] = match name.as_str() {
        "laplacian" => &[],
        "pucci" => &["lam", "Lam"],
        "supform" => &["terms", "lam", "Lam"],
        "thm17" => &["i", "Lambdas", "offsets"],
        _ => return err(line, format!("unknown operator '{name}'")),
    };
    if let Some((k, _, l)) = entries.iter().find(|(k, _, _)| !allowed.contains(&k.as_str())) {
        return err(*l, format!("unknown key '{k}' for {name}"));
    }
    let required = |key: &str| get(key).map_or_else(|| err(line, format!("{name} needs '{key}'")), Ok);
    let spec = match name.as_str() {
        "laplacian" => OperatorSpec::Laplacian,
        "pucci" => {
            let (v, l) = required("lam")?;
            let lam = num(v, l, "lam")?;
            let (v, l) = required("Lam")?;
            OperatorSpec::Pucci { lam, big_lam: num(v, l, "Lam")? }
        }
        "supform" => {
            let (v, l) = required("terms")?;
            let rows = match v {
                Value::List(rows) => rows,
                _ => return err(l, "'terms' must be a list of (L11, L12, L22, c) tuples"),
            };
            let mut terms = Vec::with_capacity(rows.len());
            for r in rows {
                let xs = nums(r, l, "terms")?;
                if xs.len() != 4 {
                    return err(l, "each term must have four entries (L11, L12, L22, c)");
                }
                terms.push([xs[0], xs[1], xs[2], xs[3]]);
            }
            let ell = match (get("lam"), get("Lam")) {
                (Some((a, la)), Some((b, lb))) => Some((num(a, la, "lam")?, num(b, lb, "Lam")?)),
                (None, None) => None,
                _ => return err(line, "give both 'lam' and 'Lam' or neither"),
            };
            OperatorSpec::Supform { terms, ell }
        }
        _ => {
            let (v, l) = required("i")?;
            let i = num(v, l, "i")?;
            if !(i >= 0.0 && i.fract() == 0.0) {
                return err(l, "'i' must be a nonnegative integer");
            }
            let i = i as usize;
            let (v, l) = required("offsets")?;
            let offsets = nums(v, l, "offsets")?;
            let lambdas = match get("Lambdas") {
                Some((v, l)) => nums(v, l, "Lambdas")?,
                None => (0..=i).map(|j| 2.0 - 1.0 / (j as f64 + 1.0)).collect(),
            };
            OperatorSpec::Thm17 { i, lambdas, offsets }
        }
    };
    spec.build()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(
            parse_operator("pucci { lam = 1, Lam = 2 }").unwrap(),
            OperatorSpec::Pucci { lam: 1.0, big_lam: 2.0 }
        );
        let s = parse_operator("# comment\nsupform {\n  terms = [(1, 0, 1, 0), (2, 0, 2, -1)]\n}\n").unwrap();
        assert_eq!(s, OperatorSpec::Supform { terms: vec![[1.0, 0.0, 1.0, 0.0], [2.0, 0.0, 2.0, -1.0]], ell: None });
        assert_eq!(s.build().unwrap().ellipticity(), EllipticityPair::new(1.0, 2.0).unwrap());
        let t = parse_operator("thm17 { i = 1, Lambdas = [1, 1.5], offsets = [0, 5] }").unwrap();
        assert_eq!(t.build().unwrap().eval(&SymMat2::identity()), 2.0);
        let d = parse_operator("thm17 { i = 2, offsets = [0, 1e1, 2.5e+2] }").unwrap();
        assert_eq!(
            d,
            OperatorSpec::Thm17 { i: 2, lambdas: vec![1.0, 1.5, 2.0 - 1.0 / 3.0], offsets: vec![0.0, 10.0, 250.0] }
        );
        assert_eq!(parse_operator("laplacian {}").unwrap(), OperatorSpec::Laplacian);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "pucci { lam = 0.5, Lam = 3 }",
            "supform { lam = 1, Lam = 2, terms = [(1.5, 0.25, 1.5, -0.5)] }",
            "thm17 { i = 1, Lambdas = [1, 1.9], offsets = [0, 12.5] }",
            "laplacian {}",
        ] {
            let spec = parse_operator(text).unwrap();
            assert_eq!(parse_operator(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn reports_errors_with_lines() {
        assert!(matches!(parse_operator("pucci { lam = 1 }"), Err(Error::Config { .. })));
        assert!(matches!(parse_operator("foo { }"), Err(Error::Config { .. })));
        assert!(matches!(parse_operator("pucci {\n lam = 1,\n Lam = x }"), Err(Error::Config { line: 3, .. })));
        assert!(matches!(parse_operator("pucci { lam = 2, Lam = 1 }"), Err(Error::Parameter(_))));
        assert!(parse_operator("thm17 { i = 1, offsets = [0] }").is_err());
    }
}
