use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Ex2,
    All2,
    Sub,
    Sing,
    Num(String),
    Tilde,
    Amp,
    Bar,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Eq,
    Plus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Ex2 => "`ex2`".into(),
            Tok::All2 => "`all2`".into(),
            Tok::Sub => "`sub`".into(),
            Tok::Sing => "`sing`".into(),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let err = |message: String| ParseError {
            line: l,
            column: col,
            message,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c.is_ascii_digit() {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() {
                    word.push(d);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            let tok = if c.is_ascii_digit() {
                if !word.chars().all(|d| d.is_ascii_digit()) {
                    return Err(err(format!("malformed number `{word}`")));
                }
                Tok::Num(word)
            } else if c.is_ascii_uppercase() {
                Tok::Var(word)
            } else {
                match word.as_str() {
                    "ex2" => Tok::Ex2,
                    "all2" => Tok::All2,
                    "sub" => Tok::Sub,
                    "sing" => Tok::Sing,
                    _ => return Err(err(format!("unknown keyword `{word}`"))),
                }
            };
            out.push(Spanned {
                tok,
                line: l,
                column: col,
            });
            continue;
        }
        let tok = match c {
            '~' => Tok::Tilde,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '+' => Tok::Plus,
            other => return Err(err(format!("unexpected character `{other}`"))),
        };
        chars.next();
        column += 1;
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if tok != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: String) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn var(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(v)
            }
            other => Err(self.error(format!("expected variable, found {}", other.describe()))),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Ex2 | Tok::All2 => self.quant(),
            _ => self.disj(),
        }
    }

    fn quant(&mut self) -> Result<Formula, ParseError> {
        let universal = self.bump() == Tok::All2;
        let mut vars = vec![self.var()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            let v = self.var()?;
            if vars.contains(&v) {
                return Err(self.error(format!("variable `{v}` bound twice in one block")));
            }
            vars.push(v);
        }
        self.expect(Tok::Colon)?;
        let body = Box::new(self.formula()?);
        Ok(if universal {
            Formula::Forall(vars, body)
        } else {
            Formula::Exists(vars, body)
        })
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            acc = Formula::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.neg()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            acc = Formula::and(acc, self.neg()?);
        }
        Ok(acc)
    }

    fn neg(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.neg()?))
            }
            Tok::Ex2 | Tok::All2 => self.quant(),
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Sing => {
                self.bump();
                Ok(Formula::Sing(self.var()?))
            }
            Tok::Var(_) => self.atom(),
            other => Err(self.error(format!("expected formula, found {}", other.describe()))),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let x = self.var()?;
        match self.bump() {
            Tok::Sub => Ok(Formula::Sub(x, self.var()?)),
            Tok::Eq => match self.peek().clone() {
                Tok::LBrace => {
                    self.bump();
                    self.number("0")?;
                    self.expect(Tok::RBrace)?;
                    Ok(Formula::Zeroth(x))
                }
                Tok::Var(_) => {
                    let y = self.var()?;
                    self.expect(Tok::Plus)?;
                    self.number("1")?;
                    Ok(Formula::Succ(x, y))
                }
                other => Err(self.error(format!(
                    "expected `{{0}}` or `Y + 1`, found {}",
                    other.describe()
                ))),
            },
            _ => {
                self.pos -= 1;
                Err(self.error(format!(
                    "expected `sub` or `=` after `{x}`, found {}",
                    self.peek().describe()
                )))
            }
        }
    }

    fn number(&mut self, want: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Num(n) if n == want => {
                self.bump();
                Ok(())
            }
            other => Err(self.error(format!("expected `{want}`, found {}", other.describe()))),
        }
    }
}

/// Parses a formula in the `ex2`/`all2`/`sub`/`sing` concrete syntax.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_quantifier() {
        assert_eq!(
            parse_formula("ex2 X: sing X").unwrap(),
            Formula::exists(&["X"], Formula::sing("X"))
        );
    }

    #[test]
    fn nested_negated_quantifiers() {
        let f = parse_formula("~ex2 X1: ~ex2 Y: X1 sub Y & sing Y").unwrap();
        let expected = Formula::not(Formula::exists(
            &["X1"],
            Formula::not(Formula::exists(
                &["Y"],
                Formula::and(Formula::sub("X1", "Y"), Formula::sing("Y")),
            )),
        ));
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_and_atoms() {
        let f = parse_formula("~A sub B & C = {0} | D = E + 1").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::and(Formula::not(Formula::sub("A", "B")), Formula::zeroth("C")),
                Formula::succ("D", "E")
            )
        );
    }

    #[test]
    fn comments_and_whitespace() {
        let f = parse_formula("# leading\n all2 X ,Y : # inner\n X sub Y\n").unwrap();
        assert_eq!(f, Formula::forall(&["X", "Y"], Formula::sub("X", "Y")));
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_formula("ex2 X:\n  X sub").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        let e = parse_formula("X sub Y )").unwrap_err();
        assert_eq!((e.line, e.column), (1, 9));
        let e = parse_formula("X = {1}").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(parse_formula("foo X").is_err());
        assert!(parse_formula("ex2 X, X: sing X").is_err());
        assert!(parse_formula("x sub Y").is_err());
    }
}
