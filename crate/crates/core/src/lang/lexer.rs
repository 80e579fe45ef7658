use super::ast::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    Imag(f64),
    Ket(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Dot,
    Colon,
    Assign,
    Leq,
    Lt,
    Gt,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Dagger,
    Perp,
    Tensor,
    Join,
    Meet,
    Implies,
    Conjunct,
    Oplus,
    /// Unrecognised input, reported by the parser for the enclosing command.
    Error(String),
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::Imag(x) => format!("number {x}i"),
            Tok::Ket(b) => format!("`|{b}⟩`"),
            Tok::Error(m) => m.clone(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::Leq => "<=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Dagger => "†",
            Tok::Perp => "^⊥",
            Tok::Tensor => "⊗",
            Tok::Join => "∨",
            Tok::Meet => "∧",
            Tok::Implies => "⇝",
            Tok::Conjunct => "⋒",
            Tok::Oplus => "⊕",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const ALIASES: &[(&str, Tok)] = &[
    ("\\dagger", Tok::Dagger),
    ("\\otimes", Tok::Tensor),
    ("\\vee", Tok::Join),
    ("\\wedge", Tok::Meet),
    ("\\SasakiImply", Tok::Implies),
    ("\\SasakiConjunct", Tok::Conjunct),
    ("\\oplus", Tok::Oplus),
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(k)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn number(&mut self) -> Tok {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if matches!(self.peek_at(digit_at), Some(c) if c.is_ascii_digit()) {
                self.bump();
                if sign {
                    self.bump();
                }
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = match text.parse() {
            Ok(v) => v,
            Err(_) => return Tok::Error(format!("malformed number `{text}`")),
        };
        if self.peek() == Some('i') && !matches!(self.peek_at(1), Some(c) if is_ident_char(c)) {
            self.bump();
            return Tok::Imag(value);
        }
        Tok::Number(value)
    }

    fn ket(&mut self) -> Tok {
        self.bump();
        let start = self.pos;
        while matches!(self.peek(), Some('0' | '1')) {
            self.bump();
        }
        let bits = self.src[start..self.pos].to_string();
        match self.peek() {
            Some('>' | '⟩') if !bits.is_empty() => {
                self.bump();
                Tok::Ket(bits)
            }
            _ => Tok::Error("malformed ket; expected `|bits⟩`".into()),
        }
    }

    fn next_token(&mut self) -> Option<Token> {
        self.skip_trivia();
        let (start, line, col) = (self.pos, self.line, self.col);
        let c = self.peek()?;
        let tok = if is_ident_start(c) {
            while matches!(self.peek(), Some(c) if is_ident_char(c)) {
                self.bump();
            }
            Tok::Ident(self.src[start..self.pos].to_string())
        } else if c.is_ascii_digit() {
            self.number()
        } else if c == '|' {
            self.ket()
        } else if c == '\\' {
            self.alias()
        } else {
            self.bump();
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                ':' if self.peek() == Some('=') => {
                    self.bump();
                    Tok::Assign
                }
                ':' => Tok::Colon,
                '<' if self.peek() == Some('=') => {
                    self.bump();
                    Tok::Leq
                }
                '<' | '⟨' => Tok::Lt,
                '>' | '⟩' => Tok::Gt,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '†' => Tok::Dagger,
                '⊗' => Tok::Tensor,
                '∨' => Tok::Join,
                '∧' => Tok::Meet,
                '⇝' => Tok::Implies,
                '⋒' => Tok::Conjunct,
                '⊕' => Tok::Oplus,
                '⊑' => Tok::Leq,
                '^' => self.perp(),
                other => Tok::Error(format!("unexpected character `{other}`")),
            }
        };
        Some(Token {
            tok,
            span: Span {
                start,
                end: self.pos,
                line,
                col,
            },
        })
    }

    fn perp(&mut self) -> Tok {
        self.skip_trivia();
        if self.peek() == Some('⊥') {
            self.bump();
            Tok::Perp
        } else if self.rest().starts_with("\\bot") {
            for _ in 0.."\\bot".len() {
                self.bump();
            }
            Tok::Perp
        } else {
            Tok::Error("expected `⊥` after `^`".into())
        }
    }

    fn alias(&mut self) -> Tok {
        let rest = self.rest();
        let word_len = 1 + rest[1..]
            .chars()
            .take_while(|c| c.is_ascii_alphabetic())
            .map(char::len_utf8)
            .sum::<usize>();
        let word = &rest[..word_len];
        let found = ALIASES.iter().find(|(name, _)| *name == word);
        for _ in 0..word.chars().count() {
            self.bump();
        }
        match found {
            Some((_, t)) => t.clone(),
            None => Tok::Error(format!("unknown escape `{word}`")),
        }
    }
}

pub fn tokenize(src: &str) -> Vec<Token> {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(t) = lx.next_token() {
        out.push(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_dots() {
        assert_eq!(toks("Choose 2."), vec![Tok::Ident("Choose".into()), Tok::Number(2.0), Tok::Dot]);
        assert_eq!(toks("0.5 2i 1e-3"), vec![Tok::Number(0.5), Tok::Imag(2.0), Tok::Number(1e-3)]);
    }

    #[test]
    fn kets_and_unicode() {
        assert_eq!(
            toks("[|00⟩ + |11>]^⊥ ⋒ X†"),
            vec![
                Tok::LBrack,
                Tok::Ket("00".into()),
                Tok::Plus,
                Tok::Ket("11".into()),
                Tok::RBrack,
                Tok::Perp,
                Tok::Conjunct,
                Tok::Ident("X".into()),
                Tok::Dagger
            ]
        );
    }

    #[test]
    fn ascii_aliases() {
        assert_eq!(
            toks("A \\SasakiImply B^\\bot \\otimes C\\dagger"),
            vec![
                Tok::Ident("A".into()),
                Tok::Implies,
                Tok::Ident("B".into()),
                Tok::Perp,
                Tok::Tensor,
                Tok::Ident("C".into()),
                Tok::Dagger
            ]
        );
    }

    #[test]
    fn comments_and_primes() {
        assert_eq!(
            toks("t' // trailing\n:= <= <"),
            vec![Tok::Ident("t'".into()), Tok::Assign, Tok::Leq, Tok::Lt]
        );
    }

    #[test]
    fn spans_track_lines() {
        let t = tokenize("a\n  b");
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
    }

    #[test]
    fn bad_input_becomes_error_token() {
        assert!(matches!(toks("@")[0], Tok::Error(_)));
        assert!(matches!(toks("|2>")[0], Tok::Error(_)));
    }
}
