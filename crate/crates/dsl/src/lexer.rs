//! Tokenizer. Line comments start with `//`.

use crate::diag::{Diagnostic, Phase, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Function,
    Dynamic,
    Static,
    Incremental,
    Decremental,
    Batch,
    OnAdd,
    OnDelete,
    Forall,
    For,
    FixedPoint,
    Until,
    In,
    If,
    Else,
    While,
    Return,
    True,
    False,
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
    Graph,
    PropNode,
    PropEdge,
    Updates,
}

impl Keyword {
    pub fn from_word(w: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match w {
            "function" => Function,
            "Dynamic" => Dynamic,
            "Static" => Static,
            "Incremental" => Incremental,
            "Decremental" => Decremental,
            "Batch" => Batch,
            "OnAdd" => OnAdd,
            "OnDelete" => OnDelete,
            "forall" => Forall,
            "for" => For,
            "fixedPoint" => FixedPoint,
            "until" => Until,
            "in" => In,
            "if" => If,
            "else" => Else,
            "while" => While,
            "return" => Return,
            "True" => True,
            "False" => False,
            "int" => Int,
            "long" => Long,
            "float" => Float,
            "double" => Double,
            "bool" => Bool,
            "node" => Node,
            "edge" => Edge,
            "Graph" => Graph,
            "propNode" => PropNode,
            "propEdge" => PropEdge,
            "updates" => Updates,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            Function => "function",
            Dynamic => "Dynamic",
            Static => "Static",
            Incremental => "Incremental",
            Decremental => "Decremental",
            Batch => "Batch",
            OnAdd => "OnAdd",
            OnDelete => "OnDelete",
            Forall => "forall",
            For => "for",
            FixedPoint => "fixedPoint",
            Until => "until",
            In => "in",
            If => "if",
            Else => "else",
            While => "while",
            Return => "return",
            True => "True",
            False => "False",
            Int => "int",
            Long => "long",
            Float => "float",
            Double => "double",
            Bool => "bool",
            Node => "node",
            Edge => "edge",
            Graph => "Graph",
            PropNode => "propNode",
            PropEdge => "propEdge",
            Updates => "updates",
        }
    }

    pub fn is_type(self) -> bool {
        use Keyword::*;
        matches!(
            self,
            Int | Long | Float | Double | Bool | Node | Edge | Graph | PropNode | PropEdge | Updates
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Float(f64),
    Kw(Keyword),
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Not,
    Assign,
    PlusEq,
    MinusEq,
    PlusPlus,
    Dot,
    Comma,
    Semi,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        use TokenKind::*;
        match self {
            Ident(s) => format!("identifier `{s}`"),
            Int(v) => format!("integer `{v}`"),
            Float(v) => format!("number `{v}`"),
            Kw(k) => format!("`{}`", k.as_str()),
            Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        use TokenKind::*;
        match self {
            Plus => "+",
            Minus => "-",
            Star => "*",
            Slash => "/",
            Percent => "%",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            EqEq => "==",
            Ne => "!=",
            AndAnd => "&&",
            OrOr => "||",
            Not => "!",
            Assign => "=",
            PlusEq => "+=",
            MinusEq => "-=",
            PlusPlus => "++",
            Dot => ".",
            Comma => ",",
            Semi => ";",
            Colon => ":",
            LParen => "(",
            RParen => ")",
            LBrace => "{",
            RBrace => "}",
            LBracket => "[",
            RBracket => "]",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Splits `source` into tokens. Illegal characters produce diagnostics and
/// are skipped; the stream always ends with `Eof`.
pub fn tokenize(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1u32, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let span = |end: usize| {
            Span::new(line, (start - line_start) as u32 + 1, start as u32, (end - start) as u32)
        };
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &source[start..i];
            let kind = match Keyword::from_word(word) {
                Some(k) => TokenKind::Kw(k),
                None => TokenKind::Ident(word.to_string()),
            };
            tokens.push(Token { kind, span: span(i) });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_float = false;
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                is_float = true;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    is_float = true;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &source[start..i];
            let kind = if is_float {
                text.parse().ok().map(TokenKind::Float)
            } else {
                text.parse().ok().map(TokenKind::Int)
            };
            match kind {
                Some(kind) => tokens.push(Token { kind, span: span(i) }),
                None => diags.push(Diagnostic::new(
                    Phase::Lex,
                    span(i),
                    format!("numeric literal `{text}` out of range"),
                )),
            }
            continue;
        }
        let two = bytes.get(i + 1).copied();
        use TokenKind::*;
        let (kind, width) = match (c, two) {
            (b'<', Some(b'=')) => (Le, 2),
            (b'>', Some(b'=')) => (Ge, 2),
            (b'=', Some(b'=')) => (EqEq, 2),
            (b'!', Some(b'=')) => (Ne, 2),
            (b'&', Some(b'&')) => (AndAnd, 2),
            (b'|', Some(b'|')) => (OrOr, 2),
            (b'+', Some(b'=')) => (PlusEq, 2),
            (b'-', Some(b'=')) => (MinusEq, 2),
            (b'+', Some(b'+')) => (PlusPlus, 2),
            (b'+', _) => (Plus, 1),
            (b'-', _) => (Minus, 1),
            (b'*', _) => (Star, 1),
            (b'/', _) => (Slash, 1),
            (b'%', _) => (Percent, 1),
            (b'<', _) => (Lt, 1),
            (b'>', _) => (Gt, 1),
            (b'!', _) => (Not, 1),
            (b'=', _) => (Assign, 1),
            (b'.', _) => (Dot, 1),
            (b',', _) => (Comma, 1),
            (b';', _) => (Semi, 1),
            (b':', _) => (Colon, 1),
            (b'(', _) => (LParen, 1),
            (b')', _) => (RParen, 1),
            (b'{', _) => (LBrace, 1),
            (b'}', _) => (RBrace, 1),
            (b'[', _) => (LBracket, 1),
            (b']', _) => (RBracket, 1),
            _ => {
                let ch = source[start..].chars().next().unwrap();
                i += ch.len_utf8();
                diags.push(Diagnostic::new(
                    Phase::Lex,
                    span(i),
                    format!("illegal character `{}`", ch.escape_debug()),
                ));
                continue;
            }
        };
        i += width;
        tokens.push(Token { kind, span: span(i) });
    }
    let col = (bytes.len() - line_start) as u32 + 1;
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(line, col, bytes.len() as u32, 0),
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        let (toks, diags) = tokenize(src);
        assert!(diags.is_empty(), "{diags:?}");
        toks.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn attach_call_tokens() {
        assert_eq!(
            kinds("g.attachNodeProperty(dist = INF);"),
            vec![
                Ident("g".into()),
                Dot,
                Ident("attachNodeProperty".into()),
                LParen,
                Ident("dist".into()),
                Assign,
                Ident("INF".into()),
                RParen,
                Semi,
                Eof
            ]
        );
    }

    #[test]
    fn fixed_point_header() {
        assert_eq!(
            kinds("fixedPoint until (finished: !finished)"),
            vec![
                Kw(Keyword::FixedPoint),
                Kw(Keyword::Until),
                LParen,
                Ident("finished".into()),
                Colon,
                Not,
                Ident("finished".into()),
                RParen,
                Eof
            ]
        );
    }

    #[test]
    fn numbers_and_comments() {
        assert_eq!(
            kinds("x += 1.5e-3; // note\ny++"),
            vec![
                Ident("x".into()),
                PlusEq,
                Float(1.5e-3),
                Semi,
                Ident("y".into()),
                PlusPlus,
                Eof
            ]
        );
    }

    #[test]
    fn illegal_character_is_reported_with_span() {
        let (toks, diags) = tokenize("a\n  $b");
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].span.line, diags[0].span.column), (2, 3));
        assert_eq!(toks.len(), 3);
    }
}
