//! S-expression reader with byte spans, and the small pretty-printing
//! helpers the canonical printer builds on. Comments run from `;` to end
//! of line.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// 1-based line and column of the start offset.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for (i, ch) in source.char_indices() {
            if i >= self.start {
                break;
            }
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExp {
    Atom(String, Span),
    List(Vec<SExp>, Span),
}

impl SExp {
    pub fn span(&self) -> Span {
        match self {
            SExp::Atom(_, s) | SExp::List(_, s) => *s,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            SExp::Atom(a, _) => Some(a),
            SExp::List(_, _) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExp]> {
        match self {
            SExp::List(items, _) => Some(items),
            SExp::Atom(_, _) => None,
        }
    }

    /// For a list whose head is an atom: (head, rest).
    pub fn tagged(&self) -> Option<(&str, &[SExp])> {
        let items = self.list()?;
        let head = items.first()?.atom()?;
        Some((head, &items[1..]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SexpError {
    pub span: Span,
    pub message: String,
}

/// Reads a full sequence of top-level forms.
pub fn parse_all(source: &str) -> Result<Vec<SExp>, SexpError> {
    let mut p = Reader { src: source.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    loop {
        p.skip_trivia();
        if p.eof() {
            return Ok(out);
        }
        out.push(p.read()?);
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> u8 {
        self.src[self.pos]
    }

    fn skip_trivia(&mut self) {
        while !self.eof() {
            match self.peek() {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b';' => {
                    while !self.eof() && self.peek() != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<SExp, SexpError> {
        self.skip_trivia();
        if self.eof() {
            return Err(SexpError {
                span: Span::new(self.pos, self.pos),
                message: "unexpected end of input".into(),
            });
        }
        let start = self.pos;
        match self.peek() {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    if self.eof() {
                        return Err(SexpError {
                            span: Span::new(start, self.pos),
                            message: "unbalanced parenthesis: missing )".into(),
                        });
                    }
                    if self.peek() == b')' {
                        self.pos += 1;
                        return Ok(SExp::List(items, Span::new(start, self.pos)));
                    }
                    items.push(self.read()?);
                }
            }
            b')' => Err(SexpError {
                span: Span::new(start, start + 1),
                message: "unbalanced parenthesis: stray )".into(),
            }),
            _ => {
                while !self.eof()
                    && !matches!(self.peek(), b' ' | b'\t' | b'\r' | b'\n' | b'(' | b')' | b';')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| SexpError {
                        span: Span::new(start, self.pos),
                        message: "invalid UTF-8 in atom".into(),
                    })?
                    .to_owned();
                Ok(SExp::Atom(text, Span::new(start, self.pos)))
            }
        }
    }
}

/// A build-side s-expression without spans, used by the printer.
#[derive(Debug, Clone, PartialEq)]
pub enum Doc {
    Atom(String),
    /// Printed on one line.
    Inline(Vec<Doc>),
    /// Head plus children, each child on its own indented line.
    Block(Vec<Doc>, Vec<Doc>),
}

impl Doc {
    pub fn atom(s: impl Into<String>) -> Doc {
        Doc::Atom(s.into())
    }

    pub fn inline(items: Vec<Doc>) -> Doc {
        Doc::Inline(items)
    }

    pub fn block(head: Vec<Doc>, children: Vec<Doc>) -> Doc {
        Doc::Block(head, children)
    }

    pub fn render(&self, indent: usize, out: &mut String) {
        match self {
            Doc::Atom(a) => out.push_str(a),
            Doc::Inline(items) => {
                out.push('(');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    item.render(indent, out);
                }
                out.push(')');
            }
            Doc::Block(head, children) => {
                out.push('(');
                for (i, item) in head.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    item.render(indent, out);
                }
                for child in children {
                    out.push('\n');
                    for _ in 0..indent + 2 {
                        out.push(' ');
                    }
                    child.render(indent + 2, out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Doc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        write!(f, "{}", s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_spans() {
        let src = "(a (b c) d) ; comment\n(e)";
        let forms = parse_all(src).unwrap();
        assert_eq!(forms.len(), 2);
        let (head, rest) = forms[0].tagged().unwrap();
        assert_eq!(head, "a");
        assert_eq!(rest.len(), 2);
        assert_eq!(forms[0].span().start, 0);
        assert_eq!(forms[0].span().end, 11);
        assert_eq!(forms[1].span().start, 22);
    }

    #[test]
    fn unbalanced_input_reports_span() {
        let err = parse_all("(a (b)").unwrap_err();
        assert!(err.message.contains("unbalanced"));
        assert_eq!(err.span.start, 0);
        let err = parse_all("a)").unwrap_err();
        assert_eq!(err.span.start, 1);
    }

    #[test]
    fn line_col_for_spans() {
        let src = "(a)\n  (b)";
        let forms = parse_all(src).unwrap();
        assert_eq!(forms[1].span().line_col(src), (2, 3));
    }

    #[test]
    fn doc_rendering_nests() {
        let d = Doc::block(
            vec![Doc::atom("proof"), Doc::atom("p")],
            vec![Doc::inline(vec![Doc::atom("ax"), Doc::atom("A")])],
        );
        assert_eq!(d.to_string(), "(proof p\n  (ax A))");
    }
}
