//! Minimal recursive-descent checker for the Graphviz DOT language subset:
//! `digraph ID { stmt* }` where a statement is a node, edge or attribute
//! statement with optional `[a=b, ...]` lists. Returns node and edge counts.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Comma,
    Semi,
    Arrow,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' => { out.push(Tok::LBrace); i += 1 }
            '}' => { out.push(Tok::RBrace); i += 1 }
            '[' => { out.push(Tok::LBracket); i += 1 }
            ']' => { out.push(Tok::RBracket); i += 1 }
            '=' => { out.push(Tok::Eq); i += 1 }
            ',' => { out.push(Tok::Comma); i += 1 }
            ';' => { out.push(Tok::Semi); i += 1 }
            '-' if chars.get(i + 1) == Some(&'>') => { out.push(Tok::Arrow); i += 2 }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('\\') => {
                            s.push('\\');
                            s.push(*chars.get(i + 1).ok_or("dangling escape")?);
                            i += 2;
                        }
                        Some('"') => { i += 1; break }
                        Some(&ch) => { s.push(ch); i += 1 }
                    }
                }
                out.push(Tok::Id(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.' || (chars[i] == '-' && chars.get(i + 1) != Some(&'>'))) {
                    i += 1;
                }
                out.push(Tok::Id(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

pub struct DotSummary {
    pub nodes: std::collections::BTreeSet<String>,
    pub edges: usize,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }
    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(format!("expected {t:?}, got {got:?}")),
        }
    }
    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            got => Err(format!("expected identifier, got {got:?}")),
        }
    }
    fn attr_list(&mut self) -> Result<(), String> {
        while self.peek() == Some(&Tok::LBracket) {
            self.next();
            while self.peek() != Some(&Tok::RBracket) {
                self.id()?;
                self.expect(Tok::Eq)?;
                self.id()?;
                if matches!(self.peek(), Some(Tok::Comma) | Some(Tok::Semi)) {
                    self.next();
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(())
    }
}

pub fn check(src: &str) -> Result<DotSummary, String> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let kw = p.id()?;
    if kw != "digraph" {
        return Err(format!("expected digraph, got {kw}"));
    }
    if matches!(p.peek(), Some(Tok::Id(_))) {
        p.id()?;
    }
    p.expect(Tok::LBrace)?;
    let mut summary = DotSummary { nodes: Default::default(), edges: 0 };
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.next();
                break;
            }
            None => return Err("missing closing brace".into()),
            _ => {}
        }
        let first = p.id()?;
        if matches!(first.as_str(), "node" | "edge" | "graph") {
            p.attr_list()?;
        } else {
            let mut chain = vec![first];
            while p.peek() == Some(&Tok::Arrow) {
                p.next();
                chain.push(p.id()?);
            }
            p.attr_list()?;
            if chain.len() == 1 {
                summary.nodes.insert(chain.remove(0));
            } else {
                summary.edges += chain.len() - 1;
            }
        }
        if p.peek() == Some(&Tok::Semi) {
            p.next();
        }
    }
    if p.pos != p.toks.len() {
        return Err("trailing tokens after graph".into());
    }
    Ok(summary)
}
