//! Graphviz snapshots of the computation tree and a small reader for them.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::tree::TreeNode;
use crate::{Error, Result};

/// The tree as a `digraph`: vertices in pre-order, edges parent to child.
pub fn tree_to_dot(root: &TreeNode) -> String {
    let mut out = String::from("digraph tree {\n  node [style=filled];\n");
    let mut next_id = 0usize;
    write_node(root, &mut next_id, &mut out);
    out.push_str("}\n");
    out
}

fn write_node(node: &TreeNode, next_id: &mut usize, out: &mut String) -> usize {
    let id = *next_id;
    *next_id += 1;
    let color = node.color.name();
    let font = if node.color == crate::tree::Color::Black { ", fontcolor=white" } else { "" };
    writeln!(
        out,
        "  n{id} [label=\"nu={} h={:.4e} r={:.3e}\", fillcolor={color}{font}];",
        node.nu, node.h_init, node.residual_norm
    )
    .unwrap();
    for child in &node.children {
        let child_id = write_node(child, next_id, out);
        writeln!(out, "  n{id} -> n{child_id};").unwrap();
    }
    id
}

/// Writes `tree_<round>.dot` into `dir` when `verbose >= 2`.
pub fn export_dot(root: &TreeNode, round: u64, dir: &Path, verbose: u32) -> Result<Option<PathBuf>> {
    if verbose < 2 {
        return Ok(None);
    }
    let path = dir.join(format!("tree_{round}.dot"));
    std::fs::write(&path, tree_to_dot(root)).map_err(|e| Error::io(&path, e))?;
    Ok(Some(path))
}

/// Vertices and edges of a parsed directed graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DotGraph {
    pub name: Option<String>,
    pub vertices: BTreeSet<String>,
    pub edges: Vec<(String, String)>,
    /// `fillcolor` of each vertex that sets one, in statement order.
    pub fill_colors: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Id(String),
    Arrow,
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '{' | '}' | '[' | ']' | '=' | ';' | ',' => {
                tokens.push(Token::Punct(c));
                chars.next();
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        tokens.push(Token::Arrow);
                    }
                    Some(d) if d.is_ascii_digit() || *d == '.' => {
                        let mut s = String::from("-");
                        while let Some(&d) = chars.peek() {
                            if d.is_ascii_digit() || d == '.' {
                                s.push(d);
                                chars.next();
                            } else {
                                break;
                            }
                        }
                        tokens.push(Token::Id(s));
                    }
                    _ => return Err("stray '-'".into()),
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => {
                            if let Some(e) = chars.next() {
                                s.push(e);
                            }
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err("unterminated string".into()),
                    }
                }
                tokens.push(Token::Id(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Id(s));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<(), String> {
        match self.next() {
            Some(Token::Punct(p)) if p == c => Ok(()),
            other => Err(format!("expected '{c}', found {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Token::Id(s)) => Ok(s),
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut attrs = Vec::new();
        while self.peek() == Some(&Token::Punct('[')) {
            self.next();
            loop {
                match self.peek() {
                    Some(Token::Punct(']')) => {
                        self.next();
                        break;
                    }
                    Some(Token::Punct(',')) | Some(Token::Punct(';')) => {
                        self.next();
                    }
                    _ => {
                        let key = self.id()?;
                        self.expect_punct('=')?;
                        let value = self.id()?;
                        attrs.push((key, value));
                    }
                }
            }
        }
        Ok(attrs)
    }
}

/// Parses the `digraph` subset produced by [`tree_to_dot`]: node, edge
/// (including chains) and attribute statements.
pub fn parse_dot(text: &str) -> Result<DotGraph, String> {
    let mut p = Parser { tokens: tokenize(text)?, pos: 0 };
    match p.next() {
        Some(Token::Id(kw)) if kw == "digraph" => {}
        other => return Err(format!("expected 'digraph', found {other:?}")),
    }
    let mut graph = DotGraph::default();
    if let Some(Token::Id(_)) = p.peek() {
        graph.name = Some(p.id()?);
    }
    p.expect_punct('{')?;
    loop {
        match p.peek() {
            Some(Token::Punct('}')) => {
                p.next();
                break;
            }
            Some(Token::Punct(';')) => {
                p.next();
            }
            None => return Err("missing '}'".into()),
            _ => {
                let first = p.id()?;
                if matches!(first.as_str(), "node" | "edge" | "graph") && p.peek() == Some(&Token::Punct('[')) {
                    p.attr_list()?;
                    continue;
                }
                if p.peek() == Some(&Token::Punct('=')) {
                    p.next();
                    p.id()?;
                    continue;
                }
                let mut chain = vec![first];
                while p.peek() == Some(&Token::Arrow) {
                    p.next();
                    chain.push(p.id()?);
                }
                let attrs = p.attr_list()?;
                for v in &chain {
                    graph.vertices.insert(v.clone());
                }
                if chain.len() == 1 {
                    if let Some((_, c)) = attrs.iter().find(|(k, _)| k == "fillcolor") {
                        graph.fill_colors.push((chain[0].clone(), c.clone()));
                    }
                }
                for w in chain.windows(2) {
                    graph.edges.push((w[0].clone(), w[1].clone()));
                }
            }
        }
    }
    if p.peek().is_some() {
        return Err("trailing input after graph".into());
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{CurvePoint, Direction};

    fn root() -> TreeNode {
        TreeNode::root(CurvePoint { z: vec![1.0, 0.0], residual_norm: 0.0 }, Direction::axis(2, 1), 0.1)
    }

    #[test]
    fn single_root() {
        let g = parse_dot(&tree_to_dot(&root())).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert!(g.edges.is_empty());
        assert_eq!(g.fill_colors, vec![("n0".to_string(), "green".to_string())]);
    }

    #[test]
    fn gated_on_verbosity() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(export_dot(&root(), 1, dir.path(), 1).unwrap(), None);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        let path = export_dot(&root(), 7, dir.path(), 2).unwrap().unwrap();
        assert!(path.ends_with("tree_7.dot"));
        assert!(export_dot(&root(), 1, &dir.path().join("missing"), 2).is_err());
    }

    #[test]
    fn parser_accepts_chains_and_rejects_garbage() {
        let g = parse_dot("digraph { a -> b -> c; d [label=\"x -> y\"] }").unwrap();
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 2);
        assert!(parse_dot("graph { a -- b }").is_err());
        assert!(parse_dot("digraph { a -> }").is_err());
        assert!(parse_dot("digraph { a [label=1 }").is_err());
    }
}
