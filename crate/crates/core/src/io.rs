//! Graph ingestion: whitespace edge lists, a GraphML subset, canonical JSON,
//! and GML (the format the C. elegans neural network is distributed in).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CanonicalGraph, Graph, GraphBuilder, IngestOptions, IngestReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    EdgeList,
    Graphml,
    Json,
    Gml,
}

impl GraphFormat {
    /// Guess from the file extension; anything unrecognised is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("graphml") | Some("xml") => GraphFormat::Graphml,
            Some("json") => GraphFormat::Json,
            Some("gml") => GraphFormat::Gml,
            _ => GraphFormat::EdgeList,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "txt" => Ok(GraphFormat::EdgeList),
            "graphml" => Ok(GraphFormat::Graphml),
            "json" => Ok(GraphFormat::Json),
            "gml" => Ok(GraphFormat::Gml),
            other => Err(Error::InvalidConfig(format!("unknown graph format {other:?}"))),
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::EdgeList => "edge-list",
            GraphFormat::Graphml => "graphml",
            GraphFormat::Json => "json",
            GraphFormat::Gml => "gml",
        })
    }
}

pub fn load_graph(path: &Path, format: Option<GraphFormat>) -> Result<(Graph, IngestReport)> {
    load_graph_with(path, format, IngestOptions::default())
}

pub fn load_graph_with(path: &Path, format: Option<GraphFormat>, opts: IngestOptions) -> Result<(Graph, IngestReport)> {
    let text = std::fs::read_to_string(path)?;
    let format = format.unwrap_or_else(|| GraphFormat::from_path(path));
    parse_graph(&text, format, opts)
}

pub fn parse_graph(text: &str, format: GraphFormat, opts: IngestOptions) -> Result<(Graph, IngestReport)> {
    let builder = match format {
        GraphFormat::EdgeList => parse_edge_list(text)?,
        GraphFormat::Graphml => parse_graphml(text)?,
        GraphFormat::Json => parse_json(text)?,
        GraphFormat::Gml => parse_gml(text)?,
    };
    builder.build(opts)
}

fn parse_weight(token: &str, locus: impl Fn() -> String) -> Result<f64> {
    let w: f64 = token
        .parse()
        .map_err(|_| Error::parse(locus(), format!("invalid weight {token:?}")))?;
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::parse(locus(), format!("nonpositive weight {token}")));
    }
    Ok(w)
}

/// `u v [weight]` per line, `#` starts a comment. A line holding a single
/// token declares an isolated node.
fn parse_edge_list(text: &str) -> Result<GraphBuilder> {
    let mut b = GraphBuilder::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let locus = || format!("line {}", lineno + 1);
        match tokens.as_slice() {
            [] => {}
            [n] => b.add_node(*n, None, BTreeMap::new()),
            [u, v] => b.add_edge(*u, *v, 1.0, false),
            [u, v, w] => {
                let w = parse_weight(w, locus)?;
                b.add_edge(*u, *v, w, false);
            }
            _ => return Err(Error::parse(locus(), "expected `u v [weight]`")),
        }
    }
    Ok(b)
}

fn parse_json(text: &str) -> Result<GraphBuilder> {
    let doc: CanonicalGraph = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let mut b = GraphBuilder::new();
    for n in doc.nodes {
        b.add_node(n.id.to_string(), n.label, n.attrs);
    }
    for (i, e) in doc.edges.iter().enumerate() {
        let w = e.w.unwrap_or(1.0);
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::parse(format!("edges[{i}]"), format!("nonpositive weight {w}")));
        }
        b.add_edge(e.u.to_string(), e.v.to_string(), w, e.directed);
    }
    Ok(b)
}

fn parse_graphml(text: &str) -> Result<GraphBuilder> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::parse(format!("line {} column {}", pos.row, pos.col), e.to_string())
    })?;
    let locus = |node: roxmltree::Node| {
        let pos = doc.text_pos_at(node.range().start);
        format!("<{}> at line {}", node.tag_name().name(), pos.row)
    };

    // key id -> (domain, attr.name)
    let mut keys: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for k in doc.descendants().filter(|n| n.has_tag_name("key")) {
        let id = k
            .attribute("id")
            .ok_or_else(|| Error::parse(locus(k), "key without id"))?;
        let name = k.attribute("attr.name").unwrap_or(id);
        keys.insert(id, (k.attribute("for").unwrap_or("all"), name));
    }
    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| Error::parse("document", "no <graph> element"))?;
    let default_directed = graph.attribute("edgedefault") == Some("directed");

    let data_of = |el: roxmltree::Node<'_, '_>| -> Vec<(String, String)> {
        el.children()
            .filter(|c| c.has_tag_name("data"))
            .filter_map(|d| {
                let key = d.attribute("key")?;
                let name = keys.get(key).map(|k| k.1).unwrap_or(key);
                Some((name.to_owned(), d.text().unwrap_or("").trim().to_owned()))
            })
            .collect()
    };

    let mut b = GraphBuilder::new();
    for el in graph.children().filter(|n| n.is_element()) {
        match el.tag_name().name() {
            "node" => {
                let id = el
                    .attribute("id")
                    .ok_or_else(|| Error::parse(locus(el), "node without id"))?;
                let mut label = None;
                let mut attrs = BTreeMap::new();
                for (name, value) in data_of(el) {
                    if name == "label" {
                        label = Some(value);
                    } else {
                        attrs.insert(name, value);
                    }
                }
                b.add_node(id, label, attrs);
            }
            "edge" => {
                let u = el
                    .attribute("source")
                    .ok_or_else(|| Error::parse(locus(el), "edge without source"))?;
                let v = el
                    .attribute("target")
                    .ok_or_else(|| Error::parse(locus(el), "edge without target"))?;
                let directed = match el.attribute("directed") {
                    Some("true") => true,
                    Some("false") => false,
                    _ => default_directed,
                };
                let mut w = 1.0;
                for (name, value) in data_of(el) {
                    if name == "weight" {
                        w = parse_weight(&value, || locus(el))?;
                    }
                }
                b.add_edge(u, v, w, directed);
            }
            _ => {}
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq)]
enum GmlValue {
    Num(String),
    Str(String),
    List(Vec<(String, GmlValue)>),
}

struct GmlLexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

impl<'a> GmlLexer<'a> {
    fn line_of(&self, offset: usize) -> String {
        format!("line {}", self.src[..offset].matches('\n').count() + 1)
    }

    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
            } else if c == '#' {
                for (_, c) in self.chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let &(start, c) = self.chars.peek()?;
        if c == '[' || c == ']' {
            self.chars.next();
            return Some((start, c.to_string()));
        }
        if c == '"' {
            self.chars.next();
            let mut s = String::from("\"");
            for (_, c) in self.chars.by_ref() {
                if c == '"' {
                    break;
                }
                s.push(c);
            }
            return Some((start, s));
        }
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() || c == '[' || c == ']' {
                break;
            }
            s.push(c);
            self.chars.next();
        }
        Some((start, s))
    }

    fn list(&mut self, closed: bool) -> Result<Vec<(String, GmlValue)>> {
        let mut out = Vec::new();
        loop {
            let Some((pos, key)) = self.token() else {
                if closed {
                    return Err(Error::parse("end of input", "unterminated list"));
                }
                return Ok(out);
            };
            if key == "]" {
                if closed {
                    return Ok(out);
                }
                return Err(Error::parse(self.line_of(pos), "unexpected `]`"));
            }
            let Some((vpos, value)) = self.token() else {
                return Err(Error::parse(self.line_of(pos), format!("key {key} has no value")));
            };
            let value = match value.as_str() {
                "[" => GmlValue::List(self.list(true)?),
                "]" => return Err(Error::parse(self.line_of(vpos), "unexpected `]`")),
                v if v.starts_with('"') => GmlValue::Str(v[1..].to_owned()),
                v => GmlValue::Num(v.to_owned()),
            };
            out.push((key, value));
        }
    }
}

fn parse_gml(text: &str) -> Result<GraphBuilder> {
    let mut lexer = GmlLexer {
        chars: text.char_indices().peekable(),
        src: text,
    };
    let top = lexer.list(false)?;
    let graph = top
        .iter()
        .find_map(|(k, v)| match (k.as_str(), v) {
            ("graph", GmlValue::List(items)) => Some(items),
            _ => None,
        })
        .ok_or_else(|| Error::parse("document", "no `graph [ ... ]` block"))?;
    let directed = graph
        .iter()
        .any(|(k, v)| k == "directed" && *v == GmlValue::Num("1".into()));

    let scalar = |items: &[(String, GmlValue)], key: &str| -> Option<String> {
        items.iter().find_map(|(k, v)| match v {
            GmlValue::Num(s) | GmlValue::Str(s) if k == key => Some(s.clone()),
            _ => None,
        })
    };

    let mut b = GraphBuilder::new();
    for (i, (k, v)) in graph.iter().enumerate() {
        let GmlValue::List(items) = v else { continue };
        let locus = || format!("graph entry {} ({k})", i + 1);
        match k.as_str() {
            "node" => {
                let id = scalar(items, "id").ok_or_else(|| Error::parse(locus(), "node without id"))?;
                let mut attrs = BTreeMap::new();
                for (ak, av) in items {
                    if let GmlValue::Num(s) | GmlValue::Str(s) = av {
                        if ak != "id" && ak != "label" {
                            attrs.insert(ak.clone(), s.clone());
                        }
                    }
                }
                b.add_node(id, scalar(items, "label"), attrs);
            }
            "edge" => {
                let u = scalar(items, "source").ok_or_else(|| Error::parse(locus(), "edge without source"))?;
                let v = scalar(items, "target").ok_or_else(|| Error::parse(locus(), "edge without target"))?;
                let w = match scalar(items, "value").or_else(|| scalar(items, "weight")) {
                    Some(w) => parse_weight(&w, locus)?,
                    None => 1.0,
                };
                b.add_edge(u, v, w, directed);
            }
            _ => {}
        }
    }
    Ok(b)
}
