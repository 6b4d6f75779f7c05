use std::collections::HashSet;

use super::{validate, AmrError, AmrGraph};

/// Indentation per nesting level in multi-line output.
const INDENT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    /// One role per line, six spaces per nesting level.
    #[default]
    Multiline,
    SingleLine,
}

/// Prints `graph` in PENMAN notation.
///
/// Each node lists its attributes, then its edges in stored order. A node is
/// declared at its first mention; later mentions print the bare variable.
pub fn serialize(graph: &AmrGraph, style: Style) -> Result<String, AmrError> {
    let report = validate(graph);
    if !report.ok {
        return Err(AmrError::Invalid(report));
    }
    Ok(write_graph(graph, style))
}

pub(crate) fn write_graph(graph: &AmrGraph, style: Style) -> String {
    let mut out = String::new();
    let mut declared = HashSet::new();
    write_node(graph, graph.root(), 0, style, &mut declared, &mut out);
    out
}

fn write_node<'a>(
    graph: &'a AmrGraph,
    variable: &'a str,
    depth: usize,
    style: Style,
    declared: &mut HashSet<&'a str>,
    out: &mut String,
) {
    declared.insert(variable);
    out.push('(');
    out.push_str(variable);
    out.push_str(" / ");
    out.push_str(graph.concept(variable).unwrap_or_default());

    let separator = |out: &mut String| match style {
        Style::SingleLine => out.push(' '),
        Style::Multiline => {
            out.push('\n');
            out.extend(std::iter::repeat_n(' ', INDENT * (depth + 1)));
        }
    };

    for attribute in graph.attributes_of(variable) {
        separator(out);
        out.push_str(&attribute.role);
        out.push(' ');
        out.push_str(&attribute.value.to_string());
    }
    for edge in graph.outgoing(variable) {
        separator(out);
        out.push_str(&edge.role);
        out.push(' ');
        if declared.contains(edge.target.as_str()) || !graph.contains(&edge.target) {
            out.push_str(&edge.target);
        } else {
            write_node(graph, &edge.target, depth + 1, style, declared, out);
        }
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::{parse, Edge, Node};

    const CONCESSION: &str = "(h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once)))";

    #[test]
    fn single_node() {
        let g = AmrGraph::single("i", "i");
        assert_eq!(serialize(&g, Style::SingleLine).unwrap(), "(i / i)");
        assert_eq!(serialize(&g, Style::Multiline).unwrap(), "(i / i)");
    }

    #[test]
    fn single_line_round_trip_is_exact() {
        let g = parse(CONCESSION).unwrap();
        assert_eq!(serialize(&g, Style::SingleLine).unwrap(), CONCESSION);
    }

    #[test]
    fn multiline_layout() {
        let g = parse(CONCESSION).unwrap();
        let expected = "(h / have-concession-91\n      :ARG1 (o / orange\n            :domain (h2 / he)\n            :time (o2 / once)))";
        assert_eq!(serialize(&g, Style::Multiline).unwrap(), expected);
        assert_eq!(parse(expected).unwrap(), g);
    }

    #[test]
    fn reentrant_node_printed_bare() {
        let g = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let text = serialize(&g, Style::SingleLine).unwrap();
        assert_eq!(text, "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
        assert_eq!(text.matches("(b /").count(), 1);
        assert_eq!(parse(&text).unwrap(), g);
    }

    #[test]
    fn invalid_graph_is_refused() {
        let g = AmrGraph::from_parts(
            "a",
            vec![Node { variable: "a".into(), concept: "x".into() }],
            vec![Edge { source: "a".into(), role: ":ARG0".into(), target: "b".into() }],
            vec![],
        );
        assert!(matches!(serialize(&g, Style::SingleLine), Err(AmrError::Invalid(_))));
    }
}
