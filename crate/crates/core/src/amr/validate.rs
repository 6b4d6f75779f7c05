use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AmrGraph, ConstantKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    MissingRoot,
    DuplicateVariable,
    BadVariable,
    EmptyConcept,
    UndeclaredSource,
    UndeclaredTarget,
    UndeclaredAttributeSource,
    BadRole,
    BadConstant,
    Unreachable,
    Cycle,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::MissingRoot => "MISSING_ROOT",
            ViolationCode::DuplicateVariable => "DUPLICATE_VARIABLE",
            ViolationCode::BadVariable => "BAD_VARIABLE",
            ViolationCode::EmptyConcept => "EMPTY_CONCEPT",
            ViolationCode::UndeclaredSource => "UNDECLARED_SOURCE",
            ViolationCode::UndeclaredTarget => "UNDECLARED_TARGET",
            ViolationCode::UndeclaredAttributeSource => "UNDECLARED_ATTRIBUTE_SOURCE",
            ViolationCode::BadRole => "BAD_ROLE",
            ViolationCode::BadConstant => "BAD_CONSTANT",
            ViolationCode::Unreachable => "UNREACHABLE",
            ViolationCode::Cycle => "CYCLE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Offending variable or token.
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} `{}`: {}", v.code, v.subject, v.message)?;
        }
        Ok(())
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '/' | ':'))
}

fn is_role(s: &str) -> bool {
    s.strip_prefix(':').is_some_and(is_token)
}

/// Checks every structural invariant of `graph` and lists each violation.
pub fn validate(graph: &AmrGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |code, subject: &str, message: String| {
        violations.push(Violation { code, subject: subject.to_string(), message })
    };

    let mut declared: HashSet<&str> = HashSet::new();
    for node in graph.nodes() {
        if !declared.insert(node.variable.as_str()) {
            push(ViolationCode::DuplicateVariable, &node.variable, "declared more than once".into());
        }
        if !is_token(&node.variable) {
            push(ViolationCode::BadVariable, &node.variable, "not a bare token".into());
        }
        if !is_token(&node.concept) {
            push(ViolationCode::EmptyConcept, &node.variable, format!("invalid concept `{}`", node.concept));
        }
    }
    if !declared.contains(graph.root()) {
        push(ViolationCode::MissingRoot, graph.root(), "root is not a declared node".into());
    }
    for e in graph.edges() {
        if !declared.contains(e.source.as_str()) {
            push(ViolationCode::UndeclaredSource, &e.source, format!("edge {} has undeclared source", e.role));
        }
        if !declared.contains(e.target.as_str()) {
            push(ViolationCode::UndeclaredTarget, &e.target, format!("edge {} has undeclared target", e.role));
        }
        if !is_role(&e.role) {
            push(ViolationCode::BadRole, &e.role, "role must look like `:name`".into());
        }
    }
    for a in graph.attributes() {
        if !declared.contains(a.source.as_str()) {
            push(
                ViolationCode::UndeclaredAttributeSource,
                &a.source,
                format!("attribute {} has undeclared source", a.role),
            );
        }
        if !is_role(&a.role) {
            push(ViolationCode::BadRole, &a.role, "role must look like `:name`".into());
        }
        let bad = match a.value.kind {
            ConstantKind::MinusMarker => a.value.value != "-",
            ConstantKind::Number => a.value.value.parse::<f64>().is_err(),
            ConstantKind::Symbol => !is_token(&a.value.value),
            ConstantKind::Text => false,
        };
        if bad {
            push(ViolationCode::BadConstant, &a.value.value, format!("malformed {:?} constant", a.value.kind));
        }
    }

    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in graph.edges() {
        if declared.contains(e.source.as_str()) && declared.contains(e.target.as_str()) {
            children.entry(e.source.as_str()).or_default().push(e.target.as_str());
        }
    }

    if declared.contains(graph.root()) {
        let mut seen: HashSet<&str> = HashSet::from([graph.root()]);
        let mut stack = vec![graph.root()];
        while let Some(v) = stack.pop() {
            for &c in children.get(v).into_iter().flatten() {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        let mut reported = HashSet::new();
        for node in graph.nodes() {
            if !seen.contains(node.variable.as_str()) && reported.insert(node.variable.as_str()) {
                push(ViolationCode::Unreachable, &node.variable, "not reachable from the root".into());
            }
        }
    }

    // Three-colour depth-first search over every node; each back edge is a cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    let mut starts: Vec<&str> = vec![graph.root()];
    starts.extend(graph.nodes().iter().map(|n| n.variable.as_str()));
    for start in starts {
        if !declared.contains(start) || marks.contains_key(start) {
            continue;
        }
        marks.insert(start, Mark::Open);
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            let kids = children.get(v).map(Vec::as_slice).unwrap_or_default();
            if i == kids.len() {
                marks.insert(v, Mark::Done);
                stack.pop();
                continue;
            }
            top.1 += 1;
            let c = kids[i];
            match marks.get(c) {
                None => {
                    marks.insert(c, Mark::Open);
                    stack.push((c, 0));
                }
                Some(Mark::Open) => {
                    push(ViolationCode::Cycle, c, format!("edge {v} -> {c} closes a cycle"));
                }
                Some(Mark::Done) => {}
            }
        }
    }

    ValidationReport { ok: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::{parse, Attribute, Constant, Edge, Node};

    fn node(v: &str, c: &str) -> Node {
        Node { variable: v.into(), concept: c.into() }
    }

    fn edge(s: &str, r: &str, t: &str) -> Edge {
        Edge { source: s.into(), role: r.into(), target: t.into() }
    }

    #[test]
    fn well_formed_fixture_is_ok() {
        let g = parse("(h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once)))").unwrap();
        let report = validate(&g);
        assert!(report.ok);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn undeclared_target() {
        let g = AmrGraph::from_parts("a", vec![node("a", "x")], vec![edge("a", ":ARG0", "b")], vec![]);
        let report = validate(&g);
        assert!(!report.ok);
        assert!(report.has(ViolationCode::UndeclaredTarget));
        assert_eq!(report.violations[0].subject, "b");
    }

    #[test]
    fn two_cycle() {
        let g = AmrGraph::from_parts(
            "a",
            vec![node("a", "x"), node("b", "y")],
            vec![edge("a", ":ARG0", "b"), edge("b", ":ARG0", "a")],
            vec![],
        );
        let report = validate(&g);
        assert!(report.has(ViolationCode::Cycle));
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn cycle_outside_the_reachable_part() {
        let g = AmrGraph::from_parts(
            "a",
            vec![node("a", "x"), node("b", "y"), node("c", "z")],
            vec![edge("b", ":ARG0", "c"), edge("c", ":ARG0", "b")],
            vec![],
        );
        let report = validate(&g);
        assert!(report.has(ViolationCode::Cycle));
        assert!(report.has(ViolationCode::Unreachable));
    }

    #[test]
    fn assorted_violations() {
        let g = AmrGraph::from_parts(
            "r",
            vec![node("a", "x"), node("a", "y"), node("b", "")],
            vec![edge("a", "ARG0", "b"), edge("q", ":ARG1", "a")],
            vec![Attribute {
                source: "z".into(),
                role: ":polarity".into(),
                value: Constant { kind: crate::amr::ConstantKind::MinusMarker, value: "+".into() },
            }],
        );
        let report = validate(&g);
        for code in [
            ViolationCode::MissingRoot,
            ViolationCode::DuplicateVariable,
            ViolationCode::EmptyConcept,
            ViolationCode::BadRole,
            ViolationCode::UndeclaredSource,
            ViolationCode::UndeclaredAttributeSource,
            ViolationCode::BadConstant,
        ] {
            assert!(report.has(code), "missing {code}: {report}");
        }
    }

    #[test]
    fn validate_does_not_mutate() {
        let g = AmrGraph::from_parts("a", vec![node("a", "x")], vec![edge("a", ":ARG0", "b")], vec![]);
        let before = g.clone();
        let _ = validate(&g);
        assert_eq!(g, before);
    }
}
