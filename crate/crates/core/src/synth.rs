//! Seeded generators: arbitrary valid graphs for property tests, and small
//! topic-structured conversations for exercising the manipulations and the
//! proxy classifier end to end.
//!
//! Synthetic conversations open with a question and stay on one topic.
//! Topic predicates only take objects from the same topic, agents come from
//! a cast of two pronouns (plus `you` in questions), and replies usually pick up an object mentioned in
//! the turn before. Every semantic manipulation has something to act on:
//! pronoun arguments, predicates with antonyms, `amr-unknown` questions,
//! multi-sentence turns and reentrant agents.

use std::collections::HashSet;

use crate::amr::{fresh_variable, AmrGraph, Attribute, Constant, Edge, Node};
use crate::dialogue::{Conversation, Label, Utterance};
use crate::rng::SplitMix64;

const GRAPH_CONCEPTS: &[&str] = &[
    "want-01",
    "go-02",
    "boy",
    "girl",
    "watch-01",
    "name",
    "person",
    "have-rel-role-91",
    "amr-unknown",
    "date-entity",
    "and",
    "or",
    "city",
    "thing",
    "say-01",
    "café",
    "e-mail-01",
    "x",
    "i",
    "you",
    "he",
    "multi-sentence",
];
const GRAPH_ROLES: &[&str] = &[
    ":ARG0",
    ":ARG1",
    ":ARG2",
    ":ARG0-of",
    ":ARG1-of",
    ":op1",
    ":op2",
    ":mod",
    ":time",
    ":domain",
    ":location",
    ":snt1",
    ":snt2",
    ":name",
    ":quant",
    ":poss",
    ":consist-of",
];
const TEXTS: &[&str] = &[
    "Sesame",
    "Oscar the Grouch",
    "a \"quoted\" word",
    "back\\slash",
    "(paren) :colon / slash",
    "# not a comment",
    "",
];
const NUMBERS: &[&str] = &["1", "2012", "3.5", "-7", "+4", "0.25", "1e3"];
const MODES: &[&str] = &["imperative", "expressive", "interrogative"];

/// A valid graph of 1 to `max_nodes` nodes with reentrancies and every kind
/// of constant.
pub fn random_graph(rng: &mut SplitMix64, max_nodes: usize) -> AmrGraph {
    let n = rng.range_inclusive(1, max_nodes.max(1));
    let mut used = HashSet::new();
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let concept = GRAPH_CONCEPTS[rng.index(GRAPH_CONCEPTS.len())];
        let variable = fresh_variable(concept, &used);
        used.insert(variable.clone());
        nodes.push(Node { variable, concept: concept.to_string() });
    }
    let var = |i: usize| nodes[i].variable.clone();
    let role = |rng: &mut SplitMix64| GRAPH_ROLES[rng.index(GRAPH_ROLES.len())].to_string();
    let mut edges = Vec::new();
    let mut linked = HashSet::new();
    for child in 1..n {
        let parent = rng.index(child);
        linked.insert((parent, child));
        edges.push(Edge { source: var(parent), role: role(rng), target: var(child) });
    }
    // Edges only run from lower to higher index, so no cycle can form.
    if n > 2 {
        for _ in 0..rng.index(n / 2 + 1) {
            let a = rng.index(n - 1);
            let b = rng.range_inclusive(a + 1, n - 1);
            if linked.insert((a, b)) {
                edges.push(Edge { source: var(a), role: role(rng), target: var(b) });
            }
        }
    }
    let mut attributes = Vec::new();
    for i in 0..n {
        if !rng.bernoulli(0.3) {
            continue;
        }
        let (role, value) = match rng.index(5) {
            0 => (":polarity", Constant::minus()),
            1 => (":op1", Constant::text(TEXTS[rng.index(TEXTS.len())])),
            2 => (":quant", Constant::number(NUMBERS[rng.index(NUMBERS.len())])),
            3 => (":mode", Constant::symbol(MODES[rng.index(MODES.len())])),
            _ => (":polite", Constant::symbol("+")),
        };
        attributes.push(Attribute { source: var(i), role: role.to_string(), value });
    }
    let root = var(0);
    AmrGraph::new(root, nodes, edges, attributes).expect("generated graphs are valid")
}

struct Topic {
    predicates: &'static [&'static str],
    objects: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic {
        predicates: &["eat-01", "cook-01", "taste-01", "buy-01"],
        objects: &["pizza", "soup", "bread", "apple", "cake"],
    },
    Topic {
        predicates: &["watch-01", "enjoy-01", "recommend-01", "review-01"],
        objects: &["movie", "show", "actor", "episode", "cartoon"],
    },
    Topic {
        predicates: &["listen-01", "sing-01", "hear-01", "record-01"],
        objects: &["song", "album", "guitar", "band", "concert"],
    },
    Topic {
        predicates: &["play-01", "win-01", "lose-02", "coach-01"],
        objects: &["game", "team", "match", "ball", "league"],
    },
    Topic {
        predicates: &["visit-01", "travel-01", "plan-01", "leave-11"],
        objects: &["city", "beach", "country", "museum", "hotel"],
    },
    Topic {
        predicates: &["adopt-01", "feed-01", "walk-01", "raise-03"],
        objects: &["dog", "cat", "puppy", "bird", "vet"],
    },
    Topic {
        predicates: &["read-01", "write-01", "borrow-01", "finish-01"],
        objects: &["book", "novel", "author", "poem", "library"],
    },
];
const STANCES: &[&str] = &["like-01", "love-01", "want-01", "hope-01", "remember-01"];
const JUDGEMENTS: &[&str] = &["good-02", "interesting-01", "easy-05", "popular-02"];
const CAST: &[&str] = &["i", "we", "they", "he", "she"];
const MODIFIERS: &[&str] = &["new", "old", "big", "favorite", "local"];
const TIMES: &[&str] = &["always", "yesterday", "today", "often", "once"];

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
    used: HashSet<String>,
}

impl Builder {
    fn node(&mut self, concept: &str) -> String {
        let variable = fresh_variable(concept, &self.used);
        self.used.insert(variable.clone());
        self.nodes.push(Node { variable: variable.clone(), concept: concept.to_string() });
        variable
    }

    fn edge(&mut self, source: &str, role: &str, target: &str) {
        self.edges.push(Edge { source: source.into(), role: role.into(), target: target.into() });
    }

    fn child(&mut self, source: &str, role: &str, concept: &str) -> String {
        let v = self.node(concept);
        self.edge(source, role, &v);
        v
    }

    fn negate(&mut self, source: &str) {
        self.attributes.push(Attribute { source: source.into(), role: ":polarity".into(), value: Constant::minus() });
    }

    fn finish(self, root: String) -> AmrGraph {
        AmrGraph::new(root, self.nodes, self.edges, self.attributes).expect("synthetic graphs are valid")
    }
}

struct Generator<'a> {
    rng: &'a mut SplitMix64,
    topic: &'static Topic,
    /// Pronouns that act in this conversation.
    agents: Vec<&'static str>,
    /// Objects mentioned in the previous turn.
    recent: Vec<&'static str>,
    mentioned: Vec<&'static str>,
}

impl Generator<'_> {
    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.rng.index(items.len())]
    }

    fn object(&mut self) -> &'static str {
        let recent = self.recent.clone();
        let o = if !recent.is_empty() && self.rng.bernoulli(0.7) {
            self.pick(&recent)
        } else {
            self.pick(self.topic.objects)
        };
        self.mentioned.push(o);
        o
    }

    fn object_node(&mut self, b: &mut Builder, parent: &str, role: &str) {
        let concept = self.object();
        let o = b.child(parent, role, concept);
        if self.rng.bernoulli(0.3) {
            let m = self.pick(MODIFIERS);
            b.child(&o, ":mod", m);
        }
    }

    /// A topic predicate with agent and object, optionally negated or timed.
    fn clause(&mut self, b: &mut Builder, agent: Option<&str>) -> String {
        let pred = self.pick(self.topic.predicates);
        let p = b.node(pred);
        match agent {
            Some(a) => b.edge(&p, ":ARG0", a),
            None => {
                let a = self.pick(&self.agents.clone());
                b.child(&p, ":ARG0", a);
            }
        }
        self.object_node(b, &p, ":ARG1");
        if self.rng.bernoulli(0.25) {
            let t = self.pick(TIMES);
            b.child(&p, ":time", t);
        }
        if self.rng.bernoulli(0.15) {
            b.negate(&p);
        }
        p
    }

    fn sentence(&mut self, b: &mut Builder) -> String {
        match self.rng.index(4) {
            0 => self.clause(b, None),
            1 => {
                // stance over an embedded clause sharing the agent
                let s = b.node(self.pick(STANCES));
                let agent = self.pick(&self.agents.clone());
                let a = b.child(&s, ":ARG0", agent);
                let c = self.clause(b, Some(&a));
                b.edge(&s, ":ARG1", &c);
                s
            }
            2 => {
                let j = b.node(self.pick(JUDGEMENTS));
                self.object_node(b, &j, ":ARG1");
                j
            }
            _ => self.question(b),
        }
    }

    fn question(&mut self, b: &mut Builder) -> String {
        let pred = self.pick(self.topic.predicates);
        let p = b.node(pred);
        b.child(&p, ":ARG0", "you");
        if self.rng.bernoulli(0.5) {
            self.object_node(b, &p, ":ARG1");
            b.child(&p, ":polarity", "amr-unknown");
        } else {
            b.child(&p, ":ARG1", "amr-unknown");
        }
        p
    }

    fn utterance(&mut self, first: bool) -> AmrGraph {
        self.mentioned.clear();
        let mut b = Builder::default();
        let root = if first {
            self.question(&mut b)
        } else {
            let k = self.pick(&[1, 1, 2, 2, 3]);
            let heads: Vec<String> = (0..k).map(|_| self.sentence(&mut b)).collect();
            if k == 1 {
                heads.into_iter().next().expect("one head")
            } else {
                let m = b.node("multi-sentence");
                for (i, h) in heads.iter().enumerate() {
                    b.edge(&m, &format!(":snt{}", i + 1), h);
                }
                m
            }
        };
        self.recent = std::mem::take(&mut self.mentioned);
        b.finish(root)
    }
}

/// One coherent synthetic conversation of 4 to 8 alternating turns.
pub fn conversation(id: impl Into<String>, rng: &mut SplitMix64) -> Conversation {
    let topic = &TOPICS[rng.index(TOPICS.len())];
    let turns = rng.range_inclusive(4, 8);
    let agents = rng.sample_indices(CAST.len(), 2).into_iter().map(|i| CAST[i]).collect();
    let mut generator = Generator { rng, topic, agents, recent: Vec::new(), mentioned: Vec::new() };
    let utterances =
        (0..turns).map(|i| Utterance::new(if i % 2 == 0 { "A" } else { "B" }, generator.utterance(i == 0))).collect();
    Conversation::new(id, utterances).with_label(Label::Coherent)
}

/// `n` conversations with ids `synth-{seed}-{i}`, each from its own stream
/// so any prefix of the corpus is the same for every `n`.
pub fn corpus(n: usize, seed: u64) -> Vec<Conversation> {
    (0..n)
        .map(|i| {
            let id = format!("synth-{seed}-{i:05}");
            let mut rng = SplitMix64::for_conversation(seed, &id);
            conversation(id, &mut rng)
        })
        .collect()
}
