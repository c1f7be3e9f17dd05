//! Tagged agent messages: `<think>`, `<query>` and `<solution>` spans.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolViolation {
    QueryAndSolution,
    MultipleQueries,
    MultipleSolutions,
    UntaggedContent,
    PayloadParseError,
}

impl ProtocolViolation {
    pub fn code(self) -> &'static str {
        match self {
            ProtocolViolation::QueryAndSolution => "QueryAndSolution",
            ProtocolViolation::MultipleQueries => "MultipleQueries",
            ProtocolViolation::MultipleSolutions => "MultipleSolutions",
            ProtocolViolation::UntaggedContent => "UntaggedContent",
            ProtocolViolation::PayloadParseError => "PayloadParseError",
        }
    }
}

impl fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentMessage {
    pub raw: String,
    pub think_spans: Vec<String>,
    pub query_payloads: Vec<Value>,
    pub solution_payload: Option<Value>,
    pub violations: Vec<ProtocolViolation>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Think,
    Query,
    Solution,
}

impl Tag {
    const ALL: [Tag; 3] = [Tag::Think, Tag::Query, Tag::Solution];

    fn open(self) -> &'static str {
        match self {
            Tag::Think => "<think>",
            Tag::Query => "<query>",
            Tag::Solution => "<solution>",
        }
    }

    fn close(self) -> &'static str {
        match self {
            Tag::Think => "</think>",
            Tag::Query => "</query>",
            Tag::Solution => "</solution>",
        }
    }
}

fn contains_any_tag(s: &str) -> bool {
    Tag::ALL
        .iter()
        .any(|t| s.contains(t.open()) || s.contains(t.close()))
}

/// Position of the next opening tag at or after the start of `s`.
fn next_open(s: &str) -> Option<usize> {
    Tag::ALL.iter().filter_map(|t| s.find(t.open())).min()
}

/// Splits a message into tagged spans and records every contract violation.
///
/// Tags are case-sensitive and may not nest. A message with neither a query nor
/// a solution is a legal think-only turn.
pub fn parse_agent_message(raw: &str) -> AgentMessage {
    let mut think_spans = Vec::new();
    let mut query_payloads = Vec::new();
    let mut solutions = Vec::new();
    let mut violations = Vec::new();
    let note = |v: ProtocolViolation, list: &mut Vec<ProtocolViolation>| {
        if !list.contains(&v) {
            list.push(v);
        }
    };
    let (mut n_queries, mut n_solutions) = (0usize, 0usize);

    let mut rest = raw;
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        let Some(tag) = Tag::ALL.into_iter().find(|t| rest.starts_with(t.open())) else {
            note(ProtocolViolation::UntaggedContent, &mut violations);
            match next_open(rest) {
                Some(at) => {
                    rest = &rest[at..];
                    continue;
                }
                None => break,
            }
        };
        let body_start = tag.open().len();
        let Some(close_at) = rest[body_start..].find(tag.close()) else {
            note(ProtocolViolation::PayloadParseError, &mut violations);
            break;
        };
        let body = &rest[body_start..body_start + close_at];
        rest = &rest[body_start + close_at + tag.close().len()..];
        match tag {
            Tag::Query => n_queries += 1,
            Tag::Solution => n_solutions += 1,
            Tag::Think => {}
        }
        if contains_any_tag(body) {
            note(ProtocolViolation::PayloadParseError, &mut violations);
            continue;
        }
        match tag {
            Tag::Think => think_spans.push(body.to_string()),
            Tag::Query | Tag::Solution => match serde_json::from_str::<Value>(body.trim()) {
                Ok(v) if tag == Tag::Query => query_payloads.push(v),
                Ok(v) => solutions.push(v),
                Err(_) => note(ProtocolViolation::PayloadParseError, &mut violations),
            },
        }
    }

    if n_queries > 0 && n_solutions > 0 {
        note(ProtocolViolation::QueryAndSolution, &mut violations);
    }
    if n_queries > 1 {
        note(ProtocolViolation::MultipleQueries, &mut violations);
    }
    if n_solutions > 1 {
        note(ProtocolViolation::MultipleSolutions, &mut violations);
    }

    AgentMessage {
        raw: raw.to_string(),
        think_spans,
        query_payloads,
        solution_payload: solutions.into_iter().next(),
        violations,
    }
}

impl AgentMessage {
    /// Renders think spans, then queries, then the solution, payloads as compact JSON.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for t in &self.think_spans {
            out.push_str("<think>");
            out.push_str(t);
            out.push_str("</think>");
        }
        for q in &self.query_payloads {
            out.push_str("<query>");
            out.push_str(&q.to_string());
            out.push_str("</query>");
        }
        if let Some(s) = &self.solution_payload {
            out.push_str("<solution>");
            out.push_str(&s.to_string());
            out.push_str("</solution>");
        }
        out
    }

    /// A well-formed query turn.
    pub fn query(think: impl Into<String>, query: Value) -> String {
        AgentMessage {
            raw: String::new(),
            think_spans: vec![think.into()],
            query_payloads: vec![query],
            solution_payload: None,
            violations: Vec::new(),
        }
        .serialize()
    }

    /// A well-formed solution turn.
    pub fn solution(think: impl Into<String>, solution: Value) -> String {
        AgentMessage {
            raw: String::new(),
            think_spans: vec![think.into()],
            query_payloads: Vec::new(),
            solution_payload: Some(solution),
            violations: Vec::new(),
        }
        .serialize()
    }

    pub fn is_think_only(&self) -> bool {
        self.violations.is_empty()
            && self.query_payloads.is_empty()
            && self.solution_payload.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn canonical_query_turn() {
        let m = parse_agent_message(
            "<think>check house 1</think>\n<query>{\"type\": \"fact\", \"rel\": \"found_at\", \"house\": \"house1\", \"attr\": \"Name\", \"value\": \"eric\"}</query>",
        );
        assert!(m.violations.is_empty());
        assert_eq!(m.think_spans, vec!["check house 1"]);
        assert_eq!(m.query_payloads.len(), 1);
        assert_eq!(m.query_payloads[0]["house"], "house1");
        assert!(m.solution_payload.is_none());
    }

    #[test]
    fn query_and_solution_together() {
        let m = parse_agent_message("<think>x</think><query>{}</query><solution>{}</solution>");
        assert_eq!(m.violations, vec![ProtocolViolation::QueryAndSolution]);
    }

    #[test]
    fn think_only_is_legal() {
        let m = parse_agent_message("<think>still thinking</think>");
        assert!(m.violations.is_empty());
        assert!(m.is_think_only());
    }

    #[test]
    fn rule_breaches() {
        let cases = [
            (
                "<query>{}</query><query>{}</query>",
                ProtocolViolation::MultipleQueries,
            ),
            ("hello <think>x</think>", ProtocolViolation::UntaggedContent),
            (
                "<think>x</think> trailing",
                ProtocolViolation::UntaggedContent,
            ),
            (
                "<query>{not json</query>",
                ProtocolViolation::PayloadParseError,
            ),
            (
                "<think>a <query>{}</query></think>",
                ProtocolViolation::PayloadParseError,
            ),
            ("<think>unterminated", ProtocolViolation::PayloadParseError),
            ("<Query>{}</Query>", ProtocolViolation::UntaggedContent),
            (
                "<solution>{}</solution><solution>{}</solution>",
                ProtocolViolation::MultipleSolutions,
            ),
        ];
        for (raw, expected) in cases {
            let m = parse_agent_message(raw);
            assert!(
                m.violations.contains(&expected),
                "{raw}: {:?}",
                m.violations
            );
        }
    }

    #[test]
    fn composed_messages_parse_cleanly() {
        let q = AgentMessage::query("plan", json!({"type": "fact"}));
        assert!(parse_agent_message(&q).violations.is_empty());
        let s = AgentMessage::solution("done", json!({"header": ["House"], "rows": []}));
        let parsed = parse_agent_message(&s);
        assert!(parsed.violations.is_empty());
        assert!(parsed.solution_payload.is_some());
    }

    fn payload() -> impl Strategy<Value = Value> {
        prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            any::<i32>().prop_map(|n| json!(n)),
            "[a-z ]{0,12}".prop_map(Value::String),
            ("[a-z]{1,6}", "[a-zA-Z0-9 ]{0,10}").prop_map(|(k, v)| json!({ k: v })),
        ]
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(
            thinks in proptest::collection::vec("[^<>]{0,30}", 0..3),
            query in proptest::option::of(payload()),
            solution in proptest::option::of(payload()),
        ) {
            // Well-formed messages carry a query or a solution, never both.
            let solution = if query.is_some() { None } else { solution };
            let msg = AgentMessage {
                raw: String::new(),
                think_spans: thinks,
                query_payloads: query.into_iter().collect(),
                solution_payload: solution,
                violations: Vec::new(),
            };
            let text = msg.serialize();
            let parsed = parse_agent_message(&text);
            prop_assert!(parsed.violations.is_empty());
            prop_assert_eq!(&parsed.think_spans, &msg.think_spans);
            prop_assert_eq!(&parsed.query_payloads, &msg.query_payloads);
            prop_assert_eq!(&parsed.solution_payload, &msg.solution_payload);
            prop_assert_eq!(parsed.serialize(), text);
        }
    }
}
