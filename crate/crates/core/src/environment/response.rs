use serde::{Deserialize, Serialize};

/// Version stamped on every response and wire record.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Answer,
    Error,
    Final,
}

/// One environment reply, serialized as a single-line record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvResponse {
    pub protocol_version: u32,
    pub kind: ResponseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<String>,
    pub turn: usize,
}

impl EnvResponse {
    pub(crate) fn new(kind: ResponseKind, turn: usize) -> Self {
        EnvResponse {
            protocol_version: PROTOCOL_VERSION,
            kind,
            answer: None,
            error_code: None,
            detail: None,
            budget: None,
            usage: None,
            turn,
        }
    }

    pub(crate) fn error(turn: usize, code: &str, detail: impl Into<String>) -> Self {
        EnvResponse {
            error_code: Some(code.to_string()),
            detail: Some(detail.into()),
            ..Self::new(ResponseKind::Error, turn)
        }
    }

    /// The text an agent sees: the outcome line followed by any trailers.
    pub fn render_text(&self) -> String {
        let mut lines = Vec::with_capacity(3);
        lines.push(match self.kind {
            ResponseKind::Answer => match self.answer {
                Some(a) => format!("Answer: {a}"),
                None => format!(
                    "Acknowledged: {}",
                    self.detail.as_deref().unwrap_or("no query")
                ),
            },
            ResponseKind::Error => format!(
                "Error: {}: {}",
                self.error_code.as_deref().unwrap_or("Error"),
                self.detail.as_deref().unwrap_or("")
            ),
            ResponseKind::Final => format!("Final: {}", self.detail.as_deref().unwrap_or("")),
        });
        lines.extend(self.budget.clone());
        lines.extend(self.usage.clone());
        lines.join("\n")
    }
}

/// `[Budget: X/Y remaining]`
pub fn budget_trailer(remaining: i64, limit: u32) -> String {
    format!("[Budget: {remaining}/{limit} remaining]")
}

/// `[Token usage: X reasoning + Y tools = Z total]`
pub fn usage_trailer(reasoning: u64, tools: u64, total: u64) -> String {
    format!("[Token usage: {reasoning} reasoning + {tools} tools = {total} total]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailer_bytes() {
        assert_eq!(budget_trailer(1, 3), "[Budget: 1/3 remaining]");
        assert_eq!(budget_trailer(-2, 2), "[Budget: -2/2 remaining]");
        assert_eq!(
            usage_trailer(120, 750, 870),
            "[Token usage: 120 reasoning + 750 tools = 870 total]"
        );
    }

    #[test]
    fn single_line_record() {
        let mut r = EnvResponse::new(ResponseKind::Answer, 2);
        r.answer = Some(false);
        r.budget = Some(budget_trailer(1, 3));
        let line = serde_json::to_string(&r).unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(
            line,
            r#"{"protocol_version":1,"kind":"answer","answer":false,"budget":"[Budget: 1/3 remaining]","turn":2}"#
        );
        assert_eq!(r.render_text(), "Answer: false\n[Budget: 1/3 remaining]");
    }
}
