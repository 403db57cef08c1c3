//! Bounded ReAct loop: completions alternate with tool executions until the
//! model produces a final answer.

use crate::client::{LlmClient, LlmError};
use crate::message::ChatMessage;
use crate::parse::find_actions_line;
use crate::tools::{execute_tool, positional_params, ToolContext, ToolSpec};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ToolInvocation {
    pub name: String,
    pub arguments: Value,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactStep {
    Tools(Vec<ToolInvocation>),
    Final(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactOutcome {
    pub final_text: String,
    pub transcript: Vec<ChatMessage>,
    pub tool_calls: Vec<ToolInvocation>,
    pub completions: usize,
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

fn scalar(raw: &str) -> Value {
    let raw = raw.trim().trim_matches(|c| c == '"' || c == '\'');
    match raw.parse::<i64>() {
        Ok(n) => Value::from(n),
        Err(_) => Value::from(raw),
    }
}

/// Arguments of a text-mode call: a JSON object, `k=v` pairs, or positional values.
pub fn parse_text_args(tool: &str, raw: &str) -> Value {
    let raw = raw.trim();
    if raw.is_empty() {
        return Value::Object(Map::new());
    }
    if raw.starts_with('{') {
        return serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    }
    let names = positional_params(tool);
    let mut out = Map::new();
    for (i, part) in raw.split(',').enumerate() {
        match part.split_once(['=', ':']) {
            Some((k, v)) => {
                out.insert(k.trim().trim_matches('"').to_string(), scalar(v));
            }
            None => {
                if let Some(name) = names.get(i) {
                    out.insert(name.to_string(), scalar(part));
                }
            }
        }
    }
    Value::Object(out)
}

/// Last `Action: tool(args)` line naming a known tool.
pub fn find_text_action(text: &str, tools: &[ToolSpec]) -> Option<(String, Value)> {
    text.lines().rev().find_map(|line| {
        let rest = strip_prefix_ci(line.trim(), "action:")?.trim();
        let open = rest.find('(')?;
        let close = rest.rfind(')')?;
        let name = rest[..open].trim();
        if close < open || !tools.iter().any(|t| t.name == name) {
            return None;
        }
        Some((name.to_string(), parse_text_args(name, &rest[open + 1..close])))
    })
}

/// One completion. Tool requests are executed and their results appended to
/// `messages`; anything else is final.
pub fn react_step(
    client: &LlmClient,
    messages: &mut Vec<ChatMessage>,
    tools: &[ToolSpec],
    ctx: &ToolContext<'_>,
) -> Result<ReactStep, LlmError> {
    let reply = client.complete(messages, tools)?;
    if let Some(calls) = reply.tool_calls.clone().filter(|c| !c.is_empty()) {
        messages.push(reply);
        let mut done = Vec::with_capacity(calls.len());
        for call in calls {
            let args: Value = serde_json::from_str(&call.function.arguments)
                .unwrap_or_else(|_| Value::String(call.function.arguments.clone()));
            let result = execute_tool(&call.function.name, &args, ctx);
            messages.push(ChatMessage::tool_result(call.id.clone(), result.clone()));
            done.push(ToolInvocation { name: call.function.name, arguments: args, result });
        }
        return Ok(ReactStep::Tools(done));
    }
    if find_actions_line(&reply.content).is_none() {
        if let Some((name, args)) = find_text_action(&reply.content, tools) {
            let result = execute_tool(&name, &args, ctx);
            messages.push(reply);
            messages.push(ChatMessage::user(format!("Observation: {result}")));
            return Ok(ReactStep::Tools(vec![ToolInvocation { name, arguments: args, result }]));
        }
    }
    let text = reply.content.clone();
    messages.push(reply);
    Ok(ReactStep::Final(text))
}

/// Runs the loop. At most `max_tool_calls` completions may request tools, so
/// a run makes at most `max_tool_calls + 1` completions.
pub fn run_react(
    client: &LlmClient,
    mut messages: Vec<ChatMessage>,
    tools: &[ToolSpec],
    ctx: &ToolContext<'_>,
    max_tool_calls: usize,
) -> Result<ReactOutcome, LlmError> {
    let mut tool_calls = Vec::new();
    let mut tool_rounds = 0;
    let mut completions = 0;
    loop {
        completions += 1;
        match react_step(client, &mut messages, tools, ctx)? {
            ReactStep::Final(final_text) => {
                return Ok(ReactOutcome { final_text, transcript: messages, tool_calls, completions });
            }
            ReactStep::Tools(calls) => {
                tool_rounds += 1;
                if tool_rounds > max_tool_calls {
                    return Err(LlmError::DepthExceeded(max_tool_calls));
                }
                tool_calls.extend(calls);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::default_tools;
    use serde_json::json;

    #[test]
    fn text_actions() {
        let tools = default_tools();
        let t = "Thought: check first\nAction: conflict_check()";
        assert_eq!(find_text_action(t, &tools), Some(("conflict_check".into(), json!({}))));
        let t = "Action: predict_state(c1, slow_down, 2)";
        assert_eq!(
            find_text_action(t, &tools).unwrap().1,
            json!({ "cav": "c1", "action": "slow_down", "steps": 2 })
        );
        let t = "action: lane_query({\"cav\": \"c3\"})";
        assert_eq!(find_text_action(t, &tools).unwrap().1, json!({ "cav": "c3" }));
        assert_eq!(find_text_action("Action: teleport(c1)", &tools), None);
        assert_eq!(find_text_action("lane_query(cav=c2)", &tools), None);
    }
}
