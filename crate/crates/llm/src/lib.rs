//! Chat-completions backend for the teacher planner: prompt rendering, a
//! bounded ReAct tool loop, decision parsing, and session record/replay.

pub mod client;
pub mod message;
pub mod parse;
pub mod planner;
pub mod prompt;
pub mod react;
pub mod session;
pub mod tools;
pub mod transport;

pub use client::{parse_completion, session_key, LlmClient, LlmConfig, LlmError, Mode, DEFAULT_API_KEY_ENV};
pub use message::{ChatMessage, FunctionCall, Role, ToolCall};
pub use parse::{parse_decision, ParseError};
pub use planner::{DecisionError, LlmPlanner};
pub use prompt::{format_actions, render_prompt, render_prompt_for, ACTIONS_PREFIX, NO_CONFLICTS};
pub use react::{react_step, run_react, ReactOutcome, ReactStep, ToolInvocation};
pub use session::{SessionRecord, SessionStore, StoreError};
pub use tools::{default_tools, execute_tool, ToolContext, ToolSpec};
pub use transport::{CannedTransport, HttpResponse, HttpTransport, Transport, TransportError};
