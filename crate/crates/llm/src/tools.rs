//! Tools the model may call, each backed by a teacher operation.

use ldpd_core::sim::{Action, Env, JointAction, VehicleId, VehicleLabel};
use ldpd_core::teacher::{predict_trajectories, ConflictReport, ScenarioDescription};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    /// JSON schema of the arguments object.
    pub parameters: Value,
}

impl ToolSpec {
    /// Wire form used in the request body.
    pub fn to_wire(&self) -> Value {
        json!({
            "type": "function",
            "function": { "name": self.name, "description": self.description, "parameters": self.parameters },
        })
    }
}

/// Longest prediction a tool call may request, in decision periods.
pub const MAX_PREDICT_STEPS: usize = 5;

pub fn default_tools() -> Vec<ToolSpec> {
    vec![
        ToolSpec {
            name: "lane_query".into(),
            description: "Lanes around a CAV and how each surrounding vehicle relates to it.".into(),
            parameters: json!({
                "type": "object",
                "properties": { "cav": { "type": "string", "description": "CAV label such as c1" } },
                "required": ["cav"],
            }),
        },
        ToolSpec {
            name: "predict_state".into(),
            description: "Predicted positions of all vehicles if the CAV takes the action while everyone else cruises.".into(),
            parameters: json!({
                "type": "object",
                "properties": {
                    "cav": { "type": "string" },
                    "action": { "type": "string", "enum": Action::ALL.iter().map(|a| a.token()).collect::<Vec<_>>() },
                    "steps": { "type": "integer", "minimum": 1, "maximum": MAX_PREDICT_STEPS },
                },
                "required": ["cav", "action"],
            }),
        },
        ToolSpec {
            name: "conflict_check".into(),
            description: "Vehicle pairs heading for a common point, with time-to-conflict-point gaps and risk levels.".into(),
            parameters: json!({ "type": "object", "properties": {} }),
        },
    ]
}

/// Scene the tools answer questions about.
#[derive(Debug, Clone, Copy)]
pub struct ToolContext<'a> {
    pub env: &'a Env,
    pub descriptions: &'a [ScenarioDescription],
    pub conflicts: &'a ConflictReport,
}

fn label(env: &Env, id: VehicleId) -> String {
    env.state().vehicle(id).map(|v| v.label()).unwrap_or_else(|| format!("v{}", id.0))
}

fn cav_arg(args: &Value, env: &Env) -> Result<VehicleId, String> {
    let s = args.get("cav").and_then(Value::as_str).ok_or("missing string argument 'cav'")?;
    let l: VehicleLabel = s.parse().map_err(|_| format!("'{s}' is not a vehicle label"))?;
    match env.state().vehicle(l.id) {
        Some(v) if v.is_cav() => Ok(l.id),
        _ => Err(format!("no CAV {s} in the scene")),
    }
}

/// Runs a tool and returns its JSON result as text. Bad arguments produce an
/// `{"error": ...}` result the model can read, not a failure of the loop.
pub fn execute_tool(name: &str, args: &Value, ctx: &ToolContext<'_>) -> String {
    let out = match name {
        "lane_query" => lane_query(args, ctx),
        "predict_state" => predict_state(args, ctx),
        "conflict_check" => Ok(conflict_check(ctx)),
        other => Err(format!("unknown tool '{other}'")),
    };
    match out {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn lane_query(args: &Value, ctx: &ToolContext<'_>) -> Result<Value, String> {
    let cav = cav_arg(args, ctx.env)?;
    let d = ctx.descriptions.iter().find(|d| d.cav == cav).ok_or("CAV is not live")?;
    Ok(json!({
        "cav": label(ctx.env, cav),
        "ego_lane": d.ego_lane.0,
        "on_ramp": d.ego_on_ramp,
        "lanes": d.lanes.iter().map(|(l, r)| json!({ "lane": l.0, "relation": r })).collect::<Vec<_>>(),
        "vehicles": d.vehicles.iter().map(|v| json!({
            "id": label(ctx.env, v.id),
            "relation": v.relation.tag(),
            "lane": v.lane.0,
            "gap_m": (v.offset * 100.0).round() / 100.0,
            "speed": (v.speed * 100.0).round() / 100.0,
        })).collect::<Vec<_>>(),
    }))
}

fn predict_state(args: &Value, ctx: &ToolContext<'_>) -> Result<Value, String> {
    let cav = cav_arg(args, ctx.env)?;
    let token = args.get("action").and_then(Value::as_str).ok_or("missing string argument 'action'")?;
    let action: Action = token.parse().map_err(|_| format!("unknown action '{token}'"))?;
    let steps = match args.get("steps") {
        None => 3,
        Some(s) => s.as_u64().ok_or("'steps' must be a positive integer")? as usize,
    }
    .clamp(1, MAX_PREDICT_STEPS);
    let mut joint = JointAction::new();
    joint.insert(cav, action);
    let traj = predict_trajectories(ctx.env, &joint, steps);
    let frames: Vec<Value> = (1..=steps)
        .map(|k| {
            json!({
                "t": k,
                "vehicles": traj.frame(k).iter().filter(|v| v.on_road()).map(|v| json!({
                    "id": v.label(),
                    "x": (v.x * 100.0).round() / 100.0,
                    "lane": v.lane.0,
                    "speed": (v.speed() * 100.0).round() / 100.0,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let crashed: Vec<String> = traj.crashed.iter().map(|id| label(ctx.env, *id)).collect();
    Ok(json!({ "cav": label(ctx.env, cav), "action": action.token(), "frames": frames, "crashed": crashed }))
}

fn conflict_check(ctx: &ToolContext<'_>) -> Value {
    json!({
        "conflicts": ctx.conflicts.conflicts.iter().map(|c| json!({
            "pair": [label(ctx.env, c.a), label(ctx.env, c.b)],
            "kind": c.kind,
            "point_m": (c.point * 100.0).round() / 100.0,
            "ttcp": [(c.ttcp_a * 100.0).round() / 100.0, (c.ttcp_b * 100.0).round() / 100.0],
            "delta_ttcp": (c.delta * 100.0).round() / 100.0,
            "risk": c.risk,
        })).collect::<Vec<_>>(),
    })
}

/// Argument names in positional order, for text-mode calls like `lane_query(c1)`.
pub fn positional_params(tool: &str) -> &'static [&'static str] {
    match tool {
        "lane_query" => &["cav"],
        "predict_state" => &["cav", "action", "steps"],
        _ => &[],
    }
}
