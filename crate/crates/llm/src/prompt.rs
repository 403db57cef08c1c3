//! Prompt rendering and the `ACTIONS:` output grammar.

use crate::message::ChatMessage;
use ldpd_core::sim::{Action, JointAction, VehicleId, VehicleKind, VehicleLabel};
use ldpd_core::teacher::{ConflictReport, ScenarioDescription};
use std::collections::BTreeMap;
use std::fmt::Write;

pub const ACTIONS_PREFIX: &str = "ACTIONS:";
pub const NO_CONFLICTS: &str = "no conflicts detected";

pub fn cav_label(id: VehicleId) -> String {
    VehicleLabel { id, kind: VehicleKind::Cav }.to_string()
}

/// `ACTIONS: {"c1": "cruise", ...}` with ids in ascending order.
pub fn format_actions(actions: &JointAction) -> String {
    let body: Vec<String> = actions.iter().map(|(id, a)| format!("\"{}\": \"{}\"", cav_label(*id), a.token())).collect();
    format!("{ACTIONS_PREFIX} {{{}}}", body.join(", "))
}

fn kinds(descriptions: &[ScenarioDescription]) -> BTreeMap<VehicleId, VehicleKind> {
    let mut out = BTreeMap::new();
    for d in descriptions {
        out.insert(d.cav, VehicleKind::Cav);
        for v in &d.vehicles {
            out.insert(v.id, v.kind);
        }
    }
    out
}

/// One line per conflict, or the empty-report phrase.
pub fn conflict_summary(descriptions: &[ScenarioDescription], conflicts: &ConflictReport) -> String {
    if conflicts.is_empty() {
        return format!("Conflict check: {NO_CONFLICTS}.\n");
    }
    let kinds = kinds(descriptions);
    let name = |id: VehicleId| match kinds.get(&id) {
        Some(&kind) => VehicleLabel { id, kind }.to_string(),
        None => format!("v{}", id.0),
    };
    let mut s = String::from("Conflict check:\n");
    for c in &conflicts.conflicts {
        let _ = writeln!(
            s,
            "- {} and {}: {:?} conflict at x = {:.1} m, time to conflict point {:.2} s vs {:.2} s (gap {:.2} s), {:?} risk.",
            name(c.a),
            name(c.b),
            c.kind,
            c.point,
            c.ttcp_a,
            c.ttcp_b,
            c.delta,
            c.risk
        );
    }
    s
}

fn system_prompt(targets: &[VehicleId], with_tools: bool) -> String {
    let tokens: Vec<&str> = Action::ALL.iter().map(|a| a.token()).collect();
    let example: JointAction = targets.iter().map(|&id| (id, Action::Cruise)).collect();
    let mut s = String::new();
    s.push_str(
        "You are the coordinator of connected automated vehicles (CAVs) at a highway on-ramp merge. \
         Choose one high-level action for each CAV so that all vehicles merge safely and keep traffic moving.\n",
    );
    let _ = writeln!(s, "Legal actions: {}.", tokens.join(", "));
    if with_tools {
        s.push_str(
            "You may call the tools lane_query, predict_state and conflict_check before deciding. \
             Without native tool calling, write a line `Action: <tool>(<json arguments>)` and wait for the observation.\n",
        );
    }
    let ids: Vec<String> = targets.iter().map(|&id| cav_label(id)).collect();
    let _ = writeln!(s, "Decide for: {}.", ids.join(", "));
    let _ = writeln!(
        s,
        "Finish with a single final line of the form {ACTIONS_PREFIX} {{\"<cav_id>\": \"<action>\", ...}}, for example:\n{}",
        format_actions(&example)
    );
    s
}

/// Prompt asking for every CAV in the scene.
pub fn render_prompt(descriptions: &[ScenarioDescription], conflicts: &ConflictReport) -> Vec<ChatMessage> {
    let targets: Vec<VehicleId> = descriptions.iter().map(|d| d.cav).collect();
    render_prompt_for(descriptions, conflicts, &targets, true)
}

/// Prompt asking only for `targets`; the scene text still covers every CAV.
pub fn render_prompt_for(
    descriptions: &[ScenarioDescription],
    conflicts: &ConflictReport,
    targets: &[VehicleId],
    with_tools: bool,
) -> Vec<ChatMessage> {
    let mut targets = targets.to_vec();
    targets.sort();
    targets.dedup();
    let mut user = String::from("Scene:\n");
    for d in descriptions {
        user.push_str(&d.text);
    }
    user.push('\n');
    user.push_str(&conflict_summary(descriptions, conflicts));
    vec![ChatMessage::system(system_prompt(&targets, with_tools)), ChatMessage::user(user)]
}
