use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Discrete high-level decision. The discriminant is the index used by the
/// policy networks and by every tie-break rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SlowDown = 0,
    Cruise = 1,
    SpeedUp = 2,
    ChangeLeft = 3,
    ChangeRight = 4,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; 5] = [
        Action::SlowDown,
        Action::Cruise,
        Action::SpeedUp,
        Action::ChangeLeft,
        Action::ChangeRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_lane_change(self) -> bool {
        matches!(self, Action::ChangeLeft | Action::ChangeRight)
    }

    /// Canonical token used in prompts and JSON.
    pub fn token(self) -> &'static str {
        match self {
            Action::SlowDown => "slow_down",
            Action::Cruise => "cruise",
            Action::SpeedUp => "speed_up",
            Action::ChangeLeft => "change_left",
            Action::ChangeRight => "change_right",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action token {0:?}")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    /// Case-insensitive; spaces, dashes and underscores are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | ' ' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "slowdown" => Ok(Action::SlowDown),
            "cruise" => Ok(Action::Cruise),
            "speedup" => Ok(Action::SpeedUp),
            "changeleft" => Ok(Action::ChangeLeft),
            "changeright" => Ok(Action::ChangeRight),
            _ => Err(UnknownAction(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_mapping_is_fixed() {
        for (i, a) in Action::ALL.iter().enumerate() {
            assert_eq!(a.index(), i);
            assert_eq!(Action::from_index(i), Some(*a));
        }
        assert_eq!(Action::from_index(5), None);
    }

    #[test]
    fn tokens_parse() {
        assert_eq!("Slow Down".parse::<Action>().unwrap(), Action::SlowDown);
        assert_eq!("CHANGE_LEFT".parse::<Action>().unwrap(), Action::ChangeLeft);
        assert_eq!("speed-up".parse::<Action>().unwrap(), Action::SpeedUp);
        assert!("fly".parse::<Action>().is_err());
        for a in Action::ALL {
            assert_eq!(a.token().parse::<Action>().unwrap(), a);
        }
    }
}
