use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::world::ActionKind;

/// Free-form natural-language mission text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instruction(String);

impl Instruction {
    /// Returns `None` when the text is blank.
    pub fn new(text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            None
        } else {
            Some(Self(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Near,
    LeftOf,
    RightOf,
    Behind,
    InFrontOf,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] = [
        RelationKind::Near,
        RelationKind::LeftOf,
        RelationKind::RightOf,
        RelationKind::Behind,
        RelationKind::InFrontOf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationKind::Near => "near",
            RelationKind::LeftOf => "left_of",
            RelationKind::RightOf => "right_of",
            RelationKind::Behind => "behind",
            RelationKind::InFrontOf => "in_front_of",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub kind: RelationKind,
    pub anchor: Box<ObjectRef>,
}

/// A language reference to an object: label, attributes and an optional
/// spatial relation to one anchor object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRef {
    pub label: String,
    #[serde(default)]
    pub attributes: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
}

impl ObjectRef {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            attributes: BTreeSet::new(),
            relation: None,
        }
    }

    pub fn with_attributes<I, S>(mut self, attrs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.attributes.extend(attrs.into_iter().map(Into::into));
        self
    }

    pub fn related(mut self, kind: RelationKind, anchor: ObjectRef) -> Self {
        self.relation = Some(Relation {
            kind,
            anchor: Box::new(anchor),
        });
        self
    }

    pub fn check(&self) -> Result<(), String> {
        if self.label.trim().is_empty() {
            return Err("object reference has an empty label".into());
        }
        if let Some(rel) = &self.relation {
            if rel.anchor.label.trim().is_empty() {
                return Err("relation anchor has an empty label".into());
            }
            if rel.anchor.relation.is_some() {
                return Err(format!(
                    "relation nesting deeper than one level under {:?}",
                    self.label
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.attributes {
            write!(f, "{a} ")?;
        }
        f.write_str(&self.label)?;
        if let Some(rel) = &self.relation {
            write!(f, " {} {}", rel.kind.as_str().replace('_', " "), rel.anchor)?;
        }
        Ok(())
    }
}

pub const DEFAULT_TAKEOFF_ALT: f64 = 2.0;
pub const DEFAULT_HOVER_SECONDS: f64 = 3.0;

/// One typed intermediate objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubGoal {
    Takeoff { alt: f64 },
    NavigateTo(ObjectRef),
    FlyOver(ObjectRef),
    AscendTo { alt: f64 },
    DescendTo { alt: f64 },
    Search(ObjectRef),
    Hover { seconds: f64 },
    Land,
    LandAt(ObjectRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubGoalKind {
    Takeoff,
    NavigateTo,
    FlyOver,
    AscendTo,
    DescendTo,
    Search,
    Hover,
    Land,
    LandAt,
}

impl SubGoalKind {
    pub const ALL: [SubGoalKind; 9] = [
        SubGoalKind::Takeoff,
        SubGoalKind::NavigateTo,
        SubGoalKind::FlyOver,
        SubGoalKind::AscendTo,
        SubGoalKind::DescendTo,
        SubGoalKind::Search,
        SubGoalKind::Hover,
        SubGoalKind::Land,
        SubGoalKind::LandAt,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubGoalKind::Takeoff => "TAKEOFF",
            SubGoalKind::NavigateTo => "NAVIGATE_TO",
            SubGoalKind::FlyOver => "FLY_OVER",
            SubGoalKind::AscendTo => "ASCEND_TO",
            SubGoalKind::DescendTo => "DESCEND_TO",
            SubGoalKind::Search => "SEARCH",
            SubGoalKind::Hover => "HOVER",
            SubGoalKind::Land => "LAND",
            SubGoalKind::LandAt => "LAND_AT",
        }
    }

    pub fn is_landing(&self) -> bool {
        matches!(self, SubGoalKind::Land | SubGoalKind::LandAt)
    }

    pub fn takes_object(&self) -> bool {
        matches!(
            self,
            SubGoalKind::NavigateTo
                | SubGoalKind::FlyOver
                | SubGoalKind::Search
                | SubGoalKind::LandAt
        )
    }
}

const NAVIGATION: &[ActionKind] = &[
    ActionKind::MoveForward,
    ActionKind::TurnLeft,
    ActionKind::TurnRight,
    ActionKind::Ascend,
    ActionKind::Descend,
];

const LANDING_NAVIGATION: &[ActionKind] = &[
    ActionKind::MoveForward,
    ActionKind::TurnLeft,
    ActionKind::TurnRight,
    ActionKind::Ascend,
    ActionKind::Descend,
    ActionKind::Land,
];

impl SubGoal {
    pub fn kind(&self) -> SubGoalKind {
        match self {
            SubGoal::Takeoff { .. } => SubGoalKind::Takeoff,
            SubGoal::NavigateTo(_) => SubGoalKind::NavigateTo,
            SubGoal::FlyOver(_) => SubGoalKind::FlyOver,
            SubGoal::AscendTo { .. } => SubGoalKind::AscendTo,
            SubGoal::DescendTo { .. } => SubGoalKind::DescendTo,
            SubGoal::Search(_) => SubGoalKind::Search,
            SubGoal::Hover { .. } => SubGoalKind::Hover,
            SubGoal::Land => SubGoalKind::Land,
            SubGoal::LandAt(_) => SubGoalKind::LandAt,
        }
    }

    pub fn target(&self) -> Option<&ObjectRef> {
        match self {
            SubGoal::NavigateTo(r)
            | SubGoal::FlyOver(r)
            | SubGoal::Search(r)
            | SubGoal::LandAt(r) => Some(r),
            _ => None,
        }
    }

    pub fn target_mut(&mut self) -> Option<&mut ObjectRef> {
        match self {
            SubGoal::NavigateTo(r)
            | SubGoal::FlyOver(r)
            | SubGoal::Search(r)
            | SubGoal::LandAt(r) => Some(r),
            _ => None,
        }
    }

    /// Action kinds the planner may need to realize this sub-goal.
    pub fn required_actions(&self) -> &'static [ActionKind] {
        match self {
            SubGoal::Takeoff { .. } => &[ActionKind::Takeoff],
            SubGoal::NavigateTo(_) | SubGoal::FlyOver(_) => NAVIGATION,
            SubGoal::Search(_) => &[ActionKind::TurnLeft, ActionKind::Ascend],
            SubGoal::AscendTo { .. } => &[ActionKind::Ascend],
            SubGoal::DescendTo { .. } => &[ActionKind::Descend],
            SubGoal::Hover { .. } => &[ActionKind::Hover],
            SubGoal::Land => &[ActionKind::Land],
            SubGoal::LandAt(_) => LANDING_NAVIGATION,
        }
    }

    fn check(&self) -> Result<(), String> {
        match self {
            SubGoal::Takeoff { alt } | SubGoal::AscendTo { alt } | SubGoal::DescendTo { alt } => {
                positive(*alt, self.kind())
            }
            SubGoal::Hover { seconds } => positive(*seconds, self.kind()),
            SubGoal::Land => Ok(()),
            SubGoal::NavigateTo(r)
            | SubGoal::FlyOver(r)
            | SubGoal::Search(r)
            | SubGoal::LandAt(r) => r.check(),
        }
    }
}

fn positive(v: f64, kind: SubGoalKind) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!(
            "{} parameter must be positive, got {v}",
            kind.as_str()
        ))
    }
}

impl fmt::Display for SubGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind().as_str();
        match self {
            SubGoal::Takeoff { alt } | SubGoal::AscendTo { alt } | SubGoal::DescendTo { alt } => {
                write!(f, "{kind}({alt} m)")
            }
            SubGoal::Hover { seconds } => write!(f, "{kind}({seconds} s)"),
            SubGoal::Land => f.write_str(kind),
            SubGoal::NavigateTo(r)
            | SubGoal::FlyOver(r)
            | SubGoal::Search(r)
            | SubGoal::LandAt(r) => {
                write!(f, "{kind}({r})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    ReferenceParser,
    ExternalLlm,
}

/// Ordered sub-goal decomposition of one instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubGoalPlan {
    pub subgoals: Vec<SubGoal>,
    pub source: PlanSource,
}

impl SubGoalPlan {
    /// Checks every structural invariant. Plans are validated for a drone that
    /// starts landed when `starts_landed` is set.
    pub fn check(&self, starts_landed: bool) -> Result<(), String> {
        if self.subgoals.is_empty() {
            return Err("plan has no sub-goals".into());
        }
        for sg in &self.subgoals {
            sg.check()?;
        }
        let last = self.subgoals.len() - 1;
        for (i, sg) in self.subgoals.iter().enumerate() {
            if sg.kind().is_landing() && i != last {
                return Err(format!(
                    "{} at position {i} is not the final sub-goal",
                    sg.kind().as_str()
                ));
            }
        }
        if starts_landed && self.subgoals[0].kind() != SubGoalKind::Takeoff {
            return Err("drone starts landed but the plan does not begin with TAKEOFF".into());
        }
        Ok(())
    }

    /// First action kind required by the plan that is missing from `action_space`.
    pub fn missing_action(&self, action_space: &[ActionKind]) -> Option<ActionKind> {
        self.subgoals
            .iter()
            .flat_map(|sg| sg.required_actions().iter().copied())
            .find(|k| !action_space.contains(k))
    }

    /// Prepends a default TAKEOFF when a landed drone would otherwise start
    /// with a motion sub-goal.
    pub fn repair_takeoff(&mut self, starts_landed: bool) {
        let needs = self
            .subgoals
            .first()
            .is_none_or(|sg| sg.kind() != SubGoalKind::Takeoff);
        if starts_landed && needs {
            self.subgoals.insert(
                0,
                SubGoal::Takeoff {
                    alt: DEFAULT_TAKEOFF_ALT,
                },
            );
        }
    }
}

impl fmt::Display for SubGoalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, sg) in self.subgoals.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{sg}")?;
        }
        Ok(())
    }
}
