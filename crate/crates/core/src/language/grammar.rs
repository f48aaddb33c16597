//! Reference instruction grammar.
//!
//! An instruction is lowercased, split into clauses on the connectives
//! `,`, `then`, `and then` and `after that`, and each clause is matched
//! against a table of verb templates (longest phrase wins). Noun phrases are
//! `[attribute]* label [relation anchor]`; articles are dropped.

use super::types::{
    Instruction, ObjectRef, PlanSource, RelationKind, SubGoal, SubGoalKind, SubGoalPlan,
    DEFAULT_HOVER_SECONDS, DEFAULT_TAKEOFF_ALT,
};
use crate::world::ActionKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("instruction is empty")]
    Empty,
    #[error("cannot parse clause {0:?}")]
    UnparsableClause(String),
    #[error("sub-goal requires action {0}, which is not in the action space")]
    UnknownAction(ActionKind),
    #[error("clause {0:?} lands before the end of the mission")]
    LandNotLast(String),
}

/// Verb phrase synonyms, normalized to a sub-goal kind.
const VERBS: &[(&str, SubGoalKind)] = &[
    ("take off", SubGoalKind::Takeoff),
    ("takeoff", SubGoalKind::Takeoff),
    ("lift off", SubGoalKind::Takeoff),
    ("launch", SubGoalKind::Takeoff),
    ("fly to", SubGoalKind::NavigateTo),
    ("go to", SubGoalKind::NavigateTo),
    ("navigate to", SubGoalKind::NavigateTo),
    ("move to", SubGoalKind::NavigateTo),
    ("head to", SubGoalKind::NavigateTo),
    ("travel to", SubGoalKind::NavigateTo),
    ("proceed to", SubGoalKind::NavigateTo),
    ("fly toward", SubGoalKind::NavigateTo),
    ("fly towards", SubGoalKind::NavigateTo),
    ("head toward", SubGoalKind::NavigateTo),
    ("head towards", SubGoalKind::NavigateTo),
    ("approach", SubGoalKind::NavigateTo),
    ("reach", SubGoalKind::NavigateTo),
    ("fly over", SubGoalKind::FlyOver),
    ("fly above", SubGoalKind::FlyOver),
    ("pass over", SubGoalKind::FlyOver),
    ("hover over", SubGoalKind::FlyOver),
    ("search for", SubGoalKind::Search),
    ("look for", SubGoalKind::Search),
    ("scan for", SubGoalKind::Search),
    ("find", SubGoalKind::Search),
    ("locate", SubGoalKind::Search),
    ("hover", SubGoalKind::Hover),
    ("wait", SubGoalKind::Hover),
    ("hold position", SubGoalKind::Hover),
    ("climb to", SubGoalKind::AscendTo),
    ("ascend to", SubGoalKind::AscendTo),
    ("rise to", SubGoalKind::AscendTo),
    ("go up to", SubGoalKind::AscendTo),
    ("fly up to", SubGoalKind::AscendTo),
    ("descend to", SubGoalKind::DescendTo),
    ("drop to", SubGoalKind::DescendTo),
    ("go down to", SubGoalKind::DescendTo),
    ("fly down to", SubGoalKind::DescendTo),
    ("lower to", SubGoalKind::DescendTo),
    ("land", SubGoalKind::Land),
    ("touch down", SubGoalKind::Land),
];

const RELATIONS: &[(&str, RelationKind)] = &[
    ("to the left of", RelationKind::LeftOf),
    ("to the right of", RelationKind::RightOf),
    ("left of", RelationKind::LeftOf),
    ("right of", RelationKind::RightOf),
    ("in front of", RelationKind::InFrontOf),
    ("behind", RelationKind::Behind),
    ("next to", RelationKind::Near),
    ("close to", RelationKind::Near),
    ("beside", RelationKind::Near),
    ("near", RelationKind::Near),
];

/// Two-word labels kept together as one noun.
pub const COMPOUND_LABELS: &[&str] = &[
    "fire hydrant",
    "stop sign",
    "traffic light",
    "parking meter",
    "potted plant",
    "dining table",
    "cell phone",
    "trash can",
    "water tower",
    "loading dock",
    "filing cabinet",
    "street lamp",
    "picnic table",
    "teddy bear",
];

const ARTICLES: &[&str] = &["the", "a", "an", "that", "this"];
const CONNECTIVES: &[&str] = &["and then", "after that", "then"];
const LEADING_FILLERS: &[&str] = &[
    "and then",
    "after that",
    "then",
    "and",
    "finally",
    "next",
    "please",
    "now",
];

fn normalize(text: &str) -> String {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .map(|c| match c {
            ';' | ':' => ',',
            '!' | '?' => ' ',
            c if c.is_alphanumeric() || c == ',' || c == '.' || c == '-' || c == '\'' => c,
            _ => ' ',
        })
        .collect();
    // drop sentence periods, keep decimal points
    let chars: Vec<char> = lowered.chars().collect();
    let cleaned: String = chars
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let decimal = c == '.'
                && i > 0
                && chars[i - 1].is_ascii_digit()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
            if c == '.' && !decimal {
                ','
            } else {
                c
            }
        })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn split_clauses(text: &str) -> Vec<String> {
    let mut clauses = Vec::new();
    for piece in text.split(',') {
        let words: Vec<&str> = piece.split_whitespace().collect();
        let mut current: Vec<&str> = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let hit = CONNECTIVES.iter().find_map(|c| {
                let cw: Vec<&str> = c.split(' ').collect();
                (words[i..].starts_with(&cw)).then_some(cw.len())
            });
            match hit {
                Some(n) => {
                    if !current.is_empty() {
                        clauses.push(current.join(" "));
                        current.clear();
                    }
                    i += n;
                }
                None => {
                    current.push(words[i]);
                    i += 1;
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current.join(" "));
        }
    }
    clauses
        .into_iter()
        .map(|c| strip_fillers(&c))
        .filter(|c| !c.is_empty())
        .collect()
}

fn strip_fillers(clause: &str) -> String {
    let mut rest = clause.trim();
    loop {
        let next = LEADING_FILLERS
            .iter()
            .find_map(|f| strip_phrase(rest, f))
            .or_else(|| rest.strip_suffix(" please").map(str::trim));
        match next {
            Some(r) if r != rest => rest = r,
            _ => break,
        }
    }
    rest.to_string()
}

/// Strips `phrase` from the front of `text` at a word boundary.
fn strip_phrase<'a>(text: &'a str, phrase: &str) -> Option<&'a str> {
    if text == phrase {
        Some("")
    } else {
        text.strip_prefix(phrase)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::trim)
    }
}

fn match_verb(clause: &str) -> Option<(SubGoalKind, &str)> {
    VERBS
        .iter()
        .filter_map(|(phrase, kind)| {
            strip_phrase(clause, phrase).map(|rest| (phrase.len(), *kind, rest))
        })
        .max_by_key(|(len, _, _)| *len)
        .map(|(_, kind, rest)| (kind, rest))
}

fn parse_number(word: &str) -> Option<f64> {
    const WORDS: &[&str] = &[
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve",
    ];
    if let Some(i) = WORDS.iter().position(|w| *w == word) {
        return Some(i as f64);
    }
    let trimmed = word
        .trim_end_matches("meters")
        .trim_end_matches("metres")
        .trim_end_matches('m')
        .trim_end_matches('s');
    trimmed.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `[to] [an altitude of] N [unit]` with unit drawn from `units`.
fn parse_quantity(rest: &str, units: &[&str]) -> Option<f64> {
    let mut words: Vec<&str> = rest.split_whitespace().collect();
    for lead in [
        &["to"][..],
        &["an", "altitude", "of"],
        &["a", "height", "of"],
        &["altitude"],
        &["for"],
    ] {
        if words.starts_with(lead) {
            words.drain(..lead.len());
        }
    }
    match words.as_slice() {
        [n] => parse_number(n),
        [n, unit] if units.contains(unit) => parse_number(n),
        _ => None,
    }
}

const METERS: &[&str] = &["m", "meter", "meters", "metre", "metres"];
const SECONDS: &[&str] = &["s", "sec", "secs", "second", "seconds"];

fn parse_simple_np(words: &[&str]) -> Option<ObjectRef> {
    let words: Vec<&str> = words
        .iter()
        .copied()
        .filter(|w| !ARTICLES.contains(w))
        .collect();
    if words.is_empty() {
        return None;
    }
    let valid_word = |w: &&str| {
        w.chars()
            .all(|c| c.is_alphabetic() || c == '-' || c == '\'')
    };
    if !words.iter().all(valid_word) {
        return None;
    }
    let n = words.len();
    let (label, attrs) = if n >= 2
        && COMPOUND_LABELS.contains(&format!("{} {}", words[n - 2], words[n - 1]).as_str())
    {
        (
            format!("{} {}", words[n - 2], words[n - 1]),
            &words[..n - 2],
        )
    } else {
        (words[n - 1].to_string(), &words[..n - 1])
    };
    Some(ObjectRef::new(label).with_attributes(attrs.iter().copied()))
}

fn find_relation(words: &[&str]) -> Option<(usize, usize, RelationKind)> {
    (0..words.len()).find_map(|i| {
        RELATIONS.iter().find_map(|(phrase, kind)| {
            let pw: Vec<&str> = phrase.split(' ').collect();
            words[i..].starts_with(&pw).then_some((i, pw.len(), *kind))
        })
    })
}

/// Parses `[attribute]* label [relation anchor]`.
pub fn parse_object_ref(text: &str) -> Option<ObjectRef> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match find_relation(&words) {
        None => parse_simple_np(&words),
        Some((at, len, kind)) => {
            let anchor_words = &words[at + len..];
            if find_relation(anchor_words).is_some() {
                return None;
            }
            let head = parse_simple_np(&words[..at])?;
            let anchor = parse_simple_np(anchor_words)?;
            Some(head.related(kind, anchor))
        }
    }
}

fn parse_clause(clause: &str) -> Option<SubGoal> {
    let (kind, rest) = match_verb(clause)?;
    let object = || parse_object_ref(rest);
    Some(match kind {
        SubGoalKind::Takeoff => SubGoal::Takeoff {
            alt: if rest.is_empty() {
                DEFAULT_TAKEOFF_ALT
            } else {
                parse_quantity(rest, METERS).filter(|v| *v > 0.0)?
            },
        },
        SubGoalKind::Hover => SubGoal::Hover {
            seconds: if rest.is_empty() {
                DEFAULT_HOVER_SECONDS
            } else {
                parse_quantity(rest, SECONDS).filter(|v| *v > 0.0)?
            },
        },
        SubGoalKind::AscendTo => SubGoal::AscendTo {
            alt: parse_quantity(rest, METERS).filter(|v| *v > 0.0)?,
        },
        SubGoalKind::DescendTo => SubGoal::DescendTo {
            alt: parse_quantity(rest, METERS).filter(|v| *v > 0.0)?,
        },
        SubGoalKind::NavigateTo => SubGoal::NavigateTo(object()?),
        SubGoalKind::FlyOver => SubGoal::FlyOver(object()?),
        SubGoalKind::Search => SubGoal::Search(object()?),
        SubGoalKind::Land | SubGoalKind::LandAt => {
            if rest.is_empty() {
                SubGoal::Land
            } else {
                let target = strip_phrase(rest, "on")
                    .or_else(|| strip_phrase(rest, "at"))
                    .or_else(|| strip_phrase(rest, "on top of"))?;
                SubGoal::LandAt(parse_object_ref(target)?)
            }
        }
    })
}

/// Decomposes `instr` into sub-goals with the reference grammar. The drone is
/// assumed to start landed, so a TAKEOFF is prepended when missing.
pub fn parse_instruction(
    instr: &Instruction,
    action_space: &[ActionKind],
) -> Result<SubGoalPlan, ParseError> {
    let clauses = split_clauses(&normalize(instr.as_str()));
    if clauses.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut subgoals = Vec::with_capacity(clauses.len() + 1);
    let last = clauses.len() - 1;
    for (i, clause) in clauses.iter().enumerate() {
        let sg =
            parse_clause(clause).ok_or_else(|| ParseError::UnparsableClause(clause.clone()))?;
        if sg.kind().is_landing() && i != last {
            return Err(ParseError::LandNotLast(clause.clone()));
        }
        subgoals.push(sg);
    }
    let mut plan = SubGoalPlan {
        subgoals,
        source: PlanSource::ReferenceParser,
    };
    plan.repair_takeoff(true);
    if let Some(kind) = plan.missing_action(action_space) {
        return Err(ParseError::UnknownAction(kind));
    }
    debug_assert!(plan.check(true).is_ok());
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<SubGoal>, ParseError> {
        parse_instruction(&Instruction::new(text).unwrap(), &ActionKind::ALL).map(|p| p.subgoals)
    }

    #[test]
    fn take_off_fly_land() {
        assert_eq!(
            parse("take off, fly to the red car, then land").unwrap(),
            vec![
                SubGoal::Takeoff { alt: 2.0 },
                SubGoal::NavigateTo(ObjectRef::new("car").with_attributes(["red"])),
                SubGoal::Land,
            ]
        );
    }

    #[test]
    fn hover_gets_takeoff() {
        assert_eq!(
            parse("hover").unwrap(),
            vec![
                SubGoal::Takeoff { alt: 2.0 },
                SubGoal::Hover { seconds: 3.0 }
            ]
        );
    }

    #[test]
    fn relation_anchor() {
        assert_eq!(
            parse("fly to the chair near the desk").unwrap(),
            vec![
                SubGoal::Takeoff { alt: 2.0 },
                SubGoal::NavigateTo(
                    ObjectRef::new("chair").related(RelationKind::Near, ObjectRef::new("desk"))
                ),
            ]
        );
    }

    #[test]
    fn gibberish_fails() {
        assert_eq!(
            parse("do a barrel roll"),
            Err(ParseError::UnparsableClause("do a barrel roll".into()))
        );
        assert_eq!(
            parse("take off, do a barrel roll"),
            Err(ParseError::UnparsableClause("do a barrel roll".into()))
        );
        assert_eq!(parse("  ,, "), Err(ParseError::Empty));
    }

    #[test]
    fn quantities() {
        assert_eq!(
            parse("take off to 3 meters. climb to 5.5 m, hover for 10 seconds, descend to two")
                .unwrap(),
            vec![
                SubGoal::Takeoff { alt: 3.0 },
                SubGoal::AscendTo { alt: 5.5 },
                SubGoal::Hover { seconds: 10.0 },
                SubGoal::DescendTo { alt: 2.0 },
            ]
        );
        assert!(parse("climb to the moon").is_err());
        assert!(parse("climb to 0 m").is_err());
    }

    #[test]
    fn landing_only_last() {
        assert_eq!(
            parse("land, then fly to the tree"),
            Err(ParseError::LandNotLast("land".into()))
        );
        assert_eq!(
            parse("fly over the fountain and then land on the blue bench").unwrap()[2],
            SubGoal::LandAt(ObjectRef::new("bench").with_attributes(["blue"]))
        );
    }

    #[test]
    fn action_space_gate() {
        let no_land: Vec<ActionKind> = ActionKind::ALL
            .into_iter()
            .filter(|k| *k != ActionKind::Land)
            .collect();
        let r = parse_instruction(&Instruction::new("take off then land").unwrap(), &no_land);
        assert_eq!(r, Err(ParseError::UnknownAction(ActionKind::Land)));
    }

    #[test]
    fn compound_labels_and_nesting() {
        assert_eq!(
            parse("find the yellow fire hydrant").unwrap()[1],
            SubGoal::Search(ObjectRef::new("fire hydrant").with_attributes(["yellow"]))
        );
        assert!(parse("fly to the cup near the desk near the door").is_err());
    }
}
