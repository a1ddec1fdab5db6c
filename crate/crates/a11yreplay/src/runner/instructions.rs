//! Natural-language test instruction parsing.
//!
//! Instructions are plain text: a colon-delimited title line (platform,
//! app, feature, goal in varying combinations), optional numbered step
//! lines, an optional "Expected Results:" block, and an optional
//! "Difficulty:" line. Parsing is rules-first with a single LLM fallback
//! call when the rules cannot identify the feature, so offline runs never
//! need a live model.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::Agents;

/// The accessibility feature a test exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    VoiceOver,
    DynamicType,
    BoldText,
    ButtonShapes,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::VoiceOver,
        Feature::DynamicType,
        Feature::BoldText,
        Feature::ButtonShapes,
    ];

    /// Synonyms recognized in titles, longest first so multiword names win.
    fn synonyms(self) -> &'static [&'static str] {
        match self {
            Feature::VoiceOver => &["voiceover", "voice over", "screen reader", "vo"],
            Feature::DynamicType => &[
                "dynamic type",
                "dynamic text",
                "large text",
                "larger text",
                "text size",
                "dt",
            ],
            Feature::BoldText => &["bold text", "bt"],
            Feature::ButtonShapes => &["button shapes", "button shape", "bs"],
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Feature::VoiceOver => "VoiceOver",
            Feature::DynamicType => "DynamicType",
            Feature::BoldText => "BoldText",
            Feature::ButtonShapes => "ButtonShapes",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Feature {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_lowercase();
        match lower.as_str() {
            "voiceover" => Ok(Feature::VoiceOver),
            "dynamictype" | "dynamic_type" => Ok(Feature::DynamicType),
            "boldtext" | "bold_text" => Ok(Feature::BoldText),
            "buttonshapes" | "button_shapes" => Ok(Feature::ButtonShapes),
            _ => Feature::ALL
                .into_iter()
                .find(|f| f.synonyms().iter().any(|syn| *syn == lower))
                .ok_or(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Hard,
}

/// A parsed test instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub title: String,
    pub app_name: String,
    pub feature: Feature,
    /// Navigation goal distilled from the title.
    pub goal: String,
    #[serde(default)]
    pub steps: Vec<String>,
    #[serde(default)]
    pub expected_results: Option<String>,
    #[serde(default)]
    pub difficulty: Option<Difficulty>,
}

impl TestSpec {
    /// The full navigation brief handed to the planner: goal plus any
    /// enumerated steps and expected results.
    pub fn navigation_goal(&self) -> String {
        let mut parts = vec![self.goal.clone()];
        if !self.steps.is_empty() {
            parts.push(format!("Steps: {}", self.steps.join(" | ")));
        }
        if let Some(expected) = &self.expected_results {
            parts.push(format!("Expected results: {expected}"));
        }
        parts.join("\n")
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("instruction text is empty")]
    Empty,
    #[error(
        "could not recognize the accessibility feature; supported: VoiceOver, DynamicType, \
         BoldText, ButtonShapes"
    )]
    FeatureUnrecognized,
    #[error("instruction fallback failed: {0}")]
    Fallback(String),
}

const PLATFORM_TOKENS: [&str; 5] = ["ios", "ipados", "android", "iphone", "ipad"];
const GOAL_CONNECTIVES: [&str; 4] = ["in", "on", "for", "of"];

/// Finds a feature synonym inside a title segment; returns the feature and
/// the segment with the synonym removed.
fn find_feature(segment: &str) -> Option<(Feature, String)> {
    let lower = segment.to_lowercase();
    for feature in Feature::ALL {
        for syn in feature.synonyms() {
            if syn.len() <= 2 {
                // Short codes must stand alone as a token.
                let is_token = lower
                    .split(|c: char| !c.is_alphanumeric())
                    .any(|tok| tok == *syn);
                if is_token {
                    let remainder = segment
                        .split_whitespace()
                        .filter(|w| w.to_lowercase() != *syn)
                        .collect::<Vec<_>>()
                        .join(" ");
                    return Some((feature, remainder));
                }
            } else if let Some(pos) = lower.find(syn) {
                let mut remainder = String::new();
                remainder.push_str(&segment[..pos]);
                remainder.push_str(&segment[pos + syn.len()..]);
                return Some((feature, remainder.trim().to_owned()));
            }
        }
    }
    None
}

fn strip_leading_connective(goal: &str) -> &str {
    let trimmed = goal.trim();
    for word in GOAL_CONNECTIVES {
        if let Some(rest) = trimmed.strip_prefix(word) {
            if rest.starts_with(char::is_whitespace) {
                return rest.trim_start();
            }
        }
        let title_cased = format!(
            "{}{}",
            word[..1].to_uppercase(),
            &word[1..]
        );
        if let Some(rest) = trimmed.strip_prefix(&title_cased) {
            if rest.starts_with(char::is_whitespace) {
                return rest.trim_start();
            }
        }
    }
    trimmed
}

fn parse_title(title: &str) -> Option<(String, Feature, String)> {
    let segments: Vec<&str> = title.split(':').map(str::trim).collect();
    let mut app_parts: Vec<&str> = Vec::new();
    let mut feature: Option<Feature> = None;
    let mut goal_parts: Vec<String> = Vec::new();

    for segment in segments {
        if segment.is_empty() {
            continue;
        }
        if feature.is_none() && PLATFORM_TOKENS.contains(&segment.to_lowercase().as_str()) {
            continue;
        }
        if feature.is_none() {
            if let Some((found, remainder)) = find_feature(segment) {
                feature = Some(found);
                let goal_piece = strip_leading_connective(&remainder);
                if !goal_piece.is_empty() {
                    goal_parts.push(goal_piece.to_owned());
                }
                continue;
            }
            app_parts.push(segment);
        } else {
            goal_parts.push(segment.to_owned());
        }
    }

    let feature = feature?;
    let app_name = app_parts.join(": ");
    let mut goal = goal_parts.join(": ");
    if goal.is_empty() {
        goal = title.trim().to_owned();
    }
    Some((app_name, feature, goal))
}

fn step_line(line: &str) -> Option<String> {
    let trimmed = line.trim();
    let after_number = trimmed
        .strip_prefix(|c: char| c.is_ascii_digit())
        .map(|rest| rest.trim_start_matches(|c: char| c.is_ascii_digit()))
        .and_then(|rest| rest.strip_prefix(['.', ')', ':']));
    if let Some(step) = after_number {
        return Some(step.trim().to_owned());
    }
    trimmed
        .strip_prefix("- ")
        .or_else(|| trimmed.strip_prefix("* "))
        .map(|s| s.trim().to_owned())
}

/// Rule-based parse; fails only when no feature can be recognized.
pub fn parse_instructions_rules(raw: &str) -> Result<TestSpec, SpecError> {
    let mut lines = raw.lines().map(str::trim).filter(|l| !l.is_empty());
    let title = lines.next().ok_or(SpecError::Empty)?.to_owned();

    let mut steps = Vec::new();
    let mut expected: Option<String> = None;
    let mut difficulty = None;
    let mut in_expected = false;
    for line in lines {
        let lower = line.to_lowercase();
        if let Some(rest) = lower
            .starts_with("expected results")
            .then(|| line.splitn(2, ':').nth(1).unwrap_or("").trim())
        {
            expected = Some(rest.to_owned());
            in_expected = true;
            continue;
        }
        if let Some(rest) = lower
            .starts_with("difficulty")
            .then(|| line.splitn(2, ':').nth(1).unwrap_or("").trim())
        {
            difficulty = match rest.to_lowercase().as_str() {
                "easy" => Some(Difficulty::Easy),
                "hard" => Some(Difficulty::Hard),
                _ => None,
            };
            in_expected = false;
            continue;
        }
        if let Some(step) = step_line(line) {
            steps.push(step);
            in_expected = false;
        } else if in_expected {
            let current = expected.get_or_insert_with(String::new);
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(line);
        }
    }
    let expected = expected.filter(|e| !e.is_empty());

    let (app_name, feature, goal) =
        parse_title(&title).ok_or(SpecError::FeatureUnrecognized)?;
    Ok(TestSpec {
        title,
        app_name,
        feature,
        goal,
        steps,
        expected_results: expected,
        difficulty,
    })
}

/// Parses instructions, falling back to one LLM extraction call when the
/// rules fail and an agent frontend is available.
pub fn parse_instructions(
    raw: &str,
    agents: Option<&mut Agents>,
) -> Result<TestSpec, SpecError> {
    if raw.trim().is_empty() {
        return Err(SpecError::Empty);
    }
    match parse_instructions_rules(raw) {
        Ok(spec) => Ok(spec),
        Err(SpecError::FeatureUnrecognized) => {
            let Some(agents) = agents else {
                return Err(SpecError::FeatureUnrecognized);
            };
            let extracted = agents
                .extract_instruction_fields(raw)
                .map_err(|e| SpecError::Fallback(e.to_string()))?;
            let feature: Feature = extracted
                .feature
                .parse()
                .map_err(|_| SpecError::FeatureUnrecognized)?;
            let title = raw.lines().next().unwrap_or("").trim().to_owned();
            Ok(TestSpec {
                title: title.clone(),
                app_name: extracted.app_name,
                feature,
                goal: if extracted.goal.is_empty() { title } else { extracted.goal },
                steps: Vec::new(),
                expected_results: None,
                difficulty: None,
            })
        }
        Err(other) => Err(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ScriptedClient;
    use std::sync::Arc;

    #[test]
    fn colon_delimited_title_with_explicit_feature_segment() {
        let spec = parse_instructions_rules("iOS: Media App: VoiceOver: Share an Episode").unwrap();
        assert_eq!(spec.app_name, "Media App");
        assert_eq!(spec.feature, Feature::VoiceOver);
        assert_eq!(spec.goal, "Share an Episode");
    }

    #[test]
    fn feature_embedded_in_a_segment() {
        let spec = parse_instructions_rules("iOS: Large Text in Following Tab").unwrap();
        assert_eq!(spec.feature, Feature::DynamicType);
        assert_eq!(spec.goal, "Following Tab");
        assert_eq!(spec.app_name, "");
    }

    #[test]
    fn empty_text_is_a_spec_error() {
        assert!(matches!(parse_instructions_rules(""), Err(SpecError::Empty)));
        assert!(matches!(parse_instructions(" \n ", None), Err(SpecError::Empty)));
    }

    #[test]
    fn steps_and_expected_results_blocks() {
        let raw = "iOS: Podcasts: VoiceOver: Share an Episode\n\
                   1. Turn on VoiceOver.\n\
                   2. Search for a show and open an episode.\n\
                   3. Share the episode through Messages.\n\
                   Expected Results: The share sheet opens.\n\
                   Difficulty: Hard";
        let spec = parse_instructions_rules(raw).unwrap();
        assert_eq!(spec.steps.len(), 3);
        assert_eq!(spec.steps[1], "Search for a show and open an episode.");
        assert_eq!(spec.expected_results.as_deref(), Some("The share sheet opens."));
        assert_eq!(spec.difficulty, Some(Difficulty::Hard));
    }

    #[test]
    fn short_codes_only_match_as_tokens() {
        let spec = parse_instructions_rules("iOS: Notes: VO: Check order").unwrap();
        assert_eq!(spec.feature, Feature::VoiceOver);
        // "voting" must not trip the "vo" short code.
        assert!(parse_instructions_rules("iOS: Voting App Tour").is_err());
    }

    #[test]
    fn bold_text_and_button_shapes_synonyms() {
        assert_eq!(
            parse_instructions_rules("iOS: Reader: Bold Text in Library").unwrap().feature,
            Feature::BoldText
        );
        assert_eq!(
            parse_instructions_rules("iOS: Reader: Button Shapes across app").unwrap().feature,
            Feature::ButtonShapes
        );
    }

    #[test]
    fn unrecognized_feature_without_fallback_lists_supported() {
        let err = parse_instructions("iOS: Mystery Setting: Home", None).unwrap_err();
        let msg = err.to_string();
        for name in ["VoiceOver", "DynamicType", "BoldText", "ButtonShapes"] {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn llm_fallback_fills_the_fields() {
        let response = r#"{"app_name": "Clock", "feature": "DynamicType", "goal": "Alarm tab"}"#;
        let mut agents = Agents::new(Arc::new(ScriptedClient::fifo_responses(vec![response])));
        let spec =
            parse_instructions("Make the alarm list text bigger in Clock", Some(&mut agents))
                .unwrap();
        assert_eq!(spec.app_name, "Clock");
        assert_eq!(spec.feature, Feature::DynamicType);
        assert_eq!(spec.goal, "Alarm tab");
    }
}
