//! Structured text prompts describing a prediction instance.
//!
//! Two lane encodings are supported: four cubic Bézier control points per
//! lane, or the lane resampled at a fixed spacing. The layout is canonical
//! and byte-stable so prompts can be golden-file tested:
//!
//! * sections are separated by one blank line, rows end with `\n`;
//! * table columns are separated by a single tab;
//! * coordinates and kinematics are rounded half away from zero to two
//!   decimals, then trailing zeros and a trailing point are dropped
//!   (`-8.80` prints as `-8.8`, `3.00` as `3`);
//! * history time offsets always print with one decimal (`-2.0`);
//! * the text ends with `"Predicted trajectory number: "` and no newline.
//!
//! The discretized variant's wording is this crate's own choice; only the
//! Bézier variant has a published reference layout.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bezier::fit_lane;
use crate::error::{Error, Result};
use crate::scene::{resample_polyline, Lane, Point2, PredictionInstance};
use crate::tokenizer::TokenCounter;

pub const DEFAULT_MAX_TOKENS: usize = 512;

const PREAMBLE: &str = "You are an expert self-driving-car model, that can predict the future \
trajectory for a given vehicle, while also incorporating its current and past states, its current \
and possible future lanes and also information about other vehicles, pedestrians, drivable areas \
and other important sets of features.";

const TASK: &str = "Please predict the future trajectory for the given vehicle for the next 6 \
seconds, from a set number of fixed trajectories.";

const FRAME_SENTENCE: &str = "The 2D coordinate system (x,y) is from the prediction vehicle’s own frame of view.";

const BEZIER_SENTENCE: &str = "Lane information is encoded as the 4 control points of a cubic \
Bezier curve. The first and last control point match with the beginning and end of the lane.";

const FINAL_LINE: &str = "Predicted trajectory number: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptVariant {
    Bezier,
    Discretized,
}

impl PromptVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::Bezier => "bezier",
            PromptVariant::Discretized => "discretized",
        }
    }
}

impl std::str::FromStr for PromptVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bezier" => Ok(PromptVariant::Bezier),
            "discretized" => Ok(PromptVariant::Discretized),
            other => Err(Error::invalid(format!("unknown prompt variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub variant: PromptVariant,
    pub max_tokens: usize,
    /// Lane sample spacing of the discretized variant, meters.
    pub discretization_spacing: f64,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig { variant: PromptVariant::Bezier, max_tokens: DEFAULT_MAX_TOKENS, discretization_spacing: 1.0 }
    }
}

impl PromptConfig {
    pub fn with_variant(variant: PromptVariant) -> Self {
        PromptConfig { variant, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_tokens == 0 {
            return Err(Error::invalid("max_tokens must be positive"));
        }
        if !(self.discretization_spacing > 0.0 && self.discretization_spacing.is_finite()) {
            return Err(Error::invalid("discretization spacing must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub token_count: usize,
    pub truncated: bool,
}

/// Rounds half away from zero to two decimals and drops trailing zeros.
pub fn format_number(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    let mut s = format!("{rounded:.2}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn format_time(value: f64) -> String {
    let s = format!("{value:.1}");
    if s == "-0.0" {
        "0.0".to_string()
    } else {
        s
    }
}

fn lane_sentence(config: &PromptConfig) -> String {
    match config.variant {
        PromptVariant::Bezier => BEZIER_SENTENCE.to_string(),
        PromptVariant::Discretized => {
            let spacing = config.discretization_spacing;
            let unit = if spacing == 1.0 { "meter" } else { "meters" };
            format!(
                "Lane information is given as (x,y) points sampled every {} {unit} along the lane.",
                format_number(spacing)
            )
        }
    }
}

fn lane_rows(lane: &Lane, config: &PromptConfig) -> Result<Vec<Point2>> {
    match config.variant {
        PromptVariant::Bezier => Ok(fit_lane(lane.polyline())?.control_points().to_vec()),
        PromptVariant::Discretized => resample_polyline(lane.polyline(), config.discretization_spacing),
    }
}

fn push_lane_block(out: &mut String, title: &str, rows: &[Point2], config: &PromptConfig) {
    let label = match config.variant {
        PromptVariant::Bezier => "Bezier curve",
        PromptVariant::Discretized => "sampled points",
    };
    let _ = writeln!(out, "{title} ({label}, as explained above):");
    out.push_str("x[m]\ty[m]\n");
    for p in rows {
        let _ = writeln!(out, "{}\t{}", format_number(p.x), format_number(p.y));
    }
    out.push('\n');
}

/// The full prompt text before any truncation.
pub fn prompt_text(instance: &PredictionInstance, config: &PromptConfig) -> Result<String> {
    config.validate()?;
    let agent = &instance.agent;
    let mut out = String::with_capacity(2048);
    let _ = write!(
        out,
        "{PREAMBLE}\n\nTask:\n{TASK}\n\nContext Information:\n{FRAME_SENTENCE}\n{}\n\n",
        lane_sentence(config)
    );

    out.push_str("Prediction Vehicle:\n");
    let _ = writeln!(out, "Category: {}", agent.category);
    let _ = writeln!(out, "Current Speed: {}[m/s]", format_number(agent.speed));
    let _ = writeln!(out, "Current Acceleration: {}[m/s²]", format_number(agent.acceleration));
    let _ = writeln!(out, "Current Yaw rate: {}[2π/s]", format_number(agent.yaw_rate));
    out.push_str("Past (x,y) positions in meters, sampled at 2 Hertz:\n");
    out.push_str("Time[s]\tx[m]\ty[m]\n");
    for h in &instance.history {
        let _ =
            writeln!(out, "{}\t{}\t{}", format_time(h.time), format_number(h.position.x), format_number(h.position.y));
    }
    out.push('\n');

    if let Some(lane) = &instance.current_lane {
        let rows = lane_rows(lane, config)?;
        push_lane_block(&mut out, "Current Lane Information", &rows, config);
    }
    for lane in &instance.outgoing_lanes {
        let rows = lane_rows(lane, config)?;
        push_lane_block(&mut out, "Possible Outgoing Lane Information", &rows, config);
    }

    out.push_str(FINAL_LINE);
    Ok(out)
}

/// Renders the prompt, then counts and truncates it against `config.max_tokens`.
pub fn render_prompt(
    instance: &PredictionInstance,
    config: &PromptConfig,
    tokenizer: &dyn TokenCounter,
) -> Result<RenderedPrompt> {
    let full = prompt_text(instance, config).map_err(|e| e.for_instance(&instance.instance_id))?;
    let (text, truncated) = truncate(&full, config.max_tokens, tokenizer)?;
    let token_count = count_tokens(&text, tokenizer);
    Ok(RenderedPrompt { text, token_count, truncated })
}

pub fn count_tokens(text: &str, tokenizer: &dyn TokenCounter) -> usize {
    tokenizer.count(text)
}

/// Keeps the longest token-aligned prefix with at most `max_tokens` tokens.
pub fn truncate(text: &str, max_tokens: usize, tokenizer: &dyn TokenCounter) -> Result<(String, bool)> {
    if max_tokens == 0 {
        return Err(Error::invalid("max_tokens must be positive"));
    }
    let spans = tokenizer.token_spans(text);
    if spans.len() <= max_tokens {
        return Ok((text.to_string(), false));
    }
    Ok((text[..spans[max_tokens - 1].end].to_string(), true))
}
