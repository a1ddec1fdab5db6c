//! Device-side state: accessibility features, the VoiceOver cursor, and
//! per-session bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Speaking rate applied when VoiceOver is enabled, tuned so sped-up
/// exports stay intelligible.
pub const VOICEOVER_SPEAKING_RATE: f64 = 0.25;

/// System-wide Dynamic Type size. `Off` is the baseline; the four named
/// increments grow text progressively.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[allow(clippy::upper_case_acronyms)]
pub enum DynamicTypeSize {
    Off,
    XL,
    XXL,
    XXXL,
    AX1,
}

impl DynamicTypeSize {
    /// The four increments in ascending order (without `Off`).
    pub const INCREMENTS: [DynamicTypeSize; 4] = [
        DynamicTypeSize::XL,
        DynamicTypeSize::XXL,
        DynamicTypeSize::XXXL,
        DynamicTypeSize::AX1,
    ];

    /// The next increment up, or `None` at the top.
    pub fn next(self) -> Option<DynamicTypeSize> {
        match self {
            DynamicTypeSize::Off => Some(DynamicTypeSize::XL),
            DynamicTypeSize::XL => Some(DynamicTypeSize::XXL),
            DynamicTypeSize::XXL => Some(DynamicTypeSize::XXXL),
            DynamicTypeSize::XXXL => Some(DynamicTypeSize::AX1),
            DynamicTypeSize::AX1 => None,
        }
    }

    /// Font scale the renderer applies at this size.
    pub fn font_scale(self) -> f64 {
        match self {
            DynamicTypeSize::Off => 1.0,
            DynamicTypeSize::XL => 1.2,
            DynamicTypeSize::XXL => 1.35,
            DynamicTypeSize::XXXL => 1.55,
            DynamicTypeSize::AX1 => 1.8,
        }
    }
}

impl fmt::Display for DynamicTypeSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DynamicTypeSize::Off => "Off",
            DynamicTypeSize::XL => "XL",
            DynamicTypeSize::XXL => "XXL",
            DynamicTypeSize::XXXL => "XXXL",
            DynamicTypeSize::AX1 => "AX1",
        };
        f.write_str(s)
    }
}

/// Snapshot of the device's accessibility features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessibilityFeatureState {
    pub voiceover_on: bool,
    /// In (0, 1]; set to [`VOICEOVER_SPEAKING_RATE`] when VoiceOver turns on.
    pub speaking_rate: f64,
    /// Caption panel; only ever on while VoiceOver is on.
    pub captions_on: bool,
    pub dynamic_type_size: DynamicTypeSize,
    pub bold_text_on: bool,
    pub button_shapes_on: bool,
}

impl Default for AccessibilityFeatureState {
    fn default() -> Self {
        AccessibilityFeatureState {
            voiceover_on: false,
            speaking_rate: 1.0,
            captions_on: false,
            dynamic_type_size: DynamicTypeSize::Off,
            bold_text_on: false,
            button_shapes_on: false,
        }
    }
}

/// A partial feature change; `None` fields keep their current value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureDelta {
    pub voiceover_on: Option<bool>,
    pub speaking_rate: Option<f64>,
    pub captions_on: Option<bool>,
    pub dynamic_type_size: Option<DynamicTypeSize>,
    pub bold_text_on: Option<bool>,
    pub button_shapes_on: Option<bool>,
}

impl FeatureDelta {
    pub fn voiceover(on: bool) -> Self {
        FeatureDelta {
            voiceover_on: Some(on),
            ..Default::default()
        }
    }

    pub fn dynamic_type(size: DynamicTypeSize) -> Self {
        FeatureDelta {
            dynamic_type_size: Some(size),
            ..Default::default()
        }
    }

    pub fn bold_text(on: bool) -> Self {
        FeatureDelta {
            bold_text_on: Some(on),
            ..Default::default()
        }
    }

    pub fn button_shapes(on: bool) -> Self {
        FeatureDelta {
            button_shapes_on: Some(on),
            ..Default::default()
        }
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(v) = self.voiceover_on {
            parts.push(format!("voiceover={v}"));
        }
        if let Some(v) = self.speaking_rate {
            parts.push(format!("speaking_rate={v}"));
        }
        if let Some(v) = self.captions_on {
            parts.push(format!("captions={v}"));
        }
        if let Some(v) = self.dynamic_type_size {
            parts.push(format!("dynamic_type={v}"));
        }
        if let Some(v) = self.bold_text_on {
            parts.push(format!("bold_text={v}"));
        }
        if let Some(v) = self.button_shapes_on {
            parts.push(format!("button_shapes={v}"));
        }
        parts.join(", ")
    }
}

/// Stable reference to an element definition on a specific screen.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementRef {
    pub screen_id: String,
    pub index: usize,
}

impl ElementRef {
    pub fn new(screen_id: impl Into<String>, index: usize) -> Self {
        ElementRef {
            screen_id: screen_id.into(),
            index,
        }
    }
}

/// Mutable device state for one session.
#[derive(Debug, Clone, Default)]
pub struct DeviceState {
    pub current_app: Option<String>,
    pub current_screen: Option<String>,
    pub scroll_offset: i32,
    pub feature: AccessibilityFeatureState,
    /// Only ever `Some` while VoiceOver is on.
    pub vo_cursor: Option<ElementRef>,
    pub recording: bool,
    /// Index of the text field currently focused (keyboard showing).
    pub focused_field: Option<usize>,
    /// Text typed into fields, keyed by (screen, element index).
    pub field_texts: BTreeMap<(String, usize), String>,
    /// One-shot interrupt transitions that have already fired.
    pub fired_interrupts: BTreeSet<(String, String)>,
}
