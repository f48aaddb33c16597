use std::collections::BTreeSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// The 80 object classes of the common closed-set detection benchmark.
pub const COCO_80: [&str; 80] = [
    "person",
    "bicycle",
    "car",
    "motorcycle",
    "airplane",
    "bus",
    "train",
    "truck",
    "boat",
    "traffic light",
    "fire hydrant",
    "stop sign",
    "parking meter",
    "bench",
    "bird",
    "cat",
    "dog",
    "horse",
    "sheep",
    "cow",
    "elephant",
    "bear",
    "zebra",
    "giraffe",
    "backpack",
    "umbrella",
    "handbag",
    "tie",
    "suitcase",
    "frisbee",
    "skis",
    "snowboard",
    "sports ball",
    "kite",
    "baseball bat",
    "baseball glove",
    "skateboard",
    "surfboard",
    "tennis racket",
    "bottle",
    "wine glass",
    "cup",
    "fork",
    "knife",
    "spoon",
    "bowl",
    "banana",
    "apple",
    "sandwich",
    "orange",
    "broccoli",
    "carrot",
    "hot dog",
    "pizza",
    "donut",
    "cake",
    "chair",
    "couch",
    "potted plant",
    "bed",
    "dining table",
    "toilet",
    "tv",
    "laptop",
    "mouse",
    "remote",
    "keyboard",
    "cell phone",
    "microwave",
    "oven",
    "toaster",
    "sink",
    "refrigerator",
    "book",
    "clock",
    "vase",
    "scissors",
    "teddy bear",
    "hair drier",
    "toothbrush",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vocabulary {
    Open,
    Closed(BTreeSet<String>),
}

impl Vocabulary {
    pub fn accepts(&self, label: &str) -> bool {
        match self {
            Vocabulary::Open => true,
            Vocabulary::Closed(set) => set.contains(label),
        }
    }
}

/// Error model of a detector: what it can name, how often it misses, how
/// badly it localizes, how often it hallucinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityProfile {
    pub name: String,
    pub vocabulary: Vocabulary,
    pub miss_rate: f64,
    /// Standard deviation of bearing and elevation noise, radians.
    pub localization_sigma: f64,
    pub false_positive_rate: f64,
}

impl FidelityProfile {
    pub fn oracle() -> Self {
        Self {
            name: "ORACLE".into(),
            vocabulary: Vocabulary::Open,
            miss_rate: 0.0,
            localization_sigma: 0.0,
            false_positive_rate: 0.0,
        }
    }

    /// Closed-set detector (YOLO-like).
    pub fn closed_vocab_80() -> Self {
        Self {
            name: "CLOSED_VOCAB_80".into(),
            vocabulary: Vocabulary::Closed(COCO_80.iter().map(|s| s.to_string()).collect()),
            miss_rate: 0.1,
            localization_sigma: 0.02,
            false_positive_rate: 0.01,
        }
    }

    /// Open-vocabulary segmentation with coarse localization (CLIPSeg-like).
    pub fn open_vocab_coarse() -> Self {
        Self {
            name: "OPEN_VOCAB_COARSE".into(),
            vocabulary: Vocabulary::Open,
            miss_rate: 0.15,
            localization_sigma: 0.15,
            false_positive_rate: 0.05,
        }
    }

    /// Open-vocabulary grounded detection.
    pub fn open_vocab_precise() -> Self {
        Self {
            name: "OPEN_VOCAB_PRECISE".into(),
            vocabulary: Vocabulary::Open,
            miss_rate: 0.05,
            localization_sigma: 0.03,
            false_positive_rate: 0.01,
        }
    }

    pub fn shipped() -> [FidelityProfile; 4] {
        [
            Self::oracle(),
            Self::closed_vocab_80(),
            Self::open_vocab_coarse(),
            Self::open_vocab_precise(),
        ]
    }

    pub fn check(&self) -> Result<(), String> {
        let prob = |v: f64, what: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(format!("{what} {v} outside [0, 1]"))
            }
        };
        prob(self.miss_rate, "miss_rate")?;
        prob(self.false_positive_rate, "false_positive_rate")?;
        if !(self.localization_sigma >= 0.0 && self.localization_sigma.is_finite()) {
            return Err(format!(
                "localization_sigma {} must be >= 0",
                self.localization_sigma
            ));
        }
        Ok(())
    }
}

impl FromStr for FidelityProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_uppercase();
        FidelityProfile::shipped()
            .into_iter()
            .find(|p| p.name == wanted)
            .ok_or_else(|| Error::Config(format!("unknown fidelity profile {s:?}")))
    }
}
