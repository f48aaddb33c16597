//! Simulated grounding: detector fidelity profiles over ground-truth
//! visibility, and a client for real detector backends.

mod detect;
mod profile;
mod remote;

pub use detect::{detect, matches_ref, relation_holds, Detection, DetectionQuery, NEAR_THRESHOLD};
pub use profile::{FidelityProfile, Vocabulary, COCO_80};
pub use remote::{
    box_to_detection, decode_detect_response, remote_detect, DetectError, DetectRequest,
    DetectResponse, FrameRef, RemoteBox, DEFAULT_MIN_CONFIDENCE, DETECT_SCHEMA,
};
