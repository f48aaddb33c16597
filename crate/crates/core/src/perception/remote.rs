//! `detect/1` client for an external image detector. Pixel boxes from the
//! backend are converted into bearing/elevation/range with the camera model.

use serde::{Deserialize, Serialize};

use super::detect::{Detection, DetectionQuery};
use crate::http::{post_json, Endpoint};
use crate::world::{CameraModel, Pose};

pub const DETECT_SCHEMA: &str = "detect/1";

/// Boxes scored below this are discarded by default.
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.35;

/// The camera frame a remote detector should look at, plus the pose and
/// geometry needed to turn its pixel boxes back into directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRef {
    pub image_id: String,
    pub pose: Pose,
    pub width: f64,
    pub height: f64,
    /// Ground height used to estimate range from a downward ray.
    pub ground: f64,
    /// Acceptance threshold on backend confidences.
    pub min_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectRequest {
    pub schema: String,
    pub image_id: String,
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteBox {
    pub label: String,
    pub bbox: [f64; 4],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectResponse {
    pub schema: String,
    pub detections: Vec<RemoteBox>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectError {
    #[error("detector backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("detector response violates the detect/1 schema: {0}")]
    SchemaViolation(String),
}

fn check_box(b: &RemoteBox, frame: &FrameRef) -> Result<(), String> {
    if b.label.trim().is_empty() {
        return Err("detection with empty label".into());
    }
    if !(0.0..=1.0).contains(&b.confidence) {
        return Err(format!("confidence {} outside [0, 1]", b.confidence));
    }
    let [x0, y0, x1, y1] = b.bbox;
    if !b.bbox.iter().all(|v| v.is_finite()) || x0 > x1 || y0 > y1 {
        return Err(format!("malformed bbox {:?}", b.bbox));
    }
    if x0 < 0.0 || y0 < 0.0 || x1 > frame.width || y1 > frame.height {
        return Err(format!(
            "bbox {:?} outside the {}x{} image",
            b.bbox, frame.width, frame.height
        ));
    }
    Ok(())
}

/// Maps a box center to a direction with a linear angle-per-pixel model,
/// then estimates range by intersecting the ray with the ground plane.
pub fn box_to_detection(
    index: usize,
    b: &RemoteBox,
    frame: &FrameRef,
    camera: &CameraModel,
) -> Detection {
    let [x0, y0, x1, y1] = b.bbox;
    let u = (x0 + x1) / 2.0 / frame.width;
    let v = (y0 + y1) / 2.0 / frame.height;
    let bearing = (0.5 - u) * camera.horizontal_fov;
    let elevation = (camera.pitch + (0.5 - v) * camera.vertical_fov)
        .clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    let height = frame.pose.position.z - frame.ground;
    let range = if elevation < 0.0 && height > 0.0 {
        (height / (-elevation).sin()).min(camera.max_range)
    } else {
        camera.max_range
    };
    Detection {
        object_id: format!("remote-{index}"),
        label: b.label.clone(),
        bearing,
        elevation,
        range: range.max(1e-3),
        confidence: b.confidence,
    }
}

pub fn decode_detect_response(
    body: &str,
    frame: &FrameRef,
    camera: &CameraModel,
) -> Result<Vec<Detection>, DetectError> {
    let response: DetectResponse =
        serde_json::from_str(body).map_err(|e| DetectError::SchemaViolation(e.to_string()))?;
    if response.schema != DETECT_SCHEMA {
        return Err(DetectError::SchemaViolation(format!(
            "schema tag {:?}, expected {DETECT_SCHEMA:?}",
            response.schema
        )));
    }
    response
        .detections
        .iter()
        .enumerate()
        .filter_map(|(i, b)| match check_box(b, frame) {
            Err(e) => Some(Err(DetectError::SchemaViolation(e))),
            Ok(()) if b.confidence < frame.min_confidence => None,
            Ok(()) => Some(Ok(box_to_detection(i, b, frame, camera))),
        })
        .collect()
}

/// Queries an external detector for the labels of `queries` in `frame`.
pub fn remote_detect(
    frame: &FrameRef,
    queries: &[DetectionQuery],
    backend: &Endpoint,
    camera: &CameraModel,
) -> Result<Vec<Detection>, DetectError> {
    let request = DetectRequest {
        schema: DETECT_SCHEMA.to_string(),
        image_id: frame.image_id.clone(),
        queries: queries.iter().map(|q| q.target.label.clone()).collect(),
    };
    let body = serde_json::to_string(&request).expect("request serializes");
    let text = post_json(backend, &body).map_err(DetectError::BackendUnavailable)?;
    decode_detect_response(&text, frame, camera)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Vec3;

    fn frame() -> FrameRef {
        FrameRef {
            image_id: "f0".into(),
            pose: Pose::new(Vec3::new(0.0, 0.0, 2.0), 0.0),
            width: 640.0,
            height: 480.0,
            ground: 0.0,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
        }
    }

    #[test]
    fn centered_box_looks_along_the_optical_axis() {
        let cam = CameraModel::default();
        let b = RemoteBox {
            label: "car".into(),
            bbox: [300.0, 220.0, 340.0, 260.0],
            confidence: 0.8,
        };
        let d = box_to_detection(0, &b, &frame(), &cam);
        assert!(d.bearing.abs() < 1e-12);
        assert!((d.elevation - cam.pitch).abs() < 1e-12);
        // 2 m altitude, 45 degrees down
        assert!((d.range - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(d.is_valid());
    }

    #[test]
    fn out_of_range_confidence_rejected() {
        let body = r#"{"schema":"detect/1","detections":[{"label":"car","bbox":[0,0,10,10],"confidence":1.7}]}"#;
        assert!(matches!(
            decode_detect_response(body, &frame(), &CameraModel::default()),
            Err(DetectError::SchemaViolation(_))
        ));
    }

    #[test]
    fn bad_boxes_rejected() {
        for bbox in ["[10,0,0,10]", "[0,0,700,10]", "[0,0,10]"] {
            let body = format!(
                r#"{{"schema":"detect/1","detections":[{{"label":"car","bbox":{bbox},"confidence":0.5}}]}}"#
            );
            assert!(
                decode_detect_response(&body, &frame(), &CameraModel::default()).is_err(),
                "{bbox}"
            );
        }
    }
}
