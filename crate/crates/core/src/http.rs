//! Blocking JSON-over-HTTP transport shared by the remote backends.

use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Address and timeout of an external model backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    pub url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    5_000
}

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            timeout_ms: default_timeout_ms(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout_ms = timeout.as_millis() as u64;
        self
    }
}

/// POSTs `body` and returns the response text. Any transport failure,
/// timeout or non-2xx status is reported as a string.
pub(crate) fn post_json(endpoint: &Endpoint, body: &str) -> Result<String, String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(endpoint.timeout_ms)))
        .build()
        .into();
    let mut response = agent
        .post(&endpoint.url)
        .header("content-type", "application/json")
        .send(body)
        .map_err(|e| e.to_string())?;
    response
        .body_mut()
        .read_to_string()
        .map_err(|e| e.to_string())
}
