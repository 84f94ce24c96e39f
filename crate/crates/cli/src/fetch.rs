//! Fetching pages over HTTP(S).

use std::io::Read;
use std::time::Duration;

use reqwest::header::CONTENT_TYPE;

pub const DEFAULT_USER_AGENT: &str = "segfilter/1.0";

/// Environment variable that replaces the default user agent.
pub const USER_AGENT_ENV: &str = "SEGFILTER_UA";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchConfig {
    pub timeout: Duration,
    pub max_bytes: usize,
    pub user_agent: String,
    pub max_redirects: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(15),
            max_bytes: segfilter::dom::DEFAULT_MAX_INPUT_BYTES,
            user_agent: DEFAULT_USER_AGENT.to_owned(),
            max_redirects: 5,
        }
    }
}

impl FetchConfig {
    /// Defaults, with the user agent taken from `SEGFILTER_UA` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(ua) = std::env::var(USER_AGENT_ENV) {
            if !ua.is_empty() {
                cfg.user_agent = ua;
            }
        }
        cfg
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("cannot fetch {0:?}: only http and https urls are supported")]
    UnsupportedUrl(String),
    #[error("request timed out")]
    Timeout,
    #[error("response is larger than {limit} bytes")]
    TooLarge { limit: usize },
    #[error("server answered with HTTP status {0}")]
    HttpStatus(u16),
    #[error("response content type is {0:?}, not HTML")]
    NotHtml(String),
    #[error("gave up after {0} redirects")]
    TooManyRedirects(usize),
    #[error("connection failed: {0}")]
    ConnectionFailed(String),
}

/// Body of a 2xx response whose content type is HTML or absent.
pub fn fetch_url(url: &str, cfg: &FetchConfig) -> Result<Vec<u8>, FetchError> {
    let parsed =
        reqwest::Url::parse(url).map_err(|_| FetchError::UnsupportedUrl(url.to_owned()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(FetchError::UnsupportedUrl(url.to_owned()));
    }

    let client = reqwest::blocking::Client::builder()
        .timeout(cfg.timeout)
        .user_agent(cfg.user_agent.as_str())
        .redirect(reqwest::redirect::Policy::limited(cfg.max_redirects))
        .build()
        .map_err(|e| FetchError::ConnectionFailed(e.to_string()))?;
    let resp = client.get(parsed).send().map_err(|e| classify(&e, cfg))?;

    let status = resp.status();
    if !status.is_success() {
        return Err(FetchError::HttpStatus(status.as_u16()));
    }
    if let Some(value) = resp.headers().get(CONTENT_TYPE) {
        let raw = String::from_utf8_lossy(value.as_bytes()).into_owned();
        if !is_html(&raw) {
            return Err(FetchError::NotHtml(raw));
        }
    }
    if resp
        .content_length()
        .is_some_and(|n| n > cfg.max_bytes as u64)
    {
        return Err(FetchError::TooLarge {
            limit: cfg.max_bytes,
        });
    }

    let mut body = Vec::new();
    resp.take(cfg.max_bytes as u64 + 1)
        .read_to_end(&mut body)
        .map_err(|e| classify_io(&e, cfg))?;
    if body.len() > cfg.max_bytes {
        return Err(FetchError::TooLarge {
            limit: cfg.max_bytes,
        });
    }
    Ok(body)
}

fn is_html(content_type: &str) -> bool {
    let mime = content_type
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase();
    mime.is_empty() || mime == "text/html" || mime == "application/xhtml+xml"
}

fn classify(e: &reqwest::Error, cfg: &FetchConfig) -> FetchError {
    if e.is_timeout() {
        FetchError::Timeout
    } else if e.is_redirect() {
        FetchError::TooManyRedirects(cfg.max_redirects)
    } else {
        FetchError::ConnectionFailed(e.to_string())
    }
}

fn classify_io(e: &std::io::Error, cfg: &FetchConfig) -> FetchError {
    if let Some(inner) = e.get_ref().and_then(|i| i.downcast_ref::<reqwest::Error>()) {
        return classify(inner, cfg);
    }
    if e.kind() == std::io::ErrorKind::TimedOut {
        FetchError::Timeout
    } else {
        FetchError::ConnectionFailed(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_types() {
        assert!(is_html("text/html"));
        assert!(is_html("Text/HTML; charset=utf-8"));
        assert!(is_html("application/xhtml+xml"));
        assert!(is_html(""));
        assert!(!is_html("application/json"));
        assert!(!is_html("image/png"));
    }

    #[test]
    fn rejects_other_schemes() {
        let cfg = FetchConfig::default();
        for url in ["ftp://example.com/", "file:///etc/passwd", "not a url"] {
            assert!(matches!(
                fetch_url(url, &cfg),
                Err(FetchError::UnsupportedUrl(_))
            ));
        }
    }

    #[test]
    fn defaults() {
        let cfg = FetchConfig::default();
        assert_eq!(cfg.timeout, Duration::from_secs(15));
        assert_eq!(cfg.max_bytes, 8 * 1024 * 1024);
        assert_eq!(cfg.user_agent, "segfilter/1.0");
        assert_eq!(cfg.max_redirects, 5);
    }
}
