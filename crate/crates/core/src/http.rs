//! Blocking HTTP plumbing shared by the service clients.

use std::thread;
use std::time::Duration;

pub(crate) const DEFAULT_USER_AGENT: &str =
    concat!("texttiger/", env!("CARGO_PKG_VERSION"), " (prompt-refinement research tool)");

/// How a failed attempt should be treated by [`retry`].
pub(crate) enum Attempt<T, E> {
    Done(T),
    Retry(E),
    Fail(E),
}

/// Runs `op` up to `attempts` times, sleeping `backoff * 2^k` between tries.
pub(crate) fn retry<T, E>(
    attempts: usize,
    backoff: Duration,
    mut op: impl FnMut(usize) -> Attempt<T, E>,
) -> Result<T, E> {
    let attempts = attempts.max(1);
    let mut k = 0;
    loop {
        match op(k) {
            Attempt::Done(v) => return Ok(v),
            Attempt::Fail(e) => return Err(e),
            Attempt::Retry(e) if k + 1 >= attempts => return Err(e),
            Attempt::Retry(_) => {
                let wait = backoff.saturating_mul(1u32 << k.min(16));
                if !wait.is_zero() {
                    thread::sleep(wait);
                }
                k += 1;
            }
        }
    }
}

pub(crate) fn transient_status(status: u16) -> bool {
    status == 408 || status == 429 || status >= 500
}

pub(crate) fn client(timeout: Duration, user_agent: &str) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .user_agent(user_agent)
        .build()
        .expect("HTTP client configuration is valid")
}
