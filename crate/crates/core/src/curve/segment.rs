use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token bucket `γ_{r,b}`: `b + r·t` for `t > 0`, zero at `t = 0`.
///
/// Rates are in Mbit/s, bursts in Mbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenBucket {
    pub rate: f64,
    pub burst: f64,
}

impl TokenBucket {
    pub fn new(rate: f64, burst: f64) -> Result<Self> {
        let tb = TokenBucket { rate, burst };
        tb.validate()?;
        Ok(tb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::Argument(format!("token bucket rate {} must be finite and >= 0", self.rate)));
        }
        if !(self.burst.is_finite() && self.burst >= 0.0) {
            return Err(Error::Argument(format!("token bucket burst {} must be finite and >= 0", self.burst)));
        }
        Ok(())
    }

    /// Value of the affine part `b + r·t`, i.e. the right limit for every `t >= 0`.
    #[inline]
    pub fn line(&self, t: f64) -> f64 {
        self.burst + self.rate * t
    }
}

/// Rate-latency curve `β_{R,T}(t) = R·[t − T]⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLatency {
    pub rate: f64,
    pub latency: f64,
}

impl RateLatency {
    pub fn new(rate: f64, latency: f64) -> Result<Self> {
        let rl = RateLatency { rate, latency };
        rl.validate()?;
        Ok(rl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::Argument(format!("rate-latency rate {} must be finite and >= 0", self.rate)));
        }
        if !(self.latency.is_finite() && self.latency >= 0.0) {
            return Err(Error::Argument(format!("rate-latency latency {} must be finite and >= 0", self.latency)));
        }
        Ok(())
    }

    /// Unclipped line `R·(t − T)`.
    #[inline]
    pub fn line(&self, t: f64) -> f64 {
        self.rate * (t - self.latency)
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.line(t).max(0.0)
    }
}
