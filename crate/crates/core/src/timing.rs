//! CPU time of the calling thread.
//!
//! Solver calls run on one thread each, so thread CPU time equals the
//! process CPU time the call consumed even when several workers run.

use std::time::Duration;

/// CPU time consumed by the current thread so far.
pub fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

/// Runs `f` and returns its result with the CPU time it used.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = thread_cpu_time();
    let out = f();
    (out, thread_cpu_time().saturating_sub(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_busy_work() {
        let (sum, spent) = measure(|| (0..2_000_000u64).map(|x| x ^ (x >> 3)).sum::<u64>());
        assert!(sum > 0);
        assert!(spent > Duration::ZERO);
    }
}
