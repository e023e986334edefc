//! Trial fan-out over OS threads.
//!
//! Estimator trials are pure functions of the trial index, so splitting a
//! range into contiguous chunks and merging the partial counts gives
//! bit-identical results for every thread count.

/// Split `0..trials` into at most `threads` contiguous chunks, map each on
/// its own thread, and fold the results in chunk order.
pub fn map_trials<T, F>(trials: u64, threads: usize, map: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let threads = threads.max(1).min(trials.max(1) as usize);
    let chunk = trials.div_ceil(threads as u64);
    let ranges: Vec<std::ops::Range<u64>> = (0..threads as u64)
        .map(|i| (i * chunk).min(trials)..((i + 1) * chunk).min(trials))
        .filter(|r| !r.is_empty())
        .collect();
    if ranges.len() <= 1 {
        return ranges.into_iter().map(&map).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(|| map(r)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}
