pub const MIN_WINDOW: u32 = 1;
pub const MAX_WINDOW: u32 = 14;

/// Days before and after the centre covered by a window of `window` days.
/// Even windows take the extra day from the earlier side.
pub fn window_extent(window: usize) -> (usize, usize) {
    let span = window.saturating_sub(1);
    (span.div_ceil(2), span / 2)
}

/// Centre-aligned moving average. Positions without a complete window
/// inside the series are `None`; `window` 1 is the identity.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<Option<f64>> {
    assert!(window >= 1, "window must be at least 1");
    let (before, after) = window_extent(window);
    (0..values.len())
        .map(|i| {
            if i < before || i + after >= values.len() {
                return None;
            }
            let sum: f64 = values[i - before..=i + after].iter().sum();
            Some(sum / window as f64)
        })
        .collect()
}
