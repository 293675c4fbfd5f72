//! Small shared helpers: numeric formatting, grids, and a scoped parallel map.

/// Formats `v` with `sig` significant digits, keeping trailing zeros
/// (`0.564190` for six significant digits of 1/√π, not `0.56419`).
///
/// Uses positional notation when the decimal exponent lies in `[-4, sig)`
/// and scientific notation otherwise. NaN and infinities format as Rust
/// prints them.
pub fn format_sig(v: f64, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = decimal_exponent(v);
    // Rounding to `sig` digits can carry into the next power of ten
    // (0.9999 → 1.000); detect that and drop one decimal.
    let fmt_at = |exp: i32| -> String {
        if exp < -4 || exp >= sig as i32 {
            format!("{:.*e}", sig - 1, v)
        } else {
            let decimals = (sig as i32 - 1 - exp).max(0) as usize;
            format!("{v:.decimals$}")
        }
    };
    let first = fmt_at(exp);
    let rounded: f64 = first.parse().unwrap_or(v);
    if rounded != 0.0 && decimal_exponent(rounded) > exp {
        fmt_at(exp + 1)
    } else {
        first
    }
}

fn decimal_exponent(v: f64) -> i32 {
    // The `{:e}` rendering carries the exact decimal exponent after 'e'.
    let s = format!("{:e}", v.abs());
    s.split('e')
        .nth(1)
        .and_then(|p| p.parse().ok())
        .unwrap_or(0)
}

/// `n` evenly spaced points from `a` to `b` inclusive (`n >= 2`); endpoints
/// are exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Parses a thread-count setting: `None`, empty, `"0"`, or garbage mean
/// "auto" (all available cores); a positive integer is used as-is.
pub fn parse_thread_count(setting: Option<&str>) -> usize {
    let auto = || {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    };
    match setting.and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(0) | None => auto(),
        Some(n) => n,
    }
}

/// Resolved thread count from the `HEATPROP_THREADS` environment variable.
pub fn env_thread_count() -> usize {
    let setting = std::env::var("HEATPROP_THREADS").ok();
    parse_thread_count(setting.as_deref())
}

/// Applies `f` to every item, fanning work out over `threads` scoped threads
/// in contiguous chunks. Output order matches input order. Panics in workers
/// propagate.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let mut pieces: Vec<Vec<R>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|slice| scope.spawn(|| slice.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        for h in handles {
            pieces.push(h.join().expect("worker thread panicked"));
        }
    });
    pieces.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits_keep_trailing_zero() {
        let v = 1.0 / std::f64::consts::PI.sqrt();
        assert_eq!(format_sig(v, 6), "0.564190");
    }

    #[test]
    fn twelve_significant_digits() {
        let v = 1.0 / std::f64::consts::PI.sqrt();
        assert_eq!(format_sig(v, 12), "0.564189583548");
        assert_eq!(format_sig(1.8134302039235095, 12), "1.81343020392");
    }

    #[test]
    fn rounding_carry_keeps_digit_count() {
        assert_eq!(format_sig(0.99999999, 3), "1.00");
        assert_eq!(format_sig(9.9999e-1, 2), "1.0");
    }

    #[test]
    fn zero_negative_and_extremes() {
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(-0.0, 6), "0");
        assert_eq!(format_sig(-2.5, 3), "-2.50");
        assert_eq!(format_sig(1.5e-7, 3), "1.50e-7");
        assert_eq!(format_sig(3.0e15, 6), "3.00000e15");
        assert_eq!(format_sig(42.0, 4), "42.00");
    }

    #[test]
    fn linspace_hits_endpoints_exactly() {
        let xs = linspace(-2.0, 2.0, 21);
        assert_eq!(xs.len(), 21);
        assert_eq!(xs[0], -2.0);
        assert_eq!(xs[20], 2.0);
        assert!((xs[10] - 0.0).abs() < 1e-15);
        let step = xs[1] - xs[0];
        for w in xs.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-12);
        }
    }

    #[test]
    fn thread_count_parsing() {
        assert_eq!(parse_thread_count(Some("3")), 3);
        assert!(parse_thread_count(Some("0")) >= 1);
        assert!(parse_thread_count(None) >= 1);
        assert!(parse_thread_count(Some("nope")) >= 1);
    }

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<i64> = (0..101).collect();
        let serial: Vec<i64> = items.iter().map(|x| x * x).collect();
        for threads in [1, 2, 4, 7] {
            let par = parallel_map(&items, threads, |x| x * x);
            assert_eq!(par, serial, "threads={threads}");
        }
    }
}
