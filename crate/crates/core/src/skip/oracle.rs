//! Brute-force reference for the predictors.

use super::div_ceil;

/// First pair of connection-event indices `(a, b) != (0, 0)` with
/// `|φ + a·T_l − b·T_h| <= d`, found by stepping both trains.
///
/// Searches H events `0..=max_h`; `None` if no overlap occurs among them.
pub fn oracle_next_overlap(phi: i64, t_l: i64, t_h: i64, d: i64, max_h: u64) -> Option<(u64, u64)> {
    let mut a: i64 = 0;
    for b in 0..=max_h as i64 {
        let base = phi - b * t_h;
        // First L event not entirely left of H event b.
        let lo = div_ceil(-d - base, t_l).max(0);
        a = a.max(lo);
        let mut k = a;
        while base + k * t_l <= d {
            if (k, b) != (0, 0) {
                return Some((k as u64, b as u64));
            }
            k += 1;
        }
    }
    None
}

/// H events in one joint period of the two trains.
pub fn joint_period_h(t_l: u64, t_h: u64) -> u64 {
    t_l / crate::ble::gcd(t_l, t_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_first_overlap() {
        assert_eq!(oracle_next_overlap(50_000, 30_000, 100_000, 742, 10), Some((5, 2)));
        assert_eq!(oracle_next_overlap(0, 30_000, 100_000, 742, 10), Some((10, 3)));
        assert_eq!(oracle_next_overlap(10_000, 25_000, 100_000, 742, 10), None);
        assert_eq!(oracle_next_overlap(-60_300, 30_000, 100_000, 742, 10), Some((2, 0)));
    }
}
