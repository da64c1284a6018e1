use crate::domain::Color;
use crate::error::{Error, Result};

/// Number of levels per channel: the smallest `L` with `L^3 >= n + 2`.
pub fn levels_for(n: usize) -> usize {
    let target = n as u64 + 2;
    let mut l = (target as f64).cbrt().floor() as u64;
    while l.pow(3) < target {
        l += 1;
    }
    while l > 1 && (l - 1).pow(3) >= target {
        l -= 1;
    }
    l as usize
}

/// Returns `n` distinct colors, none of them white or black.
///
/// Each channel takes one of the levels `1 - l/L` for `l = 0..L`; the
/// Cartesian product is walked in descending lexicographic `(r, g, b)` order
/// with white (always first) skipped. The lowest level is `1/L`, so black
/// never appears.
pub fn generate_colors(n: usize) -> Result<Vec<Color>> {
    if n == 0 {
        return Err(Error::EmptyInput("at least one color must be requested"));
    }
    let l = levels_for(n);
    let step = 1.0 / l as f64;
    let tone = |i: usize| 1.0 - step * i as f64;
    let colors = (0..l)
        .flat_map(|r| (0..l).flat_map(move |g| (0..l).map(move |b| (r, g, b))))
        .skip(1)
        .take(n)
        .map(|(r, g, b)| Color::new(tone(r), tone(g), tone(b)))
        .collect();
    Ok(colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_counts() {
        assert_eq!(levels_for(1), 2);
        assert_eq!(levels_for(6), 2);
        assert_eq!(levels_for(7), 3);
        assert_eq!(levels_for(25), 3);
        assert_eq!(levels_for(26), 4);
    }

    #[test]
    fn first_color() {
        assert_eq!(generate_colors(1).unwrap(), vec![Color::new(1.0, 1.0, 0.5)]);
    }

    #[test]
    fn six_from_two_levels() {
        let c = generate_colors(6).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[4], Color::new(0.5, 1.0, 0.5));
        assert_eq!(c[5], Color::new(0.5, 0.5, 1.0));
    }

    #[test]
    fn twenty_five_from_three_levels() {
        let c = generate_colors(25).unwrap();
        assert_eq!(c.len(), 25);
        let last = c[24];
        let third = 1.0 - 2.0 / 3.0;
        assert_eq!(last, Color::new(third, third, 1.0 - 1.0 / 3.0));
    }

    #[test]
    fn zero_rejected() {
        assert!(generate_colors(0).is_err());
    }
}
