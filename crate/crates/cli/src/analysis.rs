//! Harmonic content of one sampled drive cycle.

use std::f64::consts::PI;

/// Cosine and sine projections of `values` onto harmonic `h` of the drive
/// frequency. `times` must cover exactly one period with the last sample
/// repeating the first.
fn project(times: &[f64], values: &[f64], drive_frequency: f64, h: usize) -> (f64, f64) {
    let n = values.len() - 1;
    let w = h as f64 * drive_frequency;
    (0..n).fold((0.0, 0.0), |(c, s), i| {
        let th = w * times[i];
        (c + values[i] * th.cos(), s + values[i] * th.sin())
    })
}

/// Amplitudes of harmonics 1..=n/2 (index 0 holds harmonic 1).
pub fn harmonic_amplitudes(times: &[f64], values: &[f64], drive_frequency: f64) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = values.len().saturating_sub(1);
    (1..=n / 2)
        .map(|h| {
            let (c, s) = project(times, values, drive_frequency, h);
            2.0 * c.hypot(s) / n as f64
        })
        .collect()
}

/// Harmonic with the largest amplitude, DC excluded.
pub fn dominant_harmonic(times: &[f64], values: &[f64], drive_frequency: f64) -> Option<usize> {
    let amps = harmonic_amplitudes(times, values, drive_frequency);
    amps.iter()
        .enumerate()
        .filter(|(_, a)| a.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, a)| **a > 0.0)
        .map(|(i, _)| i + 1)
}

/// Delay from a drive maximum (Ωt ≡ 0 mod 2π) to the next minimum of the
/// second harmonic of `values`, in [0, π/Ω).
pub fn lag_to_second_harmonic_minimum(times: &[f64], values: &[f64], drive_frequency: f64) -> f64 {
    let (c, s) = project(times, values, drive_frequency, 2);
    let phase = s.atan2(c);
    let w2 = 2.0 * drive_frequency;
    ((phase + PI) / w2).rem_euclid(PI / drive_frequency)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize, omega: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let period = 2.0 * PI / omega;
        let t: Vec<f64> = (0..=n)
            .map(|i| 3.0 * period + period * i as f64 / n as f64)
            .collect();
        let v = t.iter().map(|&t| f(t)).collect();
        (t, v)
    }

    #[test]
    fn picks_out_second_harmonic() {
        let om = 0.5;
        let (t, v) = cycle(64, om, |t| {
            3.0 + 0.2 * (om * t).cos() + 0.7 * (2.0 * om * t + 0.3).sin()
        });
        let a = harmonic_amplitudes(&t, &v, om);
        assert!((a[0] - 0.2).abs() < 1e-12);
        assert!((a[1] - 0.7).abs() < 1e-12);
        assert_eq!(dominant_harmonic(&t, &v, om), Some(2));
    }

    #[test]
    fn lag_of_shifted_minimum() {
        let om = 0.5;
        for lag in [0.0, 0.4, 2.0, 6.0] {
            let (t, v) = cycle(100, om, |t| -(2.0 * om * (t - lag)).cos());
            let got = lag_to_second_harmonic_minimum(&t, &v, om);
            assert!((got - lag).abs() < 1e-10, "{got} vs {lag}");
        }
    }
}
